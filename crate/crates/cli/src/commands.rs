//! One function per subcommand; each returns the bytes to write.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};
use std::fmt::Write as _;

use lodisc_core::{
    bell_like_states, brute_force_distribution, check_unambiguous_constraints,
    closed_form_confidences, confidence, maximize_success, optimal_discrimination_unitary,
    outcome_distribution, probability_table, success_probability, two_splitter_network,
    unambiguous_events, BellLikeFamily, ConfidenceGroup, DetectionEvent, NetworkParams, Priors,
    ProbabilityTable,
};
use serde::{Deserialize, Serialize};

use crate::format::{num, opt_num};
use crate::options::{Command, RunConfig};
use crate::Failure;

/// Tolerances of the `verify` checks.
const EXACT_TOL: f64 = 1e-10;
const ORACLE_TOL: f64 = 1e-12;
const SEARCH_TOL: f64 = 1e-6;

/// Concurrence margin that separates the product, Bell and partially
/// entangled regimes.
const REGIME_TOL: f64 = 1e-12;

pub struct Output {
    pub text: String,
    /// `false` when a self-check failed; the text is still written.
    pub ok: bool,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, ok: true }
    }
}

pub fn run(cfg: &RunConfig) -> Result<Output, Failure> {
    match cfg.command {
        Command::Probs => probs(cfg).map(Output::ok),
        Command::Table => table(cfg).map(Output::ok),
        Command::ConfidenceSweep => confidence_sweep(cfg).map(Output::ok),
        Command::OptimalUnitary => optimal_unitary(cfg).map(Output::ok),
        Command::Optimize => optimize(cfg).map(Output::ok),
        Command::Sweep => sweep(cfg).map(Output::ok),
        Command::Verify => verify(cfg),
    }
}

fn probs(cfg: &RunConfig) -> Result<String, Failure> {
    let state = cfg.state()?;
    let family = match cfg.theta2 {
        Some(_) => Some(cfg.family()?),
        None => None,
    };
    let u = cfg.unitary(family.as_ref())?;
    let dist = outcome_distribution(&state, &u)?;
    let mut out = String::from("m,n,probability\n");
    for (ev, p) in dist.iter() {
        writeln!(out, "{},{},{}", ev.m(), ev.n(), num(p)).expect("string write");
    }
    Ok(out)
}

/// Bunched events first, then coincidences in lexicographic order.
fn column_order(dim: usize) -> Vec<DetectionEvent> {
    let all = DetectionEvent::all(dim);
    let (mut bunched, coincident): (Vec<_>, Vec<_>) = all.into_iter().partition(|e| e.is_bunched());
    bunched.extend(coincident);
    bunched
}

fn table(cfg: &RunConfig) -> Result<String, Failure> {
    let family = cfg.family()?;
    let u = cfg.unitary(Some(&family))?;
    let t = probability_table(&family, &u, cfg.priors)?;
    let cols = column_order(u.dim());
    let mut out = String::from("state");
    for ev in &cols {
        write!(out, ",ev_{}{}", ev.m(), ev.n()).expect("string write");
    }
    out.push('\n');
    for i in 0..4 {
        write!(out, "psi{}", i + 1).expect("string write");
        for &ev in &cols {
            write!(out, ",{}", num(t.prob(i, ev))).expect("string write");
        }
        out.push('\n');
    }
    Ok(out)
}

/// Bayes confidence of a group: the first of its events that can fire.
pub fn group_confidence(table: &ProbabilityTable, group: ConfidenceGroup) -> Option<f64> {
    group
        .events()
        .into_iter()
        .find_map(|ev| confidence(table, ev).map(|c| c.0))
}

fn confidence_sweep(cfg: &RunConfig) -> Result<String, Failure> {
    let theta1 = cfg.sweep_theta1();
    let mut out = String::from("c2,phi,D1,D2,D3\n");
    for i in 0..cfg.c2_steps {
        let c2 = i as f64 / (cfg.c2_steps - 1) as f64;
        // θ2 ∈ [0, π/4] so that C2 = sin 2θ2 covers [0, 1] once.
        let theta2 = 0.5 * c2.asin();
        let family = BellLikeFamily::from_angles(theta1, theta2)?;
        for j in 0..cfg.phi_steps {
            let phi = FRAC_PI_2 * j as f64 / (cfg.phi_steps - 1) as f64;
            let u = two_splitter_network(cfg.eta1, phi)?;
            let t = probability_table(&family, &u, cfg.priors)?;
            let [d1, d2, d3] = [
                ConfidenceGroup::D1,
                ConfidenceGroup::D2,
                ConfidenceGroup::D3,
            ]
            .map(|g| group_confidence(&t, g));
            writeln!(
                out,
                "{},{},{},{},{}",
                num(c2),
                num(phi),
                opt_num(d1),
                opt_num(d2),
                opt_num(d3)
            )
            .expect("string write");
        }
    }
    Ok(out)
}

fn optimal_unitary(cfg: &RunConfig) -> Result<String, Failure> {
    let u = optimal_discrimination_unitary(&cfg.family()?);
    let u = if cfg.dagger { u.dagger() } else { u };
    Ok(to_json(&u))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("serializable");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct OptimizeReport {
    best_success: f64,
    best_params: NetworkParams,
    seed: u64,
    evaluations: usize,
    converged: bool,
}

fn optimize(cfg: &RunConfig) -> Result<String, Failure> {
    let family = cfg.family()?;
    let r = maximize_success(&family, cfg.restarts, cfg.seed, cfg.epsilon)?;
    Ok(to_json(&OptimizeReport {
        best_success: r.best_success,
        best_params: r.best_params,
        seed: r.seed,
        evaluations: r.evaluations,
        converged: r.converged,
    }))
}

#[derive(Deserialize)]
struct GridRow {
    theta1: f64,
    theta2: f64,
}

fn sweep(cfg: &RunConfig) -> Result<String, Failure> {
    let path = cfg
        .grid_file
        .as_ref()
        .ok_or_else(|| Failure::Usage("sweep requires --grid-file".into()))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Failure::Invalid(format!("cannot read {}: {e}", path.display())))?;
    let grid: Vec<(f64, f64)> = reader
        .deserialize::<GridRow>()
        .map(|row| {
            row.map(|r| (cfg.angle(r.theta1), cfg.angle(r.theta2)))
                .map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
        })
        .collect::<Result<_, _>>()?;
    if grid.is_empty() {
        return Err(Failure::Invalid(format!("{}: empty grid", path.display())));
    }
    let mut out = String::from("theta1,theta2,c2,best_success\n");
    for (theta1, theta2) in grid {
        let family = BellLikeFamily::from_angles(theta1, theta2)?;
        let r = maximize_success(&family, cfg.restarts, cfg.seed, cfg.epsilon)?;
        writeln!(
            out,
            "{},{},{},{}",
            num(theta1),
            num(theta2),
            num(family.concurrence2()),
            num(r.best_success)
        )
        .expect("string write");
    }
    Ok(out)
}

/// Known optimum for uniform priors, by entanglement regime.
pub fn reference_success(family: &BellLikeFamily, priors: &Priors) -> Option<f64> {
    if *priors != Priors::uniform() {
        return None;
    }
    let (c1, c2) = (family.concurrence1(), family.concurrence2());
    let partial = |c: f64| c > REGIME_TOL && c < 1.0 - REGIME_TOL;
    if c1 <= REGIME_TOL && c2 <= REGIME_TOL {
        Some(1.0)
    } else if c1 >= 1.0 - REGIME_TOL && c2 >= 1.0 - REGIME_TOL {
        Some(0.5)
    } else if partial(c1) && partial(c2) {
        Some(0.25)
    } else {
        None
    }
}

struct Checks {
    lines: String,
    ok: bool,
}

impl Checks {
    fn record(&mut self, name: &str, passed: bool, detail: String) {
        self.ok &= passed;
        let verdict = if passed { "PASS" } else { "FAIL" };
        writeln!(self.lines, "{name}: {verdict} ({detail})").expect("string write");
    }
}

fn verify(cfg: &RunConfig) -> Result<Output, Failure> {
    let family = cfg.family()?;
    let u = cfg.unitary(Some(&family))?;
    let table = probability_table(&family, &u, cfg.priors)?;
    let mut checks = Checks {
        lines: String::new(),
        ok: true,
    };

    let mut norm_err = 0.0f64;
    let mut oracle_err = 0.0f64;
    for s in bell_like_states(&family) {
        let fast = outcome_distribution(&s, &u)?;
        let slow = brute_force_distribution(&s, &u)?;
        norm_err = norm_err.max((fast.total() - 1.0).abs());
        oracle_err = oracle_err.max(fast.max_abs_diff(&slow));
    }
    checks.record(
        "normalization",
        norm_err <= EXACT_TOL,
        format!("max |sum - 1| = {norm_err:.1e}"),
    );
    checks.record(
        "oracle",
        oracle_err <= ORACLE_TOL,
        format!("max deviation = {oracle_err:.1e}"),
    );

    let events = unambiguous_events(&table, cfg.epsilon)?;
    // Product states may legitimately land both photons in one detector.
    if family.concurrence1().min(family.concurrence2()) > REGIME_TOL {
        let bunched = events.iter().filter(|(e, _)| e.is_bunched()).count();
        checks.record(
            "bunched-events",
            bunched == 0,
            format!("{bunched} unambiguous same-mode events"),
        );
    }

    let mut mismatches = 0;
    for ev in DetectionEvent::all(u.dim()) {
        let identified = events.iter().find(|(e, _)| *e == ev).map(|&(_, i)| i);
        for target in 0..4 {
            let r = check_unambiguous_constraints(&u, &family, ev.m(), ev.n(), target)?;
            if r.passed != (identified == Some(target)) {
                mismatches += 1;
            }
        }
    }
    checks.record(
        "constraints",
        mismatches == 0,
        format!("{mismatches} disagreements with the confidence test"),
    );

    if let Some((theta1, theta2)) = family.angles() {
        let phi = theta2;
        let t = probability_table(
            &family,
            &two_splitter_network(FRAC_1_SQRT_2, phi)?,
            cfg.priors,
        )?;
        let closed = closed_form_confidences(family.concurrence1(), family.concurrence2(), phi)?;
        let mut worst = 0.0f64;
        if cfg.priors == Priors::uniform() {
            for g in [
                ConfidenceGroup::D1,
                ConfidenceGroup::D2,
                ConfidenceGroup::D3,
            ] {
                if let Some(d) = group_confidence(&t, g) {
                    worst = worst.max((d - g.closed_form_for(theta2)(&closed)).abs());
                }
            }
            checks.record(
                "closed-form-confidence",
                worst <= EXACT_TOL,
                format!("theta1 = {theta1:.6}, phi = theta2, max deviation = {worst:.1e}"),
            );
        }
    }

    let success = success_probability(&table, cfg.epsilon)?;
    let reference = reference_success(&family, &cfg.priors);
    let optimal_source = matches!(cfg.unitary, crate::options::UnitarySource::Optimal);
    if let (Some(expected), true) = (reference, optimal_source) {
        checks.record(
            "network-success",
            (success - expected).abs() <= EXACT_TOL,
            format!("expected {expected:.6}"),
        );
    }

    if cfg.priors == Priors::uniform() {
        let r = maximize_success(&family, cfg.restarts, cfg.seed, cfg.epsilon)?;
        let passed = match reference {
            Some(expected) => (r.best_success - expected).abs() <= SEARCH_TOL,
            None => true,
        };
        checks.record(
            "search",
            passed,
            format!(
                "best {:.6} over {} restarts, seed {}",
                r.best_success, cfg.restarts, cfg.seed
            ),
        );
    }

    let verdict = if checks.ok { "PASS" } else { "FAIL" };
    let mut text = checks.lines;
    writeln!(text, "success={success:.6} {verdict}").expect("string write");
    Ok(Output {
        text,
        ok: checks.ok,
    })
}
