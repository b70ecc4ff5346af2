//! Acceptance suite. Prints one verdict line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, FRAC_PI_6, FRAC_PI_8, PI};
use std::fmt::Write as _;
use std::panic::{self, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use lodisc_core::{
    brute_force_distribution, check_unambiguous_constraints, closed_form_confidences, confidence,
    maximize_success, optimal_discrimination_unitary, outcome_distribution, probability_table,
    success_probability, two_splitter_network, unambiguous_events, BellLikeFamily, ConfidenceGroup,
    DetectionEvent, ModeUnitary, Priors, ProbabilityTable, TwoPhotonState, C64, DEFAULT_EPSILON,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EPS: f64 = DEFAULT_EPSILON;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        detail: detail.into(),
    }
}

fn family(t1: f64, t2: f64) -> BellLikeFamily {
    BellLikeFamily::from_angles(t1, t2).unwrap()
}

fn table(f: &BellLikeFamily, u: &ModeUnitary) -> ProbabilityTable {
    probability_table(f, u, Priors::uniform()).unwrap()
}

fn success(f: &BellLikeFamily, u: &ModeUnitary) -> f64 {
    success_probability(&table(f, u), EPS).unwrap()
}

fn ev(m: usize, n: usize) -> DetectionEvent {
    DetectionEvent::new(m, n, 4).unwrap()
}

fn bell_like_optimum() -> Verdict {
    let mut worst = 0.0f64;
    let mut count = 0;
    for t2 in [PI / 16.0, FRAC_PI_8, 3.0 * PI / 16.0, FRAC_PI_6, 0.7] {
        for t1 in [PI / 16.0, FRAC_PI_6, FRAC_PI_4] {
            let f = family(t1, t2);
            let p = success(&f, &optimal_discrimination_unitary(&f));
            worst = worst.max((p - 0.25).abs());
            count += 1;
        }
    }
    verdict(
        worst <= 1e-10,
        format!("{count} families, max |P - 0.25| = {worst:.1e}"),
    )
}

fn bell_case() -> Verdict {
    let f = family(FRAC_PI_4, FRAC_PI_4);
    let p = success(&f, &two_splitter_network(FRAC_1_SQRT_2, FRAC_PI_4).unwrap());
    verdict((p - 0.5).abs() <= 1e-10, format!("P = {p:.12}"))
}

fn separable_case() -> Verdict {
    let f = family(0.0, 0.0);
    let p = success(&f, &two_splitter_network(FRAC_1_SQRT_2, 0.0).unwrap());
    verdict((p - 1.0).abs() <= 1e-10, format!("P = {p:.12}"))
}

fn optimizer_bound() -> Verdict {
    let start = Instant::now();
    let partial = maximize_success(&family(FRAC_PI_6, FRAC_PI_8), 64, 7, EPS).unwrap();
    let bell = maximize_success(&BellLikeFamily::bell(), 64, 7, EPS).unwrap();
    let elapsed = start.elapsed();
    let ok = (partial.best_success - 0.25).abs() <= 1e-6
        && bell.best_success >= 0.5 - 1e-6
        && elapsed < Duration::from_secs(60);
    verdict(
        ok,
        format!(
            "partial {:.9} (restart {}), Bell {:.9}; no counterexample over 64 restarts; {:.1}s",
            partial.best_success,
            partial.best_restart,
            bell.best_success,
            elapsed.as_secs_f64()
        ),
    )
}

/// 9×9 grid `θ2 = kπ/16`, `φ = jπ/16` with `θ1 = π/6`.
fn grid() -> impl Iterator<Item = (usize, usize, f64, f64)> {
    (0..=8usize)
        .flat_map(|k| (0..=8usize).map(move |j| (k, j, k as f64 * PI / 16.0, j as f64 * PI / 16.0)))
}

fn grid_table(t2: f64, phi: f64) -> (BellLikeFamily, ProbabilityTable) {
    let f = family(FRAC_PI_6, t2);
    let t = table(&f, &two_splitter_network(FRAC_1_SQRT_2, phi).unwrap());
    (f, t)
}

const GROUPS: [ConfidenceGroup; 3] = [
    ConfidenceGroup::D1,
    ConfidenceGroup::D2,
    ConfidenceGroup::D3,
];

fn confidence_closed_forms() -> Verdict {
    let mut worst = 0.0f64;
    let (mut compared, mut undefined) = (0, 0);
    for (_, _, t2, phi) in grid() {
        let (f, t) = grid_table(t2, phi);
        let closed = closed_form_confidences(f.concurrence1(), f.concurrence2(), phi).unwrap();
        for g in GROUPS {
            let want = g.closed_form_for(t2)(&closed);
            for e in g.events() {
                match confidence(&t, e) {
                    Some((d, _)) => {
                        worst = worst.max((d - want).abs());
                        compared += 1;
                    }
                    None => undefined += 1,
                }
            }
        }
    }
    verdict(
        worst <= 1e-10 && compared > 0,
        format!(
            "{compared} event confidences on 81 points, max deviation {worst:.1e}; \
             {undefined} never-firing events skipped; D2 and D3 exchange closed forms above theta2 = pi/4"
        ),
    )
}

/// Every firing event of the group has confidence 1.
fn certain(t: &ProbabilityTable, g: ConfidenceGroup) -> bool {
    let ds: Vec<f64> = g
        .events()
        .into_iter()
        .filter_map(|e| confidence(t, e))
        .map(|c| c.0)
        .collect();
    !ds.is_empty() && ds.iter().all(|d| *d >= 1.0 - 1e-10)
}

fn confidence_loci() -> Verdict {
    let mut errors = Vec::new();
    let mut both = Vec::new();
    for (k, j, t2, phi) in grid() {
        let (f, t) = grid_table(t2, phi);
        let (d2, d3) = (
            certain(&t, ConfidenceGroup::D2),
            certain(&t, ConfidenceGroup::D3),
        );
        let c2 = f.concurrence2();
        if c2 > 1e-12 && c2 < 1.0 - 1e-12 {
            if d2 != (j == k) {
                errors.push(format!("D2 at k={k} j={j}"));
            }
            if d3 != (j == 8 - k) {
                errors.push(format!("D3 at k={k} j={j}"));
            }
        }
        if d2 && d3 {
            both.push((k, j, c2));
        }
    }
    let endpoints_only = both
        .iter()
        .all(|&(_, _, c2)| !(1e-12..=1.0 - 1e-12).contains(&c2));
    let has_bell = both.iter().any(|&(k, j, _)| k == 4 && j == 4);
    let has_product = both.iter().any(|&(k, j, _)| k == 0 && j == 0);
    let mut detail = format!(
        "D2 = 1 only at phi = theta2, D3 = 1 only at phi = pi/2 - theta2; both at (k, j) = {:?}",
        both.iter().map(|&(k, j, _)| (k, j)).collect::<Vec<_>>()
    );
    if !errors.is_empty() {
        write!(detail, "; mismatches: {}", errors.join(", ")).unwrap();
    }
    verdict(
        errors.is_empty() && endpoints_only && has_bell && has_product,
        detail,
    )
}

fn random_state(rng: &mut ChaCha8Rng) -> TwoPhotonState {
    let raw: [C64; 4] =
        std::array::from_fn(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    TwoPhotonState::new(raw.map(|z| z / norm)).unwrap()
}

/// Relabeling that maps the engine's detectors onto the printed table.
fn relabel(m: usize) -> usize {
    [0, 2, 1, 4, 3][m]
}

/// The printed table, cell by cell, in its own labels.
fn printed_cell(state: usize, e: DetectionEvent, t1: f64, t2: f64, phi: f64) -> f64 {
    let (s1, c1) = (t1.sin().powi(2), t1.cos().powi(2));
    let (s4, c4) = ((2.0 * phi).sin().powi(2), (2.0 * phi).cos().powi(2));
    let (cm, sm) = ((t2 - phi).cos().powi(2), (t2 - phi).sin().powi(2));
    let (cp, sp) = ((t2 + phi).cos().powi(2), (t2 + phi).sin().powi(2));
    let (a, b) = if state == 0 { (c1, s1) } else { (s1, c1) };
    match (state, e.m(), e.n()) {
        (0 | 1, 1, 1) | (0 | 1, 3, 3) => a * s4 / 2.0,
        (0 | 1, 2, 2) | (0 | 1, 4, 4) => b / 2.0,
        (0 | 1, 1, 3) => a * c4,
        (2, 1, 2) | (2, 1, 4) => cm / 2.0,
        (2, 2, 3) | (2, 3, 4) => sp / 2.0,
        (3, 1, 2) | (3, 1, 4) => sm / 2.0,
        (3, 2, 3) | (3, 3, 4) => cp / 2.0,
        _ => 0.0,
    }
}

fn oracle_equivalence() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut oracle_err, mut norm_err) = (0.0f64, 0.0f64);
    for i in 0..200 {
        let dim = 4 + i % 3;
        let s = random_state(&mut rng);
        let u = ModeUnitary::random(dim, &mut rng).unwrap();
        let fast = outcome_distribution(&s, &u).unwrap();
        let slow = brute_force_distribution(&s, &u).unwrap();
        oracle_err = oracle_err.max(fast.max_abs_diff(&slow));
        norm_err = norm_err.max((fast.total() - 1.0).abs());
    }

    // Printed table, up to the relabeling 1↔2, 3↔4.
    let mut flagged = std::collections::BTreeSet::new();
    let mut unexpected = Vec::new();
    let mut printed_row_err = 0.0f64;
    for (t1, t2, phi) in [
        (0.3, 0.5, 0.2),
        (FRAC_PI_6, FRAC_PI_8, FRAC_PI_8),
        (1.0, 1.2, 0.9),
    ] {
        let f = family(t1, t2);
        let t = table(&f, &two_splitter_network(FRAC_1_SQRT_2, phi).unwrap());
        for i in 0..4 {
            let mut printed_total = 0.0;
            for e in DetectionEvent::all(4) {
                let mapped = DetectionEvent::new(relabel(e.m()), relabel(e.n()), 4).unwrap();
                let printed = printed_cell(i, mapped, t1, t2, phi);
                printed_total += printed;
                if (t.prob(i, e) - printed).abs() > 1e-12 {
                    let documented = i >= 2 && (mapped == ev(1, 4) || mapped == ev(2, 3));
                    let cell = format!("Psi{} P{}", i + 1, mapped);
                    if documented {
                        flagged.insert(cell);
                    } else {
                        unexpected.push(cell);
                    }
                }
            }
            printed_row_err = printed_row_err.max((printed_total - 1.0).abs());
        }
    }
    let ok = oracle_err <= 1e-12 && norm_err <= 1e-10 && unexpected.is_empty();
    verdict(
        ok,
        format!(
            "200 pairs in dims 4-6: max oracle deviation {oracle_err:.1e}, max |sum - 1| {norm_err:.1e}; \
             printed table matches after relabeling 1<->2, 3<->4 except cells {:?} \
             (printed rows deviate from unit sum by up to {printed_row_err:.2}){}",
            flagged,
            if unexpected.is_empty() { String::new() } else { format!("; unexpected: {unexpected:?}") }
        ),
    )
}

fn constraint_consistency() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let families = [
        family(FRAC_PI_6, FRAC_PI_8),
        family(0.3, 1.1),
        family(1.2, 0.4),
        BellLikeFamily::bell(),
    ];
    let random: Vec<ModeUnitary> = (0..50)
        .map(|_| ModeUnitary::random(4, &mut rng).unwrap())
        .collect();
    let (mut checked, mut positives, mut mismatches, mut bunched) = (0, 0, 0, 0);
    for f in &families {
        let eq15 = optimal_discrimination_unitary(f);
        let mut networks = random.clone();
        networks.push(eq15.clone());
        networks.push(eq15.permute_outputs(&[2, 0, 3, 1]).unwrap());
        networks.push(eq15.permute_outputs(&[1, 0, 3, 2]).unwrap());
        networks.push(
            eq15.with_output_phases(&[0.3, -1.2, 2.0, 0.7])
                .with_global_phase(0.4),
        );
        for u in &networks {
            let t = table(f, u);
            let events = unambiguous_events(&t, EPS).unwrap();
            bunched += events.iter().filter(|(e, _)| e.is_bunched()).count();
            for e in DetectionEvent::all(4) {
                let identified = events.iter().find(|(x, _)| *x == e).map(|&(_, i)| i);
                for target in 0..4 {
                    let r = check_unambiguous_constraints(u, f, e.m(), e.n(), target).unwrap();
                    checked += 1;
                    positives += usize::from(r.passed);
                    if r.passed != (identified == Some(target)) {
                        mismatches += 1;
                    }
                }
            }
        }
    }
    verdict(
        mismatches == 0 && bunched == 0 && positives > 0,
        format!(
            "{checked} (event, target) checks over 4 families x 54 networks, {positives} unambiguous, \
             {mismatches} mismatches, {bunched} unambiguous same-mode events"
        ),
    )
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let paths = [dir.path().join("a.json"), dir.path().join("b.json")];
    for p in &paths {
        let status = Command::new(env!("CARGO_BIN_EXE_lodisc"))
            .args(["optimize", "--theta1"])
            .arg(FRAC_PI_6.to_string())
            .arg("--theta2")
            .arg(FRAC_PI_8.to_string())
            .args(["--restarts", "64", "--seed", "7", "--out"])
            .arg(p)
            .status()
            .unwrap();
        if !status.success() {
            return verdict(false, format!("optimize exited with {status}"));
        }
    }
    let a = std::fs::read(&paths[0]).unwrap();
    let b = std::fs::read(&paths[1]).unwrap();
    verdict(
        a == b,
        format!("{} bytes each, identical = {}", a.len(), a == b),
    )
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("25% Bell-like optimum", bell_like_optimum),
        ("50% Bell case", bell_case),
        ("100% separable case", separable_case),
        ("optimizer bound corroboration", optimizer_bound),
        ("confidence closed forms", confidence_closed_forms),
        ("confidence-1 loci", confidence_loci),
        ("oracle equivalence", oracle_equivalence),
        ("constraint/event consistency", constraint_consistency),
        ("determinism", determinism),
    ];
    // Keep panics from individual criteria on their own line.
    panic::set_hook(Box::new(|info| eprintln!("panic: {info}")));
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        let v = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| verdict(false, "panicked"));
        failed += usize::from(!v.passed);
        let mark = if v.passed { "PASS" } else { "FAIL" };
        println!("criterion {} {mark}: {name}: {}", n + 1, v.detail);
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
