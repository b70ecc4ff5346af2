//! Bayes confidences, unambiguous events and success probabilities for the
//! four Bell-like states behind a fixed network.
//!
//! # Detector labeling
//!
//! The two-splitter network used here is `η1` on modes (1,3) followed by
//! `η2 = cos φ` on modes (2,4), with the lower-left minus sign. Computed from
//! first principles, its confidences fall into three groups (see
//! [`ConfidenceGroup`]):
//!
//! * `D1`: events (1,1), (2,2), (3,3), (4,4), (2,4). Event (1,3) never fires.
//! * `D2`: events (1,2), (1,4).
//! * `D3`: events (2,3), (3,4).
//!
//! The closed forms in [`closed_form_confidences`] are written in terms of
//! `C2 = sin 2θ2` and use `√(1 − C2²)`, which equals `cos 2θ2` only for
//! `θ2 ≤ π/4`. For `θ2 > π/4` the `D2` and `D3` formulas trade event groups;
//! [`ConfidenceGroup::closed_form_for`] encodes that.

use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use crate::detection::{
    dagger_column, outcome_distribution, pi_map, DetectionEvent, OutcomeDistribution,
};
use crate::optics::ModeUnitary;
use crate::states::{bell_like_states, BellLikeFamily, TwoPhotonState};
use crate::{Error, Result, C64, NORM_TOL};

/// Probabilities below this are treated as exactly zero when deciding whether
/// an event is possible at all.
pub const ZERO_PROBABILITY: f64 = 1e-14;

/// An event only counts towards success if it fires with at least this
/// probability under the state it identifies.
pub const MIN_FIRING_PROBABILITY: f64 = 1e-12;

/// Residual tolerance for the vanishing conditions in
/// [`check_unambiguous_constraints`].
pub const CONSTRAINT_TOL: f64 = 1e-10;

/// Prior probabilities of the four states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct Priors([f64; 4]);

impl Priors {
    pub fn new(p: [f64; 4]) -> Result<Self> {
        let sum: f64 = p.iter().sum();
        if p.iter().any(|x| x.is_nan() || *x < 0.0) || (sum - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidPriors { sum });
        }
        Ok(Self(p))
    }

    pub fn uniform() -> Self {
        Self([0.25; 4])
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn as_array(&self) -> [f64; 4] {
        self.0
    }
}

impl Default for Priors {
    fn default() -> Self {
        Self::uniform()
    }
}

impl TryFrom<[f64; 4]> for Priors {
    type Error = Error;
    fn try_from(p: [f64; 4]) -> Result<Self> {
        Self::new(p)
    }
}

impl From<Priors> for [f64; 4] {
    fn from(p: Priors) -> Self {
        p.0
    }
}

/// Row `i` holds the outcome distribution of Ψ_{i+1}.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTable {
    pub rows: [OutcomeDistribution; 4],
    pub priors: Priors,
}

impl ProbabilityTable {
    pub fn dim(&self) -> usize {
        self.rows[0].dim()
    }

    pub fn events(&self) -> Vec<DetectionEvent> {
        DetectionEvent::all(self.dim())
    }

    /// `P(ev | Ψ_{i+1})`.
    pub fn prob(&self, i: usize, ev: DetectionEvent) -> f64 {
        self.rows[i].get(ev)
    }

    /// Joint weights `p_i · P(ev | Ψ_i)`.
    fn weights(&self, ev: DetectionEvent) -> [f64; 4] {
        [0, 1, 2, 3].map(|i| self.priors.get(i) * self.rows[i].get(ev))
    }
}

pub fn probability_table(
    family: &BellLikeFamily,
    u: &ModeUnitary,
    priors: Priors,
) -> Result<ProbabilityTable> {
    let [a, b, c, d] = bell_like_states(family);
    Ok(ProbabilityTable {
        rows: [
            outcome_distribution(&a, u)?,
            outcome_distribution(&b, u)?,
            outcome_distribution(&c, u)?,
            outcome_distribution(&d, u)?,
        ],
        priors,
    })
}

/// Maximal posterior `max_i P(Ψ_i | ev)` and its 0-based state index, or
/// `None` when no state can produce `ev`. Ties go to the lowest index.
pub fn confidence(table: &ProbabilityTable, ev: DetectionEvent) -> Option<(f64, usize)> {
    let w = table.weights(ev);
    let total: f64 = w.iter().sum();
    if total <= ZERO_PROBABILITY {
        return None;
    }
    let (best, &wmax) =
        w.iter().enumerate().fold(
            (0, &w[0]),
            |acc, (i, x)| if *x > *acc.1 { (i, x) } else { acc },
        );
    Some((wmax / total, best))
}

/// Per-event confidence entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventConfidence {
    pub event: DetectionEvent,
    pub confidence: Option<f64>,
    pub state: Option<usize>,
    pub unambiguous: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceReport {
    pub entries: Vec<EventConfidence>,
}

impl ConfidenceReport {
    pub fn get(&self, ev: DetectionEvent) -> Option<&EventConfidence> {
        self.entries.iter().find(|e| e.event == ev)
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon <= 0.1) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    Ok(())
}

pub fn confidence_report(table: &ProbabilityTable, epsilon: f64) -> Result<ConfidenceReport> {
    check_epsilon(epsilon)?;
    let entries = table
        .events()
        .into_iter()
        .map(|event| {
            let c = confidence(table, event);
            let unambiguous = match c {
                Some((d, i)) => {
                    d >= 1.0 - epsilon && table.prob(i, event) >= MIN_FIRING_PROBABILITY
                }
                None => false,
            };
            EventConfidence {
                event,
                confidence: c.map(|x| x.0),
                state: c.map(|x| x.1),
                unambiguous,
            }
        })
        .collect();
    Ok(ConfidenceReport { entries })
}

/// Events whose confidence is at least `1 − ε`, with the state they identify.
pub fn unambiguous_events(
    table: &ProbabilityTable,
    epsilon: f64,
) -> Result<Vec<(DetectionEvent, usize)>> {
    Ok(confidence_report(table, epsilon)?
        .entries
        .into_iter()
        .filter(|e| e.unambiguous)
        .map(|e| (e.event, e.state.expect("unambiguous events have a state")))
        .collect())
}

/// `Σ_ev p_t · P(ev | Ψ_t)` over unambiguous events `ev` identifying `Ψ_t`.
pub fn success_probability(table: &ProbabilityTable, epsilon: f64) -> Result<f64> {
    Ok(unambiguous_events(table, epsilon)?
        .into_iter()
        .fold(0.0, |acc, (ev, i)| {
            acc + table.priors.get(i) * table.prob(i, ev)
        }))
}

/// `(D1, D2, D3)` for the two-splitter network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedFormConfidences {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

/// ```text
/// D1 = (1 + √(1−C1²)) / 2
/// D2 = (1 + |√(1−C2²) cos 2φ + C2 sin 2φ|) / 2
/// D3 = (1 + |√(1−C2²) cos 2φ − C2 sin 2φ|) / 2
/// ```
pub fn closed_form_confidences(c1: f64, c2: f64, phi: f64) -> Result<ClosedFormConfidences> {
    for (name, value) in [("c1", c1), ("c2", c2)] {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::ConcurrenceOutOfRange { name, value });
        }
    }
    let r1 = (1.0 - c1 * c1).sqrt();
    let r2 = (1.0 - c2 * c2).sqrt();
    let (s, c) = (2.0 * phi).sin_cos();
    Ok(ClosedFormConfidences {
        d1: 0.5 * (1.0 + r1),
        d2: 0.5 * (1.0 + (r2 * c + c2 * s).abs()),
        d3: 0.5 * (1.0 + (r2 * c - c2 * s).abs()),
    })
}

/// Event groups sharing one confidence value under the two-splitter network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConfidenceGroup {
    D1,
    D2,
    D3,
}

impl ConfidenceGroup {
    pub fn events(self) -> Vec<DetectionEvent> {
        let pairs: &[(usize, usize)] = match self {
            ConfidenceGroup::D1 => &[(1, 1), (2, 2), (3, 3), (4, 4), (2, 4)],
            ConfidenceGroup::D2 => &[(1, 2), (1, 4)],
            ConfidenceGroup::D3 => &[(2, 3), (3, 4)],
        };
        pairs
            .iter()
            .map(|&(m, n)| DetectionEvent::new(m, n, 4).expect("4-mode labels"))
            .collect()
    }

    /// Which closed-form expression gives this group's confidence at `θ2`.
    pub fn closed_form_for(self, theta2: f64) -> fn(&ClosedFormConfidences) -> f64 {
        let swapped = theta2 > FRAC_PI_4;
        match (self, swapped) {
            (ConfidenceGroup::D1, _) => |c| c.d1,
            (ConfidenceGroup::D2, false) | (ConfidenceGroup::D3, true) => |c| c.d2,
            (ConfidenceGroup::D3, false) | (ConfidenceGroup::D2, true) => |c| c.d3,
        }
    }
}

/// `φ*_m = u*_m ⊕ v*_m ⊕ w*_m` with blocks of size 2, 2 and `dim − 4`.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnDecomposition {
    pub u: [C64; 2],
    pub v: [C64; 2],
    pub w: Vec<C64>,
}

impl ColumnDecomposition {
    pub fn reassemble(&self) -> Vec<C64> {
        self.u
            .iter()
            .chain(&self.v)
            .chain(&self.w)
            .copied()
            .collect()
    }

    /// `⟨φ_l|π(e)|φ*_m⟩` evaluated blockwise as `u_lᵀ A_e v_m + v_lᵀ A_eᵀ u_m`;
    /// the auxiliary block drops out.
    pub fn pi_element(state: &TwoPhotonState, l: &Self, m: &Self) -> C64 {
        let a = crate::states::coefficient_matrix(state);
        let av = a.apply(m.v);
        let atu = a.transpose().apply(m.u);
        l.u[0] * av[0] + l.u[1] * av[1] + l.v[0] * atu[0] + l.v[1] * atu[1]
    }
}

pub fn column_decomposition(u: &ModeUnitary, m: usize) -> Result<ColumnDecomposition> {
    if m == 0 || m > u.dim() {
        return Err(Error::ModeOutOfRange {
            mode: m,
            dim: u.dim(),
        });
    }
    let col = dagger_column(u, m);
    Ok(ColumnDecomposition {
        u: [col[0], col[1]],
        v: [col[2], col[3]],
        w: col[4..].to_vec(),
    })
}

/// Residuals of the unambiguity conditions for detectors `(l, m)` and a target
/// state. For target Ψ3 these read
///
/// ```text
/// α1 X00 + β1 X11 = 0          (Ψ1 amplitude vanishes)
/// β1* X00 − α1* X11 = 0        (Ψ2 amplitude vanishes)
/// α2 X01 + β2 X10 ≠ 0          (Ψ3 amplitude survives)
/// β2* X01 − α2* X10 = 0        (Ψ4 amplitude vanishes)
/// ```
///
/// with `X_e = ⟨φ_l|π(|e⟩)|φ*_m⟩`. Other targets swap roles: the two states of
/// the other pair must vanish and so must the partner in the target's pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintReport {
    pub target: usize,
    /// Amplitudes of the two states in the other pair.
    pub other_pair: [f64; 2],
    /// Amplitude of the target state.
    pub target_amplitude: f64,
    /// Amplitude of the target's partner state.
    pub partner: f64,
    pub passed: bool,
}

pub fn check_unambiguous_constraints(
    u: &ModeUnitary,
    family: &BellLikeFamily,
    l: usize,
    m: usize,
    target: usize,
) -> Result<ConstraintReport> {
    if target >= 4 {
        return Err(Error::StateIndexOutOfRange(target));
    }
    for mode in [l, m] {
        if mode == 0 || mode > u.dim() {
            return Err(Error::ModeOutOfRange { mode, dim: u.dim() });
        }
    }
    let phi_l = dagger_column(u, l);
    let phi_m = dagger_column(u, m);
    let x = |j, k| -> Result<C64> {
        Ok(pi_map(&TwoPhotonState::basis(j, k)?, u.dim())?.bilinear(&phi_l, &phi_m))
    };
    let (x00, x01, x10, x11) = (x(1, 3)?, x(1, 4)?, x(2, 3)?, x(2, 4)?);
    let (a1, b1, a2, b2) = (
        family.alpha1(),
        family.beta1(),
        family.alpha2(),
        family.beta2(),
    );
    let amps = [
        (a1 * x00 + b1 * x11).norm(),
        (b1.conj() * x00 - a1.conj() * x11).norm(),
        (a2 * x01 + b2 * x10).norm(),
        (b2.conj() * x01 - a2.conj() * x10).norm(),
    ];
    let partner = target ^ 1;
    let others: Vec<usize> = (0..4).filter(|&i| i / 2 != target / 2).collect();
    let other_pair = [amps[others[0]], amps[others[1]]];
    // Same firing floor as `unambiguous_events`, converted to an amplitude.
    let firing = if l == m {
        0.5 * amps[target].powi(2)
    } else {
        amps[target].powi(2)
    };
    let passed = other_pair.iter().all(|r| *r <= CONSTRAINT_TOL)
        && amps[partner] <= CONSTRAINT_TOL
        && firing >= MIN_FIRING_PROBABILITY;
    Ok(ConstraintReport {
        target,
        other_pair,
        target_amplitude: amps[target],
        partner: amps[partner],
        passed,
    })
}
