//! Two-photon detection statistics behind a linear-optical network.
//!
//! With `a†_j = Σ_l U*_lj b†_l` a state `Σ α_jk a†_j a†_k |0⟩` becomes a
//! quadratic form in the output operators. Writing `N` for the matrix with
//! `N_jk = α_jk` and `φ*_m` for the m-th column of `U†`:
//!
//! * `P(1_m, 1_n) = |⟨φ_n|(N + Nᵀ)|φ*_m⟩|²` for `m ≠ n`,
//! * `P(2_m) = ½ |⟨φ_m|(N + Nᵀ)|φ*_m⟩|²`, the ½ absorbing the `√2` of
//!   `b†²|0⟩ = √2|2⟩`.
//!
//! [`brute_force_distribution`] recomputes the same numbers by expanding the
//! polynomial term by term and is kept independent of the matrix route.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::optics::ModeUnitary;
use crate::states::{coefficient_matrix, TwoPhotonState};
use crate::{Error, Result, C64, MIN_DIM};

/// A two-photon click pattern: one photon in detector `m` and one in `n`
/// (`m == n` for both photons in one detector). Stored with `m ≤ n`, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DetectionEvent {
    m: usize,
    n: usize,
}

impl DetectionEvent {
    /// Canonicalizes the label order and checks `1 ≤ m, n ≤ dim`.
    pub fn new(a: usize, b: usize, dim: usize) -> Result<Self> {
        for mode in [a, b] {
            if mode == 0 || mode > dim {
                return Err(Error::ModeOutOfRange { mode, dim });
            }
        }
        Ok(Self {
            m: a.min(b),
            n: a.max(b),
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_bunched(&self) -> bool {
        self.m == self.n
    }

    /// All `dim·(dim+1)/2` events in lexicographic `(m, n)` order.
    pub fn all(dim: usize) -> Vec<Self> {
        (1..=dim)
            .flat_map(|m| (m..=dim).map(move |n| Self { m, n }))
            .collect()
    }

    /// The ten 4-mode events in table column order: bunched events first,
    /// then coincidences in lexicographic order.
    pub fn table_order() -> [Self; 10] {
        let e = |m, n| Self { m, n };
        [
            e(1, 1),
            e(2, 2),
            e(3, 3),
            e(4, 4),
            e(1, 2),
            e(1, 3),
            e(1, 4),
            e(2, 3),
            e(2, 4),
            e(3, 4),
        ]
    }
}

impl fmt::Display for DetectionEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.m, self.n)
    }
}

/// Probabilities of every two-photon event for one input state.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    dim: usize,
    probs: BTreeMap<DetectionEvent, f64>,
}

impl OutcomeDistribution {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Probability of `ev`; zero for events outside the distribution.
    pub fn get(&self, ev: DetectionEvent) -> f64 {
        self.probs.get(&ev).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    /// Events and probabilities in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (DetectionEvent, f64)> + '_ {
        self.probs.iter().map(|(e, p)| (*e, *p))
    }

    /// Largest absolute difference over all events of either distribution.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.probs
            .keys()
            .chain(other.probs.keys())
            .map(|&e| (self.get(e) - other.get(e)).abs())
            .fold(0.0, f64::max)
    }
}

/// `π(|e⟩) = N + Nᵀ` as a `dim×dim` symmetric matrix:
/// `[[0, A_e, 0], [A_eᵀ, 0, 0], [0, 0, 0]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiMatrix {
    matrix: DMatrix<C64>,
}

impl PiMatrix {
    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Entry with 1-based indices.
    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.matrix[(i - 1, j - 1)]
    }

    /// `xᵀ π y` (no conjugation), i.e. `⟨φ_l|π|φ*_m⟩` for `x = φ*_l`, `y = φ*_m`.
    pub fn bilinear(&self, x: &[C64], y: &[C64]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (i, xi) in x.iter().enumerate() {
            for (j, yj) in y.iter().enumerate() {
                let p = self.matrix[(i, j)];
                if p != C64::new(0.0, 0.0) {
                    acc += xi * p * yj;
                }
            }
        }
        acc
    }
}

pub fn pi_map(state: &TwoPhotonState, dim: usize) -> Result<PiMatrix> {
    if dim < MIN_DIM {
        return Err(Error::UnsupportedDim {
            dim,
            min: MIN_DIM,
            max: crate::MAX_DIM,
        });
    }
    let a = coefficient_matrix(state).entries;
    let mut m = DMatrix::zeros(dim, dim);
    for (j, row) in a.iter().enumerate() {
        for (k, &x) in row.iter().enumerate() {
            m[(j, k + 2)] = x;
            m[(k + 2, j)] = x;
        }
    }
    Ok(PiMatrix { matrix: m })
}

/// The m-th column of `U†` (1-based), i.e. `(U*_m1, …, U*_m,dim)`.
pub(crate) fn dagger_column(u: &ModeUnitary, m: usize) -> Vec<C64> {
    u.matrix().row(m - 1).iter().map(|x| x.conj()).collect()
}

fn check_event(u: &ModeUnitary, ev: DetectionEvent) -> Result<()> {
    if ev.n > u.dim() {
        return Err(Error::ModeOutOfRange {
            mode: ev.n,
            dim: u.dim(),
        });
    }
    Ok(())
}

/// Probability of `ev` for `state` behind `u`.
pub fn event_probability(
    state: &TwoPhotonState,
    u: &ModeUnitary,
    ev: DetectionEvent,
) -> Result<f64> {
    check_event(u, ev)?;
    let pi = pi_map(state, u.dim())?;
    let phi_m = dagger_column(u, ev.m);
    if ev.is_bunched() {
        let amp = pi.bilinear(&phi_m, &phi_m);
        debug_assert!({
            // 2|⟨φ_m|N|φ*_m⟩|² must agree with ½|⟨φ_m|(N+Nᵀ)|φ*_m⟩|².
            let mut n_only = C64::new(0.0, 0.0);
            for ((j, k), a) in state.terms() {
                n_only += phi_m[j - 1] * a * phi_m[k - 1];
            }
            (2.0 * n_only.norm_sqr() - 0.5 * amp.norm_sqr()).abs() < 1e-12
        });
        Ok(0.5 * amp.norm_sqr())
    } else {
        let phi_n = dagger_column(u, ev.n);
        Ok(pi.bilinear(&phi_n, &phi_m).norm_sqr())
    }
}

/// `U* π U†`, whose `(l, m)` entry is `⟨φ_l|π|φ*_m⟩`.
pub(crate) fn amplitude_matrix(state: &TwoPhotonState, u: &ModeUnitary) -> Result<DMatrix<C64>> {
    let pi = pi_map(state, u.dim())?;
    let conj = u.matrix().map(|x| x.conj());
    Ok(&conj * pi.matrix() * u.matrix().adjoint())
}

/// All event probabilities for `state` behind `u`.
pub fn outcome_distribution(
    state: &TwoPhotonState,
    u: &ModeUnitary,
) -> Result<OutcomeDistribution> {
    let w = amplitude_matrix(state, u)?;
    let dim = u.dim();
    let probs = DetectionEvent::all(dim)
        .into_iter()
        .map(|ev| {
            let amp = w[(ev.m - 1, ev.n - 1)];
            let p = if ev.is_bunched() {
                0.5 * amp.norm_sqr()
            } else {
                amp.norm_sqr()
            };
            (ev, p)
        })
        .collect();
    Ok(OutcomeDistribution { dim, probs })
}

/// Independent oracle: substitutes `a†_j = Σ_l U*_lj b†_l` into the state,
/// expands the degree-2 polynomial, collects monomials `b†_l b†_m` and
/// converts them to Fock amplitudes.
pub fn brute_force_distribution(
    state: &TwoPhotonState,
    u: &ModeUnitary,
) -> Result<OutcomeDistribution> {
    let dim = u.dim();
    let mut poly: BTreeMap<(usize, usize), C64> = BTreeMap::new();
    for ((j, k), alpha) in state.terms() {
        for l in 1..=dim {
            let left = u.entry(l, j).conj();
            for m in 1..=dim {
                let right = u.entry(m, k).conj();
                // b†_l and b†_m commute, so the monomial is keyed unordered.
                *poly
                    .entry((l.min(m), l.max(m)))
                    .or_insert(C64::new(0.0, 0.0)) += alpha * left * right;
            }
        }
    }
    let probs = poly
        .into_iter()
        .map(|((l, m), c)| {
            let amp = if l == m { c * 2f64.sqrt() } else { c };
            (DetectionEvent { m: l, n: m }, amp.norm_sqr())
        })
        .collect();
    Ok(OutcomeDistribution { dim, probs })
}
