//! Two-photon dual-rail states and the Bell-like family.
//!
//! A [`TwoPhotonState`] is `Σ α_jk a†_j a†_k |0⟩` with `j ∈ {1,2}` and
//! `k ∈ {3,4}`. Coefficients are stored in the order `α13, α14, α23, α24`,
//! which is also the row-major layout of the [`CoefficientMatrix`].

use std::f64::consts::FRAC_PI_2;
use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64, NORM_TOL};

/// Normalized two-photon state with one photon in modes 1/2 and one in 3/4.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateRepr", into = "StateRepr")]
pub struct TwoPhotonState {
    coeffs: [C64; 4],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateRepr {
    a13: C64,
    a14: C64,
    a23: C64,
    a24: C64,
}

impl TryFrom<StateRepr> for TwoPhotonState {
    type Error = Error;

    fn try_from(r: StateRepr) -> Result<Self> {
        Self::new([r.a13, r.a14, r.a23, r.a24])
    }
}

impl From<TwoPhotonState> for StateRepr {
    fn from(s: TwoPhotonState) -> Self {
        let [a13, a14, a23, a24] = s.coeffs;
        StateRepr { a13, a14, a23, a24 }
    }
}

impl TwoPhotonState {
    /// Builds a state from `[α13, α14, α23, α24]`, rejecting unnormalized input.
    pub fn new(coeffs: [C64; 4]) -> Result<Self> {
        let norm_sq: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > NORM_TOL || !norm_sq.is_finite() {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(Self { coeffs })
    }

    /// The product state `a†_j a†_k |0⟩` for `j ∈ {1,2}`, `k ∈ {3,4}`.
    pub fn basis(j: usize, k: usize) -> Result<Self> {
        let idx = match (j, k) {
            (1, 3) => 0,
            (1, 4) => 1,
            (2, 3) => 2,
            (2, 4) => 3,
            (1 | 2, _) => return Err(Error::ModeOutOfRange { mode: k, dim: 4 }),
            _ => return Err(Error::ModeOutOfRange { mode: j, dim: 4 }),
        };
        let mut coeffs = [C64::new(0.0, 0.0); 4];
        coeffs[idx] = C64::new(1.0, 0.0);
        Ok(Self { coeffs })
    }

    pub fn coeffs(&self) -> [C64; 4] {
        self.coeffs
    }

    /// Coefficient `α_jk` with 1-based mode labels.
    pub fn coeff(&self, j: usize, k: usize) -> C64 {
        match (j, k) {
            (1, 3) => self.coeffs[0],
            (1, 4) => self.coeffs[1],
            (2, 3) => self.coeffs[2],
            (2, 4) => self.coeffs[3],
            _ => C64::new(0.0, 0.0),
        }
    }

    /// Iterates over `((j, k), α_jk)` with 1-based mode labels.
    pub fn terms(&self) -> impl Iterator<Item = ((usize, usize), C64)> + '_ {
        [(1, 3), (1, 4), (2, 3), (2, 4)]
            .into_iter()
            .zip(self.coeffs.iter().copied())
    }

    /// Multiplies every coefficient by `e^{iχ}`.
    pub fn with_global_phase(&self, chi: f64) -> Self {
        let p = C64::from_polar(1.0, chi);
        Self {
            coeffs: self.coeffs.map(|c| c * p),
        }
    }
}

/// The four orthonormal Bell-like states
///
/// ```text
/// Ψ1 = α1 a†1a†3 + β1 a†2a†4      Ψ2 = β1* a†1a†3 − α1* a†2a†4
/// Ψ3 = α2 a†1a†4 + β2 a†2a†3      Ψ4 = β2* a†1a†4 − α2* a†2a†3
/// ```
///
/// In the real form `α_i = sin θ_i`, `β_i = cos θ_i` with `θ_i ∈ [0, π/2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FamilyRepr", into = "FamilyRepr")]
pub struct BellLikeFamily {
    alpha1: C64,
    beta1: C64,
    alpha2: C64,
    beta2: C64,
    angles: Option<(f64, f64)>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum FamilyRepr {
    Angles {
        theta1: f64,
        theta2: f64,
    },
    Complex {
        alpha1: C64,
        beta1: C64,
        alpha2: C64,
        beta2: C64,
    },
}

impl TryFrom<FamilyRepr> for BellLikeFamily {
    type Error = Error;

    fn try_from(r: FamilyRepr) -> Result<Self> {
        match r {
            FamilyRepr::Angles { theta1, theta2 } => Self::from_angles(theta1, theta2),
            FamilyRepr::Complex {
                alpha1,
                beta1,
                alpha2,
                beta2,
            } => Self::new(alpha1, beta1, alpha2, beta2),
        }
    }
}

impl From<BellLikeFamily> for FamilyRepr {
    fn from(f: BellLikeFamily) -> Self {
        match f.angles {
            Some((theta1, theta2)) => FamilyRepr::Angles { theta1, theta2 },
            None => FamilyRepr::Complex {
                alpha1: f.alpha1,
                beta1: f.beta1,
                alpha2: f.alpha2,
                beta2: f.beta2,
            },
        }
    }
}

impl BellLikeFamily {
    pub fn new(alpha1: C64, beta1: C64, alpha2: C64, beta2: C64) -> Result<Self> {
        for (pair, a, b) in [(1, alpha1, beta1), (2, alpha2, beta2)] {
            let norm_sq = a.norm_sqr() + b.norm_sqr();
            if (norm_sq - 1.0).abs() > NORM_TOL || !norm_sq.is_finite() {
                return Err(Error::FamilyNotNormalized { pair, norm_sq });
            }
        }
        Ok(Self {
            alpha1,
            beta1,
            alpha2,
            beta2,
            angles: None,
        })
    }

    /// Real form: `α_i = sin θ_i`, `β_i = cos θ_i`.
    pub fn from_angles(theta1: f64, theta2: f64) -> Result<Self> {
        for (name, value) in [("theta1", theta1), ("theta2", theta2)] {
            // A few ulps of slack so that π/2 computed in floating point is accepted.
            if !(-1e-15..=FRAC_PI_2 + 1e-15).contains(&value) {
                return Err(Error::AngleOutOfRange { name, value });
            }
        }
        let re = |x: f64| C64::new(x, 0.0);
        Ok(Self {
            alpha1: re(theta1.sin()),
            beta1: re(theta1.cos()),
            alpha2: re(theta2.sin()),
            beta2: re(theta2.cos()),
            angles: Some((theta1, theta2)),
        })
    }

    /// The Bell states, `α = β = 1/√2` in both pairs.
    pub fn bell() -> Self {
        Self::from_angles(std::f64::consts::FRAC_PI_4, std::f64::consts::FRAC_PI_4)
            .expect("π/4 is in range")
    }

    pub fn alpha1(&self) -> C64 {
        self.alpha1
    }
    pub fn beta1(&self) -> C64 {
        self.beta1
    }
    pub fn alpha2(&self) -> C64 {
        self.alpha2
    }
    pub fn beta2(&self) -> C64 {
        self.beta2
    }

    /// `(θ1, θ2)` when the family was built from the real form.
    pub fn angles(&self) -> Option<(f64, f64)> {
        self.angles
    }

    /// Concurrence of the first pair, `2|α1 β1|`.
    pub fn concurrence1(&self) -> f64 {
        2.0 * (self.alpha1 * self.beta1).norm()
    }

    /// Concurrence of the second pair, `2|α2 β2|`.
    pub fn concurrence2(&self) -> f64 {
        2.0 * (self.alpha2 * self.beta2).norm()
    }
}

/// Returns `[Ψ1, Ψ2, Ψ3, Ψ4]`.
pub fn bell_like_states(family: &BellLikeFamily) -> [TwoPhotonState; 4] {
    let z = C64::new(0.0, 0.0);
    let (a1, b1, a2, b2) = (family.alpha1, family.beta1, family.alpha2, family.beta2);
    // Norms are guaranteed by the family constructor.
    [
        TwoPhotonState {
            coeffs: [a1, z, z, b1],
        },
        TwoPhotonState {
            coeffs: [b1.conj(), z, z, -a1.conj()],
        },
        TwoPhotonState {
            coeffs: [z, a2, b2, z],
        },
        TwoPhotonState {
            coeffs: [z, b2.conj(), -a2.conj(), z],
        },
    ]
}

/// `⟨a|b⟩` over the four coefficients.
pub fn inner_product(a: &TwoPhotonState, b: &TwoPhotonState) -> C64 {
    a.coeffs
        .iter()
        .zip(&b.coeffs)
        .map(|(x, y)| x.conj() * y)
        .sum()
}

/// Pure-state concurrence `2|α13 α24 − α14 α23| = 2|det A_e|`.
pub fn concurrence(state: &TwoPhotonState) -> f64 {
    2.0 * coefficient_matrix(state).det().norm()
}

/// The 2×2 matrix `A_e = [[α13, α14], [α23, α24]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientMatrix {
    pub entries: [[C64; 2]; 2],
}

impl CoefficientMatrix {
    /// Linear map from raw coefficients `[α13, α14, α23, α24]`.
    pub fn from_coeffs(c: [C64; 4]) -> Self {
        Self {
            entries: [[c[0], c[1]], [c[2], c[3]]],
        }
    }

    pub fn det(&self) -> C64 {
        let e = &self.entries;
        e[0][0] * e[1][1] - e[0][1] * e[1][0]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn transpose(&self) -> Self {
        let e = &self.entries;
        Self {
            entries: [[e[0][0], e[1][0]], [e[0][1], e[1][1]]],
        }
    }

    /// `A x` for a 2-vector `x`.
    pub fn apply(&self, x: [C64; 2]) -> [C64; 2] {
        let e = &self.entries;
        [
            e[0][0] * x[0] + e[0][1] * x[1],
            e[1][0] * x[0] + e[1][1] * x[1],
        ]
    }
}

impl Add for CoefficientMatrix {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        let mut out = self;
        for (row, r) in out.entries.iter_mut().zip(rhs.entries) {
            for (x, y) in row.iter_mut().zip(r) {
                *x += y;
            }
        }
        out
    }
}

impl Mul<CoefficientMatrix> for C64 {
    type Output = CoefficientMatrix;

    fn mul(self, rhs: CoefficientMatrix) -> CoefficientMatrix {
        CoefficientMatrix {
            entries: rhs.entries.map(|row| row.map(|x| self * x)),
        }
    }
}

pub fn coefficient_matrix(state: &TwoPhotonState) -> CoefficientMatrix {
    CoefficientMatrix::from_coeffs(state.coeffs)
}
