//! Mode unitaries and the networks built from them.
//!
//! Conventions:
//!
//! * Mode labels in the public API are 1-based.
//! * A [`ModeUnitary`] `U` maps input to output creation operators,
//!   `b†_i = Σ_j U_ij a†_j`.
//! * A two-mode block on modes `(a, b)` is
//!   `[[η, √(1−η²) e^{iφ}], [−√(1−η²) e^{−iφ}, η]]`; with `φ = 0` this is
//!   the real beam splitter with the minus sign on the lower-left entry.
//! * [`compose`] applies its elements in list order: the first element acts
//!   first, i.e. it is the right-most matrix factor.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::states::BellLikeFamily;
use crate::{Error, Result, C64, MAX_DIM, MIN_DIM, UNITARY_TOL};

/// An `m×m` unitary on mode creation operators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "UnitaryRepr", into = "UnitaryRepr")]
pub struct ModeUnitary {
    matrix: DMatrix<C64>,
}

/// Row-major `[re, im]` entries plus the dimension.
#[derive(Serialize, Deserialize)]
struct UnitaryRepr {
    dim: usize,
    entries: Vec<C64>,
}

impl TryFrom<UnitaryRepr> for ModeUnitary {
    type Error = Error;

    fn try_from(r: UnitaryRepr) -> Result<Self> {
        if r.entries.len() != r.dim * r.dim {
            return Err(Error::EntryCount {
                got: r.entries.len(),
                dim: r.dim,
            });
        }
        Self::new(DMatrix::from_row_slice(r.dim, r.dim, &r.entries))
    }
}

impl From<ModeUnitary> for UnitaryRepr {
    fn from(u: ModeUnitary) -> Self {
        let dim = u.dim();
        let entries = (0..dim)
            .flat_map(|i| (0..dim).map(move |j| (i, j)))
            .map(|(i, j)| u.matrix[(i, j)])
            .collect();
        UnitaryRepr { dim, entries }
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if !(MIN_DIM..=MAX_DIM).contains(&dim) {
        return Err(Error::UnsupportedDim {
            dim,
            min: MIN_DIM,
            max: MAX_DIM,
        });
    }
    Ok(())
}

fn check_mode(mode: usize, dim: usize) -> Result<usize> {
    if mode == 0 || mode > dim {
        return Err(Error::ModeOutOfRange { mode, dim });
    }
    Ok(mode - 1)
}

/// Largest entrywise deviation of `M†M` from the identity.
pub fn unitarity_deviation(m: &DMatrix<C64>) -> f64 {
    let prod = m.adjoint() * m;
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((prod[(i, j)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

impl ModeUnitary {
    /// Wraps `matrix`, checking squareness, the supported dimension range and
    /// unitarity to [`UNITARY_TOL`].
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        check_dim(matrix.nrows())?;
        let deviation = unitarity_deviation(&matrix);
        if deviation.is_nan() || deviation > UNITARY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { matrix })
    }

    /// Builds `U` from its adjoint `U†`.
    pub fn from_dagger(dagger: DMatrix<C64>) -> Result<Self> {
        Self::new(dagger.adjoint())
    }

    pub fn identity(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            matrix: DMatrix::identity(dim, dim),
        })
    }

    /// Haar-distributed random unitary: QR of a complex Gaussian matrix with
    /// the phases of `R`'s diagonal folded back into `Q`.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Self> {
        check_dim(dim)?;
        let g = DMatrix::from_fn(dim, dim, |_, _| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let (mut q, r) = g.qr().unpack();
        for j in 0..dim {
            let d = r[(j, j)];
            let n = d.norm();
            if n > 0.0 {
                let phase = d / n;
                for i in 0..dim {
                    q[(i, j)] *= phase;
                }
            }
        }
        Self::new(q)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    /// Entry `U_ij` with 1-based indices.
    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.matrix[(i - 1, j - 1)]
    }

    pub fn dagger(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn unitarity_deviation(&self) -> f64 {
        unitarity_deviation(&self.matrix)
    }

    /// Block-diagonal embedding `U ⊕ I` into `dim` modes.
    pub fn embed(&self, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        if dim < self.dim() {
            return Err(Error::DimMismatch {
                left: self.dim(),
                right: dim,
            });
        }
        let mut m = DMatrix::identity(dim, dim);
        m.view_mut((0, 0), (self.dim(), self.dim()))
            .copy_from(&self.matrix);
        Ok(Self { matrix: m })
    }

    /// Multiplies output row `i` (1-based) by `e^{iχ_i}`; detection
    /// statistics are unchanged by this.
    pub fn with_output_phases(&self, phases: &[f64]) -> Self {
        let mut m = self.matrix.clone();
        for (i, &chi) in phases.iter().enumerate().take(self.dim()) {
            let p = C64::from_polar(1.0, chi);
            m.row_mut(i).iter_mut().for_each(|x| *x *= p);
        }
        Self { matrix: m }
    }

    /// Relabels detectors: output `i` becomes output `perm[i]` (0-based).
    pub fn permute_outputs(&self, perm: &[usize]) -> Result<Self> {
        let n = self.dim();
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || seen[p] {
                return Err(Error::ModeOutOfRange {
                    mode: p + 1,
                    dim: n,
                });
            }
            seen[p] = true;
        }
        if perm.len() != n {
            return Err(Error::DimMismatch {
                left: perm.len(),
                right: n,
            });
        }
        let mut m = DMatrix::zeros(n, n);
        for (i, &p) in perm.iter().enumerate() {
            m.set_row(p, &self.matrix.row(i));
        }
        Ok(Self { matrix: m })
    }

    /// Multiplies by a global phase.
    pub fn with_global_phase(&self, chi: f64) -> Self {
        Self {
            matrix: self.matrix.map(|x| x * C64::from_polar(1.0, chi)),
        }
    }
}

/// A lossless two-mode beam splitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSplitter {
    pub mode_a: usize,
    pub mode_b: usize,
    /// Transmissivity amplitude in `[0, 1]`.
    pub eta: f64,
    pub phase: f64,
}

impl BeamSplitter {
    pub fn new(mode_a: usize, mode_b: usize, eta: f64) -> Self {
        Self {
            mode_a,
            mode_b,
            eta,
            phase: 0.0,
        }
    }
}

/// Identity with a rotation block `[[cos θ, sin θ e^{iφ}], [−sin θ e^{−iφ}, cos θ]]`
/// on `(a, b)` (0-based, distinct, in range).
fn rotation_matrix(dim: usize, a: usize, b: usize, theta: f64, phase: f64) -> DMatrix<C64> {
    let (s, c) = theta.sin_cos();
    let mut m = DMatrix::identity(dim, dim);
    m[(a, a)] = C64::new(c, 0.0);
    m[(b, b)] = C64::new(c, 0.0);
    m[(a, b)] = C64::from_polar(s, phase);
    m[(b, a)] = -C64::from_polar(s, -phase);
    m
}

/// Two-mode rotation by `theta` with phase on modes `(a, b)`, 1-based.
pub fn rotation(a: usize, b: usize, theta: f64, phase: f64, dim: usize) -> Result<ModeUnitary> {
    check_dim(dim)?;
    let (ia, ib) = (check_mode(a, dim)?, check_mode(b, dim)?);
    if ia == ib {
        return Err(Error::SameMode(a));
    }
    Ok(ModeUnitary {
        matrix: rotation_matrix(dim, ia, ib, theta, phase),
    })
}

pub fn beam_splitter_unitary(bs: &BeamSplitter, dim: usize) -> Result<ModeUnitary> {
    if !(0.0..=1.0).contains(&bs.eta) {
        return Err(Error::EtaOutOfRange(bs.eta));
    }
    rotation(bs.mode_a, bs.mode_b, bs.eta.acos(), bs.phase, dim)
}

pub fn phase_shifter(mode: usize, phase: f64, dim: usize) -> Result<ModeUnitary> {
    check_dim(dim)?;
    let i = check_mode(mode, dim)?;
    let mut m = DMatrix::identity(dim, dim);
    m[(i, i)] = C64::from_polar(1.0, phase);
    Ok(ModeUnitary { matrix: m })
}

/// Product of `elements`, first element acting first.
pub fn compose(elements: &[ModeUnitary]) -> Result<ModeUnitary> {
    let (first, rest) = elements.split_first().ok_or(Error::EmptyComposition)?;
    let mut acc = first.matrix.clone();
    for e in rest {
        if e.dim() != first.dim() {
            return Err(Error::DimMismatch {
                left: first.dim(),
                right: e.dim(),
            });
        }
        acc = &e.matrix * acc;
    }
    ModeUnitary::new(acc)
}

/// Two parallel beam splitters: `η1` on modes (1,3) and `η2 = cos φ` on
/// modes (2,4).
pub fn two_splitter_network(eta1: f64, phi: f64) -> Result<ModeUnitary> {
    let first = beam_splitter_unitary(&BeamSplitter::new(1, 3, eta1), 4)?;
    // A rotation rather than a splitter so that any φ is accepted; for
    // φ ∈ [0, π/2] it is exactly the splitter with η = cos φ.
    let second = rotation(2, 4, phi, 0.0, 4)?;
    compose(&[first, second])
}

/// The network whose adjoint is
///
/// ```text
///        ⎡ 1/√2   0   −1/√2   0  ⎤
///   U† = ⎢  0    β2     0   −α2  ⎥
///        ⎢ 1/√2   0    1/√2   0  ⎥
///        ⎣  0    α2*    0    β2* ⎦
/// ```
///
/// It identifies Ψ3 on event (1,2) and Ψ4 on event (1,4), each with
/// probability 1/2. Only `(α2, β2)` enter. For the real family it coincides
/// with [`two_splitter_network`]`(1/√2, θ2)`.
pub fn optimal_discrimination_unitary(family: &BellLikeFamily) -> ModeUnitary {
    let z = C64::new(0.0, 0.0);
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    let (a2, b2) = (family.alpha2(), family.beta2());
    #[rustfmt::skip]
    let dagger = DMatrix::from_row_slice(4, 4, &[
        h, z,         -h, z,
        z, b2,         z, -a2,
        h, z,          h, z,
        z, a2.conj(),  z, b2.conj(),
    ]);
    // Rows are orthonormal whenever |α2|² + |β2|² = 1.
    ModeUnitary {
        matrix: dagger.adjoint(),
    }
}

/// Mode pairs of the triangular mesh, in the order they act.
pub const MESH_PAIRS: [(usize, usize); 6] = [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)];

/// Twelve real parameters of a 4-mode triangular mesh: one rotation angle
/// and one phase per entry of [`MESH_PAIRS`].
///
/// Every `U ∈ U(4)` equals `D · mesh_unitary(p)` for some parameters `p`
/// and a diagonal phase matrix `D` on the outputs. Detection statistics do
/// not see `D`, so the mesh covers every distinct measurement.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NetworkParams {
    pub angles: [f64; 6],
    pub phases: [f64; 6],
}

impl NetworkParams {
    pub const LEN: usize = 12;

    /// Flattens as `[angles..., phases...]`.
    pub fn to_array(&self) -> [f64; 12] {
        let mut out = [0.0; 12];
        out[..6].copy_from_slice(&self.angles);
        out[6..].copy_from_slice(&self.phases);
        out
    }

    pub fn from_array(x: &[f64; 12]) -> Self {
        let mut p = Self::default();
        p.angles.copy_from_slice(&x[..6]);
        p.phases.copy_from_slice(&x[6..]);
        p
    }
}

/// Composes the six mesh rotations in [`MESH_PAIRS`] order.
pub fn mesh_unitary(params: &NetworkParams) -> ModeUnitary {
    let mut acc = DMatrix::<C64>::identity(4, 4);
    for (k, &(a, b)) in MESH_PAIRS.iter().enumerate() {
        acc = rotation_matrix(4, a - 1, b - 1, params.angles[k], params.phases[k]) * acc;
    }
    ModeUnitary { matrix: acc }
}

/// Output of [`decompose_mesh`]: `U = diag(e^{iχ}) · mesh_unitary(params)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshDecomposition {
    pub params: NetworkParams,
    pub output_phases: [f64; 4],
}

impl MeshDecomposition {
    pub fn recompose(&self) -> ModeUnitary {
        mesh_unitary(&self.params).with_output_phases(&self.output_phases)
    }
}

/// Inverts [`mesh_unitary`] for a 4-mode unitary.
///
/// Right-multiplies by inverse rotations in mesh order, each one chosen to
/// zero the upper-triangular entry `(p, q)` against the pivot `(p, p)`. What
/// is left is lower-triangular and unitary, hence diagonal.
pub fn decompose_mesh(u: &ModeUnitary) -> Result<MeshDecomposition> {
    if u.dim() != 4 {
        return Err(Error::DimMismatch {
            left: u.dim(),
            right: 4,
        });
    }
    let mut w = u.matrix.clone();
    let mut params = NetworkParams::default();
    for (k, &(p, q)) in MESH_PAIRS.iter().enumerate() {
        let (p, q) = (p - 1, q - 1);
        let (pivot, target) = (w[(p, p)], w[(p, q)]);
        // Need tan θ e^{iφ} = target / pivot.
        let theta = target.norm().atan2(pivot.norm());
        let phase = if target.norm() == 0.0 {
            0.0
        } else if pivot.norm() == 0.0 {
            target.arg()
        } else {
            target.arg() - pivot.arg()
        };
        params.angles[k] = theta;
        params.phases[k] = phase;
        let inv = rotation_matrix(4, p, q, theta, phase).adjoint();
        w *= inv;
    }
    let output_phases = [0, 1, 2, 3].map(|i| w[(i, i)].arg());
    Ok(MeshDecomposition {
        params,
        output_phases,
    })
}
