//! Fixed-dimension complex linear algebra for one and two polarization
//! qubits: operators, projectors, pure states, density operators, tensor
//! products, and partial traces.
//!
//! Conventions used throughout the crate:
//!
//! * Single-qubit basis order is `{h, v}`; two-qubit basis order is
//!   `{hh, hv, vh, vv}`, row-major.
//! * Party 1 — the arm carrying the semi-weak meter — is always the left
//!   tensor factor. Two-qubit kets are therefore written with the metered
//!   qubit first.
//! * Polarizer angles are in degrees with `|theta> = cos t |h> + sin t |v>`,
//!   so the Stokes observable has period 180 degrees and
//!   `sigma_45 = sigma_x`.

#![allow(clippy::needless_range_loop)]

use crate::fmath;
use crate::linalg;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};
use num_complex::Complex64;

/// Hermiticity tolerance on observables and density operators.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Trace-normalization tolerance on density operators.
pub const TRACE_TOL: f64 = 1e-10;
/// Most-negative eigenvalue a density operator may carry.
pub const POSITIVITY_TOL: f64 = 1e-10;
/// Hermiticity defects larger than this are reported back to the caller.
pub const HERMITICITY_WARN: f64 = 1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Which qubit of the pair an operation refers to.
///
/// Party 1 carries the semi-weak meter and is the left tensor factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Party {
    One,
    Two,
}

/// A 2x2 complex matrix acting on one polarization qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitOperator {
    entries: [[Complex64; 2]; 2],
}

/// A 4x4 complex matrix acting on the qubit pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitOperator {
    entries: [[Complex64; 4]; 4],
}

/// A validated two-qubit density operator: Hermitian, unit trace, positive
/// semidefinite within the module tolerances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitState {
    op: TwoQubitOperator,
    hermiticity_correction: f64,
}

/// A normalized pure state of one qubit or of the pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

/// The two built-in entangled preparation targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdealState {
    /// `(|vh> + i|hv>)/sqrt(2)` — the down-conversion state, written with
    /// the metered qubit first.
    Psi,
    /// `(|ah> + i|dv>)/sqrt(2)` with `a = (h+v)/sqrt(2)`, `d = (h-v)/sqrt(2)`
    /// — the state after the 45-degree half-wave rotation of the metered arm.
    PsiDoublePrime,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateError {
    /// Matrix is not Hermitian within the working tolerance even after
    /// symmetrization bookkeeping.
    NotHermitian { defect: f64 },
    /// Trace differs from one by more than [`TRACE_TOL`].
    NotNormalized { trace: f64 },
    /// An eigenvalue is below `-`[`POSITIVITY_TOL`].
    NotPositive { min_eigenvalue: f64 },
    /// Pure-state amplitudes do not have unit norm within 1e-12.
    NotUnitNorm { norm: f64 },
    /// Amplitude vector length is neither 2 nor 4.
    BadLength { len: usize },
}

impl fmt::Display for StateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateError::NotHermitian { defect } => {
                write!(f, "matrix is not Hermitian (defect {defect:.3e})")
            }
            StateError::NotNormalized { trace } => {
                write!(f, "density operator trace is {trace:.12}, expected 1")
            }
            StateError::NotPositive { min_eigenvalue } => {
                write!(f, "density operator has eigenvalue {min_eigenvalue:.3e}")
            }
            StateError::NotUnitNorm { norm } => {
                write!(f, "state vector norm is {norm:.12}, expected 1")
            }
            StateError::BadLength { len } => {
                write!(f, "state vector length {len} is neither 2 nor 4")
            }
        }
    }
}

impl core::error::Error for StateError {}

impl QubitOperator {
    pub fn new(entries: [[Complex64; 2]; 2]) -> Self {
        Self { entries }
    }

    pub fn zero() -> Self {
        Self::new([[ZERO; 2]; 2])
    }

    pub fn identity() -> Self {
        Self::new([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn sigma_x() -> Self {
        Self::new([[ZERO, ONE], [ONE, ZERO]])
    }

    pub fn sigma_y() -> Self {
        Self::new([
            [ZERO, Complex64::new(0.0, -1.0)],
            [Complex64::new(0.0, 1.0), ZERO],
        ])
    }

    pub fn sigma_z() -> Self {
        Self::new([[ONE, ZERO], [ZERO, -ONE]])
    }

    /// Projector onto horizontal polarization `|h><h|`.
    pub fn projector_h() -> Self {
        Self::new([[ONE, ZERO], [ZERO, ZERO]])
    }

    /// Projector onto vertical polarization `|v><v|`.
    pub fn projector_v() -> Self {
        Self::new([[ZERO, ZERO], [ZERO, ONE]])
    }

    /// Projector onto the linear polarization at `theta_deg`.
    pub fn projector_theta(theta_deg: f64) -> Self {
        PureState::linear(theta_deg).projector_qubit()
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row][col]
    }

    pub fn entries(&self) -> &[[Complex64; 2]; 2] {
        &self.entries
    }

    pub fn adjoint(&self) -> Self {
        let mut out = [[ZERO; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = self.entries[j][i].conj();
            }
        }
        Self::new(out)
    }

    pub fn trace(&self) -> Complex64 {
        self.entries[0][0] + self.entries[1][1]
    }

    pub fn scale(&self, s: f64) -> Self {
        self.scale_complex(Complex64::new(s, 0.0))
    }

    pub fn scale_complex(&self, s: Complex64) -> Self {
        let mut out = self.entries;
        for row in &mut out {
            for e in row {
                *e *= s;
            }
        }
        Self::new(out)
    }

    /// Largest absolute deviation from Hermiticity, `max |A - A^dag|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let adj = self.adjoint();
        let mut worst = 0.0_f64;
        for i in 0..2 {
            for j in 0..2 {
                let d = (self.entries[i][j] - adj.entries[i][j]).norm();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// True when the operator is a rank-1 projector: `P^2 = P`, `tr P = 1`.
    pub fn is_projector(&self, tol: f64) -> bool {
        let sq = *self * *self;
        let mut worst = 0.0_f64;
        for i in 0..2 {
            for j in 0..2 {
                let d = (sq.entries[i][j] - self.entries[i][j]).norm();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst <= tol && (self.trace() - ONE).norm() <= tol && self.is_hermitian(tol)
    }

    /// True for a dichotomic observable: Hermitian with `X^2 = I`, so the
    /// eigenvalues are exactly plus and minus one.
    pub fn is_dichotomic(&self, tol: f64) -> bool {
        if !self.is_hermitian(tol) {
            return false;
        }
        let sq = *self * *self;
        let id = Self::identity();
        let mut worst = 0.0_f64;
        for i in 0..2 {
            for j in 0..2 {
                let d = (sq.entries[i][j] - id.entries[i][j]).norm();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst <= tol
    }

    /// Spectral projectors `(I +/- X)/2` onto the +1 and -1 eigenspaces of a
    /// dichotomic observable.
    pub fn dichotomic_projectors(&self) -> (Self, Self) {
        let id = Self::identity();
        ((id + *self).scale(0.5), (id - *self).scale(0.5))
    }
}

impl Add for QubitOperator {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut out = self.entries;
        for (row, rrow) in out.iter_mut().zip(rhs.entries.iter()) {
            for (e, r) in row.iter_mut().zip(rrow.iter()) {
                *e += r;
            }
        }
        Self::new(out)
    }
}

impl Sub for QubitOperator {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for QubitOperator {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl Mul for QubitOperator {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = [[ZERO; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = ZERO;
                for (k, rrow) in rhs.entries.iter().enumerate() {
                    acc += self.entries[i][k] * rrow[j];
                }
                out[i][j] = acc;
            }
        }
        Self::new(out)
    }
}

impl TwoQubitOperator {
    pub fn new(entries: [[Complex64; 4]; 4]) -> Self {
        Self { entries }
    }

    pub fn zero() -> Self {
        Self::new([[ZERO; 4]; 4])
    }

    pub fn identity() -> Self {
        let mut out = [[ZERO; 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            row[i] = ONE;
        }
        Self::new(out)
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row][col]
    }

    pub fn entries(&self) -> &[[Complex64; 4]; 4] {
        &self.entries
    }

    pub fn adjoint(&self) -> Self {
        let mut out = [[ZERO; 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = self.entries[j][i].conj();
            }
        }
        Self::new(out)
    }

    pub fn trace(&self) -> Complex64 {
        (0..4).fold(ZERO, |acc, i| acc + self.entries[i][i])
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.entries;
        for row in &mut out {
            for e in row {
                *e *= s;
            }
        }
        Self::new(out)
    }

    /// `tr[self * rho]`, the expectation functional used all over the crate.
    pub fn expectation(&self, rho: &TwoQubitOperator) -> Complex64 {
        let mut acc = ZERO;
        for (i, row) in self.entries.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                acc += e * rho.entries[j][i];
            }
        }
        acc
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let adj = self.adjoint();
        let mut worst = 0.0_f64;
        for i in 0..4 {
            for j in 0..4 {
                let d = (self.entries[i][j] - adj.entries[i][j]).norm();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    /// Largest entry-wise absolute difference to `other`.
    pub fn max_entry_distance(&self, other: &Self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..4 {
            for j in 0..4 {
                let d = (self.entries[i][j] - other.entries[i][j]).norm();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }
}

impl Add for TwoQubitOperator {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut out = self.entries;
        for (row, rrow) in out.iter_mut().zip(rhs.entries.iter()) {
            for (e, r) in row.iter_mut().zip(rrow.iter()) {
                *e += r;
            }
        }
        Self::new(out)
    }
}

impl Sub for TwoQubitOperator {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + rhs.scale(-1.0)
    }
}

impl Mul for TwoQubitOperator {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = [[ZERO; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                let mut acc = ZERO;
                for (k, rrow) in rhs.entries.iter().enumerate() {
                    acc += self.entries[i][k] * rrow[j];
                }
                out[i][j] = acc;
            }
        }
        Self::new(out)
    }
}

/// Kronecker product with the party-1 factor leftmost.
pub fn tensor(a: &QubitOperator, b: &QubitOperator) -> TwoQubitOperator {
    let mut out = [[ZERO; 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[2 * i + k][2 * j + l] = a.entry(i, j) * b.entry(k, l);
                }
            }
        }
    }
    TwoQubitOperator::new(out)
}

/// Embed a single-qubit operator on one party: `op (x) I` or `I (x) op`.
pub fn embed(op: &QubitOperator, party: Party) -> TwoQubitOperator {
    match party {
        Party::One => tensor(op, &QubitOperator::identity()),
        Party::Two => tensor(&QubitOperator::identity(), op),
    }
}

/// Reduced density operator of the kept party.
pub fn partial_trace(rho: &TwoQubitState, keep: Party) -> QubitOperator {
    partial_trace_op(rho.matrix(), keep)
}

pub(crate) fn partial_trace_op(rho: &TwoQubitOperator, keep: Party) -> QubitOperator {
    let mut out = [[ZERO; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, e) in row.iter_mut().enumerate() {
            let mut acc = ZERO;
            for k in 0..2 {
                acc += match keep {
                    Party::One => rho.entry(2 * i + k, 2 * j + k),
                    Party::Two => rho.entry(2 * k + i, 2 * k + j),
                };
            }
            *e = acc;
        }
    }
    QubitOperator::new(out)
}

/// The Stokes observable `sigma_theta = |theta><theta| - |theta_perp><theta_perp|`
/// in the rotated linear basis, equal to `cos(2t) sigma_z + sin(2t) sigma_x`.
///
/// `stokes_theta(0)` is `sigma_z` and `stokes_theta(45)` is `sigma_x`.
pub fn stokes_theta(theta_deg: f64) -> QubitOperator {
    let two_theta = fmath::to_radians(2.0 * theta_deg);
    let c = fmath::cos(two_theta);
    let s = fmath::sin(two_theta);
    QubitOperator::new([
        [Complex64::new(c, 0.0), Complex64::new(s, 0.0)],
        [Complex64::new(s, 0.0), Complex64::new(-c, 0.0)],
    ])
}

/// Density operator of one of the built-in entangled preparations.
pub fn ideal_state(which: IdealState) -> TwoQubitState {
    let sqrt_half = fmath::sqrt(0.5);
    let i = Complex64::new(0.0, 1.0);
    let amps = match which {
        // (|vh> + i|hv>)/sqrt(2) in {hh, hv, vh, vv} order.
        IdealState::Psi => [
            ZERO,
            i * Complex64::new(sqrt_half, 0.0),
            Complex64::new(sqrt_half, 0.0),
            ZERO,
        ],
        // (|ah> + i|dv>)/sqrt(2) = (|hh> + i|hv> + |vh> - i|vv>)/2.
        IdealState::PsiDoublePrime => [
            Complex64::new(0.5, 0.0),
            i * Complex64::new(0.5, 0.0),
            Complex64::new(0.5, 0.0),
            -i * Complex64::new(0.5, 0.0),
        ],
    };
    PureState::two_qubit(amps)
        .expect("built-in states are normalized")
        .density_matrix()
        .expect("built-in states are valid")
}

impl PureState {
    /// Single-qubit state `alpha |h> + beta |v>`; must be normalized.
    pub fn qubit(alpha: Complex64, beta: Complex64) -> Result<Self, StateError> {
        Self::from_amplitudes(&[alpha, beta])
    }

    /// Two-qubit state in `{hh, hv, vh, vv}` order; must be normalized.
    pub fn two_qubit(amps: [Complex64; 4]) -> Result<Self, StateError> {
        Self::from_amplitudes(&amps)
    }

    pub fn from_amplitudes(amps: &[Complex64]) -> Result<Self, StateError> {
        if amps.len() != 2 && amps.len() != 4 {
            return Err(StateError::BadLength { len: amps.len() });
        }
        let norm = fmath::sqrt(amps.iter().map(|a| a.norm_sqr()).sum());
        if fmath::abs(norm - 1.0) > 1e-12 {
            return Err(StateError::NotUnitNorm { norm });
        }
        Ok(Self {
            amplitudes: amps.to_vec(),
        })
    }

    /// Linear polarization at `theta_deg`: `cos t |h> + sin t |v>`.
    pub fn linear(theta_deg: f64) -> Self {
        let t = fmath::to_radians(theta_deg);
        Self {
            amplitudes: alloc::vec![
                Complex64::new(fmath::cos(t), 0.0),
                Complex64::new(fmath::sin(t), 0.0),
            ],
        }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn is_two_qubit(&self) -> bool {
        self.amplitudes.len() == 4
    }

    /// `|psi><psi|` for a single-qubit state.
    pub fn projector_qubit(&self) -> QubitOperator {
        assert_eq!(self.amplitudes.len(), 2, "not a single-qubit state");
        let a = &self.amplitudes;
        let mut out = [[ZERO; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = a[i] * a[j].conj();
            }
        }
        QubitOperator::new(out)
    }

    /// `|psi><psi|` as a validated density operator (two-qubit states only).
    pub fn density_matrix(&self) -> Result<TwoQubitState, StateError> {
        assert_eq!(self.amplitudes.len(), 4, "not a two-qubit state");
        let a = &self.amplitudes;
        let mut out = [[ZERO; 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = a[i] * a[j].conj();
            }
        }
        TwoQubitState::from_matrix(TwoQubitOperator::new(out))
    }
}

impl TwoQubitState {
    /// Validate a 4x4 matrix as a density operator.
    ///
    /// Hermiticity is enforced by symmetrization `(H + H^dag)/2`; the size of
    /// the correction is kept on the state (see
    /// [`hermiticity_correction`](Self::hermiticity_correction)) so callers
    /// can warn when it exceeds [`HERMITICITY_WARN`]. Trace and positivity
    /// must hold as given.
    pub fn from_matrix(m: TwoQubitOperator) -> Result<Self, StateError> {
        let defect = m.hermiticity_defect();
        let adj = m.adjoint();
        let sym = (m + adj).scale(0.5);

        let trace = sym.trace().re;
        if fmath::abs(trace - 1.0) > TRACE_TOL {
            return Err(StateError::NotNormalized { trace });
        }
        let eigs = linalg::hermitian_eigenvalues(&sym);
        let min = eigs.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        if min < -POSITIVITY_TOL {
            return Err(StateError::NotPositive {
                min_eigenvalue: min,
            });
        }
        Ok(Self {
            op: sym,
            hermiticity_correction: defect,
        })
    }

    /// The maximally mixed state `I/4`.
    pub fn maximally_mixed() -> Self {
        Self {
            op: TwoQubitOperator::identity().scale(0.25),
            hermiticity_correction: 0.0,
        }
    }

    /// Convex mixture `p * self + (1-p) * other`.
    pub fn mix(&self, other: &Self, p: f64) -> Result<Self, StateError> {
        Self::from_matrix(self.op.scale(p) + other.op.scale(1.0 - p))
    }

    pub fn matrix(&self) -> &TwoQubitOperator {
        &self.op
    }

    /// Hermiticity defect of the matrix this state was built from, before
    /// symmetrization. Exceeding [`HERMITICITY_WARN`] deserves a warning at
    /// the interface that accepted the matrix.
    pub fn hermiticity_correction(&self) -> f64 {
        self.hermiticity_correction
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.op.entry(row, col)
    }

    /// `tr[rho^2]`, between 0.25 (maximally mixed) and 1 (pure).
    pub fn purity(&self) -> f64 {
        (self.op * self.op).trace().re
    }

    /// Expectation value of a Hermitian two-qubit observable.
    pub fn expect(&self, obs: &TwoQubitOperator) -> f64 {
        obs.expectation(&self.op).re
    }
}
