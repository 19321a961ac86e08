//! Maximum-likelihood reconstruction of a two-qubit density matrix from
//! projective coincidence counts, plus the standard entanglement metrics.
//!
//! The state is parameterized as `rho = T^dag T / tr[T^dag T]` with `T`
//! lower triangular (16 real parameters), so every iterate is positive
//! semidefinite with unit trace by construction. The Poissonian
//! log-likelihood `sum_s [n_s ln(phi p_s) - phi p_s]` is maximized by
//! gradient ascent with a backtracking line search, started from the
//! linear-inversion estimate mixed with a small `I/4` component.

use crate::fmath;
use crate::linalg;
use crate::qstate::{tensor, PureState, QubitOperator, TwoQubitOperator, TwoQubitState};
use alloc::vec::Vec;
use core::fmt;
use num_complex::Complex64;

/// Iteration cap for the ascent loop.
pub const MAX_ITERATIONS: usize = 10_000;

/// Default relative log-likelihood improvement at which the fit stops.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Weight of the `I/4` admixture in the starting point.
const INIT_MIX: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub enum TomoError {
    /// Fewer than 16 settings, a rank-deficient setting set, or counts that
    /// carry no events: the likelihood does not identify a state.
    InsufficientSettings,
    /// The ascent did not meet the tolerance within [`MAX_ITERATIONS`].
    NonConvergence { iterations: usize },
}

impl fmt::Display for TomoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TomoError::InsufficientSettings => {
                write!(f, "settings/counts do not identify a state")
            }
            TomoError::NonConvergence { iterations } => {
                write!(f, "no convergence after {iterations} iterations")
            }
        }
    }
}

impl core::error::Error for TomoError {}

/// One completed reconstruction.
#[derive(Debug, Clone)]
pub struct TomographyRun {
    pub settings: Vec<(QubitOperator, QubitOperator)>,
    pub counts: Vec<f64>,
    pub result: TwoQubitState,
    pub log_likelihood: f64,
    pub iterations: usize,
}

/// The 16 projector-pair settings over the `{h, v, d, r}` analyzer states
/// on each arm (`d` diagonal linear, `r` right circular).
pub fn hvdr_settings() -> Vec<(QubitOperator, QubitOperator)> {
    let single = analyzer_projectors();
    let mut out = Vec::with_capacity(16);
    for a in &single {
        for b in &single {
            out.push((*a, *b));
        }
    }
    out
}

fn analyzer_projectors() -> [QubitOperator; 4] {
    let sqrt_half = fmath::sqrt(0.5);
    let d = PureState::qubit(
        Complex64::new(sqrt_half, 0.0),
        Complex64::new(sqrt_half, 0.0),
    )
    .unwrap();
    let r = PureState::qubit(
        Complex64::new(sqrt_half, 0.0),
        Complex64::new(0.0, sqrt_half),
    )
    .unwrap();
    [
        QubitOperator::projector_h(),
        QubitOperator::projector_v(),
        d.projector_qubit(),
        r.projector_qubit(),
    ]
}

/// Expected detection probabilities `p_s = tr[(P_a (x) P_b) rho]`.
pub fn setting_probabilities(
    settings: &[(QubitOperator, QubitOperator)],
    rho: &TwoQubitState,
) -> Vec<f64> {
    settings
        .iter()
        .map(|(a, b)| tensor(a, b).expectation(rho.matrix()).re.max(0.0))
        .collect()
}

/// Reconstruct a state from counts by Poissonian maximum likelihood.
///
/// `pairs_per_setting` is the expected pair flux per setting; `tolerance`
/// is the relative log-likelihood improvement at which the ascent stops
/// (use [`DEFAULT_TOLERANCE`] when in doubt).
pub fn mle_reconstruct(
    settings: &[(QubitOperator, QubitOperator)],
    counts: &[f64],
    pairs_per_setting: f64,
    tolerance: f64,
) -> Result<TomographyRun, TomoError> {
    assert_eq!(settings.len(), counts.len(), "one count per setting");
    assert!(
        counts.iter().all(|&c| c.is_finite() && c >= 0.0),
        "counts must be finite and nonnegative"
    );
    assert!(pairs_per_setting > 0.0 && tolerance > 0.0);
    if settings.len() < 16 || counts.iter().sum::<f64>() == 0.0 {
        return Err(TomoError::InsufficientSettings);
    }

    let problem = MleProblem {
        projectors: settings.iter().map(|(a, b)| tensor(a, b)).collect(),
        counts: counts.to_vec(),
        flux: pairs_per_setting,
    };

    let mut params = initial_parameters(&problem, settings, counts, pairs_per_setting)?;
    let mut ll = problem.log_likelihood(&params);
    let mut step = 1.0;
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS {
        let grad = problem.gradient(&params);
        let gnorm = fmath::sqrt(grad.iter().map(|g| g * g).sum());
        if gnorm == 0.0 {
            break;
        }

        // Backtracking line search along the normalized gradient.
        let mut accepted = false;
        let mut trial_step = step;
        for _ in 0..60 {
            let trial: Params = core::array::from_fn(|k| params[k] + trial_step * grad[k] / gnorm);
            let trial_ll = problem.log_likelihood(&trial);
            if trial_ll > ll {
                let improvement = trial_ll - ll;
                params = trial;
                ll = trial_ll;
                step = trial_step * 1.5;
                accepted = true;
                iterations += 1;
                if improvement < tolerance * (1.0 + fmath::abs(ll)) {
                    return Ok(problem.finish(settings, counts, &params, ll, iterations));
                }
                break;
            }
            trial_step *= 0.5;
        }
        if !accepted {
            // No uphill step exists at representable sizes.
            break;
        }
    }

    if iterations >= MAX_ITERATIONS {
        return Err(TomoError::NonConvergence { iterations });
    }
    Ok(problem.finish(settings, counts, &params, ll, iterations))
}

type Params = [f64; 16];

/// Parameter layout: row-major walk of the lower triangle of `T`; diagonal
/// entries are real, off-diagonal entries contribute (re, im) pairs.
fn params_to_t(p: &Params) -> TwoQubitOperator {
    let z = Complex64::new(0.0, 0.0);
    let mut t = [[z; 4]; 4];
    let mut k = 0;
    for (i, row) in t.iter_mut().enumerate() {
        for (j, e) in row.iter_mut().enumerate().take(i + 1) {
            if i == j {
                *e = Complex64::new(p[k], 0.0);
                k += 1;
            } else {
                *e = Complex64::new(p[k], p[k + 1]);
                k += 2;
            }
        }
    }
    debug_assert_eq!(k, 16);
    TwoQubitOperator::new(t)
}

fn t_to_params(t: &TwoQubitOperator) -> Params {
    let mut p = [0.0; 16];
    let mut k = 0;
    for i in 0..4 {
        for j in 0..=i {
            if i == j {
                p[k] = t.entry(i, j).re;
                k += 1;
            } else {
                p[k] = t.entry(i, j).re;
                p[k + 1] = t.entry(i, j).im;
                k += 2;
            }
        }
    }
    p
}

struct MleProblem {
    projectors: Vec<TwoQubitOperator>,
    counts: Vec<f64>,
    flux: f64,
}

impl MleProblem {
    fn density(&self, params: &Params) -> Option<(TwoQubitOperator, f64)> {
        let t = params_to_t(params);
        let gram = t.adjoint() * t;
        let norm = gram.trace().re;
        if !norm.is_finite() || norm <= 1e-300 {
            return None;
        }
        Some((gram.scale(1.0 / norm), norm))
    }

    fn log_likelihood(&self, params: &Params) -> f64 {
        let Some((rho, _)) = self.density(params) else {
            return f64::NEG_INFINITY;
        };
        let mut ll = 0.0;
        for (proj, &n) in self.projectors.iter().zip(self.counts.iter()) {
            let p = proj.expectation(&rho).re.max(0.0);
            let mu = self.flux * p;
            if n > 0.0 {
                if mu <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                ll += n * fmath::ln(mu);
            }
            ll -= mu;
        }
        ll
    }

    /// Analytic gradient of the log-likelihood in parameter space.
    ///
    /// With `G = T^dag T`, `t = tr G`, `p_s = tr[P_s G]/t`:
    /// `dL = 2 Re tr[W T^dag dT]` where
    /// `W = sum_s (n_s/p_s - phi) (P_s - p_s I) / t`, so the gradient matrix
    /// is `2 T W` over the lower triangle.
    fn gradient(&self, params: &Params) -> Params {
        let t_mat = params_to_t(params);
        let gram = t_mat.adjoint() * t_mat;
        let norm = gram.trace().re;
        let rho = gram.scale(1.0 / norm);

        let mut w = TwoQubitOperator::zero();
        for (proj, &n) in self.projectors.iter().zip(self.counts.iter()) {
            let p = proj.expectation(&rho).re;
            let coeff = if n > 0.0 {
                n / p.max(1e-300) - self.flux
            } else {
                -self.flux
            };
            let centered = *proj - TwoQubitOperator::identity().scale(p);
            w = w + centered.scale(coeff / norm);
        }
        let grad_mat = t_mat * w;

        let mut grad = [0.0; 16];
        let mut k = 0;
        for i in 0..4 {
            for j in 0..=i {
                if i == j {
                    grad[k] = 2.0 * grad_mat.entry(i, j).re;
                    k += 1;
                } else {
                    grad[k] = 2.0 * grad_mat.entry(i, j).re;
                    grad[k + 1] = 2.0 * grad_mat.entry(i, j).im;
                    k += 2;
                }
            }
        }
        grad
    }

    fn finish(
        &self,
        settings: &[(QubitOperator, QubitOperator)],
        counts: &[f64],
        params: &Params,
        ll: f64,
        iterations: usize,
    ) -> TomographyRun {
        let (rho, _) = self.density(params).expect("accepted iterate is valid");
        let result = TwoQubitState::from_matrix(rho).expect("parameterization stays physical");
        TomographyRun {
            settings: settings.to_vec(),
            counts: counts.to_vec(),
            result,
            log_likelihood: ll,
            iterations,
        }
    }
}

/// Starting point: linear inversion regularized toward `I/4`, factored into
/// triangular parameters.
fn initial_parameters(
    problem: &MleProblem,
    settings: &[(QubitOperator, QubitOperator)],
    counts: &[f64],
    flux: f64,
) -> Result<Params, TomoError> {
    let basis = pauli_basis();
    let s = settings.len();

    // Least-squares linear inversion in the orthonormal Hermitian basis:
    // A x = p_hat with A_{s,k} = tr[P_s B_k].
    let a: Vec<Vec<f64>> = problem
        .projectors
        .iter()
        .map(|proj| basis.iter().map(|b| proj.expectation(b).re).collect())
        .collect();
    let p_hat: Vec<f64> = counts.iter().map(|&n| n / flux).collect();

    let mut ata = alloc::vec![alloc::vec![0.0_f64; 16]; 16];
    let mut atb = alloc::vec![0.0_f64; 16];
    for row in 0..s {
        for k in 0..16 {
            atb[k] += a[row][k] * p_hat[row];
            for l in 0..16 {
                ata[k][l] += a[row][k] * a[row][l];
            }
        }
    }
    let x = linalg::solve_real(&ata, &atb).ok_or(TomoError::InsufficientSettings)?;

    let mut rho_lin = TwoQubitOperator::zero();
    for (coeff, b) in x.iter().zip(basis.iter()) {
        rho_lin = rho_lin + b.scale(*coeff);
    }
    // Linear inversion of noisy counts need not be normalized or positive.
    let trace = rho_lin.trace().re;
    if fmath::abs(trace) < 1e-12 {
        return Err(TomoError::InsufficientSettings);
    }
    rho_lin = rho_lin.scale(1.0 / trace);
    let mixed = rho_lin.scale(1.0 - INIT_MIX) + TwoQubitOperator::identity().scale(INIT_MIX / 4.0);

    // Clamp stray negative eigenvalues so the Cholesky factor exists.
    let herm = (mixed + mixed.adjoint()).scale(0.5);
    let (eigs, vecs) = linalg::hermitian_eigen(&herm);
    let mut rebuilt = TwoQubitOperator::zero();
    let mut total = 0.0;
    for (k, &lam) in eigs.iter().enumerate() {
        let lam = lam.max(1e-6);
        total += lam;
        let mut outer = [[Complex64::new(0.0, 0.0); 4]; 4];
        for (i, row) in outer.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = vecs.entry(i, k) * vecs.entry(j, k).conj() * lam;
            }
        }
        rebuilt = rebuilt + TwoQubitOperator::new(outer);
    }
    rebuilt = rebuilt.scale(1.0 / total);

    Ok(t_to_params(&lower_triangular_factor(&rebuilt)))
}

/// A lower-triangular `T` with `T^dag T = rho`, for positive definite `rho`.
///
/// Cholesky gives `M M^dag` factors; with `J` the index-reversal
/// permutation, factoring `J rho^T J = M M^dag` and setting `T = J M^T J`
/// yields a lower-triangular `T` with
/// `T^dag T = J (M M^dag)^T J = J J rho J J = rho`.
fn lower_triangular_factor(rho: &TwoQubitOperator) -> TwoQubitOperator {
    let mut rev = [[Complex64::new(0.0, 0.0); 4]; 4];
    for (i, row) in rev.iter_mut().enumerate() {
        for (j, e) in row.iter_mut().enumerate() {
            *e = rho.entry(3 - j, 3 - i);
        }
    }
    let rev = TwoQubitOperator::new(rev);
    let m = linalg::cholesky_lower(&rev).expect("reversed matrix stays positive definite");
    let mut t = [[Complex64::new(0.0, 0.0); 4]; 4];
    for (i, row) in t.iter_mut().enumerate() {
        for (j, e) in row.iter_mut().enumerate() {
            *e = m.entry(3 - j, 3 - i);
        }
    }
    TwoQubitOperator::new(t)
}

/// Orthonormal Hermitian basis `(sigma_i (x) sigma_j)/2`.
fn pauli_basis() -> Vec<TwoQubitOperator> {
    let singles = [
        QubitOperator::identity(),
        QubitOperator::sigma_x(),
        QubitOperator::sigma_y(),
        QubitOperator::sigma_z(),
    ];
    let mut out = Vec::with_capacity(16);
    for a in &singles {
        for b in &singles {
            out.push(tensor(a, b).scale(0.5));
        }
    }
    out
}

/// Wootters concurrence from the spin-flipped spectrum.
pub fn concurrence(rho: &TwoQubitState) -> f64 {
    let yy = tensor(&QubitOperator::sigma_y(), &QubitOperator::sigma_y());
    let mut conj = [[Complex64::new(0.0, 0.0); 4]; 4];
    for (i, row) in conj.iter_mut().enumerate() {
        for (j, e) in row.iter_mut().enumerate() {
            *e = rho.entry(i, j).conj();
        }
    }
    let flipped = yy * TwoQubitOperator::new(conj) * yy;
    let root = linalg::sqrtm_psd(rho.matrix());
    let inner = root * flipped * root;
    // inner is Hermitian PSD with the same spectrum as rho * rho_tilde.
    let herm = (inner + inner.adjoint()).scale(0.5);
    let eigs = linalg::hermitian_eigenvalues(&herm);
    let mut lambdas: Vec<f64> = eigs.iter().map(|&e| fmath::sqrt(e.max(0.0))).collect();
    lambdas.sort_by(|a, b| b.partial_cmp(a).unwrap());
    (lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0)
}

/// `tr[rho^2]`.
pub fn purity(rho: &TwoQubitState) -> f64 {
    rho.purity()
}

/// Overlap `<psi| rho |psi>` with a pure two-qubit target — the fidelity
/// against a pure reference state.
pub fn fidelity_with_pure(rho: &TwoQubitState, psi: &PureState) -> f64 {
    assert!(psi.is_two_qubit(), "reference must be a two-qubit state");
    let amps = psi.amplitudes();
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, ai) in amps.iter().enumerate() {
        for (j, aj) in amps.iter().enumerate() {
            acc += ai.conj() * rho.entry(i, j) * aj;
        }
    }
    acc.re
}
