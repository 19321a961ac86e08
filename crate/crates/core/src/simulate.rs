//! Stochastic experiment simulation and the classical macrorealist oracle.
//!
//! Coincidence counting is modeled as independent Poisson counts per outcome
//! bin with mean `pairs_expected * P(outcomes)`, matching how coincidence
//! windows accumulate events; the delta-method error bars below rely on that
//! independence. Sampling is deterministic given a 64-bit seed through a
//! counter-based generator, so parallel sweeps can derive per-point seeds as
//! `base_seed + grid_index` and reproduce results independent of execution
//! order.
//!
//! [`MrModel`] is the falsification oracle: a hidden-variable ensemble over
//! `(a, b1, b2)` assignments read out by an optionally ambiguous detector
//! (probabilistic reports with calibrated generalized values) and optionally
//! invasive detection (a stochastic disturbance of `(b1, b2)` conditioned on
//! the report). Noninvasive-or-unambiguous models satisfy every enumerated
//! inequality; the shipped demonstration model is both invasive and
//! ambiguous and breaks the three-term bound.

use crate::fmath;
use crate::lgi::{correlations_from_distribution, CorrelationVector, DetectorChain, LgiSpec};
use crate::qstate::TwoQubitState;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

#[derive(Debug, Clone, PartialEq)]
pub enum SimError {
    /// A count table with zero total events cannot support estimation.
    EmptyData,
    /// Count table and chain disagree on the number of outcome bins.
    ShapeMismatch { bins: usize, expected: usize },
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::EmptyData => write!(f, "count table holds no events"),
            SimError::ShapeMismatch { bins, expected } => {
                write!(f, "count table has {bins} bins, chain expects {expected}")
            }
        }
    }
}

impl core::error::Error for SimError {}

#[derive(Debug, Clone, PartialEq)]
pub enum MrError {
    /// A probability table row does not sum to one, or carries a negative
    /// or non-finite entry.
    BadProbabilities,
    /// The report values do not average back to the true value on pure
    /// ensembles.
    NotCalibrated,
    /// Report probabilities identical for both true values; no calibrated
    /// generalized values exist.
    DegenerateResponse,
}

impl fmt::Display for MrError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MrError::BadProbabilities => write!(f, "probability rows must be normalized"),
            MrError::NotCalibrated => write!(f, "report values are not calibrated"),
            MrError::DegenerateResponse => {
                write!(
                    f,
                    "report distribution carries no information about the value"
                )
            }
        }
    }
}

impl core::error::Error for MrError {}

/// Simulated coincidence counts per outcome tuple, with RNG provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct CountTable {
    /// One bin per outcome tuple, indexed by the tuple bitmask.
    pub counts: Vec<u64>,
    /// Expected pair flux the table was generated with.
    pub pairs_expected: f64,
    /// Seed the table was generated with.
    pub seed: u64,
    /// Outcome tuple label per bin, e.g. `r+-`.
    pub labels: Vec<String>,
}

impl CountTable {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Correlation estimates with per-entry standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationEstimate {
    pub correlations: CorrelationVector,
    /// Delta-method standard error per canonical subset.
    pub std_errors: Vec<f64>,
}

/// A sampled inequality evaluation: plug-in value, its standard error, and
/// signed distances past each bound in standard-error units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatLgiEvaluation {
    pub value: f64,
    pub std_error: f64,
    /// `(value - upper) / std_error`; positive means beyond the bound.
    pub z_upper: f64,
    /// `(lower - value) / std_error`; positive means beyond the bound.
    pub z_lower: f64,
}

fn poisson_count(rng: &mut ChaCha8Rng, lambda: f64) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    let draw: f64 = Poisson::new(lambda).expect("positive mean").sample(rng);
    draw as u64
}

/// Draw one Poissonian count table for a chain and state.
///
/// Bin `i` is Poisson with mean `pairs_expected * P(tuple i)`, drawn in
/// tuple order from a stream seeded by `seed`.
pub fn sample_counts(
    chain: &DetectorChain,
    rho: &TwoQubitState,
    pairs_expected: f64,
    seed: u64,
) -> CountTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = Vec::with_capacity(chain.outcome_count());
    let mut labels = Vec::with_capacity(chain.outcome_count());
    for tuple in 0..chain.outcome_count() {
        let lambda = pairs_expected * chain.probability_mask(rho, tuple);
        counts.push(poisson_count(&mut rng, lambda));
        labels.push(chain.tuple_label(tuple));
    }
    CountTable {
        counts,
        pairs_expected,
        seed,
        labels,
    }
}

/// Plug-in correlation estimates with delta-method standard errors from a
/// chain's count table.
pub fn estimate_correlations(
    table: &CountTable,
    chain: &DetectorChain,
) -> Result<CorrelationEstimate, SimError> {
    if table.counts.len() != chain.outcome_count() {
        return Err(SimError::ShapeMismatch {
            bins: table.counts.len(),
            expected: chain.outcome_count(),
        });
    }
    estimate_correlations_with_values(&table.counts, chain.outcome_values())
}

/// Same estimator, parameterized by per-detector outcome values — used for
/// both quantum chains and classical macrorealist report tables.
pub fn estimate_correlations_with_values(
    counts: &[u64],
    values: &[[f64; 2]],
) -> Result<CorrelationEstimate, SimError> {
    let m = values.len();
    debug_assert_eq!(counts.len(), 1 << m);
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(SimError::EmptyData);
    }
    let n = total as f64;
    let freqs: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
    let correlations = correlations_from_distribution(&freqs, values);

    // The estimator is a ratio of Poisson sums; to first order
    // Var = sum_bins n_bin (w_bin - estimate)^2 / N^2.
    let mut std_errors = Vec::with_capacity(correlations.values().len());
    for (slot, &mask) in correlations.subset_masks().iter().enumerate() {
        let est = correlations.values()[slot];
        let mut var = 0.0;
        for (tuple, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let w = subset_weight(tuple, mask, values);
            var += c as f64 * (w - est) * (w - est);
        }
        std_errors.push(fmath::sqrt(var) / n);
    }
    Ok(CorrelationEstimate {
        correlations,
        std_errors,
    })
}

/// Evaluate one inequality against sampled counts: plug-in value plus a
/// delta-method standard error for the full coefficient combination (the
/// per-entry errors are correlated, so the combination is propagated through
/// the counts directly).
pub fn evaluate_lgi_statistical(
    table: &CountTable,
    values: &[[f64; 2]],
    spec: &LgiSpec,
) -> Result<StatLgiEvaluation, SimError> {
    let m = values.len();
    debug_assert_eq!(table.counts.len(), 1 << m);
    let total = table.total();
    if total == 0 {
        return Err(SimError::EmptyData);
    }
    let n = total as f64;
    let order = crate::lgi::canonical_subsets(m);

    let mut value = 0.0;
    let mut combined: Vec<f64> = Vec::with_capacity(1 << m);
    for tuple in 0..(1usize << m) {
        let g: f64 = spec
            .coeffs()
            .iter()
            .zip(order.iter())
            .map(|(&c, &mask)| c as f64 * subset_weight(tuple, mask, values))
            .sum();
        combined.push(g);
        value += table.counts[tuple] as f64 / n * g;
    }
    let mut var = 0.0;
    for (tuple, &c) in table.counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let d = combined[tuple] - value;
        var += c as f64 * d * d;
    }
    let std_error = fmath::sqrt(var) / n;
    let z_upper = (value - spec.upper_bound() as f64) / std_error;
    let z_lower = (spec.lower_bound() as f64 - value) / std_error;
    Ok(StatLgiEvaluation {
        value,
        std_error,
        z_upper,
        z_lower,
    })
}

fn subset_weight(tuple: usize, mask: usize, values: &[[f64; 2]]) -> f64 {
    let mut w = 1.0;
    let mut rest = mask;
    while rest != 0 {
        let i = rest.trailing_zeros() as usize;
        w *= values[i][(tuple >> i) & 1];
        rest &= rest - 1;
    }
    w
}

/// Stochastic disturbance of the `(b1, b2)` pair conditioned on the meter
/// report: `map[report][from_pair][to_pair]`, each row a distribution.
/// Pair indices pack `b1` in bit 0 and `b2` in bit 1 (0 is `+1`).
#[derive(Debug, Clone, PartialEq)]
pub struct Disturbance {
    pub map: [[[f64; 4]; 4]; 2],
}

impl Disturbance {
    /// Report-independent identity (no disturbance).
    pub fn identity() -> Self {
        let mut map = [[[0.0; 4]; 4]; 2];
        for per_report in &mut map {
            for (from, row) in per_report.iter_mut().enumerate() {
                row[from] = 1.0;
            }
        }
        Self { map }
    }
}

/// Classical macrorealist model of the three-detector experiment.
///
/// Hidden properties `(a, b1, b2)` in `{+1, -1}^3` are drawn from a fixed
/// ensemble. The first detector reports outcome `r` or `t` with
/// probabilities depending on `a` only, and the report carries a calibrated
/// generalized value. The polarizer detectors report `b1, b2` unambiguously,
/// after an optional report-conditioned disturbance.
///
/// Index conventions match the quantum chain: tuple bit 0 is the meter
/// report, bits 1 and 2 the polarizer values; outcome index 0 means `r` or
/// `+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MrModel {
    /// `P(a, b1, b2)` over assignment masks (bit 0 = a, bit 1 = b1,
    /// bit 2 = b2; bit set means value `-1`).
    ensemble: [f64; 8],
    /// `response[a_index][report]`: probability of each report given the
    /// true value.
    response: [[f64; 2]; 2],
    /// Generalized value of each report.
    values: [f64; 2],
    disturbance: Option<Disturbance>,
}

const ROW_TOL: f64 = 1e-12;
const CALIBRATION_TOL: f64 = 1e-10;

fn is_distribution(row: &[f64]) -> bool {
    row.iter().all(|&p| p.is_finite() && p >= -1e-15)
        && fmath::abs(row.iter().sum::<f64>() - 1.0) <= ROW_TOL
}

impl MrModel {
    /// Build and validate a model from explicit tables.
    pub fn new(
        ensemble: [f64; 8],
        response: [[f64; 2]; 2],
        values: [f64; 2],
        disturbance: Option<Disturbance>,
    ) -> Result<Self, MrError> {
        if !is_distribution(&ensemble)
            || !is_distribution(&response[0])
            || !is_distribution(&response[1])
        {
            return Err(MrError::BadProbabilities);
        }
        if let Some(d) = &disturbance {
            for per_report in &d.map {
                for row in per_report {
                    if !is_distribution(row) {
                        return Err(MrError::BadProbabilities);
                    }
                }
            }
        }
        for (a_index, truth) in [(0usize, 1.0), (1usize, -1.0)] {
            let avg = values[0] * response[a_index][0] + values[1] * response[a_index][1];
            if fmath::abs(avg - truth) > CALIBRATION_TOL {
                return Err(MrError::NotCalibrated);
            }
        }
        Ok(Self {
            ensemble,
            response,
            values,
            disturbance,
        })
    }

    /// Ambiguous detector with report probabilities `q_plus = P(r | +1)`
    /// and `q_minus = P(r | -1)`; the generalized values are derived from
    /// the calibration conditions, exactly as the quantum contextual values
    /// follow from the reflectivities.
    pub fn calibrated_ambiguous(
        ensemble: [f64; 8],
        q_plus: f64,
        q_minus: f64,
        disturbance: Option<Disturbance>,
    ) -> Result<Self, MrError> {
        if fmath::abs(q_plus - q_minus) < 1e-9 {
            return Err(MrError::DegenerateResponse);
        }
        let delta = 2.0 / (q_plus - q_minus);
        let v_t = 1.0 - q_plus * delta;
        let v_r = v_t + delta;
        Self::new(
            ensemble,
            [[q_plus, 1.0 - q_plus], [q_minus, 1.0 - q_minus]],
            [v_r, v_t],
            disturbance,
        )
    }

    /// Unambiguous detector: the report is the true value.
    pub fn unambiguous(
        ensemble: [f64; 8],
        disturbance: Option<Disturbance>,
    ) -> Result<Self, MrError> {
        Self::new(ensemble, [[1.0, 0.0], [0.0, 1.0]], [1.0, -1.0], disturbance)
    }

    /// A random noninvasive model: arbitrary ensemble, ambiguous but
    /// calibrated detector. Every inequality in the enumerated family holds
    /// for such models.
    pub fn random_noninvasive<R: Rng>(rng: &mut R) -> Self {
        let mut ensemble = [0.0; 8];
        let mut total = 0.0;
        for p in &mut ensemble {
            *p = rng.gen_range(0.01..1.0);
            total += *p;
        }
        for p in &mut ensemble {
            *p /= total;
        }
        let low = rng.gen_range(0.02..0.44);
        let high = rng.gen_range((low + 0.1)..0.98);
        let (q_plus, q_minus) = if rng.gen::<bool>() {
            (low, high)
        } else {
            (high, low)
        };
        Self::calibrated_ambiguous(ensemble, q_plus, q_minus, None)
            .expect("construction is calibrated")
    }

    /// The shipped invasive-and-ambiguous demonstration model.
    ///
    /// Ensemble: all pairs carry `(+1, +1, +1)`. Detector: the coverslip
    /// response at the calibrated reflectivities (report `r` with
    /// probability 0.0390 for `+1`, 0.175 for `-1`). Disturbance: a reflected
    /// report flips `b1`. Found by grid search over flip probabilities in
    /// `{0, 0.25, 0.5, 0.75, 1}`; the rare large-negative report value is
    /// decoupled from the product term by the flip, which pushes the
    /// three-term correlation to about 2.10, far past its bound of 1.
    pub fn invasive_ambiguous_demo() -> Self {
        let mut ensemble = [0.0; 8];
        ensemble[0] = 1.0;
        let mut map = Disturbance::identity().map;
        // On report r: (b1, b2) -> (-b1, b2) with probability 1.
        map[0] = [
            [0.0, 1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 1.0, 0.0],
        ];
        Self::calibrated_ambiguous(ensemble, 0.0390, 0.175, Some(Disturbance { map }))
            .expect("demo model is calibrated")
    }

    pub fn report_values(&self) -> [f64; 2] {
        self.values
    }

    pub fn is_invasive(&self) -> bool {
        self.disturbance.is_some()
    }

    /// Outcome values per detector in chain layout, for the estimators.
    pub fn outcome_values(&self) -> Vec<[f64; 2]> {
        alloc::vec![self.values, [1.0, -1.0], [1.0, -1.0]]
    }

    /// Exact distribution over report tuples `(alpha, b1', b2')`.
    pub fn outcome_distribution(&self) -> [f64; 8] {
        let identity = Disturbance::identity();
        let dist = self.disturbance.as_ref().unwrap_or(&identity);
        let mut out = [0.0; 8];
        for (hidden, &p_hidden) in self.ensemble.iter().enumerate() {
            if p_hidden == 0.0 {
                continue;
            }
            let a_index = hidden & 1;
            let pair_in = hidden >> 1;
            for report in 0..2 {
                let p_report = self.response[a_index][report];
                if p_report == 0.0 {
                    continue;
                }
                for pair_out in 0..4 {
                    let p_move = dist.map[report][pair_in][pair_out];
                    if p_move == 0.0 {
                        continue;
                    }
                    out[report | (pair_out << 1)] += p_hidden * p_report * p_move;
                }
            }
        }
        out
    }

    /// Exact correlation functions of the reported values.
    pub fn correlation_vector(&self) -> CorrelationVector {
        correlations_from_distribution(&self.outcome_distribution(), &self.outcome_values())
    }
}

/// Poissonian counts over the classical model's report tuples.
///
/// As with [`sample_counts`], each bin is an independent Poisson draw with
/// mean `pairs_expected * P(tuple)`.
pub fn sample_mr(model: &MrModel, pairs_expected: f64, seed: u64) -> CountTable {
    let probs = model.outcome_distribution();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = Vec::with_capacity(8);
    let mut labels = Vec::with_capacity(8);
    for (tuple, &p) in probs.iter().enumerate() {
        counts.push(poisson_count(&mut rng, pairs_expected * p));
        let mut label = String::new();
        label.push(if tuple & 1 == 0 { 'r' } else { 't' });
        label.push(if tuple & 2 == 0 { '+' } else { '-' });
        label.push(if tuple & 4 == 0 { '+' } else { '-' });
        labels.push(label);
    }
    CountTable {
        counts,
        pairs_expected,
        seed,
        labels,
    }
}
