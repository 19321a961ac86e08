//! Generalized Leggett-Garg inequalities over a detector chain.
//!
//! A [`DetectorChain`] is an ordered list of detectors acting on the qubit
//! pair: at most one semi-weak meter per party plus projective dichotomic
//! polarizers. From the joint outcome distribution of one chain the module
//! computes
//!
//! * exact joint probabilities by walking the chain in time order,
//! * all `2^M - 1` correlation functions, weighting meter outcomes by their
//!   contextual values and projective outcomes by the eigenvalues `+/-1`,
//! * macrorealist bounds of any `{-1,0,+1}` coefficient vector by brute
//!   force over the `2^M` deterministic value assignments,
//! * the full family of `(3^(2^M - 1) - 1)/2` sign-canonical inequalities as
//!   a lazy stream,
//! * conditioned averages of the meter observable and the convex-sum
//!   constraint they satisfy under macrorealism.

use crate::meter::{MeterOutcome, SemiWeakMeter};
use crate::qstate::{embed, stokes_theta, Party, QubitOperator, TwoQubitOperator, TwoQubitState};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Margin beyond an MR bound before an analytic value counts as a violation.
pub const VIOLATION_TOL: f64 = 1e-9;

/// Conditioning probabilities below this are treated as never realized.
pub const CONDITION_PROB_TOL: f64 = 1e-12;

/// Largest chain size supported by the enumeration machinery.
pub const MAX_DETECTORS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub enum ChainError {
    /// More than one semi-weak meter configured on one party.
    DuplicateMeter { party: Party },
    /// A projective detector's observable is not Hermitian with eigenvalues
    /// exactly plus and minus one.
    NotDichotomic { index: usize },
    /// Chains beyond [`MAX_DETECTORS`] detectors are not supported.
    TooManyDetectors { len: usize },
    /// A chain must contain at least one detector.
    Empty,
}

impl fmt::Display for ChainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChainError::DuplicateMeter { party } => {
                write!(f, "more than one semi-weak meter on party {party:?}")
            }
            ChainError::NotDichotomic { index } => {
                write!(f, "detector {index} is not a +/-1 observable")
            }
            ChainError::TooManyDetectors { len } => {
                write!(
                    f,
                    "chain of {len} detectors exceeds the supported {MAX_DETECTORS}"
                )
            }
            ChainError::Empty => write!(f, "detector chain is empty"),
        }
    }
}

impl core::error::Error for ChainError {}

#[derive(Debug, Clone, PartialEq)]
pub enum LgiError {
    /// Enumeration is only defined for 1 to 4 detectors.
    UnsupportedSize { m: usize },
    /// The conditioning event has probability below [`CONDITION_PROB_TOL`].
    ZeroConditioningProbability,
    /// Conditioned averages need exactly one semi-weak meter in the chain.
    SingleMeterRequired,
    /// A condition referenced the meter or an out-of-range detector.
    InvalidCondition,
    /// The operation requires the three-detector chain shape
    /// (meter, projective, projective).
    NotFig1Shaped,
    /// Spec and correlation vector sizes disagree.
    SizeMismatch { spec_m: usize, corr_m: usize },
    /// Coefficient vector was all zero or carried values outside -1..=1.
    BadCoefficients,
}

impl fmt::Display for LgiError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LgiError::UnsupportedSize { m } => write!(f, "unsupported detector count {m}"),
            LgiError::ZeroConditioningProbability => {
                write!(f, "conditioning event has vanishing probability")
            }
            LgiError::SingleMeterRequired => {
                write!(f, "operation requires exactly one semi-weak meter")
            }
            LgiError::InvalidCondition => write!(f, "condition refers to an invalid detector"),
            LgiError::NotFig1Shaped => {
                write!(f, "operation requires the meter + two-polarizer chain")
            }
            LgiError::SizeMismatch { spec_m, corr_m } => {
                write!(
                    f,
                    "spec is over {spec_m} detectors, correlations over {corr_m}"
                )
            }
            LgiError::BadCoefficients => {
                write!(f, "coefficients must be in {{-1,0,1}} and not all zero")
            }
        }
    }
}

impl core::error::Error for LgiError {}

/// What a detector in the chain does to the state.
#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum DetectorKind {
    /// Two-outcome semi-weak meter; outcomes are weighted by its contextual
    /// values.
    SemiWeak(SemiWeakMeter),
    /// Projective measurement of a dichotomic observable; outcomes are the
    /// eigenvalues `+1` and `-1`.
    Projective(QubitOperator),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detector {
    pub party: Party,
    pub kind: DetectorKind,
    pub label: String,
}

impl Detector {
    pub fn semi_weak(party: Party, meter: SemiWeakMeter, label: &str) -> Self {
        Self {
            party,
            kind: DetectorKind::SemiWeak(meter),
            label: String::from(label),
        }
    }

    pub fn projective(party: Party, observable: QubitOperator, label: &str) -> Self {
        Self {
            party,
            kind: DetectorKind::Projective(observable),
            label: String::from(label),
        }
    }
}

/// An ordered detector chain; list order is time order.
#[derive(Debug, Clone)]
pub struct DetectorChain {
    detectors: Vec<Detector>,
    /// Embedded 4x4 back-action per detector and outcome index.
    ops: Vec<[TwoQubitOperator; 2]>,
    /// Outcome value per detector and outcome index (contextual values for
    /// meters, eigenvalues for projectors).
    values: Vec<[f64; 2]>,
    /// Subset masks in canonical order: ascending size, then ascending index.
    subset_order: Vec<usize>,
}

impl DetectorChain {
    pub fn new(detectors: Vec<Detector>) -> Result<Self, ChainError> {
        if detectors.is_empty() {
            return Err(ChainError::Empty);
        }
        if detectors.len() > MAX_DETECTORS {
            return Err(ChainError::TooManyDetectors {
                len: detectors.len(),
            });
        }
        for party in [Party::One, Party::Two] {
            let meters = detectors
                .iter()
                .filter(|d| d.party == party && matches!(d.kind, DetectorKind::SemiWeak(_)))
                .count();
            if meters > 1 {
                return Err(ChainError::DuplicateMeter { party });
            }
        }
        let mut ops = Vec::with_capacity(detectors.len());
        let mut values = Vec::with_capacity(detectors.len());
        for (index, det) in detectors.iter().enumerate() {
            match &det.kind {
                DetectorKind::SemiWeak(m) => {
                    ops.push([
                        embed(m.kraus(MeterOutcome::Reflected), det.party),
                        embed(m.kraus(MeterOutcome::Transmitted), det.party),
                    ]);
                    values.push([
                        m.contextual_value(MeterOutcome::Reflected),
                        m.contextual_value(MeterOutcome::Transmitted),
                    ]);
                }
                DetectorKind::Projective(obs) => {
                    if !obs.is_dichotomic(1e-12) {
                        return Err(ChainError::NotDichotomic { index });
                    }
                    let (plus, minus) = obs.dichotomic_projectors();
                    ops.push([embed(&plus, det.party), embed(&minus, det.party)]);
                    values.push([1.0, -1.0]);
                }
            }
        }
        let subset_order = canonical_subsets(detectors.len());
        Ok(Self {
            detectors,
            ops,
            values,
            subset_order,
        })
    }

    /// The three-detector chain of the biphoton experiment: semi-weak meter
    /// on party 1, then the rotated polarizer `sigma_theta` on party 1 and
    /// `sigma_z` on party 2.
    pub fn fig1(meter: SemiWeakMeter, theta_deg: f64) -> Self {
        Self::new(alloc::vec![
            Detector::semi_weak(Party::One, meter, "A1"),
            Detector::projective(Party::One, stokes_theta(theta_deg), "B1"),
            Detector::projective(Party::Two, QubitOperator::sigma_z(), "B2"),
        ])
        .expect("canonical chain is valid")
    }

    /// The two-detector chain obtained by ignoring the party-2 polarizer.
    pub fn single_party(meter: SemiWeakMeter, theta_deg: f64) -> Self {
        Self::new(alloc::vec![
            Detector::semi_weak(Party::One, meter, "A1"),
            Detector::projective(Party::One, stokes_theta(theta_deg), "B1"),
        ])
        .expect("canonical chain is valid")
    }

    /// The four-detector chain with a second semi-weak meter on party 2
    /// ahead of its polarizer.
    pub fn two_meters(meter1: SemiWeakMeter, meter2: SemiWeakMeter, theta_deg: f64) -> Self {
        Self::new(alloc::vec![
            Detector::semi_weak(Party::One, meter1, "A1"),
            Detector::semi_weak(Party::Two, meter2, "A2"),
            Detector::projective(Party::One, stokes_theta(theta_deg), "B1"),
            Detector::projective(Party::Two, QubitOperator::sigma_z(), "B2"),
        ])
        .expect("canonical chain is valid")
    }

    pub fn len(&self) -> usize {
        self.detectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detectors.is_empty()
    }

    pub fn detectors(&self) -> &[Detector] {
        &self.detectors
    }

    /// Number of joint outcome tuples, `2^M`.
    pub fn outcome_count(&self) -> usize {
        1 << self.len()
    }

    /// Outcome values per detector: contextual values for meters,
    /// eigenvalues for projectors; index 0 is reflected / `+1`.
    pub fn outcome_values(&self) -> &[[f64; 2]] {
        &self.values
    }

    /// Subset masks in canonical order (ascending size, then index order).
    pub fn subset_masks(&self) -> &[usize] {
        &self.subset_order
    }

    /// Human-readable subset label, e.g. `A1B1B2`.
    pub fn subset_label(&self, mask: usize) -> String {
        let mut out = String::new();
        for (i, det) in self.detectors.iter().enumerate() {
            if mask & (1 << i) != 0 {
                out.push_str(&det.label);
            }
        }
        out
    }

    /// Mask for a subset label such as `A1B1B2`; `None` when the label does
    /// not parse as a set of this chain's detector labels.
    pub fn subset_mask_for_label(&self, label: &str) -> Option<usize> {
        let mut rest = label;
        let mut mask = 0usize;
        'outer: while !rest.is_empty() {
            for (i, det) in self.detectors.iter().enumerate() {
                if mask & (1 << i) == 0 {
                    if let Some(tail) = rest.strip_prefix(det.label.as_str()) {
                        mask |= 1 << i;
                        rest = tail;
                        continue 'outer;
                    }
                }
            }
            return None;
        }
        (mask != 0).then_some(mask)
    }

    /// Short label for an outcome tuple, e.g. `r+-`; meters print `r`/`t`
    /// and projectors `+`/`-`.
    pub fn tuple_label(&self, tuple: usize) -> String {
        let mut out = String::new();
        for (i, det) in self.detectors.iter().enumerate() {
            let second = tuple & (1 << i) != 0;
            out.push(match (&det.kind, second) {
                (DetectorKind::SemiWeak(_), false) => 'r',
                (DetectorKind::SemiWeak(_), true) => 't',
                (DetectorKind::Projective(_), false) => '+',
                (DetectorKind::Projective(_), true) => '-',
            });
        }
        out
    }

    /// Masks of two-detector subsets whose members sit on different parties.
    pub fn cross_party_pair_masks(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                if self.detectors[i].party != self.detectors[j].party {
                    out.push((1 << i) | (1 << j));
                }
            }
        }
        out
    }

    /// Joint probability of one outcome per detector, applied in time order.
    ///
    /// `outcomes[i]` is 0 (reflected / `+1`) or 1 (transmitted / `-1`) for
    /// detector `i`.
    pub fn joint_probability(&self, rho: &TwoQubitState, outcomes: &[usize]) -> f64 {
        assert_eq!(outcomes.len(), self.len(), "need one outcome per detector");
        let mut mask = 0usize;
        for (i, &o) in outcomes.iter().enumerate() {
            assert!(o < 2, "outcome index {o} out of range");
            mask |= o << i;
        }
        self.probability_mask(rho, mask)
    }

    /// Joint probability with outcomes packed as a bitmask (bit `i` is the
    /// outcome index of detector `i`).
    pub fn probability_mask(&self, rho: &TwoQubitState, tuple: usize) -> f64 {
        debug_assert!(tuple < self.outcome_count());
        let mut state = *rho.matrix();
        for (i, ops) in self.ops.iter().enumerate() {
            let op = &ops[(tuple >> i) & 1];
            state = *op * state * op.adjoint();
        }
        state.trace().re.max(0.0)
    }

    /// All `2^M - 1` correlation functions of the chain on `rho`.
    pub fn correlation_vector(&self, rho: &TwoQubitState) -> CorrelationVector {
        let probs: Vec<f64> = (0..self.outcome_count())
            .map(|tuple| self.probability_mask(rho, tuple))
            .collect();
        correlations_from_distribution(&probs, &self.values)
    }

    /// Marginal probability of a partial condition on projective detectors,
    /// summed over everything unconstrained.
    pub fn condition_probability(&self, rho: &TwoQubitState, condition: &[(usize, usize)]) -> f64 {
        let mut total = 0.0;
        for tuple in 0..self.outcome_count() {
            if condition_matches(tuple, condition) {
                total += self.probability_mask(rho, tuple);
            }
        }
        total
    }

    /// Contextual-value-weighted average of the meter outcome, conditioned
    /// on the given projective outcomes (detector index, outcome index).
    ///
    /// Unreferenced projective detectors are summed over non-selectively.
    pub fn conditioned_average(
        &self,
        rho: &TwoQubitState,
        condition: &[(usize, usize)],
    ) -> Result<f64, LgiError> {
        let meter_index = self.single_meter_index()?;
        for &(d, o) in condition {
            if d >= self.len() || o > 1 || d == meter_index {
                return Err(LgiError::InvalidCondition);
            }
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for tuple in 0..self.outcome_count() {
            if !condition_matches(tuple, condition) {
                continue;
            }
            let p = self.probability_mask(rho, tuple);
            num += self.values[meter_index][(tuple >> meter_index) & 1] * p;
            den += p;
        }
        if den < CONDITION_PROB_TOL {
            return Err(LgiError::ZeroConditioningProbability);
        }
        Ok(num / den)
    }

    /// The convex-sum constraint on the two aligned conditioned averages.
    ///
    /// For the meter + two-polarizer chain, macrorealism with a noninvasive
    /// or unambiguous meter bounds
    /// `CA(+,+) p+ + CA(-,-) p-` above by one, where
    /// `p+- = P(+-,+-) / (P(+,+) + P(-,-))`.
    pub fn convex_sum_constraint(&self, rho: &TwoQubitState) -> Result<ConvexSumCheck, LgiError> {
        if self.len() != 3
            || !matches!(self.detectors[0].kind, DetectorKind::SemiWeak(_))
            || !matches!(self.detectors[1].kind, DetectorKind::Projective(_))
            || !matches!(self.detectors[2].kind, DetectorKind::Projective(_))
        {
            return Err(LgiError::NotFig1Shaped);
        }
        let p_pp = self.condition_probability(rho, &[(1, 0), (2, 0)]);
        let p_mm = self.condition_probability(rho, &[(1, 1), (2, 1)]);
        let total = p_pp + p_mm;
        if total < CONDITION_PROB_TOL {
            return Err(LgiError::ZeroConditioningProbability);
        }
        let ca_plus = self.conditioned_average(rho, &[(1, 0), (2, 0)])?;
        let ca_minus = self.conditioned_average(rho, &[(1, 1), (2, 1)])?;
        let p_plus = p_pp / total;
        let p_minus = p_mm / total;
        let lhs = ca_plus * p_plus + ca_minus * p_minus;
        Ok(ConvexSumCheck {
            lhs,
            p_plus,
            p_minus,
            ca_plus_plus: ca_plus,
            ca_minus_minus: ca_minus,
            violated: lhs > 1.0 + VIOLATION_TOL,
        })
    }

    fn single_meter_index(&self) -> Result<usize, LgiError> {
        let mut found = None;
        for (i, det) in self.detectors.iter().enumerate() {
            if matches!(det.kind, DetectorKind::SemiWeak(_)) {
                if found.is_some() {
                    return Err(LgiError::SingleMeterRequired);
                }
                found = Some(i);
            }
        }
        found.ok_or(LgiError::SingleMeterRequired)
    }
}

fn condition_matches(tuple: usize, condition: &[(usize, usize)]) -> bool {
    condition.iter().all(|&(d, o)| (tuple >> d) & 1 == o)
}

/// Nonempty detector subsets in canonical order: ascending size, ties broken
/// by ascending detector indices. For masks this is (popcount, mask) order.
pub fn canonical_subsets(m: usize) -> Vec<usize> {
    let mut masks: Vec<usize> = (1..(1usize << m)).collect();
    masks.sort_by_key(|&mask| (mask.count_ones(), mask));
    masks
}

/// Correlation functions of a distribution over outcome tuples.
///
/// `probs[tuple]` is the probability (or relative frequency) of the tuple
/// bitmask, `values[i]` the two outcome values of detector `i`. Entry order
/// follows [`canonical_subsets`].
pub fn correlations_from_distribution(probs: &[f64], values: &[[f64; 2]]) -> CorrelationVector {
    let m = values.len();
    assert_eq!(probs.len(), 1 << m, "one probability per outcome tuple");
    let order = canonical_subsets(m);
    let mut out = alloc::vec![0.0_f64; order.len()];
    let mut prod = alloc::vec![1.0_f64; 1 << m];
    for (tuple, &p) in probs.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        // prod[mask] = product of outcome values over detectors in mask.
        for mask in 1..(1usize << m) {
            let low = mask.trailing_zeros() as usize;
            prod[mask] = prod[mask & (mask - 1)] * values[low][(tuple >> low) & 1];
        }
        for (slot, &mask) in order.iter().enumerate() {
            out[slot] += p * prod[mask];
        }
    }
    CorrelationVector {
        m,
        subset_order: order,
        values: out,
    }
}

/// The `2^M - 1` correlation functions of one chain, in canonical subset
/// order.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationVector {
    m: usize,
    subset_order: Vec<usize>,
    values: Vec<f64>,
}

impl CorrelationVector {
    /// Assemble from raw values in canonical subset order.
    pub fn from_values(m: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), (1 << m) - 1);
        Self {
            m,
            subset_order: canonical_subsets(m),
            values,
        }
    }

    pub fn detector_count(&self) -> usize {
        self.m
    }

    /// Values in canonical subset order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn subset_masks(&self) -> &[usize] {
        &self.subset_order
    }

    /// Correlation of one subset mask.
    pub fn value(&self, mask: usize) -> f64 {
        let slot = self
            .subset_order
            .iter()
            .position(|&s| s == mask)
            .expect("mask within range");
        self.values[slot]
    }
}

/// One generalized inequality: coefficients over the canonical subsets plus
/// the exact macrorealist bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LgiSpec {
    m: u8,
    n_subsets: u8,
    coeffs: [i8; 15],
    lower: i32,
    upper: i32,
}

/// Result of evaluating one spec against a correlation vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LgiEvaluation {
    pub value: f64,
    pub violated_upper: bool,
    pub violated_lower: bool,
}

/// Result of the convex-sum constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexSumCheck {
    pub lhs: f64,
    pub p_plus: f64,
    pub p_minus: f64,
    pub ca_plus_plus: f64,
    pub ca_minus_minus: f64,
    pub violated: bool,
}

impl LgiSpec {
    /// Build a spec from coefficients in canonical subset order. Bounds are
    /// brute-forced over all deterministic assignments. The sign convention
    /// of the input is preserved.
    pub fn from_canonical_coeffs(m: usize, coeffs: &[i8]) -> Result<Self, LgiError> {
        if !(1..=MAX_DETECTORS).contains(&m) {
            return Err(LgiError::UnsupportedSize { m });
        }
        let n_subsets = (1usize << m) - 1;
        if coeffs.len() != n_subsets
            || coeffs.iter().all(|&c| c == 0)
            || coeffs.iter().any(|&c| !(-1..=1).contains(&c))
        {
            return Err(LgiError::BadCoefficients);
        }
        let mut packed = [0i8; 15];
        packed[..n_subsets].copy_from_slice(coeffs);
        let table = AssignmentTable::new(m);
        let (lower, upper) = table.bounds(&packed, n_subsets);
        Ok(Self {
            m: m as u8,
            n_subsets: n_subsets as u8,
            coeffs: packed,
            lower,
            upper,
        })
    }

    /// Build a spec from `(subset mask, coefficient)` pairs; omitted subsets
    /// get coefficient zero.
    pub fn from_subset_coeffs(m: usize, entries: &[(usize, i8)]) -> Result<Self, LgiError> {
        if !(1..=MAX_DETECTORS).contains(&m) {
            return Err(LgiError::UnsupportedSize { m });
        }
        let order = canonical_subsets(m);
        let mut coeffs = alloc::vec![0i8; order.len()];
        for &(mask, c) in entries {
            let slot = order
                .iter()
                .position(|&s| s == mask)
                .ok_or(LgiError::BadCoefficients)?;
            coeffs[slot] = c;
        }
        Self::from_canonical_coeffs(m, &coeffs)
    }

    pub fn detector_count(&self) -> usize {
        self.m as usize
    }

    pub fn coeffs(&self) -> &[i8] {
        &self.coeffs[..self.n_subsets as usize]
    }

    pub fn lower_bound(&self) -> i32 {
        self.lower
    }

    pub fn upper_bound(&self) -> i32 {
        self.upper
    }

    /// Base-3 index of the coefficient vector; unique per spec and stable
    /// across runs, used as the spec id in reports.
    pub fn spec_id(&self) -> u64 {
        let mut id = 0u64;
        for &c in self.coeffs().iter().rev() {
            id = id * 3 + (c + 1) as u64;
        }
        id
    }

    /// True when the first nonzero coefficient in canonical order is `+1`.
    pub fn is_canonical(&self) -> bool {
        match self.coeffs().iter().find(|&&c| c != 0) {
            Some(&c) => c > 0,
            None => false,
        }
    }

    /// The sign-canonical representative of this spec (bounds swap and
    /// negate along with the coefficients).
    pub fn canonicalize(&self) -> Self {
        if self.is_canonical() {
            return *self;
        }
        let mut out = *self;
        for c in &mut out.coeffs[..out.n_subsets as usize] {
            *c = -*c;
        }
        out.lower = -self.upper;
        out.upper = -self.lower;
        out
    }

    /// Value and violation flags against a correlation vector.
    pub fn evaluate(&self, corr: &CorrelationVector) -> Result<LgiEvaluation, LgiError> {
        if corr.detector_count() != self.detector_count() {
            return Err(LgiError::SizeMismatch {
                spec_m: self.detector_count(),
                corr_m: corr.detector_count(),
            });
        }
        let value: f64 = self
            .coeffs()
            .iter()
            .zip(corr.values().iter())
            .map(|(&c, &v)| c as f64 * v)
            .sum();
        Ok(LgiEvaluation {
            value,
            violated_upper: value > self.upper as f64 + VIOLATION_TOL,
            violated_lower: value < self.lower as f64 - VIOLATION_TOL,
        })
    }

    /// Supported only on two-detector subsets that straddle the parties —
    /// the shape shared with the CHSH-Bell correlation when a second meter
    /// is present.
    pub fn is_chsh_candidate(&self, chain: &DetectorChain) -> bool {
        if chain.len() != self.detector_count() {
            return false;
        }
        let cross = chain.cross_party_pair_masks();
        let order = canonical_subsets(self.detector_count());
        self.coeffs()
            .iter()
            .zip(order.iter())
            .all(|(&c, &mask)| c == 0 || cross.contains(&mask))
    }

    /// Render coefficients with subset labels from the chain, e.g.
    /// `+A1 +A1B1B2 -B1B2`.
    pub fn describe(&self, chain: &DetectorChain) -> String {
        let order = canonical_subsets(self.detector_count());
        let mut out = String::new();
        for (&c, &mask) in self.coeffs().iter().zip(order.iter()) {
            if c == 0 {
                continue;
            }
            if !out.is_empty() {
                out.push(' ');
            }
            out.push(if c > 0 { '+' } else { '-' });
            out.push_str(&chain.subset_label(mask));
        }
        out
    }
}

/// Exact macrorealist bounds of a coefficient vector in canonical subset
/// order: the min and max of the correlation over all `2^M` deterministic
/// `+/-1` assignments.
pub fn mr_bounds(m: usize, coeffs: &[i8]) -> Result<(i32, i32), LgiError> {
    let spec = LgiSpec::from_canonical_coeffs(m, coeffs)?;
    Ok((spec.lower_bound(), spec.upper_bound()))
}

/// Sign of each subset product under each deterministic assignment.
struct AssignmentTable {
    m: usize,
    /// `signs[a][k]` is the product of assignment `a` over canonical subset
    /// `k`; assignments index negative-value detectors by bit.
    signs: Vec<Vec<i8>>,
}

impl AssignmentTable {
    fn new(m: usize) -> Self {
        let order = canonical_subsets(m);
        let signs = (0..(1usize << m))
            .map(|neg| {
                order
                    .iter()
                    .map(|&mask| {
                        if (neg & mask).count_ones() % 2 == 0 {
                            1
                        } else {
                            -1
                        }
                    })
                    .collect()
            })
            .collect();
        Self { m, signs }
    }

    fn bounds(&self, coeffs: &[i8; 15], n_subsets: usize) -> (i32, i32) {
        let mut lower = i32::MAX;
        let mut upper = i32::MIN;
        for row in &self.signs {
            let mut v = 0i32;
            for k in 0..n_subsets {
                v += coeffs[k] as i32 * row[k] as i32;
            }
            lower = lower.min(v);
            upper = upper.max(v);
        }
        debug_assert_eq!(self.signs.len(), 1 << self.m);
        (lower, upper)
    }
}

/// Lazily enumerate every sign-canonical inequality over `m` detectors.
///
/// Yields exactly `(3^(2^m - 1) - 1) / 2` specs in ascending
/// [`spec_id`](LgiSpec::spec_id) order without materializing the family.
pub fn enumerate_lgis(m: usize) -> Result<LgiEnumerator, LgiError> {
    if !(1..=MAX_DETECTORS).contains(&m) {
        return Err(LgiError::UnsupportedSize { m });
    }
    let n_subsets = (1usize << m) - 1;
    Ok(LgiEnumerator {
        m,
        n_subsets,
        next_id: 1,
        end: 3u64.pow(n_subsets as u32),
        table: AssignmentTable::new(m),
    })
}

/// Total number of sign-canonical inequalities over `m` detectors.
pub fn lgi_family_size(m: usize) -> Result<u64, LgiError> {
    if !(1..=MAX_DETECTORS).contains(&m) {
        return Err(LgiError::UnsupportedSize { m });
    }
    Ok((3u64.pow(((1usize << m) - 1) as u32) - 1) / 2)
}

pub struct LgiEnumerator {
    m: usize,
    n_subsets: usize,
    next_id: u64,
    end: u64,
    table: AssignmentTable,
}

impl Iterator for LgiEnumerator {
    type Item = LgiSpec;

    fn next(&mut self) -> Option<LgiSpec> {
        while self.next_id < self.end {
            let id = self.next_id;
            self.next_id += 1;

            let mut coeffs = [0i8; 15];
            let mut x = id;
            for c in coeffs.iter_mut().take(self.n_subsets) {
                *c = (x % 3) as i8 - 1;
                x /= 3;
            }
            // Keep the representative whose first nonzero coefficient is +1.
            let first = coeffs[..self.n_subsets].iter().find(|&&c| c != 0);
            if !matches!(first, Some(&1)) {
                continue;
            }
            let (lower, upper) = self.table.bounds(&coeffs, self.n_subsets);
            return Some(LgiSpec {
                m: self.m as u8,
                n_subsets: self.n_subsets as u8,
                coeffs,
                lower,
                upper,
            });
        }
        None
    }
}
