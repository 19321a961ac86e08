//! Independent oracles shared by the integration and acceptance suites.
//!
//! Everything here recomputes library quantities through a *different*
//! route: joint probabilities from per-party composed operators instead of
//! sequential state updates, correlations from effective Heisenberg-picture
//! observables instead of outcome sums, and macrorealist bounds from a
//! direct product enumerator instead of the parity table.

#![allow(dead_code)]

use lgsim_core::lgi::{canonical_subsets, DetectorChain, DetectorKind};
use lgsim_core::meter::{MeterOutcome, SemiWeakMeter};
use lgsim_core::qstate::{tensor, Party, QubitOperator, TwoQubitOperator, TwoQubitState};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const COVERSLIP_RH: f64 = 0.0390;
pub const COVERSLIP_RV: f64 = 0.175;

pub fn coverslip_meter() -> SemiWeakMeter {
    SemiWeakMeter::from_reflectivities(COVERSLIP_RH, COVERSLIP_RV).unwrap()
}

/// Random full-rank density operator (Ginibre construction).
pub fn random_state(rng: &mut ChaCha8Rng) -> TwoQubitState {
    let mut g = [[Complex64::new(0.0, 0.0); 4]; 4];
    for row in &mut g {
        for e in row.iter_mut() {
            *e = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    let g = TwoQubitOperator::new(g);
    let p = g * g.adjoint();
    let tr = p.trace().re;
    TwoQubitState::from_matrix(p.scale(1.0 / tr)).unwrap()
}

/// Random pure two-qubit density operator.
pub fn random_pure_state(rng: &mut ChaCha8Rng) -> TwoQubitState {
    let mut amps = [Complex64::new(0.0, 0.0); 4];
    let mut norm = 0.0;
    for a in &mut amps {
        *a = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        norm += a.norm_sqr();
    }
    let norm = norm.sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    lgsim_core::qstate::PureState::two_qubit(amps)
        .unwrap()
        .density_matrix()
        .unwrap()
}

/// Joint outcome probability via per-party composed operators:
/// `tr[(K1^dag K1 (x) K2^dag K2) rho]` with `K_p` the time-ordered product
/// of the party's Kraus/projector factors. No sequential state updates.
pub fn direct_trace_probability(chain: &DetectorChain, rho: &TwoQubitState, tuple: usize) -> f64 {
    let mut k1 = QubitOperator::identity();
    let mut k2 = QubitOperator::identity();
    for (i, det) in chain.detectors().iter().enumerate() {
        let second = (tuple >> i) & 1 == 1;
        let factor = match &det.kind {
            DetectorKind::SemiWeak(m) => *m.kraus(if second {
                MeterOutcome::Transmitted
            } else {
                MeterOutcome::Reflected
            }),
            DetectorKind::Projective(obs) => {
                let (plus, minus) = obs.dichotomic_projectors();
                if second {
                    minus
                } else {
                    plus
                }
            }
        };
        match det.party {
            Party::One => k1 = factor * k1,
            Party::Two => k2 = factor * k2,
        }
    }
    let effective = tensor(&(k1.adjoint() * k1), &(k2.adjoint() * k2));
    effective.expectation(rho.matrix()).re
}

/// Non-selective Heisenberg map of the meter: `X -> sum_o M_o X M_o`.
fn nonselective_map(meter: &SemiWeakMeter, x: &QubitOperator) -> QubitOperator {
    let mr = *meter.kraus(MeterOutcome::Reflected);
    let mt = *meter.kraus(MeterOutcome::Transmitted);
    mr * *x * mr + mt * *x * mt
}

/// Contextual-value-weighted Heisenberg map: `X -> sum_o cv_o M_o X M_o`.
fn weighted_map(meter: &SemiWeakMeter, x: &QubitOperator) -> QubitOperator {
    let mr = *meter.kraus(MeterOutcome::Reflected);
    let mt = *meter.kraus(MeterOutcome::Transmitted);
    (mr * *x * mr).scale(meter.contextual_value(MeterOutcome::Reflected))
        + (mt * *x * mt).scale(meter.contextual_value(MeterOutcome::Transmitted))
}

/// Closed-form correlation functions of the meter + two-polarizer chain,
/// computed from effective observables rather than outcome sums:
///
/// ```text
/// <A1>     = tr[(sz (x) I) rho]        <A1B1>   = tr[(D(st) (x) I) rho]
/// <B1>     = tr[(N(st) (x) I) rho]     <A1B2>   = tr[(sz (x) sz) rho]
/// <B2>     = tr[(I (x) sz) rho]        <B1B2>   = tr[(N(st) (x) sz) rho]
/// <A1B1B2> = tr[(D(st) (x) sz) rho]
/// ```
///
/// Returned in canonical subset order.
pub fn closed_form_correlations(
    meter: &SemiWeakMeter,
    theta_deg: f64,
    rho: &TwoQubitState,
) -> [f64; 7] {
    let id = QubitOperator::identity();
    let sz = QubitOperator::sigma_z();
    let st = lgsim_core::qstate::stokes_theta(theta_deg);
    let n_st = nonselective_map(meter, &st);
    let d_st = weighted_map(meter, &st);
    let expect = |a: &QubitOperator, b: &QubitOperator| tensor(a, b).expectation(rho.matrix()).re;
    [
        expect(&sz, &id),   // A1
        expect(&n_st, &id), // B1
        expect(&id, &sz),   // B2
        expect(&d_st, &id), // A1B1
        expect(&sz, &sz),   // A1B2
        expect(&n_st, &sz), // B1B2
        expect(&d_st, &sz), // A1B1B2
    ]
}

/// Closed-form conditioned average of the meter value on the fig-1 chain:
/// `tr[(D(P_b1) (x) P_b2) rho] / tr[(N(P_b1) (x) P_b2) rho]`.
pub fn closed_form_conditioned_average(
    meter: &SemiWeakMeter,
    theta_deg: f64,
    rho: &TwoQubitState,
    b1: usize,
    b2: usize,
) -> f64 {
    let st = lgsim_core::qstate::stokes_theta(theta_deg);
    let (p1_plus, p1_minus) = st.dichotomic_projectors();
    let p1 = if b1 == 0 { p1_plus } else { p1_minus };
    let p2 = if b2 == 0 {
        QubitOperator::projector_h()
    } else {
        QubitOperator::projector_v()
    };
    let num = tensor(&weighted_map(meter, &p1), &p2)
        .expectation(rho.matrix())
        .re;
    let den = tensor(&nonselective_map(meter, &p1), &p2)
        .expectation(rho.matrix())
        .re;
    num / den
}

/// Generalized weak value of `sigma_z` on party 1 post-selected on the two
/// polarizer outcomes: `Re tr[(P1 (x) P2)(sz (x) I) rho] / tr[(P1 (x) P2) rho]`.
/// Returns the value and the post-selection probability.
pub fn weak_value_sigma_z(theta_deg: f64, rho: &TwoQubitState, b1: usize, b2: usize) -> (f64, f64) {
    let st = lgsim_core::qstate::stokes_theta(theta_deg);
    let (p1_plus, p1_minus) = st.dichotomic_projectors();
    let p1 = if b1 == 0 { p1_plus } else { p1_minus };
    let p2 = if b2 == 0 {
        QubitOperator::projector_h()
    } else {
        QubitOperator::projector_v()
    };
    let proj = tensor(&p1, &p2);
    let zkron = tensor(&QubitOperator::sigma_z(), &QubitOperator::identity());
    let num = (proj * zkron).expectation(rho.matrix()).re;
    let den = proj.expectation(rho.matrix()).re;
    (num / den, den)
}

/// Second, independently coded macrorealist bound enumerator: walks every
/// assignment vector explicitly and multiplies subset values one detector at
/// a time.
pub fn assignment_enumerator_bounds(m: usize, coeffs: &[i8]) -> (i32, i32) {
    let subsets: Vec<Vec<usize>> = canonical_subsets(m)
        .into_iter()
        .map(|mask| (0..m).filter(|i| mask & (1 << i) != 0).collect())
        .collect();
    assert_eq!(coeffs.len(), subsets.len());
    let mut lower = i32::MAX;
    let mut upper = i32::MIN;
    let mut assignment = vec![1i32; m];
    for code in 0..(1u32 << m) {
        for (i, a) in assignment.iter_mut().enumerate() {
            *a = if code & (1 << i) != 0 { -1 } else { 1 };
        }
        let mut value = 0i32;
        for (c, subset) in coeffs.iter().zip(subsets.iter()) {
            if *c == 0 {
                continue;
            }
            let mut prod = 1i32;
            for &i in subset {
                prod *= assignment[i];
            }
            value += *c as i32 * prod;
        }
        lower = lower.min(value);
        upper = upper.max(value);
    }
    (lower, upper)
}

/// Deterministic RNG for test data.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
