//! The semi-weak polarization meter: a lossless polarization-dependent
//! beamsplitter with calibrated reflectivities `R_h` and `R_v`.
//!
//! The two output ports define Kraus operators
//! `M_r = sqrt(R_h) P_h + sqrt(R_v) P_v` and
//! `M_t = sqrt(T_h) P_h + sqrt(T_v) P_v` with `T_i = 1 - R_i`, and POVM
//! elements `E_o = M_o^dag M_o`. Contextual values
//! `cv_r = (T_h + T_v)/(R_h - R_v)` and `cv_t = -(R_h + R_v)/(R_h - R_v)`
//! are the unique port values satisfying
//! `cv_r E_r + cv_t E_t = sigma_z`, so the value-weighted port statistics
//! reproduce the `sigma_z` average of the incoming state for every state.
//!
//! The meter always measures `sigma_z` of party 1; other observables are
//! reached by rotating the state, not the meter.

use crate::fmath;
use crate::qstate::{embed, Party, QubitOperator, TwoQubitOperator, TwoQubitState};
use core::fmt;

/// Reflectivity difference below which the contextual values diverge and the
/// meter carries no `sigma_z` information.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// The two output ports of the meter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeterOutcome {
    Reflected,
    Transmitted,
}

impl MeterOutcome {
    pub const BOTH: [MeterOutcome; 2] = [MeterOutcome::Reflected, MeterOutcome::Transmitted];

    pub fn label(self) -> &'static str {
        match self {
            MeterOutcome::Reflected => "r",
            MeterOutcome::Transmitted => "t",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeterError {
    /// `R_h` or `R_v` outside `[0, 1]`.
    ReflectivityOutOfRange { r_h: f64, r_v: f64 },
    /// `|R_h - R_v|` below [`DEGENERACY_TOL`]: `sigma_z` is not in the span
    /// of the POVM and the contextual values diverge.
    DegenerateMeter { r_h: f64, r_v: f64 },
}

impl fmt::Display for MeterError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeterError::ReflectivityOutOfRange { r_h, r_v } => {
                write!(f, "reflectivities ({r_h}, {r_v}) must lie in [0, 1]")
            }
            MeterError::DegenerateMeter { r_h, r_v } => write!(
                f,
                "reflectivities ({r_h}, {r_v}) coincide; the meter is uninformative"
            ),
        }
    }
}

impl core::error::Error for MeterError {}

/// A fully calibrated semi-weak meter on party 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiWeakMeter {
    r_h: f64,
    r_v: f64,
    kraus_r: QubitOperator,
    kraus_t: QubitOperator,
    povm_r: QubitOperator,
    povm_t: QubitOperator,
    cv_r: f64,
    cv_t: f64,
}

impl SemiWeakMeter {
    /// Build the meter from calibrated port reflectivities.
    pub fn from_reflectivities(r_h: f64, r_v: f64) -> Result<Self, MeterError> {
        if !(0.0..=1.0).contains(&r_h) || !(0.0..=1.0).contains(&r_v) {
            return Err(MeterError::ReflectivityOutOfRange { r_h, r_v });
        }
        let diff = r_h - r_v;
        if fmath::abs(diff) <= DEGENERACY_TOL {
            return Err(MeterError::DegenerateMeter { r_h, r_v });
        }
        let t_h = 1.0 - r_h;
        let t_v = 1.0 - r_v;
        let p_h = QubitOperator::projector_h();
        let p_v = QubitOperator::projector_v();
        let kraus_r = p_h.scale(fmath::sqrt(r_h)) + p_v.scale(fmath::sqrt(r_v));
        let kraus_t = p_h.scale(fmath::sqrt(t_h)) + p_v.scale(fmath::sqrt(t_v));
        Ok(Self {
            r_h,
            r_v,
            kraus_r,
            kraus_t,
            povm_r: kraus_r.adjoint() * kraus_r,
            povm_t: kraus_t.adjoint() * kraus_t,
            cv_r: (t_h + t_v) / diff,
            cv_t: -(r_h + r_v) / diff,
        })
    }

    /// Same physical device with the port values negated, so the calibration
    /// target becomes `-sigma_z`. Kraus operators and POVM are unchanged.
    pub fn negated(&self) -> Self {
        Self {
            cv_r: -self.cv_r,
            cv_t: -self.cv_t,
            ..*self
        }
    }

    pub fn r_h(&self) -> f64 {
        self.r_h
    }

    pub fn r_v(&self) -> f64 {
        self.r_v
    }

    pub fn kraus(&self, outcome: MeterOutcome) -> &QubitOperator {
        match outcome {
            MeterOutcome::Reflected => &self.kraus_r,
            MeterOutcome::Transmitted => &self.kraus_t,
        }
    }

    pub fn povm(&self, outcome: MeterOutcome) -> &QubitOperator {
        match outcome {
            MeterOutcome::Reflected => &self.povm_r,
            MeterOutcome::Transmitted => &self.povm_t,
        }
    }

    /// Contextual value assigned to a port.
    pub fn contextual_value(&self, outcome: MeterOutcome) -> f64 {
        match outcome {
            MeterOutcome::Reflected => self.cv_r,
            MeterOutcome::Transmitted => self.cv_t,
        }
    }

    /// Propagate reflectivity calibration uncertainties into the contextual
    /// values (first order, independent errors). Returns `(d_cv_r, d_cv_t)`.
    pub fn contextual_value_uncertainty(&self, dr_h: f64, dr_v: f64) -> (f64, f64) {
        let w = self.r_h - self.r_v;
        let w2 = w * w;
        let u = 2.0 - self.r_h - self.r_v; // T_h + T_v
        let s = self.r_h + self.r_v;
        // cv_r = u/w, cv_t = -s/w.
        let dcr_dh = (-w - u) / w2;
        let dcr_dv = (w + u) / w2;
        let dct_dh = (s - w) / w2;
        let dct_dv = -(w + s) / w2;
        let d_r = fmath::hypot(dcr_dh * dr_h, dcr_dv * dr_v);
        let d_t = fmath::hypot(dct_dh * dr_h, dct_dv * dr_v);
        (d_r, d_t)
    }

    /// Apply one port's back-action to the pair state on the given party.
    ///
    /// Returns the unnormalized post-measurement operator
    /// `(M (x) I) rho (M (x) I)^dag` and the outcome probability (its trace).
    pub fn apply_on_party(
        &self,
        rho: &TwoQubitState,
        party: Party,
        outcome: MeterOutcome,
    ) -> (TwoQubitOperator, f64) {
        let k = embed(self.kraus(outcome), party);
        let post = k * *rho.matrix() * k.adjoint();
        let prob = post.trace().re;
        (post, prob)
    }
}

/// Back-action of the party-1 meter: unnormalized post-state and probability.
pub fn apply_meter(
    meter: &SemiWeakMeter,
    rho: &TwoQubitState,
    outcome: MeterOutcome,
) -> (TwoQubitOperator, f64) {
    meter.apply_on_party(rho, Party::One, outcome)
}
