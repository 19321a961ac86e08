//! Simulation toolkit for two-party Leggett-Garg experiments with a
//! semi-weak polarization measurement.
//!
//! The library models a pair of polarization qubits sent through a chain of
//! detectors: a two-outcome semi-weak meter (a lossless polarization-dependent
//! beamsplitter described by Kraus operators, a POVM, and contextual values)
//! followed by projective polarizers on each arm. From one detector chain it
//! can
//!
//! * evaluate exact joint outcome probabilities and all `2^M - 1`
//!   correlation functions ([`lgi`]),
//! * enumerate every generalized Leggett-Garg inequality with coefficients
//!   in `{-1, 0, +1}` over those correlations and bound each one by brute
//!   force over deterministic macrorealist assignments ([`lgi`]),
//! * compute conditioned averages (weak-value-like quantities) and the
//!   convex-sum constraint they obey ([`lgi`]),
//! * simulate Poissonian coincidence counting with seeded, reproducible
//!   random number generation and estimate correlations with delta-method
//!   error bars ([`simulate`]),
//! * run the classical macrorealist detector model, including ambiguous
//!   and invasive detectors, as a falsification oracle ([`simulate`]),
//! * reconstruct a two-qubit density matrix from counts by maximum
//!   likelihood and compute concurrence and purity ([`tomography`]).
//!
//! The crate is `no_std`-compatible (with `alloc`); all transcendental math
//! goes through `libm` so results are identical with and without `std`.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod lgi;
pub mod linalg;
pub mod meter;
pub mod qstate;
pub mod simulate;
pub mod tomography;

pub use lgi::{DetectorChain, LgiSpec};
pub use meter::SemiWeakMeter;
pub use qstate::{Party, PureState, QubitOperator, TwoQubitOperator, TwoQubitState};

pub(crate) mod fmath {
    //! Float math routed through libm so std and no_std builds agree bitwise.

    pub fn sqrt(x: f64) -> f64 {
        libm::sqrt(x)
    }

    pub fn sin(x: f64) -> f64 {
        libm::sin(x)
    }

    pub fn cos(x: f64) -> f64 {
        libm::cos(x)
    }

    pub fn ln(x: f64) -> f64 {
        libm::log(x)
    }

    pub fn abs(x: f64) -> f64 {
        libm::fabs(x)
    }

    pub fn hypot(x: f64, y: f64) -> f64 {
        libm::hypot(x, y)
    }

    pub fn to_radians(deg: f64) -> f64 {
        deg * (core::f64::consts::PI / 180.0)
    }
}
