//! Scenario configuration: the JSON schema, the built-in presets, and
//! resolution into states, meters, and detector chains.

use crate::formats::parse_density_json;
use crate::CliError;
use lgsim_core::lgi::DetectorChain;
use lgsim_core::meter::{MeterOutcome, SemiWeakMeter};
use lgsim_core::qstate::{ideal_state, IdealState, TwoQubitState};
use serde::Deserialize;
use serde_json::Value;

pub const COVERSLIP_RH: f64 = 0.0390;
pub const COVERSLIP_RV: f64 = 0.175;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_state")]
    pub state: StateConfig,
    #[serde(default = "default_meter")]
    pub meter: MeterConfig,
    #[serde(default)]
    pub meter2: Option<MeterConfig>,
    #[serde(default)]
    pub chain: ChainKind,
    #[serde(default)]
    pub theta_grid: ThetaGrid,
    #[serde(default)]
    pub mode: ModeConfig,
    #[serde(default)]
    pub specs: Vec<Value>,
}

fn default_state() -> StateConfig {
    StateConfig::Named(NamedState::PsiDoublePrime)
}

fn default_meter() -> MeterConfig {
    MeterConfig {
        r_h: COVERSLIP_RH,
        r_v: COVERSLIP_RV,
        dr_h: None,
        dr_v: None,
        negate_values: false,
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum StateConfig {
    Named(NamedState),
    File { file: String },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedState {
    Psi,
    PsiDoublePrime,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeterConfig {
    pub r_h: f64,
    pub r_v: f64,
    /// Calibration uncertainties; propagated into the reported contextual
    /// values only, never into the simulation itself.
    #[serde(default)]
    pub dr_h: Option<f64>,
    #[serde(default)]
    pub dr_v: Option<f64>,
    #[serde(default)]
    pub negate_values: bool,
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ChainKind {
    #[default]
    Fig1,
    SingleParty,
    TwoMeters,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for ThetaGrid {
    fn default() -> Self {
        // One-degree resolution over one period of the rotated observable.
        Self {
            start: 0.0,
            stop: 179.0,
            step: 1.0,
        }
    }
}

impl ThetaGrid {
    pub fn points(&self) -> Result<Vec<f64>, CliError> {
        if !self.step.is_finite() || self.step <= 0.0 {
            return Err(CliError::config("theta_grid.step must be positive"));
        }
        if !self.start.is_finite() || !self.stop.is_finite() || self.stop < self.start {
            return Err(CliError::config("theta_grid range is empty or not finite"));
        }
        let n = ((self.stop - self.start) / self.step).floor() as usize + 1;
        Ok((0..n).map(|k| self.start + k as f64 * self.step).collect())
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum ModeConfig {
    #[default]
    Analytic,
    Sampled {
        pairs: f64,
        seed: u64,
    },
}

/// A fully resolved scenario: state loaded, meters built, grid expanded.
pub struct Scenario {
    pub state: TwoQubitState,
    pub meter: SemiWeakMeter,
    pub meter2: Option<SemiWeakMeter>,
    pub chain_kind: ChainKind,
    pub thetas: Vec<f64>,
    pub mode: ModeConfig,
    pub spec_values: Vec<Value>,
}

impl Scenario {
    pub fn resolve(config: &ScenarioConfig) -> Result<Self, CliError> {
        let state = match &config.state {
            StateConfig::Named(NamedState::Psi) => ideal_state(IdealState::Psi),
            StateConfig::Named(NamedState::PsiDoublePrime) => {
                ideal_state(IdealState::PsiDoublePrime)
            }
            StateConfig::File { file } => {
                let text = std::fs::read_to_string(file).map_err(|e| {
                    CliError::config(format!("cannot read state file {file:?}: {e}"))
                })?;
                parse_density_json(&text)?
            }
        };
        let meter = build_meter(&config.meter)?;
        let meter2 = config.meter2.as_ref().map(build_meter).transpose()?;
        if config.chain == ChainKind::TwoMeters && meter2.is_none() {
            return Err(CliError::config(
                "two_meters chain requires a \"meter2\" entry",
            ));
        }
        let thetas = config.theta_grid.points()?;
        if let ModeConfig::Sampled { pairs, .. } = config.mode {
            if !pairs.is_finite() || pairs <= 0.0 {
                return Err(CliError::config("sampled mode requires pairs > 0"));
            }
        }
        Ok(Self {
            state,
            meter,
            meter2,
            chain_kind: config.chain,
            thetas,
            mode: config.mode,
            spec_values: config.specs.clone(),
        })
    }

    /// Build the detector chain for one grid angle.
    pub fn chain_at(&self, theta: f64) -> DetectorChain {
        match self.chain_kind {
            ChainKind::Fig1 => DetectorChain::fig1(self.meter, theta),
            ChainKind::SingleParty => DetectorChain::single_party(self.meter, theta),
            ChainKind::TwoMeters => DetectorChain::two_meters(
                self.meter,
                self.meter2.expect("validated at resolution"),
                theta,
            ),
        }
    }
}

fn build_meter(config: &MeterConfig) -> Result<SemiWeakMeter, CliError> {
    let meter = SemiWeakMeter::from_reflectivities(config.r_h, config.r_v)
        .map_err(|e| CliError::config(format!("meter: {e}")))?;
    if config.dr_h.is_some() || config.dr_v.is_some() {
        let (d_r, d_t) = meter
            .contextual_value_uncertainty(config.dr_h.unwrap_or(0.0), config.dr_v.unwrap_or(0.0));
        eprintln!(
            "meter ({}, {}): cv_r = {:.4} +- {:.4}, cv_t = {:.4} +- {:.4}",
            config.r_h,
            config.r_v,
            meter.contextual_value(MeterOutcome::Reflected),
            d_r,
            meter.contextual_value(MeterOutcome::Transmitted),
            d_t
        );
    }
    Ok(if config.negate_values {
        meter.negated()
    } else {
        meter
    })
}

/// Built-in scenario presets matching the observable choices of the three
/// measured figures: the meter plus `sigma_theta` on the metered arm and
/// `sigma_z` on the other.
pub fn preset(name: &str) -> Result<ScenarioConfig, CliError> {
    let text = match name {
        // Averages and conditioned averages of the meter observable.
        "fig3" => {
            r#"{ "state": "psi_double_prime",
                       "meter": {"r_h": 0.0390, "r_v": 0.175},
                       "specs": [] }"#
        }
        // Negated-observable three-term inequality against its convex sum.
        "fig4" => {
            r#"{ "state": "psi_double_prime",
                       "meter": {"r_h": 0.0390, "r_v": 0.175, "negate_values": true},
                       "specs": [ {"A1": 1, "A1B1B2": 1, "B1B2": -1} ] }"#
        }
        // The two pair-correlation inequalities that trade violation
        // regions across the sweep.
        "fig5" => {
            r#"{ "state": "psi_double_prime",
                       "meter": {"r_h": 0.0390, "r_v": 0.175},
                       "specs": [ {"A1B2": 1,  "B1B2": 1, "A1B1": -1},
                                  {"A1B2": -1, "B1B2": 1, "A1B1": 1} ] }"#
        }
        other => {
            return Err(CliError::config(format!(
                "unknown preset {other:?}; available: fig3 fig4 fig5"
            )))
        }
    };
    parse_config(text)
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::config(format!("scenario: {e}")))
}
