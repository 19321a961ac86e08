//! The full-family scan: at each grid angle, stream every enumerated
//! inequality against the chain's correlations and report the violated ones,
//! plus a per-angle total. The enumerator is lazy, so even the 7.17-million
//! four-detector family runs in constant memory.

use crate::formats::fmt_f64;
use crate::scenario::{ModeConfig, Scenario};
use crate::CliError;
use lgsim_core::lgi::{enumerate_lgis, DetectorChain};
use lgsim_core::simulate::{estimate_correlations, evaluate_lgi_statistical, sample_counts};
use std::io::Write;

/// Sampled-mode violation threshold in standard errors.
const Z_THRESHOLD: f64 = 5.0;

pub fn scan_all(scenario: &Scenario, m: usize, out: &mut dyn Write) -> Result<(), CliError> {
    if !(2..=4).contains(&m) {
        return Err(CliError::config(format!(
            "--scan-m {m} unsupported; the detector chains here have 2 to 4 detectors"
        )));
    }
    let sampled = matches!(scenario.mode, ModeConfig::Sampled { .. });
    if sampled {
        writeln!(
            out,
            "theta_deg,spec_id,value,lower,upper,violated,std_error,z_upper,z_lower"
        )
        .map_err(CliError::io)?;
    } else {
        writeln!(out, "theta_deg,spec_id,value,lower,upper,violated").map_err(CliError::io)?;
    }

    for (index, &theta) in scenario.thetas.iter().enumerate() {
        let chain = chain_for_scan(scenario, m, theta)?;
        let mut violated_count = 0u64;
        match scenario.mode {
            ModeConfig::Analytic => {
                let corr = chain.correlation_vector(&scenario.state);
                for spec in enumerate_lgis(m).map_err(CliError::numerical_from)? {
                    let eval = spec.evaluate(&corr).map_err(CliError::numerical_from)?;
                    if eval.violated_upper || eval.violated_lower {
                        violated_count += 1;
                        writeln!(
                            out,
                            "{},{},{},{},{},1",
                            fmt_f64(theta),
                            spec.spec_id(),
                            fmt_f64(eval.value),
                            spec.lower_bound(),
                            spec.upper_bound()
                        )
                        .map_err(CliError::io)?;
                    }
                }
            }
            ModeConfig::Sampled { pairs, seed } => {
                let table = sample_counts(&chain, &scenario.state, pairs, seed + index as u64);
                estimate_correlations(&table, &chain).map_err(CliError::numerical_from)?;
                for spec in enumerate_lgis(m).map_err(CliError::numerical_from)? {
                    let stat = evaluate_lgi_statistical(&table, chain.outcome_values(), &spec)
                        .map_err(CliError::numerical_from)?;
                    if stat.z_upper > Z_THRESHOLD || stat.z_lower > Z_THRESHOLD {
                        violated_count += 1;
                        writeln!(
                            out,
                            "{},{},{},{},{},1,{},{},{}",
                            fmt_f64(theta),
                            spec.spec_id(),
                            fmt_f64(stat.value),
                            spec.lower_bound(),
                            spec.upper_bound(),
                            fmt_f64(stat.std_error),
                            fmt_f64(stat.z_upper),
                            fmt_f64(stat.z_lower)
                        )
                        .map_err(CliError::io)?;
                    }
                }
            }
        }
        // Per-angle tally, in-band so downstream tools see one table.
        if sampled {
            writeln!(out, "{},total,{violated_count},,,,,,", fmt_f64(theta))
                .map_err(CliError::io)?;
        } else {
            writeln!(out, "{},total,{violated_count},,,", fmt_f64(theta)).map_err(CliError::io)?;
        }
    }
    Ok(())
}

fn chain_for_scan(scenario: &Scenario, m: usize, theta: f64) -> Result<DetectorChain, CliError> {
    Ok(match m {
        2 => DetectorChain::single_party(scenario.meter, theta),
        3 => DetectorChain::fig1(scenario.meter, theta),
        4 => {
            let meter2 = scenario.meter2.ok_or_else(|| {
                CliError::config("--scan-m 4 requires a \"meter2\" entry in the scenario")
            })?;
            DetectorChain::two_meters(scenario.meter, meter2, theta)
        }
        _ => unreachable!("validated by caller"),
    })
}
