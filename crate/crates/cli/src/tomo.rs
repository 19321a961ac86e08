//! Tomography driver: counts CSV in, density-matrix JSON with a metrics
//! block out.

use crate::formats::{density_to_json, parse_tomography_csv};
use crate::CliError;
use lgsim_core::tomography::{concurrence, mle_reconstruct, purity, TomoError, DEFAULT_TOLERANCE};
use serde_json::json;
use std::io::Write;
use std::path::Path;

pub fn run_tomography(
    counts_path: &Path,
    pairs_per_setting: f64,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let text = std::fs::read_to_string(counts_path)
        .map_err(|e| CliError::config(format!("cannot read counts file {counts_path:?}: {e}")))?;
    let (settings, counts) = parse_tomography_csv(&text)?;
    if settings.is_empty() {
        return Err(CliError::config("counts file holds no data rows"));
    }
    let run =
        mle_reconstruct(&settings, &counts, pairs_per_setting, DEFAULT_TOLERANCE).map_err(|e| {
            match e {
                TomoError::InsufficientSettings => {
                    CliError::config(format!("tomography input: {e}"))
                }
                TomoError::NonConvergence { .. } => CliError::numerical(format!("tomography: {e}")),
            }
        })?;
    let report = json!({
        "rho": density_to_json(&run.result),
        "metrics": {
            "concurrence": concurrence(&run.result),
            "purity": purity(&run.result),
            "log_likelihood": run.log_likelihood,
            "iterations": run.iterations,
            "settings": run.settings.len(),
        },
    });
    writeln!(out, "{}", serde_json::to_string_pretty(&report).unwrap()).map_err(CliError::io)
}
