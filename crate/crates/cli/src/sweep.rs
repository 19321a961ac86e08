//! The theta sweep: one CSV row per grid angle carrying every correlation,
//! the conditioned averages, the convex-sum constraint, and the configured
//! inequality values. Analytic rows are exact; sampled rows are plug-in
//! estimates with delta-method errors and z-scores.

use crate::formats::{counts_to_csv, fmt_f64, parse_spec_json};
use crate::scenario::{ChainKind, ModeConfig, Scenario};
use crate::CliError;
use lgsim_core::lgi::{DetectorChain, LgiSpec};
use lgsim_core::simulate::{
    estimate_correlations, evaluate_lgi_statistical, sample_counts, CountTable,
};
use std::io::Write;

pub fn run_sweep(
    scenario: &Scenario,
    out: &mut dyn Write,
    mut counts_out: Option<&mut dyn Write>,
) -> Result<(), CliError> {
    // Specs are resolved against the chain shape once; theta only rotates
    // the analyzer, not the labels.
    let template = scenario.chain_at(0.0);
    let specs: Vec<LgiSpec> = scenario
        .spec_values
        .iter()
        .map(|v| parse_spec_json(v, &template))
        .collect::<Result<_, _>>()?;
    let sampled = matches!(scenario.mode, ModeConfig::Sampled { .. });

    write_header(&template, scenario.chain_kind, sampled, &specs, out)?;

    for (index, &theta) in scenario.thetas.iter().enumerate() {
        let chain = scenario.chain_at(theta);
        let mut row: Vec<String> = vec![fmt_f64(theta)];
        match scenario.mode {
            ModeConfig::Analytic => {
                let corr = chain.correlation_vector(&scenario.state);
                for &v in corr.values() {
                    row.push(fmt_f64(v));
                }
                push_conditioned_columns(&chain, scenario, None, &mut row);
                for spec in &specs {
                    let eval = spec.evaluate(&corr).map_err(CliError::numerical_from)?;
                    row.push(fmt_f64(eval.value));
                    row.push(spec.lower_bound().to_string());
                    row.push(spec.upper_bound().to_string());
                    row.push(u8::from(eval.violated_upper || eval.violated_lower).to_string());
                }
            }
            ModeConfig::Sampled { pairs, seed } => {
                // Per-point seeds keep parallel or partial sweeps reproducible.
                let table = sample_counts(&chain, &scenario.state, pairs, seed + index as u64);
                let est =
                    estimate_correlations(&table, &chain).map_err(CliError::numerical_from)?;
                for (v, se) in est.correlations.values().iter().zip(est.std_errors.iter()) {
                    row.push(fmt_f64(*v));
                    row.push(fmt_f64(*se));
                }
                push_conditioned_columns(&chain, scenario, Some(&table), &mut row);
                for spec in &specs {
                    let stat = evaluate_lgi_statistical(&table, chain.outcome_values(), spec)
                        .map_err(CliError::numerical_from)?;
                    row.push(fmt_f64(stat.value));
                    row.push(fmt_f64(stat.std_error));
                    row.push(fmt_f64(stat.z_upper));
                    row.push(fmt_f64(stat.z_lower));
                    row.push(spec.lower_bound().to_string());
                    row.push(spec.upper_bound().to_string());
                }
                if let Some(w) = counts_out.as_deref_mut() {
                    writeln!(w, "# theta={theta}").map_err(CliError::io)?;
                    w.write_all(counts_to_csv(&table).as_bytes())
                        .map_err(CliError::io)?;
                }
            }
        }
        writeln!(out, "{}", row.join(",")).map_err(CliError::io)?;
    }
    Ok(())
}

fn write_header(
    template: &DetectorChain,
    kind: ChainKind,
    sampled: bool,
    specs: &[LgiSpec],
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let mut cols = vec![String::from("theta_deg")];
    for &mask in template.subset_masks() {
        let label = template.subset_label(mask);
        cols.push(format!("corr_{label}"));
        if sampled {
            cols.push(format!("se_{label}"));
        }
    }
    match kind {
        ChainKind::Fig1 => {
            cols.extend(
                ["ca_p", "ca_m", "ca_pp", "ca_pm", "ca_mp", "ca_mm"]
                    .iter()
                    .map(|s| s.to_string()),
            );
            cols.extend(
                ["eq2_lhs", "eq2_p_plus", "eq2_p_minus"]
                    .iter()
                    .map(|s| s.to_string()),
            );
        }
        ChainKind::SingleParty => {
            cols.extend(["ca_p", "ca_m"].iter().map(|s| s.to_string()));
        }
        ChainKind::TwoMeters => {}
    }
    for k in 0..specs.len() {
        if sampled {
            cols.push(format!("spec{k}_value"));
            cols.push(format!("spec{k}_se"));
            cols.push(format!("spec{k}_z_upper"));
            cols.push(format!("spec{k}_z_lower"));
            cols.push(format!("spec{k}_lower"));
            cols.push(format!("spec{k}_upper"));
        } else {
            cols.push(format!("spec{k}_value"));
            cols.push(format!("spec{k}_lower"));
            cols.push(format!("spec{k}_upper"));
            cols.push(format!("spec{k}_violated"));
        }
    }
    writeln!(out, "{}", cols.join(",")).map_err(CliError::io)
}

/// Conditioned-average and convex-sum columns. Analytic when `table` is
/// `None`, plug-in estimates from the counts otherwise. Conditions that are
/// never realized print as `nan`.
fn push_conditioned_columns(
    chain: &DetectorChain,
    scenario: &Scenario,
    table: Option<&CountTable>,
    row: &mut Vec<String>,
) {
    let conditions: &[&[(usize, usize)]] = match scenario.chain_kind {
        ChainKind::Fig1 => &[
            &[(1, 0)],
            &[(1, 1)],
            &[(1, 0), (2, 0)],
            &[(1, 0), (2, 1)],
            &[(1, 1), (2, 0)],
            &[(1, 1), (2, 1)],
        ],
        ChainKind::SingleParty => &[&[(1, 0)], &[(1, 1)]],
        ChainKind::TwoMeters => &[],
    };
    for condition in conditions {
        let ca = match table {
            None => chain
                .conditioned_average(&scenario.state, condition)
                .unwrap_or(f64::NAN),
            Some(t) => sampled_conditioned_average(t, chain, condition),
        };
        row.push(fmt_f64(ca));
    }
    if scenario.chain_kind == ChainKind::Fig1 {
        let (lhs, p_plus, p_minus) = match table {
            None => match chain.convex_sum_constraint(&scenario.state) {
                Ok(check) => (check.lhs, check.p_plus, check.p_minus),
                Err(_) => (f64::NAN, f64::NAN, f64::NAN),
            },
            Some(t) => sampled_convex_sum(t, chain),
        };
        row.push(fmt_f64(lhs));
        row.push(fmt_f64(p_plus));
        row.push(fmt_f64(p_minus));
    }
}

fn tuple_matches(tuple: usize, condition: &[(usize, usize)]) -> bool {
    condition.iter().all(|&(d, o)| (tuple >> d) & 1 == o)
}

/// Plug-in conditioned average of the meter value from sampled counts.
fn sampled_conditioned_average(
    table: &CountTable,
    chain: &DetectorChain,
    condition: &[(usize, usize)],
) -> f64 {
    let values = chain.outcome_values();
    let mut num = 0.0;
    let mut den = 0.0;
    for (tuple, &count) in table.counts.iter().enumerate() {
        if count == 0 || !tuple_matches(tuple, condition) {
            continue;
        }
        num += count as f64 * values[0][tuple & 1];
        den += count as f64;
    }
    if den == 0.0 {
        f64::NAN
    } else {
        num / den
    }
}

fn sampled_convex_sum(table: &CountTable, chain: &DetectorChain) -> (f64, f64, f64) {
    let n_pp: u64 = table
        .counts
        .iter()
        .enumerate()
        .filter(|(t, _)| tuple_matches(*t, &[(1, 0), (2, 0)]))
        .map(|(_, &c)| c)
        .sum();
    let n_mm: u64 = table
        .counts
        .iter()
        .enumerate()
        .filter(|(t, _)| tuple_matches(*t, &[(1, 1), (2, 1)]))
        .map(|(_, &c)| c)
        .sum();
    let total = (n_pp + n_mm) as f64;
    if total == 0.0 {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let p_plus = n_pp as f64 / total;
    let p_minus = n_mm as f64 / total;
    let ca_pp = sampled_conditioned_average(table, chain, &[(1, 0), (2, 0)]);
    let ca_mm = sampled_conditioned_average(table, chain, &[(1, 1), (2, 1)]);
    let lhs = match (n_pp, n_mm) {
        (0, _) => ca_mm * p_minus,
        (_, 0) => ca_pp * p_plus,
        _ => ca_pp * p_plus + ca_mm * p_minus,
    };
    (lhs, p_plus, p_minus)
}
