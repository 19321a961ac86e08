//! File formats: density-matrix JSON, inequality JSON, count-table CSV, and
//! the fixed-precision float formatting shared by all CSV output.

use crate::CliError;
use lgsim_core::lgi::{canonical_subsets, DetectorChain, LgiSpec};
use lgsim_core::qstate::{QubitOperator, TwoQubitOperator, TwoQubitState, HERMITICITY_WARN};
use lgsim_core::simulate::CountTable;
use num_complex::Complex64;
use serde_json::{json, Map, Value};

/// 17 significant digits: enough to round-trip any f64, so golden-file
/// comparisons are meaningful.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Parse a density matrix from its JSON form: a 4x4 row-major array of
/// `[re, im]` pairs in the `{hh, hv, vh, vv}` basis (metered qubit first),
/// either bare or wrapped as `{"rho": ...}`.
pub fn parse_density_json(text: &str) -> Result<TwoQubitState, CliError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| CliError::config(format!("state JSON: {e}")))?;
    let rows = match &value {
        Value::Object(map) => map
            .get("rho")
            .ok_or_else(|| CliError::config("state JSON object lacks a \"rho\" field"))?,
        other => other,
    };
    let rows = rows
        .as_array()
        .ok_or_else(|| CliError::config("state JSON must be a 4x4 array"))?;
    if rows.len() != 4 {
        return Err(CliError::config(format!(
            "state JSON has {} rows, expected 4",
            rows.len()
        )));
    }
    let mut entries = [[Complex64::new(0.0, 0.0); 4]; 4];
    for (i, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .filter(|r| r.len() == 4)
            .ok_or_else(|| CliError::config(format!("state JSON row {i} is not length 4")))?;
        for (j, cell) in row.iter().enumerate() {
            let pair = cell.as_array().filter(|p| p.len() == 2).ok_or_else(|| {
                CliError::config(format!(
                    "state JSON entry ({i},{j}) is not an [re, im] pair"
                ))
            })?;
            let re = pair[0]
                .as_f64()
                .ok_or_else(|| CliError::config(format!("entry ({i},{j}): re is not a number")))?;
            let im = pair[1]
                .as_f64()
                .ok_or_else(|| CliError::config(format!("entry ({i},{j}): im is not a number")))?;
            entries[i][j] = Complex64::new(re, im);
        }
    }
    let state = TwoQubitState::from_matrix(TwoQubitOperator::new(entries))
        .map_err(|e| CliError::config(format!("state matrix invalid: {e}")))?;
    if state.hermiticity_correction() > HERMITICITY_WARN {
        eprintln!(
            "warning: state matrix symmetrized; hermiticity defect was {:.3e}",
            state.hermiticity_correction()
        );
    }
    Ok(state)
}

/// Density matrix as the JSON array format accepted by [`parse_density_json`].
pub fn density_to_json(rho: &TwoQubitState) -> Value {
    let rows: Vec<Value> = (0..4)
        .map(|i| {
            (0..4)
                .map(|j| {
                    let z = rho.entry(i, j);
                    json!([z.re, z.im])
                })
                .collect()
        })
        .collect();
    Value::Array(rows)
}

/// Parse one inequality from a JSON object mapping subset labels to
/// coefficients, e.g. `{"A1": 1, "A1B1B2": 1, "B1B2": -1}`, optionally
/// wrapped as `{"coeffs": {...}}`. Bounds are always recomputed.
pub fn parse_spec_json(value: &Value, chain: &DetectorChain) -> Result<LgiSpec, CliError> {
    let map = match value {
        Value::Object(map) if map.contains_key("coeffs") => map
            .get("coeffs")
            .and_then(Value::as_object)
            .ok_or_else(|| CliError::config("spec \"coeffs\" must be an object"))?,
        Value::Object(map) => map,
        _ => return Err(CliError::config("spec must be a JSON object")),
    };
    let mut entries = Vec::new();
    for (label, coeff) in map {
        let mask = chain
            .subset_mask_for_label(label)
            .ok_or_else(|| CliError::config(format!("unknown subset label {label:?}")))?;
        let c = coeff
            .as_i64()
            .filter(|c| (-1..=1).contains(c))
            .ok_or_else(|| {
                CliError::config(format!("coefficient of {label:?} must be -1, 0, or 1"))
            })?;
        entries.push((mask, c as i8));
    }
    LgiSpec::from_subset_coeffs(chain.len(), &entries)
        .map_err(|e| CliError::config(format!("invalid spec: {e}")))
}

/// Inequality as JSON: subset-label coefficient map plus the exact bounds.
pub fn spec_to_json(spec: &LgiSpec, chain: &DetectorChain) -> Value {
    let mut coeffs = Map::new();
    for (&c, &mask) in spec
        .coeffs()
        .iter()
        .zip(canonical_subsets(spec.detector_count()).iter())
    {
        if c != 0 {
            coeffs.insert(chain.subset_label(mask), json!(c));
        }
    }
    json!({
        "coeffs": Value::Object(coeffs),
        "lower": spec.lower_bound(),
        "upper": spec.upper_bound(),
    })
}

/// Count table as CSV: a comment header carrying the provenance, then one
/// `outcome_tuple,count` row per bin.
pub fn counts_to_csv(table: &CountTable) -> String {
    let mut out = format!(
        "# seed={} pairs_expected={}\noutcome_tuple,count\n",
        table.seed, table.pairs_expected
    );
    for (label, count) in table.labels.iter().zip(table.counts.iter()) {
        out.push_str(&format!("{label},{count}\n"));
    }
    out
}

/// Analyzer-state projector for a tomography setting label character.
pub fn analyzer_projector(label: char) -> Result<QubitOperator, CliError> {
    let sqrt_half = (0.5_f64).sqrt();
    let state = match label.to_ascii_uppercase() {
        'H' => return Ok(QubitOperator::projector_h()),
        'V' => return Ok(QubitOperator::projector_v()),
        'D' => [
            Complex64::new(sqrt_half, 0.0),
            Complex64::new(sqrt_half, 0.0),
        ],
        'A' => [
            Complex64::new(sqrt_half, 0.0),
            Complex64::new(-sqrt_half, 0.0),
        ],
        'R' => [
            Complex64::new(sqrt_half, 0.0),
            Complex64::new(0.0, sqrt_half),
        ],
        'L' => [
            Complex64::new(sqrt_half, 0.0),
            Complex64::new(0.0, -sqrt_half),
        ],
        other => {
            return Err(CliError::config(format!(
                "unknown analyzer state {other:?}; expected one of H V D A R L"
            )))
        }
    };
    Ok(lgsim_core::qstate::PureState::qubit(state[0], state[1])
        .expect("analyzer states are normalized")
        .projector_qubit())
}

/// Projector-pair settings and the counts that go with them.
pub type TomographyData = (Vec<(QubitOperator, QubitOperator)>, Vec<f64>);

/// Parse tomography counts CSV: `setting_label,count` rows where the label
/// is one analyzer character per arm, e.g. `DH`. Comment and header lines
/// are skipped.
pub fn parse_tomography_csv(text: &str) -> Result<TomographyData, CliError> {
    let mut settings = Vec::new();
    let mut counts = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("setting") {
            continue;
        }
        let (label, count) = line.split_once(',').ok_or_else(|| {
            CliError::config(format!("line {}: expected setting_label,count", lineno + 1))
        })?;
        let label: Vec<char> = label.trim().chars().collect();
        if label.len() != 2 {
            return Err(CliError::config(format!(
                "line {}: setting label must be two analyzer characters",
                lineno + 1
            )));
        }
        let count: f64 = count
            .trim()
            .parse()
            .map_err(|e| CliError::config(format!("line {}: bad count ({e})", lineno + 1)))?;
        if !count.is_finite() || count < 0.0 {
            return Err(CliError::config(format!(
                "line {}: count must be finite and nonnegative",
                lineno + 1
            )));
        }
        settings.push((analyzer_projector(label[0])?, analyzer_projector(label[1])?));
        counts.push(count);
    }
    Ok((settings, counts))
}
