use std::io::Write;

use super::SweepResult;
use crate::error::Result;

pub const SWEEP_CSV_COLUMNS: [&str; 12] = [
    "n",
    "lambda",
    "lambda_over_lambda_c",
    "mean_r_inf",
    "ci_lo",
    "ci_hi",
    "exceed_prob",
    "exceed_lo",
    "exceed_hi",
    "p_no_spread",
    "analytic_no_spread",
    "bound_eq34",
];

/// One row per grid point. Two `#` header lines carry the config hash and
/// the resolved config as JSON.
pub fn write_sweep_csv<W: Write>(result: &SweepResult, mut out: W) -> Result<()> {
    writeln!(out, "# config_hash: {}", result.provenance.config_hash)?;
    writeln!(out, "# config: {}", serde_json::to_string(&result.provenance.config)?)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_CSV_COLUMNS)?;
    for r in &result.rows {
        w.write_record([
            r.n.to_string(),
            r.lambda.to_string(),
            r.lambda_over_lambda_c.to_string(),
            r.mean_r_inf.value.to_string(),
            r.mean_r_inf.lo.to_string(),
            r.mean_r_inf.hi.to_string(),
            r.exceed_probability.value.to_string(),
            r.exceed_probability.lo.to_string(),
            r.exceed_probability.hi.to_string(),
            r.p_no_spread.value.to_string(),
            r.references.no_spread_finite_n.to_string(),
            r.references.subcritical_bound.map(|b| b.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep_json<W: Write>(result: &SweepResult, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, result)?;
    writeln!(out)?;
    Ok(())
}
