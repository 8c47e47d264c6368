//! Deterministic report rendering: wide CSV, long CSV, and a console
//! summary. All numbers go through Rust's shortest-roundtrip float
//! formatting, so identical results always serialize to identical bytes.

use super::CaseResult;
use std::io::{self, Write};

/// Column schema of the wide CSV, one row per case.
pub const CSV_HEADER: &str = "case_name,discipline,lambda,service_family,service_mean,\
vacation_family,vacation_mean,analytic_peak,analytic_avg,bound_lb,bound_ub,\
sim_peak,sim_peak_se,sim_avg,sim_avg_se,rel_err_peak,rel_err_avg,status";

fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn fmt_opt_str(v: Option<&str>) -> &str {
    v.unwrap_or("")
}

/// Writes the wide CSV: header plus one row per result, in order.
pub fn emit_csv<W: Write>(results: &[CaseResult], mut w: W) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in results {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.name,
            r.discipline.label(),
            fmt_f64(r.lambda),
            r.service_family,
            fmt_f64(r.service_mean),
            fmt_opt_str(r.vacation_family),
            fmt_opt(r.vacation_mean),
            fmt_opt(r.analytic_peak),
            fmt_opt(r.analytic_avg),
            fmt_opt(r.bound_lb),
            fmt_opt(r.bound_ub),
            fmt_opt(r.sim_peak),
            fmt_opt(r.sim_peak_se),
            fmt_opt(r.sim_avg),
            fmt_opt(r.sim_avg_se),
            fmt_opt(r.rel_err_peak),
            fmt_opt(r.rel_err_avg),
            r.status.token(),
        )?;
    }
    Ok(())
}

/// Writes the long-format CSV (`case_name,metric,source,value`), one row
/// per present value — convenient for plotting tools.
pub fn emit_long_csv<W: Write>(results: &[CaseResult], mut w: W) -> io::Result<()> {
    writeln!(w, "case_name,metric,source,value")?;
    for r in results {
        let rows: [(&str, &str, Option<f64>); 8] = [
            ("peak_age", "analytic", r.analytic_peak),
            ("peak_age", "simulated", r.sim_peak),
            ("peak_age", "sim_stderr", r.sim_peak_se),
            ("avg_age", "analytic", r.analytic_avg),
            ("avg_age", "bound_lower", r.bound_lb),
            ("avg_age", "bound_upper", r.bound_ub),
            ("avg_age", "simulated", r.sim_avg),
            ("avg_age", "sim_stderr", r.sim_avg_se),
        ];
        for (metric, source, value) in rows {
            if let Some(v) = value {
                writeln!(w, "{},{metric},{source},{}", r.name, fmt_f64(v))?;
            }
        }
    }
    Ok(())
}

/// Console summary: one line per non-ok case (failures first in result
/// order), then a one-line tally.
pub fn emit_summary(results: &[CaseResult]) -> String {
    let mut out = String::new();
    let mut ok = 0usize;
    let mut tolerance = 0usize;
    let mut failed = 0usize;
    for r in results {
        use super::CaseStatus::*;
        match &r.status {
            Ok => ok += 1,
            ToleranceExceeded => {
                tolerance += 1;
                let detail = match (r.rel_err_peak, r.rel_err_avg) {
                    (Some(p), Some(a)) => format!("rel_err peak={p:.3e} avg={a:.3e}"),
                    (Some(p), None) => format!("rel_err peak={p:.3e}"),
                    (None, Some(a)) => format!("rel_err avg={a:.3e}"),
                    (None, None) => "no comparable metrics".to_string(),
                };
                out.push_str(&format!(
                    "FAIL {} [{}]: tolerance_exceeded ({detail})\n",
                    r.name,
                    r.discipline.label()
                ));
            }
            Failed(tok) => {
                failed += 1;
                out.push_str(&format!(
                    "FAIL {} [{}]: {tok}\n",
                    r.name,
                    r.discipline.label()
                ));
            }
        }
    }
    out.push_str(&format!(
        "{} cases: {ok} ok, {tolerance} tolerance_exceeded, {failed} failed\n",
        results.len()
    ));
    out
}
