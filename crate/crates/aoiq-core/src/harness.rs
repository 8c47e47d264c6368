//! Experiment harness: evaluates analytic and simulated ages side by side
//! for a list of configured cases and renders deterministic reports.
//!
//! Configurations are TOML documents with three sections:
//!
//! ```toml
//! [defaults]                 # optional run-wide settings
//! total_slots = 1000000
//! warmup_slots = 10000
//! seed = 1729
//! tolerance_rel = 0.01
//!
//! [[case]]                   # one fully specified system
//! name = "fcfs_geo"
//! discipline = "fcfs"        # fcfs | fcfs_vacation | lcfs | gg_inf
//! lambda = 0.3
//! service = { family = "geometric", p = 0.75 }
//!
//! [[sweep]]                  # a family of cases varying one knob
//! name = "vac_geo"
//! discipline = "fcfs_vacation"
//! lambda = 0.3
//! service = { family = "geometric", p = 0.75 }
//! vary = "vacation_mean"
//! vacation_family = "geometric"
//! vacation_means = [1, 2, 3]
//! ```
//!
//! Every case gets its own deterministic seed derived from the run seed and
//! the case index, so re-running a config reproduces the report
//! byte for byte while cases stay statistically independent.

pub mod config;
pub mod report;

pub use config::{
    derive_seed, parse_config, ConfigError, ExperimentConfig, OutputSet, ResolvedCase,
};
pub use report::{emit_csv, emit_long_csv, emit_summary};

use crate::analytic::{self, AnalyticError, Discipline};
use crate::sim::{self, SimConfig, SimError};
use rayon::prelude::*;

/// Final status of one case.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CaseStatus {
    /// Every metric with both an analytic and a simulated value agreed
    /// within `max(tolerance_rel · |analytic|, 3 · stderr)`.
    Ok,
    /// At least one compared metric disagreed beyond that allowance.
    ToleranceExceeded,
    /// Evaluation or simulation failed; the token names the cause.
    Failed(String),
}

impl CaseStatus {
    /// Stable single-token rendering for the CSV `status` column.
    pub fn token(&self) -> &str {
        match self {
            CaseStatus::Ok => "ok",
            CaseStatus::ToleranceExceeded => "tolerance_exceeded",
            CaseStatus::Failed(tok) => tok,
        }
    }

    pub fn is_ok(&self) -> bool {
        matches!(self, CaseStatus::Ok)
    }
}

/// One row of the experiment report. `None` fields render as empty CSV
/// cells; the bound columns are informational and never affect `status`.
#[derive(Debug, Clone)]
pub struct CaseResult {
    pub name: String,
    pub discipline: Discipline,
    /// Long-run arrival rate: `λ`, or `1/E[X]` for renewal arrivals.
    pub lambda: f64,
    pub service_family: &'static str,
    pub service_mean: f64,
    pub vacation_family: Option<&'static str>,
    pub vacation_mean: Option<f64>,
    pub analytic_peak: Option<f64>,
    pub analytic_avg: Option<f64>,
    pub bound_lb: Option<f64>,
    pub bound_ub: Option<f64>,
    pub sim_peak: Option<f64>,
    pub sim_peak_se: Option<f64>,
    pub sim_avg: Option<f64>,
    pub sim_avg_se: Option<f64>,
    pub rel_err_peak: Option<f64>,
    pub rel_err_avg: Option<f64>,
    pub status: CaseStatus,
}

fn analytic_error_token(e: &AnalyticError) -> &'static str {
    match e {
        AnalyticError::Unstable { .. } => "unstable",
        AnalyticError::ArrivalRateZero => "arrival_rate_zero",
        AnalyticError::AllPacketsPreempted => "all_packets_preempted",
        AnalyticError::FixedPointDidNotConverge { .. } => "fixed_point_diverged",
        _ => "invalid_spec",
    }
}

fn sim_error_token(e: &SimError) -> &'static str {
    match e {
        SimError::Unstable { .. } => "unstable",
        SimError::NoUsefulDeliveries => "no_useful_deliveries",
        SimError::TotalSlotsTooSmall(_)
        | SimError::WarmupTooLong { .. }
        | SimError::TraceTooShort { .. } => "bad_sim_window",
        SimError::Spec(e) => analytic_error_token(e),
    }
}

/// `|analytic − simulated| ≤ max(tol · |analytic|, 3 · stderr)`; a `NaN`
/// stderr (too few batch samples) falls back to the relative allowance.
fn within_tolerance(analytic: f64, simulated: f64, stderr: f64, tol: f64) -> bool {
    let allowance = (tol * analytic.abs()).max(3.0 * stderr);
    (analytic - simulated).abs() <= allowance
}

/// Evaluates one case: the requested analytic quantities, then the
/// simulation (skipped when the analytic evaluation already failed, since
/// the spec is faulty either way), then the comparison verdict.
pub fn run_case(case: &ResolvedCase) -> CaseResult {
    let spec = &case.spec;
    let mut out = CaseResult {
        name: case.name.clone(),
        discipline: spec.discipline,
        lambda: spec.arrival_rate(),
        service_family: spec.service.family_label(),
        service_mean: spec.service.mean(),
        vacation_family: spec.vacation.as_ref().map(|v| v.family_label()),
        vacation_mean: spec.vacation.as_ref().map(|v| v.mean()),
        analytic_peak: None,
        analytic_avg: None,
        bound_lb: None,
        bound_ub: None,
        sim_peak: None,
        sim_peak_se: None,
        sim_avg: None,
        sim_avg_se: None,
        rel_err_peak: None,
        rel_err_avg: None,
        status: CaseStatus::Ok,
    };

    let mut failure: Option<String> = None;
    if case.outputs.analytic || case.outputs.bounds {
        match analytic::evaluate(spec) {
            Ok(a) => {
                if case.outputs.analytic {
                    out.analytic_peak = a.peak_age;
                    out.analytic_avg = a.avg_age;
                }
                if case.outputs.bounds {
                    out.bound_lb = a.avg_age_lower;
                    out.bound_ub = a.avg_age_upper;
                }
            }
            Err(e) => failure = Some(analytic_error_token(&e).to_string()),
        }
    }

    if case.outputs.simulated && failure.is_none() {
        let cfg = SimConfig::new(spec.clone(), case.total_slots, case.warmup_slots, case.seed);
        match sim::run_simulation(&cfg) {
            Ok(run) => {
                let est = run.estimate;
                out.sim_peak = Some(est.peak_age);
                out.sim_peak_se = Some(est.peak_stderr);
                out.sim_avg = Some(est.avg_age);
                out.sim_avg_se = Some(est.avg_stderr);
            }
            Err(e) => failure = Some(sim_error_token(&e).to_string()),
        }
    }

    if let (Some(a), Some(s)) = (out.analytic_peak, out.sim_peak) {
        out.rel_err_peak = Some((a - s).abs() / a.abs());
    }
    if let (Some(a), Some(s)) = (out.analytic_avg, out.sim_avg) {
        out.rel_err_avg = Some((a - s).abs() / a.abs());
    }

    out.status = if let Some(tok) = failure {
        CaseStatus::Failed(tok)
    } else {
        let peak_ok = match (out.analytic_peak, out.sim_peak, out.sim_peak_se) {
            (Some(a), Some(s), Some(se)) => within_tolerance(a, s, se, case.tolerance_rel),
            _ => true,
        };
        let avg_ok = match (out.analytic_avg, out.sim_avg, out.sim_avg_se) {
            (Some(a), Some(s), Some(se)) => within_tolerance(a, s, se, case.tolerance_rel),
            _ => true,
        };
        if peak_ok && avg_ok {
            CaseStatus::Ok
        } else {
            CaseStatus::ToleranceExceeded
        }
    };
    out
}

/// Runs every case (in parallel) and returns results in configuration
/// order, independent of scheduling.
pub fn run_experiments(cfg: &ExperimentConfig) -> Vec<CaseResult> {
    cfg.cases.par_iter().map(run_case).collect()
}

/// True when every case ended [`CaseStatus::Ok`].
pub fn all_ok(results: &[CaseResult]) -> bool {
    results.iter().all(|r| r.status.is_ok())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMOKE: &str = r#"
        [defaults]
        total_slots = 40000
        warmup_slots = 2000
        seed = 11
        tolerance_rel = 0.05

        [[case]]
        name = "fcfs_unit"
        discipline = "fcfs"
        lambda = 0.5
        service = { family = "deterministic", value = 1 }

        [[case]]
        name = "lcfs_geo"
        discipline = "lcfs"
        lambda = 0.5
        service = { family = "geometric", p = 0.5 }

        [[case]]
        name = "gginf_det"
        discipline = "gg_inf"
        interarrival = { family = "geometric", p = 0.5 }
        service = { family = "deterministic", value = 2 }

        [[case]]
        name = "vac_det2"
        discipline = "fcfs_vacation"
        lambda = 0.3
        service = { family = "geometric", p = 0.75 }
        vacation = { family = "deterministic", value = 2 }
    "#;

    #[test]
    fn smoke_config_runs_green() {
        let cfg = parse_config(SMOKE, None).unwrap();
        assert_eq!(cfg.cases.len(), 4);
        let results = run_experiments(&cfg);
        for r in &results {
            assert!(
                r.status.is_ok(),
                "{} ended {:?} (peak {:?} vs {:?}, avg {:?} vs {:?})",
                r.name,
                r.status,
                r.analytic_peak,
                r.sim_peak,
                r.analytic_avg,
                r.sim_avg
            );
        }
        // Vacation case carries bounds but no analytic average.
        let vac = &results[3];
        assert!(vac.bound_lb.is_some() && vac.bound_ub.is_some());
        assert!(vac.analytic_avg.is_none() && vac.sim_avg.is_some());
        assert!(vac.rel_err_avg.is_none());
        // G/G/∞ has no analytic peak.
        let gg = &results[2];
        assert!(gg.analytic_peak.is_none() && gg.analytic_avg.is_some());
    }

    #[test]
    fn unstable_case_reports_token_without_simulating() {
        let text = r#"
            [[case]]
            name = "hot"
            discipline = "fcfs"
            lambda = 0.9
            service = { family = "geometric", p = 0.75 }
        "#;
        let cfg = parse_config(text, None).unwrap();
        let r = &run_experiments(&cfg)[0];
        assert_eq!(r.status, CaseStatus::Failed("unstable".into()));
        assert!(r.sim_peak.is_none() && r.analytic_peak.is_none());
        assert_eq!(r.status.token(), "unstable");
    }

    #[test]
    fn preempted_lcfs_case_reports_token() {
        let text = r#"
            [[case]]
            name = "never"
            discipline = "lcfs"
            interarrival = { family = "deterministic", value = 2 }
            service = { family = "deterministic", value = 3 }
        "#;
        let cfg = parse_config(text, None).unwrap();
        let r = &run_experiments(&cfg)[0];
        assert_eq!(r.status.token(), "all_packets_preempted");
    }

    #[test]
    fn results_are_deterministic_across_runs() {
        let cfg = parse_config(SMOKE, None).unwrap();
        let a = run_experiments(&cfg);
        let b = run_experiments(&cfg);
        let mut csv_a = Vec::new();
        let mut csv_b = Vec::new();
        emit_csv(&a, &mut csv_a).unwrap();
        emit_csv(&b, &mut csv_b).unwrap();
        assert_eq!(csv_a, csv_b);
    }

    #[test]
    fn seed_override_changes_derived_streams() {
        let cfg1 = parse_config(SMOKE, None).unwrap();
        let cfg2 = parse_config(SMOKE, Some(999)).unwrap();
        assert_ne!(cfg1.cases[0].seed, cfg2.cases[0].seed);
    }
}
