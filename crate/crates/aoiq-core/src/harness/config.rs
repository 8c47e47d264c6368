//! TOML experiment configuration: parsing, validation, and sweep expansion.

use crate::analytic::{ArrivalSpec, Discipline, QueueSpec};
use crate::dist::{DiscreteDist, DistError};
use serde::Deserialize;
use thiserror::Error;

pub const DEFAULT_TOTAL_SLOTS: u64 = 1_000_000;
pub const DEFAULT_WARMUP_SLOTS: u64 = 10_000;
pub const DEFAULT_SEED: u64 = 1729;
pub const DEFAULT_TOLERANCE_REL: f64 = 0.01;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config is not valid TOML: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("case {name:?}: {msg}")]
    Case { name: String, msg: String },
    #[error("case {name:?}: bad distribution: {source}")]
    CaseDist { name: String, source: DistError },
    #[error("duplicate case name {0:?}")]
    DuplicateName(String),
    #[error("config defines no cases")]
    Empty,
}

/// Distribution spec as written in TOML, e.g.
/// `{ family = "geometric", p = 0.5 }` or
/// `{ family = "explicit", pmf = [[1, 0.5], [3, 0.5]] }`.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum RawDist {
    Deterministic { value: u64 },
    Geometric { p: f64 },
    Uniform { low: u64, high: u64 },
    Explicit { pmf: Vec<(u64, f64)> },
}

impl RawDist {
    fn build(&self) -> Result<DiscreteDist, DistError> {
        match self {
            RawDist::Deterministic { value } => DiscreteDist::deterministic(*value),
            RawDist::Geometric { p } => DiscreteDist::geometric(*p),
            RawDist::Uniform { low, high } => DiscreteDist::uniform(*low, *high),
            RawDist::Explicit { pmf } => DiscreteDist::explicit(pmf),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawDiscipline {
    Fcfs,
    FcfsVacation,
    Lcfs,
    LcfsPreemptive,
    GgInf,
    GgInfinity,
}

impl RawDiscipline {
    fn resolve(self) -> Discipline {
        match self {
            RawDiscipline::Fcfs => Discipline::FcfsBerG1,
            RawDiscipline::FcfsVacation => Discipline::FcfsBerG1Vacation,
            RawDiscipline::Lcfs | RawDiscipline::LcfsPreemptive => Discipline::LcfsGg1Preemptive,
            RawDiscipline::GgInf | RawDiscipline::GgInfinity => Discipline::GgInfinity,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawOutput {
    Analytic,
    Simulated,
    Bounds,
}

/// Family used when a sweep generates vacation distributions from target
/// means: `deterministic` mean `v` is a point mass at `v`, `geometric`
/// uses success probability `1/v`, and `uniform` spans `1..=2v−1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VacationFamily {
    Deterministic,
    Geometric,
    Uniform,
}

/// Builds the vacation distribution of a given family with mean `mean`.
pub fn vacation_from_mean(family: VacationFamily, mean: u64) -> Result<DiscreteDist, DistError> {
    if mean == 0 {
        return Err(DistError::DeterministicValue(0));
    }
    match family {
        VacationFamily::Deterministic => DiscreteDist::deterministic(mean),
        VacationFamily::Geometric => DiscreteDist::geometric(1.0 / mean as f64),
        VacationFamily::Uniform => DiscreteDist::uniform(1, 2 * mean - 1),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum SweepVary {
    VacationMean,
    Lambda,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawDefaults {
    total_slots: Option<u64>,
    warmup_slots: Option<u64>,
    seed: Option<u64>,
    tolerance_rel: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCase {
    name: String,
    discipline: RawDiscipline,
    lambda: Option<f64>,
    interarrival: Option<RawDist>,
    service: RawDist,
    vacation: Option<RawDist>,
    total_slots: Option<u64>,
    warmup_slots: Option<u64>,
    seed: Option<u64>,
    tolerance_rel: Option<f64>,
    outputs: Option<Vec<RawOutput>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    name: String,
    discipline: RawDiscipline,
    vary: SweepVary,
    lambda: Option<f64>,
    lambdas: Option<Vec<f64>>,
    interarrival: Option<RawDist>,
    service: RawDist,
    vacation: Option<RawDist>,
    vacation_family: Option<VacationFamily>,
    vacation_means: Option<Vec<u64>>,
    total_slots: Option<u64>,
    warmup_slots: Option<u64>,
    seed: Option<u64>,
    tolerance_rel: Option<f64>,
    outputs: Option<Vec<RawOutput>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    defaults: RawDefaults,
    #[serde(default, rename = "case")]
    cases: Vec<RawCase>,
    #[serde(default, rename = "sweep")]
    sweeps: Vec<RawSweep>,
}

/// Which report columns a case fills in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutputSet {
    pub analytic: bool,
    pub simulated: bool,
    pub bounds: bool,
}

impl OutputSet {
    /// Default per discipline: analytic + simulated everywhere, plus the
    /// average-age bounds for the vacation queue (its exact average has no
    /// closed form).
    fn default_for(discipline: Discipline) -> Self {
        OutputSet {
            analytic: true,
            simulated: true,
            bounds: discipline == Discipline::FcfsBerG1Vacation,
        }
    }

    fn from_raw(raw: &[RawOutput]) -> Self {
        OutputSet {
            analytic: raw.contains(&RawOutput::Analytic),
            simulated: raw.contains(&RawOutput::Simulated),
            bounds: raw.contains(&RawOutput::Bounds),
        }
    }
}

/// One fully resolved case, ready to run.
#[derive(Debug, Clone)]
pub struct ResolvedCase {
    pub name: String,
    pub spec: QueueSpec,
    pub total_slots: u64,
    pub warmup_slots: u64,
    pub seed: u64,
    pub tolerance_rel: f64,
    pub outputs: OutputSet,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub cases: Vec<ResolvedCase>,
}

/// SplitMix64 step keyed by run seed and case index; spreads one run seed
/// into well-separated per-case generator seeds.
pub fn derive_seed(run_seed: u64, case_index: u64) -> u64 {
    let mut z = run_seed.wrapping_add(
        case_index
            .wrapping_add(1)
            .wrapping_mul(0x9E37_79B9_7F4A_7C15),
    );
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn case_err(name: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Case {
        name: name.to_string(),
        msg: msg.into(),
    }
}

fn check_name(name: &str) -> Result<(), ConfigError> {
    let ok = !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.' | '/'));
    if ok {
        Ok(())
    } else {
        Err(case_err(
            name,
            "names must be non-empty ASCII [A-Za-z0-9_./-]",
        ))
    }
}

fn build_dist(name: &str, raw: &RawDist) -> Result<DiscreteDist, ConfigError> {
    raw.build().map_err(|source| ConfigError::CaseDist {
        name: name.to_string(),
        source,
    })
}

/// Arrival spec from the mutually exclusive `lambda` / `interarrival`
/// fields. FCFS disciplines accept only `lambda` (the analysis needs
/// Bernoulli arrivals); the other two accept either.
fn build_arrival(
    name: &str,
    discipline: Discipline,
    lambda: Option<f64>,
    interarrival: &Option<RawDist>,
) -> Result<ArrivalSpec, ConfigError> {
    let fcfs = matches!(
        discipline,
        Discipline::FcfsBerG1 | Discipline::FcfsBerG1Vacation
    );
    match (lambda, interarrival) {
        (Some(_), Some(_)) => Err(case_err(
            name,
            "set either `lambda` or `interarrival`, not both",
        )),
        (None, None) => Err(case_err(name, "set `lambda` or `interarrival`")),
        (Some(l), None) => Ok(ArrivalSpec::Bernoulli(l)),
        (None, Some(raw)) => {
            if fcfs {
                Err(case_err(
                    name,
                    "this discipline requires Bernoulli arrivals; set `lambda`",
                ))
            } else {
                Ok(ArrivalSpec::Renewal(build_dist(name, raw)?))
            }
        }
    }
}

struct Partial {
    name: String,
    spec: QueueSpec,
    total_slots: u64,
    warmup_slots: u64,
    seed: Option<u64>,
    tolerance_rel: f64,
    outputs: OutputSet,
}

fn resolve_case(raw: &RawCase, d: &RawDefaults) -> Result<Partial, ConfigError> {
    check_name(&raw.name)?;
    let discipline = raw.discipline.resolve();
    let arrival = build_arrival(&raw.name, discipline, raw.lambda, &raw.interarrival)?;
    let service = build_dist(&raw.name, &raw.service)?;
    let wants_vacation = discipline == Discipline::FcfsBerG1Vacation;
    let vacation = match (&raw.vacation, wants_vacation) {
        (Some(v), true) => Some(build_dist(&raw.name, v)?),
        (None, true) => return Err(case_err(&raw.name, "missing `vacation` distribution")),
        (Some(_), false) => {
            return Err(case_err(
                &raw.name,
                "`vacation` is only valid for fcfs_vacation",
            ))
        }
        (None, false) => None,
    };
    let spec = QueueSpec {
        discipline,
        arrival,
        service,
        vacation,
    };
    spec.validate()
        .map_err(|e| case_err(&raw.name, e.to_string()))?;
    Ok(Partial {
        name: raw.name.clone(),
        spec,
        total_slots: raw
            .total_slots
            .or(d.total_slots)
            .unwrap_or(DEFAULT_TOTAL_SLOTS),
        warmup_slots: raw
            .warmup_slots
            .or(d.warmup_slots)
            .unwrap_or(DEFAULT_WARMUP_SLOTS),
        seed: raw.seed,
        tolerance_rel: raw
            .tolerance_rel
            .or(d.tolerance_rel)
            .unwrap_or(DEFAULT_TOLERANCE_REL),
        outputs: raw
            .outputs
            .as_deref()
            .map(OutputSet::from_raw)
            .unwrap_or_else(|| OutputSet::default_for(discipline)),
    })
}

/// Expands a sweep into one [`RawCase`] per grid point. Expanded names are
/// `"{sweep}/mean{v}"` or `"{sweep}/lambda{v}"`.
fn expand_sweep(raw: &RawSweep) -> Result<Vec<RawCase>, ConfigError> {
    check_name(&raw.name)?;
    let base = RawCase {
        name: String::new(),
        discipline: raw.discipline,
        lambda: raw.lambda,
        interarrival: raw.interarrival.clone(),
        service: raw.service.clone(),
        vacation: raw.vacation.clone(),
        total_slots: raw.total_slots,
        warmup_slots: raw.warmup_slots,
        seed: raw.seed,
        tolerance_rel: raw.tolerance_rel,
        outputs: raw.outputs.clone(),
    };
    match raw.vary {
        SweepVary::VacationMean => {
            if raw.discipline.resolve() != Discipline::FcfsBerG1Vacation {
                return Err(case_err(
                    &raw.name,
                    "vary = \"vacation_mean\" requires discipline fcfs_vacation",
                ));
            }
            if raw.vacation.is_some() {
                return Err(case_err(
                    &raw.name,
                    "vary = \"vacation_mean\" replaces `vacation`; remove it",
                ));
            }
            if raw.lambdas.is_some() {
                return Err(case_err(
                    &raw.name,
                    "`lambdas` only belongs to a lambda sweep",
                ));
            }
            let family = raw.vacation_family.ok_or_else(|| {
                case_err(
                    &raw.name,
                    "vary = \"vacation_mean\" needs `vacation_family`",
                )
            })?;
            let means = raw
                .vacation_means
                .as_deref()
                .filter(|m| !m.is_empty())
                .ok_or_else(|| {
                    case_err(
                        &raw.name,
                        "vary = \"vacation_mean\" needs non-empty `vacation_means`",
                    )
                })?;
            means
                .iter()
                .map(|&v| {
                    let dist =
                        vacation_from_mean(family, v).map_err(|source| ConfigError::CaseDist {
                            name: format!("{}/mean{v}", raw.name),
                            source,
                        })?;
                    let mut c = base.clone();
                    c.name = format!("{}/mean{v}", raw.name);
                    // Rebuild as an explicit raw dist so resolve_case owns
                    // all construction paths uniformly.
                    c.vacation = Some(raw_from_dist(&dist, family, v));
                    Ok(c)
                })
                .collect()
        }
        SweepVary::Lambda => {
            if raw.lambda.is_some() {
                return Err(case_err(
                    &raw.name,
                    "vary = \"lambda\" replaces `lambda`; use `lambdas`",
                ));
            }
            if raw.vacation_family.is_some() || raw.vacation_means.is_some() {
                return Err(case_err(
                    &raw.name,
                    "`vacation_family`/`vacation_means` only belong to a vacation_mean sweep",
                ));
            }
            if raw.interarrival.is_some() {
                return Err(case_err(
                    &raw.name,
                    "vary = \"lambda\" sweeps Bernoulli rates; remove `interarrival`",
                ));
            }
            let lambdas = raw
                .lambdas
                .as_deref()
                .filter(|l| !l.is_empty())
                .ok_or_else(|| {
                    case_err(&raw.name, "vary = \"lambda\" needs non-empty `lambdas`")
                })?;
            Ok(lambdas
                .iter()
                .map(|&l| {
                    let mut c = base.clone();
                    c.name = format!("{}/lambda{l}", raw.name);
                    c.lambda = Some(l);
                    c
                })
                .collect())
        }
    }
}

/// Re-expresses a generated vacation distribution in `RawDist` form so the
/// expanded case validates through the same path as a hand-written one.
fn raw_from_dist(dist: &DiscreteDist, family: VacationFamily, mean: u64) -> RawDist {
    match family {
        VacationFamily::Deterministic => RawDist::Deterministic { value: mean },
        VacationFamily::Geometric => RawDist::Geometric {
            p: 1.0 / mean as f64,
        },
        VacationFamily::Uniform => {
            let lo = dist.min_support();
            let hi = dist.max_support().unwrap_or(lo);
            RawDist::Uniform { low: lo, high: hi }
        }
    }
}

/// Parses a TOML experiment config and resolves every case: defaults
/// applied, sweeps expanded (all `[[case]]` entries first, then each
/// `[[sweep]]` in order), names checked for uniqueness, and per-case seeds
/// fixed. `seed_override` replaces the config's run seed; cases with an
/// explicit `seed` keep it either way.
pub fn parse_config(
    text: &str,
    seed_override: Option<u64>,
) -> Result<ExperimentConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text)?;
    let run_seed = seed_override.or(raw.defaults.seed).unwrap_or(DEFAULT_SEED);

    let mut expanded: Vec<RawCase> = raw.cases.clone();
    for sweep in &raw.sweeps {
        expanded.extend(expand_sweep(sweep)?);
    }
    if expanded.is_empty() {
        return Err(ConfigError::Empty);
    }

    let mut seen = std::collections::HashSet::new();
    let mut cases = Vec::with_capacity(expanded.len());
    for (index, raw_case) in expanded.iter().enumerate() {
        if !seen.insert(raw_case.name.clone()) {
            return Err(ConfigError::DuplicateName(raw_case.name.clone()));
        }
        let partial = resolve_case(raw_case, &raw.defaults)?;
        cases.push(ResolvedCase {
            seed: partial
                .seed
                .unwrap_or_else(|| derive_seed(run_seed, index as u64)),
            name: partial.name,
            spec: partial.spec,
            total_slots: partial.total_slots,
            warmup_slots: partial.warmup_slots,
            tolerance_rel: partial.tolerance_rel,
            outputs: partial.outputs,
        });
    }
    Ok(ExperimentConfig { cases })
}
