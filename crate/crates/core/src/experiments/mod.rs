//! Replicated campaigns that measure the scaling laws, plus CSV/JSON output.
//!
//! Replicate `r` at size `n` draws everything from
//! [`seed::replicate_seed`]`(base, n, r)`, so results do not depend on the
//! number of worker threads.

mod campaign;
mod config;
mod fit;
mod gwcheck;
mod runners;

pub use campaign::{run_campaign, write_raw_csv, CampaignReport, RAW_CSV, SUMMARY_JSON};
pub use config::{Experiment, ExperimentConfig, Variant};
pub use fit::{aggregate, fit_loglog, mean_stderr, ScalingPoint, ScalingResult};
pub use gwcheck::{dyadic_bin, run_gwcheck, tv_distance, HEIGHT_TAIL_M, HEIGHT_TAIL_SAMPLES};
pub use runners::{
    powerlaw_target, run_critical_window, run_diameter_scaling, run_phase_transition, run_powerlaw,
    run_typical_distance, MAX_DOUBLINGS,
};

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphgen::{CapacityMode, CapacitySource};
use crate::par::{self, Parallelism};
use crate::seed;
use crate::weights::{WeightLaw, WeightVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    /// Left out of aggregates, e.g. a graph that never connected.
    Excluded,
    Failed,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Excluded => "excluded",
            Status::Failed => "failed",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One measured value of one replicate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub experiment: Experiment,
    pub n: usize,
    pub replicate: usize,
    pub seed: u64,
    pub statistic: String,
    pub value: f64,
    pub status: Status,
}

/// Rows of a finished experiment with its fitted and derived quantities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub experiment: Experiment,
    pub rows: Vec<Row>,
    /// Main exponent fit, if the experiment has one.
    pub scaling: Option<ScalingResult>,
    /// Exponent the fit is compared against.
    pub target: Option<f64>,
    pub extra: serde_json::Value,
    /// Messages of failed replicates.
    pub failures: Vec<String>,
}

impl Outcome {
    /// Ok values of `statistic` at size `n`, in replicate order.
    pub fn values(&self, n: usize, statistic: &str) -> Vec<f64> {
        values_of(&self.rows, n, statistic)
    }

    pub fn count(&self, status: Status) -> usize {
        self.rows.iter().filter(|r| r.status == status).count()
    }
}

pub(crate) fn values_of(rows: &[Row], n: usize, statistic: &str) -> Vec<f64> {
    rows.iter()
        .filter(|r| r.n == n && r.statistic == statistic && r.status == Status::Ok)
        .map(|r| r.value)
        .collect()
}

pub(crate) fn points_of(rows: &[Row], n_grid: &[usize], statistic: &str) -> Vec<ScalingPoint> {
    n_grid.iter().map(|&n| aggregate(n, &values_of(rows, n, statistic))).collect()
}

/// A statistic as produced by a replicate.
pub(crate) struct Stat {
    name: String,
    value: f64,
    status: Status,
}

impl Stat {
    pub(crate) fn ok(name: impl Into<String>, value: f64) -> Self {
        Self {
            name: name.into(),
            value,
            status: Status::Ok,
        }
    }

    pub(crate) fn excluded(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            value: f64::NAN,
            status: Status::Excluded,
        }
    }
}

/// Runs `task(n, replicate, seed)` over the whole grid and merges the rows
/// in `(n, replicate)` order.
pub(crate) fn replicate_grid<F>(cfg: &ExperimentConfig, task: F) -> (Vec<Row>, Vec<String>)
where
    F: Fn(usize, usize, u64) -> Result<Vec<Stat>> + Sync + Send,
{
    let reps = cfg.replicates;
    let results = par::map_indexed(cfg.n_grid.len() * reps, Parallelism::from_jobs(cfg.jobs), |i| {
        let n = cfg.n_grid[i / reps];
        let r = i % reps;
        let s = seed::replicate_seed(cfg.seed, n, r);
        (n, r, s, task(n, r, s))
    });
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (n, r, s, res) in results {
        let row = |statistic: String, value: f64, status: Status| Row {
            experiment: cfg.experiment,
            n,
            replicate: r,
            seed: s,
            statistic,
            value,
            status,
        };
        match res {
            Ok(stats) => rows.extend(stats.into_iter().map(|x| row(x.name, x.value, x.status))),
            Err(e) => {
                failures.push(format!("n = {n}, replicate {r}: {e}"));
                rows.push(row("error".into(), f64::NAN, Status::Failed));
            }
        }
    }
    (rows, failures)
}

const WEIGHT_STREAM: u64 = 1;
const CAPACITY_STREAM: u64 = 2;
const AUX_STREAM: u64 = 3;

/// The weight vector of one replicate.
///
/// Constant weights are all ones; other laws are sampled per replicate and
/// rescaled to criticality; `powerlaw` runs use the deterministic power-law
/// sequence.
pub(crate) fn weights_for(cfg: &ExperimentConfig, n: usize, rep_seed: u64) -> Result<WeightVector> {
    if cfg.experiment == Experiment::Powerlaw {
        return WeightVector::make_powerlaw(n, cfg.alpha);
    }
    match cfg.weights {
        WeightLaw::Constant => WeightVector::make_constant(n),
        ref law => Ok(WeightVector::sample_iid(n, law, seed::derive(rep_seed, &[WEIGHT_STREAM]))?.normalize_critical()),
    }
}

pub(crate) fn source_for(cfg: &ExperimentConfig, v: &WeightVector, p_max: f64, rep_seed: u64) -> Result<CapacitySource> {
    let s = seed::derive(rep_seed, &[CAPACITY_STREAM]);
    match cfg.capacity_mode {
        CapacityMode::Exact => CapacitySource::exact_capacities(v, s),
        CapacityMode::Poissonized => CapacitySource::poissonized(v, p_max, s),
    }
}

pub(crate) fn aux_seed(rep_seed: u64, k: u64) -> u64 {
    seed::derive(rep_seed, &[AUX_STREAM, k])
}

/// Runs the configured experiment without touching the file system.
pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    match cfg.experiment {
        Experiment::Phase => run_phase_transition(cfg),
        Experiment::Window => run_critical_window(cfg),
        Experiment::Diameter => run_diameter_scaling(cfg),
        Experiment::Typical => run_typical_distance(cfg),
        Experiment::Powerlaw => run_powerlaw(cfg),
        Experiment::Gwcheck => run_gwcheck(cfg),
    }
}

pub(crate) fn require(cfg: &ExperimentConfig, kind: Experiment) -> Result<()> {
    if cfg.experiment != kind {
        return Err(Error::Config(format!("expected a `{kind}` config, got `{}`", cfg.experiment)));
    }
    cfg.validate()
}
