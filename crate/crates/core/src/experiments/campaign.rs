use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::json;

use super::{run, ExperimentConfig, Outcome, Row, Status};
use crate::error::{Error, Result};

pub const RAW_CSV: &str = "raw.csv";
pub const SUMMARY_JSON: &str = "summary.json";

#[derive(Debug, Clone)]
pub struct CampaignReport {
    pub outcome: Outcome,
    pub raw_path: PathBuf,
    pub summary_path: PathBuf,
    pub summary: serde_json::Value,
}

pub fn write_raw_csv<W: Write>(mut out: W, rows: &[Row]) -> Result<()> {
    writeln!(out, "experiment,n,replicate,seed,statistic,value,status")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.experiment, r.n, r.replicate, r.seed, r.statistic, r.value, r.status
        )?;
    }
    out.flush()?;
    Ok(())
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    body(&mut w)?;
    w.flush()?;
    Ok(())
}

/// Runs the configured experiment and writes `raw.csv` and `summary.json`
/// under `cfg.out_dir`.
///
/// When some replicates fail, both files are still written (failed rows
/// carry status `failed`) and the call returns an error.
pub fn run_campaign(cfg: &ExperimentConfig) -> Result<CampaignReport> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out_dir)?;
    let raw_path = cfg.out_dir.join(RAW_CSV);
    let summary_path = cfg.out_dir.join(SUMMARY_JSON);
    let start = Instant::now();
    let outcome = match run(cfg) {
        Ok(o) => o,
        Err(e) => {
            write_file(&raw_path, |w| write_raw_csv(w, &[]))?;
            return Err(e);
        }
    };
    write_file(&raw_path, |w| write_raw_csv(w, &outcome.rows))?;
    let fit = outcome.scaling.as_ref();
    let summary = json!({
        "experiment": cfg.experiment.as_str(),
        "n_grid": cfg.n_grid,
        "replicates": cfg.replicates,
        "seed": cfg.seed,
        "slope": fit.map(|f| f.slope),
        "slope_ci": fit.map(|f| f.slope_ci),
        "intercept": fit.map(|f| f.intercept),
        "target": outcome.target,
        "points": fit.map(|f| &f.points),
        "rows": outcome.rows.len(),
        "excluded": outcome.count(Status::Excluded),
        "failed": outcome.count(Status::Failed),
        "failures": outcome.failures,
        "extra": outcome.extra,
        "config": cfg,
        "wall_clock_seconds": start.elapsed().as_secs_f64(),
    });
    write_file(&summary_path, |w| {
        serde_json::to_writer_pretty(&mut *w, &summary).map_err(|e| Error::Invariant(e.to_string()))?;
        writeln!(w)?;
        Ok(())
    })?;
    if !outcome.failures.is_empty() {
        return Err(Error::Invariant(format!(
            "{} replicate(s) failed; first: {}",
            outcome.failures.len(),
            outcome.failures[0]
        )));
    }
    Ok(CampaignReport {
        outcome,
        raw_path,
        summary_path,
        summary,
    })
}
