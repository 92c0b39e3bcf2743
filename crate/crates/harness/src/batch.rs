//! Running a directory of scenarios on a worker pool.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::run::{run_scenario, Metrics};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Serialize)]
pub struct BatchRow {
    pub scenario: String,
    pub pass: bool,
    pub error: Option<String>,
    pub failed_checks: Vec<String>,
    pub metrics: Option<Metrics>,
}

/// Scenario files (`*.json`) in `dir`, sorted by name.
pub fn scenario_files(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    Ok(files)
}

fn run_one(path: &Path, out: Option<&Path>) -> BatchRow {
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let fail = |e: String| BatchRow {
        scenario: name.clone(),
        pass: false,
        error: Some(e),
        failed_checks: Vec::new(),
        metrics: None,
    };
    let loaded = match Scenario::load(path) {
        Ok(l) => l,
        Err(e) => return fail(e.to_string()),
    };
    let res = match run_scenario(&loaded) {
        Ok(r) => r,
        Err(e) => return fail(e.to_string()),
    };
    if let Some(dir) = out {
        if let Err(e) = std::fs::write(dir.join(format!("{name}.jsonl")), res.trace.to_jsonl()) {
            return fail(e.to_string());
        }
    }
    BatchRow {
        scenario: name.clone(),
        pass: res.all_pass() && res.metrics.reached_flocking,
        error: res.metrics.error.clone(),
        failed_checks: res.verdicts.iter().filter(|v| !v.pass).map(|v| v.check.clone()).collect(),
        metrics: Some(res.metrics),
    }
}

/// Runs every scenario in `dir` on `jobs` workers; rows come back in file
/// order whatever the scheduling. Traces go to `out` when given.
pub fn run_batch(dir: &Path, jobs: usize, out: Option<&Path>) -> anyhow::Result<Vec<BatchRow>> {
    let files = scenario_files(dir)?;
    if let Some(o) = out {
        std::fs::create_dir_all(o)?;
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build()?;
    Ok(pool.install(|| files.par_iter().map(|f| run_one(f, out)).collect()))
}
