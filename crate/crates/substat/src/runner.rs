//! Parallel execution of experiment plans and their CSV output.

use std::io::Write;

use rayon::prelude::*;
use substat_core::experiments::{run_plan_with, Executor, ExperimentPlan, ExperimentResult, Process, Target};
use substat_core::ProfileCriterion;

use crate::config::Config;
use crate::error::{Error, Result};

/// Runs jobs on a dedicated rayon pool. Results come back in job order, so
/// output does not depend on the thread count.
pub struct RayonExecutor {
    pool: rayon::ThreadPool,
}

impl RayonExecutor {
    /// `threads == 0` lets rayon pick.
    pub fn new(threads: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Usage(format!("thread pool: {e}")))?;
        Ok(Self { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }

    /// Runs `f` inside the pool so nested rayon work uses its threads.
    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.pool.install(f)
    }
}

impl Executor for RayonExecutor {
    fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..n).into_par_iter().map(f).collect())
    }
}

pub fn parse_criterion(s: &str) -> Result<ProfileCriterion> {
    match s.trim() {
        "leave-one-out" | "loo" => Ok(ProfileCriterion::LeaveOneOut),
        "plug-in" | "plugin" => Ok(ProfileCriterion::PlugIn),
        other => Err(Error::Usage(format!("criterion must be leave-one-out or plug-in, got {other:?}"))),
    }
}

/// Builds a plan from config keys `processes`, `a`, `z`, `h`,
/// `replications`, `seed`, `gamma`, `sigma`, `grid-points` and `criterion`.
/// `seed` and `replications` given here take precedence.
pub fn plan_from_config(target: Target, cfg: &Config, seed: Option<u64>, replications: Option<usize>) -> Result<ExperimentPlan> {
    let mut plan = ExperimentPlan::new(target, 0);
    let list = |keys: &[&str]| -> Result<Option<Vec<f64>>> {
        for k in keys {
            if let Some(v) = cfg.get_list::<f64>(k)? {
                return Ok(Some(v));
            }
        }
        Ok(None)
    };
    if let Some(raw) = cfg.raw("processes").or(cfg.raw("process")) {
        plan.processes = raw
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|p| p.parse::<Process>())
            .collect::<std::result::Result<_, _>>()?;
    }
    plan.a_values = list(&["a", "a-values"])?.unwrap_or_default();
    plan.z_values = list(&["z", "z-values"])?.unwrap_or_default();
    plan.h_values = list(&["h", "h-values"])?.unwrap_or_default();
    plan.replications = cfg.pick(replications, "replications")?.unwrap_or(plan.replications);
    plan.master_seed = cfg.pick(seed, "seed")?.unwrap_or(0);
    plan.thomas.gamma = cfg.get("gamma")?.unwrap_or(plan.thomas.gamma);
    plan.thomas.sigma = cfg.get("sigma")?.unwrap_or(plan.thomas.sigma);
    plan.fit.grid_points = cfg.get("grid-points")?.unwrap_or(plan.fit.grid_points);
    if let Some(c) = cfg.raw("criterion") {
        plan.fit.criterion = parse_criterion(c)?;
    }
    plan.validate()?;
    Ok(plan)
}

pub fn run_experiment(plan: &ExperimentPlan, threads: usize) -> Result<ExperimentResult> {
    let exec = RayonExecutor::new(threads)?;
    Ok(run_plan_with(plan, &exec)?)
}

pub const RESULT_HEADER: [&str; 8] = ["process", "a", "z", "h", "estimator", "metric", "mc_se", "replications"];

pub fn write_result<W: Write>(out: W, result: &ExperimentResult) -> std::io::Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(RESULT_HEADER)?;
    for row in &result.cells {
        let c = &row.cell;
        wtr.write_record([
            c.process.name().to_string(),
            c.a.to_string(),
            c.z.to_string(),
            c.h.to_string(),
            row.estimator.name().to_string(),
            row.summary.metric.to_string(),
            row.summary.mc_se.to_string(),
            row.summary.replications.to_string(),
        ])?;
    }
    wtr.flush()
}
