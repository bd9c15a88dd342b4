//! Monte Carlo replication sweeps over the Poisson-Beta and Thomas
//! processes: root-MSE of the fitted direction and root-MISE of the four
//! intensity estimators.
//!
//! Every replication draws from its own [`RngStream`] whose index is a hash
//! of `(process, a, z, h, replication)`, so cells can be added to a plan, or
//! run in any order and on any number of threads, without changing the draws
//! of the others. Aggregation always runs in replication order.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::Error;
use crate::estimate::{fit_theta_with, FitConfig, IntensityEstimator};
use crate::geometry::{chord_midpoint, ChordProfile, Point, Subspace, Window};
use crate::kernels::Bandwidth;
use crate::pattern::PointPattern;
use crate::simulate::{simulate_poisson_beta, simulate_thomas, PoissonBetaModel, RngStream, ThomasModel};

/// Midpoint cells along the orthogonal coordinate for 1-D error integrals.
pub const MISE_CELLS_1D: usize = 512;
/// Cells per side for planar error integrals.
pub const MISE_GRID_2D: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Process {
    Poisson,
    Thomas,
}

impl Process {
    pub fn name(self) -> &'static str {
        match self {
            Self::Poisson => "poisson",
            Self::Thomas => "thomas",
        }
    }
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Process {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim() {
            "poisson" => Ok(Self::Poisson),
            "thomas" | "cluster" => Ok(Self::Thomas),
            _ => Err(Error::InvalidParameter("process must be poisson or thomas")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    /// Root-MSE of the fitted direction, in degrees.
    Table1,
    /// Root-MISE of the four intensity estimators.
    Table2,
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim() {
            "table1" => Ok(Self::Table1),
            "table2" => Ok(Self::Table2),
            _ => Err(Error::InvalidParameter("target must be table1 or table2")),
        }
    }
}

/// What a summary row measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EstimatorKind {
    /// Fitted direction (root-MSE in degrees).
    Theta,
    /// Substationary estimator along the true direction.
    KnownTheta,
    /// Substationary estimator along the fitted direction.
    EstimatedTheta,
    Kernel2d,
    Stationary,
}

impl EstimatorKind {
    pub const TABLE2: [EstimatorKind; 4] =
        [Self::KnownTheta, Self::EstimatedTheta, Self::Kernel2d, Self::Stationary];

    pub fn name(self) -> &'static str {
        match self {
            Self::Theta => "theta_hat",
            Self::KnownTheta => "substat_known_theta",
            Self::EstimatedTheta => "substat_estimated_theta",
            Self::Kernel2d => "kernel_2d",
            Self::Stationary => "stationary",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThomasParams {
    pub gamma: f64,
    pub sigma: f64,
}

impl Default for ThomasParams {
    fn default() -> Self {
        Self { gamma: 5.0, sigma: 0.02 }
    }
}

/// A sweep over `processes x a x z x h`, each cell replicated
/// `replications` times on unit-height windows of width `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub processes: Vec<Process>,
    pub a_values: Vec<f64>,
    pub z_values: Vec<f64>,
    pub h_values: Vec<f64>,
    pub replications: usize,
    pub master_seed: u64,
    pub target: Target,
    pub thomas: ThomasParams,
    pub fit: FitConfig,
}

impl ExperimentPlan {
    pub fn new(target: Target, master_seed: u64) -> Self {
        Self {
            processes: alloc::vec![Process::Poisson],
            a_values: Vec::new(),
            z_values: Vec::new(),
            h_values: Vec::new(),
            replications: 100,
            master_seed,
            target,
            thomas: ThomasParams::default(),
            fit: FitConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.processes.is_empty() {
            return Err(Error::EmptyInput("process list"));
        }
        if self.a_values.is_empty() {
            return Err(Error::EmptyInput("a values"));
        }
        if self.z_values.is_empty() {
            return Err(Error::EmptyInput("z values"));
        }
        if self.h_values.is_empty() {
            return Err(Error::EmptyInput("h values"));
        }
        if self.replications == 0 {
            return Err(Error::InvalidParameter("replications must be >= 1"));
        }
        for &a in &self.a_values {
            if !(a.is_finite() && a >= 1.0) {
                return Err(Error::InvalidParameter("Beta shape a must be >= 1"));
            }
            // the direction is not identifiable for a flat intensity
            if self.target == Target::Table1 && a == 1.0 {
                return Err(Error::InvalidParameter("direction root-MSE is undefined for a = 1"));
            }
        }
        for &z in &self.z_values {
            Window::unit_height(z)?;
        }
        for &h in &self.h_values {
            Bandwidth::new(h)?;
        }
        ThomasModel::new(PoissonBetaModel::new(2.0, Window::unit_height(1.0)?)?, self.thomas.gamma, self.thomas.sigma)?;
        Ok(())
    }

    /// Cells in output order: process, then `a`, `z`, `h`.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &process in &self.processes {
            for &a in &self.a_values {
                for &z in &self.z_values {
                    for &h in &self.h_values {
                        out.push(Cell { process, a, z, h });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub process: Process,
    pub a: f64,
    pub z: f64,
    pub h: f64,
}

impl Cell {
    pub fn stream(&self, master_seed: u64, replication: u64) -> RngStream {
        RngStream::new(master_seed, cell_stream_index(self.process, self.a, self.z, self.h, replication))
    }

    pub fn model(&self) -> Result<PoissonBetaModel, Error> {
        PoissonBetaModel::new(self.a, Window::unit_height(self.z)?)
    }

    pub fn bandwidth(&self) -> Result<Bandwidth, Error> {
        Bandwidth::new(self.h)
    }

    /// Replication `replication` of this cell's process.
    pub fn simulate(&self, plan: &ExperimentPlan, replication: u64) -> Result<PointPattern, Error> {
        let base = self.model()?;
        let stream = self.stream(plan.master_seed, replication);
        Ok(match self.process {
            Process::Poisson => simulate_poisson_beta(&base, stream),
            Process::Thomas => {
                let m = ThomasModel::new(base, plan.thomas.gamma, plan.thomas.sigma)?;
                simulate_thomas(&m, stream)
            }
        })
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Stream index for one replication of one cell: FNV-1a over the process
/// tag and the little-endian bits of `a`, `z`, `h` and `replication`,
/// finished with a splitmix64 round.
pub fn cell_stream_index(process: Process, a: f64, z: f64, h: f64, replication: u64) -> u64 {
    let mut hash = FNV_OFFSET;
    let mut feed = |bytes: &[u8]| {
        for &b in bytes {
            hash ^= b as u64;
            hash = hash.wrapping_mul(FNV_PRIME);
        }
    };
    feed(process.name().as_bytes());
    for x in [a, z, h] {
        // -0.0 and 0.0 are the same cell
        let x = if x == 0.0 { 0.0 } else { x };
        feed(&x.to_bits().to_le_bytes());
    }
    feed(&replication.to_le_bytes());
    splitmix64(hash)
}

/// Root of a Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub metric: f64,
    /// Delta-method standard error of `metric`; NaN with one replication.
    pub mc_se: f64,
    pub replications: usize,
}

/// `sqrt(mean(values))` for nonnegative per-replication values, with the
/// standard error of the root obtained from that of the mean.
pub fn root_mean_summary(values: &[f64]) -> Summary {
    let r = values.len();
    if r == 0 {
        return Summary { metric: f64::NAN, mc_se: f64::NAN, replications: 0 };
    }
    let mean = values.iter().sum::<f64>() / r as f64;
    let metric = libm::sqrt(mean);
    let mc_se = if r < 2 {
        f64::NAN
    } else {
        let var = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (r - 1) as f64;
        let se_mean = libm::sqrt(var / r as f64);
        if metric > 0.0 { se_mean / (2.0 * metric) } else { 0.0 }
    };
    Summary { metric, mc_se, replications: r }
}

/// Root-MSE of direction estimates against the true direction `0`, in
/// degrees.
pub fn root_mse_theta(theta_hats: &[f64]) -> f64 {
    theta_root_mse_summary(theta_hats).metric
}

pub fn theta_root_mse_summary(theta_hats: &[f64]) -> Summary {
    let sq: Vec<f64> = theta_hats.iter().map(|t| t.to_degrees() * t.to_degrees()).collect();
    root_mean_summary(&sq)
}

/// `(1 / |S|) \int_S (est - truth)^2`.
///
/// A substationary estimator along `theta_truth` and a constant estimator
/// are integrated on [`MISE_CELLS_1D`] cells along the orthogonal
/// coordinate of `theta_truth`, weighting by chord length; anything else on
/// a [`MISE_GRID_2D`]-square grid. `truth` must be invariant along
/// `theta_truth` for the 1-D rule to be exact.
pub fn integrated_squared_error<F: Fn(Point) -> f64>(
    est: &IntensityEstimator,
    truth: &F,
    theta_truth: Subspace,
) -> f64 {
    let w = *est.window();
    match est {
        IntensityEstimator::Substationary(e) if e.theta() == theta_truth => {
            ise_along(|v| e.eval_unchecked(v), truth, theta_truth, &w)
        }
        IntensityEstimator::Stationary(e) => ise_along(|_| e.value(), truth, theta_truth, &w),
        _ => ise_grid(|p| est.eval_unchecked(p), truth, &w),
    }
}

fn ise_along<E: Fn(f64) -> f64, F: Fn(Point) -> f64>(est: E, truth: &F, theta: Subspace, w: &Window) -> f64 {
    let profile = ChordProfile::new(theta, w);
    let (lo, hi) = profile.support();
    let dv = (hi - lo) / MISE_CELLS_1D as f64;
    let mut acc = 0.0;
    for k in 0..MISE_CELLS_1D {
        let v = lo + (k as f64 + 0.5) * dv;
        let Some(p) = chord_midpoint(theta, w, v) else { continue };
        let d = est(v) - truth(p);
        acc += d * d * profile.eval(v);
    }
    acc * dv / w.area()
}

fn ise_grid<E: Fn(Point) -> f64, F: Fn(Point) -> f64>(est: E, truth: &F, w: &Window) -> f64 {
    let n = MISE_GRID_2D;
    let (dx, dy) = (w.z() / n as f64, w.omega() / n as f64);
    let mut acc = 0.0;
    for i in 0..n {
        let x = (i as f64 + 0.5) * dx;
        for j in 0..n {
            let p = Point::new(x, (j as f64 + 0.5) * dy);
            let d = est(p) - truth(p);
            acc += d * d;
        }
    }
    acc / (n * n) as f64
}

/// Root-MISE over replications of estimates of the same truth.
pub fn root_mise<F: Fn(Point) -> f64>(estimates: &[IntensityEstimator], truth: F, theta_truth: Subspace) -> Summary {
    let ises: Vec<f64> = estimates
        .iter()
        .map(|e| integrated_squared_error(e, &truth, theta_truth))
        .collect();
    root_mean_summary(&ises)
}

/// Fitted direction (radians) for one replication of `cell`.
pub fn table1_replicate(plan: &ExperimentPlan, cell: &Cell, replication: u64) -> Result<f64, Error> {
    let pattern = cell.simulate(plan, replication)?;
    let fit = fit_theta_with(&pattern, cell.bandwidth()?, &plan.fit)?;
    Ok(fit.theta_hat.theta())
}

/// Integrated squared errors for one replication of `cell`, in the order of
/// [`EstimatorKind::TABLE2`].
pub fn table2_replicate(plan: &ExperimentPlan, cell: &Cell, replication: u64) -> Result<[f64; 4], Error> {
    let model = cell.model()?;
    let truth = |p: Point| model.intensity(p);
    let pattern = cell.simulate(plan, replication)?;
    let h = cell.bandwidth()?;
    let fitted = fit_theta_with(&pattern, h, &plan.fit)?.theta_hat;
    let truth_dir = Subspace::HORIZONTAL;
    let estimators = [
        IntensityEstimator::substationary(&pattern, truth_dir, h),
        IntensityEstimator::substationary(&pattern, fitted, h),
        IntensityEstimator::kernel_2d(&pattern, h),
        IntensityEstimator::stationary(&pattern),
    ];
    Ok(estimators.map(|e| integrated_squared_error(&e, &truth, truth_dir)))
}

/// Maps `f` over `0..n`, returning results in index order.
pub trait Executor {
    fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs everything on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSummary {
    pub cell: Cell,
    pub estimator: EstimatorKind,
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub target: Target,
    /// One row per cell and estimator, in plan order.
    pub cells: Vec<CellSummary>,
}

impl ExperimentResult {
    pub fn get(&self, process: Process, a: f64, z: f64, h: f64, estimator: EstimatorKind) -> Option<&Summary> {
        self.cells
            .iter()
            .find(|c| {
                c.cell.process == process
                    && c.cell.a == a
                    && c.cell.z == z
                    && c.cell.h == h
                    && c.estimator == estimator
            })
            .map(|c| &c.summary)
    }
}

pub fn run_table1(plan: &ExperimentPlan) -> Result<ExperimentResult, Error> {
    if plan.target != Target::Table1 {
        return Err(Error::InvalidParameter("plan target is not table1"));
    }
    run_plan_with(plan, &Sequential)
}

pub fn run_table2(plan: &ExperimentPlan) -> Result<ExperimentResult, Error> {
    if plan.target != Target::Table2 {
        return Err(Error::InvalidParameter("plan target is not table2"));
    }
    run_plan_with(plan, &Sequential)
}

/// Runs every replication of every cell through `exec`.
pub fn run_plan_with<E: Executor>(plan: &ExperimentPlan, exec: &E) -> Result<ExperimentResult, Error> {
    plan.validate()?;
    let cells = plan.cells();
    let reps = plan.replications;
    let jobs = cells.len() * reps;
    let job_cell = |j: usize| (&cells[j / reps], (j % reps) as u64);
    let mut rows = Vec::new();
    match plan.target {
        Target::Table1 => {
            let out = exec.map_indexed(jobs, |j| {
                let (cell, rep) = job_cell(j);
                table1_replicate(plan, cell, rep)
            });
            let out: Vec<f64> = out.into_iter().collect::<Result<_, _>>()?;
            for (cell, thetas) in cells.iter().zip(out.chunks(reps)) {
                rows.push(CellSummary {
                    cell: *cell,
                    estimator: EstimatorKind::Theta,
                    summary: theta_root_mse_summary(thetas),
                });
            }
        }
        Target::Table2 => {
            let out = exec.map_indexed(jobs, |j| {
                let (cell, rep) = job_cell(j);
                table2_replicate(plan, cell, rep)
            });
            let out: Vec<[f64; 4]> = out.into_iter().collect::<Result<_, _>>()?;
            for (cell, ises) in cells.iter().zip(out.chunks(reps)) {
                for (k, kind) in EstimatorKind::TABLE2.iter().enumerate() {
                    let column: Vec<f64> = ises.iter().map(|row| row[k]).collect();
                    rows.push(CellSummary { cell: *cell, estimator: *kind, summary: root_mean_summary(&column) });
                }
            }
        }
    }
    Ok(ExperimentResult { target: plan.target, cells: rows })
}

/// Monte Carlo MSE of the known-direction estimate at height `y` for
/// Poisson-Beta data, with its standard error.
pub fn pointwise_mse(model: &PoissonBetaModel, h: Bandwidth, y: f64, reps: u64, master_seed: u64) -> Result<(f64, f64), Error> {
    let truth = model.intensity_at_height(y);
    let w = model.window();
    let mut sq = Vec::with_capacity(reps as usize);
    for rep in 0..reps {
        let stream = RngStream::new(master_seed, cell_stream_index(Process::Poisson, model.a(), w.z(), h.get(), rep));
        let pattern = simulate_poisson_beta(model, stream);
        let est = crate::estimate::intensity_substat(&pattern, Subspace::HORIZONTAL, h, y)?;
        sq.push((est - truth) * (est - truth));
    }
    let n = sq.len() as f64;
    let mean = sq.iter().sum::<f64>() / n;
    let var = sq.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    Ok((mean, libm::sqrt(var / n)))
}

/// Axis-aligned rectangle `[x_min, x_max] x [y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub const fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Self { x_min, x_max, y_min, y_max }
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Self {
        Self::new(self.x_min + dx, self.x_max + dx, self.y_min + dy, self.y_max + dy)
    }
}

/// Mean counts in two regions (unions of disjoint rectangles) over
/// replications of the same pattern source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountComparison {
    pub mean_a: f64,
    pub mean_b: f64,
    /// `sqrt(var_a / R + var_b / R)`
    pub combined_se: f64,
    pub replications: usize,
}

impl CountComparison {
    /// `|mean_a - mean_b|` in units of `combined_se`.
    pub fn z_score(&self) -> f64 {
        (self.mean_a - self.mean_b).abs() / self.combined_se
    }
}

pub fn compare_region_counts<I>(patterns: I, region_a: &[Rect], region_b: &[Rect]) -> CountComparison
where
    I: IntoIterator<Item = PointPattern>,
{
    let count = |pat: &PointPattern, region: &[Rect]| {
        pat.points().iter().filter(|&&p| region.iter().any(|r| r.contains(p))).count() as f64
    };
    let (mut na, mut nb) = (Vec::new(), Vec::new());
    for pat in patterns {
        na.push(count(&pat, region_a));
        nb.push(count(&pat, region_b));
    }
    let r = na.len() as f64;
    let moments = |xs: &[f64]| {
        let m = xs.iter().sum::<f64>() / r;
        let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (r - 1.0).max(1.0);
        (m, v)
    };
    let (mean_a, var_a) = moments(&na);
    let (mean_b, var_b) = moments(&nb);
    CountComparison {
        mean_a,
        mean_b,
        combined_se: libm::sqrt(var_a / r + var_b / r),
        replications: na.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn root_mse_examples() {
        assert_eq!(root_mse_theta(&[0.0, 0.0, 0.0]), 0.0);
        let one = 1f64.to_radians();
        assert!((root_mse_theta(&[one, -one]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_estimator_has_zero_error() {
        let w = Window::new(2.0, 1.0).unwrap();
        let pat = PointPattern::new(w, vec![Point::new(0.5, 0.5), Point::new(1.5, 0.2)]).unwrap();
        let est = IntensityEstimator::stationary(&pat);
        let s = root_mise(&[est.clone(), est], |_| 1.0, Subspace::HORIZONTAL);
        assert!(s.metric.abs() < 1e-12);
        assert_eq!(s.replications, 2);
    }

    #[test]
    fn one_dimensional_and_planar_rules_agree() {
        let w = Window::new(3.0, 1.0).unwrap();
        let pts = (0..40).map(|i| Point::new(3.0 * (i as f64 + 0.5) / 40.0, ((i * 7) % 40) as f64 / 40.0)).collect();
        let pat = PointPattern::new(w, pts).unwrap();
        let est = IntensityEstimator::substationary(&pat, Subspace::HORIZONTAL, Bandwidth::new(0.1).unwrap());
        let truth = |p: Point| 20.0 + 10.0 * p.y;
        let along = integrated_squared_error(&est, &truth, Subspace::HORIZONTAL);
        let grid = ise_grid(|p| est.eval_unchecked(p), &truth, &w);
        assert!((along - grid).abs() / grid < 1e-3, "{along} vs {grid}");
    }

    #[test]
    fn stream_index_separates_cells() {
        let base = cell_stream_index(Process::Poisson, 2.0, 5.0, 0.05, 0);
        assert_eq!(base, cell_stream_index(Process::Poisson, 2.0, 5.0, 0.05, 0));
        for other in [
            cell_stream_index(Process::Thomas, 2.0, 5.0, 0.05, 0),
            cell_stream_index(Process::Poisson, 2.5, 5.0, 0.05, 0),
            cell_stream_index(Process::Poisson, 2.0, 10.0, 0.05, 0),
            cell_stream_index(Process::Poisson, 2.0, 5.0, 0.1, 0),
            cell_stream_index(Process::Poisson, 2.0, 5.0, 0.05, 1),
        ] {
            assert_ne!(base, other);
        }
    }

    #[test]
    fn plan_validation() {
        let mut plan = ExperimentPlan::new(Target::Table1, 1);
        assert!(plan.validate().is_err());
        plan.a_values = vec![1.0];
        plan.z_values = vec![1.0];
        plan.h_values = vec![0.1];
        assert!(plan.validate().is_err());
        plan.a_values = vec![2.0];
        assert!(plan.validate().is_ok());
        plan.replications = 0;
        assert!(plan.validate().is_err());
    }

    #[test]
    fn single_replication_smoke() {
        let mut plan = ExperimentPlan::new(Target::Table1, 3);
        plan.processes = vec![Process::Poisson, Process::Thomas];
        plan.a_values = vec![3.0];
        plan.z_values = vec![1.0];
        plan.h_values = vec![0.1];
        plan.replications = 1;
        plan.fit.grid_points = 36;
        let res = run_table1(&plan).unwrap();
        assert_eq!(res.cells.len(), 2);
        assert!(res.cells.iter().all(|c| c.summary.metric.is_finite() && c.summary.metric >= 0.0));
        assert!(run_table2(&plan).is_err());
    }
}
