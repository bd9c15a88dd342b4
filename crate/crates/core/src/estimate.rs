//! Kernel intensity estimators, the Poisson composite log-likelihood and the
//! profile-likelihood estimate of the invariance direction.
//!
//! Three estimators are provided:
//!
//! * [`SubstationaryEstimator`]: smooths the orthogonal coordinates
//!   `v_i = y_i cos theta - x_i sin theta` with a 1-D Gaussian kernel and
//!   divides by the edge correction `C_h(v)`;
//! * [`Kernel2dEstimator`]: the planar Gaussian kernel estimator with the
//!   Berman-Diggle correction;
//! * [`StationaryEstimator`]: `n / |S|`.
//!
//! Kernel sums use the points sorted along the smoothing coordinate and only
//! visit those within nine bandwidths; when that window is numerically empty
//! the full sum is taken instead, so tiny intensities stay exact.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use crate::error::Error;
use crate::geometry::{ChordProfile, Point, Subspace, Window};
use crate::kernels::{correction_2d, correction_from_profile, Bandwidth};
use crate::normal::FRAC_1_SQRT_2PI;
use crate::optimize::golden_section_max;
use crate::pattern::PointPattern;

/// Kernel sums visit points within this many bandwidths.
const SUM_REACH: f64 = 9.0;

/// Points beyond [`SUM_REACH`] contribute at most `exp(-40.5)` each to a raw
/// kernel sum; when the windowed sum is below `n` times this floor the
/// omitted terms could matter at 1e-12 relative, so the full sum is taken.
const SPARSE_FLOOR: f64 = 1e-5;

#[inline]
fn gauss(d: f64, inv_h: f64) -> f64 {
    let t = d * inv_h;
    libm::exp(-0.5 * t * t)
}

/// Index range of sorted `values` within `[lo, hi]`.
fn window_indices(values: &[f64], lo: f64, hi: f64) -> (usize, usize) {
    let start = values.partition_point(|&x| x < lo);
    let end = values.partition_point(|&x| x <= hi);
    (start, end.max(start))
}

/// Intensity as a function of the orthogonal coordinate, for a fixed
/// direction and bandwidth.
#[derive(Debug, Clone, PartialEq)]
pub struct SubstationaryEstimator {
    window: Window,
    theta: Subspace,
    h: Bandwidth,
    profile: ChordProfile,
    sorted_v: Vec<f64>,
}

impl SubstationaryEstimator {
    pub fn new(pattern: &PointPattern, theta: Subspace, h: Bandwidth) -> Self {
        let mut sorted_v: Vec<f64> = pattern
            .points()
            .iter()
            .map(|&p| theta.orthogonal_coordinate(p))
            .collect();
        sorted_v.sort_unstable_by(f64::total_cmp);
        Self {
            window: *pattern.window(),
            theta,
            h,
            profile: ChordProfile::new(theta, pattern.window()),
            sorted_v,
        }
    }

    pub fn theta(&self) -> Subspace {
        self.theta
    }

    pub fn bandwidth(&self) -> Bandwidth {
        self.h
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn len(&self) -> usize {
        self.sorted_v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted_v.is_empty()
    }

    /// Closed range of the orthogonal coordinate over the window.
    pub fn range(&self) -> (f64, f64) {
        self.profile.support()
    }

    /// Unnormalized kernel sum `sum_i exp(-(v_i - v)^2 / 2h^2)`, optionally
    /// skipping one occurrence of the data value at sorted index `skip`.
    fn raw_sum(&self, v: f64, skip: Option<usize>) -> f64 {
        let h = self.h.get();
        let inv_h = 1.0 / h;
        let reach = SUM_REACH * h;
        let (start, end) = window_indices(&self.sorted_v, v - reach, v + reach);
        let mut s = 0.0;
        for (j, &vj) in self.sorted_v[start..end].iter().enumerate() {
            if skip != Some(start + j) {
                s += gauss(vj - v, inv_h);
            }
        }
        if s < SPARSE_FLOOR * self.sorted_v.len() as f64 {
            s = 0.0;
            for (j, &vj) in self.sorted_v.iter().enumerate() {
                if skip != Some(j) {
                    s += gauss(vj - v, inv_h);
                }
            }
        }
        s
    }

    /// Edge correction `C_h(v)`.
    pub fn correction(&self, v: f64) -> f64 {
        correction_from_profile(&self.profile, self.h, v)
    }

    fn check_domain(&self, v: f64) -> Result<(), Error> {
        let (lo, hi) = self.range();
        let slack = 1e-12 * (hi - lo).max(1.0);
        if v.is_finite() && v >= lo - slack && v <= hi + slack {
            Ok(())
        } else {
            Err(Error::OutOfDomain { value: v, lo, hi })
        }
    }

    /// Unchecked evaluation, for locations already known to be in range.
    #[inline]
    pub(crate) fn eval_unchecked(&self, v: f64) -> f64 {
        if self.sorted_v.is_empty() {
            return 0.0;
        }
        let h = self.h.get();
        let s = self.raw_sum(v, None) * FRAC_1_SQRT_2PI / h;
        s / self.correction(v)
    }

    /// `lambda(v) = C_h(v)^-1 sum_i phi((v_i - v) / h) / h`.
    pub fn eval(&self, v: f64) -> Result<f64, Error> {
        self.check_domain(v)?;
        Ok(self.eval_unchecked(v))
    }

    pub fn eval_at(&self, p: Point) -> Result<f64, Error> {
        self.eval(self.theta.orthogonal_coordinate(p))
    }

    /// Leave-one-out estimate at the data value with sorted index `i`.
    fn eval_leave_one_out(&self, i: usize) -> f64 {
        let v = self.sorted_v[i];
        let h = self.h.get();
        self.raw_sum(v, Some(i)) * FRAC_1_SQRT_2PI / h / self.correction(v)
    }

    /// `\int_S lambda(s) ds = \int lambda(v) chord(v) dv`, midpoint rule on
    /// `cells` cells over the range.
    pub fn integral(&self, cells: usize) -> f64 {
        if self.sorted_v.is_empty() {
            return 0.0;
        }
        let (lo, hi) = self.range();
        let dv = (hi - lo) / cells as f64;
        let mut acc = 0.0;
        for k in 0..cells {
            let v = lo + (k as f64 + 0.5) * dv;
            acc += self.eval_unchecked(v) * self.profile.eval(v);
        }
        acc * dv
    }

    fn cells_for(&self, cfg: &LoglikConfig) -> usize {
        let (lo, hi) = self.range();
        let by_bandwidth = libm::ceil(cfg.cells_per_bandwidth * (hi - lo) / self.h.get());
        cfg.min_cells.max(by_bandwidth as usize)
    }
}

/// Planar Gaussian kernel estimator with Berman-Diggle correction.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel2dEstimator {
    window: Window,
    h: Bandwidth,
    // sorted by x
    points: Vec<Point>,
}

impl Kernel2dEstimator {
    pub fn new(pattern: &PointPattern, h: Bandwidth) -> Self {
        let mut points = pattern.points().to_vec();
        points.sort_unstable_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        Self { window: *pattern.window(), h, points }
    }

    pub fn bandwidth(&self) -> Bandwidth {
        self.h
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    fn raw_sum(&self, p: Point) -> f64 {
        let h = self.h.get();
        let inv_h = 1.0 / h;
        let reach = SUM_REACH * h;
        let start = self.points.partition_point(|q| q.x < p.x - reach);
        let end = self.points.partition_point(|q| q.x <= p.x + reach).max(start);
        let mut s = 0.0;
        for q in &self.points[start..end] {
            let dy = q.y - p.y;
            if dy.abs() <= reach {
                let dx = q.x - p.x;
                let t2 = (dx * dx + dy * dy) * inv_h * inv_h;
                s += libm::exp(-0.5 * t2);
            }
        }
        if s < SPARSE_FLOOR * self.points.len() as f64 {
            s = self
                .points
                .iter()
                .map(|q| {
                    let (dx, dy) = (q.x - p.x, q.y - p.y);
                    libm::exp(-0.5 * (dx * dx + dy * dy) * inv_h * inv_h)
                })
                .sum();
        }
        s
    }

    pub(crate) fn eval_unchecked(&self, p: Point) -> f64 {
        if self.points.is_empty() {
            return 0.0;
        }
        let h = self.h.get();
        let norm = 1.0 / (2.0 * core::f64::consts::PI * h * h);
        self.raw_sum(p) * norm / correction_2d(&self.window, self.h, p)
    }

    pub fn eval(&self, p: Point) -> Result<f64, Error> {
        if !self.window.contains(p) {
            let (lo, hi) = if p.x < 0.0 || p.x > self.window.z() {
                (0.0, self.window.z())
            } else {
                (0.0, self.window.omega())
            };
            let value = if p.x < 0.0 || p.x > self.window.z() { p.x } else { p.y };
            return Err(Error::OutOfDomain { value, lo, hi });
        }
        Ok(self.eval_unchecked(p))
    }

    /// Midpoint rule on a `cells x cells` grid over the window.
    pub fn integral(&self, cells: usize) -> f64 {
        if self.points.is_empty() {
            return 0.0;
        }
        let dx = self.window.z() / cells as f64;
        let dy = self.window.omega() / cells as f64;
        let mut acc = 0.0;
        for i in 0..cells {
            let x = (i as f64 + 0.5) * dx;
            for j in 0..cells {
                let y = (j as f64 + 0.5) * dy;
                acc += self.eval_unchecked(Point::new(x, y));
            }
        }
        acc * dx * dy
    }
}

/// `n / |S|`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryEstimator {
    window: Window,
    value: f64,
}

impl StationaryEstimator {
    pub fn new(pattern: &PointPattern) -> Self {
        Self { window: *pattern.window(), value: intensity_stationary(pattern) }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn window(&self) -> &Window {
        &self.window
    }
}

/// Any of the three estimators, evaluable anywhere in the window.
#[derive(Debug, Clone, PartialEq)]
pub enum IntensityEstimator {
    Substationary(SubstationaryEstimator),
    Kernel2d(Kernel2dEstimator),
    Stationary(StationaryEstimator),
}

impl IntensityEstimator {
    pub fn substationary(pattern: &PointPattern, theta: Subspace, h: Bandwidth) -> Self {
        Self::Substationary(SubstationaryEstimator::new(pattern, theta, h))
    }

    pub fn kernel_2d(pattern: &PointPattern, h: Bandwidth) -> Self {
        Self::Kernel2d(Kernel2dEstimator::new(pattern, h))
    }

    pub fn stationary(pattern: &PointPattern) -> Self {
        Self::Stationary(StationaryEstimator::new(pattern))
    }

    pub fn window(&self) -> &Window {
        match self {
            Self::Substationary(e) => e.window(),
            Self::Kernel2d(e) => e.window(),
            Self::Stationary(e) => e.window(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Substationary(_) => "substationary",
            Self::Kernel2d(_) => "kernel_2d",
            Self::Stationary(_) => "stationary",
        }
    }

    /// Intensity at a location inside the window.
    pub fn eval(&self, p: Point) -> Result<f64, Error> {
        match self {
            Self::Substationary(e) => {
                if !e.window.contains(p) {
                    return Err(Error::PointOutsideWindow { index: 0, x: p.x, y: p.y });
                }
                e.eval_at(p)
            }
            Self::Kernel2d(e) => e.eval(p),
            Self::Stationary(e) => {
                if !e.window.contains(p) {
                    return Err(Error::PointOutsideWindow { index: 0, x: p.x, y: p.y });
                }
                Ok(e.value)
            }
        }
    }

    /// Like [`IntensityEstimator::eval`] but without the containment check.
    pub fn eval_unchecked(&self, p: Point) -> f64 {
        match self {
            Self::Substationary(e) => e.eval_unchecked(e.theta.orthogonal_coordinate(p)),
            Self::Kernel2d(e) => e.eval_unchecked(p),
            Self::Stationary(e) => e.value,
        }
    }
}

/// Substationary estimate at offset `v` along the orthogonal direction.
pub fn intensity_substat(pattern: &PointPattern, theta: Subspace, h: Bandwidth, v: f64) -> Result<f64, Error> {
    SubstationaryEstimator::new(pattern, theta, h).eval(v)
}

/// Planar kernel estimate at `p`.
pub fn intensity_2d(pattern: &PointPattern, h: Bandwidth, p: Point) -> Result<f64, Error> {
    Kernel2dEstimator::new(pattern, h).eval(p)
}

pub fn intensity_stationary(pattern: &PointPattern) -> f64 {
    pattern.len() as f64 / pattern.window().area()
}

/// Quadrature resolution for the integral term of the log-likelihood.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoglikConfig {
    /// Minimum number of midpoint cells along the orthogonal coordinate.
    pub min_cells: usize,
    /// Cells per bandwidth along the orthogonal coordinate; the cell count
    /// is the larger of this and `min_cells`.
    pub cells_per_bandwidth: f64,
    /// Cells per side for the planar estimator.
    pub grid_2d: usize,
}

impl Default for LoglikConfig {
    fn default() -> Self {
        Self { min_cells: 400, cells_per_bandwidth: 4.0, grid_2d: 200 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLikelihood {
    /// `sum_i log lambda(s_i) - \int_S lambda`, `-inf` if the estimate
    /// vanishes at some data point.
    pub value: f64,
    /// Number of data points where the estimate is zero.
    pub zero_intensity_points: usize,
}

impl LogLikelihood {
    pub fn is_finite(&self) -> bool {
        self.zero_intensity_points == 0 && self.value.is_finite()
    }
}

/// Poisson (composite) log-likelihood of `pattern` under `est`.
pub fn loglik(pattern: &PointPattern, est: &IntensityEstimator) -> LogLikelihood {
    loglik_with(pattern, est, &LoglikConfig::default())
}

pub fn loglik_with(pattern: &PointPattern, est: &IntensityEstimator, cfg: &LoglikConfig) -> LogLikelihood {
    let mut logs = Vec::with_capacity(pattern.len());
    let mut zeros = 0;
    let mut add = |lambda: f64| {
        if lambda > 0.0 {
            logs.push(libm::log(lambda));
        } else {
            zeros += 1;
        }
    };
    let integral = match est {
        IntensityEstimator::Substationary(e) => {
            for &p in pattern.points() {
                add(e.eval_unchecked(e.theta.orthogonal_coordinate(p)));
            }
            e.integral(e.cells_for(cfg))
        }
        IntensityEstimator::Kernel2d(e) => {
            for &p in pattern.points() {
                add(e.eval_unchecked(p));
            }
            e.integral(cfg.grid_2d)
        }
        IntensityEstimator::Stationary(e) => {
            for _ in pattern.points() {
                add(e.value);
            }
            e.value * e.window.area()
        }
    };
    // summation order independent of point order
    logs.sort_unstable_by(f64::total_cmp);
    let value = if zeros > 0 { f64::NEG_INFINITY } else { logs.iter().sum::<f64>() - integral };
    LogLikelihood { value, zero_intensity_points: zeros }
}

/// How the data term of the profile likelihood evaluates the estimate at
/// each observed point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProfileCriterion {
    /// Each point is left out of its own kernel sum. The in-sample kernel
    /// mass otherwise rewards directions with a long orthogonal range.
    #[default]
    LeaveOneOut,
    /// Each point contributes to its own kernel sum.
    PlugIn,
}

/// Profile log-likelihood of the substationary estimator fitted to
/// `pattern` itself, as a function of the direction.
pub fn profile_loglik(
    pattern: &PointPattern,
    theta: Subspace,
    h: Bandwidth,
    criterion: ProfileCriterion,
    cfg: &LoglikConfig,
) -> f64 {
    match criterion {
        ProfileCriterion::LeaveOneOut => cross_validation_score(pattern, theta, h, cfg),
        ProfileCriterion::PlugIn => {
            let est = IntensityEstimator::substationary(pattern, theta, h);
            loglik_with(pattern, &est, cfg).value
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub theta_hat: Subspace,
    pub h: Bandwidth,
    /// Profile criterion at `theta_hat`.
    pub loglik: f64,
    /// Coarse grid `(theta, loglik)` in ascending `theta`.
    pub trace: Vec<(Subspace, f64)>,
    /// The coarse grid was flat to within 1e-9.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    /// Number of equally spaced coarse grid angles over `[-pi/2, pi/2)`.
    pub grid_points: usize,
    /// Width of the final golden-section bracket, radians.
    pub tolerance: f64,
    pub criterion: ProfileCriterion,
    pub loglik: LoglikConfig,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            grid_points: 180,
            tolerance: 1e-4,
            criterion: ProfileCriterion::LeaveOneOut,
            loglik: LoglikConfig::default(),
        }
    }
}

/// Maximizes the profile log-likelihood over the direction for fixed `h`:
/// coarse grid search, then golden-section refinement between the grid
/// neighbours of the best grid angle. Ties go to the smallest angle.
pub fn fit_theta(pattern: &PointPattern, h: Bandwidth) -> Result<FitResult, Error> {
    fit_theta_with(pattern, h, &FitConfig::default())
}

pub fn fit_theta_with(pattern: &PointPattern, h: Bandwidth, cfg: &FitConfig) -> Result<FitResult, Error> {
    if pattern.len() < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: pattern.len() });
    }
    if cfg.grid_points < 3 {
        return Err(Error::InvalidParameter("fit grid needs at least 3 angles"));
    }
    let step = core::f64::consts::PI / cfg.grid_points as f64;
    let eval = |t: f64| profile_loglik(pattern, Subspace::new(t), h, cfg.criterion, &cfg.loglik);

    let mut trace = Vec::with_capacity(cfg.grid_points);
    let (mut best_t, mut best_ll) = (f64::NAN, f64::NEG_INFINITY);
    let mut worst_ll = f64::INFINITY;
    let half = (cfg.grid_points / 2) as f64;
    for k in 0..cfg.grid_points {
        // counted from the horizontal so an even grid holds 0 exactly
        let t = if k == 0 { -FRAC_PI_2 } else { (k as f64 - half) * step };
        let ll = eval(t);
        trace.push((Subspace::new(t), ll));
        if ll > best_ll || best_t.is_nan() {
            best_t = t;
            best_ll = ll;
        }
        worst_ll = worst_ll.min(ll);
    }
    let degenerate = !(best_ll - worst_ll >= 1e-9);

    let refined = golden_section_max(eval, best_t - step, best_t + step, cfg.tolerance);
    let (theta_hat, loglik) = if refined.value > best_ll {
        (Subspace::new(refined.x), refined.value)
    } else {
        (Subspace::new(best_t), best_ll)
    };
    Ok(FitResult { theta_hat, h, loglik, trace, degenerate })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthSelection {
    pub h: Bandwidth,
    /// Cross-validation score per candidate, in ascending bandwidth order.
    pub scores: Vec<(Bandwidth, f64)>,
}

/// Leave-one-out Poisson likelihood
/// `CV(h) = sum_i log lambda_{-i}(s_i) - \int_S lambda`.
pub fn cross_validation_score(pattern: &PointPattern, theta: Subspace, h: Bandwidth, cfg: &LoglikConfig) -> f64 {
    let est = SubstationaryEstimator::new(pattern, theta, h);
    let mut acc = 0.0;
    for i in 0..est.sorted_v.len() {
        let lambda = est.eval_leave_one_out(i);
        if lambda <= 0.0 {
            return f64::NEG_INFINITY;
        }
        acc += libm::log(lambda);
    }
    acc - est.integral(est.cells_for(cfg))
}

/// Picks the candidate maximizing [`cross_validation_score`]; ties go to
/// the smaller bandwidth.
pub fn select_bandwidth(pattern: &PointPattern, theta: Subspace, candidates: &[Bandwidth]) -> Result<BandwidthSelection, Error> {
    select_bandwidth_with(pattern, theta, candidates, &LoglikConfig::default())
}

pub fn select_bandwidth_with(
    pattern: &PointPattern,
    theta: Subspace,
    candidates: &[Bandwidth],
    cfg: &LoglikConfig,
) -> Result<BandwidthSelection, Error> {
    if candidates.is_empty() {
        return Err(Error::EmptyInput("bandwidth candidates"));
    }
    let mut sorted = candidates.to_vec();
    sorted.sort_by(|a, b| a.get().total_cmp(&b.get()));
    sorted.dedup();
    if sorted.len() == 1 {
        let score = cross_validation_score(pattern, theta, sorted[0], cfg);
        return Ok(BandwidthSelection { h: sorted[0], scores: alloc::vec![(sorted[0], score)] });
    }
    let scores: Vec<(Bandwidth, f64)> = sorted
        .iter()
        .map(|&h| (h, cross_validation_score(pattern, theta, h, cfg)))
        .collect();
    let mut best: Option<(Bandwidth, f64)> = None;
    for &(h, s) in &scores {
        if s.is_finite() && best.is_none_or(|(_, b)| s > b) {
            best = Some((h, s));
        }
    }
    match best {
        Some((h, _)) => Ok(BandwidthSelection { h, scores }),
        None => Err(Error::NoUsableBandwidth),
    }
}
