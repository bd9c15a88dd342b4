//! Seeded generators for the two reference processes: an inhomogeneous
//! Poisson process whose intensity follows a symmetric Beta density across
//! the window height, and the Thomas cluster process built on it.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};

use crate::error::Error;
use crate::geometry::{Point, Window};
use crate::pattern::PointPattern;

/// Expected number of points per unit of window width.
pub const DEFAULT_RATE: f64 = 100.0;

/// Independent, reproducible random stream.
///
/// Two streams with the same `(master_seed, stream_index)` produce identical
/// draws no matter which thread consumes them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl RngStream {
    pub const fn new(master_seed: u64, stream_index: u64) -> Self {
        Self { master_seed, stream_index }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// Poisson process on `[0, z] x [0, omega]` with intensity
/// `rate * f_a(y / omega) / omega`, `f_a` the Beta(a, a) density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonBetaModel {
    a: f64,
    window: Window,
    rate: f64,
}

impl PoissonBetaModel {
    pub fn new(a: f64, window: Window) -> Result<Self, Error> {
        Self::with_rate(a, window, DEFAULT_RATE)
    }

    pub fn with_rate(a: f64, window: Window, rate: f64) -> Result<Self, Error> {
        if !(a.is_finite() && a >= 1.0) {
            return Err(Error::InvalidParameter("Beta shape a must be >= 1"));
        }
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::InvalidParameter("rate must be positive"));
        }
        Ok(Self { a, window, rate })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// Expected total count, `rate * z`.
    pub fn expected_count(&self) -> f64 {
        self.rate * self.window.z()
    }

    /// True first-order intensity at height `y`.
    pub fn intensity_at_height(&self, y: f64) -> f64 {
        let omega = self.window.omega();
        self.rate * beta_symmetric_pdf(self.a, y / omega) / omega
    }

    pub fn intensity(&self, p: Point) -> f64 {
        self.intensity_at_height(p.y)
    }
}

/// Density of Beta(a, a) on `[0, 1]`.
pub fn beta_symmetric_pdf(a: f64, t: f64) -> f64 {
    if !(0.0..=1.0).contains(&t) {
        return 0.0;
    }
    if a == 1.0 {
        return 1.0;
    }
    let log_norm = 2.0 * libm::lgamma(a) - libm::lgamma(2.0 * a);
    if t == 0.0 || t == 1.0 {
        return 0.0;
    }
    libm::exp((a - 1.0) * (libm::log(t) + libm::log(1.0 - t)) - log_norm)
}

/// Thomas cluster process: parents from a Poisson-Beta process with
/// intensity divided by `gamma`, each with Poisson(`gamma`) offspring
/// displaced by isotropic Gaussian noise of scale `sigma`. Parents are not
/// part of the returned pattern and offspring outside the window are
/// discarded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThomasModel {
    base: PoissonBetaModel,
    gamma: f64,
    sigma: f64,
    parent_buffer: f64,
}

impl ThomasModel {
    pub fn new(base: PoissonBetaModel, gamma: f64, sigma: f64) -> Result<Self, Error> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidParameter("mean offspring count gamma must be positive"));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidParameter("offspring scale sigma must be positive"));
        }
        Ok(Self { base, gamma, sigma, parent_buffer: 0.0 })
    }

    /// Also draws parents within `buffer` of the left and right window edges
    /// so clusters straddling them are not thinned. The Beta intensity
    /// vanishes above and below the window, so only the horizontal edges
    /// need it. `0.0` (the default) keeps parents inside the window.
    pub fn with_parent_buffer(mut self, buffer: f64) -> Result<Self, Error> {
        if !(buffer.is_finite() && buffer >= 0.0) {
            return Err(Error::InvalidParameter("parent buffer must be >= 0"));
        }
        self.parent_buffer = buffer;
        Ok(self)
    }

    pub fn base(&self) -> &PoissonBetaModel {
        &self.base
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn parent_buffer(&self) -> f64 {
        self.parent_buffer
    }
}

/// Beta(a, a) draw by the ratio of two Gamma(a) variables.
pub fn beta_sampler<R: Rng + ?Sized>(a: f64, rng: &mut R) -> f64 {
    let g = Gamma::new(a, 1.0).expect("shape checked by caller");
    loop {
        let x: f64 = g.sample(rng);
        let y: f64 = g.sample(rng);
        let total = x + y;
        if total > 0.0 {
            return x / total;
        }
    }
}

fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let d = Poisson::new(mean).expect("finite positive mean");
    let k: f64 = d.sample(rng);
    k as usize
}

/// Poisson total, then i.i.d. locations with `x` uniform and `y / omega`
/// Beta(a, a).
fn draw_poisson_beta<R: Rng + ?Sized>(
    m: &PoissonBetaModel,
    mean: f64,
    x_lo: f64,
    x_hi: f64,
    rng: &mut R,
) -> Vec<Point> {
    let n = poisson_count(mean, rng);
    let omega = m.window.omega();
    (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            let x = x_lo + (x_hi - x_lo) * u;
            let y = omega * beta_sampler(m.a, rng);
            Point::new(x, y)
        })
        .collect()
}

pub fn simulate_poisson_beta(m: &PoissonBetaModel, stream: RngStream) -> PointPattern {
    let mut rng = stream.rng();
    simulate_poisson_beta_with(m, &mut rng)
}

pub fn simulate_poisson_beta_with<R: Rng + ?Sized>(m: &PoissonBetaModel, rng: &mut R) -> PointPattern {
    let z = m.window.z();
    let points = draw_poisson_beta(m, m.expected_count(), 0.0, z, rng);
    PointPattern::new(m.window, points).expect("samples lie in the window")
}

/// Parents and the retained offspring, for diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct ThomasRealization {
    pub parents: Vec<Point>,
    pub offspring: PointPattern,
    /// Offspring generated but dropped for falling outside the window.
    pub discarded: usize,
}

pub fn simulate_thomas(m: &ThomasModel, stream: RngStream) -> PointPattern {
    simulate_thomas_detailed(m, stream).offspring
}

pub fn simulate_thomas_detailed(m: &ThomasModel, stream: RngStream) -> ThomasRealization {
    let mut rng = stream.rng();
    let base = &m.base;
    let w = base.window;
    let b = m.parent_buffer;
    let parent_mean = base.rate / m.gamma * (w.z() + 2.0 * b);
    let parents = draw_poisson_beta(base, parent_mean, -b, w.z() + b, &mut rng);
    let mut offspring = Vec::with_capacity((parents.len() as f64 * m.gamma) as usize + 8);
    let mut discarded = 0;
    for parent in &parents {
        let k = poisson_count(m.gamma, &mut rng);
        for _ in 0..k {
            let dx: f64 = rng.sample(StandardNormal);
            let dy: f64 = rng.sample(StandardNormal);
            let p = Point::new(parent.x + m.sigma * dx, parent.y + m.sigma * dy);
            if w.contains(p) {
                offspring.push(p);
            } else {
                discarded += 1;
            }
        }
    }
    ThomasRealization {
        parents,
        offspring: PointPattern::new(w, offspring).expect("filtered to the window"),
        discarded,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_pdf_normalized() {
        for a in [1.0, 1.5, 2.0, 3.0] {
            let n = 20_000;
            let s: f64 = (0..n).map(|i| beta_symmetric_pdf(a, (i as f64 + 0.5) / n as f64)).sum();
            assert!((s / n as f64 - 1.0).abs() < 1e-4, "a={a}");
        }
        // Beta(2,2) density is 6 t (1 - t)
        assert!((beta_symmetric_pdf(2.0, 0.3) - 6.0 * 0.3 * 0.7).abs() < 1e-12);
    }

    #[test]
    fn stream_reproducible() {
        let m = PoissonBetaModel::new(2.0, Window::unit_height(3.0).unwrap()).unwrap();
        let a = simulate_poisson_beta(&m, RngStream::new(9, 4));
        let b = simulate_poisson_beta(&m, RngStream::new(9, 4));
        let c = simulate_poisson_beta(&m, RngStream::new(9, 5));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_bad_parameters() {
        let w = Window::unit_height(1.0).unwrap();
        assert!(PoissonBetaModel::new(0.5, w).is_err());
        let base = PoissonBetaModel::new(2.0, w).unwrap();
        assert!(ThomasModel::new(base, 0.0, 0.02).is_err());
        assert!(ThomasModel::new(base, 5.0, -1.0).is_err());
    }
}
