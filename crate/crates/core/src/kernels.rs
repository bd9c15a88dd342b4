//! Gaussian smoothing kernels and Berman-Diggle edge corrections.
//!
//! The substationary correction at offset `v` is the kernel mass the window
//! carries along the orthogonal direction,
//! `C(v) = \int chord(v') K_h(v' - v) dv'`. Because the chord profile is a
//! trapezoid, the integral splits into three linear-times-Gaussian pieces
//! with closed forms in `Phi` and `phi`. [`correction_substat_quadrature`]
//! evaluates the same integral numerically against the clipped chord and
//! serves as the reference for the closed form.

use alloc::vec::Vec;

use crate::error::Error;
use crate::geometry::{chord_measure, v_range, ChordProfile, Point, Subspace, Window};
use crate::normal;
use crate::quadrature::{gauss_legendre5, Adaptive};

/// Smoothing bandwidth, in window length units.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Bandwidth(f64);

impl Bandwidth {
    pub fn new(h: f64) -> Result<Self, Error> {
        if h.is_finite() && h > 0.0 {
            Ok(Self(h))
        } else {
            Err(Error::InvalidParameter("bandwidth must be positive and finite"))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelSpec {
    #[default]
    Gaussian,
}

impl KernelSpec {
    /// Scaled one-dimensional kernel `K(t / h) / h`.
    #[inline]
    pub fn eval_1d(self, h: Bandwidth, t: f64) -> f64 {
        match self {
            KernelSpec::Gaussian => normal::pdf(t / h.0) / h.0,
        }
    }
}

/// `phi(t / h) / h`
#[inline]
pub fn kernel_1d(h: Bandwidth, t: f64) -> f64 {
    KernelSpec::Gaussian.eval_1d(h, t)
}

/// Kernel support is truncated at this many bandwidths in the numerical
/// routines; the Gaussian tail mass beyond it is below 1e-32.
pub(crate) const TRUNCATION: f64 = 12.0;

/// Segments narrower than this fraction of `h` are integrated by
/// Gauss-Legendre instead of the closed form, whose terms cancel there.
const SLIVER: f64 = 0.1;

/// `\int_p^q f(v') K_h(v' - v) dv'` for `f` linear from `fp` to `fq`.
fn linear_segment(p: f64, q: f64, fp: f64, fq: f64, h: f64, v: f64) -> f64 {
    let width = q - p;
    if width <= 0.0 {
        return 0.0;
    }
    let slope = (fq - fp) / width;
    if width < SLIVER * h {
        return gauss_legendre5(
            |t| (fp + slope * (t - p)) * normal::pdf((t - v) / h) / h,
            p,
            q,
        );
    }
    let a = (p - v) / h;
    let b = (q - v) / h;
    let m = normal::mass(a, b);
    let first_moment = (v - p) * m + h * (normal::pdf(a) - normal::pdf(b));
    fp * m + slope * first_moment
}

/// Closed-form substationary edge correction `C_h(v)` for any angle and
/// window.
pub fn correction_substat_closed(theta: Subspace, w: &Window, h: Bandwidth, v: f64) -> f64 {
    correction_from_profile(&ChordProfile::new(theta, w), h, v)
}

pub(crate) fn correction_from_profile(profile: &ChordProfile, h: Bandwidth, v: f64) -> f64 {
    let h = h.get();
    let [k0, k1, k2, k3] = profile.knots;
    if k1 == k0 && k3 == k2 {
        // axis-aligned: a single flat piece
        return profile.plateau * normal::mass((k1 - v) / h, (k2 - v) / h);
    }
    profile
        .segments()
        .iter()
        .map(|&(p, q, fp, fq)| linear_segment(p, q, fp, fq, h, v))
        .sum()
}

/// Substationary edge correction by adaptive quadrature of the clipped chord
/// length against the kernel.
pub fn correction_substat_quadrature(
    theta: Subspace,
    w: &Window,
    h: Bandwidth,
    v: f64,
) -> Result<f64, Error> {
    correction_substat_quadrature_with(theta, w, h, v, &Adaptive::default())
}

pub fn correction_substat_quadrature_with(
    theta: Subspace,
    w: &Window,
    h: Bandwidth,
    v: f64,
    rule: &Adaptive,
) -> Result<f64, Error> {
    let hh = h.get();
    let (lo, hi) = v_range(theta, w);
    let a = lo.max(v - TRUNCATION * hh);
    let b = hi.min(v + TRUNCATION * hh);
    if a >= b {
        return Ok(0.0);
    }
    let mut breaks: Vec<f64> = Vec::with_capacity(16);
    breaks.push(a);
    breaks.push(b);
    for c in w.corners() {
        breaks.push(theta.orthogonal_coordinate(c));
    }
    for k in [-4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0] {
        breaks.push(v + k * hh);
    }
    breaks.retain(|x| *x >= a && *x <= b);
    breaks.sort_unstable_by(f64::total_cmp);
    breaks.dedup();
    rule.integrate(|t| chord_measure(theta, w, t) * kernel_1d(h, t - v), &breaks)
}

/// Two-dimensional correction `C_h(s) = \int_S K_h(s' - s) ds'` for the
/// isotropic Gaussian product kernel.
pub fn correction_2d(w: &Window, h: Bandwidth, p: Point) -> f64 {
    let h = h.get();
    let mx = normal::mass(-p.x / h, (w.z() - p.x) / h);
    let my = normal::mass(-p.y / h, (w.omega() - p.y) / h);
    mx * my
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::FRAC_PI_2;

    fn bw(h: f64) -> Bandwidth {
        Bandwidth::new(h).unwrap()
    }

    #[test]
    fn kernel_values() {
        assert!((kernel_1d(bw(1.0), 0.0) - 0.398_942_280_401_432_7).abs() < 1e-15);
        assert!((kernel_1d(bw(0.5), 0.5) - 0.483_941_449_038_286_7).abs() < 1e-15);
        let tiny = kernel_1d(bw(0.1), 1.0);
        assert!((tiny / 7.694_598_626_706_42e-22 - 1.0).abs() < 1e-12, "{tiny}");
        assert_eq!(kernel_1d(bw(0.3), 0.2), kernel_1d(bw(0.3), -0.2));
    }

    #[test]
    fn bandwidth_rejects_nonpositive() {
        assert!(Bandwidth::new(0.0).is_err());
        assert!(Bandwidth::new(-1.0).is_err());
        assert!(Bandwidth::new(f64::INFINITY).is_err());
    }

    #[test]
    fn axis_aligned_closed_forms() {
        let w = Window::new(3.0, 1.0).unwrap();
        let c = correction_substat_closed(Subspace::HORIZONTAL, &w, bw(0.1), 0.2);
        assert!((c - 3.0 * (normal::cdf(8.0) - normal::cdf(-2.0))).abs() < 1e-14);
        assert!((c - 2.931_749_604_155_460).abs() < 1e-9, "{c}");
        let w = Window::new(2.0, 1.0).unwrap();
        let c = correction_substat_closed(Subspace::new(-FRAC_PI_2), &w, bw(0.1), 1.0);
        assert!((c - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quadrature_interior_point() {
        let w = Window::new(1.0, 1.0).unwrap();
        let c = correction_substat_quadrature(Subspace::HORIZONTAL, &w, bw(0.05), 0.5).unwrap();
        assert!((c - normal::mass(-10.0, 10.0)).abs() < 1e-10);
        let c = correction_substat_quadrature(Subspace::HORIZONTAL, &w, bw(1e-4), 0.5).unwrap();
        assert!((c - 1.0).abs() < 1e-9);
    }

    #[test]
    fn corner_keeps_a_quarter() {
        let w = Window::new(1.0, 1.0).unwrap();
        let c = correction_2d(&w, bw(0.01), Point::new(0.0, 0.0));
        assert!((c - 0.25).abs() < 1e-12);
        let big = Window::new(10.0, 10.0).unwrap();
        let c = correction_2d(&big, bw(0.1), Point::new(5.0, 5.0));
        assert!((c - 1.0).abs() < 1e-12);
    }
}
