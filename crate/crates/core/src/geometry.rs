//! Planar geometry for a one-dimensional invariance direction inside a
//! rectangular observation window.
//!
//! A [`Subspace`] at angle `theta` is the line through the origin with
//! direction `(cos theta, sin theta)`. Every location `s = (x, y)` splits into
//! an along-line coordinate `u = x cos theta + y sin theta` and an orthogonal
//! coordinate `v = y cos theta - x sin theta`. Intensities that are invariant
//! along the line depend on `s` only through `v`.

use core::f64::consts::{FRAC_PI_2, PI};

use crate::error::Error;

/// Rectangular observation window `[0, z] x [0, omega]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    z: f64,
    omega: f64,
}

impl Window {
    pub fn new(z: f64, omega: f64) -> Result<Self, Error> {
        if !(z.is_finite() && z > 0.0) {
            return Err(Error::InvalidParameter("window width z must be positive and finite"));
        }
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidParameter("window height omega must be positive and finite"));
        }
        Ok(Self { z, omega })
    }

    /// Unit-height window of width `z`, as used by the simulation study.
    pub fn unit_height(z: f64) -> Result<Self, Error> {
        Self::new(z, 1.0)
    }

    #[inline]
    pub fn z(&self) -> f64 {
        self.z
    }

    #[inline]
    pub fn omega(&self) -> f64 {
        self.omega
    }

    #[inline]
    pub fn area(&self) -> f64 {
        self.z * self.omega
    }

    /// Closed containment test.
    #[inline]
    pub fn contains(&self, p: Point) -> bool {
        p.x >= 0.0 && p.x <= self.z && p.y >= 0.0 && p.y <= self.omega
    }

    pub fn corners(&self) -> [Point; 4] {
        [
            Point::new(0.0, 0.0),
            Point::new(self.z, 0.0),
            Point::new(0.0, self.omega),
            Point::new(self.z, self.omega),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// One-dimensional linear subspace `{(u cos theta, u sin theta)}` with
/// `theta` normalized into `[-pi/2, pi/2)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Subspace {
    theta: f64,
}

impl Subspace {
    /// The horizontal axis, `theta = 0`.
    pub const HORIZONTAL: Subspace = Subspace { theta: 0.0 };
    /// The vertical axis, `theta = -pi/2`.
    pub const VERTICAL: Subspace = Subspace { theta: -FRAC_PI_2 };

    /// Builds a subspace from any finite angle in radians. `theta` and
    /// `theta + k*pi` give the same subspace.
    pub fn new(theta: f64) -> Self {
        Self { theta: normalize_angle(theta) }
    }

    pub fn from_degrees(degrees: f64) -> Self {
        Self::new(degrees.to_radians())
    }

    #[inline]
    pub fn theta(&self) -> f64 {
        self.theta
    }

    #[inline]
    pub fn degrees(&self) -> f64 {
        self.theta.to_degrees()
    }

    /// `(sin theta, cos theta)`, exact on the two axis-aligned subspaces.
    #[inline]
    pub fn sin_cos(&self) -> (f64, f64) {
        if self.theta == 0.0 {
            (0.0, 1.0)
        } else if self.theta == -FRAC_PI_2 {
            (-1.0, 0.0)
        } else {
            (libm::sin(self.theta), libm::cos(self.theta))
        }
    }

    /// Coordinates `(u, v)` of `p` along the subspace and along its
    /// orthogonal complement.
    #[inline]
    pub fn project(&self, p: Point) -> (f64, f64) {
        let (s, c) = self.sin_cos();
        (p.x * c + p.y * s, p.y * c - p.x * s)
    }

    /// Orthogonal coordinate `v = y cos theta - x sin theta`.
    #[inline]
    pub fn orthogonal_coordinate(&self, p: Point) -> f64 {
        let (s, c) = self.sin_cos();
        p.y * c - p.x * s
    }

    /// Inverse of [`Subspace::project`].
    #[inline]
    pub fn unproject(&self, u: f64, v: f64) -> Point {
        let (s, c) = self.sin_cos();
        Point::new(u * c - v * s, u * s + v * c)
    }
}

/// Maps an angle into `[-pi/2, pi/2)`; `+pi/2` maps to `-pi/2`.
pub fn normalize_angle(theta: f64) -> f64 {
    if (-FRAC_PI_2..FRAC_PI_2).contains(&theta) {
        return theta;
    }
    let mut t = libm::fmod(theta + FRAC_PI_2, PI);
    if t < 0.0 {
        t += PI;
    }
    // fmod can return exactly PI after the shift for tiny negative inputs
    if t >= PI {
        t -= PI;
    }
    t - FRAC_PI_2
}

/// Image `[v_min, v_max]` of the window under the orthogonal projection.
pub fn v_range(theta: Subspace, w: &Window) -> (f64, f64) {
    let (s, c) = theta.sin_cos();
    let shift = -w.z() * s;
    (shift.min(0.0), w.omega() * c + shift.max(0.0))
}

/// Parameter interval `[t_lo, t_hi]` of the line `v * (-sin, cos) + t * (cos, sin)`
/// inside the window, by clipping against both slabs.
fn clip_line(theta: Subspace, w: &Window, v: f64) -> Option<(f64, f64)> {
    let (s, c) = theta.sin_cos();
    let origin = Point::new(-v * s, v * c);
    let mut t_lo = f64::NEG_INFINITY;
    let mut t_hi = f64::INFINITY;
    for (o, d, hi) in [(origin.x, c, w.z()), (origin.y, s, w.omega())] {
        if d == 0.0 {
            if o < 0.0 || o > hi {
                return None;
            }
        } else {
            let (a, b) = ((0.0 - o) / d, (hi - o) / d);
            let (a, b) = if a <= b { (a, b) } else { (b, a) };
            t_lo = t_lo.max(a);
            t_hi = t_hi.min(b);
        }
    }
    (t_hi >= t_lo).then_some((t_lo, t_hi))
}

/// Length of the intersection of the line `{s : v(s) = v}` with the window.
pub fn chord_measure(theta: Subspace, w: &Window, v: f64) -> f64 {
    clip_line(theta, w, v).map_or(0.0, |(lo, hi)| hi - lo)
}

/// Midpoint of the chord at orthogonal offset `v`, `None` outside the range.
pub fn chord_midpoint(theta: Subspace, w: &Window, v: f64) -> Option<Point> {
    let (lo, hi) = clip_line(theta, w, v)?;
    let p = theta.unproject(0.5 * (lo + hi), v);
    // rounding can leave the midpoint a hair outside
    Some(Point::new(p.x.clamp(0.0, w.z()), p.y.clamp(0.0, w.omega())))
}

/// The chord length as a function of `v` is a trapezoid: zero at `knots[0]`,
/// rising linearly to `plateau` at `knots[1]`, flat until `knots[2]`, falling
/// back to zero at `knots[3]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChordProfile {
    pub knots: [f64; 4],
    pub plateau: f64,
}

impl ChordProfile {
    pub fn new(theta: Subspace, w: &Window) -> Self {
        let (s, c) = theta.sin_cos();
        let (z, omega) = (w.z(), w.omega());
        if s == 0.0 {
            return Self { knots: [0.0, 0.0, omega, omega], plateau: z };
        }
        if c == 0.0 {
            // theta = -pi/2: v = x
            return Self { knots: [0.0, 0.0, z, z], plateau: omega };
        }
        let a = -z * s;
        let b = omega * c;
        let mut corners = [0.0, a, b, a + b];
        corners.sort_unstable_by(f64::total_cmp);
        let plateau = (z / c).min(omega / s.abs());
        Self { knots: corners, plateau }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.knots[0], self.knots[3])
    }

    /// Linear segments `(start, end, value_at_start, value_at_end)`.
    pub fn segments(&self) -> [(f64, f64, f64, f64); 3] {
        let [k0, k1, k2, k3] = self.knots;
        let p = self.plateau;
        [(k0, k1, 0.0, p), (k1, k2, p, p), (k2, k3, p, 0.0)]
    }

    pub fn eval(&self, v: f64) -> f64 {
        let [k0, k1, k2, k3] = self.knots;
        if v < k0 || v > k3 {
            0.0
        } else if v < k1 {
            self.plateau * (v - k0) / (k1 - k0)
        } else if v <= k2 {
            self.plateau
        } else {
            self.plateau * (k3 - v) / (k3 - k2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_PI_4, FRAC_PI_6, SQRT_2};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn projection_examples() {
        let p = Point::new(3.0, 0.7);
        assert_eq!(Subspace::new(0.0).project(p).1, 0.7);
        assert_eq!(Subspace::new(-FRAC_PI_2).project(p).1, 3.0);
        let (_, v) = Subspace::new(FRAC_PI_4).project(Point::new(1.0, 1.0));
        assert!(v.abs() < 1e-15);
    }

    #[test]
    fn normalization() {
        assert_eq!(Subspace::new(FRAC_PI_2).theta(), -FRAC_PI_2);
        assert_eq!(Subspace::new(-FRAC_PI_2).theta(), -FRAC_PI_2);
        assert!(close(Subspace::new(0.3 + PI).theta(), 0.3, 1e-12));
        assert!(close(Subspace::new(0.3 - 3.0 * PI).theta(), 0.3, 1e-12));
        assert!(close(Subspace::new(1.2).theta(), 1.2, 0.0));
        let t = Subspace::new(-1e-300).theta();
        assert!((-FRAC_PI_2..FRAC_PI_2).contains(&t));
    }

    #[test]
    fn v_range_examples() {
        let w = Window::new(2.0, 1.0).unwrap();
        assert_eq!(v_range(Subspace::new(0.0), &w), (0.0, 1.0));
        let (lo, hi) = v_range(Subspace::new(FRAC_PI_6), &w);
        assert!(close(lo, -1.0, 1e-15) && close(hi, 3f64.sqrt() / 2.0, 1e-15));
        assert_eq!(v_range(Subspace::VERTICAL, &w), (0.0, 2.0));
    }

    #[test]
    fn chord_examples() {
        let w = Window::new(5.0, 1.0).unwrap();
        assert_eq!(chord_measure(Subspace::HORIZONTAL, &w, 0.5), 5.0);
        let unit = Window::new(1.0, 1.0).unwrap();
        assert!(close(chord_measure(Subspace::new(FRAC_PI_4), &unit, 0.0), SQRT_2, 1e-12));
        let w = Window::new(2.0, 1.0).unwrap();
        let th = Subspace::new(FRAC_PI_6);
        let (lo, hi) = v_range(th, &w);
        assert!(chord_measure(th, &w, lo) < 1e-12);
        assert!(chord_measure(th, &w, hi) < 1e-12);
        assert_eq!(chord_measure(th, &w, hi + 0.1), 0.0);
    }

    #[test]
    fn profile_matches_clipping() {
        let windows = [(1.0, 1.0), (10.0, 1.0), (2.0, 3.0), (0.3, 7.0)];
        for &(z, om) in &windows {
            let w = Window::new(z, om).unwrap();
            for k in 0..=72 {
                let th = Subspace::from_degrees(-90.0 + 2.5 * k as f64);
                let prof = ChordProfile::new(th, &w);
                let (lo, hi) = v_range(th, &w);
                assert!(close(prof.support().0, lo, 1e-12) && close(prof.support().1, hi, 1e-12));
                for j in 1..100 {
                    let v = lo + (hi - lo) * j as f64 / 100.0;
                    let a = chord_measure(th, &w, v);
                    let b = prof.eval(v);
                    assert!(close(a, b, 1e-9 * (1.0 + a)), "theta={} v={v}: {a} vs {b}", th.degrees());
                }
            }
        }
    }

    #[test]
    fn window_rejects_nonpositive() {
        assert!(Window::new(0.0, 1.0).is_err());
        assert!(Window::new(1.0, -1.0).is_err());
        assert!(Window::new(f64::NAN, 1.0).is_err());
    }
}
