//! Standard normal density and distribution function.
//!
//! The distribution function goes through `erfc` so both tails keep full
//! relative precision; deep tails underflow to `0.0`, never NaN.

use core::f64::consts::FRAC_1_SQRT_2;

/// `1 / sqrt(2 pi)`
pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[inline]
pub fn pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * libm::exp(-0.5 * x * x)
}

/// `Phi(x) = P(Z <= x)`
#[inline]
pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail `1 - Phi(x)`.
#[inline]
pub fn sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// `Phi(b) - Phi(a)` without cancellation when both limits sit in the same
/// tail. Negative when `b < a`.
pub fn mass(a: f64, b: f64) -> f64 {
    if a > b {
        return -mass(b, a);
    }
    if a >= 0.0 {
        sf(a) - sf(b)
    } else if b <= 0.0 {
        cdf(b) - cdf(a)
    } else {
        1.0 - cdf(a) - sf(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        assert!((pdf(0.0) - 0.398_942_280_401_432_7).abs() < 1e-16);
        assert!((pdf(1.0) - 0.241_970_724_519_143_37).abs() < 1e-16);
        assert!((cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((cdf(1.96) - 0.975_002_104_851_779_5).abs() < 1e-15);
        assert!((cdf(-2.0) - 0.022_750_131_948_179_2).abs() < 1e-16);
        // Phi(-10) = 7.6198530241605e-24
        assert!((cdf(-10.0) / 7.619_853_024_160_47e-24 - 1.0).abs() < 1e-12);
        assert_eq!(cdf(-40.0), 0.0);
        assert_eq!(sf(40.0), 0.0);
        assert_eq!(cdf(40.0), 1.0);
    }

    #[test]
    fn mass_keeps_tail_precision() {
        let m = mass(8.0, 9.0);
        let expected = 6.219_831_985_865_787e-16;
        assert!((m / expected - 1.0).abs() < 1e-10, "{m}");
        assert!((mass(-9.0, -8.0) - m).abs() < 1e-30);
        assert!((mass(-1.0, 1.0) - 0.682_689_492_137_085_9).abs() < 1e-15);
        assert_eq!(mass(1.0, -1.0), -mass(-1.0, 1.0));
    }
}
