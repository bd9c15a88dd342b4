//! Golden-section search for a maximum of a one-dimensional function.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenMax {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
}

/// Shrinks `[lo, hi]` around a maximum of `f` until it is narrower than
/// `tol`, returning the best point evaluated. `f` is assumed unimodal on the
/// bracket; otherwise a local maximum is returned.
pub fn golden_section_max<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> GoldenMax {
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut evaluations = 2;
    let mut best = if fd > fc { (d, fd) } else { (c, fc) };
    while (b - a) > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
            if fc > best.1 || (fc == best.1 && c < best.0) {
                best = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
            if fd > best.1 {
                best = (d, fd);
            }
        }
        evaluations += 1;
    }
    GoldenMax { x: best.0, value: best.1, evaluations }
}
