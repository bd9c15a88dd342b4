use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use substat_core::quadrature::Adaptive;
use substat_core::{chord_measure, v_range, Point, Subspace, Window};

#[test]
fn project_then_unproject_reconstructs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..1_000_000 {
        let th = Subspace::new(rng.random_range(-FRAC_PI_2..FRAC_PI_2));
        let p = Point::new(rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0));
        let (u, v) = th.project(p);
        let q = th.unproject(u, v);
        worst = worst.max((q.x - p.x).abs()).max((q.y - p.y).abs());
    }
    assert!(worst < 1e-12, "worst {worst:e}");
}

proptest! {
    #[test]
    fn projections_stay_in_range(
        theta in -FRAC_PI_2..FRAC_PI_2,
        z in 0.1f64..30.0,
        omega in 0.1f64..5.0,
        seed in any::<u64>(),
    ) {
        let th = Subspace::new(theta);
        let w = Window::new(z, omega).unwrap();
        let (lo, hi) = v_range(th, &w);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..1000 {
            let p = Point::new(rng.random_range(0.0..=z), rng.random_range(0.0..=omega));
            let v = th.orthogonal_coordinate(p);
            let slack = 1e-12 * (hi - lo);
            prop_assert!(v >= lo - slack && v <= hi + slack, "v={} not in [{}, {}]", v, lo, hi);
        }
        for c in w.corners() {
            let v = th.orthogonal_coordinate(c);
            prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
        }
    }

    #[test]
    fn normalized_angles_land_in_half_open_interval(theta in -50.0f64..50.0) {
        let t = Subspace::new(theta).theta();
        prop_assert!((-FRAC_PI_2..FRAC_PI_2).contains(&t));
        // same line: difference is a multiple of pi
        let k = (theta - t) / PI;
        prop_assert!((k - k.round()).abs() < 1e-9);
    }
}

fn chord_angles() -> Vec<f64> {
    let eps = 1e-7;
    vec![
        0.0,
        eps,
        -eps,
        -FRAC_PI_2,
        -FRAC_PI_2 + eps,
        FRAC_PI_2 - eps,
        FRAC_PI_4,
        -FRAC_PI_4,
        0.3,
        -1.1,
    ]
}

#[test]
fn chord_integrates_to_area() {
    let rule = Adaptive { abs_tol: 1e-13, max_pieces: 1 << 14 };
    for (z, omega) in [(1.0, 1.0), (10.0, 1.0), (2.0, 3.0), (0.5, 7.0)] {
        let w = Window::new(z, omega).unwrap();
        for &t in &chord_angles() {
            let th = Subspace::new(t);
            let (lo, hi) = v_range(th, &w);
            // kinks sit at the projected corners
            let mut breaks: Vec<f64> = w.corners().iter().map(|&c| th.orthogonal_coordinate(c)).collect();
            breaks.extend([lo, hi]);
            breaks.sort_by(f64::total_cmp);
            let total = rule.integrate(|v| chord_measure(th, &w, v), &breaks).unwrap();
            let rel = (total - z * omega).abs() / (z * omega);
            assert!(rel < 1e-9, "theta={t} z={z} omega={omega}: {total}");
        }
    }
}

#[test]
fn chord_is_trapezoidal() {
    let w = Window::new(4.0, 1.5).unwrap();
    for &t in &chord_angles() {
        let th = Subspace::new(t);
        let (lo, hi) = v_range(th, &w);
        let n = 4000;
        let values: Vec<f64> = (0..=n).map(|k| chord_measure(th, &w, lo + (hi - lo) * k as f64 / n as f64)).collect();
        let top = values.iter().cloned().fold(0.0, f64::max);
        let tol = 1e-9 * top.max(1.0);
        // rising, then flat at the maximum, then falling
        let mut phase = 0;
        for pair in values.windows(2) {
            let d = pair[1] - pair[0];
            match phase {
                0 if d < -tol => phase = 2,
                0 if (pair[1] - top).abs() <= tol => phase = 1,
                1 if d > tol => panic!("theta={t}: rises after plateau"),
                1 if d < -tol => phase = 2,
                2 if d > tol => panic!("theta={t}: rises while falling"),
                _ => {}
            }
        }
        // flat part sits at the plateau value
        let (s, c) = th.sin_cos();
        let plateau = if s == 0.0 {
            w.z()
        } else if c == 0.0 {
            w.omega()
        } else {
            (w.z() / c).min(w.omega() / s.abs())
        };
        assert!((top - plateau).abs() <= 1e-9 * plateau, "theta={t}: {top} vs {plateau}");
    }
}

#[test]
fn chord_examples() {
    let w = Window::new(10.0, 1.0).unwrap();
    assert_eq!(v_range(Subspace::HORIZONTAL, &w), (0.0, 1.0));
    let (lo, hi) = v_range(Subspace::VERTICAL, &w);
    assert!(lo.abs() < 1e-15 && (hi - 10.0).abs() < 1e-12);
    assert_eq!(chord_measure(Subspace::HORIZONTAL, &w, 0.5), 10.0);
    assert!((chord_measure(Subspace::VERTICAL, &w, 3.0) - 1.0).abs() < 1e-12);
}
