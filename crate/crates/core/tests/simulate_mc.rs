//! Monte Carlo checks of the two generators. Tolerances are three Monte
//! Carlo standard errors unless stated otherwise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use substat_core::experiments::{compare_region_counts, Rect};
use substat_core::simulate::{beta_sampler, simulate_thomas_detailed};
use substat_core::{simulate_poisson_beta, simulate_thomas, PoissonBetaModel, RngStream, ThomasModel, Window};

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (m, xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0))
}

fn model(a: f64, z: f64) -> PoissonBetaModel {
    PoissonBetaModel::new(a, Window::unit_height(z).unwrap()).unwrap()
}

#[test]
fn poisson_count_mean() {
    let m = model(1.0, 1.0);
    let counts: Vec<f64> = (0..1000).map(|r| simulate_poisson_beta(&m, RngStream::new(5, r)).len() as f64).collect();
    let (mean, _) = mean_var(&counts);
    assert!((mean - 100.0).abs() < 3.0 * (100.0f64 / 1000.0).sqrt(), "{mean}");
}

#[test]
fn heights_follow_beta_moments() {
    for (a, var) in [(1.0, 1.0 / 12.0), (3.0, 1.0 / 28.0)] {
        let m = model(a, 10.0);
        let ys: Vec<f64> = (0..20)
            .flat_map(|r| simulate_poisson_beta(&m, RngStream::new(8, r)).into_points())
            .map(|p| p.y)
            .collect();
        let n = ys.len() as f64;
        let (mean, v) = mean_var(&ys);
        assert!((mean - 0.5).abs() < 3.0 * (v / n).sqrt(), "a={a}: mean {mean}");
        let m4 = ys.iter().map(|y| (y - mean).powi(4)).sum::<f64>() / n;
        let se_var = ((m4 - v * v) / n).sqrt();
        assert!((v - var).abs() < 3.0 * se_var, "a={a}: var {v} vs {var}");
    }
}

#[test]
fn beta_sampler_uniform_ks() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut xs: Vec<f64> = (0..10_000).map(|_| beta_sampler(1.0, &mut rng)).collect();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| (x - i as f64 / n).abs().max(((i + 1) as f64 / n - x).abs()))
        .fold(0.0, f64::max);
    // asymptotic critical value at alpha = 0.01
    assert!(d < 1.6276 / n.sqrt(), "D = {d}");
}

#[test]
fn beta_sampler_moments_and_symmetry() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let xs: Vec<f64> = (0..20_000).map(|_| beta_sampler(2.0, &mut rng)).collect();
    let n = xs.len() as f64;
    let (m, v) = mean_var(&xs);
    assert!((m - 0.5).abs() < 3.0 * (0.05 / n).sqrt());
    let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
    assert!((v - 0.05).abs() < 3.0 * ((m4 - v * v) / n).sqrt(), "{v}");
    assert!(xs.iter().all(|&x| x > 0.0 && x < 1.0));

    let below = (0..20_000).filter(|_| beta_sampler(3.0, &mut rng) < 0.5).count() as f64 / n;
    assert!((below - 0.5).abs() < 3.0 * (0.25 / n).sqrt(), "{below}");
}

// Beta(a, a) distribution functions for integer a
fn beta_cdf(a: u32, t: f64) -> f64 {
    match a {
        1 => t,
        2 => t * t * (3.0 - 2.0 * t),
        3 => t.powi(3) * (10.0 - 15.0 * t + 6.0 * t * t),
        _ => unreachable!(),
    }
}

#[test]
fn height_histogram_chi_square() {
    // chi-square(19) upper 1% point
    const CRITICAL: f64 = 36.191;
    for a in [2u32, 3] {
        let m = model(a as f64, 10.0);
        let mut bins = [0usize; 20];
        let mut total = 0usize;
        let mut rep = 0;
        while total < 100_000 {
            for p in simulate_poisson_beta(&m, RngStream::new(21, rep)).points() {
                bins[((p.y * 20.0) as usize).min(19)] += 1;
                total += 1;
            }
            rep += 1;
        }
        let stat: f64 = bins
            .iter()
            .enumerate()
            .map(|(k, &o)| {
                let e = total as f64 * (beta_cdf(a, (k + 1) as f64 / 20.0) - beta_cdf(a, k as f64 / 20.0));
                (o as f64 - e).powi(2) / e
            })
            .sum();
        assert!(stat < CRITICAL, "a={a}: chi2 {stat}");
        // and the count per replication matches 100 z
        let per_rep = total as f64 / rep as f64;
        assert!((per_rep - 1000.0).abs() < 3.0 * (1000.0 / rep as f64).sqrt(), "{per_rep}");
    }
}

#[test]
fn thomas_parent_and_total_counts() {
    let t = ThomasModel::new(model(1.0, 1.0), 5.0, 0.02).unwrap();
    let runs: Vec<_> = (0..1000).map(|r| simulate_thomas_detailed(&t, RngStream::new(13, r))).collect();
    let parents: Vec<f64> = runs.iter().map(|r| r.parents.len() as f64).collect();
    let (pm, pv) = mean_var(&parents);
    assert!((pm - 20.0).abs() < 3.0 * (pv / 1000.0).sqrt(), "parents {pm}");
    let totals: Vec<f64> = runs.iter().map(|r| r.offspring.len() as f64).collect();
    let (tm, _) = mean_var(&totals);
    assert!((92.0..=100.0).contains(&tm), "offspring {tm}");
    assert!(runs.iter().all(|r| r.offspring.points().iter().all(|&p| r.offspring.window().contains(p))));
}

#[test]
fn thomas_offspring_collapse_onto_parents() {
    let t = ThomasModel::new(model(2.0, 3.0), 5.0, 1e-9).unwrap();
    for r in 0..20 {
        let run = simulate_thomas_detailed(&t, RngStream::new(2, r));
        for p in run.offspring.points() {
            let d = run
                .parents
                .iter()
                .map(|q| (q.x - p.x).hypot(q.y - p.y))
                .fold(f64::INFINITY, f64::min);
            assert!(d < 1e-6);
        }
    }
}

#[test]
fn parent_buffer_adds_edge_clusters() {
    let base = model(1.0, 1.0);
    let plain = ThomasModel::new(base, 5.0, 0.02).unwrap();
    let buffered = plain.with_parent_buffer(0.08).unwrap();
    let mean = |m: &ThomasModel| {
        (0..1000).map(|r| simulate_thomas(m, RngStream::new(31, r)).len() as f64).sum::<f64>() / 1000.0
    };
    let (a, b) = (mean(&plain), mean(&buffered));
    assert!(b > a, "{b} <= {a}");
    assert!(plain.with_parent_buffer(-1.0).is_err());
}

#[test]
fn streams_are_reproducible_across_threads() {
    let m = model(2.0, 5.0);
    let t = ThomasModel::new(m, 5.0, 0.02).unwrap();
    let here = (simulate_poisson_beta(&m, RngStream::new(77, 9)), simulate_thomas(&t, RngStream::new(77, 9)));
    let there = std::thread::spawn(move || {
        (simulate_poisson_beta(&m, RngStream::new(77, 9)), simulate_thomas(&t, RngStream::new(77, 9)))
    })
    .join()
    .unwrap();
    assert_eq!(here, there);
}

#[test]
fn counts_invariant_under_horizontal_shift() {
    let a_region = [Rect::new(0.0, 0.2, 0.1, 0.3)];
    let b_region = [a_region[0].translate(0.5, 0.0)];
    for a in [1.0, 2.0, 3.0] {
        let m = model(a, 1.0);
        let cmp = compare_region_counts(
            (0..2000).map(|r| simulate_poisson_beta(&m, RngStream::new(40, r))),
            &a_region,
            &b_region,
        );
        assert!(cmp.z_score() < 3.0, "a={a}: {cmp:?}");
    }
}

#[test]
fn counts_depend_only_on_section_lengths() {
    let band = (0.35, 0.55);
    let split = [Rect::new(0.0, 0.25, band.0, band.1), Rect::new(0.6, 0.85, band.0, band.1)];
    let joined = [Rect::new(0.2, 0.7, band.0, band.1)];
    for a in [1.0, 2.0, 3.0] {
        let m = model(a, 1.0);
        let cmp = compare_region_counts(
            (0..2000).map(|r| simulate_poisson_beta(&m, RngStream::new(41, r))),
            &split,
            &joined,
        );
        assert!(cmp.z_score() < 3.0, "a={a}: {cmp:?}");
    }
}
