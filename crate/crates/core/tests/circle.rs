use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wgl_core::quadrature::{exact_node_count, series_on_grid};
use wgl_core::{
    build_prime_tables, count_big_r, e, weighted_interval_integral, fourth_moment_folded, fourth_moment_quadrature, fourth_moment_scheme,
    integrate, l2_error_moment, laplace_check, laplace_window_error, mean_square_s_minus_t,
    parseval_fourth_moment_s2, parseval_second_moment, truncation_cutoff, AdaptiveOptions, CirclePipeline,
    DampedSeries, FnIntegrand, QuadratureScheme, SeriesPair,
};

fn dyadic() -> QuadratureScheme {
    QuadratureScheme::dyadic(AdaptiveOptions::default())
}

#[test]
fn reconstruction_at_random_n() {
    let specs = SeriesPair::for_tolerance(1000, 1e-14).unwrap();
    let table = build_prime_tables(specs.table_limit()).unwrap();
    let pipe = CirclePipeline::new(specs, &table).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut ns: Vec<u64> = (0..20).map(|_| rng.gen_range(2..=2000)).collect();
    ns.extend([2, 3, 4, 10]);
    let got = pipe.reconstruct(&ns).unwrap();
    for (&n, &v) in ns.iter().zip(&got) {
        let want = count_big_r(n, &table).unwrap();
        if want == 0.0 {
            assert!(v.abs() < 1e-10, "R({n}) = 0, got {v}");
        } else {
            assert!((v - want).abs() < 1e-8 * want, "R({n}): {v} vs {want}");
        }
    }
}

#[test]
fn reconstruction_refuses_unresolved_n() {
    let specs = SeriesPair::for_tolerance(100, 1e-14).unwrap();
    let table = build_prime_tables(specs.table_limit()).unwrap();
    let pipe = CirclePipeline::new(specs, &table).unwrap();
    assert!(pipe.reconstruct(&[specs.exact_range() + 1]).is_err());
}

#[test]
fn parseval_second_moment_by_quadrature() {
    let spec = truncation_cutoff(1, 1000, 1e-14).unwrap();
    let table = build_prime_tables(spec.cutoff).unwrap();
    let series = DampedSeries::new(&spec, &table).unwrap();
    // Σ Λ(n)² e^{-2n/N} straight from the table
    let direct: f64 = (1..=spec.cutoff).map(|n| (table.lambda(n) * (-(n as f64) / 1000.0).exp()).powi(2)).sum();
    let coeff = parseval_second_moment(1, &spec, &table).unwrap();
    assert!((coeff - direct).abs() < 1e-12 * direct);
    // equispaced rule on P >= 2·(2M) + 2 nodes, values from one FFT
    let p = exact_node_count(2 * series.bandwidth()).unwrap();
    let grid = series_on_grid(&series, p).unwrap();
    let q: f64 = grid.iter().map(|v| v.norm_sqr()).sum::<f64>() / p as f64;
    assert!((q - coeff).abs() < 1e-9 * coeff, "{q} vs {coeff}");
}

#[test]
fn parseval_through_the_generic_integrator() {
    let spec = truncation_cutoff(1, 100, 1e-14).unwrap();
    let table = build_prime_tables(spec.cutoff).unwrap();
    let series = DampedSeries::new(&spec, &table).unwrap();
    let coeff = parseval_second_moment(1, &spec, &table).unwrap();
    let f = FnIntegrand::band_limited(|a| Complex64::new(series.eval(a).norm_sqr(), 0.0), 2 * series.bandwidth());
    let scheme = QuadratureScheme::equispaced(2 * series.bandwidth()).unwrap();
    let q = integrate(&f, -0.5, 0.5, &scheme).unwrap();
    assert!((q.value.re - coeff).abs() < 1e-9 * coeff, "{} vs {coeff}", q.value.re);
    assert!(integrate(&f, -0.25, 0.5, &scheme).is_err());
    let loose = QuadratureScheme::equispaced(series.bandwidth()).unwrap();
    assert!(integrate(&f, -0.5, 0.5, &loose).is_err());
}

#[test]
fn grid_values_match_pointwise_evaluation() {
    let spec = truncation_cutoff(2, 300, 1e-14).unwrap();
    let table = build_prime_tables(spec.cutoff).unwrap();
    let series = DampedSeries::new(&spec, &table).unwrap();
    let p = 16384;
    let grid = series_on_grid(&series, p).unwrap();
    for j in [0usize, 1, 17, 8192, 16383] {
        let want = series.eval(j as f64 / p as f64);
        assert!((grid[j] - want).norm() < 1e-12 * series.coefficient_l1());
    }
}

#[test]
fn fourth_moment_identity_and_growth() {
    let n12 = 1u64 << 12;
    let spec = truncation_cutoff(2, n12, 1e-14).unwrap();
    let table = build_prime_tables(spec.cutoff).unwrap();
    let scheme = fourth_moment_scheme(&spec).unwrap();
    let quad = fourth_moment_quadrature(n12, &spec, &table, &scheme).unwrap();
    let folded = fourth_moment_folded(n12, &spec, &table, &scheme).unwrap();
    let par = parseval_fourth_moment_s2(n12, &spec, &table).unwrap();
    assert!((quad - par).abs() < 1e-9 * par);
    assert!((folded - quad).abs() < 1e-12 * quad);

    let n16 = 1u64 << 16;
    let spec16 = truncation_cutoff(2, n16, 1e-14).unwrap();
    let table16 = build_prime_tables(spec16.cutoff).unwrap();
    let par16 = parseval_fourth_moment_s2(n16, &spec16, &table16).unwrap();
    let g = |v: f64, n: f64| v / (n * n.ln().powi(2));
    let ratio = g(par16, n16 as f64) / g(par, n12 as f64);
    assert!((0.25..=4.0).contains(&ratio), "growth ratio {ratio}");
}

#[test]
fn fourth_moment_rejects_a_coarse_scheme() {
    let spec = truncation_cutoff(2, 256, 1e-14).unwrap();
    let table = build_prime_tables(spec.cutoff).unwrap();
    let coarse = QuadratureScheme::equispaced(spec.bandwidth()).unwrap();
    assert!(fourth_moment_quadrature(256, &spec, &table, &coarse).is_err());
}

#[test]
fn laplace_ladder_stays_flat() {
    let scheme = dyadic();
    for (mu, ceiling) in [(1.0, 0.102), (2.0, 2.1e-5)] {
        let errs: Vec<f64> = (0..6)
            .map(|k| laplace_check(1000 << k, 1000, mu, &scheme).unwrap().scaled_err)
            .collect();
        assert!(errs.iter().all(|&e| e < ceiling), "μ {mu}: {errs:?}");
        let first = errs[..3].iter().cloned().fold(0.0, f64::max);
        let second = errs[3..].iter().cloned().fold(0.0, f64::max);
        assert!(second <= 2.0 * first, "μ {mu}: {errs:?}");
    }
}

#[test]
fn laplace_unit_power_error_is_the_period_boundary() {
    // for μ = 1 the truncation to one period costs exactly 1/(π² n) + O(1/(nN))
    let r = laplace_check(4000, 1000, 1.0, &dyadic()).unwrap();
    assert!((r.scaled_err - 1.0 / (PI * PI)).abs() < 1e-3);
}

#[test]
fn wider_windows_shrink_the_laplace_error() {
    let scheme = dyadic();
    let errs: Vec<f64> = [1.0, 3.0, 5.0]
        .iter()
        .map(|&w| laplace_window_error(1000, 1000, 1.0, w, &scheme).unwrap())
        .collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
}

#[test]
fn decomposition_adds_up() {
    let specs = SeriesPair::for_tolerance(1000, 1e-14).unwrap();
    let table = build_prime_tables(specs.table_limit()).unwrap();
    let pipe = CirclePipeline::new(specs, &table).unwrap();
    let rep = pipe.decompose(100, 1e-10).unwrap();
    assert!(rep.max_rel_gap <= 1e-6, "{rep:?}");
    assert!((rep.unsplit.re - rep.direct).abs() < 1e-9 * rep.direct);
    assert!(!rep.unreliable);
    // I₁ against (π/4) Σ n e^{-n/N} over the window, the full-line Laplace value
    let nf = 1000.0;
    let laplace: f64 = (1001..=1100).map(|n| PI / 4.0 * n as f64 * (-(n as f64) / nf).exp()).sum();
    assert!((rep.i1.re - laplace).abs() < 1e-4 * laplace, "{} vs {laplace}", rep.i1.re);
    let ratio = rep.i1.re / rep.i1_reference;
    assert!((0.995..=1.0).contains(&ratio), "I₁ ratio {ratio}");
}

#[test]
fn l2_moment_grows_with_the_window() {
    let spec = truncation_cutoff(1, 200, 1e-14).unwrap();
    let table = build_prime_tables(spec.cutoff).unwrap();
    let scheme = dyadic();
    let vals: Vec<f64> = [0.01, 0.1, 0.5]
        .iter()
        .map(|&xi| l2_error_moment(200, 1, xi, &spec, &table, &scheme).unwrap().value)
        .collect();
    assert!(vals[0] > 0.0 && vals[0] < vals[1] && vals[1] < vals[2], "{vals:?}");
}

/// Σ_{j,j'} c_j c_j' sin(2π(k_j - k_j')w) / (π(k_j - k_j')), diagonal 2w.
fn mean_square_oracle(big_n: u64, ell: u32, h: u64) -> f64 {
    let table = build_prime_tables(big_n).unwrap();
    let w = 1.0 / h as f64;
    let mut terms = Vec::new();
    let mut n = 1u64;
    while n.pow(ell) <= big_n {
        let c = if table.is_prime(n) { (n as f64).ln() } else { 0.0 } - 1.0;
        terms.push((n.pow(ell) as f64, c));
        n += 1;
    }
    let mut total = 0.0;
    for &(k, c) in &terms {
        for &(k2, c2) in &terms {
            let d = k - k2;
            let kernel = if d == 0.0 { 2.0 * w } else { (2.0 * PI * d * w).sin() / (PI * d) };
            total += c * c2 * kernel;
        }
    }
    total
}

#[test]
fn mean_square_matches_double_sum() {
    let scheme = dyadic();
    for &(n, ell, h) in &[(1000u64, 1u32, 100u64), (1000, 2, 100), (4000, 2, 500)] {
        let table = build_prime_tables(n).unwrap();
        let got = mean_square_s_minus_t(n, ell, h, &table, &scheme).unwrap();
        let want = mean_square_oracle(n, ell, h);
        assert!((got.value - want).abs() < 1e-8 * want, "N {n} ℓ {ell} H {h}: {} vs {want}", got.value);
        assert!(!got.unreliable && !got.out_of_range);
    }
}

#[test]
fn orthogonality_up_to_a_thousand() {
    for bandwidth in [1000u64, 1500] {
        let scheme = QuadratureScheme::equispaced(bandwidth).unwrap();
        for k in -1000i64..=1000 {
            let f = FnIntegrand::band_limited(move |a| e(k as f64 * a), k.unsigned_abs());
            let v = integrate(&f, -0.5, 0.5, &scheme).unwrap().value;
            let want = if k == 0 { 1.0 } else { 0.0 };
            assert!((v - Complex64::new(want, 0.0)).norm() < 1e-13, "k {k}: {v}");
        }
    }
}

#[test]
fn l2_moment_growth_law() {
    let scheme = dyadic();
    for ell in [1u32, 2] {
        let normalized: Vec<f64> = [250u64, 500, 1000]
            .iter()
            .map(|&n| {
                let spec = truncation_cutoff(ell, n, 1e-14).unwrap();
                let table = build_prime_tables(spec.cutoff).unwrap();
                let r = l2_error_moment(n, ell, 0.5, &spec, &table, &scheme).unwrap();
                assert!(!r.unreliable, "ℓ {ell} N {n}");
                let nf = n as f64;
                r.value / (nf.powf(1.0 / ell as f64) * 0.5 * nf.ln().powi(2))
            })
            .collect();
        let hi = normalized.iter().cloned().fold(0.0, f64::max);
        let lo = normalized.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(lo > 0.0 && hi <= 4.0 * lo, "ℓ {ell}: {normalized:?}");
    }
}

#[test]
fn mean_square_growth_law() {
    let scheme = dyadic();
    let normalized: Vec<f64> = [10_000u64, 20_000, 40_000]
        .iter()
        .map(|&n| {
            let table = build_prime_tables(n).unwrap();
            let r = mean_square_s_minus_t(n, 2, n, &table, &scheme).unwrap();
            assert!(!r.unreliable && !r.out_of_range);
            let (nf, l) = (n as f64, (n as f64).ln());
            // N^{1/2}L²/H + H N^{-1} L² at H = N
            r.value / (nf.sqrt() * l * l / nf + l * l)
        })
        .collect();
    let hi = normalized.iter().cloned().fold(0.0, f64::max);
    let lo = normalized.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(lo > 0.0 && hi <= 4.0 * lo, "{normalized:?}");
}

#[test]
fn mean_square_over_the_widest_window() {
    let table = build_prime_tables(1000).unwrap();
    let r = mean_square_s_minus_t(1000, 1, 1000, &table, &dyadic()).unwrap();
    let want = mean_square_oracle(1000, 1, 1000);
    assert!((r.value - want).abs() < 1e-8 * want);
}

#[test]
fn weighted_interval_sum_against_the_sieve() {
    let specs = SeriesPair::for_tolerance(100, 1e-14).unwrap();
    let table = build_prime_tables(specs.table_limit()).unwrap();
    let v = weighted_interval_integral(10, &specs, &table).unwrap();
    let direct: f64 = (101..=110u64)
        .map(|n| (-(n as f64) / 100.0).exp() * count_big_r(n, &table).unwrap())
        .sum();
    assert!((v.re - direct).abs() < 1e-10 * direct);
    assert!(v.im.abs() < 1e-9 * v.re.abs());
}

#[test]
fn degenerate_decomposition() {
    let specs = SeriesPair::for_tolerance(100, 1e-14).unwrap();
    let table = build_prime_tables(specs.table_limit()).unwrap();
    let rep = CirclePipeline::new(specs, &table).unwrap().decompose(1, 1e-10).unwrap();
    let single = (-101.0f64 / 100.0).exp() * count_big_r(101, &table).unwrap();
    assert!((rep.direct - single).abs() < 1e-12 * single);
    assert!(rep.max_rel_gap < 1e-6, "{rep:?}");
    assert_eq!(rep.total, rep.i1 + rep.i2 + rep.i3);
}
