use wgl_core::{build_prime_tables, count_big_r, count_r, count_rstar, interval_r_sum, is_in_a};

const LIMIT: u64 = 10_000;

fn prime_by_division(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

fn lambda_by_division(n: u64) -> f64 {
    (2..=n)
        .find(|d| n % d == 0)
        .filter(|&p| {
            let mut m = n;
            while m % p == 0 {
                m /= p;
            }
            m == 1
        })
        .map_or(0.0, |p| (p as f64).ln())
}

/// (r, r*, R) for every n up to `LIMIT` from a plain triple loop over
/// (a, b, c) with a + b² + c² = n.
fn triple_loop() -> Vec<(f64, u64, f64)> {
    let lambda: Vec<f64> = (0..=LIMIT).map(lambda_by_division).collect();
    let prime: Vec<bool> = (0..=LIMIT).map(prime_by_division).collect();
    let mut out = vec![(0.0, 0u64, 0.0); LIMIT as usize + 1];
    for b in 1..=100u64 {
        for c in 1..=100u64 {
            let s = b * b + c * c;
            for a in 1..=LIMIT.saturating_sub(s) {
                let n = (a + s) as usize;
                let w = lambda[a as usize] * lambda[b as usize] * lambda[c as usize];
                out[n].2 += w;
                if prime[a as usize] && prime[b as usize] && prime[c as usize] {
                    out[n].0 += w;
                    out[n].1 += 1;
                }
            }
        }
    }
    out
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * b.abs().max(1.0)
}

#[test]
fn counts_match_triple_loop() {
    let t = build_prime_tables(LIMIT).unwrap();
    let oracle = triple_loop();
    for n in 2..=LIMIT {
        let (r, rs, big) = oracle[n as usize];
        assert!(close(count_r(n, &t).unwrap(), r), "r({n})");
        assert_eq!(count_rstar(n, &t).unwrap(), rs, "r*({n})");
        assert!(close(count_big_r(n, &t).unwrap(), big), "R({n})");
    }
}

#[test]
fn small_examples() {
    let t = build_prime_tables(100).unwrap();
    let l2 = 2f64.ln();
    assert!((count_r(10, &t).unwrap() - l2.powi(3)).abs() < 1e-15);
    assert_eq!(count_rstar(10, &t).unwrap(), 1);
    assert_eq!(count_r(3, &t).unwrap(), 0.0);
    // 11 = 3 + 2² + 2² only
    assert!((count_r(11, &t).unwrap() - 3f64.ln() * l2 * l2).abs() < 1e-15);
    assert!(count_r(1, &t).is_err());
    assert!(count_r(101, &t).is_err());
}

#[test]
fn ordered_pairs_are_counted_twice() {
    let t = build_prime_tables(100).unwrap();
    // 15 = 2 + 2² + 3² = 2 + 3² + 2² = 7 + 2² + 2²
    assert_eq!(count_rstar(15, &t).unwrap(), 3);
}

#[test]
fn class_membership() {
    let members: Vec<u64> = (1..20).filter(|&n| is_in_a(n)).collect();
    assert_eq!(members, vec![1, 3, 7, 9, 13, 15, 19]);
}

#[test]
fn interval_sum_matches_per_n_counts() {
    let t = build_prime_tables(30_000).unwrap();
    for &(n, h) in &[(1000u64, 100u64), (9, 1), (20_000, 5000), (2, 3)] {
        let fast = interval_r_sum(n, h, &t).unwrap();
        let mut plain = 0.0;
        let mut weighted = 0.0;
        for m in n + 1..=n + h {
            let r = count_r(m, &t).unwrap();
            plain += r;
            weighted += r * (-(m as f64) / n as f64).exp();
        }
        assert!(close(fast.sum_r, plain), "N {n} H {h}: {} vs {plain}", fast.sum_r);
        assert!(close(fast.sum_r_weighted, weighted));
        assert!(close(fast.main_term, std::f64::consts::FRAC_PI_4 * (h * n) as f64));
    }
}

#[test]
fn tiny_interval_example() {
    let t = build_prime_tables(100).unwrap();
    let r = interval_r_sum(9, 1, &t).unwrap();
    assert!((r.sum_r - 2f64.ln().powi(3)).abs() < 1e-15);
    assert!((r.ratio - 0.04710).abs() < 1e-4);
}

#[test]
fn interval_errors() {
    let t = build_prime_tables(100).unwrap();
    assert!(interval_r_sum(10, 0, &t).is_err());
    assert!(interval_r_sum(90, 20, &t).is_err());
}
