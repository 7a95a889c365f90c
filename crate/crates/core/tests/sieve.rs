use proptest::prelude::*;
use wgl_core::sieve::{cache_file_name, cached_prime_tables};
use wgl_core::{build_prime_tables, build_prime_tables_with, SieveConfig, VonMangoldtTable};

/// Λ(n) by trial division, independent of the sieve.
fn lambda_by_division(n: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let mut m = n;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            while m % p == 0 {
                m /= p;
            }
            return if m == 1 { (p as f64).ln() } else { 0.0 };
        }
        p += 1;
    }
    // m is prime; n is a power of m only when nothing was divided out
    if m == n {
        (n as f64).ln()
    } else {
        0.0
    }
}

fn is_prime_by_division(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

#[test]
fn prime_count_below_a_million() {
    let t = build_prime_tables(1_000_000).unwrap();
    assert_eq!(t.prime_count(), 78498);
    assert_eq!(t.primes_up_to(100).len(), 25);
    assert_eq!(*t.primes().last().unwrap(), 999_983);
}

#[test]
fn lambda_matches_trial_division() {
    let t = build_prime_tables(100_000).unwrap();
    for n in 0..=100_000u64 {
        assert_eq!(t.lambda(n), lambda_by_division(n), "n = {n}");
        assert_eq!(t.is_prime(n), is_prime_by_division(n), "n = {n}");
    }
}

#[test]
fn prime_powers_are_the_support_of_lambda() {
    let t = build_prime_tables(20_000).unwrap();
    let support: Vec<u64> = (0..=20_000).filter(|&n| t.lambda(n) > 0.0).collect();
    assert_eq!(t.prime_powers(), &support[..]);
}

#[test]
fn chebyshev_psi_small_values() {
    let t = build_prime_tables(100).unwrap();
    // ψ(10) = log(2^3 · 3^2 · 5 · 7) = log 2520
    assert!((t.chebyshev_psi(10) - 2520f64.ln()).abs() < 1e-13);
    assert_eq!(t.chebyshev_psi(1), 0.0);
}

#[test]
fn cache_round_trip_through_directory() {
    let dir = tempfile::tempdir().unwrap();
    let first = cached_prime_tables(dir.path(), 50_000).unwrap();
    assert!(dir.path().join(cache_file_name(50_000)).exists());
    let second = cached_prime_tables(dir.path(), 50_000).unwrap();
    assert_eq!(first, second);
    assert_eq!(first, build_prime_tables(50_000).unwrap());
}

#[test]
fn corrupted_cache_is_rejected() {
    let t = build_prime_tables(1000).unwrap();
    let mut bytes = Vec::new();
    t.write_cache(&mut bytes).unwrap();
    let last = bytes.len() - 1;
    bytes[last] ^= 0xff;
    assert!(VonMangoldtTable::read_cache(&bytes[..]).is_err());
    assert!(VonMangoldtTable::read_cache(&b"nope"[..]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn segment_size_does_not_change_the_table(limit in 2u64..60_000, seg in 64usize..20_000) {
        let config = SieveConfig { segment_size: seg, ..SieveConfig::default() };
        let a = build_prime_tables_with(limit, &config).unwrap();
        let b = build_prime_tables(limit).unwrap();
        prop_assert_eq!(a, b);
    }
}
