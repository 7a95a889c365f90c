//! Representation counts for `n = p1 + p2^2 + p3^2` and friends.
//!
//! All sums run over ordered triples: `(p2, p3)` and `(p3, p2)` are
//! different representations when `p2 != p3`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sieve::{isqrt, VonMangoldtTable};
use crate::sum::{compensated_sum, Neumaier};

/// Membership in the congruence class where representations are expected:
/// `n` odd and `n mod 3 != 2`.
pub fn is_in_a(n: u64) -> bool {
    n % 2 == 1 && n % 3 != 2
}

fn check_n(n: u64, table: &VonMangoldtTable) -> Result<()> {
    if n < 2 {
        return Err(Error::param(format!("n must be at least 2, got {n}")));
    }
    table.require(n, "representation count")
}

/// Visit every ordered pair `(b, c)` from `bases` with `b^2 + c^2 <= n - 2`,
/// handing over `(b, c, n - b^2 - c^2)`.
fn for_square_pairs(bases: &[u64], n: u64, mut f: impl FnMut(u64, u64, u64)) {
    for &b in bases {
        let b2 = b * b;
        if b2 + 4 + 2 > n {
            break;
        }
        for &c in bases {
            let s = b2 + c * c;
            if s + 2 > n {
                break;
            }
            f(b, c, n - s);
        }
    }
}

/// r(n) = Σ_{p1 + p2² + p3² = n} log p1 log p2 log p3.
pub fn count_r(n: u64, table: &VonMangoldtTable) -> Result<f64> {
    check_n(n, table)?;
    let primes = table.primes_up_to(isqrt(n));
    let mut acc = Neumaier::new();
    for_square_pairs(primes, n, |b, c, a| {
        if table.is_prime(a) {
            acc.add(table.lambda(a) * table.lambda(b) * table.lambda(c));
        }
    });
    Ok(acc.value())
}

/// r*(n): number of ordered prime triples with p1 + p2² + p3² = n.
pub fn count_rstar(n: u64, table: &VonMangoldtTable) -> Result<u64> {
    check_n(n, table)?;
    let primes = table.primes_up_to(isqrt(n));
    let mut count = 0u64;
    for_square_pairs(primes, n, |_, _, a| {
        if table.is_prime(a) {
            count += 1;
        }
    });
    Ok(count)
}

/// R(n) = Σ_{a + b² + c² = n} Λ(a)Λ(b)Λ(c), prime powers included.
pub fn count_big_r(n: u64, table: &VonMangoldtTable) -> Result<f64> {
    check_n(n, table)?;
    let powers = table.prime_powers_up_to(isqrt(n));
    let mut acc = Neumaier::new();
    for_square_pairs(powers, n, |b, c, a| {
        let la = table.lambda(a);
        if la > 0.0 {
            acc.add(la * table.lambda(b) * table.lambda(c));
        }
    });
    Ok(acc.value())
}

/// Result of summing r(n) over the short interval (N, N + H].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalSumResult {
    pub n: u64,
    pub h: u64,
    /// Σ_{n=N+1}^{N+H} r(n)
    pub sum_r: f64,
    /// Σ_{n=N+1}^{N+H} e^{-n/N} r(n)
    pub sum_r_weighted: f64,
    /// (π/4)·H·N
    pub main_term: f64,
    /// sum_r / main_term
    pub ratio: f64,
}

/// Σ r(n) over `n in (big_n, big_n + h]`, iterating prime-square pairs and
/// reading the admissible p1 straight out of the prime list.
pub fn interval_r_sum(big_n: u64, h: u64, table: &VonMangoldtTable) -> Result<IntervalSumResult> {
    if h < 1 {
        return Err(Error::param("interval length H must be at least 1"));
    }
    if big_n < 1 {
        return Err(Error::param("N must be at least 1"));
    }
    let top = big_n + h;
    table.require(top, "interval sum")?;
    let inv_n = 1.0 / big_n as f64;

    let primes = table.primes_up_to(isqrt(top));
    let mut pairs = Vec::new();
    for_square_pairs(primes, top, |b, c, _| pairs.push((b, c)));

    let partials: Vec<(f64, f64)> = pairs
        .par_iter()
        .map(|&(b, c)| {
            let s = b * b + c * c;
            let lo = (big_n + 1).saturating_sub(s).max(2);
            let hi = top - s;
            if lo > hi {
                return (0.0, 0.0);
            }
            let all = table.primes();
            let start = all.partition_point(|&p| p < lo);
            let end = all.partition_point(|&p| p <= hi);
            let w = table.lambda(b) * table.lambda(c);
            let mut plain = Neumaier::new();
            let mut weighted = Neumaier::new();
            for &a in &all[start..end] {
                let term = table.lambda(a) * w;
                plain.add(term);
                weighted.add(term * (-((a + s) as f64) * inv_n).exp());
            }
            (plain.value(), weighted.value())
        })
        .collect();

    let sum_r = compensated_sum(partials.iter().map(|p| p.0));
    let sum_r_weighted = compensated_sum(partials.iter().map(|p| p.1));
    let main_term = PI / 4.0 * h as f64 * big_n as f64;
    Ok(IntervalSumResult {
        n: big_n,
        h,
        sum_r,
        sum_r_weighted,
        main_term,
        ratio: sum_r / main_term,
    })
}

/// c(m) = e^{-m/N} Σ_{a² + b² = m} Λ(a)Λ(b), ordered pairs.
pub fn two_square_coefficient(m: u64, big_n: u64, table: &VonMangoldtTable) -> Result<f64> {
    if m < 2 {
        return Err(Error::param(format!("m must be at least 2, got {m}")));
    }
    if big_n < 1 {
        return Err(Error::param("N must be at least 1"));
    }
    table.require(isqrt(m), "two-square coefficient")?;
    let mut acc = Neumaier::new();
    for &a in table.prime_powers_up_to(isqrt(m)) {
        let rest = m - a * a;
        let b = isqrt(rest);
        if b * b == rest {
            let lb = table.lambda(b);
            if lb > 0.0 {
                acc.add(table.lambda(a) * lb);
            }
        }
    }
    Ok((-(m as f64) / big_n as f64).exp() * acc.value())
}
