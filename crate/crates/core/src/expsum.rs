//! Exponential sums over primes and prime powers.
//!
//! * `S_ℓ(α) = Σ_{p^ℓ ≤ N} log p · e(p^ℓ α)` and `T_ℓ(α) = Σ_{n^ℓ ≤ N} e(n^ℓ α)`
//!   are finite sums.
//! * `S̃_ℓ(α) = Σ_{n ≥ 1} Λ(n) e^{-n^ℓ/N} e(n^ℓ α)` is an infinite series; it
//!   is truncated at a cutoff `M` whose tail is bounded by a computable
//!   certificate (see [`tail_certificate`]).
//! * `U(α, H) = Σ_{m=1}^{H} e(mα)`.
//!
//! Phases `k·α` are reduced modulo one exactly before any trigonometric call
//! (see [`Phase`]), so large frequencies do not lose phase accuracy.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sieve::{iroot, VonMangoldtTable, TABLE_CEILING};
use crate::sum::{compensated_sum, ComplexNeumaier, Neumaier};

/// A frequency `α ∈ [-1/2, 1/2]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FrequencyPoint(f64);

impl FrequencyPoint {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(-0.5..=0.5).contains(&alpha) {
            return Err(Error::param(format!("frequency {alpha} outside [-1/2, 1/2]")));
        }
        Ok(Self(alpha))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn neg(self) -> Self {
        Self(-self.0)
    }
}

/// e(x) = exp(2πix), with `x` reduced modulo one first.
#[inline]
pub fn e(x: f64) -> Complex64 {
    cis_turns(x - x.round())
}

#[inline]
fn cis_turns(t: f64) -> Complex64 {
    let (s, c) = (TAU * t).sin_cos();
    Complex64::new(c, s)
}

const SPLIT_BITS: u32 = 26;
const TWO_26: f64 = (1u64 << SPLIT_BITS) as f64;

fn veltkamp_hi(x: f64) -> f64 {
    let c = 134_217_729.0 * x; // 2^27 + 1
    c - (c - x)
}

/// `α` split into three pieces of at most 26 significant bits each, so
/// that `k·α mod 1` can be formed from exact products for `k < 2^52`.
#[derive(Debug, Clone, Copy)]
pub struct Phase {
    parts: [f64; 3],
    scaled: [f64; 3],
}

impl Phase {
    pub fn new(alpha: f64) -> Self {
        let a1 = veltkamp_hi(alpha);
        let r1 = alpha - a1;
        let a2 = veltkamp_hi(r1);
        let a3 = r1 - a2;
        let parts = [a1, a2, a3];
        Self {
            parts,
            scaled: parts.map(|p| p * TWO_26),
        }
    }

    /// `k·α` modulo one, in `[-1/2, 1/2]`.
    #[inline]
    pub fn frac(&self, k: u64) -> f64 {
        debug_assert!(k < 1 << 52);
        let k0 = (k & ((1 << SPLIT_BITS) - 1)) as f64;
        let k1 = (k >> SPLIT_BITS) as f64;
        let mut r = 0.0;
        for i in 0..3 {
            let x = k0 * self.parts[i];
            r += x - x.round();
            let y = k1 * self.scaled[i];
            r += y - y.round();
        }
        r - r.round()
    }

    /// e(k·α).
    #[inline]
    pub fn e(&self, k: u64) -> Complex64 {
        cis_turns(self.frac(k))
    }
}

fn check_ell(ell: u32) -> Result<()> {
    if ell == 0 {
        Err(Error::param("ell must be at least 1"))
    } else {
        Ok(())
    }
}

/// S_ℓ(α) = Σ_{p^ℓ ≤ N} log p · e(p^ℓ α).
pub fn s_ell(alpha: FrequencyPoint, ell: u32, big_n: u64, table: &VonMangoldtTable) -> Result<Complex64> {
    check_ell(ell)?;
    let root = iroot(big_n, ell);
    table.require(root, "S_ell")?;
    let phase = Phase::new(alpha.value());
    let mut acc = ComplexNeumaier::new();
    for &p in table.primes_up_to(root) {
        acc.add(table.lambda(p) * phase.e(p.pow(ell)));
    }
    Ok(acc.value())
}

/// T_ℓ(α) = Σ_{1 ≤ n^ℓ ≤ N} e(n^ℓ α).
pub fn t_ell(alpha: FrequencyPoint, ell: u32, big_n: u64) -> Result<Complex64> {
    check_ell(ell)?;
    if big_n < 1 {
        return Err(Error::param("N must be at least 1"));
    }
    let phase = Phase::new(alpha.value());
    let mut acc = ComplexNeumaier::new();
    for n in 1..=iroot(big_n, ell) {
        acc.add(phase.e(n.pow(ell)));
    }
    Ok(acc.value())
}

/// Truncation of `S̃_ℓ` at `n ≤ cutoff` for a given `N`.
///
/// `tail_bound` is the stored certificate for `Σ_{n > cutoff} Λ(n) e^{-n^ℓ/N}`
/// and never exceeds `tail_eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedSeriesSpec {
    pub ell: u32,
    pub n: u64,
    pub cutoff: u64,
    pub tail_eps: f64,
    pub tail_bound: f64,
}

impl TruncatedSeriesSpec {
    /// Spec with an explicit cutoff; the tail budget is whatever the
    /// certificate gives (infinite when the certificate does not apply).
    pub fn with_cutoff(ell: u32, big_n: u64, cutoff: u64) -> Result<Self> {
        check_ell(ell)?;
        if cutoff < 1 {
            return Err(Error::param("cutoff must be at least 1"));
        }
        if big_n < 1 {
            return Err(Error::param("N must be at least 1"));
        }
        let bound = tail_certificate(ell, big_n, cutoff).unwrap_or(f64::INFINITY);
        Ok(Self {
            ell,
            n: big_n,
            cutoff,
            tail_eps: bound,
            tail_bound: bound,
        })
    }

    /// Recompute the certificate from `(ell, n, cutoff)`.
    pub fn recompute_certificate(&self) -> Option<f64> {
        tail_certificate(self.ell, self.n, self.cutoff)
    }

    /// Largest frequency `cutoff^ℓ` present in the truncated series.
    pub fn bandwidth(&self) -> u64 {
        self.cutoff.pow(self.ell)
    }
}

/// Upper bound for `Σ_{n > M} log n · e^{-n^ℓ/N}`.
///
/// Valid once `t ↦ log t · e^{-t^ℓ/N}` is nonincreasing on `[M, ∞)`, i.e.
/// `ℓ M^ℓ log M ≥ N`; returns `None` before that point. The sum is compared
/// with the integral from `M`, and the integrand is bounded using
/// `t^ℓ ≥ M^ℓ + ℓM^{ℓ-1}(t - M)` and `log t ≤ log M + (t - M)/M`.
pub fn tail_certificate(ell: u32, big_n: u64, m: u64) -> Option<f64> {
    if m < 3 || ell == 0 || big_n == 0 {
        return None;
    }
    let mf = m as f64;
    let nf = big_n as f64;
    let ml = mf.powi(ell as i32);
    let ln_m = mf.ln();
    if ell as f64 * ml * ln_m < nf {
        return None;
    }
    let rate = ell as f64 * mf.powi(ell as i32 - 1) / nf;
    Some((-ml / nf).exp() * (ln_m / rate + 1.0 / (mf * rate * rate)))
}

/// Smallest cutoff whose tail certificate is at most `eps`.
pub fn truncation_cutoff(ell: u32, big_n: u64, eps: f64) -> Result<TruncatedSeriesSpec> {
    check_ell(ell)?;
    if big_n < 1 {
        return Err(Error::param("N must be at least 1"));
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::param(format!("tail tolerance must be positive, got {eps}")));
    }
    let ok = |m: u64| tail_certificate(ell, big_n, m).is_some_and(|b| b <= eps);
    let too_big = |m: u64| m.checked_pow(ell).map_or(true, |v| v > TABLE_CEILING);

    let mut hi = 3u64;
    while !ok(hi) {
        if too_big(hi) {
            return Err(Error::resource(format!(
                "tail tolerance {eps:e} needs cutoff^{ell} beyond the table ceiling {TABLE_CEILING}"
            )));
        }
        hi *= 2;
    }
    let mut lo = hi / 2;
    if lo < 3 || ok(lo) {
        lo = 2;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if too_big(hi) {
        return Err(Error::resource(format!(
            "cutoff {hi} for tolerance {eps:e} exceeds the table ceiling"
        )));
    }
    let bound = tail_certificate(ell, big_n, hi).expect("certificate holds at the chosen cutoff");
    Ok(TruncatedSeriesSpec {
        ell,
        n: big_n,
        cutoff: hi,
        tail_eps: eps,
        tail_bound: bound,
    })
}

/// The truncated series `S̃_ℓ` as an explicit list of `(frequency, weight)`.
#[derive(Debug, Clone)]
pub struct DampedSeries {
    spec: TruncatedSeriesSpec,
    freqs: Vec<u64>,
    weights: Vec<f64>,
}

impl DampedSeries {
    pub fn new(spec: &TruncatedSeriesSpec, table: &VonMangoldtTable) -> Result<Self> {
        check_ell(spec.ell)?;
        table.require(spec.cutoff, "truncated series")?;
        let inv_n = 1.0 / spec.n as f64;
        let mut freqs = Vec::new();
        let mut weights = Vec::new();
        for &n in table.prime_powers_up_to(spec.cutoff) {
            let f = n.pow(spec.ell);
            freqs.push(f);
            weights.push(table.lambda(n) * (-(f as f64) * inv_n).exp());
        }
        Ok(Self {
            spec: *spec,
            freqs,
            weights,
        })
    }

    pub fn spec(&self) -> &TruncatedSeriesSpec {
        &self.spec
    }

    /// Certified bandwidth (largest frequency) of the truncated series.
    pub fn bandwidth(&self) -> u64 {
        self.spec.bandwidth()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.freqs.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    /// Σ |coefficients|, which is also `S̃_ℓ(0)` for the truncation.
    pub fn coefficient_l1(&self) -> f64 {
        compensated_sum(self.weights.iter().copied())
    }

    pub fn eval(&self, alpha: f64) -> Complex64 {
        let phase = Phase::new(alpha);
        let mut acc = ComplexNeumaier::new();
        for (f, w) in self.terms() {
            acc.add(w * phase.e(f));
        }
        acc.value()
    }
}

/// S̃_ℓ(α) truncated according to `spec`.
pub fn s_tilde(alpha: FrequencyPoint, spec: &TruncatedSeriesSpec, table: &VonMangoldtTable) -> Result<Complex64> {
    Ok(DampedSeries::new(spec, table)?.eval(alpha.value()))
}

/// U(α, H) = Σ_{m=1}^{H} e(mα) for any real `α`.
pub fn u_kernel_at(alpha: f64, h: u64) -> Complex64 {
    if alpha == 0.0 {
        return Complex64::new(h as f64, 0.0);
    }
    if alpha.abs() < 1e-8 / h as f64 {
        let phase = Phase::new(alpha);
        return (1..=h).map(|m| phase.e(m)).collect::<ComplexNeumaier>().value();
    }
    let half = Phase::new(alpha / 2.0);
    let num = (TAU * half.frac(h)).sin();
    let den = (PI * (alpha - alpha.round())).sin();
    let sign = if (alpha.round() as i64) % 2 != 0 { -1.0 } else { 1.0 };
    half.e(h + 1) * (sign * num / den)
}

/// U(α, H) with the argument range checked.
pub fn u_kernel(alpha: FrequencyPoint, h: u64) -> Result<Complex64> {
    if h < 1 {
        return Err(Error::param("H must be at least 1"));
    }
    Ok(u_kernel_at(alpha.value(), h))
}

fn check_spec(ell: u32, spec: &TruncatedSeriesSpec) -> Result<()> {
    if spec.ell != ell {
        return Err(Error::param(format!(
            "spec is for ell = {}, requested ell = {ell}",
            spec.ell
        )));
    }
    Ok(())
}

/// ∫_{-1/2}^{1/2} |S̃_ℓ|² dα computed in coefficient space:
/// `Σ_{n ≤ M} Λ(n)² e^{-2n^ℓ/N}`.
pub fn parseval_second_moment(ell: u32, spec: &TruncatedSeriesSpec, table: &VonMangoldtTable) -> Result<f64> {
    check_spec(ell, spec)?;
    let series = DampedSeries::new(spec, table)?;
    Ok(compensated_sum(series.terms().map(|(_, w)| w * w)))
}

/// Coefficients `c(m)`, `m ≤ 2M²`, of `S̃₂(α)² = Σ_m c(m) e(mα)`.
pub fn square_sum_coefficients(spec: &TruncatedSeriesSpec, table: &VonMangoldtTable) -> Result<Vec<f64>> {
    check_spec(2, spec)?;
    table.require(spec.cutoff, "two-square coefficients")?;
    let powers = table.prime_powers_up_to(spec.cutoff);
    let top = 2 * spec.cutoff * spec.cutoff;
    let mut raw = vec![0.0f64; top as usize + 1];
    for &a in powers {
        let la = table.lambda(a);
        for &b in powers {
            raw[(a * a + b * b) as usize] += la * table.lambda(b);
        }
    }
    let inv_n = 1.0 / spec.n as f64;
    for (m, c) in raw.iter_mut().enumerate() {
        if *c != 0.0 {
            *c *= (-(m as f64) * inv_n).exp();
        }
    }
    Ok(raw)
}

/// ∫_{-1/2}^{1/2} |S̃₂(α)|⁴ dα computed exactly as `Σ_m c(m)²`.
pub fn parseval_fourth_moment_s2(big_n: u64, spec: &TruncatedSeriesSpec, table: &VonMangoldtTable) -> Result<f64> {
    check_spec(2, spec)?;
    if spec.n != big_n {
        return Err(Error::param(format!(
            "spec is for N = {}, requested N = {big_n}",
            spec.n
        )));
    }
    let coeffs = square_sum_coefficients(spec, table)?;
    let mut acc = Neumaier::new();
    for c in coeffs {
        acc.add(c * c);
    }
    Ok(acc.value())
}
