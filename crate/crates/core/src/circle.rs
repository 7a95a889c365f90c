//! Fourier-integral experiments built on the damped sums.
//!
//! With `S̃₁` and `S̃₂` truncated at cutoffs `M₁` and `M₂`, the product
//! `S̃₁(α)S̃₂(α)²` is a trigonometric polynomial whose `n`-th coefficient is
//! `e^{-n/N} R(n)` for every `n <= min(M₁, M₂²)`. The routines here recover
//! those coefficients by exact equispaced quadrature, split the short
//! interval integral into its main-term pieces, and evaluate the moment and
//! Laplace checks.

use std::f64::consts::{E, PI, TAU};

use num_complex::Complex64;

use crate::arith::count_big_r;
use crate::error::{Error, Result};
use crate::expsum::{
    parseval_fourth_moment_s2, truncation_cutoff, u_kernel_at, DampedSeries, Phase, TruncatedSeriesSpec,
};
use crate::gamma::{complex_gamma, ln_gamma};
use crate::quadrature::{
    exact_node_count, forward_dft, integrate_adaptive, AdaptiveOptions, BandLimitedInterpolant, GridCache,
    QuadratureScheme,
};
use crate::sieve::{iroot, VonMangoldtTable};
use crate::sum::{par_sum, par_sum_complex, Neumaier};

/// The two truncations used by the circle-method integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesPair {
    pub linear: TruncatedSeriesSpec,
    pub square: TruncatedSeriesSpec,
}

impl SeriesPair {
    pub fn new(linear: TruncatedSeriesSpec, square: TruncatedSeriesSpec) -> Result<Self> {
        if linear.ell != 1 || square.ell != 2 {
            return Err(Error::param("series pair needs ell = 1 and ell = 2 truncations"));
        }
        if linear.n != square.n {
            return Err(Error::param(format!(
                "series pair built for different N ({} and {})",
                linear.n, square.n
            )));
        }
        Ok(Self { linear, square })
    }

    /// Both truncations certified to `eps`.
    pub fn for_tolerance(big_n: u64, eps: f64) -> Result<Self> {
        Self::new(truncation_cutoff(1, big_n, eps)?, truncation_cutoff(2, big_n, eps)?)
    }

    pub fn n(&self) -> u64 {
        self.linear.n
    }

    /// Largest frequency of `S̃₁S̃₂²`.
    pub fn product_bandwidth(&self) -> u64 {
        self.linear.bandwidth() + 2 * self.square.bandwidth()
    }

    /// Sieve limit needed to build both truncations.
    pub fn table_limit(&self) -> u64 {
        self.linear.cutoff.max(self.square.cutoff)
    }

    /// Largest `n` whose coefficient is unaffected by the truncation.
    pub fn exact_range(&self) -> u64 {
        self.linear.cutoff.min(self.square.bandwidth())
    }
}

fn z_at(alpha: f64, inv_n: f64) -> Complex64 {
    Complex64::new(inv_n, -TAU * alpha)
}

/// Values of the short-interval integrals `I₁`, `I₂`, `I₃`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct I123Report {
    pub n: u64,
    pub h: u64,
    pub i1: Complex64,
    pub i2: Complex64,
    pub i3: Complex64,
    /// I₁ + I₂ + I₃.
    pub total: Complex64,
    /// The same integral without the split, by exact equispaced quadrature.
    pub unsplit: Complex64,
    /// Σ_{n=N+1}^{N+H} e^{-n/N} R(n) from the sieve.
    pub direct: f64,
    /// |total - direct| / max(1, |direct|).
    pub max_rel_gap: f64,
    /// πHN / (4e).
    pub i1_reference: f64,
    /// Summed adaptive error estimates of the three pieces.
    pub error_estimate: f64,
    /// Set when the error estimate exceeds 1% of |I₁|.
    pub unreliable: bool,
}

/// Integrals around `S̃₁S̃₂²` for one pair of truncations.
pub struct CirclePipeline<'a> {
    specs: SeriesPair,
    table: &'a VonMangoldtTable,
    linear: DampedSeries,
    square: DampedSeries,
    grids: GridCache,
}

impl<'a> CirclePipeline<'a> {
    pub fn new(specs: SeriesPair, table: &'a VonMangoldtTable) -> Result<Self> {
        if specs.n() < 2 {
            return Err(Error::param("N must be at least 2"));
        }
        Ok(Self {
            linear: DampedSeries::new(&specs.linear, table)?,
            square: DampedSeries::new(&specs.square, table)?,
            specs,
            table,
            grids: GridCache::new(),
        })
    }

    pub fn specs(&self) -> &SeriesPair {
        &self.specs
    }

    fn check_exact(&self, top: u64) -> Result<()> {
        if top > self.specs.exact_range() {
            return Err(Error::param(format!(
                "n up to {top} exceeds the range {} resolved by the truncation",
                self.specs.exact_range()
            )));
        }
        Ok(())
    }

    /// `S̃₁S̃₂²` on the grid `j/P`.
    fn product_grid(&self, p: usize) -> Result<Vec<Complex64>> {
        let s1 = self.grids.series_grid(&self.linear, p)?;
        let s2 = self.grids.series_grid(&self.square, p)?;
        Ok(s1.iter().zip(s2.iter()).map(|(a, b)| a * b * b).collect())
    }

    /// `e^{n/N} ∫ S̃₁S̃₂² e(-nα) dα` for each `n`.
    pub fn reconstruct(&self, ns: &[u64]) -> Result<Vec<f64>> {
        let Some(&top) = ns.iter().max() else {
            return Ok(Vec::new());
        };
        if ns.iter().any(|&n| n < 1) {
            return Err(Error::param("n must be at least 1"));
        }
        self.check_exact(top)?;
        let p = exact_node_count(self.specs.product_bandwidth() + top)?;
        let mut g = self.product_grid(p)?;
        forward_dft(&mut g);
        let nf = self.specs.n() as f64;
        Ok(ns
            .iter()
            .map(|&n| (n as f64 / nf).exp() * g[n as usize].re / p as f64)
            .collect())
    }

    /// `∫ S̃₁S̃₂² U(-α, H) e(-Nα) dα`, the weighted short-interval sum.
    pub fn weighted_interval_integral(&self, h: u64) -> Result<Complex64> {
        if h < 1 {
            return Err(Error::param("H must be at least 1"));
        }
        let big_n = self.specs.n();
        self.check_exact(big_n + h)?;
        let p = exact_node_count(self.specs.product_bandwidth() + big_n + h)?;
        let g = self.product_grid(p)?;
        let step = 1.0 / p as f64;
        let sum = par_sum_complex(p, |j| {
            let a = j as f64 * step;
            g[j] * u_kernel_at(-a, h) * Phase::new(-a).e(big_n)
        });
        Ok(sum * step)
    }

    /// Split the weighted short-interval integral into `I₁ + I₂ + I₃` and
    /// compare with the unsplit value and the sieve.
    pub fn decompose(&self, h: u64, rel_tol: f64) -> Result<I123Report> {
        let big_n = self.specs.n();
        let unsplit = self.weighted_interval_integral(h)?;
        self.table.require(big_n + h, "direct interval sum")?;
        let nf = big_n as f64;
        let direct = (big_n + 1..=big_n + h)
            .map(|n| count_big_r(n, self.table).map(|r| (-(n as f64) / nf).exp() * r))
            .collect::<Result<Neumaier>>()?
            .value();

        let s1 = BandLimitedInterpolant::for_series(&self.linear, &self.grids)?;
        let s2 = BandLimitedInterpolant::for_series(&self.square, &self.grids)?;
        let inv_n = 1.0 / nf;
        let quarter_pi = PI / 4.0;
        let f = |a: f64| {
            let z = z_at(a, inv_n);
            let zi = z.inv();
            let kernel = u_kernel_at(-a, h) * Phase::new(-a).e(big_n);
            let v1 = s1.eval(a);
            let v2 = s2.eval(a);
            let sq = v2 * v2;
            [
                quarter_pi * zi * zi * kernel,
                zi * (sq - quarter_pi * zi) * kernel,
                (v1 - zi) * sq * kernel,
            ]
        };
        let i1_reference = PI * h as f64 * nf / (4.0 * E);
        let opts = AdaptiveOptions {
            rel_tol,
            abs_tol: rel_tol * i1_reference,
            singular_scale: 1.0 / (TAU * nf),
            bandwidth_hint: (self.specs.product_bandwidth() + big_n + h) as f64,
        };
        let r = integrate_adaptive(&f, -0.5, 0.5, &opts)?;
        let [i1, i2, i3] = r.value;
        let total = i1 + i2 + i3;
        // interpolation error through sup-norm bounds |S̃| <= Σ|c|, |U| <= H, |1/z| <= N
        let (c1, c2) = (self.linear.coefficient_l1(), self.square.coefficient_l1());
        let (d1, d2) = (s1.error_bound(), s2.error_bound());
        let hf = h as f64;
        let square_err = (2.0 * c2 + d2) * d2;
        let interp = hf * (d1 * (c2 + d2).powi(2) + (c1 + d1) * square_err) + nf * hf * square_err;
        let error_estimate = r.error.iter().sum::<f64>() + interp;
        let max_rel_gap = (total - Complex64::new(direct, 0.0)).norm() / direct.abs().max(1.0);
        Ok(I123Report {
            n: big_n,
            h,
            i1,
            i2,
            i3,
            total,
            unsplit,
            direct,
            max_rel_gap,
            i1_reference,
            error_estimate,
            unreliable: error_estimate > 0.01 * i1.norm() || !r.converged,
        })
    }
}

/// `e^{n/N} ∫ S̃₁S̃₂² e(-nα) dα`, which equals `R(n)` up to rounding.
pub fn reconstruct_big_r(n: u64, specs: &SeriesPair, table: &VonMangoldtTable) -> Result<f64> {
    Ok(CirclePipeline::new(*specs, table)?.reconstruct(&[n])?[0])
}

/// `∫ S̃₁S̃₂² U(-α, H) e(-Nα) dα`.
pub fn weighted_interval_integral(h: u64, specs: &SeriesPair, table: &VonMangoldtTable) -> Result<Complex64> {
    CirclePipeline::new(*specs, table)?.weighted_interval_integral(h)
}

/// `I₁`, `I₂`, `I₃` with relative tolerance 1e-12.
pub fn decompose_i123(h: u64, specs: &SeriesPair, table: &VonMangoldtTable) -> Result<I123Report> {
    CirclePipeline::new(*specs, table)?.decompose(h, 1e-12)
}

/// Equispaced scheme certified for `|S̃₂|⁴` under `spec`.
pub fn fourth_moment_scheme(spec: &TruncatedSeriesSpec) -> Result<QuadratureScheme> {
    if spec.ell != 2 {
        return Err(Error::param("the fourth moment is taken of the ell = 2 series"));
    }
    QuadratureScheme::equispaced(2 * (2 * spec.bandwidth()))
}

fn fourth_moment_grid(
    big_n: u64,
    spec: &TruncatedSeriesSpec,
    table: &VonMangoldtTable,
    scheme: &QuadratureScheme,
) -> Result<(Vec<f64>, usize)> {
    if spec.ell != 2 || spec.n != big_n {
        return Err(Error::param(format!(
            "spec (ell = {}, N = {}) does not match the fourth moment at N = {big_n}",
            spec.ell, spec.n
        )));
    }
    scheme.validate()?;
    let QuadratureScheme::EquispacedExact { nodes, bandwidth } = *scheme else {
        return Err(Error::param("the fourth moment uses the equispaced scheme"));
    };
    let need = 2 * (2 * spec.bandwidth());
    if bandwidth < need {
        return Err(Error::param(format!(
            "scheme bandwidth {bandwidth} is below the certified {need}"
        )));
    }
    let series = DampedSeries::new(spec, table)?;
    let grid = crate::quadrature::series_on_grid(&series, nodes)?;
    Ok((grid.iter().map(|v| v.norm_sqr() * v.norm_sqr()).collect(), nodes))
}

/// ∫_{-1/2}^{1/2} |S̃₂(α)|⁴ dα by exact equispaced quadrature.
pub fn fourth_moment_quadrature(
    big_n: u64,
    spec: &TruncatedSeriesSpec,
    table: &VonMangoldtTable,
    scheme: &QuadratureScheme,
) -> Result<f64> {
    let (vals, p) = fourth_moment_grid(big_n, spec, table, scheme)?;
    Ok(par_sum(p, |j| vals[j]) / p as f64)
}

/// The same integral as `2 ∫_0^{1/2}`, using the symmetry `α ↦ -α`.
pub fn fourth_moment_folded(
    big_n: u64,
    spec: &TruncatedSeriesSpec,
    table: &VonMangoldtTable,
    scheme: &QuadratureScheme,
) -> Result<f64> {
    let (vals, p) = fourth_moment_grid(big_n, spec, table, scheme)?;
    let half = p / 2;
    let inner = par_sum(half - 1, |j| vals[j + 1]);
    Ok((vals[0] + 2.0 * inner + vals[half]) / p as f64)
}

/// Parseval value and the quadrature for the same truncation.
pub fn fourth_moment_pair(big_n: u64, spec: &TruncatedSeriesSpec, table: &VonMangoldtTable) -> Result<(f64, f64)> {
    let scheme = fourth_moment_scheme(spec)?;
    Ok((
        parseval_fourth_moment_s2(big_n, spec, table)?,
        fourth_moment_quadrature(big_n, spec, table, &scheme)?,
    ))
}

/// Value of an adaptive integral together with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentResult {
    pub value: f64,
    pub error_estimate: f64,
    /// Error estimate above 1% of the value, or refinement hit its floor.
    pub unreliable: bool,
    /// Parameters outside the range where the growth law is stated.
    pub out_of_range: bool,
}

fn adaptive_options(scheme: &QuadratureScheme) -> Result<AdaptiveOptions> {
    scheme.validate()?;
    match *scheme {
        QuadratureScheme::DyadicAdaptive(o) => Ok(o),
        QuadratureScheme::EquispacedExact { .. } => Err(Error::param(
            "this integral is over a partial interval and needs the dyadic-adaptive scheme",
        )),
    }
}

/// ∫_{-1/H}^{1/H} |S_ℓ(α) - T_ℓ(α)|² dα.
///
/// Only the tolerances of `scheme` are used; panel layout follows the
/// bandwidth `N` of the integrand.
pub fn mean_square_s_minus_t(
    big_n: u64,
    ell: u32,
    h: u64,
    table: &VonMangoldtTable,
    scheme: &QuadratureScheme,
) -> Result<MomentResult> {
    if ell == 0 {
        return Err(Error::param("ell must be at least 1"));
    }
    if big_n < 1u64 << ell {
        return Err(Error::param(format!("N must be at least 2^ell = {}", 1u64 << ell)));
    }
    if h < 2 {
        return Err(Error::param("H must be at least 2"));
    }
    let base = adaptive_options(scheme)?;
    let root = iroot(big_n, ell);
    table.require(root, "S_ell - T_ell")?;
    let terms: Vec<(u64, f64)> = (1..=root)
        .map(|n| (n.pow(ell), table.is_prime(n).then(|| (n as f64).ln()).unwrap_or(0.0) - 1.0))
        .collect();
    let f = |a: f64| {
        let ph = Phase::new(a);
        let mut acc = crate::sum::ComplexNeumaier::new();
        for &(k, c) in &terms {
            acc.add(c * ph.e(k));
        }
        [Complex64::new(acc.value().norm_sqr(), 0.0)]
    };
    let w = 1.0 / h as f64;
    let opts = AdaptiveOptions {
        singular_scale: w,
        bandwidth_hint: big_n as f64,
        ..base
    };
    let r = integrate_adaptive(&f, -w, w, &opts)?;
    let value = r.value[0].re;
    let lower = (big_n as f64).powf(1.0 - 1.0 / ell as f64);
    Ok(MomentResult {
        value,
        error_estimate: r.error[0],
        unreliable: r.error[0] > 0.01 * value || !r.converged,
        out_of_range: (h as f64) < lower || h > big_n,
    })
}

/// ∫_{-ξ}^{ξ} |S̃_ℓ(α) - Γ(1/ℓ)/(ℓ z^{1/ℓ})|² dα.
pub fn l2_error_moment(
    big_n: u64,
    ell: u32,
    xi: f64,
    spec: &TruncatedSeriesSpec,
    table: &VonMangoldtTable,
    scheme: &QuadratureScheme,
) -> Result<MomentResult> {
    if !(xi > 0.0 && xi <= 0.5) {
        return Err(Error::param(format!("xi must lie in (0, 1/2], got {xi}")));
    }
    if spec.ell != ell || spec.n != big_n {
        return Err(Error::param("spec does not match (N, ell)"));
    }
    if big_n < 2 {
        return Err(Error::param("N must be at least 2"));
    }
    let base = adaptive_options(scheme)?;
    let series = DampedSeries::new(spec, table)?;
    let cache = GridCache::new();
    let interp = BandLimitedInterpolant::for_series(&series, &cache)?;
    let l = ell as f64;
    let lg = ln_gamma(Complex64::new(1.0 / l, 0.0))?;
    let inv_n = 1.0 / big_n as f64;
    let f = |a: f64| {
        let main = (lg - z_at(a, inv_n).ln() / l).exp() / l;
        [Complex64::new((interp.eval(a) - main).norm_sqr(), 0.0)]
    };
    let opts = AdaptiveOptions {
        singular_scale: inv_n / TAU,
        bandwidth_hint: spec.bandwidth() as f64,
        ..base
    };
    let r = integrate_adaptive(&f, -xi, xi, &opts)?;
    let value = r.value[0].re;
    Ok(MomentResult {
        value,
        error_estimate: r.error[0],
        unreliable: r.error[0] > 0.01 * value || !r.converged,
        out_of_range: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceCheckResult {
    pub n: u64,
    pub mu: f64,
    pub big_n: u64,
    pub quadrature_value: Complex64,
    /// e^{-n/N} n^{μ-1} / Γ(μ)
    pub closed_form: f64,
    pub abs_err: f64,
    /// abs_err · n
    pub scaled_err: f64,
    pub error_estimate: f64,
    /// Quadrature error estimate above abs_err / 10.
    pub unreliable: bool,
}

fn laplace_closed_form(n: u64, big_n: u64, mu: f64) -> Result<f64> {
    let g = complex_gamma(Complex64::new(mu, 0.0))?.re;
    Ok((-(n as f64) / big_n as f64).exp() * (n as f64).powf(mu - 1.0) / g)
}

fn laplace_integral(n: u64, big_n: u64, mu: f64, a: f64, b: f64, base: AdaptiveOptions) -> Result<(Complex64, f64)> {
    let inv_n = 1.0 / big_n as f64;
    let f = |x: f64| [(-mu * z_at(x, inv_n).ln()).exp() * Phase::new(-x).e(n)];
    let opts = AdaptiveOptions {
        singular_scale: inv_n / TAU,
        bandwidth_hint: n as f64,
        ..base
    };
    let r = integrate_adaptive(&f, a, b, &opts)?;
    Ok((r.value[0], r.error[0]))
}

fn check_laplace_args(n: u64, big_n: u64, mu: f64) -> Result<()> {
    if n < 1 || big_n < 1 {
        return Err(Error::param("n and N must be at least 1"));
    }
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::param(format!("mu must be positive, got {mu}")));
    }
    Ok(())
}

/// ∫_{-1/2}^{1/2} z^{-μ} e(-nα) dα against `e^{-n/N} n^{μ-1}/Γ(μ)`.
pub fn laplace_check(n: u64, big_n: u64, mu: f64, scheme: &QuadratureScheme) -> Result<LaplaceCheckResult> {
    check_laplace_args(n, big_n, mu)?;
    let base = adaptive_options(scheme)?;
    let closed_form = laplace_closed_form(n, big_n, mu)?;
    let (value, error_estimate) = laplace_integral(n, big_n, mu, -0.5, 0.5, base)?;
    let abs_err = (value - Complex64::new(closed_form, 0.0)).norm();
    Ok(LaplaceCheckResult {
        n,
        mu,
        big_n,
        quadrature_value: value,
        closed_form,
        abs_err,
        scaled_err: abs_err * n as f64,
        error_estimate,
        unreliable: error_estimate > abs_err / 10.0,
    })
}

/// |∫_{-w/2}^{w/2} z^{-μ} e(-nα) dα - closed form| for a widened window;
/// the full-line integral equals the closed form exactly.
pub fn laplace_window_error(n: u64, big_n: u64, mu: f64, width: f64, scheme: &QuadratureScheme) -> Result<f64> {
    check_laplace_args(n, big_n, mu)?;
    if !(width > 0.0) {
        return Err(Error::param("window width must be positive"));
    }
    let base = adaptive_options(scheme)?;
    let closed_form = laplace_closed_form(n, big_n, mu)?;
    let (value, _) = laplace_integral(n, big_n, mu, -width / 2.0, width / 2.0, base)?;
    Ok((value - Complex64::new(closed_form, 0.0)).norm())
}
