//! Quadrature over frequencies.
//!
//! Two schemes:
//!
//! * equispaced-exact: the periodic trapezoid rule on `P` nodes, exact for
//!   1-periodic trigonometric polynomials whose largest absolute frequency
//!   `F` satisfies `P >= 2F + 2`;
//! * dyadic-adaptive: composite 16-point Gauss–Legendre on panels that
//!   shrink geometrically toward `α = 0`, refined by halving until the
//!   whole-panel and two-half estimates agree.
//!
//! Grid evaluation of trigonometric polynomials goes through one FFT, and
//! [`BandLimitedInterpolant`] turns an oversampled grid into a cheap
//! evaluator at arbitrary `α` with an explicit error bound.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::expsum::DampedSeries;
use crate::sum::{par_sum_complex, ComplexNeumaier, Neumaier};

/// Largest grid accepted by the FFT helpers (complex values).
pub const MAX_GRID: usize = 1 << 25;
/// Narrowest panel the adaptive scheme will produce.
pub const MIN_PANEL_WIDTH: f64 = 1.0 / (1u64 << 60) as f64;

/// Bisection depth limit below each initial panel.
const MAX_DEPTH: u32 = 30;
/// Bisection budget per initial panel.
const MAX_SPLITS: usize = 1 << 16;
const ROUNDING_FACTOR: f64 = 64.0;
/// Smallest fraction of the tolerance a single panel is held to.
const MIN_SHARE: f64 = 1.0 / (1u64 << 24) as f64;
const GL_ORDER: usize = 16;
const PANEL_OSCILLATIONS: f64 = 1.5;

/// A function on the frequency interval.
pub trait Integrand: Sync {
    fn eval(&self, alpha: f64) -> Complex64;

    /// Certified largest absolute frequency, when the integrand is a
    /// trigonometric polynomial in `α`.
    fn bandwidth(&self) -> Option<u64> {
        None
    }
}

/// Closure integrand with an optional bandwidth certificate.
pub struct FnIntegrand<F> {
    f: F,
    bandwidth: Option<u64>,
}

impl<F: Fn(f64) -> Complex64 + Sync> FnIntegrand<F> {
    pub fn new(f: F) -> Self {
        Self { f, bandwidth: None }
    }

    pub fn band_limited(f: F, bandwidth: u64) -> Self {
        Self {
            f,
            bandwidth: Some(bandwidth),
        }
    }
}

impl<F: Fn(f64) -> Complex64 + Sync> Integrand for FnIntegrand<F> {
    fn eval(&self, alpha: f64) -> Complex64 {
        (self.f)(alpha)
    }

    fn bandwidth(&self) -> Option<u64> {
        self.bandwidth
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOptions {
    /// Tolerance relative to the integral of |f| over the interval.
    pub rel_tol: f64,
    /// Absolute tolerance floor.
    pub abs_tol: f64,
    /// Dyadic breakpoints `±2^{-k}` are placed down to about this width.
    pub singular_scale: f64,
    /// Expected oscillation frequency; panels are cut so that each holds
    /// about 1.5 periods.
    pub bandwidth_hint: f64,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 0.0,
            singular_scale: 1.0 / 1024.0,
            bandwidth_hint: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadratureScheme {
    EquispacedExact { nodes: usize, bandwidth: u64 },
    DyadicAdaptive(AdaptiveOptions),
}

impl QuadratureScheme {
    /// Equispaced scheme with `P` the next power of two at or above `2F + 2`.
    pub fn equispaced(bandwidth: u64) -> Result<Self> {
        Ok(QuadratureScheme::EquispacedExact {
            nodes: exact_node_count(bandwidth)?,
            bandwidth,
        })
    }

    pub fn dyadic(options: AdaptiveOptions) -> Self {
        QuadratureScheme::DyadicAdaptive(options)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            QuadratureScheme::EquispacedExact { nodes, bandwidth } => {
                if (nodes as u128) < 2 * bandwidth as u128 + 2 {
                    return Err(Error::param(format!(
                        "{nodes} nodes cannot resolve bandwidth {bandwidth}; need at least {}",
                        2 * bandwidth as u128 + 2
                    )));
                }
                Ok(())
            }
            QuadratureScheme::DyadicAdaptive(o) => {
                if !(o.rel_tol >= 0.0) || !(o.abs_tol >= 0.0) || (o.rel_tol == 0.0 && o.abs_tol == 0.0) {
                    return Err(Error::param("adaptive tolerances must be nonnegative and not both zero"));
                }
                if !(o.singular_scale > 0.0) || !(o.bandwidth_hint >= 0.0) {
                    return Err(Error::param("adaptive scale and bandwidth hint must be positive"));
                }
                Ok(())
            }
        }
    }
}

/// Next power of two at or above `2F + 2`, checked against [`MAX_GRID`].
pub fn exact_node_count(bandwidth: u64) -> Result<usize> {
    let need = 2u128 * bandwidth as u128 + 2;
    let p = need.next_power_of_two();
    if p > MAX_GRID as u128 {
        return Err(Error::resource(format!(
            "bandwidth {bandwidth} needs {p} quadrature nodes, above the limit {MAX_GRID}; use a smaller N or a looser tolerance"
        )));
    }
    Ok(p as usize)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: Complex64,
    /// Zero for the equispaced scheme (exact up to rounding).
    pub error_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// ∫_a^b f(α) dα with `[a, b] ⊆ [-1/2, 1/2]`.
pub fn integrate(f: &dyn Integrand, a: f64, b: f64, scheme: &QuadratureScheme) -> Result<QuadratureResult> {
    if !(-0.5..=0.5).contains(&a) || !(-0.5..=0.5).contains(&b) || !(a < b) {
        return Err(Error::param(format!("interval [{a}, {b}] is not inside [-1/2, 1/2]")));
    }
    scheme.validate()?;
    match *scheme {
        QuadratureScheme::EquispacedExact { nodes, bandwidth } => {
            if a != -0.5 || b != 0.5 {
                return Err(Error::param("the equispaced scheme integrates over the full period only"));
            }
            let certified = f
                .bandwidth()
                .ok_or_else(|| Error::param("integrand carries no bandwidth certificate"))?;
            if certified > bandwidth {
                return Err(Error::param(format!(
                    "integrand bandwidth {certified} exceeds the scheme bandwidth {bandwidth}"
                )));
            }
            let h = 1.0 / nodes as f64;
            let sum = par_sum_complex(nodes, |j| f.eval(j as f64 * h - 0.5));
            Ok(QuadratureResult {
                value: sum * h,
                error_estimate: 0.0,
                evaluations: nodes,
                converged: true,
            })
        }
        QuadratureScheme::DyadicAdaptive(opts) => {
            let r = integrate_adaptive(&|x| [f.eval(x)], a, b, &opts)?;
            Ok(QuadratureResult {
                value: r.value[0],
                error_estimate: r.error[0],
                evaluations: r.evaluations,
                converged: r.converged,
            })
        }
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1].
fn gauss_legendre() -> &'static ([f64; GL_ORDER], [f64; GL_ORDER]) {
    static RULE: OnceLock<([f64; GL_ORDER], [f64; GL_ORDER])> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_ORDER;
        let mut x = [0.0; GL_ORDER];
        let mut w = [0.0; GL_ORDER];
        for i in 0..n.div_ceil(2) {
            let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, t);
                for k in 2..=n {
                    let k = k as f64;
                    let p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
                let dt = p1 / dp;
                t -= dt;
                if dt.abs() < 1e-16 {
                    break;
                }
            }
            let wi = 2.0 / ((1.0 - t * t) * dp * dp);
            x[i] = -t;
            x[n - 1 - i] = t;
            w[i] = wi;
            w[n - 1 - i] = wi;
        }
        (x, w)
    })
}

fn gl_panel<const K: usize, F>(f: &F, lo: f64, hi: f64) -> ([Complex64; K], [f64; K])
where
    F: Fn(f64) -> [Complex64; K] + Sync,
{
    let (x, w) = gauss_legendre();
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut val = [Complex64::new(0.0, 0.0); K];
    let mut abs = [0.0; K];
    for i in 0..GL_ORDER {
        let fx = f(mid + half * x[i]);
        for k in 0..K {
            val[k] += w[i] * fx[k];
            abs[k] += w[i] * fx[k].norm();
        }
    }
    (val.map(|v| v * half), abs.map(|v| v * half))
}

/// Outcome of [`integrate_adaptive`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveResult<const K: usize> {
    pub value: [Complex64; K],
    pub error: [f64; K],
    /// ∫|f_k| as estimated on the initial panels.
    pub l1: [f64; K],
    pub evaluations: usize,
    pub converged: bool,
}

/// Initial panel edges: `a`, `b`, `0` and `±2^{-k}` down to `scale / 2`,
/// each gap cut further so it holds about 1.5 periods of `hint`.
fn initial_panels(a: f64, b: f64, scale: f64, hint: f64) -> Vec<(f64, f64)> {
    let mut edges = vec![a, b];
    if a < 0.0 && b > 0.0 {
        edges.push(0.0);
    }
    for k in -8i32..=62 {
        let t = 2f64.powi(-k);
        if t < 0.5 * scale {
            break;
        }
        for s in [t, -t] {
            if s > a && s < b {
                edges.push(s);
            }
        }
    }
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    let mut panels = Vec::new();
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let pieces = (((hi - lo) * hint / PANEL_OSCILLATIONS).ceil() as usize).max(1);
        let step = (hi - lo) / pieces as f64;
        for i in 0..pieces {
            let x0 = lo + step * i as f64;
            let x1 = if i + 1 == pieces { hi } else { lo + step * (i + 1) as f64 };
            panels.push((x0, x1));
        }
    }
    panels
}

/// Adaptive integral of a vector-valued function over any finite `[a, b]`.
///
/// Panels are refined independently and combined in index order, so the
/// result does not depend on the number of threads.
pub fn integrate_adaptive<const K: usize, F>(f: &F, a: f64, b: f64, opts: &AdaptiveOptions) -> Result<AdaptiveResult<K>>
where
    F: Fn(f64) -> [Complex64; K] + Sync,
{
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::param(format!("invalid interval [{a}, {b}]")));
    }
    QuadratureScheme::DyadicAdaptive(*opts).validate()?;
    let panels = initial_panels(a, b, opts.singular_scale, opts.bandwidth_hint);
    let first: Vec<([Complex64; K], [f64; K])> = panels.par_iter().map(|&(lo, hi)| gl_panel(f, lo, hi)).collect();

    let mut l1 = [0.0; K];
    for k in 0..K {
        l1[k] = first.iter().map(|p| p.1[k]).collect::<Neumaier>().value();
    }
    let tol = l1.map(|m| (opts.rel_tol * m).max(opts.abs_tol));
    let width = b - a;

    let refined: Vec<PanelOutcome<K>> = panels
        .par_iter()
        .zip(first.par_iter())
        .map(|(&(lo, hi), (whole, _))| refine(f, lo, hi, *whole, &tol, width))
        .collect();

    let mut value = [Complex64::new(0.0, 0.0); K];
    let mut error = [0.0; K];
    for k in 0..K {
        value[k] = refined.iter().map(|p| p.value[k]).collect::<ComplexNeumaier>().value();
        error[k] = refined.iter().map(|p| p.error[k]).collect::<Neumaier>().value();
    }
    let evaluations = GL_ORDER * panels.len() + refined.iter().map(|p| p.evaluations).sum::<usize>();
    Ok(AdaptiveResult {
        value,
        error,
        l1,
        evaluations,
        converged: refined.iter().all(|p| p.converged),
    })
}

struct PanelOutcome<const K: usize> {
    value: [Complex64; K],
    error: [f64; K],
    evaluations: usize,
    converged: bool,
}

fn refine<const K: usize, F>(f: &F, lo: f64, hi: f64, whole: [Complex64; K], tol: &[f64; K], total: f64) -> PanelOutcome<K>
where
    F: Fn(f64) -> [Complex64; K] + Sync,
{
    let mut out = PanelOutcome {
        value: [Complex64::new(0.0, 0.0); K],
        error: [0.0; K],
        evaluations: 0,
        converged: true,
    };
    let mut acc = [ComplexNeumaier::new(); K];
    // depth-first, left half first
    let mut splits = 0usize;
    let mut stack = vec![(lo, hi, whole, 0u32)];
    while let Some((x0, x1, q, depth)) = stack.pop() {
        let mid = 0.5 * (x0 + x1);
        let (ql, al) = gl_panel(f, x0, mid);
        let (qr, ar) = gl_panel(f, mid, x1);
        out.evaluations += 2 * GL_ORDER;
        let share = (x1 - x0) / total;
        let mut ok = true;
        let mut diff = [0.0; K];
        for k in 0..K {
            diff[k] = (ql[k] + qr[k] - q[k]).norm();
            // differences at rounding level cannot shrink further, and a
            // jump in f keeps diff proportional to the width
            let floor = (ROUNDING_FACTOR * f64::EPSILON * (al[k] + ar[k])).max(tol[k] * MIN_SHARE);
            if diff[k] > (tol[k] * share).max(floor) {
                ok = false;
            }
        }
        if ok || mid - x0 < MIN_PANEL_WIDTH || depth >= MAX_DEPTH || splits >= MAX_SPLITS {
            if !ok {
                out.converged = false;
            }
            for k in 0..K {
                acc[k].add(ql[k]);
                acc[k].add(qr[k]);
                out.error[k] += diff[k];
            }
        } else {
            splits += 1;
            stack.push((mid, x1, qr, depth + 1));
            stack.push((x0, mid, ql, depth + 1));
        }
    }
    out.value = acc.map(|a| a.value());
    out
}

/// Values of `Σ c e(f α)` at `α_j = j/P`, `j = 0..P`, via one inverse FFT.
/// Frequencies are reduced modulo `P`.
pub fn trig_poly_on_grid<I>(terms: I, p: usize) -> Result<Vec<Complex64>>
where
    I: IntoIterator<Item = (i64, Complex64)>,
{
    if p == 0 || p > MAX_GRID {
        return Err(Error::resource(format!("grid size {p} outside 1..={MAX_GRID}")));
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); p];
    for (f, c) in terms {
        buf[f.rem_euclid(p as i64) as usize] += c;
    }
    FftPlanner::new().plan_fft_inverse(p).process(&mut buf);
    Ok(buf)
}

/// `Σ_j x_j e(-k j/P)` for every `k`, in place.
pub fn forward_dft(values: &mut [Complex64]) {
    FftPlanner::new().plan_fft_forward(values.len()).process(values);
}

/// Values of a damped series on the grid `j/P`.
pub fn series_on_grid(series: &DampedSeries, p: usize) -> Result<Vec<Complex64>> {
    if series.bandwidth() as u128 >= p as u128 {
        return Err(Error::param(format!(
            "grid of {p} points cannot hold frequency {}",
            series.bandwidth()
        )));
    }
    trig_poly_on_grid(series.terms().map(|(f, w)| (f as i64, Complex64::new(w, 0.0))), p)
}

/// In-memory cache of series grids keyed by `(ℓ, N, cutoff, P)`.
#[derive(Debug, Default)]
pub struct GridCache {
    grids: Mutex<HashMap<(u32, u64, u64, usize), Arc<Vec<Complex64>>>>,
}

impl GridCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn series_grid(&self, series: &DampedSeries, p: usize) -> Result<Arc<Vec<Complex64>>> {
        let s = series.spec();
        let key = (s.ell, s.n, s.cutoff, p);
        if let Some(g) = self.grids.lock().expect("grid cache lock").get(&key) {
            return Ok(g.clone());
        }
        let g = Arc::new(series_on_grid(series, p)?);
        self.grids.lock().expect("grid cache lock").insert(key, g.clone());
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.grids.lock().expect("grid cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

const INTERP_POINTS: usize = 16;
const INTERP_TARGET: f64 = 1e-16;

/// Local 16-point polynomial interpolation on an oversampled periodic grid
/// of a trigonometric polynomial with nonnegative frequencies `<= F`.
///
/// With grid spacing `h = 1/P`, the error is at most
/// `Σ|c|·(2πF h)^16 / 64`, stored as [`Self::error_bound`].
#[derive(Debug, Clone)]
pub struct BandLimitedInterpolant {
    values: Arc<Vec<Complex64>>,
    p: usize,
    error_bound: f64,
}

fn interp_weights() -> &'static [f64; INTERP_POINTS] {
    static W: OnceLock<[f64; INTERP_POINTS]> = OnceLock::new();
    W.get_or_init(|| {
        let mut w = [0.0; INTERP_POINTS];
        let mut binom = 1.0;
        for (j, wj) in w.iter_mut().enumerate() {
            *wj = if j % 2 == 0 { binom } else { -binom };
            binom = binom * (INTERP_POINTS - 1 - j) as f64 / (j + 1) as f64;
        }
        w
    })
}

fn interp_error_factor(bandwidth: u64, p: usize) -> f64 {
    let q = INTERP_POINTS as i32;
    (TAU * bandwidth as f64 / p as f64).powi(q) / (4.0 * q as f64)
}

impl BandLimitedInterpolant {
    /// Grid size: smallest power of two whose error factor is below 1e-16.
    pub fn grid_size(bandwidth: u64) -> Result<usize> {
        let mut p = (2 * bandwidth.max(1) + 2).next_power_of_two() as usize;
        while interp_error_factor(bandwidth, p) > INTERP_TARGET {
            p *= 2;
        }
        if p > MAX_GRID {
            return Err(Error::resource(format!(
                "interpolation grid for bandwidth {bandwidth} needs {p} points, above {MAX_GRID}"
            )));
        }
        Ok(p)
    }

    pub fn for_series(series: &DampedSeries, cache: &GridCache) -> Result<Self> {
        let p = Self::grid_size(series.bandwidth())?;
        let values = cache.series_grid(series, p)?;
        Ok(Self {
            values,
            p,
            error_bound: series.coefficient_l1() * interp_error_factor(series.bandwidth(), p),
        })
    }

    pub fn grid_points(&self) -> usize {
        self.p
    }

    pub fn error_bound(&self) -> f64 {
        self.error_bound
    }

    pub fn eval(&self, alpha: f64) -> Complex64 {
        let p = self.p as i64;
        let u = alpha * self.p as f64;
        let base = u.floor() as i64 - (INTERP_POINTS as i64 / 2 - 1);
        let t = u - base as f64;
        let w = interp_weights();
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for (j, &wj) in w.iter().enumerate() {
            let idx = (base + j as i64).rem_euclid(p) as usize;
            let d = t - j as f64;
            if d == 0.0 {
                return self.values[idx];
            }
            let c = wj / d;
            num += c * self.values[idx];
            den += c;
        }
        num / den
    }
}
