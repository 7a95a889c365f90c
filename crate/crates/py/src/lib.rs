//! Python bindings: prime tables, representation counts, damped
//! exponential sums, the explicit formula and the circle-method checks.

use std::path::PathBuf;

use num_complex::Complex64;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use wgl_core as core;
use wgl_core::{AdaptiveOptions, CirclePipeline, Error, FrequencyPoint, QuadratureScheme, SeriesPair};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyOSError::new_err(io.to_string()),
        Error::Resource { .. } | Error::Unreliable(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

fn freq(alpha: f64) -> PyResult<FrequencyPoint> {
    FrequencyPoint::new(alpha).py()
}

fn adaptive(rel_tol: f64) -> QuadratureScheme {
    QuadratureScheme::dyadic(AdaptiveOptions {
        rel_tol,
        ..AdaptiveOptions::default()
    })
}

/// Λ(n), primality and prime powers up to a limit.
#[pyclass(frozen, name = "PrimeTables")]
struct PyPrimeTables {
    inner: core::VonMangoldtTable,
}

impl PyPrimeTables {
    fn check(&self, n: u64) -> PyResult<()> {
        if n > self.inner.limit() {
            return Err(PyValueError::new_err(format!("{n} is past the table limit {}", self.inner.limit())));
        }
        Ok(())
    }
}

#[pymethods]
impl PyPrimeTables {
    #[new]
    fn new(limit: u64) -> PyResult<Self> {
        Ok(Self {
            inner: core::build_prime_tables(limit).py()?,
        })
    }

    /// Tables read from, or written to, a cache directory.
    #[staticmethod]
    fn cached(limit: u64, cache_dir: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: core::sieve::cached_prime_tables(&cache_dir, limit).py()?,
        })
    }

    #[getter]
    fn limit(&self) -> u64 {
        self.inner.limit()
    }

    #[getter]
    fn prime_count(&self) -> usize {
        self.inner.prime_count()
    }

    fn von_mangoldt(&self, n: u64) -> PyResult<f64> {
        self.check(n)?;
        Ok(self.inner.lambda(n))
    }

    fn is_prime(&self, n: u64) -> PyResult<bool> {
        self.check(n)?;
        Ok(self.inner.is_prime(n))
    }

    fn primes(&self) -> Vec<u64> {
        self.inner.primes().to_vec()
    }

    fn prime_powers(&self) -> Vec<u64> {
        self.inner.prime_powers().to_vec()
    }

    fn chebyshev_psi(&self, x: u64) -> PyResult<f64> {
        self.check(x)?;
        Ok(self.inner.chebyshev_psi(x))
    }

    fn __len__(&self) -> usize {
        self.inner.limit() as usize + 1
    }

    fn __repr__(&self) -> String {
        format!("PrimeTables(limit={}, primes={})", self.inner.limit(), self.inner.prime_count())
    }
}

/// Truncation of a damped series S̃_ℓ at N with a certified tail.
#[pyclass(frozen, get_all, name = "SeriesSpec")]
struct PySeriesSpec {
    ell: u32,
    n: u64,
    cutoff: u64,
    tail_eps: f64,
    tail_bound: f64,
}

impl PySeriesSpec {
    fn core(&self) -> core::TruncatedSeriesSpec {
        core::TruncatedSeriesSpec {
            ell: self.ell,
            n: self.n,
            cutoff: self.cutoff,
            tail_eps: self.tail_eps,
            tail_bound: self.tail_bound,
        }
    }
}

#[pymethods]
impl PySeriesSpec {
    #[new]
    #[pyo3(signature = (ell, n, eps = 1e-14))]
    fn new(ell: u32, n: u64, eps: f64) -> PyResult<Self> {
        let s = core::truncation_cutoff(ell, n, eps).py()?;
        Ok(Self {
            ell: s.ell,
            n: s.n,
            cutoff: s.cutoff,
            tail_eps: s.tail_eps,
            tail_bound: s.tail_bound,
        })
    }

    #[getter]
    fn bandwidth(&self) -> u64 {
        self.core().bandwidth()
    }

    fn __repr__(&self) -> String {
        format!("SeriesSpec(ell={}, n={}, cutoff={})", self.ell, self.n, self.cutoff)
    }
}

/// Ordinates of zeta zeros read from a text file.
#[pyclass(frozen, name = "Zeros")]
struct PyZeros {
    inner: core::ZeroSet,
}

#[pymethods]
impl PyZeros {
    #[new]
    #[pyo3(signature = (path, max_count = 100_000))]
    fn new(path: PathBuf, max_count: usize) -> PyResult<Self> {
        Ok(Self {
            inner: core::load_zeros(&path, max_count).py()?,
        })
    }

    #[staticmethod]
    fn from_list(gammas: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: core::ZeroSet::from_gammas(gammas).py()?,
        })
    }

    fn gammas(&self) -> Vec<f64> {
        self.inner.gammas().to_vec()
    }

    #[getter]
    fn digest(&self) -> &str {
        self.inner.source_digest()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

#[pyfunction]
fn count_r(n: u64, tables: &PyPrimeTables) -> PyResult<f64> {
    core::count_r(n, &tables.inner).py()
}

#[pyfunction]
fn count_rstar(n: u64, tables: &PyPrimeTables) -> PyResult<u64> {
    core::count_rstar(n, &tables.inner).py()
}

#[pyfunction]
fn count_big_r(n: u64, tables: &PyPrimeTables) -> PyResult<f64> {
    core::count_big_r(n, &tables.inner).py()
}

#[pyfunction]
fn is_in_a(n: u64) -> bool {
    core::is_in_a(n)
}

#[pyclass(frozen, get_all, name = "IntervalSum")]
struct PyIntervalSum {
    n: u64,
    h: u64,
    sum_r: f64,
    sum_r_weighted: f64,
    main_term: f64,
    ratio: f64,
}

/// Σ r(n) over (N, N+H] against (π/4)HN.
#[pyfunction]
fn interval_r_sum(n: u64, h: u64, tables: &PyPrimeTables) -> PyResult<PyIntervalSum> {
    let r = core::interval_r_sum(n, h, &tables.inner).py()?;
    Ok(PyIntervalSum {
        n: r.n,
        h: r.h,
        sum_r: r.sum_r,
        sum_r_weighted: r.sum_r_weighted,
        main_term: r.main_term,
        ratio: r.ratio,
    })
}

#[pyfunction]
fn s_ell(alpha: f64, ell: u32, n: u64, tables: &PyPrimeTables) -> PyResult<Complex64> {
    core::s_ell(freq(alpha)?, ell, n, &tables.inner).py()
}

#[pyfunction]
fn t_ell(alpha: f64, ell: u32, n: u64) -> PyResult<Complex64> {
    core::t_ell(freq(alpha)?, ell, n).py()
}

#[pyfunction]
fn s_tilde(alpha: f64, spec: &PySeriesSpec, tables: &PyPrimeTables) -> PyResult<Complex64> {
    core::s_tilde(freq(alpha)?, &spec.core(), &tables.inner).py()
}

/// S̃ at many frequencies from one coefficient setup.
#[pyfunction]
fn s_tilde_many(alphas: Vec<f64>, spec: &PySeriesSpec, tables: &PyPrimeTables) -> PyResult<Vec<Complex64>> {
    let series = core::DampedSeries::new(&spec.core(), &tables.inner).py()?;
    alphas.into_iter().map(|a| Ok(series.eval(freq(a)?.value()))).collect()
}

#[pyfunction]
fn u_kernel(alpha: f64, h: u64) -> PyResult<Complex64> {
    core::u_kernel(freq(alpha)?, h).py()
}

#[pyfunction]
fn gamma(z: Complex64) -> PyResult<Complex64> {
    core::complex_gamma(z).py()
}

#[pyfunction]
fn ln_gamma(z: Complex64) -> PyResult<Complex64> {
    core::ln_gamma(z).py()
}

#[pyclass(frozen, get_all, name = "Residual")]
struct PyResidual {
    alpha: f64,
    s_tilde: Complex64,
    main_term: Complex64,
    zero_sum: Complex64,
    residual: Complex64,
    tail_bound: f64,
    zeros_used: usize,
}

/// S̃_ℓ(α) - main term + sum over the first `k` zeros.
#[pyfunction]
#[pyo3(signature = (alpha, spec, tables, zeros, k = None, tail_tol = 0.1))]
fn explicit_residual(
    alpha: f64,
    spec: &PySeriesSpec,
    tables: &PyPrimeTables,
    zeros: &PyZeros,
    k: Option<usize>,
    tail_tol: f64,
) -> PyResult<PyResidual> {
    let k = k.unwrap_or(zeros.inner.len());
    let r = core::explicit_residual(freq(alpha)?, &spec.core(), &tables.inner, &zeros.inner, k, tail_tol).py()?;
    Ok(PyResidual {
        alpha: r.alpha,
        s_tilde: r.s_tilde,
        main_term: r.main_term,
        zero_sum: r.zero_sum,
        residual: r.residual,
        tail_bound: r.tail_bound,
        zeros_used: r.zeros_used,
    })
}

fn pipeline_tables(n: u64, eps: f64, extra: u64) -> PyResult<(SeriesPair, core::VonMangoldtTable)> {
    let specs = SeriesPair::for_tolerance(n, eps).py()?;
    let table = core::build_prime_tables(specs.table_limit().max(extra)).py()?;
    Ok((specs, table))
}

/// R(n) recovered from the Fourier integral of S̃₁S̃₂².
#[pyfunction]
#[pyo3(signature = (n, ns, eps = 1e-14))]
fn reconstruct(n: u64, ns: Vec<u64>, eps: f64) -> PyResult<Vec<f64>> {
    let top = ns.iter().copied().max().unwrap_or(0);
    let (specs, table) = pipeline_tables(n, eps, top)?;
    CirclePipeline::new(specs, &table).py()?.reconstruct(&ns).py()
}

#[pyclass(frozen, get_all, name = "Decomposition")]
struct PyDecomposition {
    n: u64,
    h: u64,
    i1: Complex64,
    i2: Complex64,
    i3: Complex64,
    total: Complex64,
    unsplit: Complex64,
    direct: f64,
    max_rel_gap: f64,
    i1_reference: f64,
    error_estimate: f64,
    unreliable: bool,
}

/// Split of the weighted interval integral into I₁ + I₂ + I₃.
#[pyfunction]
#[pyo3(signature = (n, h, eps = 1e-14, rel_tol = 1e-12))]
fn decompose(n: u64, h: u64, eps: f64, rel_tol: f64) -> PyResult<PyDecomposition> {
    let (specs, table) = pipeline_tables(n, eps, 0)?;
    let r = CirclePipeline::new(specs, &table).py()?.decompose(h, rel_tol).py()?;
    Ok(PyDecomposition {
        n: r.n,
        h: r.h,
        i1: r.i1,
        i2: r.i2,
        i3: r.i3,
        total: r.total,
        unsplit: r.unsplit,
        direct: r.direct,
        max_rel_gap: r.max_rel_gap,
        i1_reference: r.i1_reference,
        error_estimate: r.error_estimate,
        unreliable: r.unreliable,
    })
}

/// (coefficient sum, quadrature) for ∫|S̃₁|² and ∫|S̃₂|⁴.
#[pyfunction]
#[pyo3(signature = (n, eps = 1e-14))]
fn moments(n: u64, eps: f64) -> PyResult<((f64, f64), (f64, f64))> {
    let s1 = core::truncation_cutoff(1, n, eps).py()?;
    let s2 = core::truncation_cutoff(2, n, eps).py()?;
    let table = core::build_prime_tables(s1.cutoff.max(s2.cutoff)).py()?;
    let series = core::DampedSeries::new(&s1, &table).py()?;
    let p = core::quadrature::exact_node_count(2 * series.bandwidth()).py()?;
    let grid = core::quadrature::series_on_grid(&series, p).py()?;
    let quad2 = grid.iter().map(|v| v.norm_sqr()).sum::<f64>() / p as f64;
    let second = (core::parseval_second_moment(1, &s1, &table).py()?, quad2);
    let fourth = core::fourth_moment_pair(n, &s2, &table).py()?;
    Ok((second, fourth))
}

#[pyclass(frozen, get_all, name = "Moment")]
struct PyMoment {
    value: f64,
    error_estimate: f64,
    unreliable: bool,
    out_of_range: bool,
}

impl From<core::MomentResult> for PyMoment {
    fn from(r: core::MomentResult) -> Self {
        Self {
            value: r.value,
            error_estimate: r.error_estimate,
            unreliable: r.unreliable,
            out_of_range: r.out_of_range,
        }
    }
}

/// ∫ over |α| <= 1/H of |S_ℓ - T_ℓ|².
#[pyfunction]
#[pyo3(signature = (n, ell, h, rel_tol = 1e-12))]
fn mean_square_s_minus_t(n: u64, ell: u32, h: u64, rel_tol: f64) -> PyResult<PyMoment> {
    let table = core::build_prime_tables(n).py()?;
    Ok(core::mean_square_s_minus_t(n, ell, h, &table, &adaptive(rel_tol)).py()?.into())
}

/// ∫ over |α| <= ξ of |S̃_ℓ - Γ(1/ℓ)/(ℓ z^{1/ℓ})|².
#[pyfunction]
#[pyo3(signature = (n, ell, xi, eps = 1e-14, rel_tol = 1e-12))]
fn l2_error_moment(n: u64, ell: u32, xi: f64, eps: f64, rel_tol: f64) -> PyResult<PyMoment> {
    let spec = core::truncation_cutoff(ell, n, eps).py()?;
    let table = core::build_prime_tables(spec.cutoff).py()?;
    Ok(core::l2_error_moment(n, ell, xi, &spec, &table, &adaptive(rel_tol)).py()?.into())
}

#[pyclass(frozen, get_all, name = "LaplaceCheck")]
struct PyLaplaceCheck {
    n: u64,
    big_n: u64,
    mu: f64,
    quadrature_value: Complex64,
    closed_form: f64,
    abs_err: f64,
    scaled_err: f64,
    error_estimate: f64,
    unreliable: bool,
}

/// ∫ e(-nα) z^{-μ} dα over one period against n^{μ-1} e^{-n/N}/Γ(μ).
#[pyfunction]
#[pyo3(signature = (n, big_n, mu, rel_tol = 1e-12))]
fn laplace_check(n: u64, big_n: u64, mu: f64, rel_tol: f64) -> PyResult<PyLaplaceCheck> {
    let r = core::laplace_check(n, big_n, mu, &adaptive(rel_tol)).py()?;
    Ok(PyLaplaceCheck {
        n: r.n,
        big_n: r.big_n,
        mu: r.mu,
        quadrature_value: r.quadrature_value,
        closed_form: r.closed_form,
        abs_err: r.abs_err,
        scaled_err: r.scaled_err,
        error_estimate: r.error_estimate,
        unreliable: r.unreliable,
    })
}

#[pymodule]
fn wgl(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPrimeTables>()?;
    m.add_class::<PySeriesSpec>()?;
    m.add_class::<PyZeros>()?;
    m.add_class::<PyIntervalSum>()?;
    m.add_class::<PyResidual>()?;
    m.add_class::<PyDecomposition>()?;
    m.add_class::<PyMoment>()?;
    m.add_class::<PyLaplaceCheck>()?;
    m.add_function(wrap_pyfunction!(count_r, m)?)?;
    m.add_function(wrap_pyfunction!(count_rstar, m)?)?;
    m.add_function(wrap_pyfunction!(count_big_r, m)?)?;
    m.add_function(wrap_pyfunction!(is_in_a, m)?)?;
    m.add_function(wrap_pyfunction!(interval_r_sum, m)?)?;
    m.add_function(wrap_pyfunction!(s_ell, m)?)?;
    m.add_function(wrap_pyfunction!(t_ell, m)?)?;
    m.add_function(wrap_pyfunction!(s_tilde, m)?)?;
    m.add_function(wrap_pyfunction!(s_tilde_many, m)?)?;
    m.add_function(wrap_pyfunction!(u_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(gamma, m)?)?;
    m.add_function(wrap_pyfunction!(ln_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(explicit_residual, m)?)?;
    m.add_function(wrap_pyfunction!(reconstruct, m)?)?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(moments, m)?)?;
    m.add_function(wrap_pyfunction!(mean_square_s_minus_t, m)?)?;
    m.add_function(wrap_pyfunction!(l2_error_moment, m)?)?;
    m.add_function(wrap_pyfunction!(laplace_check, m)?)?;
    Ok(())
}
