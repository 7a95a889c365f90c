//! One function per subcommand. Each computes its rows and reports what the
//! manifest needs; writing files is left to the caller.

use anyhow::Result;
use clap::Subcommand;
use wgl_core::quadrature::{exact_node_count, series_on_grid};
use wgl_core::sieve::{cached_prime_tables, iroot};
use wgl_core::sum::compensated_sum;
use wgl_core::{
    count_big_r, explicit_residual, fourth_moment_pair, fourth_moment_scheme, interval_r_sum, l2_error_moment,
    laplace_check, load_zeros, mean_square_s_minus_t, parseval_second_moment, truncation_cutoff, AdaptiveOptions,
    CirclePipeline, DampedSeries, Error as CoreError, FrequencyPoint, QuadratureScheme, SeriesPair, VonMangoldtTable,
};

use crate::config::ExperimentConfig;
use crate::exit::CliError;
use crate::output::{Cell, Table};

/// Below this N the interval command reports ratios without judging them.
pub const SMALL_N: u64 = 1000;
/// Ratio band for Σr / ((π/4)HN) outside small-N mode.
pub const RATIO_BAND: (f64, f64) = (0.8, 1.2);
/// Relative agreement expected between the two sides of an exact identity.
pub const IDENTITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Prime and von Mangoldt tables up to N.
    Sieve,
    /// Σ r(n) over (N, N+H] against (π/4)HN.
    Interval,
    /// Error of the interval sum across several H.
    Scaling,
    /// Explicit-formula residual on a frequency grid around zero.
    Explicit,
    /// Second and fourth moments, coefficient side against quadrature.
    Moments,
    /// Laplace-transform identity on a doubling ladder of n.
    Laplace,
    /// R(n) recovered from the Fourier integral.
    Reconstruct,
    /// Mean square of S - T near zero frequency.
    MeanSquareSt,
    /// L² error of the damped sum against its main term.
    L2Moment,
    /// Split of the weighted interval integral into three parts.
    Decompose,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Sieve => "sieve",
            Command::Interval => "interval",
            Command::Scaling => "scaling",
            Command::Explicit => "explicit",
            Command::Moments => "moments",
            Command::Laplace => "laplace",
            Command::Reconstruct => "reconstruct",
            Command::MeanSquareSt => "mean-square-st",
            Command::L2Moment => "l2-moment",
            Command::Decompose => "decompose",
        }
    }

    pub const ALL: [Command; 10] = [
        Command::Sieve,
        Command::Interval,
        Command::Scaling,
        Command::Explicit,
        Command::Moments,
        Command::Laplace,
        Command::Reconstruct,
        Command::MeanSquareSt,
        Command::L2Moment,
        Command::Decompose,
    ];
}

/// Rows plus the bookkeeping a manifest records.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub table: Table,
    pub table_limit: u64,
    pub zero_digest: Option<String>,
    pub warnings: Vec<String>,
    /// Checks the results failed; a non-empty list makes the run unreliable.
    pub failures: Vec<String>,
}

impl Outcome {
    fn new(table: Table, table_limit: u64) -> Self {
        Self {
            table,
            table_limit,
            zero_digest: None,
            warnings: Vec::new(),
            failures: Vec::new(),
        }
    }

    fn warn(&mut self, text: String) {
        self.table.note(format!("warning: {text}"));
        self.warnings.push(text);
    }
}

pub fn run(command: Command, cfg: &ExperimentConfig) -> Result<Outcome> {
    match command {
        Command::Sieve => sieve(cfg),
        Command::Interval => interval(cfg),
        Command::Scaling => scaling(cfg),
        Command::Explicit => explicit(cfg),
        Command::Moments => moments(cfg),
        Command::Laplace => laplace(cfg),
        Command::Reconstruct => reconstruct(cfg),
        Command::MeanSquareSt => mean_square(cfg),
        Command::L2Moment => l2_moment(cfg),
        Command::Decompose => decompose(cfg),
    }
}

fn tables(cfg: &ExperimentConfig, limit: u64) -> Result<VonMangoldtTable> {
    Ok(cached_prime_tables(&cfg.cache_dir, limit.max(2))?)
}

fn usage(text: String) -> anyhow::Error {
    CliError::Usage(text).into()
}

fn adaptive(cfg: &ExperimentConfig) -> QuadratureScheme {
    QuadratureScheme::dyadic(AdaptiveOptions {
        rel_tol: cfg.rel_tol,
        ..AdaptiveOptions::default()
    })
}

fn sieve(cfg: &ExperimentConfig) -> Result<Outcome> {
    let t = tables(cfg, cfg.n)?;
    let limit = t.limit();
    let mut table = Table::new(
        "sieve",
        &["limit", "prime_count", "prime_power_count", "psi", "theta", "psi_over_limit"],
    );
    let psi = t.chebyshev_psi(limit);
    let theta = compensated_sum(t.primes().iter().map(|&p| (p as f64).ln()));
    table.push(vec![
        limit.into(),
        t.prime_count().into(),
        t.prime_powers().len().into(),
        psi.into(),
        theta.into(),
        (psi / limit as f64).into(),
    ]);
    Ok(Outcome::new(table, limit))
}

fn check_h_below_n(cfg: &ExperimentConfig) -> Result<()> {
    if let Some(&h) = cfg.h.iter().find(|&&h| h >= cfg.n) {
        return Err(usage(format!("H = {h} must be below N = {}", cfg.n)));
    }
    Ok(())
}

/// Warn where H leaves the range in which the asymptotic law is stated.
fn h_range_warnings(out: &mut Outcome, n: u64, h: u64) {
    let l = (n as f64).ln();
    if h as f64 > n as f64 / l.powf(1.5) {
        out.warn(format!("H = {h} exceeds N/ln(N)^1.5 = {:.1}", n as f64 / l.powf(1.5)));
    }
}

fn interval(cfg: &ExperimentConfig) -> Result<Outcome> {
    check_h_below_n(cfg)?;
    let n = cfg.n;
    let hmax = *cfg.h.iter().max().unwrap();
    let t = tables(cfg, n + hmax)?;
    let table = Table::new(
        "interval",
        &[
            "N",
            "H",
            "sum_r",
            "sum_r_weighted",
            "main_term",
            "ratio",
            "sum_r_over_hn",
            "quarter_pi",
            "h_over_log4",
            "regime",
        ],
    );
    let mut out = Outcome::new(table, t.limit());
    let small = n < SMALL_N;
    if small {
        out.table.note(format!("small-N mode: N < {SMALL_N}, ratio band not applied"));
    }
    let l4 = (n as f64).ln().powi(4);
    for &h in &cfg.h {
        h_range_warnings(&mut out, n, h);
        let r = interval_r_sum(n, h, &t)?;
        let regime = if small {
            "small-N"
        } else if (RATIO_BAND.0..=RATIO_BAND.1).contains(&r.ratio) {
            "in-band"
        } else {
            out.warn(format!("ratio {:.4} at H = {h} is outside {RATIO_BAND:?}", r.ratio));
            "out-of-band"
        };
        out.table.push(vec![
            n.into(),
            h.into(),
            r.sum_r.into(),
            r.sum_r_weighted.into(),
            r.main_term.into(),
            r.ratio.into(),
            (r.sum_r / (h as f64 * n as f64)).into(),
            std::f64::consts::FRAC_PI_4.into(),
            (h as f64 / l4).into(),
            regime.into(),
        ]);
    }
    Ok(out)
}

/// Least-squares slope of ln y against ln x over points with y > 0.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        f64::NAN
    } else {
        sxy / sxx
    }
}

fn scaling(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut hs = cfg.h.clone();
    hs.sort_unstable();
    hs.dedup();
    if hs.len() < 3 {
        return Err(usage(format!("scaling needs at least 3 distinct H values, got {}", hs.len())));
    }
    check_h_below_n(cfg)?;
    let n = cfg.n;
    let t = tables(cfg, n + hs[hs.len() - 1])?;
    let table = Table::new(
        "scaling",
        &[
            "N",
            "H",
            "sum_r",
            "main_term",
            "abs_error",
            "shape_sqrt_h",
            "shape_n34",
            "shape_h2",
            "loglog_slope",
        ],
    );
    let mut out = Outcome::new(table, t.limit());
    let nf = n as f64;
    let l = nf.ln();
    let mut rows = Vec::new();
    for &h in &hs {
        h_range_warnings(&mut out, n, h);
        let r = interval_r_sum(n, h, &t)?;
        rows.push((h, r.sum_r, r.main_term, (r.sum_r - r.main_term).abs()));
    }
    let slope = loglog_slope(&rows.iter().map(|r| (r.0 as f64, r.3)).collect::<Vec<_>>());
    out.table.note(format!("log-log slope of abs_error against H: {}", crate::output::format_float(slope)));
    for (h, sum_r, main, err) in rows {
        let hf = h as f64;
        out.table.push(vec![
            n.into(),
            h.into(),
            sum_r.into(),
            main.into(),
            err.into(),
            (hf.sqrt() * nf * l * l).into(),
            (hf * nf.powf(0.75) * l.powi(3)).into(),
            (hf * hf * l.powf(1.5)).into(),
            slope.into(),
        ]);
    }
    Ok(out)
}

fn explicit(cfg: &ExperimentConfig) -> Result<Outcome> {
    let path = cfg
        .zeros_path
        .as_ref()
        .ok_or_else(|| CliError::Config("explicit needs a zeros file (--zeros)".into()))?;
    if !path.is_file() {
        return Err(CliError::Config(format!("zeros file {} not found", path.display())).into());
    }
    let zeros = load_zeros(path, cfg.k)?;
    let spec = truncation_cutoff(cfg.ell, cfg.n, cfg.eps)?;
    let t = tables(cfg, spec.cutoff)?;
    let table = Table::new(
        "explicit",
        &[
            "N",
            "ell",
            "alpha",
            "main_abs",
            "zero_sum_abs",
            "residual_re",
            "residual_im",
            "residual_abs",
            "tail_bound",
            "zeros_used",
            "status",
        ],
    );
    let mut out = Outcome::new(table, t.limit());
    out.zero_digest = Some(zeros.source_digest().to_string());
    if zeros.len() < cfg.k {
        out.warn(format!("K = {} clipped to the {} zeros in {}", cfg.k, zeros.len(), path.display()));
    }
    let m = cfg.alpha_points as i64;
    for j in -m..=m {
        let a = if m == 0 { 0.0 } else { cfg.alpha_width * j as f64 / (m as f64 * cfg.n as f64) };
        let alpha = FrequencyPoint::new(a)?;
        match explicit_residual(alpha, &spec, &t, &zeros, zeros.len(), cfg.tail_tol) {
            Ok(r) => out.table.push(vec![
                cfg.n.into(),
                cfg.ell.into(),
                a.into(),
                r.main_term.norm().into(),
                r.zero_sum.norm().into(),
                r.residual.re.into(),
                r.residual.im.into(),
                r.residual.norm().into(),
                r.tail_bound.into(),
                r.zeros_used.into(),
                "ok".into(),
            ]),
            Err(CoreError::InsufficientZeros { bound, .. }) => out.table.push(vec![
                cfg.n.into(),
                cfg.ell.into(),
                a.into(),
                Cell::Missing,
                Cell::Missing,
                Cell::Missing,
                Cell::Missing,
                Cell::Missing,
                bound.into(),
                zeros.len().into(),
                "refused".into(),
            ]),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(out)
}

fn moments(cfg: &ExperimentConfig) -> Result<Outcome> {
    let n = cfg.n;
    let spec1 = truncation_cutoff(1, n, cfg.eps)?;
    let spec2 = truncation_cutoff(2, n, cfg.eps)?;
    let t = tables(cfg, spec1.cutoff.max(spec2.cutoff))?;
    let table = Table::new(
        "moments",
        &["moment", "N", "coefficient_sum", "quadrature", "rel_diff", "normalized", "nodes"],
    );
    let mut out = Outcome::new(table, t.limit());
    let nf = n as f64;
    let l = nf.ln();

    let s1 = DampedSeries::new(&spec1, &t)?;
    let p = exact_node_count(2 * s1.bandwidth())?;
    let grid = series_on_grid(&s1, p)?;
    let quad2 = compensated_sum(grid.iter().map(|v| v.norm_sqr())) / p as f64;
    let coeff2 = parseval_second_moment(1, &spec1, &t)?;

    let (coeff4, quad4) = fourth_moment_pair(n, &spec2, &t)?;
    let nodes4 = match fourth_moment_scheme(&spec2)? {
        QuadratureScheme::EquispacedExact { nodes, .. } => nodes,
        QuadratureScheme::DyadicAdaptive(_) => unreachable!("the fourth moment scheme is equispaced"),
    };

    for (name, coeff, quad, norm, nodes) in [
        ("second", coeff2, quad2, nf * l, p),
        ("fourth", coeff4, quad4, nf * l * l, nodes4),
    ] {
        let rel = (quad - coeff).abs() / coeff.abs().max(f64::MIN_POSITIVE);
        if rel > IDENTITY_TOL {
            out.failures.push(format!("{name} moment: quadrature and coefficient sum differ by {rel:.2e}"));
        }
        out.table.push(vec![
            name.into(),
            n.into(),
            coeff.into(),
            quad.into(),
            rel.into(),
            (coeff / norm).into(),
            nodes.into(),
        ]);
    }
    Ok(out)
}

fn laplace(cfg: &ExperimentConfig) -> Result<Outcome> {
    let ns: Vec<u64> = if cfg.n_list.is_empty() {
        (0..cfg.rungs).map(|k| cfg.n << k).collect()
    } else {
        cfg.n_list.clone()
    };
    let scheme = adaptive(cfg);
    let table = Table::new(
        "laplace",
        &[
            "mu",
            "N",
            "n",
            "quadrature_re",
            "quadrature_im",
            "closed_form",
            "abs_err",
            "scaled_err",
            "error_estimate",
            "unresolved",
        ],
    );
    let mut out = Outcome::new(table, 0);
    for &mu in &cfg.mu {
        for &n in &ns {
            let r = laplace_check(n, cfg.n, mu, &scheme)?;
            out.table.push(vec![
                mu.into(),
                cfg.n.into(),
                n.into(),
                r.quadrature_value.re.into(),
                r.quadrature_value.im.into(),
                r.closed_form.into(),
                r.abs_err.into(),
                r.scaled_err.into(),
                r.error_estimate.into(),
                r.unreliable.into(),
            ]);
        }
    }
    Ok(out)
}

fn reconstruct(cfg: &ExperimentConfig) -> Result<Outcome> {
    if cfg.n_list.is_empty() {
        return Err(usage("reconstruct needs a list of n values (--n)".into()));
    }
    let specs = SeriesPair::for_tolerance(cfg.n, cfg.eps)?;
    let top = *cfg.n_list.iter().max().unwrap();
    let t = tables(cfg, specs.table_limit().max(top))?;
    let pipe = CirclePipeline::new(specs, &t)?;
    let values = pipe.reconstruct(&cfg.n_list)?;
    let table = Table::new("reconstruct", &["n", "reconstructed", "sieve_count", "abs_diff", "rel_diff"]);
    let mut out = Outcome::new(table, t.limit());
    for (&n, &v) in cfg.n_list.iter().zip(&values) {
        let exact = if n >= 2 { count_big_r(n, &t)? } else { 0.0 };
        let diff = (v - exact).abs();
        let rel = if exact == 0.0 { f64::NAN } else { diff / exact };
        if diff > (1e-8 * exact).max(1e-10) {
            out.failures.push(format!("R({n}): reconstruction off by {diff:.3e}"));
        }
        out.table.push(vec![n.into(), v.into(), exact.into(), diff.into(), rel.into()]);
    }
    Ok(out)
}

fn mean_square(cfg: &ExperimentConfig) -> Result<Outcome> {
    let (n, ell) = (cfg.n, cfg.ell);
    if n < 1u64 << ell.min(63) {
        return Err(usage(format!("N must be at least 2^ell = {}", 1u64 << ell.min(63))));
    }
    let t = tables(cfg, iroot(n, ell))?;
    let scheme = adaptive(cfg);
    let table = Table::new(
        "mean-square-st",
        &["N", "ell", "H", "value", "error_estimate", "normalized", "out_of_range", "unreliable"],
    );
    let mut out = Outcome::new(table, t.limit());
    let nf = n as f64;
    let (l, inv_ell) = (nf.ln(), 1.0 / ell as f64);
    for &h in &cfg.h {
        let r = mean_square_s_minus_t(n, ell, h, &t, &scheme)?;
        let hf = h as f64;
        let shape = nf.powf(inv_ell) * l * l / hf + hf * nf.powf(2.0 * inv_ell - 2.0) * l * l;
        if r.out_of_range {
            out.warn(format!("H = {h} is outside N^(1-1/ell) <= H <= N"));
        }
        if r.unreliable {
            out.failures.push(format!("H = {h}: error estimate {:.2e} too large", r.error_estimate));
        }
        out.table.push(vec![
            n.into(),
            ell.into(),
            h.into(),
            r.value.into(),
            r.error_estimate.into(),
            (r.value / shape).into(),
            r.out_of_range.into(),
            r.unreliable.into(),
        ]);
    }
    Ok(out)
}

fn l2_moment(cfg: &ExperimentConfig) -> Result<Outcome> {
    let (n, ell) = (cfg.n, cfg.ell);
    let spec = truncation_cutoff(ell, n, cfg.eps)?;
    let t = tables(cfg, spec.cutoff)?;
    let scheme = adaptive(cfg);
    let table = Table::new(
        "l2-moment",
        &["N", "ell", "xi", "value", "error_estimate", "normalized", "unreliable"],
    );
    let mut out = Outcome::new(table, t.limit());
    let nf = n as f64;
    let l = nf.ln();
    for &xi in &cfg.xi {
        let r = l2_error_moment(n, ell, xi, &spec, &t, &scheme)?;
        if r.unreliable {
            out.failures.push(format!("xi = {xi}: error estimate {:.2e} too large", r.error_estimate));
        }
        out.table.push(vec![
            n.into(),
            ell.into(),
            xi.into(),
            r.value.into(),
            r.error_estimate.into(),
            (r.value / (nf.powf(1.0 / ell as f64) * xi * l * l)).into(),
            r.unreliable.into(),
        ]);
    }
    Ok(out)
}

fn decompose(cfg: &ExperimentConfig) -> Result<Outcome> {
    check_h_below_n(cfg)?;
    let n = cfg.n;
    let specs = SeriesPair::for_tolerance(n, cfg.eps)?;
    let hmax = *cfg.h.iter().max().unwrap();
    let t = tables(cfg, specs.table_limit().max(n + hmax))?;
    let pipe = CirclePipeline::new(specs, &t)?;
    let table = Table::new(
        "decompose",
        &[
            "N",
            "H",
            "i1_re",
            "i1_im",
            "i2_re",
            "i2_im",
            "i3_re",
            "i3_im",
            "total_re",
            "total_im",
            "unsplit_re",
            "direct",
            "max_rel_gap",
            "i1_reference",
            "i1_ratio",
            "error_estimate",
            "unreliable",
        ],
    );
    let mut out = Outcome::new(table, t.limit());
    for &h in &cfg.h {
        let r = pipe.decompose(h, cfg.rel_tol)?;
        if r.unreliable {
            out.failures.push(format!("H = {h}: error estimate {:.2e} too large", r.error_estimate));
        }
        if r.max_rel_gap > 1e-6 {
            out.failures.push(format!("H = {h}: decomposition misses the sieve by {:.2e}", r.max_rel_gap));
        }
        out.table.push(vec![
            n.into(),
            h.into(),
            r.i1.re.into(),
            r.i1.im.into(),
            r.i2.re.into(),
            r.i2.im.into(),
            r.i3.re.into(),
            r.i3.im.into(),
            r.total.re.into(),
            r.total.im.into(),
            r.unsplit.re.into(),
            r.direct.into(),
            r.max_rel_gap.into(),
            r.i1_reference.into(),
            (r.i1.re / r.i1_reference).into(),
            r.error_estimate.into(),
            r.unreliable.into(),
        ]);
    }
    Ok(out)
}
