//! Explicit formula for the damped sum over zeta zeros.
//!
//! Zeros are taken on the critical line, `ρ = 1/2 ± iγ`, with only the
//! positive ordinates stored. Terms are formed as
//! `exp(log Γ(ρ/ℓ) - (ρ/ℓ)·Log z)`, which stays finite where `Γ(ρ/ℓ)` and
//! `z^{-ρ/ℓ}` separately underflow or overflow.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::fs;
use std::path::Path;
use std::sync::{Arc, RwLock};

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::expsum::{s_tilde, FrequencyPoint, TruncatedSeriesSpec};
use crate::gamma::ln_gamma;
use crate::sieve::VonMangoldtTable;
use crate::sum::ComplexNeumaier;

/// Ordinate of the first nontrivial zero, used as an ingestion gate.
pub const FIRST_ZERO: f64 = 14.134_725_141_734_693;
const FIRST_ZERO_GATE: f64 = 1e-6;
const MIN_FRACTION_DIGITS: usize = 9;

/// Upper bound constant `C` in `|Γ(σ + it)| <= C·|t|^{σ-1/2}·e^{-π|t|/2}`,
/// used for `0 < σ <= 1/2` and `|t| >= 1`.
pub const GAMMA_MODULUS_CONSTANT: f64 = 1.25 * 2.506_628_274_631_000_7;

/// Ascending positive ordinates of nontrivial zeros.
#[derive(Debug)]
pub struct ZeroSet {
    gammas: Vec<f64>,
    source_digest: String,
    ln_gamma_cache: RwLock<HashMap<u32, Arc<Vec<Complex64>>>>,
}

impl Clone for ZeroSet {
    fn clone(&self) -> Self {
        Self {
            gammas: self.gammas.clone(),
            source_digest: self.source_digest.clone(),
            ln_gamma_cache: RwLock::default(),
        }
    }
}

impl PartialEq for ZeroSet {
    fn eq(&self, other: &Self) -> bool {
        self.gammas == other.gammas && self.source_digest == other.source_digest
    }
}

impl ZeroSet {
    /// Build from ordinates already in memory; the digest covers their
    /// decimal rendering.
    pub fn from_gammas(gammas: Vec<f64>) -> Result<Self> {
        check_ordinates(&gammas)?;
        let mut h = Sha256::new();
        for g in &gammas {
            h.update(format!("{g:.12}\n").as_bytes());
        }
        Ok(Self::new_unchecked(gammas, hex::encode(h.finalize())))
    }

    /// Parse zero-file text. `digest` is recorded as the source digest.
    pub fn parse(text: &str, max_count: usize, digest: String) -> Result<Self> {
        let mut gammas = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            if gammas.len() >= max_count {
                break;
            }
            let line = idx + 1;
            let s = raw.trim();
            if s.is_empty() {
                continue;
            }
            let g = parse_ordinate(s).map_err(|message| Error::Format { line, message })?;
            if let Some(&prev) = gammas.last() {
                if g <= prev {
                    return Err(Error::Format {
                        line,
                        message: format!("{g} does not exceed the previous ordinate {prev}"),
                    });
                }
            }
            if g <= 14.0 {
                return Err(Error::Format {
                    line,
                    message: format!("ordinate {g} is not above 14"),
                });
            }
            gammas.push(g);
        }
        if max_count > 0 {
            match gammas.first() {
                None => return Err(Error::Data("zero file contains no ordinates".into())),
                Some(&g) if (g - FIRST_ZERO).abs() > FIRST_ZERO_GATE => {
                    return Err(Error::Data(format!(
                        "first ordinate {g} is not the first zeta zero {FIRST_ZERO:.9}"
                    )))
                }
                _ => {}
            }
        }
        Ok(Self::new_unchecked(gammas, digest))
    }

    fn new_unchecked(gammas: Vec<f64>, source_digest: String) -> Self {
        Self {
            gammas,
            source_digest,
            ln_gamma_cache: RwLock::default(),
        }
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }

    pub fn source_digest(&self) -> &str {
        &self.source_digest
    }

    /// log Γ((1/2 + iγ)/ℓ) for every stored γ, computed once per ℓ.
    fn ln_gamma_terms(&self, ell: u32) -> Result<Arc<Vec<Complex64>>> {
        if let Some(v) = self.ln_gamma_cache.read().expect("cache lock").get(&ell) {
            return Ok(v.clone());
        }
        let l = ell as f64;
        let vals = self
            .gammas
            .iter()
            .map(|&g| ln_gamma(Complex64::new(0.5 / l, g / l)))
            .collect::<Result<Vec<_>>>()?;
        let vals = Arc::new(vals);
        self.ln_gamma_cache
            .write()
            .expect("cache lock")
            .entry(ell)
            .or_insert_with(|| vals.clone());
        Ok(vals)
    }
}

fn check_ordinates(gammas: &[f64]) -> Result<()> {
    if let Some(&g) = gammas.first() {
        if (g - FIRST_ZERO).abs() > FIRST_ZERO_GATE {
            return Err(Error::Data(format!("first ordinate {g} is not the first zeta zero")));
        }
    }
    for (i, w) in gammas.windows(2).enumerate() {
        if w[1] <= w[0] {
            return Err(Error::Format {
                line: i + 2,
                message: "ordinates not strictly ascending".into(),
            });
        }
    }
    Ok(())
}

fn parse_ordinate(s: &str) -> std::result::Result<f64, String> {
    let (int, frac) = s
        .split_once('.')
        .ok_or_else(|| format!("'{s}' is not a decimal number with a fractional part"))?;
    let digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
    if !digits(int) || !digits(frac) {
        return Err(format!("'{s}' is not a plain positive decimal number"));
    }
    if frac.len() < MIN_FRACTION_DIGITS {
        return Err(format!(
            "'{s}' has {} fractional digits, at least {MIN_FRACTION_DIGITS} required",
            frac.len()
        ));
    }
    s.parse::<f64>().map_err(|e| format!("'{s}': {e}"))
}

/// Read at most `max_count` ordinates from a zero file. The digest is the
/// SHA-256 of the whole file.
pub fn load_zeros(path: &Path, max_count: usize) -> Result<ZeroSet> {
    let bytes = fs::read(path)?;
    let digest = hex::encode(Sha256::digest(&bytes));
    let text = std::str::from_utf8(&bytes).map_err(|e| Error::Format {
        line: 0,
        message: format!("zero file is not UTF-8: {e}"),
    })?;
    ZeroSet::parse(text, max_count, digest)
}

/// z = 1/N - 2πiα.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexDisplacement {
    pub z: Complex64,
}

impl ComplexDisplacement {
    /// Principal logarithm; well defined since `Re z > 0`.
    pub fn ln(&self) -> Complex64 {
        self.z.ln()
    }
}

pub fn z_of(alpha: FrequencyPoint, big_n: u64) -> Result<ComplexDisplacement> {
    if big_n < 2 {
        return Err(Error::param(format!("N must be at least 2, got {big_n}")));
    }
    Ok(ComplexDisplacement {
        z: Complex64::new(1.0 / big_n as f64, -TAU * alpha.value()),
    })
}

fn check_ell(ell: u32) -> Result<()> {
    if ell == 0 {
        return Err(Error::param("ell must be at least 1"));
    }
    Ok(())
}

/// Γ(1/ℓ) / (ℓ z^{1/ℓ}).
pub fn main_term(alpha: FrequencyPoint, big_n: u64, ell: u32) -> Result<Complex64> {
    check_ell(ell)?;
    let z = z_of(alpha, big_n)?;
    let l = ell as f64;
    let lg = ln_gamma(Complex64::new(1.0 / l, 0.0))?;
    Ok((lg - z.ln() / l).exp() / l)
}

/// Truncated zero sum and whether it was requested empty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroSum {
    pub value: Complex64,
    pub pairs: usize,
    /// Set when `K = 0` was requested; the value is then zero.
    pub empty: bool,
}

/// (1/ℓ) Σ_ρ z^{-ρ/ℓ} Γ(ρ/ℓ) over the first `k` ordinates and their
/// conjugates, summed pairwise in ascending γ.
pub fn zero_sum(alpha: FrequencyPoint, big_n: u64, ell: u32, zeros: &ZeroSet, k: usize) -> Result<ZeroSum> {
    check_ell(ell)?;
    let z = z_of(alpha, big_n)?;
    if k > zeros.len() {
        return Err(Error::param(format!(
            "requested {k} zeros, only {} available",
            zeros.len()
        )));
    }
    if k == 0 {
        return Ok(ZeroSum {
            value: Complex64::new(0.0, 0.0),
            pairs: 0,
            empty: true,
        });
    }
    let l = ell as f64;
    let log_z = z.ln();
    let lgs = zeros.ln_gamma_terms(ell)?;
    let mut acc = ComplexNeumaier::new();
    for (&g, &lg) in zeros.gammas()[..k].iter().zip(lgs.iter()) {
        let rho = Complex64::new(0.5, g) / l;
        let up = (lg - rho * log_z).exp();
        let down = (lg.conj() - rho.conj() * log_z).exp();
        acc.add(up + down);
    }
    Ok(ZeroSum {
        value: acc.value() / l,
        pairs: k,
        empty: false,
    })
}

/// Upper bound on the modulus of the zero-sum tail over zeros with
/// ordinate above `gamma_max`.
///
/// Each conjugate pair is bounded through `|z^{-ρ/ℓ}| <= |z|^{-1/(2ℓ)}
/// e^{γ·arctan(2πN|α|)/ℓ}` and the Gamma modulus bound with
/// [`GAMMA_MODULUS_CONSTANT`]; zeros are counted with density at most
/// `2 log T` per unit interval at height `T`.
pub fn zero_sum_tail_bound(alpha: FrequencyPoint, big_n: u64, ell: u32, gamma_max: f64) -> Result<f64> {
    check_ell(ell)?;
    let z = z_of(alpha, big_n)?;
    if !(gamma_max >= 14.0) {
        return Err(Error::param(format!("gamma_max must be at least 14, got {gamma_max}")));
    }
    let l = ell as f64;
    let nf = big_n as f64;
    let rate = (PI / 2.0 - (TAU * nf * alpha.value().abs()).atan()) / l;
    let p = (1.0 - l) / (2.0 * l);
    // log of 2·(per-pair constant)
    let ln_pair = (2.0 * 2.0 / l * GAMMA_MODULUS_CONSTANT).ln() - z.z.norm().ln() / (2.0 * l) - p * l.ln();
    let g = gamma_max;
    let q = (-rate).exp();
    let one_minus_q = -(-rate).exp_m1();
    let bracket = g.ln() / one_minus_q + q / (g * one_minus_q * one_minus_q);
    Ok((ln_pair + p * g.ln() - rate * g + bracket.ln()).exp())
}

/// S̃_ℓ(α) - Γ(1/ℓ)/(ℓ z^{1/ℓ}).
pub fn e_ell(alpha: FrequencyPoint, spec: &TruncatedSeriesSpec, table: &VonMangoldtTable) -> Result<Complex64> {
    Ok(s_tilde(alpha, spec, table)? - main_term(alpha, spec.n, spec.ell)?)
}

/// Pieces of the explicit-formula residual at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    pub alpha: f64,
    pub s_tilde: Complex64,
    pub main_term: Complex64,
    pub zero_sum: Complex64,
    pub residual: Complex64,
    pub tail_bound: f64,
    pub zeros_used: usize,
}

/// S̃_ℓ(α) - main term + zero sum over `k` zeros, refused when the zero-sum
/// tail bound at `γ_k` exceeds `tolerance`.
pub fn explicit_residual(
    alpha: FrequencyPoint,
    spec: &TruncatedSeriesSpec,
    table: &VonMangoldtTable,
    zeros: &ZeroSet,
    k: usize,
    tolerance: f64,
) -> Result<ResidualReport> {
    if k == 0 || k > zeros.len() {
        return Err(Error::param(format!(
            "zero count must be in 1..={}, got {k}",
            zeros.len()
        )));
    }
    let tail_bound = zero_sum_tail_bound(alpha, spec.n, spec.ell, zeros.gammas()[k - 1])?;
    if !(tail_bound <= tolerance) {
        return Err(Error::InsufficientZeros {
            bound: tail_bound,
            tolerance,
        });
    }
    let s = s_tilde(alpha, spec, table)?;
    let main = main_term(alpha, spec.n, spec.ell)?;
    let zs = zero_sum(alpha, spec.n, spec.ell, zeros, k)?.value;
    Ok(ResidualReport {
        alpha: alpha.value(),
        s_tilde: s,
        main_term: main,
        zero_sum: zs,
        residual: s - main + zs,
        tail_bound,
        zeros_used: k,
    })
}
