//! Complex Gamma function.
//!
//! Lanczos approximation (g = 7, nine coefficients) in logarithmic form for
//! `Re s >= 1/2`, reflection below that. Working with `log Γ` keeps values
//! with large imaginary parts representable; callers that only need
//! `exp(log Γ(s) + ...)` never form the tiny `Γ(s)` itself.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// ½·log(2π)
const HALF_LN_TAU: f64 = 0.918_938_533_204_672_8;

fn is_pole(s: Complex64) -> bool {
    s.im == 0.0 && s.re <= 0.0 && s.re == s.re.round()
}

/// A logarithm of Γ(s). The imaginary part is correct modulo 2π, which is
/// all that `exp` needs; it is not the continuous branch.
pub fn ln_gamma(s: Complex64) -> Result<Complex64> {
    if !s.re.is_finite() || !s.im.is_finite() {
        return Err(Error::Domain(format!("gamma argument {s} is not finite")));
    }
    if is_pole(s) {
        return Err(Error::Domain(format!("gamma has a pole at {}", s.re)));
    }
    if s.re < 0.5 {
        // Γ(s)Γ(1-s) = π / sin(πs)
        let rest = ln_gamma_lanczos(Complex64::new(1.0, 0.0) - s);
        return Ok(Complex64::new(PI.ln(), 0.0) - ln_sin_pi(s) - rest);
    }
    Ok(ln_gamma_lanczos(s))
}

/// Γ(s); underflows to zero for very large |Im s|.
pub fn complex_gamma(s: Complex64) -> Result<Complex64> {
    let lg = ln_gamma(s)?;
    if s.im == 0.0 {
        // keep real results exactly real, with the right sign
        let mag = lg.re.exp();
        let sign = if lg.im.cos() < 0.0 { -1.0 } else { 1.0 };
        return Ok(Complex64::new(sign * mag, 0.0));
    }
    Ok(lg.exp())
}

fn ln_gamma_lanczos(s: Complex64) -> Complex64 {
    let z = s - 1.0;
    let mut x = Complex64::new(LANCZOS[0], 0.0);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    HALF_LN_TAU + (z + 0.5) * t.ln() - t + x.ln()
}

/// log sin(πs) without overflow for large |Im s|:
/// `sin(πs) = e^{-iπs}(e^{2iπs} - 1)/(2i)` with `|e^{2iπs}| <= 1` when `Im s >= 0`.
fn ln_sin_pi(s: Complex64) -> Complex64 {
    if s.im < 0.0 {
        return ln_sin_pi(s.conj()).conj();
    }
    let i = Complex64::i();
    let w = (2.0 * PI * i * s).exp() - 1.0;
    -i * PI * s + w.ln() - Complex64::new(2f64.ln(), PI / 2.0)
}
