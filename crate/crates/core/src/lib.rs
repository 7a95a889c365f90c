//! Numerical laboratory for sums of a prime and two prime squares.
//!
//! The crate covers the arithmetic side (sieve tables and representation
//! counts), the analytic side (damped exponential sums, the explicit
//! formula over zeta zeros) and the quadrature needed to tie the two
//! together through Fourier integrals over the unit interval.

pub mod arith;
pub mod circle;
pub mod error;
pub mod explicit;
pub mod expsum;
pub mod gamma;
pub mod quadrature;
pub mod sieve;
pub mod sum;

pub use arith::{count_big_r, count_r, count_rstar, interval_r_sum, is_in_a, two_square_coefficient, IntervalSumResult};
pub use circle::{
    decompose_i123, fourth_moment_folded, fourth_moment_pair, fourth_moment_quadrature, fourth_moment_scheme, l2_error_moment,
    laplace_check, laplace_window_error, mean_square_s_minus_t, reconstruct_big_r, weighted_interval_integral,
    CirclePipeline, I123Report, LaplaceCheckResult, MomentResult, SeriesPair,
};
pub use error::{Error, Result};
pub use explicit::{
    e_ell, explicit_residual, load_zeros, main_term, z_of, zero_sum, zero_sum_tail_bound, ComplexDisplacement,
    ResidualReport, ZeroSet, ZeroSum,
};
pub use expsum::{
    e, parseval_fourth_moment_s2, parseval_second_moment, s_ell, s_tilde, t_ell, truncation_cutoff, u_kernel,
    DampedSeries, FrequencyPoint, TruncatedSeriesSpec,
};
pub use gamma::{complex_gamma, ln_gamma};
pub use quadrature::{
    integrate, integrate_adaptive, AdaptiveOptions, BandLimitedInterpolant, FnIntegrand, GridCache, Integrand,
    QuadratureResult, QuadratureScheme,
};
pub use sieve::{build_prime_tables, build_prime_tables_with, SieveConfig, VonMangoldtTable};
