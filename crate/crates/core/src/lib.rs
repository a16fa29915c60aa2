//! Numerics for the modulus of the characteristic polynomial of the
//! circular beta ensemble, evaluated at a point on the unit circle.
//!
//! The central object is the characteristic function `psi` of `log |D_N|`,
//! available in three exact representations (gamma ratios, a Weierstrass-type
//! product over shifted integers, and a dissected form separating fractional
//! gamma factors from a rational correction). On top of it the crate builds:
//!
//! * cumulants of `log |D_N|` via Hurwitz-type zeta sums, with variance
//!   brackets and a quantitative Gaussian approximation error;
//! * certified decay bounds for `|psi|` in three ranges of the argument,
//!   checkable at runtime against the exact values;
//! * leading and positioned digit probabilities of `|D_N|` in any base,
//!   through interval sets on the unit interval and either a wrapped-Gaussian
//!   approximation or exact Fourier inversion of the density;
//! * total-variation and Kolmogorov distances to the Gaussian limit;
//! * reproducible samplers (inverse CDF, small-N rejection) and the
//!   counterexample laws showing digit behavior is not a CLT corollary.

// reference values are frozen at full oracle precision; the compiler rounds
#![allow(clippy::excessive_precision)]
// negated float comparisons are deliberate: NaN must fail validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod charfn;
pub mod cumulants;
pub mod density;
pub mod digits;
pub mod error;
pub mod mod1;
pub mod params;
pub mod regimes;
pub mod sampler;
pub mod specfun;
pub mod util;

pub use charfn::{
    log_psi_dissected, log_psi_gamma, p_factor, psi_dissected, psi_gamma, psi_weierstrass,
    w_function, PFactor, WeierstrassEval,
};
pub use cumulants::{
    c1_constant, cumulant, gaussian_approx_error, t_n, third_derivative_bound, variance,
    variance_bracket, MAX_CUMULANT,
};
pub use density::{
    build_density, choose_points, default_density, digit_prob_exact, gaussian_reference,
    kolmogorov_distance_to_gaussian, tv_distance_to_gaussian, DensityGrid, DensityMeta,
    DEFAULT_SPAN_SIGMAS, TAIL_TOLERANCE,
};
pub use digits::{
    benford_prob, digit_event_set, extract_digits, leading_interval, positioned_digit_set,
    uniformity_gap_bound, value_matches, DigitPattern, UnitIntervalSet,
};
pub use error::Error;
pub use mod1::{
    gaussian_mod1_prob, gaussian_mod1_prob_with_cutoff, uniform_deviation_cap,
    wrapped_prob_from_density, WrappedProb,
};
pub use params::EnsembleParams;
pub use regimes::{
    c_star, classify, log_bound_high, log_bound_intermediate, log_bound_low, reports_to_csv,
    verify_regime_bounds, BoundConstants, CertStatus, Regime, RegimeBoundReport,
    MARGIN_TOLERANCE,
};
pub use sampler::{
    counterexample_sample, digit_frequency, ks_critical_two_sample, ks_statistic_against,
    ks_statistic_two_sample, sample_eigenvalues_rejection, sample_log_abs_d,
    sample_log_abs_d_with_grid, Counterexample, QuantileTable, SampleBatch,
};
pub use specfun::{
    hurwitz_zeta, log_gamma, log_gamma_real, log_morris_product, log_selberg_product,
    morris_product, selberg_product, LogGamma,
};
