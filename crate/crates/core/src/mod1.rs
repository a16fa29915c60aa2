//! Probabilities of a Gaussian reduced mod 1: theta-series evaluation on
//! interval sets, with certified truncation, plus the same reduction applied
//! to an arbitrary density grid.

use std::f64::consts::PI;

use crate::density::DensityGrid;
use crate::digits::UnitIntervalSet;
use crate::error::Error;

/// Harmonics kept by default: smallest k with `2 pi^2 a^2 k^2 >= 41`, so the
/// first dropped coefficient is below e^-41.
pub fn default_harmonic_cutoff(alpha: f64) -> u32 {
    (41.0 / (2.0 * PI * PI * alpha * alpha)).sqrt().ceil().max(1.0) as u32
}

/// Bound on how far the wrapped probability of ANY set can sit from its
/// Lebesgue measure: `4 exp(-2 pi^2 a^2)`.
pub fn uniform_deviation_cap(alpha: f64) -> f64 {
    4.0 * (-2.0 * PI * PI * alpha * alpha).exp()
}

/// Wrapped-Gaussian probability of an interval set.
#[derive(Clone, Copy, Debug)]
pub struct WrappedProb {
    pub value: f64,
    /// Bound on the error of `value` from truncating the theta series.
    pub truncation_cap: f64,
    /// [`uniform_deviation_cap`] at this `alpha`, for convergence arguments.
    pub uniform_gap_cap: f64,
}

/// Probability that `X mod 1` lands in `set`, where `X ~ N(0, alpha^2)`,
/// using `k_max` harmonics of the wrapped density.
pub fn gaussian_mod1_prob_with_cutoff(
    alpha: f64,
    set: &UnitIntervalSet,
    k_max: u32,
) -> Result<WrappedProb, Error> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    if k_max == 0 {
        return Err(Error::Domain("need at least one harmonic".into()));
    }
    let l = set.total_length();
    let gap_cap = uniform_deviation_cap(alpha);
    // a full circle wraps to probability one with no series at all
    if set.intervals().len() == 1 && l == 1.0 {
        return Ok(WrappedProb { value: 1.0, truncation_cap: 0.0, uniform_gap_cap: gap_cap });
    }

    let w = 2.0 * PI * PI * alpha * alpha;
    let mut value = l;
    for k in 1..=k_max {
        let kf = k as f64;
        let damp = (-w * kf * kf).exp();
        if damp == 0.0 {
            break;
        }
        let mut osc = 0.0;
        for &(a, b) in set.intervals() {
            osc += (2.0 * PI * kf * b).sin() - (2.0 * PI * kf * a).sin();
        }
        value += damp / (PI * kf) * osc;
    }

    let n_int = set.intervals().len() as f64;
    let first_dropped = (-w * ((k_max + 1) as f64).powi(2)).exp();
    let spacing = 1.0 - (-w * (2.0 * k_max as f64 + 3.0)).exp();
    let truncation_cap = (2.0 * n_int / PI) * first_dropped
        / ((k_max + 1) as f64)
        / spacing.max(1e-6)
        + 1e-15 * n_int.max(1.0);

    Ok(WrappedProb { value: value.clamp(0.0, 1.0), truncation_cap, uniform_gap_cap: gap_cap })
}

/// [`gaussian_mod1_prob_with_cutoff`] at the default cutoff.
pub fn gaussian_mod1_prob(alpha: f64, set: &UnitIntervalSet) -> Result<WrappedProb, Error> {
    gaussian_mod1_prob_with_cutoff(alpha, set, default_harmonic_cutoff(alpha))
}

/// How much estimated mass a grid may leave outside its span before mod-1
/// queries are refused.
pub const COVERAGE_TOLERANCE: f64 = 1e-6;

/// Probability that `(X / period) mod 1` lands in `set`, where `X` follows
/// the grid density. Sums the grid integral over every period shift that
/// intersects the span.
pub fn wrapped_prob_from_density(
    grid: &DensityGrid,
    set: &UnitIntervalSet,
    period: f64,
) -> Result<f64, Error> {
    if !(period > 0.0) || !period.is_finite() {
        return Err(Error::Domain(format!("period must be positive, got {period}")));
    }
    if grid.meta.tail_mass_estimate > COVERAGE_TOLERANCE {
        return Err(Error::Coverage(format!(
            "grid leaves an estimated {:.3e} of mass outside its span",
            grid.meta.tail_mass_estimate
        )));
    }
    let k_lo = (grid.x_min() / period).floor() as i64 - 1;
    let k_hi = (grid.x_max() / period).ceil() as i64 + 1;
    let mut prob = 0.0;
    for k in k_lo..=k_hi {
        let off = k as f64 * period;
        for &(a, b) in set.intervals() {
            prob += grid.integral_between(off + a * period, off + b * period);
        }
    }
    Ok(prob.clamp(0.0, 1.0))
}
