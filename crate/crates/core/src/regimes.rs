//! Decay bounds on `|psi|` in three ranges of `t`, packaged as runtime
//! checkable certificates. Every bound is computed in log space so that the
//! certificates stay meaningful long after `|psi|` underflows f64.

use std::f64::consts::{E, PI, SQRT_2};

use num_complex::Complex64;
use serde::Serialize;

use crate::charfn::{log_psi_gamma, w_function};
use crate::cumulants::{c1_constant, t_n};
use crate::error::Error;
use crate::params::EnsembleParams;
use crate::specfun::log_gamma;

/// `9 e / (4 sqrt(2) pi)`, the constant in the gamma-ratio decay bound.
pub fn c_star() -> f64 {
    9.0 * E / (4.0 * SQRT_2 * PI)
}

/// Constants attached to a parameter pair that the bounds below share.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BoundConstants {
    pub c_star: f64,
    pub c1: f64,
    pub c3: f64,
}

impl BoundConstants {
    pub fn for_params(p: &EnsembleParams) -> Self {
        let beta = p.beta();
        let n = p.n() as f64;
        BoundConstants {
            c_star: c_star(),
            c1: c1_constant(beta),
            c3: (beta / 8.0 - 1.0) / (2.0 * n) + 3.0 * beta / 8.0 + 1.5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Low,
    Intermediate,
    High,
}

/// Upper edge of the low range, `N^{5/7} beta / 2`.
pub fn low_edge(p: &EnsembleParams) -> f64 {
    (p.n() as f64).powf(5.0 / 7.0) * p.beta() / 2.0
}

/// Upper edge of the intermediate range, `N beta sqrt(2)`.
pub fn intermediate_edge(p: &EnsembleParams) -> f64 {
    p.n() as f64 * p.beta() * SQRT_2
}

/// Assign `|t|` to a range; both boundaries belong to the lower range.
pub fn classify(p: &EnsembleParams, t: f64) -> Regime {
    let a = t.abs();
    if a <= low_edge(p) {
        Regime::Low
    } else if a <= intermediate_edge(p) {
        Regime::Intermediate
    } else {
        Regime::High
    }
}

/// Smallest matrix size for which the low-range bound is proved:
/// `max(6, ceil(e^{1+beta}))`.
pub fn low_min_n(beta: f64) -> u32 {
    6u32.max((1.0 + beta).exp().ceil() as u32)
}

/// Log of the low-range bound: `|psi(t / T_N)| <= exp(-t^2 / 64)` for
/// `0 < |t| <= N^{5/7} beta / 2`, provided `N >= low_min_n(beta)`.
pub fn log_bound_low(p: &EnsembleParams, t: f64) -> Result<f64, Error> {
    if p.n() < low_min_n(p.beta()) {
        return Err(Error::Domain(format!(
            "low-range bound needs N >= {}, got {}",
            low_min_n(p.beta()),
            p.n()
        )));
    }
    if t.abs() > low_edge(p) {
        return Err(Error::Domain(format!(
            "low-range bound needs |t| <= {}, got {t}",
            low_edge(p)
        )));
    }
    Ok(-t * t / 64.0)
}

/// Number of gamma-ratio factors the intermediate bound extracts:
/// `floor((|t| / (2 sqrt 2) - 1) / (beta / 2))`.
pub fn intermediate_factor_count(p: &EnsembleParams, t: f64) -> i64 {
    ((t.abs() / (2.0 * SQRT_2) - 1.0) / (p.beta() / 2.0)).floor() as i64
}

/// Log of the intermediate-range bound `(2/pi) (c_* / sqrt|t|)^J` for
/// `4e < |t| <= N beta sqrt 2`.
pub fn log_bound_intermediate(p: &EnsembleParams, t: f64) -> Result<f64, Error> {
    let a = t.abs();
    if a <= 4.0 * E {
        return Err(Error::Domain(format!(
            "intermediate bound needs |t| > 4e = {:.6}, got {t}",
            4.0 * E
        )));
    }
    if a > intermediate_edge(p) {
        return Err(Error::Domain(format!(
            "intermediate bound needs |t| <= {}, got {t}",
            intermediate_edge(p)
        )));
    }
    let j = intermediate_factor_count(p, t) as f64;
    Ok((2.0 / PI).ln() + j * (c_star().ln() - 0.5 * a.ln()))
}

/// Matrix size above which the flat `(2/pi) c_*^4 / t^2` cap applies
/// throughout the intermediate range.
pub fn intermediate_cap_min_n(beta: f64) -> f64 {
    (9.0 * SQRT_2 + 2.0 * SQRT_2 / beta).powf(7.0 / 5.0)
}

/// Log of the capped intermediate bound `(2/pi) c_*^4 / t^2`, valid on the
/// intermediate range once `N > intermediate_cap_min_n(beta)`.
pub fn log_bound_intermediate_cap(p: &EnsembleParams, t: f64) -> Result<f64, Error> {
    if (p.n() as f64) <= intermediate_cap_min_n(p.beta()) {
        return Err(Error::Domain(format!(
            "capped intermediate bound needs N > {:.3}, got {}",
            intermediate_cap_min_n(p.beta()),
            p.n()
        )));
    }
    // same |t| window as the main intermediate bound
    let a = t.abs();
    if a <= 4.0 * E || a > intermediate_edge(p) {
        return Err(Error::Domain(format!("capped intermediate bound: |t| = {a} out of range")));
    }
    Ok((2.0 / PI).ln() + 4.0 * c_star().ln() - 2.0 * a.ln())
}

/// Log of the high-range bound
/// `sqrt(2/pi) c_*^{N-1} |t|^{-N/2} exp(-N^2 beta / 50) exp(c3 N)`
/// for `|t| > max(N beta sqrt 2, 4e)`.
pub fn log_bound_high(p: &EnsembleParams, t: f64) -> Result<f64, Error> {
    let a = t.abs();
    let floor = intermediate_edge(p).max(4.0 * E);
    if a <= floor {
        return Err(Error::Domain(format!(
            "high-range bound needs |t| > {floor}, got {t}"
        )));
    }
    let n = p.n() as f64;
    let k = BoundConstants::for_params(p);
    Ok(0.5 * (2.0 / PI).ln() + (n - 1.0) * c_star().ln() - 0.5 * n * a.ln()
        - n * n * p.beta() / 50.0
        + k.c3 * n)
}

/// Matrix size above which [`log_bound_high_simplified`] applies.
pub fn high_simplified_min_n(beta: f64) -> f64 {
    75.0 / beta + 75.0 / 4.0
}

/// Log of the simplified high-range bound `(2/pi) c_*^{N-1} |t|^{-N/2}`,
/// valid once `N > 75/beta + 75/4`.
pub fn log_bound_high_simplified(p: &EnsembleParams, t: f64) -> Result<f64, Error> {
    if (p.n() as f64) <= high_simplified_min_n(p.beta()) {
        return Err(Error::Domain(format!(
            "simplified high bound needs N > {:.2}, got {}",
            high_simplified_min_n(p.beta()),
            p.n()
        )));
    }
    let a = t.abs();
    let floor = intermediate_edge(p).max(4.0 * E);
    if a <= floor {
        return Err(Error::Domain(format!(
            "simplified high bound needs |t| > {floor}, got {t}"
        )));
    }
    let n = p.n() as f64;
    Ok((2.0 / PI).ln() + (n - 1.0) * c_star().ln() - 0.5 * n * a.ln())
}

/// `|Gamma(1 + eps + it) / Gamma(1 + eps + it/2)^2|` for the ratio
/// certificate; `eps` in `[0, 1)`.
pub fn stirling_ratio(t: f64, eps: f64) -> Result<f64, Error> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::Domain(format!("eps must lie in [0, 1), got {eps}")));
    }
    let a = Complex64::new(1.0 + eps, t);
    let b = Complex64::new(1.0 + eps, t / 2.0);
    let l = log_gamma(a)?.value - 2.0 * log_gamma(b)?.value;
    Ok(l.re.exp())
}

/// Uniform bound `c_* / sqrt(|t|)` on [`stirling_ratio`] for `|t| > 4e`,
/// independent of `eps` in `[0, 1)`.
pub fn stirling_ratio_bound(t: f64, eps: f64) -> Result<f64, Error> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::Domain(format!("eps must lie in [0, 1), got {eps}")));
    }
    if t.abs() <= 4.0 * E {
        return Err(Error::Domain(format!(
            "ratio bound needs |t| > 4e = {:.6}, got {t}",
            4.0 * E
        )));
    }
    Ok(c_star() / t.abs().sqrt())
}

/// Log-space bound on the squared integer-shift product:
/// `2 log|P(t)| <= -(t^2 / (2 beta)) W(N beta / (2|t|)) + 2 c3 N`
/// for `|t| >= (N - 1) beta / 2`.
pub fn log_p_factor_abs2_bound(p: &EnsembleParams, t: f64) -> Result<f64, Error> {
    let a = t.abs();
    let floor = (p.n() as f64 - 1.0) * p.beta() / 2.0;
    if a < floor {
        return Err(Error::Domain(format!(
            "shift-product bound needs |t| >= {floor}, got {t}"
        )));
    }
    let n = p.n() as f64;
    let k = BoundConstants::for_params(p);
    let y = n * p.beta() / (2.0 * a);
    Ok(-(t * t / (2.0 * p.beta())) * w_function(y)? + 2.0 * k.c3 * n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertStatus {
    Holds,
    Violated,
    Skipped,
}

/// One row of a certificate run. `psi_arg` is where `psi` was actually
/// evaluated: `t / T_N` in the low range (the bound there controls the
/// rescaled function) and `t` itself elsewhere. The margin is
/// `log_bound - log|psi|`; nonnegative up to 1e-9 means the bound holds.
#[derive(Clone, Debug, Serialize)]
pub struct RegimeBoundReport {
    pub t: f64,
    pub regime: Regime,
    pub psi_arg: f64,
    pub log_psi_abs: f64,
    pub psi_abs: f64,
    pub log_bound: f64,
    pub bound: f64,
    pub margin: f64,
    pub status: CertStatus,
    pub skip_reason: Option<String>,
}

/// Slack allowed on a log-space margin before a row counts as violated.
pub const MARGIN_TOLERANCE: f64 = 1e-9;

/// Evaluate `|psi|` against the range-appropriate bound at every `t`.
/// Rows whose preconditions fail are marked `Skipped`, never `Violated`.
pub fn verify_regime_bounds(
    p: &EnsembleParams,
    ts: &[f64],
) -> Result<Vec<RegimeBoundReport>, Error> {
    let tn = t_n(p);
    let mut out = Vec::with_capacity(ts.len());
    for &t in ts {
        let regime = classify(p, t);
        let (psi_arg, bound_res) = match regime {
            Regime::Low => (t / tn, log_bound_low(p, t)),
            Regime::Intermediate => (t, log_bound_intermediate(p, t)),
            Regime::High => {
                let full = log_bound_high(p, t);
                let simple = log_bound_high_simplified(p, t);
                let best = match (full, simple) {
                    (Ok(a), Ok(b)) => Ok(a.min(b)),
                    (Ok(a), Err(_)) => Ok(a),
                    (Err(_), Ok(b)) => Ok(b),
                    (Err(e), Err(_)) => Err(e),
                };
                (t, best)
            }
        };
        let log_psi_abs = log_psi_gamma(p, psi_arg)?.re;
        let row = match bound_res {
            Ok(log_bound) => {
                let margin = log_bound - log_psi_abs;
                let status =
                    if margin >= -MARGIN_TOLERANCE { CertStatus::Holds } else { CertStatus::Violated };
                RegimeBoundReport {
                    t,
                    regime,
                    psi_arg,
                    log_psi_abs,
                    psi_abs: log_psi_abs.exp(),
                    log_bound,
                    bound: log_bound.exp(),
                    margin,
                    status,
                    skip_reason: None,
                }
            }
            Err(e) => RegimeBoundReport {
                t,
                regime,
                psi_arg,
                log_psi_abs,
                psi_abs: log_psi_abs.exp(),
                log_bound: f64::NAN,
                bound: f64::NAN,
                margin: f64::NAN,
                status: CertStatus::Skipped,
                skip_reason: Some(e.to_string()),
            },
        };
        out.push(row);
    }
    Ok(out)
}

/// CSV rendering of certificate rows (header plus one line per row).
pub fn reports_to_csv(rows: &[RegimeBoundReport]) -> String {
    let mut s = String::from(
        "t,regime,psi_arg,log_psi_abs,psi_abs,log_bound,bound,margin,status,skip_reason\n",
    );
    for r in rows {
        let regime = match r.regime {
            Regime::Low => "low",
            Regime::Intermediate => "intermediate",
            Regime::High => "high",
        };
        let status = match r.status {
            CertStatus::Holds => "holds",
            CertStatus::Violated => "violated",
            CertStatus::Skipped => "skipped",
        };
        let num = |x: f64| if x.is_nan() { String::new() } else { format!("{x:.17e}") };
        s.push_str(&format!(
            "{:.17e},{},{},{},{},{},{},{},{},{}\n",
            r.t,
            regime,
            num(r.psi_arg),
            num(r.log_psi_abs),
            num(r.psi_abs),
            num(r.log_bound),
            num(r.bound),
            num(r.margin),
            status,
            r.skip_reason.as_deref().unwrap_or("")
        ));
    }
    s
}
