//! Cumulants of `log |D_N|` and the associated normal-approximation error
//! constants. All cumulants reduce to zeta sums over the shifts `j beta / 2`.

use crate::error::Error;
use crate::params::EnsembleParams;
use crate::specfun::hurwitz_zeta;
use crate::util::pairwise_sum;

/// Highest cumulant order served. Beyond this the alternating prefactor and
/// the zeta sums no longer gain accuracy in f64, and nothing downstream needs
/// them.
pub const MAX_CUMULANT: u32 = 12;

fn zeta_sum(p: &EnsembleParams, l: u32) -> f64 {
    let terms: Vec<f64> = (0..p.n())
        .map(|j| hurwitz_zeta(l, p.half_beta_j(j)).expect("l >= 2 and shift >= 0"))
        .collect();
    pairwise_sum(&terms)
}

/// Variance of `log |D_N|`: `(1/2) sum_j zeta(2, j beta/2)`.
pub fn variance(p: &EnsembleParams) -> f64 {
    0.5 * zeta_sum(p, 2)
}

/// Scale parameter `T_N = sqrt(variance)`.
pub fn t_n(p: &EnsembleParams) -> f64 {
    variance(p).sqrt()
}

/// k-th cumulant of `log |D_N|`. The mean is zero; even cumulants are
/// positive, odd ones negative. Orders above [`MAX_CUMULANT`] are refused.
pub fn cumulant(p: &EnsembleParams, k: u32) -> Result<f64, Error> {
    match k {
        0 => Err(Error::Domain("cumulant order must be >= 1".into())),
        1 => Ok(0.0),
        2..=MAX_CUMULANT => {
            let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
            let half_pow = (2f64).powi(k as i32 - 1);
            let mut fact = 1.0;
            for i in 2..k {
                fact *= i as f64;
            }
            Ok(sign * ((half_pow - 1.0) / half_pow) * fact * zeta_sum(p, k))
        }
        _ => Err(Error::Capacity(format!(
            "cumulant order {k} exceeds the supported maximum {MAX_CUMULANT}"
        ))),
    }
}

/// Strict lower and inclusive upper bound on the variance:
/// `(1/beta) log(1 + beta N / 2) < variance <= (1/beta)(log N + 1 + beta)`.
pub fn variance_bracket(p: &EnsembleParams) -> (f64, f64) {
    let beta = p.beta();
    let n = p.n() as f64;
    let lower = (beta * n / 2.0).ln_1p() / beta;
    let upper = (n.ln() + 1.0 + beta) / beta;
    (lower, upper)
}

/// Uniform bound on the third derivative of `log psi` along the real line:
/// the smaller of `(5/2) sum_j zeta(3, j beta/2)` and `5/beta + 15/4`.
pub fn third_derivative_bound(p: &EnsembleParams) -> f64 {
    (2.5 * zeta_sum(p, 3)).min(5.0 / p.beta() + 3.75)
}

/// `c1 = (c/6) exp(c/6)` with `c = 5/beta + 15/4`; the constant in the
/// pointwise normal-approximation bound.
pub fn c1_constant(beta: f64) -> f64 {
    let c = 5.0 / beta + 3.75;
    c / 6.0 * (c / 6.0).exp()
}

/// Pointwise bound on `|psi(t / T_N) - exp(-t^2/2)|` for `|t| <= T_N`,
/// namely `(c1 / T_N^3) |t|^3 exp(-t^2/2)`.
pub fn gaussian_approx_error(p: &EnsembleParams, t: f64) -> Result<f64, Error> {
    let tn = t_n(p);
    if !(t.abs() <= tn) {
        return Err(Error::Domain(format!(
            "normal approximation bound needs |t| <= T_N = {tn}, got {t}"
        )));
    }
    Ok(c1_constant(p.beta()) / tn.powi(3) * t.abs().powi(3) * (-t * t / 2.0).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(n: u32, beta: f64) -> EnsembleParams {
        EnsembleParams::new(n, beta).unwrap()
    }

    // reference values frozen from 30-digit arithmetic

    #[test]
    fn variance_reference_points() {
        assert_relative_eq!(variance(&params(1, 2.0)), 0.822467033424113218, max_relative = 1e-13);
        assert_relative_eq!(variance(&params(1, 0.7)), 0.822467033424113218, max_relative = 1e-13);
        assert_relative_eq!(variance(&params(2, 2.0)), 1.14493406684822644, max_relative = 1e-13);
        assert_relative_eq!(variance(&params(10, 2.0)), 1.94031580539255571, max_relative = 1e-13);
        assert_relative_eq!(variance(&params(30, 2.0)), 2.48925280415962803, max_relative = 1e-13);
        assert_relative_eq!(t_n(&params(30, 2.0)), 1.57773660797980727, max_relative = 1e-13);
    }

    #[test]
    fn cumulant_reference_points() {
        let p12 = params(1, 2.0);
        assert_eq!(cumulant(&p12, 1).unwrap(), 0.0);
        assert_relative_eq!(cumulant(&p12, 2).unwrap(), variance(&p12), max_relative = 1e-15);
        assert_relative_eq!(cumulant(&p12, 3).unwrap(), -1.80308535473939143, max_relative = 1e-13);
        assert_relative_eq!(cumulant(&p12, 4).unwrap(), 5.68219697698347551, max_relative = 1e-13);
        assert_relative_eq!(
            cumulant(&params(5, 2.0), 3).unwrap(),
            -2.31837816258584603,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            cumulant(&params(20, 1.0), 4).unwrap(),
            7.85330508859458605,
            max_relative = 1e-13
        );
    }

    #[test]
    fn cumulant_signs_alternate() {
        let p = params(7, 1.5);
        for k in 2..=MAX_CUMULANT {
            let c = cumulant(&p, k).unwrap();
            if k % 2 == 0 {
                assert!(c > 0.0);
            } else {
                assert!(c < 0.0);
            }
        }
    }

    #[test]
    fn order_limits() {
        let p = params(3, 2.0);
        assert!(cumulant(&p, 0).is_err());
        assert!(matches!(cumulant(&p, 13), Err(Error::Capacity(_))));
    }

    #[test]
    fn bracket_contains_variance() {
        for &(n, beta) in &[(1u32, 0.5), (5, 1.0), (100, 2.0), (500, 4.0)] {
            let p = params(n, beta);
            let v = variance(&p);
            let (lo, hi) = variance_bracket(&p);
            assert!(lo < v && v <= hi, "N={n} beta={beta}: {lo} < {v} <= {hi}");
        }
    }

    #[test]
    fn c1_reference_point() {
        assert_relative_eq!(c1_constant(2.0), 2.95201698718142569, max_relative = 1e-14);
    }

    #[test]
    fn normal_error_bound_domain() {
        let p = params(10, 2.0);
        assert!(gaussian_approx_error(&p, 0.5).unwrap() > 0.0);
        assert!(gaussian_approx_error(&p, 10.0).is_err());
    }
}
