//! The characteristic function `psi(t) = E |D_N|^{it}` of the log modulus of
//! the characteristic polynomial of a circular beta ensemble, in three
//! numerically independent representations, plus the elementary integer-shift
//! product that isolates its fast-decaying part.

use num_complex::Complex64;

use crate::error::Error;
use crate::params::EnsembleParams;
use crate::specfun::log_gamma;
use crate::util::{pairwise_sum_complex, MantExp};

fn ci(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Log of the gamma-ratio representation
/// `psi(t) = prod_{j=0}^{N-1} Gamma(1+it+jb/2) Gamma(1+jb/2) / Gamma(1+it/2+jb/2)^2`.
///
/// The imaginary part is the sum of principal-branch log-gamma values, which
/// keeps it continuous in `t`; it is not reduced mod 2 pi.
pub fn log_psi_gamma(p: &EnsembleParams, t: f64) -> Result<Complex64, Error> {
    if !t.is_finite() {
        return Err(Error::Domain(format!("t must be finite, got {t}")));
    }
    if t == 0.0 {
        return Ok(ci(0.0, 0.0));
    }
    let mut terms = Vec::with_capacity(p.n() as usize);
    for j in 0..p.n() {
        let c = p.half_beta_j(j);
        let full = log_gamma(ci(1.0 + c, t))?.value;
        let real = log_gamma(ci(1.0 + c, 0.0))?.value;
        let half = log_gamma(ci(1.0 + c, t / 2.0))?.value;
        terms.push(full + real - 2.0 * half);
    }
    Ok(pairwise_sum_complex(&terms))
}

/// Gamma-ratio representation of `psi(t)`. Underflows to zero once
/// `log|psi| < -745`; use [`log_psi_gamma`] when the magnitude matters.
pub fn psi_gamma(p: &EnsembleParams, t: f64) -> Result<Complex64, Error> {
    Ok(log_psi_gamma(p, t)?.exp())
}

/// Result of the truncated Weierstrass product.
#[derive(Clone, Copy, Debug)]
pub struct WeierstrassEval {
    /// `exp(log_value)`; zero if the magnitude underflows.
    pub value: Complex64,
    /// Log of the product including the analytic tail correction. The
    /// imaginary part is only determined mod 2 pi.
    pub log_value: Complex64,
    /// Estimated modulus bound on the part of the log the evaluation dropped.
    pub tail_bound: f64,
    /// Set when `t` is too large relative to `n_max` for the tail series to
    /// converge; `value` then carries only the raw truncated product.
    pub truncated: bool,
}

/// Euler-Maclaurin value of `sum_{k >= 0} (x0 + k)^{-m}` for `x0 >> 1`.
fn em_tail(m: i32, x0: f64) -> f64 {
    let mf = m as f64;
    x0.powi(1 - m) / (mf - 1.0) + 0.5 * x0.powi(-m) + mf * x0.powi(-m - 1) / 12.0
        - mf * (mf + 1.0) * (mf + 2.0) * x0.powi(-m - 3) / 720.0
}

/// Weierstrass-product representation
/// `psi(t) = prod_{j=0}^{N-1} prod_{n>=1} (n+jb/2+it/2)^2 / ((n+jb/2+it)(n+jb/2))`,
/// truncated at `n = n_max`.
///
/// The dropped factors are restored analytically: expanding their logs in
/// powers of `it/(n+jb/2)` gives `sum_{m>=2} c_m (it)^m sum_j sum_{n>n_max}
/// (n+jb/2)^{-m}` with `c_m = (-1)^{m+1} (2^{1-m}-1)/m`, and the inner sums
/// are evaluated by Euler-Maclaurin. The series converges for
/// `|t| < n_max + 1`; beyond that the result is flagged `truncated`.
pub fn psi_weierstrass(p: &EnsembleParams, t: f64, n_max: u32) -> Result<WeierstrassEval, Error> {
    if n_max == 0 {
        return Err(Error::Domain("weierstrass product needs n_max >= 1".into()));
    }
    if !t.is_finite() {
        return Err(Error::Domain(format!("t must be finite, got {t}")));
    }
    if t == 0.0 {
        return Ok(WeierstrassEval {
            value: ci(1.0, 0.0),
            log_value: ci(0.0, 0.0),
            tail_bound: 0.0,
            truncated: false,
        });
    }

    let t2q = t * t / 4.0;
    let mut prod = MantExp::one();
    for j in 0..p.n() {
        let c = p.half_beta_j(j);
        for n in 1..=n_max {
            let d = c + n as f64;
            let dd = d * d;
            let num = ci(dd - t2q, d * t);
            let den = ci(dd, d * t);
            prod.mul(num / den);
        }
    }
    let partial_log = prod.ln();

    // analytic tail in powers of it/(n + jb/2)
    let m_edge = (n_max + 1) as f64;
    let ratio = t.abs() / m_edge;
    if ratio >= 0.9 {
        // crude bound on the whole dropped log: |log factor| <= |t|^2/2 * (n+c)^-2 fails
        // to converge usefully here, so report the m = 2 comparison sum as the scale
        let mut crude = 0.0;
        for j in 0..p.n() {
            crude += em_tail(2, m_edge + p.half_beta_j(j));
        }
        crude *= t * t / 2.0;
        let value = partial_log.exp();
        return Ok(WeierstrassEval {
            value,
            log_value: partial_log,
            tail_bound: crude,
            truncated: true,
        });
    }

    let it = ci(0.0, t);
    let mut it_pow = it * it;
    let mut tail = ci(0.0, 0.0);
    let mut last_term;
    let mut m = 2i32;
    loop {
        let cm = if m % 2 == 0 { -1.0 } else { 1.0 } * ((2f64).powi(1 - m) - 1.0) / m as f64;
        let mut tm = 0.0;
        for j in 0..p.n() {
            tm += em_tail(m, m_edge + p.half_beta_j(j));
        }
        let term = it_pow * (cm * tm);
        tail += term;
        last_term = term.norm();
        if last_term < 1e-17 * (1.0 + tail.norm()) || m >= 40 {
            break;
        }
        it_pow *= it;
        m += 1;
    }
    // geometric bound on everything past the last computed order
    let tail_bound = last_term * ratio / (1.0 - ratio) + 1e-16;

    let log_value = partial_log + tail;
    Ok(WeierstrassEval { value: log_value.exp(), log_value, tail_bound, truncated: false })
}

/// Product over `j = 1..N-1, k = 1..floor(j b/2)` of
/// `(1+it+jb/2-k)(1+jb/2-k) / (1+it/2+jb/2-k)^2`,
/// accumulated as `(value, log)` so that extreme magnitudes stay usable.
fn integer_shift_product(p: &EnsembleParams, t: f64) -> MantExp {
    let t2q = t * t / 4.0;
    let mut prod = MantExp::one();
    for j in 1..p.n() {
        let (fl, fr) = p.floor_frac(j);
        for k in 1..=fl {
            // 1 + jb/2 - k computed from the split so it never cancels
            let e = 1.0 + (fl - k) as f64 + fr;
            let num = ci(e * e, e * t);
            let den = ci(e * e - t2q, e * t);
            prod.mul(num / den);
        }
    }
    prod
}

/// Log of the dissected representation: the gamma ratio at the fractional
/// parts `{j b/2}` times the elementary integer-shift product.
pub fn log_psi_dissected(p: &EnsembleParams, t: f64) -> Result<Complex64, Error> {
    if !t.is_finite() {
        return Err(Error::Domain(format!("t must be finite, got {t}")));
    }
    if t == 0.0 {
        return Ok(ci(0.0, 0.0));
    }
    let mut terms = Vec::with_capacity(p.n() as usize);
    // j = 0 has zero shift: Gamma(1+it)/Gamma(1+it/2)^2
    terms.push(
        log_gamma(ci(1.0, t))?.value - 2.0 * log_gamma(ci(1.0, t / 2.0))?.value,
    );
    for j in 1..p.n() {
        let (_, fr) = p.floor_frac(j);
        let full = log_gamma(ci(1.0 + fr, t))?.value;
        let real = log_gamma(ci(1.0 + fr, 0.0))?.value;
        let half = log_gamma(ci(1.0 + fr, t / 2.0))?.value;
        terms.push(full + real - 2.0 * half);
    }
    Ok(pairwise_sum_complex(&terms) + integer_shift_product(p, t).ln())
}

/// Dissected representation of `psi(t)`.
pub fn psi_dissected(p: &EnsembleParams, t: f64) -> Result<Complex64, Error> {
    Ok(log_psi_dissected(p, t)?.exp())
}

/// The integer-shift product and its log. This is the factor of the dissected
/// representation that carries the entire power decay of `psi` in `t`.
#[derive(Clone, Copy, Debug)]
pub struct PFactor {
    pub value: Complex64,
    pub log_value: Complex64,
}

pub fn p_factor(p: &EnsembleParams, t: f64) -> PFactor {
    let prod = integer_shift_product(p, t);
    PFactor { value: prod.value(), log_value: prod.ln() }
}

/// `W(y) = log(4 y^2 + 1) - y arctan(2 y)`, the exponent profile controlling
/// the integer-shift product on `|t| >= (N-1) b/2`. Strictly increasing on
/// `[0, 1]` with `W(y) >= 16 y^2 / 25` on `[0, 1/4]` and `W >= 1/25` beyond.
pub fn w_function(y: f64) -> Result<f64, Error> {
    if !(y >= 0.0) || !y.is_finite() {
        return Err(Error::Domain(format!("w_function needs y >= 0, got {y}")));
    }
    Ok((4.0 * y * y).ln_1p() - y * (2.0 * y).atan())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(n: u32, beta: f64) -> EnsembleParams {
        EnsembleParams::new(n, beta).unwrap()
    }

    // all reference constants below are frozen from 30-digit arithmetic

    #[test]
    fn single_matrix_modulus_identity() {
        // |psi_{N=1}(2)|^2 = tanh(pi)/pi
        let lp = log_psi_gamma(&params(1, 2.0), 2.0).unwrap();
        let abs2 = (2.0 * lp.re).exp();
        assert_relative_eq!(abs2, 0.317123251189915740, max_relative = 1e-13);
    }

    #[test]
    fn gamma_representation_reference_points() {
        let v = psi_gamma(&params(2, 2.0), 0.5).unwrap();
        assert_relative_eq!(v.re, 0.877973540625999070, max_relative = 1e-12);
        assert_relative_eq!(v.im, 0.0338389555964614123, max_relative = 1e-12);

        let v = psi_gamma(&params(5, 1.0), 1.7).unwrap();
        assert_relative_eq!(v.re, 0.0521308574935622343, max_relative = 1e-12);
        assert_relative_eq!(v.im, 0.148959038465950941, max_relative = 1e-12);

        let v = psi_gamma(&params(10, 4.0), 3.25).unwrap();
        assert_relative_eq!(v.re, -0.0189096922400548681, max_relative = 1e-11);
        assert_relative_eq!(v.im, 0.0167013874774619428, max_relative = 1e-11);

        let l = log_psi_gamma(&params(3, 2.0), 100.0).unwrap();
        assert_relative_eq!(l.re, 6.48811801638494910e-8f64.ln(), max_relative = 1e-12);
    }

    #[test]
    fn psi_at_zero_is_one() {
        let p = params(7, 1.3);
        assert_eq!(psi_gamma(&p, 0.0).unwrap(), ci(1.0, 0.0));
        assert_eq!(psi_dissected(&p, 0.0).unwrap(), ci(1.0, 0.0));
        let w = psi_weierstrass(&p, 0.0, 100).unwrap();
        assert_eq!(w.value, ci(1.0, 0.0));
    }

    #[test]
    fn conjugate_symmetry() {
        let p = params(6, 2.5);
        for &t in &[0.3, 1.0, 4.7] {
            let a = psi_gamma(&p, t).unwrap();
            let b = psi_gamma(&p, -t).unwrap();
            assert!((a - b.conj()).norm() < 1e-14);
        }
    }

    #[test]
    fn modulus_never_exceeds_one() {
        for &(n, beta) in &[(1u32, 2.0), (4, 0.5), (9, 3.7)] {
            let p = params(n, beta);
            for &t in &[1e-3, 0.1, 1.0, 10.0, 250.0] {
                let l = log_psi_gamma(&p, t).unwrap();
                assert!(l.re <= 1e-12, "N={n} beta={beta} t={t}: log|psi| = {}", l.re);
            }
        }
    }

    #[test]
    fn representations_agree_at_moderate_t() {
        for &(n, beta) in &[(2u32, 2.0), (5, 1.0), (4, 2.7), (6, 0.5)] {
            let p = params(n, beta);
            for &t in &[0.25, 1.0, 3.0] {
                let g = log_psi_gamma(&p, t).unwrap();
                let d = log_psi_dissected(&p, t).unwrap();
                let w = psi_weierstrass(&p, t, 50_000).unwrap();
                assert!(!w.truncated);
                // compare through exp of the difference, insensitive to 2 pi
                let dd = ((g - d).exp() - 1.0).norm();
                let dw = ((g - w.log_value).exp() - 1.0).norm();
                assert!(dd < 1e-11, "dissected N={n} beta={beta} t={t}: {dd}");
                assert!(dw < 1e-9, "weierstrass N={n} beta={beta} t={t}: {dw}");
            }
        }
    }

    #[test]
    fn weierstrass_flags_nonconvergent_tail() {
        let w = psi_weierstrass(&params(2, 2.0), 500.0, 400).unwrap();
        assert!(w.truncated);
        assert!(w.tail_bound > 1.0);
    }

    #[test]
    fn dissected_equals_fractional_gamma_times_shift_product() {
        let p = params(8, 3.0);
        let t = 2.2;
        let d = log_psi_dissected(&p, t).unwrap();
        let shift = p_factor(&p, t).log_value;
        let mut frac = log_gamma(ci(1.0, t)).unwrap().value
            - 2.0 * log_gamma(ci(1.0, t / 2.0)).unwrap().value;
        for j in 1..p.n() {
            let (_, fr) = p.floor_frac(j);
            frac += log_gamma(ci(1.0 + fr, t)).unwrap().value
                + log_gamma(ci(1.0 + fr, 0.0)).unwrap().value
                - 2.0 * log_gamma(ci(1.0 + fr, t / 2.0)).unwrap().value;
        }
        assert!(((d - frac - shift).exp() - 1.0).norm() < 1e-12);
    }

    #[test]
    fn p_factor_is_one_for_single_matrix() {
        let f = p_factor(&params(1, 2.0), 5.0);
        assert_eq!(f.value, ci(1.0, 0.0));
    }

    #[test]
    fn w_function_profile() {
        assert_eq!(w_function(0.0).unwrap(), 0.0);
        assert_relative_eq!(w_function(1.0).unwrap(), 0.502289194640009872, max_relative = 1e-14);
        assert_relative_eq!(w_function(0.25).unwrap(), 0.107231649064008227, max_relative = 1e-14);
        let mut prev = -1.0;
        for i in 0..=100 {
            let y = i as f64 / 100.0;
            let w = w_function(y).unwrap();
            assert!(w > prev, "not increasing at y = {y}");
            if y <= 0.25 {
                assert!(w >= 16.0 * y * y / 25.0 - 1e-15);
            } else {
                assert!(w >= 1.0 / 25.0);
            }
            prev = w;
        }
        assert!(w_function(-0.1).is_err());
    }
}
