//! Special functions: complex log-gamma with a certified truncation bound,
//! integer-order Hurwitz zeta sums, and the Selberg/Morris gamma products.

use num_complex::Complex64;

use crate::error::Error;
use crate::util::pairwise_sum_complex;

/// Stirling series coefficients `B_{2k} / ((2k)(2k-1))` for k = 1..=8.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
];

/// |B_18 / (18 * 17)|, the first omitted coefficient; drives the remainder bound.
const STIRLING_NEXT: f64 = 43867.0 / 244188.0;

/// Modulus and argument below which the argument is shifted right before the
/// asymptotic series is applied.
const SHIFT_RADIUS: f64 = 12.0;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_74;

/// Value of `log Gamma(z)` together with a rigorous upper bound on the
/// truncation error of the asymptotic series behind it.
#[derive(Clone, Copy, Debug)]
pub struct LogGamma {
    pub value: Complex64,
    /// Upper bound on the modulus of the dropped series remainder.
    pub remainder_bound: f64,
}

/// Principal-branch `log Gamma(z)` for complex `z` off the poles.
///
/// The argument is shifted right by the recurrence until `Re z > 0` and
/// `|z| >= 12`, the Stirling series with eight Bernoulli terms is applied,
/// and the shift logs are subtracted back. The imaginary part accumulates
/// through the recurrence without any reduction mod 2 pi, which makes the
/// result continuous along vertical lines and safe to difference.
///
/// The remainder bound is `|a_9| / |z|^17 * sec(arg(z)/2)^18` evaluated at
/// the shifted argument; for every `|z| >= 12` in the right half plane it is
/// below `1 / (6 |z|)`.
pub fn log_gamma(z: Complex64) -> Result<LogGamma, Error> {
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.floor() {
        return Err(Error::Pole(z.re));
    }
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Domain(format!("log-gamma argument must be finite, got {z}")));
    }
    if z.re < -1e6 {
        return Err(Error::Domain(format!(
            "log-gamma argument too far left for the shift recurrence: {z}"
        )));
    }

    let mut w = z;
    let mut shift = Complex64::new(0.0, 0.0);
    while w.re <= 0.0 || w.norm_sqr() < SHIFT_RADIUS * SHIFT_RADIUS {
        shift += w.ln();
        w += 1.0;
    }

    // Stirling: (w - 1/2) ln w - w + ln(2 pi)/2 + sum a_k w^{1-2k}
    let lnw = w.ln();
    let inv2 = (w * w).inv();
    let mut series = Complex64::new(0.0, 0.0);
    for &a in STIRLING.iter().rev() {
        series = series * inv2 + a;
    }
    series /= w;

    let value = (w - 0.5) * lnw - w + HALF_LN_2PI + series - shift;

    let half_arg = w.arg() / 2.0;
    let sec = 1.0 / half_arg.cos();
    let remainder_bound = STIRLING_NEXT / w.norm().powi(17) * sec.powi(18);

    Ok(LogGamma { value, remainder_bound })
}

/// `log Gamma(x)` for real `x > 0`.
pub fn log_gamma_real(x: f64) -> Result<f64, Error> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("real log-gamma needs x > 0, got {x}")));
    }
    Ok(log_gamma(Complex64::new(x, 0.0))?.value.re)
}

/// Number of directly summed terms in [`hurwitz_zeta`].
const HURWITZ_TERMS: usize = 10_000;

/// `sum_{n >= 1} (n + s)^{-l}` for integer `l >= 2` and real `s >= 0`.
///
/// Note the sum starts at `n = 1`, so this equals the classical Hurwitz zeta
/// at `(l, 1 + s)`. Ten thousand terms are summed smallest-first and the rest
/// is replaced by an Euler-Maclaurin tail, giving close to full precision.
pub fn hurwitz_zeta(l: u32, s: f64) -> Result<f64, Error> {
    if l < 2 {
        return Err(Error::Domain(format!("zeta order must be >= 2, got {l}")));
    }
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::Domain(format!("zeta shift must be finite and >= 0, got {s}")));
    }
    let le = l as i32;
    let mut acc = 0.0;
    for n in (1..=HURWITZ_TERMS).rev() {
        acc += (n as f64 + s).powi(-le);
    }
    let a = (HURWITZ_TERMS + 1) as f64 + s;
    let lf = l as f64;
    let tail = a.powi(1 - le) / (lf - 1.0) + 0.5 * a.powi(-le) + lf * a.powi(-le - 1) / 12.0
        - lf * (lf + 1.0) * (lf + 2.0) * a.powi(-le - 3) / 720.0;
    Ok(acc + tail)
}

/// Log of the Morris product
/// `prod_{j=0}^{n-1} Gamma(1+a+b+j g) Gamma(1+(j+1) g) / (Gamma(1+a+j g) Gamma(1+b+j g) Gamma(1+g))`.
///
/// Returned in log form because the value overgrows f64 range already for
/// moderate `n`.
pub fn log_morris_product(
    n: u32,
    a: Complex64,
    b: Complex64,
    gamma: f64,
) -> Result<Complex64, Error> {
    if n == 0 {
        return Err(Error::Domain("morris product needs n >= 1".into()));
    }
    if !(gamma > 0.0) {
        return Err(Error::Domain(format!("morris product needs gamma > 0, got {gamma}")));
    }
    if (a + b).re <= -1.0 {
        return Err(Error::Domain("morris product needs Re(a + b) > -1".into()));
    }
    let lg1g = log_gamma(Complex64::new(1.0 + gamma, 0.0))?.value;
    let mut terms = Vec::with_capacity(n as usize);
    for j in 0..n {
        let jg = j as f64 * gamma;
        let t = log_gamma(a + b + (1.0 + jg))?.value
            + log_gamma(Complex64::new(1.0 + jg + gamma, 0.0))?.value
            - log_gamma(a + (1.0 + jg))?.value
            - log_gamma(b + (1.0 + jg))?.value
            - lg1g;
        terms.push(t);
    }
    Ok(pairwise_sum_complex(&terms))
}

/// Morris product itself; overflows for large `n`, prefer the log form.
pub fn morris_product(n: u32, a: Complex64, b: Complex64, gamma: f64) -> Result<Complex64, Error> {
    Ok(log_morris_product(n, a, b, gamma)?.exp())
}

/// Log of the Selberg product
/// `prod_{j=0}^{n-1} Gamma(al+j g) Gamma(be+j g) Gamma(1+(j+1) g) / (Gamma(al+be+(n+j-1) g) Gamma(1+g))`.
pub fn log_selberg_product(
    n: u32,
    alpha: Complex64,
    beta: Complex64,
    gamma: f64,
) -> Result<Complex64, Error> {
    if n == 0 {
        return Err(Error::Domain("selberg product needs n >= 1".into()));
    }
    if alpha.re <= 0.0 || beta.re <= 0.0 {
        return Err(Error::Domain("selberg product needs Re(alpha), Re(beta) > 0".into()));
    }
    let mut lim = 1.0 / n as f64;
    if n > 1 {
        let nm1 = (n - 1) as f64;
        lim = lim.min(alpha.re / nm1).min(beta.re / nm1);
    }
    if gamma <= -lim {
        return Err(Error::Domain(format!(
            "selberg product needs gamma > {:.6}, got {gamma}",
            -lim
        )));
    }
    let lg1g = log_gamma(Complex64::new(1.0 + gamma, 0.0))?.value;
    let mut terms = Vec::with_capacity(n as usize);
    for j in 0..n {
        let jg = j as f64 * gamma;
        let t = log_gamma(alpha + jg)?.value + log_gamma(beta + jg)?.value
            + log_gamma(Complex64::new(1.0 + jg + gamma, 0.0))?.value
            - log_gamma(alpha + beta + ((n - 1 + j) as f64 * gamma))?.value
            - lg1g;
        terms.push(t);
    }
    Ok(pairwise_sum_complex(&terms))
}

/// Selberg product itself.
pub fn selberg_product(
    n: u32,
    alpha: Complex64,
    beta: Complex64,
    gamma: f64,
) -> Result<Complex64, Error> {
    Ok(log_selberg_product(n, alpha, beta, gamma)?.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn log_gamma_reference_points() {
        // reference values computed with 30-digit arbitrary precision arithmetic
        let half = log_gamma(c(0.5, 0.0)).unwrap().value;
        assert_relative_eq!(half.re, 0.572364942924700087, max_relative = 1e-14);
        assert!(half.im.abs() < 1e-15);

        let z1 = log_gamma(c(1.0, 1.0)).unwrap().value;
        assert_relative_eq!(z1.re, -0.650923199301856339, max_relative = 1e-13);
        assert_relative_eq!(z1.im, -0.301640320467533198, max_relative = 1e-13);

        // |z| >= 12 exercises the no-shift path
        let z2 = log_gamma(c(12.3, 4.5)).unwrap().value;
        assert_relative_eq!(z2.re, 17.4010546414308418, max_relative = 1e-14);
        assert_relative_eq!(z2.im, 11.2122418520753158, max_relative = 1e-14);

        // one or two shifts
        let z3 = log_gamma(c(1.0, 10.0)).unwrap().value;
        assert_relative_eq!(z3.re, -13.6377321882472706, max_relative = 1e-13);
        assert_relative_eq!(z3.im, 13.8029129742299007, max_relative = 1e-13);

        // a dozen shifts from near the origin
        let z4 = log_gamma(c(0.001, 0.002)).unwrap().value;
        assert_relative_eq!(z4.re, 6.10245664410472449, max_relative = 1e-13);
        assert_relative_eq!(z4.im, -1.10829985846087465, max_relative = 1e-12);

        // analytic continuation left of the imaginary axis
        let z5 = log_gamma(c(-2.5, 1.5)).unwrap().value;
        assert_relative_eq!(z5.re, -3.71751345119179185, max_relative = 1e-12);
        assert_relative_eq!(z5.im, -7.71306552583419253, max_relative = 1e-12);
    }

    #[test]
    fn log_gamma_rejects_poles() {
        for re in [0.0, -1.0, -2.0, -17.0] {
            assert!(matches!(log_gamma(c(re, 0.0)), Err(Error::Pole(_))));
        }
        assert!(log_gamma(c(-0.5, 0.0)).is_ok());
    }

    #[test]
    fn log_gamma_recurrence() {
        for &z in &[c(0.3, 0.7), c(-1.2, 2.0), c(5.0, -3.0), c(0.01, 100.0)] {
            let a = log_gamma(z + 1.0).unwrap().value;
            let b = log_gamma(z).unwrap().value + z.ln();
            assert!((a - b).norm() < 1e-11 * (1.0 + a.norm()), "z = {z}");
        }
    }

    #[test]
    fn remainder_bound_is_small_and_controlled() {
        for &re in &[0.5, 1.0, 5.0, 12.0, 100.0] {
            for &im in &[0.0, 1.0, 10.0, 1000.0] {
                let r = log_gamma(c(re, im)).unwrap();
                assert!(r.remainder_bound.is_finite());
                // the shifted argument has modulus >= 12, so this is loose
                let z_norm = (re * re + im * im).sqrt().max(12.0);
                assert!(r.remainder_bound <= 1.0 / (6.0 * z_norm));
                assert!(r.remainder_bound < 1e-15);
            }
        }
    }

    #[test]
    fn reflection_modulus_identity() {
        // |Gamma(1 + it)|^2 = pi t / sinh(pi t)
        for &t in &[0.5, 1.0, 2.0, 7.5] {
            let lg = log_gamma(c(1.0, t)).unwrap().value;
            let lhs = 2.0 * lg.re;
            let rhs = (std::f64::consts::PI * t / (std::f64::consts::PI * t).sinh()).ln();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-13);
        }
    }

    #[test]
    fn hurwitz_reference_points() {
        assert_relative_eq!(
            hurwitz_zeta(2, 0.0).unwrap(),
            1.64493406684822644,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            hurwitz_zeta(2, 0.5).unwrap(),
            0.934802200544679309,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            hurwitz_zeta(2, 1.0).unwrap(),
            0.644934066848226436,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            hurwitz_zeta(3, 2.5).unwrap(),
            0.0541020258208637015,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            hurwitz_zeta(6, 0.5).unwrap(),
            0.0926129050202958020,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            hurwitz_zeta(12, 0.25).unwrap(),
            0.0687796314589202895,
            max_relative = 1e-13
        );
    }

    #[test]
    fn hurwitz_domain() {
        assert!(hurwitz_zeta(1, 0.5).is_err());
        assert!(hurwitz_zeta(2, -0.1).is_err());
        assert!(hurwitz_zeta(2, f64::NAN).is_err());
    }

    #[test]
    fn selberg_small_case() {
        // S_2(1, 1, 1/2) = 1/3, the mean absolute spacing of two uniforms
        let s = selberg_product(2, c(1.0, 0.0), c(1.0, 0.0), 0.5).unwrap();
        assert_relative_eq!(s.re, 1.0 / 3.0, max_relative = 1e-13);
        assert!(s.im.abs() < 1e-15);
    }

    #[test]
    fn morris_single_factor_matches_gammas() {
        let (a, b, g) = (c(0.3, 0.1), c(-0.2, 0.0), 0.75);
        let m = log_morris_product(1, a, b, g).unwrap();
        let direct = log_gamma(a + b + 1.0).unwrap().value + log_gamma(c(1.0 + g, 0.0)).unwrap().value
            - log_gamma(a + 1.0).unwrap().value
            - log_gamma(b + 1.0).unwrap().value
            - log_gamma(c(1.0 + g, 0.0)).unwrap().value;
        assert!((m - direct).norm() < 1e-14);
    }

    #[test]
    fn morris_reference_point() {
        // M_3(0.2 + 0.4i, 0.1, 0.6), frozen from arbitrary precision arithmetic
        let m = morris_product(3, c(0.2, 0.4), c(0.1, 0.0), 0.6).unwrap();
        assert_relative_eq!(m.re, MORRIS_3_RE, max_relative = 1e-12);
        assert_relative_eq!(m.im, MORRIS_3_IM, max_relative = 1e-12);
    }

    const MORRIS_3_RE: f64 = 2.50601814081583009;
    const MORRIS_3_IM: f64 = 0.233400224519682610;

    #[test]
    fn product_domains() {
        assert!(log_morris_product(0, c(0.0, 0.0), c(0.0, 0.0), 1.0).is_err());
        assert!(log_morris_product(2, c(0.0, 0.0), c(0.0, 0.0), 0.0).is_err());
        assert!(log_morris_product(2, c(-0.7, 0.0), c(-0.5, 0.0), 1.0).is_err());
        assert!(log_selberg_product(2, c(0.0, 0.0), c(1.0, 0.0), 0.5).is_err());
        assert!(log_selberg_product(2, c(1.0, 0.0), c(1.0, 0.0), -0.6).is_err());
    }
}
