use crate::error::Error;

/// Matrix size and inverse temperature of a circular beta ensemble.
///
/// `beta` may optionally be carried as an exact rational `p/q`, in which case
/// the floor/fractional splits of `j * beta / 2` are computed in integer
/// arithmetic. This matters because the dissected product and the P-factor
/// take `floor(j beta / 2)` literally, and a float floor that lands on the
/// wrong side of an integer would change the term count.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnsembleParams {
    n: u32,
    beta: f64,
    beta_rational: Option<(u32, u32)>,
}

impl EnsembleParams {
    /// Ensemble with a float `beta`. Fails unless `n >= 1` and `beta` is a
    /// positive finite number.
    pub fn new(n: u32, beta: f64) -> Result<Self, Error> {
        if n == 0 {
            return Err(Error::Domain("matrix size must be at least 1".into()));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::Domain(format!(
                "beta must be positive and finite, got {beta}"
            )));
        }
        Ok(Self { n, beta, beta_rational: None })
    }

    /// Ensemble with an exact rational `beta = num/den`.
    pub fn with_rational_beta(n: u32, num: u32, den: u32) -> Result<Self, Error> {
        if num == 0 || den == 0 {
            return Err(Error::Domain("rational beta must have positive parts".into()));
        }
        let mut p = Self::new(n, num as f64 / den as f64)?;
        p.beta_rational = Some((num, den));
        Ok(p)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `j * beta / 2` as a float. Exact rational parameters are re-derived
    /// from the integer parts so the value agrees with `floor_frac(j)`.
    pub fn half_beta_j(&self, j: u32) -> f64 {
        match self.beta_rational {
            Some((num, den)) => {
                let num = j as u64 * num as u64;
                let den = 2 * den as u64;
                num as f64 / den as f64
            }
            None => j as f64 * self.beta / 2.0,
        }
    }

    /// Split `j * beta / 2` into integer and fractional parts with the
    /// fractional part in `[0, 1)`.
    ///
    /// For rational beta the split is exact. For float beta, values within a
    /// few ulps of an integer are snapped to it, so that a product like
    /// `beta = 2` entered as a float never gains or loses a factor.
    pub fn floor_frac(&self, j: u32) -> (u64, f64) {
        if let Some((num, den)) = self.beta_rational {
            let num = j as u64 * num as u64;
            let den = 2 * den as u64;
            let fl = num / den;
            let frac = (num % den) as f64 / den as f64;
            return (fl, frac);
        }
        let y = j as f64 * self.beta / 2.0;
        let r = y.round();
        if (y - r).abs() <= 4.0 * f64::EPSILON * y.abs() && r >= 0.0 {
            (r as u64, 0.0)
        } else {
            let fl = y.floor();
            (fl as u64, y - fl)
        }
    }
}
