use num_complex::Complex64;

/// Pairwise summation. Error grows like O(log n) in ulps instead of O(n).
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        let mut acc = 0.0;
        for &x in xs {
            acc += x;
        }
        acc
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

/// Pairwise summation of complex terms.
pub fn pairwise_sum_complex(xs: &[Complex64]) -> Complex64 {
    if xs.len() <= 32 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &x in xs {
            acc += x;
        }
        acc
    } else {
        let mid = xs.len() / 2;
        pairwise_sum_complex(&xs[..mid]) + pairwise_sum_complex(&xs[mid..])
    }
}

/// Neumaier compensated accumulator for long streamed sums.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Complex product tracked as `mant * 2^exp2` so that products of thousands
/// of factors neither overflow nor underflow. `mant` is kept within a wide
/// band around magnitude 1.
#[derive(Clone, Copy, Debug)]
pub struct MantExp {
    mant: Complex64,
    exp2: i64,
}

impl MantExp {
    pub fn one() -> Self {
        Self { mant: Complex64::new(1.0, 0.0), exp2: 0 }
    }

    pub fn mul(&mut self, f: Complex64) {
        self.mant *= f;
        let n = self.mant.norm_sqr();
        if n != 0.0 && (n < 2f64.powi(-600) || n > 2f64.powi(600)) {
            // renormalize by an exact power of two
            let k = (n.log2() / 2.0).round() as i64;
            let scale = 2f64.powi(-(k as i32));
            self.mant *= scale;
            self.exp2 += k;
        }
    }

    /// Natural log of the tracked product (principal branch of the mantissa,
    /// so the imaginary part is only meaningful mod 2 pi).
    pub fn ln(&self) -> Complex64 {
        self.mant.ln() + Complex64::new(self.exp2 as f64 * std::f64::consts::LN_2, 0.0)
    }

    pub fn value(&self) -> Complex64 {
        self.mant * 2f64.powi(self.exp2.clamp(-2000, 2000) as i32)
    }
}

/// `count` points spaced log-uniformly on `[lo, hi]`, endpoints included.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && count >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| {
            // pin the endpoints: exp(ln x) can round off by an ulp
            if i == 0 {
                lo
            } else if i == count - 1 {
                hi
            } else {
                let s = i as f64 / (count - 1) as f64;
                (a + s * (b - a)).exp()
            }
        })
        .collect()
}

pub fn next_pow2(x: usize) -> usize {
    x.next_power_of_two()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_smooth_data() {
        let xs: Vec<f64> = (1..=1000).map(|k| 1.0 / k as f64).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-12);
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let mut acc = CompensatedSum::default();
        acc.add(1.0);
        for _ in 0..10_000 {
            acc.add(1e-17);
        }
        assert!((acc.value() - (1.0 + 1e-13)).abs() < 1e-16);
    }

    #[test]
    fn mantexp_survives_extreme_products() {
        let mut p = MantExp::one();
        for _ in 0..4000 {
            p.mul(Complex64::new(1e-3, 2e-3));
        }
        let l = p.ln();
        assert!(l.re.is_finite());
        // |f| = sqrt(5)*1e-3 so ln|product| = 4000 * ln(2.2360e-3)
        let expect = 4000.0 * (5e-6f64).sqrt().ln();
        assert!((l.re - expect).abs() < 1e-6 * expect.abs());
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-2, 1e3, 200);
        assert_eq!(g.len(), 200);
        assert!((g[0] - 1e-2).abs() < 1e-15);
        assert!((g[199] - 1e3).abs() < 1e-10);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }
}
