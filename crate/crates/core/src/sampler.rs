//! Samplers: inverse-CDF draws of `log |D_N|` from a density grid, an exact
//! rejection sampler for tiny ensembles, the two constructed
//! counterexample laws, and Kolmogorov-Smirnov helpers.
//!
//! All randomness is ChaCha12 keyed from `(seed, stream)` where a stream
//! serves a fixed 65536-draw block of the output; a batch is therefore fully
//! determined by `(params, seed, count)` and prefix-stable as `count` grows.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::density::{default_density, DensityGrid};
use crate::digits::{value_matches, DigitPattern};
use crate::error::Error;
use crate::params::EnsembleParams;
use crate::specfun::log_morris_product;

/// Draws served by one RNG stream.
pub const STREAM_CHUNK: usize = 65536;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic per-stream generator: the key is four splitmix64 outputs of
/// a state combining seed and stream index.
fn stream_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut state = seed ^ stream.wrapping_mul(0xD129_0D3B_3F55_7A11);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha12Rng::from_seed(key)
}

/// A reproducible batch of draws. `values` are `log |D|` when `log_scale`
/// is set (exponentiate before digit extraction), raw values otherwise.
#[derive(Clone, Debug)]
pub struct SampleBatch {
    pub label: String,
    pub seed: u64,
    pub log_scale: bool,
    pub values: Vec<f64>,
}

/// Monotone cubic (Fritsch-Carlson) interpolant of quantiles through the
/// strictly increasing CDF nodes of a grid.
pub struct QuantileTable {
    u: Vec<f64>,
    x: Vec<f64>,
    d: Vec<f64>,
}

impl QuantileTable {
    pub fn from_grid(grid: &DensityGrid) -> Result<Self, Error> {
        let cdf = grid.cdf();
        let n = cdf.len();
        // keep the last node of every run of equal CDF values, so flat
        // (zero-density) stretches collapse to their right edge
        let mut u = Vec::new();
        let mut x = Vec::new();
        for i in 0..n {
            if i + 1 == n || cdf[i + 1] > cdf[i] {
                u.push(cdf[i]);
                x.push(grid.x(i));
            }
        }
        if u.len() < 2 {
            return Err(Error::Domain("grid CDF is completely flat".into()));
        }
        let m = u.len();
        let h: Vec<f64> = (0..m - 1).map(|i| u[i + 1] - u[i]).collect();
        let s: Vec<f64> = (0..m - 1).map(|i| (x[i + 1] - x[i]) / h[i]).collect();
        let mut d = vec![0.0; m];
        d[0] = s[0];
        d[m - 1] = s[m - 2];
        for i in 1..m - 1 {
            // harmonic-weighted mean keeps the interpolant monotone
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / s[i - 1] + w2 / s[i]);
        }
        Ok(Self { u, x, d })
    }

    /// Quantile at `q` in `[0, 1)`; clamped to the table's range.
    pub fn eval(&self, q: f64) -> f64 {
        let m = self.u.len();
        let q = q.clamp(self.u[0], self.u[m - 1]);
        let i = match self.u.partition_point(|&v| v <= q) {
            0 => 0,
            k if k >= m => m - 2,
            k => k - 1,
        };
        let h = self.u[i + 1] - self.u[i];
        let t = (q - self.u[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.x[i] + h10 * h * self.d[i] + h01 * self.x[i + 1] + h11 * h * self.d[i + 1]
    }
}

/// Inverse-CDF draws of `log |D_N|` from an already built grid.
pub fn sample_log_abs_d_with_grid(
    grid: &DensityGrid,
    count: usize,
    seed: u64,
) -> Result<SampleBatch, Error> {
    let table = QuantileTable::from_grid(grid)?;
    let mut values = Vec::with_capacity(count);
    let mut stream = 0u64;
    let mut rng = stream_rng(seed, 0);
    for i in 0..count {
        let s = (i / STREAM_CHUNK) as u64;
        if s != stream {
            stream = s;
            rng = stream_rng(seed, s);
        }
        values.push(table.eval(rng.gen::<f64>()));
    }
    Ok(SampleBatch { label: "inverse_cdf".into(), seed, log_scale: true, values })
}

/// Inverse-CDF draws from the default density of the ensemble.
pub fn sample_log_abs_d(
    p: &EnsembleParams,
    count: usize,
    seed: u64,
) -> Result<SampleBatch, Error> {
    let grid = default_density(p)?;
    sample_log_abs_d_with_grid(&grid, count, seed)
}

/// Exact joint eigenangle sampler by rejection from uniform angles, for
/// matrices small enough that the acceptance rate is tolerable. Returns the
/// batch of `log |D|` values and the observed acceptance rate.
pub fn sample_eigenvalues_rejection(
    p: &EnsembleParams,
    count: usize,
    seed: u64,
) -> Result<(SampleBatch, f64), Error> {
    let n = p.n();
    if n > 4 {
        return Err(Error::Domain("rejection sampling is for N <= 4".into()));
    }
    let beta = p.beta();
    // mean acceptance = M_N(0,0,beta/2) / 2^{beta N (N-1) / 2}
    let pairs = (n * (n - 1) / 2) as f64;
    let log_accept = log_morris_product(n, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), beta / 2.0)?
        .re
        - beta * pairs * std::f64::consts::LN_2;
    if log_accept < (1e-5f64).ln() {
        return Err(Error::Capacity(format!(
            "rejection acceptance rate about {:.2e} is too low",
            log_accept.exp()
        )));
    }

    let log_env = beta * pairs * std::f64::consts::LN_2;
    let mut values = Vec::with_capacity(count);
    let mut proposals = 0u64;
    let mut stream = 0u64;
    let mut rng = stream_rng(seed, 0);
    let tau = 2.0 * std::f64::consts::PI;
    let mut theta = vec![0.0f64; n as usize];
    while values.len() < count {
        let s = (values.len() / STREAM_CHUNK) as u64;
        if s != stream {
            stream = s;
            rng = stream_rng(seed, s);
        }
        proposals += 1;
        for th in theta.iter_mut() {
            *th = tau * rng.gen::<f64>();
        }
        // log weight = beta * sum_{i<j} ln |e^{i a} - e^{i b}|
        let mut logw = 0.0;
        for i in 0..theta.len() {
            for j in 0..i {
                logw += (2.0 * ((theta[i] - theta[j]) / 2.0).sin().abs()).ln();
            }
        }
        logw *= beta;
        let u: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
        if u.ln() < logw - log_env {
            let v: f64 = theta.iter().map(|&th| (2.0 * (th / 2.0).sin().abs()).ln()).sum();
            values.push(v);
        }
    }
    let rate = count as f64 / proposals as f64;
    Ok((SampleBatch { label: "rejection".into(), seed, log_scale: true, values }, rate))
}

/// The two constructed laws used to show digit behavior is not implied by a
/// CLT alone.
#[derive(Clone, Copy, Debug)]
pub enum Counterexample {
    /// `10^(Y + eps Z)` with `Y ~ Binomial(n, 1/2)`, `Z` standard normal.
    /// At `eps = 0` every value is an exact power of ten.
    BinomialPower { n: u32, eps: f64 },
    /// Sum of `n` independent signs; integer valued, CLT-normal, digit-degenerate.
    SignSum { n: u32 },
}

pub fn counterexample_sample(
    kind: Counterexample,
    count: usize,
    seed: u64,
) -> Result<SampleBatch, Error> {
    let mut values = Vec::with_capacity(count);
    let mut stream = 0u64;
    let mut rng = stream_rng(seed, 0);
    match kind {
        Counterexample::BinomialPower { n, eps } => {
            if n == 0 || n > 60 {
                return Err(Error::Domain("binomial power needs 1 <= n <= 60".into()));
            }
            if !(eps >= 0.0) || !eps.is_finite() {
                return Err(Error::Domain(format!("eps must be >= 0, got {eps}")));
            }
            let mask = (1u64 << n) - 1;
            for i in 0..count {
                let s = (i / STREAM_CHUNK) as u64;
                if s != stream {
                    stream = s;
                    rng = stream_rng(seed, s);
                }
                let y = (rng.gen::<u64>() & mask).count_ones() as i32;
                let v = if eps == 0.0 {
                    10f64.powi(y)
                } else {
                    // Box-Muller; 1-u keeps the log argument in (0, 1]
                    let u1: f64 = rng.gen();
                    let u2: f64 = rng.gen();
                    let z = (-2.0 * (1.0 - u1).ln()).sqrt()
                        * (2.0 * std::f64::consts::PI * u2).cos();
                    10f64.powf(y as f64 + eps * z)
                };
                values.push(v);
            }
            Ok(SampleBatch { label: "binomial_power".into(), seed, log_scale: false, values })
        }
        Counterexample::SignSum { n } => {
            if n == 0 {
                return Err(Error::Domain("sign sum needs n >= 1".into()));
            }
            for i in 0..count {
                let s = (i / STREAM_CHUNK) as u64;
                if s != stream {
                    stream = s;
                    rng = stream_rng(seed, s);
                }
                let mut total: i64 = 0;
                let mut rem = n;
                while rem > 0 {
                    let take = rem.min(64);
                    let bits: u64 = rng.gen();
                    let bits = if take == 64 { bits } else { bits & ((1u64 << take) - 1) };
                    total += 2 * bits.count_ones() as i64 - take as i64;
                    rem -= take;
                }
                values.push(total as f64);
            }
            Ok(SampleBatch { label: "sign_sum".into(), seed, log_scale: false, values })
        }
    }
}

/// Fraction of the batch whose value matches the digit pattern, with the
/// binomial standard error.
pub fn digit_frequency(batch: &SampleBatch, pattern: &DigitPattern) -> Result<(f64, f64), Error> {
    if batch.values.is_empty() {
        return Err(Error::Domain("empty batch".into()));
    }
    let mut hits = 0usize;
    for &v in &batch.values {
        let x = if batch.log_scale { v.exp() } else { v };
        if value_matches(x, pattern)? {
            hits += 1;
        }
    }
    let n = batch.values.len() as f64;
    let f = hits as f64 / n;
    Ok((f, (f * (1.0 - f) / n).sqrt()))
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_statistic_two_sample(xs: &[f64], ys: &[f64]) -> f64 {
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        if a[i] < b[j] {
            i += 1;
        } else if b[j] < a[i] {
            j += 1;
        } else {
            let v = a[i];
            while i < a.len() && a[i] == v {
                i += 1;
            }
            while j < b.len() && b[j] == v {
                j += 1;
            }
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Asymptotic critical value of the two-sample statistic at significance
/// `level`: `sqrt(-ln(level/2)/2) * sqrt((n+m)/(n m))`.
pub fn ks_critical_two_sample(level: f64, n: usize, m: usize) -> f64 {
    (-(level / 2.0).ln() / 2.0).sqrt() * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// One-sample Kolmogorov-Smirnov statistic against an arbitrary CDF.
pub fn ks_statistic_against<F: Fn(f64) -> f64>(xs: &[f64], cdf: F) -> f64 {
    let mut a = xs.to_vec();
    a.sort_by(f64::total_cmp);
    let n = a.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in a.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max((f - (i + 1) as f64 / n).abs());
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::build_density;

    fn params(n: u32, beta: f64) -> EnsembleParams {
        EnsembleParams::new(n, beta).unwrap()
    }

    #[test]
    fn batches_are_reproducible_and_prefix_stable() {
        let k = Counterexample::SignSum { n: 100 };
        let a = counterexample_sample(k, 70_000, 42).unwrap();
        let b = counterexample_sample(k, 70_000, 42).unwrap();
        assert_eq!(a.values, b.values);
        let c = counterexample_sample(k, 66_000, 42).unwrap();
        assert_eq!(&a.values[..66_000], &c.values[..]);
        let d = counterexample_sample(k, 70_000, 43).unwrap();
        assert_ne!(a.values, d.values);
    }

    #[test]
    fn inverse_cdf_matches_grid_distribution() {
        let p = params(5, 1.0);
        let grid = build_density(&p, 12.0, 1 << 14).unwrap();
        let batch = sample_log_abs_d_with_grid(&grid, 4000, 7).unwrap();
        assert!(batch.log_scale);
        let d = ks_statistic_against(&batch.values, |x| grid.cdf_at(x));
        let crit = (-(0.001f64 / 2.0).ln() / 2.0).sqrt() / (4000f64).sqrt();
        assert!(d < crit, "KS {d} over critical {crit}");
    }

    #[test]
    fn quantile_table_is_monotone() {
        let p = params(5, 1.0);
        let grid = build_density(&p, 12.0, 1 << 12).unwrap();
        let table = QuantileTable::from_grid(&grid).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=1000 {
            let q = i as f64 / 1000.0;
            let x = table.eval(q);
            assert!(x >= prev, "quantiles dip at q = {q}");
            prev = x;
        }
    }

    #[test]
    fn rejection_sampler_statistics() {
        let p = params(3, 2.0);
        let (batch, rate) = sample_eigenvalues_rejection(&p, 4000, 11).unwrap();
        // mean acceptance = 6 / 64
        assert!((rate - 6.0 / 64.0).abs() < 0.03, "acceptance rate {rate}");
        let n = batch.values.len() as f64;
        let mean = batch.values.iter().sum::<f64>() / n;
        let var = batch.values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let want = crate::cumulants::variance(&p);
        assert!(mean.abs() < 0.1, "mean {mean}");
        assert!((var - want).abs() < 0.2, "variance {var} vs {want}");
    }

    #[test]
    fn rejection_guards() {
        assert!(sample_eigenvalues_rejection(&params(5, 2.0), 10, 0).is_err());
        assert!(matches!(
            sample_eigenvalues_rejection(&params(4, 8.0), 10, 0),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn binomial_power_hits_exact_powers_of_ten() {
        let b = counterexample_sample(Counterexample::BinomialPower { n: 20, eps: 0.0 }, 5000, 3)
            .unwrap();
        let one = DigitPattern::leading(10, vec![1]).unwrap();
        let (f, _) = digit_frequency(&b, &one).unwrap();
        assert_eq!(f, 1.0);
        // every value is 10^y for an integer y
        assert!(b.values.iter().all(|&v| {
            let l = v.log10().round();
            v == 10f64.powi(l as i32)
        }));
    }

    #[test]
    fn sign_sum_moments() {
        let b =
            counterexample_sample(Counterexample::SignSum { n: 100 }, 20_000, 5).unwrap();
        let n = b.values.len() as f64;
        let mean = b.values.iter().sum::<f64>() / n;
        let var = b.values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        assert!(mean.abs() < 0.35, "mean {mean}");
        assert!((var - 100.0).abs() < 5.0, "variance {var}");
        // parity: all values even
        assert!(b.values.iter().all(|&v| (v as i64) % 2 == 0));
    }

    #[test]
    fn ks_helpers_behave() {
        let a: Vec<f64> = (0..1000).map(|i| i as f64 / 1000.0).collect();
        let b: Vec<f64> = (0..1000).map(|i| i as f64 / 1000.0 + 0.5).collect();
        let d = ks_statistic_two_sample(&a, &b);
        assert!((d - 0.5).abs() < 0.01, "shifted uniforms: {d}");
        let same = ks_statistic_two_sample(&a, &a);
        assert!(same < 1e-12);
        let crit = ks_critical_two_sample(0.001, 10_000, 10_000);
        assert!((crit - 1.94947 * (2.0f64 / 10_000.0).sqrt()).abs() < 1e-4);
    }
}
