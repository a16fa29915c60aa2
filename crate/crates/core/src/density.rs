//! Density of `log |D_N|` by Fourier inversion of `psi` on a symmetric grid,
//! with a certified-or-measured bound on the neglected `|t|` tail, plus the
//! CLT distances computed from the grid.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use statrs::function::erf::{erf, erfc};

use crate::charfn::log_psi_gamma;
use crate::cumulants::t_n;
use crate::digits::{digit_event_set, DigitPattern};
use crate::error::Error;
use crate::params::EnsembleParams;
use crate::regimes::{c_star, high_simplified_min_n, intermediate_edge, BoundConstants};

/// Half-width floor of the x span: the left tail of the density decays like
/// `e^x`, so 23 units keep the wrapped-in mass near 1e-10.
const HALF_SPAN_FLOOR: f64 = 23.0;

/// Tail mass the inversion must certify or measure before a grid is built.
pub const TAIL_TOLERANCE: f64 = 1e-8;

const MIN_POINTS: usize = 1 << 10;
const MAX_POINTS: usize = 1 << 24;

/// Diagnostics of a build.
#[derive(Clone, Copy, Debug)]
pub struct DensityMeta {
    /// Largest `|t|` the inversion integrated to.
    pub t_max: f64,
    /// Proved bound on the dropped `int_{|t| > t_max} |psi|`, infinite when
    /// no decay bound applies at `t_max`.
    pub certified_tail: f64,
    /// Slope-extrapolated estimate of the same integral.
    pub empirical_tail: f64,
    /// Trapezoid mass of the raw inversion before renormalization.
    pub raw_mass: f64,
    /// Most negative raw density value (ringing indicator).
    pub min_raw_density: f64,
    /// Estimated probability mass outside the x span.
    pub tail_mass_estimate: f64,
}

/// Piecewise-linear density of `log |D_N|` on a uniform grid, with its
/// cumulative trapezoid CDF.
#[derive(Clone, Debug)]
pub struct DensityGrid {
    pub n: u32,
    pub beta: f64,
    x0: f64,
    step: f64,
    rho: Vec<f64>,
    cdf: Vec<f64>,
    pub meta: DensityMeta,
}

impl DensityGrid {
    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.step
    }

    pub fn x_min(&self) -> f64 {
        self.x0
    }

    pub fn x_max(&self) -> f64 {
        self.x(self.rho.len() - 1)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn cdf(&self) -> &[f64] {
        &self.cdf
    }

    /// CDF at an arbitrary point, interpolated consistently with the
    /// trapezoid rule (density linear within each cell).
    pub fn cdf_at(&self, x: f64) -> f64 {
        if x <= self.x0 {
            return 0.0;
        }
        let last = self.rho.len() - 1;
        if x >= self.x(last) {
            return 1.0;
        }
        let pos = (x - self.x0) / self.step;
        let i = (pos.floor() as usize).min(last - 1);
        let u = x - self.x(i);
        let slope = (self.rho[i + 1] - self.rho[i]) / self.step;
        let rho_x = self.rho[i] + slope * u;
        (self.cdf[i] + u * (self.rho[i] + rho_x) / 2.0).clamp(0.0, 1.0)
    }

    /// Integral of the density over `[lo, hi]`, clipped to the span.
    pub fn integral_between(&self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        (self.cdf_at(hi) - self.cdf_at(lo)).max(0.0)
    }

    /// Rows of `x,rho,cdf`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,rho,cdf\n");
        for i in 0..self.len() {
            s.push_str(&format!("{:.17e},{:.17e},{:.17e}\n", self.x(i), self.rho[i], self.cdf[i]));
        }
        s
    }

    /// Little-endian binary layout: magic `CBD1`, then n (u32), beta, x0,
    /// step (f64), count (u64), six meta f64s, then rho and cdf arrays.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(48 + 16 * self.len());
        out.extend_from_slice(b"CBD1");
        out.extend_from_slice(&self.n.to_le_bytes());
        for v in [self.beta, self.x0, self.step] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&(self.len() as u64).to_le_bytes());
        for v in [
            self.meta.t_max,
            self.meta.certified_tail,
            self.meta.empirical_tail,
            self.meta.raw_mass,
            self.meta.min_raw_density,
            self.meta.tail_mass_estimate,
        ] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for v in self.rho.iter().chain(self.cdf.iter()) {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, Error> {
        let need = |n: usize| -> Result<(), Error> {
            if bytes.len() < n {
                Err(Error::Format("density blob truncated".into()))
            } else {
                Ok(())
            }
        };
        need(88)?;
        if &bytes[0..4] != b"CBD1" {
            return Err(Error::Format("bad density magic".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let n = u32_at(4);
        let beta = f64_at(8);
        let x0 = f64_at(16);
        let step = f64_at(24);
        let count = u64::from_le_bytes(bytes[32..40].try_into().unwrap()) as usize;
        if !(2..=MAX_POINTS).contains(&count) {
            return Err(Error::Format(format!("bad density point count {count}")));
        }
        need(88 + 16 * count)?;
        let meta = DensityMeta {
            t_max: f64_at(40),
            certified_tail: f64_at(48),
            empirical_tail: f64_at(56),
            raw_mass: f64_at(64),
            min_raw_density: f64_at(72),
            tail_mass_estimate: f64_at(80),
        };
        let mut rho = Vec::with_capacity(count);
        let mut cdf = Vec::with_capacity(count);
        for i in 0..count {
            rho.push(f64_at(88 + 8 * i));
        }
        for i in 0..count {
            cdf.push(f64_at(88 + 8 * (count + i)));
        }
        if !(step > 0.0) || rho.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Format("density values malformed".into()));
        }
        if cdf.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Format("cdf not monotone".into()));
        }
        Ok(DensityGrid { n, beta, x0, step, rho, cdf, meta })
    }
}

/// Log of the best proved bound constant `C` with `|psi(t)| <= C |t|^{-N/2}`
/// valid for `|t| > max(N beta sqrt 2, 4e)`; `None` when no bound applies.
fn log_decay_constant(p: &EnsembleParams) -> Option<f64> {
    if p.n() < 3 {
        return None;
    }
    let n = p.n() as f64;
    let k = BoundConstants::for_params(p);
    let full = 0.5 * (2.0 / PI).ln() + (n - 1.0) * c_star().ln() - n * n * p.beta() / 50.0
        + k.c3 * n;
    if n > high_simplified_min_n(p.beta()) {
        let simple = (2.0 / PI).ln() + (n - 1.0) * c_star().ln();
        Some(full.min(simple))
    } else {
        Some(full)
    }
}

/// Proved bound on `int_t^inf |psi|`, infinite if no decay bound holds at `t`.
pub fn certified_tail_integral(p: &EnsembleParams, t: f64) -> f64 {
    let floor = intermediate_edge(p).max(4.0 * std::f64::consts::E);
    let Some(log_c) = log_decay_constant(p) else {
        return f64::INFINITY;
    };
    if t <= floor {
        return f64::INFINITY;
    }
    let half_n = p.n() as f64 / 2.0;
    // int C s^{-N/2} ds from t = C t^{1-N/2} / (N/2 - 1)
    (log_c + (1.0 - half_n) * t.ln() - (half_n - 1.0).ln()).exp()
}

/// Smallest `t` at which the proved tail integral reaches `tol`, or `None`
/// when that `t` exceeds 1e7 (or no bound exists).
pub fn certified_t_for_tail(p: &EnsembleParams, tol: f64) -> Option<f64> {
    let log_c = log_decay_constant(p)?;
    let half_n = p.n() as f64 / 2.0;
    let floor = intermediate_edge(p).max(4.0 * std::f64::consts::E) * 1.0001;
    let log_t = (log_c - tol.ln() - (half_n - 1.0).ln()) / (half_n - 1.0);
    let t = log_t.exp().max(floor);
    (t <= 1e7).then_some(t)
}

/// Slope-extrapolated estimate of `int_t^inf |psi|`: fit a local power law
/// through `|psi|` at `t / 1.25` and `t`, integrate it, pad by 10x.
pub fn empirical_tail_integral(p: &EnsembleParams, t: f64) -> Result<f64, Error> {
    let l1 = log_psi_gamma(p, t)?.re;
    let l0 = log_psi_gamma(p, t / 1.25)?.re;
    let q = (l0 - l1) / 1.25f64.ln();
    if q <= 1.5 {
        return Ok(f64::INFINITY);
    }
    Ok((l1 + t.ln() - (q - 1.0).ln() + 10f64.ln()).exp())
}

/// Default width of the x span in units of `T_N`.
pub const DEFAULT_SPAN_SIGMAS: f64 = 12.0;

/// Point count whose implied `t_max` drives the tail under [`TAIL_TOLERANCE`]
/// for this ensemble, clamped to `[2^14, 2^23]`.
pub fn choose_points(p: &EnsembleParams, span_sigmas: f64) -> Result<usize, Error> {
    let span = (span_sigmas * t_n(p)).max(2.0 * HALF_SPAN_FLOOR);
    let t_needed = match certified_t_for_tail(p, TAIL_TOLERANCE) {
        Some(t) => t,
        None => {
            // scan a coarse log grid for a t where the measured tail is safe
            let start = intermediate_edge(p).max(20.0) * 1.5;
            let mut found = None;
            for i in 0..=80 {
                let t = start * (1e7f64 / start).powf(i as f64 / 80.0);
                if empirical_tail_integral(p, t)? <= TAIL_TOLERANCE / 10.0 {
                    found = Some(t);
                    break;
                }
            }
            found.ok_or_else(|| {
                Error::Tail(format!(
                    "no t below 1e7 brings the |psi| tail under {TAIL_TOLERANCE}"
                ))
            })?
        }
    };
    let raw = (t_needed * span / PI).ceil() as usize;
    Ok(raw.next_power_of_two().clamp(1 << 14, 1 << 23))
}

/// Invert `psi` to the density of `log |D_N|` on `points` uniform x nodes
/// spanning `max(span_sigmas * T_N, 46)`.
///
/// The quadrature step in `t` and the x resolution are tied by
/// `dt dx = 2 pi / points`, so the grid integrates `|t| <= pi points / span`.
/// Building fails with `Tail` unless the dropped tail is proved or measured
/// below [`TAIL_TOLERANCE`]. Raw negative ringing is floored at zero and the
/// result renormalized; the CDF is the cumulative trapezoid.
pub fn build_density(
    p: &EnsembleParams,
    span_sigmas: f64,
    points: usize,
) -> Result<DensityGrid, Error> {
    if !points.is_power_of_two() || !(MIN_POINTS..=MAX_POINTS).contains(&points) {
        return Err(Error::Domain(format!(
            "points must be a power of two in [{MIN_POINTS}, {MAX_POINTS}], got {points}"
        )));
    }
    if !(span_sigmas >= 8.0) {
        return Err(Error::Domain(format!(
            "span must be at least 8 standard deviations, got {span_sigmas}"
        )));
    }
    let span = (span_sigmas * t_n(p)).max(2.0 * HALF_SPAN_FLOOR);
    let t_max = PI * points as f64 / span;

    let certified = certified_tail_integral(p, t_max);
    let empirical = empirical_tail_integral(p, t_max)?;
    if certified.min(empirical) > TAIL_TOLERANCE {
        return Err(Error::Tail(format!(
            "tail beyond t = {t_max:.3e} is certified {certified:.3e} / measured {empirical:.3e}, \
             both above {TAIL_TOLERANCE}"
        )));
    }

    let dt = 2.0 * t_max / points as f64;
    let dx = PI / t_max;
    let half = points / 2;

    // psi on t_k = -t_max + k dt; negative side by conjugate symmetry
    let mut buf = vec![Complex64::new(0.0, 0.0); points];
    for (i, v) in buf[half..].iter_mut().enumerate() {
        let t = i as f64 * dt;
        *v = log_psi_gamma(p, t)?.exp();
    }
    for k in 1..half {
        buf[k] = buf[points - k].conj();
    }
    buf[0] = log_psi_gamma(p, t_max)?.exp().conj();

    for (k, v) in buf.iter_mut().enumerate() {
        if k % 2 == 1 {
            *v = -*v;
        }
    }
    FftPlanner::new().plan_fft_forward(points).process(&mut buf);

    let scale = dt / (2.0 * PI);
    let mut rho: Vec<f64> = buf
        .iter()
        .enumerate()
        .map(|(m, v)| if m % 2 == 0 { scale * v.re } else { -scale * v.re })
        .collect();
    drop(buf);

    let mut min_raw = f64::INFINITY;
    for v in rho.iter_mut() {
        min_raw = min_raw.min(*v);
        if *v < 0.0 {
            *v = 0.0;
        }
    }

    let raw_mass = dx * (rho.iter().sum::<f64>() - (rho[0] + rho[points - 1]) / 2.0);
    if !(raw_mass > 0.5) {
        return Err(Error::Tail(format!(
            "inversion produced mass {raw_mass:.3e}; grid parameters are unusable"
        )));
    }
    for v in rho.iter_mut() {
        *v /= raw_mass;
    }

    let mut cdf = Vec::with_capacity(points);
    cdf.push(0.0);
    for i in 1..points {
        let inc = dx * (rho[i - 1] + rho[i]) / 2.0;
        cdf.push(cdf[i - 1] + inc);
    }
    let total = *cdf.last().unwrap();
    for v in cdf.iter_mut() {
        *v = (*v / total).min(1.0);
    }

    let x0 = -(half as f64) * dx;
    let tail_mass = edge_tail_estimate(&rho, dx) + (1.0 - raw_mass).abs();

    Ok(DensityGrid {
        n: p.n(),
        beta: p.beta(),
        x0,
        step: dx,
        rho,
        cdf,
        meta: DensityMeta {
            t_max,
            certified_tail: certified,
            empirical_tail: empirical,
            raw_mass,
            min_raw_density: min_raw,
            tail_mass_estimate: tail_mass,
        },
    })
}

/// Mass outside the span, estimated from exponential decay at each edge.
fn edge_tail_estimate(rho: &[f64], dx: f64) -> f64 {
    let n = rho.len();
    let gap = (n / 128).max(1);
    let mut est = 0.0;
    let sides = [(rho[0], rho[gap]), (rho[n - 1], rho[n - 1 - gap])];
    for (edge, inner) in sides {
        if edge <= 0.0 {
            continue;
        }
        if inner > edge {
            let lambda = (inner / edge).ln() / (gap as f64 * dx);
            est += edge / lambda;
        } else {
            // not decaying toward the edge; assume flat over one more span
            est += edge * (n as f64) * dx;
        }
    }
    est
}

/// [`build_density`] with the default span and an automatically chosen
/// point count.
pub fn default_density(p: &EnsembleParams) -> Result<DensityGrid, Error> {
    build_density(p, DEFAULT_SPAN_SIGMAS, choose_points(p, DEFAULT_SPAN_SIGMAS)?)
}

/// Standard normal reference on an explicit grid, with analytic CDF. The
/// ensemble fields are zeroed; distance functions reject such grids.
pub fn gaussian_reference(x0: f64, step: f64, points: usize) -> Result<DensityGrid, Error> {
    if points < 2 || !(step > 0.0) {
        return Err(Error::Domain("reference grid needs points >= 2 and step > 0".into()));
    }
    let norm = 1.0 / (2.0 * PI).sqrt();
    let rho: Vec<f64> =
        (0..points).map(|i| norm * (-(x0 + i as f64 * step).powi(2) / 2.0).exp()).collect();
    let cdf: Vec<f64> = (0..points)
        .map(|i| 0.5 * (1.0 + erf((x0 + i as f64 * step) / std::f64::consts::SQRT_2)))
        .collect();
    let tail = erfc(x0.abs() / std::f64::consts::SQRT_2);
    Ok(DensityGrid {
        n: 0,
        beta: 0.0,
        x0,
        step,
        rho,
        cdf,
        meta: DensityMeta {
            t_max: 0.0,
            certified_tail: 0.0,
            empirical_tail: 0.0,
            raw_mass: 1.0,
            min_raw_density: 0.0,
            tail_mass_estimate: tail,
        },
    })
}

fn ensemble_of(grid: &DensityGrid) -> Result<EnsembleParams, Error> {
    if grid.n == 0 {
        return Err(Error::Domain("grid does not carry ensemble parameters".into()));
    }
    EnsembleParams::new(grid.n, grid.beta)
}

/// Total variation distance between the grid density and the normal with
/// the ensemble's variance: `(1/2) int |rho - phi_T|` plus the mass either
/// side leaves outside the span.
pub fn tv_distance_to_gaussian(grid: &DensityGrid) -> Result<f64, Error> {
    let p = ensemble_of(grid)?;
    let tn = t_n(&p);
    let norm = 1.0 / (tn * (2.0 * PI).sqrt());
    let dx = grid.step();
    let mut acc = 0.0;
    for i in 0..grid.len() {
        let x = grid.x(i);
        let phi = norm * (-(x / tn).powi(2) / 2.0).exp();
        let w = if i == 0 || i == grid.len() - 1 { 0.5 } else { 1.0 };
        acc += w * (grid.rho()[i] - phi).abs();
    }
    let gauss_outside = erfc(grid.x_max().min(-grid.x_min()) / (tn * std::f64::consts::SQRT_2));
    Ok(0.5 * (acc * dx + gauss_outside + grid.meta.tail_mass_estimate))
}

/// Kolmogorov distance `sup_x |F_grid(x) - Phi(x / T_N)|` over the nodes.
pub fn kolmogorov_distance_to_gaussian(grid: &DensityGrid) -> Result<f64, Error> {
    let p = ensemble_of(grid)?;
    let tn = t_n(&p);
    let mut sup: f64 = 0.0;
    for i in 0..grid.len() {
        let phi = 0.5 * (1.0 + erf(grid.x(i) / (tn * std::f64::consts::SQRT_2)));
        sup = sup.max((grid.cdf()[i] - phi).abs());
    }
    Ok(sup)
}

/// Probability of a digit pattern for `|D_N|` computed from the grid: the
/// event set of the pattern, wrapped through `log_base`.
pub fn digit_prob_exact(grid: &DensityGrid, pattern: &DigitPattern) -> Result<f64, Error> {
    let set = digit_event_set(pattern)?;
    crate::mod1::wrapped_prob_from_density(grid, &set, (pattern.base() as f64).ln())
}
