//! Synthetic signals with known scaling behavior, used as analytic oracles
//! for the MFDFA estimator: fractional Gaussian noise (exact circulant
//! embedding) and the deterministic binomial multifractal cascade.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rustfft::{num_complex::Complex, FftPlanner};

use crate::error::{Error, Result};

/// Fractional Gaussian noise autocovariance at lag k (unit variance):
/// gamma(k) = (|k+1|^2H - 2|k|^2H + |k-1|^2H) / 2.
fn fgn_autocov(h: f64, k: usize) -> f64 {
    let k = k as f64;
    let two_h = 2.0 * h;
    0.5 * ((k + 1.0).powf(two_h) - 2.0 * k.powf(two_h) + (k - 1.0).abs().powf(two_h))
}

/// Exact fractional Gaussian noise by circulant embedding (Davies-Harte).
///
/// `n` must be a power of two. The sample is deterministic per seed.
pub fn generate_fgn(hurst: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    if !(0.0 < hurst && hurst < 1.0) {
        return Err(Error::Fractal(format!(
            "fGn requires 0 < H < 1, got {}",
            hurst
        )));
    }
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::Fractal(format!(
            "fGn length must be a power of two >= 2, got {}",
            n
        )));
    }
    let m = 2 * n;
    // Circulant first row: gamma(0..n) then mirrored gamma(n-1..1).
    let mut row: Vec<Complex<f64>> = Vec::with_capacity(m);
    for k in 0..=n {
        row.push(Complex::new(fgn_autocov(hurst, k), 0.0));
    }
    for k in (1..n).rev() {
        row.push(Complex::new(fgn_autocov(hurst, k), 0.0));
    }
    debug_assert_eq!(row.len(), m);

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(m);
    fft.process(&mut row);
    // Eigenvalues of the circulant; tiny negative values from rounding are
    // clamped (the embedding is nonnegative-definite for fGn).
    let lambda: Vec<f64> = row
        .iter()
        .map(|c| {
            if c.re < -1e-8 {
                // Should not happen for fGn; surface rather than hide.
                f64::NAN
            } else {
                c.re.max(0.0)
            }
        })
        .collect();
    if lambda.iter().any(|v| v.is_nan()) {
        return Err(Error::Fractal(
            "circulant embedding produced a significantly negative eigenvalue".into(),
        ));
    }

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut normal = BoxMuller::new();
    let mut w: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); m];
    w[0] = Complex::new(lambda[0].sqrt() * normal.next(&mut rng), 0.0);
    w[n] = Complex::new(lambda[n].sqrt() * normal.next(&mut rng), 0.0);
    for k in 1..n {
        let a = normal.next(&mut rng);
        let b = normal.next(&mut rng);
        let s = (lambda[k] / 2.0).sqrt();
        w[k] = Complex::new(s * a, s * b);
        w[m - k] = Complex::new(s * a, -s * b);
    }
    fft.process(&mut w);
    let norm = 1.0 / (m as f64).sqrt();
    Ok(w.iter().take(n).map(|c| c.re * norm).collect())
}

/// Box-Muller standard normal sampler (pair-caching), deterministic for a
/// deterministic RNG.
struct BoxMuller {
    spare: Option<f64>,
}

impl BoxMuller {
    fn new() -> Self {
        BoxMuller { spare: None }
    }

    fn next<R: Rng>(&mut self, rng: &mut R) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1: f64 = loop {
            let u = rng.gen::<f64>();
            if u > 0.0 {
                break u;
            }
        };
        let u2: f64 = rng.gen();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }
}

/// Deterministic binomial multifractal cascade of length 2^levels.
///
/// Cell masses are split (a, 1-a) at every level; with a seed the side
/// receiving `a` is randomized per split, which changes the sample path but
/// not the multifractal spectrum. Values are scaled by 2^levels so the
/// series mean is 1. Closed form: h(q) = 1/q - log2(a^q + (1-a)^q) / q.
pub fn generate_binomial_cascade(a: f64, levels: u32, seed: Option<u64>) -> Result<Vec<f64>> {
    if !(0.5 < a && a < 1.0) {
        return Err(Error::Fractal(format!(
            "cascade parameter must satisfy 0.5 < a < 1, got {}",
            a
        )));
    }
    if levels < 10 || levels > 26 {
        return Err(Error::Fractal(format!(
            "cascade levels must be in [10, 26], got {}",
            levels
        )));
    }
    let mut rng = seed.map(ChaCha12Rng::seed_from_u64);
    let mut masses = vec![1.0f64];
    for _ in 0..levels {
        let mut next = Vec::with_capacity(masses.len() * 2);
        for &mass in &masses {
            let swap = match rng.as_mut() {
                Some(r) => r.gen::<bool>(),
                None => false,
            };
            let (left, right) = if swap { (1.0 - a, a) } else { (a, 1.0 - a) };
            next.push(mass * left * 2.0);
            next.push(mass * right * 2.0);
        }
        masses = next;
    }
    Ok(masses)
}

/// Closed-form generalized Hurst exponent of the binomial cascade:
/// h(q) = 1/q - log2(a^q + (1-a)^q)/q, with the analytic q -> 0 limit.
pub fn cascade_h_theory(a: f64, q: f64) -> f64 {
    let b = 1.0 - a;
    if q.abs() < 1e-9 {
        -(a.log2() + b.log2()) / 2.0
    } else {
        1.0 / q - (a.powf(q) + b.powf(q)).log2() / q
    }
}
