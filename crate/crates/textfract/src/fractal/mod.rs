//! Multifractal detrended fluctuation analysis (MFDFA).
//!
//! Given a series x_1..x_N the analysis proceeds in the classic steps:
//! build the profile (cumulative sum of the mean-centered series), split it
//! into windows of scale s, remove a least-squares polynomial trend per
//! window, form the q-th order fluctuation function F_q(s) from the window
//! residuals, and read the generalized Hurst exponent h(q) off the slope of
//! log F_q(s) vs log s. The singularity spectrum f(alpha) follows from h(q)
//! by a Legendre-type transform and yields the three scalar features used
//! downstream: H = h(2), D = alpha_max - alpha_min and the asymmetry A.

pub mod synth;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Series shorter than this are rejected by [`mfdfa`].
pub const MIN_SERIES_LEN: usize = 64;

/// How the scale (window size) grid is generated.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum ScaleGrid {
    /// `count` log-spaced integer scales in `[min_scale, N / max_scale_divisor]`,
    /// deduplicated after rounding.
    LogSpaced {
        count: usize,
        min_scale: usize,
        max_scale_divisor: usize,
    },
    /// Explicit scales (sorted, deduplicated before use).
    Explicit(Vec<usize>),
}

impl Default for ScaleGrid {
    fn default() -> Self {
        ScaleGrid::LogSpaced {
            count: 20,
            min_scale: 16,
            max_scale_divisor: 4,
        }
    }
}

/// MFDFA parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MfdfaConfig {
    /// Moment orders. Must be uniformly spaced and contain 0 and 2.
    pub q_grid: Vec<f64>,
    pub scales: ScaleGrid,
    /// Detrending polynomial order (1 = line).
    pub detrend_order: usize,
    /// Take windows from both ends of the profile (2 * floor(N/s) windows
    /// total) instead of from the start only.
    pub two_sided: bool,
    /// Window residuals below this floor are clamped before negative-q
    /// moments to keep them finite on piecewise-exact (integer) series.
    pub zero_floor: f64,
}

impl Default for MfdfaConfig {
    fn default() -> Self {
        MfdfaConfig {
            q_grid: default_q_grid(),
            scales: ScaleGrid::default(),
            detrend_order: 1,
            two_sided: true,
            zero_floor: 1e-30,
        }
    }
}

/// q from -5 to 5 in steps of 0.25.
pub fn default_q_grid() -> Vec<f64> {
    (-20..=20).map(|i| i as f64 * 0.25).collect()
}

impl MfdfaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.q_grid.len() < 3 {
            return Err(Error::Fractal("q grid needs at least 3 points".into()));
        }
        let step = self.q_grid[1] - self.q_grid[0];
        if step <= 0.0 {
            return Err(Error::Fractal("q grid must be strictly increasing".into()));
        }
        for w in self.q_grid.windows(2) {
            if ((w[1] - w[0]) - step).abs() > 1e-9 {
                return Err(Error::Fractal("q grid must be uniformly spaced".into()));
            }
        }
        let has = |target: f64| self.q_grid.iter().any(|&q| (q - target).abs() < 1e-12);
        if !has(0.0) || !has(2.0) {
            return Err(Error::Fractal("q grid must contain q = 0 and q = 2".into()));
        }
        match &self.scales {
            ScaleGrid::LogSpaced {
                count,
                min_scale,
                max_scale_divisor,
            } => {
                if *count < 6 {
                    return Err(Error::Fractal("need at least 6 scales".into()));
                }
                if *min_scale < self.detrend_order + 2 {
                    return Err(Error::Fractal(format!(
                        "min scale {} too small for detrend order {} (need >= m + 2)",
                        min_scale, self.detrend_order
                    )));
                }
                if *max_scale_divisor < 2 {
                    return Err(Error::Fractal("max scale divisor must be >= 2".into()));
                }
            }
            ScaleGrid::Explicit(scales) => {
                if scales.iter().any(|&s| s < self.detrend_order + 2) {
                    return Err(Error::Fractal("explicit scale below m + 2".into()));
                }
            }
        }
        Ok(())
    }

    /// Concrete sorted scale list for a series of length `n`.
    pub fn scales_for(&self, n: usize) -> Result<Vec<usize>> {
        let scales = match &self.scales {
            ScaleGrid::LogSpaced {
                count,
                min_scale,
                max_scale_divisor,
            } => {
                let smin = *min_scale;
                let smax = n / max_scale_divisor;
                if smax < smin {
                    return Err(Error::Fractal(format!(
                        "series of length {} has no valid scales in [{}, N/{}]",
                        n, smin, max_scale_divisor
                    )));
                }
                log_spaced_integers(smin, smax, *count)
            }
            ScaleGrid::Explicit(s) => {
                let mut s = s.clone();
                s.sort_unstable();
                s.dedup();
                if let Some(&max) = s.last() {
                    if max > n / 2 {
                        return Err(Error::Fractal(format!(
                            "scale {} exceeds N/2 for series of length {}",
                            max, n
                        )));
                    }
                }
                s
            }
        };
        if scales.len() < 6 {
            return Err(Error::Fractal(format!(
                "only {} distinct scales available; need at least 6 (series too short \
                 for the configured scale grid)",
                scales.len()
            )));
        }
        Ok(scales)
    }
}

fn log_spaced_integers(lo: usize, hi: usize, count: usize) -> Vec<usize> {
    if lo >= hi {
        return vec![lo];
    }
    let (llo, lhi) = ((lo as f64).ln(), (hi as f64).ln());
    let mut out: Vec<usize> = (0..count)
        .map(|i| {
            let t = i as f64 / (count - 1) as f64;
            (llo + t * (lhi - llo)).exp().round() as usize
        })
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Fluctuation function values F_q(s) on the (q, s) grid.
#[derive(Debug, Clone)]
pub struct FluctuationSurface {
    pub q_grid: Vec<f64>,
    pub scales: Vec<usize>,
    /// f[qi][si] = F_q(s); strictly positive.
    pub f: Vec<Vec<f64>>,
    /// Number of windows entering each scale.
    pub windows_per_scale: Vec<usize>,
}

/// Generalized Hurst exponents h(q) with their log-log fit quality.
#[derive(Debug, Clone)]
pub struct GeneralizedHurst {
    pub q_grid: Vec<f64>,
    pub h: Vec<f64>,
    pub fit_r2: Vec<f64>,
}

impl GeneralizedHurst {
    /// h at a given q (exact grid lookup).
    pub fn at(&self, q: f64) -> Option<f64> {
        self.q_grid
            .iter()
            .position(|&x| (x - q).abs() < 1e-12)
            .map(|i| self.h[i])
    }
}

/// Holder exponents alpha and the singularity spectrum f(alpha).
#[derive(Debug, Clone)]
pub struct SingularitySpectrum {
    pub alpha: Vec<f64>,
    pub f_alpha: Vec<f64>,
    /// alpha at q = 0 (the customary spectrum peak).
    pub alpha0: f64,
}

/// The three scalar fractal features plus the spectrum peak position.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FractalSummary {
    /// h(2), the Hurst exponent.
    pub hurst: f64,
    /// Spectrum width D = delta_alpha_left + delta_alpha_right.
    pub dimension: f64,
    /// (delta_alpha_left - delta_alpha_right) / D, in [-1, 1].
    pub asymmetry: f64,
    pub alpha0: f64,
    /// Set when D < 1e-12 and the asymmetry was reported as 0.
    pub degenerate: bool,
}

/// Full analysis output.
#[derive(Debug, Clone)]
pub struct MfdfaAnalysis {
    pub surface: FluctuationSurface,
    pub hurst: GeneralizedHurst,
    pub spectrum: SingularitySpectrum,
    pub summary: FractalSummary,
}

/// Profile of a series: Y(i) = sum_{k<=i} (x_k - mean(x)).
///
/// The last element is ~0 by construction (exactly 0 when the arithmetic
/// involved is exact, e.g. integer-valued series of power-of-two length).
pub fn profile(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::Fractal("cannot profile an empty series".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Fractal("series contains non-finite values".into()));
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let mut acc = 0.0;
    Ok(values
        .iter()
        .map(|&x| {
            acc += x - mean;
            acc
        })
        .collect())
}

/// Mean squared residual of a least-squares polynomial fit of order `m`
/// to `y` over equally spaced abscissae.
///
/// The abscissa is internally mapped to [-1, 1] which keeps the normal
/// equations well conditioned for m <= 3.
fn detrend_residual(y: &[f64], m: usize) -> f64 {
    let n = y.len();
    debug_assert!(n >= m + 2);
    let half = (n - 1) as f64 / 2.0;
    let scale = if n > 1 { half } else { 1.0 };
    // Moments of t^j and y * t^j for the normal equations.
    let dim = m + 1;
    let mut ata = vec![0.0f64; dim * dim];
    let mut atb = vec![0.0f64; dim];
    let mut tpow = vec![0.0f64; 2 * m + 1];
    for (i, &yi) in y.iter().enumerate() {
        let t = (i as f64 - half) / scale;
        let mut p = 1.0;
        for item in tpow.iter_mut() {
            *item = p;
            p *= t;
        }
        for r in 0..dim {
            for c in 0..dim {
                ata[r * dim + c] += tpow[r + c];
            }
            atb[r] += yi * tpow[r];
        }
    }
    let coef = solve_dense(&mut ata, &mut atb, dim);
    let mut ss = 0.0;
    for (i, &yi) in y.iter().enumerate() {
        let t = (i as f64 - half) / scale;
        let mut fit = 0.0;
        let mut p = 1.0;
        for &c in &coef {
            fit += c * p;
            p *= t;
        }
        let r = yi - fit;
        ss += r * r;
    }
    ss / n as f64
}

/// Gaussian elimination with partial pivoting; `a` is row-major dim x dim.
fn solve_dense(a: &mut [f64], b: &mut [f64], dim: usize) -> Vec<f64> {
    for col in 0..dim {
        let mut piv = col;
        for r in col + 1..dim {
            if a[r * dim + col].abs() > a[piv * dim + col].abs() {
                piv = r;
            }
        }
        if piv != col {
            for c in 0..dim {
                a.swap(col * dim + c, piv * dim + c);
            }
            b.swap(col, piv);
        }
        let d = a[col * dim + col];
        if d == 0.0 {
            continue; // singular: coefficient stays 0
        }
        for r in col + 1..dim {
            let f = a[r * dim + col] / d;
            if f == 0.0 {
                continue;
            }
            for c in col..dim {
                a[r * dim + c] -= f * a[col * dim + c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; dim];
    for col in (0..dim).rev() {
        let mut s = b[col];
        for c in col + 1..dim {
            s -= a[col * dim + c] * x[c];
        }
        let d = a[col * dim + col];
        x[col] = if d != 0.0 { s / d } else { 0.0 };
    }
    x
}

/// Squared fluctuations F^2(s, v): one value per window at scale `s`.
///
/// The profile is cut into floor(N/s) disjoint windows from the start and,
/// when `two_sided`, the same number anchored at the end, so no tail is
/// discarded. Each window is detrended by a least-squares polynomial of
/// order `m`; F^2 is the mean squared residual.
pub fn fluctuations(profile: &[f64], s: usize, m: usize, two_sided: bool) -> Result<Vec<f64>> {
    let n = profile.len();
    if s < m + 2 {
        return Err(Error::Fractal(format!(
            "scale {} too small for detrend order {} (need >= m + 2)",
            s, m
        )));
    }
    if s > n {
        return Err(Error::Fractal(format!(
            "scale {} exceeds series length {}",
            s, n
        )));
    }
    let count = n / s;
    let mut out = Vec::with_capacity(if two_sided { 2 * count } else { count });
    for v in 0..count {
        out.push(detrend_residual(&profile[v * s..(v + 1) * s], m));
    }
    if two_sided {
        let offset = n - count * s;
        for v in 0..count {
            out.push(detrend_residual(
                &profile[offset + v * s..offset + (v + 1) * s],
                m,
            ));
        }
    }
    Ok(out)
}

/// q-th order fluctuation from per-window squared fluctuations.
///
/// q != 0: F_q = ( mean_v (F^2_v)^(q/2) )^(1/q);
/// q == 0: the logarithmic average exp( mean_v ln F^2_v / 2 ), the
/// continuity completion of the q -> 0 limit.
pub fn fq(f2: &[f64], q: f64) -> Result<f64> {
    if f2.is_empty() {
        return Err(Error::Fractal("no fluctuation windows".into()));
    }
    if f2.iter().all(|&v| v <= 0.0) {
        return Err(Error::Fractal(
            "all windows have zero fluctuation (degenerate series)".into(),
        ));
    }
    let n = f2.len() as f64;
    if q == 0.0 {
        let s: f64 = f2.iter().map(|&v| v.ln()).sum();
        Ok((0.5 * s / n).exp())
    } else {
        let s: f64 = f2.iter().map(|&v| v.powf(q / 2.0)).sum();
        Ok((s / n).powf(1.0 / q))
    }
}

/// F_q(s) over the whole (q, s) grid. Window residuals are computed once
/// per scale and reused across all q.
pub fn fluctuation_surface(
    profile_values: &[f64],
    config: &MfdfaConfig,
) -> Result<FluctuationSurface> {
    config.validate()?;
    let scales = config.scales_for(profile_values.len())?;
    let mut per_scale_f2 = Vec::with_capacity(scales.len());
    for &s in &scales {
        let mut f2 = fluctuations(
            profile_values,
            s,
            config.detrend_order,
            config.two_sided,
        )?;
        if f2.iter().all(|&v| v <= config.zero_floor) {
            return Err(Error::Fractal(format!(
                "degenerate series: all windows at scale {} have zero fluctuation",
                s
            )));
        }
        // Exactly detrended windows would blow up negative-q moments.
        for v in f2.iter_mut() {
            if *v < config.zero_floor {
                *v = config.zero_floor;
            }
        }
        per_scale_f2.push(f2);
    }
    let mut f = vec![vec![0.0; scales.len()]; config.q_grid.len()];
    for (qi, &q) in config.q_grid.iter().enumerate() {
        for (si, f2) in per_scale_f2.iter().enumerate() {
            f[qi][si] = fq(f2, q)?;
        }
    }
    Ok(FluctuationSurface {
        q_grid: config.q_grid.clone(),
        scales,
        f,
        windows_per_scale: per_scale_f2.iter().map(Vec::len).collect(),
    })
}

/// Least-squares slope of log F_q(s) vs log s for each q.
pub fn hurst_spectrum(surface: &FluctuationSurface) -> Result<GeneralizedHurst> {
    if surface.scales.len() < 6 {
        return Err(Error::Fractal("need at least 6 scales for the fit".into()));
    }
    let log_s: Vec<f64> = surface.scales.iter().map(|&s| (s as f64).ln()).collect();
    let mut h = Vec::with_capacity(surface.q_grid.len());
    let mut r2 = Vec::with_capacity(surface.q_grid.len());
    for row in &surface.f {
        if row.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::Fractal(
                "non-positive fluctuation value; cannot fit log-log slope".into(),
            ));
        }
        let log_f: Vec<f64> = row.iter().map(|&v| v.ln()).collect();
        let (slope, _icept, rsq) = linear_fit(&log_s, &log_f);
        h.push(slope);
        r2.push(rsq);
    }
    Ok(GeneralizedHurst {
        q_grid: surface.q_grid.clone(),
        h,
        fit_r2: r2,
    })
}

/// Ordinary least squares y = a x + b; returns (a, b, r^2).
pub(crate) fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
        syy += (yi - my) * (yi - my);
    }
    let slope = sxy / sxx;
    let icept = my - slope * mx;
    let r2 = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    (slope, icept, r2)
}

/// Singularity spectrum from h(q): alpha = h + q h'(q), f = q (alpha - h) + 1.
///
/// h'(q) uses central differences on the uniform q grid with one-sided
/// differences at the ends; f at q = 0 is exactly 1 by the formula.
pub fn singularity_spectrum(hurst: &GeneralizedHurst) -> Result<SingularitySpectrum> {
    let q = &hurst.q_grid;
    let h = &hurst.h;
    let n = q.len();
    if n < 3 {
        return Err(Error::Fractal("q grid too small for spectrum".into()));
    }
    let step = q[1] - q[0];
    for w in q.windows(2) {
        if ((w[1] - w[0]) - step).abs() > 1e-9 {
            return Err(Error::Fractal(
                "singularity spectrum requires a uniform q grid".into(),
            ));
        }
    }
    let mut alpha = Vec::with_capacity(n);
    let mut f_alpha = Vec::with_capacity(n);
    let mut alpha0 = f64::NAN;
    for i in 0..n {
        let dh = if i == 0 {
            (h[1] - h[0]) / step
        } else if i == n - 1 {
            (h[n - 1] - h[n - 2]) / step
        } else {
            (h[i + 1] - h[i - 1]) / (2.0 * step)
        };
        let a = h[i] + q[i] * dh;
        let f = q[i] * (a - h[i]) + 1.0;
        if q[i] == 0.0 || q[i].abs() < 1e-12 {
            alpha0 = a;
        }
        alpha.push(a);
        f_alpha.push(f);
    }
    if !alpha0.is_finite() {
        return Err(Error::Fractal("q grid does not contain q = 0".into()));
    }
    Ok(SingularitySpectrum {
        alpha,
        f_alpha,
        alpha0,
    })
}

/// Scalar features from the spectrum: H = h(2), D = width, A = asymmetry.
///
/// D is computed as delta_alpha_left + delta_alpha_right so the identity
/// D = dL + dR holds exactly; dL = alpha0 - alpha_min, dR = alpha_max - alpha0.
pub fn summarize(
    spectrum: &SingularitySpectrum,
    hurst: &GeneralizedHurst,
) -> Result<FractalSummary> {
    let h2 = hurst
        .at(2.0)
        .ok_or_else(|| Error::Fractal("q grid does not contain q = 2".into()))?;
    let alpha_min = spectrum.alpha.iter().cloned().fold(f64::INFINITY, f64::min);
    let alpha_max = spectrum
        .alpha
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let d_left = spectrum.alpha0 - alpha_min;
    let d_right = alpha_max - spectrum.alpha0;
    let dimension = d_left + d_right;
    let (asymmetry, degenerate) = if dimension < 1e-12 {
        (0.0, true)
    } else {
        ((d_left - d_right) / dimension, false)
    };
    Ok(FractalSummary {
        hurst: h2,
        dimension,
        asymmetry,
        alpha0: spectrum.alpha0,
        degenerate,
    })
}

/// Full MFDFA of a series.
pub fn mfdfa(values: &[f64], config: &MfdfaConfig) -> Result<MfdfaAnalysis> {
    if values.len() < MIN_SERIES_LEN {
        return Err(Error::Fractal(format!(
            "series of length {} is below the minimum {} for fractal analysis",
            values.len(),
            MIN_SERIES_LEN
        )));
    }
    let prof = profile(values)?;
    let surface = fluctuation_surface(&prof, config)?;
    let hurst = hurst_spectrum(&surface)?;
    let spectrum = singularity_spectrum(&hurst)?;
    let summary = summarize(&spectrum, &hurst)?;
    Ok(MfdfaAnalysis {
        surface,
        hurst,
        spectrum,
        summary,
    })
}

/// DFA convenience path: the Hurst exponent h(2), via the same code path
/// as [`mfdfa`].
pub fn dfa(values: &[f64], config: &MfdfaConfig) -> Result<f64> {
    Ok(mfdfa(values, config)?.summary.hurst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
        assert!(
            (a - b).abs() <= tol,
            "{}: {} vs {} (tol {})",
            what,
            a,
            b,
            tol
        );
    }

    #[test]
    fn profile_small_example() {
        // [1,2,3]: mean 2, deviations [-1,0,1], cumsum [-1,-1,0]
        let p = profile(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(p, vec![-1.0, -1.0, 0.0]);
    }

    #[test]
    fn profile_constant_series_is_zero() {
        let p = profile(&[5.0; 100]).unwrap();
        assert!(p.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn profile_matches_independent_cumsum() {
        // Oracle: two-pass cumulative sum computed with a different
        // accumulation order (Kahan compensated).
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let x: Vec<f64> = (0..500).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let mut oracle = Vec::with_capacity(x.len());
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for &xi in &x {
            let term = xi - mean - comp;
            let t = sum + term;
            comp = (t - sum) - term;
            sum = t;
            oracle.push(sum);
        }
        let p = profile(&x).unwrap();
        for (a, b) in p.iter().zip(&oracle) {
            assert_close(*a, *b, 1e-9, "profile vs compensated cumsum");
        }
        let n = x.len() as f64;
        assert!(p.last().unwrap().abs() < 1e-9 * n * 3.0);
    }

    #[test]
    fn profile_rejects_bad_input() {
        assert!(profile(&[]).is_err());
        assert!(profile(&[1.0, f64::NAN, 2.0]).is_err());
        assert!(profile(&[1.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn fluctuations_perfect_line_is_zero() {
        let prof: Vec<f64> = (0..128).map(|i| 3.5 * i as f64 - 10.0).collect();
        let f2 = fluctuations(&prof, 16, 1, true).unwrap();
        assert_eq!(f2.len(), 16);
        for &v in &f2 {
            assert!(v.abs() <= 1e-16, "line residual should vanish, got {}", v);
        }
    }

    #[test]
    fn fluctuations_quadratic_with_m2_is_zero() {
        let prof: Vec<f64> = (0..256)
            .map(|i| {
                let t = i as f64;
                0.01 * t * t - 2.0 * t + 7.0
            })
            .collect();
        let scale_sq = prof.iter().fold(0.0f64, |m, &v| m.max(v * v));
        for &v in &fluctuations(&prof, 32, 2, true).unwrap() {
            assert!(v <= 1e-18 * scale_sq.max(1.0), "quadratic residual {}", v);
        }
    }

    #[test]
    fn fluctuations_match_qr_regression_oracle() {
        // Independent oracle: residuals from a classical Gram-Schmidt QR fit
        // of the Vandermonde matrix, a different algorithm from the normal
        // equations used by the implementation.
        fn qr_residual_ms(y: &[f64], m: usize) -> f64 {
            let n = y.len();
            let mut cols: Vec<Vec<f64>> = (0..=m)
                .map(|p| (0..n).map(|i| (i as f64).powi(p as i32)).collect())
                .collect();
            // orthonormalize
            let mut qcols: Vec<Vec<f64>> = Vec::new();
            for col in cols.iter_mut() {
                let mut v = col.clone();
                for qc in &qcols {
                    let dot: f64 = qc.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
                    for (vi, qi) in v.iter_mut().zip(qc) {
                        *vi -= dot * qi;
                    }
                }
                let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                if norm > 1e-12 {
                    for vi in v.iter_mut() {
                        *vi /= norm;
                    }
                    qcols.push(v);
                }
            }
            let mut resid: Vec<f64> = y.to_vec();
            for qc in &qcols {
                let dot: f64 = qc.iter().zip(resid.iter()).map(|(a, b)| a * b).sum();
                for (ri, qi) in resid.iter_mut().zip(qc) {
                    *ri -= dot * qi;
                }
            }
            resid.iter().map(|r| r * r).sum::<f64>() / n as f64
        }

        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for &m in &[1usize, 2, 3] {
            let y: Vec<f64> = (0..40).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let ours = detrend_residual(&y, m);
            let oracle = qr_residual_ms(&y, m);
            assert!(
                (ours - oracle).abs() <= 1e-10 * oracle.max(1.0),
                "m={}: {} vs oracle {}",
                m,
                ours,
                oracle
            );
        }
    }

    #[test]
    fn fluctuations_rejects_invalid_scale() {
        let prof = vec![0.0; 64];
        assert!(fluctuations(&prof, 2, 1, true).is_err());
        assert!(fluctuations(&prof, 100, 1, true).is_err());
    }

    #[test]
    fn fq_constant_windows() {
        let c = 1.7f64;
        let f2 = vec![c * c; 9];
        for &q in &[-5.0, -1.0, 0.0, 0.5, 2.0, 5.0] {
            assert_close(fq(&f2, q).unwrap(), c, 1e-12, "constant-window fq");
        }
    }

    #[test]
    fn fq_q2_is_rms_of_window_rms() {
        let f2 = vec![1.0, 4.0, 9.0, 16.0];
        // DFA definition: sqrt(mean F^2)
        let expect = (f2.iter().sum::<f64>() / 4.0).sqrt();
        assert_close(fq(&f2, 2.0).unwrap(), expect, 1e-12, "q=2 rms");
    }

    #[test]
    fn fq_zero_limit_is_bracketed() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let f2: Vec<f64> = (0..50).map(|_| rng.gen_range(0.1..10.0)).collect();
        let f0 = fq(&f2, 0.0).unwrap();
        let fp = fq(&f2, 0.01).unwrap();
        let fm = fq(&f2, -0.01).unwrap();
        assert!(fm <= f0 && f0 <= fp, "{} <= {} <= {}", fm, f0, fp);
        assert!((fp - f0).abs() / f0 < 0.005);
        assert!((f0 - fm).abs() / f0 < 0.005);
    }

    #[test]
    fn fq_rejects_all_zero() {
        assert!(fq(&[0.0, 0.0], 2.0).is_err());
        assert!(fq(&[], 2.0).is_err());
    }

    #[test]
    fn hurst_spectrum_exact_power_law() {
        let scales: Vec<usize> = vec![16, 23, 32, 45, 64, 91, 128];
        let q_grid = default_q_grid();
        let f: Vec<Vec<f64>> = q_grid
            .iter()
            .map(|_| scales.iter().map(|&s| (s as f64).powf(0.7)).collect())
            .collect();
        let surface = FluctuationSurface {
            q_grid,
            scales: scales.clone(),
            windows_per_scale: scales.iter().map(|_| 8).collect(),
            f,
        };
        let h = hurst_spectrum(&surface).unwrap();
        for (hi, r2) in h.h.iter().zip(&h.fit_r2) {
            assert_close(*hi, 0.7, 1e-12, "exact power-law slope");
            assert_close(*r2, 1.0, 1e-9, "exact power-law r2");
        }
    }

    #[test]
    fn spectrum_monofractal_collapses() {
        let q_grid = default_q_grid();
        let h = GeneralizedHurst {
            q_grid: q_grid.clone(),
            h: vec![0.62; q_grid.len()],
            fit_r2: vec![1.0; q_grid.len()],
        };
        let spec = singularity_spectrum(&h).unwrap();
        for (&a, &f) in spec.alpha.iter().zip(&spec.f_alpha) {
            assert_close(a, 0.62, 1e-12, "monofractal alpha");
            assert_close(f, 1.0, 1e-12, "monofractal f");
        }
        let summary = summarize(&spec, &h).unwrap();
        assert!(summary.degenerate);
        assert_eq!(summary.asymmetry, 0.0);
        assert_close(summary.hurst, 0.62, 1e-12, "H");
    }

    #[test]
    fn spectrum_f_at_q0_is_exactly_one() {
        let q_grid = default_q_grid();
        // arbitrary smooth decreasing h(q)
        let h_vals: Vec<f64> = q_grid.iter().map(|&q| 0.8 - 0.03 * q).collect();
        let h = GeneralizedHurst {
            q_grid: q_grid.clone(),
            h: h_vals,
            fit_r2: vec![1.0; q_grid.len()],
        };
        let spec = singularity_spectrum(&h).unwrap();
        let i0 = q_grid.iter().position(|&q| q == 0.0).unwrap();
        assert_eq!(spec.f_alpha[i0], 1.0, "f(alpha0) must be exactly 1");
    }

    #[test]
    fn spectrum_rejects_non_uniform_grid() {
        let h = GeneralizedHurst {
            q_grid: vec![-1.0, 0.0, 2.0],
            h: vec![0.5; 3],
            fit_r2: vec![1.0; 3],
        };
        assert!(singularity_spectrum(&h).is_err());
    }

    #[test]
    fn summarize_symmetric_spectrum_has_zero_asymmetry() {
        // h(q) linear in q gives a symmetric alpha range around alpha0.
        let q_grid = default_q_grid();
        let h_vals: Vec<f64> = q_grid.iter().map(|&q| 0.7 - 0.02 * q).collect();
        let h = GeneralizedHurst {
            q_grid: q_grid.clone(),
            h: h_vals,
            fit_r2: vec![1.0; q_grid.len()],
        };
        let spec = singularity_spectrum(&h).unwrap();
        let s = summarize(&spec, &h).unwrap();
        assert!(s.asymmetry.abs() < 1e-9, "asymmetry {}", s.asymmetry);
        // identity: D = dL + dR by construction
        let amin = spec.alpha.iter().cloned().fold(f64::INFINITY, f64::min);
        let amax = spec.alpha.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(s.dimension, (spec.alpha0 - amin) + (amax - spec.alpha0));
    }

    #[test]
    fn white_noise_hurst_near_half() {
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        let x: Vec<f64> = (0..1 << 16).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let res = mfdfa(&x, &MfdfaConfig::default()).unwrap();
        assert!(
            (res.summary.hurst - 0.5).abs() < 0.05,
            "white noise H = {}",
            res.summary.hurst
        );
    }

    #[test]
    fn mfdfa_rejects_short_and_constant_series() {
        let cfg = MfdfaConfig::default();
        assert!(mfdfa(&[1.0; 32], &cfg).is_err());
        let err = mfdfa(&[2.5; 4096], &cfg).unwrap_err();
        let msg = format!("{}", err);
        assert!(msg.contains("degenerate"), "unexpected error: {}", msg);
    }

    #[test]
    fn dfa_equals_mfdfa_h2() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let x: Vec<f64> = (0..4096).map(|_| rng.gen_range(0.0..10.0)).collect();
        let cfg = MfdfaConfig::default();
        let full = mfdfa(&x, &cfg).unwrap();
        let quick = dfa(&x, &cfg).unwrap();
        assert_eq!(full.summary.hurst, quick);
    }

    #[test]
    fn config_validation() {
        let mut cfg = MfdfaConfig::default();
        cfg.q_grid = vec![1.0, 2.0, 3.0]; // no zero
        assert!(cfg.validate().is_err());
        let mut cfg = MfdfaConfig::default();
        cfg.q_grid = vec![-1.0, 0.0, 0.5, 2.0]; // non-uniform
        assert!(cfg.validate().is_err());
        let mut cfg = MfdfaConfig::default();
        cfg.scales = ScaleGrid::LogSpaced {
            count: 20,
            min_scale: 2,
            max_scale_divisor: 4,
        };
        assert!(cfg.validate().is_err()); // min scale below m + 2 is caught at runtime

        // too-short series yields a "too few scales" error under defaults
        let cfg = MfdfaConfig::default();
        assert!(cfg.scales_for(64).is_err());
        assert!(cfg.scales_for(1024).is_ok());
    }
}
