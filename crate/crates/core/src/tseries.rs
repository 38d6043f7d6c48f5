//! Univariate series analysis: multifractal DFA Hurst estimation and
//! cumulant-style multi-lag autocorrelations.

use crate::{Error, Result};

// Least-squares line through (0..m, y); returns (slope, intercept).
fn linear_fit(y: &[f64]) -> (f64, f64) {
    let m = y.len() as f64;
    let x_mean = (m - 1.0) / 2.0;
    let y_mean = y.iter().sum::<f64>() / m;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (i, &v) in y.iter().enumerate() {
        let dx = i as f64 - x_mean;
        sxy += dx * (v - y_mean);
        sxx += dx * dx;
    }
    let slope = sxy / sxx;
    (slope, y_mean - slope * x_mean)
}

/// Hurst exponent by multifractal detrended fluctuation analysis.
///
/// For each segment count `i = 1..=max_segments` the series splits into `i`
/// sub-series of length `ceil(t/i)` (the trailing ones shift left to fit,
/// so the last two may overlap). Each sub-series is linearly detrended,
/// `Delta = mean((residual^2)^q)` is averaged over sub-series, and `H(q)`
/// is the slope of `log Delta` against `2 q log tau` over `i >= 2` (a
/// single segment carries no scaling information).
pub fn dfa_hurst(y: &[f64], q: f64, max_segments: usize) -> Result<f64> {
    let t = y.len();
    if q == 0.0 {
        return Err(Error::InvalidParameter(
            "q = 0 needs the log-average variant, which is not provided".into(),
        ));
    }
    if max_segments < 2 {
        return Err(Error::InvalidParameter(
            "need at least two segment counts for the regression".into(),
        ));
    }
    if t < 4 * max_segments {
        return Err(Error::DimensionMismatch(format!(
            "series of length {t} too short for {max_segments} segments"
        )));
    }
    let mut log_tau = Vec::with_capacity(max_segments - 1);
    let mut log_delta = Vec::with_capacity(max_segments - 1);
    for i in 2..=max_segments {
        let tau = t.div_ceil(i);
        let mut acc = 0.0;
        for k in 0..i {
            let start = (k * tau).min(t - tau);
            let window = &y[start..start + tau];
            let (slope, intercept) = linear_fit(window);
            let mut delta_k = 0.0;
            for (j, &v) in window.iter().enumerate() {
                let res = v - (intercept + slope * j as f64);
                delta_k += (res * res).powf(q);
            }
            acc += delta_k / tau as f64;
        }
        let delta = acc / i as f64;
        if delta <= 0.0 || !delta.is_finite() {
            return Err(Error::Degenerate(format!(
                "vanishing detrended fluctuation at {i} segments (pure trend?)"
            )));
        }
        log_tau.push((tau as f64).ln());
        log_delta.push(delta.ln());
    }
    // OLS slope of log Delta on log tau
    let m = log_tau.len() as f64;
    let xm = log_tau.iter().sum::<f64>() / m;
    let ym = log_delta.iter().sum::<f64>() / m;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in log_tau.iter().zip(&log_delta) {
        sxy += (x - xm) * (y - ym);
        sxx += (x - xm) * (x - xm);
    }
    if sxx < 1e-12 {
        return Err(Error::Degenerate(
            "segment lengths do not spread, regression impossible".into(),
        ));
    }
    Ok(sxy / sxx / (2.0 * q))
}

fn centered_copy(z: &[f64]) -> Vec<f64> {
    let mean = z.iter().sum::<f64>() / z.len() as f64;
    z.iter().map(|v| v - mean).collect()
}

fn check_lag(t: usize, lag: usize) -> Result<()> {
    if lag >= t {
        return Err(Error::InvalidParameter(format!(
            "lag {lag} not below the series length {t}"
        )));
    }
    Ok(())
}

/// Lagged second-order autocorrelation function
/// `(1/(t-tau)) sum z~_i z~_{i+tau}` of the centered series.
pub fn acf(z: &[f64], tau: usize) -> Result<f64> {
    check_lag(z.len(), tau)?;
    let zt = centered_copy(z);
    let m = zt.len() - tau;
    let s: f64 = (0..m).map(|i| zt[i] * zt[i + tau]).sum();
    Ok(s / m as f64)
}

/// Third-order two-lag autocorrelation
/// `(1/(t-max)) sum z~_i z~_{i+tau1} z~_{i+tau2}`.
pub fn acf3(z: &[f64], tau1: usize, tau2: usize) -> Result<f64> {
    let tau = tau1.max(tau2);
    check_lag(z.len(), tau)?;
    let zt = centered_copy(z);
    let m = zt.len() - tau;
    let s: f64 = (0..m).map(|i| zt[i] * zt[i + tau1] * zt[i + tau2]).sum();
    Ok(s / m as f64)
}

/// Fourth-order three-lag autocorrelation: the raw lagged-product average
/// minus the three products of second-order autocorrelations.
pub fn acf4(z: &[f64], tau1: usize, tau2: usize, tau3: usize) -> Result<f64> {
    let tau = tau1.max(tau2).max(tau3);
    check_lag(z.len(), tau)?;
    let zt = centered_copy(z);
    let m = zt.len() - tau;
    let raw: f64 = (0..m)
        .map(|i| zt[i] * zt[i + tau1] * zt[i + tau2] * zt[i + tau3])
        .sum::<f64>()
        / m as f64;
    Ok(raw
        - acf(z, tau1)? * acf(z, tau3.abs_diff(tau2))?
        - acf(z, tau2)? * acf(z, tau3.abs_diff(tau1))?
        - acf(z, tau3)? * acf(z, tau2.abs_diff(tau1))?)
}

fn overlap_stats(w: &[f64]) -> Result<(Vec<f64>, f64)> {
    let centered = centered_copy(w);
    let sigma2 = centered.iter().map(|v| v * v).sum::<f64>() / centered.len() as f64;
    if sigma2 <= 0.0 {
        return Err(Error::Degenerate("zero-variance input series".into()));
    }
    Ok((centered, sigma2.sqrt()))
}

/// Normalized cross-correlation of two series at one lag; means and
/// standard deviations are taken over the aligned overlap windows.
pub fn cross_acc(z: &[f64], w: &[f64], tau: usize) -> Result<f64> {
    if z.len() != w.len() {
        return Err(Error::DimensionMismatch(
            "cross-correlation needs equal lengths".into(),
        ));
    }
    check_lag(z.len(), tau)?;
    let m = z.len() - tau;
    let (zc, sz) = overlap_stats(&z[..m])?;
    let (wc, sw) = overlap_stats(&w[tau..])?;
    let s: f64 = zc.iter().zip(&wc).map(|(a, b)| a * b).sum();
    Ok(s / (sz * sw * m as f64))
}

/// Normalized third-order cross-correlation of three series at two lags.
pub fn cross_acc3(z: &[f64], w: &[f64], v: &[f64], tau1: usize, tau2: usize) -> Result<f64> {
    if z.len() != w.len() || z.len() != v.len() {
        return Err(Error::DimensionMismatch(
            "cross-correlation needs equal lengths".into(),
        ));
    }
    let tau = tau1.max(tau2);
    check_lag(z.len(), tau)?;
    let m = z.len() - tau;
    let (zc, sz) = overlap_stats(&z[..m])?;
    let (wc, sw) = overlap_stats(&w[tau1..tau1 + m])?;
    let (vc, sv) = overlap_stats(&v[tau2..tau2 + m])?;
    let s: f64 = (0..m).map(|i| zc[i] * wc[i] * vc[i]).sum();
    Ok(s / (sz * sw * sv * m as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randsource::RngStream;

    fn white_noise_walk(t: usize, seed: u64) -> Vec<f64> {
        let mut rng = RngStream::new(seed, 0);
        let mut acc = 0.0;
        (0..t)
            .map(|_| {
                acc += rng.standard_normal();
                acc
            })
            .collect()
    }

    #[test]
    fn dfa_white_noise_half() {
        let mut hs: Vec<f64> = (0..20)
            .map(|s| dfa_hurst(&white_noise_walk(1 << 14, 100 + s), 1.0, 16).unwrap())
            .collect();
        hs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = hs[10];
        assert!((0.45..=0.55).contains(&median), "median H = {median}");
    }

    #[test]
    fn dfa_pure_trend_degenerates() {
        let ramp: Vec<f64> = (0..4096).map(|i| i as f64).collect();
        assert!(matches!(
            dfa_hurst(&ramp, 1.0, 16),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn dfa_affine_invariance() {
        let y = white_noise_walk(1 << 13, 7);
        let h = dfa_hurst(&y, 1.0, 12).unwrap();
        let scaled: Vec<f64> = y.iter().map(|v| 3.5 * v - 11.0).collect();
        let hs = dfa_hurst(&scaled, 1.0, 12).unwrap();
        assert!((h - hs).abs() < 1e-10, "{h} vs {hs}");
    }

    #[test]
    fn dfa_strongly_correlated_increments() {
        // spectral synthesis of 1/f^0.9 noise: increments with H ~ 0.95
        let t = 1 << 13;
        let beta: f64 = 0.9;
        let mut rng = RngStream::new(21, 0);
        let mut z = vec![0.0f64; t];
        for k in 1..=t / 8 {
            let amp = (k as f64).powf(-beta / 2.0);
            let phase = rng.uniform_open() * std::f64::consts::TAU;
            let w = std::f64::consts::TAU * k as f64 / t as f64;
            for (i, zi) in z.iter_mut().enumerate() {
                *zi += amp * (w * i as f64 + phase).cos();
            }
        }
        let mut acc = 0.0;
        let y: Vec<f64> = z
            .iter()
            .map(|&v| {
                acc += v;
                acc
            })
            .collect();
        let h = dfa_hurst(&y, 1.0, 12).unwrap();
        assert!(h > 0.8, "H = {h}");
    }

    #[test]
    fn acf_basics() {
        let zeros = vec![0.0; 100];
        assert_eq!(acf(&zeros, 1).unwrap(), 0.0);
        assert_eq!(acf3(&zeros, 1, 2).unwrap(), 0.0);
        assert_eq!(acf4(&zeros, 1, 2, 3).unwrap(), 0.0);

        // lag zero is the sample variance
        let mut rng = RngStream::new(30, 0);
        let z: Vec<f64> = (0..10_000).map(|_| rng.standard_normal() + 5.0).collect();
        let zt = centered_copy(&z);
        let var = zt.iter().map(|v| v * v).sum::<f64>() / z.len() as f64;
        assert!((acf(&z, 0).unwrap() - var).abs() < 1e-12);
    }

    #[test]
    fn acf_white_noise_bounds() {
        let mut rng = RngStream::new(31, 0);
        let z: Vec<f64> = (0..1_000_000).map(|_| rng.standard_normal()).collect();
        assert!(acf(&z, 1).unwrap().abs() < 0.005);
        assert!(acf3(&z, 1, 2).unwrap().abs() < 0.01);
        assert!(acf4(&z, 1, 2, 3).unwrap().abs() < 0.01);
    }

    #[test]
    fn acf_negation_parity() {
        let mut rng = RngStream::new(32, 0);
        let z: Vec<f64> = (0..5_000).map(|_| rng.exponential1()).collect();
        let neg: Vec<f64> = z.iter().map(|v| -v).collect();
        assert!((acf(&z, 3).unwrap() - acf(&neg, 3).unwrap()).abs() < 1e-12);
        assert!((acf3(&z, 1, 3).unwrap() + acf3(&neg, 1, 3).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn cross_correlation_examples() {
        let mut rng = RngStream::new(33, 0);
        let z: Vec<f64> = (0..50_000).map(|_| rng.standard_normal()).collect();
        assert!((cross_acc(&z, &z, 0).unwrap() - 1.0).abs() < 1e-12);

        // circular shift aligns exactly on the overlap
        let tau = 7;
        let t = z.len();
        let shifted: Vec<f64> = (0..t).map(|j| z[(j + t - tau) % t]).collect();
        assert!((cross_acc(&z, &shifted, tau).unwrap() - 1.0).abs() < 1e-12);

        // independent series stay near zero
        let w: Vec<f64> = (0..50_000).map(|_| rng.standard_normal()).collect();
        assert!(cross_acc(&z, &w, 2).unwrap().abs() < 0.02);
        let v: Vec<f64> = (0..50_000).map(|_| rng.standard_normal()).collect();
        assert!(cross_acc3(&z, &w, &v, 1, 2).unwrap().abs() < 0.02);

        let zeroes = vec![0.0; 100];
        assert!(cross_acc(&z[..100], &zeroes, 1).is_err());
    }
}
