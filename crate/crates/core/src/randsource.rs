//! Seeded random sampling for every univariate law the copula and process
//! samplers need.
//!
//! All randomness flows through [`RngStream`], a counter-based generator
//! keyed by `(seed, stream id)`: identical keys give identical sequences,
//! distinct stream ids from one seed give independent streams (a documented
//! property of the ChaCha family).

use nalgebra::DMatrix;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{ChiSquared, Distribution, Exp1, Gamma, Poisson, StandardNormal};

use crate::special::gauss_legendre;
use crate::{Error, Result, SampleMatrix};

/// Reproducible random stream: ChaCha12 keyed by `(seed, stream id)`.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha12Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream
    }

    /// Uniform draw from the open interval (0, 1).
    pub fn uniform_open(&mut self) -> f64 {
        loop {
            let u: f64 = self.rng.random();
            if u > 0.0 && u < 1.0 {
                return u;
            }
        }
    }

    /// Standard normal draw.
    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// Unit-mean exponential draw.
    pub fn exponential1(&mut self) -> f64 {
        Exp1.sample(&mut self.rng)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
}

/// Univariate laws available through [`sample`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Dist {
    /// Uniform on (0, 1).
    Uniform01,
    /// Normal with mean `mu` and variance `sigma2`.
    Normal { mu: f64, sigma2: f64 },
    /// Exponential with unit mean.
    Exponential1,
    /// Gamma with given shape and unit scale.
    Gamma { shape: f64 },
    /// Chi-square with `nu` degrees of freedom.
    ChiSquare { nu: f64 },
    /// Negative binomial: failures-before-`r`-successes count plus nothing,
    /// success probability `p`; `r` may be real (gamma-Poisson mixture).
    NegativeBinomial { r: f64, p: f64 },
    /// Logarithmic series on {1, 2, ...} with parameter `p`.
    Logarithmic { p: f64 },
    /// Geometric on {1, 2, ...} with success probability `p`.
    Geometric { p: f64 },
}

/// One draw from the named law.
pub fn sample(dist: Dist, rng: &mut RngStream) -> Result<f64> {
    match dist {
        Dist::Uniform01 => Ok(rng.uniform_open()),
        Dist::Normal { mu, sigma2 } => {
            if sigma2 <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "normal variance must be positive, got {sigma2}"
                )));
            }
            Ok(mu + sigma2.sqrt() * rng.standard_normal())
        }
        Dist::Exponential1 => Ok(rng.exponential1()),
        Dist::Gamma { shape } => {
            if shape <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "gamma shape must be positive, got {shape}"
                )));
            }
            let g = Gamma::new(shape, 1.0)
                .map_err(|e| Error::InvalidParameter(e.to_string()))?;
            Ok(g.sample(rng))
        }
        Dist::ChiSquare { nu } => {
            if nu < 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "chi-square needs nu >= 1, got {nu}"
                )));
            }
            let c = ChiSquared::new(nu)
                .map_err(|e| Error::InvalidParameter(e.to_string()))?;
            Ok(c.sample(rng))
        }
        Dist::NegativeBinomial { r, p } => {
            if r <= 0.0 || !(0.0..1.0).contains(&p) || p == 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "negative binomial needs r > 0 and p in (0,1), got r={r}, p={p}"
                )));
            }
            // gamma-Poisson mixture, mean r(1-p)/p
            let lambda = Gamma::new(r, (1.0 - p) / p)
                .map_err(|e| Error::InvalidParameter(e.to_string()))?
                .sample(rng);
            if lambda == 0.0 {
                return Ok(0.0);
            }
            let pois = Poisson::new(lambda)
                .map_err(|e| Error::InvalidParameter(e.to_string()))?;
            Ok(pois.sample(rng))
        }
        Dist::Logarithmic { p } => {
            if !(0.0..1.0).contains(&p) || p == 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "logarithmic parameter must lie in (0,1), got {p}"
                )));
            }
            Ok(sample_logarithmic(p, rng) as f64)
        }
        Dist::Geometric { p } => {
            if !(0.0..=1.0).contains(&p) || p == 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "geometric parameter must lie in (0,1], got {p}"
                )));
            }
            Ok(sample_geometric1(p, rng) as f64)
        }
    }
}

/// Logarithmic-series variate on {1, 2, ...}, pmf `-p^k / (k ln(1-p))`.
/// Kemp's second accelerated generator.
pub fn sample_logarithmic(p: f64, rng: &mut RngStream) -> u64 {
    let h = (1.0 - p).ln();
    let v = rng.uniform_open();
    if v >= p {
        return 1;
    }
    let u = rng.uniform_open();
    let q = 1.0 - (h * u).exp();
    if v <= q * q {
        let k = 1.0 + v.ln() / q.ln();
        // guard against q ~ 1 blowing the ratio past u64 range
        if k >= u64::MAX as f64 {
            return u64::MAX;
        }
        k as u64
    } else if v <= q {
        2
    } else {
        1
    }
}

/// Geometric variate on {1, 2, ...}, pmf `p (1-p)^{k-1}`, via inversion.
pub fn sample_geometric1(p: f64, rng: &mut RngStream) -> u64 {
    if p >= 1.0 {
        return 1;
    }
    let u = rng.uniform_open();
    let k = (u.ln() / (1.0 - p).ln()).ceil();
    (k as u64).max(1)
}

/// One draw from the standard stable law (`gamma = 1`, `delta = 0`) with
/// stability `alpha` in (0, 2] and skew `beta` in [-1, 1], via the
/// uniform-angle/exponential construction.
pub fn sample_levy(alpha: f64, beta: f64, rng: &mut RngStream) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::InvalidParameter(format!(
            "stable alpha must lie in (0,2], got {alpha}"
        )));
    }
    if !(-1.0..=1.0).contains(&beta) {
        return Err(Error::InvalidParameter(format!(
            "stable beta must lie in [-1,1], got {beta}"
        )));
    }
    let half_pi = std::f64::consts::FRAC_PI_2;
    let theta = (rng.uniform_open() - 0.5) * std::f64::consts::PI;
    let w = rng.exponential1();
    if (alpha - 1.0).abs() < 1e-12 {
        let a = half_pi + beta * theta;
        Ok((2.0 / std::f64::consts::PI)
            * (a * theta.tan() - beta * ((half_pi * w * theta.cos()) / a).ln()))
    } else {
        let theta0 = (beta * (half_pi * alpha).tan()).atan() / alpha;
        let s = (alpha * (theta0 + theta)).sin()
            / ((alpha * theta0).cos() * theta.cos()).powf(1.0 / alpha);
        let c = ((alpha * theta0 + (alpha - 1.0) * theta).cos() / w)
            .powf((1.0 - alpha) / alpha);
        Ok(s * c)
    }
}

/// One draw from the q-Gauss law for `q < 3` via the generalized Box-Muller
/// transform. The `q' = 1` limit of the q'-logarithm is the natural log.
pub fn sample_qgauss(q: f64, rng: &mut RngStream) -> Result<f64> {
    if q >= 3.0 {
        return Err(Error::InvalidParameter(format!(
            "q-Gauss needs q < 3, got {q}"
        )));
    }
    let u1 = rng.uniform_open();
    let u2 = rng.uniform_open();
    let qp = (q + 1.0) / (3.0 - q);
    let lq = if (qp - 1.0).abs() < 1e-12 {
        u1.ln()
    } else {
        (u1.powf(1.0 - qp) - 1.0) / (1.0 - qp)
    };
    let beta = 3.0 - q;
    Ok((-2.0 * lq).sqrt() * (2.0 * std::f64::consts::PI * u2).cos() / beta.sqrt())
}

/// `t` i.i.d. rows from `N(0, R)`. Uses the Cholesky factor of `R`, falling
/// back to an eigenvalue factorization with a 1e-12 floor when `R` is close
/// to singular.
pub fn mvnormal_sample(t: usize, r: &DMatrix<f64>, rng: &mut RngStream) -> Result<SampleMatrix> {
    let n = r.nrows();
    if r.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "covariance must be square, got {}x{}",
            r.nrows(),
            r.ncols()
        )));
    }
    let l = match nalgebra::Cholesky::new(r.clone()) {
        Some(chol) => chol.l(),
        None => {
            let eig = nalgebra::SymmetricEigen::new(r.clone());
            if eig.eigenvalues.iter().any(|&ev| ev < -1e-8) {
                return Err(Error::InvalidParameter(
                    "covariance matrix is not positive semi-definite".into(),
                ));
            }
            DMatrix::from_fn(n, n, |i, j| {
                eig.eigenvectors[(i, j)] * eig.eigenvalues[j].max(1e-12).sqrt()
            })
        }
    };
    let g = DMatrix::from_fn(t, n, |_, _| rng.standard_normal());
    Ok(g * l.transpose())
}

/// One draw from the positive stable law with Laplace transform
/// `E exp(-s V) = exp(-s^alpha)`, `alpha` in (0, 1]. For `alpha = 1` the law
/// is the point mass at 1.
pub fn sample_positive_stable(alpha: f64, rng: &mut RngStream) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "positive stable alpha must lie in (0,1], got {alpha}"
        )));
    }
    if (alpha - 1.0).abs() < 1e-12 {
        return Ok(1.0);
    }
    let scale = (std::f64::consts::FRAC_PI_2 * alpha).cos().powf(1.0 / alpha);
    Ok(scale * sample_levy(alpha, 1.0, rng)?)
}

/// CDF and quantile of the positive stable law with Laplace transform
/// `exp(-s^alpha)`, evaluated through Kanter's integral representation.
/// Construction precomputes the angular integrand on a fixed quadrature
/// grid so that repeated quantile calls stay cheap.
#[derive(Clone, Debug)]
pub struct PositiveStable {
    alpha: f64,
    ln_a_nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl PositiveStable {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "positive stable CDF needs alpha in (0,1), got {alpha}"
            )));
        }
        let (nodes, weights) = gauss_legendre(64);
        let pi = std::f64::consts::PI;
        // Kanter: ln a(u) with u in (0, pi)
        let ln_a_nodes = nodes
            .iter()
            .map(|&x| {
                let u = 0.5 * pi * (x + 1.0);
                ((1.0 - alpha) * u).sin().ln() + alpha / (1.0 - alpha) * (alpha * u).sin().ln()
                    - 1.0 / (1.0 - alpha) * u.sin().ln()
            })
            .collect();
        Ok(Self {
            alpha,
            ln_a_nodes,
            weights,
        })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let c = self.alpha / (1.0 - self.alpha);
        let shift = -c * x.ln();
        let mut acc = 0.0;
        for (&ln_a, &w) in self.ln_a_nodes.iter().zip(&self.weights) {
            let s = ln_a + shift;
            let f = if s > 700.0 {
                0.0
            } else if s < -700.0 {
                1.0
            } else {
                (-s.exp()).exp()
            };
            acc += w * f;
        }
        // nodes map (0, pi) with weight sum 2 -> divide by 2 for the mean
        (acc / 2.0).clamp(0.0, 1.0)
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0 < p && p < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "quantile argument {p} outside (0,1)"
            )));
        }
        // bisection in log space; the wide bracket covers the heavy tail
        // of small-alpha laws (quantiles grow like (1-p)^(-1/alpha))
        let mut lo = -200.0f64;
        let mut hi = 300.0f64;
        for _ in 0..120 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid.exp()) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok((0.5 * (lo + hi)).exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn stream(s: u64) -> RngStream {
        RngStream::new(0xFEED_5EED, s)
    }

    #[test]
    fn determinism_per_seed_and_stream() {
        let mut a = RngStream::new(42, 3);
        let mut b = RngStream::new(42, 3);
        let xs: Vec<f64> = (0..64).map(|_| a.uniform_open()).collect();
        let ys: Vec<f64> = (0..64).map(|_| b.uniform_open()).collect();
        assert_eq!(xs, ys);
        let mut c = RngStream::new(42, 4);
        let zs: Vec<f64> = (0..64).map(|_| c.uniform_open()).collect();
        assert_ne!(xs, zs);
    }

    #[test]
    fn unit_mean_exponential_and_gamma_reduction() {
        let mut rng = stream(0);
        let m = 1_000_000;
        let mean: f64 = (0..m)
            .map(|_| sample(Dist::Exponential1, &mut rng).unwrap())
            .sum::<f64>()
            / m as f64;
        assert!((mean - 1.0).abs() < 0.01, "exp(1) mean was {mean}");
        // gamma(1, 1) is exponential(1)
        let mean_g: f64 = (0..m)
            .map(|_| sample(Dist::Gamma { shape: 1.0 }, &mut rng).unwrap())
            .sum::<f64>()
            / m as f64;
        assert!((mean_g - 1.0).abs() < 0.01, "gamma(1,1) mean was {mean_g}");
    }

    #[test]
    fn chi_square_mean() {
        let mut rng = stream(1);
        let m = 1_000_000;
        let mean: f64 = (0..m)
            .map(|_| sample(Dist::ChiSquare { nu: 4.0 }, &mut rng).unwrap())
            .sum::<f64>()
            / m as f64;
        assert!((mean - 4.0).abs() < 0.05, "chi2(4) mean was {mean}");
    }

    #[test]
    fn uniform_ks_statistic() {
        let mut rng = stream(2);
        let t = 100_000;
        let mut u: Vec<f64> = (0..t).map(|_| rng.uniform_open()).collect();
        u.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let ks = u
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let lo = (x - i as f64 / t as f64).abs();
                let hi = (x - (i + 1) as f64 / t as f64).abs();
                lo.max(hi)
            })
            .fold(0.0f64, f64::max);
        assert!(ks < 0.006, "KS statistic {ks}");
    }

    #[test]
    fn logarithmic_pmf_matches() {
        let mut rng = stream(3);
        for &p in &[0.3, 0.9, 0.99] {
            let t = 400_000;
            let mut counts = [0u64; 12];
            for _ in 0..t {
                let k = sample_logarithmic(p, &mut rng) as usize;
                if k < counts.len() {
                    counts[k] += 1;
                }
            }
            let norm = -(1.0 - p).ln();
            for (k, &count) in counts.iter().enumerate().take(7).skip(1) {
                let expect = p.powi(k as i32) / (k as f64 * norm);
                let got = count as f64 / t as f64;
                assert!(
                    (got - expect).abs() < 8.0 * (expect / t as f64).sqrt() + 5e-4,
                    "p={p} k={k}: got {got} want {expect}"
                );
            }
        }
    }

    #[test]
    fn geometric_mean() {
        let mut rng = stream(4);
        let p = 0.35;
        let t = 300_000;
        let mean: f64 = (0..t)
            .map(|_| sample_geometric1(p, &mut rng) as f64)
            .sum::<f64>()
            / t as f64;
        assert!((mean - 1.0 / p).abs() < 0.03, "geometric mean {mean}");
    }

    #[test]
    fn negative_binomial_mean() {
        let mut rng = stream(5);
        let (r, p) = (3.5, 0.4);
        let t = 300_000;
        let mean: f64 = (0..t)
            .map(|_| sample(Dist::NegativeBinomial { r, p }, &mut rng).unwrap())
            .sum::<f64>()
            / t as f64;
        let expect = r * (1.0 - p) / p;
        assert!((mean - expect).abs() < 0.05, "negbin mean {mean} want {expect}");
    }

    #[test]
    fn levy_alpha2_is_gaussian_with_variance_two() {
        let mut rng = stream(6);
        let t = 1_000_000;
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for _ in 0..t {
            let x = sample_levy(2.0, 0.0, &mut rng).unwrap();
            sum += x;
            sum2 += x * x;
        }
        let mean = sum / t as f64;
        let var = sum2 / t as f64 - mean * mean;
        assert!((var - 2.0).abs() < 0.05, "variance {var}");
    }

    #[test]
    fn levy_alpha1_median_zero() {
        let mut rng = stream(7);
        let t = 1_000_000;
        let mut xs: Vec<f64> = (0..t).map(|_| sample_levy(1.0, 0.0, &mut rng).unwrap()).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = xs[t / 2];
        assert!(median.abs() < 0.01, "median {median}");
    }

    #[test]
    fn levy_one_sided_when_beta_one() {
        let mut rng = stream(8);
        let min = (0..100_000)
            .map(|_| sample_levy(0.5, 1.0, &mut rng).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!(min > 0.0, "one-sided stable produced {min}");
    }

    #[test]
    fn levy_alpha2_beta_free() {
        // at alpha = 2 the skew parameter must not matter
        let t = 100_000;
        let collect = |beta: f64, s: u64| {
            let mut rng = stream(100 + s);
            let mut xs: Vec<f64> = (0..t).map(|_| sample_levy(2.0, beta, &mut rng).unwrap()).collect();
            xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            xs
        };
        let base = collect(0.0, 0);
        for (i, &beta) in [-1.0, 1.0].iter().enumerate() {
            let other = collect(beta, i as u64 + 1);
            // two-sample KS
            let mut ks = 0.0f64;
            let (mut i1, mut i2) = (0usize, 0usize);
            while i1 < t && i2 < t {
                if base[i1] <= other[i2] {
                    i1 += 1;
                } else {
                    i2 += 1;
                }
                ks = ks.max(((i1 as f64 - i2 as f64) / t as f64).abs());
            }
            // critical value at alpha ~ 0.01 for two samples of size t
            let crit = 1.63 * (2.0 / t as f64).sqrt();
            assert!(ks < crit, "beta={beta}: two-sample KS {ks} over {crit}");
        }
    }

    #[test]
    fn qgauss_q1_std() {
        let mut rng = stream(9);
        let t = 1_000_000;
        let mut sum2 = 0.0;
        for _ in 0..t {
            let x = sample_qgauss(1.0, &mut rng).unwrap();
            sum2 += x * x;
        }
        let std = (sum2 / t as f64).sqrt();
        let expect = (0.5f64).sqrt();
        assert!((std - expect).abs() < 0.01 * expect, "std {std}");
    }

    #[test]
    fn qgauss_q0_bounded() {
        let mut rng = stream(10);
        // with the beta = 1 convention the support is |x| <= 1/sqrt(1-q) = 1
        let max = (0..200_000)
            .map(|_| sample_qgauss(0.0, &mut rng).unwrap().abs())
            .fold(0.0f64, f64::max);
        assert!(max <= 1.0 + 1e-12, "q=0 sample escaped support: {max}");
    }

    #[test]
    fn qgauss_q2_heavy_tails() {
        // sample kurtosis of the Cauchy-like q = 2 case grows with t
        let kurt = |t: usize, s: u64| {
            let mut rng = stream(200 + s);
            let xs: Vec<f64> = (0..t).map(|_| sample_qgauss(2.0, &mut rng).unwrap()).collect();
            let m: f64 = xs.iter().sum::<f64>() / t as f64;
            let m2: f64 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / t as f64;
            let m4: f64 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / t as f64;
            m4 / (m2 * m2)
        };
        let k3 = kurt(1_000, 0);
        let k4 = kurt(10_000, 1);
        let k5 = kurt(100_000, 2);
        assert!(k3 < k4 && k4 < k5, "kurtosis not growing: {k3} {k4} {k5}");
    }

    #[test]
    fn mvnormal_empirical_covariance() {
        let mut rng = stream(11);
        let t = 100_000;
        // identity
        let x = mvnormal_sample(t, &DMatrix::identity(3, 3), &mut rng).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let cov = x.column(i).dot(&x.column(j)) / t as f64;
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((cov - expect).abs() < 0.02, "cov({i},{j}) = {cov}");
            }
        }
        // toeplitz 0.5: entry (0,2) -> 0.25
        let r = DMatrix::from_fn(3, 3, |i, j| 0.5f64.powi((i as i32 - j as i32).abs()));
        let x = mvnormal_sample(t, &r, &mut rng).unwrap();
        let c02 = x.column(0).dot(&x.column(2)) / t as f64;
        assert!((c02 - 0.25).abs() < 0.02, "toeplitz cov(0,2) = {c02}");
        // single-row shape
        let one = mvnormal_sample(1, &DMatrix::identity(4, 4), &mut rng).unwrap();
        assert_eq!((one.nrows(), one.ncols()), (1, 4));
    }

    #[test]
    fn positive_stable_cdf_quantile_consistency() {
        for &alpha in &[0.25, 0.5, 0.8] {
            let ps = PositiveStable::new(alpha).unwrap();
            for &p in &[0.05, 0.3, 0.5, 0.8, 0.99] {
                let x = ps.quantile(p).unwrap();
                assert_relative_eq!(ps.cdf(x), p, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn positive_stable_cdf_matches_sampler() {
        // empirical CDF of the Laplace-normalized sampler vs Kanter integral
        let alpha = 0.5;
        let ps = PositiveStable::new(alpha).unwrap();
        let mut rng = stream(12);
        let t = 200_000;
        let mut xs: Vec<f64> = (0..t)
            .map(|_| sample_positive_stable(alpha, &mut rng).unwrap())
            .collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for &q in &[0.1, 0.25, 0.5, 0.75, 0.9] {
            let emp = xs[(q * t as f64) as usize];
            let theor = ps.quantile(q).unwrap();
            assert!(
                (ps.cdf(emp) - q).abs() < 0.01,
                "alpha={alpha} q={q}: sampler quantile {emp} vs {theor}"
            );
        }
    }
}
