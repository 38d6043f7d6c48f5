//! Copula sampling (Gaussian, t-Student, Fréchet, Archimedean, nested
//! Archimedean) and dependence-measure conversions.
//!
//! All samplers output matrices in `[0,1]^{t x n}` with uniform marginals;
//! dependence enters only through the copula. The Archimedean samplers use
//! the latent-variable construction: draw `v` whose law has the copula
//! generator as Laplace-Stieltjes transform, then map exponential spacings
//! through the generator.

use crate::cormat::CorrMatrix;
use crate::randsource::{
    mvnormal_sample, sample_geometric1, sample_logarithmic, sample_positive_stable, Dist,
    PositiveStable, RngStream,
};
use crate::special::{debye1, gauss_legendre, norm_cdf, student_t_cdf};
use crate::{Error, Result, SampleMatrix};

/// One-parameter Archimedean families.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArchFamily {
    Gumbel,
    Clayton,
    Frank,
    Amh,
}

impl ArchFamily {
    pub fn name(&self) -> &'static str {
        match self {
            ArchFamily::Gumbel => "gumbel",
            ArchFamily::Clayton => "clayton",
            ArchFamily::Frank => "frank",
            ArchFamily::Amh => "amh",
        }
    }

    /// Parameter range valid for any number of marginals (completely
    /// monotone generator).
    pub fn check_theta_nvariate(self, theta: f64) -> Result<()> {
        let ok = match self {
            ArchFamily::Gumbel => theta >= 1.0,
            ArchFamily::Clayton => theta > 0.0,
            ArchFamily::Frank => theta > 0.0,
            ArchFamily::Amh => (0.0..1.0).contains(&theta),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "theta = {theta} outside the n-variate range of the {} copula",
                self.name()
            )))
        }
    }

    /// Wider parameter range valid in the bivariate case.
    pub fn check_theta_bivariate(self, theta: f64) -> Result<()> {
        let ok = match self {
            ArchFamily::Gumbel => theta >= 1.0,
            ArchFamily::Clayton => theta >= -1.0 && theta != 0.0,
            ArchFamily::Frank => theta != 0.0,
            ArchFamily::Amh => (-1.0..=1.0).contains(&theta),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "theta = {theta} outside the bivariate range of the {} copula",
                self.name()
            )))
        }
    }
}

/// Archimedean generator, the closed forms of the four families.
pub fn psi(family: ArchFamily, theta: f64, v: f64) -> Result<f64> {
    family.check_theta_bivariate(theta)?;
    if v < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "generator argument must be nonnegative, got {v}"
        )));
    }
    Ok(match family {
        ArchFamily::Gumbel => (-v.powf(1.0 / theta)).exp(),
        ArchFamily::Clayton => (1.0 + theta * v).max(0.0).powf(-1.0 / theta),
        ArchFamily::Frank => frank_psi(theta, v),
        ArchFamily::Amh => (1.0 - theta) / (v.exp() - theta),
    })
}

// Frank generator, kept cancellation-free for large positive theta by
// working with ln(1 - e^{-y}) terms.
fn frank_psi(theta: f64, v: f64) -> f64 {
    if theta > 0.0 {
        let s = -(-(-theta).exp()).ln_1p();
        -(-(-(v + s)).exp_m1()).ln() / theta
    } else {
        -((-v).exp() * (-theta).exp_m1()).ln_1p() / theta
    }
}

fn frank_psi_inv(theta: f64, x: f64) -> f64 {
    if theta > 0.0 {
        (-(-theta).exp()).ln_1p() - (-(-theta * x).exp()).ln_1p()
    } else {
        -((-theta * x).exp_m1() / (-theta).exp_m1()).ln()
    }
}

/// Inverse generator on (0, 1].
pub fn psi_inv(family: ArchFamily, theta: f64, x: f64) -> Result<f64> {
    family.check_theta_bivariate(theta)?;
    if !(0.0 < x && x <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "inverse generator argument must lie in (0,1], got {x}"
        )));
    }
    Ok(match family {
        ArchFamily::Gumbel => (-x.ln()).powf(theta),
        ArchFamily::Clayton => (x.powf(-theta) - 1.0) / theta,
        ArchFamily::Frank => frank_psi_inv(theta, x),
        ArchFamily::Amh => ((1.0 - theta * (1.0 - x)) / x).ln(),
    })
}

/// Copula specification: family, parameters and (optionally) a nesting
/// structure over consecutive groups of marginals.
#[derive(Clone, Debug)]
pub enum CopulaSpec {
    Gaussian {
        r: CorrMatrix,
    },
    TStudent {
        r: CorrMatrix,
        nu: u32,
    },
    /// One-parameter Fréchet copula: mixture of the maximal and the
    /// independent copula.
    Frechet1 {
        alpha: f64,
        n: usize,
    },
    /// Two-parameter bivariate Fréchet copula (maximal/minimal/independent
    /// mixture); valid for n = 2 only.
    Frechet2 {
        alpha: f64,
        beta: f64,
    },
    Archimedean {
        family: ArchFamily,
        theta: f64,
        n: usize,
    },
    /// Nested Archimedean copula over consecutive children; marginal `i`
    /// belongs to the child whose size range covers it.
    NestedArchimedean {
        family: ArchFamily,
        child_sizes: Vec<usize>,
        child_thetas: Vec<f64>,
        theta0: f64,
    },
}

impl CopulaSpec {
    pub fn n(&self) -> usize {
        match self {
            CopulaSpec::Gaussian { r } => r.n(),
            CopulaSpec::TStudent { r, .. } => r.n(),
            CopulaSpec::Frechet1 { n, .. } => *n,
            CopulaSpec::Frechet2 { .. } => 2,
            CopulaSpec::Archimedean { n, .. } => *n,
            CopulaSpec::NestedArchimedean { child_sizes, .. } => child_sizes.iter().sum(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CopulaSpec::Gaussian { r } | CopulaSpec::TStudent { r, .. } => {
                if r.n() < 2 {
                    return Err(Error::InvalidParameter(
                        "elliptical copula needs n >= 2".into(),
                    ));
                }
                if let CopulaSpec::TStudent { nu, .. } = self {
                    if *nu < 1 {
                        return Err(Error::InvalidParameter("t copula needs nu >= 1".into()));
                    }
                }
                Ok(())
            }
            CopulaSpec::Frechet1 { alpha, n } => {
                if !(0.0..=1.0).contains(alpha) {
                    return Err(Error::InvalidParameter(format!(
                        "Frechet alpha must lie in [0,1], got {alpha}"
                    )));
                }
                if *n < 2 {
                    return Err(Error::InvalidParameter("Frechet copula needs n >= 2".into()));
                }
                Ok(())
            }
            CopulaSpec::Frechet2 { alpha, beta } => {
                if !(0.0..=1.0).contains(alpha)
                    || !(0.0..=1.0).contains(beta)
                    || alpha + beta > 1.0
                {
                    return Err(Error::InvalidParameter(format!(
                        "two-parameter Frechet needs alpha, beta >= 0 with alpha + beta <= 1, got ({alpha}, {beta})"
                    )));
                }
                Ok(())
            }
            CopulaSpec::Archimedean { family, theta, n } => {
                if *n < 2 {
                    return Err(Error::InvalidParameter(
                        "Archimedean copula needs n >= 2".into(),
                    ));
                }
                if *n == 2 {
                    family.check_theta_bivariate(*theta)
                } else {
                    family.check_theta_nvariate(*theta)
                }
            }
            CopulaSpec::NestedArchimedean {
                family,
                child_sizes,
                child_thetas,
                theta0,
            } => {
                if !matches!(family, ArchFamily::Gumbel | ArchFamily::Clayton) {
                    return Err(Error::InvalidParameter(format!(
                        "nested sampling supported for Gumbel and Clayton, not {}",
                        family.name()
                    )));
                }
                if child_sizes.len() != child_thetas.len() || child_sizes.is_empty() {
                    return Err(Error::InvalidParameter(
                        "nested spec needs matching, non-empty child lists".into(),
                    ));
                }
                family.check_theta_nvariate(*theta0)?;
                for &th in child_thetas {
                    family.check_theta_nvariate(th)?;
                    if th < *theta0 - 1e-12 {
                        return Err(Error::InvalidParameter(format!(
                            "sufficient nesting violated: child theta {th} below parent {theta0}"
                        )));
                    }
                }
                Ok(())
            }
        }
    }
}

// Latent law of the Marshall-Olkin construction, normalized so that its
// Laplace-Stieltjes transform is the sampling generator below.
pub(crate) enum MoLatent {
    /// Gumbel, theta > 1: positive stable with transform exp(-s^{1/theta}).
    Stable { ps: PositiveStable },
    /// Gumbel theta = 1 (independence; no latent needed).
    Unit,
    /// Clayton: Gamma(1/theta, 1).
    Gamma { shape: f64 },
    /// Frank: logarithmic series with parameter 1 - exp(-theta).
    Logarithmic { p: f64 },
    /// AMH: geometric on {1,2,...} with success probability 1 - theta.
    Geometric { p: f64 },
}

impl MoLatent {
    pub(crate) fn new(family: ArchFamily, theta: f64) -> Result<Self> {
        family.check_theta_nvariate(theta)?;
        Ok(match family {
            ArchFamily::Gumbel => {
                if (theta - 1.0).abs() < 1e-12 {
                    MoLatent::Unit
                } else {
                    MoLatent::Stable {
                        ps: PositiveStable::new(1.0 / theta)?,
                    }
                }
            }
            ArchFamily::Clayton => MoLatent::Gamma { shape: 1.0 / theta },
            ArchFamily::Frank => MoLatent::Logarithmic {
                p: 1.0 - (-theta).exp(),
            },
            ArchFamily::Amh => MoLatent::Geometric { p: 1.0 - theta },
        })
    }

    pub(crate) fn sample(&self, rng: &mut RngStream) -> Result<f64> {
        Ok(match self {
            MoLatent::Stable { ps } => {
                // fast path: direct stable draw (the CDF object is kept for
                // quantile use)
                let alpha = ps.alpha();
                sample_positive_stable(alpha, rng)?
            }
            MoLatent::Unit => 1.0,
            MoLatent::Gamma { shape } => crate::randsource::sample(
                Dist::Gamma { shape: *shape },
                rng,
            )?,
            MoLatent::Logarithmic { p } => sample_logarithmic(*p, rng) as f64,
            MoLatent::Geometric { p } => sample_geometric1(*p, rng) as f64,
        })
    }

    /// Quantile of the latent law; strictly increasing in `u` for the
    /// continuous laws, non-decreasing for the discrete ones.
    pub(crate) fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0 < u && u < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "latent quantile argument {u} outside (0,1)"
            )));
        }
        Ok(match self {
            MoLatent::Stable { ps } => ps.quantile(u)?,
            MoLatent::Unit => 1.0,
            MoLatent::Gamma { shape } => crate::special::gamma_quantile(*shape, u)?,
            MoLatent::Logarithmic { p } => {
                let norm = -(1.0 - p).ln();
                let mut k = 1u64;
                let mut pmf = p / norm;
                let mut cdf = pmf;
                while cdf < u && k < 100_000_000 {
                    pmf *= p * k as f64 / (k + 1) as f64;
                    k += 1;
                    cdf += pmf;
                }
                k as f64
            }
            MoLatent::Geometric { p } => {
                if *p >= 1.0 {
                    1.0
                } else {
                    ((1.0 - u).ln() / (1.0 - p).ln()).ceil().max(1.0)
                }
            }
        })
    }

    /// Sampling generator paired with the latent law (the Laplace-Stieltjes
    /// transform of [`Self::sample`]'s output).
    pub(crate) fn generator(&self, family: ArchFamily, theta: f64, v: f64) -> f64 {
        match family {
            ArchFamily::Gumbel => (-v.powf(1.0 / theta)).exp(),
            // normalized Clayton generator (argument scale absorbed in the
            // unit-scale gamma latent)
            ArchFamily::Clayton => (1.0 + v).powf(-1.0 / theta),
            ArchFamily::Frank => frank_psi(theta, v),
            ArchFamily::Amh => (1.0 - theta) / (v.exp() - theta),
        }
    }
}

/// `t` samples from the copula in `[0,1]^{t x n}`. Bivariate Archimedean
/// requests are routed through the conditional sampler so the wider
/// bivariate parameter ranges stay available.
pub fn sample_copula(spec: &CopulaSpec, t: usize, rng: &mut RngStream) -> Result<SampleMatrix> {
    spec.validate()?;
    match spec {
        CopulaSpec::Gaussian { r } => {
            let z = mvnormal_sample(t, r.as_matrix(), rng)?;
            Ok(z.map(norm_cdf))
        }
        CopulaSpec::TStudent { r, nu } => {
            let nu_f = *nu as f64;
            let mut z = mvnormal_sample(t, r.as_matrix(), rng)?;
            for j in 0..t {
                let w = crate::randsource::sample(Dist::ChiSquare { nu: nu_f }, rng)?;
                let scale = (nu_f / w).sqrt();
                for c in 0..z.ncols() {
                    z[(j, c)] *= scale;
                }
            }
            let mut u = z;
            for v in u.iter_mut() {
                *v = student_t_cdf(nu_f, *v)?;
            }
            Ok(u)
        }
        CopulaSpec::Frechet1 { alpha, n } => {
            let mut u = SampleMatrix::zeros(t, *n);
            for j in 0..t {
                let v = rng.uniform_open();
                if v <= *alpha {
                    let shared = rng.uniform_open();
                    for c in 0..*n {
                        u[(j, c)] = shared;
                    }
                } else {
                    for c in 0..*n {
                        u[(j, c)] = rng.uniform_open();
                    }
                }
            }
            Ok(u)
        }
        CopulaSpec::Frechet2 { alpha, beta } => {
            let mut u = SampleMatrix::zeros(t, 2);
            for j in 0..t {
                let v = rng.uniform_open();
                if v <= *alpha {
                    let u1 = rng.uniform_open();
                    u[(j, 0)] = u1;
                    u[(j, 1)] = u1;
                } else if v <= alpha + beta {
                    let u1 = rng.uniform_open();
                    u[(j, 0)] = u1;
                    u[(j, 1)] = 1.0 - u1;
                } else {
                    u[(j, 0)] = rng.uniform_open();
                    u[(j, 1)] = rng.uniform_open();
                }
            }
            Ok(u)
        }
        CopulaSpec::Archimedean { family, theta, n } => {
            if *n == 2 {
                return sample_bivariate_archimedean(*family, *theta, t, rng);
            }
            let latent = MoLatent::new(*family, *theta)?;
            let mut u = SampleMatrix::zeros(t, *n);
            for j in 0..t {
                let v = latent.sample(rng)?;
                for c in 0..*n {
                    let e = -rng.uniform_open().ln();
                    u[(j, c)] = latent.generator(*family, *theta, e / v);
                }
            }
            Ok(u)
        }
        CopulaSpec::NestedArchimedean {
            family,
            child_sizes,
            child_thetas,
            theta0,
        } => {
            let (u, _) =
                sample_nested_archimedean_with_report(*family, child_sizes, child_thetas, *theta0, t, rng)?;
            Ok(u)
        }
    }
}

/// Bivariate Archimedean sampling through the conditional copula: the first
/// coordinate is uniform, the second is drawn from the conditional quantile.
pub fn sample_bivariate_archimedean(
    family: ArchFamily,
    theta: f64,
    t: usize,
    rng: &mut RngStream,
) -> Result<SampleMatrix> {
    family.check_theta_bivariate(theta)?;
    let mut u = SampleMatrix::zeros(t, 2);
    for j in 0..t {
        let u1 = rng.uniform_open();
        let w = rng.uniform_open();
        u[(j, 0)] = u1;
        u[(j, 1)] = conditional_quantile(family, theta, u1, w)?;
    }
    Ok(u)
}

// Inverse of w = dC(u1, u2)/du1 in u2, for fixed u1.
fn conditional_quantile(family: ArchFamily, theta: f64, u1: f64, w: f64) -> Result<f64> {
    let clamp = |x: f64| x.clamp(1e-15, 1.0 - 1e-15);
    match family {
        ArchFamily::Clayton => {
            if (theta + 1.0).abs() < 1e-12 {
                // minimal copula
                return Ok(clamp(1.0 - u1));
            }
            let inner = (w * u1.powf(1.0 + theta)).powf(-theta / (1.0 + theta)) - u1.powf(-theta)
                + 1.0;
            if inner <= 0.0 {
                // below the zero-mass boundary of a negative-theta Clayton
                return Ok(1e-15);
            }
            Ok(clamp(inner.powf(-1.0 / theta)))
        }
        ArchFamily::Frank => {
            let a = (-theta * u1).exp();
            let denom = w * (a - 1.0) - a;
            let u2 = -(1.0 + w * (1.0 - (-theta).exp()) / denom).ln() / theta;
            Ok(clamp(u2))
        }
        ArchFamily::Amh => {
            if theta.abs() < 1e-9 {
                return Ok(clamp(w));
            }
            // w = u2 (1 - theta(1 - u2)) / (1 - theta(1-u1)(1-u2))^2,
            // quadratic in b = 1 - u2
            let a_coef = theta * (w * theta * (1.0 - u1) * (1.0 - u1) - 1.0);
            let b_coef = 1.0 + theta - 2.0 * w * theta * (1.0 - u1);
            let c_coef = w - 1.0;
            let b = if a_coef.abs() < 1e-14 {
                -c_coef / b_coef
            } else {
                let disc = (b_coef * b_coef - 4.0 * a_coef * c_coef).max(0.0).sqrt();
                let r1 = (-b_coef + disc) / (2.0 * a_coef);
                let r2 = (-b_coef - disc) / (2.0 * a_coef);
                // pick the root that reproduces w through the conditional CDF
                let check = |b: f64| -> f64 {
                    if !(0.0..=1.0).contains(&b) {
                        return f64::INFINITY;
                    }
                    let u2 = 1.0 - b;
                    let d = 1.0 - theta * (1.0 - u1) * b;
                    (u2 * (1.0 - theta * b) / (d * d) - w).abs()
                };
                if check(r1) <= check(r2) {
                    r1
                } else {
                    r2
                }
            };
            Ok(clamp(1.0 - b))
        }
        ArchFamily::Gumbel => {
            if (theta - 1.0).abs() < 1e-12 {
                return Ok(clamp(w));
            }
            // conditional CDF is monotone in u2: bisect to 1e-10
            let cond = |u2: f64| -> f64 {
                let x1 = -u1.ln();
                let x2 = -u2.ln();
                let s = x1.powf(theta) + x2.powf(theta);
                let c = (-s.powf(1.0 / theta)).exp();
                c / u1 * x1.powf(theta - 1.0) * s.powf(1.0 / theta - 1.0)
            };
            let mut lo = 1e-15;
            let mut hi = 1.0 - 1e-15;
            while hi - lo > 1e-10 {
                let mid = 0.5 * (lo + hi);
                if cond(mid) < w {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(0.5 * (lo + hi))
        }
    }
}

/// Diagnostics of a nested-Archimedean run (the Clayton child sampler is a
/// rejection scheme whose acceptance rate depends on the parent draw).
#[derive(Clone, Copy, Debug, Default)]
pub struct NestedReport {
    pub tilted_proposals: u64,
    pub tilted_accepts: u64,
}

impl NestedReport {
    pub fn acceptance(&self) -> f64 {
        if self.tilted_proposals == 0 {
            1.0
        } else {
            self.tilted_accepts as f64 / self.tilted_proposals as f64
        }
    }
}

/// Nested Archimedean sampling (Gumbel, Clayton) over consecutive children
/// of the given sizes; requires the sufficient nesting condition
/// `theta0 <= theta_child` for every child.
pub fn sample_nested_archimedean(
    family: ArchFamily,
    child_sizes: &[usize],
    child_thetas: &[f64],
    theta0: f64,
    t: usize,
    rng: &mut RngStream,
) -> Result<SampleMatrix> {
    let (u, _) =
        sample_nested_archimedean_with_report(family, child_sizes, child_thetas, theta0, t, rng)?;
    Ok(u)
}

/// Like [`sample_nested_archimedean`] but also returns rejection-sampler
/// diagnostics.
pub fn sample_nested_archimedean_with_report(
    family: ArchFamily,
    child_sizes: &[usize],
    child_thetas: &[f64],
    theta0: f64,
    t: usize,
    rng: &mut RngStream,
) -> Result<(SampleMatrix, NestedReport)> {
    let spec = CopulaSpec::NestedArchimedean {
        family,
        child_sizes: child_sizes.to_vec(),
        child_thetas: child_thetas.to_vec(),
        theta0,
    };
    spec.validate()?;
    let k: usize = child_sizes.iter().sum();
    let latent = MoLatent::new(family, theta0)?;
    let mut report = NestedReport::default();
    let mut u = SampleMatrix::zeros(t, k);
    let mut x = vec![0.0f64; k];
    for j in 0..t {
        let v0 = latent.sample(rng)?;
        for xv in x.iter_mut() {
            *xv = rng.uniform_open();
        }
        let mut offset = 0usize;
        for (&size, &theta_c) in child_sizes.iter().zip(child_thetas) {
            let cols = offset..offset + size;
            if (theta_c - theta0).abs() > 1e-12 {
                nested_child_transform(
                    family,
                    theta0,
                    theta_c,
                    v0,
                    &mut x[cols.clone()],
                    rng,
                    &mut report,
                )?;
            }
            offset += size;
        }
        for (c, &xv) in x.iter().enumerate() {
            let e = -xv.ln();
            u[(j, c)] = latent.generator(family, theta0, e / v0);
        }
    }
    Ok((u, report))
}

// Inner transform of one child's coordinates: replaces x_i by
// psi_{v0,theta0,theta_c}(-ln(x_i) / v_c) with v_c drawn from the child law.
fn nested_child_transform(
    family: ArchFamily,
    theta0: f64,
    theta_c: f64,
    v0: f64,
    x: &mut [f64],
    rng: &mut RngStream,
    report: &mut NestedReport,
) -> Result<()> {
    let alpha = theta0 / theta_c;
    match family {
        ArchFamily::Gumbel => {
            // v0 cancels between the stable scale and the outer generator,
            // leaving the reduced generator exp(-t^alpha)
            let s = sample_positive_stable(alpha, rng)?;
            for xv in x.iter_mut() {
                let e = -xv.ln();
                *xv = (-(e / s).powf(alpha)).exp();
            }
            Ok(())
        }
        ArchFamily::Clayton => {
            // child latent: exponentially tilted stable, sampled by
            // rejection against the untilted stable with weight exp(-s)
            let scale = v0.powf(1.0 / alpha);
            let mut vc = None;
            for _ in 0..1_000_000u64 {
                let s = scale * sample_positive_stable(alpha, rng)?;
                report.tilted_proposals += 1;
                if rng.uniform_open() <= (-s).exp() {
                    report.tilted_accepts += 1;
                    vc = Some(s);
                    break;
                }
            }
            let vc = vc.ok_or_else(|| {
                Error::NoConvergence(format!(
                    "tilted-stable rejection stalled (parent draw {v0:.3}); acceptance so far {:.2e}",
                    report.acceptance()
                ))
            })?;
            for xv in x.iter_mut() {
                let e = -xv.ln();
                let inner = (1.0 + e / vc).powf(alpha) - 1.0;
                *xv = (-v0 * inner).exp();
            }
            Ok(())
        }
        _ => Err(Error::InvalidParameter(format!(
            "nested child sampling not supported for {}",
            family.name()
        ))),
    }
}

/// Kendall tau of an elliptical copula with off-diagonal correlation `r`.
pub fn elliptical_tau_from_r(r: f64) -> f64 {
    2.0 / std::f64::consts::PI * r.asin()
}

/// Inverse of [`elliptical_tau_from_r`].
pub fn elliptical_r_from_tau(tau: f64) -> f64 {
    (std::f64::consts::FRAC_PI_2 * tau).sin()
}

/// Kendall tau of a bivariate Archimedean copula (closed forms; Frank via
/// the Debye integral).
pub fn tau_from_theta(family: ArchFamily, theta: f64) -> Result<f64> {
    family.check_theta_bivariate(theta)?;
    Ok(match family {
        ArchFamily::Gumbel => 1.0 - 1.0 / theta,
        ArchFamily::Clayton => theta / (theta + 2.0),
        ArchFamily::Frank => {
            let a = theta.abs();
            let tau = 1.0 - 4.0 / a * (1.0 - debye1(a));
            tau * theta.signum()
        }
        ArchFamily::Amh => {
            if theta.abs() < 1e-5 {
                2.0 * theta / 9.0
            } else if (theta - 1.0).abs() < 1e-12 {
                1.0 / 3.0
            } else {
                (3.0 * theta - 2.0) / (3.0 * theta)
                    - 2.0 * (1.0 - theta).powi(2) * (1.0 - theta).ln() / (3.0 * theta * theta)
            }
        }
    })
}

/// Inverse of [`tau_from_theta`] by monotone root finding.
pub fn theta_from_tau(family: ArchFamily, tau: f64) -> Result<f64> {
    match family {
        ArchFamily::Gumbel => {
            if !(0.0..1.0).contains(&tau) {
                return Err(Error::InvalidParameter(format!(
                    "Gumbel tau must lie in [0,1), got {tau}"
                )));
            }
            Ok(1.0 / (1.0 - tau))
        }
        ArchFamily::Clayton => {
            if !(-1.0..1.0).contains(&tau) || tau == 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "Clayton tau must lie in [-1,1) and be nonzero, got {tau}"
                )));
            }
            Ok(2.0 * tau / (1.0 - tau))
        }
        ArchFamily::Frank => {
            if tau == 0.0 || tau.abs() >= 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "Frank tau must be nonzero with |tau| < 1, got {tau}"
                )));
            }
            let target = tau.abs();
            let f = |th: f64| tau_from_theta(ArchFamily::Frank, th).unwrap();
            let mut lo = 1e-8;
            let mut hi = 1.0;
            while f(hi) < target {
                hi *= 2.0;
                if hi > 1e6 {
                    return Err(Error::NoSolution(format!("Frank tau {tau} unattainable")));
                }
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if f(mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(0.5 * (lo + hi) * tau.signum())
        }
        ArchFamily::Amh => {
            let lo_tau = tau_from_theta(ArchFamily::Amh, -1.0)?;
            let hi_tau = 1.0 / 3.0;
            if tau < lo_tau || tau >= hi_tau {
                return Err(Error::NoSolution(format!(
                    "AMH tau must lie in [{lo_tau:.6}, {hi_tau:.6}), got {tau}"
                )));
            }
            let mut lo = -1.0;
            let mut hi = 1.0;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if tau_from_theta(ArchFamily::Amh, mid)? < tau {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(0.5 * (lo + hi))
        }
    }
}

/// Spearman rho of a bivariate Archimedean copula via the double integral
/// `rho = 12 * int int C(u1, u2) du1 du2 - 3` on a Gauss-Legendre grid.
pub fn rho_from_theta(family: ArchFamily, theta: f64) -> Result<f64> {
    family.check_theta_bivariate(theta)?;
    let (nodes, weights) = gauss_legendre(128);
    let mut acc = 0.0;
    for (&xi, &wi) in nodes.iter().zip(&weights) {
        let u1 = 0.5 * (xi + 1.0);
        let p1 = psi_inv(family, theta, u1.clamp(1e-14, 1.0))?;
        for (&xj, &wj) in nodes.iter().zip(&weights) {
            let u2 = 0.5 * (xj + 1.0);
            let p2 = psi_inv(family, theta, u2.clamp(1e-14, 1.0))?;
            acc += wi * wj * psi(family, theta, p1 + p2)?;
        }
    }
    // map [-1,1]^2 onto [0,1]^2: Jacobian 1/4
    Ok(12.0 * acc / 4.0 - 3.0)
}

/// Inverse of [`rho_from_theta`] by monotone root finding.
pub fn theta_from_rho(family: ArchFamily, rho: f64) -> Result<f64> {
    let (mut lo, mut hi) = match family {
        ArchFamily::Gumbel => (1.0, 64.0),
        ArchFamily::Clayton => {
            if rho > 0.0 {
                (1e-6, 64.0)
            } else {
                (-1.0 + 1e-9, -1e-6)
            }
        }
        ArchFamily::Frank => {
            if rho > 0.0 {
                (1e-6, 256.0)
            } else {
                (-256.0, -1e-6)
            }
        }
        ArchFamily::Amh => (-1.0, 1.0 - 1e-9),
    };
    let lo_rho = rho_from_theta(family, lo)?;
    let hi_rho = rho_from_theta(family, hi)?;
    if rho < lo_rho.min(hi_rho) - 1e-9 || rho > lo_rho.max(hi_rho) + 1e-9 {
        return Err(Error::NoSolution(format!(
            "Spearman rho {rho} unattainable for the {} copula",
            family.name()
        )));
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if rho_from_theta(family, mid)? < rho {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Parameter set for tail-dependence evaluation.
#[derive(Clone, Debug)]
pub enum TailSpec {
    Gaussian,
    TStudent { nu: u32, r: f64 },
    Frechet1 { alpha: f64 },
    Frechet2 { alpha: f64, beta: f64 },
    Archimedean { family: ArchFamily, theta: f64 },
}

/// Lower and upper tail-dependence coefficients `(lambda_l, lambda_u)`.
pub fn tail_dependence(spec: &TailSpec) -> Result<(f64, f64)> {
    match spec {
        TailSpec::Gaussian => Ok((0.0, 0.0)),
        TailSpec::TStudent { nu, r } => {
            if *nu < 1 {
                return Err(Error::InvalidParameter("t copula needs nu >= 1".into()));
            }
            if !(-1.0..1.0).contains(r) {
                return Err(Error::InvalidParameter(format!(
                    "correlation must lie in (-1,1), got {r}"
                )));
            }
            let nu_f = *nu as f64;
            let arg = -((nu_f + 1.0) * (1.0 - r) / (1.0 + r)).sqrt();
            let lambda = 2.0 * student_t_cdf(nu_f + 1.0, arg)?;
            Ok((lambda, lambda))
        }
        TailSpec::Frechet1 { alpha } => Ok((*alpha, *alpha)),
        TailSpec::Frechet2 { alpha, .. } => Ok((*alpha, *alpha)),
        TailSpec::Archimedean { family, theta } => {
            family.check_theta_bivariate(*theta)?;
            Ok(match family {
                ArchFamily::Gumbel => (0.0, 2.0 - 2.0f64.powf(1.0 / theta)),
                ArchFamily::Clayton => {
                    if *theta > 0.0 {
                        (2.0f64.powf(-1.0 / theta), 0.0)
                    } else {
                        (0.0, 0.0)
                    }
                }
                ArchFamily::Frank => (0.0, 0.0),
                ArchFamily::Amh => {
                    let ll = if (*theta - 1.0).abs() < 1e-12 { 0.5 } else { 0.0 };
                    (ll, 0.0)
                }
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cormat::{cormatgen, CorMethod};
    use crate::stats::{kendall, ks_uniform, spearman};
    use approx::assert_relative_eq;

    fn rng(stream: u64) -> RngStream {
        RngStream::new(0xC0FFEE, stream)
    }

    #[test]
    fn generator_round_trips() {
        let grid: Vec<f64> = (1..100).map(|i| i as f64 / 100.0).collect();
        let cases = [
            (ArchFamily::Gumbel, 1.0),
            (ArchFamily::Gumbel, 3.5),
            (ArchFamily::Clayton, 2.0),
            (ArchFamily::Clayton, -0.5),
            (ArchFamily::Frank, 4.0),
            (ArchFamily::Frank, -3.0),
            (ArchFamily::Amh, 0.7),
            (ArchFamily::Amh, -0.9),
        ];
        for (family, theta) in cases {
            for &x in &grid {
                let v = psi_inv(family, theta, x).unwrap();
                let back = psi(family, theta, v).unwrap();
                assert!(
                    (back - x).abs() < 1e-12,
                    "{family:?} theta={theta} x={x}: got {back}"
                );
            }
        }
    }

    #[test]
    fn generator_examples() {
        // Gumbel theta = 1 reduces to exp / -ln
        assert_relative_eq!(psi(ArchFamily::Gumbel, 1.0, 0.9943).unwrap(), (-0.9943f64).exp());
        let v = psi_inv(ArchFamily::Gumbel, 1.0, 0.37).unwrap();
        assert_relative_eq!(v, -(0.37f64.ln()), max_relative = 1e-14);
        // Clayton theta = 2 at x = 0.5
        assert_relative_eq!(
            psi_inv(ArchFamily::Clayton, 2.0, 0.5).unwrap(),
            1.5,
            max_relative = 1e-14
        );
    }

    #[test]
    fn frechet1_full_correlation_branch() {
        let mut r = rng(0);
        let spec = CopulaSpec::Frechet1 { alpha: 1.0, n: 4 };
        let u = sample_copula(&spec, 200, &mut r).unwrap();
        for j in 0..200 {
            for c in 1..4 {
                assert_eq!(u[(j, c)], u[(j, 0)]);
            }
        }
    }

    #[test]
    fn frechet1_pairwise_spearman_matches_alpha() {
        let mut r = rng(1);
        let spec = CopulaSpec::Frechet1 { alpha: 0.5, n: 4 };
        let t = 100_000;
        let u = sample_copula(&spec, t, &mut r).unwrap();
        for a in 0..4 {
            for b in a + 1..4 {
                let ra: Vec<f64> = u.column(a).iter().cloned().collect();
                let rb: Vec<f64> = u.column(b).iter().cloned().collect();
                let rho = spearman(&ra, &rb).unwrap();
                assert!((rho - 0.5).abs() < 0.02, "pair ({a},{b}): rho = {rho}");
            }
        }
    }

    #[test]
    fn clayton_marshall_olkin_tau() {
        let mut r = rng(2);
        let spec = CopulaSpec::Archimedean {
            family: ArchFamily::Clayton,
            theta: 2.0,
            n: 3,
        };
        let t = 100_000;
        let u = sample_copula(&spec, t, &mut r).unwrap();
        let c0: Vec<f64> = u.column(0).iter().cloned().collect();
        let c1: Vec<f64> = u.column(1).iter().cloned().collect();
        let tau = kendall(&c0, &c1).unwrap();
        assert!((tau - 0.5).abs() < 0.01, "tau = {tau}");
    }

    #[test]
    fn bivariate_conditional_samplers() {
        // Frank theta -> 0+: independence limit
        let mut r = rng(3);
        let u = sample_bivariate_archimedean(ArchFamily::Frank, 0.05, 100_000, &mut r).unwrap();
        let c0: Vec<f64> = u.column(0).iter().cloned().collect();
        let c1: Vec<f64> = u.column(1).iter().cloned().collect();
        assert!(kendall(&c0, &c1).unwrap().abs() < 0.02);
        // marginal uniformity of the conditional coordinate
        assert!(ks_uniform(&c1) < 0.006, "ks = {}", ks_uniform(&c1));

        // negative-theta Clayton
        let mut r = rng(4);
        let u = sample_bivariate_archimedean(ArchFamily::Clayton, -0.75, 100_000, &mut r).unwrap();
        let c0: Vec<f64> = u.column(0).iter().cloned().collect();
        let c1: Vec<f64> = u.column(1).iter().cloned().collect();
        let tau = kendall(&c0, &c1).unwrap();
        assert!((tau + 0.6).abs() < 0.02, "tau = {tau}");
    }

    #[test]
    fn bivariate_tau_round_trip_vs_empirical() {
        // three parameter points per family
        let cases = [
            (ArchFamily::Gumbel, [1.3, 2.5, 6.0]),
            (ArchFamily::Clayton, [-0.4, 1.0, 4.0]),
            (ArchFamily::Frank, [-4.0, 1.5, 9.0]),
            (ArchFamily::Amh, [-0.8, 0.4, 0.95]),
        ];
        for (i, (family, thetas)) in cases.into_iter().enumerate() {
            for (j, theta) in thetas.into_iter().enumerate() {
                let mut r = rng(10 + 4 * i as u64 + j as u64);
                let u = sample_bivariate_archimedean(family, theta, 100_000, &mut r).unwrap();
                let c0: Vec<f64> = u.column(0).iter().cloned().collect();
                let c1: Vec<f64> = u.column(1).iter().cloned().collect();
                let emp = kendall(&c0, &c1).unwrap();
                let theor = tau_from_theta(family, theta).unwrap();
                assert!(
                    (emp - theor).abs() < 0.02,
                    "{family:?} theta={theta}: empirical {emp} vs {theor}"
                );
            }
        }
    }

    #[test]
    fn marginal_uniformity_all_samplers() {
        let mut r = rng(20);
        let cm = cormatgen(CorMethod::Constant { alpha: 0.5 }, 3, &mut r).unwrap();
        let specs: Vec<CopulaSpec> = vec![
            CopulaSpec::Gaussian { r: cm.clone() },
            CopulaSpec::TStudent { r: cm, nu: 3 },
            CopulaSpec::Frechet1 { alpha: 0.4, n: 3 },
            CopulaSpec::Frechet2 { alpha: 0.3, beta: 0.5 },
            CopulaSpec::Archimedean {
                family: ArchFamily::Gumbel,
                theta: 2.0,
                n: 3,
            },
            CopulaSpec::Archimedean {
                family: ArchFamily::Frank,
                theta: 3.0,
                n: 3,
            },
            CopulaSpec::Archimedean {
                family: ArchFamily::Amh,
                theta: 0.5,
                n: 3,
            },
            CopulaSpec::NestedArchimedean {
                family: ArchFamily::Gumbel,
                child_sizes: vec![2],
                child_thetas: vec![2.5],
                theta0: 1.4,
            },
        ];
        let t = 100_000;
        for (i, spec) in specs.iter().enumerate() {
            let mut r = rng(21 + i as u64);
            let u = sample_copula(spec, t, &mut r).unwrap();
            assert!(u.iter().all(|&v| (0.0..=1.0).contains(&v)));
            for c in 0..u.ncols() {
                let col: Vec<f64> = u.column(c).iter().cloned().collect();
                let ks = ks_uniform(&col);
                assert!(ks < 0.006, "spec {i} column {c}: KS = {ks}");
            }
        }
    }

    #[test]
    fn nested_degenerate_equals_flat() {
        let theta = 2.0;
        let t = 50_000;
        let mut r1 = rng(30);
        let nested = sample_nested_archimedean(
            ArchFamily::Gumbel,
            &[3],
            &[theta],
            theta,
            t,
            &mut r1,
        )
        .unwrap();
        let mut r2 = rng(31);
        let flat = sample_copula(
            &CopulaSpec::Archimedean {
                family: ArchFamily::Gumbel,
                theta,
                n: 3,
            },
            t,
            &mut r2,
        )
        .unwrap();
        for cols in [(0usize, 1usize), (0, 2), (1, 2)] {
            let tau_of = |m: &SampleMatrix| {
                let a: Vec<f64> = m.column(cols.0).iter().cloned().collect();
                let b: Vec<f64> = m.column(cols.1).iter().cloned().collect();
                kendall(&a, &b).unwrap()
            };
            let tn = tau_of(&nested);
            let tf = tau_of(&flat);
            assert!((tn - tf).abs() < 0.02, "pair {cols:?}: {tn} vs {tf}");
        }
    }

    #[test]
    fn nested_gumbel_pairwise_taus() {
        // parent tau0 = 0.3, child tau1 = 0.6 on marginals {0,1}; marginal 2
        // attached only through the parent
        let theta0 = theta_from_tau(ArchFamily::Gumbel, 0.3).unwrap();
        let theta1 = theta_from_tau(ArchFamily::Gumbel, 0.6).unwrap();
        let mut r = rng(32);
        let t = 100_000;
        let u = sample_nested_archimedean(
            ArchFamily::Gumbel,
            &[2, 1],
            &[theta1, theta0],
            theta0,
            t,
            &mut r,
        )
        .unwrap();
        assert!(u.iter().all(|&v| (0.0..=1.0).contains(&v)));
        let col = |c: usize| -> Vec<f64> { u.column(c).iter().cloned().collect() };
        let t01 = kendall(&col(0), &col(1)).unwrap();
        let t02 = kendall(&col(0), &col(2)).unwrap();
        assert!((t01 - 0.6).abs() < 0.02, "inside-child tau {t01}");
        assert!((t02 - 0.3).abs() < 0.02, "cross-child tau {t02}");
    }

    #[test]
    fn nested_clayton_pairwise_taus_and_acceptance() {
        let theta0 = theta_from_tau(ArchFamily::Clayton, 0.25).unwrap();
        let theta1 = theta_from_tau(ArchFamily::Clayton, 0.5).unwrap();
        let mut r = rng(33);
        let t = 20_000;
        let (u, report) = sample_nested_archimedean_with_report(
            ArchFamily::Clayton,
            &[2, 1],
            &[theta1, theta0],
            theta0,
            t,
            &mut r,
        )
        .unwrap();
        let col = |c: usize| -> Vec<f64> { u.column(c).iter().cloned().collect() };
        let t01 = kendall(&col(0), &col(1)).unwrap();
        let t02 = kendall(&col(0), &col(2)).unwrap();
        assert!((t01 - 0.5).abs() < 0.03, "inside-child tau {t01}");
        assert!((t02 - 0.25).abs() < 0.03, "cross-child tau {t02}");
        assert!(report.tilted_proposals > 0 && report.acceptance() > 0.0);
    }

    #[test]
    fn nesting_condition_enforced() {
        let spec = CopulaSpec::NestedArchimedean {
            family: ArchFamily::Gumbel,
            child_sizes: vec![2],
            child_thetas: vec![1.2],
            theta0: 2.0,
        };
        assert!(spec.validate().is_err());
        let frank = CopulaSpec::NestedArchimedean {
            family: ArchFamily::Frank,
            child_sizes: vec![2],
            child_thetas: vec![3.0],
            theta0: 2.0,
        };
        assert!(frank.validate().is_err());
    }

    #[test]
    fn tau_conversions() {
        assert_relative_eq!(elliptical_tau_from_r(1.0), 1.0, max_relative = 1e-12);
        assert_relative_eq!(
            tau_from_theta(ArchFamily::Gumbel, 3.0).unwrap(),
            2.0 / 3.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            tau_from_theta(ArchFamily::Amh, 1.0).unwrap(),
            1.0 / 3.0,
            max_relative = 1e-9
        );
        // Frank round trip
        for &theta in &[0.5, 2.0, 8.0] {
            let tau = tau_from_theta(ArchFamily::Frank, theta).unwrap();
            let back = theta_from_tau(ArchFamily::Frank, tau).unwrap();
            assert!((back - theta).abs() < 1e-6, "theta {theta} -> {back}");
        }
        // negative Frank is odd
        assert_relative_eq!(
            tau_from_theta(ArchFamily::Frank, -2.0).unwrap(),
            -tau_from_theta(ArchFamily::Frank, 2.0).unwrap(),
            max_relative = 1e-12
        );
        assert!(theta_from_tau(ArchFamily::Amh, 0.9).is_err());
    }

    #[test]
    fn rho_integral_matches_empirical_spearman() {
        // validates the printed 12*intC - 3 constant against simulation
        let cases = [
            (ArchFamily::Clayton, 2.0),
            (ArchFamily::Gumbel, 2.0),
            (ArchFamily::Frank, 4.0),
        ];
        for (i, (family, theta)) in cases.into_iter().enumerate() {
            let theor = rho_from_theta(family, theta).unwrap();
            let mut r = rng(40 + i as u64);
            let u = sample_bivariate_archimedean(family, theta, 100_000, &mut r).unwrap();
            let c0: Vec<f64> = u.column(0).iter().cloned().collect();
            let c1: Vec<f64> = u.column(1).iter().cloned().collect();
            let emp = spearman(&c0, &c1).unwrap();
            assert!(
                (emp - theor).abs() < 0.02,
                "{family:?} theta={theta}: integral {theor} vs empirical {emp}"
            );
        }
    }

    #[test]
    fn rho_round_trip() {
        for (family, rho) in [
            (ArchFamily::Clayton, 0.5),
            (ArchFamily::Gumbel, 0.4),
            (ArchFamily::Frank, -0.3),
            (ArchFamily::Amh, 0.3),
        ] {
            let theta = theta_from_rho(family, rho).unwrap();
            let back = rho_from_theta(family, theta).unwrap();
            assert!((back - rho).abs() < 1e-6, "{family:?}: {rho} -> {back}");
        }
    }

    #[test]
    fn tail_dependence_values() {
        let (l, u) = tail_dependence(&TailSpec::Archimedean {
            family: ArchFamily::Gumbel,
            theta: 2.0,
        })
        .unwrap();
        assert_eq!(l, 0.0);
        assert_relative_eq!(u, 2.0 - 2.0f64.sqrt(), max_relative = 1e-12);

        let (l, u) = tail_dependence(&TailSpec::Gaussian).unwrap();
        assert_eq!((l, u), (0.0, 0.0));

        // The t-copula formula evaluated at nu = 1, r = 0 gives
        // 2 T_2(-sqrt(2)) = 1 - sqrt(2)/2, approximately 0.293.
        let (l, u) = tail_dependence(&TailSpec::TStudent { nu: 1, r: 0.0 }).unwrap();
        assert_relative_eq!(l, 1.0 - std::f64::consts::SQRT_2 / 2.0, max_relative = 1e-9);
        assert_eq!(l, u);

        let (l, u) = tail_dependence(&TailSpec::Archimedean {
            family: ArchFamily::Clayton,
            theta: 2.0,
        })
        .unwrap();
        assert_relative_eq!(l, 2.0f64.powf(-0.5), max_relative = 1e-12);
        assert_eq!(u, 0.0);
    }

    #[test]
    fn empirical_cdf_respects_frechet_hoeffding_bounds() {
        let mut r = rng(50);
        let u = sample_bivariate_archimedean(ArchFamily::Clayton, 3.0, 50_000, &mut r).unwrap();
        let t = u.nrows() as f64;
        for gi in 1..=10 {
            for gj in 1..=10 {
                let (a, b) = (gi as f64 / 10.0, gj as f64 / 10.0);
                let count = (0..u.nrows())
                    .filter(|&j| u[(j, 0)] <= a && u[(j, 1)] <= b)
                    .count() as f64
                    / t;
                let lower = (a + b - 1.0).max(0.0);
                let upper = a.min(b);
                assert!(count >= lower - 0.01, "C({a},{b}) = {count} below {lower}");
                assert!(count <= upper + 0.01, "C({a},{b}) = {count} above {upper}");
            }
        }
    }
}
