//! Transform a chosen subset of marginals of multivariate Gaussian data so
//! that its joint law follows a non-Gaussian copula, while univariate
//! marginals stay standard normal and the covariance structure is only
//! mildly perturbed.
//!
//! The information-preserving channel works by rotating the subset onto
//! decorrelated coordinates (eigenvectors of the empirical correlation,
//! eigenvalues ascending), mapping to uniforms, driving the copula sampler
//! with those uniforms instead of fresh randomness, and mapping back to
//! normal marginals.

use nalgebra::DMatrix;

use crate::copulas::{ArchFamily, MoLatent};
use crate::randsource::{sample_positive_stable, Dist, RngStream};
use crate::special::{norm_cdf, norm_quantile, student_t_cdf};
use crate::stats;
use crate::{Error, Result, SampleMatrix};

/// Rotate approximately Gaussian columns onto independent uniforms.
///
/// Eigenvalues of the empirical correlation are sorted ascending, so the
/// last output column carries the most informative direction.
pub fn norm2unif(x: &SampleMatrix) -> Result<SampleMatrix> {
    let k = x.ncols();
    if k == 0 || x.nrows() < 2 {
        return Err(Error::DimensionMismatch(
            "norm2unif needs at least two rows and one column".into(),
        ));
    }
    let cor = stats::correlation(x)?;
    let eig = nalgebra::SymmetricEigen::new(cor);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let lambdas: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    if lambdas[0] < 1e-12 {
        return Err(Error::Degenerate(format!(
            "correlation matrix nearly singular (min eigenvalue {})",
            lambdas[0]
        )));
    }
    // Orient every eigenvector to a nonnegative component sum (Perron
    // direction for the leading one). The eigensolver's signs are
    // arbitrary, and a flipped leading direction would anti-correlate the
    // information channel with everything it is meant to preserve.
    let mut q = DMatrix::from_fn(k, k, |i, j| eig.eigenvectors[(i, order[j])]);
    for mut col in q.column_iter_mut() {
        let sum: f64 = col.iter().sum();
        let flip = if sum != 0.0 {
            sum < 0.0
        } else {
            let mut lead = 0;
            for i in 1..k {
                if col[i].abs() > col[lead].abs() {
                    lead = i;
                }
            }
            col[lead] < 0.0
        };
        if flip {
            col *= -1.0;
        }
    }
    let rotated = x * &q;
    let mut u = rotated;
    for (c, &lam) in lambdas.iter().enumerate() {
        let s = lam.sqrt();
        for v in u.column_mut(c).iter_mut() {
            *v = norm_cdf(*v / s);
        }
    }
    Ok(u)
}

/// Couple independent uniform columns through the one-parameter Fréchet
/// copula: with probability `alpha` a row copies its last column into all
/// the others.
pub fn unif_to_frechet(u: &SampleMatrix, alpha: f64, rng: &mut RngStream) -> Result<SampleMatrix> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!(
            "Frechet alpha must lie in [0,1], got {alpha}"
        )));
    }
    let k = u.ncols();
    let mut out = u.clone();
    for j in 0..u.nrows() {
        if rng.uniform_open() <= alpha {
            let shared = out[(j, k - 1)];
            for c in 0..k - 1 {
                out[(j, c)] = shared;
            }
        }
    }
    Ok(out)
}

fn check_subset(x: &SampleMatrix, subset: &[usize]) -> Result<()> {
    if subset.is_empty() {
        return Err(Error::InvalidParameter("empty marginal subset".into()));
    }
    let mut seen = vec![false; x.ncols()];
    for &c in subset {
        if c >= x.ncols() {
            return Err(Error::IndexOutOfRange(format!(
                "subset column {c} outside 0..{}",
                x.ncols()
            )));
        }
        if seen[c] {
            return Err(Error::InvalidParameter(format!(
                "subset column {c} repeated"
            )));
        }
        seen[c] = true;
    }
    Ok(())
}

/// Re-model the subset with a t-Student copula: each row's subset entries
/// are scaled by `sqrt(nu / chi2(nu))`, then every changed column is pushed
/// through the t CDF and back through the normal quantile so the marginals
/// stay standard normal.
pub fn inject_tstudent(
    x: &SampleMatrix,
    subset: &[usize],
    nu: u32,
    rng: &mut RngStream,
) -> Result<SampleMatrix> {
    check_subset(x, subset)?;
    if nu < 1 {
        return Err(Error::InvalidParameter("t injection needs nu >= 1".into()));
    }
    let nu_f = nu as f64;
    let mut out = x.clone();
    for j in 0..x.nrows() {
        let w = crate::randsource::sample(Dist::ChiSquare { nu: nu_f }, rng)?;
        let scale = (nu_f / w).sqrt();
        for &c in subset {
            out[(j, c)] *= scale;
        }
    }
    for &c in subset {
        for v in out.column_mut(c).iter_mut() {
            *v = norm_quantile(student_t_cdf(nu_f, *v)?.clamp(1e-15, 1.0 - 1e-15))?;
        }
    }
    Ok(out)
}

/// Archimedean structure for [`inject_archimedean`].
#[derive(Clone, Debug)]
pub enum ArchInjection {
    Flat {
        theta: f64,
    },
    /// Children listed as position sets within the subset.
    Nested {
        children: Vec<(Vec<usize>, f64)>,
        theta0: f64,
    },
}

/// Re-model the subset with an Archimedean copula. A fresh standard-normal
/// column is appended before the decorrelating rotation; the most
/// informative (last) uniform column drives the latent variable through the
/// quantile of its law, the remaining columns drive the per-marginal
/// exponential spacings, and results are mapped back to normal marginals.
pub fn inject_archimedean(
    x: &SampleMatrix,
    subset: &[usize],
    family: ArchFamily,
    structure: &ArchInjection,
    rng: &mut RngStream,
) -> Result<SampleMatrix> {
    check_subset(x, subset)?;
    let k = subset.len();
    if k < 2 {
        return Err(Error::InvalidParameter(
            "Archimedean injection needs a subset of at least 2 marginals".into(),
        ));
    }
    let t = x.nrows();

    // subset columns plus one fresh normal column, rotated to uniforms
    let mut xs = SampleMatrix::zeros(t, k + 1);
    for (i, &c) in subset.iter().enumerate() {
        xs.column_mut(i).copy_from(&x.column(c));
    }
    for j in 0..t {
        xs[(j, k)] = rng.standard_normal();
    }
    let u = norm2unif(&xs)?;

    let eps = 1e-12;
    let mut out = x.clone();
    match structure {
        ArchInjection::Flat { theta } => {
            family.check_theta_nvariate(*theta)?;
            let latent = MoLatent::new(family, *theta)?;
            for j in 0..t {
                let drive = u[(j, k)].clamp(eps, 1.0 - eps);
                let v = latent.quantile(drive)?;
                for (i, &c) in subset.iter().enumerate() {
                    let e = -(u[(j, i)].clamp(eps, 1.0 - eps)).ln();
                    let ui = latent.generator(family, *theta, e / v);
                    out[(j, c)] = norm_quantile(ui.clamp(eps, 1.0 - eps))?;
                }
            }
        }
        ArchInjection::Nested { children, theta0 } => {
            if !matches!(family, ArchFamily::Gumbel | ArchFamily::Clayton) {
                return Err(Error::InvalidParameter(format!(
                    "nested injection supported for Gumbel and Clayton, not {}",
                    family.name()
                )));
            }
            family.check_theta_nvariate(*theta0)?;
            let mut in_child = vec![false; k];
            for (members, theta_c) in children {
                family.check_theta_nvariate(*theta_c)?;
                if *theta_c < *theta0 - 1e-12 {
                    return Err(Error::InvalidParameter(format!(
                        "sufficient nesting violated: child theta {theta_c} below parent {theta0}"
                    )));
                }
                for &m in members {
                    if m >= k {
                        return Err(Error::IndexOutOfRange(format!(
                            "child member {m} outside the subset of size {k}"
                        )));
                    }
                    if in_child[m] {
                        return Err(Error::InvalidParameter(format!(
                            "subset position {m} assigned to two children"
                        )));
                    }
                    in_child[m] = true;
                }
            }
            let latent = MoLatent::new(family, *theta0)?;
            let mut xrow = vec![0.0f64; k];
            for j in 0..t {
                let drive = u[(j, k)].clamp(eps, 1.0 - eps);
                let v0 = latent.quantile(drive)?;
                for (i, xv) in xrow.iter_mut().enumerate() {
                    *xv = u[(j, i)].clamp(eps, 1.0 - eps);
                }
                for (members, theta_c) in children {
                    if (*theta_c - *theta0).abs() <= 1e-12 {
                        continue;
                    }
                    let alpha = theta0 / theta_c;
                    match family {
                        ArchFamily::Gumbel => {
                            let s = sample_positive_stable(alpha, rng)?;
                            for &m in members {
                                let e = -xrow[m].ln();
                                xrow[m] = (-(e / s).powf(alpha)).exp();
                            }
                        }
                        ArchFamily::Clayton => {
                            let scale = v0.powf(1.0 / alpha);
                            let mut vc = None;
                            for _ in 0..1_000_000u64 {
                                let s = scale * sample_positive_stable(alpha, rng)?;
                                if rng.uniform_open() <= (-s).exp() {
                                    vc = Some(s);
                                    break;
                                }
                            }
                            let vc = vc.ok_or_else(|| {
                                Error::NoConvergence(
                                    "tilted-stable rejection stalled in nested injection".into(),
                                )
                            })?;
                            for &m in members {
                                let e = -xrow[m].ln();
                                let inner = (1.0 + e / vc).powf(alpha) - 1.0;
                                xrow[m] = (-v0 * inner).exp();
                            }
                        }
                        _ => unreachable!(),
                    }
                }
                for (i, &c) in subset.iter().enumerate() {
                    let e = -xrow[i].ln();
                    let ui = latent.generator(family, *theta0, e / v0);
                    out[(j, c)] = norm_quantile(ui.clamp(eps, 1.0 - eps))?;
                }
            }
        }
    }
    Ok(out)
}

/// Re-model the subset with the one-parameter Fréchet copula whose alpha is
/// the subset's mean pairwise Spearman correlation.
pub fn inject_frechet(x: &SampleMatrix, subset: &[usize], rng: &mut RngStream) -> Result<SampleMatrix> {
    check_subset(x, subset)?;
    let k = subset.len();
    if k < 2 {
        return Err(Error::InvalidParameter(
            "Frechet injection needs a subset of at least 2 marginals".into(),
        ));
    }
    let t = x.nrows();
    let cols: Vec<Vec<f64>> = subset
        .iter()
        .map(|&c| x.column(c).iter().cloned().collect())
        .collect();
    let mut rho_sum = 0.0;
    let mut pairs = 0.0;
    for a in 0..k {
        for b in a + 1..k {
            rho_sum += stats::spearman(&cols[a], &cols[b])?;
            pairs += 1.0;
        }
    }
    let alpha = (rho_sum / pairs).clamp(0.0, 1.0);

    let mut xs = SampleMatrix::zeros(t, k);
    for (i, &c) in subset.iter().enumerate() {
        xs.column_mut(i).copy_from(&x.column(c));
    }
    let u = norm2unif(&xs)?;
    let coupled = unif_to_frechet(&u, alpha, rng)?;
    let mut out = x.clone();
    for (i, &c) in subset.iter().enumerate() {
        for j in 0..t {
            out[(j, c)] = norm_quantile(coupled[(j, i)].clamp(1e-15, 1.0 - 1e-15))?;
        }
    }
    Ok(out)
}

/// Partition found by [`getcors`].
#[derive(Clone, Debug)]
pub struct CorPartition {
    /// Children as index sets into the input matrix.
    pub children: Vec<Vec<usize>>,
    /// Mean within-child correlation per child.
    pub child_rhos: Vec<f64>,
    /// Mean across-children correlation.
    pub rho0: f64,
    /// False when the exhaustive search was replaced by the clustering
    /// fallback (k above the cap).
    pub exhaustive: bool,
}

/// Cap for the exhaustive set-partition search.
pub const GETCORS_EXHAUSTIVE_CAP: usize = 8;

/// Split marginals into groups with higher internal correlation than the
/// across-group level: exhaustive set-partition search for `k <= 8`,
/// average-linkage clustering above.
pub fn getcors(c: &DMatrix<f64>) -> Result<CorPartition> {
    let k = c.nrows();
    if c.ncols() != k || k < 4 {
        return Err(Error::DimensionMismatch(
            "getcors needs a square matrix of size at least 4".into(),
        ));
    }
    if k <= GETCORS_EXHAUSTIVE_CAP {
        getcors_exhaustive(c)
    } else {
        getcors_clustered(c)
    }
}

fn evaluate_partition(c: &DMatrix<f64>, children: &[Vec<usize>]) -> Option<(Vec<f64>, f64, f64)> {
    let k = c.nrows();
    let mut child_of = vec![usize::MAX; k];
    for (ci, members) in children.iter().enumerate() {
        for &m in members {
            child_of[m] = ci;
        }
    }
    let mut rhos = Vec::with_capacity(children.len());
    for members in children {
        let mut s = 0.0;
        let mut cnt = 0.0;
        for (ai, &a) in members.iter().enumerate() {
            for &b in &members[ai + 1..] {
                s += c[(a, b)];
                cnt += 1.0;
            }
        }
        rhos.push(s / cnt);
    }
    // across-children mean (pairs landing in two different children)
    let mut s0 = 0.0;
    let mut cnt0 = 0.0;
    for a in 0..k {
        for b in a + 1..k {
            let (ca, cb) = (child_of[a], child_of[b]);
            if ca != usize::MAX && cb != usize::MAX && ca != cb {
                s0 += c[(a, b)];
                cnt0 += 1.0;
            }
        }
    }
    if cnt0 == 0.0 {
        return None;
    }
    let rho0 = s0 / cnt0;
    if rhos.iter().any(|&r| r <= rho0) {
        return None; // nesting condition unsatisfied
    }
    // Frobenius penalty against the theoretical block matrix
    let mut penalty = 0.0;
    for a in 0..k {
        for b in 0..k {
            let theor = if a == b {
                1.0
            } else if child_of[a] != usize::MAX && child_of[a] == child_of[b] {
                rhos[child_of[a]]
            } else {
                rho0
            };
            penalty += (c[(a, b)] - theor).powi(2);
        }
    }
    Some((rhos, rho0, penalty.sqrt()))
}

fn getcors_exhaustive(c: &DMatrix<f64>) -> Result<CorPartition> {
    let k = c.nrows();
    // enumerate assignments of each marginal to a child or to "parent only"
    // (label 0), children labelled in order of first appearance
    let mut best: Option<(f64, CorPartition)> = None;
    let mut labels = vec![0usize; k];
    fn rec(
        pos: usize,
        max_label: usize,
        labels: &mut Vec<usize>,
        c: &DMatrix<f64>,
        best: &mut Option<(f64, CorPartition)>,
    ) {
        let k = labels.len();
        if pos == k {
            let nchildren = max_label;
            if nchildren < 2 {
                return;
            }
            let mut children: Vec<Vec<usize>> = vec![Vec::new(); nchildren];
            for (i, &l) in labels.iter().enumerate() {
                if l > 0 {
                    children[l - 1].push(i);
                }
            }
            if children.iter().any(|ch| ch.len() < 2) {
                return;
            }
            if let Some((rhos, rho0, penalty)) = evaluate_partition(c, &children) {
                let better = match best {
                    Some((p, _)) => penalty < *p,
                    None => true,
                };
                if better {
                    *best = Some((
                        penalty,
                        CorPartition {
                            children,
                            child_rhos: rhos,
                            rho0,
                            exhaustive: true,
                        },
                    ));
                }
            }
            return;
        }
        // restricted growth: label 0 = parent-only, labels 1..=max_label+1
        for l in 0..=max_label + 1 {
            labels[pos] = l;
            rec(pos + 1, max_label.max(l), labels, c, best);
        }
        labels[pos] = 0;
    }
    rec(0, 0, &mut labels, c, &mut best);
    best.map(|(_, p)| p).ok_or_else(|| {
        Error::NoSolution(
            "no marginal partition satisfies the nesting condition rho_child > rho0".into(),
        )
    })
}

fn getcors_clustered(c: &DMatrix<f64>) -> Result<CorPartition> {
    let k = c.nrows();
    // average-linkage agglomeration on distance 1 - correlation; every
    // dendrogram level is scored with the same penalty as the exhaustive
    // search
    let mut clusters: Vec<Vec<usize>> = (0..k).map(|i| vec![i]).collect();
    let mut best: Option<(f64, CorPartition)> = None;
    let consider = |clusters: &[Vec<usize>], best: &mut Option<(f64, CorPartition)>| {
        let children: Vec<Vec<usize>> = clusters
            .iter()
            .filter(|cl| cl.len() >= 2)
            .cloned()
            .collect();
        if children.len() < 2 {
            return;
        }
        if let Some((rhos, rho0, penalty)) = evaluate_partition(c, &children) {
            let better = match best {
                Some((p, _)) => penalty < *p,
                None => true,
            };
            if better {
                *best = Some((
                    penalty,
                    CorPartition {
                        children,
                        child_rhos: rhos,
                        rho0,
                        exhaustive: false,
                    },
                ));
            }
        }
    };
    while clusters.len() > 2 {
        // merge the pair with the highest average correlation
        let mut arg = (0usize, 1usize);
        let mut best_link = f64::NEG_INFINITY;
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let mut s = 0.0;
                for &i in &clusters[a] {
                    for &j in &clusters[b] {
                        s += c[(i, j)];
                    }
                }
                let link = s / (clusters[a].len() * clusters[b].len()) as f64;
                if link > best_link {
                    best_link = link;
                    arg = (a, b);
                }
            }
        }
        let merged = clusters.remove(arg.1);
        clusters[arg.0].extend(merged);
        clusters[arg.0].sort_unstable();
        consider(&clusters, &mut best);
    }
    best.map(|(_, p)| p).ok_or_else(|| {
        Error::NoSolution(
            "clustering fallback found no partition with rho_child > rho0".into(),
        )
    })
}

/// Relative covariance change `|cov(X) - cov(X')|_F / |cov(X)|_F`.
pub fn cov_change_delta(x: &SampleMatrix, xp: &SampleMatrix) -> Result<f64> {
    if x.shape() != xp.shape() {
        return Err(Error::DimensionMismatch(
            "covariance change needs equally shaped matrices".into(),
        ));
    }
    let ca = stats::covariance(x);
    let cb = stats::covariance(xp);
    let diff = &ca - &cb;
    Ok(diff.norm() / ca.norm())
}

/// Baseline that fragments the covariance: the subset is replaced by a
/// fresh multivariate normal draw with the subset's own empirical
/// correlation, independent of the remaining columns.
pub fn naive_resample_subset(
    x: &SampleMatrix,
    subset: &[usize],
    rng: &mut RngStream,
) -> Result<SampleMatrix> {
    check_subset(x, subset)?;
    let k = subset.len();
    let mut xs = SampleMatrix::zeros(x.nrows(), k);
    for (i, &c) in subset.iter().enumerate() {
        xs.column_mut(i).copy_from(&x.column(c));
    }
    let r_sub = stats::correlation(&xs)?;
    let fresh = crate::randsource::mvnormal_sample(x.nrows(), &r_sub, rng)?;
    let mut out = x.clone();
    for (i, &c) in subset.iter().enumerate() {
        out.column_mut(c).copy_from(&fresh.column(i));
    }
    Ok(out)
}
