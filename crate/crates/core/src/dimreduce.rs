//! Feature selection (MEV, norm and determinant targets with iterative
//! elimination) and feature extraction (HOSVD factors, ALS) on cumulant
//! tensors.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::cumulants::CumulantSet;
use crate::symtensor::BlockSymTensor;
use crate::{Error, Result};

fn order2_matrix(c2: &BlockSymTensor) -> Result<DMatrix<f64>> {
    if c2.order() != 2 {
        return Err(Error::InvalidParameter(
            "expected an order-2 cumulant".into(),
        ));
    }
    let n = c2.dim();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = c2.get(&[i, j])?;
        }
    }
    Ok(m)
}

/// MEV target: determinant of the covariance (hyper-ellipsoid volume).
pub fn mev_target(c2: &BlockSymTensor) -> Result<f64> {
    Ok(order2_matrix(c2)?.determinant())
}

/// Determinant-based non-Gaussianity target
/// `det(contract_self(C_d)) / det(C_2)^d`. Falls back to log-determinant
/// arithmetic when `det(C_2)` underflows.
pub fn hdet_target(c2: &BlockSymTensor, cd: &BlockSymTensor) -> Result<f64> {
    if cd.dim() != c2.dim() {
        return Err(Error::DimensionMismatch(
            "cumulants of different dimension".into(),
        ));
    }
    let m2 = order2_matrix(c2)?;
    let b = cd.contract_self()?;
    let d = cd.order() as f64;
    let det2 = m2.determinant();
    if det2 == 0.0 {
        return Err(Error::Degenerate("det(C_2) is zero".into()));
    }
    if det2.abs() < 1e-300 {
        // log-space evaluation via Cholesky of both Gram matrices
        let ln_num = sym_log_det(&b)?;
        let ln_den = sym_log_det(&m2)?;
        return Ok((ln_num - d * ln_den).exp());
    }
    Ok(b.determinant() / det2.powf(d))
}

fn sym_log_det(m: &DMatrix<f64>) -> Result<f64> {
    let chol = nalgebra::Cholesky::new(m.clone())
        .ok_or_else(|| Error::Degenerate("log-determinant of a non-PD matrix".into()))?;
    Ok(2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>())
}

/// Target function for [`select_features`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SelectionTarget {
    /// Covariance determinant.
    Mev,
    /// `|C_d| / |C_2|^{d/2}`.
    HNorm { d: usize },
    /// `det(sum C_d C_d) / det(C_2)^d`.
    HDet { d: usize },
}

impl SelectionTarget {
    fn needed_order(&self) -> usize {
        match self {
            SelectionTarget::Mev => 2,
            SelectionTarget::HNorm { d } | SelectionTarget::HDet { d } => *d,
        }
    }

    fn evaluate(&self, c2: &BlockSymTensor, cd: Option<&BlockSymTensor>) -> Result<f64> {
        match self {
            SelectionTarget::Mev => mev_target(c2),
            SelectionTarget::HNorm { .. } => crate::cumulants::h_norm(c2, cd.unwrap()),
            SelectionTarget::HDet { .. } => hdet_target(c2, cd.unwrap()),
        }
    }
}

/// Outcome of the iterative elimination.
#[derive(Clone, Debug)]
pub struct SelectionResult {
    /// Retained marginals in the original numbering, ascending.
    pub retained: Vec<usize>,
    /// One entry per elimination round: removed original index and the
    /// target value attained after its removal.
    pub trace: Vec<(usize, f64)>,
}

/// Iteratively drop the marginal whose removal maximizes the target until
/// `s` marginals remain.
pub fn select_features(
    set: &CumulantSet,
    target: SelectionTarget,
    s: usize,
) -> Result<SelectionResult> {
    let n = set.source_dim();
    if s >= n {
        if s == n {
            return Ok(SelectionResult {
                retained: (0..n).collect(),
                trace: Vec::new(),
            });
        }
        return Err(Error::InvalidParameter(format!(
            "cannot retain {s} of {n} marginals"
        )));
    }
    let d = target.needed_order();
    let mut c2 = set
        .order(2)
        .ok_or_else(|| Error::InvalidParameter("selection needs the order-2 cumulant".into()))?
        .clone();
    let mut cd = if d > 2 {
        Some(
            set.order(d)
                .ok_or_else(|| {
                    Error::InvalidParameter(format!("selection target needs order {d}"))
                })?
                .clone(),
        )
    } else {
        None
    };

    let mut alive: Vec<usize> = (0..n).collect();
    let mut trace = Vec::new();
    while alive.len() > s {
        let k = alive.len();
        let scores: Vec<Result<f64>> = (0..k)
            .into_par_iter()
            .map(|i| {
                let c2_cut = c2.fiber_cut(i)?;
                let cd_cut = match &cd {
                    Some(t) => Some(t.fiber_cut(i)?),
                    None => None,
                };
                target.evaluate(&c2_cut, cd_cut.as_ref())
            })
            .collect();
        // alive is ascending, so keeping the first of near-tied scores
        // removes the lower original index (deterministic runs)
        let mut remove = 0usize;
        let mut value = f64::NEG_INFINITY;
        for (i, score) in scores.into_iter().enumerate() {
            let score = score?;
            if score > value + 1e-12 {
                remove = i;
                value = score;
            }
        }
        c2 = c2.fiber_cut(remove)?;
        if let Some(t) = cd.take() {
            cd = Some(t.fiber_cut(remove)?);
        }
        trace.push((alive[remove], value));
        alive.remove(remove);
    }
    Ok(SelectionResult {
        retained: alive,
        trace,
    })
}

/// Orthonormal factor of the higher-order SVD of a super-symmetric tensor:
/// eigenvectors of its single-mode Gram matrix with eigenvalues sorted
/// descending.
#[derive(Clone, Debug)]
pub struct HosvdFactor {
    /// `n x n` orthonormal matrix, columns ordered by eigenvalue.
    pub factor: DMatrix<f64>,
    /// Non-increasing eigenvalues of the Gram matrix.
    pub eigenvalues: Vec<f64>,
}

/// HOSVD factor of `C_d` for `d >= 2`.
pub fn hosvd_factor(cd: &BlockSymTensor) -> Result<HosvdFactor> {
    let b = cd.contract_self()?;
    let n = b.nrows();
    let eig = nalgebra::SymmetricEigen::new(b.clone());
    if eig.eigenvalues.iter().any(|&ev| ev < -1e-8) {
        return Err(Error::Degenerate(format!(
            "Gram matrix numerically indefinite (min eigenvalue {})",
            eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let mut factor = DMatrix::zeros(n, n);
    let mut eigenvalues = Vec::with_capacity(n);
    for (j, &src) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(src);
        // deterministic sign: largest-magnitude entry positive
        let mut lead = 0;
        for i in 1..n {
            if col[i].abs() > col[lead].abs() {
                lead = i;
            }
        }
        let sign = if col[lead] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            factor[(i, j)] = sign * col[i];
        }
        eigenvalues.push(eig.eigenvalues[src].max(0.0));
    }
    // reconstruction sanity
    let recon =
        &factor * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(eigenvalues.clone()))
            * factor.transpose();
    if (recon - &b).norm() > 1e-8 * (1.0 + b.norm()) {
        return Err(Error::Degenerate("eigen reconstruction failed".into()));
    }
    Ok(HosvdFactor {
        factor,
        eigenvalues,
    })
}

// --- dense helpers for the ALS contractions ---

// Transform every mode of a dense row-major tensor by `m` (rows index the
// new mode length); `skip_first` leaves mode 1 untouched.
fn dense_multi_mode(
    dense: &[f64],
    d: usize,
    n: usize,
    m: &DMatrix<f64>,
    skip_first: bool,
) -> Vec<f64> {
    let np = m.nrows();
    let mut cur = dense.to_vec();
    for mode in 0..d {
        let transform = !(skip_first && mode == 0);
        let front = n; // untransformed modes stay in front
        let rest = cur.len() / front;
        let out_len = if transform { np } else { front };
        let mut next = vec![0.0; out_len * rest];
        if transform {
            for (i, row) in next.chunks_mut(rest).enumerate() {
                for j in 0..front {
                    let w = m[(i, j)];
                    if w == 0.0 {
                        continue;
                    }
                    let src = &cur[j * rest..(j + 1) * rest];
                    for (o, &s) in row.iter_mut().zip(src) {
                        *o += w * s;
                    }
                }
            }
        } else {
            next.copy_from_slice(&cur);
        }
        // rotate front mode to the back
        let mut rotated = vec![0.0; next.len()];
        for i in 0..out_len {
            for r in 0..rest {
                rotated[r * out_len + i] = next[i * rest + r];
            }
        }
        cur = rotated;
    }
    cur
}

/// Result of the alternating factor iteration.
#[derive(Clone, Debug)]
pub struct AlsResult {
    /// `n x n'` orthonormal factor.
    pub factor: DMatrix<f64>,
    /// Objective value after each iteration (non-decreasing when the
    /// ascent property holds; the caller may inspect violations).
    pub xi_trace: Vec<f64>,
    pub converged: bool,
}

/// Weighted multi-cumulant objective
/// `xi_d(A) = sum_{k=2..d} |A^T x_{1..k} C_k| / k!`.
pub fn als_xi(set: &CumulantSet, d: usize, a: &DMatrix<f64>) -> Result<f64> {
    let mut xi = 0.0;
    for k in 2..=d {
        let ck = set
            .order(k)
            .ok_or_else(|| Error::InvalidParameter(format!("objective needs order {k}")))?;
        let core = dense_multi_mode(&ck.to_dense(), k, ck.dim(), &a.transpose(), false);
        let norm: f64 = core.iter().map(|v| v * v).sum::<f64>().sqrt();
        let fact: f64 = (1..=k).map(|v| v as f64).product();
        xi += norm / fact;
    }
    Ok(xi)
}

/// Alternating least squares factor over cumulants of orders 2..=d: each
/// step contracts every cumulant in all modes but the first with the
/// current factor, accumulates the weighted Gram matrices and
/// re-diagonalizes. The sign of the last column is flipped when needed to
/// keep `det = +1` on square factors, making runs deterministic.
pub fn als_factor(
    set: &CumulantSet,
    d: usize,
    n_prime: usize,
    max_iters: usize,
    tol: f64,
) -> Result<AlsResult> {
    let n = set.source_dim();
    if !(2..=set.max_order()).contains(&d) {
        return Err(Error::InvalidParameter(format!(
            "objective order {d} outside the estimated range"
        )));
    }
    if n_prime == 0 || n_prime > n {
        return Err(Error::InvalidParameter(format!(
            "factor width must lie in 1..={n}, got {n_prime}"
        )));
    }
    let dense: Vec<(usize, Vec<f64>)> = (2..=d)
        .map(|k| (k, set.order(k).unwrap().to_dense()))
        .collect();

    let factorial = |k: usize| -> f64 { (1..=k).map(|v| v as f64).product() };

    // first step: plain Gram matrices, no contraction with a factor
    let mut t_xi = DMatrix::zeros(n, n);
    for (k, dk) in &dense {
        let rest = dk.len() / n;
        let mut gram = DMatrix::zeros(n, n);
        for j1 in 0..n {
            for j2 in j1..n {
                let dot: f64 = (0..rest)
                    .map(|r| dk[j1 * rest + r] * dk[j2 * rest + r])
                    .sum();
                gram[(j1, j2)] = dot;
                gram[(j2, j1)] = dot;
            }
        }
        t_xi += gram / factorial(*k);
    }

    let eigen_factor = |t_xi: &DMatrix<f64>| -> Result<DMatrix<f64>> {
        let eig = nalgebra::SymmetricEigen::new(t_xi.clone());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
        let mut a = DMatrix::zeros(n, n);
        for (j, &src) in order.iter().enumerate() {
            let col = eig.eigenvectors.column(src);
            let mut lead = 0;
            for i in 1..n {
                if col[i].abs() > col[lead].abs() {
                    lead = i;
                }
            }
            let sign = if col[lead] < 0.0 { -1.0 } else { 1.0 };
            for i in 0..n {
                a[(i, j)] = sign * col[i];
            }
        }
        if a.determinant() < 0.0 {
            let last = n - 1;
            for i in 0..n {
                a[(i, last)] = -a[(i, last)];
            }
        }
        Ok(a)
    };

    let mut a_full = eigen_factor(&t_xi)?;
    let mut a_prime = a_full.columns(0, n_prime).into_owned();
    let mut xi_trace = vec![als_xi(set, d, &a_prime)?];
    let mut converged = false;

    for _ in 0..max_iters {
        let mut t_xi = DMatrix::zeros(n, n);
        for (k, dk) in &dense {
            // contract modes 2..k with the current factor
            let v = dense_multi_mode(dk, *k, n, &a_prime.transpose(), true);
            let rest = v.len() / n;
            let mut gram = DMatrix::zeros(n, n);
            for j1 in 0..n {
                for j2 in j1..n {
                    let dot: f64 = (0..rest)
                        .map(|r| v[j1 * rest + r] * v[j2 * rest + r])
                        .sum();
                    gram[(j1, j2)] = dot;
                    gram[(j2, j1)] = dot;
                }
            }
            t_xi += gram / factorial(*k);
        }
        a_full = eigen_factor(&t_xi)?;
        a_prime = a_full.columns(0, n_prime).into_owned();
        let xi = als_xi(set, d, &a_prime)?;
        let gain = xi - xi_trace.last().unwrap();
        xi_trace.push(xi);
        if gain.abs() < tol {
            converged = true;
            break;
        }
    }
    Ok(AlsResult {
        factor: a_prime,
        xi_trace,
        converged,
    })
}

/// Share of the first `k` coordinates in the last factor column:
/// `sqrt(sum_{i<k} a[i,last]^2) / |a[.,last]|`.
pub fn nongauss_weight(a: &DMatrix<f64>, k: usize) -> Result<f64> {
    if a.ncols() == 0 {
        return Err(Error::DimensionMismatch("factor has no columns".into()));
    }
    if k >= a.nrows() {
        return Err(Error::InvalidParameter(format!(
            "prefix length {k} must be below the row count {}",
            a.nrows()
        )));
    }
    let last = a.column(a.ncols() - 1);
    let norm = last.norm();
    if norm == 0.0 {
        return Err(Error::Degenerate("zero last factor column".into()));
    }
    let head: f64 = (0..k).map(|i| last[i] * last[i]).sum();
    Ok(head.sqrt() / norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cumulants::cumulant_tensors;
    use crate::randsource::RngStream;
    use approx::assert_relative_eq;

    fn random_sym(n: usize, d: usize, seed: u64) -> BlockSymTensor {
        let mut rng = RngStream::new(seed, 0);
        let len = n.pow(d as u32);
        let raw: Vec<f64> = (0..len).map(|_| rng.uniform_open() - 0.5).collect();
        BlockSymTensor::from_fn(n, d, 2.min(n), |idx| {
            let mut sorted = idx.to_vec();
            sorted.sort_unstable();
            raw[sorted.iter().fold(0, |acc, &i| acc * n + i)]
        })
        .unwrap()
    }

    #[test]
    fn mev_basics() {
        let id = BlockSymTensor::new_identity(3, 2).unwrap();
        assert_relative_eq!(mev_target(&id).unwrap(), 1.0, epsilon = 1e-14);

        // duplicated marginal: zero determinant
        let mut rng = RngStream::new(1, 0);
        let t = 500;
        let mut x = nalgebra::DMatrix::from_fn(t, 3, |_, _| rng.standard_normal());
        let dup = x.column(0).into_owned();
        x.column_mut(2).copy_from(&dup);
        let set = cumulant_tensors(&x, 2).unwrap();
        assert!(mev_target(set.order(2).unwrap()).unwrap().abs() < 1e-10);

        // eigen-product oracle on a random SPD matrix
        let m = nalgebra::DMatrix::from_fn(4, 4, |_, _| rng.uniform_open() - 0.5);
        let spd = &m * m.transpose() + nalgebra::DMatrix::identity(4, 4);
        let c2 = BlockSymTensor::from_fn(4, 2, 4, |idx| spd[(idx[0], idx[1])]).unwrap();
        let eig = nalgebra::SymmetricEigen::new(spd.clone());
        let prod: f64 = eig.eigenvalues.iter().product();
        assert_relative_eq!(mev_target(&c2).unwrap(), prod, max_relative = 1e-10);
    }

    #[test]
    fn hdet_univariate_reduces_to_squared_moments_ratio() {
        let mut rng = RngStream::new(2, 0);
        let t = 100_000;
        let x = nalgebra::DMatrix::from_fn(t, 1, |_, _| rng.exponential1());
        let set = cumulant_tensors(&x, 3).unwrap();
        let h = hdet_target(set.order(2).unwrap(), set.order(3).unwrap()).unwrap();
        let c2 = set.order(2).unwrap().get(&[0, 0]).unwrap();
        let c3 = set.order(3).unwrap().get(&[0, 0, 0]).unwrap();
        assert_relative_eq!(h, c3 * c3 / c2.powi(3), max_relative = 1e-10);
        // exponential skewness is 2, so h ~ 4
        assert!((h - 4.0).abs() < 0.5, "h = {h}");
    }

    #[test]
    fn hdet_zero_tensor_and_oracle() {
        let c2 = BlockSymTensor::new_identity(3, 2).unwrap();
        let zero = BlockSymTensor::zeros(3, 3, 2).unwrap();
        assert_eq!(hdet_target(&c2, &zero).unwrap(), 0.0);

        let cd = random_sym(3, 3, 3);
        let b = cd.contract_self().unwrap();
        let want = b.determinant();
        assert_relative_eq!(hdet_target(&c2, &cd).unwrap(), want, max_relative = 1e-10);
    }

    #[test]
    fn selection_no_iterations_returns_everything() {
        let mut rng = RngStream::new(4, 0);
        let x = nalgebra::DMatrix::from_fn(200, 5, |_, _| rng.standard_normal());
        let set = cumulant_tensors(&x, 4).unwrap();
        let sel = select_features(&set, SelectionTarget::Mev, 5).unwrap();
        assert_eq!(sel.retained, vec![0, 1, 2, 3, 4]);
        assert!(sel.trace.is_empty());
    }

    #[test]
    fn selection_removes_duplicate_under_mev() {
        let mut rng = RngStream::new(5, 0);
        let t = 2000;
        let mut x = nalgebra::DMatrix::from_fn(t, 4, |_, _| rng.standard_normal());
        let dup = x.column(1).into_owned();
        x.column_mut(3).copy_from(&dup);
        let set = cumulant_tensors(&x, 2).unwrap();
        let sel = select_features(&set, SelectionTarget::Mev, 3).unwrap();
        let removed = sel.trace[0].0;
        assert!(removed == 1 || removed == 3, "removed {removed}");
    }

    #[test]
    fn selection_chain_is_decreasing_subsets() {
        let mut rng = RngStream::new(6, 0);
        let x = nalgebra::DMatrix::from_fn(500, 6, |_, _| rng.uniform_open() - 0.5);
        let set = cumulant_tensors(&x, 4).unwrap();
        let sel = select_features(&set, SelectionTarget::HDet { d: 4 }, 2).unwrap();
        assert_eq!(sel.trace.len(), 4);
        let mut current: Vec<usize> = (0..6).collect();
        for (removed, _) in &sel.trace {
            assert!(current.contains(removed));
            current.retain(|&c| c != *removed);
        }
        assert_eq!(current, sel.retained);
    }

    #[test]
    fn hosvd_factor_orthonormal_descending() {
        let cd = random_sym(4, 3, 7);
        let h = hosvd_factor(&cd).unwrap();
        let gram = h.factor.transpose() * &h.factor;
        assert!((gram - nalgebra::DMatrix::identity(4, 4)).norm() < 1e-10);
        for w in h.eigenvalues.windows(2) {
            assert!(w[0] >= w[1] - 1e-12);
        }
        // eigen oracle: same spectrum as the dense Gram matrix
        let b = cd.contract_self().unwrap();
        let eig = nalgebra::SymmetricEigen::new(b);
        let mut want: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
        want.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (got, want) in h.eigenvalues.iter().zip(&want) {
            assert_relative_eq!(got, want, max_relative = 1e-10);
        }
    }

    #[test]
    fn hosvd_diagonal_tensor_gives_sorting_permutation() {
        // diagonal order-3 tensor with distinct magnitudes
        let diag = [0.5, 3.0, 1.5];
        let cd = BlockSymTensor::from_fn(3, 3, 2, |idx| {
            if idx[0] == idx[1] && idx[1] == idx[2] {
                diag[idx[0]]
            } else {
                0.0
            }
        })
        .unwrap();
        let h = hosvd_factor(&cd).unwrap();
        // columns must be signed unit vectors ordering the diagonal 3, 1.5, 0.5
        let expect_rows = [1usize, 2, 0];
        for (j, &row) in expect_rows.iter().enumerate() {
            assert_relative_eq!(h.factor[(row, j)].abs(), 1.0, epsilon = 1e-10);
        }
        // core tensor has a diagonal Gram matrix
        let core = cd.mode_multiply(&h.factor.transpose()).unwrap();
        let bc = core.contract_self().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!(bc[(i, j)].abs() < 1e-8, "off-diagonal ({i},{j}) = {}", bc[(i, j)]);
                }
            }
        }
    }

    #[test]
    fn als_order_two_matches_covariance_svd() {
        let mut rng = RngStream::new(8, 0);
        let cm = crate::cormat::cormatgen(crate::cormat::CorMethod::Random, 5, &mut rng).unwrap();
        let x = crate::randsource::mvnormal_sample(20_000, cm.as_matrix(), &mut rng).unwrap();
        let set = cumulant_tensors(&x, 2).unwrap();
        let res = als_factor(&set, 2, 2, 20, 1e-12).unwrap();
        // covariance eigenvectors, descending
        let c2 = set.order(2).unwrap();
        let m = order2_matrix(c2).unwrap();
        let eig = nalgebra::SymmetricEigen::new(m);
        let mut order: Vec<usize> = (0..5).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
        let top = nalgebra::DMatrix::from_fn(5, 2, |i, j| eig.eigenvectors[(i, order[j])]);
        // principal angles: singular values of top^T * factor must be ~1
        let svd = (top.transpose() * &res.factor).svd(false, false);
        for sv in svd.singular_values.iter() {
            assert!((sv - 1.0).abs() < 1e-6, "principal angle cos {sv}");
        }
    }

    #[test]
    fn als_objective_is_monotone() {
        let mut rng = RngStream::new(9, 0);
        let x = nalgebra::DMatrix::from_fn(5_000, 4, |_, _| rng.exponential1());
        let set = cumulant_tensors(&x, 4).unwrap();
        let res = als_factor(&set, 4, 2, 30, 1e-10).unwrap();
        for w in res.xi_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-8, "xi decreased: {:?}", res.xi_trace);
        }
    }

    #[test]
    fn als_full_width_first_iteration_is_hosvd_of_txi() {
        let mut rng = RngStream::new(10, 0);
        let x = nalgebra::DMatrix::from_fn(3_000, 3, |_, _| rng.uniform_open());
        let set = cumulant_tensors(&x, 3).unwrap();
        let res = als_factor(&set, 3, 3, 1, 1e-15).unwrap();
        // with n = n' the factor is orthonormal and xi equals the
        // unreduced objective
        let gram = res.factor.transpose() * &res.factor;
        assert!((gram - nalgebra::DMatrix::identity(3, 3)).norm() < 1e-10);
        let xi_full = als_xi(&set, 3, &res.factor).unwrap();
        let c2n = set.order(2).unwrap().frobenius_norm();
        let c3n = set.order(3).unwrap().frobenius_norm();
        assert_relative_eq!(xi_full, c2n / 2.0 + c3n / 6.0, max_relative = 1e-8);
    }

    #[test]
    fn als_full_width_iteration_is_stationary() {
        // with a square orthonormal factor the mode-2..k contraction drops
        // out of the Gram matrices, so iterating must not move the objective
        let mut rng = RngStream::new(11, 0);
        let x = nalgebra::DMatrix::from_fn(4_000, 4, |_, _| rng.exponential1());
        let set = cumulant_tensors(&x, 4).unwrap();
        let res = als_factor(&set, 4, 4, 5, 0.0).unwrap();
        let first = res.xi_trace[0];
        for xi in &res.xi_trace {
            assert!((xi - first).abs() < 1e-8 * first, "trace {:?}", res.xi_trace);
        }
    }

    #[test]
    fn weight_examples() {
        // last column = e3 (third basis vector), k = 2 -> 0
        let a = nalgebra::DMatrix::from_columns(&[
            nalgebra::DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0, 0.0]),
            nalgebra::DVector::from_vec(vec![0.0, 0.0, 1.0, 0.0, 0.0]),
        ]);
        assert_eq!(nongauss_weight(&a, 2).unwrap(), 0.0);
        // uniform weights, n = 5, k = 2 -> sqrt(2/5)
        let u = nalgebra::DMatrix::from_element(5, 1, 1.0);
        assert_relative_eq!(
            nongauss_weight(&u, 2).unwrap(),
            (2.0f64 / 5.0).sqrt(),
            max_relative = 1e-14
        );
        let zero = nalgebra::DMatrix::from_element(5, 1, 0.0);
        assert!(nongauss_weight(&zero, 2).is_err());
    }
}
