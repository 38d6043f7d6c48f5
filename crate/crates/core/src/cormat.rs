//! Random correlation-matrix generators used to parameterize experiments.

use nalgebra::DMatrix;

use crate::randsource::RngStream;
use crate::{Error, Result};

/// Symmetric positive definite matrix with unit diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrMatrix {
    inner: DMatrix<f64>,
}

impl CorrMatrix {
    /// Validates symmetry, the unit diagonal, off-diagonal magnitudes below
    /// one and positive definiteness (minimum eigenvalue above -1e-10).
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n || n < 1 {
            return Err(Error::DimensionMismatch(
                "correlation matrix must be square and non-empty".into(),
            ));
        }
        for i in 0..n {
            if (m[(i, i)] - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidParameter(format!(
                    "diagonal entry ({i},{i}) = {} is not 1",
                    m[(i, i)]
                )));
            }
            for j in 0..i {
                if (m[(i, j)] - m[(j, i)]).abs() > 1e-10 {
                    return Err(Error::InvalidParameter(format!(
                        "asymmetric entries at ({i},{j})"
                    )));
                }
                if m[(i, j)].abs() >= 1.0 {
                    return Err(Error::InvalidParameter(format!(
                        "off-diagonal entry ({i},{j}) = {} outside (-1,1)",
                        m[(i, j)]
                    )));
                }
            }
        }
        let eig = nalgebra::SymmetricEigen::new(m.clone());
        let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if min <= -1e-10 {
            return Err(Error::InvalidParameter(format!(
                "matrix is not positive definite (min eigenvalue {min})"
            )));
        }
        Ok(Self { inner: m })
    }

    pub fn n(&self) -> usize {
        self.inner.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.inner
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.inner
    }
}

/// Generation method for [`cormatgen`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CorMethod {
    /// All off-diagonal entries equal to `alpha`, `0 < alpha < 1`.
    Constant { alpha: f64 },
    /// Constant matrix plus symmetric noise of magnitude `eps`
    /// (defaults to `(1 - alpha) / 2` when `None`).
    ConstantNoised { alpha: f64, eps: Option<f64> },
    /// Normalized Gram matrix of a uniform random matrix; yields rather
    /// high positive correlations.
    Random,
    /// `r[i][j] = rho^|i-j|`, `0 < rho < 1`.
    Toeplitz { rho: f64 },
}

/// Random (or deterministic) correlation matrix of size `n`.
pub fn cormatgen(method: CorMethod, n: usize, rng: &mut RngStream) -> Result<CorrMatrix> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "correlation matrix generation needs n >= 2, got {n}"
        )));
    }
    match method {
        CorMethod::Constant { alpha } => {
            check_unit_open(alpha, "alpha")?;
            let m = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { alpha });
            CorrMatrix::new(m)
        }
        CorMethod::ConstantNoised { alpha, eps } => {
            check_unit_open(alpha, "alpha")?;
            let eps = eps.unwrap_or((1.0 - alpha) / 2.0);
            if eps < 0.0 || alpha + eps >= 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "noise amplitude {eps} incompatible with alpha {alpha}"
                )));
            }
            let mut m = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { alpha });
            for i in 0..n {
                for j in 0..i {
                    let noise = eps * (2.0 * rng.uniform_open() - 1.0);
                    m[(i, j)] += noise;
                    m[(j, i)] += noise;
                }
            }
            // noise may push the spectrum below zero; clip and re-normalize
            let eig = nalgebra::SymmetricEigen::new(m.clone());
            if eig.eigenvalues.iter().any(|&ev| ev < 1e-10) {
                let vals = eig.eigenvalues.map(|ev| ev.max(1e-6));
                let mut fixed = &eig.eigenvectors
                    * DMatrix::from_diagonal(&vals)
                    * eig.eigenvectors.transpose();
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            fixed[(i, j)] /= (fixed[(i, i)] * fixed[(j, j)]).sqrt();
                        }
                    }
                }
                for i in 0..n {
                    fixed[(i, i)] = 1.0;
                }
                m = fixed;
            }
            CorrMatrix::new(m)
        }
        CorMethod::Random => {
            let a = DMatrix::from_fn(n, n, |_, _| rng.uniform_open());
            let g = &a * a.transpose();
            let m = DMatrix::from_fn(n, n, |i, j| g[(i, j)] / (g[(i, i)] * g[(j, j)]).sqrt());
            CorrMatrix::new(m)
        }
        CorMethod::Toeplitz { rho } => {
            check_unit_open(rho, "rho")?;
            let m = DMatrix::from_fn(n, n, |i, j| rho.powi((i as i32 - j as i32).abs()));
            CorrMatrix::new(m)
        }
    }
}

fn check_unit_open(v: f64, name: &str) -> Result<()> {
    if !(0.0 < v && v < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "{name} must lie in (0,1), got {v}"
        )));
    }
    Ok(())
}
