//! Generation, transformation and analysis of non-Gaussian multivariate data.
//!
//! The crate bundles four groups of tools that are usually needed together
//! when working with data whose joint distribution departs from the
//! multivariate Gaussian:
//!
//! * copula samplers (Gaussian, t-Student, Fréchet, Archimedean and nested
//!   Archimedean families) together with dependence-measure conversions,
//! * estimators of multivariate moment and cumulant tensors of order 1–6,
//!   stored in a compact block scheme for super-symmetric tensors,
//! * cumulant-based feature selection (MEV, norm and determinant targets)
//!   and feature extraction (HOSVD factors, ALS),
//! * univariate series analysis: multifractal DFA Hurst estimation and
//!   cumulant-style multi-lag autocorrelations.
//!
//! Data matrices follow the `t × n` convention: one row per realisation,
//! one column per marginal.

pub mod cormat;
pub mod copulas;
pub mod cumulants;
pub mod dimreduce;
mod error;
pub mod io;
pub mod randsource;
pub mod special;
pub mod stats;
pub mod subsetinject;
pub mod symtensor;
pub mod tseries;

pub use error::{Error, Result};

/// Realisation matrix: `t` rows (samples) by `n` columns (marginals).
pub type SampleMatrix = nalgebra::DMatrix<f64>;
