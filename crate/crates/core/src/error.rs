// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised by model construction and the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("site {site} out of range 1..={n_sites}")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("matrix of shape {rows}x{cols} is not a {n_sites}-site operator")]
    NotChainOperator {
        rows: usize,
        cols: usize,
        n_sites: usize,
    },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("negative eigenvalue {value:e} below tolerance")]
    NegativeEigenvalue { value: f64 },

    #[error("matrix is singular on its support (eigenvalue {value:e})")]
    Singular { value: f64 },

    #[error("not a density matrix: {0}")]
    NotDensityMatrix(String),

    #[error("state is not faithful (min eigenvalue {min_eigenvalue:e})")]
    NotFaithful { min_eigenvalue: f64 },

    #[error("invalid inverse temperature {0}")]
    InvalidBeta(f64),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} requires n_sites <= {max}, got {n_sites}")]
    SizeGuard {
        what: &'static str,
        n_sites: usize,
        max: usize,
    },

    #[error("closed form requires equal bath temperatures")]
    UnequalTemperatures,

    #[error("closed form not available for n_sites = {0}")]
    UnsupportedSize(usize),

    #[error("GNS basis degenerates at beta = {0}")]
    DegenerateGns(f64),

    #[error("numerical kernel is empty")]
    EmptyKernel,

    #[error("linear algebra failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
