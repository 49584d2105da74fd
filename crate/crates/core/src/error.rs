//! Error type shared by all modules of the crate.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is not orthogonal: ||R^T R - I||_F = {defect:e}")]
    NotOrthogonal { defect: f64 },

    #[error("special rotation requires det > 0, got {det}")]
    NegativeDeterminant { det: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("rotation angle at pi: principal logarithm is not unique")]
    AngleAtPi,

    #[error("matrix is numerically rank deficient (sigma_min/sigma_max = {ratio:e})")]
    RankDeficient { ratio: f64 },

    #[error("Cartan decomposition at the boundary of the injectivity radius (theta ~ pi)")]
    BoundaryOfInjectivity,

    #[error("decomposition objective {objective:e} above tolerance at iteration cap")]
    NoConvergence { objective: f64 },

    #[error("matrix is not in the image of the projection map")]
    NotInImage,

    #[error("translational parts violate the convergence radius ||v1||+||v2|| <= 0.59*lambda")]
    RadiusViolated,

    #[error("measurement graph is disconnected")]
    GraphDisconnected,

    #[error("eigenvalue solver failed to converge")]
    EigSolverFailure,

    #[error("lambda too small: {0}")]
    LambdaTooSmall(String),

    #[error("null-space mixing solve is rank deficient")]
    DegenerateNullSpace,

    #[error("could not sample a connected graph after {attempts} attempts")]
    ConnectivityFailure { attempts: usize },

    #[error("every edge is noise-free; SNR is undefined")]
    AllNoiseFree,

    #[error("translational noise density has support beyond ||v|| = pi")]
    UnsupportedDensity,

    #[error("invalid measurement graph: {0}")]
    InvalidGraph(String),

    #[error("plug-in solver returned an invalid result: {0}")]
    PluginInvalid(String),

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
}

impl Error {
    /// Stable machine-readable token for each error (used by the CLI exit paths).
    pub fn name(&self) -> &'static str {
        match self {
            Error::NotOrthogonal { .. } => "NotOrthogonal",
            Error::NegativeDeterminant { .. } => "NegativeDeterminant",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::AngleAtPi => "AngleAtPi",
            Error::RankDeficient { .. } => "RankDeficient",
            Error::BoundaryOfInjectivity => "BoundaryOfInjectivity",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::NotInImage => "NotInImage",
            Error::RadiusViolated => "RadiusViolated",
            Error::GraphDisconnected => "GraphDisconnected",
            Error::EigSolverFailure => "EigSolverFailure",
            Error::LambdaTooSmall(_) => "LambdaTooSmall",
            Error::DegenerateNullSpace => "DegenerateNullSpace",
            Error::ConnectivityFailure { .. } => "ConnectivityFailure",
            Error::AllNoiseFree => "AllNoiseFree",
            Error::UnsupportedDensity => "UnsupportedDensity",
            Error::InvalidGraph(_) => "InvalidGraph",
            Error::PluginInvalid(_) => "PluginInvalid",
            Error::ConfigInvalid(_) => "ConfigInvalid",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
