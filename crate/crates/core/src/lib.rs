//! Simulation and data-reduction toolkit for a pulsed cavity electro-optic
//! (CEO) entanglement experiment.
//!
//! The crate covers the full chain from theory to measurement:
//!
//! * [`model`] — the linearized five-mode Langevin model (microwave, optical
//!   Stokes, anti-Stokes, TM mode, classical pump) and its constant matrices.
//! * [`spectra`] — frequency-domain output-field correlations and the
//!   finite-window filter convolution that yields covariance matrices at
//!   discrete analysis frequencies.
//! * [`measurement`] — heterodyne detection with gain and added noise; maps
//!   device covariances to detected covariances and back.
//! * [`entanglement`] — Duan–Simon joint variances, logarithmic negativity,
//!   purity, and Wigner marginals from a two-mode covariance matrix.
//! * [`pipeline`] — synthetic pulse records and the complete reduction chain
//!   (digital downconversion, phase correction, post-selection, windowed
//!   spectral analysis, calibration, covariance estimation with error bars).
//! * [`calibration`] — detection-chain calibration fits (noise thermometry,
//!   4-port transduction efficiency, waveguide-noise power law).
//! * [`fitting`] — Lorentzian line fits and the joint two-parameter theory
//!   fit of microwave and optical noise spectra.
//!
//! All internal frequencies are angular (rad/s); file interfaces use Hz and
//! are converted on load. Vacuum is normalized to a quadrature variance of
//! 1/2, so the joint-variance vacuum level is 1.

pub mod calibration;
pub mod entanglement;
pub mod fitting;
pub mod measurement;
pub mod model;
pub mod optim;
pub mod pipeline;
pub mod special;
pub mod spectra;
pub mod units;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid input: bad configuration values, malformed files, broken
    /// preconditions.
    #[error("validation: {0}")]
    Validation(String),
    /// Numerical failure: singular matrices, non-convergence, accuracy
    /// targets missed, unphysical intermediate values.
    #[error("numerical: {0}")]
    Numerical(String),
    /// Statistics failure: too few samples to form the requested estimate.
    #[error("statistics: {0}")]
    Statistics(String),
    /// I/O failure.
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
    pub fn statistics(msg: impl Into<String>) -> Self {
        Error::Statistics(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
