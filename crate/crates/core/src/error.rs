// Copyright 2026 loqs Contributors
// SPDX-License-Identifier: Apache-2.0

//! Error type shared across the crate.

use crate::model::ValidationReport;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Model inputs failed one or more structural checks.
    #[error("model validation failed:\n{0}")]
    Validation(ValidationReport),

    #[error("{context}: expected dimension {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("mode count must be at least 1")]
    ZeroModes,

    /// A computation that must produce a real matrix left a complex residue
    /// above tolerance; the input data is numerically inconsistent.
    #[error("{context}: imaginary residue {residue:.3e} exceeds tolerance {tolerance:.1e}")]
    ImaginaryResidue {
        context: &'static str,
        residue: f64,
        tolerance: f64,
    },

    #[error("diffusion matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:.3e} < -{tolerance:.1e}")]
    NotPositiveSemidefinite {
        min_eigenvalue: f64,
        tolerance: f64,
    },

    #[error("non-finite values encountered in {context} at t = {time}; try a smaller dt")]
    NonFinite { context: &'static str, time: f64 },

    #[error("density-matrix trace drifted by {drift:.3e} (limit {limit:.1e}) at t = {time}; dt too large or cutoff too small")]
    TraceDrift { drift: f64, limit: f64, time: f64 },

    #[error("covariance determinant {determinant:.3e} is not positive; state is unphysical")]
    NonPositiveDeterminant { determinant: f64 },

    /// The drift passed the Hurwitz test yet the vectorized Lyapunov system
    /// was singular — eigenvalues pathologically close to the imaginary axis.
    #[error("Lyapunov system is singular despite a Hurwitz drift matrix")]
    SingularLyapunov,

    #[error("Fock cutoff must be at least 2, got {cutoff}")]
    CutoffTooSmall { cutoff: usize },

    #[error("Fock cutoff {cutoff} exceeds the supported maximum {max}")]
    CutoffTooLarge { cutoff: usize, max: usize },

    #[error("the Fock oracle supports at most {max} modes, got {n_modes}")]
    TooManyModes { n_modes: usize, max: usize },

    #[error("tail_levels {tail_levels} must be smaller than the cutoff {cutoff}")]
    TailLevels { tail_levels: usize, cutoff: usize },

    #[error("cutoff inadequate: tail population {tail:.3e} exceeds {threshold:.1e}; increase the Fock cutoff")]
    CutoffInadequate { tail: f64, threshold: f64 },

    #[error("initial state not representable in the Fock oracle: {reason}")]
    UnsupportedInitialState { reason: String },

    #[error("density matrix invariant violated: {reason}")]
    InvalidDensityMatrix { reason: String },

    #[error("invalid integration window: dt = {dt}, span = {span}")]
    InvalidTimeStep { dt: f64, span: f64 },

    #[error("sample_every must be at least 1")]
    ZeroSampleStride,

    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),

    #[error("trajectory file, line {line}: {message}")]
    TrajectoryFormat { line: usize, message: String },

    #[error("failed to parse model file: {0}")]
    Parse(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
