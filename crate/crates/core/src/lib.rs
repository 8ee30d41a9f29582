// Copyright 2026 loqs Contributors
// SPDX-License-Identifier: Apache-2.0

//! Simulation of linear open quantum systems.
//!
//! A system of N bosonic modes with quadratic Hamiltonian Ĥ = ½ x̂ᵀMx̂ and
//! linear Lindblad operators ĉ = Cx̂ keeps Gaussian states Gaussian, so its
//! full state is carried by the mean ⟨x̂⟩ and covariance V, which obey
//!
//!   d⟨x̂⟩/dt = A·⟨x̂⟩,    dV/dt = A·V + V·Aᵀ + D,
//!
//! with drift A = Σ(M + Im(C†C)) and diffusion D = Σ Re(C†C) Σᵀ, where Σ is
//! the symplectic form of the (q₁…q_N, p₁…p_N) quadrature ordering.
//!
//! The crate provides two independent engines and the plumbing to compare
//! them:
//!
//! - [`model`] builds and validates (M, C) and constructs (A, D);
//! - [`moments`] integrates the moment equations, solves for stationary
//!   covariances, and evaluates Gaussian-state diagnostics;
//! - [`fock`] integrates the Lindblad master equation directly on a
//!   truncated-Fock-space density matrix — a brute-force ground truth that
//!   shares no dynamics code with [`moments`];
//! - [`io`] reads model files (JSON) and persists trajectories (CSV);
//! - [`cli`] is the `loqs` command-line binary.
//!
//! Conventions: ℏ = 1, [q̂, p̂] = i, vacuum covariance V = I/2, purity
//! 1/(2^N·√det V).
//!
//! ```
//! use loqs::model::{DriftDiffusion, LinearOpenSystem};
//! use loqs::moments::{steady_state, SteadyState};
//! use loqs::C64;
//! use nalgebra::DMatrix;
//!
//! // Damped oscillator: ω = 1, κ = 0.5.
//! let m = DMatrix::identity(2, 2);
//! let s = (0.25f64).sqrt();
//! let c = DMatrix::from_row_slice(1, 2, &[C64::new(s, 0.0), C64::new(0.0, s)]);
//! let system = LinearOpenSystem::new(1, m, c)?;
//! let ad = DriftDiffusion::build(&system)?;
//!
//! // Its stationary covariance is the vacuum, V = I/2.
//! match steady_state(&ad)? {
//!     SteadyState::Stationary { covariance, .. } => {
//!         assert!((covariance[(0, 0)] - 0.5).abs() < 1e-12);
//!     }
//!     SteadyState::Unstable { .. } => unreachable!("the damped oscillator is stable"),
//! }
//! # Ok::<(), loqs::Error>(())
//! ```

pub mod cli;
pub mod error;
pub mod fock;
mod grid;
pub mod io;
pub mod linalg;
pub mod model;
pub mod moments;

pub use error::{Error, Result};

/// Complex double-precision scalar used throughout.
pub type C64 = nalgebra::Complex<f64>;
