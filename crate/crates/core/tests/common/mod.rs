// Copyright 2026 loqs Contributors
// SPDX-License-Identifier: Apache-2.0

//! Fixtures shared by the integration-test suites.

#![allow(dead_code)]

use loqs::model::{DriftDiffusion, LinearOpenSystem};
use loqs::moments::GaussianMomentState;
use loqs::C64;
use nalgebra::{DMatrix, DVector};

/// Single-mode damped oscillator: M = ω·I₂, C = [√(κ/2), i√(κ/2)].
pub fn damped_system(omega: f64, kappa: f64) -> LinearOpenSystem {
    let m = DMatrix::identity(2, 2) * omega;
    let s = (kappa / 2.0).sqrt();
    let c = DMatrix::from_row_slice(1, 2, &[C64::new(s, 0.0), C64::new(0.0, s)]);
    LinearOpenSystem::new(1, m, c).unwrap()
}

/// Damped oscillator with a second, position-coupled channel:
/// rows [√(κ₁/2), i√(κ₁/2)] and [√(κ₂/2), 0].
pub fn two_channel_system(omega: f64, kappa1: f64, kappa2: f64) -> LinearOpenSystem {
    let m = DMatrix::identity(2, 2) * omega;
    let s1 = (kappa1 / 2.0).sqrt();
    let s2 = (kappa2 / 2.0).sqrt();
    let c = DMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(s1, 0.0),
            C64::new(0.0, s1),
            C64::new(s2, 0.0),
            C64::new(0.0, 0.0),
        ],
    );
    LinearOpenSystem::new(1, m, c).unwrap()
}

/// Closed single-mode oscillator: M = I₂, no coupling.
pub fn closed_system() -> LinearOpenSystem {
    LinearOpenSystem::new(1, DMatrix::identity(2, 2), DMatrix::zeros(0, 0)).unwrap()
}

pub fn drift_diffusion(system: &LinearOpenSystem) -> DriftDiffusion {
    DriftDiffusion::build(system).unwrap()
}

/// Gaussian moments of the coherent state |α⟩ with real α:
/// mean (√2·α, 0), V = I/2.
pub fn coherent_initial(alpha: f64) -> GaussianMomentState {
    GaussianMomentState::new(
        0.0,
        DVector::from_row_slice(&[2.0_f64.sqrt() * alpha, 0.0]),
        DMatrix::identity(2, 2) * 0.5,
    )
    .unwrap()
}

/// JSON model text for the damped oscillator (ω = 1, κ = 0.5) with the
/// default vacuum initial state.
pub const DAMPED_MODEL_JSON: &str = r#"{
    "n_modes": 1,
    "hamiltonian": [[1.0, 0.0], [0.0, 1.0]],
    "coupling": [[[0.5, 0.0], [0.0, 0.5]]],
    "labels": ["damped oscillator, omega=1, kappa=0.5"]
}"#;

/// Same system started from the coherent state α = 0.5
/// (mean = (√2·0.5, 0) = (0.7071…, 0), V = I/2 by default).
pub const DAMPED_COHERENT_MODEL_JSON: &str = r#"{
    "n_modes": 1,
    "hamiltonian": [[1.0, 0.0], [0.0, 1.0]],
    "coupling": [[[0.5, 0.0], [0.0, 0.5]]],
    "initial_mean": [0.7071067811865476, 0.0]
}"#;

/// Closed oscillator (C = 0), vacuum initial state.
pub const CLOSED_MODEL_JSON: &str = r#"{
    "n_modes": 1,
    "hamiltonian": [[1.0, 0.0], [0.0, 1.0]],
    "coupling": []
}"#;

/// Hot isotropic thermal initial state (V = 5·I, n̄ = 4.5) on the damped
/// oscillator — far too energetic for a tiny Fock cutoff.
pub const HOT_THERMAL_MODEL_JSON: &str = r#"{
    "n_modes": 1,
    "hamiltonian": [[1.0, 0.0], [0.0, 1.0]],
    "coupling": [[[0.5, 0.0], [0.0, 0.5]]],
    "initial_cov": [[5.0, 0.0], [0.0, 5.0]]
}"#;
