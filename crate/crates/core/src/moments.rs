// Copyright 2026 loqs Contributors
// SPDX-License-Identifier: Apache-2.0

//! Gaussian moment dynamics: integrates
//!
//!   d⟨x̂⟩/dt = A·⟨x̂⟩,    dV/dt = A·V + V·Aᵀ + D,
//!
//! provides the closed-form mean solution exp(At)·⟨x̂⟩₀, the stationary
//! covariance from the continuous Lyapunov equation, and Gaussian-state
//! diagnostics (purity, uncertainty-relation check).
//!
//! Conventions: ℏ = 1, vacuum covariance V = I/2, purity = 1/(2^N·√det V).
//! Any other vacuum normalization breaks the cross-validation against the
//! Fock-space oracle.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::grid::StepPlan;
use crate::linalg::{expm, max_abs, solve_lyapunov};
use crate::model::{DriftDiffusion, SymplecticForm};
use crate::C64;

/// Tolerance on the minimum eigenvalue of V + (i/2)Σ; pure states sit
/// exactly at eigenvalue 0, so the check must allow a small negative slack.
pub const PHYS_TOL: f64 = 1e-9;

/// A is treated as Hurwitz only when every eigenvalue real part is below
/// −HURWITZ_TOL; real parts within the tolerance band count as unstable.
pub const HURWITZ_TOL: f64 = 1e-10;

/// First and second moments (⟨x̂⟩, V) of a Gaussian state at a given time.
///
/// The covariance is symmetrized at construction, so `V = Vᵀ` holds exactly
/// for every value of this type.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMomentState {
    time: f64,
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
}

impl GaussianMomentState {
    pub fn new(time: f64, mean: DVector<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        let dim = mean.len();
        if covariance.nrows() != dim || covariance.ncols() != dim {
            return Err(Error::DimensionMismatch {
                context: "GaussianMomentState covariance",
                expected: dim,
                found: covariance.nrows().max(covariance.ncols()),
            });
        }
        if dim == 0 || !dim.is_multiple_of(2) {
            return Err(Error::DimensionMismatch {
                context: "GaussianMomentState mean (must have even positive length 2N)",
                expected: dim + dim % 2,
                found: dim,
            });
        }
        let covariance = (&covariance + covariance.transpose()) * 0.5;
        Ok(GaussianMomentState {
            time,
            mean,
            covariance,
        })
    }

    /// The vacuum state: mean 0, V = I/2.
    pub fn vacuum(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::ZeroModes);
        }
        let dim = 2 * n_modes;
        Self::new(
            0.0,
            DVector::zeros(dim),
            DMatrix::identity(dim, dim) * 0.5,
        )
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    /// Phase-space dimension 2N.
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn n_modes(&self) -> usize {
        self.dim() / 2
    }
}

/// Descriptive metadata carried by a trajectory into its on-disk form.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMetadata {
    /// Integration scheme identifier (e.g. "rk4").
    pub integrator: String,
    /// Nominal step size used to produce the samples.
    pub dt: f64,
    /// [`DriftDiffusion::fingerprint`] of the generating system, 0 if unknown.
    pub fingerprint: u64,
}

/// Time-ordered sequence of moment samples with shared dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    dim: usize,
    samples: Vec<GaussianMomentState>,
    metadata: TrajectoryMetadata,
}

impl Trajectory {
    /// Validates that all samples share `dim` and times strictly increase.
    pub fn new(
        dim: usize,
        samples: Vec<GaussianMomentState>,
        metadata: TrajectoryMetadata,
    ) -> Result<Self> {
        for (i, s) in samples.iter().enumerate() {
            if s.dim() != dim {
                return Err(Error::InvalidTrajectory(format!(
                    "sample {i} has dimension {}, expected {dim}",
                    s.dim()
                )));
            }
        }
        if let Some(w) = samples.windows(2).position(|w| w[1].time() <= w[0].time()) {
            return Err(Error::InvalidTrajectory(format!(
                "times not strictly increasing at samples {w}..{} ({} then {})",
                w + 1,
                samples[w].time(),
                samples[w + 1].time()
            )));
        }
        Ok(Trajectory {
            dim,
            samples,
            metadata,
        })
    }

    pub fn samples(&self) -> &[GaussianMomentState] {
        &self.samples
    }

    pub fn metadata(&self) -> &TrajectoryMetadata {
        &self.metadata
    }

    /// Phase-space dimension 2N shared by all samples.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn first(&self) -> Option<&GaussianMomentState> {
        self.samples.first()
    }

    pub fn last(&self) -> Option<&GaussianMomentState> {
        self.samples.last()
    }
}

fn raw_rhs(
    a: &DMatrix<f64>,
    d: &DMatrix<f64>,
    mean: &DVector<f64>,
    cov: &DMatrix<f64>,
) -> (DVector<f64>, DMatrix<f64>) {
    let dmean = a * mean;
    let dcov = a * cov + cov * a.transpose() + d;
    let dcov = (&dcov + dcov.transpose()) * 0.5;
    (dmean, dcov)
}

/// Right-hand side of the moment ODEs: (A·⟨x̂⟩, A·V + V·Aᵀ + D), with the
/// covariance derivative symmetrized.
pub fn moment_rhs(
    ad: &DriftDiffusion,
    state: &GaussianMomentState,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    if state.dim() != ad.dim() {
        return Err(Error::DimensionMismatch {
            context: "moment_rhs state",
            expected: ad.dim(),
            found: state.dim(),
        });
    }
    Ok(raw_rhs(
        ad.drift(),
        ad.diffusion(),
        state.mean(),
        state.covariance(),
    ))
}

#[inline]
fn kahan_add(sum: &mut f64, comp: &mut f64, term: f64) {
    let y = term - *comp;
    let t = *sum + y;
    *comp = (t - *sum) - y;
    *sum = t;
}

/// Integrates the moment ODEs with fixed-step classical RK4.
///
/// The final step is shortened so the last sample lands exactly on
/// `t_final`; every `sample_every`-th state is retained (endpoints always).
/// The per-step state update is accumulated with Kahan compensation so that
/// long runs at small steps stay at the 4th-order truncation error rather
/// than drowning it in summation roundoff. V is symmetrized after every
/// step.
pub fn integrate(
    ad: &DriftDiffusion,
    initial: &GaussianMomentState,
    t_final: f64,
    dt: f64,
    sample_every: usize,
) -> Result<Trajectory> {
    let dim = ad.dim();
    if initial.dim() != dim {
        return Err(Error::DimensionMismatch {
            context: "integrate initial state",
            expected: dim,
            found: initial.dim(),
        });
    }
    let plan = StepPlan::new(initial.time(), t_final, dt, sample_every)?;
    let a = ad.drift();
    let d = ad.diffusion();

    let mut mean = initial.mean().clone();
    let mut cov = initial.covariance().clone();
    let mut comp_mean = DVector::<f64>::zeros(dim);
    let mut comp_cov = DMatrix::<f64>::zeros(dim, dim);

    let mut samples = Vec::with_capacity(plan.n_samples());
    samples.push(initial.clone());

    for i in 0..plan.n_steps() {
        let h = plan.step_size(i);
        let (k1m, k1v) = raw_rhs(a, d, &mean, &cov);
        let (k2m, k2v) = raw_rhs(a, d, &(&mean + &k1m * (h / 2.0)), &(&cov + &k1v * (h / 2.0)));
        let (k3m, k3v) = raw_rhs(a, d, &(&mean + &k2m * (h / 2.0)), &(&cov + &k2v * (h / 2.0)));
        let (k4m, k4v) = raw_rhs(a, d, &(&mean + &k3m * h), &(&cov + &k3v * h));

        let dmean = (k1m + k2m * 2.0 + k3m * 2.0 + k4m) * (h / 6.0);
        let dcov = (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (h / 6.0);
        let dcov = (&dcov + dcov.transpose()) * 0.5;

        for r in 0..dim {
            kahan_add(&mut mean[r], &mut comp_mean[r], dmean[r]);
            for c in 0..dim {
                kahan_add(&mut cov[(r, c)], &mut comp_cov[(r, c)], dcov[(r, c)]);
            }
        }
        cov = (&cov + cov.transpose()) * 0.5;

        let k = i + 1;
        let t = plan.time(k);
        if !(mean.iter().all(|x| x.is_finite()) && cov.iter().all(|x| x.is_finite())) {
            return Err(Error::NonFinite {
                context: "moment integration (reduce dt)",
                time: t,
            });
        }
        if plan.is_sample(k) {
            samples.push(GaussianMomentState::new(t, mean.clone(), cov.clone())?);
        }
    }

    Trajectory::new(
        dim,
        samples,
        TrajectoryMetadata {
            integrator: "rk4".to_string(),
            dt: plan.dt(),
            fingerprint: ad.fingerprint(),
        },
    )
}

/// Exact mean evolution exp(A·t)·mean0 of the homogeneous mean ODE.
pub fn mean_closed_form(ad: &DriftDiffusion, mean0: &DVector<f64>, t: f64) -> Result<DVector<f64>> {
    if mean0.len() != ad.dim() {
        return Err(Error::DimensionMismatch {
            context: "mean_closed_form mean0",
            expected: ad.dim(),
            found: mean0.len(),
        });
    }
    Ok(expm(&(ad.drift() * t)) * mean0)
}

/// Outcome of the stationary-covariance computation.
#[derive(Debug, Clone)]
pub enum SteadyState {
    /// A is Hurwitz: the unique symmetric solution of A·V + V·Aᵀ + D = 0,
    /// together with the achieved residual ‖A·V + V·Aᵀ + D‖_max.
    Stationary {
        covariance: DMatrix<f64>,
        residual: f64,
    },
    /// Some eigenvalue of A has real part ≥ −[`HURWITZ_TOL`]; the full
    /// spectrum is returned for diagnosis.
    Unstable { eigenvalues: Vec<C64> },
}

/// Stationary covariance of dV/dt = A·V + V·Aᵀ + D, or the unstable
/// diagnosis when A is not Hurwitz.
pub fn steady_state(ad: &DriftDiffusion) -> Result<SteadyState> {
    let eigenvalues: Vec<C64> = ad.drift().complex_eigenvalues().iter().copied().collect();
    let max_re = eigenvalues.iter().fold(f64::NEG_INFINITY, |m, z| m.max(z.re));
    if max_re >= -HURWITZ_TOL {
        return Ok(SteadyState::Unstable { eigenvalues });
    }
    match solve_lyapunov(ad.drift(), ad.diffusion()) {
        Some((covariance, residual)) => Ok(SteadyState::Stationary {
            covariance,
            residual,
        }),
        None => Err(Error::SingularLyapunov),
    }
}

/// Gaussian-state purity 1/(2^N·√det V); equals tr(ρ̂²) of the state.
pub fn purity(state: &GaussianMomentState) -> Result<f64> {
    let det = state.covariance().determinant();
    if det <= 0.0 || !det.is_finite() {
        return Err(Error::NonPositiveDeterminant { determinant: det });
    }
    Ok(1.0 / (2.0_f64.powi(state.n_modes() as i32) * det.sqrt()))
}

/// Uncertainty-relation check: forms the Hermitian matrix V + (i/2)Σ and
/// returns `(min_eigenvalue ≥ −PHYS_TOL, min_eigenvalue)`.
pub fn check_physical(state: &GaussianMomentState, sym: &SymplecticForm) -> Result<(bool, f64)> {
    if state.dim() != sym.dim() {
        return Err(Error::DimensionMismatch {
            context: "check_physical symplectic form",
            expected: state.dim(),
            found: sym.dim(),
        });
    }
    let dim = state.dim();
    let v = state.covariance();
    let s = sym.matrix();
    let h = DMatrix::from_fn(dim, dim, |r, c| C64::new(v[(r, c)], 0.5 * s[(r, c)]));
    let eigenvalues = SymmetricEigen::new(h).eigenvalues;
    let min_eig = eigenvalues.iter().fold(f64::INFINITY, |m, &x| m.min(x));
    Ok((min_eig >= -PHYS_TOL, min_eig))
}

/// Largest entrywise deviation between two trajectories' means and
/// covariances over all shared samples (compared index by index).
pub fn max_trajectory_deviation(a: &Trajectory, b: &Trajectory) -> Result<(f64, f64)> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            context: "trajectory comparison",
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let mut worst_mean = 0.0_f64;
    let mut worst_cov = 0.0_f64;
    for (sa, sb) in a.samples().iter().zip(b.samples()) {
        worst_mean = worst_mean.max((sa.mean() - sb.mean()).amax());
        worst_cov = worst_cov.max(max_abs(&(sa.covariance() - sb.covariance())));
    }
    Ok((worst_mean, worst_cov))
}
