// Copyright 2026 loqs Contributors
// SPDX-License-Identifier: Apache-2.0

//! Brute-force ground truth: the system is represented in a truncated Fock
//! space and the Lindblad master equation
//!
//!   dρ̂/dt = −i[Ĥ, ρ̂] + Σⱼ ( ĉⱼ ρ̂ ĉⱼ† − ½(ĉⱼ†ĉⱼ ρ̂ + ρ̂ ĉⱼ†ĉⱼ) )
//!
//! is integrated directly on the density matrix. Mean and covariance are
//! then extracted by operator traces for comparison with the Gaussian
//! moment dynamics, which shares no code path with this module beyond the
//! system definition itself.
//!
//! Quadratures are realized as q̂ = (â + â†)/√2 and p̂ = (â − â†)/(i√2),
//! the unique convention with [q̂, p̂] = i and vacuum covariance I/2.
//! Storage is dense; the oracle is capped at N ≤ 2 modes and cutoff ≤ 40.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::grid::StepPlan;
use crate::linalg::{expm, max_abs};
use crate::model::{symplectic_form, LinearOpenSystem};
use crate::moments::GaussianMomentState;
use crate::C64;

/// Largest mode count the dense oracle accepts.
pub const MAX_MODES: usize = 2;

/// Largest per-mode Fock dimension the dense oracle accepts.
pub const MAX_CUTOFF: usize = 40;

/// Hermiticity tolerance for a [`DensityMatrix`].
pub const DM_HERMITICITY_TOL: f64 = 1e-10;

/// Trace-distance-from-1 tolerance for a [`DensityMatrix`].
pub const DM_TRACE_TOL: f64 = 1e-8;

/// Eigenvalue floor for a [`DensityMatrix`] (min eigenvalue ≥ −this).
pub const DM_EIGENVALUE_TOL: f64 = 1e-8;

/// Pre-renormalization trace drift allowed per step of [`integrate_master`].
pub const TRACE_DRIFT_LIMIT: f64 = 1e-6;

/// Imaginary residue allowed when extracting real moments from ρ̂.
pub const MOMENT_RESIDUE_TOL: f64 = 1e-8;

/// Number of top Fock levels inspected by the default adequacy check.
pub const DEFAULT_TAIL_LEVELS: usize = 3;

/// Tail population above which an oracle run does not count as ground truth.
pub const TAIL_THRESHOLD: f64 = 1e-8;

/// Ladder operator on a `cutoff`-dimensional truncated Fock space:
/// entries a[n−1, n] = √n.
pub fn annihilation(cutoff: usize) -> Result<DMatrix<C64>> {
    if cutoff < 2 {
        return Err(Error::CutoffTooSmall { cutoff });
    }
    let mut a = DMatrix::zeros(cutoff, cutoff);
    for n in 1..cutoff {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Ok(a)
}

/// Truncated-space realization of one system: quadrature operators,
/// Hamiltonian operator, and Lindblad operators at a given cutoff.
#[derive(Debug, Clone)]
pub struct FockRig {
    n_modes: usize,
    cutoff: usize,
    dim: usize,
    quadratures: Vec<DMatrix<C64>>,
    hamiltonian_op: DMatrix<C64>,
    lindblad_ops: Vec<DMatrix<C64>>,
    /// Cached ĉⱼ†ĉⱼ, used on every right-hand-side evaluation.
    gram_ops: Vec<DMatrix<C64>>,
}

/// Lifts a single-mode operator to the N-mode space by Kronecker products
/// with identities: I^{⊗mode} ⊗ op ⊗ I^{⊗(N−1−mode)}.
fn kron_lift(op: &DMatrix<C64>, mode: usize, n_modes: usize, cutoff: usize) -> DMatrix<C64> {
    let left = cutoff.pow(mode as u32);
    let right = cutoff.pow((n_modes - 1 - mode) as u32);
    DMatrix::<C64>::identity(left, left)
        .kronecker(op)
        .kronecker(&DMatrix::<C64>::identity(right, right))
}

/// Builds the truncated-space operators for a validated system.
pub fn build_rig(system: &LinearOpenSystem, cutoff: usize) -> Result<FockRig> {
    let n_modes = system.n_modes();
    if n_modes > MAX_MODES {
        return Err(Error::TooManyModes {
            n_modes,
            max: MAX_MODES,
        });
    }
    if cutoff < 2 {
        return Err(Error::CutoffTooSmall { cutoff });
    }
    if cutoff > MAX_CUTOFF {
        return Err(Error::CutoffTooLarge {
            cutoff,
            max: MAX_CUTOFF,
        });
    }

    let dim = cutoff.pow(n_modes as u32);
    let a_single = annihilation(cutoff)?;
    let inv_sqrt2 = C64::new(1.0 / 2.0_f64.sqrt(), 0.0);
    let neg_i_inv_sqrt2 = C64::new(0.0, -1.0 / 2.0_f64.sqrt());

    // Quadratures in (q₁…q_N, p₁…p_N) order.
    let mut quadratures = vec![DMatrix::zeros(dim, dim); 2 * n_modes];
    for mode in 0..n_modes {
        let a = kron_lift(&a_single, mode, n_modes, cutoff);
        let a_dag = a.adjoint();
        quadratures[mode] = (&a + &a_dag) * inv_sqrt2;
        quadratures[n_modes + mode] = (&a - &a_dag) * neg_i_inv_sqrt2;
    }

    // Ĥ = ½ Σ_{jk} M_{jk} x̂_j x̂_k, re-Hermitized to strip matmul roundoff.
    let m = system.hamiltonian();
    let mut h = DMatrix::<C64>::zeros(dim, dim);
    for j in 0..2 * n_modes {
        for k in 0..2 * n_modes {
            if m[(j, k)] != 0.0 {
                h += (&quadratures[j] * &quadratures[k]) * C64::new(0.5 * m[(j, k)], 0.0);
            }
        }
    }
    debug_assert!(max_abs(&(&h - h.adjoint())) <= 1e-12);
    let hamiltonian_op = (&h + h.adjoint()) * C64::new(0.5, 0.0);

    // ĉⱼ = Σ_k C_{jk} x̂_k.
    let c = system.coupling();
    let mut lindblad_ops = Vec::with_capacity(system.n_channels());
    for j in 0..system.n_channels() {
        let mut op = DMatrix::<C64>::zeros(dim, dim);
        for k in 0..2 * n_modes {
            if c[(j, k)] != C64::new(0.0, 0.0) {
                op += &quadratures[k] * c[(j, k)];
            }
        }
        lindblad_ops.push(op);
    }
    let gram_ops = lindblad_ops.iter().map(|op| op.adjoint() * op).collect();

    Ok(FockRig {
        n_modes,
        cutoff,
        dim,
        quadratures,
        hamiltonian_op,
        lindblad_ops,
        gram_ops,
    })
}

impl FockRig {
    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Hilbert-space dimension cutoff^N.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Quadrature operator x̂_ℓ, ℓ ∈ 0..2N in (q…, p…) order.
    pub fn quadrature(&self, l: usize) -> &DMatrix<C64> {
        &self.quadratures[l]
    }

    pub fn quadratures(&self) -> &[DMatrix<C64>] {
        &self.quadratures
    }

    pub fn hamiltonian_op(&self) -> &DMatrix<C64> {
        &self.hamiltonian_op
    }

    pub fn lindblad_ops(&self) -> &[DMatrix<C64>] {
        &self.lindblad_ops
    }

    /// Fock level of `mode` in basis state `index` (row-major multi-index,
    /// mode 0 outermost).
    fn level(&self, index: usize, mode: usize) -> usize {
        (index / self.cutoff.pow((self.n_modes - 1 - mode) as u32)) % self.cutoff
    }

    /// Largest deviation of [x̂_ℓ, x̂_m] from i·Σ_{ℓm}·I over the subspace
    /// excluding the top boundary level of every mode (where truncation
    /// necessarily breaks the commutation relation).
    pub fn commutator_deviation(&self) -> f64 {
        let sigma = symplectic_form(self.n_modes)
            .expect("rig mode count is positive")
            .matrix()
            .clone();
        let retained: Vec<usize> = (0..self.dim)
            .filter(|&idx| (0..self.n_modes).all(|m| self.level(idx, m) <= self.cutoff - 2))
            .collect();

        let mut worst = 0.0_f64;
        for l in 0..2 * self.n_modes {
            for m in 0..2 * self.n_modes {
                let comm = &self.quadratures[l] * &self.quadratures[m]
                    - &self.quadratures[m] * &self.quadratures[l];
                let target = C64::new(0.0, sigma[(l, m)]);
                for &i in &retained {
                    for &j in &retained {
                        let expected = if i == j { target } else { C64::new(0.0, 0.0) };
                        worst = worst.max((comm[(i, j)] - expected).norm());
                    }
                }
            }
        }
        worst
    }
}

/// A validated density matrix ρ̂ at a given time: Hermitian within
/// [`DM_HERMITICITY_TOL`], trace within [`DM_TRACE_TOL`] of 1, and minimum
/// eigenvalue ≥ −[`DM_EIGENVALUE_TOL`].
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: DMatrix<C64>,
    time: f64,
}

impl DensityMatrix {
    pub fn new(matrix: DMatrix<C64>, time: f64) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::InvalidDensityMatrix {
                reason: format!("matrix is {}×{}, not square", matrix.nrows(), matrix.ncols()),
            });
        }
        let herm_gap = max_abs(&(&matrix - matrix.adjoint()));
        if herm_gap > DM_HERMITICITY_TOL {
            return Err(Error::InvalidDensityMatrix {
                reason: format!("not Hermitian: ‖ρ − ρ†‖_max = {herm_gap:.3e}"),
            });
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > DM_TRACE_TOL || trace.im.abs() > DM_TRACE_TOL {
            return Err(Error::InvalidDensityMatrix {
                reason: format!("trace {trace} differs from 1"),
            });
        }
        let hermitized = (&matrix + matrix.adjoint()) * C64::new(0.5, 0.0);
        let min_eig = SymmetricEigen::new(hermitized)
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |a, &x| a.min(x));
        if min_eig < -DM_EIGENVALUE_TOL {
            return Err(Error::InvalidDensityMatrix {
                reason: format!("min eigenvalue {min_eig:.3e} below −{DM_EIGENVALUE_TOL:.0e}"),
            });
        }
        Ok(DensityMatrix { matrix, time })
    }

    /// Constructs without the O(dim³) eigenvalue check; reserved for
    /// mid-integration samples whose positivity the stepper maintains.
    pub(crate) fn from_trusted(matrix: DMatrix<C64>, time: f64) -> Self {
        DensityMatrix { matrix, time }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

fn check_state_dims(rig: &FockRig, lens: usize, what: &str) -> Result<()> {
    if lens != rig.n_modes() {
        return Err(Error::UnsupportedInitialState {
            reason: format!(
                "{what}: got {lens} per-mode values for a {}-mode rig",
                rig.n_modes()
            ),
        });
    }
    Ok(())
}

/// The N-mode vacuum |0…0⟩⟨0…0|.
pub fn vacuum_density(rig: &FockRig) -> DensityMatrix {
    let mut rho = DMatrix::zeros(rig.dim(), rig.dim());
    rho[(0, 0)] = C64::new(1.0, 0.0);
    DensityMatrix::from_trusted(rho, 0.0)
}

/// Product Fock state |n₁…n_N⟩⟨n₁…n_N|.
pub fn fock_density(rig: &FockRig, levels: &[usize]) -> Result<DensityMatrix> {
    check_state_dims(rig, levels.len(), "Fock state")?;
    for (&n, mode) in levels.iter().zip(0..) {
        if n >= rig.cutoff() {
            return Err(Error::UnsupportedInitialState {
                reason: format!(
                    "Fock level {n} of mode {mode} does not fit below cutoff {}",
                    rig.cutoff()
                ),
            });
        }
    }
    let index: usize = levels
        .iter()
        .fold(0, |acc, &n| acc * rig.cutoff() + n);
    let mut rho = DMatrix::zeros(rig.dim(), rig.dim());
    rho[(index, index)] = C64::new(1.0, 0.0);
    DensityMatrix::new(rho, 0.0)
}

/// Product coherent state |α₁…α_N⟩⟨…| built by numerically exponentiating
/// the displacement generator αâ† − α*â per mode.
pub fn coherent_density(rig: &FockRig, alphas: &[C64]) -> Result<DensityMatrix> {
    check_state_dims(rig, alphas.len(), "coherent state")?;
    let d = rig.cutoff();
    let a = annihilation(d)?;
    let a_dag = a.adjoint();

    let mut rho: Option<DMatrix<C64>> = None;
    for &alpha in alphas {
        let generator = &a_dag * alpha - &a * alpha.conj();
        let displacement = expm(&generator);
        let psi = displacement.column(0).into_owned();
        let mode_rho = &psi * psi.adjoint();
        rho = Some(match rho {
            None => mode_rho,
            Some(acc) => acc.kronecker(&mode_rho),
        });
    }
    DensityMatrix::new(rho.expect("at least one mode"), 0.0)
}

/// Product thermal state with per-mode occupation n̄: Boltzmann-weighted
/// diagonal ∝ (n̄/(1+n̄))ⁿ, renormalized on the truncated space.
pub fn thermal_density(rig: &FockRig, nbars: &[f64]) -> Result<DensityMatrix> {
    check_state_dims(rig, nbars.len(), "thermal state")?;
    let d = rig.cutoff();

    let mut rho: Option<DMatrix<C64>> = None;
    for &nbar in nbars {
        if !nbar.is_finite() || nbar < 0.0 {
            return Err(Error::UnsupportedInitialState {
                reason: format!("thermal occupation must be finite and ≥ 0, got {nbar}"),
            });
        }
        let ratio = nbar / (1.0 + nbar);
        let weights: Vec<f64> = (0..d).map(|n| ratio.powi(n as i32)).collect();
        let norm: f64 = weights.iter().sum();
        let mode_rho = DMatrix::from_fn(d, d, |r, c| {
            if r == c {
                C64::new(weights[r] / norm, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        rho = Some(match rho {
            None => mode_rho,
            Some(acc) => acc.kronecker(&mode_rho),
        });
    }
    DensityMatrix::new(rho.expect("at least one mode"), 0.0)
}

/// Right-hand side of the Lindblad master equation:
/// −i[Ĥ, ρ̂] + Σⱼ ( ĉⱼ ρ̂ ĉⱼ† − ½(ĉⱼ†ĉⱼ ρ̂ + ρ̂ ĉⱼ†ĉⱼ) ).
pub fn lindblad_rhs(rig: &FockRig, rho: &DensityMatrix) -> Result<DMatrix<C64>> {
    if rho.dim() != rig.dim() {
        return Err(Error::DimensionMismatch {
            context: "lindblad_rhs density matrix",
            expected: rig.dim(),
            found: rho.dim(),
        });
    }
    Ok(lindblad_rhs_raw(rig, rho.matrix()))
}

/// Applies the Lindblad generator to an arbitrary matrix (not necessarily
/// a normalized state). The generator preserves trace and Hermiticity for
/// any Hermitian input, which is exactly what the invariant tests probe.
pub fn lindblad_apply(rig: &FockRig, m: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    if m.nrows() != rig.dim() || m.ncols() != rig.dim() {
        return Err(Error::DimensionMismatch {
            context: "lindblad_apply operand",
            expected: rig.dim(),
            found: m.nrows().max(m.ncols()),
        });
    }
    Ok(lindblad_rhs_raw(rig, m))
}

fn lindblad_rhs_raw(rig: &FockRig, rho: &DMatrix<C64>) -> DMatrix<C64> {
    let h = &rig.hamiltonian_op;
    let minus_i = C64::new(0.0, -1.0);
    let half = C64::new(0.5, 0.0);
    let mut rhs = (h * rho - rho * h) * minus_i;
    for (c, cdc) in rig.lindblad_ops.iter().zip(&rig.gram_ops) {
        rhs += c * rho * c.adjoint() - (cdc * rho + rho * cdc) * half;
    }
    rhs
}

/// Result of a master-equation run: the retained samples plus the largest
/// pre-renormalization trace drift observed over all steps.
#[derive(Debug, Clone)]
pub struct MasterRun {
    pub samples: Vec<DensityMatrix>,
    pub max_trace_drift: f64,
}

/// Integrates the master equation with fixed-step RK4 on the same grid
/// convention as the moment integrator (`sample_every`-th states retained,
/// endpoints always, final step shortened to land on `t_final`).
///
/// After every step the state is re-Hermitized as (ρ + ρ†)/2 and its trace
/// renormalized to 1; the pre-renormalization drift is monitored and the
/// run aborts if it exceeds [`TRACE_DRIFT_LIMIT`].
pub fn integrate_master(
    rig: &FockRig,
    rho0: &DensityMatrix,
    t_final: f64,
    dt: f64,
    sample_every: usize,
) -> Result<MasterRun> {
    if rho0.dim() != rig.dim() {
        return Err(Error::DimensionMismatch {
            context: "integrate_master initial state",
            expected: rig.dim(),
            found: rho0.dim(),
        });
    }
    let plan = StepPlan::new(rho0.time(), t_final, dt, sample_every)?;

    let mut rho = rho0.matrix().clone();
    let mut samples = Vec::with_capacity(plan.n_samples());
    samples.push(rho0.clone());
    let mut max_trace_drift = 0.0_f64;
    let half = C64::new(0.5, 0.0);

    for i in 0..plan.n_steps() {
        let h = plan.step_size(i);
        let k1 = lindblad_rhs_raw(rig, &rho);
        let k2 = lindblad_rhs_raw(rig, &(&rho + &k1 * C64::new(h / 2.0, 0.0)));
        let k3 = lindblad_rhs_raw(rig, &(&rho + &k2 * C64::new(h / 2.0, 0.0)));
        let k4 = lindblad_rhs_raw(rig, &(&rho + &k3 * C64::new(h, 0.0)));
        rho += (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4)
            * C64::new(h / 6.0, 0.0);

        let t = plan.time(i + 1);
        if !rho.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite {
                context: "master-equation integration (reduce dt)",
                time: t,
            });
        }

        rho = (&rho + rho.adjoint()) * half;
        let trace = rho.trace().re;
        let drift = (trace - 1.0).abs();
        max_trace_drift = max_trace_drift.max(drift);
        if drift > TRACE_DRIFT_LIMIT {
            return Err(Error::TraceDrift {
                drift,
                limit: TRACE_DRIFT_LIMIT,
                time: t,
            });
        }
        rho *= C64::new(1.0 / trace, 0.0);

        if plan.is_sample(i + 1) {
            samples.push(DensityMatrix::from_trusted(rho.clone(), t));
        }
    }

    Ok(MasterRun {
        samples,
        max_trace_drift,
    })
}

fn trace_product(x: &DMatrix<C64>, y: &DMatrix<C64>) -> C64 {
    let n = x.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += x[(i, j)] * y[(j, i)];
        }
    }
    acc
}

/// Extracts the Gaussian moments from ρ̂: mean_ℓ = tr(x̂_ℓ ρ̂) and
/// V_{ℓm} = ½ tr((x̂_ℓ x̂_m + x̂_m x̂_ℓ) ρ̂) − mean_ℓ·mean_m. Imaginary parts
/// above [`MOMENT_RESIDUE_TOL`] indicate broken Hermiticity and are errors.
pub fn moments_from_density(rig: &FockRig, rho: &DensityMatrix) -> Result<GaussianMomentState> {
    if rho.dim() != rig.dim() {
        return Err(Error::DimensionMismatch {
            context: "moments_from_density density matrix",
            expected: rig.dim(),
            found: rho.dim(),
        });
    }
    let dim = 2 * rig.n_modes();
    let r = rho.matrix();

    let mut residue = 0.0_f64;
    let mut mean = nalgebra::DVector::<f64>::zeros(dim);
    // Cache x̂_m ρ̂ so each V entry is a trace of x̂_ℓ against a cached product.
    let products: Vec<DMatrix<C64>> = rig.quadratures.iter().map(|x| x * r).collect();

    for l in 0..dim {
        let t = products[l].trace();
        residue = residue.max(t.im.abs());
        mean[l] = t.re;
    }

    let mut cov = DMatrix::<f64>::zeros(dim, dim);
    for l in 0..dim {
        for m in l..dim {
            let t_lm = trace_product(&rig.quadratures[l], &products[m]);
            let t_ml = trace_product(&rig.quadratures[m], &products[l]);
            let symmetrized = (t_lm + t_ml) * 0.5;
            residue = residue.max(symmetrized.im.abs());
            let value = symmetrized.re - mean[l] * mean[m];
            cov[(l, m)] = value;
            cov[(m, l)] = value;
        }
    }

    if residue > MOMENT_RESIDUE_TOL {
        return Err(Error::ImaginaryResidue {
            context: "oracle moment extraction",
            residue,
            tolerance: MOMENT_RESIDUE_TOL,
        });
    }
    GaussianMomentState::new(rho.time(), mean, cov)
}

/// Weyl-symmetrized third central moment ⟨(x̂_ℓ − ⟨x̂_ℓ⟩)³⟩ — a Gaussianity
/// probe (zero for every Gaussian state).
pub fn third_central_moment(rig: &FockRig, rho: &DensityMatrix, l: usize) -> Result<f64> {
    if rho.dim() != rig.dim() {
        return Err(Error::DimensionMismatch {
            context: "third_central_moment density matrix",
            expected: rig.dim(),
            found: rho.dim(),
        });
    }
    let x = &rig.quadratures[l];
    let mu = (x * rho.matrix()).trace().re;
    let centered = x - DMatrix::<C64>::identity(rig.dim(), rig.dim()) * C64::new(mu, 0.0);
    let cubed = &centered * &centered * &centered;
    let t = trace_product(&cubed, rho.matrix());
    if t.im.abs() > MOMENT_RESIDUE_TOL {
        return Err(Error::ImaginaryResidue {
            context: "third-moment extraction",
            residue: t.im.abs(),
            tolerance: MOMENT_RESIDUE_TOL,
        });
    }
    Ok(t.re)
}

/// Population in the top `tail_levels` Fock levels: the sum of diagonal
/// entries over basis states where any mode sits at level ≥
/// cutoff − tail_levels. The truncation-error proxy for oracle runs.
pub fn cutoff_adequacy(rig: &FockRig, rho: &DensityMatrix, tail_levels: usize) -> Result<f64> {
    if rho.dim() != rig.dim() {
        return Err(Error::DimensionMismatch {
            context: "cutoff_adequacy density matrix",
            expected: rig.dim(),
            found: rho.dim(),
        });
    }
    if tail_levels == 0 || tail_levels >= rig.cutoff() {
        return Err(Error::TailLevels {
            tail_levels,
            cutoff: rig.cutoff(),
        });
    }
    let threshold = rig.cutoff() - tail_levels;
    let mut population = 0.0;
    for idx in 0..rig.dim() {
        if (0..rig.n_modes()).any(|m| rig.level(idx, m) >= threshold) {
            population += rho.matrix()[(idx, idx)].re;
        }
    }
    Ok(population)
}

/// tr(ρ̂²) — the exact purity, for cross-checking the Gaussian formula.
pub fn purity_exact(rho: &DensityMatrix) -> f64 {
    trace_product(rho.matrix(), rho.matrix()).re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LinearOpenSystem;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn damped_system(omega: f64, kappa: f64) -> LinearOpenSystem {
        let m = DMatrix::identity(2, 2) * omega;
        let s = (kappa / 2.0).sqrt();
        let c = DMatrix::from_row_slice(1, 2, &[C64::new(s, 0.0), C64::new(0.0, s)]);
        LinearOpenSystem::new(1, m, c).unwrap()
    }

    fn free_decay_system(kappa: f64) -> LinearOpenSystem {
        let m = DMatrix::zeros(2, 2);
        let s = (kappa / 2.0).sqrt();
        let c = DMatrix::from_row_slice(1, 2, &[C64::new(s, 0.0), C64::new(0.0, s)]);
        LinearOpenSystem::new(1, m, c).unwrap()
    }

    fn random_hermitian(dim: usize, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
        let raw = DMatrix::from_fn(dim, dim, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        (&raw + raw.adjoint()) * C64::new(0.5, 0.0)
    }

    #[test]
    fn annihilation_small_cutoffs() {
        let a2 = annihilation(2).unwrap();
        assert_eq!(a2[(0, 1)], C64::new(1.0, 0.0));
        assert_eq!(a2[(0, 0)], C64::new(0.0, 0.0));
        assert_eq!(a2[(1, 0)], C64::new(0.0, 0.0));
        assert_eq!(a2[(1, 1)], C64::new(0.0, 0.0));

        let a3 = annihilation(3).unwrap();
        assert_eq!(a3[(0, 1)], C64::new(1.0, 0.0));
        assert_abs_diff_eq!(a3[(1, 2)].re, 2.0_f64.sqrt(), epsilon = 1e-16);
    }

    #[test]
    fn annihilation_truncated_commutator() {
        let d = 6;
        let a = annihilation(d).unwrap();
        let comm = &a * a.adjoint() - a.adjoint() * &a;
        for i in 0..d - 1 {
            assert_abs_diff_eq!(comm[(i, i)].re, 1.0, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(comm[(d - 1, d - 1)].re, 1.0 - d as f64, epsilon = 1e-12);
    }

    #[test]
    fn annihilation_rejects_tiny_cutoff() {
        assert!(matches!(annihilation(1), Err(Error::CutoffTooSmall { .. })));
    }

    #[test]
    fn rig_commutators_match_sigma_away_from_boundary() {
        let rig = build_rig(&damped_system(1.0, 0.5), 8).unwrap();
        assert!(rig.commutator_deviation() <= 1e-12);

        // Two modes, small cutoff.
        let m = DMatrix::identity(4, 4);
        let sys2 = LinearOpenSystem::new(2, m, DMatrix::zeros(0, 0)).unwrap();
        let rig2 = build_rig(&sys2, 5).unwrap();
        assert!(rig2.commutator_deviation() <= 1e-12);
    }

    #[test]
    fn rig_hamiltonian_is_number_operator_plus_half() {
        let rig = build_rig(&damped_system(1.0, 0.0), 10).unwrap();
        let h = rig.hamiltonian_op();
        assert!(max_abs(&(h - h.adjoint())) <= 1e-12);
        for n in 0..=8 {
            assert_abs_diff_eq!(h[(n, n)].re, n as f64 + 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn rig_lindblad_op_is_scaled_annihilation() {
        let kappa = 0.5;
        let rig = build_rig(&damped_system(1.0, kappa), 7).unwrap();
        let expected = annihilation(7).unwrap() * C64::new(kappa.sqrt(), 0.0);
        assert!(max_abs(&(&rig.lindblad_ops()[0] - expected)) <= 1e-12);
    }

    #[test]
    fn rig_rejects_three_modes_and_bad_cutoffs() {
        let sys3 = LinearOpenSystem::new(3, DMatrix::identity(6, 6), DMatrix::zeros(0, 0)).unwrap();
        assert!(matches!(
            build_rig(&sys3, 4),
            Err(Error::TooManyModes { .. })
        ));
        let sys = damped_system(1.0, 0.5);
        assert!(matches!(
            build_rig(&sys, 1),
            Err(Error::CutoffTooSmall { .. })
        ));
        assert!(matches!(
            build_rig(&sys, 41),
            Err(Error::CutoffTooLarge { .. })
        ));
    }

    #[test]
    fn density_matrix_invariants_are_enforced() {
        // Non-Hermitian.
        let mut bad = DMatrix::<C64>::zeros(2, 2);
        bad[(0, 0)] = C64::new(1.0, 0.0);
        bad[(0, 1)] = C64::new(0.5, 0.0);
        assert!(DensityMatrix::new(bad, 0.0).is_err());

        // Wrong trace.
        let half = DMatrix::<C64>::identity(2, 2) * C64::new(0.25, 0.0);
        assert!(DensityMatrix::new(half, 0.0).is_err());

        // Negative eigenvalue.
        let mut neg = DMatrix::<C64>::zeros(2, 2);
        neg[(0, 0)] = C64::new(1.5, 0.0);
        neg[(1, 1)] = C64::new(-0.5, 0.0);
        assert!(DensityMatrix::new(neg, 0.0).is_err());

        // A proper state passes.
        let mut ok = DMatrix::<C64>::zeros(2, 2);
        ok[(0, 0)] = C64::new(0.75, 0.0);
        ok[(1, 1)] = C64::new(0.25, 0.0);
        assert!(DensityMatrix::new(ok, 0.0).is_ok());
    }

    #[test]
    fn lindblad_rhs_single_photon_decay() {
        let kappa = 0.5;
        let rig = build_rig(&free_decay_system(kappa), 4).unwrap();
        let rho = fock_density(&rig, &[1]).unwrap();
        let rhs = lindblad_rhs(&rig, &rho).unwrap();
        let mut expected = DMatrix::<C64>::zeros(4, 4);
        expected[(0, 0)] = C64::new(kappa, 0.0);
        expected[(1, 1)] = C64::new(-kappa, 0.0);
        assert!(max_abs(&(rhs - expected)) <= 1e-14);
    }

    #[test]
    fn lindblad_rhs_preserves_trace_and_hermiticity() {
        let rig = build_rig(&damped_system(1.0, 0.5), 6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let herm = random_hermitian(6, &mut rng);
            let rhs = lindblad_rhs_raw(&rig, &herm);
            let scale = max_abs(&rhs).max(1.0);
            assert!(rhs.trace().norm() <= 1e-12 * scale);
            assert!(max_abs(&(&rhs - rhs.adjoint())) <= 1e-12 * scale);
        }
    }

    #[test]
    fn vacuum_moments_are_exact() {
        let rig = build_rig(&damped_system(1.0, 0.5), 4).unwrap();
        let rho = vacuum_density(&rig);
        let state = moments_from_density(&rig, &rho).unwrap();
        assert!(state.mean().amax() <= 1e-12);
        assert!(max_abs(&(state.covariance() - DMatrix::identity(2, 2) * 0.5)) <= 1e-12);
    }

    #[test]
    fn coherent_state_moments() {
        let rig = build_rig(&damped_system(1.0, 0.5), 20).unwrap();
        let rho = coherent_density(&rig, &[C64::new(0.5, 0.0)]).unwrap();
        let state = moments_from_density(&rig, &rho).unwrap();
        // mean_q = √2·Re α = 1/√2, mean_p = 0, V = I/2.
        assert_abs_diff_eq!(state.mean()[0], std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-10);
        assert_abs_diff_eq!(state.mean()[1], 0.0, epsilon = 1e-12);
        assert!(max_abs(&(state.covariance() - DMatrix::identity(2, 2) * 0.5)) <= 1e-10);
    }

    #[test]
    fn fock_one_moments() {
        let rig = build_rig(&damped_system(1.0, 0.5), 6).unwrap();
        let rho = fock_density(&rig, &[1]).unwrap();
        let state = moments_from_density(&rig, &rho).unwrap();
        assert!(state.mean().amax() <= 1e-12);
        assert!(max_abs(&(state.covariance() - DMatrix::identity(2, 2) * 1.5)) <= 1e-12);
    }

    #[test]
    fn thermal_moments_match_occupation() {
        let nbar = 0.3;
        let rig = build_rig(&damped_system(1.0, 0.5), 30).unwrap();
        let rho = thermal_density(&rig, &[nbar]).unwrap();
        let state = moments_from_density(&rig, &rho).unwrap();
        assert!(state.mean().amax() <= 1e-12);
        let expected = DMatrix::identity(2, 2) * (nbar + 0.5);
        assert!(max_abs(&(state.covariance() - expected)) <= 1e-12);
    }

    #[test]
    fn master_constant_without_generators() {
        let m = DMatrix::zeros(2, 2);
        let sys = LinearOpenSystem::new(1, m, DMatrix::zeros(0, 0)).unwrap();
        let rig = build_rig(&sys, 4).unwrap();
        let rho0 = fock_density(&rig, &[2]).unwrap();
        let run = integrate_master(&rig, &rho0, 1.0, 0.05, 5).unwrap();
        for s in &run.samples {
            assert!(max_abs(&(s.matrix() - rho0.matrix())) <= 1e-15);
        }
        assert!(run.max_trace_drift <= 1e-15);
    }

    #[test]
    fn master_vacuum_is_decay_fixed_point() {
        let rig = build_rig(&damped_system(1.0, 0.5), 6).unwrap();
        let rho0 = vacuum_density(&rig);
        let run = integrate_master(&rig, &rho0, 2.0, 1e-2, 20).unwrap();
        let last = run.samples.last().unwrap();
        assert!(max_abs(&(last.matrix() - rho0.matrix())) <= 1e-12);
    }

    #[test]
    fn master_single_photon_population_decays_exponentially() {
        let kappa = 0.5;
        let rig = build_rig(&damped_system(1.0, kappa), 5).unwrap();
        let rho0 = fock_density(&rig, &[1]).unwrap();
        let t_final = 2.0;
        let run = integrate_master(&rig, &rho0, t_final, 1e-3, 2000).unwrap();
        let last = run.samples.last().unwrap();
        let population = last.matrix()[(1, 1)].re;
        assert_abs_diff_eq!(population, (-kappa * t_final).exp(), epsilon = 1e-5);
    }

    #[test]
    fn cutoff_adequacy_examples() {
        let rig20 = build_rig(&damped_system(1.0, 0.5), 20).unwrap();
        let vac = vacuum_density(&rig20);
        assert_eq!(cutoff_adequacy(&rig20, &vac, 3).unwrap(), 0.0);

        let coherent_small = coherent_density(&rig20, &[C64::new(0.5, 0.0)]).unwrap();
        assert!(cutoff_adequacy(&rig20, &coherent_small, 3).unwrap() < 1e-12);

        let rig10 = build_rig(&damped_system(1.0, 0.5), 10).unwrap();
        let coherent_hot = coherent_density(&rig10, &[C64::new(3.0, 0.0)]).unwrap();
        assert!(cutoff_adequacy(&rig10, &coherent_hot, 3).unwrap() > 1e-2);
    }

    #[test]
    fn cutoff_adequacy_rejects_bad_tail() {
        let rig = build_rig(&damped_system(1.0, 0.5), 4).unwrap();
        let vac = vacuum_density(&rig);
        assert!(matches!(
            cutoff_adequacy(&rig, &vac, 0),
            Err(Error::TailLevels { .. })
        ));
        assert!(matches!(
            cutoff_adequacy(&rig, &vac, 4),
            Err(Error::TailLevels { .. })
        ));
    }

    #[test]
    fn purity_exact_pure_and_mixed() {
        let rig = build_rig(&damped_system(1.0, 0.5), 4).unwrap();
        assert_abs_diff_eq!(purity_exact(&vacuum_density(&rig)), 1.0, epsilon = 1e-14);

        let mut mixed = DMatrix::<C64>::zeros(4, 4);
        mixed[(0, 0)] = C64::new(0.5, 0.0);
        mixed[(1, 1)] = C64::new(0.5, 0.0);
        let mixed = DensityMatrix::new(mixed, 0.0).unwrap();
        assert_abs_diff_eq!(purity_exact(&mixed), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn third_moment_vanishes_for_coherent_state() {
        let rig = build_rig(&damped_system(1.0, 0.5), 20).unwrap();
        let rho = coherent_density(&rig, &[C64::new(0.5, 0.0)]).unwrap();
        for l in 0..2 {
            assert_abs_diff_eq!(
                third_central_moment(&rig, &rho, l).unwrap(),
                0.0,
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn two_mode_vacuum_moments() {
        let m = DMatrix::identity(4, 4);
        let sys = LinearOpenSystem::new(2, m, DMatrix::zeros(0, 0)).unwrap();
        let rig = build_rig(&sys, 4).unwrap();
        let state = moments_from_density(&rig, &vacuum_density(&rig)).unwrap();
        assert_eq!(state.dim(), 4);
        assert!(state.mean().amax() <= 1e-12);
        assert!(max_abs(&(state.covariance() - DMatrix::identity(4, 4) * 0.5)) <= 1e-12);
    }
}
