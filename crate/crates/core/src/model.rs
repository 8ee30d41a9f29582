// Copyright 2026 loqs Contributors
// SPDX-License-Identifier: Apache-2.0

//! System data model: the symplectic form, the linear open system (M, C),
//! input validation, and construction of the drift/diffusion pair
//!
//!   A = Σ (M + Im(C†C)),    D = Σ Re(C†C) Σᵀ,
//!
//! where Re/Im act entrywise on the Hermitian matrix C†C. Quadrature
//! ordering is (q₁…q_N, p₁…p_N) throughout; ℏ = 1.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::C64;

/// Absolute max-norm tolerance for Hamiltonian symmetry ‖M − Mᵀ‖_max.
pub const SYM_TOL: f64 = 1e-10;

/// Largest imaginary residue tolerated before casting A or D to real.
pub const RESIDUE_TOL: f64 = 1e-12;

/// Eigenvalue tolerance for the positive-semidefiniteness of D.
pub const DIFFUSION_PSD_TOL: f64 = 1e-10;

/// The symplectic form Σ = [[0, I_N], [−I_N, 0]] for N modes.
///
/// Encodes the canonical commutation relations [x̂_ℓ, x̂_m] = i Σ_{ℓm} with
/// quadratures ordered (q₁…q_N, p₁…p_N).
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    n_modes: usize,
    matrix: DMatrix<f64>,
}

/// Builds the symplectic form for `n_modes` ≥ 1 modes.
pub fn symplectic_form(n_modes: usize) -> Result<SymplecticForm> {
    if n_modes == 0 {
        return Err(Error::ZeroModes);
    }
    let dim = 2 * n_modes;
    let mut matrix = DMatrix::zeros(dim, dim);
    for j in 0..n_modes {
        matrix[(j, n_modes + j)] = 1.0;
        matrix[(n_modes + j, j)] = -1.0;
    }
    Ok(SymplecticForm { n_modes, matrix })
}

impl SymplecticForm {
    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// Phase-space dimension 2N.
    pub fn dim(&self) -> usize {
        2 * self.n_modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

/// A linear open quantum system: quadratic Hamiltonian Ĥ = ½ x̂ᵀMx̂ and
/// K linear Lindblad operators ĉ = Cx̂.
///
/// Constructed only through [`LinearOpenSystem::new`], which validates the
/// input and symmetrizes M, so a value of this type is always well-formed.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOpenSystem {
    n_modes: usize,
    hamiltonian: DMatrix<f64>,
    coupling: DMatrix<C64>,
}

impl LinearOpenSystem {
    /// Validates `(n_modes, M, C)` and builds the system. M is symmetrized
    /// as (M + Mᵀ)/2 after passing the symmetry check, so downstream code
    /// sees exact symmetry. A coupling matrix with zero rows (K = 0) is a
    /// closed system.
    pub fn new(
        n_modes: usize,
        hamiltonian: DMatrix<f64>,
        coupling: DMatrix<C64>,
    ) -> Result<Self> {
        let report = validate_model(n_modes, &hamiltonian, &coupling);
        if !report.passed() {
            return Err(Error::Validation(report));
        }
        let hamiltonian = (&hamiltonian + hamiltonian.transpose()) * 0.5;
        Ok(LinearOpenSystem {
            n_modes,
            hamiltonian,
            coupling,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// Phase-space dimension 2N.
    pub fn dim(&self) -> usize {
        2 * self.n_modes
    }

    /// Number of decoherence channels K (rows of C).
    pub fn n_channels(&self) -> usize {
        self.coupling.nrows()
    }

    /// The symmetric Hamiltonian matrix M.
    pub fn hamiltonian(&self) -> &DMatrix<f64> {
        &self.hamiltonian
    }

    /// The complex K×2N coupling matrix C.
    pub fn coupling(&self) -> &DMatrix<C64> {
        &self.coupling
    }

    pub fn symplectic(&self) -> SymplecticForm {
        symplectic_form(self.n_modes).expect("n_modes validated positive")
    }
}

/// One named validation check with its outcome.
#[derive(Debug, Clone)]
pub struct ValidationCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Pass/fail report produced by [`validate_model`].
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub checks: Vec<ValidationCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ValidationCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for check in &self.checks {
            let tag = if check.passed { "ok  " } else { "FAIL" };
            if check.detail.is_empty() {
                writeln!(f, "[{tag}] {}", check.name)?;
            } else {
                writeln!(f, "[{tag}] {} — {}", check.name, check.detail)?;
            }
        }
        Ok(())
    }
}

/// Checks raw model data before a [`LinearOpenSystem`] may be built:
/// positive mode count, M square of size 2N, ‖M − Mᵀ‖_max ≤ [`SYM_TOL`],
/// C with 2N columns, and all entries finite.
pub fn validate_model(
    n_modes: usize,
    hamiltonian: &DMatrix<f64>,
    coupling: &DMatrix<C64>,
) -> ValidationReport {
    let dim = 2 * n_modes;
    let mut checks = Vec::new();

    checks.push(ValidationCheck {
        name: "mode count",
        passed: n_modes >= 1,
        detail: if n_modes >= 1 {
            format!("N = {n_modes}")
        } else {
            "n_modes must be at least 1".to_string()
        },
    });

    let shape_ok = hamiltonian.nrows() == dim && hamiltonian.ncols() == dim;
    checks.push(ValidationCheck {
        name: "hamiltonian shape",
        passed: shape_ok,
        detail: if shape_ok {
            format!("{dim}×{dim}")
        } else {
            format!(
                "expected {dim}×{dim}, found {}×{}",
                hamiltonian.nrows(),
                hamiltonian.ncols()
            )
        },
    });

    if shape_ok {
        let mut worst = 0.0_f64;
        let mut worst_pair = (0usize, 0usize);
        for i in 0..dim {
            for j in (i + 1)..dim {
                let gap = (hamiltonian[(i, j)] - hamiltonian[(j, i)]).abs();
                if gap > worst {
                    worst = gap;
                    worst_pair = (i, j);
                }
            }
        }
        let passed = worst <= SYM_TOL;
        checks.push(ValidationCheck {
            name: "hamiltonian symmetry",
            passed,
            detail: if passed {
                format!("‖M − Mᵀ‖_max = {worst:.3e} ≤ {SYM_TOL:.0e}")
            } else {
                format!(
                    "|M[{i},{j}] − M[{j},{i}]| = {worst:.3e} exceeds {SYM_TOL:.0e}",
                    i = worst_pair.0,
                    j = worst_pair.1
                )
            },
        });
    }

    let cols_ok = coupling.ncols() == dim || (coupling.nrows() == 0 && coupling.ncols() == 0);
    checks.push(ValidationCheck {
        name: "coupling shape",
        passed: cols_ok,
        detail: if cols_ok {
            format!("K = {} channels × {dim} columns", coupling.nrows())
        } else {
            format!("expected {dim} columns, found {}", coupling.ncols())
        },
    });

    let m_finite = hamiltonian.iter().all(|x| x.is_finite());
    let c_finite = coupling.iter().all(|z| z.re.is_finite() && z.im.is_finite());
    checks.push(ValidationCheck {
        name: "finite entries",
        passed: m_finite && c_finite,
        detail: if m_finite && c_finite {
            String::new()
        } else if !m_finite {
            "hamiltonian contains a non-finite entry".to_string()
        } else {
            "coupling contains a non-finite entry".to_string()
        },
    });

    ValidationReport { checks }
}

/// The drift/diffusion pair (A, D) governing the moment dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftDiffusion {
    drift: DMatrix<f64>,
    diffusion: DMatrix<f64>,
}

impl DriftDiffusion {
    /// Builds both matrices from a validated system.
    pub fn build(system: &LinearOpenSystem) -> Result<Self> {
        Ok(DriftDiffusion {
            drift: build_drift(system)?,
            diffusion: build_diffusion(system)?,
        })
    }

    /// Constructs the pair from raw matrices; used by tests and tooling
    /// that work with A, D directly. The diffusion matrix is symmetrized.
    pub fn from_parts(drift: DMatrix<f64>, diffusion: DMatrix<f64>) -> Result<Self> {
        let n = drift.nrows();
        if drift.ncols() != n || diffusion.nrows() != n || diffusion.ncols() != n {
            return Err(Error::DimensionMismatch {
                context: "DriftDiffusion::from_parts",
                expected: n,
                found: diffusion.nrows().max(diffusion.ncols()).max(drift.ncols()),
            });
        }
        let diffusion = (&diffusion + diffusion.transpose()) * 0.5;
        Ok(DriftDiffusion { drift, diffusion })
    }

    /// The drift matrix A.
    pub fn drift(&self) -> &DMatrix<f64> {
        &self.drift
    }

    /// The diffusion matrix D (exactly symmetric).
    pub fn diffusion(&self) -> &DMatrix<f64> {
        &self.diffusion
    }

    /// Phase-space dimension 2N.
    pub fn dim(&self) -> usize {
        self.drift.nrows()
    }

    /// Order-sensitive FNV-1a hash of (dim, A, D), used to stamp trajectory
    /// files so a saved run can be traced back to the system that produced it.
    pub fn fingerprint(&self) -> u64 {
        let mut h = crate::linalg::Fnv1a::new();
        h.write_usize(self.dim());
        for &x in self.drift.iter() {
            h.write_f64(x);
        }
        for &x in self.diffusion.iter() {
            h.write_f64(x);
        }
        h.finish()
    }
}

/// C†C as a complex 2N×2N matrix (Hermitian up to rounding).
fn gram(system: &LinearOpenSystem) -> DMatrix<C64> {
    let c = system.coupling();
    if c.nrows() == 0 {
        return DMatrix::zeros(system.dim(), system.dim());
    }
    c.adjoint() * c
}

fn to_complex(m: &DMatrix<f64>) -> DMatrix<C64> {
    m.map(|x| C64::new(x, 0.0))
}

/// Casts a nominally real complex matrix to `f64`, rejecting imaginary
/// residue above [`RESIDUE_TOL`] (which would indicate inconsistent input
/// rather than rounding noise).
fn cast_real(m: &DMatrix<C64>, context: &'static str) -> Result<DMatrix<f64>> {
    let residue = m.iter().fold(0.0_f64, |acc, z| acc.max(z.im.abs()));
    if residue > RESIDUE_TOL {
        return Err(Error::ImaginaryResidue {
            context,
            residue,
            tolerance: RESIDUE_TOL,
        });
    }
    Ok(m.map(|z| z.re))
}

/// Drift matrix A = Σ (M + Im(C†C)), with Im(Z) = (Z − Z^#)/(2i) entrywise.
pub fn build_drift(system: &LinearOpenSystem) -> Result<DMatrix<f64>> {
    let sigma = to_complex(system.symplectic().matrix());
    let cdc = gram(system);
    let im_cdc = (&cdc - cdc.conjugate()) * C64::new(0.0, -0.5);
    let a = sigma * (to_complex(system.hamiltonian()) + im_cdc);
    cast_real(&a, "drift matrix A")
}

/// Diffusion matrix D = Σ Re(C†C) Σᵀ, symmetrized and checked positive
/// semidefinite (eigenvalues ≥ −[`DIFFUSION_PSD_TOL`]).
pub fn build_diffusion(system: &LinearOpenSystem) -> Result<DMatrix<f64>> {
    let sigma = to_complex(system.symplectic().matrix());
    let cdc = gram(system);
    let re_cdc = (&cdc + cdc.conjugate()) * C64::new(0.5, 0.0);
    let d_complex = &sigma * re_cdc * sigma.transpose();
    let d = cast_real(&d_complex, "diffusion matrix D")?;
    let d = (&d + d.transpose()) * 0.5;

    let min_eig = d
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |a, &x| a.min(x));
    if min_eig < -DIFFUSION_PSD_TOL {
        return Err(Error::NotPositiveSemidefinite {
            min_eigenvalue: min_eig,
            tolerance: DIFFUSION_PSD_TOL,
        });
    }
    Ok(d)
}
