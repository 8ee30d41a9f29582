// Copyright 2026 loqs Contributors
// SPDX-License-Identifier: Apache-2.0

//! Command-line surface. Every run is deterministic: identical inputs
//! produce byte-identical output (fixed `{:.16e}` formatting, no
//! timestamps). Exit codes: 0 success, 1 validation/physics errors,
//! 2 usage errors.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fock::{
    build_rig, coherent_density, cutoff_adequacy, integrate_master, moments_from_density,
    thermal_density, DensityMatrix, FockRig, DEFAULT_TAIL_LEVELS, TAIL_THRESHOLD,
};
use crate::io::{load_model, load_model_file, save_trajectory};
use crate::linalg::spectral_norm;
use crate::model::{validate_model, DriftDiffusion};
use crate::moments::{
    check_physical, integrate, max_trajectory_deviation, purity, steady_state,
    GaussianMomentState, SteadyState, Trajectory, TrajectoryMetadata, HURWITZ_TOL,
};
use crate::C64;

#[derive(Parser)]
#[command(
    name = "loqs",
    version,
    about = "Linear open quantum systems: Gaussian moment dynamics cross-validated against a truncated-Fock-space Lindblad integrator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the drift matrix A, diffusion matrix D, ‖A‖₂, and a dt heuristic
    Build {
        /// Model file (JSON)
        model: PathBuf,
    },
    /// Integrate the moment equations and write the trajectory as CSV
    Simulate {
        /// Model file (JSON)
        model: PathBuf,
        /// End time of the integration window
        #[arg(long)]
        t_final: f64,
        /// Fixed RK4 step size
        #[arg(long)]
        dt: f64,
        /// Keep every k-th sample (endpoints always kept)
        #[arg(long, default_value_t = 1)]
        sample_every: usize,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve for the stationary covariance, or report instability
    Steadystate {
        /// Model file (JSON)
        model: PathBuf,
    },
    /// Print the validation and physicality report
    Validate {
        /// Model file (JSON)
        model: PathBuf,
    },
    /// Run both engines and report their maximum deviation
    Oracle {
        /// Model file (JSON)
        model: PathBuf,
        /// Per-mode Fock dimension of the oracle
        #[arg(long)]
        cutoff: usize,
        /// End time of the integration window
        #[arg(long)]
        t_final: f64,
        /// Fixed RK4 step size (shared by both engines)
        #[arg(long)]
        dt: f64,
        /// Keep every k-th sample (endpoints always kept)
        #[arg(long, default_value_t = 1)]
        sample_every: usize,
        /// Top Fock levels whose population gauges truncation error
        #[arg(long, default_value_t = DEFAULT_TAIL_LEVELS)]
        tail_levels: usize,
        /// Optional CSV path for the oracle-extracted moment trajectory
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses argv and dispatches; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match cli.command {
        Command::Build { model } => cmd_build(&model),
        Command::Simulate {
            model,
            t_final,
            dt,
            sample_every,
            out,
        } => cmd_simulate(&model, t_final, dt, sample_every, &out),
        Command::Steadystate { model } => cmd_steadystate(&model),
        Command::Validate { model } => cmd_validate(&model),
        Command::Oracle {
            model,
            cutoff,
            t_final,
            dt,
            sample_every,
            tail_levels,
            out,
        } => cmd_oracle(&model, cutoff, t_final, dt, sample_every, tail_levels, out.as_deref()),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn print_matrix(label: &str, m: &DMatrix<f64>) {
    println!("{label} =");
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| fmt(m[(r, c)])).collect();
        println!("  [{}]", row.join(", "));
    }
}

fn cmd_build(model: &Path) -> Result<()> {
    let (system, _) = load_model(model)?;
    let ad = DriftDiffusion::build(&system)?;
    println!(
        "system: N = {} modes, K = {} channels",
        system.n_modes(),
        system.n_channels()
    );
    print_matrix("A", ad.drift());
    print_matrix("D", ad.diffusion());
    let norm = spectral_norm(ad.drift());
    println!("spectral_norm_A = {}", fmt(norm));
    println!("suggested_dt = {}", fmt(0.1 / norm.max(1.0)));
    Ok(())
}

fn cmd_simulate(model: &Path, t_final: f64, dt: f64, sample_every: usize, out: &Path) -> Result<()> {
    let (system, initial) = load_model(model)?;
    let ad = DriftDiffusion::build(&system)?;
    let traj = integrate(&ad, &initial, t_final, dt, sample_every)?;
    save_trajectory(&traj, out)?;

    let last = traj.last().expect("integration produces at least two samples");
    let (physical, min_eig) = check_physical(last, &system.symplectic())?;
    println!("samples = {}", traj.len());
    println!("final_t = {}", fmt(last.time()));
    println!("final_mean_max = {}", fmt(last.mean().amax()));
    println!(
        "final_physicality_min_eig = {} ({})",
        fmt(min_eig),
        if physical { "ok" } else { "VIOLATED" }
    );
    println!("wrote: {}", out.display());
    Ok(())
}

fn cmd_steadystate(model: &Path) -> Result<()> {
    let (system, _) = load_model(model)?;
    let ad = DriftDiffusion::build(&system)?;
    match steady_state(&ad)? {
        SteadyState::Stationary {
            covariance,
            residual,
        } => {
            print_matrix("V_ss", &covariance);
            println!("residual = {}", fmt(residual));
            let state =
                GaussianMomentState::new(0.0, DVector::zeros(ad.dim()), covariance.clone())?;
            match purity(&state) {
                Ok(p) => println!("purity = {}", fmt(p)),
                Err(_) => println!("purity = undefined (det V_ss <= 0)"),
            }
            Ok(())
        }
        SteadyState::Unstable { mut eigenvalues } => {
            println!("unstable: no stationary covariance (drift is not Hurwitz)");
            eigenvalues.sort_by(|a, b| {
                b.re.partial_cmp(&a.re)
                    .unwrap()
                    .then(a.im.partial_cmp(&b.im).unwrap())
            });
            for z in &eigenvalues {
                let offending = z.re >= -HURWITZ_TOL;
                println!(
                    "eigenvalue = {} {}i{}",
                    fmt(z.re),
                    fmt(z.im),
                    if offending { "  <- offending" } else { "" }
                );
            }
            Err(Error::InvalidTrajectory(
                "no stationary covariance exists for this system".to_string(),
            ))
        }
    }
}

fn cmd_validate(model: &Path) -> Result<()> {
    let file = load_model_file(model)?;
    let (m, c) = file.matrices()?;
    let report = validate_model(file.n_modes, &m, &c);
    println!("validation report:");
    print!("{report}");
    if !report.passed() {
        return Err(Error::Validation(report));
    }

    let (system, initial) = file.to_system()?;
    let (physical, min_eig) = check_physical(&initial, &system.symplectic())?;
    println!(
        "initial-state physicality: min eigenvalue of V + (i/2)Σ = {} ({})",
        fmt(min_eig),
        if physical { "ok" } else { "VIOLATED" }
    );
    if !physical {
        return Err(Error::InvalidTrajectory(
            "initial covariance violates the uncertainty relation".to_string(),
        ));
    }
    Ok(())
}

/// Maps the model's Gaussian initial state to a density matrix the oracle
/// can prepare: coherent/vacuum when V = I/2, per-mode thermal when the
/// covariance is diagonal and isotropic per mode with zero mean.
fn initial_density(rig: &FockRig, state: &GaussianMomentState) -> Result<DensityMatrix> {
    const MATCH_TOL: f64 = 1e-9;
    let n = rig.n_modes();
    let dim = 2 * n;
    let v = state.covariance();
    let mean = state.mean();

    for r in 0..dim {
        for c in 0..dim {
            if r != c && v[(r, c)].abs() > MATCH_TOL {
                return Err(Error::UnsupportedInitialState {
                    reason: format!(
                        "covariance has off-diagonal entry V[{r},{c}] = {}; the oracle prepares \
                         vacuum, coherent, and per-mode thermal states only",
                        v[(r, c)]
                    ),
                });
            }
        }
    }
    for k in 0..n {
        if (v[(k, k)] - v[(n + k, n + k)]).abs() > MATCH_TOL {
            return Err(Error::UnsupportedInitialState {
                reason: format!(
                    "mode {k} has unequal q/p variances ({} vs {}); squeezed initial states are \
                     not supported by the oracle",
                    v[(k, k)],
                    v[(n + k, n + k)]
                ),
            });
        }
    }

    if (0..n).all(|k| (v[(k, k)] - 0.5).abs() <= MATCH_TOL) {
        // Minimum-uncertainty isotropic state: coherent with
        // α_k = (⟨q_k⟩ + i⟨p_k⟩)/√2 (vacuum when the mean vanishes).
        let inv_sqrt2 = 1.0 / 2.0_f64.sqrt();
        let alphas: Vec<C64> = (0..n)
            .map(|k| C64::new(mean[k] * inv_sqrt2, mean[n + k] * inv_sqrt2))
            .collect();
        return coherent_density(rig, &alphas);
    }

    if mean.amax() > MATCH_TOL {
        return Err(Error::UnsupportedInitialState {
            reason: "displaced thermal states are not supported by the oracle; set the mean to \
                     zero or the covariance to I/2"
                .to_string(),
        });
    }
    let mut nbars = Vec::with_capacity(n);
    for k in 0..n {
        let nu = v[(k, k)];
        if nu < 0.5 - MATCH_TOL {
            return Err(Error::UnsupportedInitialState {
                reason: format!("mode {k} variance {nu} lies below the vacuum value 1/2"),
            });
        }
        nbars.push((nu - 0.5).max(0.0));
    }
    thermal_density(rig, &nbars)
}

#[allow(clippy::too_many_arguments)]
fn cmd_oracle(
    model: &Path,
    cutoff: usize,
    t_final: f64,
    dt: f64,
    sample_every: usize,
    tail_levels: usize,
    out: Option<&Path>,
) -> Result<()> {
    let (system, initial) = load_model(model)?;
    let ad = DriftDiffusion::build(&system)?;
    let rig = build_rig(&system, cutoff)?;
    let rho0 = initial_density(&rig, &initial)?;

    // Fail fast if the initial state already leaks into the truncation tail.
    let initial_tail = cutoff_adequacy(&rig, &rho0, tail_levels)?;
    if initial_tail > TAIL_THRESHOLD {
        return Err(Error::CutoffInadequate {
            tail: initial_tail,
            threshold: TAIL_THRESHOLD,
        });
    }

    let run = integrate_master(&rig, &rho0, t_final, dt, sample_every)?;
    let mut max_tail = initial_tail;
    let mut oracle_samples = Vec::with_capacity(run.samples.len());
    for rho in &run.samples {
        max_tail = max_tail.max(cutoff_adequacy(&rig, rho, tail_levels)?);
        oracle_samples.push(moments_from_density(&rig, rho)?);
    }
    let oracle_traj = Trajectory::new(
        2 * system.n_modes(),
        oracle_samples,
        TrajectoryMetadata {
            integrator: "lindblad-rk4".to_string(),
            dt,
            fingerprint: ad.fingerprint(),
        },
    )?;

    let moment_traj = integrate(&ad, &initial, t_final, dt, sample_every)?;
    let (mean_dev, cov_dev) = max_trajectory_deviation(&moment_traj, &oracle_traj)?;

    println!("samples = {}", oracle_traj.len());
    println!("max_mean_deviation = {}", fmt(mean_dev));
    println!("max_cov_deviation = {}", fmt(cov_dev));
    println!("max_tail_population = {}", fmt(max_tail));
    println!("max_trace_drift = {}", fmt(run.max_trace_drift));
    if let Some(path) = out {
        save_trajectory(&oracle_traj, path)?;
        println!("wrote: {}", path.display());
    }

    if max_tail > TAIL_THRESHOLD {
        return Err(Error::CutoffInadequate {
            tail: max_tail,
            threshold: TAIL_THRESHOLD,
        });
    }
    Ok(())
}
