// Copyright 2026 loqs Contributors
// SPDX-License-Identifier: Apache-2.0

//! Model-file ingestion (JSON) and trajectory persistence (CSV).
//!
//! Model files carry the system matrices plus an optional initial state;
//! complex coupling entries are always two-element `[re, im]` arrays.
//! Unknown top-level keys are rejected to catch typos early.
//!
//! Trajectories are stored as CSV with a `t, mean_*, cov_*` header, the
//! covariance as its upper triangle in row-major order, and every number
//! printed with 17 significant digits so a load→save→load round trip is
//! bit-exact. Lines starting with `#` hold metadata and are ignored by
//! byte-level output comparisons.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::LinearOpenSystem;
use crate::moments::{GaussianMomentState, Trajectory, TrajectoryMetadata};
use crate::C64;

/// On-disk model schema. `coupling` may be an empty array (closed system);
/// `initial_mean` defaults to zeros and `initial_cov` to the vacuum I/2.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub n_modes: usize,
    /// 2N×2N real symmetric Hamiltonian matrix, row by row.
    pub hamiltonian: Vec<Vec<f64>>,
    /// K×2N complex coupling matrix; each entry is `[re, im]`.
    pub coupling: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_mean: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_cov: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

fn rows_to_matrix(rows: &[Vec<f64>], expected_cols: usize, context: &'static str) -> Result<DMatrix<f64>> {
    for row in rows {
        if row.len() != expected_cols {
            return Err(Error::DimensionMismatch {
                context,
                expected: expected_cols,
                found: row.len(),
            });
        }
    }
    Ok(DMatrix::from_fn(rows.len(), expected_cols, |r, c| rows[r][c]))
}

impl ModelFile {
    /// Raw matrices (M, C) with shape checks but no physics validation.
    pub fn matrices(&self) -> Result<(DMatrix<f64>, DMatrix<C64>)> {
        let dim = 2 * self.n_modes;
        if self.hamiltonian.len() != dim {
            return Err(Error::DimensionMismatch {
                context: "hamiltonian row count",
                expected: dim,
                found: self.hamiltonian.len(),
            });
        }
        let m = rows_to_matrix(&self.hamiltonian, dim, "hamiltonian row length")?;

        for row in &self.coupling {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    context: "coupling row length",
                    expected: dim,
                    found: row.len(),
                });
            }
        }
        let c = DMatrix::from_fn(self.coupling.len(), dim, |r, k| {
            C64::new(self.coupling[r][k][0], self.coupling[r][k][1])
        });
        Ok((m, c))
    }

    /// Validated system plus initial state with defaults applied.
    pub fn to_system(&self) -> Result<(LinearOpenSystem, GaussianMomentState)> {
        let (m, c) = self.matrices()?;
        let system = LinearOpenSystem::new(self.n_modes, m, c)?;
        let dim = system.dim();

        let mean = match &self.initial_mean {
            Some(v) => {
                if v.len() != dim {
                    return Err(Error::DimensionMismatch {
                        context: "initial_mean length",
                        expected: dim,
                        found: v.len(),
                    });
                }
                DVector::from_row_slice(v)
            }
            None => DVector::zeros(dim),
        };
        let cov = match &self.initial_cov {
            Some(rows) => {
                if rows.len() != dim {
                    return Err(Error::DimensionMismatch {
                        context: "initial_cov row count",
                        expected: dim,
                        found: rows.len(),
                    });
                }
                rows_to_matrix(rows, dim, "initial_cov row length")?
            }
            None => DMatrix::identity(dim, dim) * 0.5,
        };

        let state = GaussianMomentState::new(0.0, mean, cov)?;
        Ok((system, state))
    }
}

/// Parses a model file without running physics validation; lets callers
/// report the full validation outcome themselves.
pub fn load_model_file(path: &Path) -> Result<ModelFile> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Loads and fully validates a model file, returning the system and the
/// initial state (defaults: mean 0, V = I/2).
pub fn load_model(path: &Path) -> Result<(LinearOpenSystem, GaussianMomentState)> {
    load_model_file(path)?.to_system()
}

fn format_value(x: f64) -> String {
    format!("{x:.16e}")
}

fn header_columns(dim: usize) -> Vec<String> {
    let mut cols = Vec::with_capacity(1 + dim + dim * (dim + 1) / 2);
    cols.push("t".to_string());
    for i in 1..=dim {
        cols.push(format!("mean_{i}"));
    }
    for r in 1..=dim {
        for c in r..=dim {
            cols.push(format!("cov_{r}{c}"));
        }
    }
    cols
}

/// Writes a trajectory as CSV: `#`-prefixed metadata lines, one header row,
/// one row per sample with the covariance upper triangle in row-major
/// order. All numbers carry 17 significant digits.
pub fn save_trajectory(traj: &Trajectory, path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    let meta = traj.metadata();
    writeln!(out, "# integrator: {}", meta.integrator)?;
    writeln!(out, "# dt: {}", format_value(meta.dt))?;
    writeln!(out, "# system: fnv1a:{:016x}", meta.fingerprint)?;
    writeln!(out, "{}", header_columns(traj.dim()).join(","))?;

    let dim = traj.dim();
    for sample in traj.samples() {
        let mut fields = Vec::with_capacity(1 + dim + dim * (dim + 1) / 2);
        fields.push(format_value(sample.time()));
        for i in 0..dim {
            fields.push(format_value(sample.mean()[i]));
        }
        let v = sample.covariance();
        for r in 0..dim {
            for c in r..dim {
                fields.push(format_value(v[(r, c)]));
            }
        }
        writeln!(out, "{}", fields.join(","))?;
    }
    out.flush()?;
    Ok(())
}

fn parse_f64(field: &str, line: usize) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| Error::TrajectoryFormat {
        line,
        message: format!("cannot parse '{}' as a number", field.trim()),
    })
}

/// Reads a trajectory saved by [`save_trajectory`]. Metadata lines are
/// optional; the dimension is recovered from the header row.
pub fn load_trajectory(path: &Path) -> Result<Trajectory> {
    let text = fs::read_to_string(path)?;
    let mut metadata = TrajectoryMetadata {
        integrator: String::new(),
        dt: 0.0,
        fingerprint: 0,
    };
    let mut dim: Option<usize> = None;
    let mut samples = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(v) = rest.strip_prefix("integrator:") {
                metadata.integrator = v.trim().to_string();
            } else if let Some(v) = rest.strip_prefix("dt:") {
                metadata.dt = parse_f64(v, line_no)?;
            } else if let Some(v) = rest.strip_prefix("system: fnv1a:") {
                metadata.fingerprint =
                    u64::from_str_radix(v.trim(), 16).map_err(|_| Error::TrajectoryFormat {
                        line: line_no,
                        message: format!("bad fingerprint '{}'", v.trim()),
                    })?;
            }
            continue;
        }

        if dim.is_none() {
            // Header row: the dimension is the number of mean_* columns.
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            let d = cols.iter().filter(|c| c.starts_with("mean_")).count();
            if d == 0 || cols != header_columns(d).iter().map(String::as_str).collect::<Vec<_>>() {
                return Err(Error::TrajectoryFormat {
                    line: line_no,
                    message: format!("unrecognized header '{line}'"),
                });
            }
            dim = Some(d);
            continue;
        }

        let d = dim.expect("header parsed before data rows");
        let expected = 1 + d + d * (d + 1) / 2;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != expected {
            return Err(Error::TrajectoryFormat {
                line: line_no,
                message: format!("expected {expected} fields, found {}", fields.len()),
            });
        }
        let t = parse_f64(fields[0], line_no)?;
        let mut mean = DVector::zeros(d);
        for i in 0..d {
            mean[i] = parse_f64(fields[1 + i], line_no)?;
        }
        let mut cov = DMatrix::zeros(d, d);
        let mut k = 1 + d;
        for r in 0..d {
            for c in r..d {
                let value = parse_f64(fields[k], line_no)?;
                cov[(r, c)] = value;
                cov[(c, r)] = value;
                k += 1;
            }
        }
        samples.push(GaussianMomentState::new(t, mean, cov)?);
    }

    let dim = dim.ok_or_else(|| Error::TrajectoryFormat {
        line: text.lines().count(),
        message: "no header row found".to_string(),
    })?;
    Trajectory::new(dim, samples, metadata)
}
