// Copyright 2026 loqs Contributors
// SPDX-License-Identifier: Apache-2.0

//! Shared time-stepping plan for the moment and density-matrix integrators.
//!
//! Both engines must sample on the same grid so trajectories can be compared
//! sample-by-sample. The plan takes fixed steps of the nominal `dt` and
//! shortens the final step so the last sample lands exactly on `t_final`.

use crate::error::{Error, Result};

/// Deterministic step/sample schedule over `[t0, t_final]`.
#[derive(Debug, Clone)]
pub(crate) struct StepPlan {
    t0: f64,
    t_final: f64,
    dt: f64,
    last_dt: f64,
    n_steps: usize,
    sample_every: usize,
}

impl StepPlan {
    pub fn new(t0: f64, t_final: f64, dt: f64, sample_every: usize) -> Result<Self> {
        let span = t_final - t0;
        if !dt.is_finite() || dt <= 0.0 || !span.is_finite() || span <= 0.0 {
            return Err(Error::InvalidTimeStep { dt, span });
        }
        if sample_every == 0 {
            return Err(Error::ZeroSampleStride);
        }

        // Treat spans that are an integer multiple of dt (up to rounding in
        // the division) as exact so e.g. t_final = 5, dt = 1e-3 gives 5000
        // steps rather than 5001 with a vanishing tail step.
        let ratio = span / dt;
        let n_steps = if (ratio - ratio.round()).abs() < 1e-9 * ratio.max(1.0) && ratio >= 0.5 {
            ratio.round() as usize
        } else {
            ratio.ceil() as usize
        }
        .max(1);

        let last_dt = span - (n_steps - 1) as f64 * dt;
        debug_assert!(last_dt > 0.0, "shortened final step must stay positive");

        Ok(StepPlan {
            t0,
            t_final,
            dt,
            last_dt,
            n_steps,
            sample_every,
        })
    }

    /// Number of RK4 steps; states exist at indices `0..=n_steps`.
    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Nominal step size (the last step may be shorter).
    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Size of step `i` (taking state `i` to state `i + 1`).
    pub fn step_size(&self, i: usize) -> f64 {
        if i + 1 == self.n_steps {
            self.last_dt
        } else {
            self.dt
        }
    }

    /// Time at state index `k`; exact at both endpoints.
    pub fn time(&self, k: usize) -> f64 {
        if k == 0 {
            self.t0
        } else if k >= self.n_steps {
            self.t_final
        } else {
            self.t0 + k as f64 * self.dt
        }
    }

    /// Whether state index `k` is retained as a trajectory sample.
    /// Index 0 and the final index are always kept.
    pub fn is_sample(&self, k: usize) -> bool {
        k == 0 || k == self.n_steps || k.is_multiple_of(self.sample_every)
    }

    /// Number of retained samples (for pre-allocation).
    pub fn n_samples(&self) -> usize {
        (0..=self.n_steps).filter(|&k| self.is_sample(k)).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_division_gives_even_steps() {
        let plan = StepPlan::new(0.0, 5.0, 1e-3, 1).unwrap();
        assert_eq!(plan.n_steps(), 5000);
        assert_eq!(plan.time(5000), 5.0);
        assert!((plan.step_size(4999) - 1e-3).abs() < 1e-12);
    }

    #[test]
    fn remainder_shortens_final_step() {
        let plan = StepPlan::new(0.0, 1.0, 0.3, 1).unwrap();
        assert_eq!(plan.n_steps(), 4);
        assert_eq!(plan.step_size(0), 0.3);
        assert!((plan.step_size(3) - 0.1).abs() < 1e-12);
        assert_eq!(plan.time(4), 1.0);
    }

    #[test]
    fn times_strictly_increase() {
        let plan = StepPlan::new(0.5, 2.0, 0.07, 1).unwrap();
        let times: Vec<f64> = (0..=plan.n_steps()).map(|k| plan.time(k)).collect();
        assert!(times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(*times.last().unwrap(), 2.0);
        assert_eq!(times[0], 0.5);
    }

    #[test]
    fn sampling_keeps_endpoints() {
        let plan = StepPlan::new(0.0, 1.0, 0.1, 3).unwrap();
        assert_eq!(plan.n_steps(), 10);
        let kept: Vec<usize> = (0..=10).filter(|&k| plan.is_sample(k)).collect();
        assert_eq!(kept, vec![0, 3, 6, 9, 10]);
        assert_eq!(plan.n_samples(), 5);
    }

    #[test]
    fn rejects_bad_steps() {
        assert!(StepPlan::new(0.0, 1.0, 0.0, 1).is_err());
        assert!(StepPlan::new(0.0, 1.0, -0.1, 1).is_err());
        assert!(StepPlan::new(1.0, 1.0, 0.1, 1).is_err());
        assert!(StepPlan::new(0.0, 1.0, f64::NAN, 1).is_err());
        assert!(StepPlan::new(0.0, 1.0, 0.1, 0).is_err());
    }

    #[test]
    fn single_oversized_step_clamps_to_span() {
        let plan = StepPlan::new(0.0, 0.4, 1.0, 1).unwrap();
        assert_eq!(plan.n_steps(), 1);
        assert!((plan.step_size(0) - 0.4).abs() < 1e-15);
    }
}
