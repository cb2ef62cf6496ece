//! Incumbent extraction and the per-time-point overtuning metrics.
//!
//! Every series here is lower-is-better. Positions are 0-based: entry `t`
//! of a series describes the state after `t + 1` evaluations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative overtuning is only defined where the test improvement of the
/// first incumbent exceeds this threshold.
pub const DEFAULT_EPSILON: f64 = 0.001;

/// Absolute tolerance for invariant checks on derived series.
pub const INVARIANT_TOL: f64 = 1e-12;

/// Strictly positive, finite filtering threshold for relative overtuning.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Epsilon(f64);

impl Epsilon {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 {
            Ok(Epsilon(value))
        } else {
            Err(Error::arg(format!(
                "epsilon must be finite and > 0, got {value}"
            )))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl Default for Epsilon {
    fn default() -> Self {
        Epsilon(DEFAULT_EPSILON)
    }
}

/// Paired validation and test errors of the configurations evaluated by one
/// optimizer, in evaluation order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTrajectory {
    val: Vec<f64>,
    test: Vec<f64>,
}

impl ScoreTrajectory {
    pub fn new(val: Vec<f64>, test: Vec<f64>) -> Result<Self> {
        if val.len() != test.len() {
            return Err(Error::LengthMismatch {
                val: val.len(),
                test: test.len(),
            });
        }
        if val.is_empty() {
            return Err(Error::EmptyTrajectory);
        }
        if let Some(pos) = val
            .iter()
            .zip(&test)
            .position(|(v, t)| !v.is_finite() || !t.is_finite())
        {
            return Err(Error::NonFinite(pos));
        }
        Ok(ScoreTrajectory { val, test })
    }

    pub fn val(&self) -> &[f64] {
        &self.val
    }

    pub fn test(&self) -> &[f64] {
        &self.test
    }

    pub fn len(&self) -> usize {
        self.val.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The first `len` evaluations, or `None` if `len` is 0 or too long.
    pub fn prefix(&self, len: usize) -> Option<ScoreTrajectory> {
        if len == 0 || len > self.len() {
            return None;
        }
        Some(ScoreTrajectory {
            val: self.val[..len].to_vec(),
            test: self.test[..len].to_vec(),
        })
    }

    /// Sub-trajectory made of the given positions, in the order given.
    pub fn select(&self, positions: &[usize]) -> Result<ScoreTrajectory> {
        let val = positions.iter().map(|&i| self.val[i]).collect();
        let test = positions.iter().map(|&i| self.test[i]).collect();
        ScoreTrajectory::new(val, test)
    }

    pub fn min_test(&self) -> f64 {
        self.test.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Best-so-far bookkeeping over a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncumbentTrace {
    /// 0-based position of the incumbent after each evaluation.
    pub incumbent_index: Vec<usize>,
    pub incumbent_val: Vec<f64>,
    pub incumbent_test: Vec<f64>,
    /// Running minimum of `incumbent_test`.
    pub best_incumbent_test_so_far: Vec<f64>,
}

impl IncumbentTrace {
    pub fn len(&self) -> usize {
        self.incumbent_index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.incumbent_index.is_empty()
    }
}

/// Prefix argmin of validation error. The incumbent is only replaced on a
/// strict improvement, so ties go to the earliest configuration.
pub fn incumbent_trace(traj: &ScoreTrajectory) -> IncumbentTrace {
    let n = traj.len();
    let mut trace = IncumbentTrace {
        incumbent_index: Vec::with_capacity(n),
        incumbent_val: Vec::with_capacity(n),
        incumbent_test: Vec::with_capacity(n),
        best_incumbent_test_so_far: Vec::with_capacity(n),
    };
    let mut inc = 0usize;
    let mut best_test = f64::INFINITY;
    for (t, &v) in traj.val.iter().enumerate() {
        if v < traj.val[inc] {
            inc = t;
        }
        let inc_test = traj.test[inc];
        best_test = best_test.min(inc_test);
        trace.incumbent_index.push(inc);
        trace.incumbent_val.push(traj.val[inc]);
        trace.incumbent_test.push(inc_test);
        trace.best_incumbent_test_so_far.push(best_test);
    }
    trace
}

/// Excess test error of the incumbent over the best past incumbent.
pub fn overtuning(trace: &IncumbentTrace) -> Vec<f64> {
    trace
        .incumbent_test
        .iter()
        .zip(&trace.best_incumbent_test_so_far)
        .map(|(cur, best)| cur - best)
        .collect()
}

/// Test minus validation error of the incumbent.
pub fn meta_overfitting(trace: &IncumbentTrace) -> Vec<f64> {
    trace
        .incumbent_test
        .iter()
        .zip(&trace.incumbent_val)
        .map(|(test, val)| test - val)
        .collect()
}

/// Excess test error of the incumbent over the best configuration evaluated
/// so far, incumbent or not.
pub fn trajectory_test_regret(traj: &ScoreTrajectory, trace: &IncumbentTrace) -> Vec<f64> {
    let mut best = f64::INFINITY;
    traj.test
        .iter()
        .zip(&trace.incumbent_test)
        .map(|(&test, inc)| {
            best = best.min(test);
            inc - best
        })
        .collect()
}

/// Excess test error of the incumbent over a known search-space optimum.
pub fn oracle_test_regret(
    traj: &ScoreTrajectory,
    trace: &IncumbentTrace,
    oracle_min_test: f64,
) -> Result<Vec<f64>> {
    let observed = traj.min_test();
    if !oracle_min_test.is_finite() || oracle_min_test > observed {
        return Err(Error::InconsistentOracle {
            oracle: oracle_min_test,
            observed,
        });
    }
    Ok(trace
        .incumbent_test
        .iter()
        .map(|inc| inc - oracle_min_test)
        .collect())
}

/// Test improvement of the best incumbent so far over the first incumbent.
pub fn improvement_denominator(trace: &IncumbentTrace) -> Vec<f64> {
    let first = trace.incumbent_test[0];
    trace
        .best_incumbent_test_so_far
        .iter()
        .map(|best| first - best)
        .collect()
}

pub fn relative_overtuning(
    trace: &IncumbentTrace,
    ot: &[f64],
    epsilon: Epsilon,
) -> Vec<Option<f64>> {
    improvement_denominator(trace)
        .iter()
        .zip(ot)
        .map(|(&den, &ot)| relative_value(ot, den, epsilon))
        .collect()
}

#[inline]
pub(crate) fn relative_value(ot: f64, denominator: f64, epsilon: Epsilon) -> Option<f64> {
    (denominator > epsilon.get()).then(|| ot / denominator)
}

/// All per-time-point metrics of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OvertuningReport {
    pub trace: IncumbentTrace,
    pub ot: Vec<f64>,
    pub of: Vec<f64>,
    pub tr: Vec<f64>,
    pub oracle_tr: Option<Vec<f64>>,
    pub rel_ot: Vec<Option<f64>>,
    pub denominator: Vec<f64>,
    pub epsilon: Epsilon,
}

impl OvertuningReport {
    pub fn compute(
        traj: &ScoreTrajectory,
        epsilon: Epsilon,
        oracle_min_test: Option<f64>,
    ) -> Result<Self> {
        let trace = incumbent_trace(traj);
        let ot = overtuning(&trace);
        let of = meta_overfitting(&trace);
        let tr = trajectory_test_regret(traj, &trace);
        let oracle_tr = oracle_min_test
            .map(|m| oracle_test_regret(traj, &trace, m))
            .transpose()?;
        let denominator = improvement_denominator(&trace);
        let rel_ot = relative_overtuning(&trace, &ot, epsilon);
        Ok(OvertuningReport {
            trace,
            ot,
            of,
            tr,
            oracle_tr,
            rel_ot,
            denominator,
            epsilon,
        })
    }

    pub fn len(&self) -> usize {
        self.ot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ot.is_empty()
    }

    pub fn final_index(&self) -> usize {
        self.len() - 1
    }

    pub fn final_ot(&self) -> f64 {
        self.ot[self.final_index()]
    }

    pub fn final_of(&self) -> f64 {
        self.of[self.final_index()]
    }

    pub fn final_tr(&self) -> f64 {
        self.tr[self.final_index()]
    }

    pub fn final_test(&self) -> f64 {
        self.trace.incumbent_test[self.final_index()]
    }

    pub fn final_rel_ot(&self) -> Option<f64> {
        self.rel_ot[self.final_index()]
    }

    /// Relative overtuning at `t` re-filtered with another threshold.
    pub fn rel_ot_at(&self, t: usize, epsilon: Epsilon) -> Option<f64> {
        relative_value(self.ot[t], self.denominator[t], epsilon)
    }

    /// Checks the ordering invariants that hold for every valid run.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        for t in 0..self.len() {
            let (ot, tr) = (self.ot[t], self.tr[t]);
            if ot < -INVARIANT_TOL || tr < -INVARIANT_TOL || ot > tr + INVARIANT_TOL {
                return Err(format!(
                    "ordering 0 <= ot <= tr violated at t={t}: ot={ot}, tr={tr}"
                ));
            }
            if let Some(oracle) = &self.oracle_tr {
                if tr > oracle[t] + INVARIANT_TOL {
                    return Err(format!("tr exceeds oracle regret at t={t}"));
                }
            }
            if let Some(rel) = self.rel_ot[t] {
                if rel < -INVARIANT_TOL {
                    return Err(format!("negative relative overtuning at t={t}"));
                }
            }
            if t > 0 && self.trace.incumbent_val[t] > self.trace.incumbent_val[t - 1] {
                return Err(format!("incumbent validation error increased at t={t}"));
            }
        }
        Ok(())
    }
}
