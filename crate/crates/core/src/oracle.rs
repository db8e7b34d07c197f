//! Brute-force reference solvers. These exist to certify the production
//! path on desk-scale instances: exhaustive enumeration of the discrete
//! problem and dense grid search over the continuous one.

use crate::error::{Error, Result};
use crate::model::RateLadder;
use crate::relax::RelaxedInstance;

const ENUM_CAP: u128 = 1_000_000;
const GRID_CAP: u128 = 10_000_000;

/// Exact optimum of a rate vector over ladder assignments.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteOptimum {
    pub gamma: Vec<f64>,
    pub objective: f64,
    pub evaluated: u64,
}

/// Enumerate every ladder assignment, rebuild the schedule for each, and
/// return the exact argmax; ties go to the lexicographically largest rate
/// vector. Refuses instances over one million assignments.
pub fn brute_force_discrete(
    instance: &RelaxedInstance,
    ladder: &RateLadder,
) -> Result<DiscreteOptimum> {
    instance.validate()?;
    let n = instance.count();
    let m = ladder.len();
    let total = (m as u128).pow(n as u32);
    if total > ENUM_CAP {
        return Err(Error::Refused(format!(
            "{total} ladder assignments exceed the enumeration cap of {ENUM_CAP}"
        )));
    }

    let levels = ladder.levels();
    let mut indices = vec![0usize; n];
    let mut gamma = vec![levels[0]; n];
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut evaluated = 0u64;
    loop {
        let value = instance.objective_value(&gamma);
        evaluated += 1;
        // Ascending lexicographic iteration with >= acceptance leaves the
        // lexicographically largest maximizer in place.
        if best.as_ref().is_none_or(|(b, _)| value >= *b) {
            best = Some((value, gamma.clone()));
        }
        // Advance the odometer.
        let mut pos = n;
        loop {
            if pos == 0 {
                let (objective, gamma) = best.unwrap();
                return Ok(DiscreteOptimum {
                    gamma,
                    objective,
                    evaluated,
                });
            }
            pos -= 1;
            if indices[pos] + 1 < m {
                indices[pos] += 1;
                gamma[pos] = levels[indices[pos]];
                break;
            }
            indices[pos] = 0;
            gamma[pos] = levels[0];
        }
    }
}

/// Best objective over a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridOptimum {
    pub gamma: Vec<f64>,
    pub objective: f64,
    pub evaluated: u64,
}

/// Dense grid search over `[R_0, R_m]^count` at the given step (the upper
/// endpoint is always included). Refuses grids above ten million points.
pub fn grid_search_relaxed(instance: &RelaxedInstance, step: f64) -> Result<GridOptimum> {
    instance.validate()?;
    if step <= 0.0 || step.is_nan() {
        return Err(Error::invalid("grid step must be positive"));
    }
    let n = instance.count();
    let span = instance.rate_max - instance.rate_min;
    let per_axis = (span / step).floor() as usize + 1;
    let mut points: Vec<f64> = (0..per_axis)
        .map(|i| instance.rate_min + i as f64 * step)
        .collect();
    if span - (per_axis - 1) as f64 * step > 1e-12 {
        points.push(instance.rate_max);
    } else {
        *points.last_mut().unwrap() = instance.rate_max;
    }
    let total = (points.len() as u128).pow(n as u32);
    if total > GRID_CAP {
        return Err(Error::Refused(format!(
            "{total} grid points exceed the cap of {GRID_CAP}"
        )));
    }

    let mut indices = vec![0usize; n];
    let mut gamma = vec![points[0]; n];
    let mut best_value = f64::NEG_INFINITY;
    let mut best_gamma = gamma.clone();
    let mut evaluated = 0u64;
    loop {
        let value = instance.objective_value(&gamma);
        evaluated += 1;
        if value > best_value {
            best_value = value;
            best_gamma = gamma.clone();
        }
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok(GridOptimum {
                    gamma: best_gamma,
                    objective: best_value,
                    evaluated,
                });
            }
            pos -= 1;
            if indices[pos] + 1 < points.len() {
                indices[pos] += 1;
                gamma[pos] = points[indices[pos]];
                break;
            }
            indices[pos] = 0;
            gamma[pos] = points[0];
        }
    }
}
