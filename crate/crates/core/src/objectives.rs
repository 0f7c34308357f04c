//! The five location objectives and their normalized forms.
//!
//! f1 mean closest distance (min), f2 farthest closest distance (min),
//! f3/f4 population covered within `s1`/`s2` (max), f5 variance of the
//! closest distances (min).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{DistanceMatrix, Instance, ObjectiveBounds, Solution};

pub const NUM_OBJECTIVES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Min,
    Max,
}

impl Sense {
    pub fn is_minimized(self) -> bool {
        self == Sense::Min
    }
}

pub const ORIENTATION: [Sense; NUM_OBJECTIVES] = [Sense::Min, Sense::Min, Sense::Max, Sense::Max, Sense::Min];

/// Raw objective values `f1..f5`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectiveVector(pub [f64; NUM_OBJECTIVES]);

impl ObjectiveVector {
    pub fn values(&self) -> &[f64; NUM_OBJECTIVES] {
        &self.0
    }
}

/// Cost-oriented normalized values in `[0, 1]` (0 = ideal).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NormalizedVector(pub [f64; NUM_OBJECTIVES]);

impl NormalizedVector {
    pub fn values(&self) -> &[f64; NUM_OBJECTIVES] {
        &self.0
    }

    /// `1 - f̄_k`: the increasing orientation consumed by value models.
    pub fn benefit(&self) -> Vec<f64> {
        self.0.iter().map(|v| 1.0 - v).collect()
    }
}

/// `D_i(P)` for every demand point.
pub fn closest_distances(dm: &DistanceMatrix, sol: &Solution) -> Vec<f64> {
    let mut out = vec![0.0; dm.shape().0];
    closest_distances_into(dm, sol.sites(), &mut out);
    out
}

pub(crate) fn closest_distances_into(dm: &DistanceMatrix, sites: &[usize], out: &mut [f64]) {
    for (i, slot) in out.iter_mut().enumerate() {
        let row = dm.row(i);
        *slot = sites
            .iter()
            .map(|&s| row[s - 1])
            .fold(f64::INFINITY, f64::min);
    }
}

pub fn evaluate(inst: &Instance, dm: &DistanceMatrix, sol: &Solution) -> ObjectiveVector {
    let closest = closest_distances(dm, sol);
    evaluate_from_closest(inst, &closest)
}

pub(crate) fn evaluate_from_closest(inst: &Instance, closest: &[f64]) -> ObjectiveVector {
    let q = closest.len() as f64;
    let f1 = closest.iter().sum::<f64>() / q;
    let f2 = closest.iter().copied().fold(0.0, f64::max);
    let mut f3 = 0.0;
    let mut f4 = 0.0;
    for (d, point) in closest.iter().zip(inst.demand()) {
        if *d <= inst.s1() {
            f3 += point.pop;
        }
        if *d <= inst.s2() {
            f4 += point.pop;
        }
    }
    let f5 = closest.iter().map(|d| (d - f1).powi(2)).sum::<f64>() / q;
    ObjectiveVector([f1, f2, f3, f4, f5])
}

/// Normalizes against the bounds, clamped to `[0, 1]`. A constant objective
/// (`fmax == fmin`) maps to 0.
pub fn normalize(ov: &ObjectiveVector, bounds: &ObjectiveBounds) -> NormalizedVector {
    let mut out = [0.0; NUM_OBJECTIVES];
    for k in 0..NUM_OBJECTIVES {
        let range = bounds.max[k] - bounds.min[k];
        if range <= 0.0 {
            continue;
        }
        let raw = match ORIENTATION[k] {
            Sense::Min => (ov.0[k] - bounds.min[k]) / range,
            Sense::Max => (bounds.max[k] - ov.0[k]) / range,
        };
        out[k] = raw.clamp(0.0, 1.0);
    }
    NormalizedVector(out)
}

/// Relative deviation `Δ_k` from the per-objective optimum.
pub fn deviation(ov: &ObjectiveVector, bounds: &ObjectiveBounds) -> Result<[f64; NUM_OBJECTIVES]> {
    let mut out = [0.0; NUM_OBJECTIVES];
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = deviation_at(ov, bounds, k)?;
    }
    Ok(out)
}

/// `Δ_k` for a single 0-based objective index.
pub fn deviation_at(ov: &ObjectiveVector, bounds: &ObjectiveBounds, k: usize) -> Result<f64> {
    let best = bounds.optimum(k);
    if best == 0.0 {
        return Err(Error::ZeroOptimum { objective: k + 1 });
    }
    Ok(match ORIENTATION[k] {
        Sense::Min => (ov.0[k] - best) / best,
        Sense::Max => (best - ov.0[k]) / best,
    })
}

/// `a` Pareto-dominates `b` under the fixed orientation.
pub fn dominates(a: &ObjectiveVector, b: &ObjectiveVector) -> bool {
    let mut strictly = false;
    for (k, sense) in ORIENTATION.iter().enumerate() {
        let (x, y) = match sense {
            Sense::Min => (a.0[k], b.0[k]),
            Sense::Max => (-a.0[k], -b.0[k]),
        };
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}
