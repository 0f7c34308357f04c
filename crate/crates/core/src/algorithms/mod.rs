//! The four run loops: NEMO-II-Ch, which learns the decision maker's value
//! function from comparisons, and the EA-UVF baselines that rank with the
//! true value function directly.

mod engine;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{distances, DistanceMatrix, Instance, ObjectiveBounds, Solution};
use crate::numerics::SimplexSearchConfig;
use crate::objectives::ObjectiveVector;
use crate::preference::ModelKind;

pub use engine::{run, run_observed, Individual, NoObserver, RunObserver, Snapshot};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Nemo2ch,
    EaUvf,
    EaUvf1,
    EaUvf2,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Nemo2ch => "nemo2ch",
            Algorithm::EaUvf => "ea_uvf",
            Algorithm::EaUvf1 => "ea_uvf1",
            Algorithm::EaUvf2 => "ea_uvf2",
        }
    }

    /// Whether the loop needs the true value function.
    pub fn needs_true_value(self) -> bool {
        self != Algorithm::Nemo2ch
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nemo2ch" => Ok(Algorithm::Nemo2ch),
            "ea_uvf" => Ok(Algorithm::EaUvf),
            "ea_uvf1" => Ok(Algorithm::EaUvf1),
            "ea_uvf2" => Ok(Algorithm::EaUvf2),
            other => Err(Error::Validation(format!(
                "unknown algorithm `{other}` (expected nemo2ch, ea_uvf, ea_uvf1 or ea_uvf2)"
            ))),
        }
    }
}

/// Everything a run reads but never changes.
#[derive(Debug, Clone)]
pub struct Problem {
    pub instance: Instance,
    pub distances: DistanceMatrix,
    /// Normalization bounds for model inputs.
    pub bounds: ObjectiveBounds,
}

impl Problem {
    pub fn new(instance: Instance, bounds: ObjectiveBounds) -> Self {
        let distances = distances(&instance);
        Problem {
            instance,
            distances,
            bounds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    /// Generations between two queries (NEMO-II-Ch only).
    pub interaction_period: usize,
    pub p: usize,
    pub max_generations: usize,
    pub pop_size: usize,
    pub seed: u64,
    /// Known optimum; the run stops as soon as it enters the population.
    pub target: Option<Solution>,
    pub search: SimplexSearchConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            algorithm: Algorithm::Nemo2ch,
            interaction_period: 10,
            p: 3,
            max_generations: 1000,
            pop_size: 30,
            seed: 0,
            target: None,
            search: SimplexSearchConfig {
                max_evals: 1500,
                restarts: 4,
                ..SimplexSearchConfig::default()
            },
        }
    }
}

impl RunConfig {
    pub fn validate(&self, m: usize) -> Result<()> {
        if self.interaction_period == 0 {
            return Err(Error::Validation("interaction period must be at least 1".into()));
        }
        if self.pop_size < 2 {
            return Err(Error::Validation("population size must be at least 2".into()));
        }
        if self.p == 0 || self.p > m {
            return Err(Error::Validation(format!("p must lie in 1..={m} (got {})", self.p)));
        }
        if let Some(t) = &self.target {
            if t.p() != self.p || t.sites().iter().any(|&s| s > m) {
                return Err(Error::Validation(format!("target {t} is not a {}-subset of 1..={m}", self.p)));
            }
        }
        Ok(())
    }
}

/// Trace of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub algorithm: Algorithm,
    pub interaction_period: Option<usize>,
    pub seed: u64,
    pub converged: bool,
    pub generations_used: usize,
    pub comparisons_asked: usize,
    pub model_escalations: usize,
    pub repairs: usize,
    pub final_model: Option<ModelKind>,
    pub best_solution: Solution,
    pub best_objectives: ObjectiveVector,
    pub best_true_value: Option<f64>,
    /// Absent without a true value, or when the optimum's value is zero.
    pub brsd: Option<f64>,
    /// Seconds.
    pub wall_time: f64,
}

impl RunRecord {
    /// The record with timing zeroed, for reproducibility comparisons.
    pub fn without_timing(&self) -> RunRecord {
        RunRecord {
            wall_time: 0.0,
            ..self.clone()
        }
    }
}

/// Relative gap `|U(best) - U(P_b)| / U(P_b)` of the best found value.
pub fn brsd(best: f64, pb_value: f64) -> Result<f64> {
    if pb_value == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok((best - pb_value).abs() / pb_value)
}
