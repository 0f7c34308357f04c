use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::algorithms::Algorithm;
use crate::dm::DmFamily;
use crate::error::{Error, Result};
use crate::instance::{generate_instance, load_instance, BoundsBudget, BoundsMethod, GeneratorConfig, Instance};
use crate::numerics::SimplexSearchConfig;

/// Where the plan's instance comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceSource {
    /// Path to an instance file, relative to the plan file.
    File(PathBuf),
    Generate {
        q: usize,
        m: usize,
        seed: u64,
        #[serde(default)]
        config: GeneratorConfig,
    },
}

impl InstanceSource {
    pub fn load(&self, base: &Path) -> Result<Instance> {
        match self {
            InstanceSource::File(path) => load_instance(base.join(path)),
            InstanceSource::Generate { q, m, seed, config } => generate_instance(*q, *m, *seed, config),
        }
    }
}

/// An algorithm with its interaction period, e.g. `NIICh_10`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSpec {
    pub algorithm: Algorithm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<usize>,
}

impl AlgorithmSpec {
    pub fn nemo(period: usize) -> Self {
        AlgorithmSpec {
            algorithm: Algorithm::Nemo2ch,
            period: Some(period),
        }
    }

    pub fn baseline(algorithm: Algorithm) -> Self {
        AlgorithmSpec { algorithm, period: None }
    }

    pub fn label(&self) -> String {
        match self.algorithm {
            Algorithm::Nemo2ch => format!("NIICh_{}", self.period.unwrap_or(0)),
            Algorithm::EaUvf => "EA-UVF".into(),
            Algorithm::EaUvf1 => "EA-UVF1".into(),
            Algorithm::EaUvf2 => "EA-UVF2".into(),
        }
    }
}

impl fmt::Display for AlgorithmSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

fn default_runs() -> usize {
    50
}

fn default_max_generations() -> usize {
    1000
}

fn default_pop_size() -> usize {
    30
}

fn default_bounds() -> BoundsMethod {
    BoundsMethod::Exhaustive
}

fn default_search() -> SimplexSearchConfig {
    crate::algorithms::RunConfig::default().search
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub instance: InstanceSource,
    pub p_values: Vec<usize>,
    pub algorithms: Vec<AlgorithmSpec>,
    pub dm_families: Vec<DmFamily>,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub base_seed: u64,
    /// Worker threads; all cores when absent.
    #[serde(default)]
    pub jobs: Option<usize>,
    #[serde(default = "default_max_generations")]
    pub max_generations: usize,
    #[serde(default = "default_pop_size")]
    pub pop_size: usize,
    #[serde(default = "default_bounds")]
    pub bounds: BoundsMethod,
    #[serde(default)]
    pub bounds_budget: BoundsBudget,
    #[serde(default = "default_search")]
    pub search: SimplexSearchConfig,
}

impl ExperimentPlan {
    pub fn from_json(text: &str) -> Result<Self> {
        let plan: ExperimentPlan = serde_json::from_str(text)?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::Validation("a plan needs at least one run per cell".into()));
        }
        if self.p_values.is_empty() || self.algorithms.is_empty() || self.dm_families.is_empty() {
            return Err(Error::Validation("plan lists no p values, algorithms or decision makers".into()));
        }
        for a in &self.algorithms {
            match (a.algorithm, a.period) {
                (Algorithm::Nemo2ch, Some(k)) if k >= 1 => {}
                (Algorithm::Nemo2ch, _) => {
                    return Err(Error::Validation("nemo2ch needs an interaction period of at least 1".into()))
                }
                (_, Some(_)) => {
                    return Err(Error::Validation(format!("{} takes no interaction period", a.algorithm)))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Per-run seed: a hash of the cell coordinates and run index, so each
/// cell can be re-run on its own.
pub fn run_seed(base_seed: u64, algorithm: &AlgorithmSpec, dm: &DmFamily, p: usize, run: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(base_seed.to_le_bytes());
    h.update(algorithm.label().as_bytes());
    h.update([0]);
    h.update(dm.to_string().as_bytes());
    h.update([0]);
    h.update((p as u64).to_le_bytes());
    h.update((run as u64).to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels() {
        assert_eq!(AlgorithmSpec::nemo(5).label(), "NIICh_5");
        assert_eq!(AlgorithmSpec::baseline(Algorithm::EaUvf1).label(), "EA-UVF1");
    }

    #[test]
    fn seeds_differ_across_cells_and_runs() {
        let a = AlgorithmSpec::nemo(5);
        let b = AlgorithmSpec::nemo(10);
        let s = run_seed(1, &a, &DmFamily::N, 3, 0);
        assert_eq!(s, run_seed(1, &a, &DmFamily::N, 3, 0));
        assert_ne!(s, run_seed(1, &b, &DmFamily::N, 3, 0));
        assert_ne!(s, run_seed(1, &a, &DmFamily::D, 3, 0));
        assert_ne!(s, run_seed(1, &a, &DmFamily::N, 3, 1));
        assert_ne!(s, run_seed(2, &a, &DmFamily::N, 3, 0));
    }

    #[test]
    fn plan_parsing_and_defaults() {
        let text = r#"{"instance":{"generate":{"q":40,"m":20,"seed":1}},"p_values":[3],
            "algorithms":[{"algorithm":"nemo2ch","period":10},{"algorithm":"ea_uvf"}],
            "dm_families":["N","Dv:1234"]}"#;
        let plan = ExperimentPlan::from_json(text).unwrap();
        assert_eq!(plan.runs, 50);
        assert_eq!(plan.max_generations, 1000);
        assert_eq!(plan.bounds, BoundsMethod::Exhaustive);
        let back = ExperimentPlan::from_json(&serde_json::to_string(&plan).unwrap()).unwrap();
        assert_eq!(back, plan);
    }

    #[test]
    fn plan_rejects_missing_period() {
        let text = r#"{"instance":{"file":"x.json"},"p_values":[3],
            "algorithms":[{"algorithm":"nemo2ch"}],"dm_families":["N"]}"#;
        assert!(ExperimentPlan::from_json(text).is_err());
    }
}
