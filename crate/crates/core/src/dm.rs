//! Decision makers: simulated value functions and the query contract shared
//! with interactive ones.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::single_objective_search;
use crate::instance::{check_enumerable, for_each_subset, BoundsBudget, DistanceMatrix, Instance, ObjectiveBounds, Solution};
use crate::objectives::{self, deviation_at, normalize, NormalizedVector, ObjectiveVector, NUM_OBJECTIVES};
use crate::preference::Verdict;

pub const WEIGHTS_N: [f64; 5] = [0.1, 0.15, 0.2, 0.25, 0.3];
pub const WEIGHTS_NV: [f64; 4] = [0.1, 0.2, 0.3, 0.4];
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Four-objective subset, 1-based and ascending.
pub type Subset = [usize; 4];

/// One of the twelve simulated value functions. All are costs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DmFamily {
    /// Largest relative deviation from the per-objective optima.
    D,
    /// Largest deviation over four objectives.
    Dv(Subset),
    /// Weighted sum of normalized costs.
    N,
    /// Weighted sum over four objectives, weights assigned in index order.
    Nv(Subset),
}

impl DmFamily {
    pub fn all() -> Vec<DmFamily> {
        let subsets: Vec<Subset> = (1..=NUM_OBJECTIVES)
            .rev()
            .map(|skip| {
                let v: Vec<usize> = (1..=NUM_OBJECTIVES).filter(|&k| k != skip).collect();
                [v[0], v[1], v[2], v[3]]
            })
            .collect();
        let mut out = vec![DmFamily::D];
        out.extend(subsets.iter().map(|&s| DmFamily::Dv(s)));
        out.push(DmFamily::N);
        out.extend(subsets.iter().map(|&s| DmFamily::Nv(s)));
        out
    }

    /// 0-based objective indices the family looks at.
    fn objectives(&self) -> Vec<usize> {
        match self {
            DmFamily::D | DmFamily::N => (0..NUM_OBJECTIVES).collect(),
            DmFamily::Dv(v) | DmFamily::Nv(v) => v.iter().map(|k| k - 1).collect(),
        }
    }
}

impl fmt::Display for DmFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = |v: &Subset| v.iter().map(|k| k.to_string()).collect::<String>();
        match self {
            DmFamily::D => write!(f, "D"),
            DmFamily::N => write!(f, "N"),
            DmFamily::Dv(v) => write!(f, "Dv:{}", digits(v)),
            DmFamily::Nv(v) => write!(f, "Nv:{}", digits(v)),
        }
    }
}

impl FromStr for DmFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Validation(format!("unknown decision maker `{s}` (expected D, N, Dv:abcd or Nv:abcd)"));
        match s {
            "D" => return Ok(DmFamily::D),
            "N" => return Ok(DmFamily::N),
            _ => {}
        }
        let (head, digits) = s.split_once(':').ok_or_else(bad)?;
        let mut v: Vec<usize> = digits
            .chars()
            .map(|c| c.to_digit(10).map(|d| d as usize))
            .collect::<Option<_>>()
            .ok_or_else(bad)?;
        v.sort_unstable();
        v.dedup();
        if v.len() != 4 || v.iter().any(|&k| !(1..=NUM_OBJECTIVES).contains(&k)) {
            return Err(bad());
        }
        let subset = [v[0], v[1], v[2], v[3]];
        match head {
            "Dv" => Ok(DmFamily::Dv(subset)),
            "Nv" => Ok(DmFamily::Nv(subset)),
            _ => Err(bad()),
        }
    }
}

impl Serialize for DmFamily {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DmFamily {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A perfectly consistent simulated user.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedDm {
    family: DmFamily,
    bounds: ObjectiveBounds,
    tolerance: f64,
}

impl SimulatedDm {
    /// Fails up front if a deviation-based family would divide by a zero
    /// optimum.
    pub fn new(family: DmFamily, bounds: ObjectiveBounds) -> Result<Self> {
        if matches!(family, DmFamily::D | DmFamily::Dv(_)) {
            for k in family.objectives() {
                if bounds.optimum(k) == 0.0 {
                    return Err(Error::ZeroOptimum { objective: k + 1 });
                }
            }
        }
        Ok(SimulatedDm {
            family,
            bounds,
            tolerance: DEFAULT_TOLERANCE,
        })
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn family(&self) -> DmFamily {
        self.family
    }

    pub fn bounds(&self) -> &ObjectiveBounds {
        &self.bounds
    }

    /// True value (lower is better).
    pub fn value(&self, ov: &ObjectiveVector) -> f64 {
        match self.family {
            DmFamily::D | DmFamily::Dv(_) => self
                .family
                .objectives()
                .into_iter()
                .map(|k| deviation_at(ov, &self.bounds, k).expect("nonzero optima checked at construction"))
                .fold(f64::NEG_INFINITY, f64::max),
            DmFamily::N => {
                let nf = normalize(ov, &self.bounds);
                nf.0.iter().zip(WEIGHTS_N).map(|(f, w)| f * w).sum()
            }
            DmFamily::Nv(v) => {
                let nf = normalize(ov, &self.bounds);
                v.iter().zip(WEIGHTS_NV).map(|(k, w)| nf.0[k - 1] * w).sum()
            }
        }
    }

    /// Verdict for `left` versus `right` from the true values.
    pub fn compare_vectors(&self, left: &ObjectiveVector, right: &ObjectiveVector) -> Verdict {
        verdict_from_values(self.value(left), self.value(right), self.tolerance)
    }
}

/// `Left` when the left cost is lower by more than `tol`, `Right`
/// symmetrically, otherwise `Indifferent`.
pub fn verdict_from_values(left: f64, right: f64, tol: f64) -> Verdict {
    if left < right - tol {
        Verdict::Left
    } else if right < left - tol {
        Verdict::Right
    } else {
        Verdict::Indifferent
    }
}

/// One side of a preference query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryCandidate {
    pub solution: Solution,
    pub objectives: ObjectiveVector,
    pub normalized: NormalizedVector,
}

/// A pairwise question put to the decision maker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Query {
    pub generation: usize,
    pub left: QueryCandidate,
    pub right: QueryCandidate,
}

/// Anything that can answer pairwise queries.
pub trait DecisionMaker {
    fn compare(&mut self, query: &Query) -> Result<Verdict>;

    /// The underlying simulated user, when the true value is known.
    fn simulated(&self) -> Option<&SimulatedDm> {
        None
    }
}

impl DecisionMaker for SimulatedDm {
    fn compare(&mut self, query: &Query) -> Result<Verdict> {
        Ok(self.compare_vectors(&query.left.objectives, &query.right.objectives))
    }

    fn simulated(&self) -> Option<&SimulatedDm> {
        Some(self)
    }
}

impl<T: DecisionMaker + ?Sized> DecisionMaker for Box<T> {
    fn compare(&mut self, query: &Query) -> Result<Verdict> {
        (**self).compare(query)
    }

    fn simulated(&self) -> Option<&SimulatedDm> {
        (**self).simulated()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BestSubsetStrategy {
    Exhaustive,
    Evolutionary(BoundsBudget),
}

/// `P_b`: the subset with the lowest true value, ties to the
/// lexicographically smallest.
pub fn best_subset(
    dm: &SimulatedDm,
    inst: &Instance,
    dist: &DistanceMatrix,
    p: usize,
    strategy: &BestSubsetStrategy,
) -> Result<(Solution, f64)> {
    if p == 0 || p > inst.m() {
        return Err(Error::Validation(format!("p must lie in 1..={} (got {p})", inst.m())));
    }
    match strategy {
        BestSubsetStrategy::Exhaustive => {
            check_enumerable(inst.m(), p)?;
            let mut closest = vec![0.0; inst.q()];
            let mut best: Option<(Vec<usize>, f64)> = None;
            for_each_subset(inst.m(), p, |sites| {
                objectives::closest_distances_into(dist, sites, &mut closest);
                let v = dm.value(&objectives::evaluate_from_closest(inst, &closest));
                if best.as_ref().is_none_or(|(_, bv)| v < *bv) {
                    best = Some((sites.to_vec(), v));
                }
            });
            let (sites, v) = best.expect("at least one subset");
            Ok((Solution::from_distinct(sites), v))
        }
        BestSubsetStrategy::Evolutionary(budget) => Ok(single_objective_search(
            inst.m(),
            p,
            |s: &Solution| dm.value(&objectives::evaluate(inst, dist, s)),
            budget,
            budget.seed,
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::BoundsMethod;

    fn bounds() -> ObjectiveBounds {
        ObjectiveBounds::new([1.0; 5], [2.0; 5], BoundsMethod::Provided).unwrap()
    }

    #[test]
    fn twelve_families_round_trip_as_text() {
        let all = DmFamily::all();
        assert_eq!(all.len(), 12);
        for f in all {
            assert_eq!(f.to_string().parse::<DmFamily>().unwrap(), f);
        }
        assert_eq!("Nv:5431".parse::<DmFamily>().unwrap(), DmFamily::Nv([1, 3, 4, 5]));
        assert!("Nv:123".parse::<DmFamily>().is_err());
        assert!("Q".parse::<DmFamily>().is_err());
    }

    #[test]
    fn deviation_family_takes_the_max() {
        let b = ObjectiveBounds::new([10.0; 5], [20.0; 5], BoundsMethod::Provided).unwrap();
        let dm = SimulatedDm::new(DmFamily::D, b).unwrap();
        // Deviations (0.1, 0.4, 0.2, 0.0, 0.3); f3 and f4 are maximized with optimum 20.
        let ov = ObjectiveVector([11.0, 14.0, 16.0, 20.0, 13.0]);
        assert!((dm.value(&ov) - 0.4).abs() < 1e-12);
    }

    #[test]
    fn weighted_family_extremes() {
        let dm = SimulatedDm::new(DmFamily::N, bounds()).unwrap();
        assert_eq!(dm.value(&ObjectiveVector([1.0, 1.0, 2.0, 2.0, 1.0])), 0.0);
        assert!((dm.value(&ObjectiveVector([2.0, 2.0, 1.0, 1.0, 2.0])) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn subset_weights_follow_index_order() {
        let dm = SimulatedDm::new(DmFamily::Nv([1, 3, 4, 5]), bounds()).unwrap();
        // f̄ = (1, 0.7, 0, 0, 0)
        let ov = ObjectiveVector([2.0, 1.7, 2.0, 2.0, 1.0]);
        assert!((dm.value(&ov) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn zero_optimum_faults_for_deviation_families_only() {
        let b = ObjectiveBounds::new([0.0, 1.0, 1.0, 1.0, 1.0], [2.0; 5], BoundsMethod::Provided).unwrap();
        assert!(matches!(
            SimulatedDm::new(DmFamily::D, b.clone()),
            Err(Error::ZeroOptimum { objective: 1 })
        ));
        assert!(SimulatedDm::new(DmFamily::Dv([2, 3, 4, 5]), b.clone()).is_ok());
        assert!(SimulatedDm::new(DmFamily::N, b).is_ok());
    }

    #[test]
    fn verdict_band() {
        assert_eq!(verdict_from_values(0.2, 0.5, 1e-9), Verdict::Left);
        assert_eq!(verdict_from_values(0.5, 0.2, 1e-9), Verdict::Right);
        assert_eq!(verdict_from_values(0.5, 0.5, 1e-9), Verdict::Indifferent);
        assert_eq!(verdict_from_values(0.5, 0.5 + 5e-10, 1e-9), Verdict::Indifferent);
    }
}
