//! Problem data: demand points, candidate sites, covering radii and
//! per-objective bounds, plus instance files and synthetic generation.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objectives::{self, ObjectiveVector, NUM_OBJECTIVES, ORIENTATION};

/// Exhaustive enumeration is refused above this many subsets.
pub const EXHAUSTIVE_CAP: u128 = 5_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandPoint {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub pop: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateSite {
    pub id: usize,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundsMethod {
    Exhaustive,
    Evolutionary,
    Provided,
}

impl std::str::FromStr for BoundsMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(BoundsMethod::Exhaustive),
            "evolutionary" => Ok(BoundsMethod::Evolutionary),
            "provided" => Ok(BoundsMethod::Provided),
            other => Err(Error::Validation(format!("unknown bounds method `{other}`"))),
        }
    }
}

/// Per-objective extreme values over all `p`-subsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveBounds {
    pub min: [f64; NUM_OBJECTIVES],
    pub max: [f64; NUM_OBJECTIVES],
    pub method: BoundsMethod,
}

impl ObjectiveBounds {
    pub fn new(
        min: [f64; NUM_OBJECTIVES],
        max: [f64; NUM_OBJECTIVES],
        method: BoundsMethod,
    ) -> Result<Self> {
        for k in 0..NUM_OBJECTIVES {
            if !(min[k].is_finite() && max[k].is_finite()) || min[k] > max[k] {
                return Err(Error::Validation(format!(
                    "bounds for f{} are not an ordered finite pair: [{}, {}]",
                    k + 1,
                    min[k],
                    max[k]
                )));
            }
        }
        Ok(ObjectiveBounds { min, max, method })
    }

    /// The optimal value of objective `k` (0-based): the minimum for
    /// minimized objectives and the maximum for maximized ones.
    pub fn optimum(&self, k: usize) -> f64 {
        if ORIENTATION[k].is_minimized() {
            self.min[k]
        } else {
            self.max[k]
        }
    }
}

/// A validated problem instance. Demand points and sites are stored in id
/// order, so demand `i` (1-based) lives at index `i - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    demand: Vec<DemandPoint>,
    sites: Vec<CandidateSite>,
    s1: f64,
    s2: f64,
    bounds: Option<ObjectiveBounds>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundPair {
    min: f64,
    max: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    demand: Vec<DemandPoint>,
    sites: Vec<CandidateSite>,
    s1: f64,
    s2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bounds: Option<BTreeMap<String, BoundPair>>,
}

impl Instance {
    pub fn new(
        mut demand: Vec<DemandPoint>,
        mut sites: Vec<CandidateSite>,
        s1: f64,
        s2: f64,
        bounds: Option<ObjectiveBounds>,
    ) -> Result<Self> {
        if demand.is_empty() {
            return Err(Error::Validation("at least one demand point is required".into()));
        }
        if sites.len() < 2 {
            return Err(Error::Validation("at least two candidate sites are required".into()));
        }
        demand.sort_by_key(|d| d.id);
        sites.sort_by_key(|s| s.id);
        for (idx, d) in demand.iter().enumerate() {
            if d.id != idx + 1 {
                return Err(Error::Validation(format!(
                    "demand ids must be dense 1..{} without duplicates (found id {} at rank {})",
                    demand.len(),
                    d.id,
                    idx + 1
                )));
            }
            if !(d.x.is_finite() && d.y.is_finite()) {
                return Err(Error::Validation(format!("demand {} has non-finite coordinates", d.id)));
            }
            if !(d.pop.is_finite() && d.pop >= 0.0) {
                return Err(Error::Validation(format!(
                    "demand {} has invalid population {}",
                    d.id, d.pop
                )));
            }
        }
        for (idx, s) in sites.iter().enumerate() {
            if s.id != idx + 1 {
                return Err(Error::Validation(format!(
                    "site ids must be dense 1..{} without duplicates (found id {} at rank {})",
                    sites.len(),
                    s.id,
                    idx + 1
                )));
            }
            if !(s.x.is_finite() && s.y.is_finite()) {
                return Err(Error::Validation(format!("site {} has non-finite coordinates", s.id)));
            }
        }
        if !(s1.is_finite() && s2.is_finite()) || s1 < 0.0 {
            return Err(Error::Validation(format!("invalid covering radii s1={s1}, s2={s2}")));
        }
        if s1 >= s2 {
            return Err(Error::Validation(format!("s1 must be smaller than s2 (s1={s1}, s2={s2})")));
        }
        Ok(Instance {
            demand,
            sites,
            s1,
            s2,
            bounds,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: InstanceFile = serde_json::from_str(text)?;
        let bounds = match raw.bounds {
            None => None,
            Some(map) => Some(parse_bounds(map)?),
        };
        Instance::new(raw.demand, raw.sites, raw.s1, raw.s2, bounds)
    }

    pub fn to_json(&self) -> String {
        let bounds = self.bounds.as_ref().map(|b| {
            (0..NUM_OBJECTIVES)
                .map(|k| {
                    (
                        (k + 1).to_string(),
                        BoundPair {
                            min: b.min[k],
                            max: b.max[k],
                        },
                    )
                })
                .collect()
        });
        let raw = InstanceFile {
            demand: self.demand.clone(),
            sites: self.sites.clone(),
            s1: self.s1,
            s2: self.s2,
            bounds,
        };
        serde_json::to_string_pretty(&raw).expect("instance serialization cannot fail")
    }

    pub fn demand(&self) -> &[DemandPoint] {
        &self.demand
    }

    pub fn sites(&self) -> &[CandidateSite] {
        &self.sites
    }

    /// Number of demand points.
    pub fn q(&self) -> usize {
        self.demand.len()
    }

    /// Number of candidate sites.
    pub fn m(&self) -> usize {
        self.sites.len()
    }

    pub fn s1(&self) -> f64 {
        self.s1
    }

    pub fn s2(&self) -> f64 {
        self.s2
    }

    pub fn bounds(&self) -> Option<&ObjectiveBounds> {
        self.bounds.as_ref()
    }

    pub fn with_bounds(mut self, bounds: ObjectiveBounds) -> Self {
        self.bounds = Some(bounds);
        self
    }
}

fn parse_bounds(map: BTreeMap<String, BoundPair>) -> Result<ObjectiveBounds> {
    let mut min = [f64::NAN; NUM_OBJECTIVES];
    let mut max = [f64::NAN; NUM_OBJECTIVES];
    for (key, pair) in map {
        let k: usize = key
            .parse()
            .ok()
            .filter(|k| (1..=NUM_OBJECTIVES).contains(k))
            .ok_or_else(|| Error::Validation(format!("unknown objective key `{key}` in bounds")))?;
        min[k - 1] = pair.min;
        max[k - 1] = pair.max;
    }
    if min.iter().chain(max.iter()).any(|v| v.is_nan()) {
        return Err(Error::Validation("bounds must list all five objectives".into()));
    }
    ObjectiveBounds::new(min, max, BoundsMethod::Provided)
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance> {
    let text = std::fs::read_to_string(path)?;
    Instance::from_json(&text)
}

/// Canonical `p`-subset of 1-based site ids, stored strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Solution(Vec<usize>);

impl Solution {
    /// Builds a canonical solution from site ids in any order.
    pub fn new(mut sites: Vec<usize>, m: usize) -> Result<Self> {
        sites.sort_unstable();
        if sites.is_empty() {
            return Err(Error::Validation("a solution needs at least one site".into()));
        }
        if sites.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Validation(format!("solution has repeated sites: {sites:?}")));
        }
        if sites[0] == 0 || *sites.last().unwrap() > m {
            return Err(Error::Validation(format!("solution sites must lie in 1..={m}: {sites:?}")));
        }
        Ok(Solution(sites))
    }

    /// Canonicalizes without range checks; callers guarantee distinct ids.
    pub(crate) fn from_distinct(mut sites: Vec<usize>) -> Self {
        sites.sort_unstable();
        debug_assert!(sites.windows(2).all(|w| w[0] < w[1]));
        Solution(sites)
    }

    pub fn sites(&self) -> &[usize] {
        &self.0
    }

    pub fn p(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, site: usize) -> bool {
        self.0.binary_search(&site).is_ok()
    }
}

impl fmt::Display for Solution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    Euclidean,
    /// Haversine distance in kilometres; `x` is longitude and `y` latitude
    /// in degrees.
    GreatCircle,
}

/// Dense `q × m` demand-to-site distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    m: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn shape(&self) -> (usize, usize) {
        (self.data.len() / self.m, self.m)
    }

    /// Distance between demand `i` (0-based) and site `site` (1-based id).
    #[inline]
    pub fn get(&self, i: usize, site: usize) -> f64 {
        self.data[i * self.m + site - 1]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.m..(i + 1) * self.m]
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }
}

pub fn distances(inst: &Instance) -> DistanceMatrix {
    distances_with(inst, Metric::Euclidean)
}

pub fn distances_with(inst: &Instance, metric: Metric) -> DistanceMatrix {
    let m = inst.m();
    let mut data = Vec::with_capacity(inst.q() * m);
    for d in inst.demand() {
        for s in inst.sites() {
            data.push(match metric {
                Metric::Euclidean => (d.x - s.x).hypot(d.y - s.y),
                Metric::GreatCircle => haversine_km(d.x, d.y, s.x, s.y),
            });
        }
    }
    DistanceMatrix { m, data }
}

fn haversine_km(lon1: f64, lat1: f64, lon2: f64, lat2: f64) -> f64 {
    const EARTH_RADIUS_KM: f64 = 6371.0088;
    let (phi1, phi2) = (lat1.to_radians(), lat2.to_radians());
    let dphi = (lat2 - lat1).to_radians();
    let dlambda = (lon2 - lon1).to_radians();
    let a = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * a.sqrt().min(1.0).asin()
}

/// Parameters for synthetic instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    /// Side length of the square the points are drawn from.
    pub scale: f64,
    /// Populations are uniform on `[pop_min, pop_max]`.
    pub pop_min: f64,
    pub pop_max: f64,
    pub s1_percentile: f64,
    pub s2_percentile: f64,
    pub s1: Option<f64>,
    pub s2: Option<f64>,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            scale: 100.0,
            pop_min: 1.0,
            pop_max: 100.0,
            s1_percentile: 10.0,
            s2_percentile: 25.0,
            s1: None,
            s2: None,
        }
    }
}

/// Draws a reproducible instance: points uniform in `[0, scale]²`,
/// uniform populations, covering radii at percentiles of the demand-site
/// distance distribution unless overridden.
pub fn generate_instance(q: usize, m: usize, seed: u64, spec: &GeneratorConfig) -> Result<Instance> {
    if q < 1 || m < 2 {
        return Err(Error::Validation(format!("need q >= 1 and m >= 2 (got q={q}, m={m})")));
    }
    if !(spec.scale > 0.0) || !(spec.pop_min >= 0.0 && spec.pop_min <= spec.pop_max) {
        return Err(Error::Validation("invalid generator scale or population range".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pop = |rng: &mut ChaCha8Rng| {
        if spec.pop_max > spec.pop_min {
            rng.random_range(spec.pop_min..=spec.pop_max)
        } else {
            spec.pop_min
        }
    };
    let demand: Vec<DemandPoint> = (1..=q)
        .map(|id| DemandPoint {
            id,
            x: rng.random::<f64>() * spec.scale,
            y: rng.random::<f64>() * spec.scale,
            pop: pop(&mut rng),
        })
        .collect();
    let sites: Vec<CandidateSite> = (1..=m)
        .map(|id| CandidateSite {
            id,
            x: rng.random::<f64>() * spec.scale,
            y: rng.random::<f64>() * spec.scale,
        })
        .collect();

    let mut all: Vec<f64> = demand
        .iter()
        .flat_map(|d| sites.iter().map(move |s| (d.x - s.x).hypot(d.y - s.y)))
        .collect();
    all.sort_by(f64::total_cmp);
    let s1 = spec.s1.unwrap_or_else(|| percentile(&all, spec.s1_percentile));
    let mut s2 = spec.s2.unwrap_or_else(|| percentile(&all, spec.s2_percentile));
    if spec.s2.is_none() && s2 <= s1 {
        s2 = s1 + spec.scale * 1e-6;
    }
    Instance::new(demand, sites, s1, s2, None)
}

/// Linear-interpolated percentile of sorted data.
fn percentile(sorted: &[f64], pct: f64) -> f64 {
    if sorted.len() == 1 {
        return sorted[0];
    }
    let rank = (pct / 100.0).clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (rank - lo as f64)
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Calls `visit` on every `p`-subset of `1..=m` in lexicographic order.
pub fn for_each_subset(m: usize, p: usize, mut visit: impl FnMut(&[usize])) {
    if p == 0 || p > m {
        return;
    }
    let mut current: Vec<usize> = (1..=p).collect();
    loop {
        visit(&current);
        // Rightmost position that can still be incremented.
        let Some(pos) = (0..p).rev().find(|&i| current[i] < m - (p - 1 - i)) else {
            return;
        };
        current[pos] += 1;
        for i in pos + 1..p {
            current[i] = current[i - 1] + 1;
        }
    }
}

pub(crate) fn check_enumerable(m: usize, p: usize) -> Result<()> {
    let count = binomial(m, p);
    if count > EXHAUSTIVE_CAP {
        return Err(Error::EnumerationCap {
            m,
            p,
            count,
            limit: EXHAUSTIVE_CAP,
        });
    }
    Ok(())
}

/// Effort for the evolutionary bound search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoundsBudget {
    pub generations: usize,
    pub restarts: usize,
    pub pop_size: usize,
    pub seed: u64,
}

impl Default for BoundsBudget {
    fn default() -> Self {
        BoundsBudget {
            generations: 300,
            restarts: 5,
            pop_size: 30,
            seed: 0,
        }
    }
}

pub fn compute_bounds(
    inst: &Instance,
    dm: &DistanceMatrix,
    p: usize,
    method: BoundsMethod,
    budget: &BoundsBudget,
) -> Result<ObjectiveBounds> {
    if p == 0 || p > inst.m() {
        return Err(Error::Validation(format!("p must lie in 1..={} (got {p})", inst.m())));
    }
    match method {
        BoundsMethod::Provided => inst
            .bounds()
            .cloned()
            .ok_or_else(|| Error::Validation("instance carries no bounds".into())),
        BoundsMethod::Exhaustive => {
            check_enumerable(inst.m(), p)?;
            let mut min = [f64::INFINITY; NUM_OBJECTIVES];
            let mut max = [f64::NEG_INFINITY; NUM_OBJECTIVES];
            let mut closest = vec![0.0; inst.q()];
            for_each_subset(inst.m(), p, |sites| {
                objectives::closest_distances_into(dm, sites, &mut closest);
                let ov = objectives::evaluate_from_closest(inst, &closest);
                for (k, v) in ov.values().iter().enumerate() {
                    min[k] = min[k].min(*v);
                    max[k] = max[k].max(*v);
                }
            });
            ObjectiveBounds::new(min, max, BoundsMethod::Exhaustive)
        }
        BoundsMethod::Evolutionary => {
            let mut min = [0.0; NUM_OBJECTIVES];
            let mut max = [0.0; NUM_OBJECTIVES];
            for k in 0..NUM_OBJECTIVES {
                for (sign, slot) in [(1.0, &mut min[k]), (-1.0, &mut max[k])] {
                    let seed = budget
                        .seed
                        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                        .wrapping_add((2 * k + usize::from(sign < 0.0)) as u64);
                    let (_, best) = crate::evolution::single_objective_search(
                        inst.m(),
                        p,
                        |sol: &crate::Solution| sign * evaluate_one(inst, dm, sol).values()[k],
                        budget,
                        seed,
                    );
                    *slot = sign * best;
                }
            }
            ObjectiveBounds::new(min, max, BoundsMethod::Evolutionary)
        }
    }
}

fn evaluate_one(inst: &Instance, dm: &DistanceMatrix, sol: &Solution) -> ObjectiveVector {
    objectives::evaluate(inst, dm, sol)
}
