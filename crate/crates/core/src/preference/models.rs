//! Weighted-sum and 2-additive Choquet value models.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MODEL_TOL: f64 = 1e-9;

/// Number of unordered criterion pairs.
pub fn num_pairs(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Position of the pair `{i, j}` (0-based, `i != j`) in lexicographic order.
pub fn pair_index(i: usize, j: usize, n: usize) -> usize {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    a * (2 * n - a - 1) / 2 + (b - a - 1)
}

/// Iterates `(i, j, index)` over pairs `i < j`.
pub fn pairs(n: usize) -> impl Iterator<Item = (usize, usize, usize)> {
    (0..n)
        .flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
        .enumerate()
        .map(|(k, (i, j))| (i, j, k))
}

/// A capacity as a set function over bitmasks of criteria.
#[derive(Debug, Clone, PartialEq)]
pub struct Capacity {
    n: usize,
    values: Vec<f64>,
}

impl Capacity {
    /// `values[mask]` is the capacity of the criterion set encoded by `mask`.
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != 1 << n {
            return Err(Error::Validation(format!(
                "capacity over {n} criteria needs {} values, got {}",
                1 << n,
                values.len()
            )));
        }
        let cap = Capacity { n, values };
        cap.validate()?;
        Ok(cap)
    }

    fn validate(&self) -> Result<()> {
        let full = (1usize << self.n) - 1;
        if self.values[0].abs() > MODEL_TOL || (self.values[full] - 1.0).abs() > MODEL_TOL {
            return Err(Error::Validation("capacity is not normalized".into()));
        }
        for mask in 0..=full {
            for j in 0..self.n {
                let bigger = mask | (1 << j);
                if self.values[mask] > self.values[bigger] + MODEL_TOL {
                    return Err(Error::Validation(format!(
                        "capacity is not monotone between sets {mask:#b} and {bigger:#b}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, mask: usize) -> f64 {
        self.values[mask]
    }
}

/// Choquet integral with respect to a capacity, in the sorted-increments form.
pub fn choquet_eval_capacity(x: &[f64], mu: &Capacity) -> Result<f64> {
    if x.len() != mu.n() {
        return Err(Error::Validation("criteria count differs from capacity".into()));
    }
    if x.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::Validation("Choquet inputs must be nonnegative; translate first".into()));
    }
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut upper = (1usize << x.len()) - 1;
    let mut prev = 0.0;
    let mut total = 0.0;
    for &i in &order {
        total += (x[i] - prev) * mu.get(upper);
        prev = x[i];
        upper &= !(1 << i);
    }
    Ok(total)
}

/// Shifts every vector by the same constant so that all entries are
/// nonnegative; a no-op when they already are.
pub fn translate_nonnegative(vectors: &mut [Vec<f64>]) {
    let low = vectors.iter().flatten().copied().fold(0.0, f64::min);
    if low < 0.0 {
        for v in vectors.iter_mut().flatten() {
            *v -= low;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
}

impl LinearModel {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|w| !(*w >= -MODEL_TOL)) || (sum - 1.0).abs() > 1e-6 {
            return Err(Error::Validation(format!("weights must be nonnegative and sum to 1: {weights:?}")));
        }
        Ok(LinearModel { weights })
    }

    pub fn uniform(n: usize) -> Self {
        LinearModel {
            weights: vec![1.0 / n as f64; n],
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum()
    }
}

/// Scaling weights plus the Möbius representation of a 2-additive capacity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChoquetModel {
    pub weights: Vec<f64>,
    pub singles: Vec<f64>,
    /// Pair terms in [`pair_index`] order.
    pub pairs: Vec<f64>,
}

impl ChoquetModel {
    pub fn new(weights: Vec<f64>, singles: Vec<f64>, pairs: Vec<f64>) -> Result<Self> {
        let model = ChoquetModel {
            weights,
            singles,
            pairs,
        };
        model.validate()?;
        Ok(model)
    }

    /// Zero interaction: the capacity is additive and the integral is a
    /// weighted sum of the scaled inputs.
    pub fn additive(weights: Vec<f64>, singles: Vec<f64>) -> Result<Self> {
        let n = singles.len();
        Self::new(weights, singles, vec![0.0; num_pairs(n)])
    }

    pub fn n(&self) -> usize {
        self.singles.len()
    }

    pub fn pair(&self, i: usize, j: usize) -> f64 {
        self.pairs[pair_index(i, j, self.n())]
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if self.weights.len() != n || self.pairs.len() != num_pairs(n) {
            return Err(Error::Validation("Choquet model arity mismatch".into()));
        }
        LinearModel::new(self.weights.clone())?;
        if self.singles.iter().any(|m| !(*m >= -MODEL_TOL)) {
            return Err(Error::Validation("singleton Möbius terms must be nonnegative".into()));
        }
        let total: f64 = self.singles.iter().sum::<f64>() + self.pairs.iter().sum::<f64>();
        if (total - 1.0).abs() > 1e-6 {
            return Err(Error::Validation(format!("Möbius terms sum to {total}, not 1")));
        }
        if self.monotonicity_violation() > 1e-6 {
            return Err(Error::Validation("Möbius terms violate monotonicity".into()));
        }
        Ok(())
    }

    /// Largest shortfall of `m({j}) + Σ_{i∈T} m({i,j}) >= 0` over all `j` and
    /// nonempty `T`; the binding `T` collects every negative pair at `j`.
    pub fn monotonicity_violation(&self) -> f64 {
        let n = self.n();
        (0..n)
            .map(|j| {
                let worst = self.singles[j]
                    + (0..n)
                        .filter(|&i| i != j)
                        .map(|i| self.pair(i, j).min(0.0))
                        .sum::<f64>();
                (-worst).max(0.0)
            })
            .fold(0.0, f64::max)
    }

    /// Integral of the already-scaled inputs.
    pub fn value_prescaled(&self, y: &[f64]) -> f64 {
        let mut total: f64 = self.singles.iter().zip(y).map(|(m, v)| m * v).sum();
        for (i, j, k) in pairs(self.n()) {
            let m = self.pairs[k];
            if m != 0.0 {
                total += m * y[i].min(y[j]);
            }
        }
        total
    }

    /// Integral of `(w_1 x_1, …, w_n x_n)`.
    pub fn value(&self, x: &[f64]) -> f64 {
        let scaled: Vec<f64> = self.weights.iter().zip(x).map(|(w, v)| w * v).collect();
        self.value_prescaled(&scaled)
    }

    /// The capacity `μ(S) = Σ_{T⊆S} m(T)` induced by the Möbius terms.
    pub fn capacity(&self) -> Result<Capacity> {
        let n = self.n();
        let values = (0..1usize << n)
            .map(|mask| {
                let singles: f64 = (0..n).filter(|j| mask & (1 << j) != 0).map(|j| self.singles[j]).sum();
                let pairs: f64 = pairs(n)
                    .filter(|(i, j, _)| mask & (1 << i) != 0 && mask & (1 << j) != 0)
                    .map(|(_, _, k)| self.pairs[k])
                    .sum();
                singles + pairs
            })
            .collect();
        Capacity::new(n, values)
    }

    /// Dimension of the unconstrained search vector.
    pub fn param_len(n: usize) -> usize {
        2 * n + num_pairs(n)
    }

    /// Box for the search vector: weights and singletons in `[0, 1]`, pair
    /// terms in `[-1, 1]`.
    pub fn param_box(n: usize) -> Vec<(f64, f64)> {
        let mut b = vec![(0.0, 1.0); 2 * n];
        b.extend(std::iter::repeat_n((-1.0, 1.0), num_pairs(n)));
        b
    }

    /// Search vector of this model; [`ChoquetModel::from_params`] maps it
    /// back to the same model.
    pub fn to_params(&self) -> Vec<f64> {
        let mut z = self.weights.clone();
        z.extend_from_slice(&self.singles);
        z.extend_from_slice(&self.pairs);
        z
    }

    /// Maps a search vector to a valid model. Weights and singletons are
    /// made nonnegative; negative pair terms are scaled down until every
    /// monotonicity constraint holds; everything is then normalized to sum
    /// to one. Returns `None` when no positive mass remains.
    pub fn from_params(z: &[f64], n: usize) -> Option<ChoquetModel> {
        let np = num_pairs(n);
        debug_assert_eq!(z.len(), 2 * n + np);
        let mut weights: Vec<f64> = z[..n].iter().map(|v| v.abs()).collect();
        let wsum: f64 = weights.iter().sum();
        if wsum > 0.0 {
            weights.iter_mut().for_each(|w| *w /= wsum);
        } else {
            weights = vec![1.0 / n as f64; n];
        }
        let singles: Vec<f64> = z[n..2 * n].iter().map(|v| v.abs()).collect();
        let mut pair_terms = z[2 * n..].to_vec();

        let mut factor = vec![1.0; n];
        for (j, f) in factor.iter_mut().enumerate() {
            let neg: f64 = (0..n)
                .filter(|&i| i != j)
                .map(|i| pair_terms[pair_index(i, j, n)].min(0.0))
                .sum();
            if singles[j] + neg < 0.0 {
                *f = singles[j] / -neg;
            }
        }
        for (i, j, k) in pairs(n) {
            if pair_terms[k] < 0.0 {
                pair_terms[k] *= factor[i].min(factor[j]);
            }
        }

        let total: f64 = singles.iter().sum::<f64>() + pair_terms.iter().sum::<f64>();
        if !(total > 1e-12) {
            return None;
        }
        Some(ChoquetModel {
            weights,
            singles: singles.iter().map(|v| v / total).collect(),
            pairs: pair_terms.iter().map(|v| v / total).collect(),
        })
    }
}

pub fn choquet_eval_2add(x: &[f64], model: &ChoquetModel, pre_scaled: bool) -> Result<f64> {
    model.validate()?;
    if x.len() != model.n() {
        return Err(Error::Validation("criteria count differs from model".into()));
    }
    if x.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::Validation("Choquet inputs must be nonnegative; translate first".into()));
    }
    Ok(if pre_scaled {
        model.value_prescaled(x)
    } else {
        model.value(x)
    })
}

/// A fitted value model of either kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ValueModel {
    Linear(LinearModel),
    Choquet(ChoquetModel),
}

impl ValueModel {
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            ValueModel::Linear(m) => m.value(x),
            ValueModel::Choquet(m) => m.value(x),
        }
    }
}
