//! Two-sided Mann-Whitney U test and small descriptive helpers.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::instance::for_each_subset;

/// Largest combined sample size handled by exact enumeration.
pub const EXACT_LIMIT: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MwuMode {
    /// Exact up to [`EXACT_LIMIT`] observations, normal approximation above.
    Auto,
    Exact,
    Approximate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MwuResult {
    /// `U` of the first sample.
    pub u: f64,
    pub p_value: f64,
    pub mean_a: f64,
    pub mean_b: f64,
}

/// Average ranks (1-based), ties sharing their mean rank.
fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (`n - 1`); 0 for a single observation.
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> MwuResult {
    mann_whitney_u_with(a, b, MwuMode::Auto)
}

/// Panics on an empty sample.
pub fn mann_whitney_u_with(a: &[f64], b: &[f64], mode: MwuMode) -> MwuResult {
    assert!(!a.is_empty() && !b.is_empty(), "Mann-Whitney U needs two non-empty samples");
    let (na, nb) = (a.len(), b.len());
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = midranks(&pooled);
    let rank_sum_a: f64 = ranks[..na].iter().sum();
    let u = rank_sum_a - (na * (na + 1)) as f64 / 2.0;
    let center = (na * nb) as f64 / 2.0;
    let exact = match mode {
        MwuMode::Exact => true,
        MwuMode::Approximate => false,
        MwuMode::Auto => na + nb <= EXACT_LIMIT,
    };
    let p_value = if exact {
        exact_p(&ranks, na, u, center)
    } else {
        approximate_p(&ranks, na, nb, u, center)
    };
    MwuResult {
        u,
        p_value: p_value.clamp(0.0, 1.0),
        mean_a: mean(a),
        mean_b: mean(b),
    }
}

/// Share of all `C(N, na)` rank assignments at least as far from the
/// center as the observed one.
fn exact_p(ranks: &[f64], na: usize, u: f64, center: f64) -> f64 {
    let observed = (u - center).abs();
    let offset = (na * (na + 1)) as f64 / 2.0;
    let (mut extreme, mut total) = (0u64, 0u64);
    for_each_subset(ranks.len(), na, |pick| {
        let s: f64 = pick.iter().map(|&i| ranks[i - 1]).sum();
        if ((s - offset) - center).abs() >= observed - 1e-9 {
            extreme += 1;
        }
        total += 1;
    });
    extreme as f64 / total as f64
}

/// Normal approximation with tie and continuity corrections.
fn approximate_p(ranks: &[f64], na: usize, nb: usize, u: f64, center: f64) -> f64 {
    let n = (na + nb) as f64;
    let mut sorted = ranks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    for group in sorted.chunk_by(|x, y| x == y) {
        let t = group.len() as f64;
        tie_term += t * t * t - t;
    }
    let variance = (na * nb) as f64 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if variance <= 0.0 {
        return 1.0;
    }
    let z = ((u - center).abs() - 0.5).max(0.0) / variance.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    2.0 * (1.0 - normal.cdf(z))
}
