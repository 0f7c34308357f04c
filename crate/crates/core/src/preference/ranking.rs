//! Fronts by potential optimality: peel off every solution that some
//! compatible model puts strictly above all the others, then recurse.

use rayon::prelude::*;

use super::compat::{ModelKind, Program, EPS_COMPAT};
use super::models::ValueModel;
use super::store::PreferenceStore;
use crate::numerics::SimplexSearchConfig;

/// Ranking searches only need to certify a margin above the threshold.
const RANKING_STOP_MARGIN: f64 = 10.0 * EPS_COMPAT;

fn weakly_dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x >= y)
}

/// Members of `pool` (indices into `inputs`) not weakly dominated by another
/// member, keeping one representative per identical vector.
fn undominated(inputs: &[Vec<f64>], pool: &[usize]) -> Vec<usize> {
    let mut out = Vec::new();
    for (k, &a) in pool.iter().enumerate() {
        let beaten = pool.iter().enumerate().any(|(l, &b)| {
            l != k && weakly_dominates(&inputs[b], &inputs[a]) && (inputs[b] != inputs[a] || l < k)
        });
        if !beaten {
            out.push(a);
        }
    }
    out
}

fn candidate_seed(seed: u64, level: usize, idx: usize) -> u64 {
    let mix = (level as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (idx as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    seed ^ mix
}

/// Ordered partition of `inputs` (benefit vectors) into fronts of indices.
/// Order inside each front is by index; callers sort by crowding.
pub fn rank_fronts_by_potential_optimality(
    inputs: &[Vec<f64>],
    store: &PreferenceStore,
    kind: ModelKind,
    cfg: &SimplexSearchConfig,
    seed: u64,
) -> Vec<Vec<usize>> {
    rank_fronts_limited(inputs, store, kind, cfg, seed, inputs.len(), None)
}

/// As [`rank_fronts_by_potential_optimality`], but once at least `limit`
/// solutions sit in fronts, everything left becomes one last front.
/// `warm` seeds the Choquet searches.
pub fn rank_fronts_limited(
    inputs: &[Vec<f64>],
    store: &PreferenceStore,
    kind: ModelKind,
    cfg: &SimplexSearchConfig,
    seed: u64,
    limit: usize,
    warm: Option<&ValueModel>,
) -> Vec<Vec<usize>> {
    let n = inputs.first().map_or(0, Vec::len);
    let mut remaining: Vec<usize> = (0..inputs.len()).collect();
    let mut fronts = Vec::new();
    let mut assigned = 0;
    let mut level = 0;
    while !remaining.is_empty() {
        if assigned >= limit || remaining.len() == 1 {
            fronts.push(std::mem::take(&mut remaining));
            break;
        }
        let candidates: Vec<usize> = undominated(inputs, &remaining)
            .into_iter()
            .filter(|&x| remaining.iter().all(|&y| y == x || inputs[y] != inputs[x]))
            .collect();
        let winners: Vec<usize> = candidates
            .par_iter()
            .filter(|&&x| {
                let others: Vec<usize> = remaining.iter().copied().filter(|&y| y != x).collect();
                let rivals = undominated(inputs, &others);
                let mut prog = Program::from_store(store, n);
                prog.set_stop_margin(RANKING_STOP_MARGIN);
                let top = prog.add_vector(&inputs[x]);
                for &a in &rivals {
                    let slot = prog.add_vector(&inputs[a]);
                    prog.add_strict(top, slot);
                }
                let cfg = SimplexSearchConfig {
                    seed: candidate_seed(seed, level, x),
                    ..cfg.clone()
                };
                prog.solve(kind, &cfg, warm).is_compatible()
            })
            .copied()
            .collect();
        if winners.is_empty() {
            fronts.push(std::mem::take(&mut remaining));
            break;
        }
        remaining.retain(|i| !winners.contains(i));
        assigned += winners.len();
        fronts.push(winners);
        level += 1;
    }
    fronts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rank(inputs: &[Vec<f64>]) -> Vec<Vec<usize>> {
        rank_fronts_by_potential_optimality(
            inputs,
            &PreferenceStore::new(),
            ModelKind::Linear,
            &SimplexSearchConfig::default(),
            0,
        )
    }

    #[test]
    fn unsupported_point_goes_second() {
        let fronts = rank(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.4, 0.4]]);
        assert_eq!(fronts, vec![vec![0, 1], vec![2]]);
    }

    #[test]
    fn singleton_population() {
        assert_eq!(rank(&[vec![0.3, 0.3]]), vec![vec![0]]);
    }

    #[test]
    fn identical_vectors_share_a_front() {
        assert_eq!(rank(&[vec![0.5, 0.5], vec![0.5, 0.5]]), vec![vec![0, 1]]);
    }

    #[test]
    fn dominated_chain_peels_one_by_one() {
        let fronts = rank(&[vec![0.2, 0.2], vec![0.9, 0.9], vec![0.5, 0.5]]);
        assert_eq!(fronts, vec![vec![1], vec![2], vec![0]]);
    }

    #[test]
    fn choquet_can_promote_a_concave_point() {
        // Only a min-like model puts the balanced point on top.
        let inputs = vec![vec![1.0, 0.2], vec![0.2, 1.0], vec![0.5, 0.5]];
        let fronts = rank_fronts_by_potential_optimality(
            &inputs,
            &PreferenceStore::new(),
            ModelKind::Choquet,
            &SimplexSearchConfig::default(),
            4,
        );
        assert_eq!(fronts, vec![vec![0, 1, 2]]);
    }

    #[test]
    fn limit_lumps_the_tail() {
        let inputs: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64 / 4.0, i as f64 / 4.0]).collect();
        let fronts = rank_fronts_limited(
            &inputs,
            &PreferenceStore::new(),
            ModelKind::Linear,
            &SimplexSearchConfig::default(),
            0,
            2,
            None,
        );
        assert_eq!(fronts, vec![vec![4], vec![3], vec![0, 1, 2]]);
    }
}
