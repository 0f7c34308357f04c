use std::cmp::Ordering;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::objectives::Sense;

/// Rank of one individual: lower front first, then higher score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rank {
    pub front: usize,
    pub score: f64,
}

fn compare(a: Rank, b: Rank) -> Ordering {
    a.front.cmp(&b.front).then_with(|| b.score.total_cmp(&a.score))
}

/// Binary tournament against a random permutation: individual `s` meets
/// `perm[s]`, one winner each, so the output has `ranks.len()` parents.
pub fn tournament_select<R: Rng + ?Sized>(ranks: &[Rank], rng: &mut R) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..ranks.len()).collect();
    perm.shuffle(rng);
    (0..ranks.len())
        .map(|s| {
            let t = perm[s];
            match compare(ranks[s], ranks[t]) {
                Ordering::Less => s,
                Ordering::Greater => t,
                Ordering::Equal => {
                    if rng.random_bool(0.5) {
                        s
                    } else {
                        t
                    }
                }
            }
        })
        .collect()
}

/// Parent probabilities from true values: proportional to `U` when
/// maximized, to `1/U` when minimized.
pub fn roulette_probabilities(utilities: &[f64], sense: Sense) -> Result<Vec<f64>> {
    let raw: Vec<f64> = match sense {
        Sense::Max => utilities.to_vec(),
        Sense::Min => {
            if utilities.contains(&0.0) {
                return Err(Error::ZeroUtility);
            }
            utilities.iter().map(|u| 1.0 / u).collect()
        }
    };
    if raw.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Validation("roulette needs finite nonnegative utilities".into()));
    }
    let total: f64 = raw.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroUtility);
    }
    Ok(raw.into_iter().map(|v| v / total).collect())
}

/// `count` independent draws from [`roulette_probabilities`].
pub fn roulette_select<R: Rng + ?Sized>(
    utilities: &[f64],
    sense: Sense,
    count: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let probs = roulette_probabilities(utilities, sense)?;
    let dist = WeightedIndex::new(&probs).map_err(|e| Error::Validation(e.to_string()))?;
    Ok((0..count).map(|_| dist.sample(rng)).collect())
}

/// Indices of the `keep` best: front ascending, score descending, random
/// order among exact ties. Result is in rank order.
pub fn truncate<R: Rng + ?Sized>(ranks: &[Rank], keep: usize, rng: &mut R) -> Vec<usize> {
    let keys: Vec<u64> = ranks.iter().map(|_| rng.random()).collect();
    let mut order: Vec<usize> = (0..ranks.len()).collect();
    order.sort_by(|&a, &b| compare(ranks[a], ranks[b]).then(keys[a].cmp(&keys[b])));
    order.truncate(keep);
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn r(front: usize, score: f64) -> Rank {
        Rank { front, score }
    }

    #[test]
    fn front_beats_score() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let ranks = [r(1, 0.0), r(2, 9.0)];
        for _ in 0..20 {
            // Index 1 can only win when it meets itself.
            let w = tournament_select(&ranks, &mut rng);
            assert!(w == vec![0, 1] || w == vec![0, 0], "{w:?}");
        }
    }

    #[test]
    fn score_breaks_front_ties() {
        assert_eq!(compare(r(1, 3.0), r(1, 1.0)), Ordering::Less);
    }

    #[test]
    fn tournament_is_reproducible() {
        let ranks = [r(1, 1.0); 6];
        let a = tournament_select(&ranks, &mut ChaCha8Rng::seed_from_u64(9));
        let b = tournament_select(&ranks, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn roulette_arithmetic() {
        let p = roulette_probabilities(&[1.0, 3.0], Sense::Max).unwrap();
        assert!((p[0] - 0.25).abs() < 1e-12 && (p[1] - 0.75).abs() < 1e-12);
        let p = roulette_probabilities(&[1.0, 3.0], Sense::Min).unwrap();
        assert!((p[0] - 0.75).abs() < 1e-12 && (p[1] - 0.25).abs() < 1e-12);
        let p = roulette_probabilities(&[2.0; 4], Sense::Min).unwrap();
        assert!(p.iter().all(|v| (v - 0.25).abs() < 1e-12));
    }

    #[test]
    fn zero_cost_faults() {
        assert!(matches!(roulette_probabilities(&[0.0, 1.0], Sense::Min), Err(Error::ZeroUtility)));
    }

    #[test]
    fn truncation_keeps_best() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ranks = [r(2, 5.0), r(1, 0.5), r(1, 2.0), r(3, 1.0)];
        assert_eq!(truncate(&ranks, 2, &mut rng), vec![2, 1]);
    }
}
