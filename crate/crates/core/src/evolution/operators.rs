use std::collections::HashSet;

use rand::seq::index;
use rand::Rng;

use crate::instance::{binomial, Solution};

/// A uniformly random `p`-subset of `1..=m`.
pub fn random_solution<R: Rng + ?Sized>(m: usize, p: usize, rng: &mut R) -> Solution {
    let sites = index::sample(rng, m, p).into_iter().map(|i| i + 1).collect();
    Solution::from_distinct(sites)
}

/// `size` distinct random subsets, or every subset if there are fewer.
pub fn random_population<R: Rng + ?Sized>(m: usize, p: usize, size: usize, rng: &mut R) -> Vec<Solution> {
    let size = (size as u128).min(binomial(m, p)) as usize;
    let mut seen = HashSet::with_capacity(size);
    let mut out = Vec::with_capacity(size);
    while out.len() < size {
        let s = random_solution(m, p, rng);
        if seen.insert(s.clone()) {
            out.push(s);
        }
    }
    out
}

/// Sites of `a` missing from `b`, ascending.
fn uncommon(a: &Solution, b: &Solution) -> Vec<usize> {
    a.sites().iter().copied().filter(|s| !b.contains(*s)).collect()
}

/// One-point crossover on the uncommon parts of the parents, cutting after
/// `cut` of them; shared sites go to both children.
pub fn crossover_at(p1: &Solution, p2: &Solution, cut: usize) -> (Solution, Solution) {
    let common: Vec<usize> = p1.sites().iter().copied().filter(|s| p2.contains(*s)).collect();
    let (u1, u2) = (uncommon(p1, p2), uncommon(p2, p1));
    let cut = cut.min(u1.len());
    let child = |head: &[usize], tail: &[usize]| {
        let sites = common.iter().chain(&head[..cut]).chain(&tail[cut..]).copied().collect();
        Solution::from_distinct(sites)
    };
    (child(&u1, &u2), child(&u2, &u1))
}

pub fn crossover<R: Rng + ?Sized>(p1: &Solution, p2: &Solution, rng: &mut R) -> (Solution, Solution) {
    let u = p1.sites().iter().filter(|s| !p2.contains(**s)).count();
    if u <= 1 {
        return (p1.clone(), p2.clone());
    }
    crossover_at(p1, p2, rng.random_range(1..u))
}

/// Random resetting: each position, with probability `1/p`, takes a random
/// site not currently in the child.
pub fn mutate<R: Rng + ?Sized>(child: &Solution, m: usize, rng: &mut R) -> Solution {
    let mut sites = child.sites().to_vec();
    let p = sites.len();
    let rate = 1.0 / p as f64;
    for pos in 0..p {
        if !rng.random_bool(rate) || m <= p {
            continue;
        }
        let mut pick = rng.random_range(0..m - p);
        let mut fresh = 0;
        for site in 1..=m {
            if sites.contains(&site) {
                continue;
            }
            if pick == 0 {
                fresh = site;
                break;
            }
            pick -= 1;
        }
        sites[pos] = fresh;
    }
    Solution::from_distinct(sites)
}

/// Drops offspring already present in `pop` or earlier in `offspring`.
pub fn kill_duplicates(pop: &[Solution], offspring: Vec<Solution>) -> Vec<Solution> {
    let mut seen: HashSet<Solution> = pop.iter().cloned().collect();
    offspring.into_iter().filter(|s| seen.insert(s.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sol(v: &[usize]) -> Solution {
        Solution::new(v.to_vec(), 60).unwrap()
    }

    #[test]
    fn worked_example() {
        let (a, b) = crossover_at(&sol(&[10, 15, 21, 30]), &sol(&[6, 10, 20, 50]), 2);
        assert_eq!(a, sol(&[10, 15, 21, 50]));
        assert_eq!(b, sol(&[6, 10, 20, 30]));
    }

    #[test]
    fn identical_parents() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = sol(&[1, 2, 3]);
        assert_eq!(crossover(&p, &p, &mut rng), (p.clone(), p));
    }

    #[test]
    fn disjoint_parents() {
        let (a, b) = crossover_at(&sol(&[1, 2]), &sol(&[3, 4]), 1);
        assert_eq!((a, b), (sol(&[1, 4]), sol(&[2, 3])));
    }

    #[test]
    fn mutation_without_spare_sites_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c = Solution::new(vec![1, 2, 3], 3).unwrap();
        for _ in 0..50 {
            assert_eq!(mutate(&c, 3, &mut rng), c);
        }
    }

    #[test]
    fn population_is_distinct_and_capped() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pop = random_population(5, 2, 30, &mut rng);
        assert_eq!(pop.len(), 10);
        let set: HashSet<_> = pop.iter().collect();
        assert_eq!(set.len(), 10);
    }

    #[test]
    fn offspring_duplicates_are_killed() {
        let pop = vec![sol(&[1, 2])];
        let kids = vec![sol(&[1, 2]), sol(&[2, 3]), sol(&[2, 3]), sol(&[4, 5])];
        assert_eq!(kill_duplicates(&pop, kids), vec![sol(&[2, 3]), sol(&[4, 5])]);
    }
}
