//! Genetic machinery over `p`-subsets: dominance sorting, crowding,
//! mating selection, crossover, mutation, duplicate killing, truncation.

mod operators;
mod selection;
mod sorting;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::instance::{BoundsBudget, Solution};

pub use operators::{crossover, crossover_at, kill_duplicates, mutate, random_population, random_solution};
pub use selection::{roulette_probabilities, roulette_select, tournament_select, truncate, Rank};
pub use sorting::{crowding_distance, dominates_with, nondominated_sort};

/// Generator used by every stochastic component.
pub type RngStream = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> RngStream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Minimizes `f` over `p`-subsets of `1..=m` with the same operators as the
/// main loops; best of `budget.restarts` independent runs, ties broken by
/// the lexicographically smaller solution.
pub fn single_objective_search<F>(m: usize, p: usize, f: F, budget: &BoundsBudget, seed: u64) -> (Solution, f64)
where
    F: Fn(&Solution) -> f64,
{
    let mut best: Option<(Solution, f64)> = None;
    let mut consider = |s: &Solution, v: f64| {
        let better = match &best {
            None => true,
            Some((bs, bv)) => v < *bv || (v == *bv && s < bs),
        };
        if better {
            best = Some((s.clone(), v));
        }
    };
    for restart in 0..budget.restarts.max(1) {
        let mut rng = rng_from_seed(seed.wrapping_add(restart as u64));
        let mut pop = random_population(m, p, budget.pop_size.max(2), &mut rng);
        let mut values: Vec<f64> = pop.iter().map(&f).collect();
        for _ in 0..budget.generations {
            let ranks: Vec<Rank> = values.iter().map(|v| Rank { front: 1, score: -v }).collect();
            let parents = tournament_select(&ranks, &mut rng);
            let mut kids = Vec::with_capacity(parents.len());
            for pair in parents.chunks(2) {
                let (a, b) = (&pop[pair[0]], &pop[*pair.get(1).unwrap_or(&pair[0])]);
                let (c1, c2) = crossover(a, b, &mut rng);
                kids.push(mutate(&c1, m, &mut rng));
                kids.push(mutate(&c2, m, &mut rng));
            }
            let kids = kill_duplicates(&pop, kids);
            values.extend(kids.iter().map(&f));
            pop.extend(kids);
            let ranks: Vec<Rank> = values.iter().map(|v| Rank { front: 1, score: -v }).collect();
            let keep = truncate(&ranks, budget.pop_size.max(2), &mut rng);
            pop = keep.iter().map(|&i| pop[i].clone()).collect();
            values = keep.iter().map(|&i| values[i]).collect();
        }
        for (s, v) in pop.iter().zip(&values) {
            consider(s, *v);
        }
    }
    best.expect("search visits at least one solution")
}
