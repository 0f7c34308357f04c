use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use super::{brsd, Algorithm, Problem, RunConfig, RunRecord};
use crate::dm::{DecisionMaker, Query, QueryCandidate, SimulatedDm};
use crate::error::{Error, Result};
use crate::evolution::{
    crossover, crowding_distance, kill_duplicates, mutate, nondominated_sort, random_population, rng_from_seed,
    roulette_select, tournament_select, truncate, Rank, RngStream,
};
use crate::instance::Solution;
use crate::objectives::{evaluate, normalize, NormalizedVector, ObjectiveVector, Sense, ORIENTATION};
use crate::preference::{
    check, check_choquet_from, rank_fronts_limited, repair, CompatResult, ModelKind, PreferenceStore, ValueModel,
};

/// One population member with everything the loops rank on.
#[derive(Debug, Clone, Serialize)]
pub struct Individual {
    pub solution: Solution,
    pub objectives: ObjectiveVector,
    pub normalized: NormalizedVector,
    /// Model input: `1 - f̄`.
    pub benefit: Vec<f64>,
    pub true_value: Option<f64>,
    pub front: usize,
    pub score: f64,
}

impl Individual {
    fn new(problem: &Problem, solution: Solution, dm: Option<&SimulatedDm>) -> Self {
        let objectives = evaluate(&problem.instance, &problem.distances, &solution);
        let normalized = normalize(&objectives, &problem.bounds);
        Individual {
            benefit: normalized.benefit(),
            true_value: dm.map(|d| d.value(&objectives)),
            solution,
            objectives,
            normalized,
            front: 1,
            score: 0.0,
        }
    }

    fn rank(&self) -> Rank {
        Rank {
            front: self.front,
            score: self.score,
        }
    }

    fn candidate(&self) -> QueryCandidate {
        QueryCandidate {
            solution: self.solution.clone(),
            objectives: self.objectives,
            normalized: self.normalized,
        }
    }
}

/// State visible to observers at the top of each generation.
#[derive(Debug, Serialize)]
pub struct Snapshot<'a> {
    pub generation: usize,
    pub model: Option<ModelKind>,
    pub comparisons_asked: usize,
    /// In rank order.
    pub population: &'a [Individual],
    pub store: &'a PreferenceStore,
}

pub trait RunObserver {
    fn observe(&mut self, snapshot: &Snapshot<'_>);
}

pub struct NoObserver;

impl RunObserver for NoObserver {
    fn observe(&mut self, _: &Snapshot<'_>) {}
}

/// Runs the configured algorithm to completion.
pub fn run(problem: &Problem, cfg: &RunConfig, dm: &mut dyn DecisionMaker) -> Result<RunRecord> {
    run_observed(problem, cfg, dm, &mut NoObserver)
}

struct Learner {
    store: PreferenceStore,
    kind: ModelKind,
    model: Option<ValueModel>,
    escalations: usize,
    repairs: usize,
}

impl Learner {
    fn check(&self, cfg: &RunConfig, seed: u64) -> CompatResult {
        check(&self.store, self.kind, &cfg.search, seed)
    }

    /// Escalation and repair after a new comparison.
    fn absorb(&mut self, cfg: &RunConfig, seed: u64) {
        let mut result = self.check(cfg, seed);
        if !result.is_compatible() && self.kind == ModelKind::Linear {
            self.kind = ModelKind::Choquet;
            self.escalations += 1;
            log::debug!("no weighted sum reproduces the answers, switching to Choquet");
            result = self.check(cfg, seed);
        }
        if !result.is_compatible() {
            let kind = self.kind;
            let search = cfg.search.clone();
            let warm = match &self.model {
                Some(ValueModel::Choquet(m)) => Some(m.clone()),
                _ => None,
            };
            repair(&mut self.store, |s| match kind {
                ModelKind::Linear => check(s, kind, &search, seed).is_compatible(),
                ModelKind::Choquet => check_choquet_from(s, &search, seed, warm.as_ref()).is_compatible(),
            });
            self.repairs += 1;
            result = self.check(cfg, seed);
        }
        self.model = result.model;
    }
}

fn seeded(rng: &mut RngStream) -> u64 {
    rng.random()
}

/// Assigns `front` and `score` to every member and returns the positions
/// in rank order (front ascending, score descending).
fn assign_ranks(
    algorithm: Algorithm,
    members: &mut [Individual],
    learner: Option<&Learner>,
    cfg: &RunConfig,
    limit: usize,
    rng: &mut RngStream,
) {
    let fronts: Vec<Vec<usize>> = match algorithm {
        Algorithm::Nemo2ch => {
            let learner = learner.expect("NEMO-II-Ch keeps a learner");
            let inputs: Vec<Vec<f64>> = members.iter().map(|i| i.benefit.clone()).collect();
            let seed = seeded(rng);
            rank_fronts_limited(
                &inputs,
                &learner.store,
                learner.kind,
                &cfg.search,
                seed,
                limit,
                learner.model.as_ref(),
            )
        }
        Algorithm::EaUvf => {
            let mut levels: Vec<f64> = members.iter().map(true_value).collect();
            levels.sort_by(f64::total_cmp);
            levels.dedup();
            let mut fronts = vec![Vec::new(); levels.len()];
            for (idx, ind) in members.iter().enumerate() {
                let v = true_value(ind);
                let level = levels.partition_point(|l| *l < v);
                fronts[level].push(idx);
            }
            fronts
        }
        Algorithm::EaUvf1 | Algorithm::EaUvf2 => {
            let pts: Vec<&[f64]> = members.iter().map(|i| &i.objectives.0[..]).collect();
            nondominated_sort(&pts, &ORIENTATION)
        }
    };
    for (f, front) in fronts.iter().enumerate() {
        let scores: Vec<f64> = match algorithm {
            Algorithm::EaUvf => vec![0.0; front.len()],
            Algorithm::EaUvf1 => front.iter().map(|&i| -true_value(&members[i])).collect(),
            Algorithm::Nemo2ch | Algorithm::EaUvf2 => {
                let pts: Vec<&[f64]> = front.iter().map(|&i| &members[i].objectives.0[..]).collect();
                crowding_distance(&pts)
            }
        };
        for (&i, s) in front.iter().zip(scores) {
            members[i].front = f + 1;
            members[i].score = s;
        }
    }
}

fn true_value(ind: &Individual) -> f64 {
    ind.true_value.expect("true value present for full-information algorithms")
}

/// A not-yet-asked pair of mutually non-dominated members, scanning
/// dominance fronts best first.
fn pick_pair(pop: &[Individual], store: &PreferenceStore, rng: &mut RngStream) -> Option<(usize, usize)> {
    let pts: Vec<&[f64]> = pop.iter().map(|i| &i.objectives.0[..]).collect();
    for front in nondominated_sort(&pts, &ORIENTATION) {
        if front.len() < 2 {
            continue;
        }
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for (k, &a) in front.iter().enumerate() {
            for &b in &front[k + 1..] {
                pairs.push((a, b));
            }
        }
        pairs.shuffle(rng);
        if let Some(&(a, b)) = pairs
            .iter()
            .find(|(a, b)| !store.contains_pair(&pop[*a].solution, &pop[*b].solution))
        {
            return Some(if rng.random_bool(0.5) { (a, b) } else { (b, a) });
        }
    }
    None
}

fn sort_into_rank_order(pop: &mut Vec<Individual>, rng: &mut RngStream) {
    let ranks: Vec<Rank> = pop.iter().map(Individual::rank).collect();
    let order = truncate(&ranks, pop.len(), rng);
    let mut slots: Vec<Option<Individual>> = std::mem::take(pop).into_iter().map(Some).collect();
    *pop = order.into_iter().map(|i| slots[i].take().expect("each index once")).collect();
}

/// Runs the configured algorithm, reporting each generation to `observer`.
pub fn run_observed(
    problem: &Problem,
    cfg: &RunConfig,
    dm: &mut dyn DecisionMaker,
    observer: &mut dyn RunObserver,
) -> Result<RunRecord> {
    let started = Instant::now();
    let m = problem.instance.m();
    cfg.validate(m)?;
    let algorithm = cfg.algorithm;
    let truth = dm.simulated().cloned();
    if algorithm.needs_true_value() && truth.is_none() {
        return Err(Error::Validation(format!("{algorithm} needs a simulated decision maker")));
    }
    let mut rng = rng_from_seed(cfg.seed);
    let mut learner = (algorithm == Algorithm::Nemo2ch).then(|| Learner {
        store: PreferenceStore::new(),
        kind: ModelKind::Linear,
        model: None,
        escalations: 0,
        repairs: 0,
    });

    let mut pop: Vec<Individual> = random_population(m, cfg.p, cfg.pop_size, &mut rng)
        .into_iter()
        .map(|s| Individual::new(problem, s, truth.as_ref()))
        .collect();
    let size = pop.len();
    assign_ranks(algorithm, &mut pop, learner.as_ref(), cfg, size, &mut rng);
    sort_into_rank_order(&mut pop, &mut rng);

    let mut comparisons = 0;
    let mut converged = false;
    let mut generation = 0;
    loop {
        observer.observe(&Snapshot {
            generation,
            model: learner.as_ref().map(|l| l.kind),
            comparisons_asked: comparisons,
            population: &pop,
            store: learner.as_ref().map_or(&EMPTY_STORE, |l| &l.store),
        });
        if let Some(target) = &cfg.target {
            if pop.iter().any(|i| &i.solution == target) {
                converged = true;
                break;
            }
        }
        if generation >= cfg.max_generations {
            break;
        }

        if let Some(learner) = learner.as_mut() {
            if generation % cfg.interaction_period == 0 {
                if let Some((a, b)) = pick_pair(&pop, &learner.store, &mut rng) {
                    let query = Query {
                        generation,
                        left: pop[a].candidate(),
                        right: pop[b].candidate(),
                    };
                    let verdict = dm.compare(&query)?;
                    learner.store.push(
                        pop[a].solution.clone(),
                        pop[b].solution.clone(),
                        verdict,
                        pop[a].benefit.clone(),
                        pop[b].benefit.clone(),
                    )?;
                    comparisons += 1;
                    let seed = seeded(&mut rng);
                    learner.absorb(cfg, seed);
                    let size = pop.len();
                    assign_ranks(algorithm, &mut pop, Some(learner), cfg, size, &mut rng);
                    sort_into_rank_order(&mut pop, &mut rng);
                }
            }
        }

        let parents = match algorithm {
            Algorithm::EaUvf2 => {
                let values: Vec<f64> = pop.iter().map(true_value).collect();
                roulette_select(&values, Sense::Min, pop.len(), &mut rng)?
            }
            _ => {
                let ranks: Vec<Rank> = pop.iter().map(Individual::rank).collect();
                tournament_select(&ranks, &mut rng)
            }
        };
        let mut offspring = Vec::with_capacity(parents.len() + 1);
        for pair in parents.chunks(2) {
            let (a, b) = (&pop[pair[0]].solution, &pop[*pair.get(1).unwrap_or(&pair[0])].solution);
            let (c1, c2) = crossover(a, b, &mut rng);
            offspring.push(mutate(&c1, m, &mut rng));
            offspring.push(mutate(&c2, m, &mut rng));
        }
        let current: Vec<Solution> = pop.iter().map(|i| i.solution.clone()).collect();
        let offspring = kill_duplicates(&current, offspring);
        pop.extend(
            offspring
                .into_iter()
                .map(|s| Individual::new(problem, s, truth.as_ref())),
        );
        assign_ranks(algorithm, &mut pop, learner.as_ref(), cfg, cfg.pop_size, &mut rng);
        let ranks: Vec<Rank> = pop.iter().map(Individual::rank).collect();
        let keep = truncate(&ranks, cfg.pop_size, &mut rng);
        let mut slots: Vec<Option<Individual>> = pop.into_iter().map(Some).collect();
        pop = keep.into_iter().map(|i| slots[i].take().expect("each index once")).collect();
        generation += 1;
    }

    let best = best_member(&pop, cfg.target.as_ref().filter(|_| converged));
    let best_true_value = best.true_value;
    let brsd = match (&truth, &cfg.target) {
        (Some(dm), Some(target)) => {
            if converged {
                Some(0.0)
            } else {
                let pb = dm.value(&evaluate(&problem.instance, &problem.distances, target));
                match brsd(best_true_value.expect("simulated"), pb) {
                    Ok(v) => Some(v),
                    Err(e) => {
                        log::warn!("{e}");
                        None
                    }
                }
            }
        }
        _ => None,
    };
    let (escalations, repairs, final_model) = learner
        .as_ref()
        .map_or((0, 0, None), |l| (l.escalations, l.repairs, Some(l.kind)));
    Ok(RunRecord {
        algorithm,
        interaction_period: (algorithm == Algorithm::Nemo2ch).then_some(cfg.interaction_period),
        seed: cfg.seed,
        converged,
        generations_used: generation,
        comparisons_asked: comparisons,
        model_escalations: escalations,
        repairs,
        final_model,
        best_solution: best.solution.clone(),
        best_objectives: best.objectives,
        best_true_value,
        brsd,
        wall_time: started.elapsed().as_secs_f64(),
    })
}

static EMPTY_STORE: PreferenceStore = PreferenceStore::new();

/// The target when present, else the lowest true value (ties to the
/// smaller solution), else the top-ranked member.
fn best_member<'a>(pop: &'a [Individual], target: Option<&Solution>) -> &'a Individual {
    if let Some(t) = target {
        if let Some(i) = pop.iter().find(|i| &i.solution == t) {
            return i;
        }
    }
    if pop.iter().all(|i| i.true_value.is_some()) {
        return pop
            .iter()
            .min_by(|a, b| {
                true_value(a)
                    .total_cmp(&true_value(b))
                    .then_with(|| a.solution.cmp(&b.solution))
            })
            .expect("non-empty population");
    }
    &pop[0]
}
