use nemoloc::algorithms::{run, Algorithm, Problem, RunConfig};
use nemoloc::dm::{best_subset, BestSubsetStrategy, DecisionMaker, DmFamily, Query, SimulatedDm};
use nemoloc::evolution::rng_from_seed;
use nemoloc::instance::{
    compute_bounds, distances, generate_instance, BoundsBudget, BoundsMethod, GeneratorConfig, ObjectiveBounds,
};
use nemoloc::objectives::{dominates, ObjectiveVector, ORIENTATION};
use nemoloc::preference::Verdict;
use nemoloc::{Error, Instance, Result};
use rand::Rng;

fn setup(q: usize, m: usize, p: usize) -> (Instance, ObjectiveBounds) {
    let inst = generate_instance(q, m, 3, &GeneratorConfig::default()).unwrap();
    let bounds = compute_bounds(&inst, &distances(&inst), p, BoundsMethod::Exhaustive, &BoundsBudget::default()).unwrap();
    (inst, bounds)
}

/// Objective vector whose normalized components are `nf`.
fn from_normalized(nf: &[f64; 5], b: &ObjectiveBounds) -> ObjectiveVector {
    let mut v = [0.0; 5];
    for k in 0..5 {
        let span = b.max[k] - b.min[k];
        v[k] = if ORIENTATION[k].is_minimized() { b.min[k] + nf[k] * span } else { b.max[k] - nf[k] * span };
    }
    ObjectiveVector(v)
}

#[test]
fn family_values_vanish_only_at_the_ideal() {
    let (_, bounds) = setup(30, 12, 3);
    let mut rng = rng_from_seed(41);
    for family in DmFamily::all() {
        let dm = SimulatedDm::new(family, bounds.clone()).unwrap();
        assert_eq!(dm.value(&from_normalized(&[0.0; 5], &bounds)), 0.0, "{family}");
        for _ in 0..50 {
            let nf: [f64; 5] = std::array::from_fn(|_| rng.random_range(0.01..1.0));
            assert!(dm.value(&from_normalized(&nf, &bounds)) > 0.0, "{family}");
        }
    }
}

#[test]
fn comparisons_are_antisymmetric() {
    let (_, bounds) = setup(30, 12, 3);
    let mut rng = rng_from_seed(42);
    for family in DmFamily::all() {
        let dm = SimulatedDm::new(family, bounds.clone()).unwrap();
        for _ in 0..50 {
            let a = from_normalized(&std::array::from_fn(|_| rng.random::<f64>()), &bounds);
            let b = from_normalized(&std::array::from_fn(|_| rng.random::<f64>()), &bounds);
            assert_eq!(dm.compare_vectors(&a, &b), dm.compare_vectors(&b, &a).flipped());
        }
    }
}

#[test]
fn normalized_families_are_linear_in_the_normalized_values() {
    let (_, bounds) = setup(30, 12, 3);
    let mut rng = rng_from_seed(43);
    for family in DmFamily::all().into_iter().filter(|f| matches!(f, DmFamily::N | DmFamily::Nv(_))) {
        let dm = SimulatedDm::new(family, bounds.clone()).unwrap();
        for _ in 0..50 {
            let nf: [f64; 5] = std::array::from_fn(|_| rng.random::<f64>());
            let lambda = rng.random_range(0.01..=1.0);
            let scaled = nf.map(|v| v * lambda);
            let (u, us) = (dm.value(&from_normalized(&nf, &bounds)), dm.value(&from_normalized(&scaled, &bounds)));
            assert!((us - lambda * u).abs() < 1e-9, "{family}: {us} vs {}", lambda * u);
        }
    }
}

#[test]
fn evolutionary_best_subset_matches_enumeration() {
    let (inst, bounds) = setup(30, 14, 3);
    let dist = distances(&inst);
    let dm = SimulatedDm::new(DmFamily::N, bounds).unwrap();
    let (exact, _) = best_subset(&dm, &inst, &dist, 3, &BestSubsetStrategy::Exhaustive).unwrap();
    let hits = (0..50)
        .filter(|&seed| {
            let budget = BoundsBudget { generations: 100, restarts: 2, seed, ..BoundsBudget::default() };
            best_subset(&dm, &inst, &dist, 3, &BestSubsetStrategy::Evolutionary(budget)).unwrap().0 == exact
        })
        .count();
    assert!(hits >= 48, "{hits}/50");
}

fn problem(q: usize, m: usize, p: usize, family: DmFamily) -> (Problem, SimulatedDm, nemoloc::Solution) {
    let (inst, bounds) = setup(q, m, p);
    let dist = distances(&inst);
    let dm = SimulatedDm::new(family, bounds.clone()).unwrap();
    let (pb, _) = best_subset(&dm, &inst, &dist, p, &BestSubsetStrategy::Exhaustive).unwrap();
    (Problem::new(inst, bounds), dm, pb)
}

const ALL: [Algorithm; 4] = [Algorithm::Nemo2ch, Algorithm::EaUvf, Algorithm::EaUvf1, Algorithm::EaUvf2];

#[test]
fn tiny_search_space_converges_at_generation_zero() {
    let (problem, dm, pb) = problem(10, 4, 2, DmFamily::N);
    for algorithm in ALL {
        let cfg = RunConfig { algorithm, p: 2, target: Some(pb.clone()), ..RunConfig::default() };
        let rec = run(&problem, &cfg, &mut dm.clone()).unwrap();
        assert!(rec.converged, "{algorithm}");
        assert_eq!(rec.generations_used, 0);
        assert_eq!(rec.comparisons_asked, 0);
        assert_eq!(rec.best_solution, pb);
        assert_eq!(rec.brsd, Some(0.0));
    }
}

#[test]
fn runs_repeat_exactly_for_every_family_kind() {
    for family in [DmFamily::N, DmFamily::D, DmFamily::Nv([1, 2, 3, 5]), DmFamily::Dv([1, 2, 4, 5])] {
        let (problem, dm, pb) = problem(20, 9, 2, family);
        for algorithm in ALL {
            let cfg = RunConfig {
                algorithm,
                p: 2,
                interaction_period: 3,
                max_generations: 40,
                seed: 17,
                target: Some(pb.clone()),
                ..RunConfig::default()
            };
            let a = run(&problem, &cfg, &mut dm.clone()).unwrap();
            let b = run(&problem, &cfg, &mut dm.clone()).unwrap();
            assert_eq!(a.without_timing(), b.without_timing(), "{algorithm} {family}");
            if a.converged {
                assert_eq!(a.best_solution, pb);
                assert_eq!(a.brsd, Some(0.0));
            }
        }
    }
}

/// Simulated user that also records whether any query pair was ordered by
/// dominance.
struct Watchful {
    inner: SimulatedDm,
    asked: usize,
    dominated_pairs: usize,
}

impl DecisionMaker for Watchful {
    fn compare(&mut self, query: &Query) -> Result<Verdict> {
        self.asked += 1;
        let (l, r) = (&query.left.objectives, &query.right.objectives);
        if dominates(l, r) || dominates(r, l) {
            self.dominated_pairs += 1;
        }
        self.inner.compare(query)
    }

    fn simulated(&self) -> Option<&SimulatedDm> {
        Some(&self.inner)
    }
}

#[test]
fn queries_are_bounded_and_never_dominance_ordered() {
    let (problem, dm, _) = problem(30, 14, 3, DmFamily::N);
    for period in [1, 3, 7] {
        let cfg = RunConfig { interaction_period: period, max_generations: 30, seed: 5, ..RunConfig::default() };
        let mut watch = Watchful { inner: dm.clone(), asked: 0, dominated_pairs: 0 };
        let rec = run(&problem, &cfg, &mut watch).unwrap();
        assert!(!rec.converged);
        assert_eq!(rec.comparisons_asked, watch.asked);
        assert!(rec.comparisons_asked <= 30usize.div_ceil(period), "period {period}: {}", rec.comparisons_asked);
        assert_eq!(watch.dominated_pairs, 0);
    }
}

struct Opaque;

impl DecisionMaker for Opaque {
    fn compare(&mut self, _: &Query) -> Result<Verdict> {
        Ok(Verdict::Left)
    }
}

#[test]
fn baselines_need_a_true_value() {
    let (problem, _, _) = problem(10, 6, 2, DmFamily::N);
    let cfg = RunConfig { algorithm: Algorithm::EaUvf, p: 2, ..RunConfig::default() };
    assert!(matches!(run(&problem, &cfg, &mut Opaque), Err(Error::Validation(_))));
    let cfg = RunConfig { p: 2, max_generations: 5, ..RunConfig::default() };
    let rec = run(&problem, &cfg, &mut Opaque).unwrap();
    assert_eq!(rec.best_true_value, None);
    assert_eq!(rec.brsd, None);
}
