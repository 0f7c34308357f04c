//! Compatibility programs: does some value model reproduce every active
//! comparison (and, for ranking, put one solution strictly on top)?

use serde::{Deserialize, Serialize};

use super::models::{ChoquetModel, LinearModel, ValueModel};
use super::store::{PreferenceStore, Verdict};
use crate::numerics::{lp_solve, nm_maximize_until, LinearProgram, LpStatus, Relation, SimplexSearchConfig};

/// Separation a model must achieve to count as compatible.
pub const EPS_COMPAT: f64 = 1e-6;

/// Margin reported for programs without any strict row.
const VACUOUS_MARGIN: f64 = 1.0;

/// Once a Choquet search finds this much separation it stops early.
const COMFORTABLE_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ModelKind {
    Linear,
    Choquet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompatStatus {
    Compatible,
    Incompatible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatResult {
    pub status: CompatStatus,
    pub epsilon: f64,
    pub model: Option<ValueModel>,
}

impl CompatResult {
    pub fn is_compatible(&self) -> bool {
        self.status == CompatStatus::Compatible
    }

    fn incompatible(epsilon: f64) -> Self {
        CompatResult {
            status: CompatStatus::Incompatible,
            epsilon,
            model: None,
        }
    }
}

/// Strict and equality rows over a pool of benefit vectors.
#[derive(Debug, Default)]
pub(crate) struct Program<'a> {
    n: usize,
    pool: Vec<&'a [f64]>,
    /// `(better, worse)` pool indices.
    strict: Vec<(usize, usize)>,
    equal: Vec<(usize, usize)>,
    /// Choquet searches stop once a compatible model reaches this margin.
    stop_margin: f64,
}

impl<'a> Program<'a> {
    pub(crate) fn from_store(store: &'a PreferenceStore, n: usize) -> Self {
        let mut prog = Program {
            n,
            stop_margin: COMFORTABLE_MARGIN,
            ..Default::default()
        };
        for c in store.active() {
            let l = prog.add_vector(&c.left_vec);
            let r = prog.add_vector(&c.right_vec);
            match c.verdict {
                Verdict::Left => prog.strict.push((l, r)),
                Verdict::Right => prog.strict.push((r, l)),
                Verdict::Indifferent => prog.equal.push((l, r)),
            }
        }
        prog
    }

    pub(crate) fn add_vector(&mut self, v: &'a [f64]) -> usize {
        debug_assert_eq!(v.len(), self.n);
        self.pool.push(v);
        self.pool.len() - 1
    }

    pub(crate) fn set_stop_margin(&mut self, margin: f64) {
        self.stop_margin = margin;
    }

    pub(crate) fn add_strict(&mut self, better: usize, worse: usize) {
        self.strict.push((better, worse));
    }

    pub(crate) fn solve(
        &self,
        kind: ModelKind,
        cfg: &SimplexSearchConfig,
        warm: Option<&ValueModel>,
    ) -> CompatResult {
        match kind {
            ModelKind::Linear => self.solve_linear(),
            ModelKind::Choquet => {
                let warm = match warm {
                    Some(ValueModel::Choquet(m)) => Some(m),
                    _ => None,
                };
                self.solve_choquet(cfg, warm)
            }
        }
    }

    fn solve_linear(&self) -> CompatResult {
        let n = self.n;
        let mut objective = vec![0.0; n + 1];
        objective[n] = 1.0;
        let mut lp = LinearProgram::new(objective);
        lp.set_bounds(n, f64::NEG_INFINITY, VACUOUS_MARGIN);
        let mut row = vec![1.0; n + 1];
        row[n] = 0.0;
        lp.add_constraint(row, Relation::Eq, 1.0);
        for &(b, w) in &self.strict {
            let mut row: Vec<f64> = self.pool[b].iter().zip(self.pool[w]).map(|(x, y)| x - y).collect();
            row.push(-1.0);
            lp.add_constraint(row, Relation::Ge, 0.0);
        }
        for &(l, r) in &self.equal {
            let mut row: Vec<f64> = self.pool[l].iter().zip(self.pool[r]).map(|(x, y)| x - y).collect();
            row.push(0.0);
            lp.add_constraint(row, Relation::Eq, 0.0);
        }
        let out = lp_solve(&lp);
        match out.status {
            LpStatus::Optimal if out.value > EPS_COMPAT => {
                let mut w: Vec<f64> = out.point[..n].iter().map(|v| v.max(0.0)).collect();
                let s: f64 = w.iter().sum();
                w.iter_mut().for_each(|v| *v /= s);
                CompatResult {
                    status: CompatStatus::Compatible,
                    epsilon: out.value,
                    model: Some(ValueModel::Linear(LinearModel { weights: w })),
                }
            }
            LpStatus::Optimal => CompatResult::incompatible(out.value),
            _ => CompatResult::incompatible(f64::NEG_INFINITY),
        }
    }

    /// Margin and worst equality violation of a model on this program.
    fn score(&self, model: &ChoquetModel, values: &mut [f64]) -> (f64, f64, f64) {
        for (slot, v) in values.iter_mut().zip(&self.pool) {
            *slot = model.value(v);
        }
        let margin = if self.strict.is_empty() {
            VACUOUS_MARGIN
        } else {
            self.strict
                .iter()
                .map(|&(b, w)| values[b] - values[w])
                .fold(f64::INFINITY, f64::min)
                .min(VACUOUS_MARGIN)
        };
        let mut worst_eq: f64 = 0.0;
        let mut sq = 0.0;
        for &(l, r) in &self.equal {
            let d = values[l] - values[r];
            worst_eq = worst_eq.max(d.abs());
            sq += d * d;
        }
        (margin, worst_eq, sq)
    }

    fn solve_choquet(&self, cfg: &SimplexSearchConfig, warm: Option<&ChoquetModel>) -> CompatResult {
        let n = self.n;
        let start = match warm {
            Some(m) => m.to_params(),
            None => {
                let mut z = vec![1.0 / n as f64; 2 * n];
                z.extend(std::iter::repeat_n(0.0, super::models::num_pairs(n)));
                z
            }
        };
        let bounds = ChoquetModel::param_box(n);
        let mut values = vec![0.0; self.pool.len()];
        let mut best: Option<(f64, ChoquetModel)> = None;
        let mut best_margin = f64::NEG_INFINITY;
        let objective = |z: &[f64]| -> f64 {
            let Some(model) = ChoquetModel::from_params(z, n) else {
                return f64::NEG_INFINITY;
            };
            let (margin, worst_eq, sq) = self.score(&model, &mut values);
            best_margin = best_margin.max(margin);
            if margin > EPS_COMPAT && worst_eq < EPS_COMPAT {
                let better = best.as_ref().is_none_or(|(m, _)| margin > *m);
                if better {
                    best = Some((margin, model));
                }
                if margin >= self.stop_margin {
                    return f64::INFINITY;
                }
            }
            margin - cfg.penalty * sq
        };
        nm_maximize_until(objective, &start, &bounds, cfg, Some(f64::INFINITY));
        match best {
            Some((epsilon, model)) => CompatResult {
                status: CompatStatus::Compatible,
                epsilon,
                model: Some(ValueModel::Choquet(model)),
            },
            None => CompatResult::incompatible(best_margin),
        }
    }
}

fn arity(store: &PreferenceStore) -> usize {
    store.arity().unwrap_or(0)
}

/// Is some weighted sum compatible with the active comparisons?
pub fn check_linear(store: &PreferenceStore) -> CompatResult {
    let n = arity(store);
    if store.active_count() == 0 {
        return CompatResult {
            status: CompatStatus::Compatible,
            epsilon: VACUOUS_MARGIN,
            model: (n > 0).then(|| ValueModel::Linear(LinearModel::uniform(n))),
        };
    }
    Program::from_store(store, n).solve_linear()
}

/// Is some 2-additive Choquet integral compatible with the active
/// comparisons? Budget exhaustion counts as incompatible.
pub fn check_choquet(store: &PreferenceStore, cfg: &SimplexSearchConfig, seed: u64) -> CompatResult {
    check_choquet_from(store, cfg, seed, None)
}

/// As [`check_choquet`], starting the search from `warm`.
pub fn check_choquet_from(
    store: &PreferenceStore,
    cfg: &SimplexSearchConfig,
    seed: u64,
    warm: Option<&ChoquetModel>,
) -> CompatResult {
    let n = arity(store);
    if store.active_count() == 0 {
        let model = (n > 0).then(|| {
            ValueModel::Choquet(
                ChoquetModel::additive(vec![1.0 / n as f64; n], vec![1.0 / n as f64; n])
                    .expect("uniform additive model is valid"),
            )
        });
        return CompatResult {
            status: CompatStatus::Compatible,
            epsilon: VACUOUS_MARGIN,
            model,
        };
    }
    let cfg = SimplexSearchConfig {
        seed,
        ..cfg.clone()
    };
    Program::from_store(store, n).solve_choquet(&cfg, warm)
}

pub fn check(store: &PreferenceStore, kind: ModelKind, cfg: &SimplexSearchConfig, seed: u64) -> CompatResult {
    match kind {
        ModelKind::Linear => check_linear(store),
        ModelKind::Choquet => check_choquet(store, cfg, seed),
    }
}

/// Which comparisons a repair deactivated for good.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairReport {
    pub removed: Vec<u64>,
    pub reinstated: Vec<u64>,
}

/// Deactivates the oldest active comparisons until `checker` accepts the
/// store, then re-activates them newest-first, keeping each one only if the
/// store stays compatible.
pub fn repair<F>(store: &mut PreferenceStore, mut checker: F) -> RepairReport
where
    F: FnMut(&PreferenceStore) -> bool,
{
    let mut removed = Vec::new();
    while !checker(store) {
        let Some(oldest) = store.active().next().map(|c| c.seq) else {
            break;
        };
        store.set_active(oldest, false);
        removed.push(oldest);
    }
    let mut report = RepairReport::default();
    for &seq in removed.iter().rev() {
        store.set_active(seq, true);
        if checker(store) {
            report.reinstated.push(seq);
        } else {
            store.set_active(seq, false);
            report.removed.push(seq);
        }
    }
    report.removed.sort_unstable();
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Solution;

    fn sol(i: usize) -> Solution {
        Solution::new(vec![i], 100).unwrap()
    }

    fn store(prefs: &[(&[f64], &[f64], Verdict)]) -> PreferenceStore {
        let mut s = PreferenceStore::new();
        for (k, (a, b, v)) in prefs.iter().enumerate() {
            s.push(sol(2 * k + 1), sol(2 * k + 2), *v, a.to_vec(), b.to_vec()).unwrap();
        }
        s
    }

    #[test]
    fn linear_single_preference() {
        let s = store(&[(&[1.0, 0.0], &[0.0, 1.0], Verdict::Left)]);
        let r = check_linear(&s);
        assert!(r.is_compatible());
        assert!((r.epsilon - 1.0).abs() < 1e-9);
        let Some(ValueModel::Linear(m)) = r.model else { panic!() };
        assert!((m.weights[0] - 1.0).abs() < 1e-9 && m.weights[1].abs() < 1e-9);
    }

    #[test]
    fn linear_cycle_is_incompatible() {
        let s = store(&[
            (&[1.0, 0.0], &[0.0, 1.0], Verdict::Left),
            (&[1.0, 0.0], &[0.0, 1.0], Verdict::Right),
        ]);
        assert!(!check_linear(&s).is_compatible());
    }

    #[test]
    fn empty_store_is_compatible() {
        assert!(check_linear(&PreferenceStore::new()).is_compatible());
        assert!(check_choquet(&PreferenceStore::new(), &SimplexSearchConfig::default(), 0).is_compatible());
    }

    #[test]
    fn linear_indifference_pins_weights() {
        let s = store(&[
            (&[1.0, 0.0], &[0.0, 1.0], Verdict::Indifferent),
            (&[0.6, 0.6], &[0.5, 0.5], Verdict::Left),
        ]);
        let r = check_linear(&s);
        assert!(r.is_compatible());
        let Some(ValueModel::Linear(m)) = r.model else { panic!() };
        assert!((m.weights[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn choquet_dominance_is_compatible() {
        let s = store(&[(&[0.8, 0.6, 0.9], &[0.5, 0.6, 0.1], Verdict::Left)]);
        let r = check_choquet(&s, &SimplexSearchConfig::default(), 3);
        assert!(r.is_compatible());
        let Some(ValueModel::Choquet(m)) = r.model else { panic!() };
        m.validate().unwrap();
    }

    #[test]
    fn choquet_cycle_is_incompatible() {
        let cfg = SimplexSearchConfig {
            restarts: 3,
            max_evals: 1500,
            ..Default::default()
        };
        let s = store(&[
            (&[0.9, 0.2], &[0.1, 0.7], Verdict::Left),
            (&[0.9, 0.2], &[0.1, 0.7], Verdict::Right),
        ]);
        assert!(!check_choquet(&s, &cfg, 1).is_compatible());
    }

    #[test]
    fn min_like_preferences_need_interaction() {
        let a: &[f64] = &[0.5, 0.5];
        let s = store(&[(a, &[1.0, 0.2], Verdict::Left), (a, &[0.2, 1.0], Verdict::Left)]);
        assert!(!check_linear(&s).is_compatible());
        let r = check_choquet(&s, &SimplexSearchConfig::default(), 5);
        assert!(r.is_compatible(), "{r:?}");
        let Some(ValueModel::Choquet(m)) = r.model else { panic!() };
        m.validate().unwrap();
        let va = m.value(a);
        assert!(va > m.value(&[1.0, 0.2]) + EPS_COMPAT);
        assert!(va > m.value(&[0.2, 1.0]) + EPS_COMPAT);
    }

    #[test]
    fn repair_two_way_cycle_keeps_newest() {
        let mut s = store(&[
            (&[1.0, 0.0], &[0.0, 1.0], Verdict::Left),
            (&[1.0, 0.0], &[0.0, 1.0], Verdict::Right),
        ]);
        let report = repair(&mut s, |st| check_linear(st).is_compatible());
        let active: Vec<u64> = s.active().map(|c| c.seq).collect();
        assert_eq!(active, vec![2]);
        assert_eq!(report.removed, vec![1]);
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn repair_leaves_compatible_store_alone() {
        let mut s = store(&[(&[1.0, 0.0], &[0.0, 1.0], Verdict::Left)]);
        let before = s.clone();
        let report = repair(&mut s, |st| check_linear(st).is_compatible());
        assert_eq!(s, before);
        assert_eq!(report, RepairReport::default());
    }
}
