use serde::{Deserialize, Serialize};

use super::plan::AlgorithmSpec;
use crate::algorithms::{Algorithm, RunRecord};
use crate::dm::DmFamily;
use crate::stats::{mann_whitney_u, mean, sample_std, MwuResult};

/// Coordinates of one experiment cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellKey {
    pub algorithm: AlgorithmSpec,
    pub dm: DmFamily,
    pub p: usize,
}

/// One run as stored in the record log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub cell: CellKey,
    pub run: usize,
    pub max_generations: usize,
    pub record: RunRecord,
}

/// Aggregate metrics of one cell. Generation, comparison and time
/// statistics cover converged runs only; `a_brsd` covers the others.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub runs: usize,
    pub sr: usize,
    pub m_g: Option<f64>,
    pub s_g: Option<f64>,
    /// Absent for algorithms that never ask.
    pub a_p: Option<f64>,
    pub s_p: Option<f64>,
    pub mt: Option<f64>,
    pub st: Option<f64>,
    pub a_brsd: Option<f64>,
}

fn mean_std(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    if xs.is_empty() {
        (None, None)
    } else {
        (Some(mean(xs)), Some(sample_std(xs)))
    }
}

pub fn summarize(records: &[RunRecord]) -> CellSummary {
    let converged: Vec<&RunRecord> = records.iter().filter(|r| r.converged).collect();
    let gens: Vec<f64> = converged.iter().map(|r| r.generations_used as f64).collect();
    let asks: Vec<f64> = converged.iter().map(|r| r.comparisons_asked as f64).collect();
    let times: Vec<f64> = converged.iter().map(|r| r.wall_time).collect();
    let (m_g, s_g) = mean_std(&gens);
    let (mut a_p, mut s_p) = mean_std(&asks);
    if records.iter().all(|r| r.algorithm != Algorithm::Nemo2ch) {
        (a_p, s_p) = (None, None);
    }
    let (mt, st) = mean_std(&times);
    let misses: Vec<f64> = records.iter().filter(|r| !r.converged).filter_map(|r| r.brsd).collect();
    CellSummary {
        runs: records.len(),
        sr: converged.len(),
        m_g,
        s_g,
        a_p,
        s_p,
        mt,
        st,
        a_brsd: (!misses.is_empty()).then(|| mean(&misses)),
    }
}

/// Comparison count used in significance tests: failed runs count as
/// having asked at every opportunity.
pub fn imputed_comparisons(entry: &RunEntry) -> f64 {
    match (entry.record.converged, entry.cell.algorithm.period) {
        (false, Some(k)) => entry.max_generations as f64 / k as f64,
        _ => entry.record.comparisons_asked as f64,
    }
}

/// Pairwise tests between algorithms on one metric; entry `[i][j]` is set
/// for `i < j` only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MwuMatrix {
    pub metric: String,
    pub dm: DmFamily,
    pub p: usize,
    pub labels: Vec<String>,
    pub cells: Vec<Vec<Option<MwuResult>>>,
}

pub fn mwu_matrix(metric: &str, dm: DmFamily, p: usize, samples: &[(String, Vec<f64>)]) -> MwuMatrix {
    let n = samples.len();
    let mut cells = vec![vec![None; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            if !samples[i].1.is_empty() && !samples[j].1.is_empty() {
                cells[i][j] = Some(mann_whitney_u(&samples[i].1, &samples[j].1));
            }
        }
    }
    MwuMatrix {
        metric: metric.into(),
        dm,
        p,
        labels: samples.iter().map(|s| s.0.clone()).collect(),
        cells,
    }
}

/// BRSD tests across all algorithms and comparison-count tests across the
/// NEMO-II-Ch variants, per decision maker and `p`.
pub fn mwu_matrices(entries: &[RunEntry]) -> Vec<MwuMatrix> {
    let mut groups: Vec<(DmFamily, usize)> = entries.iter().map(|e| (e.cell.dm, e.cell.p)).collect();
    groups.sort_by_key(|(dm, p)| (dm.to_string(), *p));
    groups.dedup();
    let mut out = Vec::new();
    for (dm, p) in groups {
        let mut algos: Vec<AlgorithmSpec> = entries
            .iter()
            .filter(|e| e.cell.dm == dm && e.cell.p == p)
            .map(|e| e.cell.algorithm)
            .collect();
        algos.sort();
        algos.dedup();
        let sample = |a: &AlgorithmSpec, f: &dyn Fn(&RunEntry) -> Option<f64>| -> Vec<f64> {
            entries
                .iter()
                .filter(|e| e.cell.dm == dm && e.cell.p == p && &e.cell.algorithm == a)
                .filter_map(f)
                .collect()
        };
        let brsd: Vec<(String, Vec<f64>)> =
            algos.iter().map(|a| (a.label(), sample(a, &|e| e.record.brsd))).collect();
        out.push(mwu_matrix("brsd", dm, p, &brsd));
        let asks: Vec<(String, Vec<f64>)> = algos
            .iter()
            .filter(|a| a.algorithm == Algorithm::Nemo2ch)
            .map(|a| (a.label(), sample(a, &|e| Some(imputed_comparisons(e)))))
            .collect();
        if asks.len() >= 2 {
            out.push(mwu_matrix("comparisons", dm, p, &asks));
        }
    }
    out
}
