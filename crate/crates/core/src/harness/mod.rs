//! Batch experiments: many seeded runs per (algorithm, decision maker, p)
//! cell, metric aggregation, significance tests and report files.

mod plan;
mod summary;

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithms::{run, Problem, RunConfig};
use crate::dm::{best_subset, BestSubsetStrategy, SimulatedDm};
use crate::error::{Error, Result};
use crate::instance::{compute_bounds, distances, Solution};

pub use plan::{run_seed, AlgorithmSpec, ExperimentPlan, InstanceSource};
pub use summary::{
    imputed_comparisons, mwu_matrices, mwu_matrix, summarize, CellKey, CellSummary, MwuMatrix, RunEntry,
};

pub const CSV_HEADER: &str = "SR,M#G,S#G,A#P,S#P,MT,ST,A_BRSD";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub key: CellKey,
    pub target: Option<Solution>,
    pub summary: CellSummary,
    #[serde(skip)]
    pub entries: Vec<RunEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResults {
    pub cells: Vec<CellResult>,
}

impl ExperimentResults {
    pub fn entries(&self) -> impl Iterator<Item = &RunEntry> {
        self.cells.iter().flat_map(|c| c.entries.iter())
    }

    /// Regroups stored runs by cell, ordering each cell by run index.
    pub fn from_entries(mut entries: Vec<RunEntry>) -> Self {
        entries.sort_by(|a, b| a.cell.cmp(&b.cell).then(a.run.cmp(&b.run)));
        let mut grouped: BTreeMap<CellKey, Vec<RunEntry>> = BTreeMap::new();
        for e in entries {
            grouped.entry(e.cell).or_default().push(e);
        }
        let cells = grouped
            .into_iter()
            .map(|(key, entries)| {
                let records: Vec<_> = entries.iter().map(|e| e.record.clone()).collect();
                CellResult {
                    key,
                    target: None,
                    summary: summarize(&records),
                    entries,
                }
            })
            .collect();
        ExperimentResults { cells }
    }
}

/// Runs every cell of the plan. `base_dir` resolves relative instance paths.
pub fn run_experiment(plan: &ExperimentPlan, base_dir: &Path) -> Result<ExperimentResults> {
    plan.validate()?;
    let instance = plan.instance.load(base_dir)?;
    let dist = distances(&instance);

    struct Task {
        key: CellKey,
        run: usize,
        cfg: RunConfig,
    }
    let mut targets = BTreeMap::new();
    let mut problems = BTreeMap::new();
    let mut tasks = Vec::new();
    for &p in &plan.p_values {
        let bounds = compute_bounds(&instance, &dist, p, plan.bounds, &plan.bounds_budget)?;
        problems.insert(p, Problem::new(instance.clone(), bounds.clone()));
        for &dm in &plan.dm_families {
            let sim = SimulatedDm::new(dm, bounds.clone())?;
            let (pb, _) = best_subset(&sim, &instance, &dist, p, &BestSubsetStrategy::Exhaustive)?;
            for &algorithm in &plan.algorithms {
                let key = CellKey { algorithm, dm, p };
                targets.insert(key, pb.clone());
                for run in 0..plan.runs {
                    let cfg = RunConfig {
                        algorithm: algorithm.algorithm,
                        interaction_period: algorithm.period.unwrap_or(1),
                        p,
                        max_generations: plan.max_generations,
                        pop_size: plan.pop_size,
                        seed: run_seed(plan.base_seed, &algorithm, &dm, p, run),
                        target: Some(pb.clone()),
                        search: plan.search.clone(),
                    };
                    tasks.push(Task { key, run, cfg });
                }
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Validation(format!("cannot start worker pool: {e}")))?;
    let entries: Vec<RunEntry> = pool.install(|| {
        tasks
            .par_iter()
            .map(|t| {
                let problem = &problems[&t.key.p];
                let mut dm = SimulatedDm::new(t.key.dm, problem.bounds.clone())?;
                let record = run(problem, &t.cfg, &mut dm)?;
                log::debug!("{} {} p={} run {}: converged={}", t.key.algorithm, t.key.dm, t.key.p, t.run, record.converged);
                Ok(RunEntry {
                    cell: t.key,
                    run: t.run,
                    max_generations: plan.max_generations,
                    record,
                })
            })
            .collect::<Result<_>>()
    })?;
    let mut results = ExperimentResults::from_entries(entries);
    for cell in &mut results.cells {
        cell.target = targets.get(&cell.key).cloned();
    }
    Ok(results)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One CSV data row in [`CSV_HEADER`] order.
pub fn csv_row(s: &CellSummary) -> String {
    [
        s.sr.to_string(),
        fmt_opt(s.m_g),
        fmt_opt(s.s_g),
        fmt_opt(s.a_p),
        fmt_opt(s.s_p),
        fmt_opt(s.mt),
        fmt_opt(s.st),
        fmt_opt(s.a_brsd),
    ]
    .join(",")
}

fn cell_file_stem(key: &CellKey) -> String {
    format!("{}_{}_p{}", key.algorithm.label(), key.dm.to_string().replace(':', "-"), key.p)
}

/// Writes `records.jsonl`, `summary.json`, `summary.csv`, one CSV per cell
/// under `cells/`, and `mwu.json`.
pub fn emit_report(results: &ExperimentResults, out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir.join("cells"))?;
    let mut log = BufWriter::new(fs::File::create(out_dir.join("records.jsonl"))?);
    for e in results.entries() {
        serde_json::to_writer(&mut log, e)?;
        log.write_all(b"\n")?;
    }
    log.flush()?;

    let mut combined = format!("algorithm,dm,p,{CSV_HEADER}\n");
    for cell in &results.cells {
        let row = csv_row(&cell.summary);
        combined.push_str(&format!("{},{},{},{row}\n", cell.key.algorithm.label(), cell.key.dm, cell.key.p));
        let path = out_dir.join("cells").join(format!("{}.csv", cell_file_stem(&cell.key)));
        fs::write(path, format!("{CSV_HEADER}\n{row}\n"))?;
    }
    fs::write(out_dir.join("summary.csv"), combined)?;
    fs::write(out_dir.join("summary.json"), serde_json::to_string_pretty(&results.cells)?)?;
    let entries: Vec<RunEntry> = results.entries().cloned().collect();
    fs::write(out_dir.join("mwu.json"), serde_json::to_string_pretty(&mwu_matrices(&entries))?)?;
    Ok(())
}

/// Reads `records.jsonl` back from a report directory.
pub fn load_entries(dir: &Path) -> Result<Vec<RunEntry>> {
    let file = fs::File::open(dir.join("records.jsonl"))?;
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

/// Reads `summary.json` back from a report directory.
pub fn load_summaries(dir: &Path) -> Result<Vec<CellResult>> {
    Ok(serde_json::from_str(&fs::read_to_string(dir.join("summary.json"))?)?)
}
