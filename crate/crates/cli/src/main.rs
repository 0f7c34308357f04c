//! `nemoloc` command-line tool.
//!
//! Exit codes: 0 on success, 2 for invalid input, 3 for a numerical fault,
//! 1 for anything else (I/O, an interrupted interactive run).

use std::fs;
use std::io::{self, BufRead, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};
use nemoloc::algorithms::{run, Algorithm, Problem, RunConfig};
use nemoloc::dm::{best_subset, BestSubsetStrategy, DecisionMaker, DmFamily, Query, QueryCandidate, SimulatedDm};
use nemoloc::harness::{
    csv_row, emit_report, load_entries, mwu_matrices, run_experiment, ExperimentPlan, ExperimentResults, CSV_HEADER,
};
use nemoloc::instance::{
    binomial, compute_bounds, distances, generate_instance, load_instance, BoundsBudget, BoundsMethod,
    GeneratorConfig, EXHAUSTIVE_CAP,
};
use nemoloc::preference::Verdict;
use nemoloc::{ErrorKind, Solution};
use nemoloc_service::ServiceConfig;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] nemoloc::Error),
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e.kind() {
                ErrorKind::Validation => 2,
                ErrorKind::Numerical => 3,
                ErrorKind::Interrupted | ErrorKind::Io => 1,
            },
            CliError::Usage(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

#[derive(Parser)]
#[command(name = "nemoloc", version, about = "Interactive multiobjective facility location")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance.
    GenInstance {
        #[arg(long)]
        q: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Covering radius s1; a distance percentile by default.
        #[arg(long)]
        s1: Option<f64>,
        #[arg(long)]
        s2: Option<f64>,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute per-objective bounds over all p-subsets.
    Bounds {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        p: usize,
        #[arg(long, default_value = "exhaustive")]
        method: BoundsMethod,
        /// Write the instance with the bounds embedded instead of printing them.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one algorithm against a simulated or interactive decision maker.
    Run {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value = "nemo2ch")]
        algo: Algorithm,
        #[arg(long, default_value_t = 10)]
        period: usize,
        #[arg(long)]
        p: usize,
        /// D, N, Dv:abcd or Nv:abcd.
        #[arg(long, default_value = "N")]
        dm: DmFamily,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        max_generations: usize,
        #[arg(long, default_value_t = 30)]
        pop_size: usize,
        /// Bounds method; exhaustive when the subsets can be enumerated.
        #[arg(long)]
        bounds: Option<BoundsMethod>,
        /// Answer queries on stdin (l, r or i) instead of simulating.
        #[arg(long)]
        interactive: bool,
        /// Stop when this subset (comma separated) appears. Simulated runs
        /// default to the decision maker's optimum.
        #[arg(long, value_delimiter = ',')]
        target: Option<Vec<usize>>,
    },
    /// Run a batch experiment plan and write the report.
    Experiment {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Summarize a report directory.
    Stats {
        #[arg(long = "in")]
        input: PathBuf,
        /// Also print pairwise Mann-Whitney p-values.
        #[arg(long)]
        mwu: bool,
    },
    /// Serve the session API.
    Serve {
        #[arg(long, default_value = "127.0.0.1")]
        addr: String,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value_t = 16)]
        max_sessions: usize,
        /// Seconds without an answer before a session reports paused.
        #[arg(long, default_value_t = 3600)]
        answer_timeout: u64,
        /// Directory for answer logs, needed to resume sessions.
        #[arg(long)]
        log_dir: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(command: Command) -> CliResult {
    match command {
        Command::GenInstance { q, m, seed, s1, s2, out } => {
            let config = GeneratorConfig { s1, s2, ..GeneratorConfig::default() };
            let inst = generate_instance(q, m, seed, &config)?;
            emit(out.as_deref(), &inst.to_json())
        }
        Command::Bounds { instance, p, method, out } => {
            let inst = load_instance(&instance)?;
            let bounds = compute_bounds(&inst, &distances(&inst), p, method, &BoundsBudget::default())?;
            match out {
                Some(path) => emit(Some(&path), &inst.with_bounds(bounds).to_json()),
                None => emit(None, &pretty(&bounds)?),
            }
        }
        Command::Run {
            instance,
            algo,
            period,
            p,
            dm,
            seed,
            max_generations,
            pop_size,
            bounds,
            interactive,
            target,
        } => {
            let inst = load_instance(&instance)?;
            if interactive && algo != Algorithm::Nemo2ch {
                return Err(CliError::Usage(format!("{algo} cannot run interactively")));
            }
            let enumerable = p >= 1 && p <= inst.m() && binomial(inst.m(), p) <= EXHAUSTIVE_CAP;
            let method = bounds.unwrap_or(if enumerable { BoundsMethod::Exhaustive } else { BoundsMethod::Evolutionary });
            let dist = distances(&inst);
            let obj_bounds = compute_bounds(&inst, &dist, p, method, &BoundsBudget::default())?;
            let sim = SimulatedDm::new(dm, obj_bounds.clone())?;
            let target = match target {
                Some(sites) => Some(Solution::new(sites, inst.m())?),
                None if interactive => None,
                None => {
                    let strategy = if enumerable {
                        BestSubsetStrategy::Exhaustive
                    } else {
                        BestSubsetStrategy::Evolutionary(BoundsBudget::default())
                    };
                    Some(best_subset(&sim, &inst, &dist, p, &strategy)?.0)
                }
            };
            let cfg = RunConfig {
                algorithm: algo,
                interaction_period: period,
                p,
                max_generations,
                pop_size,
                seed,
                target,
                ..RunConfig::default()
            };
            let problem = Problem::new(inst, obj_bounds);
            let record = if interactive {
                let stdin = io::stdin();
                run(&problem, &cfg, &mut StdinDm { input: stdin.lock() })?
            } else {
                run(&problem, &cfg, &mut { sim })?
            };
            emit(None, &pretty(&record)?)
        }
        Command::Experiment { plan, out, jobs } => {
            let mut parsed = ExperimentPlan::from_json(&fs::read_to_string(&plan)?)?;
            if jobs.is_some() {
                parsed.jobs = jobs;
            }
            let base = plan.parent().unwrap_or(Path::new("."));
            let results = run_experiment(&parsed, base)?;
            emit_report(&results, &out)?;
            log::info!("report written to {}", out.display());
            print_summary(&results);
            Ok(())
        }
        Command::Stats { input, mwu } => {
            let entries = load_entries(&input)?;
            if mwu {
                print_mwu(&entries);
            }
            let results = ExperimentResults::from_entries(entries);
            print_summary(&results);
            Ok(())
        }
        Command::Serve { addr, port, max_sessions, answer_timeout, log_dir } => {
            let addr: SocketAddr = format!("{addr}:{port}")
                .parse()
                .map_err(|e| CliError::Usage(format!("bad address {addr}:{port}: {e}")))?;
            let config = ServiceConfig {
                max_sessions,
                answer_timeout: Duration::from_secs(answer_timeout),
                log_dir,
            };
            if let Some(dir) = &config.log_dir {
                fs::create_dir_all(dir)?;
            }
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async {
                let listener = tokio::net::TcpListener::bind(addr).await?;
                nemoloc_service::serve(listener, config).await
            })?;
            Ok(())
        }
    }
}

fn pretty<T: serde::Serialize + ?Sized>(value: &T) -> CliResult<String> {
    serde_json::to_string_pretty(value).map_err(|e| CliError::Core(e.into()))
}

fn emit(out: Option<&Path>, text: &str) -> CliResult {
    match out {
        Some(path) => fs::write(path, format!("{text}\n"))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn print_summary(results: &ExperimentResults) {
    println!("algorithm,dm,p,{CSV_HEADER}");
    for cell in &results.cells {
        println!("{},{},{},{}", cell.key.algorithm.label(), cell.key.dm, cell.key.p, csv_row(&cell.summary));
    }
}

fn print_mwu(entries: &[nemoloc::harness::RunEntry]) {
    for matrix in mwu_matrices(entries) {
        println!("# {} dm={} p={}", matrix.metric, matrix.dm, matrix.p);
        for (i, row) in matrix.cells.iter().enumerate() {
            for (j, cell) in row.iter().enumerate() {
                if let Some(r) = cell {
                    println!("{} vs {}: U={} p={:.4e}", matrix.labels[i], matrix.labels[j], r.u, r.p_value);
                }
            }
        }
    }
}

/// Asks the person at the terminal.
struct StdinDm<R> {
    input: R,
}

fn describe(tag: &str, c: &QueryCandidate) -> String {
    let f = c.objectives.0;
    format!(
        "  {tag}: sites {}  f = [{:.3}, {:.3}, {:.3}, {:.3}, {:.3}]",
        c.solution, f[0], f[1], f[2], f[3], f[4]
    )
}

impl<R: BufRead> DecisionMaker for StdinDm<R> {
    fn compare(&mut self, query: &Query) -> nemoloc::Result<Verdict> {
        let mut err = io::stderr().lock();
        writeln!(err, "generation {}:", query.generation)?;
        writeln!(err, "{}", describe("l", &query.left))?;
        writeln!(err, "{}", describe("r", &query.right))?;
        loop {
            write!(err, "prefer [l]eft, [r]ight or [i]ndifferent? ")?;
            err.flush()?;
            let mut line = String::new();
            if self.input.read_line(&mut line)? == 0 {
                return Err(nemoloc::Error::DecisionMaker("input closed".into()));
            }
            match line.trim() {
                "l" | "left" => return Ok(Verdict::Left),
                "r" | "right" => return Ok(Verdict::Right),
                "i" | "indifferent" => return Ok(Verdict::Indifferent),
                _ => writeln!(err, "please answer l, r or i")?,
            }
        }
    }
}
