//! Command-line front end: `solve`, `gen`, `verify` and `bench`.
//!
//! Exit codes: 0 on success, 1 on input errors, 2 when the instance has no
//! feasible clustering, 3 when `verify` observes a ratio above the proven
//! bound.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::constraints::Proportion;
use crate::gen::{
    hardness_instance, random_instance, random_set_cover, rng_from_seed, ConstraintKind, GenError, MetricKind,
    RandomConfig,
};
use crate::hardness::PartitionedSetCover;
use crate::io::{write_text, InstanceFile, IoError, OracleComparison, ReportFile};
use crate::metric::Instance;
use crate::solvers::{solve, solve_exact, Pipeline, ProfileMode, SolveError, SolveOptions, SolveReport};

/// Slack allowed on top of a proven ratio before `verify` reports a violation.
pub const RATIO_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Solve(SolveError),
    #[error("ratio {ratio} exceeds the bound {bound} of {pipeline}")]
    BoundViolated { pipeline: &'static str, ratio: f64, bound: f64 },
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        CliError::Solve(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Solve(SolveError::NoFeasibleSolution) => 2,
            CliError::BoundViolated { .. } => 3,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "msr", version, about = "Sum-of-radii clustering under mergeable constraints")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve an instance and write a JSON report.
    Solve(SolveArgs),
    /// Generate a random or hardness instance.
    Gen(GenArgs),
    /// Compare a pipeline against the exact optimum.
    Verify(VerifyArgs),
    /// Run pipelines over a directory of instances and write a CSV table.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Exact,
    TwoEps,
    FourEps,
    EightThirds,
}

impl From<Algo> for Pipeline {
    fn from(a: Algo) -> Self {
        match a {
            Algo::Exact => Pipeline::Exact,
            Algo::TwoEps => Pipeline::TwoEps,
            Algo::FourEps => Pipeline::FourEps,
            Algo::EightThirds => Pipeline::EightThirds,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Profiles {
    Grid,
    Exact,
}

#[derive(Debug, Clone, Args)]
pub struct SolverFlags {
    #[arg(long, value_enum, default_value = "eight-thirds")]
    pub algo: Algo,
    /// Target slack on the approximation factor (grid profiles only).
    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,
    #[arg(long, value_enum, default_value = "exact")]
    pub profiles: Profiles,
    /// Node budget of the fair assignment search.
    #[arg(long, default_value_t = crate::assign::DEFAULT_NODE_BUDGET)]
    pub budget: u64,
    /// Skip candidates that cannot beat the incumbent by the per-candidate factor.
    #[arg(long)]
    pub prune: bool,
}

impl SolverFlags {
    fn options(&self, pipeline: Pipeline) -> Result<(SolveOptions, Option<f64>), CliError> {
        let profiles = match self.profiles {
            Profiles::Exact => ProfileMode::Exact,
            Profiles::Grid => {
                if !(self.eps.is_finite() && self.eps > 0.0) {
                    return Err(CliError::Usage(format!("--eps must be positive, got {}", self.eps)));
                }
                ProfileMode::Grid { eps: pipeline.grid_eps_for(self.eps) }
            }
        };
        let eps = matches!(profiles, ProfileMode::Grid { .. }).then_some(self.eps);
        Ok((SolveOptions { profiles, node_budget: self.budget, prune: self.prune }, eps))
    }

    /// Proven ratio for the configured profiles.
    fn bound(&self, pipeline: Pipeline, opts: &SolveOptions) -> f64 {
        match opts.profiles {
            ProfileMode::Exact => pipeline.factor(),
            ProfileMode::Grid { eps } => pipeline.factor() * (1.0 + 2.0 * eps),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    pub instance: PathBuf,
    #[command(flatten)]
    pub solver: SolverFlags,
    /// Also run the exact solver and record the ratio.
    #[arg(long)]
    pub oracle: bool,
    /// Report path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Random,
    Hardness,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricFlag {
    Euclidean,
    Graph,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum ConstraintFlag {
    None,
    LowerBound,
    Balanced,
    Fair,
    EllDiversity,
    PairwiseFair,
    ExactProportions,
    BalancedAsFair,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: GenKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, value_enum, default_value = "euclidean")]
    pub metric: MetricFlag,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 5)]
    pub side: u32,
    #[arg(long, default_value_t = 3)]
    pub max_weight: u32,
    #[arg(long, default_value_t = 0.2)]
    pub edge_prob: f64,
    #[arg(long, value_enum, default_value = "none")]
    pub constraint: ConstraintFlag,
    #[arg(long)]
    pub min_size: Option<usize>,
    #[arg(long, default_value_t = 2)]
    pub groups: usize,
    #[arg(long, default_value_t = 2)]
    pub ell: u32,
    #[arg(long, default_value = "2")]
    pub t: String,
    /// Partitioned Set Cover instance (JSON) to reduce; random when omitted.
    #[arg(long)]
    pub set_cover: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub universe: usize,
    #[arg(long, default_value_t = 2)]
    pub collections: usize,
    #[arg(long, default_value_t = 2)]
    pub max_sets: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    pub instance: PathBuf,
    #[command(flatten)]
    pub solver: SolverFlags,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Directory of instance files (`*.json`).
    #[arg(long)]
    pub suite: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "two-eps,four-eps,eight-thirds")]
    pub algos: Vec<Algo>,
    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,
    #[arg(long, value_enum, default_value = "exact")]
    pub profiles: Profiles,
    #[arg(long, default_value_t = crate::assign::DEFAULT_NODE_BUDGET)]
    pub budget: u64,
    /// Solve instances concurrently; row order stays fixed.
    #[arg(long)]
    pub parallel: bool,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve(a) => cmd_solve(&a),
        Command::Gen(a) => cmd_gen(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Bench(a) => cmd_bench(&a),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => Ok(write_text(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn ratio(cost: f64, opt: f64) -> f64 {
    if opt > 0.0 {
        cost / opt
    } else if cost == 0.0 {
        1.0
    } else {
        f64::INFINITY
    }
}

fn solve_with(inst: &Instance, flags: &SolverFlags) -> Result<(SolveReport, Option<f64>, f64), CliError> {
    let pipeline = Pipeline::from(flags.algo);
    let (opts, eps) = flags.options(pipeline)?;
    let report = solve(inst, pipeline, &opts)?;
    Ok((report, eps, flags.bound(pipeline, &opts)))
}

pub fn cmd_solve(a: &SolveArgs) -> Result<(), CliError> {
    let inst = InstanceFile::load(&a.instance)?.to_instance()?;
    let (report, eps, bound) = solve_with(&inst, &a.solver)?;
    let mut file = ReportFile::from_solve(&inst, &report, eps);
    if a.oracle {
        let opt = solve_exact(&inst)?.cost;
        file.oracle = Some(OracleComparison { opt, ratio: ratio(report.cost, opt), bound });
    }
    emit(a.out.as_deref(), &file.to_json())
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<(), CliError> {
    let inst = InstanceFile::load(&a.instance)?.to_instance()?;
    let opt = solve_exact(&inst)?.cost;
    let (report, eps, bound) = solve_with(&inst, &a.solver)?;
    let r = ratio(report.cost, opt);
    let mut file = ReportFile::from_solve(&inst, &report, eps);
    file.oracle = Some(OracleComparison { opt, ratio: r, bound });
    emit(a.out.as_deref(), &file.to_json())?;
    eprintln!("{}: cost {} opt {} ratio {:.6} bound {:.6}", report.pipeline.name(), report.cost, opt, r, bound);
    if r > bound + RATIO_TOLERANCE {
        return Err(CliError::BoundViolated { pipeline: report.pipeline.name(), ratio: r, bound });
    }
    Ok(())
}

fn constraint_kind(a: &GenArgs) -> Result<ConstraintKind, CliError> {
    Ok(match a.constraint {
        ConstraintFlag::None => ConstraintKind::None,
        ConstraintFlag::LowerBound => ConstraintKind::LowerBound { min_size: a.min_size },
        ConstraintFlag::Balanced => ConstraintKind::Balanced,
        ConstraintFlag::Fair => ConstraintKind::Fair { groups: a.groups },
        ConstraintFlag::EllDiversity => ConstraintKind::EllDiversity { groups: a.groups, ell: a.ell },
        ConstraintFlag::PairwiseFair => {
            let t: Proportion = a.t.parse().map_err(|e| CliError::Usage(format!("--t: {e}")))?;
            ConstraintKind::PairwiseFair { t }
        }
        ConstraintFlag::ExactProportions => ConstraintKind::ExactProportions { groups: a.groups },
        ConstraintFlag::BalancedAsFair => ConstraintKind::BalancedAsFair,
    })
}

pub fn cmd_gen(a: &GenArgs) -> Result<(), CliError> {
    let file = match a.kind {
        GenKind::Random => {
            let metric = match a.metric {
                MetricFlag::Euclidean => MetricKind::Euclidean { dim: a.dim, side: a.side },
                MetricFlag::Graph => MetricKind::Graph { max_weight: a.max_weight, extra_edge_prob: a.edge_prob },
            };
            let cfg = RandomConfig { n: a.n, k: a.k, metric, constraint: constraint_kind(a)? };
            random_instance(&cfg, a.seed)?
        }
        GenKind::Hardness => {
            let sc = match &a.set_cover {
                Some(path) => {
                    let text = std::fs::read_to_string(path)
                        .map_err(|source| IoError::Read { path: path.display().to_string(), source })?;
                    let sc: PartitionedSetCover = serde_json::from_str(&text).map_err(IoError::Parse)?;
                    sc.validate().map_err(GenError::from)?;
                    sc
                }
                None => random_set_cover(&mut rng_from_seed(a.seed), a.universe, a.collections, a.max_sets)?,
            };
            hardness_instance(&sc)?
        }
    };
    // Validate before writing so a bad combination never produces a file.
    file.to_instance()?;
    emit(a.out.as_deref(), &file.to_json())
}

struct BenchRow {
    instance: String,
    pipeline: &'static str,
    status: String,
    cost: Option<f64>,
    opt: Option<f64>,
    bound: f64,
    millis: u128,
    report: Option<SolveReport>,
}

fn bench_instance(path: &Path, a: &BenchArgs) -> Vec<BenchRow> {
    let name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let inst = match InstanceFile::load(path).and_then(|f| f.to_instance()) {
        Ok(inst) => inst,
        Err(e) => {
            return a
                .algos
                .iter()
                .map(|&algo| BenchRow {
                    instance: name.clone(),
                    pipeline: Pipeline::from(algo).name(),
                    status: format!("input error: {e}"),
                    cost: None,
                    opt: None,
                    bound: Pipeline::from(algo).factor(),
                    millis: 0,
                    report: None,
                })
                .collect()
        }
    };
    let opt = solve_exact(&inst).ok().map(|r| r.cost);
    a.algos
        .iter()
        .map(|&algo| {
            let flags = SolverFlags { algo, eps: a.eps, profiles: a.profiles, budget: a.budget, prune: false };
            let start = Instant::now();
            let result = solve_with(&inst, &flags);
            let millis = start.elapsed().as_millis();
            let pipeline = Pipeline::from(algo);
            match result {
                Ok((report, _, bound)) => {
                    let status = match opt {
                        Some(o) if ratio(report.cost, o) > bound + RATIO_TOLERANCE => "bound violated",
                        _ => "ok",
                    };
                    BenchRow {
                        instance: name.clone(),
                        pipeline: pipeline.name(),
                        status: status.into(),
                        cost: Some(report.cost),
                        opt,
                        bound,
                        millis,
                        report: Some(report),
                    }
                }
                Err(e) => BenchRow {
                    instance: name.clone(),
                    pipeline: pipeline.name(),
                    status: e.to_string(),
                    cost: None,
                    opt,
                    bound: pipeline.factor(),
                    millis,
                    report: None,
                },
            }
        })
        .collect()
}

pub fn cmd_bench(a: &BenchArgs) -> Result<(), CliError> {
    let entries = std::fs::read_dir(&a.suite)
        .map_err(|source| IoError::Read { path: a.suite.display().to_string(), source })?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let rows: Vec<Vec<BenchRow>> = if a.parallel {
        use rayon::prelude::*;
        paths.par_iter().map(|p| bench_instance(p, a)).collect()
    } else {
        paths.iter().map(|p| bench_instance(p, a)).collect()
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    let fmt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    let write = |w: &mut csv::Writer<Vec<u8>>, rec: &[String]| {
        w.write_record(rec).map_err(|e| CliError::Usage(format!("csv: {e}")))
    };
    write(
        &mut w,
        &[
            "instance", "pipeline", "status", "cost", "opt", "ratio", "bound", "time_ms", "profiles_tried",
            "branches_explored", "candidates_unique", "candidates_evaluated",
        ]
        .map(String::from),
    )?;
    for row in rows.iter().flatten() {
        let r = match (row.cost, row.opt) {
            (Some(c), Some(o)) => Some(ratio(c, o)),
            _ => None,
        };
        let counters = row.report.as_ref().map(|r| r.counters.clone()).unwrap_or_default();
        write(
            &mut w,
            &[
                row.instance.clone(),
                row.pipeline.to_string(),
                row.status.clone(),
                fmt(row.cost),
                fmt(row.opt),
                fmt(r),
                row.bound.to_string(),
                row.millis.to_string(),
                counters.profiles_tried.to_string(),
                counters.branches_explored.to_string(),
                counters.candidates_unique.to_string(),
                counters.candidates_evaluated.to_string(),
            ],
        )?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(format!("csv: {e}")))?;
    emit(a.out.as_deref(), &String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Sizes the global rayon pool from `MSR_THREADS` when set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("MSR_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("MSR_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}
