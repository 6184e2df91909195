use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use hitset_core::bench::{export_lp, export_mst, greedy_cleanup, ratio_report};
use hitset_core::dataset::{
    build_records, generate_instance, read_records_file, read_weights_file, write_dataset,
    write_weights_file, BuildSpec, DatasetRecord, Record, SolutionRecord, DEFAULT_B,
    DEFAULT_COVER_EPSILON,
};
use hitset_core::engine::{
    active_degrees, active_sets, run_cover_msc, run_cover_mvc, run_general, AlgoConfig,
    Trajectory,
};
use hitset_core::forge::{derive_seed, Family};
use hitset_core::neural::{
    analytic_weights, rollout, verify_replication, DecodeRule, ModelWeights, RolloutConfig,
    RolloutMode,
};
use hitset_core::numfmt::to_json_line;
use hitset_core::oracle::{solve_optimal, DEFAULT_BUDGET_MS};
use hitset_core::{Error, HittingSetInstance, Result, Solution, Task};

#[derive(Parser)]
#[command(name = "hitset", version, about = "Primal-dual hitting set toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset of instances with trajectories
    Generate(GenerateArgs),
    /// Run a primal-dual algorithm on instances
    Solve(SolveArgs),
    /// Solve instances exactly by branch and bound
    Exact(ExactArgs),
    /// Check that the analytic network replays the algorithm
    VerifyReplication(ReplicationArgs),
    /// Run a network over instances
    Infer(InferArgs),
    /// Compare model solutions against algorithm solutions
    Bench(BenchArgs),
    /// Write LP models or MST warm starts for a MILP solver
    Export(ExportArgs),
    /// Write an analytic or randomly initialised weights file
    Weights(WeightsArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    task: Task,
    #[arg(long)]
    family: Family,
    #[arg(long)]
    size: usize,
    #[arg(long)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Label every record with an exact optimum
    #[arg(long)]
    with_optimal: bool,
    /// Put all records in the test split
    #[arg(long)]
    test: bool,
    /// Relaxation used by the vertex/set cover algorithm
    #[arg(long, default_value_t = DEFAULT_COVER_EPSILON)]
    epsilon: f64,
    /// RHS degree of bipartite instances
    #[arg(long, default_value_t = DEFAULT_B)]
    b: usize,
    #[arg(long, default_value_t = DEFAULT_BUDGET_MS)]
    budget_ms: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Pd,
    PdUniform,
    Cover,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_enum)]
    algo: Algo,
    /// Relaxed tightness; defaults to 0 for pd and 0.1 for cover
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExactArgs {
    #[arg(long, default_value_t = DEFAULT_BUDGET_MS)]
    budget_ms: u64,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReplicationArgs {
    #[arg(long)]
    task: Task,
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Comma-separated hidden sizes to check
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 32])]
    hidden_dim: Vec<usize>,
    #[arg(long, default_value_t = 16)]
    size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Graph family; vertex cover cycles through all graph families if unset
    #[arg(long)]
    family: Option<Family>,
    /// Write one report per check to this file
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Decode {
    Threshold,
    Argmax,
}

#[derive(Args)]
struct InferArgs {
    #[arg(long)]
    weights: PathBuf,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Feed back the model's own decisions (default)
    #[arg(long, conflicts_with = "teacher_forced")]
    free_run: bool,
    /// Feed the stored trajectory's residuals and decisions
    #[arg(long)]
    teacher_forced: bool,
    /// Decoding rule; threshold for mvc/msc and argmax for mhs if unset
    #[arg(long, value_enum)]
    decode: Option<Decode>,
    /// Also write predicted trajectories to this file
    #[arg(long)]
    trajectories: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    algo: PathBuf,
    #[arg(long)]
    report: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Mst,
    Lp,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long, value_enum)]
    format: Format,
    #[arg(long = "in")]
    input: PathBuf,
    /// Solutions matched to instances by id (required for mst)
    #[arg(long)]
    solution: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct WeightsArgs {
    #[arg(long, default_value_t = 32)]
    hidden_dim: usize,
    /// Include the virtual node for the uniform rule
    #[arg(long)]
    uniform: bool,
    /// Random initialisation instead of the analytic construction
    #[arg(long)]
    random: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

/// An instance read from a record file, with its trajectory if stored.
struct Input {
    instance: HittingSetInstance,
    trajectory: Option<Trajectory>,
}

/// Reads dataset records or bare instances, one per line.
fn read_inputs(path: &Path) -> Result<Vec<Input>> {
    let reader = BufReader::new(at(path, File::open(path).map_err(Error::from))?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parse = |message: String| Error::Parse {
            line: i + 1,
            message,
        };
        let value: Value = serde_json::from_str(&line).map_err(|e| parse(e.to_string()))?;
        if value.get("instance").is_some() {
            let rec: DatasetRecord =
                serde_json::from_value(value).map_err(|e| parse(e.to_string()))?;
            rec.check().map_err(parse)?;
            out.push(Input {
                instance: rec.instance,
                trajectory: Some(rec.trajectory),
            });
        } else {
            let instance: HittingSetInstance =
                serde_json::from_value(value).map_err(|e| parse(e.to_string()))?;
            instance.check().map_err(parse)?;
            out.push(Input {
                instance,
                trajectory: None,
            });
        }
    }
    Ok(out)
}

/// Prefixes I/O errors with the path involved.
fn at<T>(path: &Path, result: Result<T>) -> Result<T> {
    result.map_err(|e| match e {
        Error::Io(io) => Error::Io(std::io::Error::new(
            io.kind(),
            format!("{}: {io}", path.display()),
        )),
        other => other,
    })
}

fn write_lines<T: serde::Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut w = BufWriter::new(at(path, File::create(path).map_err(Error::from))?);
    for item in items {
        writeln!(w, "{}", to_json_line(item)?)?;
    }
    w.flush()?;
    Ok(())
}

fn print_summary(value: Value) -> Result<()> {
    println!("{}", to_json_line(&value)?);
    Ok(())
}

fn generate(args: GenerateArgs) -> Result<()> {
    let spec = BuildSpec {
        with_optimal: args.with_optimal,
        epsilon: args.epsilon,
        b: args.b,
        oracle_budget_ms: args.budget_ms,
        test: args.test,
        ..BuildSpec::new(args.task, args.family, args.size, args.count, args.seed)
    };
    let records = build_records(&spec)?;
    let paths = write_dataset(&args.out, &spec, &records)?;
    let timeouts = records
        .iter()
        .filter_map(|r| r.optimal.as_ref())
        .filter(|o| o.status != hitset_core::oracle::SolveStatus::Optimal)
        .count();
    print_summary(json!({
        "records": records.len(),
        "optimal_timeouts": timeouts,
        "files": paths.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
    }))
}

fn solve(args: SolveArgs) -> Result<()> {
    let inputs = read_inputs(&args.input)?;
    let mut out = Vec::with_capacity(inputs.len());
    for Input { instance, .. } in &inputs {
        let traj = match args.algo {
            Algo::Pd | Algo::PdUniform => run_general(
                instance,
                &AlgoConfig {
                    uniform: args.algo == Algo::PdUniform,
                    epsilon: args.epsilon.unwrap_or(0.0),
                    ..AlgoConfig::default()
                },
            )?,
            Algo::Cover => {
                let eps = args.epsilon.unwrap_or(DEFAULT_COVER_EPSILON);
                match instance.task() {
                    Task::Mvc => run_cover_mvc(instance, eps)?,
                    Task::Msc => run_cover_msc(instance, eps)?,
                    Task::Mhs => {
                        return Err(Error::Unsupported(format!(
                            "the cover algorithm needs an mvc or msc instance, {} is mhs",
                            instance.id()
                        )))
                    }
                }
            }
        };
        let source = match args.algo {
            Algo::Pd => "pd",
            Algo::PdUniform => "pd-uniform",
            Algo::Cover => "cover",
        };
        let mut rec = SolutionRecord::new(instance, source, &traj.final_solution)?;
        rec.status = Some(format!("steps={}", traj.n_updates()));
        out.push(rec);
    }
    write_lines(&args.out, &out)?;
    print_summary(json!({ "solved": out.len() }))
}

fn exact(args: ExactArgs) -> Result<()> {
    let inputs = read_inputs(&args.input)?;
    let mut out = Vec::with_capacity(inputs.len());
    let mut timeouts = 0;
    for Input { instance, .. } in &inputs {
        let opt = solve_optimal(instance, args.budget_ms)?;
        let status = serde_json::to_value(opt.status)?;
        timeouts += (opt.status != hitset_core::oracle::SolveStatus::Optimal) as usize;
        let mut rec = SolutionRecord::new(instance, "exact", &opt.solution())?;
        rec.status = status.as_str().map(str::to_string);
        out.push(rec);
    }
    write_lines(&args.out, &out)?;
    print_summary(json!({ "solved": out.len(), "timeouts": timeouts }))
}

fn replication(args: ReplicationArgs) -> Result<bool> {
    let mut reports = Vec::new();
    for k in 0..args.count {
        let mut attempt = 0u64;
        let instance = loop {
            let family = match (args.family, args.task) {
                (Some(f), _) => f,
                (None, Task::Mvc) => {
                    Family::GRAPH_FAMILIES[(k + attempt as usize) % Family::GRAPH_FAMILIES.len()]
                }
                (None, _) => Family::BaBipartite,
            };
            let seed = derive_seed(args.seed, (k as u64) << 8 | attempt);
            attempt += 1;
            if family == Family::TriconnPlanar && args.size % 2 == 1 && args.family.is_none() {
                continue;
            }
            if let Some(inst) = generate_instance(args.task, family, args.size, seed, DEFAULT_B)? {
                break inst.with_id(format!("{}-{}-{}-{k}", args.task, family.as_str(), args.size));
            }
            if attempt > 1000 {
                return Err(Error::Unsupported(format!(
                    "no {} instance found for index {k}",
                    family.as_str()
                )));
            }
        };
        for &h in &args.hidden_dim {
            reports.push(verify_replication(&instance, h, args.tol)?);
        }
    }
    if let Some(path) = &args.out {
        write_lines(path, &reports)?;
    }
    let failed: Vec<&str> = reports
        .iter()
        .filter(|r| !r.passed)
        .map(|r| r.id.as_str())
        .collect();
    let max = |f: fn(&hitset_core::neural::ReplicationReport) -> f64| {
        reports.iter().map(f).fold(0.0, f64::max)
    };
    print_summary(json!({
        "task": args.task,
        "checks": reports.len(),
        "failed": failed.len(),
        "max_err_x": max(|r| r.max_err_x),
        "max_err_r": max(|r| r.max_err_r),
        "max_err_delta": max(|r| r.max_err_delta),
        "max_err_Delta": max(|r| r.max_err_uniform_delta),
        "tol": args.tol,
    }))?;
    Ok(failed.is_empty())
}

fn infer(args: InferArgs) -> Result<()> {
    let weights = at(&args.weights, read_weights_file(&args.weights))?;
    let inputs = read_inputs(&args.input)?;
    let mut solutions = Vec::with_capacity(inputs.len());
    let mut trajectories = Vec::new();
    for Input {
        instance,
        trajectory,
    } in &inputs
    {
        let mode = if args.teacher_forced {
            let traj = trajectory.as_ref().ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "teacher forcing needs stored trajectories, {} has none",
                    instance.id()
                ))
            })?;
            RolloutMode::TeacherForced(traj)
        } else {
            RolloutMode::FreeRun
        };
        let mut config = RolloutConfig::for_task(instance.task());
        if let Some(d) = args.decode {
            config.decode = match d {
                Decode::Threshold => DecodeRule::Threshold,
                Decode::Argmax => DecodeRule::Argmax,
            };
        }
        let pred = rollout(&weights, instance, mode, &config)?;
        let mut rec = SolutionRecord::new(instance, "model", &pred.final_solution)?;
        rec.cleanup_used = pred.cleanup_used;
        rec.status = Some(format!("steps={}", pred.n_updates()));
        solutions.push(rec);
        if args.trajectories.is_some() {
            trajectories.push(json!({ "id": instance.id(), "trajectory": pred }));
        }
    }
    write_lines(&args.out, &solutions)?;
    if let Some(path) = &args.trajectories {
        write_lines(path, &trajectories)?;
    }
    let cleaned = solutions.iter().filter(|s| s.cleanup_used).count();
    print_summary(json!({ "solved": solutions.len(), "cleanup_used": cleaned }))
}

fn bench(args: BenchArgs) -> Result<()> {
    let model: Vec<SolutionRecord> = at(&args.model, read_records_file(&args.model))?;
    let algo: Vec<SolutionRecord> = at(&args.algo, read_records_file(&args.algo))?;
    let report = ratio_report(&model, &algo)?;
    std::fs::write(&args.report, to_json_line(&report)? + "\n")?;
    for g in &report.sizes {
        eprintln!(
            "size {:>5}: {:.3} ± {:.3} over {} seeds ({} instances)",
            g.size, g.mean, g.std, g.n_seeds, g.n_instances
        );
    }
    print_summary(serde_json::to_value(&report)?)
}

fn safe_name(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect()
}

fn export(args: ExportArgs) -> Result<()> {
    let inputs = read_inputs(&args.input)?;
    std::fs::create_dir_all(&args.out)?;
    let solutions: Vec<SolutionRecord> = match &args.solution {
        Some(p) => at(p, read_records_file(p))?,
        None if args.format == Format::Mst => {
            return Err(Error::InvalidConfig("mst export needs --solution".into()))
        }
        None => Vec::new(),
    };
    let mut written = 0;
    for Input { instance, .. } in &inputs {
        let (ext, text) = match args.format {
            Format::Lp => ("lp", export_lp(instance)),
            Format::Mst => {
                let rec = solutions
                    .iter()
                    .find(|s| s.id == instance.id())
                    .ok_or_else(|| {
                        Error::Mismatch(format!("no solution for instance {}", instance.id()))
                    })?;
                let mut sol = Solution::new(instance, rec.chosen.clone())?;
                if !hitset_core::instance::is_hitting_set(instance, &sol.chosen)? {
                    // warm starts should be feasible
                    let active = active_sets(instance, &sol.mask(instance.n_elements()));
                    let d = active_degrees(instance, &active);
                    sol = greedy_cleanup(instance, &sol, instance.weights(), &d)?;
                }
                ("mst", export_mst(instance, &sol)?)
            }
        };
        std::fs::write(args.out.join(format!("{}.{ext}", safe_name(instance.id()))), text)?;
        written += 1;
    }
    print_summary(json!({ "written": written, "dir": args.out.display().to_string() }))
}

fn weights(args: WeightsArgs) -> Result<()> {
    let w: ModelWeights = if args.random {
        ModelWeights::random(args.hidden_dim, args.uniform, args.seed)?
    } else {
        analytic_weights(args.hidden_dim, args.uniform)?
    };
    write_weights_file(&args.out, &w)?;
    print_summary(json!({ "out": args.out.display().to_string(), "tensors": w.tensors.len() }))
}

fn error_line(kind: &str, message: &str) {
    let line = json!({ "error": kind, "message": message });
    eprintln!("{line}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                e.exit();
            }
            error_line("usage", e.to_string().trim());
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Solve(a) => solve(a),
        Command::Exact(a) => exact(a),
        Command::VerifyReplication(a) => match replication(a) {
            Ok(true) => Ok(()),
            Ok(false) => {
                error_line("replication-failed", "some checks exceeded the tolerance");
                return ExitCode::from(1);
            }
            Err(e) => Err(e),
        },
        Command::Infer(a) => infer(a),
        Command::Bench(a) => bench(a),
        Command::Export(a) => export(a),
        Command::Weights(a) => weights(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error_line(e.kind(), &e.to_string());
            ExitCode::from(1)
        }
    }
}
