use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use kssparse::general::{build_schedule, sparsify_general, RunConfig};
use kssparse::linalg::{approx_factors, Convention};
use kssparse::partition::{Partitioner, DEFAULT_BRUTE_FORCE_CAP};
use kssparse::report::{InputSummary, RunReport, RunStatus, VerifyReport};
use kssparse::{leverage_scores, read_graph, write_graph, Error, Execution, Mode};

/// Spectral graph sparsification by repeated two-way edge partitioning.
#[derive(Parser)]
#[command(name = "kssparse", version)]
struct Cli {
    /// Run searches on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print per-edge leverage scores.
    Leverage {
        graph: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Find a two-way edge partition with small deviation.
    Partition {
        graph: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        json: bool,
    },
    /// Sparsify a graph and certify the result.
    Sparsify(SparsifyArgs),
    /// Check whether H is an epsilon-approximation of G.
    Verify {
        g: PathBuf,
        h: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, value_enum, default_value_t = ConventionArg::Linear)]
        convention: ConventionArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Brute,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Strict,
    Relaxed,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConventionArg {
    Linear,
    Exponential,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Colorings drawn by the random method.
    #[arg(long, default_value_t = 4096)]
    budget: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest edge count the brute-force method accepts.
    #[arg(long, default_value_t = DEFAULT_BRUTE_FORCE_CAP)]
    cap: usize,
}

impl SearchArgs {
    fn partitioner(&self, default: MethodArg) -> Partitioner {
        match self.method.unwrap_or(default) {
            MethodArg::Brute => Partitioner::Brute { cap: self.cap },
            MethodArg::Random => Partitioner::Random {
                budget: self.budget,
                seed: self.seed,
            },
        }
    }
}

#[derive(Args)]
struct SparsifyArgs {
    graph: PathBuf,
    #[arg(long)]
    epsilon: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Relaxed)]
    mode: ModeArg,
    /// Final-step leverage ceiling (relaxed only).
    #[arg(long)]
    delta_t: Option<f64>,
    /// Stop once at most this many edges remain (relaxed only; default 2n).
    #[arg(long)]
    target_size: Option<usize>,
    #[command(flatten)]
    search: SearchArgs,
    /// Output graph file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON run report.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Record wall time in the report (makes it non-reproducible).
    #[arg(long)]
    timing: bool,
    /// Only track leverage along the descent path.
    #[arg(long)]
    path_only: bool,
}

const EXIT_FAILED: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }

    fn invalid(e: Error) -> Self {
        Failure::new(EXIT_INVALID, e.to_string())
    }
}

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let result = match cli.command {
        Command::Leverage { graph, json } => cmd_leverage(&graph, json),
        Command::Partition {
            graph,
            search,
            json,
        } => cmd_partition(&graph, &search, json, exec),
        Command::Sparsify(args) => cmd_sparsify(&args, exec),
        Command::Verify {
            g,
            h,
            epsilon,
            convention,
        } => cmd_verify(&g, &h, epsilon, convention),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize")
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text)
        .map_err(|e| Failure::new(EXIT_INVALID, format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct EdgeLeverage {
    u: usize,
    v: usize,
    weight: f64,
    leverage: f64,
}

#[derive(Serialize)]
struct LeverageOutput {
    n: usize,
    m: usize,
    components: usize,
    edges: Vec<EdgeLeverage>,
    max: f64,
    sum: f64,
    /// `n - components`, which `sum` should match.
    expected_sum: usize,
}

fn cmd_leverage(path: &Path, json: bool) -> CmdResult {
    let g = read_graph(path).map_err(Failure::invalid)?;
    let p = leverage_scores(&g).map_err(Failure::invalid)?;
    let out = LeverageOutput {
        n: g.n(),
        m: g.m(),
        components: p.components,
        edges: g
            .edges()
            .iter()
            .zip(&p.scores)
            .map(|(e, &l)| EdgeLeverage {
                u: e.u,
                v: e.v,
                weight: e.weight,
                leverage: l,
            })
            .collect(),
        max: p.max,
        sum: p.sum,
        expected_sum: p.expected_sum(),
    };
    if json {
        println!("{}", to_json(&out));
        return Ok(0);
    }
    println!(
        "{:>6} {:>6} {:>6} {:>14} {:>14}",
        "edge", "u", "v", "weight", "leverage"
    );
    for (i, e) in out.edges.iter().enumerate() {
        println!(
            "{i:>6} {:>6} {:>6} {:>14.6} {:>14.10}",
            e.u, e.v, e.weight, e.leverage
        );
    }
    println!("max        {:.10}", out.max);
    println!("sum        {:.10}", out.sum);
    println!("n - comps  {}", out.expected_sum);
    Ok(0)
}

#[derive(Serialize)]
struct PartitionOutput<'a> {
    side1: Vec<usize>,
    side2: Vec<usize>,
    #[serde(flatten)]
    result: &'a kssparse::PartitionResult,
}

fn cmd_partition(path: &Path, search: &SearchArgs, json: bool, exec: Execution) -> CmdResult {
    let g = read_graph(path).map_err(Failure::invalid)?;
    let partitioner = search.partitioner(MethodArg::Brute);
    let p = partitioner.partition(&g, 0, exec).map_err(|e| match e {
        Error::BruteForceCap { .. } => Failure::new(
            EXIT_INVALID,
            format!("{e} (try --method random --budget N)"),
        ),
        Error::NoConvergence { .. } => Failure::new(EXIT_INTERNAL, e.to_string()),
        e => Failure::invalid(e),
    })?;
    let (side1, side2) = p.sides();
    if json {
        let out = PartitionOutput {
            side1,
            side2,
            result: &p,
        };
        println!("{}", to_json(&out));
        return Ok(0);
    }
    let list = |s: &[usize]| {
        s.iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    println!("side 1 ({}): {}", side1.len(), list(&side1));
    println!("side 2 ({}): {}", side2.len(), list(&side2));
    println!("deviation d        {:.12}", p.deviation);
    println!("max leverage       {:.12}", p.alpha);
    println!("bound 5 sqrt(a)    {:.12}", p.bound);
    println!("bound satisfied    {}", p.satisfied_bound);
    println!("candidates         {}", p.candidates);
    Ok(0)
}

fn cmd_sparsify(args: &SparsifyArgs, exec: Execution) -> CmdResult {
    let mode = match args.mode {
        ModeArg::Strict => Mode::Strict,
        ModeArg::Relaxed => Mode::Relaxed,
    };
    if mode == Mode::Strict && (args.delta_t.is_some() || args.target_size.is_some()) {
        return Err(Failure::new(
            EXIT_INVALID,
            "strict mode derives delta_T and the stopping size from epsilon; drop --delta-t/--target-size",
        ));
    }
    let g = read_graph(&args.graph).map_err(Failure::invalid)?;
    let profile = leverage_scores(&g).map_err(Failure::invalid)?;
    let input = InputSummary::new(&g, &profile);
    let mut cfg = RunConfig::new(
        args.epsilon,
        mode,
        args.search.partitioner(MethodArg::Random),
    );
    cfg.delta_t = args.delta_t;
    cfg.target_size = args.target_size;
    cfg.execution = exec;
    cfg.track_global = !args.path_only;

    let start = Instant::now();
    let outcome = sparsify_general(&g, &cfg);
    let elapsed = start.elapsed().as_millis() as u64;
    let (h, mut report) = match outcome {
        Ok((h, run)) => {
            let m = h.m();
            (Some(h), RunReport::completed(input, &cfg, run, m))
        }
        Err(Error::Infeasible(msg)) => {
            let schedule = build_schedule(g.n(), g.m(), args.epsilon, mode, args.delta_t).ok();
            (None, RunReport::infeasible(input, &cfg, schedule, msg))
        }
        Err(
            e @ (Error::BruteForceCap { .. }
            | Error::NoConvergence { .. }
            | Error::KernelMismatch { .. }
            | Error::TooFewEdges { .. }),
        ) => return Err(Failure::new(EXIT_INTERNAL, e.to_string())),
        Err(e) => return Err(Failure::invalid(e)),
    };
    if args.timing {
        report.wall_time_ms = Some(elapsed);
    }
    if let Some(path) = &args.report {
        write_text(path, &(to_json(&report) + "\n"))?;
    }

    let Some(h) = h else {
        let msg = report.diagnostic.unwrap_or_default();
        return Err(Failure::new(
            EXIT_INVALID,
            format!("strict mode infeasible: {msg}"),
        ));
    };
    debug_assert_eq!(report.status, RunStatus::Completed);
    if let Some(path) = &args.out {
        write_graph(&h, path).map_err(Failure::invalid)?;
    }
    let cert = report
        .certificate
        .as_ref()
        .expect("completed runs carry a certificate");
    println!("edges        {} -> {}", g.m(), h.m());
    println!("steps        {}", report.steps.len());
    println!(
        "factors      a = {:.12}  b = {:.12}",
        cert.lower, cert.upper
    );
    println!(
        "epsilon      {:.12} (requested {})",
        cert.epsilon, args.epsilon
    );
    println!("kernel match {}", cert.kernel_match);
    let requested_ok =
        cert.kernel_match && cert.epsilon <= args.epsilon + kssparse::linalg::CERTIFICATION_TOL;
    match mode {
        Mode::Strict if !requested_ok => Ok(EXIT_FAILED),
        _ => Ok(0),
    }
}

fn cmd_verify(g_path: &Path, h_path: &Path, eps: f64, convention: ConventionArg) -> CmdResult {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Failure::new(
            EXIT_INVALID,
            format!("epsilon must be positive, got {eps}"),
        ));
    }
    let g = read_graph(g_path).map_err(Failure::invalid)?;
    let h = read_graph(h_path).map_err(Failure::invalid)?;
    if g.n() != h.n() {
        return Err(Failure::invalid(Error::DimensionMismatch {
            left: g.n(),
            right: h.n(),
        }));
    }
    let cert = approx_factors(&g.laplacian(), &h.laplacian()).map_err(|e| match e {
        Error::NoConvergence { .. } => Failure::new(EXIT_INTERNAL, e.to_string()),
        e => Failure::invalid(e),
    })?;
    let convention = match convention {
        ConventionArg::Linear => Convention::Linear,
        ConventionArg::Exponential => Convention::Exponential,
    };
    let report = VerifyReport::new(&cert, eps, convention);
    println!("{}", to_json(&report));
    Ok(if report.verified { 0 } else { EXIT_FAILED })
}
