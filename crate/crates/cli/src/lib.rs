//! `espeed`: generation, lower bounds, scheduling, verification and ratio
//! sweeps for energy-budgeted multiprocessor speed scaling, as a CLI.
//!
//! Exit codes: 0 on success, 1 on domain errors (with one machine-parseable
//! `error: ...` line on stderr), 2 on usage errors. Primary artifacts go to
//! `-o` (or stdout); the one-line summary goes to stdout when the artifact
//! went to a file and to stderr otherwise.

pub mod gantt;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use espeed_core::dedicated2::{self, Dedicated2Run};
use espeed_core::duropt::{solve_weighted, WeightedProgram};
use espeed_core::gadgets::{self, GadgetOutput, WorkMode};
use espeed_core::listsched::{self, verify_schedule, VerifyOptions};
use espeed_core::model::{total_completion, validate_instance};
use espeed_core::oracle::{self, Algo, RatioRecord};
use espeed_core::sequencing;
use espeed_core::{Alpha, Instance, JobId, JobKind, Permutation, Schedule};

#[derive(Parser)]
#[command(
    name = "espeed",
    about = "Energy-budgeted speed-scaling scheduling for multiprocessor jobs",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate hardness-gadget or random instances.
    Gen(GenArgs),
    /// Compute the sequence lower bound for an instance.
    Lb(LbArgs),
    /// Build a feasible schedule and report its ratio against the bound.
    Schedule(ScheduleArgs),
    /// Check a schedule file against an instance.
    Verify(VerifyArgs),
    /// Run a seeded ratio sweep against the proven bounds.
    Oracle(OracleArgs),
    /// Solve a raw weighted duration program (debugging aid).
    Duropt(DuroptArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GadgetArg {
    #[value(name = "3partition")]
    ThreePartition,
    Chromatic,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Rigid,
    Moldable,
    Dedicated,
}

impl From<KindArg> for JobKind {
    fn from(k: KindArg) -> JobKind {
        match k {
            KindArg::Rigid => JobKind::Rigid,
            KindArg::Moldable => JobKind::Moldable,
            KindArg::Dedicated => JobKind::Dedicated,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum WorkModeArg {
    Identical,
    Free,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Rigid,
    Moldable,
    Dedicated2,
}

#[derive(Args)]
#[command(group(ArgGroup::new("source").required(true).args(["gadget", "random"])))]
struct GenArgs {
    /// Hardness reduction to instantiate.
    #[arg(long, value_enum)]
    gadget: Option<GadgetArg>,
    /// Generate a seeded random instance instead.
    #[arg(long)]
    random: bool,

    /// 3-PARTITION weights (comma separated).
    #[arg(long, value_delimiter = ',')]
    a: Vec<u64>,
    /// 3-PARTITION bound B.
    #[arg(long = "B")]
    b: Option<u64>,
    /// 3-PARTITION triple count q.
    #[arg(long)]
    q: Option<u64>,
    /// Known partition certificate, e.g. "0-1-2;3-4-5".
    #[arg(long)]
    partition: Option<String>,

    /// Cubic-graph edges, e.g. "0-1,0-2,...".
    #[arg(long)]
    edges: Option<String>,
    /// Vertex count (defaults to max endpoint + 1).
    #[arg(long)]
    vertices: Option<usize>,
    /// Known proper 3-edge-coloring, one color per edge, e.g. "0,1,2,...".
    #[arg(long, value_delimiter = ',')]
    coloring: Option<Vec<usize>>,

    /// Random instance kind.
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    #[arg(short)]
    n: Option<usize>,
    #[arg(short)]
    m: Option<usize>,
    #[arg(long, env = "ESPEED_SEED", default_value_t = 42)]
    seed: u64,
    #[arg(long, value_enum, default_value = "identical")]
    work_mode: WorkModeArg,

    /// Power exponent.
    #[arg(long, default_value_t = 3.0)]
    alpha: f64,
    /// Instance output path (stdout if omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Write the certificate witness schedule here.
    #[arg(long)]
    witness_out: Option<PathBuf>,
}

#[derive(Args)]
struct LbArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Explicit job sequence (comma-separated ids); defaults to the rule order.
    #[arg(long, value_delimiter = ',')]
    permutation: Option<Vec<JobId>>,
    /// Override the instance's alpha.
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Args)]
struct ScheduleArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum)]
    algo: AlgoArg,
    /// Stop the dedicated pipeline at the normalized preemptive schedule.
    #[arg(long)]
    preemptive: bool,
    /// Emit the dedicated pipeline's stage trace.
    #[arg(long)]
    trace: bool,
    /// Schedule output path (stdout if omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Write an SVG Gantt chart here.
    #[arg(long)]
    gantt: Option<PathBuf>,
    /// Override the instance's alpha.
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    schedule: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleKindArg {
    Rigid,
    Moldable,
    Dedicated2,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, value_enum)]
    kind: OracleKindArg,
    #[arg(long, default_value_t = 100)]
    count: u64,
    #[arg(long, env = "ESPEED_SEED", default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 3.0)]
    alpha: f64,
    /// Certify the preemptive bound instead of the non-preemptive one.
    #[arg(long)]
    preemptive: bool,
    /// Worker threads for the sweep.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// CSV output path (stdout if omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DuroptArgs {
    #[arg(long, value_delimiter = ',')]
    weights: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    coeffs: Vec<f64>,
    #[arg(short = 'E', long)]
    energy: f64,
    #[arg(long)]
    alpha: f64,
}

enum CmdError {
    Usage(String),
    Domain(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for CmdError {
    fn from(e: E) -> Self {
        CmdError::Domain(e.into())
    }
}

fn usage(msg: impl Into<String>) -> CmdError {
    CmdError::Usage(msg.into())
}

type CmdResult = Result<(), CmdError>;

/// Parses and dispatches; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.exit_code() == 0 { 0 } else { 2 };
        }
    };
    let result = match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Lb(args) => cmd_lb(args),
        Command::Schedule(args) => cmd_schedule(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Duropt(args) => cmd_duropt(args),
    };
    match result {
        Ok(()) => 0,
        Err(CmdError::Usage(msg)) => {
            eprintln!("error: usage: {msg}");
            2
        }
        Err(CmdError::Domain(e)) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn sig9(x: f64) -> String {
    format!("{x:.8e}")
}

/// Routes the primary artifact to `-o`/stdout and the summary to the other
/// stream, keeping stdout machine-parseable.
fn emit_artifact(output: Option<&Path>, artifact: &str, summary: &str) -> anyhow::Result<()> {
    match output {
        Some(path) => {
            fs::write(path, artifact).with_context(|| format!("writing {}", path.display()))?;
            println!("{summary}");
        }
        None => {
            print!("{artifact}");
            eprintln!("{summary}");
        }
    }
    Ok(())
}

fn load_instance(path: &Path, alpha_override: Option<f64>) -> anyhow::Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut inst = Instance::from_json_str(&text)
        .map_err(|e| anyhow!("parsing {}: {e}", path.display()))?;
    if let Some(a) = alpha_override {
        inst.alpha = Alpha::new_unchecked(a);
    }
    if let Some(v) = validate_instance(&inst).into_iter().next() {
        bail!("invalid instance: {v}");
    }
    Ok(inst)
}

fn cmd_gen(args: GenArgs) -> CmdResult {
    let alpha = Alpha::new(args.alpha).map_err(|e| CmdError::Domain(e.into()))?;
    let out: GadgetOutput = match args.gadget {
        Some(GadgetArg::ThreePartition) => {
            if args.a.is_empty() {
                return Err(usage("--gadget 3partition requires --a"));
            }
            let b = args.b.ok_or_else(|| usage("--gadget 3partition requires --B"))?;
            let q = args.q.ok_or_else(|| usage("--gadget 3partition requires --q"))?;
            let partition = args
                .partition
                .as_deref()
                .map(parse_index_groups)
                .transpose()
                .map_err(usage)?;
            gadgets::gen_3partition(&args.a, b, q, alpha, partition.as_deref())?
        }
        Some(GadgetArg::Chromatic) => {
            let edges_text = args
                .edges
                .as_deref()
                .ok_or_else(|| usage("--gadget chromatic requires --edges"))?;
            let edges = parse_edges(edges_text).map_err(usage)?;
            let vertices = args.vertices.unwrap_or_else(|| {
                edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0)
            });
            gadgets::gen_chromatic(&edges, vertices, alpha, args.coloring.as_deref())?
        }
        None => {
            let kind = args.kind.ok_or_else(|| usage("--random requires --kind"))?;
            let n = args.n.ok_or_else(|| usage("--random requires -n"))?;
            let m = args.m.ok_or_else(|| usage("--random requires -m"))?;
            let mode = match args.work_mode {
                WorkModeArg::Identical => WorkMode::Identical,
                WorkModeArg::Free => WorkMode::Free,
            };
            let instance = gadgets::gen_random(kind.into(), n, m, args.seed, alpha, mode);
            GadgetOutput { instance, threshold: f64::NAN, witness_sumc: None, witness: None }
        }
    };

    if let Some(path) = &args.witness_out {
        let witness = out
            .witness
            .as_ref()
            .ok_or_else(|| CmdError::Domain(anyhow!("no certificate given, no witness to write")))?;
        fs::write(path, witness.to_json_string())
            .with_context(|| format!("writing {}", path.display()))
            .map_err(CmdError::Domain)?;
    }

    let mut summary = format!("n={} m={} energy={}", out.instance.n(), out.instance.m, sig9(out.instance.energy));
    if out.threshold.is_finite() {
        let _ = write!(summary, " threshold={}", sig9(out.threshold));
    }
    if let Some(w) = out.witness_sumc {
        let _ = write!(summary, " witness_sumc={}", sig9(w));
    }
    emit_artifact(args.output.as_deref(), &out.instance.to_json_string(), &summary)?;
    Ok(())
}

fn parse_index_groups(text: &str) -> Result<Vec<Vec<usize>>, String> {
    text.split(';')
        .map(|group| {
            group
                .split('-')
                .map(|tok| tok.trim().parse::<usize>().map_err(|_| format!("bad index '{tok}'")))
                .collect()
        })
        .collect()
}

fn parse_edges(text: &str) -> Result<Vec<(usize, usize)>, String> {
    text.split(',')
        .map(|pair| {
            let (u, v) = pair
                .split_once('-')
                .ok_or_else(|| format!("bad edge '{pair}', expected u-v"))?;
            Ok((
                u.trim().parse().map_err(|_| format!("bad vertex '{u}'"))?,
                v.trim().parse().map_err(|_| format!("bad vertex '{v}'"))?,
            ))
        })
        .collect()
}

fn cmd_lb(args: LbArgs) -> CmdResult {
    let inst = load_instance(&args.instance, args.alpha)?;
    let explicit = args
        .permutation
        .clone()
        .map(|ids| Permutation::new(ids, &inst))
        .transpose()?;
    let mut value = match inst.kind {
        JobKind::Rigid => {
            let pi = match explicit {
                Some(pi) => pi,
                None => sequencing::order_rigid(&inst)?,
            };
            serde_json::to_value(sequencing::lb_rigid(&pi, &inst)?)
        }
        JobKind::Moldable => {
            let pi = match explicit {
                Some(pi) => pi,
                None => sequencing::order_moldable(&inst)?,
            };
            serde_json::to_value(sequencing::lb_moldable(&pi, &inst)?)
        }
        JobKind::Dedicated => {
            if explicit.is_some() {
                return Err(CmdError::Domain(anyhow!(
                    "explicit permutations are not supported for dedicated instances"
                )));
            }
            serde_json::to_value(sequencing::lb_dedicated2(&inst, inst.energy)?)
        }
    }
    .context("serializing report")?;
    if let Some(a) = args.alpha {
        value["alpha_override"] = serde_json::Value::from(a);
    }
    println!("{value}");
    Ok(())
}

fn trace_json(run: &Dedicated2Run) -> serde_json::Value {
    serde_json::json!({
        "sub1": run.sub1,
        "sub2": run.sub2,
        "merged": run.merged,
        "normalized": run.normalized,
        "final": run.nonpreemptive,
    })
}

fn cmd_schedule(args: ScheduleArgs) -> CmdResult {
    let inst = load_instance(&args.instance, args.alpha)?;
    let mut trace: Option<serde_json::Value> = None;
    let (sched, lb_value, algo_name) = match args.algo {
        AlgoArg::Rigid => {
            let (sched, lb) = listsched::schedule_rigid(&inst)?;
            (sched, lb.value, "rigid")
        }
        AlgoArg::Moldable => {
            let (sched, lb) = listsched::schedule_moldable(&inst)?;
            (sched, lb.value, "moldable")
        }
        AlgoArg::Dedicated2 => {
            let run = dedicated2::schedule_dedicated2(&inst, args.preemptive)?;
            if args.trace {
                trace = Some(trace_json(&run));
            }
            let name = if args.preemptive { "dedicated2-preemptive" } else { "dedicated2" };
            (run.result().clone(), run.lb.value, name)
        }
    };
    if args.trace && trace.is_none() {
        eprintln!("note: --trace only applies to --algo dedicated2");
    }

    let report = verify_schedule(&sched, &inst, VerifyOptions::default());
    let sumc = total_completion(&sched);
    let mut summary = format!(
        "algo={algo_name} sumc={} lb={} ratio={} energy={} budget={} slack={} feasible={}",
        sig9(sumc),
        sig9(lb_value),
        sig9(sumc / lb_value),
        sig9(report.energy_used),
        sig9(inst.energy),
        sig9(inst.energy - report.energy_used),
        report.feasible()
    );
    if let Some(a) = args.alpha {
        let _ = write!(summary, " alpha_override={}", sig9(a));
    }

    if let Some(path) = &args.gantt {
        gantt::emit_gantt(&sched, &inst, path)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(CmdError::Domain)?;
    }
    emit_artifact(args.output.as_deref(), &sched.to_json_string(), &summary)?;
    if let Some(t) = trace {
        match args.output {
            Some(_) => println!("{t}"),
            None => eprintln!("{t}"),
        }
    }
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> CmdResult {
    let inst = load_instance(&args.instance, None)?;
    let text = fs::read_to_string(&args.schedule)
        .with_context(|| format!("reading {}", args.schedule.display()))?;
    let sched = Schedule::from_json_str(&text)
        .map_err(|e| anyhow!("parsing {}: {e}", args.schedule.display()))?;
    let report = verify_schedule(&sched, &inst, VerifyOptions::default());
    println!("{}", serde_json::to_value(&report).context("serializing report")?);
    Ok(())
}

fn cmd_oracle(args: OracleArgs) -> CmdResult {
    let alpha = Alpha::new(args.alpha)?;
    let algo = match (args.kind, args.preemptive) {
        (OracleKindArg::Rigid, _) => Algo::Rigid,
        (OracleKindArg::Moldable, _) => Algo::Moldable,
        (OracleKindArg::Dedicated2, true) => Algo::Dedicated2Preemptive,
        (OracleKindArg::Dedicated2, false) => Algo::Dedicated2,
    };
    let records = sweep(algo, args.count, args.seed, alpha, args.jobs.max(1))?;
    let csv = oracle::ratio_table_csv(&records);
    let summary = oracle::sweep_summary(&records);
    emit_artifact(args.output.as_deref(), &csv, &summary)?;
    Ok(())
}

/// Fans the sweep out to a fixed worker pool; records are reassembled in
/// instance order so the CSV never depends on completion order.
fn sweep(algo: Algo, count: u64, seed: u64, alpha: Alpha, jobs: usize) -> anyhow::Result<Vec<RatioRecord>> {
    if jobs <= 1 {
        return Ok(oracle::run_sweep(algo, count, seed, alpha)?);
    }
    let mut records: Vec<RatioRecord> = std::thread::scope(|scope| {
        let workers: Vec<_> = (0..jobs)
            .map(|w| {
                scope.spawn(move || {
                    (w as u64..count)
                        .step_by(jobs)
                        .map(|i| {
                            let inst = oracle::sweep_instance(algo, seed, i, alpha);
                            oracle::check_ratio(&inst, algo, i)
                        })
                        .collect::<Result<Vec<_>, _>>()
                })
            })
            .collect();
        workers
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect::<Result<Vec<_>, _>>()
            .map(|chunks| chunks.into_iter().flatten().collect())
    })?;
    records.sort_by_key(|r| r.instance_id);
    Ok(records)
}

fn cmd_duropt(args: DuroptArgs) -> CmdResult {
    let alpha = Alpha::new(args.alpha)?;
    let prog = WeightedProgram::new(args.weights, args.coeffs, args.energy, alpha)?;
    let sol = solve_weighted(&prog)?;
    println!("{}", serde_json::to_value(&sol).context("serializing solution")?);
    Ok(())
}
