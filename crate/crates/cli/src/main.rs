use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use logtwist::par::{configure_threads, Exec};
use logtwist_cli::{run, Format, RunOptions, RunPlan, TaskKind};

#[derive(Parser)]
#[command(name = "logtwist", version, about = "Exact checks for twisted de Rham complexes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args)]
struct Global {
    /// Report file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Seed for randomized tasks that do not set one.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Truncation N for P¹ Čech models.
    #[arg(long, global = true, allow_negative_numbers = true)]
    truncation: Option<i64>,
    /// Run the per-task maps sequentially.
    #[arg(long, global = true)]
    sequential: bool,
    /// Add wall-clock milliseconds to each task.
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run a plan file (JSON, or TOML by extension).
    Run {
        #[arg(long)]
        plan: PathBuf,
    },
    /// Run a single task.
    #[command(flatten)]
    Task(TaskCommand),
}

#[derive(Subcommand)]
enum TaskCommand {
    LocalVerify(TaskArgs),
    P1Hodge(TaskArgs),
    P1Degeneration(TaskArgs),
    P1Uv(TaskArgs),
    CharpCartier(TaskArgs),
    CharpSplitting(TaskArgs),
    FiltcxFuzz(TaskArgs),
}

#[derive(Args)]
struct TaskArgs {
    /// Task params as a JSON file.
    #[arg(long, conflicts_with = "inline")]
    params: Option<PathBuf>,
    /// Task params as a JSON string.
    #[arg(long)]
    inline: Option<String>,
    /// Same as `run --plan`: take the task from a one-task plan.
    #[arg(long, conflicts_with_all = ["params", "inline"])]
    plan: Option<PathBuf>,
}

impl TaskCommand {
    fn split(self) -> (TaskKind, TaskArgs) {
        match self {
            TaskCommand::LocalVerify(a) => (TaskKind::LocalVerify, a),
            TaskCommand::P1Hodge(a) => (TaskKind::P1Hodge, a),
            TaskCommand::P1Degeneration(a) => (TaskKind::P1Degeneration, a),
            TaskCommand::P1Uv(a) => (TaskKind::P1Uv, a),
            TaskCommand::CharpCartier(a) => (TaskKind::CharpCartier, a),
            TaskCommand::CharpSplitting(a) => (TaskKind::CharpSplitting, a),
            TaskCommand::FiltcxFuzz(a) => (TaskKind::FiltcxFuzz, a),
        }
    }
}

fn load_plan(command: Command) -> Result<RunPlan> {
    match command {
        Command::Run { plan } => RunPlan::load(&plan),
        Command::Task(t) => {
            let (kind, args) = t.split();
            if let Some(path) = args.plan {
                let mut plan = RunPlan::load(&path)?;
                plan.tasks.retain(|t| t.kind == kind);
                return Ok(plan);
            }
            let params = match (args.params, args.inline) {
                (Some(path), _) => {
                    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                    serde_json::from_str(&text).context("params file is not JSON")?
                }
                (None, Some(s)) => serde_json::from_str(&s).context("--inline is not JSON")?,
                (None, None) => serde_json::json!({}),
            };
            Ok(RunPlan::single(kind, params))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match real_main(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main(cli: Cli) -> Result<u8> {
    let g = cli.global;
    if let Some(n) = g.jobs {
        configure_threads(n);
    }
    let plan = load_plan(cli.command)?;
    plan.validate()?;
    let opts = RunOptions {
        seed: g.seed,
        truncation: g.truncation,
        exec: if g.sequential {
            Exec::Sequential
        } else {
            Exec::default()
        },
        timing: g.timing,
    };
    let report = run(&plan, &opts);
    let format = g.format.unwrap_or(plan.output.format);
    let text = report.render(format);
    match g.out.or_else(|| plan.output.path.clone()) {
        Some(path) => std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(report.exit_code() as u8)
}
