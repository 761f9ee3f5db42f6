//! Thin CLI over the library: batch experiment runs, interactive play,
//! script replay, and report aggregation.

use std::fs;
use std::path::PathBuf;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use pick_the_right_stuff::agents::llm::LlmConfig;
use pick_the_right_stuff::harness::{self, AgentSpec, ExperimentConfig};
use pick_the_right_stuff::scheduler::{self, ScriptConfig};
use pick_the_right_stuff::Mode;

#[derive(Parser)]
#[command(
    name = "ptrs",
    version,
    about = "Pick the Right Stuff: belief-tracking game harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment: many seeded turns against one agent.
    Run(RunArgs),
    /// Play interactively at the terminal.
    Play(PlayArgs),
    /// Replay a serialized event script against recorded answers.
    Replay(ReplayArgs),
    /// Aggregate existing run outputs into summary tables.
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Zero,
    Finite,
}

impl From<ModeArg> for Mode {
    fn from(value: ModeArg) -> Self {
        match value {
            ModeArg::Zero => Mode::Zero,
            ModeArg::Finite => Mode::Finite,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AgentArg {
    Oracle,
    Random,
    Frozen,
    Human,
    Llm,
}

#[derive(Args)]
struct SchedulerArgs {
    /// Minimum shuffles before each arrival.
    #[arg(long, default_value_t = 1)]
    shuffles_min: u32,
    /// Maximum shuffles before each arrival.
    #[arg(long, default_value_t = 3)]
    shuffles_max: u32,
    /// Probability a not-yet-arrived user observes during a gap.
    #[arg(long, default_value_t = 0.3)]
    p_observe: f64,
    /// Cap on how far back generated snapshots may reach.
    #[arg(long, default_value_t = 6)]
    max_staleness: usize,
}

#[derive(Args)]
struct RunArgs {
    /// Game mode.
    #[arg(long, value_enum)]
    mode: ModeArg,
    /// Agent to evaluate.
    #[arg(long, value_enum)]
    agent: AgentArg,
    /// Master seed; fixes every game state across agents.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of users (and locker slots) per turn.
    #[arg(long, default_value_t = 5)]
    users: usize,
    /// Number of turns to play.
    #[arg(long, default_value_t = 60)]
    turns: usize,
    /// Output directory; transcripts and reports land under
    /// <out>/<agent>/<mode>/.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Chat-completions endpoint URL (llm agent).
    #[arg(long)]
    endpoint: Option<String>,
    /// Model name sent with each request (llm agent).
    #[arg(long)]
    model: Option<String>,
    /// Environment variable holding the API key (llm agent).
    #[arg(long)]
    api_key_env: Option<String>,
    /// Per-request timeout in seconds (llm agent).
    #[arg(long, default_value_t = 120)]
    timeout_secs: u64,
    /// Attempts per question before scoring a transport failure (llm agent).
    #[arg(long, default_value_t = 3)]
    retries: u32,
    #[command(flatten)]
    scheduler: SchedulerArgs,
    /// Suppress per-turn progress on stderr.
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct PlayArgs {
    /// Game mode.
    #[arg(long, value_enum, default_value = "zero")]
    mode: ModeArg,
    /// Number of users (and locker slots) per turn.
    #[arg(long, default_value_t = 3)]
    users: usize,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    scheduler: SchedulerArgs,
}

#[derive(Args)]
struct ReplayArgs {
    /// Script file (JSONL, as produced by the scheduler).
    #[arg(long)]
    script: PathBuf,
    /// Answers file: one raw answer per line, in question order.
    #[arg(long)]
    answers: PathBuf,
    /// Optional path for the turn report JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Root directory holding <model>/<mode>/report.json outputs.
    #[arg(long)]
    root: PathBuf,
    /// Write the aggregate table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the aggregate table as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(args) => run(args),
        Command::Play(args) => play(args),
        Command::Replay(args) => replay(args),
        Command::Report(args) => report(args),
    }
}

fn agent_spec(args: &RunArgs) -> Result<AgentSpec> {
    Ok(match args.agent {
        AgentArg::Oracle => AgentSpec::Oracle,
        AgentArg::Random => AgentSpec::Random,
        AgentArg::Frozen => AgentSpec::FrozenBelief,
        AgentArg::Human => AgentSpec::Human,
        AgentArg::Llm => {
            let endpoint = args
                .endpoint
                .clone()
                .context("--endpoint is required with --agent llm")?;
            let model = args
                .model
                .clone()
                .context("--model is required with --agent llm")?;
            let mut config = LlmConfig::new(endpoint, model);
            config.api_key_env = args.api_key_env.clone();
            config.timeout = Duration::from_secs(args.timeout_secs);
            config.max_attempts = args.retries;
            AgentSpec::Llm(config)
        }
    })
}

fn run(args: RunArgs) -> Result<()> {
    let agent = agent_spec(&args)?;
    let config = ExperimentConfig {
        mode: args.mode.into(),
        n_users: args.users,
        n_turns: args.turns,
        master_seed: args.seed,
        agent,
        shuffles_between_arrivals: (args.scheduler.shuffles_min, args.scheduler.shuffles_max),
        p_observe: args.scheduler.p_observe,
        max_staleness: args.scheduler.max_staleness,
        out_dir: args.out.clone(),
        verbose: !args.quiet,
    };
    let report = harness::run_experiment(&config)?;
    println!(
        "{} / {}: average score {} over {} turns ({} aborted){}",
        report
            .metadata
            .model
            .as_deref()
            .unwrap_or(&report.metadata.agent_kind),
        report.config.mode,
        report.average_score,
        report.turns.len(),
        report.aborted_turns.len(),
        if report.complete { "" } else { " [incomplete]" },
    );
    if let Some(out) = &args.out {
        let label = config.agent.identity().label();
        println!(
            "outputs: {}",
            out.join(label).join(config.mode.to_string()).display()
        );
    }
    Ok(())
}

fn play(args: PlayArgs) -> Result<()> {
    let mode: Mode = args.mode.into();
    let script_config = ScriptConfig {
        n_users: args.users,
        mode,
        shuffles_between_arrivals: (args.scheduler.shuffles_min, args.scheduler.shuffles_max),
        p_observe: args.scheduler.p_observe,
        max_staleness: args.scheduler.max_staleness,
        master_seed: args.seed,
    };
    let mut turn_index = 0u64;
    loop {
        let script = scheduler::generate_script(&script_config, turn_index)?;
        let mut session = AgentSpec::Human.build_session(args.seed, turn_index)?;
        harness::run_game(&script, &mut session)?;
        // The play-again prompt is the transcript's last line.
        let mut line = String::new();
        if std::io::stdin().read_line(&mut line)? == 0 {
            break;
        }
        if line.trim().eq_ignore_ascii_case("n") {
            break;
        }
        turn_index += 1;
    }
    Ok(())
}

fn replay(args: ReplayArgs) -> Result<()> {
    let script_text = fs::read_to_string(&args.script)
        .with_context(|| format!("reading script {}", args.script.display()))?;
    let script = scheduler::script_from_jsonl(&script_text)?;
    let answers_text = fs::read_to_string(&args.answers)
        .with_context(|| format!("reading answers {}", args.answers.display()))?;
    let answers: Vec<String> = answers_text.lines().map(str::to_string).collect();
    let (turn_report, transcript) = harness::replay_script(&script, answers)?;
    print!("{transcript}");
    if let Some(path) = &args.report {
        fs::write(path, serde_json::to_string_pretty(&turn_report)?)?;
    }
    Ok(())
}

fn report(args: ReportArgs) -> Result<()> {
    let reports = harness::report::find_reports(&args.root)?;
    if reports.is_empty() {
        bail!("no report.json found under {}", args.root.display());
    }

    #[derive(serde::Serialize)]
    struct Row {
        model: String,
        mode: String,
        turns: usize,
        aborted: usize,
        complete: bool,
        average_score: String,
    }

    let rows: Vec<Row> = reports
        .iter()
        .map(|(_, r)| Row {
            model: r
                .metadata
                .model
                .clone()
                .unwrap_or_else(|| r.metadata.agent_kind.clone()),
            mode: r.config.mode.to_string(),
            turns: r.turns.len(),
            aborted: r.aborted_turns.len(),
            complete: r.complete,
            average_score: r.average_score.clone(),
        })
        .collect();

    println!(
        "{:<28} {:<8} {:>6} {:>8} {:>10} {:>9}",
        "model", "mode", "turns", "aborted", "complete", "average"
    );
    for row in &rows {
        println!(
            "{:<28} {:<8} {:>6} {:>8} {:>10} {:>9}",
            row.model, row.mode, row.turns, row.aborted, row.complete, row.average_score
        );
    }

    // Side-by-side mode comparison per model, reported (not asserted).
    let mut models: Vec<String> = rows.iter().map(|r| r.model.clone()).collect();
    models.sort();
    models.dedup();
    let mut printed_header = false;
    for model in models {
        let avg = |mode: &str| -> Option<f64> {
            rows.iter()
                .find(|r| r.model == model && r.mode == mode)
                .and_then(|r| r.average_score.parse().ok())
        };
        if let (Some(zero), Some(finite)) = (avg("zero"), avg("finite")) {
            if !printed_header {
                println!("\nzero vs finite:");
                printed_header = true;
            }
            println!(
                "  {model}: zero {zero:.2}, finite {finite:.2}, diff {:+.2} (zero >= finite: {})",
                zero - finite,
                if zero >= finite { "yes" } else { "no" }
            );
        }
    }

    if let Some(path) = &args.csv {
        let mut writer = csv::Writer::from_path(path)?;
        writer.write_record([
            "model",
            "mode",
            "turns",
            "aborted",
            "complete",
            "average_score",
        ])?;
        for row in &rows {
            writer.write_record([
                row.model.as_str(),
                row.mode.as_str(),
                &row.turns.to_string(),
                &row.aborted.to_string(),
                &row.complete.to_string(),
                &row.average_score,
            ])?;
        }
        writer.flush()?;
    }
    if let Some(path) = &args.json {
        fs::write(path, serde_json::to_string_pretty(&rows)?)?;
    }
    Ok(())
}
