//! Experiment orchestration: runs turns, computes scores, persists
//! transcripts and reports.
//!
//! A turn replays its pre-generated [`EventScript`] against one fresh
//! [`AgentSession`]; an experiment runs `n_turns` of them sequentially and
//! aggregates. For a fixed `(master_seed, scheduler config)` every agent
//! faces the identical sequence of scripts.

pub mod report;

use std::fs;
use std::path::PathBuf;

use num_rational::Ratio;
use thiserror::Error;

use crate::agents::llm::{LlmBehavior, LlmConfig, TEMPERATURE};
use crate::agents::{
    AgentError, AgentIdentity, AgentSession, FrozenBeliefBehavior, HumanBehavior, OracleBehavior,
    QuestionCtx, RandomBehavior, ScriptedBehavior,
};
use crate::beliefs::{init_beliefs, BeliefError};
use crate::engine::{
    apply_retrieval, apply_shuffle, snapshot_from_last, EngineError, LockerState, MonitorHistory,
    RetrievalOutcome,
};
use crate::narrative::{
    render_event, render_feedback, render_game_begin, render_game_over, render_intro,
    template_fingerprint, TEMPLATE_VERSION,
};
use crate::rng::turn_seed;
use crate::scheduler::{
    generate_script, validate_script, EventScript, GameEvent, ScriptConfig, ScriptError,
};
use crate::Mode;

pub use report::{
    format_score_2dp, format_score_trimmed, AbortedTurn, ExperimentReport, ReportMetadata, Score,
    TranscriptRecord, TurnReport, REPORT_SCHEMA_VERSION,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("script failed validation:\n{0}")]
    InvalidScript(String),
    #[error("event {event_index}: {message}")]
    Protocol { event_index: usize, message: String },
    #[error("game ended with items still in the locker")]
    Unfinished,
    #[error("expected {expected} outcomes, got {got}")]
    OutcomeCount { expected: usize, got: usize },
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Script(#[from] ScriptError),
    #[error(transparent)]
    Belief(#[from] BeliefError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Which agent an experiment runs.
#[derive(Debug, Clone)]
pub enum AgentSpec {
    /// Ground-truth baseline; scores 100 by construction.
    Oracle,
    /// Uniform random position each question.
    Random,
    /// Always answers the user's initial position.
    FrozenBelief,
    /// Interactive terminal player.
    Human,
    /// Remote model over a chat-completions endpoint.
    Llm(LlmConfig),
    /// Fixed answers, one per question (used by `replay`).
    Scripted(Vec<String>),
}

impl AgentSpec {
    pub fn identity(&self) -> AgentIdentity {
        match self {
            AgentSpec::Oracle => AgentIdentity::new("oracle"),
            AgentSpec::Random => AgentIdentity::new("random"),
            AgentSpec::FrozenBelief => AgentIdentity::new("frozen"),
            AgentSpec::Human => AgentIdentity::new("human"),
            AgentSpec::Llm(config) => AgentIdentity::with_model("llm", &config.model),
            AgentSpec::Scripted(_) => AgentIdentity::new("scripted"),
        }
    }

    pub fn endpoint(&self) -> Option<String> {
        match self {
            AgentSpec::Llm(config) => Some(config.endpoint.clone()),
            _ => None,
        }
    }

    /// Fresh session for one turn. The random baseline reseeds per turn from
    /// `(master_seed, turn_index)` so reruns are bit-identical.
    pub fn build_session(
        &self,
        master_seed: u64,
        turn_index: u64,
    ) -> Result<AgentSession, HarnessError> {
        let behavior: Box<dyn crate::agents::AgentBehavior> = match self {
            AgentSpec::Oracle => Box::new(OracleBehavior),
            AgentSpec::Random => Box::new(RandomBehavior::seeded(master_seed, turn_index)),
            AgentSpec::FrozenBelief => Box::new(FrozenBeliefBehavior),
            AgentSpec::Human => Box::new(HumanBehavior::stdio()),
            AgentSpec::Llm(config) => Box::new(LlmBehavior::new(config.clone())?),
            AgentSpec::Scripted(answers) => Box::new(ScriptedBehavior::new(answers.clone())),
        };
        Ok(AgentSession::new(self.identity(), behavior))
    }
}

/// Full configuration of an experiment run.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub n_users: usize,
    pub n_turns: usize,
    pub master_seed: u64,
    pub agent: AgentSpec,
    pub shuffles_between_arrivals: (u32, u32),
    pub p_observe: f64,
    pub max_staleness: usize,
    /// When set, transcripts and reports are written under
    /// `<out_dir>/<agent label>/<mode>/`.
    pub out_dir: Option<PathBuf>,
    /// Print per-turn progress to stderr.
    pub verbose: bool,
}

impl ExperimentConfig {
    /// Defaults: 5 users, 60 turns, 1-3 shuffles per gap, observation
    /// probability 0.3, staleness cap 6, no output directory.
    pub fn new(mode: Mode, agent: AgentSpec, master_seed: u64) -> Self {
        Self {
            mode,
            n_users: 5,
            n_turns: 60,
            master_seed,
            agent,
            shuffles_between_arrivals: (1, 3),
            p_observe: 0.3,
            max_staleness: 6,
            out_dir: None,
            verbose: false,
        }
    }

    pub fn script_config(&self) -> ScriptConfig {
        ScriptConfig {
            n_users: self.n_users,
            mode: self.mode,
            shuffles_between_arrivals: self.shuffles_between_arrivals,
            p_observe: self.p_observe,
            max_staleness: self.max_staleness,
            master_seed: self.master_seed,
        }
    }
}

/// `100 * correct / n_users`, as an exact rational.
pub fn score_turn(outcomes: &[RetrievalOutcome], n_users: usize) -> Result<Score, HarnessError> {
    if outcomes.len() != n_users {
        return Err(HarnessError::OutcomeCount {
            expected: n_users,
            got: outcomes.len(),
        });
    }
    let correct = outcomes.iter().filter(|o| o.correct).count() as u64;
    Ok(Ratio::new(100 * correct, n_users as u64))
}

fn protocol<E: std::fmt::Display>(event_index: usize) -> impl FnOnce(E) -> HarnessError {
    move |e| HarnessError::Protocol {
        event_index,
        message: e.to_string(),
    }
}

/// Replay one script against one agent session.
///
/// Events drive the engine and the belief ledger; arrivals put the question
/// to the agent, resolve the retrieval with the user's current believed
/// position, and feed the outcome back. The session is closed afterwards
/// with its transcript intact.
pub fn run_game(
    script: &EventScript,
    session: &mut AgentSession,
) -> Result<TurnReport, HarnessError> {
    let violations = validate_script(script);
    if !violations.is_empty() {
        let listing: Vec<String> = violations.iter().map(ToString::to_string).collect();
        return Err(HarnessError::InvalidScript(listing.join("\n")));
    }

    let n_users = script.config.n_users;
    let mut locker = LockerState::initial(n_users);
    let mut history = MonitorHistory::new(locker.clone());
    let mut ledger = init_beliefs(n_users)?;

    let mut outcomes: Vec<RetrievalOutcome> = Vec::with_capacity(n_users);
    let mut parse_failures = 0usize;
    let mut transport_failures = 0usize;

    session.notify(&render_intro(script.config.mode))?;
    session.notify(&render_game_begin(n_users))?;

    for (index, event) in script.events.iter().enumerate() {
        match event {
            GameEvent::Shuffle { perm } => {
                locker = apply_shuffle(&locker, perm).map_err(protocol(index))?;
                history.push(locker.clone());
                session.notify(&render_event(event, &locker))?;
            }
            GameEvent::MonitorVisit { user } => {
                ledger
                    .observe_monitor(*user, &locker)
                    .map_err(protocol(index))?;
                session.notify(&render_event(event, &locker))?;
            }
            GameEvent::SnapshotView { user, k_from_last } => {
                let shown = snapshot_from_last(&history, *k_from_last)
                    .map_err(protocol(index))?
                    .clone();
                ledger
                    .observe_snapshot(*user, &shown)
                    .map_err(protocol(index))?;
                session.notify(&render_event(event, &locker))?;
            }
            GameEvent::Arrival { user } => {
                let question = render_event(event, &locker);
                let believed = ledger.believed_position(*user).map_err(protocol(index))?;
                let prediction = session.predict(
                    &question,
                    &QuestionCtx {
                        user: *user,
                        n_slots: n_users,
                        ledger: &ledger,
                    },
                )?;
                if prediction.transport_error {
                    transport_failures += 1;
                } else if prediction.value.is_none() {
                    parse_failures += 1;
                }
                let (next, outcome) = apply_retrieval(&locker, *user, prediction.value, believed)
                    .map_err(protocol(index))?;
                locker = next;
                history.push(locker.clone());
                ledger.mark_retrieved(*user).map_err(protocol(index))?;
                session.notify(&render_feedback(&outcome, &locker))?;
                outcomes.push(outcome);
            }
        }
    }

    if !locker.is_all_empty() {
        return Err(HarnessError::Unfinished);
    }
    let score = score_turn(&outcomes, n_users)?;
    let correct_count = outcomes.iter().filter(|o| o.correct).count();
    session.notify(&render_game_over(
        correct_count,
        &format_score_trimmed(score),
    ))?;
    session.close();

    Ok(TurnReport::new(
        script.turn_index,
        outcomes,
        score,
        parse_failures,
        transport_failures,
    ))
}

/// Replay a script against fixed answers; returns the report and the
/// rendered transcript text.
pub fn replay_script(
    script: &EventScript,
    answers: Vec<String>,
) -> Result<(TurnReport, String), HarnessError> {
    let mut session = AgentSpec::Scripted(answers).build_session(0, script.turn_index)?;
    let report = run_game(script, &mut session)?;
    Ok((report, session.rendered_transcript()))
}

fn transcript_records(
    session: &AgentSession,
    script: &EventScript,
    turn: &TurnReport,
) -> Vec<TranscriptRecord> {
    let mut records = Vec::with_capacity(session.transcript().len() + 2);
    records.push(TranscriptRecord::Header {
        turn_index: script.turn_index,
        mode: script.config.mode,
        n_users: script.config.n_users,
        turn_seed: hex(&turn_seed(script.config.master_seed, script.turn_index)),
    });
    for entry in session.transcript() {
        records.push(TranscriptRecord::Entry {
            role: entry.role,
            kind: entry.kind,
            text: entry.text.clone(),
        });
    }
    records.push(TranscriptRecord::Summary {
        correct_count: turn.correct_count,
        score: turn.score.clone(),
        parse_failures: turn.parse_failures,
        transport_failures: turn.transport_failures,
    });
    records
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn now_rfc3339() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

/// Run a full experiment: one script per turn, a fresh agent session per
/// turn, sequential execution.
///
/// A turn that aborts on a protocol violation is recorded and the experiment
/// continues with the report flagged incomplete. When `out_dir` is set the
/// layout is `<out>/<label>/<mode>/turn_<i>.jsonl` plus `report.json` and
/// `summary.csv`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    let script_config = config.script_config();
    script_config.validate()?;
    let identity = config.agent.identity();

    let target_dir = match &config.out_dir {
        Some(out) => {
            let dir = out.join(identity.label()).join(config.mode.to_string());
            fs::create_dir_all(&dir)?;
            Some(dir)
        }
        None => None,
    };

    let started_at = now_rfc3339();
    let mut turns: Vec<TurnReport> = Vec::with_capacity(config.n_turns);
    let mut aborted: Vec<AbortedTurn> = Vec::new();
    let mut turn_seeds: Vec<String> = Vec::with_capacity(config.n_turns);

    for turn_index in 0..config.n_turns as u64 {
        let script = generate_script(&script_config, turn_index)?;
        turn_seeds.push(hex(&turn_seed(config.master_seed, turn_index)));
        let mut session = config.agent.build_session(config.master_seed, turn_index)?;
        match run_game(&script, &mut session) {
            Ok(turn) => {
                if config.verbose {
                    eprintln!(
                        "turn {turn_index}: correct {}/{} score {}",
                        turn.correct_count, config.n_users, turn.score
                    );
                }
                if let Some(dir) = &target_dir {
                    let records = transcript_records(&session, &script, &turn);
                    let file = fs::File::create(dir.join(format!("turn_{turn_index}.jsonl")))?;
                    report::write_transcript_jsonl(&records, std::io::BufWriter::new(file))?;
                }
                turns.push(turn);
            }
            Err(err) => {
                if config.verbose {
                    eprintln!("turn {turn_index}: aborted: {err}");
                }
                aborted.push(AbortedTurn {
                    turn_index,
                    error: err.to_string(),
                });
            }
        }
    }

    let average = if turns.is_empty() {
        Ratio::from_integer(0)
    } else {
        turns.iter().map(TurnReport::score_ratio).sum::<Score>()
            / Ratio::from_integer(turns.len() as u64)
    };
    let complete = aborted.is_empty() && turns.len() == config.n_turns;

    let report = ExperimentReport {
        schema_version: REPORT_SCHEMA_VERSION,
        config: script_config,
        n_turns: config.n_turns,
        turn_seeds,
        turns,
        aborted_turns: aborted,
        complete,
        average_score: format_score_2dp(average),
        metadata: ReportMetadata {
            started_at,
            finished_at: now_rfc3339(),
            agent_kind: identity.kind.clone(),
            model: identity.model.clone(),
            endpoint: config.agent.endpoint(),
            temperature: TEMPERATURE,
            conversation_policy: "full-history-resend".to_string(),
            template_version: TEMPLATE_VERSION.to_string(),
            template_fingerprint: template_fingerprint(),
        },
    };

    if let Some(dir) = &target_dir {
        fs::write(
            dir.join("report.json"),
            serde_json::to_string_pretty(&report)?,
        )?;
        let csv_file = fs::File::create(dir.join("summary.csv"))?;
        report::write_summary_csv(&report, std::io::BufWriter::new(csv_file))?;
    }

    Ok(report)
}
