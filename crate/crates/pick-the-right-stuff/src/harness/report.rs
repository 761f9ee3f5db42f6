//! Report and transcript records, their serialization, and score rendering.
//!
//! Scores are exact rationals internally and become decimal strings only at
//! the report boundary (rounded half-up to 2 decimals), so aggregates never
//! accumulate floating-point error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::agents::Role;
use crate::engine::RetrievalOutcome;
use crate::narrative::FragmentKind;
use crate::scheduler::ScriptConfig;
use crate::Mode;

use super::HarnessError;

/// Version of the `report.json` schema.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Exact turn/average score: a non-negative rational in `[0, 100]`.
pub type Score = Ratio<u64>;

/// Render a score to exactly two decimals, rounding half-up
/// (`200/3 -> "66.67"`).
pub fn format_score_2dp(score: Score) -> String {
    let hundredths = (score * Ratio::from_integer(100)).round().to_integer();
    format!("{}.{:02}", hundredths / 100, hundredths % 100)
}

/// Render a score the way transcripts do: as a plain integer when integral
/// (`"100"`), otherwise with two decimals (`"66.67"`).
pub fn format_score_trimmed(score: Score) -> String {
    let hundredths = (score * Ratio::from_integer(100)).round().to_integer();
    if hundredths.is_multiple_of(100) {
        format!("{}", hundredths / 100)
    } else {
        format!("{}.{:02}", hundredths / 100, hundredths % 100)
    }
}

/// Per-turn outcome summary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurnReport {
    pub turn_index: u64,
    pub outcomes: Vec<RetrievalOutcome>,
    pub correct_count: usize,
    /// `100 * correct_count / n_users`, rendered to 2 decimals.
    pub score: String,
    pub parse_failures: usize,
    pub transport_failures: usize,
}

impl TurnReport {
    pub fn new(
        turn_index: u64,
        outcomes: Vec<RetrievalOutcome>,
        score: Score,
        parse_failures: usize,
        transport_failures: usize,
    ) -> Self {
        let correct_count = outcomes.iter().filter(|o| o.correct).count();
        Self {
            turn_index,
            outcomes,
            correct_count,
            score: format_score_2dp(score),
            parse_failures,
            transport_failures,
        }
    }

    /// The exact rational this report's score string was rendered from.
    pub fn score_ratio(&self) -> Score {
        Ratio::new(100 * self.correct_count as u64, self.outcomes.len() as u64)
    }
}

/// A turn that aborted on a protocol violation; the experiment continues.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbortedTurn {
    pub turn_index: u64,
    pub error: String,
}

/// Provenance recorded with every experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub started_at: String,
    pub finished_at: String,
    pub agent_kind: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub model: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub endpoint: Option<String>,
    /// LLM sampling temperature (always 0 for reproducibility).
    pub temperature: f32,
    /// How the conversation is shipped to remote agents.
    pub conversation_policy: String,
    pub template_version: String,
    pub template_fingerprint: String,
}

/// The aggregate result of one experiment (one agent, one mode, many turns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    /// Echo of the scheduler configuration every turn was generated from.
    pub config: ScriptConfig,
    pub n_turns: usize,
    /// Hex seed of each turn's script stream, for exact replay.
    pub turn_seeds: Vec<String>,
    pub turns: Vec<TurnReport>,
    pub aborted_turns: Vec<AbortedTurn>,
    /// False when any turn aborted.
    pub complete: bool,
    /// Mean of the turn scores, rendered to 2 decimals.
    pub average_score: String,
    pub metadata: ReportMetadata,
}

impl ExperimentReport {
    /// Exact mean of the completed turns' scores.
    pub fn average_ratio(&self) -> Option<Score> {
        if self.turns.is_empty() {
            return None;
        }
        let sum: Score = self.turns.iter().map(TurnReport::score_ratio).sum();
        Some(sum / Ratio::from_integer(self.turns.len() as u64))
    }
}

/// One line of a `turn_<i>.jsonl` transcript file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum TranscriptRecord {
    Header {
        turn_index: u64,
        mode: Mode,
        n_users: usize,
        turn_seed: String,
    },
    Entry {
        role: Role,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        kind: Option<FragmentKind>,
        text: String,
    },
    Summary {
        correct_count: usize,
        score: String,
        parse_failures: usize,
        transport_failures: usize,
    },
}

/// Write a transcript as JSONL: header, entries, summary.
pub fn write_transcript_jsonl<W: Write>(
    records: &[TranscriptRecord],
    mut writer: W,
) -> Result<(), HarnessError> {
    for record in records {
        serde_json::to_writer(&mut writer, record)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// Parse a `turn_<i>.jsonl` file.
pub fn read_transcript_jsonl(text: &str) -> Result<Vec<TranscriptRecord>, HarnessError> {
    text.lines()
        .filter(|line| !line.trim().is_empty())
        .map(|line| serde_json::from_str(line).map_err(HarnessError::from))
        .collect()
}

/// Append this experiment's per-turn rows to a CSV writer.
///
/// Columns: model, mode, turn, correct, score, parse_failures,
/// transport_failures.
pub fn write_summary_csv<W: Write>(
    report: &ExperimentReport,
    writer: W,
) -> Result<(), HarnessError> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record([
        "model",
        "mode",
        "turn",
        "correct",
        "score",
        "parse_failures",
        "transport_failures",
    ])?;
    let model = report
        .metadata
        .model
        .clone()
        .unwrap_or_else(|| report.metadata.agent_kind.clone());
    for turn in &report.turns {
        csv.write_record([
            model.as_str(),
            &report.config.mode.to_string(),
            &turn.turn_index.to_string(),
            &turn.correct_count.to_string(),
            &turn.score,
            &turn.parse_failures.to_string(),
            &turn.transport_failures.to_string(),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

pub fn load_report(path: &Path) -> Result<ExperimentReport, HarnessError> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Find every `report.json` under `root/<label>/<mode>/`.
pub fn find_reports(root: &Path) -> Result<Vec<(PathBuf, ExperimentReport)>, HarnessError> {
    let mut found = Vec::new();
    if !root.is_dir() {
        return Ok(found);
    }
    let mut label_dirs: Vec<PathBuf> = fs::read_dir(root)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_dir())
        .collect();
    label_dirs.sort();
    for label_dir in label_dirs {
        let mut mode_dirs: Vec<PathBuf> = fs::read_dir(&label_dir)?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.is_dir())
            .collect();
        mode_dirs.sort();
        for mode_dir in mode_dirs {
            let report_path = mode_dir.join("report.json");
            if report_path.is_file() {
                let report = load_report(&report_path)?;
                found.push((report_path, report));
            }
        }
    }
    Ok(found)
}
