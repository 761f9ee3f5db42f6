//! Pick the Right Stuff: a seedable, multi-round text game for measuring how
//! well an agent tracks the (possibly false) beliefs of other agents.
//!
//! The player acts as a warehouse manager watching an opaque locker through a
//! monitor. Users store one item each, the locker shuffles its contents at
//! random, and users come back to retrieve their items based on where they
//! *last saw* them — not where the items actually are. The manager scores a
//! point whenever it correctly predicts the position a user believes their
//! item to be in.
//!
//! Two game modes vary how much history the manager must reason over:
//!
//! - [`Mode::Zero`]: users re-observe the live monitor, so the latest belief
//!   of every user is readable directly from the event stream.
//! - [`Mode::Finite`]: users observe *historical* snapshots announced only as
//!   "k-th-to-last state of the monitor", so the manager has to index into
//!   the monitor history to recover what a user saw.
//!
//! Every game is generated from a seed and replayable bit-for-bit, so
//! different agents can be compared on identical event sequences.
//!
//! # Crate layout
//!
//! - [`engine`] — locker state, shuffles, the swap-on-retrieval rule, and the
//!   append-only monitor history.
//! - [`beliefs`] — the ground-truth ledger of each user's last-believed item
//!   position (the scoring oracle).
//! - [`scheduler`] — deterministic generation and validation of event
//!   scripts, plus their JSONL serialization.
//! - [`narrative`] — renders events into the exact English transcript shown
//!   to agents (templates live in `templates/`).
//! - [`agents`] — the agent contract: remote LLM over HTTP, human at a
//!   terminal, and scripted baselines (oracle, random, frozen-belief).
//! - [`harness`] — runs turns and experiments, computes scores, and persists
//!   transcripts and reports.
//!
//! # Examples
//!
//! Each major capability has a runnable example:
//!
//! ```bash
//! cargo run --example baseline_scores     # oracle/frozen/random across both modes
//! cargo run --example script_roundtrip    # deterministic scripts + JSONL round-trip
//! cargo run --example render_transcript   # full rendered transcript of one turn
//! cargo run --example belief_trace        # true positions vs. user beliefs, event by event
//! cargo run --example llm_side_by_side    # score any chat endpoint on Zero vs Finite
//! ```
//!
//! A thin CLI (`ptrs`) wraps the harness for batch runs, interactive play,
//! script replay, and report aggregation; see the README.

pub mod agents;
pub mod beliefs;
pub mod engine;
pub mod harness;
pub mod narrative;
pub mod rng;
pub mod scheduler;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use agents::{parse_prediction, AgentSession, Prediction};
pub use beliefs::{init_beliefs, BeliefLedger};
pub use engine::{
    apply_retrieval, apply_shuffle, snapshot_from_last, LockerState, MonitorHistory, Permutation,
    Position, RetrievalOutcome, UserId,
};
pub use harness::{run_experiment, run_game, ExperimentConfig};
pub use scheduler::{generate_script, validate_script, EventScript, GameEvent, ScriptConfig};

/// Belief-history mode of a game.
///
/// The mode decides how users observe the locker and therefore how much
/// reasoning it takes to recover their latest belief. New modes are added as
/// variants here; every `match` on `Mode` is exhaustive, so the compiler
/// points at each place a new mode must be handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Users re-observe the live monitor; no history indexing required.
    Zero,
    /// Users observe "k-th-to-last" snapshots of the monitor history.
    Finite,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Zero => write!(f, "zero"),
            Mode::Finite => write!(f, "finite"),
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "zero" => Ok(Mode::Zero),
            "finite" => Ok(Mode::Finite),
            other => Err(format!(
                "unknown mode '{other}' (expected 'zero' or 'finite')"
            )),
        }
    }
}
