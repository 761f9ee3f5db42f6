//! Deterministic event-script generation and validation.
//!
//! A turn is fully described by an [`EventScript`]: the seeded sequence of
//! shuffles, user observations, and user arrivals. Scripts are generated
//! before play from `(config, turn_index)` alone, so every evaluated agent
//! faces exactly the same game states; agent answers cannot influence which
//! events occur.
//!
//! The generation order within each inter-arrival gap is fixed: first the
//! observation draws (ascending user id over users who have not arrived
//! yet), then the shuffles, then the arrival itself.

use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{Permutation, UserId};
use crate::rng::DetRng;
use crate::Mode;

/// Serialization header for the script JSONL format.
const SCRIPT_FORMAT: &str = "pick-the-right-stuff/script";
const SCRIPT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ScriptError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("script line {line}: {source}")]
    Parse {
        line: usize,
        source: serde_json::Error,
    },
    #[error("script is empty (missing header line)")]
    MissingHeader,
    #[error("unsupported script format {format:?} version {version}")]
    UnsupportedFormat { format: String, version: u32 },
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// One scheduled game event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GameEvent {
    /// The locker malfunctions and permutes all slots (empties included).
    Shuffle { perm: Permutation },
    /// A user looks at the live monitor (Zero mode only).
    MonitorVisit { user: UserId },
    /// A user looks at the `k_from_last`-th-to-last monitor state (Finite
    /// mode only); `k_from_last = 1` is the most recent state.
    SnapshotView { user: UserId, k_from_last: usize },
    /// A user comes to retrieve their item; the manager is questioned.
    Arrival { user: UserId },
}

impl GameEvent {
    /// The user this event involves, if any.
    pub fn user(&self) -> Option<UserId> {
        match self {
            GameEvent::Shuffle { .. } => None,
            GameEvent::MonitorVisit { user }
            | GameEvent::SnapshotView { user, .. }
            | GameEvent::Arrival { user } => Some(*user),
        }
    }
}

/// Tunable distribution of events within a turn.
///
/// The defaults (1-3 shuffles per gap, observation probability 0.3,
/// staleness cap 6) match the event density of the reference transcripts;
/// all are configurable because no canonical distribution exists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptConfig {
    pub n_users: usize,
    pub mode: Mode,
    /// Inclusive `[min, max]` count of shuffles before each arrival.
    pub shuffles_between_arrivals: (u32, u32),
    /// Probability that a given not-yet-arrived user observes during a given
    /// inter-arrival gap.
    pub p_observe: f64,
    /// Cap on `k_from_last` for generated snapshot views.
    pub max_staleness: usize,
    pub master_seed: u64,
}

impl ScriptConfig {
    pub fn new(mode: Mode, n_users: usize, master_seed: u64) -> Self {
        Self {
            n_users,
            mode,
            shuffles_between_arrivals: (1, 3),
            p_observe: 0.3,
            max_staleness: 6,
            master_seed,
        }
    }

    pub fn validate(&self) -> Result<(), ScriptError> {
        if self.n_users < 1 {
            return Err(ScriptError::InvalidConfig("n_users must be >= 1".into()));
        }
        let (lo, hi) = self.shuffles_between_arrivals;
        if lo > hi {
            return Err(ScriptError::InvalidConfig(format!(
                "shuffle range [{lo}, {hi}] is empty"
            )));
        }
        if !(0.0..=1.0).contains(&self.p_observe) {
            return Err(ScriptError::InvalidConfig(format!(
                "p_observe {} outside [0, 1]",
                self.p_observe
            )));
        }
        if self.max_staleness < 1 {
            return Err(ScriptError::InvalidConfig(
                "max_staleness must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// A pre-generated turn: the event sequence plus the config that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventScript {
    pub config: ScriptConfig,
    pub turn_index: u64,
    pub events: Vec<GameEvent>,
}

/// Generate the event script for one turn.
///
/// A pure function of `(config, turn_index)`: the arrival order is a uniform
/// permutation of the users; before each arrival every not-yet-arrived user
/// independently observes with probability `p_observe`, then a uniform count
/// of shuffles from `shuffles_between_arrivals` is emitted, each with a
/// permutation uniform over all permutations of the slots. In Finite mode an
/// observation's `k_from_last` is uniform over `[2, min(L, max_staleness)]`
/// where `L` is the history length at that point (falling back to 1 while
/// the history has a single state).
pub fn generate_script(config: &ScriptConfig, turn_index: u64) -> Result<EventScript, ScriptError> {
    config.validate()?;
    let mut rng = DetRng::for_turn(config.master_seed, turn_index);

    let mut arrival_order: Vec<usize> = (0..config.n_users).collect();
    rng.shuffle(&mut arrival_order);

    let mut arrived = vec![false; config.n_users];
    let mut history_len = 1usize; // the initial placement
    let mut events = Vec::new();

    for &arriving in &arrival_order {
        #[allow(clippy::needless_range_loop)]
        // draw order over user ids is part of the stream contract
        for user in 0..config.n_users {
            if arrived[user] || !rng.chance(config.p_observe) {
                continue;
            }
            match config.mode {
                Mode::Zero => events.push(GameEvent::MonitorVisit { user: UserId(user) }),
                Mode::Finite => {
                    let k_from_last = if history_len == 1 {
                        1
                    } else {
                        // Strictly previous states when possible; the cap is
                        // raised to 2 so the range is never empty.
                        let hi = history_len.min(config.max_staleness.max(2));
                        rng.range_inclusive(2, hi as u64) as usize
                    };
                    events.push(GameEvent::SnapshotView {
                        user: UserId(user),
                        k_from_last,
                    });
                }
            }
        }

        let (lo, hi) = config.shuffles_between_arrivals;
        let n_shuffles = rng.range_inclusive(u64::from(lo), u64::from(hi));
        for _ in 0..n_shuffles {
            events.push(GameEvent::Shuffle {
                perm: rng.permutation(config.n_users),
            });
            history_len += 1;
        }

        events.push(GameEvent::Arrival {
            user: UserId(arriving),
        });
        arrived[arriving] = true;
        history_len += 1; // the post-retrieval state joins the history
    }

    Ok(EventScript {
        config: config.clone(),
        turn_index,
        events,
    })
}

/// A single script-invariant violation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Index of the offending event; `None` for whole-script violations.
    pub event_index: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.event_index {
            Some(i) => write!(f, "event {i}: {}", self.message),
            None => write!(f, "script: {}", self.message),
        }
    }
}

/// Check every script invariant; an empty result means the script replays
/// without protocol violations.
pub fn validate_script(script: &EventScript) -> Vec<Violation> {
    let n_users = script.config.n_users;
    let mode = script.config.mode;
    let mut violations = Vec::new();
    let mut arrival_of: Vec<Option<usize>> = vec![None; n_users];
    let mut history_len = 1usize;

    let mut report = |index: Option<usize>, message: String| {
        violations.push(Violation {
            event_index: index,
            message,
        })
    };

    for (i, event) in script.events.iter().enumerate() {
        if let Some(user) = event.user() {
            if user.0 >= n_users {
                report(
                    Some(i),
                    format!("user {user} out of range (n_users = {n_users})"),
                );
                continue;
            }
            if let Some(at) = arrival_of[user.0] {
                if matches!(event, GameEvent::Arrival { .. }) {
                    report(
                        Some(i),
                        format!("duplicate arrival for user {user} (first at event {at})"),
                    );
                } else {
                    report(
                        Some(i),
                        format!("event involves user {user} after their arrival at event {at}"),
                    );
                }
                continue;
            }
        }
        match event {
            GameEvent::Shuffle { perm } => {
                if perm.len() != n_users {
                    report(
                        Some(i),
                        format!(
                            "shuffle permutation has length {} but the locker has {n_users} slots",
                            perm.len()
                        ),
                    );
                }
                history_len += 1;
            }
            GameEvent::MonitorVisit { .. } => {
                if mode != Mode::Zero {
                    report(Some(i), "monitor visit in a finite-mode script".into());
                }
            }
            GameEvent::SnapshotView { k_from_last, .. } => {
                if mode != Mode::Finite {
                    report(Some(i), "snapshot view in a zero-mode script".into());
                }
                if *k_from_last < 1 || *k_from_last > history_len {
                    report(Some(i), format!(
                        "k_from_last {k_from_last} outside [1, {history_len}] (history length at this point)"
                    ));
                }
            }
            GameEvent::Arrival { user } => {
                arrival_of[user.0] = Some(i);
                history_len += 1;
            }
        }
    }

    for (user, arrival) in arrival_of.iter().enumerate() {
        if arrival.is_none() {
            report(None, format!("user {user} never arrives"));
        }
    }

    violations
}

#[derive(Debug, Serialize, Deserialize)]
struct ScriptHeader {
    format: String,
    version: u32,
    config: ScriptConfig,
    turn_index: u64,
}

/// Write a script as line-delimited JSON: one header record, then one event
/// per line.
pub fn write_script<W: Write>(script: &EventScript, mut writer: W) -> Result<(), ScriptError> {
    let header = ScriptHeader {
        format: SCRIPT_FORMAT.to_string(),
        version: SCRIPT_VERSION,
        config: script.config.clone(),
        turn_index: script.turn_index,
    };
    serde_json::to_writer(&mut writer, &header)
        .map_err(|source| ScriptError::Parse { line: 1, source })?;
    writer.write_all(b"\n")?;
    for (i, event) in script.events.iter().enumerate() {
        serde_json::to_writer(&mut writer, event).map_err(|source| ScriptError::Parse {
            line: i + 2,
            source,
        })?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// Parse a script from the JSONL format produced by [`write_script`].
pub fn read_script<R: BufRead>(reader: R) -> Result<EventScript, ScriptError> {
    let mut lines = reader.lines().enumerate();
    let header: ScriptHeader = loop {
        match lines.next() {
            None => return Err(ScriptError::MissingHeader),
            Some((i, line)) => {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                break serde_json::from_str(&line).map_err(|source| ScriptError::Parse {
                    line: i + 1,
                    source,
                })?;
            }
        }
    };
    if header.format != SCRIPT_FORMAT || header.version != SCRIPT_VERSION {
        return Err(ScriptError::UnsupportedFormat {
            format: header.format,
            version: header.version,
        });
    }
    let mut events = Vec::new();
    for (i, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        events.push(
            serde_json::from_str(&line).map_err(|source| ScriptError::Parse {
                line: i + 1,
                source,
            })?,
        );
    }
    Ok(EventScript {
        config: header.config,
        turn_index: header.turn_index,
        events,
    })
}

/// Convenience: serialize to an in-memory JSONL string.
pub fn script_to_jsonl(script: &EventScript) -> String {
    let mut buf = Vec::new();
    write_script(script, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

/// Convenience: parse from an in-memory JSONL string.
pub fn script_from_jsonl(text: &str) -> Result<EventScript, ScriptError> {
    read_script(text.as_bytes())
}
