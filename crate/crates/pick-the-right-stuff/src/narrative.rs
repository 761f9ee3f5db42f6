//! Renders game events into the exact English transcript shown to agents.
//!
//! All wording lives in the template files under `templates/`; they are a
//! versioned part of the benchmark contract and are embedded at compile time
//! so the shipped text is auditable and diffable. Rendering only substitutes
//! `{name}` placeholders — including the (intentional) stylistic quirks of
//! the reference transcripts, such as "stores the item of User 1" next to
//! "box is empty".

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::engine::{LockerState, RetrievalOutcome};
use crate::scheduler::GameEvent;
use crate::Mode;

/// Bumped whenever any template text changes.
pub const TEMPLATE_VERSION: &str = "1";

const INTRO_ZERO: &str = include_str!("../templates/intro_zero.txt");
const INTRO_FINITE: &str = include_str!("../templates/intro_finite.txt");
const GAME_BEGIN: &str = include_str!("../templates/game_begin.txt");
const PLACEMENT: &str = include_str!("../templates/placement.txt");
const SHUFFLE: &str = include_str!("../templates/shuffle.txt");
const MONITOR_VISIT: &str = include_str!("../templates/monitor_visit.txt");
const SNAPSHOT_VIEW: &str = include_str!("../templates/snapshot_view.txt");
const QUESTION: &str = include_str!("../templates/question.txt");
const FEEDBACK_CORRECT: &str = include_str!("../templates/feedback_correct.txt");
const FEEDBACK_INCORRECT: &str = include_str!("../templates/feedback_incorrect.txt");
const FEEDBACK_INVALID: &str = include_str!("../templates/feedback_invalid.txt");
const GAME_OVER: &str = include_str!("../templates/game_over.txt");
const STATE_OCCUPIED: &str = include_str!("../templates/state_occupied.txt");
const STATE_EMPTY: &str = include_str!("../templates/state_empty.txt");

const ALL_TEMPLATES: &[(&str, &str)] = &[
    ("intro_zero", INTRO_ZERO),
    ("intro_finite", INTRO_FINITE),
    ("game_begin", GAME_BEGIN),
    ("placement", PLACEMENT),
    ("shuffle", SHUFFLE),
    ("monitor_visit", MONITOR_VISIT),
    ("snapshot_view", SNAPSHOT_VIEW),
    ("question", QUESTION),
    ("feedback_correct", FEEDBACK_CORRECT),
    ("feedback_incorrect", FEEDBACK_INCORRECT),
    ("feedback_invalid", FEEDBACK_INVALID),
    ("game_over", GAME_OVER),
    ("state_occupied", STATE_OCCUPIED),
    ("state_empty", STATE_EMPTY),
];

/// SHA-256 over every template, recorded in reports so a transcript can be
/// tied to the exact benchmark text it was produced with.
pub fn template_fingerprint() -> String {
    let mut hasher = Sha256::new();
    for (name, text) in ALL_TEMPLATES {
        hasher.update(name.as_bytes());
        hasher.update([0]);
        hasher.update(text.as_bytes());
        hasher.update([0]);
    }
    hex_string(&hasher.finalize())
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// What role a piece of rendered text plays in the conversation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FragmentKind {
    Intro,
    StateReport,
    EventReport,
    Question,
    Feedback,
    GameOver,
}

/// A rendered block of transcript text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptFragment {
    pub kind: FragmentKind,
    pub text: String,
}

/// English ordinal with suffix: 0th, 1st, 2nd, 3rd, 4th, ... 11th-13th take
/// "th", 21st takes "st".
pub fn ordinal(n: usize) -> String {
    let suffix = match (n % 10, n % 100) {
        (_, 11..=13) => "th",
        (1, _) => "st",
        (2, _) => "nd",
        (3, _) => "rd",
        _ => "th",
    };
    format!("{n}{suffix}")
}

fn fill(template: &str, values: &[(&str, &str)]) -> String {
    let mut out = template.to_string();
    for (name, value) in values {
        out = out.replace(&format!("{{{name}}}"), value);
    }
    out
}

/// One line per slot, ascending, exactly as the monitor displays them.
pub fn state_report(state: &LockerState) -> String {
    let lines: Vec<String> = state
        .slots()
        .iter()
        .enumerate()
        .map(|(i, slot)| {
            let position_ordinal = ordinal(i);
            match slot {
                Some(user) => fill(
                    STATE_OCCUPIED,
                    &[
                        ("position_ordinal", position_ordinal.as_str()),
                        ("user", user.to_string().as_str()),
                    ],
                ),
                None => fill(
                    STATE_EMPTY,
                    &[("position_ordinal", position_ordinal.as_str())],
                ),
            }
        })
        .collect();
    lines.join("\n")
}

/// The rules preamble for a mode.
pub fn render_intro(mode: Mode) -> PromptFragment {
    let text = match mode {
        Mode::Zero => INTRO_ZERO,
        Mode::Finite => INTRO_FINITE,
    };
    PromptFragment {
        kind: FragmentKind::Intro,
        text: text.to_string(),
    }
}

/// The "Game Begins!" block with the initial placement report.
pub fn render_game_begin(n_users: usize) -> PromptFragment {
    // Each placement sentence is followed by a single space, the last one
    // included, matching the reference transcripts byte for byte.
    let placements: String = (0..n_users)
        .map(|u| {
            let mut s = fill(
                PLACEMENT,
                &[
                    ("user", u.to_string().as_str()),
                    ("position_ordinal", ordinal(u).as_str()),
                ],
            );
            s.push(' ');
            s
        })
        .collect();
    PromptFragment {
        kind: FragmentKind::StateReport,
        text: fill(
            GAME_BEGIN,
            &[
                ("n_users", n_users.to_string().as_str()),
                ("placements", placements.as_str()),
            ],
        ),
    }
}

/// Narrate one event. `state_after` is the engine state once the event has
/// been applied (for events that change nothing it is simply the current
/// state).
pub fn render_event(event: &GameEvent, state_after: &LockerState) -> PromptFragment {
    match event {
        GameEvent::Shuffle { .. } => PromptFragment {
            kind: FragmentKind::StateReport,
            text: fill(
                SHUFFLE,
                &[("state_report", state_report(state_after).as_str())],
            ),
        },
        GameEvent::MonitorVisit { user } => PromptFragment {
            kind: FragmentKind::EventReport,
            text: fill(MONITOR_VISIT, &[("user", user.to_string().as_str())]),
        },
        GameEvent::SnapshotView { user, k_from_last } => PromptFragment {
            kind: FragmentKind::EventReport,
            text: fill(
                SNAPSHOT_VIEW,
                &[
                    ("user", user.to_string().as_str()),
                    ("k_ordinal", ordinal(*k_from_last).as_str()),
                ],
            ),
        },
        GameEvent::Arrival { user } => PromptFragment {
            kind: FragmentKind::Question,
            text: fill(QUESTION, &[("user", user.to_string().as_str())]),
        },
    }
}

/// Narrate a retrieval outcome plus the post-retrieval state report.
pub fn render_feedback(outcome: &RetrievalOutcome, state_after: &LockerState) -> PromptFragment {
    let report = state_report(state_after);
    let text = match outcome.predicted {
        Some(predicted) if outcome.correct => fill(
            FEEDBACK_CORRECT,
            &[
                ("predicted_ordinal", ordinal(predicted.0).as_str()),
                ("true_ordinal", ordinal(outcome.true_position.0).as_str()),
                ("user", outcome.user.to_string().as_str()),
                ("state_report", report.as_str()),
            ],
        ),
        Some(_) => fill(
            FEEDBACK_INCORRECT,
            &[
                ("user", outcome.user.to_string().as_str()),
                ("state_report", report.as_str()),
            ],
        ),
        None => fill(
            FEEDBACK_INVALID,
            &[
                ("user", outcome.user.to_string().as_str()),
                ("state_report", report.as_str()),
            ],
        ),
    };
    PromptFragment {
        kind: FragmentKind::Feedback,
        text,
    }
}

/// The closing block: correct count, final score, and the play-again prompt.
pub fn render_game_over(correct_count: usize, final_score: &str) -> PromptFragment {
    PromptFragment {
        kind: FragmentKind::GameOver,
        text: fill(
            GAME_OVER,
            &[
                ("correct_count", correct_count.to_string().as_str()),
                ("final_score", final_score),
            ],
        ),
    }
}
