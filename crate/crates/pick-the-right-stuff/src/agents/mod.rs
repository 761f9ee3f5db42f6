//! The agent contract and its implementations.
//!
//! An [`AgentSession`] owns the conversation transcript for one game and
//! forwards fragments to an [`AgentBehavior`]: a remote LLM speaking a
//! chat-completions endpoint ([`llm`]), a human at a terminal, or one of the
//! scripted baselines (oracle, random, frozen-belief, fixed answers).

pub mod llm;

use std::collections::VecDeque;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::beliefs::{BeliefError, BeliefLedger};
use crate::engine::{Position, UserId};
use crate::narrative::{FragmentKind, PromptFragment};
use crate::rng::DetRng;

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("agent session is closed")]
    Closed,
    #[error("fragment of kind {0:?} is not a question")]
    NotAQuestion(FragmentKind),
    #[error("scripted agent ran out of answers")]
    AnswersExhausted,
    #[error("transport failure talking to {endpoint}: {message}")]
    Transport { endpoint: String, message: String },
    #[error(transparent)]
    Belief(#[from] BeliefError),
    #[error("terminal i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// Who produced a transcript entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    Game,
    Agent,
}

/// One entry of a game transcript.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub role: Role,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub kind: Option<FragmentKind>,
    pub text: String,
}

/// An agent's answer to one question.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prediction {
    /// Parsed position, or `None` when `raw` holds no in-range integer.
    pub value: Option<Position>,
    /// The answer exactly as the agent produced it.
    pub raw: String,
    /// The transport failed after all retries; `raw` is empty and the
    /// question scores as incorrect.
    pub transport_error: bool,
}

/// Scan `raw` left to right and return the first maximal decimal integer
/// token whose value lies in `[0, n_slots)`; out-of-range tokens are
/// skipped. Total: any input yields a position or `None`.
pub fn parse_prediction(raw: &str, n_slots: usize) -> Option<Position> {
    let mut digits: Option<u128> = None;
    for c in raw.chars() {
        match (c.to_digit(10), digits) {
            (Some(d), acc) => {
                let acc = acc.unwrap_or(0);
                digits = Some(acc.saturating_mul(10).saturating_add(u128::from(d)));
            }
            (None, Some(value)) => {
                if value < n_slots as u128 {
                    return Some(Position(value as usize));
                }
                digits = None;
            }
            (None, None) => {}
        }
    }
    match digits {
        Some(value) if value < n_slots as u128 => Some(Position(value as usize)),
        _ => None,
    }
}

/// Ground-truth baseline: answer exactly where the user will go.
pub fn oracle_predict(ledger: &BeliefLedger, user: UserId) -> Result<Position, BeliefError> {
    ledger.believed_position(user)
}

/// Everything a behavior may consult when answering; scripted baselines use
/// the ledger hook, text-driven agents use the transcript alone.
pub struct QuestionCtx<'a> {
    pub user: UserId,
    pub n_slots: usize,
    pub ledger: &'a BeliefLedger,
}

/// An answer source plugged into an [`AgentSession`].
pub trait AgentBehavior: Send {
    /// Called for every fragment as it is appended (questions included).
    fn on_fragment(&mut self, _fragment: &PromptFragment) -> Result<(), AgentError> {
        Ok(())
    }

    /// Produce the raw answer to the question that was just appended to
    /// `transcript`.
    fn answer(
        &mut self,
        transcript: &[TranscriptEntry],
        ctx: &QuestionCtx<'_>,
    ) -> Result<String, AgentError>;
}

/// Stable identification of an agent for reports and output paths.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentIdentity {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub model: Option<String>,
}

impl AgentIdentity {
    pub fn new(kind: &str) -> Self {
        Self {
            kind: kind.to_string(),
            model: None,
        }
    }

    pub fn with_model(kind: &str, model: &str) -> Self {
        Self {
            kind: kind.to_string(),
            model: Some(model.to_string()),
        }
    }

    /// Directory-friendly label: the model name when one exists, otherwise
    /// the agent kind.
    pub fn label(&self) -> String {
        let raw = self.model.as_deref().unwrap_or(&self.kind);
        raw.replace(['/', '\\'], "_")
    }
}

/// One agent's side of one game: identity, transcript, and behavior.
pub struct AgentSession {
    identity: AgentIdentity,
    transcript: Vec<TranscriptEntry>,
    closed: bool,
    behavior: Box<dyn AgentBehavior>,
}

impl AgentSession {
    pub fn new(identity: AgentIdentity, behavior: Box<dyn AgentBehavior>) -> Self {
        Self {
            identity,
            transcript: Vec::new(),
            closed: false,
            behavior,
        }
    }

    pub fn identity(&self) -> &AgentIdentity {
        &self.identity
    }

    pub fn transcript(&self) -> &[TranscriptEntry] {
        &self.transcript
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Stream a fragment to the agent without requesting an answer.
    pub fn notify(&mut self, fragment: &PromptFragment) -> Result<(), AgentError> {
        if self.closed {
            return Err(AgentError::Closed);
        }
        self.behavior.on_fragment(fragment)?;
        let role = match fragment.kind {
            FragmentKind::Intro => Role::System,
            _ => Role::Game,
        };
        self.transcript.push(TranscriptEntry {
            role,
            kind: Some(fragment.kind),
            text: fragment.text.clone(),
        });
        Ok(())
    }

    /// Put a question to the agent and record both the question and the raw
    /// answer. A transport failure after all retries yields a `Prediction`
    /// with `transport_error` set rather than an error, so the game can
    /// continue and score the question as incorrect.
    pub fn predict(
        &mut self,
        question: &PromptFragment,
        ctx: &QuestionCtx<'_>,
    ) -> Result<Prediction, AgentError> {
        if self.closed {
            return Err(AgentError::Closed);
        }
        if question.kind != FragmentKind::Question {
            return Err(AgentError::NotAQuestion(question.kind));
        }
        self.behavior.on_fragment(question)?;
        self.transcript.push(TranscriptEntry {
            role: Role::Game,
            kind: Some(question.kind),
            text: question.text.clone(),
        });

        let (raw, transport_error) = match self.behavior.answer(&self.transcript, ctx) {
            Ok(raw) => (raw, false),
            Err(AgentError::Transport { .. }) => (String::new(), true),
            Err(other) => return Err(other),
        };
        self.transcript.push(TranscriptEntry {
            role: Role::Agent,
            kind: None,
            text: raw.clone(),
        });
        Ok(Prediction {
            value: parse_prediction(&raw, ctx.n_slots),
            raw,
            transport_error,
        })
    }

    pub fn close(&mut self) {
        self.closed = true;
    }

    /// The transcript as plain text: game fragments verbatim, each agent
    /// answer on its own line — the same bytes an interactive session shows.
    pub fn rendered_transcript(&self) -> String {
        let mut out = String::new();
        for entry in &self.transcript {
            match entry.role {
                Role::System | Role::Game => out.push_str(&entry.text),
                Role::Agent => {
                    out.push_str(entry.text.trim_end_matches(['\r', '\n']));
                    out.push('\n');
                }
            }
        }
        out
    }
}

/// Always answers the user's ground-truth believed position.
pub struct OracleBehavior;

impl AgentBehavior for OracleBehavior {
    fn answer(
        &mut self,
        _transcript: &[TranscriptEntry],
        ctx: &QuestionCtx<'_>,
    ) -> Result<String, AgentError> {
        Ok(oracle_predict(ctx.ledger, ctx.user)?.to_string())
    }
}

/// Always answers the user's initial position, ignoring every observation.
pub struct FrozenBeliefBehavior;

impl AgentBehavior for FrozenBeliefBehavior {
    fn answer(
        &mut self,
        _transcript: &[TranscriptEntry],
        ctx: &QuestionCtx<'_>,
    ) -> Result<String, AgentError> {
        Ok(ctx.user.to_string())
    }
}

/// Answers uniformly at random over the slot indices.
pub struct RandomBehavior {
    rng: DetRng,
}

impl RandomBehavior {
    pub fn new(rng: DetRng) -> Self {
        Self { rng }
    }

    pub fn seeded(master_seed: u64, turn_index: u64) -> Self {
        Self::new(DetRng::for_random_agent(master_seed, turn_index))
    }
}

impl AgentBehavior for RandomBehavior {
    fn answer(
        &mut self,
        _transcript: &[TranscriptEntry],
        ctx: &QuestionCtx<'_>,
    ) -> Result<String, AgentError> {
        Ok(self.rng.index(ctx.n_slots).to_string())
    }
}

/// Replays a fixed list of answers, one per question.
pub struct ScriptedBehavior {
    answers: VecDeque<String>,
}

impl ScriptedBehavior {
    pub fn new<I, S>(answers: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            answers: answers.into_iter().map(Into::into).collect(),
        }
    }
}

impl AgentBehavior for ScriptedBehavior {
    fn answer(
        &mut self,
        _transcript: &[TranscriptEntry],
        _ctx: &QuestionCtx<'_>,
    ) -> Result<String, AgentError> {
        self.answers.pop_front().ok_or(AgentError::AnswersExhausted)
    }
}

enum HumanInput {
    /// Reads through the process-global stdin buffer, so sessions created
    /// one after another (and the play loop's own prompt reads) never lose
    /// buffered lines to each other.
    Stdio,
    Reader(Box<dyn BufRead + Send>),
}

/// Prints every fragment and reads one answer line per question.
pub struct HumanBehavior {
    input: HumanInput,
    output: Box<dyn Write + Send>,
}

impl HumanBehavior {
    pub fn new(input: Box<dyn BufRead + Send>, output: Box<dyn Write + Send>) -> Self {
        Self {
            input: HumanInput::Reader(input),
            output,
        }
    }

    pub fn stdio() -> Self {
        Self {
            input: HumanInput::Stdio,
            output: Box::new(std::io::stdout()),
        }
    }
}

impl AgentBehavior for HumanBehavior {
    fn on_fragment(&mut self, fragment: &PromptFragment) -> Result<(), AgentError> {
        self.output.write_all(fragment.text.as_bytes())?;
        self.output.flush()?;
        Ok(())
    }

    fn answer(
        &mut self,
        _transcript: &[TranscriptEntry],
        _ctx: &QuestionCtx<'_>,
    ) -> Result<String, AgentError> {
        let mut line = String::new();
        let read = match &mut self.input {
            HumanInput::Stdio => std::io::stdin().read_line(&mut line)?,
            HumanInput::Reader(reader) => reader.read_line(&mut line)?,
        };
        if read == 0 {
            return Err(AgentError::Io(std::io::Error::new(
                std::io::ErrorKind::UnexpectedEof,
                "input closed before an answer was given",
            )));
        }
        Ok(line.trim_end_matches(['\r', '\n']).to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beliefs::init_beliefs;
    use crate::narrative::{render_event, render_intro};
    use crate::scheduler::GameEvent;
    use crate::Mode;

    fn question_fragment(user: usize) -> PromptFragment {
        render_event(
            &GameEvent::Arrival { user: UserId(user) },
            &crate::engine::LockerState::initial(3),
        )
    }

    #[test]
    fn parser_accepts_plain_and_noisy_answers() {
        assert_eq!(parse_prediction("2", 3), Some(Position(2)));
        assert_eq!(parse_prediction("  2\n", 3), Some(Position(2)));
        assert_eq!(
            parse_prediction("I believe position 0 because...", 3),
            Some(Position(0))
        );
        assert_eq!(parse_prediction("position 5 then 1", 3), Some(Position(1)));
        assert_eq!(parse_prediction("no idea", 3), None);
        assert_eq!(parse_prediction("", 3), None);
        // "11" is one token, not two in-range 1s.
        assert_eq!(parse_prediction("11", 3), None);
        assert_eq!(parse_prediction("11 then 0", 3), Some(Position(0)));
        // Absurdly long digit runs must not overflow.
        let huge = "9".repeat(500);
        assert_eq!(parse_prediction(&huge, 3), None);
        assert_eq!(parse_prediction("-1", 3), Some(Position(1)));
    }

    #[test]
    fn notify_appends_and_close_seals_the_session() {
        let mut session = AgentSession::new(AgentIdentity::new("oracle"), Box::new(OracleBehavior));
        session.notify(&render_intro(Mode::Zero)).unwrap();
        session
            .notify(&render_event(
                &GameEvent::MonitorVisit { user: UserId(0) },
                &crate::engine::LockerState::initial(3),
            ))
            .unwrap();
        assert_eq!(session.transcript().len(), 2);
        assert_eq!(session.transcript()[0].role, Role::System);
        assert_eq!(session.transcript()[1].role, Role::Game);

        session.close();
        assert!(matches!(
            session.notify(&render_intro(Mode::Zero)),
            Err(AgentError::Closed)
        ));
    }

    #[test]
    fn predict_requires_a_question_fragment() {
        let mut session = AgentSession::new(AgentIdentity::new("oracle"), Box::new(OracleBehavior));
        let ledger = init_beliefs(3).unwrap();
        let ctx = QuestionCtx {
            user: UserId(0),
            n_slots: 3,
            ledger: &ledger,
        };
        assert!(matches!(
            session.predict(&render_intro(Mode::Zero), &ctx),
            Err(AgentError::NotAQuestion(FragmentKind::Intro))
        ));
    }

    #[test]
    fn oracle_answers_the_ledger_position() {
        let mut ledger = init_beliefs(3).unwrap();
        let shown = crate::engine::LockerState::from_slots(vec![
            Some(UserId(2)),
            Some(UserId(0)),
            Some(UserId(1)),
        ])
        .unwrap();
        ledger.observe_snapshot(UserId(0), &shown).unwrap();

        let mut session = AgentSession::new(AgentIdentity::new("oracle"), Box::new(OracleBehavior));
        let ctx = QuestionCtx {
            user: UserId(0),
            n_slots: 3,
            ledger: &ledger,
        };
        let prediction = session.predict(&question_fragment(0), &ctx).unwrap();
        assert_eq!(prediction.value, Some(Position(1)));
        assert_eq!(prediction.raw, "1");
        // Question then answer, in order.
        assert_eq!(session.transcript().len(), 2);
        assert_eq!(session.transcript()[1].role, Role::Agent);
    }

    #[test]
    fn frozen_behavior_answers_the_initial_position() {
        let ledger = init_beliefs(5).unwrap();
        let mut session =
            AgentSession::new(AgentIdentity::new("frozen"), Box::new(FrozenBeliefBehavior));
        let ctx = QuestionCtx {
            user: UserId(3),
            n_slots: 5,
            ledger: &ledger,
        };
        let prediction = session.predict(&question_fragment(3), &ctx).unwrap();
        assert_eq!(prediction.value, Some(Position(3)));
    }

    #[test]
    fn random_behavior_is_seed_deterministic_and_in_range() {
        let ledger = init_beliefs(5).unwrap();
        let mut a = RandomBehavior::seeded(9, 0);
        let mut b = RandomBehavior::seeded(9, 0);
        let ctx = QuestionCtx {
            user: UserId(0),
            n_slots: 5,
            ledger: &ledger,
        };
        for _ in 0..20 {
            let x = a.answer(&[], &ctx).unwrap();
            assert_eq!(x, b.answer(&[], &ctx).unwrap());
            let v: usize = x.parse().unwrap();
            assert!(v < 5);
        }
    }

    #[test]
    fn scripted_behavior_errors_when_exhausted() {
        let ledger = init_beliefs(3).unwrap();
        let mut session = AgentSession::new(
            AgentIdentity::new("scripted"),
            Box::new(ScriptedBehavior::new(["1"])),
        );
        let ctx = QuestionCtx {
            user: UserId(1),
            n_slots: 3,
            ledger: &ledger,
        };
        let prediction = session.predict(&question_fragment(1), &ctx).unwrap();
        assert_eq!(prediction.value, Some(Position(1)));
        assert!(matches!(
            session.predict(&question_fragment(2), &ctx),
            Err(AgentError::AnswersExhausted)
        ));
    }

    #[test]
    fn human_behavior_prints_fragments_and_reads_lines() {
        let ledger = init_beliefs(3).unwrap();
        let input = Box::new(std::io::Cursor::new(b"2\n".to_vec()));
        let output: Vec<u8> = Vec::new();
        let mut session = AgentSession::new(
            AgentIdentity::new("human"),
            Box::new(HumanBehavior::new(input, Box::new(output))),
        );
        let ctx = QuestionCtx {
            user: UserId(2),
            n_slots: 3,
            ledger: &ledger,
        };
        let prediction = session.predict(&question_fragment(2), &ctx).unwrap();
        assert_eq!(prediction.value, Some(Position(2)));
        assert_eq!(prediction.raw, "2");
    }

    #[test]
    fn rendered_transcript_places_answers_on_their_own_line() {
        let ledger = init_beliefs(3).unwrap();
        let mut session = AgentSession::new(
            AgentIdentity::new("scripted"),
            Box::new(ScriptedBehavior::new(["1"])),
        );
        session.notify(&render_intro(Mode::Zero)).unwrap();
        let ctx = QuestionCtx {
            user: UserId(1),
            n_slots: 3,
            ledger: &ledger,
        };
        session.predict(&question_fragment(1), &ctx).unwrap();
        let text = session.rendered_transcript();
        assert!(text.contains("Please make your prediction:\n1\n"));
    }
}
