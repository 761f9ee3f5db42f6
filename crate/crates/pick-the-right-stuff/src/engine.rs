//! The physical game state machine: locker slots, shuffles, the
//! swap-on-retrieval protocol, and the append-only monitor history.
//!
//! All operations are pure: they take a state and return a new one, leaving
//! history management to the caller (the harness appends to
//! [`MonitorHistory`] after every shuffle and retrieval).

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Zero-based locker slot index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Position(pub usize);

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Identifies a user. User `i` stores their item at slot `i` at game start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UserId(pub usize);

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One locker slot: empty, or holding the item of a user.
pub type Slot = Option<UserId>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("permutation length {perm_len} does not match slot count {n_slots}")]
    PermutationLength { perm_len: usize, n_slots: usize },
    #[error("not a bijection on [0, {len}): {map:?}")]
    NotABijection { map: Vec<usize>, len: usize },
    #[error("user {user}'s item appears in more than one slot")]
    DuplicateItem { user: UserId },
    #[error("user {user} has no item in the locker (already retrieved?)")]
    ItemAbsent { user: UserId },
    #[error("predicted position {position} out of range for {n_slots} slots")]
    PredictionOutOfRange { position: usize, n_slots: usize },
    #[error("snapshot index {k} out of range for history of length {len}")]
    SnapshotOutOfRange { k: usize, len: usize },
    #[error("locker must have at least one slot")]
    EmptyLocker,
}

/// A bijection on `[0, n)`. Entry `i` is the destination slot of whatever
/// slot `i` currently holds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self, EngineError> {
        let len = map.len();
        let mut seen = vec![false; len];
        for &dest in &map {
            if dest >= len || seen[dest] {
                return Err(EngineError::NotABijection { map, len });
            }
            seen[dest] = true;
        }
        Ok(Self(map))
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Destination slot of the content currently at `from`.
    pub fn destination(&self, from: usize) -> usize {
        self.0[from]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = EngineError;

    fn try_from(map: Vec<usize>) -> Result<Self, Self::Error> {
        Permutation::new(map)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(perm: Permutation) -> Self {
        perm.0
    }
}

/// Whether the game is still running. The game finishes exactly when every
/// slot is empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GamePhase {
    Running,
    Finished,
}

/// The locker's contents: the single source of physical truth.
///
/// The slot count is fixed for the whole game; retrieved items leave their
/// slot empty, and emptied slots keep being displayed (and shuffled).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LockerState {
    slots: Vec<Slot>,
}

impl LockerState {
    /// Initial placement: user `i`'s item in slot `i`.
    pub fn initial(n_users: usize) -> Self {
        Self {
            slots: (0..n_users).map(|i| Some(UserId(i))).collect(),
        }
    }

    /// Build a state from raw slots, rejecting duplicate items.
    pub fn from_slots(slots: Vec<Slot>) -> Result<Self, EngineError> {
        if slots.is_empty() {
            return Err(EngineError::EmptyLocker);
        }
        let mut seen = std::collections::HashSet::new();
        for user in slots.iter().flatten() {
            if !seen.insert(user.0) {
                return Err(EngineError::DuplicateItem { user: *user });
            }
        }
        Ok(Self { slots })
    }

    pub fn n_slots(&self) -> usize {
        self.slots.len()
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    /// Slot currently holding `user`'s item, if it has not been retrieved.
    pub fn position_of(&self, user: UserId) -> Option<Position> {
        self.slots
            .iter()
            .position(|slot| *slot == Some(user))
            .map(Position)
    }

    pub fn is_all_empty(&self) -> bool {
        self.slots.iter().all(Option::is_none)
    }

    pub fn item_count(&self) -> usize {
        self.slots.iter().filter(|slot| slot.is_some()).count()
    }

    pub fn phase(&self) -> GamePhase {
        if self.is_all_empty() {
            GamePhase::Finished
        } else {
            GamePhase::Running
        }
    }
}

/// What happened when a user came to retrieve their item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetrievalOutcome {
    pub user: UserId,
    /// `None` when the agent's answer could not be parsed to an in-range
    /// position.
    pub predicted: Option<Position>,
    /// Where the user believed their item to be (where they actually went).
    pub believed: Position,
    /// Where the item physically was when the user arrived.
    pub true_position: Position,
    /// `predicted` was a valid position equal to `believed`.
    pub correct: bool,
    /// The slot left empty by this retrieval.
    pub vacated: Position,
}

/// Move every slot's content to its destination under `perm`.
///
/// Empty slots permute along with occupied ones. The caller appends the
/// result to the [`MonitorHistory`].
pub fn apply_shuffle(state: &LockerState, perm: &Permutation) -> Result<LockerState, EngineError> {
    if perm.len() != state.n_slots() {
        return Err(EngineError::PermutationLength {
            perm_len: perm.len(),
            n_slots: state.n_slots(),
        });
    }
    let mut slots: Vec<Slot> = vec![None; state.n_slots()];
    for (from, slot) in state.slots.iter().enumerate() {
        slots[perm.destination(from)] = *slot;
    }
    Ok(LockerState { slots })
}

/// Resolve a retrieval: swap the item at `predicted` with the user's item,
/// then remove the user's item from the locker.
///
/// With a valid `predicted`, the swap always executes as commanded (a no-op
/// when `predicted` already holds the item) and the item is then removed from
/// `predicted`; the prediction scores iff `predicted == believed`. With
/// `predicted == None` (unparseable answer) there is no swap: the item is
/// removed from its true position and the prediction scores nothing.
///
/// The caller appends the resulting state to the [`MonitorHistory`].
pub fn apply_retrieval(
    state: &LockerState,
    user: UserId,
    predicted: Option<Position>,
    believed: Position,
) -> Result<(LockerState, RetrievalOutcome), EngineError> {
    let true_position = state
        .position_of(user)
        .ok_or(EngineError::ItemAbsent { user })?;
    if let Some(p) = predicted {
        if p.0 >= state.n_slots() {
            return Err(EngineError::PredictionOutOfRange {
                position: p.0,
                n_slots: state.n_slots(),
            });
        }
    }

    let mut slots = state.slots.clone();
    let (correct, vacated) = match predicted {
        Some(p) => {
            slots.swap(p.0, true_position.0);
            slots[p.0] = None;
            (p == believed, p)
        }
        None => {
            slots[true_position.0] = None;
            (false, true_position)
        }
    };

    let outcome = RetrievalOutcome {
        user,
        predicted,
        believed,
        true_position,
        correct,
        vacated,
    };
    Ok((LockerState { slots }, outcome))
}

/// Every state the monitor has displayed, oldest first. Entries are appended
/// after the initial placement, after every shuffle, and after every
/// retrieval; they are never mutated or removed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonitorHistory {
    states: Vec<LockerState>,
}

impl MonitorHistory {
    pub fn new(initial: LockerState) -> Self {
        Self {
            states: vec![initial],
        }
    }

    pub fn push(&mut self, state: LockerState) {
        self.states.push(state);
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn latest(&self) -> &LockerState {
        self.states.last().expect("history holds the initial state")
    }

    pub fn states(&self) -> &[LockerState] {
        &self.states
    }
}

/// The `k`-th-to-last monitor state; `k = 1` is the most recent.
pub fn snapshot_from_last(history: &MonitorHistory, k: usize) -> Result<&LockerState, EngineError> {
    let len = history.len();
    if k == 0 || k > len {
        return Err(EngineError::SnapshotOutOfRange { k, len });
    }
    Ok(&history.states[len - k])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn item(u: usize) -> Slot {
        Some(UserId(u))
    }

    fn state(slots: Vec<Slot>) -> LockerState {
        LockerState::from_slots(slots).unwrap()
    }

    #[test]
    fn shuffle_moves_every_item_to_its_destination() {
        let start = LockerState::initial(3);
        let perm = Permutation::new(vec![2, 0, 1]).unwrap();
        let shuffled = apply_shuffle(&start, &perm).unwrap();
        // Position 0 now stores the item of user 1.
        assert_eq!(shuffled.slots(), &[item(1), item(2), item(0)]);
    }

    #[test]
    fn identity_shuffle_is_a_noop() {
        let start = state(vec![item(2), None, item(0)]);
        let shuffled = apply_shuffle(&start, &Permutation::identity(3)).unwrap();
        assert_eq!(shuffled, start);
    }

    #[test]
    fn empty_slots_permute_along_with_items() {
        let start = state(vec![None, item(2), None]);
        let perm = Permutation::new(vec![2, 0, 1]).unwrap();
        let shuffled = apply_shuffle(&start, &perm).unwrap();
        assert_eq!(shuffled.slots(), &[item(2), None, None]);
    }

    #[test]
    fn shuffle_rejects_wrong_length_and_non_bijections() {
        let start = LockerState::initial(3);
        let short = Permutation::new(vec![1, 0]).unwrap();
        assert!(matches!(
            apply_shuffle(&start, &short),
            Err(EngineError::PermutationLength { .. })
        ));
        assert!(matches!(
            Permutation::new(vec![0, 0, 1]),
            Err(EngineError::NotABijection { .. })
        ));
        assert!(matches!(
            Permutation::new(vec![0, 1, 3]),
            Err(EngineError::NotABijection { .. })
        ));
    }

    #[test]
    fn correct_retrieval_swaps_then_removes() {
        // User 1 believed slot 1; the item was actually at slot 2.
        let start = state(vec![item(2), item(0), item(1)]);
        let (next, outcome) =
            apply_retrieval(&start, UserId(1), Some(Position(1)), Position(1)).unwrap();
        assert_eq!(next.slots(), &[item(2), None, item(0)]);
        assert!(outcome.correct);
        assert_eq!(outcome.true_position, Position(2));
        assert_eq!(outcome.vacated, Position(1));
    }

    #[test]
    fn retrieval_at_true_position_is_a_noop_swap() {
        let start = state(vec![None, None, item(2)]);
        let (next, outcome) =
            apply_retrieval(&start, UserId(2), Some(Position(2)), Position(2)).unwrap();
        assert!(next.is_all_empty());
        assert!(outcome.correct);
        assert_eq!(outcome.vacated, Position(2));
    }

    #[test]
    fn wrong_prediction_still_executes_the_swap() {
        let start = state(vec![item(2), item(0), None]);
        let (next, outcome) =
            apply_retrieval(&start, UserId(0), Some(Position(0)), Position(1)).unwrap();
        assert_eq!(next.slots(), &[None, item(2), None]);
        assert!(!outcome.correct);
        assert_eq!(outcome.vacated, Position(0));
        assert_eq!(outcome.true_position, Position(1));
    }

    #[test]
    fn invalid_prediction_removes_from_true_position_without_swap() {
        let start = state(vec![item(2), item(0), None]);
        let (next, outcome) = apply_retrieval(&start, UserId(0), None, Position(1)).unwrap();
        assert_eq!(next.slots(), &[item(2), None, None]);
        assert!(!outcome.correct);
        assert_eq!(outcome.vacated, Position(1));
    }

    #[test]
    fn retrieving_twice_is_a_protocol_violation() {
        let start = state(vec![item(2), item(0), None]);
        let err = apply_retrieval(&start, UserId(1), Some(Position(0)), Position(1)).unwrap_err();
        assert_eq!(err, EngineError::ItemAbsent { user: UserId(1) });
    }

    #[test]
    fn snapshot_indexing_counts_from_the_end() {
        let s0 = LockerState::initial(3);
        let s1 = state(vec![item(1), item(2), item(0)]);
        let s2 = state(vec![item(2), item(0), item(1)]);
        let s3 = state(vec![item(2), None, item(0)]);
        let mut history = MonitorHistory::new(s0.clone());
        history.push(s1);
        history.push(s2.clone());
        history.push(s3.clone());

        assert_eq!(snapshot_from_last(&history, 2).unwrap(), &s2);
        assert_eq!(snapshot_from_last(&history, 1).unwrap(), &s3);
        assert_eq!(snapshot_from_last(&history, 4).unwrap(), &s0);
        assert!(snapshot_from_last(&history, 0).is_err());
        assert!(snapshot_from_last(&history, 5).is_err());

        let single = MonitorHistory::new(s0.clone());
        assert_eq!(snapshot_from_last(&single, 1).unwrap(), &s0);
    }

    #[test]
    fn phase_finishes_exactly_when_all_slots_are_empty() {
        let mut locker = LockerState::initial(2);
        assert_eq!(locker.phase(), GamePhase::Running);
        for user in 0..2 {
            let believed = locker.position_of(UserId(user)).unwrap();
            let (next, _) =
                apply_retrieval(&locker, UserId(user), Some(believed), believed).unwrap();
            locker = next;
        }
        assert_eq!(locker.phase(), GamePhase::Finished);
    }

    #[test]
    fn from_slots_rejects_duplicates() {
        assert!(matches!(
            LockerState::from_slots(vec![item(1), item(1)]),
            Err(EngineError::DuplicateItem { .. })
        ));
    }
}
