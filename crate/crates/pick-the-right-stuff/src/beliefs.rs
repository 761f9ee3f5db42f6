//! The ground-truth belief oracle.
//!
//! Users always retrieve their item from the position they *last* saw it in:
//! their initial placement, or whatever state they most recently observed
//! (live monitor in Zero mode, historical snapshot in Finite mode). The
//! ledger tracks exactly that, one position per user, and is what the scoring
//! rule compares predictions against.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{LockerState, Position, UserId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BeliefError {
    #[error("no such user {user} (ledger holds {n_users} users)")]
    NoSuchUser { user: UserId, n_users: usize },
    #[error("user {user} has already retrieved their item")]
    AlreadyRetrieved { user: UserId },
    #[error("user {user}'s item is absent from the observed state")]
    ItemAbsent { user: UserId },
    #[error("a game needs at least one user")]
    NoUsers,
}

/// Per-user last-believed item position. `None` means the user has retrieved
/// their item and left the game.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BeliefLedger {
    believed: Vec<Option<Position>>,
}

/// Initial beliefs: user `i` stored their item at slot `i` and knows it.
pub fn init_beliefs(n_users: usize) -> Result<BeliefLedger, BeliefError> {
    if n_users == 0 {
        return Err(BeliefError::NoUsers);
    }
    Ok(BeliefLedger {
        believed: (0..n_users).map(|i| Some(Position(i))).collect(),
    })
}

impl BeliefLedger {
    pub fn n_users(&self) -> usize {
        self.believed.len()
    }

    fn check_user(&self, user: UserId) -> Result<(), BeliefError> {
        if user.0 >= self.believed.len() {
            return Err(BeliefError::NoSuchUser {
                user,
                n_users: self.believed.len(),
            });
        }
        Ok(())
    }

    fn observe(&mut self, user: UserId, seen: &LockerState) -> Result<(), BeliefError> {
        self.check_user(user)?;
        if self.believed[user.0].is_none() {
            return Err(BeliefError::AlreadyRetrieved { user });
        }
        let position = seen
            .position_of(user)
            .ok_or(BeliefError::ItemAbsent { user })?;
        self.believed[user.0] = Some(position);
        Ok(())
    }

    /// The user looks at the live monitor and sees where their item is now.
    pub fn observe_monitor(
        &mut self,
        user: UserId,
        current: &LockerState,
    ) -> Result<(), BeliefError> {
        self.observe(user, current)
    }

    /// The user looks at a historical snapshot and takes the item's position
    /// in *that* state as its current one.
    pub fn observe_snapshot(
        &mut self,
        user: UserId,
        shown: &LockerState,
    ) -> Result<(), BeliefError> {
        self.observe(user, shown)
    }

    /// Where the user will go to retrieve their item.
    pub fn believed_position(&self, user: UserId) -> Result<Position, BeliefError> {
        self.check_user(user)?;
        self.believed[user.0].ok_or(BeliefError::AlreadyRetrieved { user })
    }

    /// Record that the user has retrieved their item and left.
    pub fn mark_retrieved(&mut self, user: UserId) -> Result<(), BeliefError> {
        self.check_user(user)?;
        if self.believed[user.0].is_none() {
            return Err(BeliefError::AlreadyRetrieved { user });
        }
        self.believed[user.0] = None;
        Ok(())
    }

    pub fn is_retrieved(&self, user: UserId) -> Result<bool, BeliefError> {
        self.check_user(user)?;
        Ok(self.believed[user.0].is_none())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::LockerState;

    fn item(u: usize) -> Option<UserId> {
        Some(UserId(u))
    }

    #[test]
    fn initial_beliefs_match_the_placement_rule() {
        for n in [1, 3, 5] {
            let ledger = init_beliefs(n).unwrap();
            for u in 0..n {
                assert_eq!(ledger.believed_position(UserId(u)).unwrap(), Position(u));
            }
        }
        assert_eq!(init_beliefs(0).unwrap_err(), BeliefError::NoUsers);
    }

    #[test]
    fn monitor_observation_updates_only_the_observer() {
        let mut ledger = init_beliefs(3).unwrap();
        let current = LockerState::from_slots(vec![None, item(2), item(0)]).unwrap();
        ledger.observe_monitor(UserId(0), &current).unwrap();
        assert_eq!(ledger.believed_position(UserId(0)).unwrap(), Position(2));
        // Everyone else keeps their previous belief.
        assert_eq!(ledger.believed_position(UserId(1)).unwrap(), Position(1));
        assert_eq!(ledger.believed_position(UserId(2)).unwrap(), Position(2));
    }

    #[test]
    fn observing_the_item_where_you_left_it_changes_nothing() {
        let mut ledger = init_beliefs(3).unwrap();
        let current = LockerState::initial(3);
        ledger.observe_monitor(UserId(1), &current).unwrap();
        assert_eq!(ledger.believed_position(UserId(1)).unwrap(), Position(1));
    }

    #[test]
    fn monitor_observation_is_a_direct_lookup() {
        let mut ledger = init_beliefs(3).unwrap();
        let current = LockerState::from_slots(vec![item(2), None, None]).unwrap();
        ledger.observe_monitor(UserId(2), &current).unwrap();
        assert_eq!(ledger.believed_position(UserId(2)).unwrap(), Position(0));
    }

    #[test]
    fn snapshot_observation_uses_the_shown_state() {
        let mut ledger = init_beliefs(3).unwrap();
        let shown = LockerState::from_slots(vec![item(2), item(0), item(1)]).unwrap();
        ledger.observe_snapshot(UserId(0), &shown).unwrap();
        assert_eq!(ledger.believed_position(UserId(0)).unwrap(), Position(1));

        let old = LockerState::from_slots(vec![item(1), None, None]).unwrap();
        ledger.observe_snapshot(UserId(1), &old).unwrap();
        assert_eq!(ledger.believed_position(UserId(1)).unwrap(), Position(0));
    }

    #[test]
    fn snapshot_of_the_initial_placement_is_a_fixed_point() {
        let mut ledger = init_beliefs(4).unwrap();
        let initial = LockerState::initial(4);
        for u in 0..4 {
            ledger.observe_snapshot(UserId(u), &initial).unwrap();
            assert_eq!(ledger.believed_position(UserId(u)).unwrap(), Position(u));
        }
    }

    #[test]
    fn retrieved_users_cannot_observe_or_be_queried() {
        let mut ledger = init_beliefs(2).unwrap();
        ledger.mark_retrieved(UserId(0)).unwrap();
        assert!(ledger.is_retrieved(UserId(0)).unwrap());
        assert_eq!(
            ledger.believed_position(UserId(0)).unwrap_err(),
            BeliefError::AlreadyRetrieved { user: UserId(0) }
        );
        let current = LockerState::from_slots(vec![item(0), item(1)]).unwrap();
        assert!(ledger.observe_monitor(UserId(0), &current).is_err());
        assert!(ledger.mark_retrieved(UserId(0)).is_err());
    }

    #[test]
    fn observing_a_state_missing_the_item_is_a_protocol_violation() {
        let mut ledger = init_beliefs(2).unwrap();
        let current = LockerState::from_slots(vec![None, item(1)]).unwrap();
        assert_eq!(
            ledger.observe_monitor(UserId(0), &current).unwrap_err(),
            BeliefError::ItemAbsent { user: UserId(0) }
        );
    }
}
