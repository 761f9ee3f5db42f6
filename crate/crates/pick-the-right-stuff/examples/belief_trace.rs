//! Walk a finite-mode script event by event, printing the physical truth
//! next to what each user believes — the gap between the two columns is the
//! false-belief reasoning the manager is scored on.
//!
//! Run: `cargo run --example belief_trace [seed]`

use anyhow::Result;

use pick_the_right_stuff::beliefs::init_beliefs;
use pick_the_right_stuff::engine::{
    apply_retrieval, apply_shuffle, snapshot_from_last, LockerState, MonitorHistory, UserId,
};
use pick_the_right_stuff::scheduler::{generate_script, GameEvent, ScriptConfig};
use pick_the_right_stuff::Mode;

fn truth(locker: &LockerState) -> String {
    locker
        .slots()
        .iter()
        .map(|s| match s {
            Some(u) => u.to_string(),
            None => "-".to_string(),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn beliefs(ledger: &pick_the_right_stuff::beliefs::BeliefLedger, n: usize) -> String {
    (0..n)
        .map(|u| match ledger.believed_position(UserId(u)) {
            Ok(p) => format!("{u}@{p}"),
            Err(_) => format!("{u}:gone"),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn main() -> Result<()> {
    let seed: u64 = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(11);
    let n_users = 4;

    let mut config = ScriptConfig::new(Mode::Finite, n_users, seed);
    config.p_observe = 0.5;
    let script = generate_script(&config, 0)?;

    let mut locker = LockerState::initial(n_users);
    let mut history = MonitorHistory::new(locker.clone());
    let mut ledger = init_beliefs(n_users)?;

    println!("{:<44} {:<12} beliefs", "event", "slots");
    println!(
        "{:<44} {:<12} {}",
        "(initial placement)",
        truth(&locker),
        beliefs(&ledger, n_users)
    );

    for event in &script.events {
        let label = match event {
            GameEvent::Shuffle { perm } => {
                locker = apply_shuffle(&locker, perm)?;
                history.push(locker.clone());
                "shuffle".to_string()
            }
            GameEvent::SnapshotView { user, k_from_last } => {
                let shown = snapshot_from_last(&history, *k_from_last)?.clone();
                ledger.observe_snapshot(*user, &shown)?;
                format!("user {user} views {k_from_last}-from-last snapshot")
            }
            GameEvent::MonitorVisit { user } => {
                ledger.observe_monitor(*user, &locker)?;
                format!("user {user} checks the monitor")
            }
            GameEvent::Arrival { user } => {
                let believed = ledger.believed_position(*user)?;
                let (next, outcome) = apply_retrieval(&locker, *user, Some(believed), believed)?;
                locker = next;
                history.push(locker.clone());
                ledger.mark_retrieved(*user)?;
                format!(
                    "user {user} retrieves (was at {}, went to {believed})",
                    outcome.true_position
                )
            }
        };
        println!(
            "{label:<44} {:<12} {}",
            truth(&locker),
            beliefs(&ledger, n_users)
        );
    }
    Ok(())
}
