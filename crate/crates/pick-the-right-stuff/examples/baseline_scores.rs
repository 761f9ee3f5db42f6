//! Score the scripted baselines on both modes with the stock settings
//! (5 users, 60 turns): the oracle pins the ceiling at 100, frozen-belief
//! shows how much observations matter, and random calibrates the floor.
//!
//! Run: `cargo run --example baseline_scores`

use anyhow::Result;

use pick_the_right_stuff::harness::{run_experiment, AgentSpec, ExperimentConfig};
use pick_the_right_stuff::Mode;

fn main() -> Result<()> {
    let master_seed = 42;
    println!("{:<8} {:>10} {:>10}", "agent", "zero", "finite");
    for (name, agent) in [
        ("oracle", AgentSpec::Oracle),
        ("frozen", AgentSpec::FrozenBelief),
        ("random", AgentSpec::Random),
    ] {
        let mut row = format!("{name:<8}");
        for mode in [Mode::Zero, Mode::Finite] {
            let config = ExperimentConfig::new(mode, agent.clone(), master_seed);
            let report = run_experiment(&config)?;
            row.push_str(&format!(" {:>10}", report.average_score));
        }
        println!("{row}");
    }
    println!("\nEvery agent saw the identical 60 scripts per mode (seed {master_seed}).");
    Ok(())
}
