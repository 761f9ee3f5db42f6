//! Score any chat-completions endpoint on Zero vs Finite with identical
//! seeded games and report the comparison side by side. No expected scores
//! are baked in — what a given model achieves is its own result.
//!
//! Configure through the environment:
//!
//! ```bash
//! export PTRS_ENDPOINT=http://localhost:11434/v1/chat/completions
//! export PTRS_MODEL=qwen:7b-chat
//! export PTRS_API_KEY_ENV=MY_KEY_VAR   # optional
//! export PTRS_TURNS=60                 # optional, default 60
//! cargo run --example llm_side_by_side
//! ```

use anyhow::Result;

use pick_the_right_stuff::agents::llm::LlmConfig;
use pick_the_right_stuff::harness::{run_experiment, AgentSpec, ExperimentConfig};
use pick_the_right_stuff::Mode;

fn main() -> Result<()> {
    let Ok(endpoint) = std::env::var("PTRS_ENDPOINT") else {
        eprintln!("PTRS_ENDPOINT is not set; nothing to run.");
        eprintln!("Point it at a chat-completions endpoint and set PTRS_MODEL.");
        return Ok(());
    };
    let model = std::env::var("PTRS_MODEL").unwrap_or_else(|_| "default".to_string());
    let turns: usize = std::env::var("PTRS_TURNS")
        .ok()
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(60);

    let mut llm = LlmConfig::new(endpoint, &model);
    llm.api_key_env = std::env::var("PTRS_API_KEY_ENV").ok();

    let mut averages = Vec::new();
    for mode in [Mode::Zero, Mode::Finite] {
        let mut config = ExperimentConfig::new(mode, AgentSpec::Llm(llm.clone()), 0);
        config.n_turns = turns;
        config.verbose = true;
        eprintln!("== {model} / {mode}: {turns} turns x 5 users ==");
        let report = run_experiment(&config)?;
        averages.push(report.average_score.parse::<f64>().unwrap_or(f64::NAN));
        println!(
            "{model} {mode}: average {} over {} turns ({} transport failures)",
            report.average_score,
            report.turns.len(),
            report
                .turns
                .iter()
                .map(|t| t.transport_failures)
                .sum::<usize>(),
        );
    }

    let (zero, finite) = (averages[0], averages[1]);
    println!(
        "side by side: zero {zero:.2}, finite {finite:.2}, diff {:+.2} (zero >= finite: {})",
        zero - finite,
        if zero >= finite { "yes" } else { "no" },
    );
    Ok(())
}
