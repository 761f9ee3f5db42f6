//! Render one full turn as the text an agent actually sees, frozen-belief
//! answers spliced in. Seeds with observation events show the incorrect-
//! prediction feedback path.
//!
//! Run: `cargo run --example render_transcript [seed]`

use anyhow::Result;

use pick_the_right_stuff::harness::{run_game, AgentSpec};
use pick_the_right_stuff::scheduler::{generate_script, ScriptConfig};
use pick_the_right_stuff::Mode;

fn main() -> Result<()> {
    let seed: u64 = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(7);

    let mut config = ScriptConfig::new(Mode::Zero, 3, seed);
    config.p_observe = 0.5;
    let script = generate_script(&config, 0)?;
    let mut session = AgentSpec::FrozenBelief.build_session(seed, 0)?;
    let report = run_game(&script, &mut session)?;

    print!("{}", session.rendered_transcript());
    eprintln!(
        "frozen-belief agent: {}/3 correct (score {})",
        report.correct_count, report.score
    );
    Ok(())
}
