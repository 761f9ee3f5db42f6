//! Generate a seeded event script, print its JSONL wire form to stdout, and
//! check it parses back, validates, and regenerates identically.
//!
//! Run: `cargo run --example script_roundtrip [seed [zero|finite]]`

use anyhow::Result;

use pick_the_right_stuff::scheduler::{
    generate_script, script_from_jsonl, script_to_jsonl, validate_script, ScriptConfig,
};
use pick_the_right_stuff::Mode;

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(42);
    let mode: Mode = args
        .next()
        .map(|s| s.parse())
        .transpose()
        .map_err(anyhow::Error::msg)?
        .unwrap_or(Mode::Zero);

    let config = ScriptConfig::new(mode, 3, seed);
    let script = generate_script(&config, 0)?;
    let jsonl = script_to_jsonl(&script);
    print!("{jsonl}");

    let parsed = script_from_jsonl(&jsonl)?;
    assert_eq!(parsed, script, "round trip must be lossless");
    assert!(
        validate_script(&parsed).is_empty(),
        "generated scripts are valid"
    );
    assert_eq!(
        generate_script(&config, 0)?,
        script,
        "generation is deterministic"
    );
    eprintln!(
        "{} events; round-trip, validation, and regeneration all agree",
        script.events.len()
    );
    Ok(())
}
