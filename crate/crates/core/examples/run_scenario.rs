//! Runs a scenario file or builtin into the output root and lists what it wrote.
//!
//! `FIBERSQUEEZE_OUTPUT_ROOT=/tmp/out cargo run --release --example run_scenario -- fig2b`

use fibersqueeze::scenario::{output_root, run_scenario, ScenarioConfig};

fn main() {
    let source = std::env::args().nth(1).unwrap_or_else(|| "fig1".into());
    let config = match ScenarioConfig::load(&source) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(1);
        }
    };
    match run_scenario(&config, &output_root()) {
        Ok(outcome) => {
            println!("{}", serde_json::to_string_pretty(&outcome.summary).unwrap());
        }
        Err(e) => {
            eprintln!("{}", e.report());
            std::process::exit(if e.is_validation() { 1 } else { 2 });
        }
    }
}
