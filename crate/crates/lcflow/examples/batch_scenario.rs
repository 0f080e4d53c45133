//! Drives the batch front end from a config file, the same way the
//! `lcflow` binary does.
//!
//! cargo run --example batch_scenario -- examples/configs/droplet.conf

use lcflow::cli::{run, Scenario};

fn main() -> lcflow::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "examples/configs/slab.conf".into());
    let command = if path.contains("droplet") {
        "droplet-compare"
    } else {
        "simulate"
    };
    let args: Vec<String> = [command, "--config", &path, "--threads", "1"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let out = run(&Scenario::from_args(&args)?)?;
    for f in &out.files {
        println!("{}", f.display());
    }
    println!("checks passed: {}", out.passed);
    Ok(())
}
