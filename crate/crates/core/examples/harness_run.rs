//! Drive the experiment harness from code: parse a configuration, run it
//! without writing files, and print the summary.

use focal_lab::harness::config::ExperimentConfig;
use focal_lab::harness::{execute_config, RunOptions};

const CONFIG: &str = "
surface.type = revolution
surface.profile = peanut
surface.amplitude = 0.3
run.kind = theorem-report
run.directions = 64
run.lambda_max = 30
run.lambda = 20
run.k_min = 3
run.k_max = 6
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig::parse(CONFIG)?;
    let a = execute_config(cfg, &RunOptions::default())?;
    print!("{}", a.summary_text);
    for (name, bytes) in &a.files {
        println!("{name:14} {:6} bytes", bytes.len());
    }
    Ok(())
}
