//! Simulate one Dyson-type path and print it in the CSV layout the command
//! line tool writes.

use chamber::cli::trajectory_csv;
use chamber::integrator::{simulate, SimConfig};
use chamber::models::{ModelConfig, ModelSpec};
use chamber::potentials::PotentialSpec;

fn main() -> chamber::Result<()> {
    let config: ModelConfig = ModelSpec::RostVares { n: 3, phi: PotentialSpec::Log { gamma: 1.0 } }.into();
    let model = config.build()?;
    let mut sim = SimConfig::new(1e-3, 0.5, 42);
    sim.record_stride = 50;
    let tr = simulate(&model, &sim)?;
    let header = serde_json::to_string(&serde_json::json!({ "model": config, "sim": sim }))?;
    print!("{}", trajectory_csv(&header, &model, &tr));
    Ok(())
}
