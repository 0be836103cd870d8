//! A model described in JSON: a wedge with one reflecting and one
//! repelling wall. Shows a single proximal step and its multipliers.

use chamber::integrator::prox_step;
use chamber::models::ModelConfig;

const CONFIG: &str = r#"{
  "kind": "custom",
  "name": "wedge",
  "dimension": 2,
  "normalize": true,
  "faces": [
    {"normal": [1.0, 0.0], "potential": {"kind": "zero"}, "label": "mirror"},
    {"normal": [-1.0, 1.0], "potential": {"kind": "log", "gamma": 0.7}, "label": "repeller"}
  ],
  "initial_point": [0.5, 1.0],
  "monitored": [[0, 1]]
}"#;

fn main() -> chamber::Result<()> {
    let model = serde_json::from_str::<ModelConfig>(CONFIG)?.build()?;
    let x = model.initial_point().to_vec();
    println!("{} starts at {:?}, gaps {:?}", model.name(), x, model.domain().gaps(&x)?);

    // a kick straight into the mirror
    let out = prox_step(&model, &x, &[-1.0, 0.0], 0.01)?;
    println!("after step: x = {:?}", out.x);
    println!("multipliers {:?} ({} sweeps)", out.multipliers, out.sweeps);
    Ok(())
}
