//! Weak / Middle / Strong verdicts for single potentials and for every face
//! of the model zoo.

use chamber::classifier::{classify, classify_model};
use chamber::models::{build_hyperbolic, build_rost_vares, build_trigonometric, build_wishart_radii};
use chamber::potentials::{BarrierPotential, HyperbolicLogSinh, LogBarrier, TrigLogSin, Zero};
use chamber::rootsys::{dunkl_model, standard_root_system, Family};
use std::sync::Arc;

fn main() -> chamber::Result<()> {
    println!("{:<34} {:<7} {:>8}", "potential", "class", "gamma");
    let zero = Zero;
    let mut singles: Vec<Box<dyn BarrierPotential>> = vec![Box::new(zero)];
    for g in [0.1, 0.3, 0.5, 0.7] {
        singles.push(Box::new(LogBarrier::new(g)?));
        singles.push(Box::new(TrigLogSin::new(g, 1.0)?));
        singles.push(Box::new(HyperbolicLogSinh::new(g)?));
    }
    for p in &singles {
        let c = classify(p.as_ref())?;
        let g = c.exponent.map_or("-".into(), |g| format!("{g:.3}"));
        println!("{:<34} {:<7} {:>8}", p.name(), c.class, g);
    }

    let models = vec![
        build_rost_vares(3, Arc::new(LogBarrier::new(0.2)?))?,
        build_wishart_radii(2, 2.5)?,
        build_trigonometric(3, 0.7)?,
        build_hyperbolic(3, 0.3)?,
        dunkl_model(&standard_root_system(Family::A, 2, &[0.3])?)?,
    ];
    for m in &models {
        println!("\n{}", m.name());
        for v in classify_model(m)? {
            println!("  {:<18} {:<7} {}", v.label, v.classification.class, v.prediction);
            if let Some(n) = v.note {
                println!("    {n}");
            }
        }
    }
    Ok(())
}
