//! Radial Dunkl process in the A2 Weyl chamber. Walls with k >= 1/2 are
//! never reached; the others are, but only through simple roots.

use chamber::integrator::SimConfig;
use chamber::montecarlo::{run_ensemble, verdicts};
use chamber::rootsys::{dunkl_model, standard_root_system, Family};

fn main() -> chamber::Result<()> {
    let k: f64 = std::env::args().nth(1).map_or(0.75, |s| s.parse().expect("k"));
    let rs = standard_root_system(Family::A, 2, &[k])?;
    let model = dunkl_model(&rs)?;
    println!("{}  x0 = {:?}", model.name(), model.initial_point());

    let mut cfg = SimConfig::new(1e-3, 1.0, 11);
    cfg.hit_eps = 1e-2;
    let report = run_ensemble(&model, &cfg, 100)?;
    for v in verdicts(&model, &report)? {
        println!(
            "{:<16} {:<7} reachable={:<5} hit {:.3}  q01 {:.2e}  {}",
            v.label,
            v.class,
            v.predicted_reachable,
            v.hit_fraction,
            v.min_gap_q01,
            v.word()
        );
    }
    Ok(())
}
