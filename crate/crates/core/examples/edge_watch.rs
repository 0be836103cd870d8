//! Three particles with a weak log repulsion: pairs do collide, but the
//! triple collision (the edge where both gaps vanish) is never seen.

use chamber::geometry::FaceSubset;
use chamber::integrator::SimConfig;
use chamber::models::build_rost_vares;
use chamber::montecarlo::edge_watch;
use chamber::potentials::LogBarrier;
use std::sync::Arc;

fn main() -> chamber::Result<()> {
    let model = build_rost_vares(3, Arc::new(LogBarrier::new(0.2)?))?;
    let mut cfg = SimConfig::new(1e-3, 1.0, 2);
    cfg.edge_eps = 1e-2;
    let edge = FaceSubset::new(vec![0, 1], model.num_faces())?;
    let w = edge_watch(&model, &cfg, 200, &edge)?;
    println!("edge hit fraction {:.3} (95% CI {:.3}..{:.3})", w.hit_fraction, w.hit_ci95.0, w.hit_ci95.1);
    println!("closest approach {:.3e}, 1% quantile {:.3e}", w.min_distance_min, w.min_distance_q01);
    println!("single faces within edge_eps: {:?}", w.face_fractions_at_edge_eps);
    Ok(())
}
