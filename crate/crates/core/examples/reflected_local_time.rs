//! Reflected Brownian motion on [0, inf) started at the wall. The reflection
//! multipliers add up to the local time, whose mean at t = 1 is sqrt(2/pi).

use chamber::geometry::{Face, PolyhedralDomain};
use chamber::integrator::{simulate, SimConfig};
use chamber::models::PolyhedralModel;
use chamber::montecarlo::{moment_check, Observable};
use chamber::potentials::Zero;
use std::sync::Arc;

fn main() -> chamber::Result<()> {
    let domain = PolyhedralDomain::new(1, vec![Face::new(vec![1.0], 0.0, 0, "wall")])?;
    let model = PolyhedralModel::new("reflected", domain, vec![Arc::new(Zero)], vec![1e-9], vec![])?;
    let cfg = SimConfig::new(1e-3, 1.0, 3);

    let tr = simulate(&model, &cfg)?;
    println!("one path: L_1 = {:.4}, min gap = {:.2e}", tr.local_time[0], tr.min_gap[0]);

    let check = moment_check(&model, &cfg, 1000, Observable::LocalTime(0))?;
    println!(
        "E[L_1] ~ {:.4} +- {:.4}, target {:.5}",
        check.estimate.mean,
        check.estimate.stderr,
        check.target.unwrap()
    );
    Ok(())
}
