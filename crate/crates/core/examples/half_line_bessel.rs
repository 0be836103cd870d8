//! A log barrier on the half-line is a Bessel-type process. Its second
//! moment is known in closed form, which makes a clean Monte Carlo check.

use chamber::geometry::{Face, PolyhedralDomain};
use chamber::integrator::SimConfig;
use chamber::models::PolyhedralModel;
use chamber::montecarlo::{moment_check, Observable};
use chamber::potentials::LogBarrier;
use std::sync::Arc;

fn main() -> chamber::Result<()> {
    let gamma = 1.5;
    let domain = PolyhedralDomain::new(1, vec![Face::new(vec![1.0], 0.0, 0, "wall")])?;
    let model = PolyhedralModel::new("half-line", domain, vec![Arc::new(LogBarrier::new(gamma)?)], vec![1.0], vec![])?;
    let cfg = SimConfig::new(1e-3, 1.0, 7);

    let check = moment_check(&model, &cfg, 2000, Observable::SquaredNorm)?;
    println!("E[X_T^2] ~ {:.4} +- {:.4}", check.estimate.mean, check.estimate.stderr);
    println!("target   = {:.4}  (x0^2 + (2 gamma + 1) T)", check.target.unwrap());
    println!("z        = {:.2}", check.z_score.unwrap());
    Ok(())
}
