//! Wishart eigenvalues through their square roots. The axis walls are hit
//! for small delta; eigenvalues never collide.

use chamber::classifier::classify_model;
use chamber::integrator::{simulate, SimConfig};
use chamber::models::{build_wishart_radii, radii_to_eigenvalues};

fn main() -> chamber::Result<()> {
    for delta in [2.5, 3.0] {
        let model = build_wishart_radii(2, delta)?;
        println!("{}", model.name());
        for v in classify_model(&model)? {
            println!("  {:<12} {}", v.label, v.classification.class);
        }
        let mut cfg = SimConfig::new(1e-3, 1.0, 5);
        cfg.record_stride = 250;
        let tr = simulate(&model, &cfg)?;
        for r in &tr.records {
            println!("  t={:.2} eigenvalues {:?}", r.t, radii_to_eigenvalues(&r.x));
        }
    }
    Ok(())
}
