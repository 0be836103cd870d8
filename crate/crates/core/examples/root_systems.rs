//! Build and check the standard root systems, then break one on purpose.

use chamber::rootsys::{reflect, standard_root_system, validate, Family};

fn main() -> chamber::Result<()> {
    for (fam, rank, k) in [
        (Family::A, 3, vec![1.0]),
        (Family::B, 3, vec![1.0, 0.5]),
        (Family::D, 4, vec![1.0]),
        (Family::I2, 5, vec![1.0]),
    ] {
        let rs = standard_root_system(fam, rank, &k)?;
        let r = validate(&rs);
        println!(
            "{:<8} roots {:>2}  positive {:>2}  simple {}  orbits {}  valid {}",
            r.label,
            r.num_roots,
            r.num_positive,
            r.num_simple,
            r.orbits,
            r.is_valid()
        );
    }

    let mut rs = standard_root_system(Family::A, 2, &[1.0])?;
    let old = std::mem::replace(&mut rs.roots[0], vec![1.0, -1.0, 0.5]);
    println!("\nafter bending {old:?} to (1, -1, 0.5):");
    for f in validate(&rs).failures.iter().take(3) {
        println!("  {:?}: {}", f.axiom, f.detail);
    }
    println!("\nreflection of (1, 2, 3) in (1, -1, 0): {:?}", reflect(&[1.0, -1.0, 0.0], &[1.0, 2.0, 3.0])?);
    Ok(())
}
