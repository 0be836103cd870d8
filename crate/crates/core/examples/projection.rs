//! Euclidean projection onto a polyhedron and the normal-cone weights.

use chamber::geometry::{Face, PolyhedralDomain};

fn main() -> chamber::Result<()> {
    let s = 0.5f64.sqrt();
    let domain = PolyhedralDomain::new(
        2,
        vec![
            Face::new(vec![1.0, 0.0], 0.0, 0, "x>0"),
            Face::new(vec![0.0, 1.0], 0.0, 0, "y>0"),
            Face::new(vec![-s, -s], -2.0 * s, 0, "x+y<2"),
        ],
    )?;
    for x in [[0.5, 0.5], [-1.0, 0.3], [-1.0, -2.0], [3.0, 3.0]] {
        let p = domain.project(&x)?;
        println!("{:?} -> {:?}  weights {:?}", x, p.point, p.multipliers);
    }
    Ok(())
}
