//! Independent oracles shared by the integration tests. Nothing here calls
//! the solvers under test.

#![allow(dead_code)]

use chamber::geometry::{Face, PolyhedralDomain};
use chamber::potentials::{BarrierPotential, HyperbolicLogSinh, LogBarrier, Scaled, ShiftedLog, TrigLogSin};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use std::sync::Arc;

/// Minimizer of `(y - z)^2 / 2 + tau phi(y)` over `[0, end)`: a dense
/// log-spaced grid on the objective picks the basin, then bisection on the
/// objective's slope inside the neighbouring cells.
pub fn prox_oracle(p: &dyn BarrierPotential, z: f64, tau: f64) -> f64 {
    let end = p.domain_end();
    let obj = |y: f64| {
        let v = if y == 0.0 { p.value_at_zero() } else { p.value(y) };
        0.5 * (y - z) * (y - z) + tau * v
    };
    let hi = (z.abs() + 10.0 * tau.sqrt() + 10.0).min(end * (1.0 - 1e-12));
    let mut grid = vec![0.0];
    let n = 20_000;
    let lo_exp = -14.0f64;
    let hi_exp = hi.log10();
    for k in 0..=n {
        grid.push(10f64.powf(lo_exp + (hi_exp - lo_exp) * k as f64 / n as f64));
    }
    let mut best = 0;
    let mut best_val = f64::INFINITY;
    for (k, &y) in grid.iter().enumerate() {
        let v = obj(y);
        if v < best_val {
            best_val = v;
            best = k;
        }
    }
    let slope = |y: f64| y - z + tau * p.derivative(y);
    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(grid.len() - 1)];
    if a == 0.0 {
        // minimiser at the wall when the slope is already nonnegative there
        let lim = p.derivative_limit_at_zero();
        if lim.is_finite() && -z + tau * lim >= 0.0 {
            return 0.0;
        }
        a = f64::MIN_POSITIVE;
    }
    if slope(a) > 0.0 || slope(b) < 0.0 {
        return grid[best];
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if slope(m) < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// A random potential from the built-in families.
pub fn random_potential<R: Rng>(rng: &mut R) -> Arc<dyn BarrierPotential> {
    let g = rng.random_range(0.05..2.0);
    match rng.random_range(0..5) {
        0 => Arc::new(LogBarrier::new(g).unwrap()),
        1 => Arc::new(ShiftedLog::new(g, rng.random_range(0.05..2.0)).unwrap()),
        2 => Arc::new(TrigLogSin::new(g, rng.random_range(0.5..3.0)).unwrap()),
        3 => Arc::new(HyperbolicLogSinh::new(g).unwrap()),
        _ => Arc::new(Scaled::new(Arc::new(LogBarrier::new(g).unwrap()), rng.random_range(0.3..3.0)).unwrap()),
    }
}

pub fn unit<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.2 && n <= 1.0 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

/// Random polyhedron in dimension `d` with `m` faces containing a ball
/// around a random centre.
pub fn random_domain<R: Rng>(rng: &mut R, d: usize, m: usize) -> PolyhedralDomain {
    assert!(d > 1 || m <= 2, "a line has only two unit normals");
    loop {
        let c: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let faces: Vec<Face> = (0..m)
            .map(|i| {
                let n = unit(rng, d);
                let a = n.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>() - rng.random_range(0.1..1.5);
                Face::new(n, a, 0, format!("f{i}"))
            })
            .collect();
        if let Ok(dom) = PolyhedralDomain::new(d, faces) {
            return dom;
        }
    }
}

/// Projection onto `{y : n_i . y >= a_i}` by enumerating active sets: for
/// each subset S solve the equality-constrained problem and keep the first
/// one that is feasible with nonnegative multipliers (KKT). Exponential in
/// the number of faces, so only for small `m`.
pub fn projection_oracle(dom: &PolyhedralDomain, x: &[f64]) -> Vec<f64> {
    let d = dom.dimension();
    let m = dom.num_faces();
    let xv = DVector::from_column_slice(x);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u32..(1 << m) {
        let s: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
        if s.len() > d {
            continue;
        }
        let y = if s.is_empty() {
            xv.clone()
        } else {
            let n = DMatrix::from_fn(s.len(), d, |r, c| dom.faces()[s[r]].normal[c]);
            let rhs = DVector::from_fn(s.len(), |r, _| dom.faces()[s[r]].offset) - &n * &xv;
            let gram = &n * n.transpose();
            let Some(lu) = gram.clone().lu().solve(&rhs) else { continue };
            if (&gram * &lu - &rhs).norm() > 1e-9 * (1.0 + rhs.norm()) {
                continue;
            }
            if lu.iter().any(|&mu| mu < -1e-12) {
                continue;
            }
            &xv + n.transpose() * lu
        };
        let feasible = dom.faces().iter().all(|f| f.gap(y.as_slice()) >= -1e-10);
        if feasible {
            let dist = (&y - &xv).norm();
            if best.as_ref().is_none_or(|(b, _)| dist < *b) {
                best = Some((dist, y.as_slice().to_vec()));
            }
        }
    }
    best.expect("a convex polyhedron with interior has a KKT point").1
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
