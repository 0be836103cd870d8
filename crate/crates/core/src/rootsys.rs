//! Finite root systems, their positive and simple subsystems, and the radial
//! Dunkl model living in the positive Weyl chamber.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Face, FaceSubset, PolyhedralDomain};
use crate::linalg::{self, dot, norm};
use crate::models::{FaceRole, PolyhedralModel};
use crate::potentials::{LogBarrier, SharedPotential};

const MATCH_TOL: f64 = 1e-10;

/// Orthogonal reflection across the hyperplane orthogonal to `alpha`:
/// `x - 2 (alpha.x / |alpha|^2) alpha`.
pub fn reflect(alpha: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    if alpha.len() != x.len() {
        return Err(Error::DimensionMismatch { expected: alpha.len(), got: x.len() });
    }
    let a2 = dot(alpha, alpha);
    if !(a2 > 0.0) {
        return Err(Error::InvalidParameter("cannot reflect across a zero root".into()));
    }
    let c = 2.0 * dot(alpha, x) / a2;
    Ok(x.iter().zip(alpha).map(|(xi, ai)| xi - c * ai).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    A,
    B,
    D,
    I2,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::A => "A",
            Family::B => "B",
            Family::D => "D",
            Family::I2 => "I2",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Family::A),
            "B" | "b" => Ok(Family::B),
            "D" | "d" => Ok(Family::D),
            "I2" | "i2" => Ok(Family::I2),
            other => Err(Error::InvalidParameter(format!("unknown root-system family {other:?}"))),
        }
    }
}

/// A root system with a chosen positive subsystem and multiplicities.
///
/// `positive` and `simple` index into `roots`; `multiplicity[i]` belongs to
/// `roots[i]`. `witness` is the vector splitting `roots` into positive and
/// negative halves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSystem {
    pub label: String,
    pub dimension: usize,
    pub roots: Vec<Vec<f64>>,
    pub positive: Vec<usize>,
    pub simple: Vec<usize>,
    pub multiplicity: Vec<f64>,
    pub witness: Vec<f64>,
}

impl RootSystem {
    /// Index of the root equal to `v`, if any.
    pub fn find_root(&self, v: &[f64]) -> Option<usize> {
        let tol = MATCH_TOL * (1.0 + norm(v));
        self.roots
            .iter()
            .position(|r| r.iter().zip(v).all(|(a, b)| (a - b).abs() <= tol))
    }

    pub fn rank(&self) -> usize {
        let vs: Vec<&[f64]> = self.roots.iter().map(|r| r.as_slice()).collect();
        linalg::rank(&vs, 1e-10)
    }

    pub fn positive_roots(&self) -> impl Iterator<Item = &[f64]> {
        self.positive.iter().map(|&i| self.roots[i].as_slice())
    }

    /// Orbits of the reflection group on the roots, as a representative index
    /// per root.
    pub fn orbits(&self) -> Vec<usize> {
        let n = self.roots.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], i: usize) -> usize {
            let mut r = i;
            while p[r] != r {
                r = p[r];
            }
            let mut c = i;
            while p[c] != r {
                let next = p[c];
                p[c] = r;
                c = next;
            }
            r
        }
        for a in 0..n {
            for b in 0..n {
                if let Ok(img) = reflect(&self.roots[a], &self.roots[b]) {
                    if let Some(j) = self.find_root(&img) {
                        let (ra, rb) = (find(&mut parent, b), find(&mut parent, j));
                        if ra != rb {
                            parent[ra.max(rb)] = ra.min(rb);
                        }
                    }
                }
            }
        }
        (0..n).map(|i| find(&mut parent, i)).collect()
    }

    pub fn num_orbits(&self) -> usize {
        let mut reps = self.orbits();
        reps.sort_unstable();
        reps.dedup();
        reps.len()
    }
}

/// Which axiom a validation failure concerns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    Shape,
    /// `R` meets the line through `alpha` exactly in `{alpha, -alpha}`.
    Line,
    /// `s_alpha(R) = R`.
    Reflection,
    Positive,
    Simple,
    Multiplicity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomFailure {
    pub axiom: Axiom,
    pub roots: Vec<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub label: String,
    pub num_roots: usize,
    pub num_positive: usize,
    pub num_simple: usize,
    pub rank: usize,
    pub orbits: usize,
    pub failures: Vec<AxiomFailure>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks every root-system axiom and the consistency of the positive and
/// simple subsystems and the multiplicities.
pub fn validate(rs: &RootSystem) -> ValidationReport {
    let mut failures = Vec::new();
    let mut fail = |axiom, roots: Vec<usize>, detail: String| failures.push(AxiomFailure { axiom, roots, detail });
    let n = rs.roots.len();

    let shape_ok = rs.roots.iter().all(|r| r.len() == rs.dimension)
        && rs.witness.len() == rs.dimension
        && rs.multiplicity.len() == n
        && rs.positive.iter().chain(&rs.simple).all(|&i| i < n)
        && rs.roots.iter().all(|r| norm(r) > 0.0);
    if !shape_ok {
        fail(Axiom::Shape, vec![], "inconsistent lengths, zero roots or out-of-range indices".into());
        return ValidationReport {
            label: rs.label.clone(),
            num_roots: n,
            num_positive: rs.positive.len(),
            num_simple: rs.simple.len(),
            rank: 0,
            orbits: 0,
            failures,
        };
    }

    for a in 0..n {
        let alpha = &rs.roots[a];
        let neg: Vec<f64> = alpha.iter().map(|v| -v).collect();
        if rs.find_root(&neg).is_none() {
            fail(Axiom::Line, vec![a], "-alpha is missing".into());
        }
        for b in 0..n {
            if a == b {
                continue;
            }
            let beta = &rs.roots[b];
            let cos = dot(alpha, beta) / (norm(alpha) * norm(beta));
            let same = linalg::dist(alpha, beta) <= MATCH_TOL * (1.0 + norm(alpha));
            let opposite = alpha.iter().zip(beta).all(|(x, y)| (x + y).abs() <= MATCH_TOL * (1.0 + norm(alpha)));
            if (cos.abs() - 1.0).abs() <= 1e-12 && !same && !opposite {
                fail(Axiom::Line, vec![a, b], "a second multiple of alpha is a root".into());
            }
            if same {
                fail(Axiom::Line, vec![a, b], "duplicate root".into());
            }
            let img = reflect(alpha, beta).expect("nonzero root");
            match rs.find_root(&img) {
                None => fail(Axiom::Reflection, vec![a, b], "s_alpha(beta) is not a root".into()),
                Some(c) => {
                    let (kb, kc) = (rs.multiplicity[b], rs.multiplicity[c]);
                    if (kb - kc).abs() > 1e-12 * (1.0 + kb.abs()) {
                        fail(
                            Axiom::Multiplicity,
                            vec![a, b, c],
                            format!("k(beta) = {kb} but k(s_alpha beta) = {kc}"),
                        );
                    }
                }
            }
        }
    }

    let wn = norm(&rs.witness);
    let mut expected_positive = Vec::new();
    for (i, r) in rs.roots.iter().enumerate() {
        let s = dot(r, &rs.witness);
        if s.abs() <= 1e-12 * norm(r) * wn {
            fail(Axiom::Positive, vec![i], "witness lies on the hyperplane of this root".into());
        } else if s > 0.0 {
            expected_positive.push(i);
        }
    }
    let mut pos = rs.positive.clone();
    pos.sort_unstable();
    pos.dedup();
    if pos != expected_positive {
        fail(
            Axiom::Positive,
            symmetric_difference(&pos, &expected_positive),
            "positive set differs from the half selected by the witness".into(),
        );
    }

    let rank = rs.rank();
    let simple: Vec<&[f64]> = rs.simple.iter().map(|&i| rs.roots[i].as_slice()).collect();
    if let Some(&bad) = rs.simple.iter().find(|i| !pos.contains(i)) {
        fail(Axiom::Simple, vec![bad], "simple root is not positive".into());
    }
    if simple.len() != rank || linalg::rank(&simple, 1e-10) != rank {
        fail(
            Axiom::Simple,
            rs.simple.clone(),
            format!("simple roots do not form a basis of span(R) (rank {rank})"),
        );
    } else {
        let integral = is_crystallographic(rs);
        for &p in &pos {
            let (c, resid) = linalg::coefficients(&simple, &rs.roots[p]);
            if resid > 1e-9 * (1.0 + norm(&rs.roots[p])) {
                fail(Axiom::Simple, vec![p], "positive root outside span(S)".into());
            } else if c.iter().any(|&v| v < -1e-9) {
                fail(Axiom::Simple, vec![p], format!("negative coefficient over S: {c:?}"));
            } else if integral && c.iter().any(|v| (v - v.round()).abs() > 1e-9) {
                fail(Axiom::Simple, vec![p], format!("non-integer coefficient over S: {c:?}"));
            }
        }
    }

    ValidationReport {
        label: rs.label.clone(),
        num_roots: n,
        num_positive: rs.positive.len(),
        num_simple: rs.simple.len(),
        rank,
        orbits: rs.num_orbits(),
        failures,
    }
}

fn symmetric_difference(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = a.iter().filter(|i| !b.contains(i)).chain(b.iter().filter(|i| !a.contains(i))).copied().collect();
    out.sort_unstable();
    out
}

/// All Cartan integers `2 (alpha.beta)/|beta|^2` are integers. Positive roots
/// are then integer combinations of the simple ones.
pub fn is_crystallographic(rs: &RootSystem) -> bool {
    rs.roots.iter().all(|a| {
        rs.roots.iter().all(|b| {
            let c = 2.0 * dot(a, b) / dot(b, b);
            (c - c.round()).abs() <= 1e-9
        })
    })
}

/// Simple roots: positive roots that are not a positive combination of two
/// other positive roots.
pub fn simple_roots(rs: &RootSystem) -> Vec<usize> {
    let pos = &rs.positive;
    pos.iter()
        .copied()
        .filter(|&a| {
            let alpha = &rs.roots[a];
            !pos.iter().any(|&b| {
                b != a
                    && pos.iter().any(|&c| {
                        if c <= b || c == a {
                            return false;
                        }
                        let basis = [rs.roots[b].as_slice(), rs.roots[c].as_slice()];
                        if linalg::rank(&basis, 1e-10) < 2 {
                            return false;
                        }
                        let (coef, resid) = linalg::coefficients(&basis, alpha);
                        resid <= 1e-9 * (1.0 + norm(alpha)) && coef.iter().all(|&v| v > 1e-9)
                    })
            })
        })
        .collect()
}

fn e(dim: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    v[i] = 1.0;
    v
}

fn combo(dim: usize, i: usize, si: f64, j: usize, sj: f64) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    v[i] += si;
    v[j] += sj;
    v
}

/// Standard root systems.
///
/// * `A` with rank `r` lives in `R^{r+1}`: roots `e_i - e_j`; `k = [k]`.
/// * `B` with rank `n`: roots `+-e_i +- e_j` and `+-e_i`; `k = [k_long, k_short]`.
/// * `D` with rank `n`: roots `+-e_i +- e_j`; `k = [k]`.
/// * `I2` with parameter `m`: `2m` unit roots at angles `pi j / m`; `k = [k]`
///   for odd `m`, `k = [k_even_j, k_odd_j]` for even `m`.
pub fn standard_root_system(family: Family, rank: usize, k: &[f64]) -> Result<RootSystem> {
    let orbit_count = match family {
        Family::A | Family::D => 1,
        Family::B => 2,
        Family::I2 => {
            if rank % 2 == 0 {
                2
            } else {
                1
            }
        }
    };
    let min_rank = match family {
        Family::A => 1,
        Family::B | Family::D => 2,
        Family::I2 => 3,
    };
    if rank < min_rank {
        return Err(Error::InvalidParameter(format!("{family} needs rank >= {min_rank}, got {rank}")));
    }
    if k.len() != orbit_count {
        return Err(Error::InvalidParameter(format!(
            "{family}{rank} has {orbit_count} root-length orbit(s); got {} multiplicities",
            k.len()
        )));
    }
    if k.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("multiplicities must be finite".into()));
    }

    let (dimension, roots, mult, witness): (usize, Vec<Vec<f64>>, Vec<f64>, Vec<f64>) = match family {
        Family::A => {
            let d = rank + 1;
            let mut roots = Vec::new();
            for i in 0..d {
                for j in 0..d {
                    if i != j {
                        roots.push(combo(d, i, 1.0, j, -1.0));
                    }
                }
            }
            let m = vec![k[0]; roots.len()];
            let w = (0..d).map(|i| (d - i) as f64).collect();
            (d, roots, m, w)
        }
        Family::B | Family::D => {
            let d = rank;
            let mut roots = Vec::new();
            let mut m = Vec::new();
            for i in 0..d {
                for j in (i + 1)..d {
                    for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                        roots.push(combo(d, i, si, j, sj));
                        m.push(k[0]);
                    }
                }
            }
            if family == Family::B {
                for i in 0..d {
                    roots.push(e(d, i));
                    m.push(k[1]);
                    roots.push(e(d, i).into_iter().map(|v| -v).collect());
                    m.push(k[1]);
                }
            }
            let w = (0..d).map(|i| (d - i) as f64).collect();
            (d, roots, m, w)
        }
        Family::I2 => {
            let mm = rank;
            let mut roots = Vec::new();
            let mut m = Vec::new();
            for j in 0..2 * mm {
                let t = std::f64::consts::PI * j as f64 / mm as f64;
                roots.push(vec![t.cos(), t.sin()]);
                m.push(if mm % 2 == 0 { k[j % 2] } else { k[0] });
            }
            let psi = std::f64::consts::PI * (mm - 1) as f64 / (2 * mm) as f64;
            (2, roots, m, vec![psi.cos(), psi.sin()])
        }
    };

    let positive: Vec<usize> = roots
        .iter()
        .enumerate()
        .filter(|(_, r)| dot(r, &witness) > 0.0)
        .map(|(i, _)| i)
        .collect();
    let mut rs = RootSystem {
        label: if family == Family::I2 { format!("I2({rank})") } else { format!("{family}{rank}") },
        dimension,
        roots,
        positive,
        simple: Vec::new(),
        multiplicity: mult,
        witness,
    };
    rs.simple = simple_roots(&rs);
    let report = validate(&rs);
    if !report.is_valid() {
        return Err(Error::InvalidParameter(format!(
            "constructed {} fails validation: {:?}",
            rs.label, report.failures
        )));
    }
    Ok(rs)
}

fn root_label(r: &[f64]) -> String {
    let parts: Vec<String> = r
        .iter()
        .map(|v| {
            if (v - v.round()).abs() < 1e-12 {
                format!("{}", v.round() as i64)
            } else {
                format!("{v:.4}")
            }
        })
        .collect();
    format!("({})", parts.join(","))
}

/// Radial Dunkl process on the positive Weyl chamber as a polyhedral model.
///
/// One face per positive root `alpha`, normal `alpha/|alpha|`, offset 0 and
/// potential `-k(alpha) log u`; the drift is `sum k(alpha) alpha/(alpha.x)`.
/// Faces of non-simple roots are redundant for the domain but are kept so
/// their hitting times can be monitored. The starting point is
/// `(1/2) sum_{alpha > 0} alpha/|alpha|`, where every simple gap equals 1/2.
pub fn dunkl_model(rs: &RootSystem) -> Result<PolyhedralModel> {
    let report = validate(rs);
    if !report.is_valid() {
        return Err(Error::InvalidParameter(format!("invalid root system {}: {:?}", rs.label, report.failures)));
    }
    let d = rs.dimension;
    let mut faces = Vec::new();
    let mut potentials: Vec<SharedPotential> = Vec::new();
    let mut roles = Vec::new();
    let mut simple_faces = Vec::new();
    let mut x0 = vec![0.0; d];
    for &i in &rs.positive {
        let alpha = &rs.roots[i];
        let k = rs.multiplicity[i];
        if !(k > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "multiplicity must be positive on positive roots; k{} = {k}",
                root_label(alpha)
            )));
        }
        let len = norm(alpha);
        let normal: Vec<f64> = alpha.iter().map(|v| v / len).collect();
        for (x, n) in x0.iter_mut().zip(&normal) {
            *x += 0.5 * n;
        }
        let is_simple = rs.simple.contains(&i);
        if is_simple {
            simple_faces.push(faces.len());
        }
        let pid = match potentials.iter().position(|p| p.zero_exponent() == Some(k)) {
            Some(p) => p,
            None => {
                potentials.push(Arc::new(LogBarrier::new(k)?));
                potentials.len() - 1
            }
        };
        faces.push(Face::new(normal, 0.0, pid, format!("alpha{}", root_label(alpha))));
        roles.push(if is_simple { FaceRole::SimpleRoot } else { FaceRole::NonSimpleRoot });
    }
    let m = faces.len();
    let domain = PolyhedralDomain::new(d, faces)?;
    let mut monitored = Vec::new();
    for a in 0..simple_faces.len() {
        for b in (a + 1)..simple_faces.len() {
            monitored.push(FaceSubset::new(vec![simple_faces[a], simple_faces[b]], m)?);
        }
    }
    let k_desc: Vec<String> = rs.positive.iter().map(|&i| rs.multiplicity[i]).fold(Vec::new(), |mut acc, k| {
        let s = format!("{k}");
        if !acc.contains(&s) {
            acc.push(s);
        }
        acc
    });
    PolyhedralModel::with_roles(
        format!("dunkl({}, k=[{}])", rs.label, k_desc.join(",")),
        domain,
        potentials,
        x0,
        monitored,
        roles,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn reflect_examples() {
        let a = [1.0, -1.0, 0.0];
        let r = reflect(&a, &a).unwrap();
        assert_eq!(r, vec![-1.0, 1.0, 0.0]);
        let x = [1.0, 1.0, 5.0];
        assert_eq!(reflect(&a, &x).unwrap(), x.to_vec());
        assert_eq!(reflect(&a, &[2.0, 1.0, 0.0]).unwrap(), vec![1.0, 2.0, 0.0]);
        assert!(reflect(&[0.0, 0.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn positive_root_counts() {
        assert_eq!(standard_root_system(Family::A, 2, &[1.0]).unwrap().positive.len(), 3);
        assert_eq!(standard_root_system(Family::B, 3, &[1.0, 0.5]).unwrap().positive.len(), 9);
        assert_eq!(standard_root_system(Family::I2, 5, &[1.0]).unwrap().positive.len(), 5);
    }

    #[test]
    fn simple_root_counts() {
        for (fam, r, k) in [(Family::A, 2, vec![1.0]), (Family::B, 2, vec![1.0, 2.0]), (Family::I2, 7, vec![1.0])] {
            let rs = standard_root_system(fam, r, &k).unwrap();
            assert_eq!(simple_roots(&rs).len(), 2, "{fam}{r}");
        }
    }

    #[test]
    fn standard_rejects_bad_params() {
        assert!(standard_root_system(Family::A, 0, &[1.0]).is_err());
        assert!(standard_root_system(Family::B, 1, &[1.0, 1.0]).is_err());
        assert!(standard_root_system(Family::I2, 2, &[1.0]).is_err());
        assert!(standard_root_system(Family::B, 3, &[1.0]).is_err());
        assert!(standard_root_system(Family::I2, 4, &[1.0]).is_err());
    }

    #[test]
    fn deleted_root_is_invalid() {
        let mut rs = standard_root_system(Family::A, 2, &[1.0]).unwrap();
        let gone = rs.positive[0];
        rs.roots.remove(gone);
        rs.multiplicity.remove(gone);
        rs.positive = rs.positive.iter().filter(|&&i| i != gone).map(|&i| if i > gone { i - 1 } else { i }).collect();
        rs.simple = rs.simple.iter().filter(|&&i| i != gone).map(|&i| if i > gone { i - 1 } else { i }).collect();
        let rep = validate(&rs);
        assert!(!rep.is_valid());
        assert!(rep.failures.iter().any(|f| f.axiom == Axiom::Line));
    }

    #[test]
    fn non_invariant_multiplicity_is_invalid() {
        let mut rs = standard_root_system(Family::A, 2, &[1.0]).unwrap();
        rs.multiplicity[0] = 2.0;
        let rep = validate(&rs);
        assert!(rep.failures.iter().any(|f| f.axiom == Axiom::Multiplicity));
    }

    #[test]
    fn even_dihedral_has_two_orbits() {
        let rs = standard_root_system(Family::I2, 4, &[0.3, 0.8]).unwrap();
        let rep = validate(&rs);
        assert!(rep.is_valid(), "{:?}", rep.failures);
        assert_eq!(rep.orbits, 2);
        assert_eq!(standard_root_system(Family::I2, 5, &[0.3]).unwrap().num_orbits(), 1);
    }

    #[test]
    fn dunkl_a2_drift() {
        let rs = standard_root_system(Family::A, 2, &[1.0]).unwrap();
        let m = dunkl_model(&rs).unwrap();
        assert_eq!(m.num_faces(), 3);
        let d = m.drift(&[2.0, 1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(d[0], 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(d[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d[2], -1.5, epsilon = 1e-12);
        assert!(m.drift(&[1.0, 1.0, 0.0]).is_err());
        let simple = m.roles().iter().filter(|r| **r == FaceRole::SimpleRoot).count();
        assert_eq!(simple, 2);
        for (i, f) in m.faces().iter().enumerate() {
            if m.role(i) == FaceRole::SimpleRoot {
                assert_abs_diff_eq!(f.gap(m.initial_point()), 0.5, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn dunkl_rejects_nonpositive_k() {
        let rs = standard_root_system(Family::B, 2, &[1.0, 0.0]).unwrap();
        assert!(dunkl_model(&rs).is_err());
    }
}
