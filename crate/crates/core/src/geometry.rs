//! Convex polyhedral domains `D = { x : x . n_i > a_i for all i }`.
//!
//! A domain is a list of [`Face`]s, each a half-space with a unit inward
//! normal. Construction validates the normals and certifies that the open
//! domain is nonempty by exhibiting an interior point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Tolerance on `|normal| = 1`.
pub const UNIT_NORMAL_TOL: f64 = 1e-12;

/// Smallest certified interior margin for a domain to count as nonempty.
pub const MIN_INTERIOR_MARGIN: f64 = 1e-9;

/// One half-space constraint `x . normal >= offset`, bound to a barrier
/// potential through `potential_id`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Face {
    pub normal: Vec<f64>,
    pub offset: f64,
    pub potential_id: usize,
    #[serde(default)]
    pub label: String,
}

impl Face {
    pub fn new(normal: Vec<f64>, offset: f64, potential_id: usize, label: impl Into<String>) -> Self {
        Self {
            normal,
            offset,
            potential_id,
            label: label.into(),
        }
    }

    #[inline]
    pub fn gap(&self, x: &[f64]) -> f64 {
        linalg::dot(&self.normal, x) - self.offset
    }
}

/// A nonempty, sorted, deduplicated set of face indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct FaceSubset(Vec<usize>);

impl FaceSubset {
    /// Validates against a domain with `faces` faces.
    pub fn new(mut indices: Vec<usize>, faces: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptySubset);
        }
        indices.sort_unstable();
        indices.dedup();
        if let Some(&bad) = indices.iter().find(|&&i| i >= faces) {
            return Err(Error::InvalidFaceIndex { index: bad, faces });
        }
        Ok(Self(indices))
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }
}

impl TryFrom<Vec<usize>> for FaceSubset {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        FaceSubset::new(v, usize::MAX)
    }
}

impl From<FaceSubset> for Vec<usize> {
    fn from(s: FaceSubset) -> Self {
        s.0
    }
}

/// Result of a Euclidean projection onto the closed domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub point: Vec<f64>,
    /// Nonnegative weights with `point - x = sum_i multipliers[i] * normal_i`.
    pub multipliers: Vec<f64>,
}

/// Convex polyhedral domain. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyhedralDomain {
    dimension: usize,
    faces: Vec<Face>,
    interior_point: Vec<f64>,
    margin: f64,
}

impl PolyhedralDomain {
    /// Builds a domain, rejecting non-unit normals.
    pub fn new(dimension: usize, faces: Vec<Face>) -> Result<Self> {
        Self::with_normalization(dimension, faces, false)
    }

    /// Builds a domain. With `normalize = true`, a non-unit normal `n` and
    /// offset `a` are replaced by `n/|n|` and `a/|n|`. The potential attached
    /// to the face is then evaluated at the rescaled gap `(x.n - a)/|n|`,
    /// which is a different function of `x` unless the potential is
    /// scale-free.
    pub fn with_normalization(dimension: usize, mut faces: Vec<Face>, normalize: bool) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        for (i, f) in faces.iter_mut().enumerate() {
            if f.normal.len() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    got: f.normal.len(),
                });
            }
            if f.normal.iter().any(|v| !v.is_finite()) || !f.offset.is_finite() {
                return Err(Error::InvalidParameter(format!("face {i} has non-finite data")));
            }
            let n = linalg::norm(&f.normal);
            if (n - 1.0).abs() > UNIT_NORMAL_TOL {
                if normalize && n > 0.0 {
                    f.normal.iter_mut().for_each(|v| *v /= n);
                    f.offset /= n;
                } else {
                    return Err(Error::NonUnitNormal { index: i, norm: n });
                }
            }
        }
        for i in 0..faces.len() {
            for j in (i + 1)..faces.len() {
                if linalg::dist(&faces[i].normal, &faces[j].normal) <= UNIT_NORMAL_TOL {
                    return Err(Error::DuplicateNormal { first: i, second: j });
                }
            }
        }
        let (interior_point, margin) = max_margin_point(dimension, &faces)?;
        Ok(Self {
            dimension,
            faces,
            interior_point,
            margin,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face(&self, i: usize) -> Result<&Face> {
        self.faces.get(i).ok_or(Error::InvalidFaceIndex {
            index: i,
            faces: self.faces.len(),
        })
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    /// A point whose gaps are all at least [`Self::interior_margin`].
    pub fn interior_point(&self) -> &[f64] {
        &self.interior_point
    }

    /// Minimum gap of [`Self::interior_point`]: at least half the largest
    /// achievable minimum gap (capped at 1).
    pub fn interior_margin(&self) -> f64 {
        self.margin
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Signed gap `x . n_i - a_i`.
    pub fn gap(&self, x: &[f64], i: usize) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.face(i)?.gap(x))
    }

    pub fn gaps(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        Ok(self.faces.iter().map(|f| f.gap(x)).collect())
    }

    pub fn min_gap(&self, x: &[f64]) -> Result<f64> {
        Ok(self.gaps(x)?.into_iter().fold(f64::INFINITY, f64::min))
    }

    /// Faces whose gap is at most `eps`; `None` when no face is that close.
    pub fn active_set(&self, x: &[f64], eps: f64) -> Result<Option<FaceSubset>> {
        let idx: Vec<usize> = self
            .gaps(x)?
            .iter()
            .enumerate()
            .filter(|(_, &g)| g <= eps)
            .map(|(i, _)| i)
            .collect();
        if idx.is_empty() {
            Ok(None)
        } else {
            FaceSubset::new(idx, self.faces.len()).map(Some)
        }
    }

    /// Euclidean projection onto the closed domain, solved as a
    /// least-distance problem through its nonnegative least-squares dual.
    pub fn project(&self, x: &[f64]) -> Result<Projection> {
        self.check_dim(x)?;
        let m = self.faces.len();
        // displacement y must satisfy n_i . y >= -gap_i(x)
        let h: Vec<f64> = self.faces.iter().map(|f| -f.gap(x)).collect();
        if h.iter().all(|&v| v <= 0.0) {
            return Ok(Projection {
                point: x.to_vec(),
                multipliers: vec![0.0; m],
            });
        }
        let rows: Vec<&[f64]> = self.faces.iter().map(|f| f.normal.as_slice()).collect();
        let (y, lambda, converged) = linalg::least_distance(&rows, &h).ok_or(Error::EmptyInterior { margin: self.margin })?;
        if !converged {
            return Err(Error::NonConvergence {
                what: "polyhedral projection",
                iterations: 3 * m + 10,
            });
        }
        let point = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        Ok(Projection {
            point,
            multipliers: lambda,
        })
    }

    /// Whether face `i` is a facet: its hyperplane meets the domain in a set
    /// of dimension `d - 1`. A face that is not a facet touches the closed
    /// domain only inside intersections of other faces.
    pub fn is_facet(&self, i: usize) -> Result<bool> {
        let fi = self.face(i)?;
        let d = self.dimension;
        let base: Vec<f64> = fi.normal.iter().map(|v| v * fi.offset).collect();
        // orthonormal basis of the hyperplane direction, by Gram-Schmidt on
        // the coordinate axes
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d.saturating_sub(1));
        for k in 0..d {
            let mut v = vec![0.0; d];
            v[k] = 1.0;
            for b in std::iter::once(&fi.normal).chain(basis.iter()) {
                let c = linalg::dot(&v, b);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
            let n = linalg::norm(&v);
            if n > 1e-6 && basis.len() + 1 < d {
                basis.push(v.iter().map(|x| x / n).collect());
            }
        }
        let mut restricted: Vec<Face> = Vec::new();
        for (j, f) in self.faces.iter().enumerate() {
            if j == i {
                continue;
            }
            let c: Vec<f64> = basis.iter().map(|b| linalg::dot(b, &f.normal)).collect();
            let b = f.offset - linalg::dot(&f.normal, &base);
            let n = linalg::norm(&c);
            if n <= 1e-12 {
                // parallel: a constant gap of -b on the hyperplane
                if -b <= MIN_INTERIOR_MARGIN {
                    return Ok(false);
                }
                continue;
            }
            let c: Vec<f64> = c.iter().map(|v| v / n).collect();
            let b = b / n;
            match restricted.iter_mut().find(|g| linalg::dist(&g.normal, &c) <= 1e-9) {
                Some(g) => g.offset = g.offset.max(b),
                None => restricted.push(Face::new(c, b, 0, "")),
            }
        }
        match max_margin_point(basis.len().max(1), &restricted) {
            Ok(_) => Ok(true),
            Err(Error::EmptyInterior { .. }) => Ok(false),
            Err(e) => Err(e),
        }
    }

    /// Distance from `x` to the affine set `H_J = { z : z . n_j = a_j, j in J }`.
    pub fn subset_distance(&self, x: &[f64], subset: &FaceSubset) -> Result<f64> {
        self.check_dim(x)?;
        let (rows, rhs) = self.subset_system(subset)?;
        let (z, resid) = linalg::affine_projection(&rows, &rhs, x);
        if resid > 1e-9 * (1.0 + rhs.iter().fold(0.0_f64, |m, v| m.max(v.abs()))) {
            return Err(Error::EmptyIntersection {
                indices: subset.indices().to_vec(),
            });
        }
        Ok(linalg::dist(&z, x))
    }

    /// Precomputed least-squares map for repeated [`Self::subset_distance`]
    /// queries on the same subset.
    pub fn subset_projector(&self, subset: &FaceSubset) -> Result<SubsetProjector> {
        self.check_subset(subset)?;
        let (rows, rhs) = self.subset_system(subset)?;
        let pinv = linalg::pseudo_inverse(&rows);
        Ok(SubsetProjector {
            subset: subset.clone(),
            rows: rows.iter().map(|r| r.to_vec()).collect(),
            rhs,
            pinv,
        })
    }

    /// Checks that `H_J` is nonempty.
    pub fn check_subset(&self, subset: &FaceSubset) -> Result<()> {
        let x = self.interior_point.clone();
        self.subset_distance(&x, subset).map(|_| ())
    }

    fn subset_system(&self, subset: &FaceSubset) -> Result<(Vec<&[f64]>, Vec<f64>)> {
        let mut rows = Vec::with_capacity(subset.len());
        let mut rhs = Vec::with_capacity(subset.len());
        for &j in subset.indices() {
            let f = self.face(j)?;
            rows.push(f.normal.as_slice());
            rhs.push(f.offset);
        }
        Ok((rows, rhs))
    }
}

/// Distance to a fixed nonempty `H_J`, as `|N_J^+ (a_J - N_J x)|`.
#[derive(Debug, Clone)]
pub struct SubsetProjector {
    subset: FaceSubset,
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    /// `d x |J|`, row-major.
    pinv: Vec<Vec<f64>>,
}

impl SubsetProjector {
    pub fn subset(&self) -> &FaceSubset {
        &self.subset
    }

    /// Largest `|gap_j|` over `J`; a lower bound for [`Self::distance`].
    pub fn max_abs_gap(&self, x: &[f64]) -> f64 {
        self.rows
            .iter()
            .zip(&self.rhs)
            .map(|(r, a)| (linalg::dot(r, x) - a).abs())
            .fold(0.0, f64::max)
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        let r: Vec<f64> = self.rows.iter().zip(&self.rhs).map(|(row, a)| a - linalg::dot(row, x)).collect();
        self.pinv.iter().map(|p| linalg::dot(p, &r).powi(2)).sum::<f64>().sqrt()
    }
}

/// Maximises the minimum gap over the domain, capped at 1, by bisection on the
/// margin with a least-distance feasibility oracle.
fn max_margin_point(dimension: usize, faces: &[Face]) -> Result<(Vec<f64>, f64)> {
    if faces.is_empty() {
        return Ok((vec![0.0; dimension], 1.0));
    }
    let rows: Vec<&[f64]> = faces.iter().map(|f| f.normal.as_slice()).collect();
    let feasible = |eta: f64| -> Option<Vec<f64>> {
        let h: Vec<f64> = faces.iter().map(|f| f.offset + eta).collect();
        linalg::least_distance(&rows, &h).map(|(y, _, _)| y)
    };
    if let Some(p) = feasible(1.0) {
        return Ok((p, 1.0));
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid).is_some() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // the least-distance problem degenerates at the optimal margin itself,
    // so the witness is taken at half of it
    let witness = if lo > 0.0 { feasible(0.5 * lo) } else { None };
    match witness {
        Some(p) => {
            let margin = faces.iter().map(|f| f.gap(&p)).fold(f64::INFINITY, f64::min);
            if margin > MIN_INTERIOR_MARGIN {
                Ok((p, margin))
            } else {
                Err(Error::EmptyInterior { margin })
            }
        }
        None => Err(Error::EmptyInterior { margin: lo }),
    }
}
