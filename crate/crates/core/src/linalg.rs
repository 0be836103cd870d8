//! Small dense linear-algebra kernels: nonnegative least squares,
//! least-distance programming and least-squares projection onto affine sets.
//!
//! Everything here works on row-major slices of `f64`; sizes are tiny (a few
//! dozen faces at most) so clarity wins over blocking.

use nalgebra::{DMatrix, DVector};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Outcome of [`nnls`].
#[derive(Debug, Clone)]
pub(crate) struct NnlsSolution {
    pub x: Vec<f64>,
    pub residual: Vec<f64>,
    pub converged: bool,
}

/// Lawson–Hanson active-set solver for `min |E x - f|` subject to `x >= 0`.
///
/// `e` is `rows x cols`, column-major access through `e[(r, c)]`.
pub(crate) fn nnls(e: &DMatrix<f64>, f: &DVector<f64>) -> NnlsSolution {
    let (rows, cols) = e.shape();
    let scale = e.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1.0)
        * f.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1.0);
    let tol = 1e-13 * scale * (rows.max(cols) as f64);

    let mut x = DVector::<f64>::zeros(cols);
    let mut passive = vec![false; cols];
    let max_outer = 3 * cols + 10;
    let mut converged = false;

    for _ in 0..max_outer {
        let resid = f - e * &x;
        let w = e.transpose() * &resid;
        let candidate = (0..cols)
            .filter(|&j| !passive[j])
            .max_by(|&a, &b| w[a].total_cmp(&w[b]));
        let Some(t) = candidate else {
            converged = true;
            break;
        };
        if w[t] <= tol {
            converged = true;
            break;
        }
        passive[t] = true;

        let mut inner_ok = false;
        for _ in 0..(3 * cols + 10) {
            let s = solve_passive(e, f, &passive);
            let blocked: Vec<usize> = (0..cols)
                .filter(|&j| passive[j] && s[j] <= 0.0)
                .collect();
            if blocked.is_empty() {
                x = s;
                inner_ok = true;
                break;
            }
            let mut alpha = 1.0_f64;
            for &j in &blocked {
                let denom = x[j] - s[j];
                if denom > 0.0 {
                    alpha = alpha.min(x[j] / denom);
                }
            }
            for j in 0..cols {
                if passive[j] {
                    x[j] += alpha * (s[j] - x[j]);
                }
            }
            for j in 0..cols {
                if passive[j] && x[j] <= tol {
                    passive[j] = false;
                    x[j] = 0.0;
                }
            }
        }
        if !inner_ok {
            break;
        }
    }

    let residual = e * &x - f;
    NnlsSolution {
        x: x.iter().copied().collect(),
        residual: residual.iter().copied().collect(),
        converged,
    }
}

fn solve_passive(e: &DMatrix<f64>, f: &DVector<f64>, passive: &[bool]) -> DVector<f64> {
    let idx: Vec<usize> = (0..passive.len()).filter(|&j| passive[j]).collect();
    if idx.is_empty() {
        return DVector::zeros(passive.len());
    }
    let sub = e.select_columns(idx.iter());
    let svd = sub.svd(true, true);
    let eps = 1e-12 * svd.singular_values.max().max(1e-300);
    let sol = svd
        .solve(f, eps)
        .unwrap_or_else(|_| DVector::zeros(idx.len()));
    let mut s = DVector::zeros(passive.len());
    for (k, &j) in idx.iter().enumerate() {
        s[j] = sol[k];
    }
    s
}

/// Least-distance programming: `min |y|` subject to `G y >= h`, with `G` given
/// by its rows. Returns `(y, lambda)` with `y = G^T lambda`, `lambda >= 0`, or
/// `None` when the constraints are infeasible.
pub(crate) fn least_distance(rows: &[&[f64]], h: &[f64]) -> Option<(Vec<f64>, Vec<f64>, bool)> {
    let m = rows.len();
    if m == 0 {
        return Some((Vec::new(), Vec::new(), true));
    }
    let d = rows[0].len();
    let mut e = DMatrix::<f64>::zeros(d + 1, m);
    for (j, row) in rows.iter().enumerate() {
        for i in 0..d {
            e[(i, j)] = row[i];
        }
        e[(d, j)] = h[j];
    }
    let mut f = DVector::<f64>::zeros(d + 1);
    f[d] = 1.0;
    let sol = nnls(&e, &f);
    let r_last = sol.residual[d];
    let rnorm = norm(&sol.residual);
    if rnorm <= 1e-12 || r_last >= -1e-14 {
        return None;
    }
    let y: Vec<f64> = sol.residual[..d].iter().map(|r| -r / r_last).collect();
    let lambda: Vec<f64> = sol.x.iter().map(|u| u / -r_last).collect();
    Some((y, lambda, sol.converged))
}

/// Nearest point of `{z : rows_j . z = rhs_j}` to `x`, by the pseudo-inverse.
/// Returns the point and the constraint residual `max_j |rows_j . z - rhs_j|`.
pub(crate) fn affine_projection(rows: &[&[f64]], rhs: &[f64], x: &[f64]) -> (Vec<f64>, f64) {
    let k = rows.len();
    let d = x.len();
    let a = DMatrix::from_fn(k, d, |i, j| rows[i][j]);
    let b = DVector::from_iterator(k, (0..k).map(|i| rhs[i] - dot(rows[i], x)));
    let svd = a.clone().svd(true, true);
    let eps = 1e-12 * svd.singular_values.max().max(1e-300);
    let corr = svd.solve(&b, eps).unwrap_or_else(|_| DVector::zeros(d));
    let z: Vec<f64> = x.iter().zip(corr.iter()).map(|(xi, ci)| xi + ci).collect();
    let resid = (0..k)
        .map(|i| (dot(rows[i], &z) - rhs[i]).abs())
        .fold(0.0, f64::max);
    (z, resid)
}

/// Moore-Penrose pseudo-inverse of the matrix with the given rows, returned
/// row-major (`cols x rows`).
pub(crate) fn pseudo_inverse(rows: &[&[f64]]) -> Vec<Vec<f64>> {
    let k = rows.len();
    let d = rows.first().map_or(0, |r| r.len());
    let a = DMatrix::from_fn(k, d, |i, j| rows[i][j]);
    let svd = a.svd(true, true);
    let eps = 1e-12 * svd.singular_values.max().max(1e-300);
    let p = svd.pseudo_inverse(eps).unwrap_or_else(|_| DMatrix::zeros(d, k));
    (0..d).map(|i| (0..k).map(|j| p[(i, j)]).collect()).collect()
}

/// Numerical rank of a set of vectors.
pub(crate) fn rank(vectors: &[&[f64]], tol: f64) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let d = vectors[0].len();
    let a = DMatrix::from_fn(vectors.len(), d, |i, j| vectors[i][j]);
    let sv = a.singular_values();
    let smax = sv.max();
    sv.iter().filter(|&&s| s > tol * smax.max(1.0)).count()
}

/// Least-squares coefficients `c` minimising `|sum_i c_i basis_i - target|`,
/// together with the residual norm.
pub(crate) fn coefficients(basis: &[&[f64]], target: &[f64]) -> (Vec<f64>, f64) {
    let d = target.len();
    let k = basis.len();
    let a = DMatrix::from_fn(d, k, |i, j| basis[j][i]);
    let b = DVector::from_column_slice(target);
    let svd = a.clone().svd(true, true);
    let eps = 1e-12 * svd.singular_values.max().max(1e-300);
    let c = svd.solve(&b, eps).unwrap_or_else(|_| DVector::zeros(k));
    let resid = (&a * &c - &b).norm();
    (c.iter().copied().collect(), resid)
}
