//! Dense linear algebra helpers on top of nalgebra's dynamic types.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// A point (or direction) in R^d.
pub type Point = DVector<f64>;
/// A dense real matrix.
pub type Matrix = DMatrix<f64>;

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn floor(x: f64) -> f64 {
    libm::floor(x)
}

/// Builds a matrix from row-major data with explicit dimensions.
pub fn matrix_from_row_major(rows: usize, cols: usize, data: &[f64]) -> Result<Matrix> {
    if data.len() != rows * cols {
        return Err(Error::DimensionMismatch {
            context: "row-major matrix data",
            expected: rows * cols,
            found: data.len(),
        });
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("matrix"));
    }
    Ok(Matrix::from_row_slice(rows, cols, data))
}

pub fn point(coords: &[f64]) -> Point {
    Point::from_column_slice(coords)
}

pub(crate) fn all_finite(v: &Point) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// `a^k` by repeated squaring.
pub fn mat_pow(a: &Matrix, k: usize) -> Matrix {
    let n = a.nrows();
    let mut result = Matrix::identity(n, n);
    let mut base = a.clone();
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    result
}

/// Stacks matrices with equal column counts on top of each other.
pub fn vstack(blocks: &[Matrix]) -> Result<Matrix> {
    let cols = blocks.first().map(|b| b.ncols()).ok_or(Error::EmptySet("matrix stack"))?;
    let mut rows = 0;
    for b in blocks {
        if b.ncols() != cols {
            return Err(Error::DimensionMismatch {
                context: "stacked observation maps",
                expected: cols,
                found: b.ncols(),
            });
        }
        rows += b.nrows();
    }
    let mut out = Matrix::zeros(rows, cols);
    let mut r0 = 0;
    for b in blocks {
        out.view_mut((r0, 0), (b.nrows(), cols)).copy_from(b);
        r0 += b.nrows();
    }
    Ok(out)
}

/// Solves a small square system with partial pivoting. Returns `None` when a
/// pivot falls below `rel_tol` times the largest absolute entry.
pub(crate) fn solve_square(a: &Matrix, b: &Point, rel_tol: f64) -> Option<Point> {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    let mut m = a.clone();
    let mut rhs = b.clone();
    let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(f64::MIN_POSITIVE);
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if m[(r, col)].abs() > m[(piv, col)].abs() {
                piv = r;
            }
        }
        if m[(piv, col)].abs() <= rel_tol * scale {
            return None;
        }
        if piv != col {
            m.swap_rows(piv, col);
            rhs.swap_rows(piv, col);
        }
        let d = m[(col, col)];
        for r in col + 1..n {
            let f = m[(r, col)] / d;
            if f != 0.0 {
                for c in col..n {
                    let v = m[(col, c)];
                    m[(r, c)] -= f * v;
                }
                let v = rhs[col];
                rhs[r] -= f * v;
            }
        }
    }
    let mut x = Point::zeros(n);
    for r in (0..n).rev() {
        let mut s = rhs[r];
        for c in r + 1..n {
            s -= m[(r, c)] * x[c];
        }
        x[r] = s / m[(r, r)];
    }
    Some(x)
}

/// Minimum-norm least-squares solution of `m x = rhs`. Singular values below
/// `rel_tol` times the largest one are treated as zero.
pub fn lstsq_min_norm(m: &Matrix, rhs: &Point, rel_tol: f64) -> Point {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Point::zeros(m.ncols());
    }
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0f64, |a, &s| a.max(s));
    if smax == 0.0 {
        return Point::zeros(m.ncols());
    }
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let mut x = Point::zeros(m.ncols());
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > rel_tol * smax {
            let coeff = u.column(i).dot(rhs) / s;
            x += vt.row(i).transpose() * coeff;
        }
    }
    x
}

/// Numerical rank with the same relative singular-value cutoff.
pub fn rank(m: &Matrix, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().singular_values();
    let smax = sv.iter().fold(0.0f64, |a, &s| a.max(s));
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Removes near-duplicate points; returns the indices of the kept points in
/// input order. Points are bucketed on a grid of cell size `eps` and compared
/// against neighbours in the same cell, so some pairs closer than `eps` that
/// straddle a cell boundary may both survive.
pub(crate) fn dedupe_indices(points: &[Point], eps: f64) -> Vec<usize> {
    let cell = if eps > 0.0 { eps } else { f64::MIN_POSITIVE };
    let mut seen: BTreeMap<Vec<i64>, Vec<usize>> = BTreeMap::new();
    let mut kept: Vec<usize> = Vec::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        let key: Vec<i64> = p.iter().map(|v| floor(v / cell) as i64).collect();
        let bucket = seen.entry(key).or_default();
        if bucket.iter().any(|&j| (p - &points[j]).norm() <= eps) {
            continue;
        }
        bucket.push(i);
        kept.push(i);
    }
    kept
}

/// Largest absolute coordinate over a point list (at least 1).
pub(crate) fn scale_of(points: &[Point]) -> f64 {
    points
        .iter()
        .flat_map(|p| p.iter())
        .fold(1.0f64, |acc, v| acc.max(v.abs()))
}
