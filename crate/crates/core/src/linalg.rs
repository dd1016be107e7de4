//! Small dense linear algebra helpers: 3x3 matrices and a one-sided Jacobi SVD.

use alloc::vec;
use alloc::vec::Vec;

pub(crate) type Mat3 = [[f64; 3]; 3];

pub(crate) const IDENTITY: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

pub(crate) fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub(crate) fn mat_vec(a: &Mat3, x: [f64; 3]) -> [f64; 3] {
    [
        a[0][0] * x[0] + a[0][1] * x[1] + a[0][2] * x[2],
        a[1][0] * x[0] + a[1][1] * x[1] + a[1][2] * x[2],
        a[2][0] * x[0] + a[2][1] * x[1] + a[2][2] * x[2],
    ]
}

pub(crate) fn det(a: &Mat3) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

/// Inverse via the adjugate. Returns `None` for an exactly singular matrix.
pub(crate) fn inverse(a: &Mat3) -> Option<Mat3> {
    let d = det(a);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    let c = |r0: usize, c0: usize, r1: usize, c1: usize| a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0];
    let adj = [
        [c(1, 1, 2, 2), -c(0, 1, 2, 2), c(0, 1, 1, 2)],
        [-c(1, 0, 2, 2), c(0, 0, 2, 2), -c(0, 0, 1, 2)],
        [c(1, 0, 2, 1), -c(0, 0, 2, 1), c(0, 0, 1, 1)],
    ];
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = adj[i][j] / d;
        }
    }
    Some(out)
}

pub(crate) fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub(crate) fn norm3(a: [f64; 3]) -> f64 {
    libm::sqrt(dot3(a, a))
}

/// Singular values (descending) and right singular vectors of a dense matrix.
pub(crate) struct Svd {
    pub values: Vec<f64>,
    /// Column `k` of V, stored as `vectors[k]`, pairs with `values[k]`.
    pub vectors: Vec<Vec<f64>>,
}

/// One-sided (Hestenes) Jacobi SVD of a row-major `rows x cols` matrix.
///
/// Only the right singular vectors are accumulated. Works for any shape, but
/// when `rows < cols` the trailing singular values are zero.
pub(crate) fn svd(data: &[f64], rows: usize, cols: usize) -> Svd {
    debug_assert_eq!(data.len(), rows * cols);
    // Work on columns: u[j] is column j of A.
    let mut u: Vec<Vec<f64>> = (0..cols).map(|j| (0..rows).map(|i| data[i * cols + j]).collect()).collect();
    let mut v: Vec<Vec<f64>> = (0..cols)
        .map(|j| {
            let mut e = vec![0.0; cols];
            e[j] = 1.0;
            e
        })
        .collect();

    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let alpha: f64 = u[p].iter().map(|x| x * x).sum();
                let beta: f64 = u[q].iter().map(|x| x * x).sum();
                let gamma: f64 = u[p].iter().zip(&u[q]).map(|(a, b)| a * b).sum();
                if gamma == 0.0 || gamma.abs() <= 1e-15 * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + libm::sqrt(1.0 + zeta * zeta));
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                rotate_pair(&mut u, p, q, c, s);
                rotate_pair(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<(f64, usize)> = u
        .iter()
        .enumerate()
        .map(|(j, col)| (libm::sqrt(col.iter().map(|x| x * x).sum()), j))
        .collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    Svd {
        values: order.iter().map(|&(s, _)| s).collect(),
        vectors: order.iter().map(|&(_, j)| v[j].clone()).collect(),
    }
}

fn rotate_pair(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(q);
    let a = &mut left[p];
    let b = &mut right[0];
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        let xp = c * *x - s * *y;
        let yq = s * *x + c * *y;
        *x = xp;
        *y = yq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_roundtrip() {
        let a = [[2.0, 1.0, 0.5], [0.0, 3.0, -1.0], [0.25, 0.0, 1.0]];
        let inv = inverse(&a).unwrap();
        let p = mat_mul(&a, &inv);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((p[i][j] - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn svd_finds_null_vector() {
        // Rows orthogonal to (1, -2, 1).
        let rows = [[1.0, 1.0, 1.0], [2.0, 1.0, 0.0], [0.0, 1.0, 2.0], [3.0, 2.0, 1.0]];
        let data: Vec<f64> = rows.iter().flatten().copied().collect();
        let s = svd(&data, 4, 3);
        assert!(s.values[2] < 1e-12);
        let n = &s.vectors[2];
        let scale = n[0];
        assert!((n[1] / scale + 2.0).abs() < 1e-12);
        assert!((n[2] / scale - 1.0).abs() < 1e-12);
    }

    #[test]
    fn svd_values_match_known_diagonal() {
        let data = [3.0, 0.0, 0.0, 0.0, -5.0, 0.0];
        let s = svd(&data, 2, 3);
        assert_eq!(s.values.len(), 3);
        assert!((s.values[0] - 5.0).abs() < 1e-14);
        assert!((s.values[1] - 3.0).abs() < 1e-14);
        assert_eq!(s.values[2], 0.0);
    }
}
