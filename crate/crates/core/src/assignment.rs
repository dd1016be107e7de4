//! Maximum-score bipartite assignment.

use alloc::vec;
use alloc::vec::Vec;

/// Dense row-major score matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl ScoreMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged score matrix");
        Self { rows: rows.len(), cols, data: rows.concat() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: f64) {
        self.data[r * self.cols + c] = value;
    }

    /// Sum of the scores of `pairs`.
    pub fn total(&self, pairs: &[(usize, usize)]) -> f64 {
        pairs.iter().map(|&(r, c)| self.get(r, c)).sum()
    }
}

/// Maximum-total-score matching of rows to columns.
///
/// Scores must be finite. The matrix is padded to a square with zeros and
/// solved as a minimization over negated scores with the
/// shortest-augmenting-path Hungarian method. Pairs scoring 0 or less are
/// forbidden and never returned. Output is sorted by row.
pub fn assign(scores: &ScoreMatrix) -> Vec<(usize, usize)> {
    let n = scores.rows.max(scores.cols);
    if n == 0 {
        return Vec::new();
    }
    let cost = |i: usize, j: usize| -> f64 {
        if i < scores.rows && j < scores.cols {
            -scores.get(i, j).max(0.0)
        } else {
            0.0
        }
    };
    // 1-based arrays; index 0 is the virtual root.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut pairs: Vec<(usize, usize)> = (1..=n)
        .filter(|&j| owner[j] != 0)
        .map(|j| (owner[j] - 1, j - 1))
        .filter(|&(r, c)| r < scores.rows && c < scores.cols && scores.get(r, c) > 0.0)
        .collect();
    pairs.sort_unstable();
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        assert_eq!(assign(&ScoreMatrix::from_rows(&[vec![2.5]])), vec![(0, 0)]);
        let m = ScoreMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        let a = assign(&m);
        assert_eq!(a, vec![(0, 1), (1, 0)]);
        assert_eq!(m.total(&a), 4.0);
        assert!(assign(&ScoreMatrix::zeros(3, 4)).is_empty());
        assert!(assign(&ScoreMatrix::zeros(0, 4)).is_empty());
    }

    #[test]
    fn zero_pairs_are_forbidden() {
        let m = ScoreMatrix::from_rows(&[vec![0.0, 5.0], vec![0.0, 4.0]]);
        assert_eq!(assign(&m), vec![(0, 1)]);
    }

    #[test]
    fn rectangular() {
        let m = ScoreMatrix::from_rows(&[vec![1.0, 3.0, 0.5]]);
        assert_eq!(assign(&m), vec![(0, 1)]);
        let t = ScoreMatrix::from_rows(&[vec![1.0], vec![3.0], vec![0.5]]);
        assert_eq!(assign(&t), vec![(1, 0)]);
    }
}
