//! Minimum-cost perfect assignment (Kuhn–Munkres with row/column potentials).

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// An optimal assignment `row i -> column permutation[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub permutation: Vec<usize>,
    pub cost: f64,
}

/// Solves the square assignment problem.
///
/// Among all optimal permutations the lexicographically smallest is returned.
/// Optimality ties are decided on reduced costs with a tolerance of
/// `1e-9 (1 + max|cost|)`.
pub fn hungarian(cost: &Matrix) -> Result<Assignment> {
    if !cost.is_square() {
        return Err(Error::arg(format!("assignment needs a square cost matrix, got {:?}", cost.shape())));
    }
    let n = cost.rows();
    let (u, v) = potentials(cost);
    let tol = 1e-9 * (1.0 + cost.max_abs());
    let tight: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|j| cost[(i, j)] - u[i] - v[j] <= tol).collect())
        .collect();
    let permutation = lexicographic_matching(&tight)
        .ok_or_else(|| Error::numeric("no perfect matching on tight edges"))?;
    let total = permutation.iter().enumerate().map(|(i, &j)| cost[(i, j)]).sum();
    Ok(Assignment { permutation, cost: total })
}

/// Dual potentials with `cost[i][j] - u[i] - v[j] >= 0`, tight on an optimal matching.
fn potentials(cost: &Matrix) -> (Vec<f64>, Vec<f64>) {
    let n = cost.rows();
    // 1-based arrays; index 0 is the virtual column of the shortest-path search
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[(i0 - 1, j - 1)] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (u[1..].to_vec(), v[1..].to_vec())
}

/// Lexicographically smallest perfect matching in a bipartite graph given as
/// an adjacency matrix, or `None` when no perfect matching exists.
fn lexicographic_matching(adj: &[Vec<bool>]) -> Option<Vec<usize>> {
    let n = adj.len();
    let mut row_of: Vec<Option<usize>> = vec![None; n];
    let mut col_of: Vec<Option<usize>> = vec![None; n];
    for r in 0..n {
        let mut seen = vec![false; n];
        if !augment(adj, r, &mut seen, &mut row_of, &mut col_of, &[]) {
            return None;
        }
    }
    // fix rows in order, each to the smallest column that still admits a perfect matching
    let mut fixed = vec![false; n];
    for r in 0..n {
        for c in 0..n {
            if !adj[r][c] {
                continue;
            }
            if col_of[r] == Some(c) {
                break;
            }
            let other = row_of[c].expect("matching is perfect");
            if fixed[other] {
                continue;
            }
            // tentatively give c to r; `other` must find a new column through alternating paths
            let (saved_rows, saved_cols) = (row_of.clone(), col_of.clone());
            let freed = col_of[r].take().expect("matching is perfect");
            row_of[freed] = None;
            row_of[c] = Some(r);
            col_of[r] = Some(c);
            col_of[other] = None;
            let mut seen = vec![false; n];
            seen[c] = true;
            let mut blocked = fixed.clone();
            blocked[r] = true;
            if augment(adj, other, &mut seen, &mut row_of, &mut col_of, &blocked) {
                break;
            }
            row_of = saved_rows;
            col_of = saved_cols;
        }
        fixed[r] = true;
    }
    col_of.into_iter().collect()
}

fn augment(
    adj: &[Vec<bool>],
    r: usize,
    seen: &mut [bool],
    row_of: &mut [Option<usize>],
    col_of: &mut [Option<usize>],
    blocked: &[bool],
) -> bool {
    for c in 0..adj.len() {
        if adj[r][c] && !seen[c] {
            seen[c] = true;
            let free = match row_of[c] {
                None => true,
                Some(r2) => {
                    !blocked.get(r2).copied().unwrap_or(false)
                        && augment(adj, r2, seen, row_of, col_of, blocked)
                }
            };
            if free {
                row_of[c] = Some(r);
                col_of[r] = Some(c);
                return true;
            }
        }
    }
    false
}

/// Brute force over all permutations; test oracle for small `n`.
#[cfg(test)]
fn brute_force_min(cost: &Matrix) -> f64 {
    fn rec(cost: &Matrix, row: usize, used: &mut Vec<bool>, acc: f64, best: &mut f64) {
        let n = cost.rows();
        if row == n {
            *best = best.min(acc);
            return;
        }
        for c in 0..n {
            if !used[c] {
                used[c] = true;
                rec(cost, row + 1, used, acc + cost[(row, c)], best);
                used[c] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    rec(cost, 0, &mut vec![false; cost.rows()], 0.0, &mut best);
    best
}
