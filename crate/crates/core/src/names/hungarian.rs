//! Minimum-cost perfect assignment on a square matrix.
//!
//! Shortest augmenting paths with row/column potentials, O(n^3). After the
//! optimum is found, ties are resolved towards the lexicographically smallest
//! row-to-column assignment by rotating along alternating cycles of tight
//! edges (zero reduced cost under the final potentials), which keeps the
//! total cost unchanged.

use std::collections::VecDeque;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// `columns[row]` is the column assigned to `row`.
    pub columns: Vec<usize>,
    pub total: f64,
}

/// Solves the assignment problem for a row-major `n x n` cost matrix.
pub fn solve(cost: &[f64], n: usize) -> Result<Assignment> {
    if cost.len() != n * n {
        return Err(Error::invalid(format!(
            "cost matrix must be square: {} entries for n = {n}",
            cost.len()
        )));
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(Error::invalid("cost matrix has non-finite entries"));
    }
    if n == 0 {
        return Ok(Assignment {
            columns: vec![],
            total: 0.0,
        });
    }
    let (mut columns, u, v) = augment(cost, n);
    let scale = cost.iter().fold(1.0f64, |m, c| m.max(c.abs()));
    let tol = 1e-9 * scale;
    let tight = |i: usize, j: usize| (cost[i * n + j] - u[i] - v[j]).abs() <= tol;
    lexicographic_min(&mut columns, n, tight);
    let total = columns.iter().enumerate().map(|(i, &j)| cost[i * n + j]).sum();
    Ok(Assignment { columns, total })
}

/// Returns (row -> column, row potentials, column potentials).
fn augment(cost: &[f64], n: usize) -> (Vec<usize>, Vec<f64>, Vec<f64>) {
    // 1-based internally; index 0 is the virtual source.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut col_row = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        col_row[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = col_row[j0];
            let row = &cost[(i0 - 1) * n..i0 * n];
            let ui0 = u[i0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = row[j - 1] - ui0 - v[j];
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
                    u[col_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if col_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            col_row[j0] = col_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut columns = vec![0usize; n];
    for j in 1..=n {
        columns[col_row[j] - 1] = j - 1;
    }
    (columns, u[1..].to_vec(), v[1..].to_vec())
}

fn lexicographic_min(columns: &mut [usize], n: usize, tight: impl Fn(usize, usize) -> bool) {
    let mut owner = vec![0usize; n];
    for (i, &j) in columns.iter().enumerate() {
        owner[j] = i;
    }
    let mut fixed = vec![false; n];
    for i in 0..n {
        for j in 0..columns[i] {
            let holder = owner[j];
            if fixed[holder] || !tight(i, j) {
                continue;
            }
            // Alternating path: holder gives up j and must reach column columns[i]
            // through tight edges of unfixed rows other than i.
            if let Some(path) = find_path(holder, columns[i], i, columns, &owner, &fixed, &tight, n) {
                for (r, c) in path {
                    columns[r] = c;
                    owner[c] = r;
                }
                columns[i] = j;
                owner[j] = i;
                break;
            }
        }
        fixed[i] = true;
    }
}

/// BFS over rows; returns the (row, new column) moves along the path.
#[allow(clippy::too_many_arguments)]
fn find_path(
    start: usize,
    target: usize,
    skip: usize,
    columns: &[usize],
    owner: &[usize],
    fixed: &[bool],
    tight: &impl Fn(usize, usize) -> bool,
    n: usize,
) -> Option<Vec<(usize, usize)>> {
    // parent[row] = (previous row, column that row takes)
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut seen = vec![false; n];
    seen[start] = true;
    seen[skip] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(r) = queue.pop_front() {
        for c in 0..n {
            if c == columns[r] || !tight(r, c) {
                continue;
            }
            if c == target {
                let mut moves = vec![(r, c)];
                let mut cur = r;
                while let Some((prev, col)) = parent[cur] {
                    moves.push((prev, col));
                    cur = prev;
                }
                return Some(moves);
            }
            let next = owner[c];
            if seen[next] || fixed[next] {
                continue;
            }
            seen[next] = true;
            // `r` takes `c` from `next`.
            parent[next] = Some((r, c));
            queue.push_back(next);
        }
    }
    None
}
