//! Exact 1-Wasserstein distance between finite persistence diagrams.
//!
//! Points may be matched to each other or transported to the diagonal. The
//! ground metric is L-infinity on the plane, under which the cheapest
//! diagonal target for a point costs `persistence / 2`. The optimal partial
//! matching is solved exactly with the Hungarian algorithm on the
//! diagonally-augmented `(m + n) x (m + n)` cost matrix, which is intended
//! for test-scale diagrams rather than bulk distance computation.

use crate::diagram::{DiagramPoint, PersistenceDiagram};

fn linf(a: &DiagramPoint, b: &DiagramPoint) -> f64 {
    (a.birth - b.birth).abs().max((a.death - b.death).abs())
}

fn diagonal_cost(p: &DiagramPoint) -> f64 {
    p.persistence() / 2.0
}

/// 1-Wasserstein distance between the finite parts of two diagrams.
/// Essential classes are excluded.
pub fn wasserstein1(a: &PersistenceDiagram, b: &PersistenceDiagram) -> f64 {
    let m = a.points.len();
    let n = b.points.len();
    let size = m + n;
    if size == 0 {
        return 0.0;
    }
    // Rows: a-points then n diagonal slots; columns: b-points then m
    // diagonal slots. Diagonal-to-diagonal matches are free.
    let mut cost = vec![vec![0.0f64; size]; size];
    for (i, pa) in a.points.iter().enumerate() {
        for (j, pb) in b.points.iter().enumerate() {
            cost[i][j] = linf(pa, pb);
        }
        let to_diagonal = diagonal_cost(pa);
        for slot in cost[i][n..].iter_mut() {
            *slot = to_diagonal;
        }
    }
    for row in cost.iter_mut().skip(m) {
        for (j, pb) in b.points.iter().enumerate() {
            row[j] = diagonal_cost(pb);
        }
    }
    hungarian(&cost)
}

/// Minimum-cost perfect assignment on a square cost matrix
/// (shortest augmenting paths with potentials).
fn hungarian(cost: &[Vec<f64>]) -> f64 {
    let n = cost.len();
    if n == 0 {
        return 0.0;
    }
    let inf = f64::INFINITY;
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    // p[j]: 1-based row currently assigned to column j (0 = unassigned).
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
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
    let mut total = 0.0;
    for j in 1..=n {
        if p[j] != 0 {
            total += cost[p[j] - 1][j - 1];
        }
    }
    total
}
