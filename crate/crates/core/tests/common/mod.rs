//! Shared test oracles, all independent of the implementation paths they
//! check: a symmetric Jacobi eigensolver, adaptive Simpson quadrature, an
//! exhaustive diagram-matching solver, a flood-fill component counter, a
//! naive greedy pivot reference, and a synthetic dataset builder.

#![allow(dead_code)]

use std::path::{Path, PathBuf};

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sparse_tda::diagram::{synth_diagram, ClusterSpec, DiagramPoint, PersistenceDiagram};
use sparse_tda::pipeline::{
    ClassifierKind, ClassifierParams, DatasetManifest, ManifestEntry, PiParams, SplitParams,
};
use sparse_tda::pimage::WeightKind;
use sparse_tda::sublevel::Connectivity;

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues in descending order with matching eigenvector columns.
pub fn jacobi_eigen(a: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let mut m = a.clone();
    let mut v: Array2<f64> = Array2::eye(n);
    for _ in 0..200 {
        let mut off: f64 = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(m[[p, q]].abs());
            }
        }
        let scale: f64 = (0..n).map(|i| m[[i, i]].abs()).fold(1e-300, f64::max);
        if off <= scale * 1e-15 {
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq.abs() <= scale * 1e-300 {
                    continue;
                }
                let theta = (m[[q, q]] - m[[p, p]]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[j, j]].partial_cmp(&m[[i, i]]).unwrap());
    let evals: Vec<f64> = order.iter().map(|&i| m[[i, i]]).collect();
    let mut evecs = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            evecs[[k, dst]] = v[[k, src]];
        }
    }
    (evals, evecs)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + adaptive_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson quadrature with refinement to convergence.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(a, b, fa, fm, fb);
    adaptive_step(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Nested adaptive Simpson over a rectangle.
pub fn adaptive_simpson_2d<F: Fn(f64, f64) -> f64>(
    f: &F,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    tol: f64,
) -> f64 {
    adaptive_simpson(&|x| adaptive_simpson(&|y| f(x, y), y0, y1, tol / 10.0), x0, x1, tol)
}

fn linf(a: &DiagramPoint, b: &DiagramPoint) -> f64 {
    (a.birth - b.birth).abs().max((a.death - b.death).abs())
}

fn diag_cost(p: &DiagramPoint) -> f64 {
    (p.death - p.birth) / 2.0
}

/// Exhaustive minimum-cost partial matching between two small diagrams,
/// allowing diagonal assignments on both sides.
pub fn brute_force_w1(a: &PersistenceDiagram, b: &PersistenceDiagram) -> f64 {
    fn rec(i: usize, used: &mut [bool], a: &[DiagramPoint], b: &[DiagramPoint]) -> f64 {
        if i == a.len() {
            return b
                .iter()
                .zip(used.iter())
                .filter(|(_, &u)| !u)
                .map(|(p, _)| diag_cost(p))
                .sum();
        }
        let mut best = diag_cost(&a[i]) + rec(i + 1, used, a, b);
        for j in 0..b.len() {
            if !used[j] {
                used[j] = true;
                let cost = linf(&a[i], &b[j]) + rec(i + 1, used, a, b);
                used[j] = false;
                if cost < best {
                    best = cost;
                }
            }
        }
        best
    }
    let mut used = vec![false; b.points.len()];
    rec(0, &mut used, &a.points, &b.points)
}

/// Connected components of `{v <= threshold}` by flood fill.
pub fn flood_fill_components(
    values: &[f64],
    rows: usize,
    cols: usize,
    threshold: f64,
    connectivity: Connectivity,
) -> usize {
    let n = rows * cols;
    let mut visited = vec![false; n];
    let mut components = 0usize;
    let mut stack = Vec::new();
    for start in 0..n {
        if visited[start] || values[start] > threshold {
            continue;
        }
        components += 1;
        visited[start] = true;
        stack.push(start);
        while let Some(v) = stack.pop() {
            let (r, c) = (v / cols, v % cols);
            let push = |rr: isize, cc: isize, stack: &mut Vec<usize>, visited: &mut [bool]| {
                if rr < 0 || cc < 0 || rr as usize >= rows || cc as usize >= cols {
                    return;
                }
                let u = rr as usize * cols + cc as usize;
                if !visited[u] && values[u] <= threshold {
                    visited[u] = true;
                    stack.push(u);
                }
            };
            let (ri, ci) = (r as isize, c as isize);
            push(ri, ci - 1, &mut stack, &mut visited);
            push(ri, ci + 1, &mut stack, &mut visited);
            if rows > 1 {
                push(ri - 1, ci, &mut stack, &mut visited);
                push(ri + 1, ci, &mut stack, &mut visited);
                if connectivity == Connectivity::Eight {
                    push(ri - 1, ci - 1, &mut stack, &mut visited);
                    push(ri - 1, ci + 1, &mut stack, &mut visited);
                    push(ri + 1, ci - 1, &mut stack, &mut visited);
                    push(ri + 1, ci + 1, &mut stack, &mut visited);
                }
            }
        }
    }
    components
}

/// Minimum value of every connected component of the full grid, sorted
/// ascending (flood-fill labeling; independent of the union-find path).
pub fn component_minima(
    values: &[f64],
    rows: usize,
    cols: usize,
    connectivity: Connectivity,
) -> Vec<f64> {
    let n = rows * cols;
    let mut visited = vec![false; n];
    let mut minima = Vec::new();
    let mut stack = Vec::new();
    for start in 0..n {
        if visited[start] {
            continue;
        }
        let mut min_value = values[start];
        visited[start] = true;
        stack.push(start);
        while let Some(v) = stack.pop() {
            min_value = min_value.min(values[v]);
            let (r, c) = (v / cols, v % cols);
            let push = |rr: isize, cc: isize, stack: &mut Vec<usize>, visited: &mut [bool]| {
                if rr < 0 || cc < 0 || rr as usize >= rows || cc as usize >= cols {
                    return;
                }
                let u = rr as usize * cols + cc as usize;
                if !visited[u] {
                    visited[u] = true;
                    stack.push(u);
                }
            };
            let (ri, ci) = (r as isize, c as isize);
            push(ri, ci - 1, &mut stack, &mut visited);
            push(ri, ci + 1, &mut stack, &mut visited);
            if rows > 1 {
                push(ri - 1, ci, &mut stack, &mut visited);
                push(ri + 1, ci, &mut stack, &mut visited);
                if connectivity == Connectivity::Eight {
                    push(ri - 1, ci - 1, &mut stack, &mut visited);
                    push(ri - 1, ci + 1, &mut stack, &mut visited);
                    push(ri + 1, ci - 1, &mut stack, &mut visited);
                    push(ri + 1, ci + 1, &mut stack, &mut visited);
                }
            }
        }
        minima.push(min_value);
    }
    minima.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    minima
}

/// Checks the threshold-count identity of a diagram against flood fill at
/// one threshold: components of the sublevel set must equal essentials born
/// by `t` plus finite points alive at `t` (birth <= t < death).
pub fn threshold_count_matches(
    diagram: &PersistenceDiagram,
    values: &[f64],
    rows: usize,
    cols: usize,
    threshold: f64,
    connectivity: Connectivity,
) -> bool {
    let components = flood_fill_components(values, rows, cols, threshold, connectivity);
    let essentials = diagram.essential.iter().filter(|&&b| b <= threshold).count();
    let alive = diagram
        .points
        .iter()
        .filter(|p| p.birth <= threshold && threshold < p.death)
        .count();
    components == essentials + alive
}

/// Naive greedy pivot reference: explicit residual-norm recomputation each
/// step against the already-chosen orthonormal directions, no downdating.
/// Ties break to the lowest column index; after the rank is exhausted the
/// remaining indices follow in ascending order.
pub fn naive_greedy_pivots(components: &Array2<f64>) -> (Vec<usize>, Vec<f64>) {
    let (p, r) = components.dim();
    // Columns of m = U^T are the pixel rows of U.
    let col = |j: usize| -> Vec<f64> { (0..r).map(|k| components[[j, k]]).collect() };
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut remaining: Vec<usize> = (0..p).collect();
    let mut order = Vec::with_capacity(p);
    let mut diag = Vec::with_capacity(r);
    for _ in 0..r {
        let mut best_idx = usize::MAX;
        let mut best_norm = -1.0f64;
        let mut best_residual = Vec::new();
        for &j in &remaining {
            let mut resid = col(j);
            for q in &basis {
                let dot: f64 = resid.iter().zip(q).map(|(a, b)| a * b).sum();
                for (rv, qv) in resid.iter_mut().zip(q) {
                    *rv -= dot * qv;
                }
            }
            let norm2: f64 = resid.iter().map(|x| x * x).sum();
            if norm2 > best_norm {
                best_norm = norm2;
                best_idx = j;
                best_residual = resid;
            }
        }
        order.push(best_idx);
        remaining.retain(|&j| j != best_idx);
        diag.push(best_norm.max(0.0).sqrt());
        let norm = best_norm.max(0.0).sqrt();
        if norm > 0.0 {
            let mut q: Vec<f64> = best_residual.iter().map(|x| x / norm).collect();
            // One re-orthogonalization pass for stability.
            for prev in &basis {
                let dot: f64 = q.iter().zip(prev).map(|(a, b)| a * b).sum();
                for (qv, pv) in q.iter_mut().zip(prev) {
                    *qv -= dot * pv;
                }
            }
            let n2: f64 = q.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n2 > 0.0 {
                for qv in q.iter_mut() {
                    *qv /= n2;
                }
            }
            basis.push(q);
        }
    }
    order.extend(remaining);
    (order, diag)
}

/// Random matrix with roughly standard-normal entries (sum of uniforms).
pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    let mut m = Array2::zeros((rows, cols));
    for i in 0..rows {
        for j in 0..cols {
            let s: f64 = (0..12).map(|_| rng.random_range(0.0..1.0)).sum::<f64>() - 6.0;
            m[[i, j]] = s;
        }
    }
    m
}

/// Orthonormalizes the columns of a random p x r matrix (two Gram-Schmidt
/// passes).
pub fn random_orthonormal(rng: &mut ChaCha8Rng, p: usize, r: usize) -> Array2<f64> {
    assert!(r <= p);
    let mut m = random_matrix(rng, p, r);
    for j in 0..r {
        for _ in 0..2 {
            for prev in 0..j {
                let dot: f64 = (0..p).map(|i| m[[i, j]] * m[[i, prev]]).sum();
                for i in 0..p {
                    m[[i, j]] -= dot * m[[i, prev]];
                }
            }
        }
        let norm: f64 = (0..p).map(|i| m[[i, j]] * m[[i, j]]).sum::<f64>().sqrt();
        assert!(norm > 1e-8, "degenerate random column");
        for i in 0..p {
            m[[i, j]] /= norm;
        }
    }
    m
}

/// Random diagram with `count` points inside the unit square of
/// birth-persistence space.
pub fn random_diagram(rng: &mut ChaCha8Rng, count: usize) -> PersistenceDiagram {
    let pairs: Vec<(f64, f64)> = (0..count)
        .map(|_| {
            let birth = rng.random_range(0.0..1.0);
            let pers = rng.random_range(0.0..1.0);
            (birth, birth + pers)
        })
        .collect();
    PersistenceDiagram::from_pairs(&pairs).unwrap()
}

/// Cluster layout of the three synthetic classes: one shared background
/// cluster plus one signature cluster per class at a distinct location.
pub fn blob_class_spec(class: usize) -> Vec<ClusterSpec> {
    let background = ClusterSpec {
        birth: 0.1,
        death: 0.25,
        spread: 0.03,
        count: 10,
    };
    let signature = match class {
        1 => ClusterSpec {
            birth: 0.3,
            death: 0.7,
            spread: 0.03,
            count: 25,
        },
        2 => ClusterSpec {
            birth: 0.7,
            death: 1.3,
            spread: 0.03,
            count: 25,
        },
        3 => ClusterSpec {
            birth: 0.5,
            death: 1.7,
            spread: 0.03,
            count: 25,
        },
        _ => panic!("classes are 1..=3"),
    };
    vec![background, signature]
}

/// Writes a 3-class synthetic `.pd` dataset plus manifest into `dir`.
/// Returns the manifest path.
pub fn write_blob_dataset(
    dir: &Path,
    diagrams_per_class: usize,
    base_seed: u64,
    kind: ClassifierKind,
    cv_folds: usize,
) -> PathBuf {
    let mut entries = Vec::new();
    for class in 1..=3usize {
        let spec = blob_class_spec(class);
        for i in 0..diagrams_per_class {
            let seed = base_seed + class as u64 * 10_000 + i as u64;
            let d = synth_diagram(&spec, seed).unwrap();
            let name = format!("class{class}_{i:03}.pd");
            d.write_file(dir.join(&name)).unwrap();
            entries.push(ManifestEntry {
                path: PathBuf::from(name),
                label: class,
            });
        }
    }
    let manifest = DatasetManifest {
        entries,
        pi_params: PiParams {
            resolution: (30, 30),
            sigma: 0.1,
            weighting: WeightKind::Linear,
        },
        split: SplitParams {
            train_fraction: 0.7,
            seed: 42,
        },
        classifier: ClassifierParams {
            kind,
            s_override: None,
            cv_folds,
            tolerance: 1e-3,
        },
        connectivity: None,
        predefined_splits: None,
    };
    let path = dir.join("manifest.json");
    std::fs::write(&path, manifest.to_json()).unwrap();
    path
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
