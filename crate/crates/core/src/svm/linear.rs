//! L1-regularized linear baseline.
//!
//! One-vs-rest binary problems minimize `||w||_1 + C * sum max(0, 1 - y w.x)^2`
//! (squared hinge, no bias term) by cyclic proximal coordinate descent. Each
//! coordinate step majorizes the loss with its global curvature bound
//! `H_j = 2 C sum_i x_ij^2` and soft-thresholds, which guarantees the
//! objective never increases and produces exact zeros.

use crate::error::{Error, Result};
use crate::svm::grid::stratified_folds;
use crate::svm::LabeledSet;

const MAX_SWEEPS: usize = 20_000;

/// Result of one binary L1 fit.
#[derive(Debug, Clone, PartialEq)]
pub struct L1Fit {
    pub weights: Vec<f64>,
    /// Objective value after the initial point and after every sweep.
    pub objective_trace: Vec<f64>,
}

fn l1_objective(vectors: &[Vec<f64>], margins: &[f64], weights: &[f64], c: f64) -> f64 {
    debug_assert_eq!(vectors.len(), margins.len());
    let l1: f64 = weights.iter().map(|w| w.abs()).sum();
    let loss: f64 = margins
        .iter()
        .map(|&m| {
            let v = (1.0 - m).max(0.0);
            v * v
        })
        .sum();
    l1 + c * loss
}

/// Solves one binary problem with labels in `{-1, +1}`; `warm` seeds the
/// weight vector.
pub fn train_l1_binary(
    vectors: &[Vec<f64>],
    y: &[f64],
    c: f64,
    tol: f64,
    warm: Option<&[f64]>,
) -> Result<L1Fit> {
    if vectors.is_empty() || vectors.len() != y.len() {
        return Err(Error::validation("mismatched vectors and labels"));
    }
    if c <= 0.0 || !c.is_finite() {
        return Err(Error::validation(format!("C {c} must be > 0")));
    }
    if tol <= 0.0 || !tol.is_finite() {
        return Err(Error::validation(format!("tolerance {tol} must be > 0")));
    }
    let n = vectors.len();
    let dim = vectors[0].len();
    let mut weights = match warm {
        Some(w) if w.len() == dim => w.to_vec(),
        Some(_) => return Err(Error::validation("warm-start length mismatch")),
        None => vec![0.0; dim],
    };

    // Global curvature bound per coordinate.
    let curvature: Vec<f64> = (0..dim)
        .map(|j| 2.0 * c * vectors.iter().map(|v| v[j] * v[j]).sum::<f64>())
        .collect();

    // margins[i] = y_i * w.x_i, maintained incrementally.
    let mut margins: Vec<f64> = (0..n)
        .map(|i| y[i] * dot(&vectors[i], &weights))
        .collect();

    let mut trace = vec![l1_objective(vectors, &margins, &weights, c)];
    for _ in 0..MAX_SWEEPS {
        for j in 0..dim {
            let h = curvature[j];
            if h == 0.0 {
                continue;
            }
            let mut g = 0.0;
            for i in 0..n {
                if margins[i] < 1.0 {
                    g -= 2.0 * c * (1.0 - margins[i]) * y[i] * vectors[i][j];
                }
            }
            let z = weights[j] - g / h;
            let threshold = 1.0 / h;
            let new_w = if z > threshold {
                z - threshold
            } else if z < -threshold {
                z + threshold
            } else {
                0.0
            };
            let delta = new_w - weights[j];
            if delta != 0.0 {
                weights[j] = new_w;
                for i in 0..n {
                    margins[i] += y[i] * vectors[i][j] * delta;
                }
            }
        }
        let obj = l1_objective(vectors, &margins, &weights, c);
        let prev = *trace.last().expect("non-empty");
        trace.push(obj);
        if prev - obj <= tol * (1.0 + obj.abs()) {
            return Ok(L1Fit {
                weights,
                objective_trace: trace,
            });
        }
    }
    let last = trace.len() - 1;
    Err(Error::Convergence {
        message: format!("L1 coordinate descent hit the sweep cap ({MAX_SWEEPS})"),
        residual: trace[last - 1] - trace[last],
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// One-vs-rest L1-regularized linear model.
#[derive(Debug, Clone, PartialEq)]
pub struct L1Model {
    pub classes: Vec<usize>,
    /// One weight vector per class, aligned with `classes`.
    pub weights: Vec<Vec<f64>>,
    pub cost: f64,
}

impl L1Model {
    /// Number of exactly-zero weights across all classes.
    pub fn exact_zero_count(&self) -> usize {
        self.weights
            .iter()
            .map(|w| w.iter().filter(|&&v| v == 0.0).count())
            .sum()
    }
}

/// Trains one binary problem per class against the rest.
pub fn train_l1(data: &LabeledSet, c: f64, tol: f64) -> Result<L1Model> {
    let classes = data.classes();
    let mut weights = Vec::with_capacity(classes.len());
    for &class in &classes {
        let y: Vec<f64> = data
            .labels
            .iter()
            .map(|&l| if l == class { 1.0 } else { -1.0 })
            .collect();
        let fit = train_l1_binary(&data.vectors, &y, c, tol, None)?;
        weights.push(fit.weights);
    }
    Ok(L1Model {
        classes,
        weights,
        cost: c,
    })
}

/// Highest one-vs-rest score wins; ties break to the lowest class identifier.
pub fn predict_l1(model: &L1Model, x: &[f64]) -> Result<usize> {
    if model.weights.iter().any(|w| w.len() != x.len()) {
        return Err(Error::validation(format!(
            "input length {} does not match model dimension",
            x.len()
        )));
    }
    let mut best_class = model.classes[0];
    let mut best_score = f64::NEG_INFINITY;
    for (class, w) in model.classes.iter().zip(&model.weights) {
        let score = dot(w, x);
        if score > best_score {
            best_score = score;
            best_class = *class;
        }
    }
    Ok(best_class)
}

/// C grid for the L1 baseline: 50 exponentially spaced values.
#[derive(Debug, Clone, PartialEq)]
pub struct L1GridSpec {
    pub c_values: Vec<f64>,
    pub seed: u64,
    pub tol: f64,
}

impl L1GridSpec {
    pub fn new(seed: u64, tol: f64) -> Self {
        let c_values = (0..50)
            .map(|k| (-5.0 + 18.0 * k as f64 / 49.0).exp2())
            .collect();
        Self {
            c_values,
            seed,
            tol,
        }
    }
}

/// Cross-validated search over the cost factor only. Fits along the C path
/// with warm starts inside each fold.
pub fn grid_search_l1(data: &LabeledSet, folds: usize, spec: &L1GridSpec) -> Result<(f64, f64)> {
    let fold_sets = stratified_folds(&data.labels, folds, spec.seed)?;
    let classes = data.classes();
    let n_c = spec.c_values.len();
    let mut correct = vec![0usize; n_c];
    let mut total = vec![0usize; n_c];
    for (f, fold) in fold_sets.iter().enumerate() {
        let train_idx: Vec<usize> = fold_sets
            .iter()
            .enumerate()
            .filter(|(g, _)| *g != f)
            .flat_map(|(_, v)| v.iter().copied())
            .collect();
        let train = data.subset(&train_idx)?;
        let mut warm: Vec<Vec<f64>> = vec![vec![0.0; train.dim()]; classes.len()];
        for (ci, &c) in spec.c_values.iter().enumerate() {
            let mut weights = Vec::with_capacity(classes.len());
            for (k, &class) in classes.iter().enumerate() {
                let y: Vec<f64> = train
                    .labels
                    .iter()
                    .map(|&l| if l == class { 1.0 } else { -1.0 })
                    .collect();
                let fit = train_l1_binary(&train.vectors, &y, c, spec.tol, Some(&warm[k]))?;
                warm[k] = fit.weights.clone();
                weights.push(fit.weights);
            }
            let model = L1Model {
                classes: classes.clone(),
                weights,
                cost: c,
            };
            for &i in fold {
                if predict_l1(&model, &data.vectors[i])? == data.labels[i] {
                    correct[ci] += 1;
                }
                total[ci] += 1;
            }
        }
    }
    let mut best_ci = 0usize;
    let mut best_acc = -1.0f64;
    for ci in 0..n_c {
        let acc = correct[ci] as f64 / total[ci] as f64;
        if acc > best_acc {
            best_acc = acc;
            best_ci = ci;
        }
    }
    Ok((spec.c_values[best_ci], best_acc))
}
