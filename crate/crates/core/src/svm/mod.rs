//! Downstream classifiers: a one-vs-one multiclass soft-margin C-SVM with
//! RBF kernel trained by sequential minimal optimization, cross-validated
//! coarse-to-fine grid search over `(C, gamma)`, and an L1-regularized
//! linear baseline.
//!
//! Feature vectors are used raw: no standardization is applied before the
//! SVM, which affects the useful range of `gamma`.

mod grid;
mod linear;
mod smo;

use std::collections::BTreeSet;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};

pub use grid::{cross_validate, grid_search, stratified_folds, GridSearchResult, GridSearchSpec};

pub use linear::{grid_search_l1, predict_l1, train_l1, train_l1_binary, L1Fit, L1GridSpec, L1Model};

const MODEL_MAGIC: &[u8; 4] = b"STDM";
const MODEL_VERSION: u16 = 1;

/// Default SMO stopping tolerance on the maximal KKT violation.
pub const DEFAULT_TOL: f64 = 1e-3;

fn smo_max_iter(n: usize) -> usize {
    (1000 * n).max(100_000)
}

/// Labeled feature vectors of equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSet {
    pub vectors: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

impl LabeledSet {
    pub fn new(vectors: Vec<Vec<f64>>, labels: Vec<usize>) -> Result<Self> {
        if vectors.len() != labels.len() {
            return Err(Error::validation(format!(
                "{} vectors but {} labels",
                vectors.len(),
                labels.len()
            )));
        }
        if vectors.len() < 2 {
            return Err(Error::validation("need at least two samples"));
        }
        let dim = vectors[0].len();
        if dim == 0 {
            return Err(Error::validation("feature vectors must be non-empty"));
        }
        for v in &vectors {
            if v.len() != dim {
                return Err(Error::validation("feature vectors differ in length"));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::validation("feature values must be finite"));
            }
        }
        let distinct: BTreeSet<usize> = labels.iter().copied().collect();
        if distinct.len() < 2 {
            return Err(Error::validation("need at least two distinct classes"));
        }
        Ok(Self { vectors, labels })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    /// Distinct class identifiers, ascending.
    pub fn classes(&self) -> Vec<usize> {
        self.labels
            .iter()
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    /// Subset by sample indices; indices must be valid.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let vectors = indices.iter().map(|&i| self.vectors[i].clone()).collect();
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Self::new(vectors, labels)
    }
}

fn squared_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// RBF kernel `exp(-gamma * ||x - y||^2)`.
pub fn rbf_kernel(x: &[f64], y: &[f64], gamma: f64) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::validation(format!(
            "kernel arguments differ in length: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if gamma <= 0.0 || !gamma.is_finite() {
        return Err(Error::validation(format!("gamma {gamma} must be > 0")));
    }
    Ok((-gamma * squared_distance(x, y)).exp())
}

/// One support-vector term of a pairwise decision function.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportTerm {
    /// Index into [`SvmModel::vectors`].
    pub vector: usize,
    /// Dual coefficient in `[0, C]`.
    pub alpha: f64,
    /// Whether the term's training label was the pair's positive class.
    pub positive: bool,
}

/// The binary classifier for one unordered class pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairClassifier {
    pub class_pos: usize,
    pub class_neg: usize,
    pub terms: Vec<SupportTerm>,
    /// Decision offset: `f(x) = sum +-alpha K(sv, x) + bias`.
    pub bias: f64,
    /// Maximal KKT violation at solver exit.
    pub kkt_residual: f64,
}

/// A trained one-vs-one multiclass RBF C-SVM.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub c: f64,
    pub gamma: f64,
    pub dim: usize,
    pub classes: Vec<usize>,
    /// Support vectors referenced by the pair classifiers.
    pub vectors: Vec<Vec<f64>>,
    pub pairs: Vec<PairClassifier>,
}

/// Solver diagnostics for one class-pair subproblem.
#[derive(Debug, Clone)]
pub struct PairDiagnostics {
    pub class_pos: usize,
    pub class_neg: usize,
    pub iterations: usize,
    pub kkt_residual: f64,
    /// Dual objective (maximization form) after each pair update.
    pub objective_trace: Vec<f64>,
}

/// Trains one SMO subproblem per unordered class pair, each with a fully
/// cached kernel matrix, solved to KKT tolerance `tol`.
pub fn train_csvc(data: &LabeledSet, c: f64, gamma: f64, tol: f64) -> Result<SvmModel> {
    Ok(train_csvc_impl(data, c, gamma, tol, false)?.0)
}

/// [`train_csvc`] plus per-pair iteration counts and objective traces.
pub fn train_csvc_diagnostics(
    data: &LabeledSet,
    c: f64,
    gamma: f64,
    tol: f64,
) -> Result<(SvmModel, Vec<PairDiagnostics>)> {
    train_csvc_impl(data, c, gamma, tol, true)
}

fn train_csvc_impl(
    data: &LabeledSet,
    c: f64,
    gamma: f64,
    tol: f64,
    record_objective: bool,
) -> Result<(SvmModel, Vec<PairDiagnostics>)> {
    if c <= 0.0 || !c.is_finite() {
        return Err(Error::validation(format!("C {c} must be > 0")));
    }
    if gamma <= 0.0 || !gamma.is_finite() {
        return Err(Error::validation(format!("gamma {gamma} must be > 0")));
    }
    if tol <= 0.0 || !tol.is_finite() {
        return Err(Error::validation(format!("tolerance {tol} must be > 0")));
    }
    let classes = data.classes();
    let mut raw_pairs = Vec::new();
    let mut diagnostics = Vec::new();
    let mut used: BTreeSet<usize> = BTreeSet::new();

    for (ai, &class_a) in classes.iter().enumerate() {
        for &class_b in &classes[ai + 1..] {
            let idx: Vec<usize> = (0..data.len())
                .filter(|&t| data.labels[t] == class_a || data.labels[t] == class_b)
                .collect();
            let y: Vec<f64> = idx
                .iter()
                .map(|&t| if data.labels[t] == class_a { 1.0 } else { -1.0 })
                .collect();
            let n = idx.len();
            let mut gram = Array2::zeros((n, n));
            for i in 0..n {
                gram[[i, i]] = 1.0;
                for j in (i + 1)..n {
                    let k =
                        (-gamma * squared_distance(&data.vectors[idx[i]], &data.vectors[idx[j]]))
                            .exp();
                    gram[[i, j]] = k;
                    gram[[j, i]] = k;
                }
            }
            let sol = smo::solve(&gram, &y, c, tol, smo_max_iter(n), record_objective)?;
            let mut terms = Vec::new();
            for (local, &train_index) in idx.iter().enumerate() {
                if sol.alpha[local] > 0.0 {
                    used.insert(train_index);
                    terms.push((train_index, sol.alpha[local], y[local] > 0.0));
                }
            }
            raw_pairs.push((class_a, class_b, terms, -sol.rho, sol.kkt_residual));
            diagnostics.push(PairDiagnostics {
                class_pos: class_a,
                class_neg: class_b,
                iterations: sol.iterations,
                kkt_residual: sol.kkt_residual,
                objective_trace: sol.objective_trace,
            });
        }
    }

    let index_of: std::collections::BTreeMap<usize, usize> = used
        .iter()
        .enumerate()
        .map(|(new, &train)| (train, new))
        .collect();
    let vectors: Vec<Vec<f64>> = used.iter().map(|&t| data.vectors[t].clone()).collect();
    let pairs = raw_pairs
        .into_iter()
        .map(|(class_pos, class_neg, terms, bias, kkt_residual)| PairClassifier {
            class_pos,
            class_neg,
            terms: terms
                .into_iter()
                .map(|(train_index, alpha, positive)| SupportTerm {
                    vector: index_of[&train_index],
                    alpha,
                    positive,
                })
                .collect(),
            bias,
            kkt_residual,
        })
        .collect();

    Ok((
        SvmModel {
            c,
            gamma,
            dim: data.dim(),
            classes,
            vectors,
            pairs,
        },
        diagnostics,
    ))
}

impl SvmModel {
    /// Per-pair decision values at `x`, in pair order.
    pub fn decision_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::validation(format!(
                "input length {} does not match training dimension {}",
                x.len(),
                self.dim
            )));
        }
        Ok(self
            .pairs
            .iter()
            .map(|pair| {
                pair.terms
                    .iter()
                    .map(|t| {
                        let k = (-self.gamma * squared_distance(&self.vectors[t.vector], x)).exp();
                        if t.positive { t.alpha * k } else { -t.alpha * k }
                    })
                    .sum::<f64>()
                    + pair.bias
            })
            .collect())
    }
}

/// One-vs-one majority vote; ties break to the lowest class identifier.
pub fn predict(model: &SvmModel, x: &[f64]) -> Result<usize> {
    let decisions = model.decision_values(x)?;
    let mut votes: Vec<(usize, usize)> = model.classes.iter().map(|&c| (c, 0)).collect();
    for (pair, &dec) in model.pairs.iter().zip(&decisions) {
        let winner = if dec > 0.0 { pair.class_pos } else { pair.class_neg };
        if let Some(v) = votes.iter_mut().find(|(c, _)| *c == winner) {
            v.1 += 1;
        }
    }
    let mut best = votes[0];
    for &v in &votes[1..] {
        if v.1 > best.1 {
            best = v;
        }
    }
    Ok(best.0)
}

impl SvmModel {
    /// Serializes to the versioned binary model format.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out: Vec<u8> = Vec::new();
        out.extend_from_slice(MODEL_MAGIC);
        out.extend_from_slice(&MODEL_VERSION.to_le_bytes());
        out.extend_from_slice(&self.c.to_le_bytes());
        out.extend_from_slice(&self.gamma.to_le_bytes());
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        out.extend_from_slice(&(self.classes.len() as u32).to_le_bytes());
        for &c in &self.classes {
            out.extend_from_slice(&(c as u32).to_le_bytes());
        }
        out.extend_from_slice(&(self.vectors.len() as u32).to_le_bytes());
        for v in &self.vectors {
            for &x in v {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out.extend_from_slice(&(self.pairs.len() as u32).to_le_bytes());
        for pair in &self.pairs {
            out.extend_from_slice(&(pair.class_pos as u32).to_le_bytes());
            out.extend_from_slice(&(pair.class_neg as u32).to_le_bytes());
            out.extend_from_slice(&pair.bias.to_le_bytes());
            out.extend_from_slice(&pair.kkt_residual.to_le_bytes());
            out.extend_from_slice(&(pair.terms.len() as u32).to_le_bytes());
            for t in &pair.terms {
                out.extend_from_slice(&(t.vector as u32).to_le_bytes());
                out.extend_from_slice(&t.alpha.to_le_bytes());
                out.push(t.positive as u8);
            }
        }
        let mut file = fs::File::create(path)?;
        file.write_all(&out)?;
        Ok(())
    }

    /// Loads a model written by [`SvmModel::save`], validating invariants.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let mut bytes = Vec::new();
        fs::File::open(path)?.read_to_end(&mut bytes)?;
        let mut cursor = 0usize;
        let take = |cursor: &mut usize, len: usize| -> Result<&[u8]> {
            if bytes.len() < *cursor + len {
                return Err(Error::validation("model file truncated"));
            }
            let slice = &bytes[*cursor..*cursor + len];
            *cursor += len;
            Ok(slice)
        };
        if take(&mut cursor, 4)? != MODEL_MAGIC {
            return Err(Error::validation("not a model file (bad magic)"));
        }
        let version = u16::from_le_bytes(take(&mut cursor, 2)?.try_into().unwrap());
        if version != MODEL_VERSION {
            return Err(Error::validation(format!(
                "unsupported model format version {version}"
            )));
        }
        let c = f64::from_le_bytes(take(&mut cursor, 8)?.try_into().unwrap());
        let gamma = f64::from_le_bytes(take(&mut cursor, 8)?.try_into().unwrap());
        let dim = u32::from_le_bytes(take(&mut cursor, 4)?.try_into().unwrap()) as usize;
        let n_classes = u32::from_le_bytes(take(&mut cursor, 4)?.try_into().unwrap()) as usize;
        let mut classes = Vec::with_capacity(n_classes);
        for _ in 0..n_classes {
            classes.push(u32::from_le_bytes(take(&mut cursor, 4)?.try_into().unwrap()) as usize);
        }
        let n_vectors = u32::from_le_bytes(take(&mut cursor, 4)?.try_into().unwrap()) as usize;
        let mut vectors = Vec::with_capacity(n_vectors);
        for _ in 0..n_vectors {
            let mut v = Vec::with_capacity(dim);
            for _ in 0..dim {
                v.push(f64::from_le_bytes(take(&mut cursor, 8)?.try_into().unwrap()));
            }
            vectors.push(v);
        }
        let n_pairs = u32::from_le_bytes(take(&mut cursor, 4)?.try_into().unwrap()) as usize;
        let mut pairs = Vec::with_capacity(n_pairs);
        for _ in 0..n_pairs {
            let class_pos = u32::from_le_bytes(take(&mut cursor, 4)?.try_into().unwrap()) as usize;
            let class_neg = u32::from_le_bytes(take(&mut cursor, 4)?.try_into().unwrap()) as usize;
            let bias = f64::from_le_bytes(take(&mut cursor, 8)?.try_into().unwrap());
            let kkt_residual = f64::from_le_bytes(take(&mut cursor, 8)?.try_into().unwrap());
            let n_terms = u32::from_le_bytes(take(&mut cursor, 4)?.try_into().unwrap()) as usize;
            let mut terms = Vec::with_capacity(n_terms);
            for _ in 0..n_terms {
                let vector =
                    u32::from_le_bytes(take(&mut cursor, 4)?.try_into().unwrap()) as usize;
                let alpha = f64::from_le_bytes(take(&mut cursor, 8)?.try_into().unwrap());
                let positive = take(&mut cursor, 1)?[0] != 0;
                if vector >= n_vectors {
                    return Err(Error::validation("support index out of range"));
                }
                if !(0.0..=c).contains(&alpha) {
                    return Err(Error::validation(format!(
                        "dual coefficient {alpha} outside [0, {c}]"
                    )));
                }
                terms.push(SupportTerm {
                    vector,
                    alpha,
                    positive,
                });
            }
            pairs.push(PairClassifier {
                class_pos,
                class_neg,
                terms,
                bias,
                kkt_residual,
            });
        }
        if c <= 0.0 || gamma <= 0.0 {
            return Err(Error::validation("model has non-positive C or gamma"));
        }
        Ok(SvmModel {
            c,
            gamma,
            dim,
            classes,
            vectors,
            pairs,
        })
    }
}
