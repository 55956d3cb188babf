//! Cross-validated coarse-to-fine grid search over `(C, gamma)`.
//!
//! Both stages evaluate exactly 50 pairs. The coarse stage covers
//! `C = 2^{-5}, 2^{-3}, ..., 2^{13}` (10 values) times
//! `gamma = 2^{-15}, 2^{-11}, ..., 2^{1}` (5 values); the fine stage spans
//! half-step `C` exponents and unit-step `gamma` exponents within roughly
//! two exponent units of the coarse winner. Folds are stratified and seeded,
//! so the search depends only on the data, the seed, and the stage spec.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::svm::{predict, train_csvc, LabeledSet};

/// Exponent layout of the two search stages.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchSpec {
    pub coarse_c_exponents: Vec<f64>,
    pub coarse_gamma_exponents: Vec<f64>,
    /// Offsets applied to the coarse winner's C exponent.
    pub fine_c_offsets: Vec<f64>,
    /// Offsets applied to the coarse winner's gamma exponent.
    pub fine_gamma_offsets: Vec<f64>,
    /// Seed for the stratified fold assignment.
    pub seed: u64,
    /// SMO stopping tolerance used for every candidate.
    pub tol: f64,
}

impl GridSearchSpec {
    pub fn new(seed: u64, tol: f64) -> Self {
        Self {
            coarse_c_exponents: (0..10).map(|k| -5.0 + 2.0 * k as f64).collect(),
            coarse_gamma_exponents: (0..5).map(|k| -15.0 + 4.0 * k as f64).collect(),
            fine_c_offsets: (0..10).map(|k| -2.25 + 0.5 * k as f64).collect(),
            fine_gamma_offsets: (0..5).map(|k| -2.0 + k as f64).collect(),
            seed,
            tol,
        }
    }

    /// Stage-1 `(C, gamma)` candidates in evaluation order.
    pub fn coarse_pairs(&self) -> Vec<(f64, f64)> {
        let mut pairs = Vec::new();
        for &ce in &self.coarse_c_exponents {
            for &ge in &self.coarse_gamma_exponents {
                pairs.push((ce.exp2(), ge.exp2()));
            }
        }
        pairs
    }

    /// Stage-2 candidates around a stage-1 winner.
    pub fn fine_pairs(&self, c_best: f64, gamma_best: f64) -> Vec<(f64, f64)> {
        let ce = c_best.log2();
        let ge = gamma_best.log2();
        let mut pairs = Vec::new();
        for &dc in &self.fine_c_offsets {
            for &dg in &self.fine_gamma_offsets {
                pairs.push(((ce + dc).exp2(), (ge + dg).exp2()));
            }
        }
        pairs
    }
}

/// Winner of a grid search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSearchResult {
    pub c: f64,
    pub gamma: f64,
    pub cv_accuracy: f64,
}

/// Stratified fold assignment: each class's indices are shuffled with the
/// seeded generator and dealt round-robin, with the starting fold rotated
/// per class to balance fold sizes. Empty folds are dropped; every fold's
/// training complement must keep at least two classes.
pub fn stratified_folds(labels: &[usize], folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 {
        return Err(Error::config(format!("need at least 2 folds, got {folds}")));
    }
    let mut classes: Vec<usize> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![vec![]; folds];
    for (class_pos, &class) in classes.iter().enumerate() {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut rng);
        for (k, idx) in members.into_iter().enumerate() {
            assignment[(class_pos + k) % folds].push(idx);
        }
    }
    assignment.retain(|fold| !fold.is_empty());
    if assignment.len() < 2 {
        return Err(Error::config(
            "too few samples for the requested fold count",
        ));
    }
    for fold in &mut assignment {
        fold.sort_unstable();
    }
    // Each validation fold's complement must be trainable.
    for (f, _fold) in assignment.iter().enumerate() {
        let mut complement_classes: Vec<usize> = Vec::new();
        for (g, other) in assignment.iter().enumerate() {
            if g == f {
                continue;
            }
            for &i in other {
                if !complement_classes.contains(&labels[i]) {
                    complement_classes.push(labels[i]);
                }
            }
        }
        if complement_classes.len() < 2 {
            return Err(Error::config(format!(
                "fold {f} leaves fewer than two classes for training"
            )));
        }
    }
    Ok(assignment)
}

/// Pooled k-fold accuracy of an RBF C-SVM at one `(C, gamma)` point.
pub fn cross_validate(
    data: &LabeledSet,
    folds: &[Vec<usize>],
    c: f64,
    gamma: f64,
    tol: f64,
) -> Result<f64> {
    let mut correct = 0usize;
    let mut total = 0usize;
    for (f, fold) in folds.iter().enumerate() {
        let train_idx: Vec<usize> = folds
            .iter()
            .enumerate()
            .filter(|(g, _)| *g != f)
            .flat_map(|(_, v)| v.iter().copied())
            .collect();
        let train = data.subset(&train_idx)?;
        let model = train_csvc(&train, c, gamma, tol)?;
        for &i in fold {
            if predict(&model, &data.vectors[i])? == data.labels[i] {
                correct += 1;
            }
            total += 1;
        }
    }
    Ok(correct as f64 / total as f64)
}

fn better(candidate: (f64, f64, f64), best: (f64, f64, f64)) -> bool {
    // Higher accuracy wins; ties prefer smaller C, then smaller gamma.
    if candidate.2 != best.2 {
        return candidate.2 > best.2;
    }
    if candidate.0 != best.0 {
        return candidate.0 < best.0;
    }
    candidate.1 < best.1
}

/// Two-stage search; returns the best `(C, gamma)` over all 100 evaluated
/// candidates with its cross-validation accuracy.
pub fn grid_search(
    data: &LabeledSet,
    folds: usize,
    spec: &GridSearchSpec,
) -> Result<GridSearchResult> {
    let fold_sets = stratified_folds(&data.labels, folds, spec.seed)?;
    let mut best: Option<(f64, f64, f64)> = None;
    for (c, gamma) in spec.coarse_pairs() {
        let acc = cross_validate(data, &fold_sets, c, gamma, spec.tol)?;
        let cand = (c, gamma, acc);
        if best.is_none_or(|b| better(cand, b)) {
            best = Some(cand);
        }
    }
    let coarse = best.expect("coarse grid is non-empty");
    for (c, gamma) in spec.fine_pairs(coarse.0, coarse.1) {
        let acc = cross_validate(data, &fold_sets, c, gamma, spec.tol)?;
        let cand = (c, gamma, acc);
        if best.is_none_or(|b| better(cand, b)) {
            best = Some(cand);
        }
    }
    let (c, gamma, cv_accuracy) = best.expect("grid is non-empty");
    Ok(GridSearchResult {
        c,
        gamma,
        cv_accuracy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs() -> LabeledSet {
        let mut vectors = Vec::new();
        let mut labels = Vec::new();
        for k in 0..12 {
            let t = k as f64 * 0.07;
            vectors.push(vec![t, -t]);
            labels.push(1);
            vectors.push(vec![5.0 + t, 5.0 - t]);
            labels.push(2);
        }
        LabeledSet::new(vectors, labels).unwrap()
    }

    #[test]
    fn stages_have_exactly_fifty_pairs() {
        let spec = GridSearchSpec::new(0, 1e-3);
        assert_eq!(spec.coarse_pairs().len(), 50);
        assert_eq!(spec.fine_pairs(1.0, 0.25).len(), 50);
    }

    #[test]
    fn folds_are_stratified_and_seeded() {
        let labels: Vec<usize> = (0..30).map(|i| i % 3 + 1).collect();
        let a = stratified_folds(&labels, 5, 7).unwrap();
        let b = stratified_folds(&labels, 5, 7).unwrap();
        assert_eq!(a, b);
        let c = stratified_folds(&labels, 5, 8).unwrap();
        assert_ne!(a, c);
        // Each fold holds 6 samples, 2 per class.
        for fold in &a {
            assert_eq!(fold.len(), 6);
            for class in 1..=3 {
                assert_eq!(fold.iter().filter(|&&i| labels[i] == class).count(), 2);
            }
        }
        // All indices exactly once.
        let mut all: Vec<usize> = a.into_iter().flatten().collect();
        all.sort_unstable();
        assert_eq!(all, (0..30).collect::<Vec<_>>());
    }

    #[test]
    fn folds_reject_untrainable_layout() {
        // 2 samples per class, 2 folds is fine; 2 classes with all samples
        // in one fold cannot happen with stratification, so force the error
        // with folds > per-class counts where a complement collapses.
        let labels = vec![1, 2];
        assert!(stratified_folds(&labels, 2, 0).is_err());
        assert!(stratified_folds(&labels, 1, 0).is_err());
    }

    #[test]
    fn small_classes_use_at_least_one_rule() {
        // A class smaller than the fold count still lands one member per
        // fold where possible.
        let labels = vec![1, 1, 1, 1, 1, 1, 2, 2, 2];
        let folds = stratified_folds(&labels, 3, 1).unwrap();
        assert_eq!(folds.len(), 3);
        for fold in &folds {
            assert!(fold.iter().any(|&i| labels[i] == 1));
            assert!(fold.iter().any(|&i| labels[i] == 2));
        }
    }

    #[test]
    fn separable_blobs_reach_full_cv_accuracy() {
        let data = blobs();
        let spec = GridSearchSpec::new(3, 1e-3);
        let result = grid_search(&data, 4, &spec).unwrap();
        assert_eq!(result.cv_accuracy, 1.0);
    }

    #[test]
    fn search_is_deterministic() {
        let data = blobs();
        let spec = GridSearchSpec::new(11, 1e-3);
        let a = grid_search(&data, 5, &spec).unwrap();
        let b = grid_search(&data, 5, &spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn argmax_respects_tie_break() {
        // On perfectly separable data many grid points reach accuracy 1.0;
        // the winner must be the (smallest C, smallest gamma) among them.
        let data = blobs();
        let spec = GridSearchSpec::new(5, 1e-3);
        let fold_sets = stratified_folds(&data.labels, 4, spec.seed).unwrap();
        let result = grid_search(&data, 4, &spec).unwrap();
        let mut expected: Option<(f64, f64, f64)> = None;
        let mut all_pairs = spec.coarse_pairs();
        // Reconstruct stage 2 around the stage-1 winner exactly as the
        // search does.
        let mut stage1: Option<(f64, f64, f64)> = None;
        for (c, g) in spec.coarse_pairs() {
            let acc = cross_validate(&data, &fold_sets, c, g, spec.tol).unwrap();
            let cand = (c, g, acc);
            if stage1.is_none_or(|b| better(cand, b)) {
                stage1 = Some(cand);
            }
        }
        let s1 = stage1.unwrap();
        all_pairs.extend(spec.fine_pairs(s1.0, s1.1));
        for (c, g) in all_pairs {
            let acc = cross_validate(&data, &fold_sets, c, g, spec.tol).unwrap();
            let cand = (c, g, acc);
            if expected.is_none_or(|b| better(cand, b)) {
                expected = Some(cand);
            }
        }
        let e = expected.unwrap();
        assert_eq!((result.c, result.gamma, result.cv_accuracy), e);
    }
}
