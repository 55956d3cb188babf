//! End-to-end orchestration: dataset manifests, stratified splits, repeated
//! train/evaluate runs, and the pixel-count sweep.
//!
//! Everything fitted — weighting normalizer, grid domain, SVD, pivots, and
//! hyperparameter tuning — consumes training indices only; test diagrams are
//! rasterized on the training grid and sampled with the training selector.
//! Per-repeat seeds derive from the base seed by addition, so any repeat can
//! be reproduced in isolation. Reported training time covers PI rasterization
//! through final classifier training on a monotonic clock.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diagram::PersistenceDiagram;
use crate::error::{Error, Result};
use crate::pimage::{rasterize, vectorize, PiGrid, WeightKind, WeightSpec, DEFAULT_RESOLUTION, DEFAULT_SIGMA};
use crate::selector::{fit_selector, FeatureMatrix, FeatureSelector};
use crate::sublevel::{sublevel_pd0, Connectivity, ScalarField};
use crate::svm::{
    grid_search, grid_search_l1, predict, predict_l1, train_csvc, train_l1, GridSearchSpec,
    L1GridSpec, L1Model, LabeledSet, SvmModel, DEFAULT_TOL,
};

/// One dataset entry: a diagram or scalar-field file with its class label.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub label: usize,
}

/// Persistence-image parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PiParams {
    #[serde(default = "default_resolution")]
    pub resolution: (usize, usize),
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_weighting")]
    pub weighting: WeightKind,
}

fn default_resolution() -> (usize, usize) {
    (DEFAULT_RESOLUTION, DEFAULT_RESOLUTION)
}

fn default_sigma() -> f64 {
    DEFAULT_SIGMA
}

fn default_weighting() -> WeightKind {
    WeightKind::Linear
}

impl Default for PiParams {
    fn default() -> Self {
        Self {
            resolution: default_resolution(),
            sigma: default_sigma(),
            weighting: default_weighting(),
        }
    }
}

/// Train/test split parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitParams {
    #[serde(default = "default_fraction")]
    pub train_fraction: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_fraction() -> f64 {
    0.7
}

impl Default for SplitParams {
    fn default() -> Self {
        Self {
            train_fraction: default_fraction(),
            seed: 0,
        }
    }
}

/// Which classifier the run trains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassifierKind {
    /// QR-pivot pixel selection with `s = r_o` (or the override), RBF C-SVM.
    #[serde(rename = "sparse-tda")]
    SparseTda,
    /// Full PI vectors into the L1-regularized linear baseline.
    #[serde(rename = "l1-linear")]
    L1Linear,
    /// All pixels (a pure permutation), RBF C-SVM.
    #[serde(rename = "full-pi")]
    FullPi,
}

/// Classifier configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassifierParams {
    #[serde(default = "default_kind")]
    pub kind: ClassifierKind,
    #[serde(default)]
    pub s_override: Option<usize>,
    #[serde(default = "default_folds")]
    pub cv_folds: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_kind() -> ClassifierKind {
    ClassifierKind::SparseTda
}

fn default_folds() -> usize {
    10
}

fn default_tolerance() -> f64 {
    DEFAULT_TOL
}

impl Default for ClassifierParams {
    fn default() -> Self {
        Self {
            kind: default_kind(),
            s_override: None,
            cv_folds: default_folds(),
            tolerance: default_tolerance(),
        }
    }
}

/// An explicit train/test index split (must partition the entry list).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredefinedSplit {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// A labeled dataset description plus run configuration, stored as JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
    #[serde(default)]
    pub pi_params: PiParams,
    #[serde(default)]
    pub split: SplitParams,
    #[serde(default)]
    pub classifier: ClassifierParams,
    /// Grid adjacency for scalar-field entries (4 or 8).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub connectivity: Option<u8>,
    /// Optional explicit splits; repeat `k` uses entry `k mod len`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predefined_splits: Option<Vec<PredefinedSplit>>,
}

impl DatasetManifest {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config(format!("bad manifest JSON: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn connectivity(&self) -> Result<Connectivity> {
        match self.connectivity {
            None | Some(4) => Ok(Connectivity::Four),
            Some(8) => Ok(Connectivity::Eight),
            Some(other) => Err(Error::config(format!(
                "connectivity {other} must be 4 or 8"
            ))),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.entries.is_empty() {
            return Err(Error::config("manifest has no entries"));
        }
        let mut classes: Vec<usize> = self.entries.iter().map(|e| e.label).collect();
        classes.sort_unstable();
        classes.dedup();
        if classes.len() < 2 {
            return Err(Error::config("manifest needs at least two classes"));
        }
        for &class in &classes {
            let count = self.entries.iter().filter(|e| e.label == class).count();
            if count < 2 {
                return Err(Error::config(format!(
                    "class {class} has {count} entries; need at least 2"
                )));
            }
        }
        let f = self.split.train_fraction;
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::config(format!(
                "train fraction {f} must lie in (0, 1)"
            )));
        }
        let (rx, ry) = self.pi_params.resolution;
        if rx == 0 || ry == 0 {
            return Err(Error::config("PI resolution must be at least 1x1"));
        }
        if !(self.pi_params.sigma > 0.0 && self.pi_params.sigma.is_finite()) {
            return Err(Error::config(format!(
                "sigma {} must be > 0",
                self.pi_params.sigma
            )));
        }
        if self.classifier.cv_folds < 2 {
            return Err(Error::config("cv_folds must be at least 2"));
        }
        if !(self.classifier.tolerance > 0.0 && self.classifier.tolerance.is_finite()) {
            return Err(Error::config("tolerance must be > 0"));
        }
        let p = rx * ry;
        if let Some(s) = self.classifier.s_override {
            if s < 1 || s > p {
                return Err(Error::config(format!(
                    "s_override {s} out of range 1..={p}"
                )));
            }
        }
        self.connectivity()?;
        if let Some(splits) = &self.predefined_splits {
            if splits.is_empty() {
                return Err(Error::config("predefined_splits is empty"));
            }
            let n = self.entries.len();
            for (k, split) in splits.iter().enumerate() {
                if split.train.is_empty() || split.test.is_empty() {
                    return Err(Error::config(format!(
                        "predefined split {k} has an empty side"
                    )));
                }
                let mut seen = vec![false; n];
                for &i in split.train.iter().chain(&split.test) {
                    if i >= n || seen[i] {
                        return Err(Error::config(format!(
                            "predefined split {k} is not a partition of 0..{n}"
                        )));
                    }
                    seen[i] = true;
                }
                if seen.iter().any(|&s| !s) {
                    return Err(Error::config(format!(
                        "predefined split {k} does not cover every entry"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A manifest with every entry parsed into a diagram.
#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub manifest: DatasetManifest,
    pub diagrams: Vec<PersistenceDiagram>,
    pub labels: Vec<usize>,
}

/// Reads a manifest file and loads every entry. Entry paths are resolved
/// relative to the manifest's directory; `.pd` files are parsed as diagrams
/// while `.csv` and `.pgm` scalar fields are converted to 0-dimensional
/// sublevel-set diagrams with the manifest connectivity.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<LoadedDataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let manifest = DatasetManifest::from_json(&text)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    load_dataset(manifest, base)
}

/// Loads entries of an in-memory manifest against a base directory.
pub fn load_dataset(manifest: DatasetManifest, base_dir: &Path) -> Result<LoadedDataset> {
    manifest.validate()?;
    let connectivity = manifest.connectivity()?;
    let mut diagrams = Vec::with_capacity(manifest.entries.len());
    let mut labels = Vec::with_capacity(manifest.entries.len());
    for entry in &manifest.entries {
        let full = if entry.path.is_absolute() {
            entry.path.clone()
        } else {
            base_dir.join(&entry.path)
        };
        let ext = full
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
            .unwrap_or_default();
        let diagram = match ext.as_str() {
            "pd" => PersistenceDiagram::read_file(&full)?,
            "csv" => sublevel_pd0(&ScalarField::read_csv(&full)?, connectivity),
            "pgm" => sublevel_pd0(&ScalarField::read_pgm(&full)?, connectivity),
            other => {
                return Err(Error::config(format!(
                    "entry {} has unsupported extension `{other}` (expected pd, csv, or pgm)",
                    full.display()
                )))
            }
        };
        diagrams.push(diagram);
        labels.push(entry.label);
    }
    Ok(LoadedDataset {
        manifest,
        diagrams,
        labels,
    })
}

/// Stratified train/test split: each class contributes
/// `floor(fraction * count)` (at least 1) shuffled members to the training
/// side and the rest to the test side. Deterministic for a fixed seed.
pub fn split_dataset(
    labels: &[usize],
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::config(format!(
            "train fraction {train_fraction} must lie in (0, 1)"
        )));
    }
    let mut classes: Vec<usize> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for &class in &classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < 2 {
            return Err(Error::config(format!(
                "class {class} has {} members; need at least 2 to split",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        // The tiny nudge absorbs representation error in fraction * count.
        let n_train = ((members.len() as f64 * train_fraction + 1e-9).floor() as usize)
            .clamp(1, members.len() - 1);
        train.extend_from_slice(&members[..n_train]);
        test.extend_from_slice(&members[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// One successful repeat.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RepeatReport {
    pub repeat: usize,
    pub seed: u64,
    pub accuracy_pct: f64,
    pub cv_accuracy: f64,
    pub s: usize,
    pub r_o: Option<usize>,
    pub c: f64,
    pub gamma: Option<f64>,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub predictions: Vec<usize>,
    pub actual: Vec<usize>,
    pub train_time_s: f64,
}

/// A repeat that aborted, with the stage error.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RepeatFailure {
    pub repeat: usize,
    pub seed: u64,
    pub error: String,
}

/// Mean and spread over the successful repeats.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Aggregate {
    pub successful_repeats: usize,
    pub accuracy_mean_pct: f64,
    /// Sample standard deviation; 0 for a single repeat.
    pub accuracy_std_pct: f64,
    pub time_mean_s: f64,
    pub time_std_s: f64,
}

/// Full run output: per-repeat detail plus aggregates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub classifier: ClassifierKind,
    pub base_seed: u64,
    pub repeats: Vec<RepeatReport>,
    pub failures: Vec<RepeatFailure>,
    pub aggregate: Aggregate,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per successful repeat.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("repeat,seed,accuracy_pct,cv_accuracy,s,r_o,c,gamma,train_time_s\n");
        for r in &self.repeats {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.repeat,
                r.seed,
                r.accuracy_pct,
                r.cv_accuracy,
                r.s,
                r.r_o.map_or(String::new(), |v| v.to_string()),
                r.c,
                r.gamma.map_or(String::new(), |v| v.to_string()),
                r.train_time_s
            );
        }
        out
    }
}

/// Run output plus the artifacts of the first successful repeat.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub report: RunReport,
    pub selector: Option<FeatureSelector>,
    pub svm_model: Option<SvmModel>,
    pub l1_model: Option<L1Model>,
}

struct RepeatRun {
    report: RepeatReport,
    selector: Option<FeatureSelector>,
    svm_model: Option<SvmModel>,
    l1_model: Option<L1Model>,
    energy: Option<f64>,
}

fn repeat_split(ds: &LoadedDataset, repeat: usize, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if let Some(splits) = &ds.manifest.predefined_splits {
        let split = &splits[repeat % splits.len()];
        Ok((split.train.clone(), split.test.clone()))
    } else {
        split_dataset(&ds.labels, ds.manifest.split.train_fraction, seed)
    }
}

fn run_repeat(
    ds: &LoadedDataset,
    kind: ClassifierKind,
    s_override: Option<usize>,
    repeat: usize,
) -> Result<RepeatRun> {
    let seed = ds.manifest.split.seed.wrapping_add(repeat as u64);
    let (train_indices, test_indices) = repeat_split(ds, repeat, seed)?;
    let tol = ds.manifest.classifier.tolerance;
    let folds = ds.manifest.classifier.cv_folds;
    let (res_x, res_y) = ds.manifest.pi_params.resolution;
    let sigma = ds.manifest.pi_params.sigma;

    let started = Instant::now();

    // Everything fitted below sees training diagrams only.
    let train_diagrams: Vec<PersistenceDiagram> = train_indices
        .iter()
        .map(|&i| ds.diagrams[i].clone())
        .collect();
    let train_labels: Vec<usize> = train_indices.iter().map(|&i| ds.labels[i]).collect();
    let weight = WeightSpec::fit(ds.manifest.pi_params.weighting, &train_diagrams)?;
    let transformed: Vec<_> = train_diagrams
        .iter()
        .map(|d| d.to_birth_persistence())
        .collect();
    let grid = PiGrid::from_training(&transformed, res_x, res_y, sigma)?;
    let train_vectors: Vec<Vec<f64>> = transformed
        .iter()
        .map(|t| vectorize(&rasterize(t, &grid, &weight, sigma)))
        .collect();

    let test_features = |selector: Option<&FeatureSelector>| -> Result<Vec<Vec<f64>>> {
        test_indices
            .iter()
            .map(|&i| {
                let t = ds.diagrams[i].to_birth_persistence();
                let v = vectorize(&rasterize(&t, &grid, &weight, sigma));
                match selector {
                    Some(sel) => sel.sample(&v),
                    None => Ok(v),
                }
            })
            .collect()
    };
    let actual: Vec<usize> = test_indices.iter().map(|&i| ds.labels[i]).collect();

    let run = match kind {
        ClassifierKind::SparseTda | ClassifierKind::FullPi => {
            let x = FeatureMatrix::from_columns(&train_vectors)?;
            let p = x.pixel_count();
            let effective_override = match kind {
                ClassifierKind::FullPi => Some(p),
                _ => s_override,
            };
            let selector = fit_selector(&x, effective_override)?;
            let sampled: Vec<Vec<f64>> = train_vectors
                .iter()
                .map(|v| selector.sample(v))
                .collect::<Result<_>>()?;
            let train_set = LabeledSet::new(sampled, train_labels)?;
            let gs = grid_search(&train_set, folds, &GridSearchSpec::new(seed, tol))?;
            let model = train_csvc(&train_set, gs.c, gs.gamma, tol)?;
            let train_time_s = started.elapsed().as_secs_f64();

            let feats = test_features(Some(&selector))?;
            let predictions: Vec<usize> = feats
                .iter()
                .map(|v| predict(&model, v))
                .collect::<Result<_>>()?;
            let correct = predictions
                .iter()
                .zip(&actual)
                .filter(|(p, a)| p == a)
                .count();
            RepeatRun {
                report: RepeatReport {
                    repeat,
                    seed,
                    accuracy_pct: 100.0 * correct as f64 / actual.len().max(1) as f64,
                    cv_accuracy: gs.cv_accuracy,
                    s: selector.s,
                    r_o: Some(selector.rank),
                    c: gs.c,
                    gamma: Some(gs.gamma),
                    train_indices,
                    test_indices,
                    predictions,
                    actual,
                    train_time_s,
                },
                energy: Some(selector.energy(selector.s)),
                selector: Some(selector),
                svm_model: Some(model),
                l1_model: None,
            }
        }
        ClassifierKind::L1Linear => {
            let train_set = LabeledSet::new(train_vectors, train_labels)?;
            let (c, cv_accuracy) = grid_search_l1(&train_set, folds, &L1GridSpec::new(seed, tol))?;
            let model = train_l1(&train_set, c, tol)?;
            let train_time_s = started.elapsed().as_secs_f64();

            let feats = test_features(None)?;
            let predictions: Vec<usize> = feats
                .iter()
                .map(|v| predict_l1(&model, v))
                .collect::<Result<_>>()?;
            let correct = predictions
                .iter()
                .zip(&actual)
                .filter(|(p, a)| p == a)
                .count();
            RepeatRun {
                report: RepeatReport {
                    repeat,
                    seed,
                    accuracy_pct: 100.0 * correct as f64 / actual.len().max(1) as f64,
                    cv_accuracy,
                    s: grid.pixel_count(),
                    r_o: None,
                    c,
                    gamma: None,
                    train_indices,
                    test_indices,
                    predictions,
                    actual,
                    train_time_s,
                },
                energy: None,
                selector: None,
                svm_model: None,
                l1_model: Some(model),
            }
        }
    };
    Ok(run)
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn assemble_report(
    kind: ClassifierKind,
    base_seed: u64,
    repeats: Vec<RepeatReport>,
    failures: Vec<RepeatFailure>,
) -> RunReport {
    let accs: Vec<f64> = repeats.iter().map(|r| r.accuracy_pct).collect();
    let times: Vec<f64> = repeats.iter().map(|r| r.train_time_s).collect();
    let (accuracy_mean_pct, accuracy_std_pct) = mean_std(&accs);
    let (time_mean_s, time_std_s) = mean_std(&times);
    RunReport {
        classifier: kind,
        base_seed,
        aggregate: Aggregate {
            successful_repeats: repeats.len(),
            accuracy_mean_pct,
            accuracy_std_pct,
            time_mean_s,
            time_std_s,
        },
        repeats,
        failures,
    }
}

/// Runs the manifest's classifier over `repeats` seeded repeats.
///
/// A repeat that errors is recorded and skipped; the run fails only when
/// every repeat fails. Artifacts come from the first successful repeat.
pub fn run_pipeline(ds: &LoadedDataset, repeats: usize) -> Result<PipelineOutput> {
    if repeats == 0 {
        return Err(Error::config("repeats must be at least 1"));
    }
    let kind = ds.manifest.classifier.kind;
    let s_override = ds.manifest.classifier.s_override;
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    let mut selector = None;
    let mut svm_model = None;
    let mut l1_model = None;
    let mut first_error: Option<Error> = None;
    for repeat in 0..repeats {
        match run_repeat(ds, kind, s_override, repeat) {
            Ok(run) => {
                if selector.is_none() && svm_model.is_none() && l1_model.is_none() {
                    selector = run.selector;
                    svm_model = run.svm_model;
                    l1_model = run.l1_model;
                }
                reports.push(run.report);
            }
            Err(e) => {
                failures.push(RepeatFailure {
                    repeat,
                    seed: ds.manifest.split.seed.wrapping_add(repeat as u64),
                    error: e.to_string(),
                });
                if first_error.is_none() {
                    first_error = Some(e);
                }
            }
        }
    }
    if reports.is_empty() {
        return Err(first_error.expect("at least one repeat ran"));
    }
    Ok(PipelineOutput {
        report: assemble_report(kind, ds.manifest.split.seed, reports, failures),
        selector,
        svm_model,
        l1_model,
    })
}

/// One row of the pixel-count sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub s: usize,
    pub accuracy_mean_pct: f64,
    pub accuracy_std_pct: f64,
    pub time_mean_s: f64,
    pub time_std_s: f64,
    /// Mean cumulative squared-singular-value fraction at `s`.
    pub energy: f64,
}

/// Sweep results over the requested pixel counts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("s,accuracy_mean_pct,accuracy_std_pct,time_mean_s,time_std_s,energy\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.s, r.accuracy_mean_pct, r.accuracy_std_pct, r.time_mean_s, r.time_std_s, r.energy
            );
        }
        out
    }
}

/// Runs the sparse pipeline once per `(s, repeat)` pair and aggregates
/// accuracy, training time, and spectral energy per pixel count.
pub fn sweep_s(ds: &LoadedDataset, s_values: &[usize], repeats: usize) -> Result<SweepReport> {
    if repeats == 0 {
        return Err(Error::config("repeats must be at least 1"));
    }
    if s_values.is_empty() {
        return Err(Error::config("no pixel counts given"));
    }
    let (res_x, res_y) = ds.manifest.pi_params.resolution;
    let p = res_x * res_y;
    for &s in s_values {
        if s < 1 || s > p {
            return Err(Error::config(format!("pixel count {s} out of range 1..={p}")));
        }
    }
    let mut rows = Vec::with_capacity(s_values.len());
    for &s in s_values {
        let mut accs = Vec::with_capacity(repeats);
        let mut times = Vec::with_capacity(repeats);
        let mut energies = Vec::with_capacity(repeats);
        for repeat in 0..repeats {
            let run = run_repeat(ds, ClassifierKind::SparseTda, Some(s), repeat)?;
            accs.push(run.report.accuracy_pct);
            times.push(run.report.train_time_s);
            energies.push(run.energy.expect("sparse runs compute energy"));
        }
        let (accuracy_mean_pct, accuracy_std_pct) = mean_std(&accs);
        let (time_mean_s, time_std_s) = mean_std(&times);
        let energy = energies.iter().sum::<f64>() / energies.len() as f64;
        rows.push(SweepRow {
            s,
            accuracy_mean_pct,
            accuracy_std_pct,
            time_mean_s,
            time_std_s,
            energy,
        });
    }
    Ok(SweepReport { rows })
}
