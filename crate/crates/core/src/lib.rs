//! Sparse-TDA: persistence images with sparse pixel selection for
//! multi-way classification.
//!
//! The pipeline turns persistence diagrams (parsed from `.pd` files or
//! computed from scalar fields by 0-dimensional sublevel-set persistence)
//! into persistence images, selects an optimal sparse set of pixels via a
//! truncated SVD and pivoted QR on the training image matrix, and trains
//! RBF-kernel support vector machines (or an L1-regularized linear baseline)
//! on the sampled features.
//!
//! Modules:
//! - [`diagram`]: diagram types, `.pd` text I/O, the birth-persistence
//!   transform, and a synthetic generator.
//! - [`wasserstein`]: exact 1-Wasserstein distance (Hungarian assignment).
//! - [`sublevel`]: 0-dimensional sublevel-set persistence of scalar fields.
//! - [`pimage`]: weighting functions, the Gaussian persistence surface, and
//!   exact box integration into images.
//! - [`selector`]: truncated SVD, the optimal singular value threshold,
//!   pivoted QR pixel selection, and selector persistence.
//! - [`svm`]: SMO-trained one-vs-one RBF C-SVM, cross-validated grid search,
//!   and the L1-regularized linear baseline.
//! - [`pipeline`]: dataset manifests, stratified splits, end-to-end runs,
//!   and the pixel-count sweep.

pub mod diagram;
pub mod error;
pub mod pimage;
pub mod pipeline;
pub mod selector;
pub mod sublevel;
pub mod svm;
pub mod wasserstein;

pub use diagram::{
    synth_diagram, BirthPersistence, ClusterSpec, DiagramPoint, PersistenceDiagram,
    TransformedDiagram,
};
pub use error::{Error, Result};
pub use pimage::{
    lw_normalizer, nw_normalizer, rasterize, surface_value, unflatten, vectorize,
    PersistenceImage, PiGrid, WeightKind, WeightSpec,
};
pub use pipeline::{
    load_dataset, load_manifest, run_pipeline, split_dataset, sweep_s, ClassifierKind,
    DatasetManifest, LoadedDataset, PipelineOutput, RunReport, SweepReport,
};
pub use selector::{
    fit_selector, optimal_rank, pivoted_qr, qr_pivots, truncated_svd, FeatureMatrix,
    FeatureSelector, QrPivots, SvdFactors,
};
pub use sublevel::{sublevel_pd0, Connectivity, ScalarField};
pub use svm::{
    grid_search, grid_search_l1, predict, predict_l1, rbf_kernel, train_csvc, train_l1,
    GridSearchSpec, L1GridSpec, L1Model, LabeledSet, SvmModel,
};
pub use wasserstein::wasserstein1;
