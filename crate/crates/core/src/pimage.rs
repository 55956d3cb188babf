//! Persistence images: weighting functions, the Gaussian persistence surface,
//! and exact integration of the surface over grid boxes.
//!
//! A transformed diagram point `u = (birth, persistence)` contributes
//! `f(u) * g_u(z)` to the surface, where `g_u` is an isotropic bivariate
//! Gaussian with standard deviation `sigma` and `f` is a weighting function
//! that vanishes along the horizontal axis. Pixels hold the exact integral of
//! the surface over their grid box, computed in closed form via separable
//! normal-CDF differences, so points outside the domain still contribute
//! their true in-domain mass.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::diagram::{PersistenceDiagram, TransformedDiagram};
use crate::error::{Error, Result};

/// Default grid resolution per axis.
pub const DEFAULT_RESOLUTION: usize = 30;
/// Default Gaussian bandwidth for synthetic data.
pub const DEFAULT_SIGMA: f64 = 0.1;

/// Bandwidth presets that have worked well for common diagram scales.
/// Pick by the typical persistence magnitude of the data.
pub mod sigma_presets {
    /// Persistences on the order of 1.
    pub const COARSE: f64 = 0.2;
    /// Persistences on the order of 0.1.
    pub const MEDIUM: f64 = 0.02;
    /// Persistences on the order of 1e-3.
    pub const FINE: f64 = 1e-4;
}

/// Uniform raster geometry over a rectangle in birth-persistence space.
///
/// Rows index the birth axis (`res_x` boxes over `[x_min, x_max]`), columns
/// index the persistence axis (`res_y` boxes over `[y_min, y_max]`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiGrid {
    pub res_x: usize,
    pub res_y: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl PiGrid {
    pub fn new(
        res_x: usize,
        res_y: usize,
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
    ) -> Result<Self> {
        if res_x == 0 || res_y == 0 {
            return Err(Error::validation("grid resolution must be at least 1x1"));
        }
        if ![x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite()) {
            return Err(Error::validation("grid domain must be finite"));
        }
        if x_max <= x_min || y_max <= y_min {
            return Err(Error::validation(format!(
                "grid domain [{x_min}, {x_max}] x [{y_min}, {y_max}] must have positive extent"
            )));
        }
        Ok(Self {
            res_x,
            res_y,
            x_min,
            x_max,
            y_min,
            y_max,
        })
    }

    /// Fits the domain to the training diagrams: births span
    /// `[min birth, max birth]`, persistences span `[0, max persistence]`,
    /// and both axes are padded by `3 * sigma` at each end.
    pub fn from_training(
        training: &[TransformedDiagram],
        res_x: usize,
        res_y: usize,
        sigma: f64,
    ) -> Result<Self> {
        if sigma <= 0.0 || !sigma.is_finite() {
            return Err(Error::validation(format!("sigma {sigma} must be > 0")));
        }
        let mut x_min = f64::INFINITY;
        let mut x_max = f64::NEG_INFINITY;
        let mut y_max = f64::NEG_INFINITY;
        let mut seen = false;
        for d in training {
            for p in &d.points {
                seen = true;
                x_min = x_min.min(p.birth);
                x_max = x_max.max(p.birth);
                y_max = y_max.max(p.persistence);
            }
        }
        if !seen {
            return Err(Error::validation(
                "cannot fit a grid domain: no finite points in the training set",
            ));
        }
        let pad = 3.0 * sigma;
        Self::new(
            res_x,
            res_y,
            x_min - pad,
            x_max + pad,
            -pad,
            y_max.max(0.0) + pad,
        )
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.res_x as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / self.res_y as f64
    }

    /// Birth-axis bounds of box row `i`.
    pub fn box_x(&self, i: usize) -> (f64, f64) {
        let dx = self.dx();
        (
            self.x_min + i as f64 * dx,
            self.x_min + (i + 1) as f64 * dx,
        )
    }

    /// Persistence-axis bounds of box column `j`.
    pub fn box_y(&self, j: usize) -> (f64, f64) {
        let dy = self.dy();
        (
            self.y_min + j as f64 * dy,
            self.y_min + (j + 1) as f64 * dy,
        )
    }

    pub fn pixel_count(&self) -> usize {
        self.res_x * self.res_y
    }
}

/// Which weighting function scales a point's Gaussian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightKind {
    /// `f(u) = u_y / normalizer`: 1 at the training maximum persistence.
    Linear,
    /// `f(u) = atan(normalizer * u_y)`: increasing, bounded by pi/2.
    Arctan,
}

/// A weighting function with its fitted normalizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightSpec {
    pub kind: WeightKind,
    pub normalizer: f64,
}

impl WeightSpec {
    pub fn new(kind: WeightKind, normalizer: f64) -> Result<Self> {
        if normalizer <= 0.0 || !normalizer.is_finite() {
            return Err(Error::validation(format!(
                "weight normalizer {normalizer} must be > 0"
            )));
        }
        Ok(Self { kind, normalizer })
    }

    /// Fits the normalizer of the requested kind on training diagrams.
    pub fn fit(kind: WeightKind, training: &[PersistenceDiagram]) -> Result<Self> {
        let normalizer = match kind {
            WeightKind::Linear => lw_normalizer(training)?,
            WeightKind::Arctan => nw_normalizer(training)?,
        };
        Self::new(kind, normalizer)
    }

    /// Weight at persistence `u_y`; zero along the horizontal axis.
    pub fn weight(&self, u_y: f64) -> f64 {
        match self.kind {
            WeightKind::Linear => u_y / self.normalizer,
            WeightKind::Arctan => (self.normalizer * u_y).atan(),
        }
    }
}

/// Linear-weighting normalizer: the maximum persistence over all finite
/// points of the training diagrams.
pub fn lw_normalizer(training: &[PersistenceDiagram]) -> Result<f64> {
    let mut max_pers = f64::NEG_INFINITY;
    let mut seen = false;
    for d in training {
        for p in &d.points {
            seen = true;
            max_pers = max_pers.max(p.persistence());
        }
    }
    if !seen {
        return Err(Error::DegenerateNormalizer(
            "all training diagrams are empty".into(),
        ));
    }
    if max_pers <= 0.0 {
        return Err(Error::DegenerateNormalizer(
            "every training point has zero persistence".into(),
        ));
    }
    Ok(max_pers)
}

/// Arctan-weighting normalizer: the reciprocal of the median over diagrams
/// of each diagram's median persistence. Empty diagrams are skipped; the
/// median of an even count is the mean of the two central order statistics.
pub fn nw_normalizer(training: &[PersistenceDiagram]) -> Result<f64> {
    if training.is_empty() {
        return Err(Error::validation("training set is empty"));
    }
    let mut inner: Vec<f64> = Vec::with_capacity(training.len());
    for d in training {
        if d.points.is_empty() {
            continue;
        }
        let pers: Vec<f64> = d.points.iter().map(|p| p.persistence()).collect();
        inner.push(median(&pers));
    }
    if inner.is_empty() {
        return Err(Error::validation("all training diagrams are empty"));
    }
    let mom = median(&inner);
    if mom <= 0.0 {
        return Err(Error::DegenerateNormalizer(format!(
            "median of per-diagram median persistences is {mom}"
        )));
    }
    Ok(1.0 / mom)
}

fn median(values: &[f64]) -> f64 {
    debug_assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite"));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Evaluates the weighted Gaussian surface of a diagram at a point.
pub fn surface_value(
    d: &TransformedDiagram,
    spec: &WeightSpec,
    sigma: f64,
    z: (f64, f64),
) -> f64 {
    assert!(sigma > 0.0, "sigma must be > 0");
    let norm = 1.0 / (2.0 * PI * sigma * sigma);
    let inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma);
    d.points
        .iter()
        .map(|u| {
            let dx = z.0 - u.birth;
            let dy = z.1 - u.persistence;
            spec.weight(u.persistence) * norm * (-(dx * dx + dy * dy) * inv_two_sigma_sq).exp()
        })
        .sum()
}

fn normal_cdf(t: f64) -> f64 {
    0.5 * libm::erfc(-t * FRAC_1_SQRT_2)
}

/// A rasterized persistence image together with the grid that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceImage {
    pub grid: PiGrid,
    /// `res_x x res_y`, row `i` = birth index, column `j` = persistence index.
    pub pixels: Array2<f64>,
    pub sigma: f64,
}

/// Integrates the persistence surface exactly over every grid box.
///
/// Pixel `(i, j)` is the sum over points of
/// `f(u) * [cdf(x_hi) - cdf(x_lo)] * [cdf(y_hi) - cdf(y_lo)]` with the CDFs
/// centered at the point and scaled by `sigma`.
pub fn rasterize(
    d: &TransformedDiagram,
    grid: &PiGrid,
    spec: &WeightSpec,
    sigma: f64,
) -> PersistenceImage {
    assert!(sigma > 0.0, "sigma must be > 0");
    let mut pixels = Array2::zeros((grid.res_x, grid.res_y));
    let dx = grid.dx();
    let dy = grid.dy();
    let mut cdf_x = vec![0.0f64; grid.res_x + 1];
    let mut cdf_y = vec![0.0f64; grid.res_y + 1];
    for u in &d.points {
        let w = spec.weight(u.persistence);
        if w == 0.0 {
            continue;
        }
        for (i, c) in cdf_x.iter_mut().enumerate() {
            let edge = grid.x_min + i as f64 * dx;
            *c = normal_cdf((edge - u.birth) / sigma);
        }
        for (j, c) in cdf_y.iter_mut().enumerate() {
            let edge = grid.y_min + j as f64 * dy;
            *c = normal_cdf((edge - u.persistence) / sigma);
        }
        for i in 0..grid.res_x {
            let mx = cdf_x[i + 1] - cdf_x[i];
            if mx == 0.0 {
                continue;
            }
            let wmx = w * mx;
            for j in 0..grid.res_y {
                pixels[[i, j]] += wmx * (cdf_y[j + 1] - cdf_y[j]);
            }
        }
    }
    PersistenceImage {
        grid: *grid,
        pixels,
        sigma,
    }
}

/// Flattens an image row-major into a feature vector of length
/// `res_x * res_y`.
pub fn vectorize(pi: &PersistenceImage) -> Vec<f64> {
    pi.pixels.iter().copied().collect()
}

/// Inverse of [`vectorize`] given the grid.
pub fn unflatten(grid: &PiGrid, v: &[f64]) -> Result<Array2<f64>> {
    if v.len() != grid.pixel_count() {
        return Err(Error::validation(format!(
            "vector length {} does not match {}x{} grid",
            v.len(),
            grid.res_x,
            grid.res_y
        )));
    }
    Array2::from_shape_vec((grid.res_x, grid.res_y), v.to_vec())
        .map_err(|e| Error::validation(e.to_string()))
}

impl PersistenceImage {
    /// CSV rendering: one line per birth row, `res_y` comma-separated values.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.grid.res_x {
            for j in 0..self.grid.res_y {
                if j > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{}", self.pixels[[i, j]]);
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }

    /// Writes a 16-bit binary PGM with pixels linearly scaled so the image
    /// maximum maps to 65535. The scale factor (original value per PGM count)
    /// is written to `<path>.scale.txt`.
    pub fn write_pgm(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let max = self.pixels.iter().cloned().fold(0.0f64, f64::max);
        let mut bytes = format!("P5\n{} {}\n65535\n", self.grid.res_y, self.grid.res_x)
            .into_bytes();
        for v in self.pixels.iter() {
            let code = if max > 0.0 {
                (v / max * 65535.0).round().clamp(0.0, 65535.0) as u16
            } else {
                0
            };
            bytes.extend_from_slice(&code.to_be_bytes());
        }
        fs::write(path, bytes)?;
        let scale = if max > 0.0 { max / 65535.0 } else { 0.0 };
        let sidecar = format!("{}.scale.txt", path.display());
        fs::write(sidecar, format!("{scale:.16e}\n"))?;
        Ok(())
    }
}
