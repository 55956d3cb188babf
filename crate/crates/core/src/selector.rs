//! Sparse pixel selection from stacked persistence images.
//!
//! Training image vectors form the columns of a pixels-by-samples matrix.
//! A truncated SVD extracts the dominant variation patterns, the truncation
//! rank is chosen by the optimal singular value threshold for unknown noise,
//! and a column-pivoted QR of the transposed principal components picks the
//! pixel rows that make the selection numerically well conditioned. Sampling
//! a PI vector then just gathers its values at the first `s` pivots.
//!
//! The SVD is a one-sided Jacobi iteration: at desk scale it is accurate to
//! near machine precision and fully deterministic. Signs are fixed so the
//! largest-magnitude entry of each left singular vector is positive, which
//! keeps the pivot sequence reproducible bit-for-bit.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::{s, Array2};

use crate::error::{Error, Result};

const SELECTOR_MAGIC: &[u8; 4] = b"STDA";
const SELECTOR_VERSION: u16 = 1;

/// Pixels-by-samples feature matrix; column order matches the training
/// sample order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    data: Array2<f64>,
}

impl FeatureMatrix {
    pub fn new(data: Array2<f64>) -> Result<Self> {
        let (p, n) = data.dim();
        if p == 0 || n == 0 {
            return Err(Error::validation("feature matrix must be non-empty"));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("feature matrix must be finite"));
        }
        Ok(Self { data })
    }

    /// Stacks equal-length feature vectors as columns.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let n = columns.len();
        if n == 0 {
            return Err(Error::validation("no feature vectors given"));
        }
        let p = columns[0].len();
        if columns.iter().any(|c| c.len() != p) {
            return Err(Error::validation("feature vectors differ in length"));
        }
        let mut data = Array2::zeros((p, n));
        for (j, col) in columns.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                data[[i, j]] = v;
            }
        }
        Self::new(data)
    }

    pub fn pixel_count(&self) -> usize {
        self.data.nrows()
    }

    pub fn sample_count(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }
}

/// Truncated SVD factors: `u` is pixels x r, `v` is samples x r, and
/// `singular_values` holds the leading r values, nonincreasing.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub u: Array2<f64>,
    pub singular_values: Vec<f64>,
    pub v: Array2<f64>,
}

/// Rank-`r` truncated singular value decomposition of the feature matrix.
pub fn truncated_svd(x: &FeatureMatrix, r: usize) -> Result<SvdFactors> {
    let (p, n) = x.data.dim();
    let full = p.min(n);
    if r < 1 || r > full {
        return Err(Error::validation(format!(
            "rank {r} out of range 1..={full} for a {p}x{n} matrix"
        )));
    }
    let (u, sigma, v) = jacobi_svd(&x.data);
    Ok(SvdFactors {
        u: u.slice(s![.., ..r]).to_owned(),
        singular_values: sigma[..r].to_vec(),
        v: v.slice(s![.., ..r]).to_owned(),
    })
}

/// Full SVD of an arbitrary dense matrix by one-sided Jacobi rotations.
///
/// Returns `(u, sigma, v)` with `a = u * diag(sigma) * v^T`, `sigma` sorted
/// nonincreasing, `u` p x k and `v` n x k with k = min(p, n). Left singular
/// vectors for (numerically) zero singular values are completed to an
/// orthonormal set deterministically.
fn jacobi_svd(a: &Array2<f64>) -> (Array2<f64>, Vec<f64>, Array2<f64>) {
    let (p, n) = a.dim();
    if p < n {
        let (v, sigma, u) = jacobi_svd(&a.t().to_owned());
        return (u, sigma, v);
    }

    let mut w = a.clone();
    let mut v: Array2<f64> = Array2::eye(n);
    const MAX_SWEEPS: usize = 60;
    const TOL: f64 = 1e-14;

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n.saturating_sub(1) {
            for j in (i + 1)..n {
                let mut aii = 0.0;
                let mut ajj = 0.0;
                let mut aij = 0.0;
                for k in 0..p {
                    let wi = w[[k, i]];
                    let wj = w[[k, j]];
                    aii += wi * wi;
                    ajj += wj * wj;
                    aij += wi * wj;
                }
                if aij.abs() <= TOL * (aii * ajj).sqrt() || aii == 0.0 || ajj == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (ajj - aii) / (2.0 * aij);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = c * t;
                for k in 0..p {
                    let wi = w[[k, i]];
                    let wj = w[[k, j]];
                    w[[k, i]] = c * wi - sn * wj;
                    w[[k, j]] = sn * wi + c * wj;
                }
                for k in 0..n {
                    let vi = v[[k, i]];
                    let vj = v[[k, j]];
                    v[[k, i]] = c * vi - sn * vj;
                    v[[k, j]] = sn * vi + c * vj;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sigma: Vec<f64> = (0..n)
        .map(|j| w.column(j).iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();

    // Stable sort by descending singular value; ties keep column order.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].partial_cmp(&sigma[i]).expect("finite"));

    let mut u = Array2::zeros((p, n));
    let mut v_sorted = Array2::zeros((n, n));
    let mut sigma_sorted = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        sigma_sorted.push(sigma[src]);
        for k in 0..p {
            u[[k, dst]] = w[[k, src]];
        }
        for k in 0..n {
            v_sorted[[k, dst]] = v[[k, src]];
        }
    }
    sigma = sigma_sorted;
    let mut v = v_sorted;

    let sigma_max = sigma.first().copied().unwrap_or(0.0);
    for k in 0..n {
        if sigma[k] > sigma_max * 1e-13 && sigma[k] > 0.0 {
            let inv = 1.0 / sigma[k];
            for row in 0..p {
                u[[row, k]] *= inv;
            }
        } else {
            complete_left_vector(&mut u, k);
        }
    }

    // Sign convention: the largest-magnitude entry of each left vector is
    // positive (first such entry on exact ties).
    for k in 0..n {
        let mut best = 0usize;
        let mut best_abs = 0.0f64;
        for row in 0..p {
            let a = u[[row, k]].abs();
            if a > best_abs {
                best_abs = a;
                best = row;
            }
        }
        if u[[best, k]] < 0.0 {
            for row in 0..p {
                u[[row, k]] = -u[[row, k]];
            }
            for row in 0..n {
                v[[row, k]] = -v[[row, k]];
            }
        }
    }

    (u, sigma, v)
}

/// Replaces column `k` of `u` with a unit vector orthogonal to columns
/// `0..k`, chosen deterministically from the canonical basis.
fn complete_left_vector(u: &mut Array2<f64>, k: usize) {
    let p = u.nrows();
    for cand in 0..p {
        let mut col = vec![0.0f64; p];
        col[cand] = 1.0;
        // Two Gram-Schmidt passes are enough at this scale.
        for _ in 0..2 {
            for prev in 0..k {
                let dot: f64 = (0..p).map(|r| col[r] * u[[r, prev]]).sum();
                for (r, c) in col.iter_mut().enumerate() {
                    *c -= dot * u[[r, prev]];
                }
            }
        }
        let norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.5 {
            for (r, c) in col.iter().enumerate() {
                u[[r, k]] = c / norm;
            }
            return;
        }
    }
    // Unreachable for k < p: the canonical basis cannot lie entirely in a
    // k-dimensional subspace.
    panic!("failed to complete an orthonormal basis");
}

/// Truncation rank from the optimal singular value threshold for unknown
/// noise: counts values above `omega(beta) * median(sigma)` with
/// `omega(beta) = 0.56 b^3 - 0.95 b^2 + 1.82 b + 1.43`, `beta = min/max` of
/// the matrix dimensions. Floors at 1 and caps at `min(p, n - 1)`.
pub fn optimal_rank(singular_values: &[f64], p: usize, n: usize) -> Result<usize> {
    if singular_values.is_empty() {
        return Err(Error::validation("no singular values given"));
    }
    if singular_values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::validation(
            "singular values must be finite and nonnegative",
        ));
    }
    if singular_values.iter().all(|&v| v == 0.0) {
        return Err(Error::validation("all singular values are zero"));
    }
    if p == 0 || n == 0 {
        return Err(Error::validation("matrix dimensions must be positive"));
    }
    let beta = p.min(n) as f64 / p.max(n) as f64;
    let omega = 0.56 * beta.powi(3) - 0.95 * beta.powi(2) + 1.82 * beta + 1.43;
    let mut sorted = singular_values.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite"));
    let m = sorted.len();
    let median = if m % 2 == 1 {
        sorted[m / 2]
    } else {
        (sorted[m / 2 - 1] + sorted[m / 2]) / 2.0
    };
    let tau = omega * median;
    let count = singular_values.iter().filter(|&&v| v > tau).count();
    let cap = p.min(n.saturating_sub(1)).max(1);
    Ok(count.clamp(1, cap))
}

/// Pivot order and R diagonal from a column-pivoted QR.
#[derive(Debug, Clone, PartialEq)]
pub struct QrPivots {
    /// Permutation of `0..p`; the first `rank` entries are the greedily
    /// selected pixel rows, the remainder follows in ascending index order
    /// (the residual is exactly rank-exhausted there, so every remaining
    /// column ties at zero and the lowest-index rule applies).
    pub order: Vec<usize>,
    /// `|R_kk|` for the greedy steps, nonincreasing.
    pub r_diag: Vec<f64>,
}

/// Column-pivoted QR of the transposed component matrix.
///
/// `components` is pixels x r with orthonormal columns (validated to 1e-6).
/// At each step the remaining column of the r x p matrix with the largest
/// residual norm is pivoted; ties break to the lowest column index. Residual
/// norms are tracked by downdating with a recomputation guard against
/// cancellation.
pub fn pivoted_qr(components: &Array2<f64>) -> Result<QrPivots> {
    let (p, r) = components.dim();
    if r == 0 || p == 0 {
        return Err(Error::validation("component matrix must be non-empty"));
    }
    if r > p {
        return Err(Error::validation(format!(
            "component matrix is {p}x{r}; need r <= p"
        )));
    }
    // Orthonormality check: U^T U = I within 1e-6.
    for i in 0..r {
        for j in i..r {
            let dot: f64 = (0..p)
                .map(|k| components[[k, i]] * components[[k, j]])
                .sum();
            let target = if i == j { 1.0 } else { 0.0 };
            if (dot - target).abs() > 1e-6 {
                return Err(Error::validation(format!(
                    "components are not orthonormal: |(U^T U)[{i},{j}] - {target}| = {:.3e}",
                    (dot - target).abs()
                )));
            }
        }
    }

    // m = U^T, r x p; column j of m is pixel row j of U.
    let mut m = components.t().to_owned();
    let mut piv: Vec<usize> = (0..p).collect();
    let mut norms2: Vec<f64> = (0..p)
        .map(|j| m.column(j).iter().map(|x| x * x).sum())
        .collect();
    let orig_norms2 = norms2.clone();
    let mut r_diag = Vec::with_capacity(r);

    for k in 0..r {
        let mut best = k;
        for j in (k + 1)..p {
            if norms2[j] > norms2[best] {
                best = j;
            }
        }
        if best != k {
            for row in 0..r {
                m.swap([row, k], [row, best]);
            }
            piv.swap(k, best);
            norms2.swap(k, best);
        }

        // Householder reflector on rows k.. of column k.
        let alpha: f64 = (k..r)
            .map(|row| m[[row, k]] * m[[row, k]])
            .sum::<f64>()
            .sqrt();
        r_diag.push(alpha);
        if alpha == 0.0 {
            continue;
        }
        let sign = if m[[k, k]] >= 0.0 { 1.0 } else { -1.0 };
        let mut hv: Vec<f64> = (k..r).map(|row| m[[row, k]]).collect();
        hv[0] += sign * alpha;
        let hv_norm2: f64 = hv.iter().map(|x| x * x).sum();
        if hv_norm2 > 0.0 {
            for j in (k + 1)..p {
                let dot: f64 = (k..r).map(|row| m[[row, j]] * hv[row - k]).sum();
                let scale = 2.0 * dot / hv_norm2;
                for row in k..r {
                    m[[row, j]] -= scale * hv[row - k];
                }
                // Downdate the residual norm, recomputing on cancellation.
                let t = norms2[j] - m[[k, j]] * m[[k, j]];
                norms2[j] = if t <= orig_norms2[piv[j]] * 1e-12 {
                    ((k + 1)..r).map(|row| m[[row, j]] * m[[row, j]]).sum()
                } else {
                    t
                };
                if norms2[j] < 0.0 {
                    norms2[j] = 0.0;
                }
            }
        }
    }

    let mut tail: Vec<usize> = piv[r..].to_vec();
    tail.sort_unstable();
    let mut order = piv[..r].to_vec();
    order.extend(tail);
    Ok(QrPivots { order, r_diag })
}

/// The pivot order alone; see [`pivoted_qr`].
pub fn qr_pivots(components: &Array2<f64>) -> Result<Vec<usize>> {
    Ok(pivoted_qr(components)?.order)
}

/// A fitted sparse pixel selector.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSelector {
    /// Pixels x rank principal components of the training image matrix.
    pub components: Array2<f64>,
    /// All `min(p, n)` singular values of the training matrix, nonincreasing.
    pub singular_values: Vec<f64>,
    /// Truncation rank from the optimal singular value threshold.
    pub rank: usize,
    /// Full pixel pivot order; the first `s` entries are sampled.
    pub pivots: Vec<usize>,
    /// Number of selected pixels.
    pub s: usize,
}

/// Fits the selector: full-rank SVD, optimal-threshold rank, pivoted QR on
/// the leading components. `s` defaults to the chosen rank and is clamped to
/// `[1, p]`.
pub fn fit_selector(x: &FeatureMatrix, s_override: Option<usize>) -> Result<FeatureSelector> {
    let (p, n) = x.data.dim();
    if n < 2 {
        return Err(Error::validation(
            "selector fitting needs at least two training samples",
        ));
    }
    if x.data.iter().all(|&v| v == 0.0) {
        return Err(Error::validation("feature matrix is identically zero"));
    }
    let full = truncated_svd(x, p.min(n))?;
    let rank = optimal_rank(&full.singular_values, p, n)?;
    let components = full.u.slice(s![.., ..rank]).to_owned();
    let qr = pivoted_qr(&components)?;
    let s = s_override.unwrap_or(rank).clamp(1, p);
    Ok(FeatureSelector {
        components,
        singular_values: full.singular_values,
        rank,
        pivots: qr.order,
        s,
    })
}

impl FeatureSelector {
    pub fn pixel_count(&self) -> usize {
        self.components.nrows()
    }

    /// Gathers a full-length feature vector at the first `s` pivots.
    pub fn sample(&self, x: &[f64]) -> Result<Vec<f64>> {
        let p = self.pixel_count();
        if x.len() != p {
            return Err(Error::validation(format!(
                "feature vector length {} does not match pixel count {p}",
                x.len()
            )));
        }
        Ok(self.pivots[..self.s].iter().map(|&i| x[i]).collect())
    }

    /// Cumulative squared-singular-value fraction captured by the first `s`
    /// values.
    pub fn energy(&self, s: usize) -> f64 {
        let total: f64 = self.singular_values.iter().map(|v| v * v).sum();
        if total == 0.0 {
            return 0.0;
        }
        let k = s.min(self.singular_values.len());
        let head: f64 = self.singular_values[..k].iter().map(|v| v * v).sum();
        head / total
    }

    /// Validates all structural invariants (used after loading from disk).
    pub fn validate(&self) -> Result<()> {
        let (p, r) = self.components.dim();
        if self.rank != r || r == 0 {
            return Err(Error::validation("selector rank does not match components"));
        }
        if self.s < 1 || self.s > p {
            return Err(Error::validation(format!(
                "selected pixel count {} out of range 1..={p}",
                self.s
            )));
        }
        if self.pivots.len() != p {
            return Err(Error::validation("pivot order length does not match pixels"));
        }
        let mut seen = vec![false; p];
        for &idx in &self.pivots {
            if idx >= p || seen[idx] {
                return Err(Error::validation("pivots are not a permutation"));
            }
            seen[idx] = true;
        }
        for win in self.singular_values.windows(2) {
            if win[1] > win[0] {
                return Err(Error::validation("singular values are not nonincreasing"));
            }
        }
        for i in 0..r {
            for j in i..r {
                let dot: f64 = (0..p)
                    .map(|k| self.components[[k, i]] * self.components[[k, j]])
                    .sum();
                let target = if i == j { 1.0 } else { 0.0 };
                if (dot - target).abs() > 1e-10 {
                    return Err(Error::validation(
                        "components are not orthonormal to 1e-10",
                    ));
                }
            }
        }
        Ok(())
    }

    /// Serializes to the versioned binary selector format.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out: Vec<u8> = Vec::new();
        out.extend_from_slice(SELECTOR_MAGIC);
        out.extend_from_slice(&SELECTOR_VERSION.to_le_bytes());
        let (p, r) = self.components.dim();
        out.extend_from_slice(&(p as u32).to_le_bytes());
        out.extend_from_slice(&(r as u32).to_le_bytes());
        out.extend_from_slice(&(self.s as u32).to_le_bytes());
        out.extend_from_slice(&(self.singular_values.len() as u32).to_le_bytes());
        for &idx in &self.pivots {
            out.extend_from_slice(&(idx as u32).to_le_bytes());
        }
        for row in 0..p {
            for col in 0..r {
                out.extend_from_slice(&self.components[[row, col]].to_le_bytes());
            }
        }
        for &v in &self.singular_values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        let mut file = fs::File::create(path)?;
        file.write_all(&out)?;
        Ok(())
    }

    /// Loads and validates a selector written by [`FeatureSelector::save`].
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let mut bytes = Vec::new();
        fs::File::open(path)?.read_to_end(&mut bytes)?;
        let mut cursor = 0usize;
        let take = |cursor: &mut usize, len: usize| -> Result<&[u8]> {
            if bytes.len() < *cursor + len {
                return Err(Error::validation("selector file truncated"));
            }
            let slice = &bytes[*cursor..*cursor + len];
            *cursor += len;
            Ok(slice)
        };
        if take(&mut cursor, 4)? != SELECTOR_MAGIC {
            return Err(Error::validation("not a selector file (bad magic)"));
        }
        let version = u16::from_le_bytes(take(&mut cursor, 2)?.try_into().unwrap());
        if version != SELECTOR_VERSION {
            return Err(Error::validation(format!(
                "unsupported selector format version {version}"
            )));
        }
        let p = u32::from_le_bytes(take(&mut cursor, 4)?.try_into().unwrap()) as usize;
        let r = u32::from_le_bytes(take(&mut cursor, 4)?.try_into().unwrap()) as usize;
        let s_sel = u32::from_le_bytes(take(&mut cursor, 4)?.try_into().unwrap()) as usize;
        let sv_len = u32::from_le_bytes(take(&mut cursor, 4)?.try_into().unwrap()) as usize;
        let mut pivots = Vec::with_capacity(p);
        for _ in 0..p {
            pivots.push(u32::from_le_bytes(take(&mut cursor, 4)?.try_into().unwrap()) as usize);
        }
        let mut components = Array2::zeros((p, r));
        for row in 0..p {
            for col in 0..r {
                components[[row, col]] =
                    f64::from_le_bytes(take(&mut cursor, 8)?.try_into().unwrap());
            }
        }
        let mut singular_values = Vec::with_capacity(sv_len);
        for _ in 0..sv_len {
            singular_values.push(f64::from_le_bytes(take(&mut cursor, 8)?.try_into().unwrap()));
        }
        let selector = FeatureSelector {
            components,
            singular_values,
            rank: r,
            pivots,
            s: s_sel,
        };
        selector.validate()?;
        Ok(selector)
    }
}
