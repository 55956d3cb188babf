//! 0-dimensional sublevel-set persistence of scalar fields on grids.
//!
//! Vertices enter the filtration at their value; an edge enters at the max of
//! its endpoint values (lower-star convention). Components are tracked with a
//! union-find; each merge kills the component with the larger (younger) birth
//! at the merge value, per the elder rule. One essential class survives per
//! connected component of the grid, born at that component's minimum value.
//!
//! Tie-breaking is deterministic: equal-value vertices are ordered by linear
//! index, and a merge of equal-birth components kills the one whose root has
//! the higher linear index.

use std::fs;
use std::path::Path;

use crate::diagram::{DiagramPoint, PersistenceDiagram};
use crate::error::{Error, Result};

/// A finite scalar field on a rows x cols grid, row-major.
/// 1-D signals are represented with `rows == 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

/// Grid adjacency used for 2-D fields; irrelevant for 1-D signals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

impl ScalarField {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::validation("field shape must be at least 1x1"));
        }
        if values.len() != rows * cols {
            return Err(Error::validation(format!(
                "expected {} values for a {rows}x{cols} field, got {}",
                rows * cols,
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::validation(format!(
                "field values must be finite, found {bad}"
            )));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn from_signal(values: Vec<f64>) -> Result<Self> {
        let cols = values.len();
        Self::new(1, cols, values)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    /// Parses rows of comma-separated reals; all rows must have equal length.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let row = raw
                .split(',')
                .map(|tok| {
                    let tok = tok.trim();
                    tok.parse::<f64>().map_err(|_| Error::Parse {
                        line,
                        message: format!("non-numeric value `{tok}`"),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            if let Some(first) = rows.first() {
                if row.len() != first.len() {
                    return Err(Error::Parse {
                        line,
                        message: format!(
                            "row has {} values, expected {}",
                            row.len(),
                            first.len()
                        ),
                    });
                }
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::validation("CSV field is empty"));
        }
        let cols = rows[0].len();
        let values = rows.into_iter().flatten().collect();
        Self::new_from_parsed(values, cols)
    }

    fn new_from_parsed(values: Vec<f64>, cols: usize) -> Result<Self> {
        let rows = values.len() / cols;
        Self::new(rows, cols, values)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_csv_str(&text)
    }

    /// Parses a binary (P5) PGM image; pixel values are used directly as
    /// filtration heights. Samples are 2-byte big-endian when maxval > 255.
    pub fn from_pgm_bytes(bytes: &[u8]) -> Result<Self> {
        let mut pos = 0usize;
        let next_token = |pos: &mut usize| -> Result<String> {
            // Skip whitespace and `#` comments.
            loop {
                while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                    *pos += 1;
                }
                if *pos < bytes.len() && bytes[*pos] == b'#' {
                    while *pos < bytes.len() && bytes[*pos] != b'\n' {
                        *pos += 1;
                    }
                    continue;
                }
                break;
            }
            let start = *pos;
            while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if start == *pos {
                return Err(Error::validation("truncated PGM header"));
            }
            Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
        };
        let magic = next_token(&mut pos)?;
        if magic != "P5" {
            return Err(Error::validation(format!(
                "unsupported PGM magic `{magic}` (only binary P5 is supported)"
            )));
        }
        let width: usize = next_token(&mut pos)?
            .parse()
            .map_err(|_| Error::validation("invalid PGM width"))?;
        let height: usize = next_token(&mut pos)?
            .parse()
            .map_err(|_| Error::validation("invalid PGM height"))?;
        let maxval: u32 = next_token(&mut pos)?
            .parse()
            .map_err(|_| Error::validation("invalid PGM maxval"))?;
        if maxval == 0 || maxval > 65535 {
            return Err(Error::validation(format!(
                "PGM maxval {maxval} out of range 1..=65535"
            )));
        }
        // Exactly one whitespace byte separates the header from the raster.
        pos += 1;
        let wide = maxval > 255;
        let sample_bytes = if wide { 2 } else { 1 };
        let needed = width * height * sample_bytes;
        if bytes.len() < pos + needed {
            return Err(Error::validation(format!(
                "PGM raster truncated: need {needed} bytes, have {}",
                bytes.len().saturating_sub(pos)
            )));
        }
        let mut values = Vec::with_capacity(width * height);
        let raster = &bytes[pos..pos + needed];
        if wide {
            for chunk in raster.chunks_exact(2) {
                values.push(u16::from_be_bytes([chunk[0], chunk[1]]) as f64);
            }
        } else {
            values.extend(raster.iter().map(|&b| b as f64));
        }
        Self::new(height, width, values)
    }

    pub fn read_pgm(path: impl AsRef<Path>) -> Result<Self> {
        let bytes = fs::read(path)?;
        Self::from_pgm_bytes(&bytes)
    }
}

struct UnionFind {
    /// `usize::MAX` marks a vertex not yet in the filtration.
    parent: Vec<usize>,
    birth: Vec<f64>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: vec![usize::MAX; n],
            birth: vec![0.0; n],
        }
    }

    fn is_active(&self, v: usize) -> bool {
        self.parent[v] != usize::MAX
    }

    fn activate(&mut self, v: usize, value: f64) {
        self.parent[v] = v;
        self.birth[v] = value;
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }
}

/// Computes the 0-dimensional sublevel-set persistence diagram of a field.
///
/// Zero-persistence points from simultaneous birth and merge are emitted.
pub fn sublevel_pd0(field: &ScalarField, connectivity: Connectivity) -> PersistenceDiagram {
    let rows = field.rows();
    let cols = field.cols();
    let values = field.values();
    let n = rows * cols;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| {
        values[a]
            .partial_cmp(&values[b])
            .expect("field values are finite")
            .then(a.cmp(&b))
    });

    let mut uf = UnionFind::new(n);
    let mut points = Vec::new();
    let mut neighbor_roots: Vec<usize> = Vec::with_capacity(8);

    for &v in &order {
        let value = values[v];
        let row = v / cols;
        let col = v % cols;

        neighbor_roots.clear();
        let visit = |uf: &mut UnionFind, r: isize, c: isize, out: &mut Vec<usize>| {
            if r < 0 || c < 0 || r as usize >= rows || c as usize >= cols {
                return;
            }
            let u = r as usize * cols + c as usize;
            if uf.is_active(u) {
                let root = uf.find(u);
                if !out.contains(&root) {
                    out.push(root);
                }
            }
        };
        let (ri, ci) = (row as isize, col as isize);
        visit(&mut uf, ri, ci - 1, &mut neighbor_roots);
        visit(&mut uf, ri, ci + 1, &mut neighbor_roots);
        if rows > 1 {
            visit(&mut uf, ri - 1, ci, &mut neighbor_roots);
            visit(&mut uf, ri + 1, ci, &mut neighbor_roots);
            if connectivity == Connectivity::Eight {
                visit(&mut uf, ri - 1, ci - 1, &mut neighbor_roots);
                visit(&mut uf, ri - 1, ci + 1, &mut neighbor_roots);
                visit(&mut uf, ri + 1, ci - 1, &mut neighbor_roots);
                visit(&mut uf, ri + 1, ci + 1, &mut neighbor_roots);
            }
        }

        if neighbor_roots.is_empty() {
            // Local minimum under the processing order: a new component.
            uf.activate(v, value);
            continue;
        }

        // The elder component (smallest birth, then lowest root index)
        // absorbs the vertex and every other neighboring component.
        let elder = *neighbor_roots
            .iter()
            .min_by(|&&a, &&b| {
                uf.birth[a]
                    .partial_cmp(&uf.birth[b])
                    .expect("births are finite")
                    .then(a.cmp(&b))
            })
            .expect("non-empty");
        uf.parent[v] = elder;
        for &root in &neighbor_roots {
            if root == elder {
                continue;
            }
            points.push(DiagramPoint {
                birth: uf.birth[root],
                death: value,
            });
            uf.parent[root] = elder;
        }
    }

    let mut essential: Vec<f64> = (0..n)
        .filter(|&v| uf.parent[v] == v)
        .map(|v| uf.birth[v])
        .collect();
    essential.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite"));

    PersistenceDiagram { points, essential }
}
