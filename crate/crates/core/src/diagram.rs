//! Persistence-diagram types, text I/O, the birth-persistence transform and a
//! seeded cluster generator for synthetic data.
//!
//! Diagrams are multisets: duplicate points are permitted and preserved.
//! Finite points carry a `(birth, death)` pair with `death >= birth`;
//! essential classes (features that never die) are stored separately as bare
//! birth values and take no part in the image pipeline.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// A finite diagram point in birth-death coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagramPoint {
    pub birth: f64,
    pub death: f64,
}

impl DiagramPoint {
    pub fn new(birth: f64, death: f64) -> Result<Self> {
        if !birth.is_finite() || !death.is_finite() {
            return Err(Error::validation(format!(
                "diagram point ({birth}, {death}) must be finite"
            )));
        }
        if death < birth {
            return Err(Error::validation(format!(
                "diagram point has death {death} < birth {birth}"
            )));
        }
        Ok(Self { birth, death })
    }

    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }
}

/// A multiset of finite `(birth, death)` points plus essential classes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PersistenceDiagram {
    pub points: Vec<DiagramPoint>,
    /// Birth values of classes with infinite death.
    pub essential: Vec<f64>,
}

impl PersistenceDiagram {
    pub fn new(points: Vec<DiagramPoint>, essential: Vec<f64>) -> Result<Self> {
        for b in &essential {
            if !b.is_finite() {
                return Err(Error::validation(format!(
                    "essential class birth {b} must be finite"
                )));
            }
        }
        Ok(Self { points, essential })
    }

    /// Builds a diagram from `(birth, death)` pairs, validating each point.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let points = pairs
            .iter()
            .map(|&(b, d)| DiagramPoint::new(b, d))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            points,
            essential: Vec::new(),
        })
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty() && self.essential.is_empty()
    }

    /// Parses the `.pd` text format.
    ///
    /// Each data line is `<birth> <death>`, whitespace separated, decimal or
    /// scientific notation; a death token of `inf` marks an essential class.
    /// `#` starts a comment; blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        let mut essential = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let data = raw.split('#').next().unwrap_or("");
            let mut tokens = data.split_whitespace();
            let Some(birth_tok) = tokens.next() else {
                continue;
            };
            let Some(death_tok) = tokens.next() else {
                return Err(Error::Parse {
                    line,
                    message: "expected `<birth> <death>`, found a single token".into(),
                });
            };
            if let Some(extra) = tokens.next() {
                return Err(Error::Parse {
                    line,
                    message: format!("unexpected trailing token `{extra}`"),
                });
            }
            let birth: f64 = birth_tok.parse().map_err(|_| Error::Parse {
                line,
                message: format!("non-numeric birth token `{birth_tok}`"),
            })?;
            if !birth.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("birth `{birth_tok}` must be finite"),
                });
            }
            let death: f64 = death_tok.parse().map_err(|_| Error::Parse {
                line,
                message: format!("non-numeric death token `{death_tok}`"),
            })?;
            if death == f64::INFINITY {
                essential.push(birth);
                continue;
            }
            if !death.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("death `{death_tok}` must be finite or `inf`"),
                });
            }
            if death < birth {
                return Err(Error::validation(format!(
                    "line {line}: death {death} < birth {birth}"
                )));
            }
            points.push(DiagramPoint { birth, death });
        }
        Ok(Self { points, essential })
    }

    /// Renders the diagram in the `.pd` text format with 17 significant
    /// digits, enough for a bit-exact parse round trip.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for p in &self.points {
            let _ = writeln!(out, "{:.16e} {:.16e}", p.birth, p.death);
        }
        for b in &self.essential {
            let _ = writeln!(out, "{:.16e} inf", b);
        }
        out
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    /// Applies the coordinate transform `(x, y) -> (x, y - x)` to every
    /// finite point. Essential classes are dropped: the transform is
    /// undefined for infinite death.
    pub fn to_birth_persistence(&self) -> TransformedDiagram {
        TransformedDiagram {
            points: self
                .points
                .iter()
                .map(|p| BirthPersistence {
                    birth: p.birth,
                    persistence: p.death - p.birth,
                })
                .collect(),
        }
    }
}

/// A point in birth-persistence coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BirthPersistence {
    pub birth: f64,
    pub persistence: f64,
}

/// A diagram after the birth-persistence transform; the diagonal of the
/// source diagram maps onto the horizontal axis.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TransformedDiagram {
    pub points: Vec<BirthPersistence>,
}

/// One synthetic cluster: `count` points scattered around `(birth, death)`
/// with Gaussian spread.
#[derive(Debug, Clone, Copy)]
pub struct ClusterSpec {
    pub birth: f64,
    pub death: f64,
    pub spread: f64,
    pub count: usize,
}

/// Generates a diagram by sampling each cluster around its mean.
///
/// Deterministic for a fixed seed; sampled deaths are clamped so
/// `death >= birth` holds for every point.
pub fn synth_diagram(clusters: &[ClusterSpec], seed: u64) -> Result<PersistenceDiagram> {
    for c in clusters {
        if !c.birth.is_finite() || !c.death.is_finite() || !c.spread.is_finite() {
            return Err(Error::validation("cluster mean and spread must be finite"));
        }
        if c.spread < 0.0 {
            return Err(Error::validation(format!(
                "cluster spread {} must be >= 0",
                c.spread
            )));
        }
        if c.death < c.birth {
            return Err(Error::validation(format!(
                "cluster mean has death {} < birth {}",
                c.death, c.birth
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::new();
    for c in clusters {
        let birth_dist = Normal::new(c.birth, c.spread)
            .map_err(|e| Error::validation(format!("invalid cluster: {e}")))?;
        let death_dist = Normal::new(c.death, c.spread)
            .map_err(|e| Error::validation(format!("invalid cluster: {e}")))?;
        for _ in 0..c.count {
            let birth = birth_dist.sample(&mut rng);
            let death = death_dist.sample(&mut rng).max(birth);
            points.push(DiagramPoint { birth, death });
        }
    }
    Ok(PersistenceDiagram {
        points,
        essential: Vec::new(),
    })
}
