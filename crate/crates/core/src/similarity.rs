//! Multiset Jaccard, interiority and coincidence indices over non-negative
//! real vectors, and pairwise coincidence matrices built from them.
//!
//! For two vectors `x` and `y` of equal length:
//!
//! ```text
//! jaccard     = Σ min(x_i, y_i) / Σ max(x_i, y_i)
//! interiority = Σ min(x_i, y_i) / min(Σ x_i, Σ y_i)
//! coincidence = jaccard * interiority
//! ```
//!
//! Both vectors must be non-negative and carry some positive mass. All-zero
//! vectors are rejected instead of being mapped to a similarity of zero.

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimilarityError {
    #[error("vector length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("vectors must have at least one element")]
    Empty,
    #[error("element {index} is {value}; weights must be finite and non-negative")]
    InvalidElement { index: usize, value: f64 },
    #[error("vector has no positive element")]
    ZeroVector,
    #[error("row {row}: {source}")]
    InvalidRow {
        row: usize,
        #[source]
        source: Box<SimilarityError>,
    },
    #[error("need at least 2 rows, got {0}")]
    TooFewRows(usize),
}

/// A validated non-negative, non-zero weight vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self, SimilarityError> {
        validate(&values)?;
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for FeatureVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// The three indices for one pair of vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityTriple {
    pub jaccard: f64,
    pub interiority: f64,
    pub coincidence: f64,
}

impl SimilarityTriple {
    /// The triple of a vector with itself.
    pub const IDENTITY: SimilarityTriple = SimilarityTriple {
        jaccard: 1.0,
        interiority: 1.0,
        coincidence: 1.0,
    };
}

/// Checks that `values` is a valid multiset vector.
pub fn validate(values: &[f64]) -> Result<(), SimilarityError> {
    if values.is_empty() {
        return Err(SimilarityError::Empty);
    }
    let mut any_positive = false;
    for (index, &value) in values.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(SimilarityError::InvalidElement { index, value });
        }
        any_positive |= value > 0.0;
    }
    if !any_positive {
        return Err(SimilarityError::ZeroVector);
    }
    Ok(())
}

struct Sums {
    min: f64,
    max: f64,
    x: f64,
    y: f64,
}

fn sums(x: &[f64], y: &[f64]) -> Result<Sums, SimilarityError> {
    if x.len() != y.len() {
        return Err(SimilarityError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    validate(x)?;
    validate(y)?;
    Ok(sums_unchecked(x, y))
}

fn sums_unchecked(x: &[f64], y: &[f64]) -> Sums {
    let mut s = Sums {
        min: 0.0,
        max: 0.0,
        x: 0.0,
        y: 0.0,
    };
    for (&a, &b) in x.iter().zip(y) {
        s.min += a.min(b);
        s.max += a.max(b);
        s.x += a;
        s.y += b;
    }
    s
}

impl Sums {
    fn triple(&self) -> SimilarityTriple {
        let jaccard = self.min / self.max;
        let interiority = self.min / self.x.min(self.y);
        SimilarityTriple {
            jaccard,
            interiority,
            coincidence: jaccard * interiority,
        }
    }
}

pub fn jaccard(x: &[f64], y: &[f64]) -> Result<f64, SimilarityError> {
    let s = sums(x, y)?;
    Ok(s.min / s.max)
}

/// Interiority (overlap) index: how much of the lighter vector is contained
/// in the heavier one.
pub fn interiority(x: &[f64], y: &[f64]) -> Result<f64, SimilarityError> {
    let s = sums(x, y)?;
    Ok(s.min / s.x.min(s.y))
}

pub fn coincidence(x: &[f64], y: &[f64]) -> Result<SimilarityTriple, SimilarityError> {
    Ok(sums(x, y)?.triple())
}

/// Symmetric matrix of pairwise [`SimilarityTriple`]s.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    n: usize,
    entries: Vec<SimilarityTriple>,
}

impl SimilarityMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> SimilarityTriple {
        self.entries[i * self.n + j]
    }

    pub fn coincidence(&self) -> Array2<f64> {
        self.map(|t| t.coincidence)
    }

    pub fn jaccard(&self) -> Array2<f64> {
        self.map(|t| t.jaccard)
    }

    pub fn interiority(&self) -> Array2<f64> {
        self.map(|t| t.interiority)
    }

    fn map(&self, f: impl Fn(&SimilarityTriple) -> f64) -> Array2<f64> {
        Array2::from_shape_fn((self.n, self.n), |(i, j)| f(&self.entries[i * self.n + j]))
    }
}

/// Pairwise similarities between the rows of `rows`.
///
/// Pairs are evaluated in parallel; each entry depends only on its own two
/// rows, so the result does not depend on scheduling. The diagonal holds
/// [`SimilarityTriple::IDENTITY`].
pub fn pairwise_similarity(rows: ArrayView2<'_, f64>) -> Result<SimilarityMatrix, SimilarityError> {
    let n = rows.nrows();
    if n < 2 {
        return Err(SimilarityError::TooFewRows(n));
    }
    let rows: Vec<Vec<f64>> = rows.outer_iter().map(|r| r.to_vec()).collect();
    for (row, values) in rows.iter().enumerate() {
        validate(values).map_err(|e| SimilarityError::InvalidRow {
            row,
            source: Box::new(e),
        })?;
    }

    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let values: Vec<SimilarityTriple> = pairs
        .par_iter()
        .map(|&(i, j)| sums_unchecked(&rows[i], &rows[j]).triple())
        .collect();

    let mut entries = vec![SimilarityTriple::IDENTITY; n * n];
    for (&(i, j), &t) in pairs.iter().zip(&values) {
        entries[i * n + j] = t;
        entries[j * n + i] = t;
    }
    Ok(SimilarityMatrix { n, entries })
}

/// Convenience wrapper over a list of row vectors.
pub fn pairwise_similarity_rows(rows: &[Vec<f64>]) -> Result<SimilarityMatrix, SimilarityError> {
    let width = rows.first().map_or(0, Vec::len);
    for (row, r) in rows.iter().enumerate() {
        if r.len() != width {
            return Err(SimilarityError::InvalidRow {
                row,
                source: Box::new(SimilarityError::LengthMismatch {
                    left: width,
                    right: r.len(),
                }),
            });
        }
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    let matrix =
        Array2::from_shape_vec((rows.len(), width), flat).expect("row widths checked above");
    pairwise_similarity(matrix.view())
}
