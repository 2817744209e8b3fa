//! Dense vector primitives: normalization, averaging, cosine similarity and
//! the sense/dictionary concatenation used to score contextual vectors
//! against two feature spaces at once.
//!
//! Vectors are stored as `f32`; every reduction accumulates in `f64`.

use thiserror::Error;

const ZERO_NORM: f64 = 1e-12;
const HALF_NORM_TOLERANCE: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VectorError {
    #[error("vector norm is zero")]
    ZeroVector,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("no vectors to average")]
    EmptyInput,
    #[error("vector has no components")]
    Empty,
    #[error("vector contains a non-finite component")]
    NonFinite,
    #[error("concatenated half is not unit-norm (norm {0})")]
    HalfNotUnit(f64),
}

/// A dense, finite, non-empty vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding(Vec<f32>);

impl Embedding {
    pub fn new(values: Vec<f32>) -> Result<Embedding, VectorError> {
        if values.is_empty() {
            return Err(VectorError::Empty);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(VectorError::NonFinite);
        }
        Ok(Embedding(values))
    }

    pub fn from_f64(values: &[f64]) -> Result<Embedding, VectorError> {
        Embedding::new(values.iter().map(|&v| v as f32).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f32> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }
}

impl AsRef<[f32]> for Embedding {
    fn as_ref(&self) -> &[f32] {
        &self.0
    }
}

/// `[normalize(a); normalize(b)]`, length `2D`, each half unit-norm.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcatEmbedding(Vec<f32>);

impl ConcatEmbedding {
    /// Joins two halves that are already unit-norm.
    pub fn from_unit_halves(first: &[f32], second: &[f32]) -> Result<ConcatEmbedding, VectorError> {
        check_dims(first.len(), second.len())?;
        for half in [first, second] {
            let n = norm(half);
            if (n - 1.0).abs() > HALF_NORM_TOLERANCE {
                return Err(VectorError::HalfNotUnit(n));
            }
        }
        let mut values = Vec::with_capacity(first.len() * 2);
        values.extend_from_slice(first);
        values.extend_from_slice(second);
        Ok(ConcatEmbedding(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn half_dim(&self) -> usize {
        self.0.len() / 2
    }

    pub fn first_half(&self) -> &[f32] {
        &self.0[..self.half_dim()]
    }

    pub fn second_half(&self) -> &[f32] {
        &self.0[self.half_dim()..]
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }

    pub fn into_embedding(self) -> Embedding {
        Embedding(self.0)
    }
}

impl AsRef<[f32]> for ConcatEmbedding {
    fn as_ref(&self) -> &[f32] {
        &self.0
    }
}

fn check_dims(expected: usize, found: usize) -> Result<(), VectorError> {
    if expected != found {
        return Err(VectorError::DimensionMismatch { expected, found });
    }
    Ok(())
}

pub fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x as f64 * y as f64).sum()
}

pub fn norm(a: &[f32]) -> f64 {
    dot(a, a).sqrt()
}

fn normalized(values: &[f32]) -> Result<Vec<f32>, VectorError> {
    let n = norm(values);
    if n < ZERO_NORM {
        return Err(VectorError::ZeroVector);
    }
    Ok(values.iter().map(|&v| (v as f64 / n) as f32).collect())
}

pub fn l2_normalize(e: &Embedding) -> Result<Embedding, VectorError> {
    normalized(&e.0).map(Embedding)
}

/// Running componentwise mean with `f64` accumulation in insertion order.
#[derive(Debug, Clone)]
pub struct MeanAccumulator {
    sum: Vec<f64>,
    count: usize,
}

impl MeanAccumulator {
    pub fn new(dim: usize) -> Self {
        MeanAccumulator {
            sum: vec![0.0; dim],
            count: 0,
        }
    }

    pub fn add(&mut self, values: &[f32]) -> Result<(), VectorError> {
        check_dims(self.sum.len(), values.len())?;
        for (s, &v) in self.sum.iter_mut().zip(values) {
            *s += v as f64;
        }
        self.count += 1;
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn finish(&self) -> Result<Embedding, VectorError> {
        if self.count == 0 {
            return Err(VectorError::EmptyInput);
        }
        let n = self.count as f64;
        Embedding::new(self.sum.iter().map(|s| (s / n) as f32).collect())
    }
}

/// Componentwise arithmetic mean.
pub fn mean<'a, I>(es: I) -> Result<Embedding, VectorError>
where
    I: IntoIterator<Item = &'a Embedding>,
{
    let mut iter = es.into_iter();
    let first = iter.next().ok_or(VectorError::EmptyInput)?;
    let mut acc = MeanAccumulator::new(first.dim());
    acc.add(first.as_slice())?;
    for e in iter {
        acc.add(e.as_slice())?;
    }
    acc.finish()
}

/// Cosine similarity clamped to `[-1, 1]`.
pub fn cosine(a: &[f32], b: &[f32]) -> Result<f64, VectorError> {
    check_dims(a.len(), b.len())?;
    let (na, nb) = (norm(a), norm(b));
    if na < ZERO_NORM || nb < ZERO_NORM {
        return Err(VectorError::ZeroVector);
    }
    Ok((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

/// Sense vector joined with its dictionary vector, both L2-normalized.
pub fn concat_sense(v_s: &Embedding, v_d: &Embedding) -> Result<ConcatEmbedding, VectorError> {
    check_dims(v_s.dim(), v_d.dim())?;
    let s = normalized(v_s.as_slice())?;
    let d = normalized(v_d.as_slice())?;
    ConcatEmbedding::from_unit_halves(&s, &d)
}

/// A contextual vector repeated in both halves so it aligns with
/// [`concat_sense`] output.
pub fn duplicate_contextual(c: &[f32]) -> Result<ConcatEmbedding, VectorError> {
    let n = normalized(c)?;
    ConcatEmbedding::from_unit_halves(&n, &n)
}
