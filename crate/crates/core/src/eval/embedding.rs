//! Unit embeddings and cosine classification.

use serde::{Deserialize, Serialize};

/// Largest accepted `| ‖v‖₂ − 1 |` for vectors entering [`classify`].
pub const NORM_TOLERANCE: f64 = 1e-3;
pub const DEFAULT_LOGIT_SCALE: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClassifyError {
    #[error("need at least 2 class embeddings, got {0}")]
    TooFewClasses(usize),
    #[error("dimension mismatch: image has {expected}, text {index} has {found}")]
    DimensionMismatch { expected: usize, found: usize, index: usize },
    #[error("{which} embedding is not unit-norm (‖v‖ = {norm})")]
    NotNormalized { which: String, norm: f64 },
    #[error("cannot normalize a zero vector")]
    ZeroVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EmbeddingVector(Vec<f32>);

impl EmbeddingVector {
    /// Wraps values as-is; [`classify`] checks the norm.
    pub fn new(values: Vec<f32>) -> Self {
        Self(values)
    }

    pub fn normalized(mut values: Vec<f32>) -> Result<Self, ClassifyError> {
        let n = norm(&values);
        if n == 0.0 || !n.is_finite() {
            return Err(ClassifyError::ZeroVector);
        }
        for v in &mut values {
            *v = (*v as f64 / n) as f32;
        }
        Ok(Self(values))
    }

    /// Standard basis vector `e_index` in `dim` dimensions.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[index] = 1.0;
        Self(v)
    }

    pub fn values(&self) -> &[f32] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f32> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn is_unit(&self, tolerance: f64) -> bool {
        (self.norm() - 1.0).abs() <= tolerance
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.0.iter().zip(&other.0).map(|(&a, &b)| a as f64 * b as f64).sum()
    }
}

fn norm(v: &[f32]) -> f64 {
    v.iter().map(|&x| x as f64 * x as f64).sum::<f64>().sqrt()
}

/// Cosine scores of one image against every class, plus the argmax.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub scores: Vec<f64>,
    pub predicted: usize,
}

impl Scores {
    pub fn probabilities(&self, logit_scale: f64) -> Vec<f64> {
        softmax(&self.scores, logit_scale)
    }

    pub fn top_k(&self, k: usize) -> Vec<usize> {
        top_k(&self.scores, k)
    }
}

/// `scores[i] = dot(image, texts[i])`; ties go to the lowest index.
pub fn classify(image: &EmbeddingVector, texts: &[EmbeddingVector]) -> Result<Scores, ClassifyError> {
    if texts.len() < 2 {
        return Err(ClassifyError::TooFewClasses(texts.len()));
    }
    let check = |v: &EmbeddingVector, which: String| {
        let n = v.norm();
        if (n - 1.0).abs() > NORM_TOLERANCE || !n.is_finite() {
            Err(ClassifyError::NotNormalized { which, norm: n })
        } else {
            Ok(())
        }
    };
    check(image, "image".into())?;
    for (i, t) in texts.iter().enumerate() {
        if t.dim() != image.dim() {
            return Err(ClassifyError::DimensionMismatch {
                expected: image.dim(),
                found: t.dim(),
                index: i,
            });
        }
        check(t, format!("text {i}"))?;
    }
    let scores: Vec<f64> = texts.iter().map(|t| image.dot(t)).collect();
    Ok(Scores {
        predicted: argmax(&scores),
        scores,
    })
}

/// Index of the largest value; the first one wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Indices of the `k` best scores, best first, ties by lowest index.
pub fn top_k(scores: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

pub fn softmax(scores: &[f64], logit_scale: f64) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = scores.iter().map(|s| ((s - max) * logit_scale).exp()).collect();
    let sum: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / sum).collect()
}

/// Shannon entropy in nats.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}
