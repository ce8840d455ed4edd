//! Deterministic text embeddings and cosine similarity.
//!
//! The default embedder feature-hashes lowercase word tokens into a
//! fixed-dimension bag vector and L2-normalizes it: identical texts map to
//! identical vectors on every platform, token order is irrelevant, and
//! cosine behaves like bag-of-words cosine up to hash collisions. External
//! embedding services can plug in behind the same trait.

use crate::numeric::Scalar;
use thiserror::Error;

pub const DEFAULT_EMBED_DIM: usize = 256;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VectorError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

/// Embedding contract: unit-norm vectors (or the zero vector for empty
/// text) of a fixed dimension.
pub trait TextEmbedder<F: Scalar> {
    fn dim(&self) -> usize;
    fn embed(&self, text: &str) -> Vec<F>;
}

/// FNV-1a 64-bit; hand-rolled so bucket assignment never depends on the
/// platform hasher.
fn fnv1a(token: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in token.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric() && c != '#')
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

/// Feature-hashing bag-of-words embedder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashEmbedder {
    pub dim: usize,
}

impl Default for HashEmbedder {
    fn default() -> Self {
        HashEmbedder { dim: DEFAULT_EMBED_DIM }
    }
}

impl<F: Scalar> TextEmbedder<F> for HashEmbedder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, text: &str) -> Vec<F> {
        let mut counts = vec![0u32; self.dim];
        for token in tokens(text) {
            let bucket = (fnv1a(&token) % self.dim as u64) as usize;
            counts[bucket] += 1;
        }
        let mut v: Vec<F> = counts.into_iter().map(|c| F::from_count(c as usize)).collect();
        normalize(&mut v);
        v
    }
}

/// L2-normalize in place; the zero vector stays zero.
pub fn normalize<F: Scalar>(v: &mut [F]) {
    let norm = v.iter().fold(F::zero(), |acc, &x| acc + x * x).sqrt();
    if norm > F::zero() {
        for x in v.iter_mut() {
            *x = *x / norm;
        }
    }
}

/// Cosine similarity `u.v / (|u||v|)`; 0 when either norm is 0.
pub fn cosine<F: Scalar>(u: &[F], v: &[F]) -> Result<F, VectorError> {
    if u.len() != v.len() {
        return Err(VectorError::DimensionMismatch(u.len(), v.len()));
    }
    let mut dot = F::zero();
    let mut nu = F::zero();
    let mut nv = F::zero();
    for (&a, &b) in u.iter().zip(v) {
        dot = dot + a * b;
        nu = nu + a * a;
        nv = nv + b * b;
    }
    if nu == F::zero() || nv == F::zero() {
        return Ok(F::zero());
    }
    Ok(dot / (nu.sqrt() * nv.sqrt()))
}

/// Mean over an already-collected list of pair values.
pub fn mean_pairs<F: Scalar>(pairs: &[F]) -> Option<F> {
    if pairs.is_empty() {
        return None;
    }
    let sum = pairs.iter().fold(F::zero(), |acc, &x| acc + x);
    Some(sum / F::from_count(pairs.len()))
}
