//! Smoothed TF-IDF over sparse term multisets.
//!
//! `tf` is the raw count, `idf = ln((1+N)/(1+df)) + 1`, and every document
//! vector is L2-normalized. Terms are arbitrary strings, which lets the
//! co-retweet pipeline use post identifiers as terms.

use crate::numeric::Scalar;
use std::collections::BTreeMap;

/// Sparse weighted vector over string terms.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector<F: Scalar> {
    pub weights: BTreeMap<String, F>,
}

impl<F: Scalar> SparseVector<F> {
    pub fn is_zero(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn l2_norm(&self) -> F {
        self.weights.values().fold(F::zero(), |acc, &w| acc + w * w).sqrt()
    }
}

/// Cosine over sparse vectors; 0 when either side has zero norm.
pub fn cosine_sparse<F: Scalar>(a: &SparseVector<F>, b: &SparseVector<F>) -> F {
    let (small, large) =
        if a.weights.len() <= b.weights.len() { (a, b) } else { (b, a) };
    let mut dot = F::zero();
    for (term, &w) in &small.weights {
        if let Some(&w2) = large.weights.get(term) {
            dot = dot + w * w2;
        }
    }
    let na = a.l2_norm();
    let nb = b.l2_norm();
    if na == F::zero() || nb == F::zero() {
        F::zero()
    } else {
        dot / (na * nb)
    }
}

/// TF-IDF vectors for a corpus of term multisets; empty documents map to
/// zero vectors but still count toward `N`.
pub fn tfidf<F: Scalar>(docs: &[BTreeMap<String, u32>]) -> Vec<SparseVector<F>> {
    let n = docs.len();
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in docs {
        for term in doc.keys() {
            *df.entry(term).or_insert(0) += 1;
        }
    }
    let idf = |term: &str| -> F {
        let df_t = df.get(term).copied().unwrap_or(0);
        let ratio = (1.0 + n as f64) / (1.0 + df_t as f64);
        F::from_f64(ratio.ln() + 1.0).expect("idf representable")
    };
    docs.iter()
        .map(|doc| {
            let mut weights: BTreeMap<String, F> = doc
                .iter()
                .map(|(term, &count)| (term.clone(), F::from_count(count as usize) * idf(term)))
                .collect();
            let norm = weights.values().fold(F::zero(), |acc, &w| acc + w * w).sqrt();
            if norm > F::zero() {
                for w in weights.values_mut() {
                    *w = *w / norm;
                }
            }
            SparseVector { weights }
        })
        .collect()
}
