//! Mann-Whitney U test with midranks for ties.
//!
//! `U` is the smaller of the two rank-sum statistics. For small pooled
//! sizes (n + m <= 12) the two-sided p comes from exact enumeration of all
//! labelings; beyond that, from the normal approximation with tie-corrected
//! variance and continuity correction. All samples tied gives p = 1.

use super::MetricsError;
use crate::numeric::Scalar;
use statrs::distribution::{ContinuousCDF, Normal};

/// Largest pooled size handled by exact enumeration.
pub const EXACT_LIMIT: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MwuResult<F: Scalar> {
    /// min(U_a, U_b).
    pub u: F,
    pub p_two_sided: F,
}

/// Midranks of the pooled sample, in pooled index order (a then b).
fn pooled_ranks<F: Scalar>(a: &[F], b: &[F]) -> Vec<f64> {
    let mut indexed: Vec<(F, usize)> =
        a.iter().chain(b.iter()).copied().enumerate().map(|(i, v)| (v, i)).collect();
    indexed.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("samples contain no NaN"));
    let mut ranks = vec![0.0; indexed.len()];
    let mut i = 0;
    while i < indexed.len() {
        let mut j = i + 1;
        while j < indexed.len() && indexed[j].0 == indexed[i].0 {
            j += 1;
        }
        let midrank = (i + j + 1) as f64 / 2.0;
        for k in i..j {
            ranks[indexed[k].1] = midrank;
        }
        i = j;
    }
    ranks
}

/// Sizes of tie groups in the pooled sample.
fn tie_groups<F: Scalar>(a: &[F], b: &[F]) -> Vec<usize> {
    let mut pooled: Vec<F> = a.iter().chain(b.iter()).copied().collect();
    pooled.sort_by(|x, y| x.partial_cmp(y).expect("samples contain no NaN"));
    let mut groups = Vec::new();
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i + 1;
        while j < pooled.len() && pooled[j] == pooled[i] {
            j += 1;
        }
        groups.push(j - i);
        i = j;
    }
    groups
}

fn u_min_from_ranks(ranks: &[f64], n: usize, m: usize) -> f64 {
    let r_a: f64 = ranks[..n].iter().sum();
    let u_a = r_a - (n * (n + 1)) as f64 / 2.0;
    let u_b = (n * m) as f64 - u_a;
    u_a.min(u_b)
}

/// Exact two-sided p by enumerating every assignment of pooled values to
/// the two samples: `P(U <= U_observed)` under the permutation null.
pub fn mann_whitney_u_exact<F: Scalar>(a: &[F], b: &[F]) -> Result<MwuResult<F>, MetricsError> {
    if a.is_empty() || b.is_empty() {
        return Err(MetricsError::EmptySample);
    }
    let (n, m) = (a.len(), b.len());
    let total = n + m;
    assert!(total <= EXACT_LIMIT, "exact enumeration limited to n + m <= {EXACT_LIMIT}");
    let ranks = pooled_ranks(a, b);
    let observed = u_min_from_ranks(&ranks, n, m);

    let mut labelings = 0u64;
    let mut at_most = 0u64;
    for mask in 0u32..(1 << total) {
        if mask.count_ones() as usize != n {
            continue;
        }
        labelings += 1;
        let r_a: f64 =
            (0..total).filter(|&i| mask & (1 << i) != 0).map(|i| ranks[i]).sum();
        let u_a = r_a - (n * (n + 1)) as f64 / 2.0;
        let u = u_a.min((n * m) as f64 - u_a);
        if u <= observed + 1e-9 {
            at_most += 1;
        }
    }
    let p = at_most as f64 / labelings as f64;
    Ok(MwuResult {
        u: F::from_f64(observed).expect("U representable"),
        p_two_sided: F::from_f64(p).expect("p representable"),
    })
}

/// Normal approximation with tie-corrected variance and continuity
/// correction; p = 1 when the variance vanishes (all values tied).
pub fn mann_whitney_u_normal<F: Scalar>(a: &[F], b: &[F]) -> Result<MwuResult<F>, MetricsError> {
    if a.is_empty() || b.is_empty() {
        return Err(MetricsError::EmptySample);
    }
    let (n, m) = (a.len(), b.len());
    let ranks = pooled_ranks(a, b);
    let u = u_min_from_ranks(&ranks, n, m);

    let nf = n as f64;
    let mf = m as f64;
    let total = nf + mf;
    let tie_term: f64 =
        tie_groups(a, b).iter().map(|&t| (t * t * t - t) as f64).sum::<f64>()
            / (total * (total - 1.0));
    let variance = nf * mf / 12.0 * (total + 1.0 - tie_term);
    let mean = nf * mf / 2.0;

    let p = if variance <= 0.0 {
        1.0
    } else {
        let z = (u - mean + 0.5) / variance.sqrt();
        let normal = Normal::new(0.0, 1.0).expect("standard normal");
        (2.0 * normal.cdf(z)).min(1.0)
    };
    Ok(MwuResult {
        u: F::from_f64(u).expect("U representable"),
        p_two_sided: F::from_f64(p).expect("p representable"),
    })
}

/// U from rank sums with midranks; exact enumeration p for small pooled
/// samples, normal approximation beyond.
pub fn mann_whitney_u<F: Scalar>(a: &[F], b: &[F]) -> Result<MwuResult<F>, MetricsError> {
    if a.is_empty() || b.is_empty() {
        return Err(MetricsError::EmptySample);
    }
    if a.len() + b.len() <= EXACT_LIMIT {
        mann_whitney_u_exact(a, b)
    } else {
        mann_whitney_u_normal(a, b)
    }
}
