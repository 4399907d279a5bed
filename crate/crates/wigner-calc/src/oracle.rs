//! Ground-truth moment generators that bypass the chaos algebra entirely.
//!
//! Mixed moments of a semicircular family diagonalize over non-crossing
//! pair partitions: `τ(S(h₁)⋯S(h_{2k})) = Σ_{π ∈ NC₂} Π_{(i,j) ∈ π} ⟨h_i, h_j⟩`.
//! Two independent evaluations are provided — the closed form summing over
//! enumerated pairings, and the literal Wick recursion peeling the last
//! letter — so the product-formula implementation can be checked against
//! both.

use std::collections::HashMap;

use thiserror::Error;

use crate::kernel::{Coeff, Kernel};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("word letters must be order-1 kernels, got order {0}")]
    NotOrderOne(usize),
}

/// A perfect matching of `{1, …, 2k}`, stored as pairs `(i, j)` with
/// `i < j`, 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairPartition {
    pub pairs: Vec<(usize, usize)>,
}

impl PairPartition {
    /// No `a < b < c < d` with `(a, c)` and `(b, d)` both present.
    pub fn is_noncrossing(&self) -> bool {
        for (i, &(a, c)) in self.pairs.iter().enumerate() {
            for &(b, d) in &self.pairs[i + 1..] {
                let crosses = (a < b && b < c && c < d) || (b < a && a < d && d < c);
                if crosses {
                    return false;
                }
            }
        }
        true
    }
}

/// All non-crossing pair partitions of `{1, …, k}`; empty for odd `k`.
/// The count for even `k` is the Catalan number `C_{k/2}`.
pub fn enumerate_nc_pairings(k: usize) -> Vec<PairPartition> {
    if k % 2 != 0 {
        return Vec::new();
    }
    fn go(points: &[usize]) -> Vec<Vec<(usize, usize)>> {
        if points.is_empty() {
            return vec![Vec::new()];
        }
        let first = points[0];
        let mut out = Vec::new();
        // pair the first point with one at odd distance; the points strictly
        // inside and strictly outside the arc pair among themselves
        for m in (1..points.len()).step_by(2) {
            let partner = points[m];
            let inside = &points[1..m];
            let outside = &points[m + 1..];
            for inner in go(inside) {
                for outer in go(outside) {
                    let mut pairs = vec![(first, partner)];
                    pairs.extend(inner.iter().copied());
                    pairs.extend(outer.iter().copied());
                    out.push(pairs);
                }
            }
        }
        out
    }
    let points: Vec<usize> = (1..=k).collect();
    go(&points)
        .into_iter()
        .map(|mut pairs| {
            pairs.sort_unstable();
            PairPartition { pairs }
        })
        .collect()
}

/// Every pair partition of `{1, …, k}`, crossing or not. Exponentially many;
/// intended for cross-checking the enumeration at small `k`.
pub fn enumerate_all_pairings(k: usize) -> Vec<PairPartition> {
    if k % 2 != 0 {
        return Vec::new();
    }
    fn go(points: &[usize]) -> Vec<Vec<(usize, usize)>> {
        if points.is_empty() {
            return vec![Vec::new()];
        }
        let first = points[0];
        let mut out = Vec::new();
        for m in 1..points.len() {
            let partner = points[m];
            let mut rest: Vec<usize> = Vec::with_capacity(points.len() - 2);
            rest.extend_from_slice(&points[1..m]);
            rest.extend_from_slice(&points[m + 1..]);
            for tail in go(&rest) {
                let mut pairs = vec![(first, partner)];
                pairs.extend(tail);
                out.push(pairs);
            }
        }
        out
    }
    let points: Vec<usize> = (1..=k).collect();
    go(&points)
        .into_iter()
        .map(|mut pairs| {
            pairs.sort_unstable();
            PairPartition { pairs }
        })
        .collect()
}

fn check_word(word: &[Kernel]) -> Result<(), OracleError> {
    for h in word {
        if h.order() != 1 {
            return Err(OracleError::NotOrderOne(h.order()));
        }
    }
    Ok(())
}

/// `τ(S(h₁)⋯S(h_k))` as the non-crossing pairing sum. The letters are real
/// directions, so the pair weights `⟨h_i, h_j⟩` are symmetric.
pub fn wick_moment(word: &[Kernel]) -> Result<Coeff, OracleError> {
    check_word(word)?;
    if word.len() % 2 != 0 {
        return Ok(Coeff::default());
    }
    if word.is_empty() {
        return Ok(Coeff::new(1.0, 0.0));
    }
    let mut total = Coeff::default();
    for partition in enumerate_nc_pairings(word.len()) {
        let mut weight = Coeff::new(1.0, 0.0);
        for &(i, j) in &partition.pairs {
            weight *= word[i - 1].inner(&word[j - 1]);
        }
        total += weight;
    }
    Ok(total)
}

/// The Wick recursion evaluated literally: peeling the last letter `S(h)`,
///
/// `τ(S(e₁)⋯S(eₙ)S(h)) = Σ_k ⟨e_k, h⟩ τ(S(e₁)⋯S(e_{k−1})) τ(S(e_{k+1})⋯S(eₙ))`.
///
/// Subword traces are memoized over contiguous ranges.
pub fn wick_recursive(word: &[Kernel]) -> Result<Coeff, OracleError> {
    check_word(word)?;
    fn trace_range(
        word: &[Kernel],
        lo: usize,
        hi: usize,
        memo: &mut HashMap<(usize, usize), Coeff>,
    ) -> Coeff {
        if hi <= lo {
            return Coeff::new(1.0, 0.0);
        }
        if (hi - lo) % 2 != 0 {
            return Coeff::default();
        }
        if let Some(&v) = memo.get(&(lo, hi)) {
            return v;
        }
        let last = hi - 1;
        let mut acc = Coeff::default();
        for k in lo..last {
            let weight = word[k].inner(&word[last]);
            if weight.norm_sqr() == 0.0 {
                continue;
            }
            let left = trace_range(word, lo, k, memo);
            let right = trace_range(word, k + 1, last, memo);
            acc += weight * left * right;
        }
        memo.insert((lo, hi), acc);
        acc
    }
    let mut memo = HashMap::new();
    Ok(trace_range(word, 0, word.len(), &mut memo))
}

/// `k`-th Catalan number.
pub fn catalan(k: usize) -> u64 {
    let mut c: u64 = 1;
    for i in 0..k as u64 {
        c = c * 2 * (2 * i + 1) / (i + 2);
    }
    c
}
