//! Length-truncated full Fock space: the operator-level oracle.
//!
//! Vectors are sparse combinations of words over the basis alphabet (the
//! empty word is the vacuum Ω); operators act by left/right creation and
//! annihilation, `S(h) = l(h) + l*(h)`, and polynomials in them. A chaos
//! expansion embeds through the first-slot recursion
//!
//! `op(Iₙ(h ⊗ g)) = S(h)·op(I_{n−1}(g)) − op(I_{n−2}(h ⌢₁ g))`
//!
//! which is the product formula read backwards, so the two sides of every
//! trace identity come from genuinely different code paths.
//!
//! Truncation semantics: materialized operators are the compression
//! `P·X·P` of the true operator to words of length ≤ L. Columns indexed by
//! words of length ≤ L − growth(X) are exact, where `growth` is the tracked
//! worst-case length increase; vacuum expectations of operator products are
//! exact whenever the summed growth stays within L.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::chaos::ChaosExpansion;
use crate::kernel::{BasisIndex, Coeff, Kernel};

#[derive(Debug, Error, PartialEq)]
pub enum FockError {
    #[error("creation on a word of maximal length {level}")]
    Truncation { level: usize },
    #[error("chaos degree {degree} needs headroom {headroom}, but the level is {level}")]
    Headroom { degree: usize, headroom: usize, level: usize },
    #[error("second quantization input has norm {0}, not a contraction")]
    NotContraction(f64),
    #[error("word space of dimension {dim} is too large to materialize")]
    DimensionTooLarge { dim: usize },
    #[error("L^p norm defined here for even p only, got {0}")]
    OddExponent(usize),
}

/// Truncation parameters: alphabet size `d` and maximal word length `L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockSpace {
    pub basis_size: u32,
    pub level: usize,
}

impl FockSpace {
    pub fn new(basis_size: u32, level: usize) -> Self {
        assert!(basis_size >= 1);
        FockSpace { basis_size, level }
    }

    /// Number of words of length ≤ L.
    pub fn dim(&self) -> usize {
        let d = self.basis_size as usize;
        if d == 1 {
            return self.level + 1;
        }
        let mut total = 0usize;
        let mut pow = 1usize;
        for _ in 0..=self.level {
            total += pow;
            pow *= d;
        }
        total
    }

    /// Position of a word in the length-then-lexicographic enumeration.
    pub fn word_index(&self, word: &[BasisIndex]) -> usize {
        debug_assert!(word.len() <= self.level);
        let d = self.basis_size as usize;
        let mut offset = 0usize;
        let mut pow = 1usize;
        for _ in 0..word.len() {
            offset += pow;
            pow *= d;
        }
        let mut rank = 0usize;
        for &letter in word {
            debug_assert!((letter as usize) < d);
            rank = rank * d + letter as usize;
        }
        offset + rank
    }

    /// Inverse of [`FockSpace::word_index`].
    pub fn index_word(&self, mut index: usize) -> Vec<BasisIndex> {
        let d = self.basis_size as usize;
        let mut len = 0usize;
        let mut pow = 1usize;
        while index >= pow {
            index -= pow;
            pow *= d;
            len += 1;
        }
        let mut word = vec![0u32; len];
        for slot in (0..len).rev() {
            word[slot] = (index % d) as u32;
            index /= d;
        }
        word
    }
}

/// Sparse vector of the truncated Fock space.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FockVector {
    coeffs: BTreeMap<Vec<BasisIndex>, Coeff>,
}

impl FockVector {
    pub fn zero() -> Self {
        FockVector::default()
    }

    /// The vacuum Ω.
    pub fn vacuum() -> Self {
        let mut v = FockVector::zero();
        v.add_word(&[], Coeff::new(1.0, 0.0));
        v
    }

    /// Embeds an order-`n` kernel as its length-`n` word component; this is
    /// `Iₙ(f)Ω` under the chaos isomorphism.
    pub fn from_kernel(f: &Kernel) -> Self {
        let mut v = FockVector::zero();
        for (idx, c) in f.iter() {
            v.add_word(idx, c);
        }
        v
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = (&[BasisIndex], Coeff)> {
        self.coeffs.iter().map(|(w, &c)| (w.as_slice(), c))
    }

    pub fn get(&self, word: &[BasisIndex]) -> Coeff {
        self.coeffs.get(word).copied().unwrap_or_default()
    }

    pub fn add_word(&mut self, word: &[BasisIndex], c: Coeff) {
        if c.norm_sqr() == 0.0 {
            return;
        }
        let v = self.coeffs.entry(word.to_vec()).or_default();
        *v += c;
        if v.norm_sqr() <= crate::kernel::PRUNE_EPS * crate::kernel::PRUNE_EPS {
            self.coeffs.remove(word);
        }
    }

    pub fn add(&self, other: &FockVector) -> FockVector {
        let mut out = self.clone();
        for (w, c) in other.words() {
            out.add_word(w, c);
        }
        out
    }

    pub fn sub(&self, other: &FockVector) -> FockVector {
        self.add(&other.scale(Coeff::new(-1.0, 0.0)))
    }

    pub fn scale(&self, a: Coeff) -> FockVector {
        let mut out = FockVector::zero();
        for (w, c) in self.words() {
            out.add_word(w, a * c);
        }
        out
    }

    /// Conjugate-linear in `other`, word basis orthonormal.
    pub fn inner(&self, other: &FockVector) -> Coeff {
        let small = if self.coeffs.len() <= other.coeffs.len() { self } else { other };
        let mut acc = Coeff::default();
        for (w, _) in small.words() {
            acc += self.get(w) * other.get(w).conj();
        }
        acc
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderKind {
    LeftCreate,
    LeftAnnihilate,
    RightCreate,
    RightAnnihilate,
}

/// Applies a single ladder operator. Creation from a word already at the
/// truncation level is an error; annihilation of the vacuum is zero.
///
/// Annihilation weights are `⟨first letter, h⟩` (conjugate-linear in `h`),
/// which makes `l*(h)` the literal adjoint of `l(h)` on the word basis.
pub fn apply_ladder(
    kind: LadderKind,
    h: &Kernel,
    v: &FockVector,
    space: FockSpace,
) -> Result<FockVector, FockError> {
    assert_eq!(h.order(), 1, "ladder operators take order-1 directions");
    let mut out = FockVector::zero();
    for (word, c) in v.words() {
        match kind {
            LadderKind::LeftCreate | LadderKind::RightCreate => {
                if word.len() >= space.level {
                    return Err(FockError::Truncation { level: space.level });
                }
                for (idx, hc) in h.iter() {
                    let mut w = Vec::with_capacity(word.len() + 1);
                    if kind == LadderKind::LeftCreate {
                        w.push(idx[0]);
                        w.extend_from_slice(word);
                    } else {
                        w.extend_from_slice(word);
                        w.push(idx[0]);
                    }
                    out.add_word(&w, hc * c);
                }
            }
            LadderKind::LeftAnnihilate => {
                if let Some((&first, rest)) = word.split_first() {
                    let weight = h.get(&[first]).conj();
                    out.add_word(rest, weight * c);
                }
            }
            LadderKind::RightAnnihilate => {
                if let Some((&last, rest)) = word.split_last() {
                    let weight = h.get(&[last]).conj();
                    out.add_word(rest, weight * c);
                }
            }
        }
    }
    Ok(out)
}

/// `S(e_i)` applied with compression semantics: creation beyond the level is
/// silently dropped, which is exactly `P·S·P`.
fn field_apply_compressed(i: BasisIndex, v: &FockVector, space: FockSpace) -> FockVector {
    let mut out = FockVector::zero();
    for (word, c) in v.words() {
        if word.len() < space.level {
            let mut w = Vec::with_capacity(word.len() + 1);
            w.push(i);
            w.extend_from_slice(word);
            out.add_word(&w, c);
        }
        if let Some((&first, rest)) = word.split_first() {
            if first == i {
                out.add_word(rest, c);
            }
        }
    }
    out
}

/// `op(word)·v` by the suffix recursion
/// `op(i·w) = S(e_i)·op(w) − δ_{i,w₀}·op(w[1:])`.
fn apply_word(word: &[BasisIndex], v: &FockVector, space: FockSpace) -> FockVector {
    let n = word.len();
    // u[k] = op(word[k..])·v, built back to front
    let mut u_next2 = v.clone(); // op of empty suffix
    if n == 0 {
        return u_next2;
    }
    let mut u_next = field_apply_compressed(word[n - 1], v, space);
    for k in (0..n - 1).rev() {
        let mut u = field_apply_compressed(word[k], &u_next, space);
        if word[k] == word[k + 1] {
            u = u.sub(&u_next2);
        }
        u_next2 = u_next;
        u_next = u;
    }
    u_next
}

/// The compressed operator of a chaos expansion applied to a vector,
/// without materializing a matrix; linear over kernel entries.
pub fn apply_chaos(f: &ChaosExpansion, v: &FockVector, space: FockSpace) -> FockVector {
    let mut out = FockVector::zero();
    for (_, kernel) in f.components() {
        for (idx, c) in kernel.iter() {
            out = out.add(&apply_word(idx, v, space).scale(c));
        }
    }
    out
}

/// Sparse column-major operator on the enumerated word basis, together with
/// its tracked worst-case word-length growth (the headroom ledger).
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    space: FockSpace,
    cols: Vec<BTreeMap<usize, Coeff>>,
    growth: usize,
}

const MAX_MATERIALIZED_DIM: usize = 1 << 21;

impl FockOperator {
    fn empty(space: FockSpace, growth: usize) -> Result<Self, FockError> {
        let dim = space.dim();
        if dim > MAX_MATERIALIZED_DIM {
            return Err(FockError::DimensionTooLarge { dim });
        }
        Ok(FockOperator { space, cols: vec![BTreeMap::new(); dim], growth })
    }

    pub fn identity(space: FockSpace) -> Result<Self, FockError> {
        let mut x = FockOperator::empty(space, 0)?;
        for (j, col) in x.cols.iter_mut().enumerate() {
            col.insert(j, Coeff::new(1.0, 0.0));
        }
        Ok(x)
    }

    /// Materializes a vector action column by column.
    pub fn from_action(
        space: FockSpace,
        growth: usize,
        mut action: impl FnMut(&FockVector) -> FockVector,
    ) -> Result<Self, FockError> {
        let mut x = FockOperator::empty(space, growth)?;
        for j in 0..x.cols.len() {
            let word = space.index_word(j);
            let mut basis = FockVector::zero();
            basis.add_word(&word, Coeff::new(1.0, 0.0));
            let image = action(&basis);
            for (w, c) in image.words() {
                x.cols[j].insert(space.word_index(w), c);
            }
        }
        Ok(x)
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn growth(&self) -> usize {
        self.growth
    }

    pub fn dim(&self) -> usize {
        self.cols.len()
    }

    pub fn entry(&self, row: usize, col: usize) -> Coeff {
        self.cols[col].get(&row).copied().unwrap_or_default()
    }

    pub fn set_entry(&mut self, row: usize, col: usize, c: Coeff) {
        if c.norm_sqr() == 0.0 {
            self.cols[col].remove(&row);
        } else {
            self.cols[col].insert(row, c);
        }
    }

    pub fn add_entry(&mut self, row: usize, col: usize, c: Coeff) {
        let v = self.cols[col].entry(row).or_default();
        *v += c;
        if v.norm_sqr() <= crate::kernel::PRUNE_EPS * crate::kernel::PRUNE_EPS {
            self.cols[col].remove(&row);
        }
    }

    pub fn scale(&self, a: Coeff) -> FockOperator {
        let mut out = self.clone();
        for col in &mut out.cols {
            for v in col.values_mut() {
                *v *= a;
            }
        }
        out
    }

    pub fn add(&self, other: &FockOperator) -> FockOperator {
        debug_assert_eq!(self.space, other.space);
        let mut out = self.clone();
        out.growth = self.growth.max(other.growth);
        for (j, col) in other.cols.iter().enumerate() {
            for (&r, &c) in col {
                out.add_entry(r, j, c);
            }
        }
        out
    }

    pub fn sub(&self, other: &FockOperator) -> FockOperator {
        self.add(&other.scale(Coeff::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &FockOperator) -> FockOperator {
        debug_assert_eq!(self.space, other.space);
        let mut out = FockOperator {
            space: self.space,
            cols: vec![BTreeMap::new(); self.cols.len()],
            growth: (self.growth + other.growth).min(self.space.level),
        };
        for (j, bcol) in other.cols.iter().enumerate() {
            for (&k, &bc) in bcol {
                for (&r, &ac) in &self.cols[k] {
                    out.add_entry(r, j, ac * bc);
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> FockOperator {
        let mut out = FockOperator {
            space: self.space,
            cols: vec![BTreeMap::new(); self.cols.len()],
            growth: self.growth,
        };
        for (j, col) in self.cols.iter().enumerate() {
            for (&r, &c) in col {
                out.cols[r].insert(j, c.conj());
            }
        }
        out
    }

    pub fn commutator(&self, other: &FockOperator) -> FockOperator {
        self.mul(other).sub(&other.mul(self))
    }

    /// Zeroes every column indexed by a word longer than `max_len`; used to
    /// compare operators on their exactness domain.
    pub fn restrict_columns(&self, max_len: usize) -> FockOperator {
        let mut out = self.clone();
        for j in 0..out.cols.len() {
            if self.space.index_word(j).len() > max_len {
                out.cols[j].clear();
            }
        }
        out
    }

    pub fn apply(&self, v: &[Coeff]) -> Vec<Coeff> {
        let mut out = vec![Coeff::default(); self.cols.len()];
        for (j, col) in self.cols.iter().enumerate() {
            if v[j].norm_sqr() == 0.0 {
                continue;
            }
            for (&r, &c) in col {
                out[r] += c * v[j];
            }
        }
        out
    }

    pub fn apply_adjoint(&self, v: &[Coeff]) -> Vec<Coeff> {
        let mut out = vec![Coeff::default(); self.cols.len()];
        for (j, col) in self.cols.iter().enumerate() {
            let mut acc = Coeff::default();
            for (&r, &c) in col {
                acc += c.conj() * v[r];
            }
            out[j] = acc;
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.cols
            .iter()
            .flat_map(|col| col.values())
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.cols
            .iter()
            .flat_map(|col| col.values())
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// `⟨XΩ, Ω⟩`: the vacuum state.
    pub fn vacuum_expectation(&self) -> Coeff {
        self.entry(0, 0)
    }

    /// Largest singular value by power iteration on `X*X`; converges from
    /// below, so bound checks against it stay sound.
    pub fn operator_norm(&self, iterations: usize) -> f64 {
        let dim = self.cols.len();
        let mut rng = crate::sample::rng(0xF0C5);
        let mut v: Vec<Coeff> = (0..dim).map(|_| crate::sample::unit_disk(&mut rng)).collect();
        let mut norm = (v.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt();
        for c in &mut v {
            *c /= norm;
        }
        let mut sigma = 0.0;
        for _ in 0..iterations {
            let xv = self.apply(&v);
            sigma = xv.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if sigma == 0.0 {
                return 0.0;
            }
            v = self.apply_adjoint(&xv);
            norm = (v.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            for c in &mut v {
                *c /= norm;
            }
        }
        sigma
    }
}

/// The field operator `S(h) = l(h) + l*(h)` for real `h`, materialized with
/// compression semantics.
pub fn field_operator(h: &Kernel, space: FockSpace) -> Result<FockOperator, FockError> {
    assert_eq!(h.order(), 1);
    assert!(h.is_real(1e-12), "field operators take real directions");
    FockOperator::from_action(space, 1, |v| {
        let mut out = FockVector::zero();
        for (idx, hc) in h.iter() {
            out = out.add(&field_apply_compressed(idx[0], v, space).scale(hc));
        }
        out
    })
}

/// Second quantization `𝓕(T)`: acts on a word as `T` applied to every
/// letter. `T` must be a contraction on the basis span.
pub fn second_quantize(
    t: &DMatrix<Coeff>,
    space: FockSpace,
) -> Result<FockOperator, FockError> {
    let d = space.basis_size as usize;
    assert_eq!(t.nrows(), d);
    assert_eq!(t.ncols(), d);
    let top = t.clone().svd(false, false).singular_values.iter().copied().fold(0.0, f64::max);
    if top > 1.0 + 1e-12 {
        return Err(FockError::NotContraction(top));
    }
    FockOperator::from_action(space, 0, |v| {
        let mut out = FockVector::zero();
        for (word, c) in v.words() {
            // expand ⊗_k (T e_{w_k}) over the nonzero entries of T
            let mut partial: Vec<(Vec<BasisIndex>, Coeff)> = vec![(Vec::new(), c)];
            for &letter in word {
                let mut next = Vec::new();
                for row in 0..d {
                    let tc = t[(row, letter as usize)];
                    if tc.norm_sqr() == 0.0 {
                        continue;
                    }
                    for (prefix, pc) in &partial {
                        let mut w = prefix.clone();
                        w.push(row as u32);
                        next.push((w, pc * tc));
                    }
                }
                partial = next;
                if partial.is_empty() {
                    break;
                }
            }
            for (w, pc) in partial {
                out.add_word(&w, pc);
            }
        }
        out
    })
}

/// Embeds a chaos expansion as a truncated Fock operator. Requires
/// `deg(F) ≤ L − headroom` with `headroom` defaulting to `deg(F)`, so that
/// products of two such operators keep exact vacuum moments.
pub fn chaos_to_operator(
    f: &ChaosExpansion,
    space: FockSpace,
    headroom: Option<usize>,
) -> Result<FockOperator, FockError> {
    let degree = f.degree();
    let headroom = headroom.unwrap_or(degree);
    if degree + headroom > space.level {
        return Err(FockError::Headroom { degree, headroom, level: space.level });
    }
    let mut x = FockOperator::from_action(space, degree, |v| apply_chaos(f, v, space))?;
    x.growth = degree;
    Ok(x)
}

/// `(⟨(X*X)^{p/2}Ω, Ω⟩)^{1/p}` for even `p`, flagged when the tracked
/// growth cannot keep the power vacuum-exact.
pub fn lp_norm_even(x: &FockOperator, p: usize) -> Result<f64, FockError> {
    if p == 0 || p % 2 != 0 {
        return Err(FockError::OddExponent(p));
    }
    if (p / 2) * x.growth() > x.space().level {
        return Err(FockError::Headroom {
            degree: x.growth(),
            headroom: (p / 2) * x.growth(),
            level: x.space().level,
        });
    }
    let dim = x.dim();
    let mut v = vec![Coeff::default(); dim];
    v[0] = Coeff::new(1.0, 0.0);
    for _ in 0..p / 2 {
        v = x.apply(&v);
        v = x.apply_adjoint(&v);
    }
    Ok(v[0].re.max(0.0).powf(1.0 / p as f64))
}

/// Matrix-free variant for large alphabets: `‖F‖_p` via alternating
/// applications of `op(F)` and `op(F*)` to the vacuum.
pub fn vacuum_lp_norm(
    f: &ChaosExpansion,
    p: usize,
    space: FockSpace,
) -> Result<f64, FockError> {
    if p == 0 || p % 2 != 0 {
        return Err(FockError::OddExponent(p));
    }
    let degree = f.degree();
    if (p / 2) * degree > space.level {
        return Err(FockError::Headroom {
            degree,
            headroom: (p / 2) * degree,
            level: space.level,
        });
    }
    let adj = f.adjoint();
    let mut v = FockVector::vacuum();
    for _ in 0..p / 2 {
        v = apply_chaos(f, &v, space);
        v = apply_chaos(&adj, &v, space);
    }
    Ok(v.get(&[]).re.max(0.0).powf(1.0 / p as f64))
}

/// The right annihilation operator `r*(h)` as a matrix.
pub fn right_annihilation(h: &Kernel, space: FockSpace) -> Result<FockOperator, FockError> {
    assert_eq!(h.order(), 1);
    FockOperator::from_action(space, 0, |v| {
        apply_ladder(LadderKind::RightAnnihilate, h, v, space).expect("annihilation never overflows")
    })
}

/// `[r*(h), op(F)]` in the truncated model. The two sides of the commutator
/// lemma agree on columns of words no longer than `L − deg(F)`; beyond that
/// the compression error of the truncation shows, so compare restricted.
pub fn commutator_rstar(
    h: &Kernel,
    f: &ChaosExpansion,
    space: FockSpace,
) -> Result<FockOperator, FockError> {
    let x = chaos_to_operator(f, space, Some(0))?;
    let r = right_annihilation(h, space)?;
    Ok(r.commutator(&x))
}

/// `M ♯ |Ω⟩⟨Ω|` for an arity-2 multikernel `M = Σ a ⊗ b`: the sum of rank-one
/// operators `op(a)·|Ω⟩⟨Ω|·op(b)`. Since `op(a)Ω` is the word embedding of
/// `a` and `⟨Ω|op(b)` the conjugate embedding of `b*`, each kernel entry
/// contributes one matrix unit.
pub fn sharp_vacuum_projection(
    m: &crate::kernel::MultiKernel,
    space: FockSpace,
) -> Result<FockOperator, FockError> {
    assert_eq!(m.arity(), 2);
    let mut growth = 0;
    let mut x = FockOperator::empty(space, 0)?;
    for (degrees, kernel) in m.blocks() {
        let (n, mm) = (degrees[0], degrees[1]);
        growth = growth.max(n);
        for (idx, c) in kernel.iter() {
            let (prefix, suffix) = idx.split_at(n);
            let row = space.word_index(prefix);
            let rev: Vec<BasisIndex> = suffix.iter().rev().copied().collect();
            let col = space.word_index(&rev);
            debug_assert!(mm == rev.len());
            x.add_entry(row, col, c);
        }
    }
    x.growth = growth;
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaos::SpectralMode;
    use crate::malliavin::{gradient_or_identity, pair_gradient};
    use crate::sample;

    fn c(re: f64, im: f64) -> Coeff {
        Coeff::new(re, im)
    }

    fn e(i: BasisIndex) -> Kernel {
        Kernel::basis_vector(i)
    }

    fn sp(d: u32, l: usize) -> FockSpace {
        FockSpace::new(d, l)
    }

    #[test]
    fn word_indexing_round_trips() {
        let space = sp(3, 4);
        for i in 0..space.dim() {
            let w = space.index_word(i);
            assert_eq!(space.word_index(&w), i);
        }
        assert_eq!(space.word_index(&[]), 0);
        assert_eq!(space.dim(), 1 + 3 + 9 + 27 + 81);
    }

    #[test]
    fn ladder_examples() {
        let space = sp(3, 4);
        let vac = FockVector::vacuum();
        let killed = apply_ladder(LadderKind::LeftAnnihilate, &e(1), &vac, space).unwrap();
        assert!(killed.is_zero());

        let created = apply_ladder(LadderKind::LeftCreate, &e(1), &vac, space).unwrap();
        assert_eq!(created.get(&[1]), c(1.0, 0.0));

        // r*(e₂)(e₁⊗e₂) = e₁
        let w12 = FockVector::from_kernel(&Kernel::elementary(&[1, 2]));
        let dropped = apply_ladder(LadderKind::RightAnnihilate, &e(2), &w12, space).unwrap();
        assert_eq!(dropped.get(&[1]), c(1.0, 0.0));
        assert_eq!(dropped.words().count(), 1);

        // creation at the level errors
        let top = FockVector::from_kernel(&Kernel::elementary(&[0, 0, 0, 0]));
        assert_eq!(
            apply_ladder(LadderKind::LeftCreate, &e(0), &top, space).unwrap_err(),
            FockError::Truncation { level: 4 }
        );
    }

    #[test]
    fn ladder_adjointness() {
        let space = sp(2, 3);
        let mut rng = sample::rng(5);
        let h = sample::real_direction(&mut rng, 2);
        // compressed creation: drop overflow instead of erroring
        let create = |left: bool| {
            FockOperator::from_action(space, 1, |v| {
                let mut out = FockVector::zero();
                for (word, vc) in v.words() {
                    if word.len() >= space.level {
                        continue;
                    }
                    for (idx, hc) in h.iter() {
                        let mut w = Vec::with_capacity(word.len() + 1);
                        if left {
                            w.push(idx[0]);
                            w.extend_from_slice(word);
                        } else {
                            w.extend_from_slice(word);
                            w.push(idx[0]);
                        }
                        out.add_word(&w, hc * vc);
                    }
                }
                out
            })
            .unwrap()
        };
        let lstar = FockOperator::from_action(space, 0, |v| {
            apply_ladder(LadderKind::LeftAnnihilate, &h, v, space).unwrap()
        })
        .unwrap();
        assert!(lstar.sub(&create(true).adjoint()).frobenius_norm() < 1e-12);
        let rstar = right_annihilation(&h, space).unwrap();
        assert!(rstar.sub(&create(false).adjoint()).frobenius_norm() < 1e-12);
    }

    #[test]
    fn field_operator_moments() {
        let space = sp(2, 4);
        let s1 = field_operator(&e(1), space).unwrap();
        assert!(s1.sub(&s1.adjoint()).frobenius_norm() < 1e-14);
        let sq = s1.mul(&s1);
        assert!((sq.vacuum_expectation() - c(1.0, 0.0)).norm() < 1e-14);
        let fourth = sq.mul(&sq);
        assert!((fourth.vacuum_expectation() - c(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn semicircle_edge_from_jacobi_matrix() {
        // d = 1, L = 40: S is the free Jacobi matrix; its norm approaches
        // the semicircle edge 2.
        let space = sp(1, 40);
        let s = field_operator(&e(0), space).unwrap();
        let norm = s.operator_norm(4000);
        assert!((norm - 2.0).abs() < 0.05, "got {norm}");
        assert!(norm <= 2.0 + 1e-9);
    }

    #[test]
    fn second_quantization() {
        let space = sp(2, 3);
        let id = DMatrix::identity(2, 2);
        let fid = second_quantize(&id, space).unwrap();
        assert!(fid.sub(&FockOperator::identity(space).unwrap()).frobenius_norm() < 1e-14);

        let zero = DMatrix::zeros(2, 2);
        let fzero = second_quantize(&zero, space).unwrap();
        for j in 0..space.dim() {
            let expect = if j == 0 { 1.0 } else { 0.0 };
            assert!((fzero.entry(j, j).re - expect).abs() < 1e-14);
        }

        // 𝓕(e^{-t}·id) scales a length-n word by e^{-nt}
        let t: f64 = 0.4;
        let contraction = DMatrix::from_diagonal_element(2, 2, c((-t).exp(), 0.0));
        let pt = second_quantize(&contraction, space).unwrap();
        for j in 0..space.dim() {
            let n = space.index_word(j).len() as f64;
            assert!((pt.entry(j, j).re - (-n * t).exp()).abs() < 1e-14);
        }

        let expanding = DMatrix::from_diagonal_element(2, 2, c(1.5, 0.0));
        assert!(matches!(
            second_quantize(&expanding, space),
            Err(FockError::NotContraction(_))
        ));

        // Fock-side OU agrees with the chaos-side semigroup on the vacuum
        // column: op(P_t F)Ω = 𝓕(e^{-t})(op(F)Ω)
        let mut rng = sample::rng(7);
        let f = sample::chaos(&mut rng, 3, 2, 0.6);
        let ptf = f.apply_spectral(SpectralMode::Ou(t));
        let lhs = apply_chaos(&ptf, &FockVector::vacuum(), space);
        let xomega = apply_chaos(&f, &FockVector::vacuum(), space);
        let mut dense = vec![Coeff::default(); space.dim()];
        for (w, vc) in xomega.words() {
            dense[space.word_index(w)] = vc;
        }
        let rhs = pt.apply(&dense);
        for j in 0..space.dim() {
            let w = space.index_word(j);
            assert!((lhs.get(&w) - rhs[j]).norm() < 1e-12);
        }
    }

    #[test]
    fn chaos_embedding() {
        let space = sp(3, 6);
        let mut rng = sample::rng(11);

        // op(S(h)) is the field operator
        let h = sample::real_direction(&mut rng, 3);
        let via_chaos =
            chaos_to_operator(&ChaosExpansion::semicircular(&h), space, Some(1)).unwrap();
        let direct = field_operator(&h, space).unwrap();
        assert!(via_chaos.sub(&direct).frobenius_norm() < 1e-12);

        // op(I₂(e⊗e)) = S(e)² − 1
        let i2 = ChaosExpansion::from_kernel(Kernel::elementary(&[1, 1]));
        let x = chaos_to_operator(&i2, space, None).unwrap();
        let s1 = field_operator(&e(1), space).unwrap();
        let direct = s1.mul(&s1).sub(&FockOperator::identity(space).unwrap());
        // products of compressions differ from compressed products on the
        // top band; compare on exact columns
        let exact = space.level - 2;
        assert!(
            x.restrict_columns(exact)
                .sub(&direct.restrict_columns(exact))
                .frobenius_norm()
                < 1e-12
        );

        // (I₂(e₁⊗e₂))Ω is the word (1,2)
        let i12 = ChaosExpansion::from_kernel(Kernel::elementary(&[1, 2]));
        let v = apply_chaos(&i12, &FockVector::vacuum(), space);
        assert_eq!(v.get(&[1, 2]), c(1.0, 0.0));
        assert_eq!(v.words().count(), 1);

        // Wick-map consistency: op(F)Ω reproduces every kernel
        for _ in 0..5 {
            let f = sample::chaos(&mut rng, 3, 3, 0.5);
            let v = apply_chaos(&f, &FockVector::vacuum(), space);
            for (n, kernel) in f.components() {
                for (idx, coeff) in kernel.iter() {
                    assert!((v.get(idx) - coeff).norm() < 1e-13, "degree {n}");
                }
            }
        }
    }

    #[test]
    fn vacuum_expectation_matches_trace() {
        let space = sp(3, 8);
        assert_eq!(
            FockOperator::identity(space).unwrap().vacuum_expectation(),
            c(1.0, 0.0)
        );
        let s1 = field_operator(&e(1), space).unwrap();
        let s2 = field_operator(&e(2), space).unwrap();
        assert!(s1.mul(&s2).vacuum_expectation().norm() < 1e-14);

        let mut rng = sample::rng(13);
        for _ in 0..6 {
            let f = sample::chaos(&mut rng, 3, 3, 0.5);
            let x = chaos_to_operator(&f, space, None).unwrap();
            assert!((x.vacuum_expectation() - f.trace()).norm() < 1e-12);
        }
    }

    #[test]
    fn multiplicativity_on_exact_columns() {
        let space = sp(2, 6);
        let mut rng = sample::rng(17);
        for _ in 0..5 {
            let f = sample::chaos(&mut rng, 2, 2, 0.6);
            let g = sample::chaos(&mut rng, 2, 2, 0.6);
            let fg = f.multiply(&g, 8).unwrap();
            let left = chaos_to_operator(&fg, space, Some(0)).unwrap();
            let right = chaos_to_operator(&f, space, Some(0))
                .unwrap()
                .mul(&chaos_to_operator(&g, space, Some(0)).unwrap());
            let exact = space.level - (f.degree() + g.degree());
            let diff = left
                .restrict_columns(exact)
                .sub(&right.restrict_columns(exact))
                .frobenius_norm();
            assert!(diff < 1e-10, "diff = {diff}");
        }
    }

    #[test]
    fn lp_norms() {
        let space = sp(2, 8);
        let one = FockOperator::identity(space).unwrap();
        assert!((lp_norm_even(&one, 4).unwrap() - 1.0).abs() < 1e-14);

        let s1 = field_operator(&e(1), space).unwrap();
        assert!((lp_norm_even(&s1, 2).unwrap() - 1.0).abs() < 1e-12);
        assert!((lp_norm_even(&s1, 4).unwrap() - 2f64.powf(0.25)).abs() < 1e-12);
        assert!(matches!(lp_norm_even(&s1, 3), Err(FockError::OddExponent(3))));
        assert!(matches!(lp_norm_even(&s1, 64), Err(FockError::Headroom { .. })));

        // matrix-free path agrees
        let mut rng = sample::rng(19);
        let f = sample::chaos(&mut rng, 2, 2, 0.6);
        let x = chaos_to_operator(&f, space, None).unwrap();
        let a = lp_norm_even(&x, 4).unwrap();
        let b = vacuum_lp_norm(&f, 4, space).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn haagerup_witness() {
        let space = sp(3, 7);
        let mut rng = sample::rng(23);
        for n in 1..=4usize {
            for _ in 0..3 {
                let f = sample::nonzero_kernel(&mut rng, n, 3, 0.3);
                let x = chaos_to_operator(
                    &ChaosExpansion::from_kernel(f.clone()),
                    space,
                    Some(0),
                )
                .unwrap();
                let norm = x.operator_norm(120);
                assert!(norm <= (n as f64 + 1.0) * f.norm() + 1e-9, "n = {n}");
            }
        }
    }

    #[test]
    fn hypercontractivity_and_projection_continuity() {
        let space = sp(3, 12);
        let t = 0.5 * 3f64.ln();
        let mut rng = sample::rng(29);
        for _ in 0..5 {
            let f = sample::chaos(&mut rng, 3, 3, 0.4);
            let ptf = f.apply_spectral(SpectralMode::Ou(t));
            let p4 = vacuum_lp_norm(&ptf, 4, space).unwrap();
            assert!(p4 <= f.norm() + 1e-9);

            let f4 = vacuum_lp_norm(&f, 4, space).unwrap();
            for n in 0..=3usize {
                let pn4 = vacuum_lp_norm(&f.project(n), 4, space).unwrap();
                assert!(pn4 <= 3f64.powf(n as f64 / 2.0) * f4 + 1e-9, "n = {n}");
            }
        }
    }

    #[test]
    fn commutator_lemma() {
        let space = sp(3, 8);
        // [r*(e₁), S(e₁)] = P₁ on exact columns
        let lhs = commutator_rstar(&e(1), &ChaosExpansion::semicircular(&e(1)), space).unwrap();
        let p1 = {
            let mut x = FockOperator::empty(space, 0).unwrap();
            x.set_entry(0, 0, c(1.0, 0.0));
            x
        };
        let exact = space.level - 1;
        assert!(
            lhs.restrict_columns(exact).sub(&p1.restrict_columns(exact)).frobenius_norm()
                < 1e-12
        );

        // [r*(e₂), S(e₁)] = 0
        let zero = commutator_rstar(&e(2), &ChaosExpansion::semicircular(&e(1)), space).unwrap();
        assert!(zero.restrict_columns(exact).frobenius_norm() < 1e-12);

        // [r*(e), U₂(S(e))] = ∇^e U₂ ♯ P₁
        let u2 = crate::chaos::chebyshev_eval(2, &e(1)).unwrap();
        let lhs = commutator_rstar(&e(1), &u2, space).unwrap();
        let paired = pair_gradient(&gradient_or_identity(&u2, 1), &[&e(1)]).unwrap();
        let rhs = sharp_vacuum_projection(&paired, space).unwrap();
        let exact = space.level - 2;
        let diff = lhs
            .restrict_columns(exact)
            .sub(&rhs.restrict_columns(exact))
            .frobenius_norm();
        assert!(diff < 1e-10, "diff = {diff}");

        // random cubic functionals
        let mut rng = sample::rng(31);
        for _ in 0..4 {
            let f = sample::chaos(&mut rng, 3, 3, 0.4);
            let h = sample::real_direction(&mut rng, 3);
            let lhs = commutator_rstar(&h, &f, space).unwrap();
            let paired = pair_gradient(&gradient_or_identity(&f, 1), &[&h]).unwrap();
            let rhs = sharp_vacuum_projection(&paired, space).unwrap();
            let exact = space.level - f.degree();
            let diff = lhs
                .restrict_columns(exact)
                .sub(&rhs.restrict_columns(exact))
                .frobenius_norm();
            assert!(diff < 1e-10, "diff = {diff}");
        }
    }

    #[test]
    fn headroom_is_enforced() {
        let space = sp(2, 4);
        let f = ChaosExpansion::from_kernel(Kernel::elementary(&[0, 1, 0]));
        assert!(matches!(
            chaos_to_operator(&f, space, None),
            Err(FockError::Headroom { degree: 3, headroom: 3, level: 4 })
        ));
        assert!(chaos_to_operator(&f, space, Some(1)).is_ok());
    }
}
