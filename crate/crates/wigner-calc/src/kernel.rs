//! Sparse graded tensors over a fixed abstract orthonormal basis of
//! `L²_ℝ(ℝ₊)`.
//!
//! A [`Kernel`] of order `n` is a finite linear combination of elementary
//! tensors `e_{i₁} ⊗ … ⊗ e_{iₙ}` with complex coefficients; it stands for a
//! square-integrable function of `n` positive time variables expanded over
//! the basis. Everything downstream (chaos expansions, Malliavin operators,
//! Fock-space embeddings) is built from the four primitive operations here:
//! adjoint, tensor product, nested contraction and inner product.
//!
//! Inner products are conjugate-linear in the **second** argument,
//! `⟨f, g⟩ = Σ f·conj(g)`, matching the GNS convention `⟨x, y⟩ = τ(y*x)`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use thiserror::Error;

/// Complex coefficient type used throughout the crate.
pub type Coeff = Complex64;

/// Identifier of an orthonormal basis vector `e_id` of `L²_ℝ(ℝ₊)`.
///
/// In the time-block reading, `e_id` is the normalized indicator of
/// `[id·Δ, (id+1)·Δ)`; only the Clark–Ocone path uses that interpretation,
/// every algebraic identity needs orthonormality alone.
pub type BasisIndex = u32;

/// Coefficients with magnitude below this are dropped after every operation.
pub const PRUNE_EPS: f64 = 1e-14;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KernelError {
    #[error("contraction order {p} exceeds min(order {left}, order {right})")]
    ContractionArity { p: usize, left: usize, right: usize },
    #[error("index tuple of length {got} in kernel of order {order}")]
    TupleLength { order: usize, got: usize },
}

/// Sparse order-`n` tensor: a finite map from `n`-tuples of basis indices to
/// complex coefficients.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Kernel {
    order: usize,
    entries: BTreeMap<Vec<BasisIndex>, Coeff>,
}

impl Kernel {
    /// The zero kernel of a given order.
    pub fn zero(order: usize) -> Self {
        Kernel { order, entries: BTreeMap::new() }
    }

    /// Order-0 kernel holding a single scalar.
    pub fn scalar(value: Coeff) -> Self {
        let mut k = Kernel::zero(0);
        k.insert_raw(Vec::new(), value);
        k
    }

    /// The basis vector `e_i` as an order-1 kernel.
    pub fn basis_vector(i: BasisIndex) -> Self {
        Kernel::elementary(&[i])
    }

    /// Elementary tensor `e_{i₁} ⊗ … ⊗ e_{iₙ}` with coefficient 1.
    pub fn elementary(indices: &[BasisIndex]) -> Self {
        let mut k = Kernel::zero(indices.len());
        k.insert_raw(indices.to_vec(), Coeff::new(1.0, 0.0));
        k
    }

    /// Builds a kernel from `(tuple, coefficient)` pairs, validating tuple
    /// lengths and pruning small entries. Repeated tuples accumulate.
    pub fn from_entries<I>(order: usize, entries: I) -> Result<Self, KernelError>
    where
        I: IntoIterator<Item = (Vec<BasisIndex>, Coeff)>,
    {
        let mut k = Kernel::zero(order);
        for (idx, c) in entries {
            if idx.len() != order {
                return Err(KernelError::TupleLength { order, got: idx.len() });
            }
            k.add_entry(&idx, c);
        }
        Ok(k)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Coefficient at `idx` (zero when absent).
    pub fn get(&self, idx: &[BasisIndex]) -> Coeff {
        self.entries.get(idx).copied().unwrap_or_default()
    }

    /// Entries in lexicographic tuple order.
    pub fn iter(&self) -> impl Iterator<Item = (&[BasisIndex], Coeff)> {
        self.entries.iter().map(|(k, &v)| (k.as_slice(), v))
    }

    /// Value of an order-0 kernel.
    pub fn scalar_value(&self) -> Coeff {
        debug_assert_eq!(self.order, 0);
        self.get(&[])
    }

    fn insert_raw(&mut self, idx: Vec<BasisIndex>, c: Coeff) {
        if c.norm_sqr() > PRUNE_EPS * PRUNE_EPS {
            self.entries.insert(idx, c);
        }
    }

    /// Accumulates `c` onto the entry at `idx`, pruning if the sum is tiny.
    pub fn add_entry(&mut self, idx: &[BasisIndex], c: Coeff) {
        debug_assert_eq!(idx.len(), self.order);
        if let Some(v) = self.entries.get_mut(idx) {
            *v += c;
            if v.norm_sqr() <= PRUNE_EPS * PRUNE_EPS {
                self.entries.remove(idx);
            }
        } else if c.norm_sqr() > PRUNE_EPS * PRUNE_EPS {
            self.entries.insert(idx.to_vec(), c);
        }
    }

    /// `f*(t₁,…,tₙ) = conj f(tₙ,…,t₁)`: reverse every tuple and conjugate.
    pub fn adjoint(&self) -> Kernel {
        let mut out = Kernel::zero(self.order);
        for (idx, c) in self.iter() {
            let mut rev = idx.to_vec();
            rev.reverse();
            out.insert_raw(rev, c.conj());
        }
        out
    }

    /// Mirror symmetry `f = f*` characterizes self-adjoint Wigner integrals.
    pub fn is_mirror_symmetric(&self, tol: f64) -> bool {
        let diff = self.sub(&self.adjoint());
        diff.norm() <= tol
    }

    pub fn scale(&self, a: Coeff) -> Kernel {
        let mut out = Kernel::zero(self.order);
        for (idx, c) in self.iter() {
            out.insert_raw(idx.to_vec(), a * c);
        }
        out
    }

    /// Componentwise sum; both operands must have equal order.
    pub fn add(&self, other: &Kernel) -> Kernel {
        debug_assert_eq!(self.order, other.order);
        let mut out = self.clone();
        for (idx, c) in other.iter() {
            out.add_entry(idx, c);
        }
        out
    }

    pub fn sub(&self, other: &Kernel) -> Kernel {
        self.add(&other.scale(Coeff::new(-1.0, 0.0)))
    }

    /// Concatenation product: order `n + m`, coefficient at `(a, b)` is
    /// `f[a]·g[b]`.
    pub fn tensor(&self, other: &Kernel) -> Kernel {
        let mut out = Kernel::zero(self.order + other.order);
        for (a, ca) in self.iter() {
            for (b, cb) in other.iter() {
                let mut idx = Vec::with_capacity(a.len() + b.len());
                idx.extend_from_slice(a);
                idx.extend_from_slice(b);
                out.add_entry(&idx, ca * cb);
            }
        }
        out
    }

    /// Nested contraction of order `p`:
    ///
    /// `(f ⌢_p g)(t₁,…) = ∫ f(t₁,…,t_{n−p}, s_p,…,s₁) g(s₁,…,s_p, …) ds`
    ///
    /// pairing the last `p` slots of `f` **in reverse order** against the
    /// first `p` slots of `g`, with no conjugation. `p = 0` degenerates to
    /// the tensor product.
    pub fn contract(&self, other: &Kernel, p: usize) -> Result<Kernel, KernelError> {
        let (n, m) = (self.order, other.order);
        if p > n.min(m) {
            return Err(KernelError::ContractionArity { p, left: n, right: m });
        }
        let mut out = Kernel::zero(n + m - 2 * p);
        for (a, ca) in self.iter() {
            // f's trailing block (s_p, …, s₁) read back-to-front gives
            // (s₁, …, s_p), which must equal g's leading block.
            let (head, tail) = a.split_at(n - p);
            for (b, cb) in other.iter() {
                let (lead, rest) = b.split_at(p);
                if tail.iter().rev().eq(lead.iter()) {
                    let mut idx = Vec::with_capacity(n + m - 2 * p);
                    idx.extend_from_slice(head);
                    idx.extend_from_slice(rest);
                    out.add_entry(&idx, ca * cb);
                }
            }
        }
        Ok(out)
    }

    /// `⟨f, g⟩ = Σ f[idx]·conj(g[idx])`; zero when orders differ.
    pub fn inner(&self, other: &Kernel) -> Coeff {
        if self.order != other.order {
            return Coeff::default();
        }
        let small = if self.len() <= other.len() { self } else { other };
        let mut acc = Coeff::default();
        for (idx, _) in small.iter() {
            acc += self.get(idx) * other.get(idx).conj();
        }
        acc
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.values().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Largest basis index used, if any.
    pub fn max_index(&self) -> Option<BasisIndex> {
        self.entries.keys().filter_map(|idx| idx.iter().max()).max().copied()
    }

    /// True when every coefficient is real up to `tol`.
    pub fn is_real(&self, tol: f64) -> bool {
        self.entries.values().all(|c| c.im.abs() <= tol)
    }
}

/// Contracts `p` pairs of slots *inside* one kernel between the adjacent
/// legs `(left_order, right_order)` located at `offset`: the last `p` slots
/// of the left leg (reversed) against the first `p` of the right leg.
///
/// This realizes the product formula on a joint (non-factored) kernel and is
/// the workhorse behind the `m₁` multiplication of adjacent tensor legs.
pub fn contract_adjacent_legs(
    k: &Kernel,
    offset: usize,
    left_order: usize,
    right_order: usize,
    p: usize,
) -> Result<Kernel, KernelError> {
    if p > left_order.min(right_order) {
        return Err(KernelError::ContractionArity { p, left: left_order, right: right_order });
    }
    debug_assert!(offset + left_order + right_order <= k.order());
    let mut out = Kernel::zero(k.order() - 2 * p);
    for (idx, c) in k.iter() {
        let tail = &idx[offset + left_order - p..offset + left_order];
        let lead = &idx[offset + left_order..offset + left_order + p];
        if tail.iter().rev().eq(lead.iter()) {
            let mut new_idx = Vec::with_capacity(idx.len() - 2 * p);
            new_idx.extend_from_slice(&idx[..offset + left_order - p]);
            new_idx.extend_from_slice(&idx[offset + left_order + p..]);
            out.add_entry(&new_idx, c);
        }
    }
    Ok(out)
}

/// Arity-`k` graded tensor functional: a finite map from degree vectors
/// `(n₁,…,n_k)` to kernels of order `n₁+…+n_k`, representing an element of
/// `⊕ ℋ_{n₁} ⊗ … ⊗ ℋ_{n_k}` through `I_{n₁} ⊗ … ⊗ I_{n_k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiKernel {
    arity: usize,
    blocks: BTreeMap<Vec<usize>, Kernel>,
}

impl MultiKernel {
    pub fn zero(arity: usize) -> Self {
        assert!(arity >= 1, "multikernel arity must be at least 1");
        MultiKernel { arity, blocks: BTreeMap::new() }
    }

    /// The unit `1 ⊗ … ⊗ 1` scaled by `value`.
    pub fn scalar(arity: usize, value: Coeff) -> Self {
        let mut m = MultiKernel::zero(arity);
        m.add_block(&vec![0; arity], &Kernel::scalar(value));
        m
    }

    /// Single block with the given degree vector; the kernel order must
    /// equal the degree sum.
    pub fn from_block(degrees: Vec<usize>, kernel: Kernel) -> Self {
        assert_eq!(kernel.order(), degrees.iter().sum::<usize>());
        let mut m = MultiKernel::zero(degrees.len());
        m.add_block(&degrees, &kernel);
        m
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn blocks(&self) -> impl Iterator<Item = (&[usize], &Kernel)> {
        self.blocks.iter().map(|(d, k)| (d.as_slice(), k))
    }

    pub fn block(&self, degrees: &[usize]) -> Option<&Kernel> {
        self.blocks.get(degrees)
    }

    pub fn add_block(&mut self, degrees: &[usize], kernel: &Kernel) {
        debug_assert_eq!(degrees.len(), self.arity);
        debug_assert_eq!(kernel.order(), degrees.iter().sum::<usize>());
        if kernel.is_zero() {
            return;
        }
        match self.blocks.get_mut(degrees) {
            Some(existing) => {
                *existing = existing.add(kernel);
                if existing.is_zero() {
                    self.blocks.remove(degrees);
                }
            }
            None => {
                self.blocks.insert(degrees.to_vec(), kernel.clone());
            }
        }
    }

    pub fn add(&self, other: &MultiKernel) -> MultiKernel {
        debug_assert_eq!(self.arity, other.arity);
        let mut out = self.clone();
        for (d, k) in other.blocks() {
            out.add_block(d, k);
        }
        out
    }

    pub fn scale(&self, a: Coeff) -> MultiKernel {
        let mut out = MultiKernel::zero(self.arity);
        for (d, k) in self.blocks() {
            out.add_block(d, &k.scale(a));
        }
        out
    }

    pub fn sub(&self, other: &MultiKernel) -> MultiKernel {
        self.add(&other.scale(Coeff::new(-1.0, 0.0)))
    }

    /// Outer tensor: arities add, degree vectors concatenate.
    pub fn tensor(&self, other: &MultiKernel) -> MultiKernel {
        let mut out = MultiKernel::zero(self.arity + other.arity);
        for (da, ka) in self.blocks() {
            for (db, kb) in other.blocks() {
                let mut d = Vec::with_capacity(da.len() + db.len());
                d.extend_from_slice(da);
                d.extend_from_slice(db);
                out.add_block(&d, &ka.tensor(kb));
            }
        }
        out
    }

    /// Blockwise inner product, conjugate-linear in `other`.
    pub fn inner(&self, other: &MultiKernel) -> Coeff {
        if self.arity != other.arity {
            return Coeff::default();
        }
        let mut acc = Coeff::default();
        for (d, k) in self.blocks() {
            if let Some(o) = other.blocks.get(d) {
                acc += k.inner(o);
            }
        }
        acc
    }

    pub fn norm_sqr(&self) -> f64 {
        self.blocks.values().map(|k| k.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Applies the trace to leg `leg`: keeps blocks whose degree there is 0
    /// and drops that leg, lowering the arity by one.
    pub fn trace_leg(&self, leg: usize) -> MultiKernel {
        assert!(self.arity >= 2, "trace_leg needs arity at least 2");
        assert!(leg < self.arity);
        let mut out = MultiKernel::zero(self.arity - 1);
        for (d, k) in self.blocks() {
            if d[leg] == 0 {
                let mut nd = d.to_vec();
                nd.remove(leg);
                out.add_block(&nd, k);
            }
        }
        out
    }

    /// Merges legs `leg` and `leg+1` with the product formula
    /// `I_a·I_b = Σ_p I_{a+b−2p}(· ⌢_p ·)` applied inside the joint kernel;
    /// arity drops by one. Errors only if a resulting block exceeds
    /// `max_degree` in the merged leg.
    pub fn multiply_adjacent_legs(
        &self,
        leg: usize,
        max_degree: usize,
    ) -> Result<MultiKernel, KernelError> {
        assert!(leg + 1 < self.arity);
        let mut out = MultiKernel::zero(self.arity - 1);
        for (d, k) in self.blocks() {
            let (a, b) = (d[leg], d[leg + 1]);
            let offset: usize = d[..leg].iter().sum();
            for p in 0..=a.min(b) {
                if a + b - 2 * p > max_degree {
                    return Err(KernelError::ContractionArity {
                        p: a + b - 2 * p,
                        left: max_degree,
                        right: max_degree,
                    });
                }
                let merged = contract_adjacent_legs(k, offset, a, b, p)?;
                let mut nd = d.to_vec();
                nd[leg] = a + b - 2 * p;
                nd.remove(leg + 1);
                out.add_block(&nd, &merged);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Coeff {
        Coeff::new(re, im)
    }

    #[test]
    fn adjoint_of_elementary_tensor_reverses() {
        let f = Kernel::elementary(&[1, 2]);
        let g = f.adjoint();
        assert_eq!(g.get(&[2, 1]), c(1.0, 0.0));
        assert_eq!(g.len(), 1);
    }

    #[test]
    fn adjoint_conjugates() {
        let f = Kernel::basis_vector(1).scale(c(0.0, 1.0));
        assert_eq!(f.adjoint().get(&[1]), c(0.0, -1.0));
    }

    #[test]
    fn tensor_of_basis_vectors() {
        let f = Kernel::basis_vector(1).tensor(&Kernel::basis_vector(2));
        assert_eq!(f.order(), 2);
        assert_eq!(f.get(&[1, 2]), c(1.0, 0.0));
        assert_eq!(f.len(), 1);
    }

    #[test]
    fn scalar_is_unit_of_grading() {
        let f = Kernel::scalar(c(2.0, 0.0)).tensor(&Kernel::basis_vector(3));
        assert_eq!(f.order(), 1);
        assert_eq!(f.get(&[3]), c(2.0, 0.0));
    }

    #[test]
    fn contract_matching_slot() {
        let f = Kernel::elementary(&[1, 2]);
        let g = Kernel::elementary(&[2, 3]);
        let h = f.contract(&g, 1).unwrap();
        assert_eq!(h.get(&[1, 3]), c(1.0, 0.0));
        assert_eq!(h.len(), 1);
    }

    #[test]
    fn contract_orthogonal_slots_vanishes() {
        let f = Kernel::elementary(&[1, 2]);
        let g = Kernel::elementary(&[3, 4]);
        assert!(f.contract(&g, 1).unwrap().is_zero());
    }

    #[test]
    fn contract_reverses_left_tail() {
        // (e1⊗e2⊗e3) ⌢₂ (e3⊗e2⊗e4) pairs (s2,s1)=(2,3) against (3,2).
        let f = Kernel::elementary(&[1, 2, 3]);
        let g = Kernel::elementary(&[3, 2, 4]);
        let h = f.contract(&g, 2).unwrap();
        assert_eq!(h.get(&[1, 4]), c(1.0, 0.0));
        // Without the reversal this would be zero:
        let g2 = Kernel::elementary(&[2, 3, 4]);
        assert!(f.contract(&g2, 2).unwrap().is_zero());
    }

    #[test]
    fn contract_arity_error() {
        let f = Kernel::basis_vector(0);
        let g = Kernel::elementary(&[0, 1]);
        assert_eq!(
            f.contract(&g, 2),
            Err(KernelError::ContractionArity { p: 2, left: 1, right: 2 })
        );
    }

    #[test]
    fn inner_product_examples() {
        let f = Kernel::elementary(&[1, 2]);
        assert_eq!(f.inner(&f), c(1.0, 0.0));
        let e = Kernel::basis_vector(1);
        let ee = Kernel::elementary(&[1, 1]);
        assert_eq!(e.inner(&ee), c(0.0, 0.0));
        // conjugate-linear in the second argument
        let g = f.scale(c(0.0, 1.0));
        assert_eq!(f.inner(&g), c(0.0, -1.0));
    }

    #[test]
    fn from_entries_rejects_bad_tuple() {
        let r = Kernel::from_entries(2, vec![(vec![1], c(1.0, 0.0))]);
        assert_eq!(r, Err(KernelError::TupleLength { order: 2, got: 1 }));
    }

    #[test]
    fn multikernel_block_consistency() {
        let m = MultiKernel::from_block(vec![1, 0, 1], Kernel::elementary(&[1, 2]));
        assert_eq!(m.arity(), 3);
        assert_eq!(m.norm_sqr(), 1.0);
        let t = m.trace_leg(1);
        assert_eq!(t.arity(), 2);
        assert_eq!(t.block(&[1, 1]).unwrap().get(&[1, 2]), c(1.0, 0.0));
        assert!(m.trace_leg(0).is_zero());
    }

    #[test]
    fn multiply_adjacent_legs_matches_product_formula() {
        // (I₁(e1) ⊗ I₁(e1)) merged: S(e1)² = I₂(e1⊗e1) + 1.
        let m = MultiKernel::from_block(vec![1, 1], Kernel::elementary(&[1, 1]));
        let merged = m.multiply_adjacent_legs(0, 8).unwrap();
        assert_eq!(merged.arity(), 1);
        assert_eq!(merged.block(&[2]).unwrap().get(&[1, 1]), c(1.0, 0.0));
        assert_eq!(merged.block(&[0]).unwrap().scalar_value(), c(1.0, 0.0));
    }

    fn arb_kernel(order: usize, basis: u32) -> impl Strategy<Value = Kernel> {
        let tuple = prop::collection::vec(0..basis, order);
        prop::collection::vec((tuple, -1.0f64..1.0, -1.0f64..1.0), 0..8).prop_map(
            move |entries| {
                Kernel::from_entries(
                    order,
                    entries.into_iter().map(|(idx, re, im)| (idx, c(re, im))),
                )
                .unwrap()
            },
        )
    }

    proptest! {
        #[test]
        fn adjoint_is_involution(f in (1usize..=5).prop_flat_map(|n| arb_kernel(n, 6))) {
            let back = f.adjoint().adjoint();
            prop_assert!(back.sub(&f).norm() <= 1e-12);
        }

        #[test]
        fn adjoint_is_anti_isometric(
            (f, g) in (1usize..=4).prop_flat_map(|n| (arb_kernel(n, 6), arb_kernel(n, 6)))
        ) {
            let lhs = f.adjoint().inner(&g.adjoint());
            let rhs = f.inner(&g).conj();
            prop_assert!((lhs - rhs).norm() <= 1e-12);
        }

        #[test]
        fn tensor_norm_is_multiplicative(
            f in (0usize..=3).prop_flat_map(|n| arb_kernel(n, 5)),
            g in (0usize..=3).prop_flat_map(|n| arb_kernel(n, 5)),
        ) {
            let t = f.tensor(&g);
            prop_assert!((t.norm() - f.norm() * g.norm()).abs() <= 1e-10);
        }

        #[test]
        fn contraction_order_zero_is_tensor(
            f in (0usize..=3).prop_flat_map(|n| arb_kernel(n, 5)),
            g in (0usize..=3).prop_flat_map(|n| arb_kernel(n, 5)),
        ) {
            let lhs = f.contract(&g, 0).unwrap();
            prop_assert!(lhs.sub(&f.tensor(&g)).norm() <= 1e-12);
        }

        #[test]
        fn contraction_is_bilinear(
            (f, f2, g, p) in (1usize..=4, 1usize..=4).prop_flat_map(|(n, m)| (
                arb_kernel(n, 8),
                arb_kernel(n, 8),
                arb_kernel(m, 8),
                0..=n.min(m),
            )),
            a_re in -1.0f64..1.0,
            a_im in -1.0f64..1.0,
        ) {
            let a = c(a_re, a_im);
            let lhs = f.scale(a).add(&f2).contract(&g, p).unwrap();
            let rhs = f.contract(&g, p).unwrap().scale(a).add(&f2.contract(&g, p).unwrap());
            prop_assert!(lhs.sub(&rhs).norm() <= 1e-12);
        }

        #[test]
        fn full_contraction_realizes_pairing(
            (f, g) in (1usize..=4).prop_flat_map(|n| (arb_kernel(n, 6), arb_kernel(n, 6)))
        ) {
            let n = f.order();
            let s = f.adjoint().contract(&g, n).unwrap();
            prop_assert!((s.scalar_value() - g.inner(&f)).norm() <= 1e-12);
        }

        #[test]
        fn contraction_satisfies_cauchy_schwarz(
            (f, g, p) in (1usize..=4, 1usize..=4).prop_flat_map(|(n, m)| (
                arb_kernel(n, 6),
                arb_kernel(m, 6),
                0..=n.min(m),
            )),
        ) {
            let h = f.contract(&g, p).unwrap();
            prop_assert!(h.norm() <= f.norm() * g.norm() + 1e-10);
        }

        #[test]
        fn inner_is_sum_of_squares(f in (1usize..=5).prop_flat_map(|n| arb_kernel(n, 6))) {
            let ip = f.inner(&f);
            prop_assert!(ip.im.abs() <= 1e-14);
            prop_assert!(ip.re >= 0.0);
            prop_assert!((ip.re - f.norm_sqr()).abs() <= 1e-12);
        }
    }
}
