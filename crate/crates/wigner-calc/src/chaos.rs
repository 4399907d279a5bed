//! Finite Wigner chaos expansions `F = Σₙ Iₙ(fₙ)`.
//!
//! A [`ChaosExpansion`] is a graded family of kernels, one per chaos degree,
//! with the *-algebra structure given by the Biane–Speicher product formula
//!
//! `Iₙ(f)·Iₘ(g) = Σ_{p=0}^{n∧m} I_{n+m−2p}(f ⌢_p g)`
//!
//! extended bilinearly. The trace is the degree-0 coefficient, and
//! `⟨F, G⟩ = τ(G*F) = Σₙ ⟨fₙ, gₙ⟩` is the Wigner–Itô isometry.
//!
//! Degree growth is bounded by an explicit `max_degree` budget: exceeding it
//! is an error, never a silent truncation, so identity checks cannot be
//! corrupted by lost components.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::kernel::{BasisIndex, Coeff, Kernel};

/// Default truncation budget for the product formula.
pub const DEFAULT_MAX_DEGREE: usize = 8;

#[derive(Debug, Error, PartialEq)]
pub enum ChaosError {
    #[error("degree {degree} exceeds the truncation budget {max_degree}")]
    DegreeBudget { degree: usize, max_degree: usize },
    #[error("direction must be an order-1 kernel, got order {0}")]
    NotOrderOne(usize),
    #[error("direction must have unit norm, got {0}")]
    NotUnitNorm(f64),
    #[error("basis index {index} outside the first block of size {basis_size}")]
    IndexOutsideBlock { index: BasisIndex, basis_size: u32 },
}

/// Diagonal action on the chaos grading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralMode {
    /// Ornstein–Uhlenbeck semigroup `P_t`: eigenvalue `e^{−nt}`, `t ≥ 0`.
    Ou(f64),
    /// OU generator `L`: eigenvalue `−n`.
    Generator,
    /// Number operator `N = −L`: eigenvalue `n`.
    Number,
    /// Cauchy operator `C = −√(−L)`: eigenvalue `−√n`.
    Cauchy,
    /// Pseudo-inverse `L⁻¹`: `−1/n` on mean-zero parts, 0 on constants.
    PseudoInverse,
}

impl SpectralMode {
    fn eigenvalue(self, n: usize) -> f64 {
        match self {
            SpectralMode::Ou(t) => {
                assert!(t >= 0.0, "OU semigroup needs t >= 0");
                (-(n as f64) * t).exp()
            }
            SpectralMode::Generator => -(n as f64),
            SpectralMode::Number => n as f64,
            SpectralMode::Cauchy => -(n as f64).sqrt(),
            SpectralMode::PseudoInverse => {
                if n == 0 {
                    0.0
                } else {
                    -1.0 / n as f64
                }
            }
        }
    }
}

/// A Wigner functional with finite chaos decomposition.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChaosExpansion {
    components: BTreeMap<usize, Kernel>,
}

impl ChaosExpansion {
    pub fn zero() -> Self {
        ChaosExpansion::default()
    }

    /// The unit `1` of the algebra.
    pub fn one() -> Self {
        ChaosExpansion::scalar(Coeff::new(1.0, 0.0))
    }

    pub fn scalar(c: Coeff) -> Self {
        ChaosExpansion::from_kernel(Kernel::scalar(c))
    }

    /// `Iₙ(f)` where `n` is the kernel's order.
    pub fn from_kernel(kernel: Kernel) -> Self {
        let mut f = ChaosExpansion::zero();
        f.add_component(&kernel);
        f
    }

    /// The semicircular element `S(h) = I₁(h)`.
    pub fn semicircular(h: &Kernel) -> Self {
        assert_eq!(h.order(), 1, "semicircular elements come from order-1 kernels");
        ChaosExpansion::from_kernel(h.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> impl Iterator<Item = (usize, &Kernel)> {
        self.components.iter().map(|(&n, k)| (n, k))
    }

    /// The degree-`n` kernel (zero when absent).
    pub fn component(&self, n: usize) -> Kernel {
        self.components.get(&n).cloned().unwrap_or_else(|| Kernel::zero(n))
    }

    /// Highest degree carrying a nonzero kernel; 0 for the zero functional.
    pub fn degree(&self) -> usize {
        self.components.keys().next_back().copied().unwrap_or(0)
    }

    pub fn add_component(&mut self, kernel: &Kernel) {
        if kernel.is_zero() {
            return;
        }
        let n = kernel.order();
        match self.components.get_mut(&n) {
            Some(existing) => {
                *existing = existing.add(kernel);
                if existing.is_zero() {
                    self.components.remove(&n);
                }
            }
            None => {
                self.components.insert(n, kernel.clone());
            }
        }
    }

    /// Componentwise complex-linear combination.
    pub fn linear_combine(terms: &[(Coeff, &ChaosExpansion)]) -> ChaosExpansion {
        let mut out = ChaosExpansion::zero();
        for (a, f) in terms {
            for (_, k) in f.components() {
                out.add_component(&k.scale(*a));
            }
        }
        out
    }

    pub fn add(&self, other: &ChaosExpansion) -> ChaosExpansion {
        ChaosExpansion::linear_combine(&[
            (Coeff::new(1.0, 0.0), self),
            (Coeff::new(1.0, 0.0), other),
        ])
    }

    pub fn sub(&self, other: &ChaosExpansion) -> ChaosExpansion {
        ChaosExpansion::linear_combine(&[
            (Coeff::new(1.0, 0.0), self),
            (Coeff::new(-1.0, 0.0), other),
        ])
    }

    pub fn scale(&self, a: Coeff) -> ChaosExpansion {
        ChaosExpansion::linear_combine(&[(a, self)])
    }

    /// Product formula, extended bilinearly over components. Degrees above
    /// `max_degree` are an error.
    pub fn multiply(
        &self,
        other: &ChaosExpansion,
        max_degree: usize,
    ) -> Result<ChaosExpansion, ChaosError> {
        let mut out = ChaosExpansion::zero();
        for (n, f) in self.components() {
            for (m, g) in other.components() {
                if n + m > max_degree {
                    return Err(ChaosError::DegreeBudget { degree: n + m, max_degree });
                }
                for p in 0..=n.min(m) {
                    let contracted = f.contract(g, p).expect("p <= min orders");
                    out.add_component(&contracted);
                }
            }
        }
        Ok(out)
    }

    /// `F* = Σ Iₙ(fₙ*)`; `F` is self-adjoint iff every kernel is
    /// mirror-symmetric.
    pub fn adjoint(&self) -> ChaosExpansion {
        let mut out = ChaosExpansion::zero();
        for (_, k) in self.components() {
            out.add_component(&k.adjoint());
        }
        out
    }

    /// `τ(F)`: the degree-0 coefficient.
    pub fn trace(&self) -> Coeff {
        self.component(0).scalar_value()
    }

    /// `⟨F, G⟩ = τ(G*F) = Σₙ ⟨fₙ, gₙ⟩`.
    pub fn inner(&self, other: &ChaosExpansion) -> Coeff {
        let mut acc = Coeff::default();
        for (n, f) in self.components() {
            if let Some(g) = other.components.get(&n) {
                acc += f.inner(g);
            }
        }
        acc
    }

    /// `‖F‖₂² = Σₙ ‖fₙ‖²` (Wigner–Itô isometry).
    pub fn norm_sqr(&self) -> f64 {
        self.components.values().map(|k| k.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Projection `πₙ` onto the degree-`n` homogeneous chaos.
    pub fn project(&self, n: usize) -> ChaosExpansion {
        match self.components.get(&n) {
            Some(k) => ChaosExpansion::from_kernel(k.clone()),
            None => ChaosExpansion::zero(),
        }
    }

    /// Mean-zero part `F − τ(F)·1`.
    pub fn centered(&self) -> ChaosExpansion {
        let mut out = self.clone();
        out.components.remove(&0);
        out
    }

    /// Componentwise scaling by the mode's eigenvalue.
    pub fn apply_spectral(&self, mode: SpectralMode) -> ChaosExpansion {
        let mut out = ChaosExpansion::zero();
        for (n, k) in self.components() {
            out.add_component(&k.scale(Coeff::new(mode.eigenvalue(n), 0.0)));
        }
        out
    }

    /// Dilation `F_λ = τ(F)·1 + Σ λⁿ Iₙ(fₙ)`; `(F_{1−ε} − F)/ε → LF`.
    pub fn dilate(&self, lambda: Coeff) -> ChaosExpansion {
        let mut out = ChaosExpansion::zero();
        for (n, k) in self.components() {
            out.add_component(&k.scale(lambda.powu(n as u32)));
        }
        out
    }

    /// Conditional expectation onto the subalgebra generated by the basis
    /// block `A`: every kernel keeps only entries with all indices in `A`.
    pub fn conditional_expectation(&self, block: &BTreeSet<BasisIndex>) -> ChaosExpansion {
        let mut out = ChaosExpansion::zero();
        for (n, k) in self.components() {
            let filtered = Kernel::from_entries(
                n,
                k.iter().filter_map(|(idx, c)| {
                    idx.iter().all(|i| block.contains(i)).then(|| (idx.to_vec(), c))
                }),
            )
            .expect("tuple lengths preserved");
            out.add_component(&filtered);
        }
        out
    }

    /// Largest basis index appearing in any kernel.
    pub fn max_index(&self) -> Option<BasisIndex> {
        self.components.values().filter_map(|k| k.max_index()).max()
    }

    /// One-parameter rotation against an independent semicircular copy:
    /// every slot substitutes `e_i ↦ cos(t)·e_i + sin(t)·e_{i+d}`, where
    /// `d = basis_size` and the indices `d..2d` hold the copy. The input
    /// must live entirely in the first block.
    pub fn rotate_pair(&self, t: f64, basis_size: u32) -> Result<ChaosExpansion, ChaosError> {
        if let Some(i) = self.max_index() {
            if i >= basis_size {
                return Err(ChaosError::IndexOutsideBlock { index: i, basis_size });
            }
        }
        let (cos, sin) = (t.cos(), t.sin());
        let mut out = ChaosExpansion::zero();
        for (n, k) in self.components() {
            let mut rotated = Kernel::zero(n);
            for (idx, c) in k.iter() {
                // expand the n-fold substitution product over slot choices
                for mask in 0u64..(1 << n) {
                    let mut tuple = Vec::with_capacity(n);
                    let mut coeff = c;
                    for (slot, &i) in idx.iter().enumerate() {
                        if mask >> slot & 1 == 0 {
                            tuple.push(i);
                            coeff *= cos;
                        } else {
                            tuple.push(i + basis_size);
                            coeff *= sin;
                        }
                    }
                    rotated.add_entry(&tuple, coeff);
                }
            }
            out.add_component(&rotated);
        }
        Ok(out)
    }

    /// `τ(S(h₁)⋯S(h_k))` by folding the product formula over the word.
    pub fn word_moment(word: &[Kernel], max_degree: usize) -> Result<Coeff, ChaosError> {
        if word.len() > max_degree {
            return Err(ChaosError::DegreeBudget { degree: word.len(), max_degree });
        }
        let mut acc = ChaosExpansion::one();
        for h in word {
            acc = acc.multiply(&ChaosExpansion::semicircular(h), max_degree)?;
        }
        Ok(acc.trace())
    }
}

/// Evaluates the Chebyshev polynomial of the second kind `U_p` at `S(h)` via
/// the recurrence `X·U_k = U_{k+1} + U_{k−1}`; for unit `h` the result is
/// exactly `I_p(h^{⊗p})`.
pub fn chebyshev_eval(p: usize, h: &Kernel) -> Result<ChaosExpansion, ChaosError> {
    if h.order() != 1 {
        return Err(ChaosError::NotOrderOne(h.order()));
    }
    let norm = h.norm();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(ChaosError::NotUnitNorm(norm));
    }
    let s = ChaosExpansion::semicircular(h);
    let mut prev = ChaosExpansion::one();
    if p == 0 {
        return Ok(prev);
    }
    let mut cur = s.clone();
    for _ in 1..p {
        let next = s.multiply(&cur, p.max(DEFAULT_MAX_DEGREE))?.sub(&prev);
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// `X(h)`: the semicircular element of the independent copy used by
/// [`ChaosExpansion::rotate_pair`], i.e. `S` applied to `h` shifted into the
/// second basis block.
pub fn paired_copy(h: &Kernel, basis_size: u32) -> Result<ChaosExpansion, ChaosError> {
    if h.order() != 1 {
        return Err(ChaosError::NotOrderOne(h.order()));
    }
    if let Some(i) = h.max_index() {
        if i >= basis_size {
            return Err(ChaosError::IndexOutsideBlock { index: i, basis_size });
        }
    }
    let shifted = Kernel::from_entries(
        1,
        h.iter().map(|(idx, c)| (vec![idx[0] + basis_size], c)),
    )
    .expect("order preserved");
    Ok(ChaosExpansion::from_kernel(shifted))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;

    fn c(re: f64, im: f64) -> Coeff {
        Coeff::new(re, im)
    }

    fn s(i: BasisIndex) -> ChaosExpansion {
        ChaosExpansion::semicircular(&Kernel::basis_vector(i))
    }

    fn real_direction(entries: &[(u32, f64)]) -> Kernel {
        Kernel::from_entries(1, entries.iter().map(|&(i, v)| (vec![i], c(v, 0.0)))).unwrap()
    }

    #[test]
    fn linear_combine_cancels() {
        let f = s(1).add(&ChaosExpansion::scalar(c(2.0, 0.0)));
        assert!(f.sub(&f).is_zero());
        let doubled = ChaosExpansion::linear_combine(&[(c(2.0, 0.0), &s(1))]);
        assert_eq!(doubled.component(1).get(&[1]), c(2.0, 0.0));
    }

    #[test]
    fn square_of_semicircular() {
        // S(h)² = I₂(h⊗h) + ‖h‖²·1
        let h = real_direction(&[(0, 0.6), (1, 0.8)]);
        let sh = ChaosExpansion::semicircular(&h);
        let sq = sh.multiply(&sh, 8).unwrap();
        assert!((sq.trace() - c(1.0, 0.0)).norm() < 1e-12);
        let expected = h.tensor(&h);
        assert!(sq.component(2).sub(&expected).norm() < 1e-12);
        assert!(sq.component(1).is_zero());
    }

    #[test]
    fn unit_is_neutral() {
        let f = s(1).multiply(&s(2), 8).unwrap();
        let g = ChaosExpansion::one().multiply(&f, 8).unwrap();
        assert!(g.sub(&f).is_zero());
    }

    #[test]
    fn crossing_word_vanishes_noncrossing_survives() {
        let w1212 = ChaosExpansion::word_moment(
            &[1, 2, 1, 2].map(Kernel::basis_vector),
            8,
        )
        .unwrap();
        assert!((w1212 - c(0.0, 0.0)).norm() < 1e-12);
        let w1122 = ChaosExpansion::word_moment(
            &[1, 1, 2, 2].map(Kernel::basis_vector),
            8,
        )
        .unwrap();
        assert!((w1122 - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn adjoint_examples() {
        let h = real_direction(&[(0, 1.0), (2, -0.5)]);
        let sh = ChaosExpansion::semicircular(&h);
        assert!(sh.adjoint().sub(&sh).is_zero());

        let f = ChaosExpansion::from_kernel(Kernel::elementary(&[1, 2]));
        let fa = f.adjoint();
        assert_eq!(fa.component(2).get(&[2, 1]), c(1.0, 0.0));
    }

    #[test]
    fn multiply_respects_adjoint() {
        let f = ChaosExpansion::from_kernel(Kernel::elementary(&[1, 2]))
            .add(&s(1).scale(c(0.0, 1.5)));
        let g = ChaosExpansion::from_kernel(Kernel::elementary(&[2, 2]))
            .add(&ChaosExpansion::one());
        let lhs = f.multiply(&g, 8).unwrap().adjoint();
        let rhs = g.adjoint().multiply(&f.adjoint(), 8).unwrap();
        assert!(lhs.sub(&rhs).norm() < 1e-12);
    }

    #[test]
    fn trace_and_moments() {
        let h = real_direction(&[(0, 0.3), (1, 1.1)]);
        let sh = ChaosExpansion::semicircular(&h);
        assert_eq!(sh.trace(), c(0.0, 0.0));
        let sq = sh.multiply(&sh, 8).unwrap();
        assert!((sq.trace().re - h.norm_sqr()).abs() < 1e-12);
        let fourth = sq.multiply(&sq, 8).unwrap();
        assert!((fourth.trace().re - 2.0 * h.norm_sqr() * h.norm_sqr()).abs() < 1e-12);
    }

    #[test]
    fn traciality_on_random_pairs() {
        let mut rng = crate::sample::rng(7);
        for _ in 0..20 {
            let f = crate::sample::chaos(&mut rng, 3, 6, 0.3);
            let g = crate::sample::chaos(&mut rng, 3, 6, 0.3);
            let fg = f.multiply(&g, 8).unwrap().trace();
            let gf = g.multiply(&f, 8).unwrap().trace();
            assert!((fg - gf).norm() < 1e-12);
        }
    }

    #[test]
    fn associativity_on_random_triples() {
        let mut rng = crate::sample::rng(11);
        for _ in 0..10 {
            let f = crate::sample::chaos(&mut rng, 3, 6, 0.3);
            let g = crate::sample::chaos(&mut rng, 3, 6, 0.3);
            let h = crate::sample::chaos(&mut rng, 3, 6, 0.3);
            let lhs = f.multiply(&g, 9).unwrap().multiply(&h, 9).unwrap();
            let rhs = f.multiply(&g.multiply(&h, 9).unwrap(), 9).unwrap();
            assert!(lhs.sub(&rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn isometry_two_ways() {
        let mut rng = crate::sample::rng(13);
        for _ in 0..20 {
            let f = crate::sample::chaos(&mut rng, 4, 5, 0.3);
            let direct: f64 = f.components().map(|(_, k)| k.norm_sqr()).sum();
            let via_trace = f.adjoint().multiply(&f, 8).unwrap().trace();
            assert!((f.inner(&f).re - direct).abs() < 1e-12);
            assert!((via_trace.re - direct).abs() < 1e-10);
            assert!(via_trace.im.abs() < 1e-10);
        }
    }

    #[test]
    fn projections_are_orthogonal() {
        let mut rng = crate::sample::rng(17);
        let f = crate::sample::chaos(&mut rng, 4, 5, 0.4);
        let g = crate::sample::chaos(&mut rng, 4, 5, 0.4);
        let tau = f.trace();
        let p0 = f.project(0);
        assert!((p0.trace() - tau).norm() < 1e-15);
        for n in 0..=4 {
            for m in 0..=4 {
                if n != m {
                    assert_eq!(f.project(n).inner(&g.project(m)), c(0.0, 0.0));
                }
            }
        }
        // Σ πₙ F = F and idempotence
        let mut sum = ChaosExpansion::zero();
        for n in 0..=4 {
            sum = sum.add(&f.project(n));
            assert!(f.project(n).project(n).sub(&f.project(n)).is_zero());
        }
        assert!(sum.sub(&f).is_zero());
    }

    #[test]
    fn second_chaos_of_square() {
        let h = real_direction(&[(1, 1.0)]);
        let sq = ChaosExpansion::semicircular(&h)
            .multiply(&ChaosExpansion::semicircular(&h), 8)
            .unwrap();
        let p2 = sq.project(2);
        assert!(p2.component(2).sub(&h.tensor(&h)).norm() < 1e-12);
    }

    #[test]
    fn spectral_modes() {
        let mut rng = crate::sample::rng(19);
        let f = crate::sample::chaos(&mut rng, 4, 5, 0.4);
        let t = 0.7;
        let pt = f.apply_spectral(SpectralMode::Ou(t));
        for (n, k) in f.components() {
            let expected = k.scale(c((-(n as f64) * t).exp(), 0.0));
            assert!(pt.component(n).sub(&expected).norm() < 1e-15);
        }
        // semigroup law holds exactly in the exponents
        let two = f.apply_spectral(SpectralMode::Ou(0.3)).apply_spectral(SpectralMode::Ou(0.4));
        let one = f.apply_spectral(SpectralMode::Ou(0.7));
        assert!(two.sub(&one).norm() < 1e-12);

        assert!(ChaosExpansion::one().apply_spectral(SpectralMode::Generator).is_zero());
        for n in 0..=4 {
            let ln = f.project(n).apply_spectral(SpectralMode::Generator);
            let expected = f.project(n).scale(c(-(n as f64), 0.0));
            assert!(ln.sub(&expected).is_zero());
        }
        // L ∘ L⁻¹ = id − π₀
        let back = f
            .apply_spectral(SpectralMode::PseudoInverse)
            .apply_spectral(SpectralMode::Generator);
        assert!(back.sub(&f.centered()).norm() < 1e-12);
        // C² = L on mean-zero parts
        let c2 = f
            .centered()
            .apply_spectral(SpectralMode::Cauchy)
            .apply_spectral(SpectralMode::Cauchy);
        let l = f.centered().apply_spectral(SpectralMode::Number);
        assert!(c2.sub(&l).norm() < 1e-12);
    }

    #[test]
    fn ergodicity_of_ou() {
        let mut rng = crate::sample::rng(23);
        for _ in 0..10 {
            let f = crate::sample::chaos(&mut rng, 4, 5, 0.4);
            for &t in &[0.1, 1.0, 3.0] {
                let drift = f.apply_spectral(SpectralMode::Ou(t)).centered().norm();
                assert!(drift <= (-t).exp() * f.centered().norm() + 1e-12);
            }
        }
    }

    #[test]
    fn dilation_endpoints_and_limit() {
        let mut rng = crate::sample::rng(29);
        let f = crate::sample::chaos(&mut rng, 6, 4, 0.3);
        assert!(f.dilate(c(1.0, 0.0)).sub(&f).is_zero());
        let f0 = f.dilate(c(0.0, 0.0));
        assert!((f0.trace() - f.trace()).norm() < 1e-15);
        assert!(f0.centered().is_zero());

        let lf = f.apply_spectral(SpectralMode::Generator);
        for &eps in &[1e-3, 1e-4] {
            let quotient = f.dilate(c(1.0 - eps, 0.0)).sub(&f).scale(c(1.0 / eps, 0.0));
            let taylor: f64 = f
                .components()
                .map(|(n, k)| {
                    let budget = (2f64.powi(n as i32) - 1.0 - n as f64).powi(2);
                    budget * k.norm_sqr()
                })
                .sum();
            assert!(quotient.sub(&lf).norm() <= taylor.sqrt() * eps + 1e-12);
        }
    }

    #[test]
    fn chebyshev_recurrence_and_isometry() {
        let e1 = Kernel::basis_vector(1);
        let u1 = chebyshev_eval(1, &e1).unwrap();
        assert!(u1.sub(&s(1)).is_zero());
        let u2 = chebyshev_eval(2, &e1).unwrap();
        let direct = s(1).multiply(&s(1), 8).unwrap().sub(&ChaosExpansion::one());
        assert!(u2.sub(&direct).is_zero());
        assert!(u2.component(2).sub(&e1.tensor(&e1)).norm() < 1e-15);

        // U_p(S(e)) = I_p(e^{⊗p}) exactly for p ≤ 8
        for p in 0..=8usize {
            let up = chebyshev_eval(p, &e1).unwrap();
            let expected = ChaosExpansion::from_kernel(Kernel::elementary(&vec![1; p]));
            assert!(up.sub(&expected).is_zero(), "p = {p}");
        }

        // ⟨U_n(S(h)), U_m(S(h'))⟩ = δ_{n,m} ⟨h,h'⟩ⁿ
        let h = real_direction(&[(0, 0.6), (1, 0.8)]);
        let hp = real_direction(&[(0, 0.8), (1, -0.6)]);
        let dot = h.inner(&hp).re;
        for n in 0..=4usize {
            for m in 0..=4usize {
                let un = chebyshev_eval(n, &h).unwrap();
                let um = chebyshev_eval(m, &hp).unwrap();
                let ip = un.inner(&um);
                let expected = if n == m { dot.powi(n as i32) } else { 0.0 };
                assert!((ip.re - expected).abs() < 1e-12, "n={n} m={m}");
                assert!(ip.im.abs() < 1e-12);
            }
        }

        let bad = real_direction(&[(0, 2.0)]);
        assert!(matches!(chebyshev_eval(2, &bad), Err(ChaosError::NotUnitNorm(_))));
    }

    #[test]
    fn conditional_expectation_examples() {
        let mut rng = crate::sample::rng(31);
        let f = crate::sample::chaos(&mut rng, 3, 4, 0.5);
        let all: BTreeSet<u32> = (0..4).collect();
        assert!(f.conditional_expectation(&all).sub(&f).is_zero());

        let only1: BTreeSet<u32> = [1].into();
        let mixed = ChaosExpansion::from_kernel(Kernel::elementary(&[1, 2]));
        assert!(mixed.conditional_expectation(&only1).is_zero());
        let pure = ChaosExpansion::from_kernel(Kernel::elementary(&[1, 1]));
        assert!(pure.conditional_expectation(&only1).sub(&pure).is_zero());

        // trace preserving, idempotent, L²-contractive, orthogonal
        let a: BTreeSet<u32> = [0, 2].into();
        let ef = f.conditional_expectation(&a);
        assert!((ef.trace() - f.trace()).norm() < 1e-15);
        assert!(ef.conditional_expectation(&a).sub(&ef).is_zero());
        assert!(ef.norm() <= f.norm() + 1e-15);
        let g = crate::sample::chaos(&mut rng, 3, 4, 0.5).conditional_expectation(&a);
        assert!((f.sub(&ef).inner(&g)).norm() < 1e-12);
    }

    #[test]
    fn rotation_automorphism() {
        let d = 3u32;
        let h = real_direction(&[(0, 0.6), (2, 0.8)]);
        let sh = ChaosExpansion::semicircular(&h);
        assert!(sh.rotate_pair(0.0, d).unwrap().sub(&sh).is_zero());

        // τ(α_t(S(h)²)) = ‖h‖², checked against the Wick oracle
        for &t in &[0.3, 1.2] {
            let rot = sh.rotate_pair(t, d).unwrap();
            let sq = rot.multiply(&rot, 8).unwrap();
            assert!((sq.trace().re - h.norm_sqr()).abs() < 1e-12);
            let dir = rot.component(1);
            let wick = oracle::wick_moment(&[dir.clone(), dir]).unwrap();
            assert!((wick.re - h.norm_sqr()).abs() < 1e-12);
        }

        // d/dt at 0 of α_t(S(h)) is X(h)
        let eps = 1e-6;
        let slope = sh
            .rotate_pair(eps, d)
            .unwrap()
            .sub(&sh)
            .scale(c(1.0 / eps, 0.0));
        let x = paired_copy(&h, d).unwrap();
        assert!(slope.sub(&x).norm() < 1e-6);

        // rotation is multiplicative on polynomials
        let w = sh.multiply(&s(1), 8).unwrap();
        let lhs = w.rotate_pair(0.7, d).unwrap();
        let rhs = sh
            .rotate_pair(0.7, d)
            .unwrap()
            .multiply(&s(1).rotate_pair(0.7, d).unwrap(), 8)
            .unwrap();
        assert!(lhs.sub(&rhs).norm() < 1e-12);

        let outside = ChaosExpansion::from_kernel(Kernel::basis_vector(5));
        assert!(matches!(
            outside.rotate_pair(0.1, d),
            Err(ChaosError::IndexOutsideBlock { index: 5, basis_size: 3 })
        ));
    }

    #[test]
    fn word_moments() {
        assert_eq!(
            ChaosExpansion::word_moment(&[Kernel::basis_vector(1)], 8).unwrap(),
            c(0.0, 0.0)
        );
        assert_eq!(
            ChaosExpansion::word_moment(&[1, 2].map(Kernel::basis_vector), 8).unwrap(),
            c(0.0, 0.0)
        );
        // τ(S(e₁)⁶) = Catalan C₃ = 5
        let sixth = ChaosExpansion::word_moment(&[1; 6].map(|_| Kernel::basis_vector(1)), 8)
            .unwrap();
        assert!((sixth.re - 5.0).abs() < 1e-12);
        assert!(matches!(
            ChaosExpansion::word_moment(&[1; 9].map(|_| Kernel::basis_vector(1)), 8),
            Err(ChaosError::DegreeBudget { degree: 9, max_degree: 8 })
        ));
    }

    #[test]
    fn multiply_budget_error() {
        let f = ChaosExpansion::from_kernel(Kernel::elementary(&[0, 1, 2]));
        assert!(matches!(
            f.multiply(&f, 5),
            Err(ChaosError::DegreeBudget { degree: 6, max_degree: 5 })
        ));
    }
}
