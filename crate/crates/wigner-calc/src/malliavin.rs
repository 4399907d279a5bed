//! Free Malliavin derivatives of all orders, pairings, Skorokhod
//! divergences, the Stroock kernel-recovery formula, the Clark–Ocone
//! representation on block-adapted functionals, and variance identities.
//!
//! The order-`p` derivative of a degree-`n` integral distributes the kernel
//! slots over increasing position tuples,
//!
//! `∇ᵖ Iₙ(f) = Σ_{i₁<…<i_p} (I_{i₁−1} ⊗ I_{i₂−i₁−1} ⊗ … ⊗ I_{n−i_p})(f split)`
//!
//! with the `q`-th removed slot carrying the `q`-th derivative variable. A
//! [`Gradient`] stores those values sparsely: a map from basis-index tuples
//! to [`MultiKernel`]s of arity `p + 1`.
//!
//! On the finite truncated space the derivative is an explicit sparse 0/1
//! matrix from chaos entries to gradient cells, and each cell reassembles to
//! exactly one chaos entry; the divergence `δᵖ` below is the literal
//! conjugate transpose of that matrix, so the duality
//! `⟨∇ᵖF, U⟩ = ⟨F, δᵖU⟩` holds to rounding.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::chaos::{ChaosError, ChaosExpansion};
use crate::kernel::{BasisIndex, Coeff, Kernel, KernelError, MultiKernel};

#[derive(Debug, Error, PartialEq)]
pub enum MalliavinError {
    #[error("the order-0 derivative is the identity; use the functional itself")]
    ZeroOrder,
    #[error("expected {expected} pairing directions, got {got}")]
    DirectionCount { expected: usize, got: usize },
    #[error("pairing directions must be order-1 kernels, got order {0}")]
    NotOrderOne(usize),
    #[error("reassembled degree {degree} exceeds the truncation budget {max_degree}")]
    Budget { degree: usize, max_degree: usize },
    #[error("biprocess is not block-adapted: index {index} at block {block}")]
    NotAdapted { block: BasisIndex, index: BasisIndex },
    #[error("kernel support must be strictly increasing in every tuple")]
    NotIncreasing,
    #[error("chaos degree {degree} violates the hypothesis degree >= p = {p}")]
    DegreeHypothesis { degree: usize, p: usize },
    #[error(transparent)]
    Chaos(#[from] ChaosError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Order-`p` Malliavin derivative value: sparse map from `p`-tuples of basis
/// indices to multikernels of arity `p + 1`.
///
/// Order 0 is allowed internally (a single component at the empty tuple,
/// holding the functional itself) so that Leibniz expansions can treat
/// `∇⁰ = id` uniformly.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    order: usize,
    components: BTreeMap<Vec<BasisIndex>, MultiKernel>,
}

impl Gradient {
    pub fn zero(order: usize) -> Self {
        Gradient { order, components: BTreeMap::new() }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn arity(&self) -> usize {
        self.order + 1
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> impl Iterator<Item = (&[BasisIndex], &MultiKernel)> {
        self.components.iter().map(|(t, m)| (t.as_slice(), m))
    }

    pub fn component(&self, tuple: &[BasisIndex]) -> Option<&MultiKernel> {
        self.components.get(tuple)
    }

    pub fn add_component(&mut self, tuple: &[BasisIndex], m: &MultiKernel) {
        debug_assert_eq!(tuple.len(), self.order);
        debug_assert_eq!(m.arity(), self.order + 1);
        if m.is_zero() {
            return;
        }
        match self.components.get_mut(tuple) {
            Some(existing) => {
                *existing = existing.add(m);
                if existing.is_zero() {
                    self.components.remove(tuple);
                }
            }
            None => {
                self.components.insert(tuple.to_vec(), m.clone());
            }
        }
    }

    pub fn add(&self, other: &Gradient) -> Gradient {
        debug_assert_eq!(self.order, other.order);
        let mut out = self.clone();
        for (t, m) in other.components() {
            out.add_component(t, m);
        }
        out
    }

    pub fn sub(&self, other: &Gradient) -> Gradient {
        self.add(&other.scale(Coeff::new(-1.0, 0.0)))
    }

    pub fn scale(&self, a: Coeff) -> Gradient {
        let mut out = Gradient::zero(self.order);
        for (t, m) in self.components() {
            out.add_component(t, &m.scale(a));
        }
        out
    }

    /// `‖∇ᵖF‖²`: the `𝕄₂` seminorm restricted to the basis.
    pub fn norm_sqr(&self) -> f64 {
        self.components.values().map(|m| m.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Inner product of two fields of equal order, conjugate-linear in
    /// `other`.
    pub fn inner(&self, other: &Gradient) -> Coeff {
        let mut acc = Coeff::default();
        for (t, m) in self.components() {
            if let Some(o) = other.components.get(t) {
                acc += m.inner(o);
            }
        }
        acc
    }
}

fn for_each_combination(n: usize, p: usize, mut f: impl FnMut(&[usize])) {
    if p > n {
        return;
    }
    let mut positions: Vec<usize> = (0..p).collect();
    loop {
        f(&positions);
        // advance to the next increasing tuple
        let mut i = p;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if positions[i] != i + n - p {
                break;
            }
            if i == 0 {
                return;
            }
        }
        positions[i] += 1;
        for j in i + 1..p {
            positions[j] = positions[j - 1] + 1;
        }
    }
}

/// The functional itself viewed as an arity-1 multikernel.
pub fn expansion_as_multikernel(f: &ChaosExpansion) -> MultiKernel {
    let mut m = MultiKernel::zero(1);
    for (n, k) in f.components() {
        m.add_block(&[n], k);
    }
    m
}

/// Inverse of [`expansion_as_multikernel`].
pub fn multikernel_as_expansion(m: &MultiKernel) -> ChaosExpansion {
    assert_eq!(m.arity(), 1);
    let mut f = ChaosExpansion::zero();
    for (_, k) in m.blocks() {
        f.add_component(k);
    }
    f
}

/// `∇ᵖF` for `p ≥ 1`. Degrees below `p` contribute nothing.
pub fn gradient(f: &ChaosExpansion, p: usize) -> Result<Gradient, MalliavinError> {
    if p == 0 {
        return Err(MalliavinError::ZeroOrder);
    }
    Ok(gradient_or_identity(f, p))
}

/// `DᵖF = p!·∇ᵖF`, the symmetrized variant.
pub fn symmetrized_gradient(f: &ChaosExpansion, p: usize) -> Result<Gradient, MalliavinError> {
    let g = gradient(f, p)?;
    Ok(g.scale(Coeff::new(factorial(p), 0.0)))
}

pub(crate) fn factorial(p: usize) -> f64 {
    (1..=p).map(|i| i as f64).product()
}

/// Like [`gradient`] but `p = 0` yields the identity embedding, which lets
/// Leibniz expansions treat all orders uniformly.
pub fn gradient_or_identity(f: &ChaosExpansion, p: usize) -> Gradient {
    let mut out = Gradient::zero(p);
    if p == 0 {
        let m = expansion_as_multikernel(f);
        if !m.is_zero() {
            out.add_component(&[], &m);
        }
        return out;
    }
    for (n, kernel) in f.components() {
        if n < p {
            continue;
        }
        for (idx, c) in kernel.iter() {
            for_each_combination(n, p, |positions| {
                let tuple: Vec<BasisIndex> = positions.iter().map(|&q| idx[q]).collect();
                let mut degrees = Vec::with_capacity(p + 1);
                degrees.push(positions[0]);
                for w in positions.windows(2) {
                    degrees.push(w[1] - w[0] - 1);
                }
                degrees.push(n - 1 - positions[p - 1]);
                let rest: Vec<BasisIndex> = idx
                    .iter()
                    .enumerate()
                    .filter(|(q, _)| !positions.contains(q))
                    .map(|(_, &i)| i)
                    .collect();
                let block = Kernel::from_entries(n - p, [(rest, c)]).expect("split lengths");
                let mut m = MultiKernel::zero(p + 1);
                m.add_block(&degrees, &block);
                out.add_component(&tuple, &m);
            });
        }
    }
    out
}

/// Differentiates leg `leg` of every component once, inserting the new
/// derivative variable at position `insert_pos` of the index tuple.
///
/// `differentiate_leg(∇F, 1, 1)` is `(id ⊗ ∇)∇F = ∇²F` and
/// `differentiate_leg(∇F, 0, 0)` is `(∇ ⊗ id)∇F`; coassociativity says the
/// two agree.
pub fn differentiate_leg(g: &Gradient, leg: usize, insert_pos: usize) -> Gradient {
    let mut out = Gradient::zero(g.order() + 1);
    for (tuple, m) in g.components() {
        for (degrees, kernel) in m.blocks() {
            let offset: usize = degrees[..leg].iter().sum();
            let d = degrees[leg];
            for (idx, c) in kernel.iter() {
                for q in 0..d {
                    let new_index = idx[offset + q];
                    let mut new_tuple = tuple.to_vec();
                    new_tuple.insert(insert_pos, new_index);
                    let mut new_degrees = degrees.to_vec();
                    new_degrees[leg] = q;
                    new_degrees.insert(leg + 1, d - 1 - q);
                    let mut new_idx = idx.to_vec();
                    new_idx.remove(offset + q);
                    let block =
                        Kernel::from_entries(new_idx.len(), [(new_idx, c)]).expect("lengths");
                    let mut nm = MultiKernel::zero(m.arity() + 1);
                    nm.add_block(&new_degrees, &block);
                    out.add_component(&new_tuple, &nm);
                }
            }
        }
    }
    out
}

/// Directional pairing `⟨∇ᵖF, h₁ ⊗ … ⊗ h_p⟩`: sums components against the
/// conjugated direction coefficients. For `p = 1` this is `∇ʰF`.
pub fn pair_gradient(
    g: &Gradient,
    directions: &[&Kernel],
) -> Result<MultiKernel, MalliavinError> {
    if directions.len() != g.order() {
        return Err(MalliavinError::DirectionCount {
            expected: g.order(),
            got: directions.len(),
        });
    }
    for h in directions {
        if h.order() != 1 {
            return Err(MalliavinError::NotOrderOne(h.order()));
        }
    }
    let mut acc = MultiKernel::zero(g.arity());
    for (tuple, m) in g.components() {
        let mut weight = Coeff::new(1.0, 0.0);
        for (q, &j) in tuple.iter().enumerate() {
            weight *= directions[q].get(&[j]).conj();
        }
        if weight.norm_sqr() > 0.0 {
            acc = acc.add(&m.scale(weight));
        }
    }
    Ok(acc)
}

/// Stroock recovery of the degree-`n` kernel: `fₙ(t₁,…,tₙ)` is the full
/// trace `τ^{⊗(n+1)}` of `∇ⁿF` at `(t₁,…,tₙ)` — only the all-scalar blocks
/// of the gradient survive.
pub fn stroock_kernel(f: &ChaosExpansion, n: usize) -> Kernel {
    if n == 0 {
        return Kernel::scalar(f.trace());
    }
    let g = gradient_or_identity(f, n);
    let zero_degrees = vec![0usize; n + 1];
    let mut out = Kernel::zero(n);
    for (tuple, m) in g.components() {
        if let Some(block) = m.block(&zero_degrees) {
            out.add_entry(tuple, block.scalar_value());
        }
    }
    out
}

/// Symmetrized variant: `(1/n!)·τ^{⊗(n+1)}(DⁿF)`; agrees with
/// [`stroock_kernel`] identically.
pub fn stroock_kernel_symmetrized(f: &ChaosExpansion, n: usize) -> Kernel {
    if n == 0 {
        return Kernel::scalar(f.trace());
    }
    let g = symmetrized_gradient(f, n).expect("n >= 1");
    let zero_degrees = vec![0usize; n + 1];
    let mut out = Kernel::zero(n);
    let inv = Coeff::new(1.0 / factorial(n), 0.0);
    for (tuple, m) in g.components() {
        if let Some(block) = m.block(&zero_degrees) {
            out.add_entry(tuple, block.scalar_value() * inv);
        }
    }
    out
}

/// Free Skorokhod integral `δᵖ(U)`: the exact adjoint of the sparse
/// gradient matrix. Every gradient cell `(tuple, degrees, split indices)`
/// reassembles to exactly one chaos entry by re-inserting `tuple[q]` after
/// the `q`-th degree block, so the conjugate transpose acts entry by entry.
pub fn divergence_adjoint(
    u: &Gradient,
    max_degree: usize,
) -> Result<ChaosExpansion, MalliavinError> {
    let p = u.order();
    let mut out = ChaosExpansion::zero();
    let mut per_order: BTreeMap<usize, Kernel> = BTreeMap::new();
    for (tuple, m) in u.components() {
        for (degrees, kernel) in m.blocks() {
            let order = p + degrees.iter().sum::<usize>();
            if order > max_degree {
                return Err(MalliavinError::Budget { degree: order, max_degree });
            }
            let target = per_order.entry(order).or_insert_with(|| Kernel::zero(order));
            for (idx, c) in kernel.iter() {
                let mut reassembled = Vec::with_capacity(order);
                let mut consumed = 0;
                for (q, &d) in degrees.iter().enumerate() {
                    reassembled.extend_from_slice(&idx[consumed..consumed + d]);
                    consumed += d;
                    if q < p {
                        reassembled.push(tuple[q]);
                    }
                }
                target.add_entry(&reassembled, c);
            }
        }
    }
    for (_, k) in per_order {
        out.add_component(&k);
    }
    Ok(out)
}

/// The constant field `f·1^{⊗(p+1)}` of a deterministic multiprocess.
pub fn deterministic_field(f: &Kernel) -> Gradient {
    let p = f.order();
    let mut g = Gradient::zero(p);
    for (idx, c) in f.iter() {
        g.add_component(idx, &MultiKernel::scalar(p + 1, c));
    }
    g
}

/// `δᵖ(f·1^{⊗(p+1)}) = I_p(f)`: the divergence of a deterministic
/// multiprocess is the multiple integral itself.
pub fn divergence_deterministic(f: &Kernel) -> ChaosExpansion {
    ChaosExpansion::from_kernel(f.clone())
}

/// Divergence of the elementary biprocess `(A ⊗ B)·h` by the Voiculescu
/// formula
///
/// `δ((A⊗B)h) = A·S(h)·B − m₁∘(id⊗τ⊗id)(⟨(∇⊗id + id⊗∇)(A⊗B), h⟩)`.
pub fn divergence_elementary(
    a: &ChaosExpansion,
    b: &ChaosExpansion,
    h: &Kernel,
    max_degree: usize,
) -> Result<ChaosExpansion, MalliavinError> {
    if h.order() != 1 {
        return Err(MalliavinError::NotOrderOne(h.order()));
    }
    let sh = ChaosExpansion::semicircular(h);
    let main = a.multiply(&sh, max_degree)?.multiply(b, max_degree)?;

    // ⟨(∇A)⊗B + A⊗(∇B), h⟩ as an arity-3 multikernel
    let ga = gradient_or_identity(a, 1);
    let gb = gradient_or_identity(b, 1);
    let mb = expansion_as_multikernel(b);
    let ma = expansion_as_multikernel(a);
    let mut paired = MultiKernel::zero(3);
    for (tuple, m) in ga.components() {
        let w = h.get(&[tuple[0]]).conj();
        if w.norm_sqr() > 0.0 {
            paired = paired.add(&m.tensor(&mb).scale(w));
        }
    }
    for (tuple, m) in gb.components() {
        let w = h.get(&[tuple[0]]).conj();
        if w.norm_sqr() > 0.0 {
            paired = paired.add(&ma.tensor(m).scale(w));
        }
    }

    let mid_traced = paired.trace_leg(1);
    let merged = mid_traced.multiply_adjacent_legs(0, max_degree)?;
    let correction = multikernel_as_expansion(&merged);
    Ok(main.sub(&correction))
}

/// A biprocess whose component at time-block `j` only involves basis
/// indices strictly below `j` in both legs.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptedBiprocess {
    inner: Gradient,
}

impl AdaptedBiprocess {
    /// Validates block-adaptedness; offending entries are rejected.
    pub fn try_new(g: Gradient) -> Result<Self, MalliavinError> {
        assert_eq!(g.order(), 1, "biprocesses are order-1 fields");
        for (tuple, m) in g.components() {
            let block = tuple[0];
            for (_, kernel) in m.blocks() {
                for (idx, _) in kernel.iter() {
                    if let Some(&bad) = idx.iter().find(|&&i| i >= block) {
                        return Err(MalliavinError::NotAdapted { block, index: bad });
                    }
                }
            }
        }
        Ok(AdaptedBiprocess { inner: g })
    }

    pub fn field(&self) -> &Gradient {
        &self.inner
    }

    pub fn is_zero(&self) -> bool {
        self.inner.is_zero()
    }

    pub fn norm(&self) -> f64 {
        self.inner.norm()
    }
}

/// Orthogonal projection `Γ` onto block-adapted biprocesses: the component
/// at block `j` keeps only kernel entries whose indices all lie below `j`.
pub fn adapted_projection(g: &Gradient) -> AdaptedBiprocess {
    assert_eq!(g.order(), 1, "adapted projection acts on biprocesses");
    let mut out = Gradient::zero(1);
    for (tuple, m) in g.components() {
        let block = tuple[0];
        let mut filtered = MultiKernel::zero(2);
        for (degrees, kernel) in m.blocks() {
            let kept = Kernel::from_entries(
                kernel.order(),
                kernel.iter().filter_map(|(idx, c)| {
                    idx.iter().all(|&i| i < block).then(|| (idx.to_vec(), c))
                }),
            )
            .expect("orders preserved");
            filtered.add_block(degrees, &kept);
        }
        out.add_component(tuple, &filtered);
    }
    AdaptedBiprocess { inner: out }
}

/// Clark–Ocone decomposition `F = τ(F) + δ(Γ∇F)` on functionals whose
/// kernels are supported on strictly increasing tuples (the continuum
/// formula is exactly representable on blocks there).
pub fn clark_ocone(
    f: &ChaosExpansion,
) -> Result<(Coeff, AdaptedBiprocess), MalliavinError> {
    for (_, kernel) in f.components() {
        for (idx, _) in kernel.iter() {
            if !idx.windows(2).all(|w| w[0] < w[1]) {
                return Err(MalliavinError::NotIncreasing);
            }
        }
    }
    let g = gradient_or_identity(f, 1);
    Ok((f.trace(), adapted_projection(&g)))
}

/// The free Itô integral of an adapted biprocess: middle-slot insertion,
/// `(a ⊗ b)` at block `j` ↦ `a ⊗ e_j ⊗ b`. On adapted fields all product
/// contractions vanish, so this coincides with the Skorokhod adjoint.
pub fn ito_integral(
    u: &AdaptedBiprocess,
    max_degree: usize,
) -> Result<ChaosExpansion, MalliavinError> {
    divergence_adjoint(&u.inner, max_degree)
}

/// Covariance through the Ornstein–Uhlenbeck semigroup,
/// `cov(F,G) = ∫₀^∞ e^{−t} ⟨P_t^{⊗2}∇F, ∇G*⟩ dt`, evaluated in closed form:
/// a gradient block with leg degrees `(a, b)` contributes with weight
/// `∫ e^{−(1+a+b)t} dt = 1/(1+a+b)`.
pub fn covariance_ou(f: &ChaosExpansion, g: &ChaosExpansion) -> Coeff {
    let gf = gradient_or_identity(f, 1);
    let gg = gradient_or_identity(&g.adjoint(), 1);
    let mut acc = Coeff::default();
    for (tuple, mf) in gf.components() {
        if let Some(mg) = gg.component(tuple) {
            for (degrees, kf) in mf.blocks() {
                if let Some(kg) = mg.block(degrees) {
                    let weight = 1.0 / (1.0 + degrees.iter().sum::<usize>() as f64);
                    acc += kf.inner(kg) * weight;
                }
            }
        }
    }
    acc
}

/// Variance as the Stroock series `Σ_{n≥1} ‖τ^{⊗(n+1)}(∇ⁿF)‖²`.
pub fn variance_stroock(f: &ChaosExpansion) -> f64 {
    (1..=f.degree()).map(|n| stroock_kernel(f, n).norm_sqr()).sum()
}

/// Generalized Cébron trace formula:
///
/// `τ(AB) = Σ_{t ∈ ℝ₊ᵖ} τ[(id⊗τ^{⊗p})(∇ᵖ_{t_p,…,t₁}A)·(τ^{⊗p}⊗id)(∇ᵖ_{t₁,…,t_p}B)]`
///
/// with the tuple on the `A` side reversed. Requires every chaos degree of
/// `A` and `B` to be at least `p ≥ 1`.
pub fn cebron_product(
    a: &ChaosExpansion,
    b: &ChaosExpansion,
    p: usize,
    max_degree: usize,
) -> Result<Coeff, MalliavinError> {
    if p == 0 {
        return Err(MalliavinError::ZeroOrder);
    }
    for f in [a, b] {
        for (n, _) in f.components() {
            if n < p {
                return Err(MalliavinError::DegreeHypothesis { degree: n, p });
            }
        }
    }
    let ga = gradient(a, p)?;
    let gb = gradient(b, p)?;
    let mut acc = Coeff::default();
    for (tuple, mb) in gb.components() {
        let b_part = last_leg_expansion(mb);
        if b_part.is_zero() {
            continue;
        }
        let reversed: Vec<BasisIndex> = tuple.iter().rev().copied().collect();
        let Some(ma) = ga.component(&reversed) else { continue };
        let a_part = first_leg_expansion(ma);
        if a_part.is_zero() {
            continue;
        }
        acc += a_part.multiply(&b_part, max_degree)?.trace();
    }
    Ok(acc)
}

/// `(id ⊗ τ^{⊗p})`: keeps blocks whose trailing legs are all scalar.
fn first_leg_expansion(m: &MultiKernel) -> ChaosExpansion {
    let mut f = ChaosExpansion::zero();
    for (degrees, k) in m.blocks() {
        if degrees[1..].iter().all(|&d| d == 0) {
            f.add_component(k);
        }
    }
    f
}

/// `(τ^{⊗p} ⊗ id)`: keeps blocks whose leading legs are all scalar.
fn last_leg_expansion(m: &MultiKernel) -> ChaosExpansion {
    let mut f = ChaosExpansion::zero();
    let arity = m.arity();
    for (degrees, k) in m.blocks() {
        if degrees[..arity - 1].iter().all(|&d| d == 0) {
            f.add_component(k);
        }
    }
    f
}

/// Sobolev–Wigner seminorm `‖∇ᵏF‖²` (plain) or `‖DᵏF‖²` (symmetrized).
///
/// The symmetrized seminorm carries a single factor `k!`, which is what the
/// falling-factorial chaotic characterization
/// `‖DᵏF‖² = Σₙ n(n−1)⋯(n−k+1)·‖fₙ‖²` demands.
pub fn sobolev_seminorm(f: &ChaosExpansion, k: usize, symmetrized: bool) -> f64 {
    let base = gradient_or_identity(f, k).norm_sqr();
    if symmetrized {
        factorial(k) * base
    } else {
        base
    }
}

/// Higher-order Leibniz expansion of `∇ⁿ(FG)`:
///
/// `Σ_{k=0}^n (id^{⊗k} ⊗ m₁ ⊗ id^{⊗(n−k)})(∇ᵏF ⊗ ∇^{n−k}G)`
///
/// where `m₁` multiplies the two adjacent legs with the product formula.
pub fn leibniz_gradient(
    f: &ChaosExpansion,
    g: &ChaosExpansion,
    n: usize,
    max_degree: usize,
) -> Result<Gradient, MalliavinError> {
    let mut out = Gradient::zero(n);
    for k in 0..=n {
        let gf = gradient_or_identity(f, k);
        let gg = gradient_or_identity(g, n - k);
        for (ta, ma) in gf.components() {
            for (tb, mb) in gg.components() {
                let mut tuple = Vec::with_capacity(n);
                tuple.extend_from_slice(ta);
                tuple.extend_from_slice(tb);
                let merged = ma.tensor(mb).multiply_adjacent_legs(k, max_degree)?;
                out.add_component(&tuple, &merged);
            }
        }
    }
    Ok(out)
}

/// Applies `e^{−extra·t}·P_t^{⊗arity}` to a gradient, combining all
/// exponents into a single exponential per block so commutation identities
/// hold without rounding drift.
pub fn ou_on_gradient(g: &Gradient, t: f64, extra: usize) -> Gradient {
    assert!(t >= 0.0, "OU semigroup needs t >= 0");
    let mut out = Gradient::zero(g.order());
    for (tuple, m) in g.components() {
        let mut nm = MultiKernel::zero(m.arity());
        for (degrees, kernel) in m.blocks() {
            let weight = (-((extra + degrees.iter().sum::<usize>()) as f64) * t).exp();
            nm.add_block(degrees, &kernel.scale(Coeff::new(weight, 0.0)));
        }
        out.add_component(tuple, &nm);
    }
    out
}

/// Right-hand side of the Heisenberg commutation relation
/// `∇_t δ(U) = U_t + δ_s(∇̃_t U_s)` for an order-1 field `U`, with
/// `∇̃_t(A ⊗ B) = ∇_t A ⊗ B + A ⊗ ∇_t B` acting on both legs.
///
/// Splitting a leg leaves a three-legged object in which the original
/// insertion gap of `U` sits either right of the split (left-leg terms) or
/// left of it (right-leg terms); the inner divergence re-integrates across
/// that gap, leaving the derivative split exposed as the output biprocess.
pub fn heisenberg_rhs(u: &Gradient, max_degree: usize) -> Result<Gradient, MalliavinError> {
    assert_eq!(u.order(), 1, "the Heisenberg relation is about biprocesses");
    let mut out = u.clone();
    for (tuple, m) in u.components() {
        let j = tuple[0];
        for (degrees, kernel) in m.blocks() {
            let (n, mm) = (degrees[0], degrees[1]);
            for (idx, c) in kernel.iter() {
                let (left, right) = idx.split_at(n);
                // derivative hits the left leg
                for q in 0..n {
                    let t_index = left[q];
                    let x = Kernel::elementary(&left[..q]);
                    let mut tail: Vec<BasisIndex> = left[q + 1..].to_vec();
                    tail.extend_from_slice(right);
                    let inner_kernel =
                        Kernel::from_entries(tail.len(), [(tail, c)]).expect("lengths");
                    let mut single = Gradient::zero(1);
                    single.add_component(
                        &[j],
                        &MultiKernel::from_block(vec![n - 1 - q, mm], inner_kernel),
                    );
                    let d = divergence_adjoint(&single, max_degree)?;
                    let mut nm = MultiKernel::zero(2);
                    for (dn, dk) in d.components() {
                        nm.add_block(&[q, dn], &x.tensor(dk));
                    }
                    out.add_component(&[t_index], &nm);
                }
                // derivative hits the right leg
                for q in 0..mm {
                    let t_index = right[q];
                    let z = Kernel::elementary(&right[q + 1..]);
                    let mut head: Vec<BasisIndex> = left.to_vec();
                    head.extend_from_slice(&right[..q]);
                    let inner_kernel =
                        Kernel::from_entries(head.len(), [(head, c)]).expect("lengths");
                    let mut single = Gradient::zero(1);
                    single.add_component(
                        &[j],
                        &MultiKernel::from_block(vec![n, q], inner_kernel),
                    );
                    let d = divergence_adjoint(&single, max_degree)?;
                    let mut nm = MultiKernel::zero(2);
                    for (dn, dk) in d.components() {
                        nm.add_block(&[dn, mm - 1 - q], &dk.tensor(&z));
                    }
                    out.add_component(&[t_index], &nm);
                }
            }
        }
    }
    Ok(out)
}

/// Multiplies a multikernel leg by a functional: `side = Left` computes
/// `F·(… leg …)`, `side = Right` computes `(… leg …)·F`, in both cases via
/// an outer tensor followed by the adjacent-leg product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

pub fn multiply_leg(
    m: &MultiKernel,
    leg: usize,
    f: &ChaosExpansion,
    side: Side,
    max_degree: usize,
) -> Result<MultiKernel, MalliavinError> {
    let mf = expansion_as_multikernel(f);
    // splice the functional next to the leg, then merge
    let mut widened = MultiKernel::zero(m.arity() + 1);
    for (degrees, k) in m.blocks() {
        for (df, kf) in mf.blocks() {
            let offset: usize = degrees[..leg].iter().sum();
            let mut nd = degrees.to_vec();
            let insert_at = match side {
                Side::Left => leg,
                Side::Right => leg + 1,
            };
            nd.insert(insert_at, df[0]);
            // build the joint kernel with f's slots spliced at the leg edge
            let split = match side {
                Side::Left => offset,
                Side::Right => offset + degrees[leg],
            };
            let mut joint = Kernel::zero(k.order() + kf.order());
            for (idx, c) in k.iter() {
                for (fidx, fc) in kf.iter() {
                    let mut tuple = Vec::with_capacity(idx.len() + fidx.len());
                    tuple.extend_from_slice(&idx[..split]);
                    tuple.extend_from_slice(fidx);
                    tuple.extend_from_slice(&idx[split..]);
                    joint.add_entry(&tuple, c * fc);
                }
            }
            widened.add_block(&nd, &joint);
        }
    }
    let merge_at = match side {
        Side::Left => leg,
        Side::Right => leg,
    };
    Ok(widened.multiply_adjacent_legs(merge_at, max_degree)?)
}
