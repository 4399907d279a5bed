//! Seeded random instances for the verification suites and tests.
//!
//! Kernels are sparse with a configurable fill density (0.3 in the default
//! suite config) and coefficients drawn uniformly from the complex unit
//! disk, which exercises cross terms without dense blowup. Everything is
//! driven by a ChaCha stream so identical seeds give identical instances.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::chaos::ChaosExpansion;
use crate::kernel::{BasisIndex, Coeff, Kernel, MultiKernel};
use crate::malliavin::Gradient;

/// The crate-wide deterministic generator.
pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Uniform draw from the complex unit disk.
pub fn unit_disk(rng: &mut impl Rng) -> Coeff {
    let r: f64 = rng.gen::<f64>().sqrt();
    let theta: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
    Coeff::from_polar(r, theta)
}

fn all_tuples(order: usize, basis_size: u32) -> Vec<Vec<BasisIndex>> {
    let mut tuples = vec![Vec::new()];
    for _ in 0..order {
        tuples = tuples
            .into_iter()
            .flat_map(|t| {
                (0..basis_size).map(move |i| {
                    let mut n = t.clone();
                    n.push(i);
                    n
                })
            })
            .collect();
    }
    tuples
}

/// Sparse order-`order` kernel: each tuple is kept with probability
/// `density` and gets a unit-disk coefficient.
pub fn kernel(rng: &mut impl Rng, order: usize, basis_size: u32, density: f64) -> Kernel {
    let mut k = Kernel::zero(order);
    for tuple in all_tuples(order, basis_size) {
        if rng.gen::<f64>() < density {
            k.add_entry(&tuple, unit_disk(rng));
        }
    }
    k
}

/// Like [`kernel`] but guaranteed nonzero.
pub fn nonzero_kernel(rng: &mut impl Rng, order: usize, basis_size: u32, density: f64) -> Kernel {
    loop {
        let k = kernel(rng, order, basis_size, density);
        if !k.is_zero() {
            return k;
        }
    }
}

/// Random real order-1 kernel with entries in `[-1, 1]`.
pub fn real_direction(rng: &mut impl Rng, basis_size: u32) -> Kernel {
    loop {
        let mut k = Kernel::zero(1);
        for i in 0..basis_size {
            k.add_entry(&[i], Coeff::new(rng.gen::<f64>() * 2.0 - 1.0, 0.0));
        }
        if !k.is_zero() {
            return k;
        }
    }
}

/// Random real unit vector of `L²_ℝ(ℝ₊)` over the first `basis_size` basis
/// elements.
pub fn unit_direction(rng: &mut impl Rng, basis_size: u32) -> Kernel {
    let h = real_direction(rng, basis_size);
    h.scale(Coeff::new(1.0 / h.norm(), 0.0))
}

/// Random chaos expansion with components of every degree up to
/// `max_degree`.
pub fn chaos(rng: &mut impl Rng, max_degree: usize, basis_size: u32, density: f64) -> ChaosExpansion {
    let mut f = ChaosExpansion::zero();
    f.add_component(&Kernel::scalar(unit_disk(rng)));
    for n in 1..=max_degree {
        f.add_component(&kernel(rng, n, basis_size, density));
    }
    f
}

/// Random mean-zero homogeneous element of the degree-`n` chaos.
pub fn homogeneous(rng: &mut impl Rng, n: usize, basis_size: u32, density: f64) -> ChaosExpansion {
    ChaosExpansion::from_kernel(nonzero_kernel(rng, n, basis_size, density))
}

/// Random word of basis letters, as order-1 kernels.
pub fn basis_word(rng: &mut impl Rng, len: usize, basis_size: u32) -> Vec<Kernel> {
    (0..len).map(|_| Kernel::basis_vector(rng.gen_range(0..basis_size))).collect()
}

/// Random word of real directions.
pub fn direction_word(rng: &mut impl Rng, len: usize, basis_size: u32) -> Vec<Kernel> {
    (0..len).map(|_| real_direction(rng, basis_size)).collect()
}

/// Chaos expansion whose kernels are supported on strictly increasing index
/// tuples, the subclass on which the block Clark–Ocone representation is
/// exact.
pub fn increasing_chaos(
    rng: &mut impl Rng,
    max_degree: usize,
    basis_size: u32,
    density: f64,
) -> ChaosExpansion {
    let mut f = ChaosExpansion::zero();
    f.add_component(&Kernel::scalar(unit_disk(rng)));
    for n in 1..=max_degree.min(basis_size as usize) {
        let mut k = Kernel::zero(n);
        for tuple in all_tuples(n, basis_size) {
            if tuple.windows(2).all(|w| w[0] < w[1]) && rng.gen::<f64>() < density {
                k.add_entry(&tuple, unit_disk(rng));
            }
        }
        f.add_component(&k);
    }
    f
}

/// Random order-`p` gradient-shaped field: a handful of basis tuples, each
/// carrying a sparse multikernel of arity `p + 1`.
pub fn gradient_field(
    rng: &mut impl Rng,
    p: usize,
    basis_size: u32,
    max_block_degree: usize,
    density: f64,
) -> Gradient {
    let mut g = Gradient::zero(p);
    for tuple in all_tuples(p, basis_size) {
        if rng.gen::<f64>() >= density {
            continue;
        }
        let mut m = MultiKernel::zero(p + 1);
        for _ in 0..2 {
            let degrees: Vec<usize> =
                (0..=p).map(|_| rng.gen_range(0..=max_block_degree)).collect();
            let order = degrees.iter().sum::<usize>();
            let k = kernel(rng, order, basis_size, density);
            if !k.is_zero() {
                m.add_block(&degrees, &k);
            }
        }
        if !m.is_zero() {
            g.add_component(&tuple, &m);
        }
    }
    g
}
