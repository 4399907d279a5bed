//! Computer algebra for the semicircular (Wigner) space: finite chaos
//! expansions with the exact product formula, free Malliavin derivatives and
//! Skorokhod integrals of all orders, the Stroock kernel-recovery formula,
//! Clark–Ocone representation, and variance/commutation identities — cross
//! validated against three independent oracles: a truncated full Fock space
//! operator model, a non-crossing pair-partition moment calculator, and GUE
//! random-matrix Monte Carlo.
//!
//! Start with the runnable examples (`cargo run --example product_formula`,
//! `… --example stroock`, and friends), or run the whole identity
//! verification harness with the `wigner-calc` binary.

pub mod chaos;
pub mod fock;
pub mod gue;
pub mod kernel;
pub mod malliavin;
pub mod oracle;
pub mod sample;
pub mod serialize;
pub mod verify;

pub use chaos::{ChaosExpansion, ChaosError, SpectralMode};
pub use kernel::{BasisIndex, Coeff, Kernel, KernelError, MultiKernel};
pub use malliavin::{AdaptedBiprocess, Gradient, MalliavinError};
