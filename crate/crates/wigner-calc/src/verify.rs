//! Identity verification harness: seeded random suites over the whole
//! algebra, with machine-readable reports.
//!
//! Every check draws its instances from a ChaCha stream keyed by the
//! configured seed and the check id, so a report is a pure function of its
//! [`SuiteConfig`] (timings aside). Tolerances of the strict checks are
//! pinned in the checks themselves; `tolerance` configures the generic
//! cross-validation bound (default `1e-10`).

use std::collections::BTreeSet;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chaos::{chebyshev_eval, ChaosExpansion, SpectralMode};
use crate::fock;
use crate::gue::{self, GueConfig};
use crate::kernel::{Coeff, Kernel};
use crate::malliavin as mal;
use crate::oracle;
use crate::sample;
use crate::serialize;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("max degree {max_degree} exceeds the Fock truncation level {fock_level}")]
    BudgetMismatch { max_degree: usize, fock_level: usize },
    #[error("basis size must be at least 2, got {0}")]
    BasisTooSmall(u32),
}

/// Knobs of one verification run.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    /// Orthonormal basis size `d` for sampled kernels.
    #[serde(default = "defaults::basis_size")]
    pub basis_size: u32,
    /// Chaos degree budget `D` for sampled functionals.
    #[serde(default = "defaults::max_degree")]
    pub max_degree: usize,
    /// Fock truncation level `L`.
    #[serde(default = "defaults::fock_level")]
    pub fock_level: usize,
    /// Generic cross-validation tolerance.
    #[serde(default = "defaults::tolerance")]
    pub tolerance: f64,
    #[serde(default = "defaults::seed")]
    pub seed: u64,
    /// Suite selectors; empty or `["all"]` runs everything.
    #[serde(default)]
    pub suites: Vec<String>,
    /// GUE matrix dimension `N`.
    #[serde(default = "defaults::gue_dim")]
    pub gue_dim: usize,
    /// GUE Monte-Carlo sample count `M`.
    #[serde(default = "defaults::gue_samples")]
    pub gue_samples: usize,
    /// Time-block width Δ of the basis reading `e_i ↔ Δ^{-1/2}·1_{[iΔ,(i+1)Δ)}`;
    /// metadata echoed into reports (the algebra only uses orthonormality).
    #[serde(default = "defaults::time_block")]
    pub time_block: f64,
}

mod defaults {
    pub fn basis_size() -> u32 {
        6
    }
    pub fn max_degree() -> usize {
        5
    }
    pub fn fock_level() -> usize {
        10
    }
    pub fn tolerance() -> f64 {
        1e-10
    }
    pub fn seed() -> u64 {
        42
    }
    pub fn gue_dim() -> usize {
        300
    }
    pub fn gue_samples() -> usize {
        200
    }
    pub fn time_block() -> f64 {
        1.0
    }
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            basis_size: defaults::basis_size(),
            max_degree: defaults::max_degree(),
            fock_level: defaults::fock_level(),
            tolerance: defaults::tolerance(),
            seed: defaults::seed(),
            suites: Vec::new(),
            gue_dim: defaults::gue_dim(),
            gue_samples: defaults::gue_samples(),
            time_block: defaults::time_block(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FailureRecord {
    pub message: String,
    /// Serialized offending inputs, when the check can name them.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inputs: Option<serde_json::Value>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckRecord {
    pub suite: String,
    pub id: String,
    /// Human name of the identity the check exercises.
    pub anchor: String,
    pub status: CheckStatus,
    pub max_residual: f64,
    pub elapsed_ms: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<FailureRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub config: SuiteConfig,
    pub checks: Vec<CheckRecord>,
    pub summary: Summary,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }
}

/// Outcome of one check body: the worst residual seen, and a failure record
/// if any instance broke its bound.
pub struct CheckOutcome {
    pub max_residual: f64,
    pub failure: Option<FailureRecord>,
}

impl CheckOutcome {
    fn new(max_residual: f64, failure: Option<FailureRecord>) -> Self {
        CheckOutcome { max_residual, failure }
    }
}

/// A residual accumulator that keeps the first offending instance.
struct Residuals {
    bound: f64,
    max: f64,
    failure: Option<FailureRecord>,
}

impl Residuals {
    fn new(bound: f64) -> Self {
        Residuals { bound, max: 0.0, failure: None }
    }

    fn push(&mut self, residual: f64, describe: impl FnOnce() -> FailureRecord) {
        if residual.is_nan() {
            if self.failure.is_none() {
                self.failure = Some(describe());
            }
            self.max = f64::NAN;
            return;
        }
        self.max = self.max.max(residual);
        if residual > self.bound && self.failure.is_none() {
            self.failure = Some(describe());
        }
    }

    fn push_plain(&mut self, residual: f64, message: &str) {
        self.push(residual, || FailureRecord { message: message.to_string(), inputs: None });
    }

    fn outcome(self) -> CheckOutcome {
        CheckOutcome::new(self.max, self.failure)
    }
}

fn chaos_inputs(pairs: &[(&str, &ChaosExpansion)]) -> Option<serde_json::Value> {
    let mut map = serde_json::Map::new();
    for (name, f) in pairs {
        map.insert(
            name.to_string(),
            serde_json::to_value(serialize::chaos_records(f)).ok()?,
        );
    }
    Some(serde_json::Value::Object(map))
}

/// Stable per-check stream: the seed is offset by a hash of the check id so
/// selecting a subset of suites never changes another check's instances.
fn check_rng(cfg: &SuiteConfig, id: &str) -> rand_chacha::ChaCha12Rng {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in id.bytes() {
        h = (h ^ b as u64).wrapping_mul(0x100000001b3);
    }
    sample::rng(cfg.seed ^ h)
}

// ---------------------------------------------------------------------------
// checks
// ---------------------------------------------------------------------------

fn check_wigner_ito_isometry(cfg: &SuiteConfig) -> CheckOutcome {
    let mut rng = check_rng(cfg, "isometry.wigner-ito");
    let mut res = Residuals::new(1e-12);
    for _ in 0..200 {
        let n = rand::Rng::gen_range(&mut rng, 0..=cfg.max_degree);
        let m = rand::Rng::gen_range(&mut rng, 0..=cfg.max_degree);
        let f = sample::kernel(&mut rng, n, cfg.basis_size, 0.3);
        let g = sample::kernel(&mut rng, m, cfg.basis_size, 0.3);
        let fi = ChaosExpansion::from_kernel(f.clone());
        let gi = ChaosExpansion::from_kernel(g.clone());
        let lhs = fi.adjoint().multiply(&gi, n + m).expect("budget n+m").trace();
        let rhs = if n == m { g.inner(&f) } else { Coeff::default() };
        res.push((lhs - rhs).norm(), || FailureRecord {
            message: format!("trace route {lhs} vs inner-product route {rhs}"),
            inputs: chaos_inputs(&[("f", &fi), ("g", &gi)]),
        });
    }
    res.outcome()
}

fn check_product_fock_moments(cfg: &SuiteConfig) -> CheckOutcome {
    let mut rng = check_rng(cfg, "product.fock-moments");
    let space = fock::FockSpace::new(cfg.basis_size, cfg.fock_level);
    let mut res = Residuals::new(cfg.tolerance);
    for _ in 0..100 {
        let f = sample::chaos(&mut rng, 2.min(cfg.max_degree), cfg.basis_size, 0.3);
        let g = sample::chaos(&mut rng, 3.min(cfg.max_degree), cfg.basis_size, 0.3);
        let budget = f.degree() + g.degree();
        let product_trace = f.multiply(&g, budget).expect("budget").trace();
        let vg = fock::apply_chaos(&g, &fock::FockVector::vacuum(), space);
        let vfg = fock::apply_chaos(&f, &vg, space);
        let vacuum = vfg.get(&[]);
        res.push((product_trace - vacuum).norm(), || FailureRecord {
            message: format!("algebra trace {product_trace} vs Fock vacuum moment {vacuum}"),
            inputs: chaos_inputs(&[("f", &f), ("g", &g)]),
        });
    }
    res.outcome()
}

fn check_product_nc_words(cfg: &SuiteConfig) -> CheckOutcome {
    let mut rng = check_rng(cfg, "product.nc-words");
    let mut res = Residuals::new(cfg.tolerance);
    for _ in 0..40 {
        let len = rand::Rng::gen_range(&mut rng, 1..=10usize);
        let word = sample::direction_word(&mut rng, len, cfg.basis_size.min(4));
        let via_chaos = ChaosExpansion::word_moment(&word, len).expect("length budget");
        let closed = oracle::wick_moment(&word).expect("order-1 letters");
        let recursive = oracle::wick_recursive(&word).expect("order-1 letters");
        let r = (via_chaos - closed).norm().max((closed - recursive).norm());
        res.push_plain(r, &format!("word length {len}: {via_chaos} vs {closed} vs {recursive}"));
    }
    res.outcome()
}

fn check_chebyshev_tower(cfg: &SuiteConfig) -> CheckOutcome {
    let mut res = Residuals::new(0.0);
    let e = Kernel::basis_vector(0);
    for p in 1..=8usize {
        let up = chebyshev_eval(p, &e).expect("unit direction");
        let expected = ChaosExpansion::from_kernel(Kernel::elementary(&vec![0; p]));
        res.push_plain(up.sub(&expected).norm(), &format!("U_{p} differs from I_{p}(e^⊗{p})"));
    }
    let _ = cfg;
    res.outcome()
}

fn check_stroock_round_trip(cfg: &SuiteConfig) -> CheckOutcome {
    let mut rng = check_rng(cfg, "stroock.round-trip");
    let mut res = Residuals::new(1e-12);
    for _ in 0..100 {
        let f = sample::chaos(&mut rng, cfg.max_degree, cfg.basis_size, 0.3);
        let mut rebuilt = ChaosExpansion::zero();
        let mut sym_residual = 0.0f64;
        for n in 0..=f.degree() {
            let plain = mal::stroock_kernel(&f, n);
            let sym = mal::stroock_kernel_symmetrized(&f, n);
            sym_residual = sym_residual.max(plain.sub(&sym).norm());
            rebuilt.add_component(&plain);
        }
        let r = rebuilt.sub(&f).norm().max(sym_residual);
        res.push(r, || FailureRecord {
            message: "Stroock kernels do not reassemble the functional".to_string(),
            inputs: chaos_inputs(&[("f", &f)]),
        });
    }
    res.outcome()
}

fn check_divergence_coherence(cfg: &SuiteConfig) -> CheckOutcome {
    let mut rng = check_rng(cfg, "malliavin.divergence-coherence");
    let d = cfg.basis_size.min(3);
    let mut res = Residuals::new(cfg.tolerance);
    // δᵖ(f·1^{⊗(p+1)}) = I_p(f) for p ≤ 4
    for p in 1..=4usize {
        let f = sample::nonzero_kernel(&mut rng, p, d, 0.4);
        let via_adjoint =
            mal::divergence_adjoint(&mal::deterministic_field(&f), 8).expect("budget");
        let r = via_adjoint.sub(&mal::divergence_deterministic(&f)).norm();
        res.push_plain(r, &format!("deterministic divergence at order {p}"));
    }
    // elementary Voiculescu formula matches the adjoint
    for _ in 0..20 {
        let a = sample::chaos(&mut rng, 2, d, 0.5);
        let b = sample::chaos(&mut rng, 2, d, 0.5);
        let h = sample::real_direction(&mut rng, d);
        let via_formula = mal::divergence_elementary(&a, &b, &h, 10).expect("budget");
        let mut field = mal::Gradient::zero(1);
        let (ma, mb) =
            (mal::expansion_as_multikernel(&a), mal::expansion_as_multikernel(&b));
        for (idx, hc) in h.iter() {
            field.add_component(&[idx[0]], &ma.tensor(&mb).scale(hc));
        }
        let via_adjoint = mal::divergence_adjoint(&field, 10).expect("budget");
        res.push(via_formula.sub(&via_adjoint).norm(), || FailureRecord {
            message: "Voiculescu formula disagrees with the adjoint divergence".to_string(),
            inputs: chaos_inputs(&[("a", &a), ("b", &b)]),
        });
    }
    // duality ⟨∇ᵖF, U⟩ = ⟨F, δᵖU⟩
    for p in 1..=3usize {
        for _ in 0..10 {
            let f = sample::chaos(&mut rng, 4, d, 0.4);
            let u = sample::gradient_field(&mut rng, p, d, 2, 0.4);
            let lhs = mal::gradient_or_identity(&f, p).inner(&u);
            let rhs = f.inner(&mal::divergence_adjoint(&u, 12).expect("budget"));
            res.push_plain((lhs - rhs).norm(), &format!("duality at order {p}"));
        }
    }
    res.outcome()
}

fn check_sobolev_characterization(cfg: &SuiteConfig) -> CheckOutcome {
    let mut rng = check_rng(cfg, "malliavin.sobolev");
    let mut res = Residuals::new(1e-12);
    for _ in 0..30 {
        let f = sample::chaos(&mut rng, cfg.max_degree, cfg.basis_size, 0.3);
        for p in 1..=4usize {
            let computed = mal::sobolev_seminorm(&f, p, true);
            let closed: f64 = f
                .components()
                .map(|(n, k)| {
                    let falling: f64 = (0..p).map(|i| n.saturating_sub(i) as f64).product();
                    falling * k.norm_sqr()
                })
                .sum();
            let r = (computed - closed).abs() / closed.max(1.0);
            res.push(r, || FailureRecord {
                message: format!("‖D^{p}F‖² = {computed}, falling factorial form {closed}"),
                inputs: chaos_inputs(&[("f", &f)]),
            });
        }
    }
    // vanishing ∇ᵖ forces degree < p
    for p in 1..=4usize {
        let low = sample::chaos(&mut rng, p - 1, cfg.basis_size, 0.5);
        let vanish = mal::gradient_or_identity(&low, p).norm();
        res.push_plain(vanish, &format!("∇^{p} on degrees below {p}"));
        let high = sample::homogeneous(&mut rng, p, cfg.basis_size.min(4), 0.5);
        if mal::gradient_or_identity(&high, p).is_zero() {
            res.push_plain(f64::INFINITY, &format!("∇^{p} vanished on a degree-{p} chaos"));
        }
    }
    res.outcome()
}

fn check_ou_commutation(cfg: &SuiteConfig) -> CheckOutcome {
    let mut rng = check_rng(cfg, "commutators.ou-gradient");
    let mut res = Residuals::new(0.0);
    for k in 1..=3usize {
        for _ in 0..10 {
            let f = sample::chaos(&mut rng, cfg.max_degree, cfg.basis_size, 0.3);
            for &t in &[0.25, 1.0] {
                let lhs = mal::gradient_or_identity(&f.apply_spectral(SpectralMode::Ou(t)), k);
                let rhs = mal::ou_on_gradient(&mal::gradient_or_identity(&f, k), t, k);
                res.push(lhs.sub(&rhs).norm(), || FailureRecord {
                    message: format!("∇^{k}P_t vs e^(-{k}t)P_t^⊗ ∇^{k} at t = {t}"),
                    inputs: chaos_inputs(&[("f", &f)]),
                });
            }
        }
    }
    res.outcome()
}

fn check_heisenberg(cfg: &SuiteConfig) -> CheckOutcome {
    let mut rng = check_rng(cfg, "commutators.heisenberg");
    let d = cfg.basis_size.min(3);
    let mut res = Residuals::new(cfg.tolerance);
    for _ in 0..20 {
        let u = sample::gradient_field(&mut rng, 1, d, 2, 0.5);
        let lhs =
            mal::gradient_or_identity(&mal::divergence_adjoint(&u, 10).expect("budget"), 1);
        let rhs = mal::heisenberg_rhs(&u, 10).expect("budget");
        res.push_plain(lhs.sub(&rhs).norm(), "∇δ(U) vs U + δ(∇U)");
    }
    res.outcome()
}

fn check_conditional_expectation_commutation(cfg: &SuiteConfig) -> CheckOutcome {
    let mut rng = check_rng(cfg, "commutators.conditional-expectation");
    let mut res = Residuals::new(0.0);
    let block: BTreeSet<u32> = (0..cfg.basis_size).filter(|i| i % 2 == 0).collect();
    for _ in 0..20 {
        let f = sample::chaos(&mut rng, cfg.max_degree.min(4), cfg.basis_size, 0.3);
        let restricted = f.conditional_expectation(&block);
        let gf = mal::gradient_or_identity(&f, 1);
        let ge = mal::gradient_or_identity(&restricted, 1);
        for j in 0..cfg.basis_size {
            let lhs = ge.component(&[j]);
            let residual = if block.contains(&j) {
                let mut expected = crate::kernel::MultiKernel::zero(2);
                if let Some(m) = gf.component(&[j]) {
                    for (degrees, k) in m.blocks() {
                        let kept = Kernel::from_entries(
                            k.order(),
                            k.iter().filter_map(|(idx, c)| {
                                idx.iter()
                                    .all(|i| block.contains(i))
                                    .then(|| (idx.to_vec(), c))
                            }),
                        )
                        .expect("orders kept");
                        expected.add_block(degrees, &kept);
                    }
                }
                match lhs {
                    Some(m) => m.sub(&expected).norm(),
                    None => expected.norm(),
                }
            } else {
                lhs.map(|m| m.norm()).unwrap_or(0.0)
            };
            res.push(residual, || FailureRecord {
                message: format!("∇_{j} τ(F|block) vs (E⊗E)∇_{j}F·1_block({j})"),
                inputs: chaos_inputs(&[("f", &f)]),
            });
        }
    }
    res.outcome()
}

fn check_rotation_invariance(cfg: &SuiteConfig) -> CheckOutcome {
    let mut rng = check_rng(cfg, "commutators.rotation");
    let d = cfg.basis_size.min(3);
    let mut res = Residuals::new(cfg.tolerance);
    for _ in 0..50 {
        let len = rand::Rng::gen_range(&mut rng, 1..=6usize);
        let word = sample::direction_word(&mut rng, len, d);
        let expected = oracle::wick_moment(&word).expect("letters");
        for &t in &[0.3, 1.2] {
            // rotate every letter, multiply out over the doubled basis,
            // and evaluate both by the product formula and the Wick oracle
            let mut rotated = ChaosExpansion::one();
            let mut rotated_letters = Vec::new();
            for h in &word {
                let s = ChaosExpansion::semicircular(h).rotate_pair(t, d).expect("block");
                rotated_letters.push(s.component(1));
                rotated = rotated.multiply(&s, len).expect("length budget");
            }
            let via_chaos = rotated.trace();
            let via_wick = oracle::wick_moment(&rotated_letters).expect("letters");
            let r = (via_chaos - expected).norm().max((via_wick - expected).norm());
            res.push_plain(
                r,
                &format!("rotated word of length {len} at t = {t}: {via_chaos} vs {expected}"),
            );
        }
    }
    res.outcome()
}

fn check_clark_ocone(cfg: &SuiteConfig) -> CheckOutcome {
    let mut rng = check_rng(cfg, "clark-ocone.reconstruction");
    let mut res = Residuals::new(1e-12);
    for _ in 0..50 {
        let f = sample::increasing_chaos(&mut rng, cfg.max_degree.min(4), cfg.basis_size, 0.4);
        let (mean, field) = mal::clark_ocone(&f).expect("increasing support");
        let rebuilt = ChaosExpansion::scalar(mean)
            .add(&mal::ito_integral(&field, cfg.max_degree.max(4)).expect("budget"));
        res.push(rebuilt.sub(&f).norm(), || FailureRecord {
            message: "Clark-Ocone reconstruction drifted".to_string(),
            inputs: chaos_inputs(&[("f", &f)]),
        });
    }
    res.outcome()
}

fn check_variance_identities(cfg: &SuiteConfig) -> CheckOutcome {
    let mut rng = check_rng(cfg, "variance.identities");
    let mut res = Residuals::new(cfg.tolerance);
    // free Poincaré on 200 functionals (gap may not be negative)
    for _ in 0..200 {
        let f = sample::chaos(&mut rng, cfg.max_degree, cfg.basis_size, 0.3);
        let gap = mal::sobolev_seminorm(&f, 1, false) - f.centered().norm_sqr();
        res.push(((-gap).max(0.0) - 1e-12).max(0.0), || FailureRecord {
            message: format!("Poincaré gap {gap} is negative"),
            inputs: chaos_inputs(&[("f", &f)]),
        });
    }
    // covariance through the OU semigroup
    for _ in 0..50 {
        let f = sample::chaos(&mut rng, 3.min(cfg.max_degree), cfg.basis_size, 0.3);
        let g = sample::chaos(&mut rng, 3.min(cfg.max_degree), cfg.basis_size, 0.3);
        let direct =
            f.multiply(&g, 2 * cfg.max_degree).expect("budget").trace() - f.trace() * g.trace();
        let via_ou = mal::covariance_ou(&f, &g);
        res.push((direct - via_ou).norm(), || FailureRecord {
            message: format!("cov via OU {via_ou} vs direct {direct}"),
            inputs: chaos_inputs(&[("f", &f), ("g", &g)]),
        });
    }
    // variance as the Stroock series, at 1e-12
    for _ in 0..50 {
        let f = sample::chaos(&mut rng, cfg.max_degree, cfg.basis_size, 0.3);
        let r = (mal::variance_stroock(&f) - f.centered().norm_sqr()).abs()
            / f.centered().norm_sqr().max(1.0);
        if r > 1e-12 {
            res.push(r, || FailureRecord {
                message: "Stroock variance series drifted".to_string(),
                inputs: chaos_inputs(&[("f", &f)]),
            });
        } else {
            res.push_plain(r, "");
        }
    }
    res.outcome()
}

fn check_dilation_limit(cfg: &SuiteConfig) -> CheckOutcome {
    let mut rng = check_rng(cfg, "variance.dilation-limit");
    let mut res = Residuals::new(0.0);
    let eps = 1e-4;
    for _ in 0..50 {
        let f = sample::chaos(&mut rng, cfg.max_degree, cfg.basis_size, 0.3);
        let lf = f.apply_spectral(SpectralMode::Generator);
        let quotient = f
            .dilate(Coeff::new(1.0 - eps, 0.0))
            .sub(&f)
            .scale(Coeff::new(1.0 / eps, 0.0));
        // |((1-ε)^n - 1)/ε + n| ≤ ε(2^n - 1 - n) per degree, so the
        // residual is bounded by ε·C(F) with C(F)² = Σ (2^n - 1 - n)²‖f_n‖²
        let taylor_sq: f64 = f
            .components()
            .map(|(n, k)| (2f64.powi(n as i32) - 1.0 - n as f64).powi(2) * k.norm_sqr())
            .sum();
        let slack = quotient.sub(&lf).norm() - taylor_sq.sqrt() * eps;
        res.push(slack.max(0.0), || FailureRecord {
            message: format!("dilation quotient overshoots the Taylor budget by {slack}"),
            inputs: chaos_inputs(&[("f", &f)]),
        });
    }
    res.outcome()
}

fn check_cebron_formula(cfg: &SuiteConfig) -> CheckOutcome {
    let mut rng = check_rng(cfg, "cebron.trace-formula");
    let d = cfg.basis_size.min(4);
    let mut res = Residuals::new(cfg.tolerance);
    for p in 1..=3usize {
        for _ in 0..10 {
            let a = sample::homogeneous(&mut rng, 3, d, 0.4);
            let b = sample::homogeneous(&mut rng, 3, d, 0.4);
            let lhs = mal::cebron_product(&a, &b, p, 8).expect("degree hypothesis");
            let rhs = a.multiply(&b, 8).expect("budget").trace();
            res.push((lhs - rhs).norm(), || FailureRecord {
                message: format!("order-{p} trace formula {lhs} vs τ(AB) = {rhs}"),
                inputs: chaos_inputs(&[("a", &a), ("b", &b)]),
            });
        }
    }
    res.outcome()
}

fn check_fock_commutator(cfg: &SuiteConfig) -> CheckOutcome {
    let mut rng = check_rng(cfg, "fock.commutator-rstar");
    let space = fock::FockSpace::new(3, 8);
    let mut res = Residuals::new(cfg.tolerance);
    for _ in 0..10 {
        let f = sample::chaos(&mut rng, 3, 3, 0.4);
        let h = sample::real_direction(&mut rng, 3);
        let lhs = fock::commutator_rstar(&h, &f, space).expect("headroom");
        let paired =
            mal::pair_gradient(&mal::gradient_or_identity(&f, 1), &[&h]).expect("one direction");
        let rhs = fock::sharp_vacuum_projection(&paired, space).expect("small dims");
        let exact = space.level - f.degree();
        let diff = lhs
            .restrict_columns(exact)
            .sub(&rhs.restrict_columns(exact))
            .frobenius_norm();
        res.push(diff, || FailureRecord {
            message: "[r*(h), F] differs from ⟨∇F, h⟩ ♯ |Ω⟩⟨Ω|".to_string(),
            inputs: chaos_inputs(&[("f", &f)]),
        });
    }
    res.outcome()
}

fn check_haagerup_fock(cfg: &SuiteConfig) -> CheckOutcome {
    let mut rng = check_rng(cfg, "fock.haagerup");
    let space = fock::FockSpace::new(3, 7);
    let mut res = Residuals::new(1e-9);
    for i in 0..50 {
        let n = 1 + i % 4;
        let f = sample::nonzero_kernel(&mut rng, n, 3, 0.3);
        let x = fock::chaos_to_operator(&ChaosExpansion::from_kernel(f.clone()), space, Some(0))
            .expect("degree fits");
        let norm = x.operator_norm(60);
        let excess = norm - (n as f64 + 1.0) * f.norm();
        res.push(excess.max(0.0), || FailureRecord {
            message: format!(
                "truncated norm {norm} above the bound {}",
                (n as f64 + 1.0) * f.norm()
            ),
            inputs: chaos_inputs(&[("f", &ChaosExpansion::from_kernel(f.clone()))]),
        });
    }
    res.outcome()
}

fn check_hypercontractivity(cfg: &SuiteConfig) -> CheckOutcome {
    let mut rng = check_rng(cfg, "fock.hypercontractivity");
    let space = fock::FockSpace::new(2, 12);
    let t = 0.5 * 3f64.ln();
    let mut res = Residuals::new(1e-9);
    for _ in 0..50 {
        let f = sample::chaos(&mut rng, 3, 2, 0.4);
        let ptf = f.apply_spectral(SpectralMode::Ou(t));
        let p4 = fock::vacuum_lp_norm(&ptf, 4, space).expect("headroom");
        res.push((p4 - f.norm()).max(0.0), || FailureRecord {
            message: format!("‖P_tF‖₄ = {p4} above ‖F‖₂ = {}", f.norm()),
            inputs: chaos_inputs(&[("f", &f)]),
        });
        let f4 = fock::vacuum_lp_norm(&f, 4, space).expect("headroom");
        for n in 0..=f.degree() {
            let pn4 = fock::vacuum_lp_norm(&f.project(n), 4, space).expect("headroom");
            let bound = 3f64.powf(n as f64 / 2.0) * f4;
            res.push((pn4 - bound).max(0.0), || FailureRecord {
                message: format!("‖π_{n}F‖₄ = {pn4} above 3^({n}/2)‖F‖₄ = {bound}"),
                inputs: chaos_inputs(&[("f", &f)]),
            });
        }
    }
    res.outcome()
}

fn check_gue_haagerup(cfg: &SuiteConfig) -> CheckOutcome {
    let mut rng = check_rng(cfg, "gue.haagerup-opnorm");
    let gcfg = GueConfig::new(cfg.gue_dim, 2, cfg.seed);
    let mut res = Residuals::new(0.0);
    for n in 1..=4usize {
        let f = sample::nonzero_kernel(&mut rng, n, 3, 0.3);
        let (est, stderr) =
            gue::estimate_opnorm(&ChaosExpansion::from_kernel(f.clone()), &gcfg, 30)
                .expect("order-1 letters");
        let bound = (n as f64 + 1.0) * f.norm() * 1.1;
        res.push((est - bound).max(0.0), || FailureRecord {
            message: format!("matrix-model norm {est} ± {stderr} above {bound}"),
            inputs: chaos_inputs(&[("f", &ChaosExpansion::from_kernel(f.clone()))]),
        });
    }
    res.outcome()
}

fn check_gue_trace_moments(cfg: &SuiteConfig) -> CheckOutcome {
    let gcfg = GueConfig::new(cfg.gue_dim.min(300), cfg.gue_samples, cfg.seed);
    let mut res = Residuals::new(0.0);
    let e0 = Kernel::basis_vector(0);
    for k in [1usize, 2] {
        let word = vec![e0.clone(); 2 * k];
        let (mean, stderr) = gue::estimate_word_trace(&word, &gcfg).expect("letters");
        let expected = oracle::catalan(k) as f64;
        let slack = (mean.re - expected).abs() - (3.0 * stderr + 0.01);
        res.push_plain(
            slack.max(0.0),
            &format!("τ(S^{}) estimate {} ± {stderr} vs Catalan {expected}", 2 * k, mean.re),
        );
    }
    // odd moments vanish within the band
    let word = vec![e0.clone(); 3];
    let (mean, stderr) = gue::estimate_word_trace(&word, &gcfg).expect("letters");
    res.push_plain(
        (mean.norm() - (3.0 * stderr + 0.01)).max(0.0),
        &format!("odd moment {} ± {stderr}", mean.re),
    );
    res.outcome()
}

// ---------------------------------------------------------------------------
// registry
// ---------------------------------------------------------------------------

pub struct CheckSpec {
    pub suite: &'static str,
    pub id: &'static str,
    pub anchor: &'static str,
    pub run: fn(&SuiteConfig) -> CheckOutcome,
}

/// Human names of the fourteen acceptance identities; every check anchors to
/// one of these, and a self-test asserts the two sets coincide.
pub const ACCEPTANCE_ANCHORS: [&str; 14] = [
    "Wigner-Ito isometry",
    "product formula vs oracles",
    "Chebyshev tower",
    "Stroock kernel recovery",
    "divergence coherence",
    "derivative commutation relations",
    "Clark-Ocone reconstruction",
    "variance identities",
    "Sobolev chaotic characterization",
    "Fock commutator lemma",
    "Haagerup operator norm bound",
    "hypercontractivity and projection continuity",
    "dilation derivative of the OU generator",
    "rotation automorphism invariance",
];

pub const CHECKS: &[CheckSpec] = &[
    CheckSpec {
        suite: "isometry",
        id: "isometry.wigner-ito",
        anchor: "Wigner-Ito isometry",
        run: check_wigner_ito_isometry,
    },
    CheckSpec {
        suite: "product",
        id: "product.fock-moments",
        anchor: "product formula vs oracles",
        run: check_product_fock_moments,
    },
    CheckSpec {
        suite: "product",
        id: "product.nc-words",
        anchor: "product formula vs oracles",
        run: check_product_nc_words,
    },
    CheckSpec {
        suite: "product",
        id: "product.chebyshev",
        anchor: "Chebyshev tower",
        run: check_chebyshev_tower,
    },
    CheckSpec {
        suite: "stroock",
        id: "stroock.round-trip",
        anchor: "Stroock kernel recovery",
        run: check_stroock_round_trip,
    },
    CheckSpec {
        suite: "malliavin",
        id: "malliavin.divergence-coherence",
        anchor: "divergence coherence",
        run: check_divergence_coherence,
    },
    CheckSpec {
        suite: "malliavin",
        id: "malliavin.sobolev",
        anchor: "Sobolev chaotic characterization",
        run: check_sobolev_characterization,
    },
    CheckSpec {
        suite: "commutators",
        id: "commutators.ou-gradient",
        anchor: "derivative commutation relations",
        run: check_ou_commutation,
    },
    CheckSpec {
        suite: "commutators",
        id: "commutators.heisenberg",
        anchor: "derivative commutation relations",
        run: check_heisenberg,
    },
    CheckSpec {
        suite: "commutators",
        id: "commutators.conditional-expectation",
        anchor: "derivative commutation relations",
        run: check_conditional_expectation_commutation,
    },
    CheckSpec {
        suite: "commutators",
        id: "commutators.rotation",
        anchor: "rotation automorphism invariance",
        run: check_rotation_invariance,
    },
    CheckSpec {
        suite: "clark-ocone",
        id: "clark-ocone.reconstruction",
        anchor: "Clark-Ocone reconstruction",
        run: check_clark_ocone,
    },
    CheckSpec {
        suite: "variance",
        id: "variance.identities",
        anchor: "variance identities",
        run: check_variance_identities,
    },
    CheckSpec {
        suite: "variance",
        id: "variance.dilation-limit",
        anchor: "dilation derivative of the OU generator",
        run: check_dilation_limit,
    },
    CheckSpec {
        suite: "cebron",
        id: "cebron.trace-formula",
        anchor: "variance identities",
        run: check_cebron_formula,
    },
    CheckSpec {
        suite: "fock",
        id: "fock.commutator-rstar",
        anchor: "Fock commutator lemma",
        run: check_fock_commutator,
    },
    CheckSpec {
        suite: "fock",
        id: "fock.haagerup",
        anchor: "Haagerup operator norm bound",
        run: check_haagerup_fock,
    },
    CheckSpec {
        suite: "fock",
        id: "fock.hypercontractivity",
        anchor: "hypercontractivity and projection continuity",
        run: check_hypercontractivity,
    },
    CheckSpec {
        suite: "gue",
        id: "gue.haagerup-opnorm",
        anchor: "Haagerup operator norm bound",
        run: check_gue_haagerup,
    },
    CheckSpec {
        suite: "gue",
        id: "gue.trace-moments",
        anchor: "product formula vs oracles",
        run: check_gue_trace_moments,
    },
];

/// Names of the registered suites, in execution order.
pub fn suite_names() -> Vec<&'static str> {
    let mut names = Vec::new();
    for check in CHECKS {
        if !names.contains(&check.suite) {
            names.push(check.suite);
        }
    }
    names
}

fn validate(cfg: &SuiteConfig) -> Result<Vec<&'static CheckSpec>, ConfigError> {
    if cfg.tolerance <= 0.0 {
        return Err(ConfigError::BadTolerance(cfg.tolerance));
    }
    if cfg.basis_size < 2 {
        return Err(ConfigError::BasisTooSmall(cfg.basis_size));
    }
    let known = suite_names();
    let run_all =
        cfg.suites.is_empty() || cfg.suites.iter().any(|s| s == "all");
    let mut selected: Vec<&str> = Vec::new();
    if run_all {
        selected.extend(&known);
    } else {
        for s in &cfg.suites {
            if !known.contains(&s.as_str()) {
                return Err(ConfigError::UnknownSuite(s.clone()));
            }
            selected.push(s);
        }
    }
    let needs_fock = selected.iter().any(|&s| s == "product" || s == "fock");
    if needs_fock && cfg.max_degree > cfg.fock_level {
        return Err(ConfigError::BudgetMismatch {
            max_degree: cfg.max_degree,
            fock_level: cfg.fock_level,
        });
    }
    Ok(CHECKS.iter().filter(|c| selected.contains(&c.suite)).collect())
}

/// Runs the selected suites and assembles the report. Checks execute in
/// registry order and draw independent random streams, so any subset of
/// suites reproduces exactly the records the full run would produce.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Report, ConfigError> {
    let selected = validate(cfg)?;
    let mut checks = Vec::with_capacity(selected.len());
    for spec in selected {
        let start = Instant::now();
        let outcome = (spec.run)(cfg);
        let elapsed_ms = start.elapsed().as_millis() as u64;
        let status =
            if outcome.failure.is_none() { CheckStatus::Pass } else { CheckStatus::Fail };
        checks.push(CheckRecord {
            suite: spec.suite.to_string(),
            id: spec.id.to_string(),
            anchor: spec.anchor.to_string(),
            status,
            max_residual: outcome.max_residual,
            elapsed_ms,
            failure: outcome.failure,
        });
    }
    checks.sort_by(|a, b| a.id.cmp(&b.id));
    let passed = checks.iter().filter(|c| c.status == CheckStatus::Pass).count();
    let summary = Summary { total: checks.len(), passed, failed: checks.len() - passed };
    Ok(Report { config: cfg.clone(), checks, summary })
}

/// Report serialization formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Table,
}

pub fn emit(report: &Report, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            serde_json::to_string_pretty(report).expect("report serializes")
        }
        ReportFormat::Table => {
            let mut out = String::new();
            let id_width = report
                .checks
                .iter()
                .map(|c| c.id.len())
                .max()
                .unwrap_or(5)
                .max("check".len());
            let anchor_width = report
                .checks
                .iter()
                .map(|c| c.anchor.len())
                .max()
                .unwrap_or(6)
                .max("anchor".len());
            out.push_str(&format!(
                "{:6} {:id_width$} {:anchor_width$} {:>12} {:>9}\n",
                "status", "check", "anchor", "residual", "ms"
            ));
            for c in &report.checks {
                let status = match c.status {
                    CheckStatus::Pass => "PASS",
                    CheckStatus::Fail => "FAIL",
                };
                out.push_str(&format!(
                    "{:6} {:id_width$} {:anchor_width$} {:>12.3e} {:>9}\n",
                    status, c.id, c.anchor, c.max_residual, c.elapsed_ms
                ));
            }
            out.push_str(&format!(
                "{} checks, {} passed, {} failed\n",
                report.summary.total, report.summary.passed, report.summary.failed
            ));
            out
        }
    }
}
