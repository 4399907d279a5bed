//! GUE Monte-Carlo estimates: the random-matrix end of the oracle triangle.
//!
//! Independent normalized GUE matrices stand in for the semicircular family
//! `S(e₁), S(e₂), …`; mixed moments of such matrices converge to the
//! non-crossing pairing values as the dimension grows, with `O(1/N²)` bias
//! and `O(1/N)` fluctuations. Entries have variance `1/N`, so the limiting
//! spectral distribution is the standard semicircle and `τ(X²) → 1`.
//!
//! Sampling is deterministic: sample `m` of a configuration draws from a
//! ChaCha stream keyed by `(seed, m)`, so results are reproducible no matter
//! how samples are scheduled.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};

use crate::chaos::ChaosExpansion;
use crate::kernel::{BasisIndex, Coeff, Kernel};
use crate::oracle::OracleError;

/// Matrix dimension, sample count and RNG seed for one experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GueConfig {
    pub dim: usize,
    pub samples: usize,
    pub seed: u64,
}

impl GueConfig {
    pub fn new(dim: usize, samples: usize, seed: u64) -> Self {
        assert!(dim >= 2, "GUE dimension must be at least 2");
        assert!(samples >= 1, "need at least one sample");
        GueConfig { dim, samples, seed }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GueStatistic {
    Trace,
    OpNorm,
}

/// An observable to estimate: either a word in the semicircular generators
/// or a full chaos expansion.
#[derive(Debug, Clone, Copy)]
pub enum GueObservable<'a> {
    Word(&'a [Kernel]),
    Functional(&'a ChaosExpansion),
}

/// `count` independent normalized GUE matrices for sample `sample_index`.
pub fn sample_family(cfg: &GueConfig, count: usize, sample_index: u64) -> Vec<DMatrix<Coeff>> {
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    rng.set_stream(sample_index.wrapping_add(1));
    let n = cfg.dim;
    let diag = Normal::new(0.0, (1.0 / n as f64).sqrt()).expect("valid sigma");
    let off = Normal::new(0.0, (1.0 / (2.0 * n as f64)).sqrt()).expect("valid sigma");
    (0..count)
        .map(|_| {
            let mut x = DMatrix::<Coeff>::zeros(n, n);
            for i in 0..n {
                x[(i, i)] = Coeff::new(diag.sample(&mut rng), 0.0);
                for j in i + 1..n {
                    let v = Coeff::new(off.sample(&mut rng), off.sample(&mut rng));
                    x[(i, j)] = v;
                    x[(j, i)] = v.conj();
                }
            }
            x
        })
        .collect()
}

/// Fast complex matrix product (column-major, via the cgemm kernels).
pub fn matmul(a: &DMatrix<Coeff>, b: &DMatrix<Coeff>) -> DMatrix<Coeff> {
    let (m, k) = a.shape();
    let (k2, n) = b.shape();
    assert_eq!(k, k2);
    let mut c = DMatrix::<Coeff>::zeros(m, n);
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.as_slice().as_ptr() as *const [f64; 2],
            1,
            m as isize,
            b.as_slice().as_ptr() as *const [f64; 2],
            1,
            k as isize,
            [0.0, 0.0],
            c.as_mut_slice().as_mut_ptr() as *mut [f64; 2],
            1,
            m as isize,
        );
    }
    c
}

/// `tr(A·B)` without forming the product.
fn trace_pair(a: &DMatrix<Coeff>, b: &DMatrix<Coeff>) -> Coeff {
    let n = a.nrows();
    let mut acc = Coeff::default();
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

fn letters_needed(word: &[Kernel]) -> Result<usize, OracleError> {
    let mut max = 0u32;
    for h in word {
        if h.order() != 1 {
            return Err(OracleError::NotOrderOne(h.order()));
        }
        if let Some(i) = h.max_index() {
            max = max.max(i + 1);
        }
    }
    Ok(max as usize)
}

/// Maps a real direction to its matrix `Σᵢ h[i]·Xᵢ` in the sampled family.
fn direction_matrix(h: &Kernel, family: &[DMatrix<Coeff>], n: usize) -> DMatrix<Coeff> {
    let mut m = DMatrix::<Coeff>::zeros(n, n);
    for (idx, c) in h.iter() {
        m += family[idx[0] as usize].scale_complex(c);
    }
    m
}

trait ScaleComplex {
    fn scale_complex(&self, c: Coeff) -> DMatrix<Coeff>;
}

impl ScaleComplex for DMatrix<Coeff> {
    fn scale_complex(&self, c: Coeff) -> DMatrix<Coeff> {
        self.map(|v| v * c)
    }
}

/// Normalized trace of the word product in one sampled family.
fn word_trace_sample(word: &[Kernel], family: &[DMatrix<Coeff>], n: usize) -> Coeff {
    let mats: Vec<DMatrix<Coeff>> =
        word.iter().map(|h| direction_matrix(h, family, n)).collect();
    let inv = 1.0 / n as f64;
    match mats.len() {
        0 => Coeff::new(1.0, 0.0),
        1 => mats[0].diagonal().sum() * inv,
        _ => {
            let mut product = mats[0].clone();
            for m in &mats[1..mats.len() - 1] {
                product = matmul(&product, m);
            }
            trace_pair(&product, &mats[mats.len() - 1]) * inv
        }
    }
}

/// Monte-Carlo mean and standard error of `τ(S(h₁)⋯S(h_k))` in the matrix
/// model.
pub fn estimate_word_trace(
    word: &[Kernel],
    cfg: &GueConfig,
) -> Result<(Coeff, f64), OracleError> {
    let letters = letters_needed(word)?.max(1);
    let values: Vec<Coeff> = (0..cfg.samples)
        .map(|m| {
            let family = sample_family(cfg, letters, m as u64);
            word_trace_sample(word, &family, cfg.dim)
        })
        .collect();
    Ok(mean_and_stderr(&values))
}

fn mean_and_stderr(values: &[Coeff]) -> (Coeff, f64) {
    let m = values.len() as f64;
    let mean = values.iter().sum::<Coeff>() / m;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

/// Applies the matrix image of an elementary word of generators to a vector
/// via the first-slot recursion, sharing suffix results.
fn apply_word_matrix(
    word: &[BasisIndex],
    family: &[DMatrix<Coeff>],
    v: &nalgebra::DVector<Coeff>,
) -> nalgebra::DVector<Coeff> {
    let n = word.len();
    if n == 0 {
        return v.clone();
    }
    let mut next2 = v.clone();
    let mut next = &family[word[n - 1] as usize] * v;
    for k in (0..n - 1).rev() {
        let mut cur = &family[word[k] as usize] * &next;
        if word[k] == word[k + 1] {
            cur -= &next2;
        }
        next2 = next;
        next = cur;
    }
    next
}

/// The matrix image of a chaos expansion applied to a vector: the
/// chaos-to-polynomial reduction from the product-formula recursion, with
/// the sampled family in place of the semicircular generators.
pub fn apply_functional_matrix(
    f: &ChaosExpansion,
    family: &[DMatrix<Coeff>],
    v: &nalgebra::DVector<Coeff>,
) -> nalgebra::DVector<Coeff> {
    let mut out = nalgebra::DVector::<Coeff>::zeros(v.len());
    for (_, kernel) in f.components() {
        for (idx, c) in kernel.iter() {
            out += apply_word_matrix(idx, family, v).map(|x| x * c);
        }
    }
    out
}

/// Largest singular value of the matrix image of `f`, by power iteration on
/// `X*X` (matrix-free; `X*` is the image of the adjoint functional).
fn opnorm_sample(
    f: &ChaosExpansion,
    family: &[DMatrix<Coeff>],
    n: usize,
    iterations: usize,
    rng: &mut impl Rng,
) -> f64 {
    let adj = f.adjoint();
    let mut v = nalgebra::DVector::<Coeff>::from_fn(n, |_, _| crate::sample::unit_disk(rng));
    v /= Coeff::new(v.norm(), 0.0);
    let mut sigma = 0.0;
    for _ in 0..iterations {
        let xv = apply_functional_matrix(f, family, &v);
        sigma = xv.norm();
        if sigma == 0.0 {
            return 0.0;
        }
        v = apply_functional_matrix(&adj, family, &xv);
        let norm = v.norm();
        if norm == 0.0 {
            return 0.0;
        }
        v /= Coeff::new(norm, 0.0);
    }
    sigma
}

/// Monte-Carlo mean and standard error of the operator norm of the matrix
/// image of a functional. Power iteration approaches the norm from below,
/// so upper-bound checks against the estimate remain sound.
pub fn estimate_opnorm(
    f: &ChaosExpansion,
    cfg: &GueConfig,
    iterations: usize,
) -> Result<(f64, f64), OracleError> {
    let letters = f.max_index().map(|i| i as usize + 1).unwrap_or(1);
    let values: Vec<Coeff> = (0..cfg.samples)
        .map(|m| {
            let family = sample_family(cfg, letters, m as u64);
            let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed ^ 0x9e3779b97f4a7c15);
            rng.set_stream(m as u64);
            Coeff::new(opnorm_sample(f, &family, cfg.dim, iterations, &mut rng), 0.0)
        })
        .collect();
    let (mean, err) = mean_and_stderr(&values);
    Ok((mean.re, err))
}

/// Single entry point matching the statistic selector; the trace estimate
/// reports its real part (the imaginary part of a word trace is `O(1/N)`
/// noise and vanishes in the limit).
pub fn estimate(
    observable: GueObservable<'_>,
    cfg: &GueConfig,
    statistic: GueStatistic,
) -> Result<(f64, f64), OracleError> {
    match (observable, statistic) {
        (GueObservable::Word(word), GueStatistic::Trace) => {
            let (mean, err) = estimate_word_trace(word, cfg)?;
            Ok((mean.re, err))
        }
        (GueObservable::Functional(f), GueStatistic::Trace) => {
            // τ(F) of a matrix image: evaluate the word expansion termwise
            let mut words: Vec<(Vec<Kernel>, Coeff)> = Vec::new();
            for (_, kernel) in f.components() {
                for (idx, c) in kernel.iter() {
                    words.push((idx.iter().map(|&i| Kernel::basis_vector(i)).collect(), c));
                }
            }
            let letters = f.max_index().map(|i| i as usize + 1).unwrap_or(1);
            let values: Vec<Coeff> = (0..cfg.samples)
                .map(|m| {
                    let family = sample_family(cfg, letters, m as u64);
                    words
                        .iter()
                        .map(|(w, c)| word_trace_sample(w, &family, cfg.dim) * c)
                        .sum()
                })
                .collect();
            let (mean, err) = mean_and_stderr(&values);
            Ok((mean.re, err))
        }
        (GueObservable::Functional(f), GueStatistic::OpNorm) => estimate_opnorm(f, cfg, 40),
        (GueObservable::Word(word), GueStatistic::OpNorm) => {
            let mut f = ChaosExpansion::one();
            for h in word {
                f = f
                    .multiply(&ChaosExpansion::semicircular(h), word.len())
                    .expect("word length budget");
            }
            estimate_opnorm(&f, cfg, 40)
        }
    }
}
