//! Seeded synthetic data with known ground truth.
//!
//! Every generator draws from a ChaCha8 stream seeded with the given `u64`,
//! so identical arguments give bit-identical output.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::features::LabeledTensorSet;
use crate::linalg;
use crate::matrix::Matrix;
use crate::metrics::{congruence, pearson};
use crate::rng::{seeded, Rng as Stream};
use crate::tensor::{product_all, DenseTensor};

fn gaussian_matrix(rng: &mut Stream, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

fn gaussian_tensor(rng: &mut Stream, dims: &[usize]) -> DenseTensor {
    DenseTensor::from_fn(dims, |_| rng.sample(StandardNormal))
}

fn add_noise(rng: &mut Stream, t: &DenseTensor, sigma: f64) -> DenseTensor {
    if sigma == 0.0 {
        return t.clone();
    }
    let data = t
        .data()
        .iter()
        .map(|v| v + sigma * rng.sample::<f64, _>(StandardNormal))
        .collect();
    DenseTensor::new(t.dims().to_vec(), data).expect("same dims")
}

fn add_noise_matrix(rng: &mut Stream, m: &Matrix, sigma: f64) -> Matrix {
    let data = m
        .data()
        .iter()
        .map(|v| v + sigma * rng.sample::<f64, _>(StandardNormal))
        .collect();
    Matrix::new(m.rows(), m.cols(), data).expect("same shape")
}

/// Random matrix with orthonormal columns.
pub fn random_orthonormal(rng: &mut Stream, rows: usize, cols: usize) -> Matrix {
    linalg::leading_left_singular_vectors(&gaussian_matrix(rng, rows, cols), cols)
}

fn check_sizes(dims: &[usize], ranks: &[usize]) -> Result<()> {
    if dims.len() != ranks.len() || dims.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "dims {dims:?} and ranks {ranks:?} must be nonempty and of equal length"
        )));
    }
    if let Some((n, (r, d))) = ranks.iter().zip(dims).enumerate().find(|(_, (r, d))| **r == 0 || r > d) {
        return Err(Error::InvalidRank(format!("rank {r} for mode {n} outside 1..={d}")));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct TuckerTruth {
    pub tensor: DenseTensor,
    pub core: DenseTensor,
    pub factors: Vec<Matrix>,
}

/// Gaussian core times Gaussian factors, plus Gaussian noise of std `noise`.
/// With `nonnegative`, core and factors are uniform on `[0, 1)` instead.
pub fn tucker_tensor(dims: &[usize], ranks: &[usize], noise: f64, nonnegative: bool, seed: u64) -> Result<TuckerTruth> {
    check_sizes(dims, ranks)?;
    let mut rng = seeded(seed);
    let (core, factors) = if nonnegative {
        let core = DenseTensor::from_fn(ranks, |_| rng.random::<f64>());
        let factors = dims
            .iter()
            .zip(ranks)
            .map(|(&d, &r)| Matrix::from_fn(d, r, |_, _| rng.random::<f64>()))
            .collect::<Vec<_>>();
        (core, factors)
    } else {
        let core = gaussian_tensor(&mut rng, ranks);
        let factors = dims
            .iter()
            .zip(ranks)
            .map(|(&d, &r)| gaussian_matrix(&mut rng, d, r))
            .collect::<Vec<_>>();
        (core, factors)
    };
    let clean = product_all(&core, &factors)?;
    let tensor = add_noise(&mut rng, &clean, noise);
    Ok(TuckerTruth { tensor, core, factors })
}

#[derive(Debug, Clone)]
pub struct CpTruth {
    pub tensor: DenseTensor,
    pub weights: Vec<f64>,
    /// Unit-norm columns.
    pub factors: Vec<Matrix>,
}

fn max_offdiag_congruence(m: &Matrix) -> f64 {
    let cols = m.columns();
    let mut best = 0.0f64;
    for i in 0..cols.len() {
        for j in i + 1..cols.len() {
            best = best.max(congruence(&cols[i], &cols[j]));
        }
    }
    best
}

/// Rank-`r` CP tensor whose factor columns have pairwise congruence below
/// `max_collinearity` in every mode; weights are uniform on `[1, 2)` times
/// the square root of the tensor size, sorted descending.
pub fn cp_tensor(dims: &[usize], r: usize, noise: f64, max_collinearity: f64, seed: u64) -> Result<CpTruth> {
    if r == 0 || dims.len() < 2 {
        return Err(Error::InvalidArgument("CP truth needs r >= 1 and order >= 2".into()));
    }
    let mut rng = seeded(seed);
    let mut factors = Vec::with_capacity(dims.len());
    for &d in dims {
        let mut tries = 0;
        let f = loop {
            let mut g = gaussian_matrix(&mut rng, d, r);
            let norms = g.column_norms();
            g = g.scale_columns(&norms.iter().map(|n| 1.0 / n).collect::<Vec<_>>());
            if r == 1 || max_offdiag_congruence(&g) < max_collinearity {
                break g;
            }
            tries += 1;
            if tries > 10_000 {
                return Err(Error::InvalidArgument(format!(
                    "cannot draw {r} columns of length {d} with congruence < {max_collinearity}"
                )));
            }
        };
        factors.push(f);
    }
    let size: usize = dims.iter().product();
    let mut weights: Vec<f64> = (0..r).map(|_| (1.0 + rng.random::<f64>()) * (size as f64).sqrt()).collect();
    weights.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut clean = DenseTensor::zeros(dims);
    for (k, &w) in weights.iter().enumerate() {
        let vecs: Vec<Vec<f64>> = factors.iter().map(|f| f.column(k)).collect();
        let term = crate::tensor::outer_product(&vecs)?.scale(w);
        clean = clean.add(&term)?;
    }
    let tensor = add_noise(&mut rng, &clean, noise);
    Ok(CpTruth {
        tensor,
        weights,
        factors,
    })
}

/// Shapes used for independent sources; cycled in this order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    Sine,
    Uniform,
    Sawtooth,
    Laplace,
    Square,
}

const SOURCE_CYCLE: [SourceKind; 5] = [
    SourceKind::Sine,
    SourceKind::Uniform,
    SourceKind::Sawtooth,
    SourceKind::Laplace,
    SourceKind::Square,
];

fn standardize(v: &mut [f64]) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let s = (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n).sqrt();
    for x in v.iter_mut() {
        *x = (*x - m) / s;
    }
}

fn source(rng: &mut Stream, kind: SourceKind, t: usize, k: usize) -> Vec<f64> {
    let phase = 2.0 * PI * rng.random::<f64>();
    // distinct, non-commensurate cycle counts per source index
    let cycles = 7.3 + 5.17 * k as f64 + rng.random::<f64>();
    let mut v: Vec<f64> = (0..t)
        .map(|i| {
            let x = 2.0 * PI * cycles * i as f64 / t as f64 + phase;
            match kind {
                SourceKind::Sine => x.sin(),
                SourceKind::Uniform => rng.random::<f64>() - 0.5,
                SourceKind::Sawtooth => (x / (2.0 * PI)).fract(),
                SourceKind::Laplace => {
                    let u: f64 = rng.random::<f64>() - 0.5;
                    -u.signum() * (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE).ln()
                }
                SourceKind::Square => x.sin().signum(),
            }
        })
        .collect();
    standardize(&mut v);
    v
}

/// `n` zero-mean unit-variance independent sources of length `t` (columns).
pub fn independent_sources(n: usize, t: usize, seed: u64) -> Matrix {
    let mut rng = seeded(seed);
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|k| source(&mut rng, SOURCE_CYCLE[k % SOURCE_CYCLE.len()], t, k))
        .collect();
    Matrix::from_columns(&cols).expect("nonempty")
}

#[derive(Debug, Clone)]
pub struct IcaTruth {
    /// `n x t`: one mixture per row.
    pub mixtures: Matrix,
    /// `t x n`.
    pub sources: Matrix,
    /// `n x n`, `mixtures = mixing * sources^T`.
    pub mixing: Matrix,
}

/// Square mixtures of independent non-Gaussian sources. The mixing matrix is
/// redrawn until its condition number is below 10.
pub fn ica_mixtures(n: usize, t: usize, seed: u64) -> Result<IcaTruth> {
    if n == 0 || t < 2 {
        return Err(Error::InvalidArgument("need at least one source and two samples".into()));
    }
    let sources = independent_sources(n, t, seed);
    let mut rng = seeded(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mixing = loop {
        let m = gaussian_matrix(&mut rng, n, n);
        let s = linalg::svd(&m).s;
        if s[n - 1] > 0.0 && s[0] / s[n - 1] < 10.0 {
            break m;
        }
    };
    let mixtures = mixing.dot_t(&sources);
    Ok(IcaTruth {
        mixtures,
        sources,
        mixing,
    })
}

/// Largest absolute pairwise correlation between columns.
pub fn max_pairwise_correlation(m: &Matrix) -> f64 {
    let cols = m.columns();
    let mut best = 0.0f64;
    for i in 0..cols.len() {
        for j in i + 1..cols.len() {
            best = best.max(pearson(&cols[i], &cols[j]).abs());
        }
    }
    best
}

#[derive(Debug, Clone)]
pub struct FactorTruth {
    pub y: Matrix,
    pub a: Matrix,
    pub b: Matrix,
}

/// `y = a b^T + noise` with `b` (`t x j`) holding a fraction `zero_fraction`
/// of exact zeros; nonzeros are `+-(1 + |N(0,1)|)`.
pub fn sparse_instance(rows: usize, t: usize, j: usize, zero_fraction: f64, noise: f64, seed: u64) -> FactorTruth {
    let mut rng = seeded(seed);
    let a = gaussian_matrix(&mut rng, rows, j);
    let b = Matrix::from_fn(t, j, |_, _| {
        if rng.random::<f64>() < zero_fraction {
            0.0
        } else {
            let mag = 1.0 + rng.sample::<f64, _>(StandardNormal).abs();
            if rng.random::<bool>() {
                mag
            } else {
                -mag
            }
        }
    });
    let y = add_noise_matrix(&mut rng, &a.dot_t(&b), noise);
    FactorTruth { y, a, b }
}

/// `y = a b^T + noise` where the columns of `b` are slow sinusoids.
pub fn smooth_instance(rows: usize, t: usize, j: usize, noise: f64, seed: u64) -> FactorTruth {
    let mut rng = seeded(seed);
    let a = gaussian_matrix(&mut rng, rows, j);
    let b = Matrix::from_columns(
        &(0..j)
            .map(|k| {
                let phase = 2.0 * PI * rng.random::<f64>();
                let cycles = 1.0 + k as f64 + 0.5 * rng.random::<f64>();
                (0..t)
                    .map(|i| (2.0 * PI * cycles * i as f64 / t as f64 + phase).sin())
                    .collect()
            })
            .collect::<Vec<Vec<f64>>>(),
    )
    .expect("nonempty");
    let y = add_noise_matrix(&mut rng, &a.dot_t(&b), noise);
    FactorTruth { y, a, b }
}

#[derive(Debug, Clone)]
pub struct ClassCorpus {
    pub train: LabeledTensorSet,
    pub test: LabeledTensorSet,
    pub bases: Vec<Matrix>,
    pub class_cores: Vec<DenseTensor>,
}

/// Labeled samples `(G_c + 0.3 E) x {U} + noise * N` with shared orthonormal
/// bases `U`, class cores `G_c` of Frobenius norm `3 sqrt(#core)` and
/// Gaussian jitter `E`. Labels cycle through `0..classes`.
pub fn class_corpus(
    dims: &[usize],
    ranks: &[usize],
    classes: usize,
    n_train: usize,
    n_test: usize,
    noise: f64,
    seed: u64,
) -> Result<ClassCorpus> {
    check_sizes(dims, ranks)?;
    if classes == 0 {
        return Err(Error::InvalidArgument("at least one class is required".into()));
    }
    let mut rng = seeded(seed);
    let bases: Vec<Matrix> = dims
        .iter()
        .zip(ranks)
        .map(|(&d, &r)| random_orthonormal(&mut rng, d, r))
        .collect();
    let core_len: usize = ranks.iter().product();
    let class_cores: Vec<DenseTensor> = (0..classes)
        .map(|_| {
            let g = gaussian_tensor(&mut rng, ranks);
            g.scale(3.0 * (core_len as f64).sqrt() / g.frobenius_norm())
        })
        .collect();
    let mut draw = |count: usize| -> Result<LabeledTensorSet> {
        let mut samples = Vec::with_capacity(count);
        let mut labels = Vec::with_capacity(count);
        for k in 0..count {
            let c = k % classes;
            let jitter = gaussian_tensor(&mut rng, ranks).scale(0.3);
            let core = class_cores[c].add(&jitter)?;
            let clean = product_all(&core, &bases)?;
            samples.push(add_noise(&mut rng, &clean, noise));
            labels.push(c);
        }
        LabeledTensorSet::new(samples, labels)
    };
    let train = draw(n_train)?;
    let test = draw(n_test)?;
    Ok(ClassCorpus {
        train,
        test,
        bases,
        class_cores,
    })
}

#[derive(Debug, Clone)]
pub struct LinkedTruth {
    pub subjects: Vec<DenseTensor>,
    /// `dims[0] x common`, independent non-Gaussian columns shared by all
    /// subjects in mode 0.
    pub common: Matrix,
    /// Per-subject mode-0 factors (common columns first).
    pub mode0_factors: Vec<Matrix>,
}

/// `S` subjects sharing `common` of `ranks[0]` mode-0 components. Mode-0
/// columns are independent non-Gaussian signals (so ICA can identify them);
/// every other factor and each core is drawn per subject.
pub fn linked_subjects(
    subjects: usize,
    dims: &[usize],
    ranks: &[usize],
    common: usize,
    noise: f64,
    seed: u64,
) -> Result<LinkedTruth> {
    check_sizes(dims, ranks)?;
    if common > ranks[0] || subjects == 0 {
        return Err(Error::InvalidArgument(
            "common count must not exceed the mode-0 rank; at least one subject".into(),
        ));
    }
    let individual = ranks[0] - common;
    let pool = independent_sources(common + subjects * individual, dims[0], seed);
    let mut rng = seeded(seed.wrapping_add(1));
    let common_cols: Vec<Vec<f64>> = (0..common).map(|k| pool.column(k)).collect();
    let mut xs = Vec::with_capacity(subjects);
    let mut mode0 = Vec::with_capacity(subjects);
    for s in 0..subjects {
        let mut cols = common_cols.clone();
        for k in 0..individual {
            cols.push(pool.column(common + s * individual + k));
        }
        let f0 = Matrix::from_columns(&cols)?;
        let mut factors = vec![f0.clone()];
        for n in 1..dims.len() {
            factors.push(gaussian_matrix(&mut rng, dims[n], ranks[n]));
        }
        let core = gaussian_tensor(&mut rng, ranks);
        let clean = product_all(&core, &factors)?;
        xs.push(add_noise(&mut rng, &clean, noise));
        mode0.push(f0);
    }
    Ok(LinkedTruth {
        subjects: xs,
        common: Matrix::from_columns(&common_cols)?,
        mode0_factors: mode0,
    })
}

/// Single tensor whose mode-0 factor columns are independent non-Gaussian
/// sources. Returns the tensor and its `dims[0] x ranks[0]` source matrix.
pub fn independent_mode0_tensor(dims: &[usize], ranks: &[usize], noise: f64, seed: u64) -> Result<(DenseTensor, Matrix)> {
    let mut truth = linked_subjects(1, dims, ranks, ranks.first().copied().unwrap_or(0), noise, seed)?;
    Ok((truth.subjects.remove(0), truth.common))
}

#[derive(Debug, Clone)]
pub struct PlsTruth {
    pub x: Matrix,
    pub y: Matrix,
    pub latent: Matrix,
}

/// `X = T P^T + noise`, `Y = T Q^T + noise` with `latent` Gaussian factors.
pub fn pls_latent(rows: usize, n: usize, m: usize, latent: usize, noise: f64, seed: u64) -> PlsTruth {
    let mut rng = seeded(seed);
    let t = gaussian_matrix(&mut rng, rows, latent);
    let p = gaussian_matrix(&mut rng, n, latent);
    let q = gaussian_matrix(&mut rng, m, latent);
    let x = add_noise_matrix(&mut rng, &t.dot_t(&p), noise);
    let y = add_noise_matrix(&mut rng, &t.dot_t(&q), noise);
    PlsTruth { x, y, latent: t }
}

#[derive(Debug, Clone)]
pub struct CoupledTruth {
    pub x: DenseTensor,
    pub y: DenseTensor,
    /// Mode-0 factor shared by both tensors.
    pub shared: Matrix,
}

/// Tensors `x = G_x x_0 A x_1 .. ` and `y = G_y x_0 A x_1 ..` sharing the
/// Gaussian mode-0 factor `A`; every other factor and both cores are drawn
/// independently.
pub fn coupled_pair(
    samples: usize,
    x_dims: &[usize],
    y_dims: &[usize],
    x_ranks: &[usize],
    y_ranks: &[usize],
    noise: f64,
    seed: u64,
) -> Result<CoupledTruth> {
    if x_ranks.first() != y_ranks.first() {
        return Err(Error::InvalidRank("mode-0 ranks must agree".into()));
    }
    let mut full_x = vec![samples];
    full_x.extend_from_slice(x_dims);
    let mut full_y = vec![samples];
    full_y.extend_from_slice(y_dims);
    check_sizes(&full_x, x_ranks)?;
    check_sizes(&full_y, y_ranks)?;
    let mut rng = seeded(seed);
    let shared = gaussian_matrix(&mut rng, samples, x_ranks[0]);
    let mut build = |dims: &[usize], ranks: &[usize]| -> Result<DenseTensor> {
        let mut factors = vec![shared.clone()];
        for n in 1..dims.len() {
            factors.push(gaussian_matrix(&mut rng, dims[n], ranks[n]));
        }
        let core = gaussian_tensor(&mut rng, ranks);
        let clean = product_all(&core, &factors)?;
        Ok(add_noise(&mut rng, &clean, noise))
    };
    let x = build(&full_x, x_ranks)?;
    let y = build(&full_y, y_ranks)?;
    Ok(CoupledTruth { x, y, shared })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_data() {
        let a = tucker_tensor(&[4, 3, 2], &[2, 2, 1], 0.1, false, 5).unwrap();
        let b = tucker_tensor(&[4, 3, 2], &[2, 2, 1], 0.1, false, 5).unwrap();
        assert_eq!(a.tensor, b.tensor);
        let c = tucker_tensor(&[4, 3, 2], &[2, 2, 1], 0.1, false, 6).unwrap();
        assert_ne!(a.tensor, c.tensor);
    }

    #[test]
    fn noiseless_tucker_truth_is_exact() {
        let t = tucker_tensor(&[5, 4, 3], &[2, 2, 2], 0.0, false, 1).unwrap();
        let rec = product_all(&t.core, &t.factors).unwrap();
        assert!(rec.sub(&t.tensor).unwrap().frobenius_norm() <= 1e-12 * t.tensor.frobenius_norm());
    }

    #[test]
    fn ica_sources_are_nearly_uncorrelated() {
        for n in [2, 4] {
            let t = ica_mixtures(n, 2000, 3).unwrap();
            assert!(max_pairwise_correlation(&t.sources) < 0.05);
        }
    }

    #[test]
    fn cp_collinearity_respected() {
        let t = cp_tensor(&[8, 7, 6], 3, 0.0, 0.5, 2).unwrap();
        for f in &t.factors {
            assert!(max_offdiag_congruence(f) < 0.5);
        }
    }
}
