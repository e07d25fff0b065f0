//! Feature extraction from labeled sample collections.
//!
//! Training samples (all of dims `I_1 x .. x I_N`) are stacked along a new
//! trailing sample mode and a Tucker model is fitted with the sample-mode
//! factor held at the identity, so each sample's feature is exactly its slice
//! of the core. Test samples are projected onto the learned bases.

use crate::error::{shape_err, Error, Result};
use crate::factor2d::rel_change;
use crate::linalg::{leading_left_singular_vectors, orthonormality_defect};
use crate::matrix::Matrix;
use crate::tensor::{multi_mode_product, unfold, DenseTensor};
use crate::tucker::relative_error;
use crate::warning::Warning;

#[derive(Debug, Clone)]
pub struct LabeledTensorSet {
    pub samples: Vec<DenseTensor>,
    pub labels: Vec<usize>,
}

impl LabeledTensorSet {
    pub fn new(samples: Vec<DenseTensor>, labels: Vec<usize>) -> Result<Self> {
        if samples.len() != labels.len() {
            return Err(shape_err(format!(
                "{} samples but {} labels",
                samples.len(),
                labels.len()
            )));
        }
        if let Some(first) = samples.first() {
            if let Some((k, s)) = samples.iter().enumerate().find(|(_, s)| s.dims() != first.dims()) {
                return Err(shape_err(format!(
                    "sample {k} has dims {:?}, expected {:?}",
                    s.dims(),
                    first.dims()
                )));
            }
        }
        Ok(Self { samples, labels })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_dims(&self) -> &[usize] {
        self.samples[0].dims()
    }
}

#[derive(Debug, Clone)]
pub struct FeatureSet {
    pub bases: Vec<Matrix>,
    pub features: Vec<DenseTensor>,
    pub labels: Vec<usize>,
    /// Relative fit error of the concatenated training tensor.
    pub fit_error: f64,
    pub trace: Vec<f64>,
}

/// Settings for the training fit.
#[derive(Debug, Clone, Copy)]
pub struct ExtractOptions {
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        Self {
            max_iters: crate::tucker::DEFAULT_MAX_ITERS,
            tol: crate::tucker::DEFAULT_TOL,
        }
    }
}

fn project(t: &DenseTensor, bases: &[Matrix], skip: Option<usize>) -> Result<DenseTensor> {
    let ts: Vec<(Matrix, usize)> = bases
        .iter()
        .enumerate()
        .filter(|(n, _)| Some(*n) != skip)
        .map(|(n, u)| (u.transpose(), n))
        .collect();
    let pairs: Vec<(&Matrix, usize)> = ts.iter().map(|(m, n)| (m, *n)).collect();
    multi_mode_product(t, &pairs)
}

fn reconstruct(core: &DenseTensor, bases: &[Matrix]) -> Result<DenseTensor> {
    let pairs: Vec<(&Matrix, usize)> = bases.iter().zip(0..).collect();
    multi_mode_product(core, &pairs)
}

pub fn extract_train(set: &LabeledTensorSet, ranks: &[usize]) -> Result<FeatureSet> {
    extract_train_with(set, ranks, ExtractOptions::default())
}

pub fn extract_train_with(set: &LabeledTensorSet, ranks: &[usize], opts: ExtractOptions) -> Result<FeatureSet> {
    if set.len() < 2 {
        return Err(Error::InvalidArgument("at least two training samples are required".into()));
    }
    let dims = set.sample_dims().to_vec();
    if ranks.len() != dims.len() {
        return Err(Error::InvalidArgument(format!(
            "{} ranks given for order-{} samples",
            ranks.len(),
            dims.len()
        )));
    }
    for (n, (&r, &d)) in ranks.iter().zip(&dims).enumerate() {
        if r == 0 || r > d {
            return Err(Error::InvalidRank(format!("rank {r} for mode {n} outside 1..={d}")));
        }
    }
    let big = DenseTensor::stack_last(&set.samples)?;
    let n_modes = dims.len();
    // HOSVD start over the sample modes only
    let mut bases = (0..n_modes)
        .map(|n| Ok(leading_left_singular_vectors(&unfold(&big, n)?, ranks[n])))
        .collect::<Result<Vec<_>>>()?;
    let err = |bases: &[Matrix]| -> Result<f64> {
        let core = project(&big, bases, None)?;
        relative_error(&big, &reconstruct(&core, bases)?)
    };
    let mut trace = vec![err(&bases)?];
    let mut iters = 0;
    while iters < opts.max_iters {
        for n in 0..n_modes {
            let w = project(&big, &bases, Some(n))?;
            bases[n] = leading_left_singular_vectors(&unfold(&w, n)?, ranks[n]);
        }
        iters += 1;
        let e = err(&bases)?;
        let prev = *trace.last().unwrap();
        trace.push(e);
        if rel_change(prev, e) < opts.tol {
            break;
        }
    }
    let core = project(&big, &bases, None)?;
    let fit_error = relative_error(&big, &reconstruct(&core, &bases)?)?;
    let features = (0..set.len())
        .map(|k| core.last_mode_slice(k))
        .collect::<Result<Vec<_>>>()?;
    Ok(FeatureSet {
        bases,
        features,
        labels: set.labels.clone(),
        fit_error,
        trace,
    })
}

/// Tucker-2 fit of a list of matrices `X_k ~ U1 F_k U2^T` by alternating
/// eigen-subspace updates. Returns `(U1, U2, features, relative fit error)`.
pub fn tucker2_matrices(
    samples: &[Matrix],
    j1: usize,
    j2: usize,
    opts: ExtractOptions,
) -> Result<(Matrix, Matrix, Vec<Matrix>, f64)> {
    let first = samples
        .first()
        .ok_or_else(|| Error::InvalidArgument("no samples".into()))?;
    let (i1, i2) = first.shape();
    if samples.iter().any(|x| x.shape() != (i1, i2)) {
        return Err(shape_err("samples differ in shape"));
    }
    if j1 == 0 || j1 > i1 || j2 == 0 || j2 > i2 {
        return Err(Error::InvalidRank(format!("ranks ({j1},{j2}) do not fit {i1}x{i2} samples")));
    }
    let refs: Vec<&Matrix> = samples.iter().collect();
    let mut u1 = leading_left_singular_vectors(&Matrix::hstack(&refs)?, j1);
    let ts: Vec<Matrix> = samples.iter().map(Matrix::transpose).collect();
    let trefs: Vec<&Matrix> = ts.iter().collect();
    let mut u2 = leading_left_singular_vectors(&Matrix::hstack(&trefs)?, j2);
    let total: f64 = samples.iter().map(|x| x.frobenius_norm().powi(2)).sum();
    let err = |u1: &Matrix, u2: &Matrix| -> f64 {
        let mut e = 0.0;
        for x in samples {
            let f = u1.t_dot(x).dot(u2);
            e += x.sub(&u1.dot(&f).dot_t(u2)).frobenius_norm().powi(2);
        }
        if total > 0.0 {
            (e / total).sqrt()
        } else {
            e.sqrt()
        }
    };
    let mut prev = err(&u1, &u2);
    for _ in 0..opts.max_iters {
        // U1 spans the dominant subspace of sum_k X_k U2 U2^T X_k^T
        let blocks: Vec<Matrix> = samples.iter().map(|x| x.dot(&u2)).collect();
        let brefs: Vec<&Matrix> = blocks.iter().collect();
        u1 = leading_left_singular_vectors(&Matrix::hstack(&brefs)?, j1);
        let blocks: Vec<Matrix> = samples.iter().map(|x| x.t_dot(&u1)).collect();
        let brefs: Vec<&Matrix> = blocks.iter().collect();
        u2 = leading_left_singular_vectors(&Matrix::hstack(&brefs)?, j2);
        let e = err(&u1, &u2);
        if rel_change(prev, e) < opts.tol {
            prev = e;
            break;
        }
        prev = e;
    }
    let feats = samples.iter().map(|x| u1.t_dot(x).dot(&u2)).collect();
    Ok((u1, u2, feats, prev))
}

/// Feature of one test sample: transpose projection when every basis is
/// orthonormal (to 1e-8), pseudo-inverse projection otherwise.
pub fn project_test(x: &DenseTensor, bases: &[Matrix]) -> Result<DenseTensor> {
    if bases.len() != x.order() {
        return Err(shape_err(format!(
            "{} bases for an order-{} sample",
            bases.len(),
            x.order()
        )));
    }
    for (n, b) in bases.iter().enumerate() {
        if b.rows() != x.dims()[n] {
            return Err(shape_err(format!(
                "basis {n} has {} rows, sample dim is {}",
                b.rows(),
                x.dims()[n]
            )));
        }
    }
    if bases.iter().all(|b| orthonormality_defect(b) < 1e-8) {
        project(x, bases, None)
    } else {
        crate::tucker::core_project(x, bases)
    }
}

fn sq_dist(a: &DenseTensor, b: &DenseTensor) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| (x - y).powi(2)).sum()
}

fn check_features(train: &FeatureSet, test: &[DenseTensor]) -> Result<()> {
    if train.features.is_empty() {
        return Err(Error::InvalidArgument("empty training set".into()));
    }
    let dims = train.features[0].dims();
    if let Some(t) = test.iter().find(|t| t.dims() != dims) {
        return Err(shape_err(format!(
            "test feature dims {:?} differ from training {:?}",
            t.dims(),
            dims
        )));
    }
    Ok(())
}

/// k-nearest-neighbour vote with Frobenius distance. Ties go to the class
/// with the smaller mean distance among the voters, then the lower id.
pub fn classify_knn(train: &FeatureSet, test: &[DenseTensor], k: usize) -> Result<Vec<usize>> {
    check_features(train, test)?;
    if k == 0 || k > train.features.len() {
        return Err(Error::InvalidArgument(format!(
            "k must be in 1..={}, got {k}",
            train.features.len()
        )));
    }
    Ok(test
        .iter()
        .map(|x| {
            let mut d: Vec<(f64, usize)> = train
                .features
                .iter()
                .enumerate()
                .map(|(i, f)| (sq_dist(x, f).sqrt(), i))
                .collect();
            d.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            // (votes, summed distance) per class
            let mut tally: Vec<(usize, usize, f64)> = Vec::new();
            for &(dist, i) in &d[..k] {
                let c = train.labels[i];
                match tally.iter_mut().find(|e| e.0 == c) {
                    Some(e) => {
                        e.1 += 1;
                        e.2 += dist;
                    }
                    None => tally.push((c, 1, dist)),
                }
            }
            tally
                .into_iter()
                .min_by(|a, b| {
                    b.1.cmp(&a.1)
                        .then((a.2 / a.1 as f64).partial_cmp(&(b.2 / b.1 as f64)).unwrap())
                        .then(a.0.cmp(&b.0))
                })
                .unwrap()
                .0
        })
        .collect())
}

/// Nearest class centroid after per-feature variance whitening.
///
/// Each feature coordinate is scaled by its pooled within-class variance,
/// falling back to its overall variance when every class is constant along
/// it. Coordinates constant over the whole training set are dropped.
pub fn classify_centroid(train: &FeatureSet, test: &[DenseTensor]) -> Result<(Vec<usize>, Vec<Warning>)> {
    check_features(train, test)?;
    let dim = train.features[0].len();
    let mut classes: Vec<usize> = train.labels.clone();
    classes.sort_unstable();
    classes.dedup();
    let centroids: Vec<Vec<f64>> = classes
        .iter()
        .map(|&c| {
            let members: Vec<&DenseTensor> = train
                .features
                .iter()
                .zip(&train.labels)
                .filter(|(_, &l)| l == c)
                .map(|(f, _)| f)
                .collect();
            (0..dim)
                .map(|d| members.iter().map(|f| f.data()[d]).sum::<f64>() / members.len() as f64)
                .collect()
        })
        .collect();
    let n = train.features.len() as f64;
    let grand: Vec<f64> = (0..dim)
        .map(|d| train.features.iter().map(|f| f.data()[d]).sum::<f64>() / n)
        .collect();
    let mut within = vec![0.0; dim];
    let mut overall = vec![0.0; dim];
    for (f, l) in train.features.iter().zip(&train.labels) {
        let ci = classes.binary_search(l).unwrap();
        for d in 0..dim {
            within[d] += (f.data()[d] - centroids[ci][d]).powi(2);
            overall[d] += (f.data()[d] - grand[d]).powi(2);
        }
    }
    let scale = overall.iter().cloned().fold(0.0, f64::max);
    let eps = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let mut weights = vec![0.0; dim];
    let mut dropped = 0;
    for d in 0..dim {
        if overall[d] <= eps {
            dropped += 1;
        } else if within[d] > eps {
            weights[d] = 1.0 / within[d];
        } else {
            weights[d] = 1.0 / overall[d];
        }
    }
    let mut warnings = Vec::new();
    if dropped > 0 {
        warnings.push(Warning::DroppedFeatures { count: dropped });
    }
    let labels = test
        .iter()
        .map(|x| {
            let mut best = (f64::INFINITY, 0usize);
            for (ci, c) in centroids.iter().enumerate() {
                let dist: f64 = (0..dim).map(|d| weights[d] * (x.data()[d] - c[d]).powi(2)).sum();
                if dist < best.0 {
                    best = (dist, ci);
                }
            }
            classes[best.1]
        })
        .collect();
    Ok((labels, warnings))
}

/// Confusion counts, `[true class][predicted class]`, over `classes` (sorted).
pub fn confusion_matrix(truth: &[usize], pred: &[usize]) -> (Vec<usize>, Vec<Vec<usize>>) {
    let mut classes: Vec<usize> = truth.iter().chain(pred).cloned().collect();
    classes.sort_unstable();
    classes.dedup();
    let mut m = vec![vec![0; classes.len()]; classes.len()];
    for (t, p) in truth.iter().zip(pred) {
        let i = classes.binary_search(t).unwrap();
        let j = classes.binary_search(p).unwrap();
        m[i][j] += 1;
    }
    (classes, m)
}

pub fn accuracy(truth: &[usize], pred: &[usize]) -> f64 {
    let hits = truth.iter().zip(pred).filter(|(a, b)| a == b).count();
    hits as f64 / truth.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use rand::Rng;

    fn feature_set(points: &[(Vec<f64>, usize)]) -> FeatureSet {
        FeatureSet {
            bases: Vec::new(),
            features: points
                .iter()
                .map(|(p, _)| DenseTensor::from_vector(p).unwrap())
                .collect(),
            labels: points.iter().map(|(_, l)| *l).collect(),
            fit_error: 0.0,
            trace: Vec::new(),
        }
    }

    fn v(p: &[f64]) -> DenseTensor {
        DenseTensor::from_vector(p).unwrap()
    }

    #[test]
    fn knn_exact_match_and_tie() {
        let fs = feature_set(&[(vec![0.0, 0.0], 1), (vec![2.0, 0.0], 0), (vec![5.0, 5.0], 2)]);
        assert_eq!(classify_knn(&fs, &[v(&[5.0, 5.0])], 1).unwrap(), vec![2]);
        // equidistant from classes 1 and 0 -> lower id
        assert_eq!(classify_knn(&fs, &[v(&[1.0, 0.0])], 2).unwrap(), vec![0]);
        assert!(classify_knn(&fs, &[v(&[1.0, 0.0])], 0).is_err());
        assert!(classify_knn(&fs, &[v(&[1.0, 0.0])], 4).is_err());
    }

    #[test]
    fn centroid_single_samples_and_tie() {
        let fs = feature_set(&[(vec![0.0, 1.0], 3), (vec![4.0, 1.0], 1)]);
        let (l, w) = classify_centroid(&fs, &[v(&[4.0, 1.0]), v(&[2.0, 1.0])]).unwrap();
        assert_eq!(l, vec![1, 1]);
        assert_eq!(w, vec![Warning::DroppedFeatures { count: 1 }]);
    }

    #[test]
    fn identical_samples_give_identical_features() {
        let base = crate::tensor::outer_product(&[vec![1.0, 2.0, 0.5], vec![1.0, -1.0, 3.0, 0.2]]).unwrap();
        let set = LabeledTensorSet::new(vec![base.clone(); 4], vec![0, 0, 1, 1]).unwrap();
        let fs = extract_train(&set, &[1, 1]).unwrap();
        for f in &fs.features[1..] {
            assert!(sq_dist(f, &fs.features[0]).sqrt() < 1e-8);
        }
    }

    #[test]
    fn rejects_mixed_dims() {
        let a = DenseTensor::zeros(&[2, 3]);
        let b = DenseTensor::zeros(&[3, 2]);
        assert!(matches!(LabeledTensorSet::new(vec![a, b], vec![0, 1]), Err(Error::Shape(_))));
    }

    #[test]
    fn projection_paths_agree_for_orthonormal_bases() {
        let mut rng = seeded(3);
        let x = DenseTensor::from_fn(&[5, 4], |_| rng.random::<f64>());
        let q1 = leading_left_singular_vectors(&Matrix::from_fn(5, 2, |i, j| (i * 3 + j) as f64 % 4.0 + 0.1 * i as f64), 2);
        let q2 = leading_left_singular_vectors(&Matrix::from_fn(4, 3, |i, j| ((i + 1) * (j + 2)) as f64 % 5.0), 3);
        let bases = vec![q1, q2];
        let a = project_test(&x, &bases).unwrap();
        let b = crate::tucker::core_project(&x, &bases).unwrap();
        assert!(a.sub(&b).unwrap().frobenius_norm() < 1e-10);
        let id = vec![Matrix::identity(5), Matrix::identity(4)];
        assert_eq!(project_test(&x, &id).unwrap(), x);
    }

    #[test]
    fn confusion_counts() {
        let (c, m) = confusion_matrix(&[0, 0, 1, 2], &[0, 1, 1, 2]);
        assert_eq!(c, vec![0, 1, 2]);
        assert_eq!(m, vec![vec![1, 1, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        assert_eq!(accuracy(&[0, 0, 1, 2], &[0, 1, 1, 2]), 0.75);
    }
}
