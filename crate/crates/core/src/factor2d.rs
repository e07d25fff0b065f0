//! Constrained two-way factorizations `Y ~ A B^T`.
//!
//! `A` (I x J) holds the basis/mixing vectors and `B` (T x J) the components.
//! Callers that want the roles swapped factorize `Y^T`.
//!
//! After fitting, every engine resolves the scaling and permutation
//! ambiguity the same way: `B`'s columns get unit 2-norm (unit variance for
//! ICA) with the scale moved into `A`, components are ordered by descending
//! `A`-column norm, and each `B` column is signed so its largest-magnitude
//! entry is positive.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{self, fix_signs_by_v, sign_of_largest, BandedCholesky};
use crate::matrix::{dot, norm, Matrix};
use crate::metrics::excess_kurtosis;
use crate::rng::seeded;
use crate::warning::Warning;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintKind {
    Unconstrained,
    Orthogonal,
    Nonnegative,
    Sparse,
    Smooth,
    Independent,
}

impl ConstraintKind {
    pub const ALL: [ConstraintKind; 6] = [
        ConstraintKind::Unconstrained,
        ConstraintKind::Orthogonal,
        ConstraintKind::Nonnegative,
        ConstraintKind::Sparse,
        ConstraintKind::Smooth,
        ConstraintKind::Independent,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            ConstraintKind::Unconstrained => "unconstrained",
            ConstraintKind::Orthogonal => "orthogonal",
            ConstraintKind::Nonnegative => "nonnegative",
            ConstraintKind::Sparse => "sparse",
            ConstraintKind::Smooth => "smooth",
            ConstraintKind::Independent => "independent",
        }
    }
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ConstraintKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ConstraintKind::ALL
            .into_iter()
            .find(|k| k.tag() == s.trim())
            .ok_or_else(|| Error::InvalidArgument(format!("unknown constraint kind `{s}`")))
    }
}

/// Factorization criterion plus its numeric settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSpec {
    pub kind: ConstraintKind,
    /// Penalty weight for the sparse and smooth criteria; ignored otherwise.
    pub penalty_weight: f64,
    pub max_iters: usize,
    /// Relative objective change that stops iteration.
    pub tol: f64,
    /// Seed for randomized starts (ICA).
    pub seed: u64,
}

impl ConstraintSpec {
    pub const DEFAULT_MAX_ITERS: usize = 500;
    pub const DEFAULT_TOL: f64 = 1e-8;

    pub fn new(kind: ConstraintKind) -> Self {
        Self {
            kind,
            penalty_weight: 0.0,
            max_iters: Self::DEFAULT_MAX_ITERS,
            tol: Self::DEFAULT_TOL,
            seed: 0,
        }
    }

    pub fn with_penalty(mut self, w: f64) -> Self {
        self.penalty_weight = w;
        self
    }

    pub fn with_max_iters(mut self, n: usize) -> Self {
        self.max_iters = n;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.penalty_weight >= 0.0) || !self.penalty_weight.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "penalty weight must be a nonnegative number, got {}",
                self.penalty_weight
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct FactorPair {
    /// I x J basis (mixing) matrix.
    pub a: Matrix,
    /// T x J components.
    pub b: Matrix,
    pub iterations_run: usize,
    pub final_objective: f64,
    /// Objective after initialization and after every iteration.
    pub objective_trace: Vec<f64>,
    pub warnings: Vec<Warning>,
}

impl FactorPair {
    pub fn rank(&self) -> usize {
        self.b.cols()
    }

    pub fn reconstruct(&self) -> Matrix {
        self.a.dot_t(&self.b)
    }
}

/// Truncated SVD factors `y ~ a diag(d) b^T`.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub a: Matrix,
    pub d: Vec<f64>,
    pub b: Matrix,
}

/// Starting point for the iterative engines.
#[derive(Debug, Clone)]
pub struct FactorInit {
    pub a: Matrix,
    pub b: Matrix,
}

fn check_rank(y: &Matrix, j: usize) -> Result<()> {
    let max = y.rows().min(y.cols());
    if j == 0 || j > max {
        return Err(Error::InvalidRank(format!(
            "rank {j} outside 1..={max} for a {}x{} matrix",
            y.rows(),
            y.cols()
        )));
    }
    Ok(())
}

fn check_init(y: &Matrix, init: &FactorInit) -> Result<usize> {
    let j = init.a.cols();
    if init.a.rows() != y.rows() || init.b.rows() != y.cols() || init.b.cols() != j {
        return Err(Error::Shape(format!(
            "init shapes {:?}/{:?} do not fit a {}x{} matrix",
            init.a.shape(),
            init.b.shape(),
            y.rows(),
            y.cols()
        )));
    }
    Ok(j)
}

/// Puts init columns in a fixed order (descending `|a_k| |b_k|`, ties broken
/// by the column entries) so the column-wise sweeps do not depend on the
/// order the caller supplied.
fn canonical_order(init: FactorInit) -> FactorInit {
    let an = init.a.column_norms();
    let bn = init.b.column_norms();
    let ac = init.a.columns();
    let bc = init.b.columns();
    let mut idx: Vec<usize> = (0..an.len()).collect();
    idx.sort_by(|&p, &q| {
        (an[q] * bn[q])
            .total_cmp(&(an[p] * bn[p]))
            .then_with(|| {
                ac[p]
                    .iter()
                    .chain(&bc[p])
                    .zip(ac[q].iter().chain(&bc[q]))
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
    });
    FactorInit {
        a: init.a.select_columns(&idx),
        b: init.b.select_columns(&idx),
    }
}

pub fn svd_factor(y: &Matrix, j: usize) -> Result<SvdFactors> {
    check_rank(y, j)?;
    let mut dec = linalg::svd(y);
    fix_signs_by_v(&mut dec);
    Ok(SvdFactors {
        a: dec.u.leading_columns(j),
        d: dec.s[..j].to_vec(),
        b: dec.v.leading_columns(j),
    })
}

fn residual_sq(y: &Matrix, a: &Matrix, b: &Matrix) -> f64 {
    let r = a.dot_t(b);
    y.data()
        .iter()
        .zip(r.data())
        .map(|(p, q)| (p - q) * (p - q))
        .sum()
}

pub(crate) fn rel_change(prev: f64, cur: f64) -> f64 {
    let d = (prev - cur).abs();
    if prev.abs() > 0.0 {
        d / prev.abs()
    } else {
        d
    }
}

/// Unit-norm `b` columns, scale moved into `a`, columns sorted by descending
/// `a` norm, each `b` column signed so its largest-magnitude entry is positive.
pub fn normalize_pair(a: &Matrix, b: &Matrix) -> (Matrix, Matrix) {
    normalize_with(a, b, |col| norm(col))
}

fn normalize_with(a: &Matrix, b: &Matrix, scale_of: impl Fn(&[f64]) -> f64) -> (Matrix, Matrix) {
    let j = b.cols();
    let mut acols = a.columns();
    let mut bcols = b.columns();
    for k in 0..j {
        let s = scale_of(&bcols[k]);
        if s > 0.0 {
            bcols[k].iter_mut().for_each(|v| *v /= s);
            acols[k].iter_mut().for_each(|v| *v *= s);
        } else {
            acols[k].iter_mut().for_each(|v| *v = 0.0);
        }
        if sign_of_largest(&bcols[k]) < 0.0 {
            bcols[k].iter_mut().for_each(|v| *v = -*v);
            acols[k].iter_mut().for_each(|v| *v = -*v);
        }
    }
    let norms: Vec<f64> = acols.iter().map(|c| norm(c)).collect();
    let mut order: Vec<usize> = (0..j).collect();
    order.sort_by(|&p, &q| norms[q].partial_cmp(&norms[p]).unwrap().then(p.cmp(&q)));
    let a = Matrix::from_fn(a.rows(), j, |i, k| acols[order[k]][i]);
    let b = Matrix::from_fn(b.rows(), j, |i, k| bcols[order[k]][i]);
    (a, b)
}

/// Nonnegative SVD-based start (NNDSVD with zeros filled by the data mean).
pub fn nndsvd_init(y: &Matrix, j: usize) -> Result<FactorInit> {
    check_rank(y, j)?;
    let dec = linalg::svd(y);
    let (rows, cols) = y.shape();
    let mut a = Matrix::zeros(rows, j);
    let mut b = Matrix::zeros(cols, j);
    for k in 0..j {
        let u = dec.u.column(k);
        let v = dec.v.column(k);
        let s = dec.s[k];
        let (uu, vv, sigma) = if k == 0 {
            let uu: Vec<f64> = u.iter().map(|x| x.abs()).collect();
            let vv: Vec<f64> = v.iter().map(|x| x.abs()).collect();
            (uu, vv, 1.0)
        } else {
            let up: Vec<f64> = u.iter().map(|x| x.max(0.0)).collect();
            let un: Vec<f64> = u.iter().map(|x| (-x).max(0.0)).collect();
            let vp: Vec<f64> = v.iter().map(|x| x.max(0.0)).collect();
            let vn: Vec<f64> = v.iter().map(|x| (-x).max(0.0)).collect();
            let mp = norm(&up) * norm(&vp);
            let mn = norm(&un) * norm(&vn);
            let (pu, pv, m) = if mp >= mn { (up, vp, mp) } else { (un, vn, mn) };
            let (nu, nv) = (norm(&pu), norm(&pv));
            if nu == 0.0 || nv == 0.0 {
                (vec![0.0; rows], vec![0.0; cols], 0.0)
            } else {
                (
                    pu.iter().map(|x| x / nu).collect(),
                    pv.iter().map(|x| x / nv).collect(),
                    m,
                )
            }
        };
        let w = (s * sigma).sqrt();
        for i in 0..rows {
            a.set(i, k, w * uu[i]);
        }
        for i in 0..cols {
            b.set(i, k, w * vv[i]);
        }
    }
    let fill = y.data().iter().sum::<f64>() / y.data().len() as f64;
    let a = a.map(|v| if v == 0.0 { fill } else { v });
    let b = b.map(|v| if v == 0.0 { fill } else { v });
    Ok(FactorInit { a, b })
}

/// Nonnegative factorization by hierarchical alternating least squares.
pub fn nmf_hals(y: &Matrix, j: usize, spec: &ConstraintSpec) -> Result<FactorPair> {
    check_nonnegative(y)?;
    check_rank(y, j)?;
    if y.data().iter().all(|&v| v == 0.0) {
        return Ok(FactorPair {
            a: Matrix::zeros(y.rows(), j),
            b: Matrix::zeros(y.cols(), j),
            iterations_run: 0,
            final_objective: 0.0,
            objective_trace: vec![0.0],
            warnings: Vec::new(),
        });
    }
    let init = nndsvd_init(y, j)?;
    nmf_hals_init(y, init, spec)
}

fn check_nonnegative(y: &Matrix) -> Result<()> {
    if let Some(v) = y.data().iter().find(|&&v| v < 0.0 || v.is_nan()) {
        return Err(Error::InvalidInput(format!(
            "nonnegative factorization needs nonnegative data, found {v}"
        )));
    }
    Ok(())
}

/// [`nmf_hals`] from a caller-provided nonnegative start.
pub fn nmf_hals_init(y: &Matrix, init: FactorInit, spec: &ConstraintSpec) -> Result<FactorPair> {
    spec.validate()?;
    check_nonnegative(y)?;
    check_init(y, &init)?;
    if init.a.data().iter().chain(init.b.data()).any(|&v| v < 0.0) {
        return Err(Error::InvalidInput("nonnegative factorization needs a nonnegative start".into()));
    }
    let FactorInit { mut a, mut b } = canonical_order(init);
    let mut trace = vec![residual_sq(y, &a, &b)];
    let mut iters = 0;
    while iters < spec.max_iters {
        hals_sweep(&y.transpose(), &mut b, &a);
        hals_sweep(y, &mut a, &b);
        iters += 1;
        let obj = residual_sq(y, &a, &b);
        let prev = *trace.last().unwrap();
        trace.push(obj);
        if rel_change(prev, obj) < spec.tol {
            break;
        }
    }
    let (a, b) = normalize_pair(&a, &b);
    Ok(finish(a, b, iters, trace, spec))
}

/// One HALS pass over the columns of `w` in `y ~ w h^T` with `h` fixed.
pub(crate) fn hals_sweep(y: &Matrix, w: &mut Matrix, h: &Matrix) {
    let yh = y.dot(h);
    let hth = h.t_dot(h);
    let j = w.cols();
    for k in 0..j {
        let d = hth.get(k, k);
        if d <= 0.0 {
            continue;
        }
        for i in 0..w.rows() {
            let mut s = yh.get(i, k);
            for l in 0..j {
                s -= w.get(i, l) * hth.get(l, k);
            }
            let v = (w.get(i, k) + s / d).max(0.0);
            w.set(i, k, v);
        }
    }
}

fn finish(a: Matrix, b: Matrix, iters: usize, trace: Vec<f64>, spec: &ConstraintSpec) -> FactorPair {
    let mut warnings = Vec::new();
    if iters >= spec.max_iters {
        warnings.push(Warning::NotConverged { iterations: iters });
    }
    FactorPair {
        a,
        b,
        iterations_run: iters,
        final_objective: *trace.last().unwrap(),
        objective_trace: trace,
        warnings,
    }
}

/// ICA by whitening plus deflationary fixed-point iteration with the
/// log-cosh contrast.
///
/// Rows of `y` are mixtures, columns are samples. Returned components have
/// zero mean and unit variance; `a b^T` approximates the row-centered data.
pub fn ica_deflation(y: &Matrix, j: usize, spec: &ConstraintSpec) -> Result<FactorPair> {
    spec.validate()?;
    let (rows, t) = y.shape();
    if j == 0 || j > rows || j > t {
        return Err(Error::InvalidRank(format!(
            "cannot extract {j} components from {rows} mixtures of {t} samples"
        )));
    }
    let means: Vec<f64> = (0..rows).map(|i| y.row(i).iter().sum::<f64>() / t as f64).collect();
    let yc = Matrix::from_fn(rows, t, |i, k| y.get(i, k) - means[i]);
    let dec = linalg::svd(&yc);
    let s0 = dec.s.first().copied().unwrap_or(0.0);
    if s0 == 0.0 || dec.s.len() < j || dec.s[j - 1] <= 1e-10 * s0 {
        return Err(Error::RankDeficient(format!(
            "data has fewer than {j} significant singular values"
        )));
    }
    let sqrt_t = (t as f64).sqrt();
    // whitened signals, j x T, with identity sample covariance
    let z = dec.v.leading_columns(j).transpose().scale(sqrt_t);

    let mut rng = seeded(spec.seed);
    let mut w_rows: Vec<Vec<f64>> = Vec::with_capacity(j);
    let mut total_iters = 0;
    let mut warnings = Vec::new();
    for _ in 0..j {
        let mut found = None;
        for _restart in 0..3 {
            let mut w: Vec<f64> = (0..j).map(|_| rng.sample(StandardNormal)).collect();
            orthogonalize(&mut w, &w_rows);
            if !normalize(&mut w) {
                continue;
            }
            let mut converged = false;
            for _ in 0..spec.max_iters {
                total_iters += 1;
                let u = z.t_mul_vec(&w);
                let g: Vec<f64> = u.iter().map(|v| v.tanh()).collect();
                let gp_mean = g.iter().map(|v| 1.0 - v * v).sum::<f64>() / t as f64;
                let mut w_new: Vec<f64> = z.mul_vec(&g).into_iter().map(|v| v / t as f64).collect();
                for (wn, wo) in w_new.iter_mut().zip(&w) {
                    *wn -= gp_mean * wo;
                }
                orthogonalize(&mut w_new, &w_rows);
                if !normalize(&mut w_new) {
                    break;
                }
                let c = dot(&w_new, &w).abs();
                w = w_new;
                if 1.0 - c < spec.tol {
                    converged = true;
                    break;
                }
            }
            let keep = converged;
            found = Some(w);
            if keep {
                break;
            }
            warnings.push(Warning::NotConverged {
                iterations: spec.max_iters,
            });
        }
        let w = found.ok_or_else(|| Error::RankDeficient("ICA start collapsed".into()))?;
        w_rows.push(w);
    }
    // final symmetric clean-up keeps W exactly orthonormal
    let w = Matrix::from_rows(&w_rows)?;
    let w = linalg::procrustes(&w);
    let s = w.dot(&z); // j x T
    let b = s.transpose();
    // y_c ~ U_j S_j Z / sqrt(T) = (U_j S_j W^T / sqrt(T)) (W Z)
    let us = dec.u.leading_columns(j).scale_columns(&dec.s[..j]);
    let a = us.dot_t(&w).scale(1.0 / sqrt_t);

    let kurt_se = (24.0 / t as f64).sqrt();
    let gaussian = (0..j)
        .filter(|&k| excess_kurtosis(&b.column(k)).abs() < 4.0 * kurt_se)
        .count();
    if (j == 1 && gaussian == 1) || (j > 1 && gaussian >= 2) {
        warnings.push(Warning::GaussianComponents { count: gaussian });
    }

    let (a, b) = normalize_with(&a, &b, |col| {
        let m = col.iter().sum::<f64>() / col.len() as f64;
        (col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / col.len() as f64).sqrt()
    });
    let obj = residual_sq(&yc, &a, &b);
    Ok(FactorPair {
        a,
        b,
        iterations_run: total_iters,
        final_objective: obj,
        objective_trace: vec![obj],
        warnings,
    })
}

fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in basis {
            let p = dot(w, q);
            for (wi, qi) in w.iter_mut().zip(q) {
                *wi -= p * qi;
            }
        }
    }
}

fn normalize(w: &mut [f64]) -> bool {
    let n = norm(w);
    if n < 1e-12 {
        return false;
    }
    w.iter_mut().for_each(|v| *v /= n);
    true
}

pub(crate) fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// SVD start with unit-norm basis columns and scaled components.
fn svd_init(y: &Matrix, j: usize) -> Result<FactorInit> {
    let f = svd_factor(y, j)?;
    Ok(FactorInit {
        a: f.a,
        b: f.b.scale_columns(&f.d),
    })
}

/// Sparse component analysis: minimizes `||Y - A B^T||^2 + lambda ||B||_1`
/// with unit-norm columns of `A`.
pub fn sca_factor(y: &Matrix, j: usize, spec: &ConstraintSpec) -> Result<FactorPair> {
    check_rank(y, j)?;
    sca_factor_init(y, svd_init(y, j)?, spec)
}

pub fn l1_norm(m: &Matrix) -> f64 {
    m.data().iter().map(|v| v.abs()).sum()
}

pub fn sca_factor_init(y: &Matrix, init: FactorInit, spec: &ConstraintSpec) -> Result<FactorPair> {
    spec.validate()?;
    check_init(y, &init)?;
    let lambda = spec.penalty_weight;
    let FactorInit { a, b } = canonical_order(init);
    let (mut a, mut b) = unit_columns(a, b);
    let objective = |a: &Matrix, b: &Matrix| residual_sq(y, a, b) + lambda * l1_norm(b);
    let mut trace = vec![objective(&a, &b)];
    let mut iters = 0;
    while iters < spec.max_iters {
        component_sweep(y, &a, &mut b, |rhs| {
            rhs.iter().map(|&v| soft_threshold(v, lambda / 2.0)).collect()
        });
        unit_basis_sweep(y, &mut a, &b);
        iters += 1;
        let obj = objective(&a, &b);
        let prev = *trace.last().unwrap();
        trace.push(obj);
        if rel_change(prev, obj) < spec.tol {
            break;
        }
    }
    let (a, b) = normalize_pair(&a, &b);
    Ok(finish(a, b, iters, trace, spec))
}

fn unit_columns(mut a: Matrix, mut b: Matrix) -> (Matrix, Matrix) {
    for (k, n) in a.column_norms().into_iter().enumerate() {
        if n > 0.0 {
            for i in 0..a.rows() {
                a.set(i, k, a.get(i, k) / n);
            }
            for i in 0..b.rows() {
                b.set(i, k, b.get(i, k) * n);
            }
        }
    }
    (a, b)
}

/// Column-wise update of `b` in `y ~ a b^T` for unit-norm `a` columns:
/// `b_k = solve(R_k^T a_k)` where `R_k` excludes component `k`.
fn component_sweep(y: &Matrix, a: &Matrix, b: &mut Matrix, solve: impl Fn(&[f64]) -> Vec<f64>) {
    let yta = y.t_dot(a); // T x J
    let ata = a.t_dot(a);
    let j = a.cols();
    for k in 0..j {
        let rhs: Vec<f64> = (0..b.rows())
            .map(|t| {
                let mut s = yta.get(t, k);
                for l in 0..j {
                    if l != k {
                        s -= b.get(t, l) * ata.get(l, k);
                    }
                }
                s
            })
            .collect();
        let col = solve(&rhs);
        b.set_column(k, &col);
    }
}

/// Column-wise exact update of unit-norm `a` columns: `a_k = R_k b_k / ||R_k b_k||`.
fn unit_basis_sweep(y: &Matrix, a: &mut Matrix, b: &Matrix) {
    let yb = y.dot(b);
    let btb = b.t_dot(b);
    let j = a.cols();
    for k in 0..j {
        let mut col: Vec<f64> = (0..a.rows())
            .map(|i| {
                let mut s = yb.get(i, k);
                for l in 0..j {
                    if l != k {
                        s -= a.get(i, l) * btb.get(l, k);
                    }
                }
                s
            })
            .collect();
        if normalize(&mut col) {
            a.set_column(k, &col);
        }
    }
}

/// Entry `(i, j)` of `L^T L` for the `(n-2) x n` second-difference operator.
pub fn second_difference_gram(n: usize, i: usize, j: usize) -> f64 {
    if n < 3 || i.abs_diff(j) > 2 {
        return 0.0;
    }
    const C: [f64; 3] = [1.0, -2.0, 1.0];
    let lo = i.max(j).saturating_sub(2);
    let hi = i.min(j).min(n - 3);
    (lo..=hi).map(|r| C[i - r] * C[j - r]).sum::<f64>()
}

/// `||L B||_F^2` with `L` the second-difference operator along rows of `b`.
pub fn roughness(b: &Matrix) -> f64 {
    let n = b.rows();
    if n < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for k in 0..b.cols() {
        for r in 0..n - 2 {
            let d = b.get(r, k) - 2.0 * b.get(r + 1, k) + b.get(r + 2, k);
            s += d * d;
        }
    }
    s
}

/// Smooth component analysis: minimizes `||Y - A B^T||^2 + lambda ||L B||^2`
/// with `L` the second-difference operator and unit-norm `A` columns.
pub fn smoca_factor(y: &Matrix, j: usize, spec: &ConstraintSpec) -> Result<FactorPair> {
    check_rank(y, j)?;
    smoca_factor_init(y, svd_init(y, j)?, spec)
}

pub fn smoca_factor_init(y: &Matrix, init: FactorInit, spec: &ConstraintSpec) -> Result<FactorPair> {
    spec.validate()?;
    check_init(y, &init)?;
    let lambda = spec.penalty_weight;
    let n = y.cols();
    let chol = BandedCholesky::new(n, 2, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id + lambda * second_difference_gram(n, i, j)
    })
    .expect("I + lambda L^T L is positive definite");
    let FactorInit { a, b } = canonical_order(init);
    let (mut a, mut b) = unit_columns(a, b);
    let objective = |a: &Matrix, b: &Matrix| residual_sq(y, a, b) + lambda * roughness(b);
    let mut trace = vec![objective(&a, &b)];
    let mut iters = 0;
    while iters < spec.max_iters {
        component_sweep(y, &a, &mut b, |rhs| chol.solve(rhs));
        unit_basis_sweep(y, &mut a, &b);
        iters += 1;
        let obj = objective(&a, &b);
        let prev = *trace.last().unwrap();
        trace.push(obj);
        if rel_change(prev, obj) < spec.tol {
            break;
        }
    }
    let (a, b) = normalize_pair(&a, &b);
    Ok(finish(a, b, iters, trace, spec))
}

/// Truncated SVD as a [`FactorPair`]: `a = U diag(d)`, `b = V`.
fn svd_pair(y: &Matrix, j: usize) -> Result<FactorPair> {
    let f = svd_factor(y, j)?;
    let a = f.a.scale_columns(&f.d);
    let obj = residual_sq(y, &a, &f.b);
    Ok(FactorPair {
        a,
        b: f.b,
        iterations_run: 0,
        final_objective: obj,
        objective_trace: vec![obj],
        warnings: Vec::new(),
    })
}

/// Dispatches to the engine selected by `spec.kind`.
pub fn bss_factor(y: &Matrix, j: usize, spec: &ConstraintSpec) -> Result<FactorPair> {
    spec.validate()?;
    match spec.kind {
        ConstraintKind::Unconstrained | ConstraintKind::Orthogonal => svd_pair(y, j),
        ConstraintKind::Nonnegative => nmf_hals(y, j, spec),
        ConstraintKind::Sparse => sca_factor(y, j, spec),
        ConstraintKind::Smooth => smoca_factor(y, j, spec),
        ConstraintKind::Independent => ica_deflation(y, j, spec),
    }
}

/// Simultaneous factorizations `Y_n ~ A_n B_n^T`.
///
/// With `share_b`, one `B` is fitted on the row-stacked data and each `A_n`
/// is then the least-squares fit `Y_n B (B^T B)^+` (for the nonnegative
/// criterion the matching block of the stacked `A` is kept instead, since the
/// least-squares fit may go negative).
pub fn group_factorize(
    ys: &[Matrix],
    j: usize,
    spec: &ConstraintSpec,
    share_b: bool,
) -> Result<Vec<FactorPair>> {
    if ys.is_empty() {
        return Err(Error::InvalidArgument("no matrices to factorize".into()));
    }
    if ys.len() == 1 || !share_b {
        return ys.iter().map(|y| bss_factor(y, j, spec)).collect();
    }
    let t = ys[0].cols();
    if ys.iter().any(|y| y.cols() != t) {
        return Err(Error::Shape(
            "shared components need equal column counts".into(),
        ));
    }
    let refs: Vec<&Matrix> = ys.iter().collect();
    let stacked = Matrix::vstack(&refs)?;
    let joint = bss_factor(&stacked, j, spec)?;
    let b = joint.b.clone();
    let btb_pinv = linalg::pseudo_inverse(&b.t_dot(&b), None);
    let mut out = Vec::with_capacity(ys.len());
    let mut start = 0;
    for y in ys {
        let end = start + y.rows();
        let a = if spec.kind == ConstraintKind::Nonnegative {
            joint.a.rows_range(start, end)
        } else {
            y.dot(&b).dot(&btb_pinv)
        };
        let obj = residual_sq(y, &a, &b);
        out.push(FactorPair {
            a,
            b: b.clone(),
            iterations_run: joint.iterations_run,
            final_objective: obj,
            objective_trace: vec![obj],
            warnings: joint.warnings.clone(),
        });
        start = end;
    }
    Ok(out)
}
