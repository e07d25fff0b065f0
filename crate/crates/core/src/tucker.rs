//! Tucker-N, Tucker-1, CP, penalized Tucker and block-oriented decompositions.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{shape_err, Error, Result};
use crate::factor2d::{
    hals_sweep, rel_change, roughness, second_difference_gram, soft_threshold, ConstraintKind,
    ConstraintSpec,
};
use crate::linalg::{self, leading_left_singular_vectors, pseudo_inverse, solve_psd, BandedCholesky};
use crate::matrix::Matrix;
use crate::metrics::congruence;
use crate::rng::seeded;
use crate::tensor::{khatri_rao, mode_product, multi_mode_product, product_all, unfold, DenseTensor};
use crate::warning::Warning;

pub const DEFAULT_MAX_ITERS: usize = 200;
pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct TuckerModel {
    pub core: DenseTensor,
    pub factors: Vec<Matrix>,
    /// Relative Frobenius error against the fitted data.
    pub fit_error: f64,
    /// Objective after initialization and after every sweep (empty for
    /// closed-form fits).
    pub trace: Vec<f64>,
    pub warnings: Vec<Warning>,
}

impl TuckerModel {
    pub fn new(core: DenseTensor, factors: Vec<Matrix>) -> Result<Self> {
        if factors.len() != core.order() {
            return Err(shape_err(format!(
                "{} factors for an order-{} core",
                factors.len(),
                core.order()
            )));
        }
        for (n, f) in factors.iter().enumerate() {
            if f.cols() != core.dims()[n] {
                return Err(shape_err(format!(
                    "factor {n} has {} columns, core dim is {}",
                    f.cols(),
                    core.dims()[n]
                )));
            }
        }
        Ok(Self {
            core,
            factors,
            fit_error: 0.0,
            trace: Vec::new(),
            warnings: Vec::new(),
        })
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.core.dims().to_vec()
    }

    pub fn reconstruct(&self) -> DenseTensor {
        product_all(&self.core, &self.factors).expect("model shapes are consistent")
    }
}

pub fn tucker_reconstruct(m: &TuckerModel) -> DenseTensor {
    m.reconstruct()
}

/// CP model; each factor has unit-norm columns and `weights` carries the scales.
#[derive(Debug, Clone)]
pub struct CPModel {
    pub weights: Vec<f64>,
    pub factors: Vec<Matrix>,
    pub fit_error: f64,
    pub trace: Vec<f64>,
    pub warnings: Vec<Warning>,
}

impl CPModel {
    pub fn rank(&self) -> usize {
        self.weights.len()
    }

    pub fn reconstruct(&self) -> DenseTensor {
        let dims: Vec<usize> = self.factors.iter().map(Matrix::rows).collect();
        let mut out = DenseTensor::zeros(&dims);
        let cols: Vec<Vec<Vec<f64>>> = self.factors.iter().map(Matrix::columns).collect();
        for (k, &w) in self.weights.iter().enumerate() {
            let mut idx = vec![0usize; dims.len()];
            for v in out.data_mut() {
                let mut p = w;
                for (n, &i) in idx.iter().enumerate() {
                    p *= cols[n][k][i];
                }
                *v += p;
                for m in (0..dims.len()).rev() {
                    idx[m] += 1;
                    if idx[m] < dims[m] {
                        break;
                    }
                    idx[m] = 0;
                }
            }
        }
        out
    }
}

/// `||t - m||_F / ||t||_F`, or the absolute norm when `t` is zero.
pub fn relative_error(t: &DenseTensor, approx: &DenseTensor) -> Result<f64> {
    let diff = t.sub(approx)?.frobenius_norm();
    let n = t.frobenius_norm();
    Ok(if n > 0.0 { diff / n } else { diff })
}

pub fn fit_error(t: &DenseTensor, m: &TuckerModel) -> Result<f64> {
    let dims: Vec<usize> = m.factors.iter().map(Matrix::rows).collect();
    if dims != t.dims() {
        return Err(shape_err(format!(
            "model dims {dims:?} do not match tensor dims {:?}",
            t.dims()
        )));
    }
    relative_error(t, &m.reconstruct())
}

fn check_ranks(t: &DenseTensor, ranks: &[usize]) -> Result<()> {
    if ranks.len() != t.order() {
        return Err(Error::InvalidArgument(format!(
            "{} ranks given for an order-{} tensor",
            ranks.len(),
            t.order()
        )));
    }
    for (n, (&r, &d)) in ranks.iter().zip(t.dims()).enumerate() {
        if r == 0 || r > d {
            return Err(Error::InvalidRank(format!(
                "rank {r} for mode {n} outside 1..={d}"
            )));
        }
    }
    Ok(())
}

pub fn hosvd(t: &DenseTensor, ranks: &[usize]) -> Result<TuckerModel> {
    check_ranks(t, ranks)?;
    let factors = (0..t.order())
        .map(|n| Ok(leading_left_singular_vectors(&unfold(t, n)?, ranks[n])))
        .collect::<Result<Vec<_>>>()?;
    let core = project_transposed(t, &factors)?;
    let mut m = TuckerModel::new(core, factors)?;
    m.fit_error = fit_error(t, &m)?;
    Ok(m)
}

fn project_transposed(t: &DenseTensor, factors: &[Matrix]) -> Result<DenseTensor> {
    let ts: Vec<Matrix> = factors.iter().map(Matrix::transpose).collect();
    product_all(t, &ts)
}

/// `t` projected onto the transposes of every factor except mode `skip`.
fn project_except(t: &DenseTensor, factors: &[Matrix], skip: usize) -> Result<DenseTensor> {
    let ts: Vec<(Matrix, usize)> = factors
        .iter()
        .enumerate()
        .filter(|(m, _)| *m != skip)
        .map(|(m, f)| (f.transpose(), m))
        .collect();
    let pairs: Vec<(&Matrix, usize)> = ts.iter().map(|(f, m)| (f, *m)).collect();
    multi_mode_product(t, &pairs)
}

/// Higher-order orthogonal iteration, started from HOSVD.
pub fn hooi(t: &DenseTensor, ranks: &[usize], max_iters: usize, tol: f64) -> Result<TuckerModel> {
    let init = hosvd(t, ranks)?;
    hooi_from(t, init.factors, max_iters, tol)
}

/// HOOI sweeps from the given orthonormal factors.
pub fn hooi_from(
    t: &DenseTensor,
    mut factors: Vec<Matrix>,
    max_iters: usize,
    tol: f64,
) -> Result<TuckerModel> {
    let ranks: Vec<usize> = factors.iter().map(Matrix::cols).collect();
    check_ranks(t, &ranks)?;
    let err = |f: &[Matrix]| -> Result<f64> {
        let core = project_transposed(t, f)?;
        relative_error(t, &product_all(&core, f)?)
    };
    let mut trace = vec![err(&factors)?];
    let mut warnings = Vec::new();
    let mut iters = 0;
    while iters < max_iters {
        for n in 0..t.order() {
            let w = project_except(t, &factors, n)?;
            factors[n] = leading_left_singular_vectors(&unfold(&w, n)?, ranks[n]);
        }
        iters += 1;
        let e = err(&factors)?;
        let prev = *trace.last().unwrap();
        trace.push(e);
        if rel_change(prev, e) < tol {
            break;
        }
    }
    if iters >= max_iters && max_iters > 1 {
        warnings.push(Warning::NotConverged { iterations: iters });
    }
    let core = project_transposed(t, &factors)?;
    let mut m = TuckerModel::new(core, factors)?;
    m.fit_error = fit_error(t, &m)?;
    m.trace = trace;
    m.warnings = warnings;
    Ok(m)
}

/// `t x_1 pinv(B_1) .. x_N pinv(B_N)`.
pub fn core_project(t: &DenseTensor, factors: &[Matrix]) -> Result<DenseTensor> {
    if factors.len() != t.order() {
        return Err(shape_err(format!(
            "{} factors for an order-{} tensor",
            factors.len(),
            t.order()
        )));
    }
    for (n, f) in factors.iter().enumerate() {
        if f.rows() != t.dims()[n] {
            return Err(shape_err(format!(
                "factor {n} has {} rows, tensor dim is {}",
                f.rows(),
                t.dims()[n]
            )));
        }
    }
    let pinvs: Vec<Matrix> = factors.iter().map(|f| pseudo_inverse(f, None)).collect();
    product_all(t, &pinvs)
}

/// Tucker-1 along `mode`: returns `(core, factor)` with `t ~ core x_mode factor`.
pub fn tucker1(t: &DenseTensor, mode: usize, j: usize) -> Result<(DenseTensor, Matrix)> {
    let y = unfold(t, mode)?;
    if j == 0 || j > t.dims()[mode] {
        return Err(Error::InvalidRank(format!(
            "rank {j} for mode {mode} outside 1..={}",
            t.dims()[mode]
        )));
    }
    let u = leading_left_singular_vectors(&y, j);
    let core = mode_product(t, &u.transpose(), mode)?;
    Ok((core, u))
}

fn cp_khatri_rao(factors: &[Matrix], skip: usize) -> Matrix {
    // earlier modes vary fastest in the unfolding columns
    let mut kr: Option<Matrix> = None;
    for (m, f) in factors.iter().enumerate().rev() {
        if m == skip {
            continue;
        }
        kr = Some(match kr {
            None => f.clone(),
            Some(acc) => khatri_rao(&acc, f).expect("equal ranks"),
        });
    }
    kr.expect("order >= 2")
}

fn hadamard_gram(factors: &[Matrix], skip: usize) -> Matrix {
    let r = factors[0].cols();
    let mut g = Matrix::from_fn(r, r, |_, _| 1.0);
    for (m, f) in factors.iter().enumerate() {
        if m == skip {
            continue;
        }
        let ff = f.t_dot(f);
        for i in 0..r {
            for j in 0..r {
                g.set(i, j, g.get(i, j) * ff.get(i, j));
            }
        }
    }
    g
}

fn max_column_congruence(f: &Matrix) -> f64 {
    let cols = f.columns();
    let mut best = 0.0f64;
    for i in 0..cols.len() {
        for j in i + 1..cols.len() {
            best = best.max(congruence(&cols[i], &cols[j]));
        }
    }
    best
}

/// CP decomposition by alternating least squares. Three seeded random starts
/// are run and the best final fit is kept (ties go to the earliest start).
pub fn cp_als(t: &DenseTensor, r: usize, max_iters: usize, tol: f64, seed: u64) -> Result<CPModel> {
    if r == 0 {
        return Err(Error::InvalidRank("CP rank must be positive".into()));
    }
    if t.order() < 2 {
        return Err(Error::InvalidArgument("CP needs a tensor of order at least 2".into()));
    }
    if max_iters == 0 || !(tol > 0.0) {
        return Err(Error::InvalidArgument("max_iters and tol must be positive".into()));
    }
    let mut rng = seeded(seed);
    let mut best: Option<CPModel> = None;
    for _ in 0..3 {
        let init: Vec<Matrix> = t
            .dims()
            .iter()
            .map(|&d| Matrix::from_fn(d, r, |_, _| rng.sample(StandardNormal)))
            .collect();
        let m = cp_als_from(t, init, max_iters, tol)?;
        if best.as_ref().is_none_or(|b| m.fit_error < b.fit_error) {
            best = Some(m);
        }
    }
    Ok(best.unwrap())
}

/// CP-ALS from explicit starting factors.
pub fn cp_als_from(t: &DenseTensor, mut factors: Vec<Matrix>, max_iters: usize, tol: f64) -> Result<CPModel> {
    let n_modes = t.order();
    if factors.len() != n_modes {
        return Err(shape_err("one starting factor per mode is required"));
    }
    let r = factors[0].cols();
    for (n, f) in factors.iter().enumerate() {
        if f.rows() != t.dims()[n] || f.cols() != r {
            return Err(shape_err(format!("starting factor {n} has shape {:?}", f.shape())));
        }
    }
    let unfoldings: Vec<Matrix> = (0..n_modes).map(|n| unfold(t, n)).collect::<Result<_>>()?;
    let mut weights = vec![1.0; r];
    let model_err = |f: &[Matrix], w: &[f64]| -> Result<f64> {
        let m = CPModel {
            weights: w.to_vec(),
            factors: f.to_vec(),
            fit_error: 0.0,
            trace: Vec::new(),
            warnings: Vec::new(),
        };
        relative_error(t, &m.reconstruct())
    };
    let mut trace = vec![model_err(&factors, &weights)?];
    let mut regularized = false;
    let mut iters = 0;
    while iters < max_iters {
        for n in 0..n_modes {
            // weights are folded into the mode being solved for
            let kr = cp_khatri_rao(&factors, n);
            let mttkrp = unfoldings[n].dot(&kr);
            let gram = hadamard_gram(&factors, n);
            let (sol, used_pinv) = solve_psd(&gram, &mttkrp.transpose());
            regularized |= used_pinv;
            let mut f = sol.transpose();
            let norms = f.column_norms();
            for (k, &nk) in norms.iter().enumerate() {
                weights[k] = nk;
                if nk > 0.0 {
                    for i in 0..f.rows() {
                        f.set(i, k, f.get(i, k) / nk);
                    }
                }
            }
            factors[n] = f;
        }
        iters += 1;
        let e = model_err(&factors, &weights)?;
        let prev = *trace.last().unwrap();
        trace.push(e);
        if rel_change(prev, e) < tol {
            break;
        }
    }
    // canonical form: positive weights sorted descending
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| weights[b].abs().partial_cmp(&weights[a].abs()).unwrap().then(a.cmp(&b)));
    let weights: Vec<f64> = order.iter().map(|&k| weights[k]).collect();
    let mut factors: Vec<Matrix> = factors.iter().map(|f| f.select_columns(&order)).collect();
    // sign convention: every factor but the first has a positive dominant entry
    for k in 0..r {
        for n in 1..n_modes {
            let col = factors[n].column(k);
            if linalg::sign_of_largest(&col) < 0.0 {
                for f in [0, n] {
                    for i in 0..factors[f].rows() {
                        let v = factors[f].get(i, k);
                        factors[f].set(i, k, -v);
                    }
                }
            }
        }
    }
    let mut warnings = Vec::new();
    if regularized {
        warnings.push(Warning::RegularizedSolve);
    }
    let collinear = factors.iter().map(max_column_congruence).fold(0.0, f64::max);
    if collinear > 0.999 {
        warnings.push(Warning::CollinearFactors {
            congruence: collinear,
        });
    }
    if iters >= max_iters {
        warnings.push(Warning::NotConverged { iterations: iters });
    }
    let fit_error = model_err(&factors, &weights)?;
    Ok(CPModel {
        weights,
        factors,
        fit_error,
        trace,
        warnings,
    })
}

/// Tucker form of a CP model with a super-diagonal core.
pub fn cp_to_tucker(m: &CPModel) -> TuckerModel {
    let r = m.rank();
    let dims = vec![r; m.factors.len()];
    let core = DenseTensor::from_fn(&dims, |idx| {
        if idx.iter().all(|&i| i == idx[0]) {
            m.weights[idx[0]]
        } else {
            0.0
        }
    });
    let mut t = TuckerModel::new(core, m.factors.clone()).expect("cp factors share a rank");
    t.fit_error = m.fit_error;
    t
}

fn penalty(kind: ConstraintKind, u: &Matrix) -> f64 {
    match kind {
        ConstraintKind::Sparse => crate::factor2d::l1_norm(u),
        ConstraintKind::Smooth => roughness(u),
        _ => 0.0,
    }
}

/// `unfold(core x_{m != n} U_m, n)`, so that `unfold(model, n) = U_n * this`.
fn mode_design(core: &DenseTensor, factors: &[Matrix], n: usize) -> Result<Matrix> {
    let pairs: Vec<(&Matrix, usize)> = factors
        .iter()
        .enumerate()
        .filter(|(m, _)| *m != n)
        .map(|(m, f)| (f, m))
        .collect();
    unfold(&multi_mode_product(core, &pairs)?, n)
}

/// Exact minimizer (or, for the iterative kinds, a nonincreasing update) of
/// `||y - u m||^2 + alpha C(u)` over `u` under `kind`.
fn update_factor(y: &Matrix, m: &Matrix, u: &mut Matrix, kind: ConstraintKind, alpha: f64) {
    let ymt = y.dot_t(m); // I x J
    let mmt = m.dot_t(m); // J x J
    let j = u.cols();
    match kind {
        ConstraintKind::Unconstrained => {
            let (sol, _) = solve_psd(&mmt, &ymt.transpose());
            *u = sol.transpose();
        }
        ConstraintKind::Orthogonal => *u = linalg::procrustes(&ymt),
        ConstraintKind::Nonnegative => hals_sweep(y, u, &m.transpose()),
        ConstraintKind::Sparse | ConstraintKind::Smooth => {
            let rows = u.rows();
            for k in 0..j {
                let d = mmt.get(k, k);
                if d <= 0.0 {
                    continue;
                }
                let r: Vec<f64> = (0..rows)
                    .map(|i| {
                        let mut s = ymt.get(i, k);
                        for l in 0..j {
                            if l != k {
                                s -= u.get(i, l) * mmt.get(l, k);
                            }
                        }
                        s
                    })
                    .collect();
                let col: Vec<f64> = if kind == ConstraintKind::Sparse {
                    r.iter().map(|&v| soft_threshold(v, alpha / 2.0) / d).collect()
                } else {
                    BandedCholesky::new(rows, 2, |p, q| {
                        let id = if p == q { d } else { 0.0 };
                        id + alpha * second_difference_gram(rows, p, q)
                    })
                    .expect("positive definite")
                    .solve(&r)
                };
                u.set_column(k, &col);
            }
        }
        ConstraintKind::Independent => unreachable!("rejected before iterating"),
    }
}

/// Tucker fit with a per-mode constraint and penalty weight:
/// minimizes `||t - G x {U}||^2 + sum_n alpha_n C_n(U_n)` by block-coordinate
/// descent (one factor at a time, then the core by pseudo-inverse projection).
///
/// `C_n` is the L1 norm for sparse modes and the squared second differences
/// along the rows of `U_n` for smooth modes; the other kinds are hard
/// constraints with no penalty term.
pub fn penalized_tucker(
    t: &DenseTensor,
    ranks: &[usize],
    specs: &[ConstraintSpec],
    alphas: &[f64],
) -> Result<TuckerModel> {
    check_ranks(t, ranks)?;
    let n_modes = t.order();
    if specs.len() != n_modes || alphas.len() != n_modes {
        return Err(Error::InvalidArgument(format!(
            "need {n_modes} constraint specs and weights, got {} and {}",
            specs.len(),
            alphas.len()
        )));
    }
    for (n, s) in specs.iter().enumerate() {
        s.validate().map_err(|e| e.in_mode(n))?;
        if s.kind == ConstraintKind::Independent {
            return Err(Error::Unsupported(format!(
                "independence constraint on mode {n} is not available as a penalty; use mwbss_refine"
            )));
        }
    }
    if let Some(a) = alphas.iter().find(|&&a| !(a >= 0.0) || !a.is_finite()) {
        return Err(Error::InvalidArgument(format!("penalty weights must be >= 0, got {a}")));
    }
    let max_iters = specs.iter().map(|s| s.max_iters).max().unwrap();
    let tol = specs.iter().map(|s| s.tol).fold(f64::INFINITY, f64::min);

    let init = hosvd(t, ranks)?;
    let mut factors: Vec<Matrix> = init
        .factors
        .iter()
        .zip(specs)
        .map(|(f, s)| match s.kind {
            ConstraintKind::Nonnegative => f.map(f64::abs),
            _ => f.clone(),
        })
        .collect();
    let unfoldings: Vec<Matrix> = (0..n_modes).map(|n| unfold(t, n)).collect::<Result<_>>()?;
    let mut core = core_project(t, &factors)?;
    let objective = |core: &DenseTensor, factors: &[Matrix]| -> Result<f64> {
        let rec = product_all(core, factors)?;
        let r = t.sub(&rec)?.frobenius_norm();
        let p: f64 = (0..n_modes)
            .map(|n| alphas[n] * penalty(specs[n].kind, &factors[n]))
            .sum();
        Ok(r * r + p)
    };
    let mut trace = vec![objective(&core, &factors)?];
    let mut iters = 0;
    while iters < max_iters {
        for n in 0..n_modes {
            let m = mode_design(&core, &factors, n)?;
            update_factor(&unfoldings[n], &m, &mut factors[n], specs[n].kind, alphas[n]);
        }
        core = core_project(t, &factors)?;
        iters += 1;
        let obj = objective(&core, &factors)?;
        let prev = *trace.last().unwrap();
        trace.push(obj);
        if rel_change(prev, obj) < tol {
            break;
        }
    }
    let mut model = TuckerModel::new(core, factors)?;
    model.fit_error = fit_error(t, &model)?;
    model.trace = trace;
    if iters >= max_iters {
        model.warnings.push(Warning::NotConverged { iterations: iters });
    }
    Ok(model)
}

/// One averaged Tucker-1 term `core x_mode factor`.
#[derive(Debug, Clone)]
pub struct BodBlock {
    pub core: DenseTensor,
    pub factor: Matrix,
    pub mode: usize,
}

impl BodBlock {
    pub fn reconstruct(&self) -> DenseTensor {
        mode_product(&self.core, &self.factor, self.mode).expect("block shapes are consistent")
    }
}

#[derive(Debug, Clone)]
pub struct BodModel {
    pub blocks: Vec<BodBlock>,
    /// Residual Frobenius norm after initialization and after every sweep.
    pub trace: Vec<f64>,
    pub fit_error: f64,
}

impl BodModel {
    /// `(1/N) sum_n blocks_n`.
    pub fn reconstruct(&self) -> DenseTensor {
        let n = self.blocks.len() as f64;
        let mut acc = self.blocks[0].reconstruct();
        for b in &self.blocks[1..] {
            acc = acc.add(&b.reconstruct()).expect("equal dims");
        }
        acc.scale(1.0 / n)
    }
}

/// Block-oriented decomposition `t ~ (1/N) sum_n G_n x_n U_n`, one Tucker-1
/// term per mode, fitted by exact block updates.
pub fn bod_decompose(t: &DenseTensor, ranks: &[usize], max_iters: usize, tol: f64) -> Result<BodModel> {
    check_ranks(t, ranks)?;
    let n_modes = t.order();
    let nf = n_modes as f64;
    let mut blocks: Vec<BodBlock> = (0..n_modes)
        .map(|n| {
            let (core, factor) = tucker1(t, n, ranks[n])?;
            Ok(BodBlock { core, factor, mode: n })
        })
        .collect::<Result<_>>()?;
    let mut recs: Vec<DenseTensor> = blocks.iter().map(BodBlock::reconstruct).collect();
    let residual = |recs: &[DenseTensor]| -> Result<f64> {
        let mut acc = recs[0].clone();
        for r in &recs[1..] {
            acc = acc.add(r)?;
        }
        Ok(t.sub(&acc.scale(1.0 / nf))?.frobenius_norm())
    };
    let mut trace = vec![residual(&recs)?];
    let mut iters = 0;
    while iters < max_iters {
        for n in 0..n_modes {
            // target for block n: N t - sum of the other blocks
            let mut target = t.scale(nf);
            for (m, r) in recs.iter().enumerate() {
                if m != n {
                    target = target.sub(r)?;
                }
            }
            let (core, factor) = tucker1(&target, n, ranks[n])?;
            blocks[n] = BodBlock { core, factor, mode: n };
            recs[n] = blocks[n].reconstruct();
        }
        iters += 1;
        let r = residual(&recs)?;
        let prev = *trace.last().unwrap();
        trace.push(r);
        if rel_change(prev, r) < tol {
            break;
        }
    }
    let model = BodModel {
        blocks,
        trace,
        fit_error: 0.0,
    };
    let fit_error = relative_error(t, &model.reconstruct())?;
    Ok(BodModel { fit_error, ..model })
}
