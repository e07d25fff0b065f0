//! Partial least squares: the matrix form and a Tucker-based multiway form
//! where the predictor and response tensors share factors in some modes.

use crate::error::{shape_err, Error, Result};
use crate::factor2d::rel_change;
use crate::linalg::{leading_left_singular_vectors, pseudo_inverse};
use crate::matrix::{norm, Matrix};
use crate::tensor::{fold, multi_mode_product, product_all, unfold, DenseTensor};
use crate::tucker::{core_project, relative_error, TuckerModel};
use crate::warning::Warning;

#[derive(Debug, Clone)]
pub struct PLSModel {
    /// Unit-norm direction vectors, `N x J`.
    pub w: Matrix,
    /// Training scores, `I x J`, mutually orthogonal.
    pub a: Matrix,
    /// X loadings, `N x J`.
    pub b: Matrix,
    /// Unit-norm Y loadings, `M x J`.
    pub c: Matrix,
    /// Per-component Y scaling.
    pub d: Vec<f64>,
    pub x_mean: Vec<f64>,
    pub y_mean: Vec<f64>,
    pub warnings: Vec<Warning>,
}

impl PLSModel {
    pub fn components(&self) -> usize {
        self.d.len()
    }

    /// `Y ~ A D C^T` on the training rows (centered).
    pub fn fitted_y_centered(&self) -> Matrix {
        self.a.scale_columns(&self.d).dot_t(&self.c)
    }

    /// Coefficient matrix `R D C^T` with `R = W (B^T W)^{-1}`; predictions are
    /// `(x - x_mean) * coefficients + y_mean`.
    pub fn coefficients(&self) -> Matrix {
        let btw = self.b.t_dot(&self.w);
        let r = self.w.dot(&pseudo_inverse(&btw, None));
        r.scale_columns(&self.d).dot_t(&self.c)
    }
}

fn column_means(m: &Matrix) -> Vec<f64> {
    let n = m.rows() as f64;
    (0..m.cols()).map(|j| m.column(j).iter().sum::<f64>() / n).collect()
}

fn center(m: &Matrix, means: &[f64]) -> Matrix {
    Matrix::from_fn(m.rows(), m.cols(), |i, j| m.get(i, j) - means[j])
}

/// Sequential extraction of `j` latent components.
///
/// Each direction `w` is the dominant left singular vector of `X_k^T Y`
/// for the deflated predictors `X_k`, i.e. it maximizes the covariance
/// between `X_k w` and `Y`. Only `X` is deflated. Extraction stops early,
/// with a warning, once the deflated cross-covariance vanishes.
pub fn pls_fit(x: &Matrix, y: &Matrix, j: usize) -> Result<PLSModel> {
    if x.rows() != y.rows() {
        return Err(shape_err(format!(
            "x has {} rows but y has {}",
            x.rows(),
            y.rows()
        )));
    }
    if j == 0 {
        return Err(Error::InvalidRank("at least one component is required".into()));
    }
    let x_mean = column_means(x);
    let y_mean = column_means(y);
    let xc = center(x, &x_mean);
    let yc = center(y, &y_mean);
    let cross0 = xc.t_dot(&yc).frobenius_norm();
    let x0 = xc.frobenius_norm();
    let mut xk = xc.clone();
    let (mut ws, mut as_, mut bs, mut cs, mut ds) = (vec![], vec![], vec![], vec![], vec![]);
    let limit = j.min(x.cols());
    for _ in 0..limit {
        let cross = xk.t_dot(&yc);
        if xk.frobenius_norm() <= 1e-10 * x0 || cross.frobenius_norm() <= 1e-10 * cross0 || cross0 == 0.0 {
            break;
        }
        let w = leading_left_singular_vectors(&cross, 1).column(0);
        let a = xk.mul_vec(&w);
        let aa: f64 = a.iter().map(|v| v * v).sum();
        if aa <= 0.0 {
            break;
        }
        let b: Vec<f64> = xk.t_mul_vec(&a).into_iter().map(|v| v / aa).collect();
        for i in 0..xk.rows() {
            for n in 0..xk.cols() {
                let v = xk.get(i, n) - a[i] * b[n];
                xk.set(i, n, v);
            }
        }
        let q: Vec<f64> = yc.t_mul_vec(&a).into_iter().map(|v| v / aa).collect();
        let d = norm(&q);
        let c: Vec<f64> = if d > 0.0 {
            q.iter().map(|v| v / d).collect()
        } else {
            let mut e = vec![0.0; q.len()];
            e[0] = 1.0;
            e
        };
        ws.push(w);
        as_.push(a);
        bs.push(b);
        cs.push(c);
        ds.push(d);
    }
    if ws.is_empty() {
        return Err(Error::RankDeficient(
            "x and y share no covariance; no component can be extracted".into(),
        ));
    }
    let mut warnings = Vec::new();
    if ws.len() < j {
        warnings.push(Warning::ReducedComponents {
            requested: j,
            achieved: ws.len(),
        });
    }
    Ok(PLSModel {
        w: Matrix::from_columns(&ws)?,
        a: Matrix::from_columns(&as_)?,
        b: Matrix::from_columns(&bs)?,
        c: Matrix::from_columns(&cs)?,
        d: ds,
        x_mean,
        y_mean,
        warnings,
    })
}

pub fn pls_predict(m: &PLSModel, x_new: &Matrix) -> Result<Matrix> {
    if x_new.cols() != m.x_mean.len() {
        return Err(shape_err(format!(
            "model expects {} predictor columns, got {}",
            m.x_mean.len(),
            x_new.cols()
        )));
    }
    let pred = center(x_new, &m.x_mean).dot(&m.coefficients());
    Ok(Matrix::from_fn(pred.rows(), pred.cols(), |i, j| pred.get(i, j) + m.y_mean[j]))
}

#[derive(Debug, Clone)]
pub struct TensorPLSModel {
    pub x_model: TuckerModel,
    pub y_model: TuckerModel,
    /// Modes whose factor is the same matrix in both models; always holds 0,
    /// the sample mode.
    pub shared_modes: Vec<usize>,
    /// Means over the sample mode (mode-0 dim 1).
    pub x_mean: DenseTensor,
    pub y_mean: DenseTensor,
    /// Least-squares map from x-core coordinates to y-core coordinates
    /// (`unfold(G_x, 0)` columns to `unfold(G_y, 0)` columns).
    pub linkage: Matrix,
    pub x_trace: Vec<f64>,
    pub y_trace: Vec<f64>,
    /// `||X - X_hat||^2 + ||Y - Y_hat||^2` relative to `||X||^2 + ||Y||^2`.
    pub combined_trace: Vec<f64>,
    /// Fraction of each core's energy on its block diagonal.
    pub block_energy: (f64, f64),
    pub warnings: Vec<Warning>,
}

#[derive(Debug, Clone, Copy)]
pub struct TensorPlsOptions {
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for TensorPlsOptions {
    fn default() -> Self {
        Self {
            max_iters: crate::tucker::DEFAULT_MAX_ITERS,
            tol: crate::tucker::DEFAULT_TOL,
        }
    }
}

fn mode0_mean(t: &DenseTensor) -> Result<DenseTensor> {
    let u = unfold(t, 0)?;
    let means = Matrix::from_fn(1, u.cols(), |_, j| {
        (0..u.rows()).map(|i| u.get(i, j)).sum::<f64>() / u.rows() as f64
    });
    let mut dims = t.dims().to_vec();
    dims[0] = 1;
    fold(&means, 0, &dims)
}

/// `t - mean` with `mean` broadcast along mode 0.
fn subtract_mode0(t: &DenseTensor, mean: &DenseTensor, sign: f64) -> Result<DenseTensor> {
    let u = unfold(t, 0)?;
    let m = unfold(mean, 0)?;
    if u.cols() != m.cols() {
        return Err(shape_err(format!(
            "non-sample dims {:?} do not match the model's {:?}",
            &t.dims()[1..],
            &mean.dims()[1..]
        )));
    }
    let out = Matrix::from_fn(u.rows(), u.cols(), |i, j| u.get(i, j) - sign * m.get(0, j));
    fold(&out, 0, t.dims())
}

fn project_except(t: &DenseTensor, factors: &[Matrix], skip: usize) -> Result<DenseTensor> {
    let ts: Vec<(Matrix, usize)> = factors
        .iter()
        .enumerate()
        .filter(|(n, _)| *n != skip)
        .map(|(n, f)| (f.transpose(), n))
        .collect();
    let pairs: Vec<(&Matrix, usize)> = ts.iter().map(|(f, n)| (f, *n)).collect();
    multi_mode_product(t, &pairs)
}

fn check_ranks(t: &DenseTensor, ranks: &[usize], which: &str) -> Result<()> {
    if ranks.len() != t.order() {
        return Err(Error::InvalidArgument(format!(
            "{} {which} ranks for an order-{} tensor",
            ranks.len(),
            t.order()
        )));
    }
    for (n, (&r, &d)) in ranks.iter().zip(t.dims()).enumerate() {
        if r == 0 || r > d {
            return Err(Error::InvalidRank(format!(
                "{which} rank {r} for mode {n} outside 1..={d}"
            )));
        }
    }
    Ok(())
}

/// Fraction of core energy on entries whose per-mode block ids coincide,
/// with each mode split into `min(ranks)` equal blocks.
pub fn block_diagonal_energy(core: &DenseTensor) -> f64 {
    let dims = core.dims().to_vec();
    let blocks = *dims.iter().min().unwrap();
    let total: f64 = core.data().iter().map(|v| v * v).sum();
    if total == 0.0 {
        return 0.0;
    }
    let mut on = 0.0;
    let mut idx = vec![0usize; dims.len()];
    for &v in core.data() {
        let b0 = idx[0] * blocks / dims[0];
        if idx.iter().zip(&dims).all(|(&i, &d)| i * blocks / d == b0) {
            on += v * v;
        }
        for m in (0..dims.len()).rev() {
            idx[m] += 1;
            if idx[m] < dims[m] {
                break;
            }
            idx[m] = 0;
        }
    }
    on / total
}

/// Coupled Tucker fit of a predictor tensor `x` and a response tensor `y`
/// that share mode 0 (samples) and possibly further modes.
///
/// Shared factors are the dominant left singular subspace of the side-by-side
/// mode-`n` unfoldings of both projected tensors, kept only when neither
/// tensor's fit gets worse; the remaining factors get ordinary HOOI updates. Both tensors are centered along mode 0 first.
pub fn tensor_pls_fit(
    x: &DenseTensor,
    y: &DenseTensor,
    ranks_x: &[usize],
    ranks_y: &[usize],
    shared_modes: &[usize],
    opts: TensorPlsOptions,
) -> Result<TensorPLSModel> {
    check_ranks(x, ranks_x, "x")?;
    check_ranks(y, ranks_y, "y")?;
    let mut shared: Vec<usize> = shared_modes.to_vec();
    shared.sort_unstable();
    shared.dedup();
    if shared.first() != Some(&0) {
        return Err(Error::InvalidArgument("shared modes must include mode 0".into()));
    }
    for &n in &shared {
        if n >= x.order() || n >= y.order() {
            return Err(Error::InvalidMode {
                mode: n,
                order: x.order().min(y.order()),
            });
        }
        if x.dims()[n] != y.dims()[n] {
            return Err(shape_err(format!(
                "shared mode {n}: x has {} entries, y has {}",
                x.dims()[n],
                y.dims()[n]
            )));
        }
        if ranks_x[n] != ranks_y[n] {
            return Err(Error::InvalidRank(format!(
                "shared mode {n} needs equal ranks, got {} and {}",
                ranks_x[n], ranks_y[n]
            )));
        }
    }
    let x_mean = mode0_mean(x)?;
    let y_mean = mode0_mean(y)?;
    let xc = subtract_mode0(x, &x_mean, 1.0)?;
    let yc = subtract_mode0(y, &y_mean, 1.0)?;
    let is_shared = |n: usize| shared.binary_search(&n).is_ok();

    let shared_basis = |wx: &DenseTensor, wy: &DenseTensor, n: usize, r: usize| -> Result<Matrix> {
        let ux = unfold(wx, n)?;
        let uy = unfold(wy, n)?;
        Ok(leading_left_singular_vectors(&Matrix::hstack(&[&ux, &uy])?, r))
    };
    let mut fx: Vec<Matrix> = Vec::with_capacity(x.order());
    let mut fy: Vec<Matrix> = Vec::with_capacity(y.order());
    for n in 0..x.order().max(y.order()) {
        if is_shared(n) {
            let u = shared_basis(&xc, &yc, n, ranks_x[n])?;
            fx.push(u.clone());
            fy.push(u);
        } else {
            if n < x.order() {
                fx.push(leading_left_singular_vectors(&unfold(&xc, n)?, ranks_x[n]));
            }
            if n < y.order() {
                fy.push(leading_left_singular_vectors(&unfold(&yc, n)?, ranks_y[n]));
            }
        }
    }
    let xn2 = xc.frobenius_norm().powi(2);
    let yn2 = yc.frobenius_norm().powi(2);
    let errors = |fx: &[Matrix], fy: &[Matrix]| -> Result<(f64, f64, f64)> {
        let gx = core_project(&xc, fx)?;
        let gy = core_project(&yc, fy)?;
        let ex = relative_error(&xc, &product_all(&gx, fx)?)?;
        let ey = relative_error(&yc, &product_all(&gy, fy)?)?;
        let total = xn2 + yn2;
        let comb = if total > 0.0 {
            (ex * ex * xn2 + ey * ey * yn2) / total
        } else {
            0.0
        };
        Ok((ex, ey, comb))
    };
    let (ex, ey, ec) = errors(&fx, &fy)?;
    let (mut x_trace, mut y_trace, mut combined) = (vec![ex], vec![ey], vec![ec]);
    let mut iters = 0;
    while iters < opts.max_iters {
        for n in 0..x.order().max(y.order()) {
            if is_shared(n) {
                let wx = project_except(&xc, &fx, n)?;
                let wy = project_except(&yc, &fy, n)?;
                let u = shared_basis(&wx, &wy, n, ranks_x[n])?;
                // the joint step lowers the combined error but may raise one
                // tensor's; such steps are skipped
                let (ex0, ey0, _) = errors(&fx, &fy)?;
                let old = (std::mem::replace(&mut fx[n], u.clone()), std::mem::replace(&mut fy[n], u));
                let (ex1, ey1, _) = errors(&fx, &fy)?;
                if ex1 > ex0 || ey1 > ey0 {
                    fx[n] = old.0;
                    fy[n] = old.1;
                }
            } else {
                if n < x.order() {
                    let w = project_except(&xc, &fx, n)?;
                    fx[n] = leading_left_singular_vectors(&unfold(&w, n)?, ranks_x[n]);
                }
                if n < y.order() {
                    let w = project_except(&yc, &fy, n)?;
                    fy[n] = leading_left_singular_vectors(&unfold(&w, n)?, ranks_y[n]);
                }
            }
        }
        iters += 1;
        let (ex, ey, ec) = errors(&fx, &fy)?;
        let prev = *combined.last().unwrap();
        x_trace.push(ex);
        y_trace.push(ey);
        combined.push(ec);
        if rel_change(prev, ec) < opts.tol {
            break;
        }
    }
    let gx = core_project(&xc, &fx)?;
    let gy = core_project(&yc, &fy)?;
    let linkage = pseudo_inverse(&unfold(&gx, 0)?, None).dot(&unfold(&gy, 0)?);
    let block_energy = (block_diagonal_energy(&gx), block_diagonal_energy(&gy));
    let mut x_model = TuckerModel::new(gx, fx)?;
    x_model.fit_error = *x_trace.last().unwrap();
    x_model.trace = x_trace.clone();
    let mut y_model = TuckerModel::new(gy, fy)?;
    y_model.fit_error = *y_trace.last().unwrap();
    y_model.trace = y_trace.clone();
    let mut warnings = Vec::new();
    if iters >= opts.max_iters {
        warnings.push(Warning::NotConverged { iterations: iters });
    }
    Ok(TensorPLSModel {
        x_model,
        y_model,
        shared_modes: shared,
        x_mean,
        y_mean,
        linkage,
        x_trace,
        y_trace,
        combined_trace: combined,
        block_energy,
        warnings,
    })
}

/// Predicts the response tensor for new samples along mode 0.
///
/// `x_new` is centered and projected onto the x-model factors of every
/// non-sample mode, giving per-sample x-core coordinates; these are mapped
/// through the linkage to y-core coordinates and expanded with the y-model
/// factors.
pub fn tensor_pls_predict(m: &TensorPLSModel, x_new: &DenseTensor) -> Result<DenseTensor> {
    let xdims = m.x_mean.dims();
    if x_new.order() != xdims.len() || x_new.dims()[1..] != xdims[1..] {
        return Err(shape_err(format!(
            "predictor dims {:?} do not match the model's non-sample dims {:?}",
            x_new.dims(),
            &xdims[1..]
        )));
    }
    let xc = subtract_mode0(x_new, &m.x_mean, 1.0)?;
    let pairs_x: Vec<(Matrix, usize)> = m.x_model.factors[1..]
        .iter()
        .enumerate()
        .map(|(k, f)| (f.transpose(), k + 1))
        .collect();
    let refs: Vec<(&Matrix, usize)> = pairs_x.iter().map(|(f, n)| (f, *n)).collect();
    let zx = unfold(&multi_mode_product(&xc, &refs)?, 0)?;
    let zy = zx.dot(&m.linkage);
    let mut gy_dims = m.y_model.core.dims().to_vec();
    gy_dims[0] = x_new.dims()[0];
    let gy = fold(&zy, 0, &gy_dims)?;
    let pairs_y: Vec<(&Matrix, usize)> = m.y_model.factors[1..]
        .iter()
        .enumerate()
        .map(|(k, f)| (f, k + 1))
        .collect();
    let yc = multi_mode_product(&gy, &pairs_y)?;
    subtract_mode0(&yc, &m.y_mean, -1.0)
}

/// Largest principal angle between the shared mode-0 factor and `truth`.
pub fn shared_factor_angle(m: &TensorPLSModel, truth: &Matrix) -> f64 {
    crate::metrics::max_principal_angle(&m.x_model.factors[0], truth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;
    use crate::rng::seeded;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn gauss(r: usize, c: usize, seed: u64) -> Matrix {
        let mut rng = seeded(seed);
        Matrix::from_fn(r, c, |_, _| rng.sample(StandardNormal))
    }

    #[test]
    fn full_rank_noiseless_is_exact() {
        let x = gauss(30, 4, 1);
        let v = gauss(4, 2, 2);
        let y = x.dot(&v);
        let m = pls_fit(&x, &y, 4).unwrap();
        let pred = pls_predict(&m, &x).unwrap();
        assert!(pred.max_abs_diff(&y) < 1e-8);
        let yc = center(&y, &m.y_mean);
        assert!(m.fitted_y_centered().max_abs_diff(&yc) < 1e-8);
    }

    #[test]
    fn orthonormal_predictors_pick_the_axis() {
        // left singular vectors of a centered matrix are centered and orthonormal
        let g = gauss(20, 3, 3);
        let q = linalg::svd(&center(&g, &column_means(&g))).u;
        let y = Matrix::from_fn(20, 1, |i, _| q.get(i, 0));
        let m = pls_fit(&q, &y, 1).unwrap();
        let w = m.w.column(0);
        assert!((w[0].abs() - 1.0).abs() < 1e-10, "{w:?}");
        let res = pls_predict(&m, &q).unwrap().sub(&y).frobenius_norm();
        assert!(res < 1e-8);
    }

    #[test]
    fn scores_orthogonal_and_directions_unit() {
        let x = gauss(40, 6, 4);
        let y = gauss(40, 3, 5);
        let m = pls_fit(&x, &y, 5).unwrap();
        let ata = m.a.t_dot(&m.a);
        for i in 0..5 {
            for j in 0..5 {
                if i != j {
                    assert!(ata.get(i, j).abs() < 1e-8 * ata.get(i, i));
                }
            }
            assert!((norm(&m.w.column(i)) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mean_input_predicts_mean_and_reduced_warning() {
        let x = gauss(10, 3, 6);
        let y = gauss(10, 2, 7);
        let m = pls_fit(&x, &y, 6).unwrap();
        assert_eq!(m.components(), 3);
        assert!(matches!(m.warnings[0], Warning::ReducedComponents { requested: 6, achieved: 3 }));
        let xm = Matrix::from_fn(2, 3, |_, j| m.x_mean[j]);
        let p = pls_predict(&m, &xm).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((p.get(i, j) - m.y_mean[j]).abs() < 1e-12);
            }
        }
        assert!(pls_predict(&m, &gauss(2, 4, 8)).is_err());
    }

    #[test]
    fn tensor_pls_same_tensor() {
        let mut rng = seeded(9);
        let x = DenseTensor::from_fn(&[8, 4, 3], |_| rng.random::<f64>());
        let m = tensor_pls_fit(&x, &x, &[2, 2, 2], &[2, 2, 2], &[0, 1, 2], TensorPlsOptions::default()).unwrap();
        assert_eq!(m.x_model.factors, m.y_model.factors);
        assert!((m.x_model.fit_error - m.y_model.fit_error).abs() < 1e-12);
    }

    #[test]
    fn tensor_pls_validation() {
        let x = DenseTensor::zeros(&[6, 3, 2]);
        let y = DenseTensor::zeros(&[5, 3]);
        let o = TensorPlsOptions::default();
        assert!(matches!(tensor_pls_fit(&x, &y, &[2, 2, 2], &[2, 2], &[0], o), Err(Error::Shape(_))));
        let y = DenseTensor::zeros(&[6, 3]);
        assert!(matches!(
            tensor_pls_fit(&x, &y, &[2, 2, 2], &[2, 2], &[1], o),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn block_energy_of_superdiagonal() {
        let core = DenseTensor::from_fn(&[2, 2, 2], |i| if i[0] == i[1] && i[1] == i[2] { 1.0 } else { 0.0 });
        assert_eq!(block_diagonal_energy(&core), 1.0);
    }
}
