//! Matrix kernels: thin SVD, pseudo-inverse, small linear solves.
//!
//! The SVD itself is delegated to `nalgebra`; everything here post-processes
//! its output into a fixed ordering so callers see deterministic results.

use nalgebra::DMatrix;

use crate::matrix::Matrix;

/// Thin SVD `m = u * diag(s) * v^T` with `s` nonincreasing.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

pub fn svd(m: &Matrix) -> Svd {
    // nalgebra's bidiagonalization is happier with tall inputs.
    if m.rows() < m.cols() {
        let t = svd(&m.transpose());
        return Svd {
            u: t.v,
            s: t.s,
            v: t.u,
        };
    }
    let dm: DMatrix<f64> = m.to_nalgebra();
    let dec = dm.svd(true, true);
    let u = dec.u.expect("u requested");
    let vt = dec.v_t.expect("v_t requested");
    let k = dec.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        dec.singular_values[b]
            .partial_cmp(&dec.singular_values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let s = order.iter().map(|&i| dec.singular_values[i].max(0.0)).collect();
    let u = Matrix::from_fn(m.rows(), k, |i, j| u[(i, order[j])]);
    let v = Matrix::from_fn(m.cols(), k, |i, j| vt[(order[j], i)]);
    Svd { u, s, v }
}

/// Flips each singular pair so the largest-magnitude entry of the `v` column
/// is positive.
pub fn fix_signs_by_v(svd: &mut Svd) {
    for j in 0..svd.v.cols() {
        let col = svd.v.column(j);
        if sign_of_largest(&col) < 0.0 {
            for i in 0..svd.v.rows() {
                svd.v.set(i, j, -svd.v.get(i, j));
            }
            for i in 0..svd.u.rows() {
                svd.u.set(i, j, -svd.u.get(i, j));
            }
        }
    }
}

pub(crate) fn sign_of_largest(v: &[f64]) -> f64 {
    let mut best = 0.0f64;
    for &x in v {
        if x.abs() > best.abs() {
            best = x;
        }
    }
    if best < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Leading `k` left singular vectors (orthonormal columns).
pub fn leading_left_singular_vectors(m: &Matrix, k: usize) -> Matrix {
    let mut dec = svd(m);
    let avail = dec.u.cols();
    if k <= avail {
        fix_signs_by_u(&mut dec);
        return dec.u.leading_columns(k);
    }
    // more vectors requested than the thin SVD provides: complete the basis
    fix_signs_by_u(&mut dec);
    complete_orthonormal_basis(&dec.u, k)
}

fn fix_signs_by_u(svd: &mut Svd) {
    for j in 0..svd.u.cols() {
        if sign_of_largest(&svd.u.column(j)) < 0.0 {
            for i in 0..svd.u.rows() {
                svd.u.set(i, j, -svd.u.get(i, j));
            }
            for i in 0..svd.v.rows() {
                svd.v.set(i, j, -svd.v.get(i, j));
            }
        }
    }
}

/// Extends orthonormal columns `q` to `k` columns with Gram-Schmidt against
/// the canonical basis.
pub(crate) fn complete_orthonormal_basis(q: &Matrix, k: usize) -> Matrix {
    let n = q.rows();
    assert!(k <= n);
    let mut cols = q.columns();
    let mut e = 0;
    while cols.len() < k && e < n {
        let mut v = vec![0.0; n];
        v[e] = 1.0;
        e += 1;
        for _ in 0..2 {
            for c in &cols {
                let p: f64 = c.iter().zip(&v).map(|(a, b)| a * b).sum();
                for (vi, ci) in v.iter_mut().zip(c) {
                    *vi -= p * ci;
                }
            }
        }
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nv > 1e-8 {
            cols.push(v.into_iter().map(|x| x / nv).collect());
        }
    }
    Matrix::from_columns(&cols).expect("nonempty basis")
}

/// Default truncation used when no tolerance is supplied:
/// `max(rows, cols) * eps * sigma_max`.
pub fn default_pinv_tol(m: &Matrix, s_max: f64) -> f64 {
    m.rows().max(m.cols()) as f64 * f64::EPSILON * s_max
}

/// Moore-Penrose pseudo-inverse; singular values at or below `tol` are dropped.
pub fn pseudo_inverse(m: &Matrix, tol: Option<f64>) -> Matrix {
    let dec = svd(m);
    let s_max = dec.s.first().copied().unwrap_or(0.0);
    let tol = tol.unwrap_or_else(|| default_pinv_tol(m, s_max));
    let inv: Vec<f64> = dec
        .s
        .iter()
        .map(|&s| if s > tol { 1.0 / s } else { 0.0 })
        .collect();
    // V * diag(inv) * U^T
    dec.v.scale_columns(&inv).dot_t(&dec.u)
}

/// Numerical rank with the default pseudo-inverse tolerance.
pub fn numerical_rank(m: &Matrix) -> usize {
    let dec = svd(m);
    let s_max = dec.s.first().copied().unwrap_or(0.0);
    let tol = default_pinv_tol(m, s_max);
    dec.s.iter().filter(|&&s| s > tol).count()
}

/// Solves `gram * X = rhs` for symmetric positive semidefinite `gram`.
///
/// Returns the solution and whether the Cholesky factorization failed and a
/// pseudo-inverse solve was used instead.
pub fn solve_psd(gram: &Matrix, rhs: &Matrix) -> (Matrix, bool) {
    let g = gram.to_nalgebra();
    if let Some(ch) = g.clone().cholesky() {
        let diag_min = (0..gram.rows())
            .map(|i| ch.l_dirty()[(i, i)])
            .fold(f64::INFINITY, f64::min);
        let diag_max = (0..gram.rows())
            .map(|i| ch.l_dirty()[(i, i)])
            .fold(0.0, f64::max);
        // reject factorizations whose condition estimate is hopeless
        if diag_min > diag_max * 1e-7 {
            let x = ch.solve(&rhs.to_nalgebra());
            return (Matrix::from_nalgebra(&x), false);
        }
    }
    (pseudo_inverse(gram, None).dot(rhs), true)
}

/// Least squares `argmin_X ||a X - b||_F` via the pseudo-inverse.
pub fn lstsq(a: &Matrix, b: &Matrix) -> Matrix {
    pseudo_inverse(a, None).dot(b)
}

/// Orthogonal Procrustes: the `U` with orthonormal columns maximizing
/// `trace(U^T m)`, i.e. `P Q^T` from the SVD `m = P S Q^T`.
pub fn procrustes(m: &Matrix) -> Matrix {
    let dec = svd(m);
    dec.u.dot_t(&dec.v)
}

/// Largest deviation of `q^T q` from the identity.
pub fn orthonormality_defect(q: &Matrix) -> f64 {
    q.t_dot(q).max_abs_diff(&Matrix::identity(q.cols()))
}

/// Cholesky factor of a symmetric positive definite band matrix.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    n: usize,
    band: usize,
    // row i holds L(i, i - band ..= i)
    l: Vec<f64>,
}

impl BandedCholesky {
    /// Factors the `n x n` matrix whose lower-band entries are `entry(i, j)`
    /// for `i - band <= j <= i`. Returns `None` if it is not positive definite.
    pub fn new(n: usize, band: usize, entry: impl Fn(usize, usize) -> f64) -> Option<Self> {
        let w = band + 1;
        let mut l = vec![0.0; n * w];
        for i in 0..n {
            let j0 = i.saturating_sub(band);
            for j in j0..=i {
                let mut sum = entry(i, j);
                let k0 = j0.max(j.saturating_sub(band));
                for k in k0..j {
                    sum -= l[i * w + (k + band - i)] * l[j * w + (k + band - j)];
                }
                if i == j {
                    if sum <= 0.0 {
                        return None;
                    }
                    l[i * w + band] = sum.sqrt();
                } else {
                    l[i * w + (j + band - i)] = sum / l[j * w + band];
                }
            }
        }
        Some(Self { n, band, l })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let (n, band, w) = (self.n, self.band, self.band + 1);
        let l = &self.l;
        let mut y = rhs.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for j in i.saturating_sub(band)..i {
                s -= l[i * w + (j + band - i)] * y[j];
            }
            y[i] = s / l[i * w + band];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..(i + band + 1).min(n) {
                s -= l[j * w + (i + band - j)] * y[j];
            }
            y[i] = s / l[i * w + band];
        }
        y
    }
}
