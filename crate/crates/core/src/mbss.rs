//! Multiway blind source separation.
//!
//! Two pipelines produce a Tucker model whose mode-`n` factor carries the
//! components selected by a per-mode [`ConstraintSpec`]:
//!
//! * [`mwbss_unfold`] factorizes each unfolding directly. The engine sees
//!   `Y_(n)^T ~ A_n B_n^T` and `B_n` (`I_n x J_n`) becomes the mode factor.
//! * [`mwbss_refine`] fits an unconstrained Tucker model first and then
//!   factorizes each `J_n`-column factor `U_n ~ B_n A_n^T`, folding `A_n` into
//!   the core.

use crate::error::{Error, Result};
use crate::factor2d::{bss_factor, hals_sweep, ConstraintKind, ConstraintSpec, FactorPair};
use crate::linalg::{self, numerical_rank, pseudo_inverse};
use crate::matrix::Matrix;
use crate::tensor::{mode_product, unfold, DenseTensor};
use crate::tucker::{core_project, fit_error, hooi, TuckerModel};
use crate::warning::Warning;

/// Engine output summary for one mode.
#[derive(Debug, Clone)]
pub struct ModeDiagnostics {
    pub mode: usize,
    pub kind: ConstraintKind,
    pub iterations: usize,
    pub final_objective: f64,
    pub objective_trace: Vec<f64>,
    pub warnings: Vec<Warning>,
}

impl ModeDiagnostics {
    fn from_pair(mode: usize, kind: ConstraintKind, p: &FactorPair) -> Self {
        Self {
            mode,
            kind,
            iterations: p.iterations_run,
            final_objective: p.final_objective,
            objective_trace: p.objective_trace.clone(),
            warnings: p.warnings.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MwbssResult {
    pub model: TuckerModel,
    pub per_mode_constraint: Vec<ConstraintSpec>,
    pub diagnostics: Vec<ModeDiagnostics>,
    /// Fit error of the unconstrained first stage (refinement only).
    pub stage1_fit_error: Option<f64>,
    /// Upper bound on how far the refined reconstruction can drift from the
    /// first-stage one, relative to `||t||` (refinement only).
    pub refinement_bound: Option<f64>,
}

impl MwbssResult {
    pub fn warnings(&self) -> Vec<Warning> {
        let mut w = self.model.warnings.clone();
        for d in &self.diagnostics {
            w.extend(d.warnings.iter().cloned());
        }
        w
    }
}

/// Row count above which an unfolding is compressed before the engine runs.
pub const REDUCTION_FACTOR: usize = 4;

fn check_inputs(t: &DenseTensor, ranks: &[usize], specs: &[ConstraintSpec]) -> Result<()> {
    if ranks.len() != t.order() || specs.len() != t.order() {
        return Err(Error::InvalidArgument(format!(
            "order-{} tensor needs {} ranks and specs, got {} and {}",
            t.order(),
            t.order(),
            ranks.len(),
            specs.len()
        )));
    }
    for (n, (&r, &d)) in ranks.iter().zip(t.dims()).enumerate() {
        if r == 0 || r > d {
            return Err(Error::InvalidRank(format!("rank {r} for mode {n} outside 1..={d}")));
        }
    }
    for (n, s) in specs.iter().enumerate() {
        s.validate().map_err(|e| e.in_mode(n))?;
    }
    Ok(())
}

/// Runs the engine on `y_n^T` for a mode-`n` unfolding `y_n` (`I_n x P`) and
/// returns the pair whose `b` (`I_n x j`) is the mode factor.
///
/// When `P > 4 j` the engine input is first compressed to `4 j` rows through
/// its truncated SVD; the row space, and so every component estimate, is
/// unchanged. Nonnegative data is left alone since the compressed rows would
/// lose their sign.
pub fn factor_unfolding(y_n: &Matrix, j: usize, spec: &ConstraintSpec) -> Result<FactorPair> {
    let keep = REDUCTION_FACTOR * j;
    let y = if spec.kind == ConstraintKind::Nonnegative || y_n.cols() <= keep {
        y_n.transpose()
    } else {
        let dec = linalg::svd(y_n);
        let k = keep.min(dec.s.len());
        dec.u.leading_columns(k).scale_columns(&dec.s[..k]).transpose()
    };
    bss_factor(&y, j, spec)
}

pub fn mwbss_unfold(t: &DenseTensor, ranks: &[usize], specs: &[ConstraintSpec]) -> Result<MwbssResult> {
    check_inputs(t, ranks, specs)?;
    let mut factors = Vec::with_capacity(t.order());
    let mut diagnostics = Vec::with_capacity(t.order());
    for n in 0..t.order() {
        let pair = unfold(t, n)
            .and_then(|y| factor_unfolding(&y, ranks[n], &specs[n]))
            .map_err(|e| e.in_mode(n))?;
        diagnostics.push(ModeDiagnostics::from_pair(n, specs[n].kind, &pair));
        factors.push(pair.b);
    }
    let core = core_project(t, &factors)?;
    let mut model = TuckerModel::new(core, factors)?;
    model.fit_error = fit_error(t, &model)?;
    Ok(MwbssResult {
        model,
        per_mode_constraint: specs.to_vec(),
        diagnostics,
        stage1_fit_error: None,
        refinement_bound: None,
    })
}

/// `u ~ b a^T` with `b >= 0` and `a` free, by alternating HALS on `b` and
/// least squares on `a`.
fn seminonnegative(u: &Matrix, spec: &ConstraintSpec) -> FactorPair {
    let j = u.cols();
    let mut b = u.map(f64::abs);
    let mut a = linalg::lstsq(&b, u).transpose();
    let obj = |a: &Matrix, b: &Matrix| u.sub(&b.dot_t(a)).frobenius_norm().powi(2);
    let mut trace = vec![obj(&a, &b)];
    let mut iters = 0;
    while iters < spec.max_iters {
        hals_sweep(u, &mut b, &a);
        a = linalg::lstsq(&b, u).transpose();
        iters += 1;
        let o = obj(&a, &b);
        let prev = *trace.last().unwrap();
        trace.push(o);
        if crate::factor2d::rel_change(prev, o) < spec.tol {
            break;
        }
    }
    // unit-norm columns of b, scale into a
    for k in 0..j {
        let nk = crate::matrix::norm(&b.column(k));
        if nk > 0.0 {
            for i in 0..b.rows() {
                b.set(i, k, b.get(i, k) / nk);
            }
            for i in 0..a.rows() {
                a.set(i, k, a.get(i, k) * nk);
            }
        }
    }
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

/// Refines one orthonormal factor `u` (`I x J`) into `u ~ b a^T`.
/// Returns `(b, a, diagnostics)`.
fn refine_factor(u: &Matrix, spec: &ConstraintSpec, mode: usize) -> Result<(Matrix, Matrix, ModeDiagnostics)> {
    let pair = match spec.kind {
        // the first-stage factor already is the orthonormal solution
        ConstraintKind::Unconstrained | ConstraintKind::Orthogonal => {
            let j = u.cols();
            FactorPair {
                a: Matrix::identity(j),
                b: u.clone(),
                iterations_run: 0,
                final_objective: 0.0,
                objective_trace: vec![0.0],
                warnings: Vec::new(),
            }
        }
        // stage-one factors carry signs, so the mixing stays unconstrained
        ConstraintKind::Nonnegative => seminonnegative(u, spec),
        ConstraintKind::Independent => {
            let mut p = bss_factor(&u.transpose(), u.cols(), spec)?;
            // the engine models centered rows; restore the component means by
            // solving u = b a^T for b exactly
            p.b = u.dot(&pseudo_inverse(&p.a.transpose(), None));
            p.final_objective = u.sub(&p.b.dot_t(&p.a)).frobenius_norm().powi(2);
            p
        }
        ConstraintKind::Sparse | ConstraintKind::Smooth => bss_factor(&u.transpose(), u.cols(), spec)?,
    };
    let mut diag = ModeDiagnostics::from_pair(mode, spec.kind, &pair);
    if numerical_rank(&pair.a) < u.cols() {
        diag.warnings.push(Warning::RankDeficientRefinement { mode });
    }
    Ok((pair.b, pair.a, diag))
}

fn spectral_norm(m: &Matrix) -> f64 {
    linalg::svd(m).s.first().copied().unwrap_or(0.0)
}

/// Two-stage pipeline: unconstrained HOOI, then a square constrained
/// factorization of every mode factor.
pub fn mwbss_refine(t: &DenseTensor, ranks: &[usize], specs: &[ConstraintSpec]) -> Result<MwbssResult> {
    check_inputs(t, ranks, specs)?;
    let max_iters = specs.iter().map(|s| s.max_iters).max().unwrap_or(1);
    let tol = specs.iter().map(|s| s.tol).fold(f64::INFINITY, f64::min);
    let stage1 = hooi(t, ranks, max_iters.min(crate::tucker::DEFAULT_MAX_ITERS), tol)?;

    let mut core = stage1.core.clone();
    let mut factors = Vec::with_capacity(t.order());
    let mut diagnostics = Vec::with_capacity(t.order());
    let mut bound = 0.0;
    let mut prefix = 1.0;
    let core_norm = stage1.core.frobenius_norm();
    for (n, u) in stage1.factors.iter().enumerate() {
        let (b, a, diag) = refine_factor(u, &specs[n], n).map_err(|e| e.in_mode(n))?;
        let approx = b.dot_t(&a);
        // telescoping: modes before n already use the refined product
        bound += prefix * u.sub(&approx).frobenius_norm() * core_norm;
        prefix *= spectral_norm(&approx);
        core = mode_product(&core, &a.transpose(), n)?;
        factors.push(b);
        diagnostics.push(diag);
    }
    let t_norm = t.frobenius_norm();
    let bound = if t_norm > 0.0 { bound / t_norm } else { bound };
    let mut model = TuckerModel::new(core, factors)?;
    model.fit_error = fit_error(t, &model)?;
    model.warnings = stage1.warnings.clone();
    Ok(MwbssResult {
        model,
        per_mode_constraint: specs.to_vec(),
        diagnostics,
        stage1_fit_error: Some(stage1.fit_error),
        refinement_bound: Some(bound),
    })
}
