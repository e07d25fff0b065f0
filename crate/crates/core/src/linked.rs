//! Linked multiway BSS across subjects.
//!
//! Each subject `s` gets its own Tucker model whose mode-`n` factor is split
//! as `[U_C | U_I^(s)]`: the first `R_n` columns are common to every subject,
//! the rest are individual.

use crate::error::{shape_err, Error, Result};
use crate::factor2d::{rel_change, ConstraintSpec};
use crate::linalg::sign_of_largest;
use crate::matrix::{norm, Matrix};
use crate::mbss::factor_unfolding;
use crate::metrics::pearson;
use crate::tensor::{product_all, unfold, DenseTensor};
use crate::tucker::{core_project, fit_error, hooi_from, hosvd, relative_error, TuckerModel};
use crate::warning::Warning;

pub const DEFAULT_THRESHOLD: f64 = 0.9;

/// Components found in every subject.
#[derive(Debug, Clone)]
pub struct CommonComponents {
    /// `indices[c][s]`: column of subject `s` belonging to cluster `c`.
    pub indices: Vec<Vec<usize>>,
    /// Mean pairwise absolute correlation inside each cluster.
    pub correlations: Vec<f64>,
    /// Unit-norm aggregated columns, one per cluster; `None` when no cluster
    /// qualified.
    pub basis: Option<Matrix>,
}

impl CommonComponents {
    pub fn count(&self) -> usize {
        self.indices.len()
    }
}

fn abs_corr(a: &[f64], b: &[f64]) -> f64 {
    pearson(a, b).abs()
}

/// Greedy clustering of columns across subjects.
///
/// For every still-unassigned column of subject 0 a candidate cluster is
/// formed from the best-correlated unassigned column of each other subject.
/// A candidate qualifies when all its pairwise absolute correlations reach
/// `threshold`; the qualifying candidate with the highest mean correlation is
/// accepted and the search repeats until none qualifies.
pub fn identify_common(factors: &[Matrix], threshold: f64) -> Result<CommonComponents> {
    let first = factors
        .first()
        .ok_or_else(|| Error::InvalidArgument("no factor matrices".into()))?;
    if factors.iter().any(|f| f.rows() != first.rows()) {
        return Err(shape_err("factor matrices differ in row count"));
    }
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold must be in (0, 1], got {threshold}"
        )));
    }
    let cols: Vec<Vec<Vec<f64>>> = factors.iter().map(Matrix::columns).collect();
    let s_count = factors.len();
    let mut used: Vec<Vec<bool>> = factors.iter().map(|f| vec![false; f.cols()]).collect();
    let mut clusters: Vec<(Vec<usize>, f64)> = Vec::new();
    loop {
        let mut best: Option<(Vec<usize>, f64)> = None;
        for i0 in 0..cols[0].len() {
            if used[0][i0] {
                continue;
            }
            let mut members = vec![i0];
            let mut complete = true;
            for s in 1..s_count {
                let pick = (0..cols[s].len())
                    .filter(|&j| !used[s][j])
                    .map(|j| (abs_corr(&cols[0][i0], &cols[s][j]), j))
                    .fold(None::<(f64, usize)>, |acc, c| match acc {
                        Some(a) if a.0 >= c.0 => Some(a),
                        _ => Some(c),
                    });
                match pick {
                    Some((_, j)) => members.push(j),
                    None => {
                        complete = false;
                        break;
                    }
                }
            }
            if !complete {
                continue;
            }
            let mut sum = 0.0;
            let mut pairs = 0;
            let mut ok = true;
            for a in 0..s_count {
                for b in a + 1..s_count {
                    let c = abs_corr(&cols[a][members[a]], &cols[b][members[b]]);
                    ok &= c >= threshold;
                    sum += c;
                    pairs += 1;
                }
            }
            if !ok {
                continue;
            }
            let mean = if pairs > 0 { sum / pairs as f64 } else { 1.0 };
            if best.as_ref().is_none_or(|b| mean > b.1) {
                best = Some((members, mean));
            }
        }
        match best {
            Some((members, mean)) => {
                for (s, &j) in members.iter().enumerate() {
                    used[s][j] = true;
                }
                clusters.push((members, mean));
            }
            None => break,
        }
    }
    clusters.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0[0].cmp(&b.0[0])));
    let basis = if clusters.is_empty() {
        None
    } else {
        let columns: Vec<Vec<f64>> = clusters
            .iter()
            .map(|(members, _)| {
                let reference = &cols[0][members[0]];
                let mut acc = vec![0.0; first.rows()];
                for (s, &j) in members.iter().enumerate() {
                    let c = &cols[s][j];
                    let sign = if pearson(reference, c) < 0.0 { -1.0 } else { 1.0 };
                    let n = norm(c);
                    if n > 0.0 {
                        for (a, v) in acc.iter_mut().zip(c) {
                            *a += sign * v / n;
                        }
                    }
                }
                let n = norm(&acc);
                let sign = sign_of_largest(&acc);
                acc.iter().map(|v| sign * v / n).collect()
            })
            .collect();
        Some(Matrix::from_columns(&columns)?)
    };
    Ok(CommonComponents {
        indices: clusters.iter().map(|c| c.0.clone()).collect(),
        correlations: clusters.iter().map(|c| c.1).collect(),
        basis,
    })
}

#[derive(Debug, Clone)]
pub struct LinkedOptions {
    pub threshold: f64,
}

impl Default for LinkedOptions {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LinkedModel {
    pub subject_models: Vec<TuckerModel>,
    /// Number of common columns actually established per mode.
    pub common_counts: Vec<usize>,
    pub common_bases: Vec<Option<Matrix>>,
    /// Mean cross-subject correlation of each common column, per mode.
    pub common_correlations: Vec<Vec<f64>>,
    /// `alignment[s][n][k]`: column of subject `s`'s own mode-`n` estimate that
    /// was placed at position `k`.
    pub alignment: Vec<Vec<Vec<usize>>>,
    /// Largest absolute correlation between individual columns of different
    /// subjects, per mode (`None` without individual columns or with one
    /// subject).
    pub individual_max_corr: Vec<Option<f64>>,
    pub warnings: Vec<Warning>,
}

impl LinkedModel {
    pub fn fit_errors(&self) -> Vec<f64> {
        self.subject_models.iter().map(|m| m.fit_error).collect()
    }
}

fn check_subjects(xs: &[DenseTensor]) -> Result<()> {
    let first = xs
        .first()
        .ok_or_else(|| Error::InvalidArgument("no subjects".into()))?;
    if let Some((s, x)) = xs.iter().enumerate().find(|(_, x)| x.dims() != first.dims()) {
        return Err(shape_err(format!(
            "subject {s} has dims {:?}, expected {:?}",
            x.dims(),
            first.dims()
        )));
    }
    Ok(())
}

pub fn linked_decompose(
    xs: &[DenseTensor],
    ranks: &[usize],
    common_counts: &[usize],
    specs: &[ConstraintSpec],
    opts: &LinkedOptions,
) -> Result<LinkedModel> {
    check_subjects(xs)?;
    let dims = xs[0].dims().to_vec();
    let order = dims.len();
    if ranks.len() != order || common_counts.len() != order || specs.len() != order {
        return Err(Error::InvalidArgument(format!(
            "order-{order} data needs {order} ranks, common counts and specs"
        )));
    }
    for n in 0..order {
        if ranks[n] == 0 || ranks[n] > dims[n] {
            return Err(Error::InvalidRank(format!(
                "rank {} for mode {n} outside 1..={}",
                ranks[n], dims[n]
            )));
        }
        if common_counts[n] > ranks[n] {
            return Err(Error::InvalidRank(format!(
                "common count {} exceeds rank {} in mode {n}",
                common_counts[n], ranks[n]
            )));
        }
        specs[n].validate().map_err(|e| e.in_mode(n))?;
    }
    let s_count = xs.len();
    let mut factors: Vec<Vec<Matrix>> = vec![Vec::with_capacity(order); s_count];
    let mut alignment = vec![Vec::with_capacity(order); s_count];
    let mut achieved = Vec::with_capacity(order);
    let mut bases = Vec::with_capacity(order);
    let mut correlations = Vec::with_capacity(order);
    let mut individual = Vec::with_capacity(order);
    let mut warnings = Vec::new();
    for n in 0..order {
        let (j, r) = (ranks[n], common_counts[n]);
        if r == j {
            // one factor from all subjects' unfoldings side by side
            let unf: Vec<Matrix> = xs.iter().map(|x| unfold(x, n)).collect::<Result<_>>()?;
            let refs: Vec<&Matrix> = unf.iter().collect();
            let joint = Matrix::hstack(&refs)?;
            let pair = factor_unfolding(&joint, j, &specs[n]).map_err(|e| e.in_mode(n))?;
            for s in 0..s_count {
                factors[s].push(pair.b.clone());
                alignment[s].push((0..j).collect());
            }
            achieved.push(j);
            bases.push(Some(pair.b));
            correlations.push(vec![1.0; j]);
            individual.push(None);
            continue;
        }
        let own: Vec<Matrix> = xs
            .iter()
            .map(|x| {
                unfold(x, n)
                    .and_then(|y| factor_unfolding(&y, j, &specs[n]))
                    .map(|p| p.b)
                    .map_err(|e| e.in_mode(n))
            })
            .collect::<Result<_>>()?;
        let mut common = CommonComponents {
            indices: Vec::new(),
            correlations: Vec::new(),
            basis: None,
        };
        if r > 0 {
            common = identify_common(&own, opts.threshold)?;
            if common.count() < r {
                warnings.push(Warning::ReducedComponents {
                    requested: r,
                    achieved: common.count(),
                });
            }
        }
        let take = r.min(common.count());
        let basis = common
            .basis
            .as_ref()
            .filter(|_| take > 0)
            .map(|b| b.leading_columns(take));
        for s in 0..s_count {
            let chosen: Vec<usize> = common.indices[..take].iter().map(|c| c[s]).collect();
            let mut order_s = chosen.clone();
            order_s.extend((0..j).filter(|k| !chosen.contains(k)));
            let mut cols: Vec<Vec<f64>> = Vec::with_capacity(j);
            if let Some(b) = &basis {
                cols.extend(b.columns());
            }
            cols.extend(order_s[take..].iter().map(|&k| own[s].column(k)));
            factors[s].push(Matrix::from_columns(&cols)?);
            alignment[s].push(order_s);
        }
        individual.push(individual_diagnostic(&factors, n, take, j));
        achieved.push(take);
        correlations.push(common.correlations[..take].to_vec());
        bases.push(basis);
    }
    let subject_models = xs
        .iter()
        .zip(factors)
        .map(|(x, f)| {
            let core = core_project(x, &f)?;
            let mut m = TuckerModel::new(core, f)?;
            m.fit_error = fit_error(x, &m)?;
            Ok(m)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LinkedModel {
        subject_models,
        common_counts: achieved,
        common_bases: bases,
        common_correlations: correlations,
        alignment,
        individual_max_corr: individual,
        warnings,
    })
}

fn individual_diagnostic(factors: &[Vec<Matrix>], n: usize, take: usize, j: usize) -> Option<f64> {
    if factors.len() < 2 || take == j {
        return None;
    }
    let mut best = 0.0f64;
    for a in 0..factors.len() {
        for b in a + 1..factors.len() {
            for p in take..j {
                for q in take..j {
                    best = best.max(abs_corr(&factors[a][n].column(p), &factors[b][n].column(q)));
                }
            }
        }
    }
    Some(best)
}

#[derive(Debug, Clone)]
pub struct BtdResult {
    /// One Tucker term per subject; their sum approximates the mean tensor.
    pub blocks: Vec<TuckerModel>,
    /// Relative residual against the mean tensor.
    pub residual: f64,
    pub trace: Vec<f64>,
}

/// Number of warm-started HOOI sweeps per block update.
const INNER_SWEEPS: usize = 5;

/// Fits the subject-averaged tensor with a sum of one Tucker term per subject.
pub fn btd_average(xs: &[DenseTensor], ranks: &[usize], max_iters: usize, tol: f64) -> Result<BtdResult> {
    check_subjects(xs)?;
    let s_count = xs.len();
    let mut mean = xs[0].clone();
    for x in &xs[1..] {
        mean = mean.add(x)?;
    }
    let mean = mean.scale(1.0 / s_count as f64);
    let mut blocks: Vec<TuckerModel> = xs
        .iter()
        .map(|x| hosvd(&x.scale(1.0 / s_count as f64), ranks))
        .collect::<Result<_>>()?;
    let mut recs: Vec<DenseTensor> = blocks.iter().map(TuckerModel::reconstruct).collect();
    let residual = |recs: &[DenseTensor]| -> Result<f64> {
        let mut acc = recs[0].clone();
        for r in &recs[1..] {
            acc = acc.add(r)?;
        }
        relative_error(&mean, &acc)
    };
    let mut trace = vec![residual(&recs)?];
    let mut iters = 0;
    while iters < max_iters {
        for s in 0..s_count {
            let mut target = mean.clone();
            for (r, rec) in recs.iter().enumerate() {
                if r != s {
                    target = target.sub(rec)?;
                }
            }
            let factors = blocks[s].factors.clone();
            let mut m = hooi_from(&target, factors, INNER_SWEEPS, tol)?;
            m.warnings.clear();
            recs[s] = product_all(&m.core, &m.factors)?;
            blocks[s] = m;
        }
        iters += 1;
        let r = residual(&recs)?;
        let prev = *trace.last().unwrap();
        trace.push(r);
        if rel_change(prev, r) < tol {
            break;
        }
    }
    Ok(BtdResult {
        residual: *trace.last().unwrap(),
        blocks,
        trace,
    })
}
