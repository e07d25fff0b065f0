//! Scoring functions for comparing estimates against known ground truth.

use crate::linalg::{pseudo_inverse, svd};
use crate::matrix::{dot, norm, Matrix};

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Pearson correlation; 0 when either input is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let (ma, mb) = (mean(a), mean(b));
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    sab / (saa * sbb).sqrt()
}

/// Absolute cosine between two vectors.
pub fn congruence(a: &[f64], b: &[f64]) -> f64 {
    let d = norm(a) * norm(b);
    if d == 0.0 {
        0.0
    } else {
        (dot(a, b) / d).abs()
    }
}

/// Normalized Amari index of a square matrix `p` (typically estimated
/// unmixing times true mixing). 0 for a scaled permutation, at most 1.
pub fn amari_index(p: &Matrix) -> f64 {
    let n = p.rows();
    assert_eq!(n, p.cols(), "amari index needs a square matrix");
    if n < 2 {
        return 0.0;
    }
    let abs = p.map(f64::abs);
    let mut total = 0.0;
    for i in 0..n {
        let row = abs.row(i);
        let mx = row.iter().cloned().fold(0.0, f64::max);
        if mx > 0.0 {
            total += row.iter().sum::<f64>() / mx - 1.0;
        } else {
            total += (n - 1) as f64;
        }
    }
    for j in 0..n {
        let col = abs.column(j);
        let mx = col.iter().cloned().fold(0.0, f64::max);
        if mx > 0.0 {
            total += col.iter().sum::<f64>() / mx - 1.0;
        } else {
            total += (n - 1) as f64;
        }
    }
    total / (2.0 * n as f64 * (n as f64 - 1.0))
}

/// Amari index of `pinv(estimated_mixing) * true_mixing`.
pub fn amari_of_mixing(estimated: &Matrix, truth: &Matrix) -> f64 {
    amari_index(&pseudo_inverse(estimated, None).dot(truth))
}

/// Permutation `perm` maximizing `sum_i score[i][perm[i]]`. Exhaustive up to
/// 8 columns, greedy beyond.
pub fn best_assignment(score: &Matrix) -> Vec<usize> {
    let n = score.rows();
    assert!(score.cols() >= n);
    if score.cols() <= 8 {
        let mut best = (f64::NEG_INFINITY, Vec::new());
        let mut used = vec![false; score.cols()];
        let mut cur = Vec::with_capacity(n);
        search(score, 0, 0.0, &mut used, &mut cur, &mut best);
        return best.1;
    }
    let mut used = vec![false; score.cols()];
    let mut perm = vec![usize::MAX; n];
    let mut cells: Vec<(f64, usize, usize)> = (0..n)
        .flat_map(|i| (0..score.cols()).map(move |j| (i, j)))
        .map(|(i, j)| (score.get(i, j), i, j))
        .collect();
    cells.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    for (_, i, j) in cells {
        if perm[i] == usize::MAX && !used[j] {
            perm[i] = j;
            used[j] = true;
        }
    }
    perm
}

fn search(
    score: &Matrix,
    i: usize,
    acc: f64,
    used: &mut [bool],
    cur: &mut Vec<usize>,
    best: &mut (f64, Vec<usize>),
) {
    if i == score.rows() {
        if acc > best.0 {
            *best = (acc, cur.clone());
        }
        return;
    }
    for j in 0..score.cols() {
        if !used[j] {
            used[j] = true;
            cur.push(j);
            search(score, i + 1, acc + score.get(i, j), used, cur, best);
            cur.pop();
            used[j] = false;
        }
    }
}

/// Per-column congruence between true columns and their best-matching
/// estimated columns (matched by permutation).
pub fn column_congruence(truth: &Matrix, estimate: &Matrix) -> Vec<f64> {
    let score = Matrix::from_fn(truth.cols(), estimate.cols(), |i, j| {
        congruence(&truth.column(i), &estimate.column(j))
    });
    let perm = best_assignment(&score);
    perm.iter().enumerate().map(|(i, &j)| score.get(i, j)).collect()
}

/// Mean CP factor congruence after aligning components jointly across modes:
/// the permutation maximizes the sum over components of the product of
/// per-mode congruences; the reported value averages the per-mode congruences.
pub fn cp_factor_congruence(truth: &[Matrix], estimate: &[Matrix]) -> f64 {
    let r = truth[0].cols();
    let score = Matrix::from_fn(r, estimate[0].cols(), |i, j| {
        truth
            .iter()
            .zip(estimate)
            .map(|(t, e)| congruence(&t.column(i), &e.column(j)))
            .product()
    });
    let perm = best_assignment(&score);
    let mut total = 0.0;
    for (i, &j) in perm.iter().enumerate() {
        for (t, e) in truth.iter().zip(estimate) {
            total += congruence(&t.column(i), &e.column(j));
        }
    }
    total / (r * truth.len()) as f64
}

/// Principal angles (radians, ascending) between the column spaces of `a`
/// and `b`.
pub fn principal_angles(a: &Matrix, b: &Matrix) -> Vec<f64> {
    let qa = svd(a).u;
    let qb = svd(b).u;
    let s = svd(&qa.t_dot(&qb)).s;
    s.iter().map(|&c| c.clamp(-1.0, 1.0).acos()).collect()
}

pub fn max_principal_angle(a: &Matrix, b: &Matrix) -> f64 {
    principal_angles(a, b).into_iter().fold(0.0, f64::max)
}

/// Coefficient of determination pooled over all entries of `truth`.
pub fn r_squared(truth: &[f64], pred: &[f64]) -> f64 {
    let m = mean(truth);
    let ss_tot: f64 = truth.iter().map(|t| (t - m).powi(2)).sum();
    let ss_res: f64 = truth.iter().zip(pred).map(|(t, p)| (t - p).powi(2)).sum();
    1.0 - ss_res / ss_tot
}

/// R^2 computed column by column around each column's own mean, pooled.
pub fn r_squared_columns(truth: &Matrix, pred: &Matrix) -> f64 {
    let mut ss_tot = 0.0;
    let mut ss_res = 0.0;
    for j in 0..truth.cols() {
        let t = truth.column(j);
        let p = pred.column(j);
        let m = mean(&t);
        ss_tot += t.iter().map(|v| (v - m).powi(2)).sum::<f64>();
        ss_res += t.iter().zip(&p).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
    }
    1.0 - ss_res / ss_tot
}

/// F1 score of predicted support (`true` = nonzero) against the true support.
pub fn support_f1(truth: &[bool], pred: &[bool]) -> f64 {
    let mut tp = 0.0;
    let mut fp = 0.0;
    let mut fn_ = 0.0;
    for (&t, &p) in truth.iter().zip(pred) {
        match (t, p) {
            (true, true) => tp += 1.0,
            (false, true) => fp += 1.0,
            (true, false) => fn_ += 1.0,
            _ => {}
        }
    }
    if tp == 0.0 {
        return 0.0;
    }
    2.0 * tp / (2.0 * tp + fp + fn_)
}

/// Mean silhouette coefficient with Euclidean distances.
pub fn silhouette(points: &[Vec<f64>], labels: &[usize]) -> f64 {
    let n = points.len();
    let dist = |i: usize, j: usize| -> f64 {
        points[i]
            .iter()
            .zip(&points[j])
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let classes: Vec<usize> = {
        let mut c = labels.to_vec();
        c.sort_unstable();
        c.dedup();
        c
    };
    let mut total = 0.0;
    for i in 0..n {
        let mut own = (0.0, 0usize);
        let mut other = f64::INFINITY;
        for &c in &classes {
            let members: Vec<usize> = (0..n).filter(|&j| labels[j] == c && j != i).collect();
            if members.is_empty() {
                continue;
            }
            let d = members.iter().map(|&j| dist(i, j)).sum::<f64>() / members.len() as f64;
            if c == labels[i] {
                own = (d, members.len());
            } else {
                other = other.min(d);
            }
        }
        if own.1 == 0 {
            continue;
        }
        let s = (other - own.0) / own.0.max(other);
        total += s;
    }
    total / n as f64
}

/// Sample excess kurtosis.
pub fn excess_kurtosis(v: &[f64]) -> f64 {
    let m = mean(v);
    let n = v.len() as f64;
    let m2 = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    let m4 = v.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
    if m2 == 0.0 {
        return 0.0;
    }
    m4 / (m2 * m2) - 3.0
}
