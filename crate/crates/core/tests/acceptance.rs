//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines are always printed.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use multiway::factor2d::{
    ica_deflation, nmf_hals, roughness, sca_factor, smoca_factor, svd_factor, ConstraintKind, ConstraintSpec,
};
use multiway::features::{
    accuracy, classify_centroid, classify_knn, extract_train, project_test, tucker2_matrices, ExtractOptions,
    LabeledTensorSet,
};
use multiway::linked::{identify_common, linked_decompose, LinkedOptions, DEFAULT_THRESHOLD};
use multiway::matrix::Matrix;
use multiway::mbss::{mwbss_refine, mwbss_unfold};
use multiway::metrics::{
    amari_of_mixing, best_assignment, cp_factor_congruence, max_principal_angle, pearson, r_squared,
    r_squared_columns, support_f1,
};
use multiway::mpls::{pls_fit, pls_predict, shared_factor_angle, tensor_pls_fit, tensor_pls_predict, TensorPlsOptions};
use multiway::rng::seeded;
use multiway::synth;
use multiway::tensor::{fold, mode_product, unfold, DenseTensor};
use multiway::tucker::{cp_als, hooi, hosvd};
use rand::Rng;
use rand_distr::StandardNormal;

struct Outcome {
    ok: bool,
    detail: String,
}

fn check(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn merge(parts: Vec<Outcome>) -> Outcome {
    Outcome {
        ok: parts.iter().all(|p| p.ok),
        detail: parts
            .iter()
            .map(|p| format!("{}{}", if p.ok { "" } else { "!" }, p.detail))
            .collect::<Vec<_>>()
            .join("; "),
    }
}

fn random_tensor(dims: &[usize], seed: u64) -> DenseTensor {
    let mut rng = seeded(seed);
    DenseTensor::from_fn(dims, |_| rng.sample(StandardNormal))
}

fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = seeded(seed);
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

fn random_dims(order: usize, seed: u64) -> Vec<usize> {
    let mut rng = seeded(seed);
    (0..order).map(|_| rng.random_range(2..=6)).collect()
}

fn rel(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den.max(f64::MIN_POSITIVE)
}

fn nonincreasing(trace: &[f64]) -> bool {
    trace.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12) + 1e-15)
}

// mode product by direct summation over the multi-index
fn naive_mode_product(t: &DenseTensor, u: &Matrix, mode: usize) -> DenseTensor {
    let mut dims = t.dims().to_vec();
    dims[mode] = u.rows();
    DenseTensor::from_fn(&dims, |idx| {
        let mut src = idx.to_vec();
        let mut acc = 0.0;
        for k in 0..t.dims()[mode] {
            src[mode] = k;
            acc += u.get(idx[mode], k) * t.get(&src);
        }
        acc
    })
}

fn naive_kron(a: &Matrix, b: &Matrix) -> Matrix {
    Matrix::from_fn(a.rows() * b.rows(), a.cols() * b.cols(), |i, j| {
        a.get(i / b.rows(), j / b.cols()) * b.get(i % b.rows(), j % b.cols())
    })
}

fn criterion_1() -> Outcome {
    let mut worst_roundtrip = true;
    let mut worst_mp = 0.0f64;
    let mut worst_eq = 0.0f64;
    for seed in 0..20u64 {
        let order = 3 + (seed % 2) as usize;
        let dims = random_dims(order, 1000 + seed);
        let t = random_tensor(&dims, seed);
        for n in 0..order {
            let back = fold(&unfold(&t, n).unwrap(), n, &dims).unwrap();
            worst_roundtrip &= back.data() == t.data();
            let u = random_matrix(1 + (seed as usize + n) % 5, dims[n], 50 + seed);
            let got = mode_product(&t, &u, n).unwrap();
            let want = naive_mode_product(&t, &u, n);
            worst_mp = worst_mp.max(rel(got.data(), want.data()));
        }
        // unfold(G x {U}, n) = U_n G_(n) kron(U_N, .., U_{n+1}, U_{n-1}, .., U_1)^T
        let ranks: Vec<usize> = dims.iter().map(|d| (d - 1).max(1)).collect();
        let g = random_tensor(&ranks, 70 + seed);
        let us: Vec<Matrix> = dims
            .iter()
            .zip(&ranks)
            .enumerate()
            .map(|(k, (&d, &r))| random_matrix(d, r, 90 + 10 * seed + k as u64))
            .collect();
        let mut x = g.clone();
        for (k, u) in us.iter().enumerate() {
            x = naive_mode_product(&x, u, k);
        }
        for n in 0..order {
            let mut kron: Option<Matrix> = None;
            for k in (0..order).rev().filter(|&k| k != n) {
                kron = Some(match kron {
                    None => us[k].clone(),
                    Some(acc) => naive_kron(&acc, &us[k]),
                });
            }
            let rhs = us[n].dot(&unfold(&g, n).unwrap()).dot_t(&kron.unwrap());
            worst_eq = worst_eq.max(rel(unfold(&x, n).unwrap().data(), rhs.data()));
        }
    }
    merge(vec![
        check(worst_roundtrip, "fold/unfold bit-exact"),
        check(worst_mp <= 1e-12, format!("mode product rel err {worst_mp:.1e}")),
        check(worst_eq <= 1e-10, format!("matricized identity rel err {worst_eq:.1e}")),
    ])
}

fn criterion_2() -> Outcome {
    let mut full_err = 0.0f64;
    let mut hooi_ok = 0;
    let mut mono_ok = 0;
    for seed in 0..20u64 {
        let dims = random_dims(3, 2000 + seed);
        let t = random_tensor(&dims, seed);
        let full = hosvd(&t, &dims).unwrap();
        full_err = full_err.max(full.fit_error);
        let ranks: Vec<usize> = dims.iter().map(|d| (d / 2).max(1)).collect();
        let h = hosvd(&t, &ranks).unwrap();
        let o = hooi(&t, &ranks, 200, 1e-10).unwrap();
        if o.fit_error <= h.fit_error + 1e-12 {
            hooi_ok += 1;
        }
        if nonincreasing(&o.trace) {
            mono_ok += 1;
        }
    }
    merge(vec![
        check(full_err <= 1e-10, format!("full-rank error {full_err:.1e}")),
        check(hooi_ok == 20, format!("HOOI <= HOSVD {hooi_ok}/20")),
        check(mono_ok == 20, format!("monotone traces {mono_ok}/20")),
    ])
}

fn criterion_3() -> Outcome {
    let mut parts = Vec::new();
    for r in [2usize, 3] {
        let mut good = 0;
        let mut worst = 1.0f64;
        for seed in 0..20u64 {
            let truth = synth::cp_tensor(&[8, 7, 6], r, 1e-3, 0.5, 300 + seed).unwrap();
            let m = cp_als(&truth.tensor, r, 500, 1e-12, seed).unwrap();
            let c = cp_factor_congruence(&truth.factors, &m.factors);
            worst = worst.min(c);
            if c > 0.99 {
                good += 1;
            }
        }
        parts.push(check(
            good >= 18,
            format!("rank {r}: {good}/20 trials > 0.99 (min {worst:.4})"),
        ));
    }
    merge(parts)
}

fn criterion_4() -> Outcome {
    let mut nmf_ok = 0;
    for seed in 0..20u64 {
        let y = synth::tucker_tensor(&[20, 15], &[4, 4], 0.0, true, 400 + seed)
            .unwrap()
            .tensor
            .to_matrix()
            .unwrap();
        let p = nmf_hals(&y, 4, &ConstraintSpec::new(ConstraintKind::Nonnegative).with_max_iters(300)).unwrap();
        let nonneg = p.a.data().iter().chain(p.b.data()).all(|&v| v >= 0.0);
        if nonneg && nonincreasing(&p.objective_trace) {
            nmf_ok += 1;
        }
    }
    let mut ica_parts = Vec::new();
    for (n, limit) in [(2usize, 0.1), (4, 0.15)] {
        let mut good = 0;
        let mut worst = 0.0f64;
        for seed in 0..10u64 {
            let truth = synth::ica_mixtures(n, 2000, 500 + seed).unwrap();
            let spec = ConstraintSpec::new(ConstraintKind::Independent).with_seed(seed);
            let p = ica_deflation(&truth.mixtures, n, &spec).unwrap();
            let amari = amari_of_mixing(&p.a, &truth.mixing);
            worst = worst.max(amari);
            if amari < limit {
                good += 1;
            }
        }
        ica_parts.push(check(
            good >= 9,
            format!("ICA {n} sources: {good}/10 Amari < {limit} (max {worst:.3})"),
        ));
    }

    let sparse = synth::sparse_instance(30, 200, 3, 0.8, 0.01, 600);
    let p = sca_factor(&sparse.y, 3, &ConstraintSpec::new(ConstraintKind::Sparse).with_penalty(2.0)).unwrap();
    let score = Matrix::from_fn(3, 3, |i, j| pearson(&sparse.b.column(i), &p.b.column(j)).abs());
    let perm = best_assignment(&score);
    let mut truth_support = Vec::new();
    let mut est_support = Vec::new();
    for (i, &j) in perm.iter().enumerate() {
        truth_support.extend(sparse.b.column(i).iter().map(|&v| v != 0.0));
        est_support.extend(p.b.column(j).iter().map(|&v| v != 0.0));
    }
    let f1 = support_f1(&truth_support, &est_support);

    let smooth = synth::smooth_instance(30, 200, 3, 0.3, 700);
    let base = svd_factor(&smooth.y, 3).unwrap();
    let s = smoca_factor(&smooth.y, 3, &ConstraintSpec::new(ConstraintKind::Smooth).with_penalty(50.0)).unwrap();
    let (r_base, r_smooth) = (roughness(&base.b), roughness(&s.b));

    let mut parts = vec![check(nmf_ok == 20, format!("NMF monotone+nonneg {nmf_ok}/20"))];
    parts.extend(ica_parts);
    parts.push(check(f1 > 0.8, format!("SCA support F1 {f1:.3}")));
    parts.push(check(
        r_smooth < r_base,
        format!("SmoCA roughness {r_smooth:.3e} vs baseline {r_base:.3e}"),
    ));
    merge(parts)
}

fn criterion_5() -> Outcome {
    let t = random_tensor(&[8, 7, 6], 800);
    let ranks = [3, 3, 2];
    let specs = vec![ConstraintSpec::new(ConstraintKind::Orthogonal); 3];
    let u = mwbss_unfold(&t, &ranks, &specs).unwrap();
    let h = hosvd(&t, &ranks).unwrap();
    let angle = (0..3)
        .map(|n| max_principal_angle(&u.model.factors[n], &h.factors[n]))
        .fold(0.0, f64::max);

    let mut worst = 0.0f64;
    for seed in 0..3u64 {
        let (x, sources) = synth::independent_mode0_tensor(&[1000, 6, 5], &[3, 3, 3], 0.01, 810 + seed).unwrap();
        let specs = vec![
            ConstraintSpec::new(ConstraintKind::Independent).with_seed(seed),
            ConstraintSpec::new(ConstraintKind::Unconstrained),
            ConstraintSpec::new(ConstraintKind::Unconstrained),
        ];
        let r = mwbss_refine(&x, &[3, 3, 3], &specs).unwrap();
        // recovered sources as mixtures of the truth: est = truth * M
        let amari = amari_of_mixing(&sources, &r.model.factors[0]);
        worst = worst.max(amari);
    }
    merge(vec![
        check(angle < 1e-6, format!("orthogonal unfold vs HOSVD angle {angle:.1e}")),
        check(worst < 0.15, format!("refine independent sources Amari max {worst:.3} over 3 seeds")),
    ])
}

fn criterion_6() -> Outcome {
    let corpus = synth::class_corpus(&[16, 16, 8], &[3, 3, 2], 3, 60, 30, 0.1, 900).unwrap();
    let fs = extract_train(&corpus.train, &[3, 3, 2]).unwrap();
    let test_feats: Vec<DenseTensor> = corpus
        .test
        .samples
        .iter()
        .map(|x| project_test(x, &fs.bases).unwrap())
        .collect();
    let knn = classify_knn(&fs, &test_feats, 1).unwrap();
    let (cen, _) = classify_centroid(&fs, &test_feats).unwrap();
    let acc_knn = accuracy(&corpus.test.labels, &knn);
    let acc_cen = accuracy(&corpus.test.labels, &cen);

    let flat = synth::class_corpus(&[16, 12], &[3, 3], 3, 60, 1, 0.1, 901).unwrap();
    let opts = ExtractOptions {
        max_iters: 500,
        tol: 1e-12,
    };
    let set = LabeledTensorSet::new(flat.train.samples.clone(), flat.train.labels.clone()).unwrap();
    let via_concat = multiway::features::extract_train_with(&set, &[3, 3], opts).unwrap().fit_error;
    let mats: Vec<Matrix> = flat.train.samples.iter().map(|x| x.to_matrix().unwrap()).collect();
    let via_t2 = tucker2_matrices(&mats, 3, 3, opts).unwrap().3;
    let gap = (via_concat - via_t2).abs();
    merge(vec![
        check(acc_knn >= 0.95, format!("KNN accuracy {acc_knn:.3}")),
        check(acc_cen >= 0.9, format!("centroid accuracy {acc_cen:.3}")),
        check(gap <= 1e-8, format!("Tucker-2 vs concatenation fit gap {gap:.1e}")),
    ])
}

fn criterion_7() -> Outcome {
    let dims = [600, 6, 5];
    let ranks = [3, 3, 3];
    let mut exact = 0;
    let mut worst_corr = 1.0f64;
    for seed in 0..10u64 {
        let truth = synth::linked_subjects(3, &dims, &ranks, 2, 0.01, 1000 + seed).unwrap();
        let specs = vec![
            ConstraintSpec::new(ConstraintKind::Independent).with_seed(seed),
            ConstraintSpec::new(ConstraintKind::Unconstrained),
            ConstraintSpec::new(ConstraintKind::Unconstrained),
        ];
        let per_subject: Vec<Matrix> = truth
            .subjects
            .iter()
            .map(|x| mwbss_unfold(x, &ranks, &specs).unwrap().model.factors[0].clone())
            .collect();
        let found = identify_common(&per_subject, DEFAULT_THRESHOLD).unwrap();
        // each found cluster must be one planted common source in every subject
        let planted_pair = found.count() == 2
            && found.indices.iter().all(|cluster| {
                (0..2).any(|c| {
                    cluster
                        .iter()
                        .enumerate()
                        .all(|(s, &k)| pearson(&per_subject[s].column(k), &truth.common.column(c)).abs() > 0.9)
                })
            });
        if planted_pair {
            exact += 1;
        }
        let model = linked_decompose(&truth.subjects, &ranks, &[2, 0, 0], &specs, &LinkedOptions::default()).unwrap();
        let corr = match &model.common_bases[0] {
            Some(basis) if basis.cols() == 2 => {
                let score =
                    Matrix::from_fn(2, 2, |i, j| pearson(&truth.common.column(i), &basis.column(j)).abs());
                let perm = best_assignment(&score);
                perm.iter().enumerate().map(|(i, &j)| score.get(i, j)).fold(1.0, f64::min)
            }
            _ => 0.0,
        };
        worst_corr = worst_corr.min(corr);
    }
    merge(vec![
        check(exact >= 9, format!("planted pair identified {exact}/10")),
        check(worst_corr > 0.95, format!("common basis correlation min {worst_corr:.4}")),
    ])
}

fn criterion_8() -> Outcome {
    let clean = synth::pls_latent(60, 8, 3, 2, 0.0, 1100);
    let m = pls_fit(&clean.x, &clean.y, 2).unwrap();
    let y_mean = m.y_mean.clone();
    let yc = Matrix::from_fn(clean.y.rows(), clean.y.cols(), |i, j| clean.y.get(i, j) - y_mean[j]);
    let exact = m.fitted_y_centered().max_abs_diff(&yc);
    let gram = m.a.t_dot(&m.a);
    let mut ortho = 0.0f64;
    for i in 0..gram.rows() {
        for j in 0..gram.cols() {
            if i != j {
                ortho = ortho.max(gram.get(i, j).abs());
            }
        }
    }

    let noisy = synth::pls_latent(200, 8, 3, 2, 0.01, 1101);
    let train_x = noisy.x.rows_range(0, 100);
    let train_y = noisy.y.rows_range(0, 100);
    let m = pls_fit(&train_x, &train_y, 2).unwrap();
    let pred = pls_predict(&m, &noisy.x.rows_range(100, 200)).unwrap();
    let r2 = r_squared_columns(&noisy.y.rows_range(100, 200), &pred);

    let pair = synth::coupled_pair(150, &[6, 5], &[4], &[2, 3, 3], &[2, 2], 0.01, 1102).unwrap();
    let train: Vec<usize> = (0..100).collect();
    let held: Vec<usize> = (100..150).collect();
    let tm = tensor_pls_fit(
        &pair.x.select_first_mode(&train).unwrap(),
        &pair.y.select_first_mode(&train).unwrap(),
        &[2, 3, 3],
        &[2, 2],
        &[0],
        TensorPlsOptions::default(),
    )
    .unwrap();
    let angle = shared_factor_angle(&tm, &pair.shared.rows_range(0, 100));
    let y_held = pair.y.select_first_mode(&held).unwrap();
    let y_pred = tensor_pls_predict(&tm, &pair.x.select_first_mode(&held).unwrap()).unwrap();
    let tr2 = r_squared(y_held.data(), y_pred.data());

    merge(vec![
        check(exact <= 1e-8, format!("noiseless fit error {exact:.1e}")),
        check(r2 >= 0.95, format!("held-out R2 {r2:.4}")),
        check(ortho <= 1e-8, format!("score orthogonality {ortho:.1e}")),
        check(angle < 0.1, format!("tensor shared-factor angle {angle:.2e}")),
        check(tr2 >= 0.9, format!("tensor held-out R2 {tr2:.4}")),
    ])
}

fn run_cli(args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_multiway"))
        .args(args)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.push((rel, std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

/// Runs `steps` twice in fresh directories; every artifact must match.
fn criterion_9() -> Outcome {
    let scripts: Vec<(&str, Vec<Vec<String>>)> = vec![
        (
            "synth",
            vec![
                cmd("synth tucker --dims 6,5,4 --ranks 2,2,2 --noise 0.01 --seed 3 --out {d}/tucker"),
                cmd("synth cp --dims 8,7,6 --rank 3 --noise 0.001 --seed 3 --out {d}/cp"),
                cmd("synth ica --sources 3 --samples 500 --seed 3 --out {d}/ica"),
                cmd("synth sparse --rows 20 --samples 80 --components 3 --seed 3 --out {d}/sparse"),
                cmd("synth smooth --rows 20 --samples 80 --components 3 --seed 3 --out {d}/smooth"),
                cmd("synth mbss --dims 300,5,4 --ranks 3,2,2 --seed 3 --out {d}/mbss"),
                cmd("synth corpus --dims 8,8,4 --ranks 2,2,2 --train 12 --test 6 --seed 3 --out {d}/corpus"),
                cmd("synth linked --subjects 2 --dims 200,5,4 --ranks 3,2,2 --common 2 --seed 3 --out {d}/linked"),
                cmd("synth pls --samples 60 --predictors 6 --responses 2 --latent 2 --seed 3 --out {d}/pls"),
                cmd("synth coupled --samples 40 --x-dims 5,4 --y-dims 3 --x-ranks 2,2,2 --y-ranks 2,2 --seed 3 --out {d}/coupled"),
            ],
        ),
        (
            "decompose",
            vec![
                cmd("synth tucker --dims 6,5,4 --ranks 2,2,2 --seed 4 --out {d}/data"),
                cmd("decompose --input {d}/data/tensor.tnsr --algo hosvd --ranks 2,2,2 --out {d}/hosvd"),
                cmd("decompose --input {d}/data/tensor.tnsr --algo hooi --ranks 2,2,2 --out {d}/hooi"),
                cmd("decompose --input {d}/data/tensor.tnsr --algo cp --rank 2 --seed 7 --out {d}/cp"),
                cmd("decompose --input {d}/data/tensor.tnsr --algo penalized --ranks 2,2,2 --constraints sparse,smooth,unconstrained --penalties 0.1,1,0 --out {d}/pen"),
                cmd("decompose --input {d}/data/tensor.tnsr --algo bod --ranks 2,2,2 --out {d}/bod"),
            ],
        ),
        (
            "mbss",
            vec![
                cmd("synth tucker --dims 6,5,4 --ranks 2,2,2 --nonnegative --seed 5 --out {d}/data"),
                cmd("mbss --input {d}/data/tensor.tnsr --ranks 2,2,2 --constraints nonnegative,orthogonal,sparse --penalties 0,0,0.1 --seed 2 --out {d}/unfold"),
                cmd("mbss --input {d}/data/tensor.tnsr --pipeline refine --ranks 2,2,2 --constraints independent,unconstrained,nonnegative --seed 2 --out {d}/refine"),
            ],
        ),
        (
            "linked",
            vec![
                cmd("synth linked --subjects 2 --dims 200,5,4 --ranks 3,2,2 --common 2 --seed 6 --out {d}/data"),
                cmd("linked --inputs {d}/data/subject_0.tnsr,{d}/data/subject_1.tnsr --ranks 3,2,2 --common 2,0,0 --constraints independent,unconstrained,unconstrained --seed 1 --out {d}/model"),
            ],
        ),
        (
            "features",
            vec![
                cmd("synth corpus --dims 8,8,4 --ranks 2,2,2 --train 12 --test 6 --seed 7 --out {d}/data"),
                cmd("features --train {d}/data/train.csv --test {d}/data/test.csv --ranks 2,2,2 --classifier knn --out {d}/knn"),
                cmd("features --train {d}/data/train.csv --test {d}/data/test.csv --ranks 2,2,2 --classifier centroid --out {d}/centroid"),
            ],
        ),
        (
            "pls",
            vec![
                cmd("synth pls --samples 60 --predictors 6 --responses 2 --latent 2 --seed 8 --out {d}/data"),
                cmd("pls fit --x {d}/data/x.tnsr --y {d}/data/y.tnsr --components 2 --out {d}/model"),
                cmd("pls predict --model {d}/model --x {d}/data/x.tnsr --out {d}/pred.tnsr"),
                cmd("synth coupled --samples 40 --x-dims 5,4 --y-dims 3 --x-ranks 2,2,2 --y-ranks 2,2 --seed 8 --out {d}/cdata"),
                cmd("pls fit --x {d}/cdata/x.tnsr --y {d}/cdata/y.tnsr --x-ranks 2,2,2 --y-ranks 2,2 --out {d}/tmodel"),
                cmd("pls predict --model {d}/tmodel --x {d}/cdata/x.tnsr --out {d}/tpred.tnsr"),
            ],
        ),
    ];
    let mut parts = Vec::new();
    for (name, steps) in scripts {
        let runs: Vec<Option<Vec<(String, Vec<u8>)>>> = (0..2)
            .map(|_| {
                let dir = tempfile::tempdir().unwrap();
                let d = dir.path().to_string_lossy().into_owned();
                for step in &steps {
                    let args: Vec<String> = step.iter().map(|a| a.replace("{d}", &d)).collect();
                    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
                    if !run_cli(&refs) {
                        eprintln!("command failed: {}", args.join(" "));
                        return None;
                    }
                }
                Some(dir_bytes(dir.path()))
            })
            .collect();
        let same = match (&runs[0], &runs[1]) {
            (Some(a), Some(b)) => !a.is_empty() && a == b,
            _ => false,
        };
        let files = runs[0].as_ref().map_or(0, |r| r.len());
        parts.push(check(same, format!("{name} rerun identical ({files} files)")));
    }
    merge(parts)
}

fn cmd(line: &str) -> Vec<String> {
    line.split_whitespace().map(str::to_owned).collect()
}

fn main() {
    let suite_start = Instant::now();
    let criteria: Vec<(&str, fn() -> Outcome, Duration)> = vec![
        ("1 algebra", criterion_1, Duration::from_secs(10)),
        ("2 hosvd/hooi", criterion_2, Duration::from_secs(30)),
        ("3 cp recovery", criterion_3, Duration::from_secs(60)),
        ("4 constrained engines", criterion_4, Duration::from_secs(60)),
        ("5 multiway bss", criterion_5, Duration::from_secs(60)),
        ("6 feature pipeline", criterion_6, Duration::from_secs(120)),
        ("7 linked bss", criterion_7, Duration::from_secs(360)),
        ("8 pls", criterion_8, Duration::from_secs(60)),
        ("9 reproducibility", criterion_9, Duration::from_secs(360)),
    ];
    let mut failed = 0;
    for (name, f, budget) in criteria {
        let start = Instant::now();
        let mut out = f();
        let took = start.elapsed();
        if took > budget {
            out.ok = false;
            out.detail.push_str(&format!("; !runtime over {budget:?}"));
        }
        if !out.ok {
            failed += 1;
        }
        println!(
            "criterion {name}: {} ({:.2}s) {}",
            if out.ok { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            out.detail
        );
    }
    let total = suite_start.elapsed();
    let total_ok = total < Duration::from_secs(360);
    println!(
        "acceptance suite: {:.1}s total, {}",
        total.as_secs_f64(),
        if total_ok { "within 6 minutes" } else { "OVER 6 minutes" }
    );
    if failed > 0 || !total_ok {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
