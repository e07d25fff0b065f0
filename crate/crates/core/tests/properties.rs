//! Property tests over random instances.

use multiway::factor2d::{
    ica_deflation, nmf_hals, nmf_hals_init, nndsvd_init, normalize_pair, sca_factor, sca_factor_init, smoca_factor,
    smoca_factor_init, ConstraintKind, ConstraintSpec, FactorInit,
};
use multiway::features::{classify_knn, extract_train, project_test, FeatureSet, LabeledTensorSet};
use multiway::io::{decode_tensor, encode_tensor};
use multiway::linalg::pseudo_inverse;
use multiway::linked::{identify_common, linked_decompose, LinkedOptions};
use multiway::matrix::Matrix;
use multiway::mbss::{mwbss_refine, mwbss_unfold};
use multiway::mpls::{pls_fit, pls_predict, tensor_pls_fit, TensorPlsOptions};
use multiway::rng::seeded;
use multiway::synth;
use multiway::tensor::{fold, mode_product, multi_mode_product, product_all, unfold, DenseTensor};
use multiway::tucker::{core_project, cp_als, hooi, hosvd, penalized_tucker, relative_error, tucker1, CPModel};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

fn gauss_tensor(dims: &[usize], seed: u64) -> DenseTensor {
    let mut rng = seeded(seed);
    DenseTensor::from_fn(dims, |_| rng.sample(StandardNormal))
}

fn gauss(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = seeded(seed);
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

fn uniform(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = seeded(seed);
    Matrix::from_fn(rows, cols, |_, _| rng.random::<f64>())
}

fn rel(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

fn monotone(trace: &[f64]) -> bool {
    trace.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12) + 1e-15)
}

fn orthonormality_defect(q: &Matrix) -> f64 {
    q.t_dot(q).max_abs_diff(&Matrix::identity(q.cols()))
}

fn naive_mode_product(t: &DenseTensor, u: &Matrix, mode: usize) -> DenseTensor {
    let mut dims = t.dims().to_vec();
    dims[mode] = u.rows();
    DenseTensor::from_fn(&dims, |idx| {
        let mut src = idx.to_vec();
        (0..t.dims()[mode])
            .map(|k| {
                src[mode] = k;
                u.get(idx[mode], k) * t.get(&src)
            })
            .sum()
    })
}

fn dims_strategy(max_order: usize, max_dim: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1..=max_dim, 1..=max_order)
}

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig {
        cases: n,
        ..ProptestConfig::default()
    }
}

// tensor algebra

proptest! {
    #![proptest_config(cases(48))]

    #[test]
    fn fold_unfold_round_trip_is_bit_exact(dims in dims_strategy(5, 4), seed in any::<u64>()) {
        let t = gauss_tensor(&dims, seed);
        for n in 0..dims.len() {
            let back = fold(&unfold(&t, n).unwrap(), n, &dims).unwrap();
            prop_assert_eq!(back.data(), t.data());
        }
    }

    #[test]
    fn unfolding_preserves_frobenius_norm(dims in dims_strategy(5, 4), seed in any::<u64>()) {
        let t = gauss_tensor(&dims, seed);
        let norm = t.frobenius_norm();
        for n in 0..dims.len() {
            let un = unfold(&t, n).unwrap().frobenius_norm();
            prop_assert!((un - norm).abs() <= 1e-15 * norm.max(1.0) * 4.0);
        }
    }

    #[test]
    fn mode_product_matches_summation(dims in dims_strategy(4, 5), rows in 1usize..5, seed in any::<u64>()) {
        let t = gauss_tensor(&dims, seed);
        for n in 0..dims.len() {
            let u = gauss(rows, dims[n], seed ^ n as u64);
            let got = mode_product(&t, &u, n).unwrap();
            let want = naive_mode_product(&t, &u, n);
            prop_assert!(rel(got.data(), want.data()) <= 1e-12);
        }
    }

    #[test]
    fn multi_mode_product_ignores_mode_order(dims in dims_strategy(4, 4), seed in any::<u64>()) {
        let t = gauss_tensor(&dims, seed);
        let us: Vec<Matrix> = dims.iter().enumerate().map(|(n, &d)| gauss(1 + (n % 3), d, seed.wrapping_add(n as u64))).collect();
        let fwd: Vec<(&Matrix, usize)> = us.iter().zip(0..).collect();
        let rev: Vec<(&Matrix, usize)> = fwd.iter().rev().cloned().collect();
        let a = multi_mode_product(&t, &fwd).unwrap();
        let b = multi_mode_product(&t, &rev).unwrap();
        prop_assert!(rel(a.data(), b.data()) <= 1e-12);
    }

    #[test]
    fn tnsr_round_trip(dims in dims_strategy(4, 4), seed in any::<u64>()) {
        let t = gauss_tensor(&dims, seed);
        let back = decode_tensor(&encode_tensor(&t)).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn moore_penrose_identities(rows in 1usize..7, cols in 1usize..7, rank in 1usize..7, seed in any::<u64>()) {
        // rank-deficient whenever rank < min(rows, cols)
        let a = gauss(rows, rank, seed).dot(&gauss(rank, cols, seed ^ 1));
        let p = pseudo_inverse(&a, None);
        let scale = a.frobenius_norm().max(1.0);
        prop_assert!(a.dot(&p).dot(&a).max_abs_diff(&a) <= 1e-8 * scale);
        let pscale = p.frobenius_norm().max(1.0);
        prop_assert!(p.dot(&a).dot(&p).max_abs_diff(&p) <= 1e-8 * pscale);
        let ap = a.dot(&p);
        prop_assert!(ap.max_abs_diff(&ap.transpose()) <= 1e-8);
        let pa = p.dot(&a);
        prop_assert!(pa.max_abs_diff(&pa.transpose()) <= 1e-8);
    }
}

// two-way engines

fn permuted(init: &FactorInit, perm: &[usize]) -> FactorInit {
    FactorInit {
        a: init.a.select_columns(perm),
        b: init.b.select_columns(perm),
    }
}

proptest! {
    #![proptest_config(cases(16))]

    #[test]
    fn nmf_monotone_nonnegative(rows in 4usize..15, cols in 4usize..15, j in 1usize..4, seed in any::<u64>()) {
        let y = uniform(rows, cols, seed);
        let p = nmf_hals(&y, j, &ConstraintSpec::new(ConstraintKind::Nonnegative).with_max_iters(100)).unwrap();
        prop_assert!(monotone(&p.objective_trace));
        prop_assert!(p.a.data().iter().chain(p.b.data()).all(|&v| v >= 0.0));
    }

    #[test]
    fn penalized_engines_monotone(rows in 4usize..15, cols in 4usize..20, j in 1usize..4, lambda in 0.0f64..3.0, seed in any::<u64>()) {
        let y = gauss(rows, cols, seed);
        let sca = sca_factor(&y, j, &ConstraintSpec::new(ConstraintKind::Sparse).with_penalty(lambda)).unwrap();
        prop_assert!(monotone(&sca.objective_trace));
        let smo = smoca_factor(&y, j, &ConstraintSpec::new(ConstraintKind::Smooth).with_penalty(lambda)).unwrap();
        prop_assert!(monotone(&smo.objective_trace));
    }

    #[test]
    fn engines_ignore_init_column_order(seed in any::<u64>()) {
        let y = uniform(12, 10, seed);
        let j = 3;
        let perm = [2usize, 0, 1];
        let init = nndsvd_init(&y, j).unwrap();
        let spec = ConstraintSpec::new(ConstraintKind::Nonnegative).with_max_iters(2000).with_tol(1e-14);
        let a = nmf_hals_init(&y, init.clone(), &spec).unwrap().final_objective;
        let b = nmf_hals_init(&y, permuted(&init, &perm), &spec).unwrap().final_objective;
        prop_assert!((a - b).abs() <= 1e-6 * a.max(1e-12), "nmf {} vs {}", a, b);

        let yg = gauss(12, 10, seed);
        let gi = FactorInit { a: gauss(12, j, seed ^ 3), b: gauss(10, j, seed ^ 4) };
        let spec = ConstraintSpec::new(ConstraintKind::Sparse).with_penalty(0.5).with_max_iters(2000).with_tol(1e-14);
        let a = sca_factor_init(&yg, gi.clone(), &spec).unwrap().final_objective;
        let b = sca_factor_init(&yg, permuted(&gi, &perm), &spec).unwrap().final_objective;
        prop_assert!((a - b).abs() <= 1e-6 * a.max(1e-12), "sca {} vs {}", a, b);
        let spec = ConstraintSpec::new(ConstraintKind::Smooth).with_penalty(2.0).with_max_iters(2000).with_tol(1e-14);
        let a = smoca_factor_init(&yg, gi.clone(), &spec).unwrap().final_objective;
        let b = smoca_factor_init(&yg, permuted(&gi, &perm), &spec).unwrap().final_objective;
        prop_assert!((a - b).abs() <= 1e-6 * a.max(1e-12), "smoca {} vs {}", a, b);
    }

    #[test]
    fn normalization_fixes_scale_and_is_idempotent(rows in 2usize..8, cols in 2usize..8, j in 1usize..4, seed in any::<u64>()) {
        let a = gauss(rows, j, seed);
        let b = gauss(cols, j, seed ^ 9);
        let (a1, b1) = normalize_pair(&a, &b);
        for n in b1.column_norms() {
            prop_assert!((n - 1.0).abs() <= 1e-12);
        }
        prop_assert!(a1.dot_t(&b1).max_abs_diff(&a.dot_t(&b)) <= 1e-10 * a.dot_t(&b).frobenius_norm().max(1.0));
        let (a2, b2) = normalize_pair(&a1, &b1);
        prop_assert!(a2.max_abs_diff(&a1) <= 1e-12 && b2.max_abs_diff(&b1) <= 1e-12);
    }

    #[test]
    fn ica_components_standardized(seed in 0u64..1000) {
        let truth = synth::ica_mixtures(3, 1000, seed).unwrap();
        let p = ica_deflation(&truth.mixtures, 3, &ConstraintSpec::new(ConstraintKind::Independent).with_seed(seed)).unwrap();
        for c in p.b.columns() {
            let n = c.len() as f64;
            let mean = c.iter().sum::<f64>() / n;
            let var = c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            prop_assert!(mean.abs() <= 1e-8);
            prop_assert!((var - 1.0).abs() <= 1e-8);
        }
    }
}

// Tucker family

proptest! {
    #![proptest_config(cases(24))]

    #[test]
    fn hosvd_orthonormal_and_all_orthogonal(dims in prop::collection::vec(2usize..6, 3), seed in any::<u64>()) {
        let t = gauss_tensor(&dims, seed);
        let m = hosvd(&t, &dims).unwrap();
        for f in &m.factors {
            prop_assert!(orthonormality_defect(f) <= 1e-10);
        }
        let scale = t.frobenius_norm().powi(2);
        for n in 0..3 {
            let g = unfold(&m.core, n).unwrap();
            let gram = g.dot_t(&g);
            for i in 0..gram.rows() {
                for k in 0..gram.cols() {
                    if i != k {
                        prop_assert!(gram.get(i, k).abs() <= 1e-8 * scale);
                    }
                }
            }
        }
    }

    #[test]
    fn hooi_and_penalized_traces_monotone(dims in prop::collection::vec(3usize..6, 3), seed in any::<u64>(), alpha in 0.0f64..2.0) {
        let t = gauss_tensor(&dims, seed);
        let ranks = vec![2, 2, 2];
        prop_assert!(monotone(&hooi(&t, &ranks, 100, 1e-12).unwrap().trace));
        let specs = vec![
            ConstraintSpec::new(ConstraintKind::Sparse).with_max_iters(100),
            ConstraintSpec::new(ConstraintKind::Smooth).with_max_iters(100),
            ConstraintSpec::new(ConstraintKind::Orthogonal).with_max_iters(100),
        ];
        let m = penalized_tucker(&t, &ranks, &specs, &[alpha, alpha, 0.0]).unwrap();
        prop_assert!(monotone(&m.trace));
    }

    #[test]
    fn core_project_inverts_reconstruction(seed in any::<u64>()) {
        let g = gauss_tensor(&[2, 3, 2], seed);
        let fs = vec![gauss(5, 2, seed ^ 1), gauss(4, 3, seed ^ 2), gauss(6, 2, seed ^ 3)];
        let t = product_all(&g, &fs).unwrap();
        let back = core_project(&t, &fs).unwrap();
        prop_assert!(rel(back.data(), g.data()) <= 1e-8);
    }

    #[test]
    fn cp_reconstruction_permutation_invariant(seed in any::<u64>()) {
        let t = gauss_tensor(&[5, 4, 3], seed);
        let m = cp_als(&t, 3, 20, 1e-10, seed).unwrap();
        let perm = [1usize, 2, 0];
        let p = CPModel {
            weights: perm.iter().map(|&k| m.weights[k]).collect(),
            factors: m.factors.iter().map(|f| f.select_columns(&perm)).collect(),
            fit_error: m.fit_error,
            trace: Vec::new(),
            warnings: Vec::new(),
        };
        let a = m.reconstruct();
        prop_assert!(rel(p.reconstruct().data(), a.data()) <= 1e-12);
    }

    #[test]
    fn tucker1_orders_agree_on_exact_multilinear_rank(seed in any::<u64>(), n in 0usize..3, m in 0usize..3) {
        prop_assume!(n != m);
        let truth = synth::tucker_tensor(&[5, 4, 6], &[2, 2, 2], 0.0, false, seed).unwrap();
        let t = truth.tensor;
        let sequential = |first: usize, second: usize| {
            let (c1, u1) = tucker1(&t, first, 2).unwrap();
            let (c2, u2) = tucker1(&c1, second, 2).unwrap();
            let approx = mode_product(&mode_product(&c2, &u2, second).unwrap(), &u1, first).unwrap();
            relative_error(&t, &approx).unwrap()
        };
        let (a, b) = (sequential(n, m), sequential(m, n));
        prop_assert!((a - b).abs() <= 1e-9, "{} vs {}", a, b);
    }
}

// Sequential truncation is order dependent once both steps discard energy,
// so the two orders only agree in special cases like the one above.
#[test]
fn tucker1_order_matters_for_generic_tensors() {
    let t = gauss_tensor(&[5, 4, 6], 0);
    let sequential = |first: usize, r1: usize, second: usize, r2: usize| {
        let (c1, u1) = tucker1(&t, first, r1).unwrap();
        let (c2, u2) = tucker1(&c1, second, r2).unwrap();
        let approx = mode_product(&mode_product(&c2, &u2, second).unwrap(), &u1, first).unwrap();
        relative_error(&t, &approx).unwrap()
    };
    let a = sequential(1, 2, 0, 3);
    let b = sequential(0, 3, 1, 2);
    assert!((a - b).abs() > 1e-6, "{a} vs {b}");
}

// multiway BSS

proptest! {
    #![proptest_config(cases(12))]

    #[test]
    fn mbss_fit_error_is_consistent_and_deterministic(seed in any::<u64>(), refine in any::<bool>()) {
        let t = synth::tucker_tensor(&[6, 5, 4], &[2, 2, 2], 0.0, true, seed).unwrap().tensor;
        let specs = vec![
            ConstraintSpec::new(ConstraintKind::Nonnegative).with_seed(seed),
            ConstraintSpec::new(ConstraintKind::Orthogonal),
            ConstraintSpec::new(ConstraintKind::Sparse).with_penalty(0.1),
        ];
        let run = || if refine { mwbss_refine(&t, &[2, 2, 2], &specs) } else { mwbss_unfold(&t, &[2, 2, 2], &specs) };
        let r1 = run().unwrap();
        let r2 = run().unwrap();
        prop_assert_eq!(&r1.model.core, &r2.model.core);
        prop_assert_eq!(&r1.model.factors, &r2.model.factors);
        let core = core_project(&t, &r1.model.factors).unwrap();
        let err = relative_error(&t, &product_all(&core, &r1.model.factors).unwrap()).unwrap();
        // the least-squares core can only do better than the recorded model
        prop_assert!(err <= r1.model.fit_error + 1e-10);
        if !refine {
            prop_assert!((err - r1.model.fit_error).abs() <= 1e-10);
        }
    }

    #[test]
    fn orthogonal_unfold_spans_hosvd(dims in prop::collection::vec(3usize..7, 3), seed in any::<u64>()) {
        let t = gauss_tensor(&dims, seed);
        let ranks = vec![2, 2, 2];
        let u = mwbss_unfold(&t, &ranks, &vec![ConstraintSpec::new(ConstraintKind::Orthogonal); 3]).unwrap();
        let h = hosvd(&t, &ranks).unwrap();
        for n in 0..3 {
            let a = &u.model.factors[n];
            let b = &h.factors[n];
            // subspace distance ||P_a - P_b||_F
            let d = a.dot_t(a).sub(&b.dot_t(b)).frobenius_norm();
            prop_assert!(d <= 1e-6, "mode {}: {}", n, d);
        }
    }
}

// feature extraction

fn rotate_features(fs: &[DenseTensor], q: &Matrix) -> Vec<DenseTensor> {
    fs.iter()
        .map(|f| {
            let v = q.mul_vec(f.data());
            DenseTensor::new(f.dims().to_vec(), v).unwrap()
        })
        .collect()
}

proptest! {
    #![proptest_config(cases(8))]

    #[test]
    fn fit_error_nonincreasing_in_rank(seed in any::<u64>(), mode in 0usize..2) {
        let c = synth::class_corpus(&[6, 5, 4], &[2, 2, 2], 3, 12, 1, 0.1, seed).unwrap();
        let mut prev = f64::INFINITY;
        for j in 1..=3 {
            let mut ranks = vec![2, 2, 2];
            ranks[mode] = j;
            let e = extract_train(&c.train, &ranks).unwrap().fit_error;
            prop_assert!(e <= prev + 1e-10, "rank {}: {} > {}", j, e, prev);
            prev = e;
        }
    }

    #[test]
    fn projection_is_linear(seed in any::<u64>(), alpha in -3.0f64..3.0, beta in -3.0f64..3.0) {
        let c = synth::class_corpus(&[6, 5, 4], &[2, 2, 2], 2, 8, 2, 0.1, seed).unwrap();
        let fs = extract_train(&c.train, &[2, 2, 2]).unwrap();
        let (x1, x2) = (&c.test.samples[0], &c.test.samples[1]);
        let mix = x1.scale(alpha).add(&x2.scale(beta)).unwrap();
        let lhs = project_test(&mix, &fs.bases).unwrap();
        let rhs = project_test(x1, &fs.bases).unwrap().scale(alpha)
            .add(&project_test(x2, &fs.bases).unwrap().scale(beta)).unwrap();
        let scale = rhs.frobenius_norm().max(1.0);
        prop_assert!(lhs.sub(&rhs).unwrap().frobenius_norm() <= 1e-10 * scale);
    }

    #[test]
    fn knn_invariant_to_feature_rotation(seed in any::<u64>(), k in 1usize..4) {
        let c = synth::class_corpus(&[6, 5, 4], &[2, 2, 2], 3, 15, 9, 0.5, seed).unwrap();
        let fs = extract_train(&c.train, &[2, 2, 2]).unwrap();
        let test: Vec<DenseTensor> = c.test.samples.iter().map(|x| project_test(x, &fs.bases).unwrap()).collect();
        let q = synth::random_orthonormal(&mut seeded(seed ^ 77), 8, 8);
        let rotated = FeatureSet { features: rotate_features(&fs.features, &q), ..fs.clone() };
        let a = classify_knn(&fs, &test, k).unwrap();
        let b = classify_knn(&rotated, &rotate_features(&test, &q), k).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn feature_pipeline_is_deterministic(seed in any::<u64>()) {
        let c = synth::class_corpus(&[6, 5, 4], &[2, 2, 2], 3, 9, 3, 0.1, seed).unwrap();
        let set = LabeledTensorSet::new(c.train.samples.clone(), c.train.labels.clone()).unwrap();
        let a = extract_train(&set, &[2, 2, 2]).unwrap();
        let b = extract_train(&set, &[2, 2, 2]).unwrap();
        prop_assert_eq!(a.bases, b.bases);
        prop_assert_eq!(a.features, b.features);
    }
}

// linked decomposition

proptest! {
    #![proptest_config(cases(12))]

    #[test]
    fn identify_common_ignores_sign_and_order(seed in any::<u64>()) {
        let base = gauss(40, 4, seed);
        let factors: Vec<Matrix> = (0..3u64)
            .map(|s| {
                let mut f = base.clone();
                // columns 2 and 3 are subject specific
                for k in 2..4 {
                    f.set_column(k, &gauss(40, 1, seed ^ (s * 10 + k as u64 + 100)).column(0));
                }
                f.add(&gauss(40, 4, seed ^ (s + 1000)).scale(0.01))
            })
            .collect();
        let a = identify_common(&factors, 0.9).unwrap();
        let mut shuffled = factors.clone();
        let perm = [3usize, 1, 0, 2];
        let flipped = shuffled[1].select_columns(&perm);
        shuffled[1] = Matrix::from_fn(40, 4, |i, k| if k % 2 == 0 { -flipped.get(i, k) } else { flipped.get(i, k) });
        let b = identify_common(&shuffled, 0.9).unwrap();
        prop_assert_eq!(a.count(), b.count());
        for (ca, cb) in a.indices.iter().zip(&b.indices) {
            prop_assert_eq!(ca[0], cb[0]);
            prop_assert_eq!(ca[2], cb[2]);
            prop_assert_eq!(perm[cb[1]], ca[1]);
        }
        let (ba, bb) = (a.basis.unwrap(), b.basis.unwrap());
        for k in 0..ba.cols() {
            let (x, y) = (ba.column(k), bb.column(k));
            let same: f64 = x.iter().zip(&y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            let opposite: f64 = x.iter().zip(&y).map(|(p, q)| (p + q).abs()).fold(0.0, f64::max);
            prop_assert!(same.min(opposite) <= 1e-10);
        }
    }

    #[test]
    fn fully_shared_modes_use_one_factor(seed in any::<u64>()) {
        let xs: Vec<DenseTensor> = (0..3u64).map(|s| gauss_tensor(&[5, 4, 3], seed ^ s)).collect();
        let specs = vec![ConstraintSpec::new(ConstraintKind::Orthogonal); 3];
        let m = linked_decompose(&xs, &[2, 2, 2], &[2, 0, 0], &specs, &LinkedOptions::default()).unwrap();
        let f0 = &m.subject_models[0].factors[0];
        for sm in &m.subject_models[1..] {
            prop_assert_eq!(&sm.factors[0], f0);
        }
    }

    #[test]
    fn fully_individual_matches_separate_runs(seed in any::<u64>()) {
        let xs: Vec<DenseTensor> = (0..2u64).map(|s| gauss_tensor(&[5, 4, 3], seed ^ s)).collect();
        let specs = vec![ConstraintSpec::new(ConstraintKind::Orthogonal); 3];
        let m = linked_decompose(&xs, &[2, 2, 2], &[0, 0, 0], &specs, &LinkedOptions::default()).unwrap();
        for (x, fe) in xs.iter().zip(m.fit_errors()) {
            let own = mwbss_unfold(x, &[2, 2, 2], &specs).unwrap().model.fit_error;
            prop_assert!((own - fe).abs() <= 1e-10);
        }
    }
}

// PLS

proptest! {
    #![proptest_config(cases(24))]

    #[test]
    fn pls_scores_orthogonal_and_directions_unit(rows in 8usize..30, n in 2usize..6, m in 1usize..4, j in 1usize..5, seed in any::<u64>()) {
        let x = gauss(rows, n, seed);
        let y = gauss(rows, m, seed ^ 5);
        let model = pls_fit(&x, &y, j).unwrap();
        let g = model.a.t_dot(&model.a);
        for i in 0..g.rows() {
            for k in 0..g.cols() {
                if i != k {
                    prop_assert!(g.get(i, k).abs() <= 1e-8 * g.get(i, i).max(g.get(k, k)).max(1.0));
                }
            }
        }
        for w in model.w.column_norms() {
            prop_assert!((w - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn pls_full_rank_noiseless_is_exact(rows in 10usize..30, latent in 1usize..4, seed in any::<u64>()) {
        let d = synth::pls_latent(rows, 6, 3, latent, 0.0, seed);
        let model = pls_fit(&d.x, &d.y, latent).unwrap();
        let pred = pls_predict(&model, &d.x).unwrap();
        prop_assert!(pred.max_abs_diff(&d.y) <= 1e-8 * d.y.frobenius_norm().max(1.0));
    }

    #[test]
    fn pls_prediction_is_affine(seed in any::<u64>(), alpha in -2.0f64..2.0) {
        let x = gauss(20, 5, seed);
        let y = gauss(20, 2, seed ^ 3);
        let model = pls_fit(&x, &y, 3).unwrap();
        let (x1, x2) = (gauss(4, 5, seed ^ 7), gauss(4, 5, seed ^ 8));
        let p = |z: &Matrix| pls_predict(&model, z).unwrap();
        // f(a x1 + (1-a) x2) = a f(x1) + (1-a) f(x2) for an affine f
        let lhs = p(&x1.scale(alpha).add(&x2.scale(1.0 - alpha)));
        let rhs = p(&x1).scale(alpha).add(&p(&x2).scale(1.0 - alpha));
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-10 * rhs.frobenius_norm().max(1.0));
    }
}

proptest! {
    #![proptest_config(cases(8))]

    #[test]
    fn tensor_pls_shared_factor_and_traces(seed in any::<u64>()) {
        let pair = synth::coupled_pair(30, &[5, 4], &[3], &[2, 2, 2], &[2, 2], 0.05, seed).unwrap();
        let m = tensor_pls_fit(&pair.x, &pair.y, &[2, 2, 2], &[2, 2], &[0], TensorPlsOptions::default()).unwrap();
        prop_assert!(orthonormality_defect(&m.x_model.factors[0]) <= 1e-10);
        prop_assert_eq!(&m.x_model.factors[0], &m.y_model.factors[0]);
        prop_assert!(monotone(&m.combined_trace));
        prop_assert!(monotone(&m.x_trace), "x trace {:?}", m.x_trace);
        prop_assert!(monotone(&m.y_trace), "y trace {:?}", m.y_trace);
    }
}
