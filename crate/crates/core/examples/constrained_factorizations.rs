//! The two-way engines side by side: NMF, sparse, smooth and ICA.

use multiway::factor2d::{ica_deflation, nmf_hals, roughness, sca_factor, smoca_factor, ConstraintKind, ConstraintSpec};
use multiway::metrics::{amari_of_mixing, column_congruence};
use multiway::synth::{ica_mixtures, smooth_instance, sparse_instance, tucker_tensor};
use multiway::tensor::unfold;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let nonneg = tucker_tensor(&[30, 40], &[3, 3], 0.0, true, 2)?;
    let y = unfold(&nonneg.tensor, 0)?;
    let p = nmf_hals(&y, 3, &ConstraintSpec::new(ConstraintKind::Nonnegative))?;
    println!("nmf: objective {:.3e} after {} iterations", p.final_objective, p.iterations_run);

    let s = sparse_instance(30, 200, 3, 0.8, 0.01, 4);
    let spec = ConstraintSpec::new(ConstraintKind::Sparse).with_penalty(0.05);
    let p = sca_factor(&s.y, 3, &spec)?;
    let zeros = p.b.data().iter().filter(|v| v.abs() < 1e-8).count();
    println!("sparse: {zeros} of {} component entries exactly zero", p.b.data().len());
    println!("        congruence {:?}", fmt(&column_congruence(&s.b, &p.b)));

    let sm = smooth_instance(20, 150, 2, 0.1, 5);
    let spec = ConstraintSpec::new(ConstraintKind::Smooth).with_penalty(10.0);
    let p = smoca_factor(&sm.y, 2, &spec)?;
    println!("smooth: roughness {:.4} (truth {:.4})", roughness(&p.b), roughness(&sm.b));

    let ica = ica_mixtures(4, 2000, 6)?;
    let p = ica_deflation(&ica.mixtures, 4, &ConstraintSpec::new(ConstraintKind::Independent).with_seed(1))?;
    println!("ica: amari index {:.4}", amari_of_mixing(&p.a, &ica.mixing));
    Ok(())
}

fn fmt(v: &[f64]) -> Vec<String> {
    v.iter().map(|x| format!("{x:.3}")).collect()
}
