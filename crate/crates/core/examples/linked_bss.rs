//! Linked decomposition of several subjects whose mode-0 factors share two
//! columns, and a look at how well the common part was found.

use multiway::factor2d::{ConstraintKind, ConstraintSpec};
use multiway::linked::{linked_decompose, LinkedOptions};
use multiway::metrics::column_congruence;
use multiway::synth::linked_subjects;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let truth = linked_subjects(4, &[300, 10, 8], &[4, 3, 2], 2, 0.01, 12)?;
    let specs = vec![ConstraintSpec::new(ConstraintKind::Independent).with_seed(5), ConstraintSpec::new(ConstraintKind::Orthogonal), ConstraintSpec::new(ConstraintKind::Orthogonal)];
    let m = linked_decompose(&truth.subjects, &[4, 3, 2], &[2, 0, 0], &specs, &LinkedOptions::default())?;

    println!("common columns per mode {:?}", m.common_counts);
    println!("fit errors {:?}", m.fit_errors().iter().map(|e| format!("{e:.4}")).collect::<Vec<_>>());
    if let Some(basis) = &m.common_bases[0] {
        let c = column_congruence(&truth.common, basis);
        println!("common basis congruence {:?}", c.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>());
    }
    if let Some(r) = m.individual_max_corr[0] {
        println!("largest correlation between individual columns {r:.3}");
    }
    for w in &m.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
