//! CP-ALS on an exactly rank-3 tensor and recovery of its factors.

use multiway::metrics::cp_factor_congruence;
use multiway::synth::cp_tensor;
use multiway::tucker::{cp_als, cp_to_tucker};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let truth = cp_tensor(&[12, 10, 8], 3, 0.0, 0.6, 3)?;
    let m = cp_als(&truth.tensor, 3, 1000, 1e-12, 7)?;
    println!("fit error {:.2e}", m.fit_error);
    println!("weights {:?}", m.weights.iter().map(|w| format!("{w:.3}")).collect::<Vec<_>>());
    println!("true    {:?}", truth.weights.iter().map(|w| format!("{w:.3}")).collect::<Vec<_>>());
    println!("factor congruence {:.6}", cp_factor_congruence(&truth.factors, &m.factors));

    // a CP model is a Tucker model with a superdiagonal core
    let t = cp_to_tucker(&m);
    println!("as tucker: core dims {:?}", t.core.dims());
    Ok(())
}
