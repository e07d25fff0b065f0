//! Tucker decomposition of a noisy low-rank tensor: closed-form HOSVD, then
//! HOOI refinement starting from it.

use multiway::synth::tucker_tensor;
use multiway::tucker::{hooi, hosvd};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let truth = tucker_tensor(&[20, 15, 10], &[4, 3, 2], 0.05, false, 1)?;

    let h = hosvd(&truth.tensor, &[4, 3, 2])?;
    println!("hosvd fit error {:.6}", h.fit_error);

    let m = hooi(&truth.tensor, &[4, 3, 2], 100, 1e-10)?;
    println!("hooi  fit error {:.6} after {} sweeps", m.fit_error, m.trace.len().saturating_sub(1));
    for (n, u) in m.factors.iter().enumerate() {
        let angle = multiway::metrics::max_principal_angle(u, &truth.factors[n]);
        println!("mode {n}: factor {}x{}, largest angle to truth {angle:.4} rad", u.rows(), u.cols());
    }
    Ok(())
}
