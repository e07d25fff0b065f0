//! Matrix PLS regression, then its tensor counterpart with a shared sample
//! factor.

use multiway::metrics::r_squared_columns;
use multiway::mpls::{pls_fit, pls_predict, tensor_pls_fit, tensor_pls_predict, TensorPlsOptions};
use multiway::synth::{coupled_pair, pls_latent};
use multiway::tucker::relative_error;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let d = pls_latent(200, 20, 4, 3, 0.05, 13);
    let (train_x, test_x) = (d.x.rows_range(0, 150), d.x.rows_range(150, 200));
    let (train_y, test_y) = (d.y.rows_range(0, 150), d.y.rows_range(150, 200));
    for j in 1..=4 {
        let m = pls_fit(&train_x, &train_y, j)?;
        let r2 = r_squared_columns(&test_y, &pls_predict(&m, &test_x)?);
        println!("{j} components: held-out r2 {r2:.4}");
    }

    let c = coupled_pair(60, &[8, 6], &[5], &[3, 2, 2], &[3, 2], 0.01, 14)?;
    let m = tensor_pls_fit(&c.x, &c.y, &[3, 2, 2], &[3, 2], &[0], TensorPlsOptions::default())?;
    let pred = tensor_pls_predict(&m, &c.x)?;
    println!("tensor pls: y residual {:.4}", relative_error(&c.y, &pred)?);
    println!("shared factor angle {:.4} rad", multiway::mpls::shared_factor_angle(&m, &c.shared));
    println!("combined trace {} sweeps, last {:.6}", m.combined_trace.len(), m.combined_trace.last().unwrap());
    Ok(())
}
