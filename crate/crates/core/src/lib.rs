pub mod cli;
pub mod error;
pub mod factor2d;
pub mod features;
pub mod io;
pub mod linalg;
pub mod linked;
pub mod matrix;
pub mod mbss;
pub mod metrics;
pub mod mpls;
pub mod rng;
pub mod synth;
pub mod tensor;
pub mod tucker;
pub mod warning;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use tensor::DenseTensor;
pub use warning::Warning;
