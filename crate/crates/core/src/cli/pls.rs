//! `pls fit` and `pls predict` for matrix and tensor data.

use std::path::Path;

use super::output::{ensure_dir, read_input, read_tucker, write_trace, write_tucker, Report};
use super::params::Params;
use crate::error::{Error, Result};
use crate::io::{join_list, read_tensor, write_matrix, write_tensor, Manifest};
use crate::matrix::Matrix;
use crate::mpls::{pls_fit, pls_predict, tensor_pls_fit, tensor_pls_predict, PLSModel, TensorPLSModel, TensorPlsOptions};
use crate::tensor::DenseTensor;
use crate::tucker;

fn vector(v: &[f64]) -> Result<DenseTensor> {
    DenseTensor::from_vector(v)
}

fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let t = read_tensor(path)?;
    if t.order() != 1 {
        return Err(Error::Format(format!("{}: expected an order-1 tensor", path.display())));
    }
    Ok(t.into_data())
}

fn relative_residual(truth: &[f64], pred: &[f64]) -> f64 {
    let num: f64 = truth.iter().zip(pred).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let den: f64 = truth.iter().map(|a| a * a).sum::<f64>().sqrt();
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

pub(crate) fn fit(p: &Params) -> Result<String> {
    let x_path = p.path("x")?;
    let y_path = p.path("y")?;
    let out = p.path("out")?;
    let x = read_input(&x_path)?;
    let y = read_input(&y_path)?;
    let x_ranks = p.usize_list("x-ranks")?;
    let y_ranks = p.usize_list("y-ranks")?;
    if x_ranks.is_none() && y_ranks.is_none() {
        let j = p
            .parse::<usize>("components")?
            .ok_or_else(|| Error::InvalidArgument("missing --components (or --x-ranks/--y-ranks for tensors)".into()))?;
        p.finish()?;
        let xm = x
            .to_matrix()
            .map_err(|_| Error::InvalidInput("matrix PLS needs an order-2 predictor; pass --x-ranks for tensors".into()))?;
        let ym = y
            .to_matrix()
            .map_err(|_| Error::InvalidInput("matrix PLS needs an order-2 response; pass --y-ranks for tensors".into()))?;
        return fit_matrix(&out, &xm, &ym, j);
    }
    let x_ranks = x_ranks.ok_or_else(|| Error::InvalidArgument("--y-ranks also needs --x-ranks".into()))?;
    let y_ranks = y_ranks.ok_or_else(|| Error::InvalidArgument("--x-ranks also needs --y-ranks".into()))?;
    let shared = p.usize_list("shared")?.unwrap_or_else(|| vec![0]);
    let opts = TensorPlsOptions {
        max_iters: p.positive_usize_or("max-iters", tucker::DEFAULT_MAX_ITERS)?,
        tol: p.positive_f64_or("tol", tucker::DEFAULT_TOL)?,
    };
    p.finish()?;
    let m = tensor_pls_fit(&x, &y, &x_ranks, &y_ranks, &shared, opts)?;
    save_tensor_model(&out, &m)?;
    let fitted = tensor_pls_predict(&m, &x)?;
    let residual = relative_residual(y.data(), fitted.data());
    let mut r = Report::default();
    r.line("kind", "tensor")
        .line("x_ranks", join_list(&x_ranks))
        .line("y_ranks", join_list(&y_ranks))
        .line("shared_modes", join_list(&m.shared_modes))
        .line("x_fit_error", m.x_model.fit_error)
        .line("y_fit_error", m.y_model.fit_error)
        .line("x_block_energy", m.block_energy.0)
        .line("y_block_energy", m.block_energy.1)
        .line("train_residual", residual)
        .warnings(&m.warnings)
        .write(&out.join("report.txt"))?;
    Ok(format!("train_residual={residual}"))
}

fn fit_matrix(out: &Path, x: &Matrix, y: &Matrix, j: usize) -> Result<String> {
    let m = pls_fit(x, y, j)?;
    ensure_dir(out)?;
    write_matrix(out.join("w.tnsr"), &m.w)?;
    write_matrix(out.join("scores.tnsr"), &m.a)?;
    write_matrix(out.join("x_loadings.tnsr"), &m.b)?;
    write_matrix(out.join("y_loadings.tnsr"), &m.c)?;
    write_tensor(out.join("y_scales.tnsr"), &vector(&m.d)?)?;
    write_tensor(out.join("x_mean.tnsr"), &vector(&m.x_mean)?)?;
    write_tensor(out.join("y_mean.tnsr"), &vector(&m.y_mean)?)?;
    write_matrix(out.join("coefficients.tnsr"), &m.coefficients())?;
    let fitted = pls_predict(&m, x)?;
    let residual = relative_residual(y.data(), fitted.data());
    let mut man = Manifest::new();
    man.set("kind", "matrix")
        .set("algorithm", "pls")
        .set("components_requested", j)
        .set("components", m.components())
        .set("predictors", x.cols())
        .set("responses", y.cols())
        .set("train_residual", residual);
    man.write(out.join("manifest.txt"))?;
    let mut r = Report::default();
    r.line("kind", "matrix")
        .line("components", m.components())
        .line("train_residual", residual)
        .warnings(&m.warnings)
        .write(&out.join("report.txt"))?;
    Ok(format!("train_residual={residual}"))
}

fn save_tensor_model(out: &Path, m: &TensorPLSModel) -> Result<()> {
    ensure_dir(out)?;
    write_tucker(&out.join("x_model"), &m.x_model, "tensor-pls", 0)?.write(out.join("x_model/manifest.txt"))?;
    write_tucker(&out.join("y_model"), &m.y_model, "tensor-pls", 0)?.write(out.join("y_model/manifest.txt"))?;
    write_tensor(out.join("x_mean.tnsr"), &m.x_mean)?;
    write_tensor(out.join("y_mean.tnsr"), &m.y_mean)?;
    write_matrix(out.join("linkage.tnsr"), &m.linkage)?;
    write_trace(&out.join("trace.csv"), &m.combined_trace)?;
    let mut man = Manifest::new();
    man.set("kind", "tensor")
        .set("algorithm", "tensor-pls")
        .set("shared_modes", join_list(&m.shared_modes))
        .set("x_ranks", join_list(&m.x_model.ranks()))
        .set("y_ranks", join_list(&m.y_model.ranks()))
        .set("x_fit_error", m.x_model.fit_error)
        .set("y_fit_error", m.y_model.fit_error)
        .set("iterations", m.combined_trace.len().saturating_sub(1));
    man.write(out.join("manifest.txt"))
}

fn load_tensor_model(dir: &Path) -> Result<TensorPLSModel> {
    let man = Manifest::read(dir.join("manifest.txt"))?;
    let (_, x_model) = read_tucker(&dir.join("x_model"))?;
    let (_, y_model) = read_tucker(&dir.join("y_model"))?;
    Ok(TensorPLSModel {
        x_model,
        y_model,
        shared_modes: man.get_usize_list("shared_modes")?,
        x_mean: read_tensor(dir.join("x_mean.tnsr"))?,
        y_mean: read_tensor(dir.join("y_mean.tnsr"))?,
        linkage: read_tensor(dir.join("linkage.tnsr"))?.to_matrix()?,
        x_trace: Vec::new(),
        y_trace: Vec::new(),
        combined_trace: Vec::new(),
        block_energy: (0.0, 0.0),
        warnings: Vec::new(),
    })
}

fn load_matrix_model(dir: &Path) -> Result<PLSModel> {
    let m = |name: &str| -> Result<Matrix> { read_tensor(dir.join(name))?.to_matrix() };
    Ok(PLSModel {
        w: m("w.tnsr")?,
        a: m("scores.tnsr")?,
        b: m("x_loadings.tnsr")?,
        c: m("y_loadings.tnsr")?,
        d: read_vector(&dir.join("y_scales.tnsr"))?,
        x_mean: read_vector(&dir.join("x_mean.tnsr"))?,
        y_mean: read_vector(&dir.join("y_mean.tnsr"))?,
        warnings: Vec::new(),
    })
}

pub(crate) fn predict(p: &Params) -> Result<String> {
    let model_dir = p.path("model")?;
    let x_path = p.path("x")?;
    let out = p.path("out")?;
    let y_path = p.raw("y");
    p.finish()?;
    let kind = Manifest::read(model_dir.join("manifest.txt"))
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", model_dir.display())))?
        .require("kind")?
        .to_string();
    let x = read_input(&x_path)?;
    let pred = match kind.as_str() {
        "matrix" => {
            let m = load_matrix_model(&model_dir)?;
            let xm = x
                .to_matrix()
                .map_err(|_| Error::InvalidInput("matrix PLS model needs an order-2 predictor".into()))?;
            DenseTensor::from_matrix(&pls_predict(&m, &xm)?)
        }
        "tensor" => tensor_pls_predict(&load_tensor_model(&model_dir)?, &x)?,
        other => return Err(Error::Format(format!("unknown model kind `{other}`"))),
    };
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(parent)?;
    }
    write_tensor(&out, &pred)?;
    match y_path {
        Some(y) => {
            let truth = read_input(Path::new(&y))?;
            if truth.dims() != pred.dims() {
                return Err(Error::Shape(format!(
                    "response dims {:?} differ from prediction dims {:?}",
                    truth.dims(),
                    pred.dims()
                )));
            }
            Ok(format!("residual={}", relative_residual(truth.data(), pred.data())))
        }
        None => Ok(format!("predicted dims={}", join_list(pred.dims()))),
    }
}
