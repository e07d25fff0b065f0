//! Model directories: `core.tnsr`, `factor_<n>.tnsr`, `manifest.txt`,
//! `report.txt` and an optional `trace.csv`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::{join_list, read_tensor, write_matrix, write_tensor, Manifest};
use crate::matrix::Matrix;
use crate::tensor::DenseTensor;
use crate::tucker::TuckerModel;
use crate::warning::Warning;

pub(crate) fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

/// Plain-text report built line by line.
#[derive(Default)]
pub(crate) struct Report {
    text: String,
}

impl Report {
    pub(crate) fn line(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        let _ = writeln!(self.text, "{key}: {value}");
        self
    }

    pub(crate) fn warnings(&mut self, ws: &[Warning]) -> &mut Self {
        if ws.is_empty() {
            self.line("warnings", "none");
        }
        for w in ws {
            self.line("warning", w);
        }
        self
    }

    pub(crate) fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, &self.text)?;
        Ok(())
    }
}

pub(crate) fn write_trace(path: &Path, trace: &[f64]) -> Result<()> {
    let mut s = String::from("iteration,value\n");
    for (i, v) in trace.iter().enumerate() {
        let _ = writeln!(s, "{i},{v}");
    }
    fs::write(path, s)?;
    Ok(())
}

/// Writes the tensors of a Tucker model and returns a manifest holding the
/// common keys; callers add their own and write it.
pub(crate) fn write_tucker(dir: &Path, m: &TuckerModel, algorithm: &str, seed: u64) -> Result<Manifest> {
    ensure_dir(dir)?;
    write_tensor(dir.join("core.tnsr"), &m.core)?;
    for (n, f) in m.factors.iter().enumerate() {
        write_matrix(dir.join(format!("factor_{n}.tnsr")), f)?;
    }
    if !m.trace.is_empty() {
        write_trace(&dir.join("trace.csv"), &m.trace)?;
    }
    let mut man = Manifest::new();
    man.set("order", m.factors.len())
        .set("dims", join_list(&m.factors.iter().map(Matrix::rows).collect::<Vec<_>>()))
        .set("ranks", join_list(&m.ranks()))
        .set("fit_error", m.fit_error)
        .set("algorithm", algorithm)
        .set("seed", seed)
        .set("iterations", m.trace.len().saturating_sub(1));
    Ok(man)
}

/// Reads a model directory written by [`write_tucker`].
pub(crate) fn read_tucker(dir: &Path) -> Result<(Manifest, TuckerModel)> {
    let man = Manifest::read(dir.join("manifest.txt"))?;
    let order: usize = man
        .require("order")?
        .parse()
        .map_err(|_| Error::Format("manifest `order` is not an integer".into()))?;
    let core = read_tensor(dir.join("core.tnsr"))?;
    let factors = (0..order)
        .map(|n| read_tensor(dir.join(format!("factor_{n}.tnsr")))?.to_matrix())
        .collect::<Result<Vec<_>>>()?;
    let mut model = TuckerModel::new(core, factors).map_err(|e| Error::Format(format!("stored model: {e}")))?;
    model.fit_error = man.get_f64("fit_error")?;
    Ok((man, model))
}

pub(crate) fn read_input(path: &Path) -> Result<DenseTensor> {
    read_tensor(path).map_err(|e| match e {
        Error::Io(io) => Error::InvalidInput(format!("{}: {io}", path.display())),
        Error::Format(msg) => Error::InvalidInput(format!("{}: {msg}", path.display())),
        other => other,
    })
}
