//! `decompose`, `mbss` and `linked`.

use std::path::{Path, PathBuf};

use super::output::{ensure_dir, read_input, write_trace, write_tucker, Report};
use super::params::{broadcast, Params};
use crate::error::{Error, Result};
use crate::factor2d::{ConstraintKind, ConstraintSpec};
use crate::io::{join_list, write_matrix, write_tensor};
use crate::linked::{linked_decompose, LinkedOptions, DEFAULT_THRESHOLD};
use crate::mbss::{mwbss_refine, mwbss_unfold, MwbssResult};
use crate::tensor::DenseTensor;
use crate::tucker::{self, bod_decompose, cp_als, cp_to_tucker, hooi, hosvd, penalized_tucker, TuckerModel};

fn kinds_text(specs: &[ConstraintSpec]) -> String {
    specs.iter().map(|s| s.kind.tag()).collect::<Vec<_>>().join(",")
}

fn penalties_text(specs: &[ConstraintSpec]) -> String {
    join_list(&specs.iter().map(|s| s.penalty_weight).collect::<Vec<_>>())
}

fn ranks_for(p: &Params, t: &DenseTensor) -> Result<Vec<usize>> {
    let ranks = p.require_usize_list("ranks")?;
    if ranks.len() != t.order() {
        return Err(Error::InvalidRank(format!(
            "{} ranks given for an order-{} tensor",
            ranks.len(),
            t.order()
        )));
    }
    Ok(ranks)
}

fn tucker_report(out: &Path, m: &TuckerModel, algorithm: &str, seed: u64, extra: &[(&str, String)]) -> Result<()> {
    let mut man = write_tucker(out, m, algorithm, seed)?;
    for (k, v) in extra {
        man.set(*k, v);
    }
    man.write(out.join("manifest.txt"))?;
    let mut r = Report::default();
    r.line("algorithm", algorithm)
        .line("ranks", join_list(&m.ranks()))
        .line("fit_error", m.fit_error)
        .line("iterations", m.trace.len().saturating_sub(1));
    for (k, v) in extra {
        r.line(k, v);
    }
    r.warnings(&m.warnings).write(&out.join("report.txt"))
}

enum Algo {
    Hosvd(Vec<usize>),
    Hooi(Vec<usize>, usize, f64),
    Cp(usize, usize, f64),
    Penalized(Vec<usize>, Vec<ConstraintSpec>),
    Bod(Vec<usize>, usize, f64),
}

pub(crate) fn decompose(p: &Params) -> Result<String> {
    let input = p.path("input")?;
    let out = p.path("out")?;
    let seed = p.u64_or("seed", 0)?;
    let algo_name = p.raw("algo").unwrap_or_else(|| "hooi".into());
    let t = read_input(&input)?;
    let max_iters_default = match algo_name.as_str() {
        "cp" | "penalized" => ConstraintSpec::DEFAULT_MAX_ITERS,
        _ => tucker::DEFAULT_MAX_ITERS,
    };
    let algo = match algo_name.as_str() {
        "hosvd" => Algo::Hosvd(ranks_for(p, &t)?),
        "hooi" => Algo::Hooi(
            ranks_for(p, &t)?,
            p.positive_usize_or("max-iters", max_iters_default)?,
            p.positive_f64_or("tol", tucker::DEFAULT_TOL)?,
        ),
        "cp" => {
            let r = p
                .parse::<usize>("rank")?
                .ok_or_else(|| Error::InvalidArgument("missing required option --rank".into()))?;
            if r == 0 {
                return Err(Error::InvalidRank("CP rank must be at least 1".into()));
            }
            Algo::Cp(
                r,
                p.positive_usize_or("max-iters", max_iters_default)?,
                p.positive_f64_or("tol", tucker::DEFAULT_TOL)?,
            )
        }
        "penalized" => Algo::Penalized(ranks_for(p, &t)?, p.specs(t.order(), ConstraintKind::Unconstrained)?),
        "bod" => Algo::Bod(
            ranks_for(p, &t)?,
            p.positive_usize_or("max-iters", max_iters_default)?,
            p.positive_f64_or("tol", tucker::DEFAULT_TOL)?,
        ),
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown --algo `{other}` (hosvd, hooi, cp, penalized, bod)"
            )))
        }
    };
    p.finish()?;

    match algo {
        Algo::Hosvd(ranks) => {
            let m = hosvd(&t, &ranks)?;
            tucker_report(&out, &m, "hosvd", seed, &[])?;
            Ok(format!("fit_error={}", m.fit_error))
        }
        Algo::Hooi(ranks, iters, tol) => {
            let m = hooi(&t, &ranks, iters, tol)?;
            tucker_report(&out, &m, "hooi", seed, &[("tol", tol.to_string())])?;
            Ok(format!("fit_error={}", m.fit_error))
        }
        Algo::Penalized(ranks, specs) => {
            let alphas: Vec<f64> = specs.iter().map(|s| s.penalty_weight).collect();
            let m = penalized_tucker(&t, &ranks, &specs, &alphas)?;
            tucker_report(
                &out,
                &m,
                "penalized",
                seed,
                &[("constraints", kinds_text(&specs)), ("penalties", penalties_text(&specs))],
            )?;
            Ok(format!("fit_error={}", m.fit_error))
        }
        Algo::Cp(r, iters, tol) => {
            let cp = cp_als(&t, r, iters, tol, seed)?;
            let mut m = cp_to_tucker(&cp);
            m.trace = cp.trace.clone();
            m.warnings = cp.warnings.clone();
            tucker_report(&out, &m, "cp", seed, &[("rank", r.to_string())])?;
            write_tensor(out.join("weights.tnsr"), &DenseTensor::from_vector(&cp.weights)?)?;
            Ok(format!("fit_error={}", m.fit_error))
        }
        Algo::Bod(ranks, iters, tol) => {
            let m = bod_decompose(&t, &ranks, iters, tol)?;
            ensure_dir(&out)?;
            for b in &m.blocks {
                write_tensor(out.join(format!("block_{}_core.tnsr", b.mode)), &b.core)?;
                write_matrix(out.join(format!("block_{}_factor.tnsr", b.mode)), &b.factor)?;
            }
            write_trace(&out.join("trace.csv"), &m.trace)?;
            let mut man = crate::io::Manifest::new();
            man.set("order", t.order())
                .set("dims", join_list(t.dims()))
                .set("ranks", join_list(&ranks))
                .set("fit_error", m.fit_error)
                .set("algorithm", "bod")
                .set("seed", seed)
                .set("iterations", m.trace.len().saturating_sub(1));
            man.write(out.join("manifest.txt"))?;
            let mut rep = Report::default();
            rep.line("algorithm", "bod")
                .line("ranks", join_list(&ranks))
                .line("fit_error", m.fit_error)
                .line("iterations", m.trace.len().saturating_sub(1))
                .warnings(&[])
                .write(&out.join("report.txt"))?;
            Ok(format!("fit_error={}", m.fit_error))
        }
    }
}

fn write_diagnostics(out: &Path, res: &MwbssResult, r: &mut Report) -> Result<()> {
    for d in &res.diagnostics {
        r.line(
            &format!("mode {}", d.mode),
            format!(
                "{} iterations={} objective={}",
                d.kind.tag(),
                d.iterations,
                d.final_objective
            ),
        );
        if !d.objective_trace.is_empty() {
            write_trace(&out.join(format!("mode_{}_trace.csv", d.mode)), &d.objective_trace)?;
        }
    }
    Ok(())
}

pub(crate) fn mbss(p: &Params) -> Result<String> {
    let input = p.path("input")?;
    let out = p.path("out")?;
    let seed = p.u64_or("seed", 0)?;
    let pipeline = p.raw("pipeline").unwrap_or_else(|| "unfold".into());
    if pipeline != "unfold" && pipeline != "refine" {
        return Err(Error::InvalidArgument(format!(
            "unknown --pipeline `{pipeline}` (unfold, refine)"
        )));
    }
    let t = read_input(&input)?;
    let ranks = ranks_for(p, &t)?;
    let specs = p.specs(t.order(), ConstraintKind::Orthogonal)?;
    p.finish()?;

    let res = if pipeline == "unfold" {
        mwbss_unfold(&t, &ranks, &specs)?
    } else {
        mwbss_refine(&t, &ranks, &specs)?
    };
    let algorithm = format!("mbss-{pipeline}");
    let mut man = write_tucker(&out, &res.model, &algorithm, seed)?;
    man.set("constraints", kinds_text(&specs))
        .set("penalties", penalties_text(&specs));
    if let Some(e) = res.stage1_fit_error {
        man.set("stage1_fit_error", e);
    }
    if let Some(b) = res.refinement_bound {
        man.set("refinement_bound", b);
    }
    man.write(out.join("manifest.txt"))?;
    let mut r = Report::default();
    r.line("algorithm", &algorithm)
        .line("ranks", join_list(&ranks))
        .line("constraints", kinds_text(&specs))
        .line("fit_error", res.model.fit_error);
    if let Some(e) = res.stage1_fit_error {
        r.line("stage1_fit_error", e);
    }
    if let Some(b) = res.refinement_bound {
        r.line("refinement_bound", b);
    }
    write_diagnostics(&out, &res, &mut r)?;
    r.warnings(&res.warnings()).write(&out.join("report.txt"))?;
    Ok(format!("fit_error={}", res.model.fit_error))
}

pub(crate) fn linked(p: &Params) -> Result<String> {
    let inputs: Vec<PathBuf> = p
        .require("inputs")?
        .split(',')
        .map(|s| PathBuf::from(s.trim()))
        .collect();
    let out = p.path("out")?;
    let seed = p.u64_or("seed", 0)?;
    let threshold = p.f64_or("threshold", DEFAULT_THRESHOLD)?;
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "--threshold must be in (0, 1], got {threshold}"
        )));
    }
    let xs: Vec<DenseTensor> = inputs.iter().map(|i| read_input(i)).collect::<Result<_>>()?;
    let order = xs[0].order();
    let ranks = ranks_for(p, &xs[0])?;
    let common = broadcast(p.usize_list("common")?.unwrap_or_else(|| vec![0]), order, "common")?;
    let specs = p.specs(order, ConstraintKind::Orthogonal)?;
    p.finish()?;

    let m = linked_decompose(&xs, &ranks, &common, &specs, &LinkedOptions { threshold })?;
    ensure_dir(&out)?;
    for (s, sm) in m.subject_models.iter().enumerate() {
        let dir = out.join(format!("subject_{s}"));
        let mut man = write_tucker(&dir, sm, "linked", seed)?;
        man.set("subject", s);
        man.write(dir.join("manifest.txt"))?;
    }
    for (n, b) in m.common_bases.iter().enumerate() {
        if let Some(b) = b {
            write_matrix(out.join(format!("common_{n}.tnsr")), b)?;
        }
    }
    let mut man = crate::io::Manifest::new();
    man.set("subjects", xs.len())
        .set("order", order)
        .set("dims", join_list(xs[0].dims()))
        .set("ranks", join_list(&ranks))
        .set("common_requested", join_list(&common))
        .set("common_achieved", join_list(&m.common_counts))
        .set("constraints", kinds_text(&specs))
        .set("threshold", threshold)
        .set("algorithm", "linked")
        .set("seed", seed)
        .set("fit_errors", join_list(&m.fit_errors()));
    man.write(out.join("manifest.txt"))?;
    let mut r = Report::default();
    r.line("subjects", xs.len())
        .line("ranks", join_list(&ranks))
        .line("common_requested", join_list(&common))
        .line("common_achieved", join_list(&m.common_counts))
        .line("fit_errors", join_list(&m.fit_errors()));
    for n in 0..order {
        if !m.common_correlations[n].is_empty() {
            r.line(&format!("mode {n} common correlations"), join_list(&m.common_correlations[n]));
        }
        if let Some(c) = m.individual_max_corr[n] {
            r.line(&format!("mode {n} individual max correlation"), c);
        }
    }
    r.warnings(&m.warnings).write(&out.join("report.txt"))?;
    Ok(format!(
        "common={} fit_errors={}",
        join_list(&m.common_counts),
        join_list(&m.fit_errors())
    ))
}
