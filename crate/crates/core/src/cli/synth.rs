//! `synth <kind>`: seeded data sets plus a `truth.txt` manifest and the
//! ground-truth factors as TNSR files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use clap::{Arg, Command};

use super::output::ensure_dir;
use super::params::Params;
use super::{flag, opt};
use crate::error::{Error, Result};
use crate::io::{join_list, write_matrix, write_tensor, Manifest};
use crate::synth;
use crate::tensor::DenseTensor;

const KINDS: &[(&str, &str)] = &[
    ("tucker", "Tucker tensor with Gaussian (or nonnegative) core and factors"),
    ("cp", "CP tensor with bounded factor collinearity"),
    ("ica", "square mixtures of independent non-Gaussian sources"),
    ("sparse", "matrix with a planted sparse factor"),
    ("smooth", "matrix with a planted smooth factor"),
    ("mbss", "tensor whose mode-0 factor holds independent sources"),
    ("corpus", "labeled tensor samples in separated classes"),
    ("linked", "subjects sharing mode-0 components"),
    ("pls", "latent-factor regression pair"),
    ("coupled", "predictor/response tensors sharing the mode-0 factor"),
];

fn kind_args(kind: &str) -> Vec<Arg> {
    let dims = || opt("dims", "comma-separated dimensions");
    let ranks = || opt("ranks", "comma-separated ranks");
    match kind {
        "tucker" => vec![dims(), ranks(), flag("nonnegative", "uniform [0,1) core and factors")],
        "cp" => vec![
            dims(),
            opt("rank", "number of components"),
            opt("max-collinearity", "bound on factor column congruence [default: 0.5]"),
        ],
        "ica" => vec![opt("sources", "number of sources"), opt("samples", "samples per source [default: 2000]")],
        "sparse" | "smooth" => {
            let mut v = vec![
                opt("rows", "rows of the mixing factor"),
                opt("samples", "rows of the planted factor"),
                opt("components", "number of components"),
            ];
            if kind == "sparse" {
                v.push(opt("zero-fraction", "fraction of exact zeros [default: 0.8]"));
            }
            v
        }
        "mbss" => vec![dims(), ranks()],
        "corpus" => vec![
            dims(),
            ranks(),
            opt("classes", "number of classes [default: 3]"),
            opt("train", "training samples [default: 60]"),
            opt("test", "test samples [default: 30]"),
        ],
        "linked" => vec![
            opt("subjects", "number of subjects [default: 3]"),
            dims(),
            ranks(),
            opt("common", "common mode-0 components"),
        ],
        "pls" => vec![
            opt("samples", "rows"),
            opt("predictors", "predictor columns"),
            opt("responses", "response columns"),
            opt("latent", "latent factors"),
        ],
        "coupled" => vec![
            opt("samples", "size of the shared mode 0"),
            opt("x-dims", "predictor dims after mode 0"),
            opt("y-dims", "response dims after mode 0"),
            opt("x-ranks", "predictor ranks including mode 0"),
            opt("y-ranks", "response ranks including mode 0"),
        ],
        _ => Vec::new(),
    }
}

pub(crate) fn command() -> Command {
    let mut cmd = Command::new("synth")
        .about("Generate seeded synthetic data with ground truth")
        .subcommand_required(true);
    for (kind, about) in KINDS {
        cmd = cmd.subcommand(
            Command::new(*kind)
                .about(*about)
                .args(kind_args(kind))
                .arg(opt("noise", "standard deviation of additive Gaussian noise"))
                .arg(opt("seed", "random seed [default: 0]"))
                .arg(opt("out", "output directory")),
        );
    }
    cmd
}

fn dims_ranks(p: &Params) -> Result<(Vec<usize>, Vec<usize>)> {
    Ok((p.require_usize_list("dims")?, p.require_usize_list("ranks")?))
}

fn write_factors(out: &Path, prefix: &str, fs: &[crate::matrix::Matrix]) -> Result<()> {
    for (n, f) in fs.iter().enumerate() {
        write_matrix(out.join(format!("{prefix}_{n}.tnsr")), f)?;
    }
    Ok(())
}

pub(crate) fn run(kind: &str, p: &Params) -> Result<String> {
    let out = p.path("out")?;
    let seed = p.u64_or("seed", 0)?;
    let default_noise = match kind {
        "tucker" | "cp" => 0.0,
        "corpus" | "smooth" => 0.1,
        _ => 0.01,
    };
    let noise = p.nonnegative_f64_or("noise", default_noise)?;
    let mut truth = Manifest::new();
    truth.set("kind", kind).set("seed", seed).set("noise", noise);

    // every option is resolved before anything is generated or written
    let job: Box<dyn FnOnce(&Path, &mut Manifest) -> Result<()>> = match kind {
        "tucker" => {
            let (dims, ranks) = dims_ranks(p)?;
            let nonneg = p.bool("nonnegative")?;
            Box::new(move |out, truth| {
                let t = synth::tucker_tensor(&dims, &ranks, noise, nonneg, seed)?;
                write_tensor(out.join("tensor.tnsr"), &t.tensor)?;
                write_tensor(out.join("core.tnsr"), &t.core)?;
                write_factors(out, "factor", &t.factors)?;
                truth
                    .set("order", dims.len())
                    .set("dims", join_list(&dims))
                    .set("ranks", join_list(&ranks))
                    .set("nonnegative", nonneg);
                Ok(())
            })
        }
        "cp" => {
            let dims = p.require_usize_list("dims")?;
            let r = p.positive_usize_or("rank", 2)?;
            let coll = p.positive_f64_or("max-collinearity", 0.5)?;
            Box::new(move |out, truth| {
                let t = synth::cp_tensor(&dims, r, noise, coll, seed)?;
                write_tensor(out.join("tensor.tnsr"), &t.tensor)?;
                write_tensor(out.join("weights.tnsr"), &DenseTensor::from_vector(&t.weights)?)?;
                write_factors(out, "factor", &t.factors)?;
                truth
                    .set("order", dims.len())
                    .set("dims", join_list(&dims))
                    .set("rank", r)
                    .set("max_collinearity", coll);
                Ok(())
            })
        }
        "ica" => {
            let n = p.positive_usize_or("sources", 2)?;
            let t = p.positive_usize_or("samples", 2000)?;
            Box::new(move |out, truth| {
                let m = synth::ica_mixtures(n, t, seed)?;
                write_matrix(out.join("mixtures.tnsr"), &m.mixtures)?;
                write_matrix(out.join("sources.tnsr"), &m.sources)?;
                write_matrix(out.join("mixing.tnsr"), &m.mixing)?;
                truth
                    .set("sources", n)
                    .set("samples", t)
                    .set("max_source_correlation", synth::max_pairwise_correlation(&m.sources));
                Ok(())
            })
        }
        "sparse" | "smooth" => {
            let rows = p.positive_usize_or("rows", 30)?;
            let t = p.positive_usize_or("samples", 200)?;
            let j = p.positive_usize_or("components", 3)?;
            let zf = if kind == "sparse" {
                let z = p.nonnegative_f64_or("zero-fraction", 0.8)?;
                if z >= 1.0 {
                    return Err(Error::InvalidArgument("--zero-fraction must be below 1".into()));
                }
                z
            } else {
                0.0
            };
            let sparse = kind == "sparse";
            Box::new(move |out, truth| {
                let f = if sparse {
                    synth::sparse_instance(rows, t, j, zf, noise, seed)
                } else {
                    synth::smooth_instance(rows, t, j, noise, seed)
                };
                write_matrix(out.join("y.tnsr"), &f.y)?;
                write_matrix(out.join("a.tnsr"), &f.a)?;
                write_matrix(out.join("b.tnsr"), &f.b)?;
                truth.set("rows", rows).set("samples", t).set("components", j);
                if sparse {
                    truth.set("zero_fraction", zf);
                }
                Ok(())
            })
        }
        "mbss" => {
            let (dims, ranks) = dims_ranks(p)?;
            Box::new(move |out, truth| {
                let (t, sources) = synth::independent_mode0_tensor(&dims, &ranks, noise, seed)?;
                write_tensor(out.join("tensor.tnsr"), &t)?;
                write_matrix(out.join("sources.tnsr"), &sources)?;
                truth.set("dims", join_list(&dims)).set("ranks", join_list(&ranks));
                Ok(())
            })
        }
        "corpus" => {
            let (dims, ranks) = dims_ranks(p)?;
            let classes = p.positive_usize_or("classes", 3)?;
            let n_train = p.positive_usize_or("train", 60)?;
            let n_test = p.positive_usize_or("test", 30)?;
            Box::new(move |out, truth| {
                let c = synth::class_corpus(&dims, &ranks, classes, n_train, n_test, noise, seed)?;
                ensure_dir(&out.join("samples"))?;
                for (name, set) in [("train", &c.train), ("test", &c.test)] {
                    let mut csv = String::from("path,label\n");
                    for (k, (x, l)) in set.samples.iter().zip(&set.labels).enumerate() {
                        let rel = format!("samples/{name}_{k:04}.tnsr");
                        write_tensor(out.join(&rel), x)?;
                        let _ = writeln!(csv, "{rel},{l}");
                    }
                    fs::write(out.join(format!("{name}.csv")), csv)?;
                }
                write_factors(out, "basis", &c.bases)?;
                for (k, g) in c.class_cores.iter().enumerate() {
                    write_tensor(out.join(format!("class_core_{k}.tnsr")), g)?;
                }
                truth
                    .set("dims", join_list(&dims))
                    .set("ranks", join_list(&ranks))
                    .set("classes", classes)
                    .set("train", n_train)
                    .set("test", n_test);
                Ok(())
            })
        }
        "linked" => {
            let s = p.positive_usize_or("subjects", 3)?;
            let (dims, ranks) = dims_ranks(p)?;
            let common = p.usize_or("common", 2)?;
            Box::new(move |out, truth| {
                let l = synth::linked_subjects(s, &dims, &ranks, common, noise, seed)?;
                for (k, x) in l.subjects.iter().enumerate() {
                    write_tensor(out.join(format!("subject_{k}.tnsr")), x)?;
                }
                write_matrix(out.join("common.tnsr"), &l.common)?;
                write_factors(out, "mode0", &l.mode0_factors)?;
                truth
                    .set("subjects", s)
                    .set("dims", join_list(&dims))
                    .set("ranks", join_list(&ranks))
                    .set("common", common);
                Ok(())
            })
        }
        "pls" => {
            let rows = p.positive_usize_or("samples", 100)?;
            let n = p.positive_usize_or("predictors", 8)?;
            let m = p.positive_usize_or("responses", 3)?;
            let latent = p.positive_usize_or("latent", 2)?;
            Box::new(move |out, truth| {
                let d = synth::pls_latent(rows, n, m, latent, noise, seed);
                write_matrix(out.join("x.tnsr"), &d.x)?;
                write_matrix(out.join("y.tnsr"), &d.y)?;
                write_matrix(out.join("latent.tnsr"), &d.latent)?;
                truth
                    .set("samples", rows)
                    .set("predictors", n)
                    .set("responses", m)
                    .set("latent", latent);
                Ok(())
            })
        }
        "coupled" => {
            let samples = p.positive_usize_or("samples", 100)?;
            let xd = p.require_usize_list("x-dims")?;
            let yd = p.require_usize_list("y-dims")?;
            let xr = p.require_usize_list("x-ranks")?;
            let yr = p.require_usize_list("y-ranks")?;
            Box::new(move |out, truth| {
                let c = synth::coupled_pair(samples, &xd, &yd, &xr, &yr, noise, seed)?;
                write_tensor(out.join("x.tnsr"), &c.x)?;
                write_tensor(out.join("y.tnsr"), &c.y)?;
                write_matrix(out.join("shared.tnsr"), &c.shared)?;
                truth
                    .set("samples", samples)
                    .set("x_dims", join_list(&xd))
                    .set("y_dims", join_list(&yd))
                    .set("x_ranks", join_list(&xr))
                    .set("y_ranks", join_list(&yr));
                Ok(())
            })
        }
        other => return Err(Error::InvalidArgument(format!("unknown synth kind `{other}`"))),
    };
    p.finish()?;
    ensure_dir(&out)?;
    job(&out, &mut truth)?;
    truth.write(out.join("truth.txt"))?;
    Ok(format!("wrote {kind} data"))
}
