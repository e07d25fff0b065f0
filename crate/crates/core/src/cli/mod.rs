//! Command-line front end.
//!
//! Every option can also come from a `--config` file of `key=value` lines
//! whose keys are the long option names. Command-line values win over the
//! file, which wins over built-in defaults. Exit codes: 0 success, 1 runtime
//! or numerical failure, 2 usage or validation error. Failures print one
//! `error: <code>: <message>` line on stderr.

mod decompose;
mod features;
mod output;
mod params;
mod pls;
mod synth;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::{Arg, ArgAction, ArgMatches, Command};

use crate::error::{Error, Result};
use params::{Params, CONFIG_ARG};

pub(crate) fn opt(name: &'static str, help: &'static str) -> Arg {
    Arg::new(name).long(name).value_name("VALUE").help(help)
}

pub(crate) fn flag(name: &'static str, help: &'static str) -> Arg {
    Arg::new(name).long(name).action(ArgAction::SetTrue).help(help)
}

fn factor_args() -> Vec<Arg> {
    vec![
        opt("ranks", "comma-separated ranks, one per mode"),
        opt(
            "constraints",
            "per-mode constraints: unconstrained, orthogonal, nonnegative, sparse, smooth, independent",
        ),
        opt("penalties", "per-mode penalty weights (sparse, smooth)"),
        opt("max-iters", "iteration cap"),
        opt("tol", "relative objective change that stops iteration"),
        opt("seed", "random seed [default: 0]"),
        opt("out", "output directory"),
    ]
}

pub fn command() -> Command {
    Command::new("multiway")
        .about("Constrained tensor decompositions, multiway BSS, feature extraction and PLS")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .arg(
            Arg::new(CONFIG_ARG)
                .long(CONFIG_ARG)
                .value_name("FILE")
                .global(true)
                .help("key=value file supplying option defaults"),
        )
        .subcommand(
            Command::new("decompose")
                .about("Tucker, CP, penalized Tucker or block-oriented decomposition")
                .arg(opt("input", "input TNSR tensor"))
                .arg(opt("algo", "hosvd, hooi, cp, penalized or bod [default: hooi]"))
                .arg(opt("rank", "number of CP components").alias("r"))
                .args(factor_args()),
        )
        .subcommand(
            Command::new("mbss")
                .about("Multiway blind source separation with per-mode constraints")
                .arg(opt("input", "input TNSR tensor"))
                .arg(opt("pipeline", "unfold or refine [default: unfold]"))
                .args(factor_args()),
        )
        .subcommand(
            Command::new("linked")
                .about("Linked decomposition of several subjects with common components")
                .arg(opt("inputs", "comma-separated TNSR tensors, one per subject"))
                .arg(opt("common", "common components per mode [default: 0]"))
                .arg(opt("threshold", "correlation needed to link components [default: 0.9]"))
                .args(factor_args()),
        )
        .subcommand(
            Command::new("features")
                .about("Tucker feature extraction and classification")
                .arg(opt("train", "training corpus CSV (path,label)"))
                .arg(opt("test", "test corpus CSV (path,label; label optional)"))
                .arg(opt("ranks", "comma-separated ranks of the sample modes"))
                .arg(opt("classifier", "knn or centroid [default: knn]"))
                .arg(opt("k", "neighbours for knn [default: 1]"))
                .arg(opt("max-iters", "iteration cap"))
                .arg(opt("tol", "relative fit change that stops iteration"))
                .arg(opt("out", "output directory")),
        )
        .subcommand(
            Command::new("pls")
                .about("Partial least squares for matrices and tensors")
                .subcommand_required(true)
                .subcommand(
                    Command::new("fit")
                        .about("Fit a PLS model")
                        .arg(opt("x", "predictor TNSR"))
                        .arg(opt("y", "response TNSR"))
                        .arg(opt("components", "latent components (matrix data)"))
                        .arg(opt("x-ranks", "predictor Tucker ranks (tensor data)"))
                        .arg(opt("y-ranks", "response Tucker ranks (tensor data)"))
                        .arg(opt("shared", "modes whose factors are shared [default: 0]"))
                        .arg(opt("max-iters", "iteration cap"))
                        .arg(opt("tol", "relative fit change that stops iteration"))
                        .arg(opt("out", "model directory")),
                )
                .subcommand(
                    Command::new("predict")
                        .about("Predict responses with a fitted model")
                        .arg(opt("model", "model directory"))
                        .arg(opt("x", "predictor TNSR"))
                        .arg(opt("y", "true responses, to report the residual"))
                        .arg(opt("out", "output TNSR file")),
                ),
        )
        .subcommand(synth::command())
}

fn dispatch(m: &ArgMatches) -> Result<String> {
    let (name, sub) = m.subcommand().expect("subcommand required");
    match name {
        "decompose" => decompose::decompose(&Params::from_matches(sub)?),
        "mbss" => decompose::mbss(&Params::from_matches(sub)?),
        "linked" => decompose::linked(&Params::from_matches(sub)?),
        "features" => features::features(&Params::from_matches(sub)?),
        "pls" => {
            let (action, leaf) = sub.subcommand().expect("subcommand required");
            let p = Params::from_matches(leaf)?;
            match action {
                "fit" => pls::fit(&p),
                _ => pls::predict(&p),
            }
        }
        "synth" => {
            let (kind, leaf) = sub.subcommand().expect("subcommand required");
            synth::run(kind, &Params::from_matches(leaf)?)
        }
        other => Err(Error::InvalidArgument(format!("unknown command `{other}`"))),
    }
}

fn exit_code(e: &Error) -> i32 {
    if e.is_validation() {
        2
    } else {
        1
    }
}

/// Runs the command line `args` (program name first) and returns the exit
/// code. Output goes to stdout, diagnostics to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    0
                }
                ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    eprint!("{e}");
                    eprintln!("error: usage: missing subcommand");
                    2
                }
                _ => {
                    let text = e.to_string();
                    let first = text.lines().next().unwrap_or("").trim_start_matches("error: ");
                    eprintln!("error: usage: {first}");
                    2
                }
            };
        }
    };
    match dispatch(&matches) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error: {}: {e}", e.code());
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_definition_is_consistent() {
        command().debug_assert();
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["multiway", "decompose", "--bogus", "1"]), 2);
        assert_eq!(run(["multiway"]), 2);
        assert_eq!(run(["multiway", "--help"]), 0);
    }

    #[test]
    fn missing_required_option_is_validation() {
        assert_eq!(run(["multiway", "decompose", "--algo", "hosvd"]), 2);
    }
}
