//! `features`: train/test classification from corpus CSV files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::output::{ensure_dir, read_input, write_trace, Report};
use super::params::Params;
use crate::error::{Error, Result};
use crate::features::{
    accuracy, classify_centroid, classify_knn, confusion_matrix, extract_train_with, project_test, ExtractOptions,
    LabeledTensorSet,
};
use crate::io::{join_list, write_matrix, Manifest};
use crate::tensor::DenseTensor;
use crate::tucker;

/// One corpus row: sample path as written in the CSV and its label.
pub(crate) struct CorpusEntry {
    pub(crate) path: String,
    pub(crate) label: Option<usize>,
}

/// Parses `path,label` lines; a `path,label` header is skipped and the label
/// may be empty. Paths are relative to the CSV's directory.
pub(crate) fn parse_corpus(text: &str) -> Result<Vec<CorpusEntry>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line.eq_ignore_ascii_case("path,label")) {
            continue;
        }
        let (path, label) = match line.split_once(',') {
            Some((p, l)) => (p.trim(), l.trim()),
            None => (line, ""),
        };
        let label = if label.is_empty() {
            None
        } else {
            Some(label.parse().map_err(|_| {
                Error::InvalidInput(format!("line {}: label `{label}` is not a class index", lineno + 1))
            })?)
        };
        out.push(CorpusEntry {
            path: path.to_string(),
            label,
        });
    }
    if out.is_empty() {
        return Err(Error::InvalidInput("corpus lists no samples".into()));
    }
    Ok(out)
}

fn load_corpus(csv: &Path) -> Result<(Vec<CorpusEntry>, Vec<DenseTensor>)> {
    let text = fs::read_to_string(csv).map_err(|e| Error::InvalidInput(format!("{}: {e}", csv.display())))?;
    let entries = parse_corpus(&text)?;
    let base = csv.parent().map(Path::to_path_buf).unwrap_or_default();
    let samples = entries
        .iter()
        .map(|e| read_input(&base.join(&e.path)))
        .collect::<Result<Vec<_>>>()?;
    Ok((entries, samples))
}

pub(crate) fn features(p: &Params) -> Result<String> {
    let train_csv: PathBuf = p.path("train")?;
    let test_csv: PathBuf = p.path("test")?;
    let out = p.path("out")?;
    let classifier = p.raw("classifier").unwrap_or_else(|| "knn".into());
    let k = match classifier.as_str() {
        "knn" => p.positive_usize_or("k", 1)?,
        "centroid" => 0,
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown --classifier `{other}` (knn, centroid)"
            )))
        }
    };
    let opts = ExtractOptions {
        max_iters: p.positive_usize_or("max-iters", tucker::DEFAULT_MAX_ITERS)?,
        tol: p.positive_f64_or("tol", tucker::DEFAULT_TOL)?,
    };
    let ranks = p.require_usize_list("ranks")?;
    p.finish()?;

    let (train_entries, train_samples) = load_corpus(&train_csv)?;
    let labels = train_entries
        .iter()
        .map(|e| {
            e.label
                .ok_or_else(|| Error::InvalidInput(format!("training sample {} has no label", e.path)))
        })
        .collect::<Result<Vec<_>>>()?;
    let set = LabeledTensorSet::new(train_samples, labels)?;
    if ranks.len() != set.sample_dims().len() {
        return Err(Error::InvalidRank(format!(
            "{} ranks given for order-{} samples",
            ranks.len(),
            set.sample_dims().len()
        )));
    }
    let (test_entries, test_samples) = load_corpus(&test_csv)?;
    if let Some(s) = test_samples.iter().find(|s| s.dims() != set.sample_dims()) {
        return Err(Error::Shape(format!(
            "test sample dims {:?} differ from training dims {:?}",
            s.dims(),
            set.sample_dims()
        )));
    }

    let fs_train = extract_train_with(&set, &ranks, opts)?;
    let test_feats = test_samples
        .iter()
        .map(|x| project_test(x, &fs_train.bases))
        .collect::<Result<Vec<_>>>()?;
    let (pred, warnings) = if k > 0 {
        (classify_knn(&fs_train, &test_feats, k)?, Vec::new())
    } else {
        classify_centroid(&fs_train, &test_feats)?
    };

    ensure_dir(&out)?;
    for (n, b) in fs_train.bases.iter().enumerate() {
        write_matrix(out.join(format!("basis_{n}.tnsr")), b)?;
    }
    write_trace(&out.join("trace.csv"), &fs_train.trace)?;
    let mut csv = String::from("path,label,predicted\n");
    for (e, p) in test_entries.iter().zip(&pred) {
        let label = e.label.map(|l| l.to_string()).unwrap_or_default();
        let _ = writeln!(csv, "{},{label},{p}", e.path);
    }
    fs::write(out.join("predictions.csv"), csv)?;

    let truth: Option<Vec<usize>> = test_entries.iter().map(|e| e.label).collect();
    let acc = truth.as_ref().map(|t| accuracy(t, &pred));
    if let Some(t) = &truth {
        let (classes, m) = confusion_matrix(t, &pred);
        let mut c = format!("truth\\predicted,{}\n", join_list(&classes));
        for (cls, row) in classes.iter().zip(&m) {
            let _ = writeln!(c, "{cls},{}", join_list(row));
        }
        fs::write(out.join("confusion.csv"), c)?;
    }

    let mut man = Manifest::new();
    man.set("order", ranks.len())
        .set("dims", join_list(set.sample_dims()))
        .set("ranks", join_list(&ranks))
        .set("fit_error", fs_train.fit_error)
        .set("algorithm", "features")
        .set("classifier", &classifier)
        .set("train_samples", set.len())
        .set("test_samples", test_samples.len());
    if k > 0 {
        man.set("k", k);
    }
    man.write(out.join("manifest.txt"))?;

    let mut r = Report::default();
    r.line("classifier", &classifier)
        .line("ranks", join_list(&ranks))
        .line("train_samples", set.len())
        .line("test_samples", test_samples.len())
        .line("train_fit_error", fs_train.fit_error);
    match acc {
        Some(a) => r.line("accuracy", a),
        None => r.line("accuracy", "n/a (unlabeled test samples)"),
    };
    r.warnings(&warnings).write(&out.join("report.txt"))?;
    Ok(match acc {
        Some(a) => format!("accuracy={a}"),
        None => format!("predicted {} samples", pred.len()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_header_and_blank_labels() {
        let c = parse_corpus("path,label\na.tnsr,1\nb.tnsr,\nc.tnsr\n").unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c[0].label, Some(1));
        assert_eq!(c[1].label, None);
        assert_eq!(c[2].path, "c.tnsr");
        assert!(parse_corpus("x.tnsr,abc").is_err());
        assert!(parse_corpus("path,label\n").is_err());
    }
}
