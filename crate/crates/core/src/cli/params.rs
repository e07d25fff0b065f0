//! Option resolution: command-line value, then config file, then default.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::path::PathBuf;
use std::str::FromStr;

use clap::parser::ValueSource;
use clap::ArgMatches;

use crate::error::{Error, Result};
use crate::factor2d::{ConstraintKind, ConstraintSpec};
use crate::io::{parse_f64_list, parse_usize_list, Manifest};

pub(crate) const CONFIG_ARG: &str = "config";

pub(crate) struct Params {
    flags: Manifest,
    config: Manifest,
    used: RefCell<BTreeSet<String>>,
}

impl Params {
    pub(crate) fn from_matches(m: &ArgMatches) -> Result<Self> {
        let mut flags = Manifest::new();
        let mut config = Manifest::new();
        for id in m.ids() {
            let id = id.as_str();
            if m.value_source(id) != Some(ValueSource::CommandLine) {
                continue;
            }
            if id == CONFIG_ARG {
                let path: &String = m.get_one(id).expect("config is a string");
                config = Manifest::read(path)?;
                continue;
            }
            if let Ok(Some(v)) = m.try_get_one::<String>(id) {
                flags.set(id, v);
            } else if let Ok(Some(b)) = m.try_get_one::<bool>(id) {
                flags.set(id, b);
            }
        }
        if config.get(CONFIG_ARG).is_some() {
            return Err(Error::InvalidArgument("config files cannot name another config".into()));
        }
        Ok(Self::new(flags, config))
    }

    pub(crate) fn new(flags: Manifest, config: Manifest) -> Self {
        Self {
            flags,
            config,
            used: RefCell::new(BTreeSet::new()),
        }
    }

    pub(crate) fn raw(&self, key: &str) -> Option<String> {
        self.used.borrow_mut().insert(key.to_string());
        self.flags
            .get(key)
            .or_else(|| self.config.get(key))
            .map(str::to_string)
    }

    pub(crate) fn require(&self, key: &str) -> Result<String> {
        self.raw(key)
            .ok_or_else(|| Error::InvalidArgument(format!("missing required option --{key}")))
    }

    pub(crate) fn path(&self, key: &str) -> Result<PathBuf> {
        self.require(key).map(PathBuf::from)
    }

    pub(crate) fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .trim()
                .parse()
                .map(Some)
                .map_err(|_| Error::InvalidArgument(format!("--{key}: cannot parse `{v}`"))),
        }
    }

    pub(crate) fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    pub(crate) fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    pub(crate) fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        let v: f64 = self.parse(key)?.unwrap_or(default);
        if !v.is_finite() {
            return Err(Error::InvalidArgument(format!("--{key} must be finite")));
        }
        Ok(v)
    }

    pub(crate) fn nonnegative_f64_or(&self, key: &str, default: f64) -> Result<f64> {
        let v = self.f64_or(key, default)?;
        if v < 0.0 {
            return Err(Error::InvalidArgument(format!("--{key} must be nonnegative, got {v}")));
        }
        Ok(v)
    }

    pub(crate) fn positive_f64_or(&self, key: &str, default: f64) -> Result<f64> {
        let v = self.f64_or(key, default)?;
        if v <= 0.0 {
            return Err(Error::InvalidArgument(format!("--{key} must be positive, got {v}")));
        }
        Ok(v)
    }

    pub(crate) fn positive_usize_or(&self, key: &str, default: usize) -> Result<usize> {
        let v = self.usize_or(key, default)?;
        if v == 0 {
            return Err(Error::InvalidArgument(format!("--{key} must be at least 1")));
        }
        Ok(v)
    }

    pub(crate) fn bool(&self, key: &str) -> Result<bool> {
        Ok(self.parse(key)?.unwrap_or(false))
    }

    pub(crate) fn usize_list(&self, key: &str) -> Result<Option<Vec<usize>>> {
        self.raw(key).map(|v| parse_usize_list(&v)).transpose()
    }

    pub(crate) fn require_usize_list(&self, key: &str) -> Result<Vec<usize>> {
        self.usize_list(key)?
            .ok_or_else(|| Error::InvalidArgument(format!("missing required option --{key}")))
    }

    pub(crate) fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.raw(key).map(|v| parse_f64_list(&v)).transpose()
    }

    /// Per-mode constraint specs from `--constraints`, `--penalties`,
    /// `--max-iters`, `--tol` and `--seed`. A single constraint or penalty is
    /// broadcast to every mode.
    pub(crate) fn specs(&self, order: usize, default_kind: ConstraintKind) -> Result<Vec<ConstraintSpec>> {
        let kinds: Vec<ConstraintKind> = match self.raw("constraints") {
            None => vec![default_kind; order],
            Some(v) => v.split(',').map(|s| s.trim().parse()).collect::<Result<_>>()?,
        };
        let kinds = broadcast(kinds, order, "constraints")?;
        let penalties = broadcast(self.f64_list("penalties")?.unwrap_or_else(|| vec![0.0]), order, "penalties")?;
        let max_iters = self.positive_usize_or("max-iters", ConstraintSpec::DEFAULT_MAX_ITERS)?;
        let tol = self.positive_f64_or("tol", ConstraintSpec::DEFAULT_TOL)?;
        let seed = self.u64_or("seed", 0)?;
        let specs: Vec<ConstraintSpec> = kinds
            .into_iter()
            .zip(penalties)
            .map(|(k, p)| {
                ConstraintSpec::new(k)
                    .with_penalty(p)
                    .with_max_iters(max_iters)
                    .with_tol(tol)
                    .with_seed(seed)
            })
            .collect();
        for (n, s) in specs.iter().enumerate() {
            s.validate().map_err(|e| e.in_mode(n))?;
        }
        Ok(specs)
    }

    /// Fails on any flag or config key the command never looked at.
    pub(crate) fn finish(&self) -> Result<()> {
        let used = self.used.borrow();
        for (k, _) in self.flags.entries() {
            if !used.contains(k) {
                return Err(Error::InvalidArgument(format!("--{k} does not apply to this command")));
            }
        }
        for (k, _) in self.config.entries() {
            if !used.contains(k) {
                return Err(Error::InvalidArgument(format!("unknown config key `{k}`")));
            }
        }
        Ok(())
    }
}

pub(crate) fn broadcast<T: Clone>(v: Vec<T>, order: usize, what: &str) -> Result<Vec<T>> {
    match v.len() {
        1 => Ok(vec![v[0].clone(); order]),
        n if n == order => Ok(v),
        n => Err(Error::InvalidArgument(format!(
            "--{what} has {n} entries; expected 1 or {order}"
        ))),
    }
}
