//! Run configuration merged from an optional `key=value` file and command-line flags.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use hankel_lab::{Symbol, WeightModel};

use crate::error::CliError;

/// Keys accepted in configuration files; each matches a long flag.
pub const KEYS: &[&str] = &[
    "space", "symbol", "delta", "extent", "trunc", "proj", "degree", "p", "seed", "out", "loglog",
    "in", "column", "suite", "spectrum", "ida", "rho", "window",
];

pub const DEFAULT_TRUNC: usize = 32;
pub const DEFAULT_DEGREE: usize = 24;
pub const DEFAULT_P: f64 = 2.0;

/// Raw `key -> value` pairs, flags layered over the file.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

fn parse_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::Config(format!("{}:{}: expected key=value", path.display(), i + 1))
        })?;
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(CliError::Config(format!(
                "{}:{}: unknown key `{k}`",
                path.display(),
                i + 1
            )));
        }
        map.insert(k.to_string(), v.trim().to_string());
    }
    Ok(map)
}

impl RunConfig {
    /// Reads `config` if given, then applies the flag values that were set.
    pub fn load(
        config: Option<&Path>,
        flags: Vec<(&str, Option<String>)>,
    ) -> Result<Self, CliError> {
        let mut values = match config {
            Some(p) => parse_file(p)?,
            None => BTreeMap::new(),
        };
        for (k, v) in flags {
            debug_assert!(KEYS.contains(&k), "flag `{k}` missing from KEYS");
            if let Some(v) = v {
                values.insert(k.to_string(), v);
            }
        }
        Ok(Self { values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn require(&self, key: &str) -> Result<&str, CliError> {
        self.raw(key)
            .ok_or_else(|| CliError::Config(format!("missing required --{key}")))
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.raw(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| CliError::Config(format!("cannot parse --{key} value `{v}`")))
            })
            .transpose()
    }

    pub fn space(&self) -> Result<WeightModel, CliError> {
        Ok(self.require("space")?.parse::<WeightModel>()?)
    }

    pub fn symbol(&self) -> Result<Symbol, CliError> {
        Ok(Symbol::from_catalog(self.require("symbol")?)?)
    }

    pub fn delta(&self, model: &WeightModel) -> Result<f64, CliError> {
        let default = if model.is_fock() { 0.5 } else { 0.25 };
        Ok(self.parsed("delta")?.unwrap_or(default))
    }

    pub fn extent(&self, model: &WeightModel) -> Result<f64, CliError> {
        let default = if model.is_fock() { 4.0 } else { 0.95 };
        Ok(self.parsed("extent")?.unwrap_or(default))
    }

    pub fn trunc(&self) -> Result<usize, CliError> {
        Ok(self.parsed("trunc")?.unwrap_or(DEFAULT_TRUNC))
    }

    pub fn proj(&self) -> Result<Option<usize>, CliError> {
        self.parsed("proj")
    }

    pub fn degree(&self) -> Result<usize, CliError> {
        Ok(self.parsed("degree")?.unwrap_or(DEFAULT_DEGREE))
    }

    pub fn p(&self) -> Result<f64, CliError> {
        Ok(self.parsed("p")?.unwrap_or(DEFAULT_P))
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        Ok(self.parsed("seed")?.unwrap_or(0))
    }

    pub fn loglog(&self) -> Result<bool, CliError> {
        Ok(self.parsed("loglog")?.unwrap_or(false))
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.raw(key).map(PathBuf::from)
    }

    pub fn require_path(&self, key: &str) -> Result<PathBuf, CliError> {
        self.require(key).map(PathBuf::from)
    }

    pub fn require_str(&self, key: &str) -> Result<&str, CliError> {
        self.require(key)
    }

    /// `"a,b"` as an inclusive index window.
    pub fn window(&self) -> Result<Option<(usize, usize)>, CliError> {
        self.raw("window")
            .map(|w| {
                let bad = || CliError::Config(format!("window `{w}` is not `lo,hi`"));
                let (a, b) = w.split_once(',').ok_or_else(bad)?;
                Ok((
                    a.trim().parse().map_err(|_| bad())?,
                    b.trim().parse().map_err(|_| bad())?,
                ))
            })
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn flags_override_file() {
        let f = file("space = bergman:0\n# comment\ntrunc=8\n\nsymbol=conj_z\n");
        let cfg = RunConfig::load(
            Some(f.path()),
            vec![("trunc", Some("3".into())), ("delta", None)],
        )
        .unwrap();
        assert_eq!(cfg.trunc().unwrap(), 3);
        assert_eq!(cfg.raw("symbol"), Some("conj_z"));
        assert_eq!(cfg.space().unwrap().to_string(), "bergman:0");
    }

    #[test]
    fn unknown_and_malformed_keys_rejected() {
        let f = file("spcae=fock:1\n");
        assert!(matches!(
            RunConfig::load(Some(f.path()), vec![]),
            Err(CliError::Config(_))
        ));
        let f = file("space fock:1\n");
        assert!(matches!(
            RunConfig::load(Some(f.path()), vec![]),
            Err(CliError::Config(_))
        ));
    }

    #[test]
    fn typed_accessors() {
        let cfg = RunConfig::load(
            None,
            vec![
                ("trunc", Some("x".into())),
                ("window", Some("5, 50".into())),
            ],
        )
        .unwrap();
        assert!(cfg.trunc().is_err());
        assert_eq!(cfg.window().unwrap(), Some((5, 50)));
        assert!(cfg.space().is_err());
        assert_eq!(cfg.degree().unwrap(), DEFAULT_DEGREE);
    }
}
