//! Plain `key = value` run configuration. Lines starting with `#` are
//! comments. Values come from the defaults table, then a config file, then
//! `--set key=value` overrides, then dedicated command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::CliError;

/// `(key, default, description)`; an empty default means unset.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("dim", "10", "dimension n"),
    ("seed", "1", "seed for random jets, directions and polynomials"),
    ("out", "out", "output directory"),
    ("family", "f2", "radial family for `solve`: f2, f3, f2lambda or fpl"),
    ("l", "3", "harmonic degree for the fpl family"),
    ("lambda", "1.0", "Kelvin parameter for f2lambda and fpl"),
    ("eps", "0.1", "epsilon of the f2lambda envelope"),
    ("fpl.r_hi", "1e4", "outer Dirichlet radius of the fpl family"),
    ("grid.r_lo", "1e-4", "inner radius of the log grid"),
    ("grid.r_hi", "1e4", "outer radius of the log grid"),
    ("grid.ppd", "256", "grid points per decade"),
    ("bounds.lo", "1e-3", "lower end of the bound-check range"),
    ("bounds.hi", "1e3", "upper end of the bound-check range"),
    ("gate.from", "10", "first dimension of the gate table"),
    ("gate.to", "25", "last dimension of the gate table"),
    ("gate.eps", "0", "epsilon of the gate (decimal or p/q)"),
    ("mode", "hypothesis", "jet projection: general or hypothesis"),
    ("height", "1000", "blow-up height M"),
    ("radius", "5", "cutoff radius for `pohozaev`"),
    ("residual.points", "32", "sample radii in the profile residual"),
    ("residual.directions", "8", "random directions added to the 2n axes"),
    ("jets", "20", "hypothesis jets checked by `report`"),
    ("jet", "", "curvature jet JSON file"),
    ("format", "json", "report format: json or md"),
];

pub fn keys_help() -> String {
    let mut s = String::from("Configuration keys (file lines `key = value`, or `--set key=value`):\n");
    for (k, d, h) in KEYS {
        let d = if d.is_empty() { "unset" } else { d };
        s.push_str(&format!("  {k:<20} {h} [default: {d}]\n"));
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
enum Source {
    Default,
    File { path: String, line: usize },
    Override,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Default => write!(f, "default"),
            Source::File { path, line } => write!(f, "{path}:{line}"),
            Source::Override => write!(f, "command line"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    values: BTreeMap<String, (String, Source)>,
}

fn known(key: &str) -> bool {
    KEYS.iter().any(|(k, ..)| *k == key)
}

impl Default for RunConfig {
    fn default() -> Self {
        let values = KEYS
            .iter()
            .filter(|(_, d, _)| !d.is_empty())
            .map(|(k, d, _)| (k.to_string(), (d.to_string(), Source::Default)))
            .collect();
        Self { values }
    }
}

impl RunConfig {
    pub fn merge_file(&mut self, text: &str, path: &str) -> Result<(), CliError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(CliError::config(format!("{path}:{}: expected `key = value`, got `{line}`", i + 1)));
            };
            let k = k.trim();
            if !known(k) {
                return Err(CliError::config(format!("{path}:{}: unknown key `{k}`", i + 1)));
            }
            self.values.insert(k.into(), (v.trim().into(), Source::File { path: path.into(), line: i + 1 }));
        }
        Ok(())
    }

    pub fn set_pair(&mut self, pair: &str) -> Result<(), CliError> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("--set expects key=value, got `{pair}`")))?;
        self.set(k.trim(), v.trim())
    }

    pub fn set(&mut self, key: &str, value: impl ToString) -> Result<(), CliError> {
        if !known(key) {
            return Err(CliError::config(format!("unknown key `{key}`")));
        }
        self.values.insert(key.into(), (value.to_string(), Source::Override));
        Ok(())
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|(v, _)| v.as_str()).filter(|v| !v.is_empty())
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T, CliError>
    where
        T::Err: fmt::Display,
    {
        let (v, src) = self.values.get(key).ok_or_else(|| CliError::config(format!("key `{key}` is not set")))?;
        v.parse().map_err(|e| CliError::config(format!("key `{key}` ({src}): cannot parse `{v}`: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_override() {
        let mut c = RunConfig::default();
        c.merge_file("# comment\ndim = 11\nseed=4\n", "a.cfg").unwrap();
        assert_eq!(c.get::<usize>("dim").unwrap(), 11);
        c.set_pair("dim=12").unwrap();
        assert_eq!(c.get::<usize>("dim").unwrap(), 12);
        assert_eq!(c.get::<u64>("seed").unwrap(), 4);
    }

    #[test]
    fn diagnostics_name_line_and_key() {
        let mut c = RunConfig::default();
        let err = c.merge_file("dim = 10\nbogus = 1\n", "b.cfg").unwrap_err();
        assert!(err.message.contains("b.cfg:2") && err.message.contains("bogus"));
        c.merge_file("dim = ten\n", "c.cfg").unwrap();
        let err = c.get::<usize>("dim").unwrap_err();
        assert!(err.message.contains("c.cfg:1") && err.message.contains("`dim`"));
        assert!(c.merge_file("just words\n", "d.cfg").is_err());
    }
}
