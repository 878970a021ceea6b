//! Flat `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::CliError;

pub struct Key {
    pub name: &'static str,
    pub default: Option<&'static str>,
    pub help: &'static str,
}

const fn key(name: &'static str, default: &'static str, help: &'static str) -> Key {
    Key {
        name,
        default: Some(default),
        help,
    }
}

/// Every recognized key, in serialization order.
pub const KEYS: &[Key] = &[
    key("d", "1", "spatial dimension"),
    key("N", "64", "frequency cutoff"),
    key("k", "2", "degree of the nonlinearity"),
    key("alpha", "0.5", "dispersion exponent"),
    key("beta", "0.4", "data regularity"),
    key("sigma", "0.2", "Sobolev index of the remainder"),
    key("T", "0.05", "time horizon of the solver"),
    key("t", "0.5", "evaluation time"),
    key("ell", "2", "Wick power"),
    key("k1", "1", "Wick factor of a product object"),
    key("k2", "1", "Duhamel factors of a product object"),
    key("object", "wick", "z | wick | duhamel | product"),
    key("method", "exact", "exact | mc | delta"),
    key("samples", "1000", "Monte Carlo samples"),
    key("h", "0.01", "time increment of delta moments"),
    key("seed", "0", "random seed"),
    key("shells", "auto", "fit shells as lo..hi, or auto"),
    Key {
        name: "input",
        default: None,
        help: "moment table to fit (CSV)",
    },
    key("factors", "z,z", "product factors: z, wick:L, duhamel:K, delta:H"),
    key("check", "bound", "bound | decomposition"),
    key("case", "pair", "pair | triple"),
    key("a", "0.8", "first exponent"),
    key("b", "0.8", "second exponent"),
    key("c", "0.8", "third exponent"),
    key("lo", "4", "smallest swept bracket"),
    key("hi", "256", "largest swept bracket"),
    key("R", "auto", "truncation radius, or auto"),
    key("steps", "auto", "time steps, or auto"),
    key("tol", "1e-8", "Picard stopping tolerance"),
    key("max_iter", "50", "Picard iteration cap"),
    key("ladder", "16,32,64,128", "increasing cutoffs"),
    key("control", "false", "control run with frozen data"),
    key("out", "wicklab-out", "output directory"),
];

pub fn lookup(name: &str) -> Option<&'static Key> {
    KEYS.iter().find(|k| k.name == name)
}

/// Closest known key, if any is reasonably close.
pub fn suggest(name: &str) -> Option<&'static str> {
    KEYS.iter()
        .map(|k| (strsim::jaro_winkler(name, k.name), k.name))
        .filter(|(s, _)| *s > 0.7)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, n)| n)
}

fn unknown(name: &str) -> String {
    match suggest(name) {
        Some(s) => format!("unknown key '{name}' (did you mean '{s}'?)"),
        None => format!("unknown key '{name}'"),
    }
}

/// Raw values read from a file, with the line each came from.
#[derive(Debug, Default)]
pub struct FileValues(pub BTreeMap<String, (String, usize)>);

pub fn parse_config(text: &str) -> Result<FileValues, CliError> {
    let mut out = FileValues::default();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("line {line_no}: expected `key = value`, got {raw:?}")))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(CliError::Usage(format!("line {line_no}: empty key or value")));
        }
        if lookup(k).is_none() {
            return Err(CliError::Usage(format!("line {line_no}: {}", unknown(k))));
        }
        if let Some((_, first)) = out.0.get(k) {
            return Err(CliError::Usage(format!(
                "line {line_no}: duplicate key '{k}' (first set on line {first})"
            )));
        }
        out.0.insert(k.to_string(), (v.to_string(), line_no));
    }
    Ok(out)
}

pub fn load_config(path: &Path) -> Result<FileValues, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| match e {
        CliError::Usage(m) => CliError::Usage(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// The settings of one run: defaults, overridden by the file, overridden by
/// flags, restricted to the keys the command reads.
#[derive(Clone, Debug, PartialEq)]
pub struct Resolved {
    pub command: String,
    values: Vec<(&'static str, Option<String>)>,
}

impl Resolved {
    pub fn new(
        command: &str,
        keys: &[&'static str],
        file: &FileValues,
        flags: &BTreeMap<&'static str, String>,
    ) -> Self {
        let values = keys
            .iter()
            .map(|&name| {
                let k = lookup(name).expect("command keys are registered");
                let v = flags
                    .get(name)
                    .cloned()
                    .or_else(|| file.0.get(name).map(|(v, _)| v.clone()))
                    .or_else(|| k.default.map(str::to_string));
                (k.name, v)
            })
            .collect();
        Resolved {
            command: command.to_string(),
            values,
        }
    }

    /// The command reads this key.
    pub fn reads(&self, name: &str) -> bool {
        self.values.iter().any(|(k, _)| *k == name)
    }

    pub fn raw(&self, name: &str) -> Result<&str, CliError> {
        match self.values.iter().find(|(k, _)| *k == name) {
            Some((_, Some(v))) => Ok(v),
            Some((_, None)) => Err(CliError::Usage(format!("missing required flag --{name}"))),
            None => panic!("command {} does not read key {name}", self.command),
        }
    }

    pub fn parse<T: std::str::FromStr>(&self, name: &str, what: &str) -> Result<T, CliError> {
        let v = self.raw(name)?;
        v.parse()
            .map_err(|_| CliError::Usage(format!("invalid value '{v}' for {name}: expected {what}")))
    }

    pub fn f64(&self, name: &str) -> Result<f64, CliError> {
        let x: f64 = self.parse(name, "a number")?;
        if !x.is_finite() {
            return Err(CliError::Usage(format!("{name} must be finite")));
        }
        Ok(x)
    }

    pub fn usize(&self, name: &str) -> Result<usize, CliError> {
        self.parse(name, "a nonnegative integer")
    }

    pub fn u64(&self, name: &str) -> Result<u64, CliError> {
        self.parse(name, "a nonnegative integer")
    }

    pub fn bool(&self, name: &str) -> Result<bool, CliError> {
        self.parse(name, "true or false")
    }

    /// `None` for the literal `auto`.
    pub fn auto_usize(&self, name: &str) -> Result<Option<usize>, CliError> {
        if self.raw(name)? == "auto" {
            Ok(None)
        } else {
            self.usize(name).map(Some)
        }
    }

    pub fn choice(&self, name: &str, options: &[&'static str]) -> Result<&'static str, CliError> {
        let v = self.raw(name)?;
        options.iter().copied().find(|o| *o == v).ok_or_else(|| {
            CliError::Usage(format!("invalid value '{v}' for {name}: expected one of {}", options.join(", ")))
        })
    }

    /// `key = value` lines; keys without a value are omitted.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.values {
            if let Some(v) = v {
                writeln!(s, "{k} = {v}").expect("writing to a string");
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(text: &str, flags: &[(&'static str, &str)]) -> Result<Resolved, CliError> {
        let file = parse_config(text)?;
        let flags = flags.iter().map(|(k, v)| (*k, v.to_string())).collect();
        Ok(Resolved::new("test", &["d", "beta", "seed", "input"], &file, &flags))
    }

    #[test]
    fn empty_file_gives_defaults() {
        let r = resolve("", &[]).unwrap();
        assert_eq!(r.f64("beta").unwrap(), 0.4);
        assert_eq!(r.usize("d").unwrap(), 1);
        assert_eq!(r.serialize(), "d = 1\nbeta = 0.4\nseed = 0\n");
    }

    #[test]
    fn flags_override_file() {
        let r = resolve("beta = 0.4  # data\n", &[("beta", "0.45")]).unwrap();
        assert_eq!(r.f64("beta").unwrap(), 0.45);
        let r = resolve("# comment only\nbeta=0.3\n", &[]).unwrap();
        assert_eq!(r.f64("beta").unwrap(), 0.3);
    }

    #[test]
    fn duplicate_key_names_the_line() {
        let e = resolve("beta = 0.4\n\nbeta = 0.5\n", &[]).unwrap_err().to_string();
        assert!(e.contains("line 3") && e.contains("line 1"), "{e}");
    }

    #[test]
    fn unknown_key_is_suggested() {
        let e = resolve("bta = 0.4\n", &[]).unwrap_err().to_string();
        assert!(e.contains("line 1") && e.contains("'beta'"), "{e}");
        let e = parse_config("x y\n").unwrap_err().to_string();
        assert!(e.contains("line 1"), "{e}");
    }

    #[test]
    fn missing_required_value() {
        let r = resolve("", &[]).unwrap();
        assert!(r.raw("input").unwrap_err().to_string().contains("--input"));
    }

    #[test]
    fn reserialization_is_stable() {
        let r = resolve("seed = 7\nd=2\n", &[("beta", "0.45")]).unwrap();
        let again = resolve(&r.serialize(), &[]).unwrap();
        assert_eq!(r.serialize(), again.serialize());
    }
}
