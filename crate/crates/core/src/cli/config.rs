//! Plain-text `key = value` configuration files.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use super::CliError;

const KEYS: &[&str] = &[
    "channel", "regime", "gamma", "lambda", "indist", "coeffs", "statistics", "t", "p", "t_max",
    "points", "seed", "cases", "out", "gnuplot",
];

#[derive(Clone, Debug, Default)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Blank lines and `#` comments are ignored; keys may use `-` or `_`.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", n + 1)))?;
            let key = k.trim().replace('-', "_");
            if !KEYS.contains(&key.as_str()) {
                return Err(CliError::Usage(format!("config line {}: unknown key '{key}'", n + 1)));
            }
            values.insert(key, v.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(s) => s
                .parse()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config key '{key}': {e}"))),
        }
    }

    /// Command-line value if present, else the file's.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }
}

/// Comma-separated list of reals; the empty string is the empty list.
pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("'{x}': {e}")))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RealList(pub Vec<f64>);

impl FromStr for RealList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        parse_list(s).map(RealList)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_dashes() {
        let cfg = ConfigFile::parse("# sweep\nchannel = pdc\nt-max=5 # inline\n\n").unwrap();
        assert_eq!(cfg.get::<String>("channel").unwrap().as_deref(), Some("pdc"));
        assert_eq!(cfg.get::<f64>("t_max").unwrap(), Some(5.0));
        assert_eq!(cfg.pick(Some(2.0), "t_max").unwrap(), Some(2.0));
        assert_eq!(cfg.get::<f64>("gamma").unwrap(), None);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_lines() {
        assert!(ConfigFile::parse("colour = red").is_err());
        assert!(ConfigFile::parse("channel").is_err());
        let cfg = ConfigFile::parse("gamma = fast").unwrap();
        assert!(cfg.get::<f64>("gamma").is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(parse_list("0, 0.5,1").unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(parse_list("").unwrap().is_empty());
        assert!(parse_list("0,x").is_err());
    }
}
