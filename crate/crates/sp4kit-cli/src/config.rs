//! Run configuration: built-in defaults, then a `key = value` file, then flags.

use std::path::Path;
use std::str::FromStr;

use sp4kit::quadrature::QuadConfig;

/// Environment variable naming the config file.
pub const CONFIG_ENV: &str = "SP4KIT_CONFIG";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "text" => Ok(Format::Text),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format {s:?} (text, csv, json)")),
        }
    }
}

/// Defaults:
///
/// | key | default | meaning |
/// |---|---|---|
/// | `tol` | `1e-9` | relative quadrature tolerance |
/// | `max_depth` | `14` | bisection depth limit |
/// | `panels` | `4` | initial panels per axis |
/// | `slack` | `4` | support-predicate slack |
/// | `seed` | `1` | seed of `verify` |
/// | `format` | `text` | `text`, `csv` or `json` |
/// | `workers` | `0` | worker threads, 0 = all cores |
/// | `count_xs` | `4,8,16` | X grid of `count` |
/// | `shifted_ns` | `32,64,128` | N grid of `gl2 shifted` |
/// | `kitaoka_bound` | `2` | ‖C‖∞ bound of `kloosterman --sweep` |
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub tol: f64,
    pub max_depth: u32,
    pub panels: usize,
    pub slack: f64,
    pub seed: u64,
    pub format: Format,
    pub workers: usize,
    pub count_xs: Vec<f64>,
    pub shifted_ns: Vec<f64>,
    pub kitaoka_bound: i64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let q = QuadConfig::default();
        RunConfig {
            tol: q.tol,
            max_depth: q.max_depth,
            panels: q.panels,
            slack: 4.0,
            seed: 1,
            format: Format::Text,
            workers: 0,
            count_xs: vec![4.0, 8.0, 16.0],
            shifted_ns: vec![32.0, 64.0, 128.0],
            kitaoka_bound: 2,
        }
    }
}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("config: {key} = {v:?} is not a valid value"))
}

fn list(key: &str, v: &str) -> Result<Vec<f64>, String> {
    v.split(',').map(|x| num(key, x.trim())).collect()
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let v = value.trim();
        match key.trim() {
            "tol" => self.tol = num(key, v)?,
            "max_depth" => self.max_depth = num(key, v)?,
            "panels" => self.panels = num(key, v)?,
            "slack" => self.slack = num(key, v)?,
            "seed" => self.seed = num(key, v)?,
            "format" => self.format = v.parse()?,
            "workers" => self.workers = num(key, v)?,
            "count_xs" => self.count_xs = list(key, v)?,
            "shifted_ns" => self.shifted_ns = list(key, v)?,
            "kitaoka_bound" => self.kitaoka_bound = num(key, v)?,
            other => return Err(format!("config: unknown key {other:?}")),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), String> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("config line {}: expected key = value", i + 1))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("config {}: {e}", path.display()))?;
        self.apply_text(&text)
    }

    pub fn quad(&self) -> QuadConfig {
        QuadConfig {
            tol: self.tol,
            max_depth: self.max_depth,
            panels: self.panels,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_overrides_defaults() {
        let mut c = RunConfig::default();
        c.apply_text("# comment\ntol = 1e-6\nformat=csv\ncount_xs = 2, 3\n\n").unwrap();
        assert_eq!(c.tol, 1e-6);
        assert_eq!(c.format, Format::Csv);
        assert_eq!(c.count_xs, vec![2.0, 3.0]);
        assert!(c.apply_text("bogus = 1").is_err());
        assert!(c.apply_text("tol 3").is_err());
    }
}
