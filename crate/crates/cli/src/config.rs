use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

/// `min:max:count`, inclusive, evenly spaced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        (0..self.count)
            .map(|i| self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64)
            .collect()
    }
}

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected min:max:count, got {s:?}"));
        }
        let min: f64 = parts[0].trim().parse().map_err(|e| format!("bad min in {s:?}: {e}"))?;
        let max: f64 = parts[1].trim().parse().map_err(|e| format!("bad max in {s:?}: {e}"))?;
        let count: usize = parts[2].trim().parse().map_err(|e| format!("bad count in {s:?}: {e}"))?;
        if count == 0 || !(min <= max) {
            return Err(format!("empty range {s:?}"));
        }
        Ok(Range { min, max, count })
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.min, self.max, self.count)
    }
}

/// Everything a run depends on. Defaults, then the config file, then flags.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub p: u32,
    pub q: u32,
    pub lambda: f64,
    pub mu: f64,
    pub nodes: usize,
    pub endpoint_offset: f64,
    pub gradient_tol: f64,
    pub max_iter: usize,
    pub root_tol: f64,
    pub residual_tol: f64,
    pub residual_window: f64,
    pub boundary_tol: f64,
    pub s_min: f64,
    pub s_max: f64,
    pub n_scan: usize,
    pub out_dir: PathBuf,
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            p: 1,
            q: 2,
            lambda: 1.0,
            mu: 4.0,
            nodes: 2000,
            endpoint_offset: 1e-8,
            gradient_tol: 1e-10,
            max_iter: 200,
            root_tol: 1e-6,
            residual_tol: 1e-4,
            residual_window: 0.01,
            boundary_tol: 1e-3,
            s_min: 0.01,
            s_max: 1.5,
            n_scan: 40,
            out_dir: std::env::var_os("HOPF_OUT_DIR").map(PathBuf::from).unwrap_or_else(|| PathBuf::from(".")),
            threads: 0,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, String>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e| format!("config key {key}: {e}"))
}

impl RunConfig {
    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), String> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", lineno + 1))?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        self.apply_text(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "p" => self.p = parse(key, value)?,
            "q" => self.q = parse(key, value)?,
            "lambda" => self.lambda = parse(key, value)?,
            "mu" => self.mu = parse(key, value)?,
            "nodes" => self.nodes = parse(key, value)?,
            "endpoint_offset" => self.endpoint_offset = parse(key, value)?,
            "gradient_tol" => self.gradient_tol = parse(key, value)?,
            "max_iter" => self.max_iter = parse(key, value)?,
            "root_tol" => self.root_tol = parse(key, value)?,
            "residual_tol" => self.residual_tol = parse(key, value)?,
            "residual_window" => self.residual_window = parse(key, value)?,
            "boundary_tol" => self.boundary_tol = parse(key, value)?,
            "s_min" => self.s_min = parse(key, value)?,
            "s_max" => self.s_max = parse(key, value)?,
            "n_scan" => self.n_scan = parse(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "threads" => self.threads = parse(key, value)?,
            _ => return Err(format!("unknown config key {key:?}")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("endpoint_offset", self.endpoint_offset),
            ("gradient_tol", self.gradient_tol),
            ("root_tol", self.root_tol),
            ("residual_tol", self.residual_tol),
            ("residual_window", self.residual_window),
            ("boundary_tol", self.boundary_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        if self.nodes < 16 {
            return Err(format!("nodes must be at least 16, got {}", self.nodes));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_parsing() {
        let r: Range = "1:2:5".parse().unwrap();
        assert_eq!(r.values(), vec![1.0, 1.25, 1.5, 1.75, 2.0]);
        assert!("1:2".parse::<Range>().is_err());
        assert!("2:1:3".parse::<Range>().is_err());
        assert!("1:2:0".parse::<Range>().is_err());
        assert_eq!("3:3:1".parse::<Range>().unwrap().values(), vec![3.0]);
    }

    #[test]
    fn config_text() {
        let mut c = RunConfig::default();
        c.apply_text("# comment\nmu = 5.5\n\nnodes=4001 # trailing\n").unwrap();
        assert_eq!((c.mu, c.nodes), (5.5, 4001));
        assert!(c.apply_text("bogus = 1").is_err());
        assert!(c.apply_text("mu 1").is_err());
    }

    #[test]
    fn validation() {
        let mut c = RunConfig::default();
        assert!(c.validate().is_ok());
        c.nodes = 8;
        assert!(c.validate().is_err());
        c = RunConfig { root_tol: 0.0, ..RunConfig::default() };
        assert!(c.validate().is_err());
    }
}
