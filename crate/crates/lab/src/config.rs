//! Scenario configuration files (TOML).

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::error::LabError;

/// Numeric grid: an explicit list or a range string.
///
/// Range strings: `dyadic:a..b` (powers of two times `a` up to `b`),
/// `geom:a..b:n` (`n` geometric points), `lin:a..b:n` (`n` equispaced points).
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Range(String),
    Single(f64),
}

impl Grid {
    pub fn values(&self, key: &str) -> Result<Vec<f64>, LabError> {
        match self {
            Grid::List(v) => Ok(v.clone()),
            Grid::Single(v) => Ok(vec![*v]),
            Grid::Range(s) => parse_range(s).ok_or_else(|| LabError::Config(format!("bad grid `{s}` for `{key}`"))),
        }
    }
}

fn parse_range(s: &str) -> Option<Vec<f64>> {
    let mut parts = s.split(':');
    let kind = parts.next()?;
    let (a, b) = parts.next()?.split_once("..")?;
    let (a, b): (f64, f64) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
    if !(a > 0.0 || kind == "lin") || b < a {
        return None;
    }
    match kind {
        "dyadic" => {
            let mut out = Vec::new();
            let mut x = a;
            while x <= b * (1.0 + 1e-12) {
                out.push(x);
                x *= 2.0;
            }
            Some(out)
        }
        "geom" | "lin" => {
            let n: usize = parts.next()?.trim().parse().ok()?;
            if n < 2 {
                return None;
            }
            Some(
                (0..n)
                    .map(|i| {
                        let t = i as f64 / (n - 1) as f64;
                        if kind == "geom" {
                            a * (b / a).powf(t)
                        } else {
                            a + (b - a) * t
                        }
                    })
                    .collect(),
            )
        }
        _ => None,
    }
}

/// One exponent or several.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn values(&self) -> Vec<f64> {
        match self {
            OneOrMany::One(v) => vec![*v],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub name: String,
    pub model: String,
    pub operation: String,
    pub seed: u64,
    #[serde(default)]
    pub out: Option<String>,
}

/// Parameter table; which keys are read depends on the operation.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub p: Option<OneOrMany>,
    pub s: Option<f64>,
    pub q: Option<OneOrMany>,
    pub kappa: Option<f64>,
    pub eps: Option<f64>,
    /// Frequency scales `R`.
    #[serde(rename = "R")]
    pub big_r: Option<Grid>,
    /// Cluster scales `N`.
    #[serde(rename = "N")]
    pub big_n: Option<Grid>,
    /// Resolvent power in the Gaussian-bound cycle.
    pub order: Option<u32>,
    pub t: Option<Grid>,
    pub lambda: Option<Grid>,
    pub alpha: Option<Grid>,
    pub times: Option<Grid>,
    pub radii: Option<Grid>,
    pub centers: Option<usize>,
    pub k_max: Option<usize>,
    pub k: Option<Grid>,
    pub window: Option<String>,
    pub dlambda: Option<f64>,
    pub r_max: Option<f64>,
    pub delta: Option<f64>,
    pub delta_shift: Option<f64>,
    pub rho: Option<Grid>,
    pub beta: Option<Grid>,
    pub steps: Option<Grid>,
    pub truncation: Option<f64>,
    pub instances: Option<usize>,
    pub models: Option<Vec<String>>,
    #[serde(default)]
    pub family: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub params: Params,
    /// Named tolerances; scaled by `--tolerance-scale`.
    #[serde(default)]
    pub tolerance: BTreeMap<String, f64>,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, LabError> {
        toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<(Self, Vec<u8>), LabError> {
        let bytes = std::fs::read(path).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?;
        let text = String::from_utf8(bytes.clone()).map_err(|_| LabError::Config(format!("{} is not UTF-8", path.display())))?;
        Ok((Self::parse(&text)?, bytes))
    }

    /// Tolerance `key` (or `default`) times `scale`.
    pub fn tolerance(&self, key: &str, default: f64, scale: f64) -> f64 {
        self.tolerance.get(key).copied().unwrap_or(default) * scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("dyadic:8..64").unwrap(), vec![8.0, 16.0, 32.0, 64.0]);
        let g = parse_range("geom:1..100:3").unwrap();
        assert!((g[1] - 10.0).abs() < 1e-12);
        assert_eq!(parse_range("lin:0..1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(parse_range("dyadic:0..8").is_none());
        assert!(parse_range("cubic:1..2:3").is_none());
    }

    #[test]
    fn seed_is_mandatory() {
        let e = ScenarioConfig::parse("[scenario]\nname='x'\nmodel='circle:64'\noperation='st'\n").unwrap_err();
        assert!(e.to_string().contains("seed"), "{e}");
    }

    #[test]
    fn infinite_exponent() {
        let c = ScenarioConfig::parse("[scenario]\nname='x'\nmodel='m'\noperation='st'\nseed=1\n[params]\nq=inf\np=[1,1.2]\n").unwrap();
        assert!(c.params.q.unwrap().values()[0].is_infinite());
        assert_eq!(c.params.p.unwrap().values(), vec![1.0, 1.2]);
    }
}
