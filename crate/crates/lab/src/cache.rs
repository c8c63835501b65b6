//! Text cache of discrete models: eigenvalues plus sampled eigenfunctions.
//!
//! Enabled by pointing `SPECMULT_CACHE_DIR` at a directory; only tabulated
//! bases are cached. Files are plain text so they diff and survive toolchain
//! changes:
//!
//! ```text
//! specmult-model 1
//! name <model name>
//! <space text: geometry, doubling_dim, spacing, points>
//! eigenvalues <m>
//! <λ_k> <φ_k(x_0)> … <φ_k(x_{count-1})>   (m lines)
//! ```

use std::fmt::Write as _;
use std::path::PathBuf;

use specmult_core::models::{Basis, SpectralModel};
use specmult_core::space::MetricMeasureSpace;

use crate::error::LabError;

pub const CACHE_ENV: &str = "SPECMULT_CACHE_DIR";
/// Largest table (points × functions) written to the cache.
const MAX_VALUES: usize = 20_000_000;

fn path_for(spec: &str) -> Option<PathBuf> {
    let dir = std::env::var_os(CACHE_ENV)?;
    let name: String = spec.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' }).collect();
    Some(PathBuf::from(dir).join(format!("{name}.model.txt")))
}

pub fn render(model: &SpectralModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "specmult-model 1");
    let _ = writeln!(out, "name {}", model.name);
    out.push_str(&model.space.to_text());
    let _ = writeln!(out, "eigenvalues {}", model.eigenvalues.len());
    for (k, l) in model.eigenvalues.iter().enumerate() {
        let _ = write!(out, "{l}");
        for v in model.eigenfunction(k) {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    out
}

pub fn parse(text: &str) -> Result<SpectralModel, LabError> {
    let bad = |what: &str| LabError::Config(format!("model cache: bad {what}"));
    let mut lines = text.lines();
    if lines.next() != Some("specmult-model 1") {
        return Err(bad("header"));
    }
    let name = lines.next().and_then(|l| l.strip_prefix("name ")).ok_or_else(|| bad("name"))?.to_string();
    let space = MetricMeasureSpace::read_text(&mut lines).map_err(LabError::core("model cache"))?;
    let count = space.len();
    let m: usize = lines
        .next()
        .and_then(|l| l.strip_prefix("eigenvalues"))
        .and_then(|r| r.trim().parse().ok())
        .ok_or_else(|| bad("eigenvalues"))?;
    let mut eigenvalues = Vec::with_capacity(m);
    let mut values = Vec::with_capacity(m * count);
    for _ in 0..m {
        let mut it = lines.next().ok_or_else(|| bad("eigenfunction"))?.split_whitespace().map(str::parse::<f64>);
        eigenvalues.push(it.next().and_then(|r| r.ok()).ok_or_else(|| bad("eigenvalue"))?);
        let row: Vec<f64> = it.collect::<Result<_, _>>().map_err(|_| bad("eigenfunction"))?;
        if row.len() != count {
            return Err(bad("eigenfunction length"));
        }
        values.extend(row);
    }
    SpectralModel::from_table(name, space, eigenvalues, values).map_err(LabError::core("model cache"))
}

/// Cached model for `spec`, if caching is enabled and an entry exists.
pub fn load(spec: &str) -> Result<Option<SpectralModel>, LabError> {
    match path_for(spec) {
        Some(p) if p.exists() => {
            let text = std::fs::read_to_string(&p).map_err(|e| LabError::Io(format!("{}: {e}", p.display())))?;
            parse(&text).map(Some)
        }
        _ => Ok(None),
    }
}

/// Writes `model` when caching is enabled and the table is small enough.
/// Closed-form bases are cheaper to rebuild than to read and are skipped, so
/// a cached run takes the same numerical path as a fresh one.
pub fn store(spec: &str, model: &SpectralModel) -> Result<(), LabError> {
    let Some(p) = path_for(spec) else { return Ok(()) };
    if !matches!(model.basis, Basis::Table { .. }) || model.len() * model.space.len() > MAX_VALUES {
        return Ok(());
    }
    if let Some(dir) = p.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(&p, render(model))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_roundtrip_is_exact() {
        let m = SpectralModel::hermite_oscillator(1, 64, 5).unwrap();
        let back = parse(&render(&m)).unwrap();
        assert_eq!(back.eigenvalues, m.eigenvalues);
        assert_eq!(back.space, m.space);
        for k in 0..m.len() {
            assert_eq!(back.eigenfunction(k), m.eigenfunction(k));
        }
        assert!(parse("specmult-model 2\n").is_err());
    }
}
