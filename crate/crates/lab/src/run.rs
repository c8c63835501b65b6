//! `specmult run`: execute a scenario file and write its outputs.

use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::config::ScenarioConfig;
use crate::error::LabError;
use crate::manifest::{sha256_hex, Environment, OutputFile, RunManifest, SectionTiming};
use crate::ops::{execute, RunContext};
use crate::report;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Advisory only; recorded in the manifest.
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub seed_override: Option<u64>,
    pub tolerance_scale: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub records: usize,
    pub flagged: usize,
}

fn file_stem(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

pub fn run_scenario(config: &Path, opts: &RunOptions) -> Result<RunSummary, LabError> {
    let start = Instant::now();
    let (cfg, bytes) = ScenarioConfig::load(config)?;
    let scale = opts.tolerance_scale.unwrap_or(1.0);
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(LabError::Config(format!("--tolerance-scale must be positive, got {scale}")));
    }
    let ctx = RunContext { seed: opts.seed_override.unwrap_or(cfg.scenario.seed), tolerance_scale: scale };
    let base = config.parent().unwrap_or(Path::new("."));
    let out = execute(&cfg, &ctx, base)?;

    let out_dir = match (&opts.out, &cfg.scenario.out) {
        (Some(d), _) => d.clone(),
        (None, Some(d)) => PathBuf::from(d),
        (None, None) => Path::new("out").join(file_stem(&cfg.scenario.name)),
    };
    std::fs::create_dir_all(&out_dir).map_err(|e| LabError::Io(format!("{}: {e}", out_dir.display())))?;
    let stem = file_stem(&cfg.scenario.name);
    let mut written: Vec<(String, Vec<u8>)> = vec![
        (format!("{stem}.csv"), report::csv_bytes(&out)?),
        (
            format!("{stem}.json"),
            serde_json::to_vec_pretty(&report::json_value(&cfg, ctx.seed, &out)).map_err(|e| LabError::Io(e.to_string()))?,
        ),
    ];
    for (i, sec) in out.sections.iter().enumerate() {
        let r = &sec.report;
        if r.trend.is_none() {
            continue;
        }
        let tag = format!("{stem}.{i:02}.{}", file_stem(&r.condition));
        written.push((format!("plots/{tag}.dat"), report::plot_data(r).into_bytes()));
        if let Some(svg) = report::svg_plot(r) {
            written.push((format!("plots/{tag}.svg"), svg.into_bytes()));
        }
    }

    let mut manifest = RunManifest::new(config.display().to_string(), &bytes);
    manifest.scenario = cfg.scenario.name.clone();
    manifest.operation = cfg.scenario.operation.clone();
    manifest.model = cfg.scenario.model.clone();
    manifest.seed = ctx.seed;
    manifest.tolerance_scale = scale;
    manifest.model_build_seconds = out.build_seconds;
    manifest.timing = out
        .sections
        .iter()
        .zip(&out.section_seconds)
        .map(|(s, &seconds)| SectionTiming { condition: s.report.condition.clone(), records: s.report.records.len(), seconds })
        .collect();
    manifest.flagged_records = out.flagged();
    manifest.environment = Environment::capture(opts.threads);
    manifest.outputs = written.iter().map(|(p, b)| OutputFile { path: p.clone(), bytes: b.len(), sha256: sha256_hex(b) }).collect();

    // single writer, all files at the end
    let mut files = Vec::new();
    for (rel, data) in &written {
        let path = out_dir.join(rel);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(&path, data).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?;
        files.push(path);
    }
    manifest.total_seconds = start.elapsed().as_secs_f64();
    let path = out_dir.join("manifest.json");
    let text = serde_json::to_vec_pretty(&manifest).map_err(|e| LabError::Io(e.to_string()))?;
    std::fs::write(&path, text).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?;
    files.push(path);

    Ok(RunSummary {
        out_dir,
        files,
        records: out.sections.iter().map(|s| s.report.records.len()).sum(),
        flagged: out.flagged(),
    })
}

/// Directory holding the shipped scenarios: `./scenarios` if present, else the
/// one next to the workspace sources.
pub fn scenario_dir() -> PathBuf {
    let local = PathBuf::from("scenarios");
    if local.is_dir() {
        local
    } else {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
    }
}

/// `(file name, parsed config)` of every `*.toml` in `dir`, sorted by name.
pub fn list_scenarios(dir: &Path) -> Result<Vec<(String, ScenarioConfig)>, LabError> {
    let mut out = Vec::new();
    let entries = std::fs::read_dir(dir).map_err(|e| LabError::Io(format!("{}: {e}", dir.display())))?;
    for entry in entries {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "toml") {
            let (cfg, _) = ScenarioConfig::load(&path)?;
            let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            out.push((name, cfg));
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}
