use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_specmult"))
}

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn run(config: &Path, out: &Path, extra: &[&str]) -> Output {
    bin().arg("run").arg(config).arg("--out").arg(out).args(extra).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("scenario.toml");
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn list_conditions() {
    let o = bin().args(["list", "conditions"]).output().unwrap();
    assert!(o.status.success());
    let text = stdout(&o);
    let tags: Vec<&str> = text.lines().filter_map(|l| l.split_whitespace().next()).collect();
    for t in ["ST", "SC", "Sp", "Rp", "G", "E", "ABp", "weak-type", "dispersive", "FS"] {
        assert!(tags.contains(&t), "missing {t}");
    }
}

#[test]
fn list_models_and_multipliers() {
    let models = stdout(&bin().args(["list", "models"]).output().unwrap());
    for m in ["interval", "circle", "torus2", "hermite1", "hermite2", "radial"] {
        assert!(models.lines().any(|l| l.starts_with(m)), "missing model {m}");
    }
    let mults = stdout(&bin().args(["list", "multipliers"]).output().unwrap());
    for m in ["br", "bump", "indicator", "phi", "gk"] {
        assert!(mults.lines().any(|l| l.split_whitespace().next() == Some(m)), "missing multiplier {m}");
    }
}

#[test]
fn list_is_stable_and_scenarios_parse() {
    let a = bin().args(["list", "scenarios"]).output().unwrap();
    let b = bin().args(["list", "scenarios"]).output().unwrap();
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("radial-plancherel"));
    assert_eq!(bin().args(["list", "widgets"]).output().unwrap().status.code(), Some(1));
}

#[test]
fn bad_model_spec_exits_one_naming_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[scenario]\nname = \"bad\"\nmodel = \"interval:0:K=0\"\noperation = \"st\"\nseed = 1\n");
    let o = run(&cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("interval:0:K=0"), "{}", stderr(&o));
}

#[test]
fn unknown_keys_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    for (body, key) in [
        ("model = \"circle:64:K=8\"\noperation = \"levitate\"", "levitate"),
        ("model = \"sphere:64\"\noperation = \"st\"", "sphere:64"),
        ("model = \"circle:64:K=8\"\noperation = \"st\"\n[params]\nfamily = [\"zigzag:a=1\"]", "zigzag:a=1"),
        ("model = \"circle:64:K=8\"\noperation = \"st\"\n[params]\nwobble = 3", "wobble"),
    ] {
        let cfg = write_config(dir.path(), &format!("[scenario]\nname = \"x\"\nseed = 1\n{body}\n"));
        let o = run(&cfg, &dir.path().join("out"), &[]);
        assert_eq!(o.status.code(), Some(1), "{body}");
        assert!(stderr(&o).contains(key), "{body}: {}", stderr(&o));
    }
}

#[test]
fn missing_seed_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[scenario]\nname = \"x\"\nmodel = \"none\"\noperation = \"gk\"\n");
    let o = run(&cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("seed"));
}

#[test]
fn radial_plancherel_defects_are_small() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&scenarios().join("radial-plancherel.toml"), dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut rdr = csv::Reader::from_path(dir.path().join("radial-plancherel.csv")).unwrap();
    let headers = rdr.headers().unwrap().clone();
    let col = headers.iter().position(|h| h == "defect").unwrap();
    let mut rows = 0;
    for rec in rdr.records() {
        let d: f64 = rec.unwrap()[col].parse().unwrap();
        assert!(d < 1e-5, "defect {d}");
        rows += 1;
    }
    assert!(rows >= 3);
    for f in ["radial-plancherel.json", "manifest.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn flagged_records_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&scenarios().join("radial-plancherel.toml"), dir.path(), &["--tolerance-scale", "1e-20"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn reruns_are_byte_identical() {
    for name in ["circle-cz", "tao-splitting", "circle-ge", "radial-plancherel"] {
        let cfg = scenarios().join(format!("{name}.toml"));
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        assert!(run(&cfg, a.path(), &["--threads", "4"]).status.success());
        assert!(run(&cfg, b.path(), &[]).status.success());
        let file = format!("{name}.csv");
        let (x, y) = (std::fs::read(a.path().join(&file)).unwrap(), std::fs::read(b.path().join(&file)).unwrap());
        assert!(!x.is_empty());
        assert_eq!(x, y, "{name}");
    }
}

#[test]
fn seed_override_changes_random_data() {
    let cfg = scenarios().join("circle-cz.toml");
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert!(run(&cfg, a.path(), &[]).status.success());
    assert!(run(&cfg, b.path(), &["--seed-override", "99"]).status.success());
    let x = std::fs::read(a.path().join("circle-cz.csv")).unwrap();
    let y = std::fs::read(b.path().join("circle-cz.csv")).unwrap();
    assert_ne!(x, y);
    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(b.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 99);
    assert_eq!(manifest["csv_schema"], "specmult-csv/1");
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn verify_specfun_passes_and_unknown_suite_fails() {
    let o = bin().args(["verify", "specfun"]).output().unwrap();
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).lines().all(|l| !l.starts_with("FAIL")));
    assert_eq!(bin().args(["verify", "everything"]).output().unwrap().status.code(), Some(1));
}

#[test]
fn verify_norms_passes() {
    let o = bin().args(["verify", "norms"]).output().unwrap();
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
}

#[test]
fn cli_usage_errors_exit_one() {
    assert_eq!(bin().arg("frobnicate").output().unwrap().status.code(), Some(1));
    assert_eq!(bin().arg("--help").output().unwrap().status.code(), Some(0));
}

#[test]
fn cached_models_reproduce_fresh_runs() {
    let cfg = scenarios().join("hermite1-ab.toml");
    let cache = tempfile::tempdir().unwrap();
    let (fresh, first, second) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert!(run(&cfg, fresh.path(), &[]).status.success());
    for out in [&first, &second] {
        let o = bin().arg("run").arg(&cfg).arg("--out").arg(out.path()).env("SPECMULT_CACHE_DIR", cache.path()).output().unwrap();
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(std::fs::read_dir(cache.path()).unwrap().count(), 1);
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("hermite1-ab.csv")).unwrap();
    assert_eq!(read(&fresh), read(&first));
    assert_eq!(read(&first), read(&second));
}
