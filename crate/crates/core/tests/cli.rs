use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cycling-lab")).args(args).current_dir(cwd).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn orbit_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(&["orbit", "--out", "res"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("res/orbit.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(v["max_rate_mismatch"].as_f64().unwrap() < 1e-6);
    assert_eq!(v["unstable"]["kind"], "unstable");
}

#[test]
fn missing_config_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(&["cycling", "--config", "nope.toml"], dir.path());
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.toml"));
}

#[test]
fn invalid_config_values_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    for (name, body) in [("bin.toml", "bin_width = 2.0\n"), ("sigma.toml", "sigmas = [1.5]\n"), ("field.toml", "colour = 3\n")] {
        std::fs::write(dir.path().join(name), body).unwrap();
        let o = cli(&["cycling", "--config", name], dir.path());
        assert_eq!(code(&o), 1, "{name}");
    }
}

#[test]
fn usage_errors_and_help() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&cli(&["frobnicate"], dir.path())), 1);
    assert_eq!(code(&cli(&["--help"], dir.path())), 0);
}

#[test]
fn single_sigma_sweep_fails_its_assertion() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("s.toml"), "kind = \"sigma-sweep\"\nsigmas = [0.4]\npaths = 200\n").unwrap();
    let o = cli(&["sweep", "--config", "s.toml"], dir.path());
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("s.toml"), "sigmas = [0.5]\npaths = 100\nmethod = \"direct\"\nmax_phase = 10.0\n").unwrap();
    for (out, threads) in [("a", "1"), ("b", "3")] {
        let o = cli(&["simulate", "--config", "s.toml", "--seed", "9", "--out", out, "--threads", threads], dir.path());
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = std::fs::read(dir.path().join("a/samples.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b/samples.csv")).unwrap();
    assert_eq!(a, b);
    let header = String::from_utf8_lossy(&a).lines().next().unwrap().to_string();
    assert!(header.starts_with("path_index,"), "{header}");
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("a/meta.json")).unwrap()).unwrap();
    assert_eq!(meta["provenance"]["seed"], 9);
}

#[test]
fn sample_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            cycling_lab::experiments::ExperimentConfig::load(&path).unwrap();
            n += 1;
        }
    }
    assert!(n >= 5);
}
