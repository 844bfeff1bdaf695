use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use photoscint_cli::{manifest_path, Config, RunManifest};
use tempfile::TempDir;

const WHITE_NOISE: &str = r#"
[turbulence]
cn2 = 1e-14
inner_scale = 0.005
model = "tatarskii"

[source]
r0 = 0.01
rz = 0.3
wavelength = 0.8e-6
coherence_ratio = 1.0
photon_stat = "fock"
photons = 100
pulses_per_interval = 100
t_p = 1e-3

[path]
length = 1000.0
distances = [0.0, 1000.0]
force = "white_noise"
steps = 20

[detector]
eta_q = 0.5
radius = 0.002

[experiment]
seed = 5
realizations = 10
probes = 500
"#;

const SCREENS: &str = r#"
[turbulence]
cn2 = 1e-15
inner_scale = 0.005
model = "tatarskii"

[source]
r0 = 0.01
rz = 0.3
wavelength = 0.8e-6
coherence_ratio = 1.0
photon_stat = "fock"
photons = 100
pulses_per_interval = 100
t_p = 1e-3

[path]
length = 2000.0
force = "frozen_screens"
grid_n = 64
grid_spacing = 0.00125
slabs = 4
low_frequency = "compensated"
subharmonic_levels = 4

[detector]
eta_q = 0.5
radius = 0.004

[experiment]
seed = 9
realizations = 6
probes = 3000
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_photoscint"))
}

fn write_config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run_cmd(sub: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    bin().arg(sub).arg("--config").arg(config).arg("--out").arg(out).args(extra).output().unwrap()
}

fn rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut reader = csv::Reader::from_path(path).unwrap();
    let header = reader.headers().unwrap().iter().map(String::from).collect();
    let body = reader.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect();
    (header, body)
}

fn column(header: &[String], row: &[String], name: &str) -> f64 {
    let i = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    row[i].parse().unwrap()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let text = WHITE_NOISE.replace("[detector]", "[detector]\nshape = \"round\"");
    let cfg = write_config(&dir, "bad.toml", &text);
    let out = run_cmd("beam", &cfg, &dir.path().join("o.csv"), &[]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr_of(&out));
    assert!(stderr_of(&out).contains("shape"));
}

#[test]
fn coherence_given_twice_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let text = WHITE_NOISE.replace("coherence_ratio = 1.0", "coherence_ratio = 1.0\nlambda_c = 0.01");
    let cfg = write_config(&dir, "bad.toml", &text);
    let out = run_cmd("beam", &cfg, &dir.path().join("o.csv"), &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oversized_detector_is_rejected() {
    let dir = TempDir::new().unwrap();
    let text = WHITE_NOISE.replace("radius = 0.002", "radius = 0.5");
    let cfg = write_config(&dir, "big.toml", &text);
    let out = run_cmd("beam", &cfg, &dir.path().join("o.csv"), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("detector"), "{}", stderr_of(&out));
}

#[test]
fn missing_config_file_exits_nonzero() {
    let dir = TempDir::new().unwrap();
    let out = run_cmd("beam", &dir.path().join("nope.toml"), &dir.path().join("o.csv"), &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn beam_table_and_manifest() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "beam.toml", WHITE_NOISE);
    let csv_path = dir.path().join("beam.csv");
    let out = run_cmd("beam", &cfg, &csv_path, &["--workers", "2"]);
    assert!(out.status.success(), "{}", stderr_of(&out));

    let (header, body) = rows(&csv_path);
    assert_eq!(&header[..5], ["distance_m", "R2_analytic_m2", "var_x_mc_m2", "stderr", "ratio"]);
    assert_eq!(body.len(), 2);
    let at_zero = &body[0];
    assert_eq!(column(&header, at_zero, "distance_m"), 0.0);
    assert!((column(&header, at_zero, "R2_analytic_m2") - 0.5e-4).abs() < 1e-15);
    assert!((column(&header, at_zero, "ratio") - 1.0).abs() < 0.1);

    let manifest = RunManifest::read(&manifest_path(&csv_path)).unwrap();
    assert_eq!(manifest.command, "beam");
    assert_eq!(manifest.master_seed, 5);
    assert_eq!(manifest.workers, 2);
    assert_eq!(manifest.config().unwrap(), Config::from_toml(WHITE_NOISE).unwrap());
}

#[test]
fn zero_turbulence_has_no_turbulent_radius() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "calm.toml", &WHITE_NOISE.replace("cn2 = 1e-14", "cn2 = 0.0"));
    let csv_path = dir.path().join("calm.csv");
    let out = run_cmd("beam", &cfg, &csv_path, &[]);
    assert!(out.status.success(), "{}", stderr_of(&out));
    let (header, body) = rows(&csv_path);
    for row in &body {
        assert_eq!(column(&header, row, "R2_turbulence_m2"), 0.0);
    }
}

#[test]
fn seed_flag_overrides_config_and_reruns_are_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "beam.toml", WHITE_NOISE);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    assert!(run_cmd("beam", &cfg, &a, &["--seed", "77"]).status.success());
    assert!(run_cmd("beam", &cfg, &b, &["--seed", "77"]).status.success());
    assert!(run_cmd("beam", &cfg, &c, &["--seed", "78"]).status.success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
    assert_eq!(RunManifest::read(&manifest_path(&a)).unwrap().master_seed, 77);
}

#[test]
fn manifest_config_reproduces_the_run() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "scint.toml", SCREENS);
    let first = dir.path().join("first.csv");
    let out = run_cmd("scint", &cfg, &first, &["--seed", "21", "--realizations", "4"]);
    assert!(out.status.success(), "{}", stderr_of(&out));

    let manifest = RunManifest::read(&manifest_path(&first)).unwrap();
    let resolved = write_config(&dir, "resolved.toml", &manifest.config);
    let second = dir.path().join("second.csv");
    let out = run_cmd("scint", &resolved, &second, &[]);
    assert!(out.status.success(), "{}", stderr_of(&out));
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());

    let (header, body) = rows(&second);
    assert_eq!(header, ["cn2", "r1_over_r0_sq", "path_m", "sigma2", "stderr", "realizations"]);
    assert_eq!(column(&header, &body[0], "realizations"), 4.0);
}

#[test]
fn scint_worker_count_does_not_change_output() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "scint.toml", SCREENS);
    let one = dir.path().join("one.csv");
    let three = dir.path().join("three.csv");
    assert!(run_cmd("scint", &cfg, &one, &["--workers", "1"]).status.success());
    assert!(run_cmd("scint", &cfg, &three, &["--workers", "3"]).status.success());
    assert_eq!(std::fs::read(&one).unwrap(), std::fs::read(&three).unwrap());
}

#[test]
fn detector_off_beam_is_degenerate() {
    let dir = TempDir::new().unwrap();
    let text = SCREENS.replace("radius = 0.004", "radius = 0.004\ncenter = [5.0, 0.0]");
    let cfg = write_config(&dir, "off.toml", &text);
    let out = run_cmd("scint", &cfg, &dir.path().join("o.csv"), &[]);
    assert_eq!(out.status.code(), Some(4), "{}", stderr_of(&out));
}

#[test]
fn single_photon_counts_carry_no_turbulence_term() {
    let dir = TempDir::new().unwrap();
    let text = WHITE_NOISE
        .replace("photons = 100", "photons = 1")
        .replace("probes = 500", "probes = 500\nsynthetic_alpha = 0.2\nsynthetic_sigma2 = 0.5")
        .replace("realizations = 10", "realizations = 20000");
    let cfg = write_config(&dir, "count.toml", &text);
    let csv_path = dir.path().join("count.csv");
    let out = run_cmd("count", &cfg, &csv_path, &[]);
    assert!(out.status.success(), "{}", stderr_of(&out));

    let (header, body) = rows(&csv_path);
    assert_eq!(
        &header[..8],
        ["source_kind", "alpha", "mean_n", "nvar_sampled", "nvar_analytic", "shot_term", "scint_term", "sigma2_used"]
    );
    assert_eq!(body.len(), 2);
    let fock = body.iter().find(|r| r[0] == "fock").unwrap();
    let poisson = body.iter().find(|r| r[0] == "poisson").unwrap();
    assert_eq!(column(&header, fock, "scint_term"), 0.0);
    assert!(column(&header, poisson, "scint_term") > 0.0);
    assert!(column(&header, poisson, "nvar_analytic") >= column(&header, fock, "nvar_analytic"));
    let sampled = column(&header, fock, "nvar_sampled");
    let analytic = column(&header, fock, "nvar_analytic");
    assert!((sampled / analytic - 1.0).abs() < 0.05, "{sampled} vs {analytic}");
}

#[test]
fn validate_passes_and_reports_every_check() {
    let dir = TempDir::new().unwrap();
    let report = dir.path().join("validate.txt");
    let out = bin().arg("validate").arg("--out").arg(&report).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() >= 10, "{text}");
    assert!(!text.contains("FAIL"));
}

#[test]
fn validate_with_broken_tolerances_exits_3() {
    let out = bin().args(["validate", "--tolerance-scale", "0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn stdout_output_when_no_file_given() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "beam.toml", WHITE_NOISE);
    let out = bin().arg("beam").arg("--config").arg(&cfg).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("distance_m,R2_analytic_m2,var_x_mc_m2,stderr,ratio"));
    assert_eq!(text.lines().count(), 3);
}
