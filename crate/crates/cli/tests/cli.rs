use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hypocauchy"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(kind: &str, config: &Path, out: &Path) -> i32 {
    let status = bin()
        .args([kind, "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
        .status;
    status.code().expect("exit code")
}

fn manifest(out: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap()
}

fn files(out: &Path) -> Vec<String> {
    let mut v: Vec<String> = fs::read_dir(out).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    v.sort();
    v
}

#[test]
fn unknown_chart_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(
        &cfg,
        "experiment = \"kernel-norm\"\n[chart]\nkind = \"hyperbolic\"\n[region]\nkind = \"rectangle\"\nx = [-1.0, 1.0]\ny = [-1.0, 1.0]\n[kernel_norm]\nq = [1.5]\npoints = [[0.0, 0.0]]\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    assert_eq!(run("kernel-norm", &cfg, &out), 2);
    assert_eq!(files(&out), ["manifest.json"]);
    let m = manifest(&out);
    assert_eq!(m["status"], "invalid_config");
    assert_eq!(m["exit_code"], 2);
    assert!(m["config_text"].as_str().unwrap().contains("hyperbolic"));
}

#[test]
fn experiment_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    assert_eq!(run("scaling", &configs().join("loj_arc_k3.toml"), &out), 2);
    assert!(manifest(&out)["error"].as_str().unwrap().contains("loj"));
}

#[test]
fn missing_block_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "experiment = \"loj-estimate\"\n[chart]\nkind = \"arc_normal\"\nk = 3\n[region]\nkind = \"rectangle\"\nx = [-1.0, 1.0]\ny = [-1.0, 1.0]\n").unwrap();
    assert_eq!(run("loj-estimate", &cfg, &dir.path().join("out")), 2);
}

#[test]
fn charset_writes_strata() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    assert_eq!(run("charset", &configs().join("charset_stratification.toml"), &out), 0);
    assert_eq!(files(&out), ["manifest.json", "strata.csv", "summary.csv"]);
    let strata = fs::read_to_string(out.join("strata.csv")).unwrap();
    assert!(strata.starts_with("stratum,curve,x,y,order\n"));
    assert!(strata.contains("sigma0,,0,-1,3\n"));
    assert!(strata.contains("singular,,0,0,5\n"));
    let m = manifest(&out);
    assert_eq!(m["status"], "ok");
    assert_eq!(m["experiment"], "charset");
}

#[test]
fn loj_recovers_order_five() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    assert_eq!(run("loj-estimate", &configs().join("loj_arc_k5.toml"), &out), 0);
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    let mu: f64 = summary
        .lines()
        .find_map(|l| l.strip_prefix("mu_hat,"))
        .unwrap()
        .parse()
        .unwrap();
    assert!((mu - 5.0).abs() < 0.25, "{mu}");
}

#[test]
fn seed_override_is_recorded_and_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("loj_arc_k3.toml");
    let mut outs = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let status = bin().args(["loj-estimate", "--seed", "5", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
        assert!(status.success());
        assert_eq!(manifest(&out)["seed"], 5);
        outs.push(fs::read(out.join("ladder.csv")).unwrap());
    }
    assert_eq!(outs[0], outs[1]);
}

#[test]
fn divergent_kernel_exits_three_with_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("k.toml");
    fs::write(
        &cfg,
        "experiment = \"kernel-norm\"\n[chart]\nkind = \"arc_normal\"\nk = 3\n[region]\nkind = \"rectangle\"\nx = [-1.0, 1.0]\ny = [-1.0, 1.0]\n[quadrature]\nrel_tol = 1e-4\n[kernel_norm]\nq = [1.5]\npoints = [[0.0, 0.0]]\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    assert_eq!(run("kernel-norm", &cfg, &out), 3);
    assert_eq!(manifest(&out)["status"], "not_converged");
    assert!(out.join("kernel_norm.csv").exists());
}
