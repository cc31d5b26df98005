use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_junction-lab");

const SINGLE_LIGHT: &str = r#"
[scenario]
positions = [0.0]
branches = [{ kind = "vee" }, { kind = "vee" }]
schedules = [{ switch_times = [0.0, 0.5], values = [1.0, 0.0] }]
"#;

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn lab(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("JUNCTION_LAB_OUT")
        .output()
        .unwrap()
}

fn run(sub: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        sub,
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    lab(&args)
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn csv_files(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|e| e == "csv") {
                files.insert(p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    files
}

#[test]
fn single_light_traffic_check_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "n1.toml",
        &format!("kind = \"traffic_checks\"\n{SINGLE_LIGHT}\n[numerics]\ndx = 0.05\nhorizon = 10.0\n"),
    );
    let out = tmp.path().join("run");
    let res = run("traffic-checks", &cfg, &out, &[]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.starts_with("n1_identity PASS"), "{summary}");
    let m = manifest(&out);
    assert_eq!(m["status"], "ok");
    assert_eq!(m["kind"], "traffic_checks");
    assert!(m["versions"]["junction_core"].is_string());
    assert!(m["wall_clock_s"].as_f64().unwrap() >= 0.0);
    let checks = fs::read_to_string(out.join("checks.csv")).unwrap();
    assert!(checks.starts_with("name,expected,computed,lower,upper,tol,pass\n"));
}

#[test]
fn zero_data_without_junctions_gives_zero_profile() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "zero.toml",
        "kind = \"cauchy\"\n[scenario]\nbranches = [{ kind = \"vee\" }]\n[numerics]\ndx = 0.1\nhorizon = 1.0\n",
    );
    let out = tmp.path().join("run");
    assert!(run("cauchy", &cfg, &out, &[]).status.success());
    let text = fs::read_to_string(out.join("profile.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x,u"));
    let mut n = 0;
    for line in lines {
        let u: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert_eq!(u, 0.0, "{line}");
        n += 1;
    }
    assert_eq!(n, 41);
    assert!(!text.contains('\r'));
    assert!(out.join("plot/x_u.csv").is_file());
}

#[test]
fn unsorted_positions_are_rejected_by_name() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "bad.toml",
        r#"
kind = "flux_limiter"
[scenario]
positions = [1.0, 0.0]
branches = [{ kind = "vee" }, { kind = "vee" }, { kind = "vee" }]
schedules = [{ switch_times = [0.0], values = [0.5] }, { switch_times = [0.0], values = [0.5] }]
"#,
    );
    let out = tmp.path().join("run");
    let res = run("run", &cfg, &out, &[]);
    assert_eq!(res.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&res.stderr);
    assert!(stderr.contains("invalid config field `scenario.positions`"), "{stderr}");
    let m = manifest(&out);
    assert_eq!(m["status"], "error");
    assert!(m["error"].as_str().unwrap().contains("positions"));
}

#[test]
fn unparsable_config_still_writes_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "broken.toml", "kind = \"cauchy\"\n[numerics]\nbogus = 1\n");
    let out = tmp.path().join("run");
    let res = run("cauchy", &cfg, &out, &[]);
    assert_eq!(res.status.code(), Some(2));
    let m = manifest(&out);
    assert_eq!(m["status"], "error");
    assert!(m["error"].as_str().unwrap().contains("bogus"));
    assert!(m["config"].is_null());
}

#[test]
fn kind_must_match_subcommand() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.toml",
        &format!("kind = \"traffic_checks\"\n{SINGLE_LIGHT}"),
    );
    let res = run("cauchy", &cfg, &tmp.path().join("run"), &[]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("`kind`"));
}

#[test]
fn failing_gate_sets_exit_status() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "sweep.toml",
        &format!("kind = \"epsilon_sweep\"\n{SINGLE_LIGHT}\n[numerics]\nepsilons = [0.2, 0.1]\na_bar = 0.5\n"),
    );
    let pass = tmp.path().join("pass");
    assert_eq!(run("epsilon-sweep", &cfg, &pass, &[]).status.code(), Some(0));
    let fail = tmp.path().join("fail");
    let res = run("epsilon-sweep", &cfg, &fail, &["--tol-override", "convergence=1e-6"]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stdout).contains("final_error FAIL"));
    let m = manifest(&fail);
    assert_eq!(m["status"], "checks_failed");
    assert_eq!(m["config"]["tolerances"]["convergence"], 1e-6);
    let table = fs::read_to_string(fail.join("plot/eps_error.csv")).unwrap();
    assert_eq!(table.lines().count(), 3);
    assert!(table.starts_with("eps,sup_error\n"));
}

#[test]
fn unknown_tolerance_override_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.toml",
        &format!("kind = \"traffic_checks\"\n{SINGLE_LIGHT}"),
    );
    let res = run("run", &cfg, &tmp.path().join("run"), &["--tol-override", "speed=1"]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("tolerances.speed"));
}

#[test]
fn identical_config_and_seed_give_identical_csvs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "det.toml",
        &format!(
            "kind = \"traffic_checks\"\n{SINGLE_LIGHT}\n[numerics]\ndx = 0.05\nhorizon = 5.0\n\
             [checks]\nrun = [\"n1_identity\", \"random_n1\"]\nrandom_cases = 2\n"
        ),
    );
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let c = tmp.path().join("c");
    assert!(run("run", &cfg, &a, &["--seed", "11"]).status.success());
    assert!(run("run", &cfg, &b, &["--seed", "11", "--jobs", "1"]).status.success());
    assert!(run("run", &cfg, &c, &["--seed", "12"]).status.success());
    let (fa, fb, fc) = (csv_files(&a), csv_files(&b), csv_files(&c));
    assert!(!fa.is_empty());
    assert_eq!(fa, fb);
    assert_ne!(fa, fc);
    assert_eq!(manifest(&a)["seed"], 11);
}

#[test]
fn epsilon_sweep_csv_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "sweep.toml",
        &format!("kind = \"epsilon_sweep\"\n{SINGLE_LIGHT}\n[numerics]\nepsilons = [0.2, 0.1]\na_bar = 0.5\n"),
    );
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(run("run", &cfg, &a, &[]).status.success());
    assert!(run("run", &cfg, &b, &[]).status.success());
    assert_eq!(csv_files(&a), csv_files(&b));
    assert!(manifest(&a)["results"]["runtime_s"].is_array());
}

#[test]
fn flux_limiter_and_plot_data() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "fl.json",
        r#"{
  "kind": "flux_limiter",
  "scenario": {
    "positions": [0.0],
    "branches": [{ "kind": "vee" }, { "kind": "quadratic" }],
    "schedules": [{ "switch_times": [0.0], "values": [0.5] }]
  },
  "numerics": { "dx": 0.05, "T": 4.0 }
}"#,
    );
    let out = tmp.path().join("run");
    let res = run("flux-limiter", &cfg, &out, &[]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let table = fs::read_to_string(out.join("plot/rho_lambda.csv")).unwrap();
    assert_eq!(table.lines().next(), Some("rho,lambda,lower,upper"));
    assert_eq!(table.lines().count(), 4);
    let model: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("model.json")).unwrap()).unwrap();
    assert!((model["A_bar"].as_f64().unwrap() - 0.5).abs() < 1e-9);

    fs::remove_dir_all(out.join("plot")).unwrap();
    let res = lab(&["plot-data", "--run", out.to_str().unwrap()]);
    assert!(res.status.success());
    assert_eq!(fs::read_to_string(out.join("plot/rho_lambda.csv")).unwrap(), table);

    fs::remove_file(out.join("rho_sweep.csv")).unwrap();
    let res = lab(&["plot-data", "--run", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("missing result file"));
}

#[test]
fn output_root_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "envrun.toml",
        "kind = \"cauchy\"\n[scenario]\nbranches = [{ kind = \"vee\" }]\n[numerics]\ndx = 0.1\n",
    );
    let root = tmp.path().join("root");
    let res = Command::new(BIN)
        .args(["run", "--config", cfg.to_str().unwrap()])
        .env("JUNCTION_LAB_OUT", &root)
        .output()
        .unwrap();
    assert!(res.status.success());
    assert!(root.join("envrun/manifest.json").is_file());
}

#[test]
fn shipped_configs_run() {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let tmp = tempfile::tempdir().unwrap();
    let mut n = 0;
    for entry in fs::read_dir(&configs).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_none_or(|e| e != "toml") {
            continue;
        }
        let out = tmp.path().join(path.file_stem().unwrap());
        let res = run("run", &path, &out, &[]);
        assert!(
            res.status.success(),
            "{}: {}",
            path.display(),
            String::from_utf8_lossy(&res.stderr)
        );
        n += 1;
    }
    assert!(n >= 5);
}
