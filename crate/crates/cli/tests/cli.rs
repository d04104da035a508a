use std::path::Path;
use std::process::{Command, Output};

fn qtl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qtl")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn torus_info() {
    let o = qtl(&["torus", "info", "--preset", "e1"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("N=2, |Γ|=4, R = 2ℤ×2ℤ"));
    let o = qtl(&["torus", "info", "--preset", "e2"]);
    assert!(stdout(&o).contains("N=3, |Γ|=9, R = 3ℤ×3ℤ"));
}

#[test]
fn torus_from_spec_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.json");
    std::fs::write(&p, r#"{"d": 2, "z": 1, "k": [3]}"#).unwrap();
    let o = qtl(&["torus", "info", "--spec", p.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("N=3"));
}

#[test]
fn bad_spec_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.json");
    std::fs::write(&p, r#"{"d": 2, "z": 1, "k": [0]}"#).unwrap();
    let o = qtl(&["torus", "info", "--spec", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = qtl(&["torus", "info", "--spec", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = qtl(&["bracket", "eval", "--preset", "e1", "XT(0,0;1,2)", "XD(1,0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bracket_eval() {
    let o = qtl(&["bracket", "eval", "--preset", "e1", "XT(0,0;1,2)", "XT(0,0;2,1)", "--trunc", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "2*XT(0,0;1,1)");
    let o = qtl(&["bracket", "eval", "--preset", "comm2", "W(1;1,0)", "W(1;1,0)"]);
    assert_eq!(stdout(&o).trim(), "0");
}

#[test]
fn flipped_sigma_fails_with_counterexample() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = qtl(&["verify", "--suite", "xmatrix", "--preset", "e1", "--flip-sigma", "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let reports = json(&out);
    let cex = &reports[0]["failures"][0]["counterexample"];
    assert_eq!(cex["m"], serde_json::json!([0, 1]));
    assert_eq!(cex["n"], serde_json::json!([1, 0]));
}

#[test]
fn verify_jacobi_gtilde() {
    let o = qtl(&["verify", "jacobi", "--algebra", "gtilde", "--preset", "e1", "--jacobi-degree", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let reports: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(reports[0]["suite"], "jacobi-gtilde");
    assert_eq!(reports[0]["passed"], true);
    let o = qtl(&["verify", "jacobi", "--algebra", "lie", "--preset", "e1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn module_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let base = ["--preset", "e1", "--vw-preset", "natural"];

    let o = qtl(&[&["module", "build"], &base[..], &["--box", "1", "-o", &p("dump.json")]].concat());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("9 weights on box 1, multiplicity 2"));
    assert_eq!(json(Path::new(&p("dump.json")))["weights"].as_array().unwrap().len(), 9);

    let o = qtl(&[&["module", "build", "--tensor-field", "--alpha", "-1/3", "--alpha", "1/5"], &base[..], &["--box", "1"]].concat());
    assert!(o.status.success(), "{}", stderr(&o));

    let o = qtl(&[&["module", "roundtrip"], &base[..], &["--box", "1", "-o", &p("mod.json")]].concat());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("round trip reproduces the module"));

    let o = qtl(&["module", "verify", "--module", &p("mod.json")]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("module relations hold"));

    let o = qtl(&["module", "decompose", "--module", &p("mod.json"), "-o", &p("vw.json")]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("dim V = 2, dim W = 4"));

    let o = qtl(&["module", "compare", "--vw", &p("vw.json"), "--box", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));

    let o = qtl(&["export", "--module", &p("mod.json"), "--key", "XD(1,0;1)"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let grid: Vec<Vec<String>> = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!((grid.len(), grid[0].len()), (8, 8));
}

#[test]
fn corrupt_module_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("mod.json");
    let o = qtl(&["module", "roundtrip", "--preset", "e1", "--vw-preset", "trivial", "--box", "1", "-o", m.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut desc = json(&m);
    desc["generators"][0]["matrix"][0][0] = serde_json::json!("2:[5]");
    std::fs::write(&m, desc.to_string()).unwrap();
    let o = qtl(&["module", "verify", "--module", m.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn export_power() {
    let o = qtl(&["export", "--preset", "e1", "--power", "2,0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let grid: Vec<Vec<String>> = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(grid, vec![vec!["2:[1]", "2:[0]"], vec!["2:[0]", "2:[1]"]]);
    let o = qtl(&["export", "--preset", "e1", "--power", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn cache_hit_on_second_run() {
    let dir = tempfile::tempdir().unwrap();
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_qtl"))
            .args(["cache", "--preset", "e1", "--max-degree", "2"])
            .env("QTL_CACHE_DIR", dir.path())
            .output()
            .unwrap()
    };
    let first = run();
    assert!(first.status.success(), "{}", stderr(&first));
    assert!(stdout(&first).starts_with("Created"));
    let second = run();
    assert!(stdout(&second).starts_with("Hit"));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}
