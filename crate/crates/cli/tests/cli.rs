use std::process::{Command, Output};

fn polymax(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polymax")).args(args).env_remove("PARABOLIC_SEED").output().expect("run polymax")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn norm_eval_example() {
    let o = polymax(&["norm-eval", "--d", "2", "--point", "3,4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let last = text.lines().last().unwrap();
    assert_eq!(last, "2,\"[3,4]\",5,1e-12");
    assert!(text.lines().any(|l| l.starts_with("# seed_derivation:")));
}

#[test]
fn configuration_errors_exit_2() {
    assert_eq!(polymax(&["norm-eval", "--d", "3", "--point", "3,4"]).status.code(), Some(2));
    assert_eq!(polymax(&["norm-eval"]).status.code(), Some(2));
    assert_eq!(polymax(&["sigma-hat", "--point", "1", "--tol", "-1"]).status.code(), Some(2));
    assert_eq!(polymax(&["maxop-check", "--d", "3"]).status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_polymax")).args(["norm-eval", "--point", "1"]).env("PARABOLIC_SEED", "nope").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("PARABOLIC_SEED"));
}

#[test]
fn seed_sources() {
    let o = Command::new(env!("CARGO_BIN_EXE_polymax")).args(["norm-eval", "--point", "1"]).env("PARABOLIC_SEED", "42").output().unwrap();
    assert!(stdout(&o).contains("# seed: 42"));
    let dir = std::env::temp_dir().join(format!("polymax-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("cfg.json");
    std::fs::write(&cfg, r#"{"seed": 5, "point": [1, 2]}"#).unwrap();
    let o = polymax(&["norm-eval", "--config", cfg.to_str().unwrap()]);
    assert!(stdout(&o).contains("# seed: 5"));
    let o = polymax(&["norm-eval", "--config", cfg.to_str().unwrap(), "--seed", "6", "--point", "4"]);
    let text = stdout(&o);
    assert!(text.contains("# seed: 6") && text.ends_with("1,[4],4,1e-12\n"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn log_growth_table_is_reproducible() {
    let args = ["log-growth", "--d-list", "1,2", "--budget", "40", "--seed", "7", "--tol", "1e-4"];
    let a = polymax(&args);
    let b = polymax(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "d,sup_estimate,tail_bound,sup_over_log,evals,seed,budget_exhausted,argmax");
    assert_eq!(rows.len(), 3);
    assert!(!text.contains('\r'));
}

#[test]
fn json_output_and_files() {
    let dir = std::env::temp_dir().join(format!("polymax-json-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("s.json");
    let o = polymax(&["sigma-hat", "--point", "0.5,1", "--format", "json", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["command"], "sigma-hat");
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
    assert!(v["rows"][0]["error"].as_f64().unwrap() < 1e-9);
    std::fs::remove_dir_all(&dir).unwrap();
}
