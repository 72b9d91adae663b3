//! One line per acceptance criterion. Criteria 1-8 run at full size; the
//! determinism criterion runs `accept --quick` through the binary twice.

use std::process::{Command, ExitCode};
use std::time::Instant;

use polymax_cli::acceptance::{criterion, runtime_limit, SuiteOptions};

const SEED: u64 = 7;

fn line(id: u8, passed: bool, secs: f64, body: &str) -> bool {
    let limit = runtime_limit(id);
    let ok = passed && secs <= limit;
    println!("criterion {id}: {} ({secs:.1} s of {limit:.0} s) {body}", if ok { "PASS" } else { "FAIL" });
    ok
}

fn quick_run() -> (Option<i32>, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_polymax"))
        .args(["accept", "--quick", "--seed", &SEED.to_string()])
        .env_remove("PARABOLIC_SEED")
        .output()
        .expect("run polymax");
    (out.status.code(), out.stdout)
}

fn main() -> ExitCode {
    let opts = SuiteOptions { quick: false, seed: SEED };
    let mut all = true;
    for id in 1..=8u8 {
        let start = Instant::now();
        let o = criterion(id, &opts);
        let secs = start.elapsed().as_secs_f64();
        let mut body = format!("{}: metric {:e} vs {:e}; {}", o.name, o.metric, o.tolerance, o.detail);
        for f in &o.failures {
            body.push_str(&format!("; violated: {f}"));
        }
        all &= line(id, o.passed, secs, &body);
    }

    let start = Instant::now();
    let (code_a, a) = quick_run();
    let (code_b, b) = quick_run();
    let secs = start.elapsed().as_secs_f64();
    let same = a == b;
    let passed = same && code_a == Some(0) && code_b == Some(0);
    all &= line(
        9,
        passed,
        secs,
        &format!(
            "determinism: exit codes {code_a:?}, {code_b:?}; outputs {} ({} bytes)",
            if same { "identical" } else { "differ" },
            a.len()
        ),
    );
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
