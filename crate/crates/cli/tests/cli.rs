use std::path::Path;
use std::process::{Command, Output};

fn brochette(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_brochette"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = brochette(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

const SWEEP: &[&str] = &[
    "sweep",
    "--experiment-id",
    "golden",
    "--seed",
    "7",
    "--event",
    "square:n=8",
    "--rho",
    "0.3",
    "--q",
    "0.45",
    "--grid",
    "0.4,0.5,0.6",
    "--samples",
    "400",
];

fn with_workers(base: &[&str], w: &str) -> Vec<String> {
    let mut v: Vec<String> = base.iter().map(|s| s.to_string()).collect();
    v.extend(["--workers".to_string(), w.to_string()]);
    v
}

#[test]
fn output_is_independent_of_worker_count() {
    let runs: Vec<String> = ["1", "4", "8"]
        .iter()
        .map(|w| {
            let args = with_workers(SWEEP, w);
            stdout(&args.iter().map(String::as_str).collect::<Vec<_>>())
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
}

#[test]
fn sweep_matches_golden_file() {
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/sweep_square8.csv");
    let got = stdout(SWEEP);
    let want = std::fs::read_to_string(&golden).expect("golden file present");
    assert_eq!(got, want);
}

#[test]
fn zero_samples_writes_only_the_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("empty.csv");
    stdout(&["estimate", "--samples", "0", "--out", out.to_str().unwrap()]);
    let text = std::fs::read_to_string(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2, "{text}");
    assert!(lines[0].starts_with("# schema=1"));
    assert!(lines[1].starts_with(
        "experiment_id,event,n,p,q,rho,eta,samples,successes,p_hat,stderr,seed,wall_time_ms"
    ));
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exp.json");
    std::fs::write(
        &path,
        r#"{"experiment_id": "from-file", "p": 0.6, "samples": 50, "event": "annulus:n=2"}"#,
    )
    .unwrap();
    let text = stdout(&["estimate", "--config", path.to_str().unwrap(), "--q", "0.7"]);
    let row = text.lines().nth(2).unwrap();
    assert!(
        row.starts_with("from-file,\"annulus:n=2;center=0,0\",2,0.6,0.7,"),
        "{row}"
    );
}

#[test]
fn invalid_configs_fail_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\n  \"samples\": 10,\n  \"sampels\": 10\n}").unwrap();
    let out = brochette(&["estimate", "--config", path.to_str().unwrap()]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("sampels") && err.contains("line 3"), "{err}");

    for args in [
        &["estimate", "--p", "1.5"][..],
        &["estimate", "--event", "square:n=0"],
        &["estimate", "--event", "nonsense"],
        &["sweep", "--axis", "rho", "--columns", "quenched"],
        &["renorm", "--check", "dependence", "--samples", "10"],
    ] {
        let out = brochette(args);
        assert!(!out.status.success(), "{args:?} should fail");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: "));
    }
}

#[test]
fn validate_passes_and_catches_a_flipped_dual() {
    let out = brochette(&["validate"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.lines().all(|l| l.starts_with("PASS ")), "{text}");

    let out = brochette(&["validate", "--inject-fault", "flipped-dual"]);
    assert!(!out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(
        text.lines().any(|l| l.starts_with("FAIL annulus")),
        "{text}"
    );
}

#[test]
fn timing_is_opt_in() {
    let plain = stdout(&["estimate", "--samples", "20"]);
    let row = plain.lines().nth(2).unwrap();
    assert_eq!(row.split(',').nth(12), Some(""));
    let timed = stdout(&["estimate", "--samples", "20", "--timing"]);
    let ms = timed
        .lines()
        .nth(2)
        .unwrap()
        .split(',')
        .nth(12)
        .unwrap()
        .to_string();
    assert!(ms.parse::<u64>().is_ok(), "{ms}");
}
