use std::process::{Command, Output};

const BLACK_SCHOLES_PUT: f64 = 3.753_418_388_256_842_8;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_preint-qmc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

#[test]
fn study_over_the_full_ladder() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().to_str().unwrap();
    let args = [
        "study",
        "--target",
        "price",
        "--ladder",
        "paper",
        "--m",
        "16",
        "--l",
        "8",
        "--seed",
        "1",
        "--gv-cache",
        cache,
    ];
    let first = run(&args);
    assert!(
        first.status.success(),
        "{}",
        String::from_utf8_lossy(&first.stderr)
    );
    let text = String::from_utf8(first.stdout.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("method,target,x,m,N,L,mean,stderr,seconds")
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 44);
    for method in ["MC", "QMC", "MCPreint", "QMCPreint"] {
        assert_eq!(
            rows.iter()
                .filter(|r| r.starts_with(&format!("{method},")))
                .count(),
            11
        );
    }
    // One progress line per row.
    assert_eq!(String::from_utf8_lossy(&first.stderr).lines().count(), 44);
    // Second run reads the cached vectors and must reproduce the bytes.
    assert!(std::fs::read_dir(dir.path()).unwrap().count() >= 22);
    let second = run(&args);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn cdf_with_defaults_is_a_probability() {
    let out = run(&["cdf", "--x", "100", "--n", "1999", "--l", "8"]);
    let v = json(&out);
    let mean = v["mean"].as_f64().unwrap();
    assert!(mean > 0.0 && mean < 1.0);
    assert_eq!(v["method"], "QMCPreint");
    assert_eq!(v["target"], "cdf");
    assert_eq!(v["m"], 256);
    assert_eq!(v["N"], 1999);
    assert_eq!(v["L"], 8);
}

#[test]
fn one_step_price_is_black_scholes() {
    for method in ["qmc-preint", "mc", "qmc", "mc-preint"] {
        let v = json(&run(&[
            "price", "--m", "1", "--n", "4001", "--l", "8", "--method", method,
        ]));
        let (mean, se) = (v["mean"].as_f64().unwrap(), v["stderr"].as_f64().unwrap());
        assert!(
            (mean - BLACK_SCHOLES_PUT).abs() <= (4.0 * se).max(1e-12),
            "{method}: {mean} ± {se}"
        );
    }
}

#[test]
fn usage_errors_name_the_flag() {
    for (args, flag) in [
        (vec!["price", "--n", "100"], "--n"),
        (vec!["price", "--l", "1"], "--l"),
        (vec!["price", "--bogus", "3"], "--bogus"),
        (vec!["study", "--ladder", "101,200"], "--ladder"),
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(
            String::from_utf8_lossy(&out.stderr).contains(flag),
            "{args:?}"
        );
    }
}

#[test]
fn numeric_failures_exit_one() {
    let out = run(&[
        "pdf", "--x", "100", "--method", "mc", "--m", "4", "--n", "11", "--l", "2",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&[
        "price", "--sigma", "-1", "--m", "4", "--n", "11", "--l", "2",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_lists_every_flag() {
    let common = [
        "--s0",
        "--r",
        "--sigma",
        "--t",
        "--strike",
        "--m",
        "--n",
        "--l",
        "--seed",
        "--weights",
        "--delta",
        "--c2",
        "--out",
        "--format",
        "--threads",
        "--gv-cache",
    ];
    let extra: [(&str, &[&str]); 6] = [
        ("price", &[]),
        ("cdf", &["--x"]),
        ("pdf", &["--x"]),
        ("curve", &["--x-lo", "--x-hi", "--nodes"]),
        ("study", &["--ladder", "--x"]),
        ("cbc", &[]),
    ];
    for (sub, flags) in extra {
        let out = run(&[sub, "--help"]);
        assert!(out.status.success());
        let text = String::from_utf8(out.stdout).unwrap();
        for flag in common.iter().chain(flags) {
            assert!(
                text.contains(&format!("{flag} ")),
                "{sub} help lacks {flag}"
            );
        }
        assert!(text.contains("[default:"));
    }
}

#[test]
fn output_files_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = run(&[
            "curve",
            "--m",
            "8",
            "--n",
            "503",
            "--l",
            "4",
            "--nodes",
            "6",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let first = std::fs::read(&a).unwrap();
    assert_eq!(first, std::fs::read(&b).unwrap());
    assert_eq!(String::from_utf8(first).unwrap().lines().count(), 7);
}

#[test]
fn json_mirrors_csv_fields() {
    let out = run(&[
        "study", "--m", "4", "--ladder", "101,251", "--l", "4", "--format", "json",
    ]);
    let v = json(&out);
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 8);
    let keys: Vec<&str> = rows[0]
        .as_object()
        .unwrap()
        .keys()
        .map(String::as_str)
        .collect();
    for field in "method,target,x,m,N,L,mean,stderr,seconds".split(',') {
        assert!(keys.contains(&field), "missing {field}");
    }
}

#[test]
fn cbc_writes_a_cache_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("gv.txt");
    let out = run(&[
        "cbc",
        "--m",
        "8",
        "--n",
        "101",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "101 7");
    let z: Vec<u64> = lines[1]
        .split_whitespace()
        .map(|t| t.parse().unwrap())
        .collect();
    assert_eq!(z.len(), 7);
    assert!(z.iter().all(|&v| (1..101).contains(&v)));
    assert!(lines[2].parse::<f64>().unwrap() > 0.0);
}
