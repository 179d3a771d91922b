use std::process::{Command, Output};

fn hdx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hdx"))
        .args(args)
        .env_remove("HDX_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("utf-8 stderr")
}

/// Zeroes the timing fields, which are the only run-dependent values.
fn normalized_json(text: &str) -> serde_json::Value {
    let mut value: serde_json::Value = serde_json::from_str(text).expect("valid JSON report");
    value["total_wall_ms"] = 0.into();
    for check in value["checks"].as_array_mut().expect("checks array") {
        check["wall_ms"] = 0.into();
    }
    value
}

#[test]
fn bounds_zero_profile_tabulates_one_minus_one_over_k() {
    let out = hdx(&["bounds", "--profile", "[0,0,0]", "--k-max", "5"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("0.500000000000"), "{text}");
    assert!(text.contains("0.666666666667"), "{text}");
    assert!(text.contains("0.750000000000"), "{text}");
    // profile line, header, and rows k = 2, 3, 4 (k-max clamps to d = 4)
    assert_eq!(text.lines().count(), 5, "{text}");
}

#[test]
fn bounds_rejects_inadmissible_profile() {
    let out = hdx(&["bounds", "--profile", "[0.9,0.2]"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("admissib"), "{}", stderr(&out));
}

#[test]
fn analyze_passes_and_repeats_byte_identically() {
    let args = [
        "analyze",
        "--generate",
        "random:n=4,d=2,seed=3",
        "--seed",
        "7",
        "--restarts",
        "8",
        "--functions",
        "20",
        "--max-iterations",
        "800",
        "--format",
        "json",
    ];
    let first = hdx(&args);
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    let second = hdx(&args);
    assert_eq!(second.status.code(), Some(0));
    let a = normalized_json(&stdout(&first));
    let b = normalized_json(&stdout(&second));
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
    assert_eq!(a["schema"], 1);
    assert_eq!(a["seed"], 7);
}

#[test]
fn analyze_reads_instance_files_and_rejects_bad_ones() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("triangle.json");
    std::fs::write(
        &good,
        r#"{"d": 3, "ground_set_size": 3, "top_faces": [{"elements": [0, 1, 2], "weight": 1.0}]}"#,
    )
    .unwrap();
    let out = hdx(&[
        "analyze",
        "--input",
        good.to_str().unwrap(),
        "--checks",
        "structure,walks",
        "--functions",
        "20",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let bad = dir.path().join("mixed.json");
    std::fs::write(
        &bad,
        r#"{"d": 3, "ground_set_size": 4, "top_faces": [
            {"elements": [0, 1, 2], "weight": 1.0},
            {"elements": [0, 3], "weight": 1.0}
        ]}"#,
    )
    .unwrap();
    let out = hdx(&["analyze", "--input", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!stderr(&out).is_empty());

    let out = hdx(&[
        "analyze",
        "--input",
        dir.path().join("missing.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn analyze_requires_an_instance() {
    let out = hdx(&["analyze"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--input"), "{}", stderr(&out));
}

#[test]
fn seed_falls_back_to_env_and_flag_wins() {
    let base = [
        "analyze",
        "--generate",
        "complete:n=4,d=2",
        "--checks",
        "structure",
        "--functions",
        "10",
        "--format",
        "json",
    ];
    let out = Command::new(env!("CARGO_BIN_EXE_hdx"))
        .args(base)
        .env("HDX_SEED", "5")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(normalized_json(&stdout(&out))["seed"], 5);

    let out = Command::new(env!("CARGO_BIN_EXE_hdx"))
        .args(base)
        .args(["--seed", "9"])
        .env("HDX_SEED", "5")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(normalized_json(&stdout(&out))["seed"], 9);

    let out = Command::new(env!("CARGO_BIN_EXE_hdx"))
        .args(base)
        .env("HDX_SEED", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn entropy_subcommand_runs_only_entropy_checks() {
    let out = hdx(&[
        "entropy",
        "--generate",
        "complete:n=4,d=2",
        "--restarts",
        "6",
        "--functions",
        "10",
        "--max-iterations",
        "500",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("id,suite,"));
    for line in lines {
        assert!(line.starts_with("entropy/"), "{line}");
    }
}

#[test]
fn export_operators_writes_every_walk_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("ops");
    let out = hdx(&[
        "export-operators",
        "--generate",
        "complete:n=4,d=2",
        "--output",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    for name in [
        "up_0.csv",
        "up_1.csv",
        "rw_up_0.csv",
        "rw_up_1.csv",
        "down_1.csv",
        "down_2.csv",
        "rw_down_1.csv",
        "rw_down_2.csv",
    ] {
        assert!(out_dir.join(name).is_file(), "{name} missing");
    }
}

#[test]
fn report_output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = hdx(&[
        "analyze",
        "--generate",
        "complete:n=4,d=2",
        "--checks",
        "walks",
        "--functions",
        "10",
        "--format",
        "json",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(normalized_json(&text)["schema"], 1);
}
