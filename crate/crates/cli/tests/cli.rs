use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

use scaling_horizon::{time_to_target, ScalingConfig, Scenario, SolveResult, TrajectorySeries};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_scaling-horizon"));
    cmd.env_remove("SCALING_HORIZON_PRESET_DIR");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir =
        std::env::temp_dir().join(format!("scaling-horizon-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

/// Values of a key/value text block.
fn field(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}:")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .trim()
        .to_string()
}

#[test]
fn eval_single_point() {
    let out = stdout(&["eval", "--kappa", "0.048", "--gamma", "0.5", "--t", "0"]);
    assert_eq!(field(&out, "relative_loss"), "1");
    assert!(!out.contains("loss:\n") && !out.lines().any(|l| l.starts_with("loss:")));

    let out = stdout(&[
        "eval", "--kappa", "0.048", "--gamma", "2", "--t", "1", "--l0", "2",
    ]);
    assert_eq!(field(&out, "relative_loss"), "0.946212");
    assert_eq!(field(&out, "loss"), "1.89242");
}

#[test]
fn eval_series_crosses_target_near_solver_time() {
    let csv = stdout(&[
        "eval",
        "--kappa",
        "0.048",
        "--gamma",
        "0.5",
        "--t-max",
        "25",
        "--samples",
        "251",
        "--format",
        "csv",
        "--precision",
        "17",
    ]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t_years,relative_loss,loss"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let f: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            (f[0], f[1])
        })
        .collect();
    assert_eq!(rows.len(), 251);
    let i = rows.iter().position(|&(_, r)| r <= 0.68).unwrap();
    let (t0, r0) = rows[i - 1];
    let (t1, r1) = rows[i];
    let crossing = t0 + (r0 - 0.68) / (r0 - r1) * (t1 - t0);
    let solved = time_to_target(&ScalingConfig::new(0.048, 0.5).unwrap(), 0.68)
        .unwrap()
        .time_to_target;
    assert!((crossing - solved).abs() < 0.01, "{crossing} vs {solved}");
    assert!((crossing - 20.1).abs() < 0.1);
}

#[test]
fn eval_json_round_trips() {
    let text = stdout(&[
        "eval", "--kappa", "0.4", "--gamma", "0.5", "--t-max", "25", "--format", "json",
    ]);
    let series: TrajectorySeries = serde_json::from_str(&text).unwrap();
    assert_eq!(series.points.len(), 101);
    assert_eq!(serde_json::to_string_pretty(&series).unwrap() + "\n", text);
}

#[test]
fn solve_outputs() {
    let out = stdout(&[
        "solve", "--kappa", "0.048", "--gamma", "0", "--target", "0.68",
    ]);
    assert_eq!(field(&out, "time_to_target"), "3085.01");
    assert_eq!(field(&out, "branch"), "static");

    let out = stdout(&[
        "solve",
        "--kappa",
        "0.048",
        "--gamma",
        "2",
        "--target",
        "0.68",
        "--sensitivity",
    ]);
    assert_eq!(field(&out, "time_to_target"), "6.03132");
    let exact: f64 = field(&out, "sensitivity_slope").parse().unwrap();
    let approx: f64 = field(&out, "first_order_slope").parse().unwrap();
    assert!((approx - 0.7213).abs() < 1e-4);
    assert!((exact / approx - 1.0).abs() < 0.01);

    let out = stdout(&[
        "solve", "--kappa", "0.048", "--gamma", "2", "--target", "1.0",
    ]);
    assert_eq!(field(&out, "time_to_target"), "0");

    let out = stdout(&[
        "solve", "--kappa", "0.048", "--gamma", "2", "--target", "0.68", "--tau", "-0.5",
    ]);
    assert_eq!(field(&out, "time_to_target"), "5.53148");
    assert_eq!(field(&out, "tau"), "-0.5");
}

#[test]
fn solve_json_round_trips_at_full_precision() {
    let text = stdout(&[
        "solve", "--kappa", "0.048", "--gamma", "3", "--target", "0.68", "--format", "json",
    ]);
    let v: Value = serde_json::from_str(&text).unwrap();
    let parsed: SolveResult = serde_json::from_value(v).unwrap();
    let direct = time_to_target(&ScalingConfig::new(0.048, 3.0).unwrap(), 0.68).unwrap();
    assert_eq!(
        parsed.time_to_target.to_bits(),
        direct.time_to_target.to_bits()
    );
}

#[test]
fn exit_codes() {
    assert_eq!(
        code(&["solve", "--kappa", "0.048", "--gamma", "2", "--target", "1.5"]),
        1
    );
    assert_eq!(
        code(&["eval", "--kappa", "0", "--gamma", "2", "--t", "1"]),
        1
    );
    assert_eq!(
        code(&["solve", "--kappa", "0.048", "--gamma", "2", "--target", "1e-320"]),
        1
    );
    assert_eq!(code(&["solve", "--kappa", "0.048"]), 2);
    assert_eq!(code(&["eval", "--kappa", "0.048", "--gamma", "2"]), 2);
    assert_eq!(code(&["figure", "4"]), 2);
    assert_eq!(code(&["--precision", "2", "figure", "1"]), 2);
    assert_eq!(code(&["--precision", "18", "figure", "1"]), 2);
    assert_eq!(code(&["bogus"]), 2);
    assert_eq!(code(&["scenario"]), 2);
}

#[test]
fn unknown_preset_lists_names() {
    let out = run(&["scenario", "--preset", "tortoise"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    for name in [
        "unfold-in-space",
        "unfold-in-time",
        "baseline",
        "turtle",
        "hare",
    ] {
        assert!(err.contains(name), "{err}");
    }
}

#[test]
fn malformed_json_reports_position() {
    let dir = scratch("malformed");
    let path = dir.join("bad.json");
    std::fs::write(&path, "{\n  \"name\": \"x\",\n  \"initial_fleet\": oops\n}").unwrap();
    let out = run(&["scenario", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 3"), "{err}");
    assert!(err.contains("column"), "{err}");
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn preset_table_with_published_values() {
    let csv = stdout(&[
        "scenario",
        "--preset",
        "all",
        "--paper-values",
        "--format",
        "csv",
    ]);
    assert!(csv.starts_with("scenario,initial_gpus,gamma,l0,"));
    let rows = csv_rows(&csv);
    let names: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(
        names,
        [
            "Unfold in Space",
            "Unfold in Time",
            "Baseline",
            "Turtle",
            "Hare"
        ]
    );
    let time = |i: usize| rows[i][8].parse::<f64>().unwrap();
    assert_eq!(time(0), 0.0);
    assert!((time(1) - 3085.0).abs() < 1.0);
    assert!((time(2) - 20.1).abs() < 0.2);
    assert!((time(3) - 5.30).abs() < 0.1);
    assert!((time(4) - 5.38).abs() < 0.1);
    assert_eq!(rows[0][1], "308601230");
}

#[test]
fn turtle_shows_formula_and_paper_l0() {
    let out = stdout(&["scenario", "--preset", "Turtle"]);
    let row = out.lines().nth(1).unwrap();
    let cells: Vec<&str> = row.split_whitespace().collect();
    assert_eq!(cells[0], "Turtle");
    assert_eq!(cells[3], "1.11686");
    assert_eq!(cells[5], "1.12");
}

#[test]
fn compare_sorts_by_time() {
    let dir = scratch("compare");
    let path = dir.join("presets.json");
    let list: Vec<Scenario> = scaling_horizon::presets();
    std::fs::write(&path, serde_json::to_string(&list).unwrap()).unwrap();
    let csv = stdout(&[
        "scenario",
        "--compare",
        path.to_str().unwrap(),
        "--target",
        "0.68",
        "--format",
        "csv",
    ]);
    let times: Vec<f64> = csv_rows(&csv)
        .iter()
        .map(|r| r[8].parse().unwrap())
        .collect();
    assert_eq!(times.len(), 5);
    assert!(times.windows(2).all(|w| w[0] <= w[1]), "{times:?}");
}

#[test]
fn preset_dir_adds_scenarios() {
    let dir = scratch("presets");
    let extra = Scenario {
        name: "Sprint".into(),
        initial_fleet: 50_000,
        baseline_fleet: 100_000,
        gamma: 1.0,
        kappa: 0.048,
        l_init: 1.0,
        target_loss: 0.68,
        paper_reported: None,
    };
    std::fs::write(
        dir.join("sprint.json"),
        serde_json::to_string(&extra).unwrap(),
    )
    .unwrap();
    let out = bin()
        .args(["scenario", "--preset", "sprint", "--format", "json"])
        .env("SCALING_HORIZON_PRESET_DIR", &dir)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v[0]["name"], "Sprint");

    let all = bin()
        .args(["scenario", "--preset", "all", "--format", "csv"])
        .env("SCALING_HORIZON_PRESET_DIR", &dir)
        .output()
        .unwrap();
    assert_eq!(csv_rows(&String::from_utf8(all.stdout).unwrap()).len(), 6);
}

#[test]
fn account_tables() {
    let text = stdout(&["account", "--builtin", "deepseek-llama"]);
    assert!(text.contains("DeepSeek-V3"));
    let csv = stdout(&["account", "--format", "csv"]);
    let rows = csv_rows(&csv);
    assert!(csv.starts_with(
        "model,params_n,tokens_d,logical_compute,reference_gpu_hours,relative_efficiency\n"
    ));
    assert_eq!(rows[0][3], "5.95848e+25");
    assert_eq!(rows[0][4], "2.224e+06");
    assert_eq!(rows[1][5], "1");

    let dir = scratch("account");
    let path = dir.join("one.json");
    std::fs::write(
        &path,
        r#"{"name": "solo", "params_n": 7e9, "tokens_d": 2e12, "gpu_hours": 1e5, "equivalence_factor": 1.0}"#,
    )
    .unwrap();
    let csv = stdout(&["account", path.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(csv_rows(&csv)[0][5], "1");
}

#[test]
fn figure_series() {
    let csv = stdout(&["figure", "1"]);
    let rows = csv_rows(&csv);
    let mut labels: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    labels.dedup();
    assert_eq!(labels.len(), 6);
    for label in &labels {
        let first = rows.iter().find(|r| r[0] == *label).unwrap();
        assert_eq!(first[3], "0");
        assert_eq!(first[4], "1");
    }
    assert!(rows.iter().all(|r| r[5] == "0.68"));

    let rows = csv_rows(&stdout(&["figure", "3"]));
    for r in rows.iter().filter(|r| r[0] == "0.5") {
        let target: f64 = r[1].parse().unwrap();
        let t: f64 = r[2].parse().unwrap();
        if target <= 0.7 {
            assert!(t >= 15.0, "{r:?}");
        }
    }

    let rows = csv_rows(&stdout(&["figure", "2", "--precision", "17"]));
    let spread = |g: &str| {
        let ts: Vec<f64> = rows
            .iter()
            .filter(|r| r[1] == g)
            .map(|r| r[3].parse().unwrap())
            .collect();
        ts.last().unwrap() - ts.first().unwrap()
    };
    let spreads: Vec<f64> = ["0.5", "1", "2", "3"].iter().map(|g| spread(g)).collect();
    assert!(spreads.windows(2).all(|w| w[0] > w[1]), "{spreads:?}");
}

#[test]
fn output_is_deterministic_and_writes_files() {
    let args = ["figure", "2", "--precision", "9"];
    assert_eq!(stdout(&args), stdout(&args));
    let dir = scratch("output");
    let path = dir.join("fig3.csv");
    let printed = stdout(&["figure", "3"]);
    stdout(&["figure", "3", "--output", path.to_str().unwrap()]);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), printed);
}
