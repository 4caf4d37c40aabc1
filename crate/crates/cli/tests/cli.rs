use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("stakewise").chain(args.iter().copied());
    let code = stakewise_cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn ok(args: &[&str]) -> String {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "{args:?} failed: {err}");
    out
}

fn json(args: &[&str]) -> Value {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    serde_json::from_str(&ok(&full)).unwrap()
}

fn assert_schema(name: &str, instance: &Value) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{name}.schema.json"));
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(instance).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{name}: {errors:?}\n{instance:#}");
}

#[test]
fn best_stake_small_game() {
    let out = ok(&["best-stake", "--p", "3/5", "--goal", "4", "--capital", "1", "--horizon", "2"]);
    assert!(out.contains("stake  1"));
    assert!(out.contains("9/25 (0.3600000000)"));
    let v = json(&["best-stake", "--p", "3/5", "--goal", "4", "--capital", "1", "--horizon", "2"]);
    assert_eq!(v["stake"], 1);
    assert_eq!(v["value"]["value"], "9/25");
    assert_eq!(v["value"]["decimal"], "0.3600000000");
    assert_schema("best-stake", &v);
}

#[test]
fn analyze_three_dollar_game() {
    assert_eq!(
        ok(&["analyze", "--p", "1/3", "--goal", "3", "--strategy", "timid", "--measure", "winprob"]),
        "[1/7, 3/7]\n"
    );
    assert_eq!(
        ok(&["analyze", "--p", "1/3", "--goal", "3", "--strategy", "timid", "--measure", "ed"]),
        "[12/7, 15/7]\n"
    );
    let series = ok(&[
        "analyze", "--p", "1/3", "--goal", "3", "--strategy", "timid", "--measure", "pgf", "--series", "4",
    ]);
    assert!(series.starts_with("capital 1: [0, 2/3, 1/9, 4/27, 2/81]\n"), "{series}");
    for measure in ["winprob", "ed", "edw", "pgf", "pgfw"] {
        let v = json(&[
            "analyze", "--p", "1/3", "--goal", "3", "--strategy", "timid", "--measure", measure, "--series", "3",
        ]);
        assert_schema("analyze", &v);
    }
}

#[test]
fn best_strat_outputs() {
    let v = json(&["best-strat", "--p", "3/5", "--goal", "4", "--horizon", "2", "--full"]);
    assert_eq!(v["stakes"], serde_json::json!([1, 2, 1]));
    assert_eq!(v["table"].as_array().unwrap().len(), 15);
    assert_schema("best-strat", &v);
    let csv = ok(&["--format", "csv", "best-strat", "--p", "3/5", "--goal", "4", "--horizon", "2"]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("i,t,value,best_stake"));
    assert!(csv.contains("\n1,2,9/25,1\n"));
    let dec = ok(&["--format", "csv", "best-strat", "--p", "3/5", "--goal", "4", "--horizon", "2", "--decimals"]);
    assert!(dec.contains("\n1,2,0.3600000000,1\n"), "{dec}");
}

#[test]
fn story_keeps_going_after_a_bad_case() {
    let v = json(&["best-strat-story", "--case", "3/5:4:2", "--case", "1:4:2", "--case", "1/2:5:3"]);
    let items = v.as_array().unwrap();
    assert_eq!(items.len(), 3);
    assert!(items[1]["error"].is_string());
    assert_eq!(items[0]["stakes"], serde_json::json!([1, 2, 1]));
    assert_schema("best-strat-story", &v);
}

#[test]
fn horizon_eval_matches_best_stake_for_bold_play() {
    let v = json(&["horizon-eval", "--p", "3/5", "--goal", "4", "--strategy", "bold", "--horizon", "2"]);
    assert_eq!(v["values"][0]["value"]["value"], "9/25");
    assert_schema("horizon-eval", &v);
    let one = json(&[
        "horizon-eval", "--p", "3/5", "--goal", "4", "--strategy", "bold", "--horizon", "2", "--capital", "3",
    ]);
    assert_eq!(one["values"].as_array().unwrap().len(), 1);
    assert_eq!(one["values"][0]["value"]["value"], "21/25");
}

#[test]
fn searches_validate_and_write_grids() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.csv");
    let v = json(&[
        "search-bk", "--p", "3/5", "--goal", "20", "--capital", "10", "--horizon", "10", "--resolution", "1/4",
        "--grid", grid.to_str().unwrap(),
    ]);
    assert_schema("search", &v);
    assert_eq!(v["objective"], "horizon_win_prob");
    assert_eq!(v["grid"].as_array().unwrap().len(), v["evaluations"].as_u64().unwrap() as usize);
    let text = std::fs::read_to_string(&grid).unwrap();
    assert_eq!(text.lines().count(), 1 + v["evaluations"].as_u64().unwrap() as usize);

    let v = json(&[
        "kelly-contest", "--p", "3/5", "--goal", "20", "--capital", "10", "--resolution", "1/4", "--conf", "1/2",
    ]);
    assert_schema("search", &v);
    assert_eq!(v["objective"], "exp_duration");
    assert_eq!(v["constraint_unmet"], false);
}

#[test]
fn simulation_is_reproducible() {
    let args = ["simulate", "--p", "3/5", "--goal", "10", "--capital", "5", "--strategy", "timid", "--seed", "9"];
    let a = json(&args);
    assert_eq!(a, json(&args));
    assert_schema("simulate-trajectory", &a);
    let batch = [
        "simulate", "--p", "3/5", "--goal", "10", "--capital", "5", "--strategy", "kelly:1/5", "--games", "2000",
        "--seed", "4",
    ];
    let par = json(&batch);
    let mut serial_args = batch.to_vec();
    serial_args.push("--serial");
    assert_eq!(par, json(&serial_args));
    assert_schema("simulate-summary", &par);
    let opt = json(&[
        "simulate", "--p", "3/5", "--goal", "4", "--capital", "1", "--strategy", "optimal", "--horizon", "2",
        "--seed", "1",
    ]);
    assert_eq!(opt["rounds"][0]["stake"], 1);
    let sure = json(&[
        "simulate", "--p", "1", "--goal", "6", "--capital", "2", "--strategy", "timid", "--degenerate",
    ]);
    assert_eq!(sure["exit"], "winner");
    assert_eq!(sure["duration"], 4);
}

#[test]
fn strategy_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("s.json");
    let path = file.to_str().unwrap();
    let direct = ok(&[
        "--format", "json", "analyze", "--p", "3/5", "--goal", "12", "--strategy", "bk:1/3:1/2", "--measure",
        "edw", "--emit-strategy", path,
    ]);
    let via_file = ok(&["--format", "json", "analyze", "--strategy-file", path, "--measure", "edw"]);
    assert_eq!(direct, via_file);
    let stored: Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    assert_eq!(stored["N"], 12);
    assert_eq!(stored["p"], "3/5");
}

#[test]
fn exit_codes() {
    // Bad rational: usage error naming the token.
    let (code, _, err) = run(&["best-stake", "--p", "3/x", "--goal", "4", "--capital", "1", "--horizon", "2"]);
    assert_eq!(code, 2);
    assert!(err.contains("3/x"), "{err}");
    // Missing argument.
    assert_eq!(run(&["best-stake", "--p", "1/2"]).0, 2);
    // Unknown strategy family.
    assert_eq!(run(&["analyze", "--p", "1/2", "--goal", "4", "--strategy", "martingale", "--measure", "ed"]).0, 2);
    // Out-of-range probability: domain error.
    let (code, _, err) = run(&["best-stake", "--p", "3/2", "--goal", "4", "--capital", "1", "--horizon", "2"]);
    assert_eq!(code, 1);
    assert!(err.contains("3/2"), "{err}");
    // Capital outside the game.
    assert_eq!(run(&["best-stake", "--p", "1/2", "--goal", "4", "--capital", "4", "--horizon", "2"]).0, 1);
    // A batch needs an explicit seed.
    assert_eq!(
        run(&["simulate", "--p", "1/2", "--goal", "4", "--capital", "1", "--strategy", "bold", "--games", "5"]).0,
        2
    );
    // Help is a success.
    assert_eq!(run(&["--help"]).0, 0);
}

#[test]
fn binary_exit_codes_and_env_mode() {
    let bin = env!("CARGO_BIN_EXE_stakewise");
    let status = Command::new(bin)
        .args(["best-stake", "--p", "x", "--goal", "4", "--capital", "1", "--horizon", "2"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
    let out = Command::new(bin)
        .args(["--format", "json", "best-stake", "--p", "3/5", "--goal", "4", "--capital", "1", "--horizon", "2"])
        .env("HG_NUMERIC_MODE", "decimal")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["numeric"]["mode"], "decimal");
    assert_eq!(v["value"]["decimal"], "0.3600000000");
}
