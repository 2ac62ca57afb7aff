use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dsp_core::class::ClassSet;
use dsp_core::gauge::FuchsianSystem;
use dsp_core::tuple::{certified, centralizer, MatrixTuple};
use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn dsp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dsp")).args(args).env_remove("DSP_SEED").output().unwrap()
}

fn report(out: &Output) -> Value {
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn criteria_on_threestrata() {
    let r = report(&dsp(&["criteria", path_str(&data("threestrata.classes.json"))]));
    let res = &r["result"];
    assert_eq!(res["alpha"]["lhs"], 6);
    assert_eq!(res["alpha"]["rhs"], 6);
    assert_eq!(res["dsp"]["status"], "necessary-conditions-hold");
    assert_eq!(res["weak_dsp"]["status"], "solvable");
    assert_eq!(r["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(r["seed"], 7);
}

#[test]
fn criteria_refuses_nilpotent_triple() {
    let r = report(&dsp(&["criteria", path_str(&data("nilpotent.classes.json"))]));
    assert_eq!(r["result"]["weak_dsp"]["status"], "inapplicable");
    assert_eq!(r["result"]["alpha"]["holds"], true);
    assert_eq!(r["result"]["beta"]["holds"], true);
}

#[test]
fn verify_s1() {
    let r = report(&dsp(&["verify", path_str(&data("s1.tuple.json"))]));
    let res = &r["result"];
    assert_eq!(res["residual_zero"], true);
    assert_eq!(res["centralizer_dimension"], 1);
    assert_eq!(res["irreducible"], false);
    assert_eq!(res["tangent_dimension"], 3);
}

#[test]
fn malformed_input_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"mode\": \"additive\", \"matrices\": [").unwrap();
    assert_eq!(dsp(&["verify", path_str(&bad)]).status.code(), Some(1));
    assert_eq!(dsp(&["verify", "/nonexistent/file.json"]).status.code(), Some(1));
    assert_eq!(dsp(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(dsp(&["gauge", path_str(&data("system.json")), "--lk", "1,7"]).status.code(), Some(1));
}

#[test]
fn seed_comes_from_flag_then_environment() {
    let file = data("s1.tuple.json");
    let env = Command::new(env!("CARGO_BIN_EXE_dsp"))
        .args(["verify", path_str(&file)])
        .env("DSP_SEED", "41")
        .output()
        .unwrap();
    assert_eq!(report(&env)["seed"], 41);
    let flag = Command::new(env!("CARGO_BIN_EXE_dsp"))
        .args(["verify", path_str(&file), "--seed", "5"])
        .env("DSP_SEED", "41")
        .output()
        .unwrap();
    assert_eq!(report(&flag)["seed"], 5);
}

#[test]
fn jnf_invariants() {
    let r = report(&dsp(&["jnf", "{a:[2,1]; b:[1]}", "--compare", "{a:[3]; b:[1]}"]));
    let res = &r["result"];
    assert_eq!(res["size"], 4);
    assert_eq!(res["class_dimension"], 10);
    assert_eq!(res["defect_r"], 2);
    assert_eq!(res["subordinate_to"]["holds"], true);
    assert_eq!(dsp(&["jnf", "{a:[1,2]}"]).status.code(), Some(1));
}

#[test]
fn genericity_shift_plan() {
    let r = report(&dsp(&["genericity", path_str(&data("threestrata.classes.json")), "--shift-class", "3"]));
    let res = &r["result"];
    assert_eq!(res["generic"], false);
    assert_eq!(res["relations"].as_array().unwrap().len(), 2);
    assert_eq!(res["shift_plan"]["vector"], serde_json::json!([1, -1]));
}

#[test]
fn gauge_procedure_and_walk() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("after.json");
    let r = report(&dsp(&["gauge", path_str(&data("system.json")), "--lk", "2,1", "--emit", path_str(&out)]));
    assert_eq!(r["result"]["eigenvalues_before"], serde_json::json!(["1", "4"]));
    assert_eq!(r["result"]["eigenvalues_after"], serde_json::json!(["2", "3"]));
    let sys: FuchsianSystem = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(serde_json::to_value(&sys).unwrap(), r["result"]["system"]);

    let r = report(&dsp(&["gauge", path_str(&data("system.json")), "--walk", "(2,-2)"]));
    let mut after: Vec<String> =
        r["result"]["eigenvalues_after"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().into()).collect();
    after.sort();
    assert_eq!(after, vec!["2", "3"]);
}

#[test]
fn ext_emits_irreducible_extension() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ext.json");
    let r = report(&dsp(&[
        "ext",
        path_str(&data("first.tuple.json")),
        path_str(&data("second.tuple.json")),
        "--emit",
        path_str(&out),
        "--irreducible",
    ]));
    assert_eq!(r["result"]["report"]["xi"], 2);
    assert_eq!(r["result"]["basis"].as_array().unwrap().len(), 2);
    let t: MatrixTuple = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(certified(&t));
    assert_eq!(r["result"]["emitted"]["verification"]["irreducible"], true);
}

#[test]
fn deform_exact_and_float() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("deformed.json");
    let args = |mode: &'static str| {
        vec![
            "deform".to_string(),
            path_str(&data("s1.tuple.json")).to_string(),
            "--direction-file".into(),
            path_str(&data("s1.directions.json")).to_string(),
            "--epsilon".into(),
            "1/16".into(),
            "--mode".into(),
            mode.into(),
        ]
    };
    let mut exact = args("exact");
    exact.extend(["--emit".to_string(), path_str(&out).to_string()]);
    let r = report(&dsp(&exact.iter().map(String::as_str).collect::<Vec<_>>()));
    assert_eq!(r["result"]["verification"]["residual_zero"], true);
    let t: MatrixTuple = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(certified(&t));

    let r = report(&dsp(&args("float").iter().map(String::as_str).collect::<Vec<_>>()));
    assert!(r["result"]["tuple"]["residual"].as_f64().unwrap() < 1e-9);
}

#[test]
fn solve_emits_certified_tuple_and_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let tuple = dir.path().join("tuple.json");
    let cert = dir.path().join("cert.json");
    let r = report(&dsp(&[
        "solve",
        "--classes",
        path_str(&data("tstrata.classes.json")),
        "--seed",
        "7",
        "--max-restarts",
        "32",
        "--emit",
        path_str(&tuple),
        "--emit-cert",
        path_str(&cert),
    ]));
    assert_eq!(r["result"]["outcome"], "solved");
    let text = fs::read_to_string(&tuple).unwrap();
    let t: MatrixTuple = serde_json::from_str(&text).unwrap();
    assert!(certified(&t));
    assert!(centralizer(&t).is_trivial());
    assert_eq!(serde_json::to_string_pretty(&t).unwrap() + "\n", text);
    let c: Value = serde_json::from_str(&fs::read_to_string(&cert).unwrap()).unwrap();
    assert_eq!(c["seed"], 7);
    assert_eq!(c["report"]["centralizer_dimension"], 1);
}

#[test]
fn solve_refusal_is_a_computed_result() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("classes.json");
    let d = |a: &str| format!("{{\"jnf\":\"{{a:[2]}}\",\"eigenvalues\":{{\"a\":\"{a}\"}}}}");
    fs::write(&f, format!("{{\"mode\":\"additive\",\"classes\":[{},{}]}}", d("1"), d("-1"))).unwrap();
    let r = report(&dsp(&["solve", "--classes", path_str(&f)]));
    assert_eq!(r["result"]["outcome"], "refused");
}

#[test]
fn class_files_round_trip() {
    for name in ["threestrata.classes.json", "tstrata.classes.json", "nilpotent.classes.json"] {
        let set: ClassSet = serde_json::from_str(&fs::read_to_string(data(name)).unwrap()).unwrap();
        let again: ClassSet = serde_json::from_str(&serde_json::to_string(&set).unwrap()).unwrap();
        assert_eq!(set, again);
    }
}

#[test]
fn batch_empty_directory() {
    let dir = tempfile::tempdir().unwrap();
    let r = report(&dsp(&["batch", path_str(dir.path())]));
    assert_eq!(r["result"]["files"], 0);
    assert_eq!(r["result"]["rows"], serde_json::json!([]));
}

#[test]
fn batch_rows_are_ordered_and_errors_isolated() {
    let dir = tempfile::tempdir().unwrap();
    fs::copy(data("threestrata.classes.json"), dir.path().join("a_threestrata.json")).unwrap();
    fs::copy(data("tstrata.classes.json"), dir.path().join("b_tstrata.json")).unwrap();
    let two = report(&dsp(&["batch", path_str(dir.path())]));
    assert_eq!(two["result"]["files"], 2);
    assert_eq!(two["result"]["failed"], 0);

    fs::write(dir.path().join("c_broken.json"), "not json").unwrap();
    let out_dir = dir.path().join("reports");
    let r = report(&dsp(&["batch", path_str(dir.path()), "--out-dir", path_str(&out_dir)]));
    let rows = r["result"]["rows"].as_array().unwrap();
    let files: Vec<&str> = rows.iter().map(|x| x["file"].as_str().unwrap()).collect();
    assert_eq!(files, vec!["a_threestrata.json", "b_tstrata.json", "c_broken.json"]);
    assert_eq!(rows.iter().map(|x| x["ok"].as_bool().unwrap()).collect::<Vec<_>>(), vec![true, true, false]);
    assert_eq!(r["result"]["failed"], 1);
    assert!(out_dir.join("a_threestrata.report.json").exists());
    assert!(!out_dir.join("c_broken.report.json").exists());

    let seq = report(&dsp(&["batch", path_str(dir.path()), "--sequential"]));
    assert_eq!(seq["result"]["rows"], r["result"]["rows"]);
}
