use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bdalg"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(name)
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("bdalg-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stderr));
    })
}

#[test]
fn fingen_worked_instance() {
    let out = run(&[
        "fingen",
        scenario("fingen_five_thirds.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["result"]["b_min"], "1/3");
    assert_eq!(r["result"]["kappa"], 6);
    let gens: Vec<(i64, i64)> = r["result"]["oracle_minimal"]["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| {
            (
                e["s"][0].as_i64().unwrap(),
                e["divisor"]["P"].as_i64().unwrap(),
            )
        })
        .collect();
    assert_eq!(gens, [(1, 1), (2, 3), (3, 5)]);
}

#[test]
fn same_seed_same_bytes() {
    let a = tmp("a.json");
    let b = tmp("b.json");
    for p in [&a, &b] {
        let out = run(&[
            "suite",
            scenario("suite_saturation.json").to_str().unwrap(),
            "--seed",
            "11",
            "--jobs",
            "2",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let r: Value = serde_json::from_slice(&std::fs::read(&a).unwrap()).unwrap();
    assert_eq!(r["seed"], 11);
}

#[test]
fn malformed_documents() {
    let bad = tmp("bad.json");
    std::fs::write(&bad, "{\n  \"kind\": \"fingen\",\n  \"cone\": [1,\n").unwrap();
    let out = run(&["run", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(64));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 4"), "{err}");

    std::fs::write(
        &bad,
        r#"{"kind": "fingen", "cone": {"dim": 1, "generators": [["1"]]}}"#,
    )
    .unwrap();
    assert_eq!(run(&["run", bad.to_str().unwrap()]).status.code(), Some(65));

    let out = run(&[
        "hilbert",
        scenario("fingen_five_thirds.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(65));

    assert_eq!(
        run(&["run", "/nonexistent/scenario.json"]).status.code(),
        Some(66)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(64));
}

#[test]
fn operation_errors_exit_70() {
    let doc = tmp("outside.json");
    std::fs::write(
        &doc,
        r#"{"kind": "fingen", "cone": {"dim": 2, "generators": [["1","0"],["1","1"]]},
            "system": {"kind": "floor-linear", "forms": {"P": ["1", "1"]}}}"#,
    )
    .unwrap();
    assert_eq!(run(&["run", doc.to_str().unwrap()]).status.code(), Some(70));
}

#[test]
fn inconclusive_exits_3() {
    let doc = tmp("rational.json");
    std::fs::write(&doc, r#"{"kind": "diophantine", "target": ["1", "1/2"]}"#).unwrap();
    let out = run(&["diophantine", doc.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(report(&out)["verdict"], "inconclusive");
}

#[test]
fn violations_exit_2() {
    let doc = tmp("unsaturated.json");
    std::fs::write(
        &doc,
        r#"{"kind": "saturate", "system": {"kind": "floor-linear", "forms": {"P": ["3/2"]}},
            "saturation_f": {"P": "1/3"}, "bounds": {"s_bound": 10, "mu_nu_bound": 4}}"#,
    )
    .unwrap();
    let out = run(&["saturate", doc.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(&out)["verdict"], "fail");
}

#[test]
fn bundled_scenarios_pass() {
    for name in [
        "hilbert.json",
        "saturate.json",
        "straighten.json",
        "plcone.json",
        "fingen_rank_two.json",
        "counterexample.json",
    ] {
        let out = run(&["run", scenario(name).to_str().unwrap()]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{name}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn plots_and_overrides() {
    let svg = tmp("walk.svg");
    let out = run(&[
        "diophantine",
        scenario("diophantine_sqrt2.json").to_str().unwrap(),
        "--precision",
        "96",
        "--plot",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["scenario"]["bounds"]["precision"], 96);
    assert_eq!(r["result"]["approximant"]["q"], 2);
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));

    let out = run(&[
        "fingen",
        scenario("fingen_five_thirds.json").to_str().unwrap(),
        "--degree-bound",
        "10",
    ]);
    assert_eq!(
        report(&out)["result"]["certificates"][1]["parameters"]["degree_bound"],
        10
    );
}

#[test]
fn example33_needs_no_document() {
    let out = run(&["example33"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r = report(&out);
    assert_eq!(r["result"]["marked"][1]["value"], "3");
    assert_eq!(r["result"]["marked"][2]["value"], "47/16");
}
