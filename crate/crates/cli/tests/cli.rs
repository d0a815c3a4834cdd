use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/medcase")
}

fn cre(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cre"))
        .args(args)
        .env_remove("CRE_FIXTURES")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn claim(id: &str, baseline: f64) -> String {
    format!(r#"{{"id": "{id}", "label": "{id}", "category": "fact", "relatedness": "test", "baseline": {baseline}}}"#)
}

fn network(claims: &[(&str, f64)], constraints: &str) -> String {
    let claims: Vec<String> = claims.iter().map(|(id, b)| claim(id, *b)).collect();
    format!(r#"{{"claims": [{}], "constraints": [{constraints}]}}"#, claims.join(", "))
}

fn demo(dir: &TempDir) -> String {
    write(
        dir,
        "demo.json",
        &network(
            &[("A", 0.5), ("B", 0.2), ("C", 0.1)],
            r#"{"u": "A", "v": "B", "polarity": "positive"}, {"u": "B", "v": "C", "polarity": "negative"}"#,
        ),
    )
}

fn fixture_network() -> String {
    fixtures().join("network.json").to_str().unwrap().to_owned()
}

fn fixture_case(n: u8) -> String {
    fixtures().join(format!("case{n}.json")).to_str().unwrap().to_owned()
}

#[test]
fn validate_reports_diagnostics() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&cre(&["validate", &fixture_network()])), 0);

    let dangling = write(&dir, "dangling.json", &network(&[("A", 0.1)], r#"{"u": "A", "v": "GHOST", "polarity": "positive"}"#));
    let out = cre(&["validate", &dangling]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("GHOST"), "{}", stderr(&out));

    let dup = write(
        &dir,
        "dup.json",
        &network(
            &[("A", 0.1), ("B", 0.1)],
            r#"{"u": "A", "v": "B", "polarity": "positive"}, {"u": "B", "v": "A", "polarity": "positive"}"#,
        ),
    );
    assert_eq!(code(&cre(&["validate", &dup])), 2);

    let broken = write(&dir, "broken.json", "{\"claims\": [\n  {\"id\": ");
    let out = cre(&["validate", &broken]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));

    assert_eq!(code(&cre(&["validate", "/nonexistent/net.json"])), 2);
}

#[test]
fn exact_demo_report() {
    let dir = TempDir::new().unwrap();
    let out = cre(&["solve", &demo(&dir), "--engine", "exact"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = json(&out);
    assert_eq!(report["weight"], 2.0);
    assert_eq!(report["accepted"], serde_json::json!(["A", "B"]));
    assert_eq!(report["rejected"], serde_json::json!(["C"]));
    assert_eq!(report["optima_count"], 2);
    assert_eq!(report["enumerated"], 8);
    assert!(report["elapsed_ms"].is_number());
    assert_eq!(report["manifest"]["engine"], "exact");
}

#[test]
fn all_zero_baselines_accept_nothing() {
    let dir = TempDir::new().unwrap();
    let net = write(
        &dir,
        "zero.json",
        &network(&[("A", 0.0), ("B", 0.0)], r#"{"u": "A", "v": "B", "polarity": "positive"}"#),
    );
    let out = cre(&["solve", &net]);
    assert_eq!(code(&out), 0);
    let report = json(&out);
    assert_eq!(report["accepted"], serde_json::json!([]));
    assert_eq!(report["converged"], true);
    assert_eq!(report["iterations"], 5);
}

#[test]
fn fixture_case_one_scenario() {
    let dir = TempDir::new().unwrap();
    let trace = dir.path().join("trace.csv");
    let dot = dir.path().join("case1.dot");
    let out = cre(&[
        "solve",
        &fixture_network(),
        "--scenario",
        &fixture_case(1),
        "--trace",
        trace.to_str().unwrap(),
        "--dot",
        dot.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = json(&out);
    let accepted: Vec<&str> = report["accepted"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert!(accepted.contains(&"AIDR") && accepted.contains(&"DR"), "{accepted:?}");
    assert_eq!(report["manifest"]["solver"]["gamma"], 0.05);

    let csv = fs::read_to_string(&trace).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with("iter,AGS,") && header.ends_with(",PRAC,harmony"), "{header}");
    let dot = fs::read_to_string(&dot).unwrap();
    assert_eq!(dot.matches("status=").count(), 30);
}

#[test]
fn exact_on_full_fixture_exceeds_budget() {
    let out = cre(&["solve", &fixture_network(), "--engine", "exact"]);
    assert_eq!(code(&out), 4);
    assert!(stderr(&out).contains("30"), "{}", stderr(&out));
}

#[test]
fn exact_time_limit_maps_to_budget_exit() {
    let dir = TempDir::new().unwrap();
    let out = cre(&["solve", &demo(&dir), "--engine", "exact", "--time-limit-ms", "0"]);
    assert_eq!(code(&out), 4);
}

#[test]
fn non_convergence_still_writes_report() {
    let dir = TempDir::new().unwrap();
    let report = dir.path().join("report.json");
    let out = cre(&["solve", &demo(&dir), "--max-iters", "2", "--json", report.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    let report: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(report["converged"], false);
    assert_eq!(report["iterations"], 2);
}

#[test]
fn bad_solver_flags_are_input_errors() {
    let dir = TempDir::new().unwrap();
    let net = demo(&dir);
    assert_eq!(code(&cre(&["solve", &net, "--gamma", "1.5"])), 2);
    assert_eq!(code(&cre(&["solve", &net, "--epsilon", "0"])), 2);
    let scenario = write(&dir, "bad.json", r#"{"name": "bad", "overrides": {"Z": 0.5}}"#);
    assert_eq!(code(&cre(&["solve", &net, "--scenario", &scenario])), 2);
}

#[test]
fn solve_is_byte_deterministic() {
    let dir = TempDir::new().unwrap();
    let run = |tag: &str| {
        let json = dir.path().join(format!("{tag}.json"));
        let csv = dir.path().join(format!("{tag}.csv"));
        let out = cre(&[
            "solve",
            &fixture_network(),
            "--scenario",
            &fixture_case(2),
            "--json",
            json.to_str().unwrap(),
            "--trace",
            csv.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        (fs::read(json).unwrap(), fs::read(csv).unwrap())
    };
    let (a, b) = (run("a"), run("b"));
    assert_eq!(a.1, b.1);
    // reports echo their own output paths; everything else must match
    let strip = |bytes: &[u8]| String::from_utf8(bytes.to_vec()).unwrap().replace("/a.", "/x.").replace("/b.", "/x.");
    assert_eq!(strip(&a.0), strip(&b.0));
}

#[test]
fn sweep_runs_every_scenario() {
    let dir = TempDir::new().unwrap();
    let scenarios = dir.path().join("scenarios");
    fs::create_dir(&scenarios).unwrap();
    for n in 1..=3 {
        fs::copy(fixture_case(n), scenarios.join(format!("case{n}.json"))).unwrap();
    }
    let out = cre(&["solve", &fixture_network(), "--sweep", scenarios.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let reports = json(&out);
    let reports = reports.as_array().unwrap();
    assert_eq!(reports.len(), 3);
    assert!(reports[2]["manifest"]["scenario"].as_str().unwrap().ends_with("case3.json"));

    let outdir = dir.path().join("reports");
    let out = cre(&["solve", &fixture_network(), "--sweep", scenarios.to_str().unwrap(), "--json", outdir.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let single = cre(&["solve", &fixture_network(), "--scenario", scenarios.join("case3.json").to_str().unwrap()]);
    let swept: Value = serde_json::from_str(&fs::read_to_string(outdir.join("case3.json")).unwrap()).unwrap();
    assert_eq!(swept["accepted"], json(&single)["accepted"]);
    assert_eq!(swept["activations"], json(&single)["activations"]);
}

#[test]
fn investigate_closed_form_and_monte_carlo() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "inv.json", r#"{"mu0": 0, "mu1": 1, "sigma": 1, "prior_h0": 0.5, "k": 1, "tau": 1}"#);
    let out = cre(&["investigate", &cfg]);
    assert_eq!(code(&out), 0);
    let r = json(&out);
    assert!((r["p_a"].as_f64().unwrap() - 0.691_462_461_274_013_1).abs() < 1e-12);
    assert!((r["activation"].as_f64().unwrap() - 0.382_924_922_548_026_2).abs() < 1e-12);
    assert_eq!(r["method"], "closed-form");

    let mc = |seed: &str| cre(&["investigate", &cfg, "--method", "monte-carlo", "--seed", seed, "--trials", "100000"]);
    let (a, b) = (mc("5"), mc("5"));
    assert_eq!(a.stdout, b.stdout);
    let r = json(&a);
    assert_eq!(r["seed"], 5);
    let se = r["stderr"].as_f64().unwrap();
    assert!((r["p_a"].as_f64().unwrap() - 0.691_462_461_274_013_1).abs() <= 4.0 * se);

    let bad = write(&dir, "bad.json", r#"{"mu0": 1, "mu1": 1, "sigma": 1, "prior_h0": 0.5, "k": 1}"#);
    assert_eq!(code(&cre(&["investigate", &bad])), 2);
    let few = cre(&["investigate", &cfg, "--method", "monte-carlo", "--trials", "10"]);
    assert_eq!(code(&few), 2);
}

#[test]
fn bundled_cases_match() {
    for n in ["1", "2", "3"] {
        let out = cre(&["case", n]);
        assert_eq!(code(&out), 0, "case {n}: {}", stderr(&out));
        let r = json(&out);
        assert_eq!(r["matched"], true);
        assert_eq!(r["converged"], true);
        assert_eq!(r["rows"].as_array().unwrap().len(), 30);
    }
    assert_eq!(code(&cre(&["case", "4"])), 2);
    assert_eq!(code(&cre(&["case", "2", "--engine", "exact"])), 4);
}

#[test]
fn fixture_directory_override() {
    let dir = TempDir::new().unwrap();
    fs::copy(fixtures().join("network.json"), dir.path().join("network.json")).unwrap();
    // case 1 without its design-error evidence no longer blames the developer
    fs::write(dir.path().join("case1.json"), r#"{"name": "case1", "overrides": {"DE": -0.8}}"#).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_cre"))
        .args(["case", "1"])
        .env("CRE_FIXTURES", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 5, "{}", stderr(&out));
    let r = json(&out);
    assert_eq!(r["matched"], false);
    assert!(!r["mismatches"].as_array().unwrap().is_empty());
    assert!(stderr(&out).contains("mismatched"));

    let empty = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_cre"))
        .args(["case", "1"])
        .env("CRE_FIXTURES", empty.path())
        .output()
        .unwrap();
    assert_ne!(code(&out), 0);
}
