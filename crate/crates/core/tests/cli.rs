use std::fs;
use std::path::{Path, PathBuf};

use euaf::cli::{run, RunManifest, EXIT_CONSTRUCTION, EXIT_OK, EXIT_VALIDATION};
use euaf::pointfit::FitResult;
use euaf::Network;
use serde_json::Value;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("euaf-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn call(dir: &Path, args: &[&str]) -> (i32, RunManifest) {
    let manifest = dir.join("run.manifest.json");
    let mut argv = vec!["euaf".to_string()];
    argv.extend(args.iter().map(|a| a.to_string()));
    argv.push("--manifest".into());
    argv.push(manifest.display().to_string());
    let code = run(argv);
    let m: RunManifest = serde_json::from_str(&fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(m.exit_code, code);
    (code, m)
}

fn p(dir: &Path, f: &str) -> String {
    dir.join(f).display().to_string()
}

fn json(path: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn outputs_parse(m: &RunManifest) {
    for out in &m.outputs {
        let text = fs::read_to_string(out).unwrap_or_else(|e| panic!("{out}: {e}"));
        if out.ends_with(".json") {
            serde_json::from_str::<Value>(&text).unwrap();
        } else {
            assert!(csv::Reader::from_reader(text.as_bytes()).records().all(|r| r.is_ok()));
        }
    }
}

#[test]
fn gadget_check() {
    let d = scratch("gadget");
    let (code, m) = call(&d, &["gadget", "--kind", "square", "--check", "--report", &p(&d, "g.json"), "--out", &p(&d, "sq.json")]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(m.subcommand, "gadget");
    outputs_parse(&m);
    assert!(json(&p(&d, "g.json"))["max_error"].as_f64().unwrap() <= 1e-12);

    let (code, m) = call(&d, &["verify", "--net", &p(&d, "sq.json"), "--target", "x2", "--grid", "10000", "--report", &p(&d, "v.json"), "--csv", &p(&d, "res.csv")]);
    assert_eq!(code, EXIT_OK);
    outputs_parse(&m);
    assert!(json(&p(&d, "v.json"))["sup_error"].as_f64().unwrap() <= 1e-12);
    let rows = fs::read_to_string(p(&d, "res.csv")).unwrap().lines().count();
    assert_eq!(rows, 10_001);

    let (code, _) = call(&d, &["verify", "--net", &p(&d, "sq.json"), "--target", "sin8", "--report", &p(&d, "w.json")]);
    assert_eq!(code, EXIT_OK);
    assert!(json(&p(&d, "w.json"))["sup_error"].as_f64().unwrap() > 0.1);
}

#[test]
fn pointfit_json() {
    let d = scratch("pointfit");
    let (code, m) = call(&d, &["pointfit", "--targets", "0.3,0.7", "--epsilon", "0.05", "--out", &p(&d, "fit.json")]);
    assert_eq!(code, EXIT_OK);
    let r: FitResult = serde_json::from_str(&fs::read_to_string(&m.outputs[0]).unwrap()).unwrap();
    assert!(r.satisfied && r.max_error < 0.05);
    let (code, _) = call(&d, &["pointfit", "--targets", "0.1,0.9,0.5,0.3", "--epsilon", "0.0001", "--budget", "5"]);
    assert_eq!(code, EXIT_CONSTRUCTION);
}

#[test]
fn fit1d_then_verify() {
    let d = scratch("fit1d");
    let (net, rep) = (p(&d, "net.json"), p(&d, "report.json"));
    let (code, m) = call(&d, &["fit1d", "--function", "sin8", "--a", "0", "--b", "1", "--epsilon", "0.25", "--out", &net, "--report", &rep]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(m.outputs, vec![net.clone(), rep.clone()]);
    outputs_parse(&m);
    let parsed = Network::from_json(&fs::read_to_string(&net).unwrap()).unwrap();
    assert_eq!((parsed.width(), parsed.depth()), (36, 5));
    let reported = json(&rep)["grid_sup_error"].as_f64().unwrap();
    assert!(reported < 0.25);
    let (code, _) = call(&d, &["verify", "--net", &net, "--target", "sin8", "--report", &p(&d, "v.json")]);
    assert_eq!(code, EXIT_OK);
    assert!(json(&p(&d, "v.json"))["sup_error"].as_f64().unwrap() <= reported + 1e-12);
}

#[test]
fn fit1d_from_samples() {
    let d = scratch("samples");
    let rows: String = (0..=1000).map(|i| {
        let x = i as f64 / 1000.0;
        format!("{x},{}\n", (3.0 * x).sin())
    }).collect();
    fs::write(d.join("f.csv"), format!("x,f\n{rows}")).unwrap();
    let (code, _) = call(&d, &["fit1d", "--function", &p(&d, "f.csv"), "--epsilon", "0.3", "--out", &p(&d, "n.json")]);
    assert_eq!(code, EXIT_OK);
    fs::write(d.join("short.csv"), "0,0\n1,1\n").unwrap();
    let (code, m) = call(&d, &["fit1d", "--function", &p(&d, "short.csv"), "--epsilon", "0.3"]);
    assert_eq!(code, EXIT_VALIDATION);
    assert!(m.error.unwrap().contains("1000"));
}

#[test]
fn construction_failure_still_reports() {
    let d = scratch("fail");
    let rep = p(&d, "r.json");
    let (code, m) = call(&d, &["fit1d", "--function", "osc", "--epsilon", "0.05", "--budget", "100", "--report", &rep]);
    assert_eq!(code, EXIT_CONSTRUCTION);
    assert_eq!(m.outputs, vec![rep.clone()]);
    assert_eq!(json(&rep)["status"], "failed");
}

#[test]
fn validation_errors() {
    let d = scratch("invalid");
    let (code, _) = call(&d, &["verify", "--net", &p(&d, "missing.json"), "--target", "x"]);
    assert_eq!(code, EXIT_VALIDATION);
    assert_eq!(run(["euaf", "gadget", "--kind", "square", "--bogus"]), EXIT_VALIDATION);
    assert_eq!(run(["euaf", "frobnicate"]), EXIT_VALIDATION);
    let (code, _) = call(&d, &["fit1d", "--function", "nosuchfn", "--epsilon", "0.3"]);
    assert_eq!(code, EXIT_VALIDATION);
    let (code, _) = call(&d, &["uaf", "--variant", "smooth", "--s", "9", "--eval", "1"]);
    assert_eq!(code, EXIT_VALIDATION);
}

#[test]
fn fitnd_and_classify() {
    let d = scratch("nd");
    let (code, m) = call(&d, &["fitnd", "--d", "2", "--builtin-target", "sum", "--epsilon", "0.1", "--out", &p(&d, "s.json"), "--report", &p(&d, "s.report.json")]);
    assert_eq!(code, EXIT_OK);
    outputs_parse(&m);
    let r = json(&p(&d, "s.report.json"));
    assert_eq!((r["width"].as_u64(), r["depth"].as_u64()), (Some(360), Some(11)));
    let (code, _) = call(&d, &["verify", "--net", &p(&d, "s.json"), "--target", "sum", "--report", &p(&d, "v.json")]);
    assert_eq!(code, EXIT_OK);
    assert!(json(&p(&d, "v.json"))["sup_error"].as_f64().unwrap() < 0.1);

    fs::write(
        d.join("regions.json"),
        r#"{"regions":[{"intervals":[[0.0,0.3]]},{"intervals":[[0.5,0.8]]}],"labels":[{"num":1,"den":2},{"num":-1,"den":3}]}"#,
    )
    .unwrap();
    let (code, m) = call(&d, &["classify", "--regions", &p(&d, "regions.json"), "--out", &p(&d, "c.json"), "--report", &p(&d, "c.report.json")]);
    assert_eq!(code, EXIT_OK);
    outputs_parse(&m);
    let net = Network::from_json(&fs::read_to_string(p(&d, "c.json")).unwrap()).unwrap();
    assert!((net.eval1(0.1) - 0.5).abs() < 1e-9);
    assert!((net.eval1(0.6) + 1.0 / 3.0).abs() < 1e-9);
}

#[test]
fn uaf_and_training() {
    let d = scratch("uaf");
    let (code, _) = call(&d, &["uaf", "--variant", "smooth", "--s", "1", "--eval", "1", "--report", &p(&d, "e.json")]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(json(&p(&d, "e.json"))["value"][0], 0.5);
    let (code, m) = call(&d, &["uaf", "--approximate-sigma", "--M", "2", "--epsilon", "0.1", "--out", &p(&d, "s.json")]);
    assert_eq!(code, EXIT_OK);
    outputs_parse(&m);
    let (code, m) = call(&d, &["train-demo", "--target", "sin8", "--activation", "relu", "--width", "8", "--depth", "1", "--steps", "200", "--seed", "3", "--out", &p(&d, "t.csv")]);
    assert_eq!(code, EXIT_OK);
    outputs_parse(&m);
    let text = fs::read_to_string(p(&d, "t.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "step,train_mse,test_mse,test_mae,test_max");
    assert_eq!(text.lines().count(), 1 + 3);
}

#[test]
fn default_manifest_sits_next_to_output() {
    let d = scratch("manifest");
    let out = p(&d, "sq.json");
    assert_eq!(run(["euaf", "gadget", "--kind", "square", "--out", &out]), EXIT_OK);
    let m: RunManifest = serde_json::from_str(&fs::read_to_string(d.join("sq.manifest.json")).unwrap()).unwrap();
    assert_eq!(m.outputs, vec![out]);
    assert_eq!(m.version, env!("CARGO_PKG_VERSION"));
    assert!(m.wall_time_seconds >= 0.0);
}

#[test]
fn malformed_regions_file_still_reports() {
    let d = scratch("bad-regions");
    fs::write(d.join("r.json"), r#"{"regions":[{"Intervals":[[0.0,0.3]]}],"labels":[]}"#).unwrap();
    let (code, m) = call(&d, &["classify", "--regions", &p(&d, "r.json"), "--report", &p(&d, "rep.json")]);
    assert_eq!(code, EXIT_VALIDATION);
    assert!(m.error.is_some());
    let rep = json(&p(&d, "rep.json"));
    assert_eq!(rep["status"], "failed");
    assert_eq!(rep["inputs"]["args"][0], "classify");
}

#[test]
fn negative_eval_points() {
    let d = scratch("neg-eval");
    let (code, _) = call(&d, &["uaf", "--variant", "smooth", "--s", "1", "--eval", "-1.5,0,2", "--report", &p(&d, "u.json")]);
    assert_eq!(code, EXIT_OK);
    let x: Vec<f64> = json(&p(&d, "u.json"))["x"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert_eq!(x, [-1.5, 0.0, 2.0]);
}
