use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["curv4"];
    argv.extend_from_slice(args);
    let code = crate::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn report(args: &[&str]) -> Value {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(v["manifest"]["version"].is_string());
    v["report"].clone()
}

fn close(v: &Value, want: &[f64], tol: f64) -> bool {
    let got: Vec<f64> = v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    got.len() == want.len() && got.iter().zip(want).all(|(a, b)| (a - b).abs() <= tol)
}

#[test]
fn decompose_sphere() {
    let r = report(&["decompose", "--model", "S4"]);
    assert!((r["duality"]["R"].as_f64().unwrap() - 12.0).abs() < 1e-12);
    assert!(close(&r["duality"]["Wplus"]["eigs"], &[0.0; 3], 1e-12));
    assert!(close(&r["duality"]["Wminus"]["eigs"], &[0.0; 3], 1e-12));
    assert_eq!(r["standard"]["weyl"]["entries"].as_array().unwrap().len(), 0);
}

#[test]
fn decompose_scaled_model_parameter() {
    let r = report(&["decompose", "--model", "S4", "--param", "r=2"]);
    assert!((r["duality"]["R"].as_f64().unwrap() - 3.0).abs() < 1e-12);
}

#[test]
fn berger_cp2() {
    let r = report(&["berger", "--model", "CP2"]);
    assert!(close(&r["a"], &[1.0, 1.0, 4.0], 1e-12));
    assert!(close(&r["b"], &[-1.0, -1.0, 2.0], 1e-12));
    assert_eq!(r["frame"].as_array().unwrap().len(), 4);
    assert!(r["block_residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn berger_rejects_non_einstein() {
    let (code, _, err) = run(&["berger", "--model", "S2axS2b"]);
    assert_eq!(code, 2);
    let e: Value = serde_json::from_str(err.trim()).unwrap();
    assert_eq!(e["error"], "not_einstein");
}

#[test]
fn quadratic_and_classify() {
    let q = report(&["quadratic", "--model", "S4"]);
    assert_eq!(q["Q"].as_array().unwrap().len(), 256);
    assert!(q["cm_expansion_residual"].as_f64().unwrap() < 1e-12);
    let c = report(&["classify", "--model", "CP2", "--samples", "2", "--seed", "3"]);
    assert_eq!(c["classification"], serde_json::json!(["kahler_type_plus", "half_conformally_flat_minus"]));
}

#[test]
fn tensor_file_input() {
    let dir = std::env::temp_dir().join(format!("curv4-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("s4.json");
    let entries: Vec<String> = [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]
        .iter()
        .map(|(i, j)| format!("[{i},{j},{i},{j},1.0]"))
        .collect();
    std::fs::write(&path, format!("{{\"kind\":\"components\",\"entries\":[{}]}}", entries.join(","))).unwrap();
    let r = report(&["decompose", "--tensor", path.to_str().unwrap()]);
    assert!((r["duality"]["R"].as_f64().unwrap() - 12.0).abs() < 1e-12);

    std::fs::write(&path, r#"{"kind":"components","entries":[[1,2,1,2,1.0],[2,1,1,2,1.0]]}"#).unwrap();
    let (code, _, err) = run(&["decompose", "--tensor", path.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("\"input\""), "{err}");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn usage_errors_exit_two_with_json() {
    for args in [
        &["decompose"][..],
        &["frobnicate"],
        &["decompose", "--model", "K3"],
        &["verify", "--identity", "hamilton", "--chart", "s4", "--order", "3"],
        &["verify", "--identity", "prop32", "--chart", "flat"],
        &["verify", "--identity", "nonsense", "--chart", "flat"],
    ] {
        let (code, _, err) = run(args);
        assert_eq!(code, 2, "{args:?}");
        let e: Value = serde_json::from_str(err.trim()).unwrap();
        assert!(e["error"].is_string() && e["message"].is_string());
    }
}

#[test]
fn verify_weitzenbock_on_fubini_study() {
    let r = report(&["verify", "--identity", "weitzenbock-einstein", "--chart", "fs", "--points", "5"]);
    assert_eq!(r["nominal_order"], 4);
    for c in r["summary"].as_array().unwrap() {
        assert_eq!(c["vanishes"], true, "{c}");
    }
}

#[test]
fn verify_hamilton_order_two_converges() {
    let r = report(&["verify", "--identity", "hamilton", "--chart", "s4", "--order", "2", "--points", "3"]);
    let s = &r["summary"][0];
    assert_eq!(s["overall"], "converges");
    let p = s["mean_observed_order"].as_f64().unwrap();
    assert!((p - 2.0).abs() < 0.3, "{p}");
}

#[test]
fn verify_negative_control_is_rejected() {
    let (code, _, err) = run(&["verify", "--identity", "hamilton", "--chart", "fs-perturbed", "--points", "2"]);
    assert_eq!(code, 2);
    assert!(err.contains("not_einstein_chart"), "{err}");
}

#[test]
fn verify_structure_table() {
    let (code, out, err) = run(&[
        "verify", "--identity", "validity", "--structure", "bump", "--order", "2", "--points", "2", "--table",
    ]);
    assert_eq!(code, 0, "{err}");
    let mut lines = out.lines();
    assert_eq!(
        lines.next().unwrap(),
        "point,x1,x2,x3,x4,check,applies,level,h,residual,scale"
    );
    assert_eq!(lines.count(), 2 * 3);
}

#[test]
fn manifest_timestamp_sources() {
    let (_, out, _) = run(&["decompose", "--model", "R4", "--timestamp", "1700000000"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["manifest"]["timestamp"], 1_700_000_000u64);
    assert_eq!(v["manifest"]["command"], "decompose");
}

#[test]
fn suite_subset_passes() {
    let (code, out, _) = run(&["suite", "--only", "1,5"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 2);
    assert!(out.lines().all(|l| l.contains("[PASS]")));
}

#[test]
fn jobs_do_not_change_output() {
    let a = run(&["--jobs", "1", "suite", "--only", "2", "--json"]);
    let b = run(&["--jobs", "3", "suite", "--only", "2", "--json"]);
    assert_eq!(a.0, 0);
    let strip = |s: &str| {
        let mut v: Value = serde_json::from_str(s).unwrap();
        v["manifest"]["config"] = Value::Null;
        v
    };
    assert_eq!(strip(&a.1), strip(&b.1));
}

fn schema(name: &str) -> Value {
    let path = format!("{}/../../schemas/{name}.schema.json", env!("CARGO_MANIFEST_DIR"));
    serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap()
}

fn conforms(name: &str, doc: &Value) {
    let v = jsonschema::validator_for(&schema(name)).unwrap();
    let errors: Vec<String> = v.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{name}: {errors:#?}");
}

#[test]
fn outputs_match_shipped_schemas() {
    let cases: &[(&str, &[&str])] = &[
        ("decompose", &["decompose", "--model", "CP2"]),
        ("decompose", &["decompose", "--model", "S2axS2b"]),
        ("berger", &["berger", "--model", "S4"]),
        ("quadratic", &["quadratic", "--model", "CP2"]),
        ("quadratic", &["quadratic", "--model", "S2axS2b"]),
        ("classify", &["classify", "--model", "CP2"]),
        ("verify", &["verify", "--identity", "hamilton", "--chart", "s4", "--order", "2"]),
        ("verify", &["verify", "--identity", "lemma31", "--structure", "gaussian", "--order", "2"]),
        ("suite", &["suite", "--json", "--only", "1,5"]),
    ];
    for (name, args) in cases {
        let (code, out, err) = run(args);
        assert_eq!(code, 0, "{err}");
        conforms(name, &serde_json::from_str(&out).unwrap());
    }
    let (code, _, err) = run(&["berger", "--model", "S2axS2b"]);
    assert_eq!(code, 2);
    conforms("error", &serde_json::from_str(&err).unwrap());
    let (_, out, _) = run(&["decompose", "--model", "CP2"]);
    let weyl = serde_json::from_str::<Value>(&out).unwrap()["report"]["standard"]["weyl"].clone();
    conforms("tensor", &weyl);
}

#[test]
fn schemas_reject_malformed_reports() {
    let (_, out, _) = run(&["berger", "--model", "CP2"]);
    let mut doc: Value = serde_json::from_str(&out).unwrap();
    doc["report"]["a"] = serde_json::json!([1.0, 1.0]);
    let v = jsonschema::validator_for(&schema("berger")).unwrap();
    assert!(!v.is_valid(&doc));
}
