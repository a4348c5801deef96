use std::path::PathBuf;
use std::process::{Command, Output};

fn posric(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_posric"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("posric-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn certify_positive_and_negative() {
    let o = posric(&["certify", "--algebra", "abelian1", "--k", "35", "--m", "1"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], "positive");
    assert_eq!(v["mode"], "sturm");
    assert!(v["witness_r"].is_null());

    let o = posric(&["certify", "--algebra", "abelian1", "--k", "1", "--m", "1"]);
    assert_eq!(code(&o), 1);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], "not_positive");
    assert!(v["witness_r"].as_f64().unwrap() > 0.0);

    let g = posric(&["certify", "--algebra", "abelian1", "--k", "35", "--m", "-1", "--mode", "grid"]);
    assert_eq!(code(&g), 0);
}

#[test]
fn sign_of_m_does_not_matter() {
    let a = posric(&["certify", "--algebra", "heisenberg3", "--k", "700", "--m", "2"]);
    let b = posric(&["certify", "--algebra", "heisenberg3", "--k", "700", "--m", "-2"]);
    let strip = |o: &Output| {
        let mut v: serde_json::Value = serde_json::from_str(&stdout(o)).unwrap();
        v["params"]["m"] = serde_json::Value::Null;
        v
    };
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn gysin_demo_output() {
    let o = posric(&["topology", "--demo", "gysin"]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    assert!(s.contains("|det| = 1"));
    assert!(s.contains("e^2 = 2*x1^x2^x3^x4"));
    let p = posric(&["topology", "--demo", "pontryagin", "--class", "x1^x2 + x3^x4", "--k", "5", "--m", "2"]);
    assert_eq!(code(&p), 0);
    assert!(stdout(&p).contains("p1 = -40*x1^x2^x3^x4"));
    let bad = posric(&["topology", "--demo", "pontryagin", "--class", "x1^^x2"]);
    assert_eq!(code(&bad), 2);
}

#[test]
fn scan_is_deterministic() {
    let a = scratch("a.csv");
    let b = scratch("b.csv");
    for p in [&a, &b] {
        let o = posric(&[
            "scan", "--algebra", "abelian1", "--k", "2", "--m", "1", "--r-max", "5", "--steps", "11", "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0);
    }
    let x = std::fs::read(&a).unwrap();
    assert_eq!(x, std::fs::read(&b).unwrap());
    let text = String::from_utf8(x).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "r,ric_rr,ric_u,ric_wprime,err_rr,err_u,offdiag_bound,gershgorin_min"
    );
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0);
    assert!((first[1] - 7.5).abs() < 1e-12);
    assert_eq!(text.lines().count(), 12);
    assert!(text.ends_with('\n'));
}

#[test]
fn json_reports_are_byte_identical() {
    let a = scratch("c1.json");
    let b = scratch("c2.json");
    for p in [&a, &b] {
        posric(&["mink", "--algebra", "abelian1", "--m", "1", "--out", p.to_str().unwrap()]);
    }
    let x = std::fs::read_to_string(&a).unwrap();
    assert_eq!(x, std::fs::read_to_string(&b).unwrap());
    let v: serde_json::Value = serde_json::from_str(&x).unwrap();
    assert!(v["min_k"].as_u64().unwrap() <= 35);
    assert_eq!(v["k0"], 32);
    assert_eq!(v["threshold"], 35);
}

#[test]
fn validate_files() {
    let good = scratch("heis.json");
    std::fs::write(&good, r#"{"name": "h3", "dim": 3, "brackets": [{"i": 2, "j": 3, "coeffs": {"1": "1"}}]}"#).unwrap();
    let o = posric(&["validate", good.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    // fails Jacobi: [X3,X4] = X2, [X2,X5] = X1
    let bad = scratch("bad.json");
    std::fs::write(
        &bad,
        r#"{"name": "bad", "dim": 5, "brackets": [{"i": 3, "j": 4, "coeffs": {"2": "1"}}, {"i": 2, "j": 5, "coeffs": {"1": "1"}}]}"#,
    )
    .unwrap();
    let before = std::fs::read(&bad).unwrap();
    let o = posric(&["validate", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("jacobi"));
    assert_eq!(std::fs::read(&bad).unwrap(), before);
    assert_eq!(code(&posric(&["validate", "/nonexistent/algebra.json"])), 2);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&posric(&[])), 2);
    assert_eq!(code(&posric(&["certify", "--algebra", "abelian1", "--k", "3"])), 2);
    assert_eq!(code(&posric(&["certify", "--algebra", "nosuch", "--k", "3", "--m", "1"])), 2);
    assert_eq!(code(&posric(&["certify", "--algebra", "abelian1", "--k", "3", "--m", "0"])), 2);
    assert_eq!(code(&posric(&["scan", "--algebra", "abelian1", "--k", "3", "--m", "1", "--steps", "1"])), 2);
    assert_eq!(code(&posric(&["oracle"])), 2);
}

#[test]
fn oracle_suite_passes() {
    let o = posric(&["oracle", "--suite"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["identities"].as_array().unwrap().len(), 9);
}

#[test]
fn catalog_lists_algebras() {
    let o = posric(&["catalog", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let names: Vec<&str> = v.as_array().unwrap().iter().map(|r| r["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"twisted4") && names.contains(&"ut4"));
    let t = v.as_array().unwrap().iter().find(|r| r["name"] == "twisted4").unwrap();
    assert_eq!(t["commutation_condition"], false);
    assert_eq!(t["c"], "1/2");
}
