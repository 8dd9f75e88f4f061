use std::path::PathBuf;
use std::process::{Command, Output};

use axum::body::Body;
use axum::http::Request;
use http_body_util::BodyExt;
use idss_service::{router, AppState, Config};
use serde_json::Value;
use tower::ServiceExt;

fn food() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/models/food_security.json")
}

fn idss(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_idss")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn food_arg() -> String {
    food().to_string_lossy().into_owned()
}

fn temp_model(name: &str, edit: impl FnOnce(&mut Value)) -> PathBuf {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(food()).unwrap()).unwrap();
    edit(&mut v);
    let path = std::env::temp_dir().join(format!("idss-cli-{}-{name}.json", std::process::id()));
    std::fs::write(&path, v.to_string()).unwrap();
    path
}

#[test]
fn validate_is_silent_on_success() {
    let o = idss(&["validate", &food_arg()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
}

#[test]
fn compile_lists_every_monomial() {
    let o = idss(&["compile", "--utility", "u1", &food_arg(), "--format", "json"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["version"], 1);
    assert_eq!(v["monomials"], 36);
    assert_eq!(v["terms"].as_array().unwrap().len(), 36);
    let table = stdout(&idss(&["compile", "--utility", "u1", &food_arg()]));
    assert!(table.starts_with("utility u1 (symbolic), error moments truncate: 36 monomials\n"));
}

#[test]
fn independences_one_per_line() {
    let o = idss(&["independences", &food_arg()]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 24);
    assert!(text.lines().any(|l| l == "E(t01 t04 t14) = E(t01) E(t04 t14)"));
    let summaries = stdout(&idss(&["summaries", &food_arg()]));
    assert!(summaries.lines().any(|l| l == "G3: E(t03 t23)"));
}

#[test]
fn multilinear_rank_output() {
    let o = idss(&["rank", &food_arg(), "--utility", "u2", "--format", "json"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["ranking"].as_array().unwrap().len(), 3);
    let additive: Value = serde_json::from_str(&stdout(&idss(&["rank", &food_arg(), "--format", "json"]))).unwrap();
    assert_eq!(additive["ranking"][0], "d0");
}

#[test]
fn output_is_byte_identical_across_runs() {
    for args in [
        vec!["compile", "--utility", "u2", "--format", "json"],
        vec!["score", "--error-moments", "gaussian"],
        vec!["oracle", "--samples", "20000", "--seed", "9"],
        vec!["paths"],
    ] {
        let mut full = args.clone();
        let model = food_arg();
        full.push(&model);
        assert_eq!(idss(&full).stdout, idss(&full).stdout, "{args:?}");
    }
}

#[test]
fn paths_for_one_vertex() {
    let text = stdout(&idss(&["paths", &food_arg(), "--vertex", "3"]));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "Y3 = t12 * t23 * t01' + t13 * t01' + t23 * t02' + t03'");
    assert_eq!(lines.len(), 5);
}

#[test]
fn provenance_flag_attaches_tuples() {
    let o = idss(&["compile", &food_arg(), "--provenance", "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["terms"].as_array().unwrap().iter().all(|t| !t["tuples"].as_array().unwrap().is_empty()));
}

#[test]
fn exit_codes() {
    let cyclic = temp_model("cycle", |v| {
        v["edges"] = serde_json::json!([[1, 2], [1, 3], [1, 4], [3, 2]]);
        v["equations"][1]["coefficients"] = serde_json::json!(["t12", "t32"]);
        v["equations"][2]["coefficients"] = serde_json::json!(["t13"]);
    });
    let cyclic = cyclic.to_string_lossy().into_owned();
    let no_variance = temp_model("variance", |v| {
        v["equations"][1].as_object_mut().unwrap().remove("variance");
    });
    let no_variance = no_variance.to_string_lossy().into_owned();
    let unowned = temp_model("owner", |v| {
        v["panels"].as_object_mut().unwrap().remove("2");
    });
    let unowned = unowned.to_string_lossy().into_owned();
    let random_psi = temp_model("psi", |v| {
        v["moments"]["entries"]["psi1"]["variance"] = serde_json::json!(1);
    });
    let random_psi = random_psi.to_string_lossy().into_owned();
    let model = food_arg();
    let cases: Vec<(Vec<&str>, i32)> = vec![
        (vec!["score", "/nonexistent/model.json"], 3),
        (vec!["validate", &no_variance], 4),
        (vec!["validate", &cyclic], 5),
        (vec!["score", &cyclic], 5),
        (vec!["validate", &unowned], 6),
        (vec!["compile", &model, "--utility", "u7"], 8),
        (vec!["compile", &model, "--policy", "d7"], 8),
        (vec!["score", &model, "--closure", "direct"], 10),
        (vec!["oracle", &random_psi, "--samples", "10"], 12),
        (vec!["bogus"], 2),
        (vec!["score", &model, "--no-such-flag"], 2),
    ];
    for (args, code) in cases {
        let o = idss(&args);
        assert_eq!(o.status.code(), Some(code), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = idss(&["validate", &no_variance]);
    assert!(stdout(&o).contains("vertex 2: error variance undeclared"));
    let o = idss(&["score", &model, "--closure", "direct"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("must deliver E("));
}

#[test]
fn moment_overrides_from_file() {
    let overrides = std::env::temp_dir().join(format!("idss-cli-{}-overrides.json", std::process::id()));
    std::fs::write(&overrides, r#"{"mode": "mean_variance", "entries": {"t04": {"mean": {"d0": -1000}}}}"#).unwrap();
    let o = idss(&["rank", &food_arg(), "--moments", &overrides.to_string_lossy(), "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_ne!(v["ranking"][0], "d0");
}

async fn service(method: &str, app: &axum::Router, uri: &str, body: String) -> (u16, String) {
    let request = Request::builder().method(method).uri(uri).body(Body::from(body)).unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status().as_u16();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

#[tokio::test]
async fn service_reports_match_the_command_line() {
    let config = Config::default();
    let app = router(AppState::new(&config), config.max_body_bytes);
    let model_text = std::fs::read_to_string(food()).unwrap();
    let model = food_arg();
    for utility in ["u1", "u2"] {
        let (status, created) = service("POST", &app, &format!("/models?utility={utility}"), model_text.clone()).await;
        assert_eq!(status, 201);
        let id = serde_json::from_str::<Value>(&created).unwrap()["id"].as_str().unwrap().to_string();
        let pairs: Vec<(&str, String, Vec<&str>)> = vec![
            ("GET", format!("/models/{id}/adequacy?view=conditions"), vec!["independences"]),
            ("GET", format!("/models/{id}/adequacy?view=summaries"), vec!["summaries"]),
            ("GET", format!("/models/{id}/ceu"), vec!["compile"]),
            ("GET", format!("/models/{id}/ceu?policy=d2"), vec!["compile", "--policy", "d2"]),
            ("POST", format!("/models/{id}/scores"), vec!["rank"]),
            ("POST", format!("/models/{id}/scores"), vec!["score"]),
        ];
        for (method, uri, cli) in pairs {
            let (status, body) = service(method, &app, &uri, String::new()).await;
            assert_eq!(status, 200, "{uri}");
            let mut args = cli.clone();
            args.extend(["--utility", utility, "--format", "json", &model]);
            assert_eq!(body, stdout(&idss(&args)), "{uri} vs {cli:?}");
        }
    }
}
