use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use plref_core::model::Program;
use plref_service::{router, AppState, VERSION_HEADER};

const READER: &str = include_str!("../../core/tests/fixtures/okeefe_reader.pl");

fn project(dir: &Path) -> Program {
    std::fs::write(dir.join("reader.pl"), READER).unwrap();
    std::fs::write(
        dir.join("project.plm"),
        "[files]\nreader.pl\n[roots]\nmake_reader/3\nreader_next/3\nreader_done/1\n",
    )
    .unwrap();
    Program::load(&dir.join("project.plm")).unwrap()
}

async fn call(st: &Arc<AppState>, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = router(st.clone()).oneshot(req).await.unwrap();
    let status = resp.status();
    let header: u64 = resp.headers()[VERSION_HEADER].to_str().unwrap().parse().unwrap();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let v: Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(v["version"].as_u64(), Some(header), "body and header versions agree");
    (status, v)
}

fn cut_suggestion(v: &Value) -> Option<String> {
    v["suggestions"]
        .as_array()
        .unwrap()
        .iter()
        .find(|s| s["kind"] == "cut-replaceable" && s["target"].as_str().unwrap().contains("reader_code/3"))
        .map(|s| s["id"].as_str().unwrap().to_string())
}

#[tokio::test]
async fn suggestions_include_cut_replaceable() {
    let dir = tempfile::tempdir().unwrap();
    let st = AppState::new(project(dir.path()));
    let (s, v) = call(&st, "GET", "/api/suggestions", None).await;
    assert_eq!(s, StatusCode::OK);
    assert!(cut_suggestion(&v).is_some(), "{v}");
    let (s, v) = call(&st, "GET", "/api/project", None).await;
    assert_eq!(s, StatusCode::OK);
    assert!(v["predicates"].as_array().unwrap().iter().any(|p| p == "user:reader_code/3"));
}

#[tokio::test]
async fn preview_apply_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let st = AppState::new(project(dir.path()));
    let (_, v) = call(&st, "GET", "/api/suggestions", None).await;
    let v0 = v["version"].as_u64().unwrap();
    let id = cut_suggestion(&v).unwrap();
    let (s, pv) = call(&st, "POST", "/api/preview", Some(json!({"suggestion_id": id}))).await;
    assert_eq!(s, StatusCode::OK, "{pv}");
    assert_eq!(pv["semantics_flag"], "preserving");
    assert!(pv["diff"].as_str().unwrap().contains("--- a/reader.pl"));
    let (s, ap) = call(&st, "POST", "/api/apply", Some(json!({"preview_id": pv["preview_id"]}))).await;
    assert_eq!(s, StatusCode::OK, "{ap}");
    assert!(ap["new_version"].as_u64().unwrap() > v0);
    let (_, v) = call(&st, "GET", "/api/suggestions", None).await;
    assert!(cut_suggestion(&v).is_none());
    let text = std::fs::read_to_string(dir.path().join("reader.pl")).unwrap();
    assert!(!text.contains('!'));

    // the old preview is now stale
    let (s, e) = call(&st, "POST", "/api/apply", Some(json!({"preview_id": pv["preview_id"]}))).await;
    assert_eq!(s, StatusCode::CONFLICT, "{e}");
}

#[tokio::test]
async fn stale_preview_is_rejected_with_409() {
    let dir = tempfile::tempdir().unwrap();
    let st = AppState::new(project(dir.path()));
    let rename = json!({"transform": "rename_predicate", "pred": "make_reader/3", "new_name": "reader_init"});
    let other = json!({"transform": "rename_predicate", "pred": "reader_done/1", "new_name": "finished"});
    let (_, a) = call(&st, "POST", "/api/preview", Some(rename)).await;
    let (_, b) = call(&st, "POST", "/api/preview", Some(other)).await;
    let (s, _) = call(&st, "POST", "/api/apply", Some(json!({"preview_id": a["preview_id"]}))).await;
    assert_eq!(s, StatusCode::OK);
    let (s, e) = call(&st, "POST", "/api/apply", Some(json!({"preview_id": b["preview_id"]}))).await;
    assert_eq!(s, StatusCode::CONFLICT, "{e}");
    assert_eq!(e["error"], "Stale");
}

#[tokio::test]
async fn concurrent_applies_one_wins() {
    let dir = tempfile::tempdir().unwrap();
    let st = AppState::new(project(dir.path()));
    let req = json!({"transform": "rename_predicate", "pred": "make_reader/3", "new_name": "reader_init"});
    let (_, a) = call(&st, "POST", "/api/preview", Some(req.clone())).await;
    let (_, b) = call(&st, "POST", "/api/preview", Some(req)).await;
    let (ra, rb) = tokio::join!(
        call(&st, "POST", "/api/apply", Some(json!({"preview_id": a["preview_id"]}))),
        call(&st, "POST", "/api/apply", Some(json!({"preview_id": b["preview_id"]}))),
    );
    let oks = [ra.0, rb.0].iter().filter(|s| **s == StatusCode::OK).count();
    assert_eq!(oks, 1);
    let text = std::fs::read_to_string(dir.path().join("reader.pl")).unwrap();
    assert_eq!(text.matches("reader_init(").count(), 1);
}

#[tokio::test]
async fn error_statuses() {
    let dir = tempfile::tempdir().unwrap();
    let st = AppState::new(project(dir.path()));
    let (s, e) = call(&st, "POST", "/api/preview", Some(json!({"transform": "no_such_thing"}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST, "{e}");
    let bad = json!({"transform": "reorder_arguments", "pred": "reader_next/3", "permutation": [1, 1, 3]});
    let (s, e) = call(&st, "POST", "/api/preview", Some(bad)).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(e["error"], "NotAPermutation");
    let (s, e) = call(
        &st,
        "POST",
        "/api/preview",
        Some(json!({"transform": "rename_predicate", "pred": "stream_position/2", "new_name": "x"})),
    )
    .await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(e["error"], "RenamesBuiltin");
    let (s, _) = call(&st, "GET", "/api/source?file=nope.pl", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, v) = call(&st, "GET", "/api/source?file=reader.pl", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["text"], READER);
}

#[tokio::test]
async fn changing_transform_needs_acceptance() {
    let dir = tempfile::tempdir().unwrap();
    let p = project(dir.path());
    let st = AppState::new(p);
    let req = json!({"transform": "output_after_commit", "pred": "reader_code/3", "positions": [3]});
    let (s, pv) = call(&st, "POST", "/api/preview", Some(req)).await;
    assert_eq!(s, StatusCode::OK, "{pv}");
    assert_eq!(pv["semantics_flag"], "changing");
    let (s, e) = call(&st, "POST", "/api/apply", Some(json!({"preview_id": pv["preview_id"]}))).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(e["error"], "SemanticsChangeNotAccepted");
    let (s, _) = call(
        &st,
        "POST",
        "/api/apply",
        Some(json!({"preview_id": pv["preview_id"], "accept_semantics_change": true})),
    )
    .await;
    assert_eq!(s, StatusCode::OK);
}

#[tokio::test]
async fn reject_hides_suggestion() {
    let dir = tempfile::tempdir().unwrap();
    let st = AppState::new(project(dir.path()));
    let (_, v) = call(&st, "GET", "/api/suggestions", None).await;
    let id = cut_suggestion(&v).unwrap();
    let (s, _) = call(&st, "POST", "/api/reject", Some(json!({"suggestion_id": id}))).await;
    assert_eq!(s, StatusCode::OK);
    let (_, v) = call(&st, "GET", "/api/suggestions", None).await;
    assert!(cut_suggestion(&v).is_none());
    assert_eq!(std::fs::read_to_string(dir.path().join("reader.pl")).unwrap(), READER);
}
