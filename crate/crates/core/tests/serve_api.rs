use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use cluster_seeds::serve::{router, AppState};

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = match body {
        Some(b) => req.body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, value)
}

async fn session(app: &Router, body: Value) -> (String, Value) {
    let (st, v) = call(app, "POST", "/session", Some(body)).await;
    assert_eq!(st, StatusCode::CREATED, "{v}");
    (v["id"].as_str().unwrap().to_string(), v)
}

#[tokio::test]
async fn involution_over_the_wire() {
    let app = router(AppState::default());
    let (id, created) = session(&app, json!({"preset": "A2"})).await;
    let mutate = format!("/session/{id}/mutate");
    let (st, once) = call(&app, "POST", &mutate, Some(json!({"vertex": 1}))).await;
    assert_eq!(st, StatusCode::OK);
    assert_ne!(once["seed"], created["seed"]);
    let (_, twice) = call(&app, "POST", &mutate, Some(json!({"vertex": 1}))).await;
    assert_eq!(twice["seed"], created["seed"]);
    assert_eq!(twice["word"], "id");
}

#[tokio::test]
async fn pentagon_word_over_the_wire() {
    let app = router(AppState::default());
    let (id, created) = session(&app, json!({"preset": "A2"})).await;
    for _ in 0..5 {
        for v in [1, 2] {
            let (st, _) = call(&app, "POST", &format!("/session/{id}/mutate"), Some(json!({"vertex": v}))).await;
            assert_eq!(st, StatusCode::OK);
        }
    }
    let (_, now) = call(&app, "GET", &format!("/session/{id}"), None).await;
    assert_eq!(now["seed"], created["seed"]);
    assert_eq!(now["word"], "m1 m2 m1 m2 m1 m2 m1 m2 m1 m2");
    let (_, check) = call(&app, "GET", &format!("/session/{id}/check"), None).await;
    assert_eq!(check["consistent"], true);
    assert_eq!(check["steps"], 10);
}

#[tokio::test]
async fn word_is_normal_form() {
    let app = router(AppState::default());
    let (id, _) = session(&app, json!({"preset": "A2"})).await;
    call(&app, "POST", &format!("/session/{id}/mutate"), Some(json!({"vertex": 1}))).await;
    let (st, _) = call(&app, "POST", &format!("/session/{id}/permute"), Some(json!({"perm": "(1 2)"}))).await;
    assert_eq!(st, StatusCode::OK);
    let (_, w) = call(&app, "GET", &format!("/session/{id}/word"), None).await;
    assert_eq!(w["word"], "m1 | (1 2)");

    // a permutation followed by a mutation is rewritten past it
    call(&app, "POST", &format!("/session/{id}/mutate"), Some(json!({"vertex": 1}))).await;
    let (_, w) = call(&app, "GET", &format!("/session/{id}/word"), None).await;
    assert_eq!(w["word"], "m1 m2 | (1 2)");
    let (_, check) = call(&app, "GET", &format!("/session/{id}/check"), None).await;
    assert_eq!(check["consistent"], true);
}

#[tokio::test]
async fn undo_restores_previous_seed() {
    let app = router(AppState::default());
    let (id, created) = session(&app, json!({"preset": "A3"})).await;
    let (_, after_one) = call(&app, "POST", &format!("/session/{id}/mutate"), Some(json!({"vertex": 2}))).await;
    call(&app, "POST", &format!("/session/{id}/permute"), Some(json!({"perm": [3, 1, 2]}))).await;
    let (st, undone) = call(&app, "POST", &format!("/session/{id}/undo"), None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(undone["seed"], after_one["seed"]);
    assert_eq!(undone["word"], "m2");
    let (_, undone) = call(&app, "POST", &format!("/session/{id}/undo"), None).await;
    assert_eq!(undone["seed"], created["seed"]);
    let (st, err) = call(&app, "POST", &format!("/session/{id}/undo"), None).await;
    assert_eq!(st, StatusCode::CONFLICT);
    assert!(err["error"].is_string());
}

#[tokio::test]
async fn neighborhood_and_classinfo() {
    let app = router(AppState::default());
    let (id, _) = session(&app, json!({"preset": "A2"})).await;
    let (st, g) = call(&app, "GET", &format!("/session/{id}/neighborhood?depth=1"), None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(g["vertices"].as_array().unwrap().len(), 3);
    assert_eq!(g["edges"].as_array().unwrap().len(), 2);

    let (_, info) = call(&app, "GET", &format!("/session/{id}/classinfo"), None).await;
    assert_eq!(info["status"], "closed");
    assert_eq!(info["seed_count"], 10);
    assert_eq!(info["same-quiver"]["classes"], 2);
    assert_eq!(info["similar"]["classes"], 1);

    let small = router(AppState::new(200));
    let (id, _) = session(&small, json!({"preset": "markov3"})).await;
    let (_, info) = call(&small, "GET", &format!("/session/{id}/classinfo"), None).await;
    assert_eq!(info["status"], "unknown");
}

#[tokio::test]
async fn quiver_json_session_and_errors() {
    let app = router(AppState::default());
    let (st, v) = call(&app, "GET", "/session/nope", None).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
    assert!(v["error"].as_str().unwrap().contains("nope"));

    let (st, _) = call(&app, "POST", "/session", Some(json!({"preset": "E9"}))).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
    let (st, _) = call(&app, "POST", "/session", Some(json!({"n": 2, "b": [[0, 1], [1, 0]]}))).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);

    let (id, created) = session(&app, json!({"n": 3, "b": [[0, 1, 0], [-1, 0, 1], [0, -1, 0]], "frozen": [3]})).await;
    assert_eq!(created["seed"]["quiver"]["frozen"], json!([3]));
    let (st, v) = call(&app, "POST", &format!("/session/{id}/mutate"), Some(json!({"vertex": 3}))).await;
    assert_eq!(st, StatusCode::CONFLICT, "{v}");
    let (st, _) = call(&app, "POST", &format!("/session/{id}/mutate"), Some(json!({"vertex": 4}))).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
    let (st, _) = call(&app, "POST", &format!("/session/{id}/mutate"), Some(json!({"vertex": 0}))).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
    let (st, _) = call(&app, "POST", &format!("/session/{id}/permute"), Some(json!({"perm": "(1 4)"}))).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
    let (st, _) = call(&app, "POST", &format!("/session/{id}/permute"), Some(json!({"perm": "(2 3)"}))).await;
    assert_eq!(st, StatusCode::CONFLICT);
    let (st, _) = call(&app, "GET", &format!("/session/{id}/neighborhood?depth=99"), None).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);

    // failed requests leave the session untouched
    let (_, now) = call(&app, "GET", &format!("/session/{id}"), None).await;
    assert_eq!(now["seed"], created["seed"]);
    assert_eq!(now["history"], json!([]));
}

#[tokio::test]
async fn sessions_are_independent() {
    let app = router(AppState::default());
    let (a, created) = session(&app, json!({"preset": "A2"})).await;
    let (b, _) = session(&app, json!({"preset": "A2"})).await;
    assert_ne!(a, b);
    let handles: Vec<_> = (0..4)
        .map(|k| {
            let app = app.clone();
            let id = if k % 2 == 0 { a.clone() } else { b.clone() };
            tokio::spawn(async move {
                call(&app, "POST", &format!("/session/{id}/mutate"), Some(json!({"vertex": 1}))).await.0
            })
        })
        .collect();
    for h in handles {
        assert_eq!(h.await.unwrap(), StatusCode::OK);
    }
    for id in [&a, &b] {
        let (_, v) = call(&app, "GET", &format!("/session/{id}"), None).await;
        assert_eq!(v["seed"], created["seed"]);
    }
}
