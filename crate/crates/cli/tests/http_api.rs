use aspdebug::http::{router, AppState};
use axum::body::{to_bytes, Body};
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use serde_json::{json, Value};
use tower::ServiceExt;

const P_E: &str = "a :- not d.\nb :- a.\nc :- b.\nd :- c.\n#background.\n:- d.\n";

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(v) => req
            .header("content-type", "application/json")
            .body(Body::from(v.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap()
    };
    (status, value)
}

async fn create(app: &Router, body: Value) -> (String, Value) {
    let (status, v) = call(app, Method::POST, "/api/sessions", Some(body)).await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    (v["id"].as_str().unwrap().to_string(), v["state"].clone())
}

fn keys(v: &Value) -> Vec<String> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|d| {
            d["errors"]
                .as_array()
                .unwrap()
                .iter()
                .map(|e| format!("{}:{}", e["kind"].as_str().unwrap(), e["rule"].as_str().or(e["atom"].as_str()).unwrap_or("?")))
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect()
}

#[tokio::test]
async fn walkthrough_converges_on_third_rule() {
    let app = router(AppState::default());
    let (id, state) = create(&app, json!({ "program": P_E })).await;
    assert_eq!(state["status"], "awaiting_answer");
    assert_eq!(state["diagnoses"].as_array().unwrap().len(), 4);
    assert_eq!(state["query"]["atoms"], json!(["b"]));
    assert_eq!(state["interpretations"]["unsatisfied:r3"], json!([["a", "b"]]));
    assert_eq!(state["probabilities"]["unsatisfied:r1"], json!(0.25));

    let (status, got) = call(&app, Method::GET, &format!("/api/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(got, state);

    let uri = format!("/api/sessions/{id}/answer");
    let (status, s1) = call(&app, Method::POST, &uri, Some(json!({ "answer": "yes" }))).await;
    assert_eq!(status, StatusCode::OK, "{s1}");
    assert_eq!(s1["query"]["atoms"], json!(["c"]));
    assert_eq!(s1["diagnoses"].as_array().unwrap().len(), 2);

    let (status, s2) = call(&app, Method::POST, &uri, Some(json!({ "answer": "no" }))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(s2["status"], "done");
    assert_eq!(s2["query"], Value::Null);
    assert_eq!(keys(&s2["diagnoses"]), ["unsatisfied:r3"]);
    let history = s2["history"].as_array().unwrap();
    assert_eq!(history.len(), 2);
    assert_eq!(history[0]["query"], json!(["b"]));
    assert_eq!(history[0]["answer"], "yes");
    assert_eq!(history[1]["answer"], "no");

    let (status, err) = call(&app, Method::POST, &uri, Some(json!({ "answer": "yes" }))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(err["kind"], "no_pending_query");

    let (status, _) = call(&app, Method::DELETE, &format!("/api/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::NO_CONTENT);
    let (status, err) = call(&app, Method::GET, &format!("/api/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(err["kind"], "not_found");
    let (status, _) = call(&app, Method::DELETE, &format!("/api/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn entropy_strategy_and_priors_are_honoured() {
    let app = router(AppState::default());
    let body = json!({
        "program": P_E,
        "strategy": "entropy",
        "n": 4,
        "priors": { "fault_probs": { "unsatisfied:r1": 0.5 }, "default": 0.01 }
    });
    let (_, state) = create(&app, body).await;
    assert_eq!(state["strategy"], "entropy");
    let p = &state["probabilities"];
    assert!(p["unsatisfied:r1"].as_f64().unwrap() > p["unsatisfied:r2"].as_f64().unwrap());
    let total: f64 = p.as_object().unwrap().values().map(|v| v.as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);
}

#[tokio::test]
async fn bad_input_is_reported_as_json() {
    let app = router(AppState::default());
    let cases = [
        (json!({ "program": "a :- " }), StatusCode::BAD_REQUEST, "program"),
        (json!({ "nope": 1 }), StatusCode::BAD_REQUEST, "bad_request"),
        (json!({ "program": P_E, "n": 0 }), StatusCode::BAD_REQUEST, "config"),
        (json!({ "program": P_E, "strategy": "greedy" }), StatusCode::BAD_REQUEST, "bad_request"),
        (
            json!({ "program": P_E, "priors": { "fault_probs": { "unsatisfied:r1": 1.5 } } }),
            StatusCode::BAD_REQUEST,
            "query",
        ),
        (
            json!({ "program": P_E, "positive": [{ "pos": ["d"] }] }),
            StatusCode::UNPROCESSABLE_ENTITY,
            "infeasible",
        ),
    ];
    for (body, status, kind) in cases {
        let (got, err) = call(&app, Method::POST, "/api/sessions", Some(body.clone())).await;
        assert_eq!(got, status, "{body} -> {err}");
        assert_eq!(err["kind"], kind, "{body} -> {err}");
        assert!(err["error"].as_str().is_some_and(|s| !s.is_empty()));
    }

    let (id, _) = create(&app, json!({ "program": P_E })).await;
    let uri = format!("/api/sessions/{id}/answer");
    let (status, err) = call(&app, Method::POST, &uri, Some(json!({ "answer": "perhaps" }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(err["error"].as_str().unwrap().contains("perhaps"));
    let (status, _) = call(&app, Method::POST, "/api/sessions/missing/answer", Some(json!({ "answer": "yes" }))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&app, Method::GET, "/api/nothing", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn sessions_are_independent() {
    let app = router(AppState::default());
    let (a, _) = create(&app, json!({ "program": P_E })).await;
    let (b, _) = create(&app, json!({ "program": P_E })).await;
    assert_ne!(a, b);
    let (_, sa) = call(&app, Method::POST, &format!("/api/sessions/{a}/answer"), Some(json!({ "answer": "no" }))).await;
    let (_, sb) = call(&app, Method::GET, &format!("/api/sessions/{b}"), None).await;
    assert_eq!(sa["history"].as_array().unwrap().len(), 1);
    assert_eq!(sb["history"].as_array().unwrap().len(), 0);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_answers_are_serialized() {
    let app = router(AppState::default());
    let (id, _) = create(&app, json!({ "program": P_E })).await;
    let uri = format!("/api/sessions/{id}/answer");
    let tasks: Vec<_> = (0..8)
        .map(|_| {
            let (app, uri) = (app.clone(), uri.clone());
            tokio::spawn(async move { call(&app, Method::POST, &uri, Some(json!({ "answer": "yes" }))).await.0 })
        })
        .collect();
    let mut ok = 0;
    for t in tasks {
        match t.await.unwrap() {
            StatusCode::OK => ok += 1,
            StatusCode::CONFLICT => {}
            other => panic!("unexpected {other}"),
        }
    }
    let (_, state) = call(&app, Method::GET, &format!("/api/sessions/{id}"), None).await;
    let history = state["history"].as_array().unwrap().len();
    assert_eq!(ok, history);
    assert_eq!(state["status"], "done");
}
