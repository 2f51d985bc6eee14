use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use serde_json::{json, Value};
use sqlmigrate::baseline::Converter;
use sqlmigrate::engine::RuleLibrary;
use sqlmigrate::server::{router, AppState};
use sqlmigrate::session::{run_migration, SessionStore};
use sqlmigrate::verify::VerifyConfig;
use tower::ServiceExt;

const SOURCE: &str = "DECLARE var1 VARCHAR(20) = NULL\nSELECT var1 + \"string\" AS var2\n";
const TARGET: &str =
    "DECLARE var1 VARCHAR(20) DEFAULT NULL\nSELECT CONCAT(ISNULL(var1, \"\"), \"string\") AS var2";

async fn call(
    app: &Router,
    method: &str,
    uri: &str,
    body: Option<Value>,
) -> (StatusCode, Value, String) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or_else(Body::empty, |b| Body::from(b.to_string())))
        .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = http_body_util::BodyExt::collect(res.into_body())
        .await
        .unwrap()
        .to_bytes();
    let text = String::from_utf8_lossy(&bytes).into_owned();
    (
        status,
        serde_json::from_str(&text).unwrap_or(Value::Null),
        text,
    )
}

#[tokio::test]
async fn teach_loop_over_http() {
    let work = tempfile::tempdir().unwrap();
    let input = work.path().join("in");
    std::fs::create_dir_all(&input).unwrap();
    std::fs::write(input.join("a.sql"), SOURCE).unwrap();
    let ui = work.path().join("ui");
    std::fs::create_dir_all(&ui).unwrap();
    std::fs::write(ui.join("index.html"), "<p>console</p>").unwrap();

    let state = run_migration(
        Converter::shared(),
        &input,
        RuleLibrary::new(),
        VerifyConfig::default(),
    )
    .unwrap();
    let store = SessionStore::new(work.path().join("state"));
    let id = state.session_id.clone();
    let app = router(
        AppState::new(Converter::default(), state, Some(store.clone())),
        Some(ui),
    );

    let (status, session, _) = call(&app, "GET", "/session", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(session["residual_count"], 1);

    let (_, groups, _) = call(&app, "GET", "/residuals?code=E001", None).await;
    assert_eq!(groups[0]["count"], 1);
    assert_eq!(groups[0]["items"][0]["segment_id"], "a.sql#0");
    let (_, none, _) = call(&app, "GET", "/residuals?code=E004", None).await;
    assert_eq!(none, json!([]));

    let (status, err, _) = call(
        &app,
        "POST",
        "/demonstrations",
        Some(json!({"code": "E001", "target": "SELECT ("})),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(err["error"], "TargetParseError");

    let demo = json!({"code": "E001", "target": TARGET});
    let (status, first, _) = call(&app, "POST", "/demonstrations", Some(demo.clone())).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(first["sites"].as_array().unwrap().len(), 1);
    assert_eq!(first["sites"][0]["verification"]["accepted"], true);

    let (status, _, _) = call(&app, "POST", "/rules/reject", Some(first.clone())).await;
    assert_eq!(status, StatusCode::OK);
    let (_, session, _) = call(&app, "GET", "/session", None).await;
    assert_eq!(session["residual_count"], 1);
    assert_eq!(session["rules"], json!([]));

    let (status, stale, _) = call(&app, "POST", "/rules/accept", Some(first)).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(stale["error"], "StalePreview");

    let (_, second, _) = call(&app, "POST", "/demonstrations", Some(demo)).await;
    let (status, after, _) = call(&app, "POST", "/rules/accept", Some(second)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(after["residual_count"], 0);

    let (_, report, _) = call(&app, "GET", "/report", None).await;
    assert_eq!(report["learned_converted"], 1);
    assert_eq!(report["residual_count"], 0);

    let (status, seg, _) = call(&app, "GET", "/segments/a.sql%230", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(seg["converted"], TARGET);
    assert_eq!(seg["verification"]["accepted"], true);
    let (status, _, _) = call(&app, "GET", "/segments/missing.sql%230", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let (status, _, html) = call(&app, "GET", "/ui/index.html", None).await;
    assert_eq!(status, StatusCode::OK);
    assert!(html.contains("console"));

    assert_eq!(store.load(&id).unwrap().residual_count(), 0);
}
