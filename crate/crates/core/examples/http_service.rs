//! Drives the session API in-process: list residuals, post a demonstration,
//! accept the preview, fetch the report.
//!
//! `migrate serve --in <dir>` exposes the same routes on a socket.

use axum::body::Body;
use axum::http::{Request, StatusCode};
use sqlmigrate::baseline::Converter;
use sqlmigrate::engine::RuleLibrary;
use sqlmigrate::server::{router, AppState};
use sqlmigrate::session::run_migration;
use sqlmigrate::verify::VerifyConfig;
use tower::ServiceExt;

async fn call(
    app: &axum::Router,
    method: &str,
    uri: &str,
    body: Option<String>,
) -> (StatusCode, serde_json::Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or_else(Body::empty, Body::from))
        .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = axum::body::to_bytes(res.into_body(), usize::MAX)
        .await
        .unwrap();
    (
        status,
        serde_json::from_slice(&bytes).unwrap_or(serde_json::Value::Null),
    )
}

#[tokio::main]
async fn main() -> sqlmigrate::Result<()> {
    let dir = std::env::temp_dir().join(format!("sqlmigrate-http-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| sqlmigrate::Error::io(&dir, e))?;
    let file = dir.join("a.sql");
    std::fs::write(
        &file,
        "DECLARE var1 VARCHAR(20) = NULL\nSELECT var1 + \"string\" AS var2\n",
    )
    .map_err(|e| sqlmigrate::Error::io(&file, e))?;

    let state = run_migration(
        Converter::shared(),
        &dir,
        RuleLibrary::new(),
        VerifyConfig::default(),
    )?;
    let app = router(AppState::new(Converter::default(), state, None), None);

    let (_, residuals) = call(&app, "GET", "/residuals", None).await;
    println!("residuals: {residuals}");

    let demo = serde_json::json!({
        "code": "E001",
        "target": "DECLARE var1 VARCHAR(20) DEFAULT NULL\nSELECT CONCAT(ISNULL(var1, \"\"), \"string\") AS var2",
    });
    let (status, preview) = call(&app, "POST", "/demonstrations", Some(demo.to_string())).await;
    println!("preview {status}: {}", preview["summary"]);

    let (status, _) = call(&app, "POST", "/rules/accept", Some(preview.to_string())).await;
    println!("accept {status}");
    let (status, again) = call(&app, "POST", "/rules/accept", Some(preview.to_string())).await;
    println!("accept again {status}: {}", again["error"]);

    let (_, segment) = call(&app, "GET", "/segments/a.sql%230", None).await;
    println!("converted: {}", segment["converted"]);
    let (_, report) = call(&app, "GET", "/report", None).await;
    println!("residual_count: {}", report["residual_count"]);

    std::fs::remove_dir_all(&dir).ok();
    Ok(())
}
