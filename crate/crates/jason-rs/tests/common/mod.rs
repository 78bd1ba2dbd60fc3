#![allow(dead_code)]

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use jason_rs::core::{parse_program, StepClock};
use jason_rs::platform::{parse_accounts, Platform};
use jason_rs::{server, Runtime};
use serde_json::{json, Value};
use tower::ServiceExt;

pub struct Stack {
    pub runtime: Runtime,
    pub platform: Platform,
    pub app: Router,
}

/// A manually stepped runtime with the given agents, behind the full router.
pub fn stack(agents: &[(&str, &str)]) -> Stack {
    let runtime = Runtime::new(Box::new(StepClock::new(1_000, 1)));
    for (name, src) in agents {
        runtime.create_agent(name, parse_program(src).unwrap()).unwrap();
    }
    let platform = Platform::new(parse_accounts("alice:secret:im.bec3.com").unwrap(), runtime.clone());
    let app = server::app(platform.clone());
    Stack { runtime, platform, app }
}

pub struct Reply {
    pub status: StatusCode,
    pub headers: axum::http::HeaderMap,
    pub body: Value,
}

pub async fn send(app: &Router, method: Method, uri: &str, token: Option<&str>, body: Option<Value>) -> Reply {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(t) = token {
        req = req.header(header::AUTHORIZATION, format!("Bearer {t}"));
    }
    let req = match body {
        Some(b) => req.header(header::CONTENT_TYPE, "application/json").body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    raw(app, req).await
}

pub async fn raw(app: &Router, req: Request<Body>) -> Reply {
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let headers = resp.headers().clone();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let body = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    Reply { status, headers, body }
}

pub async fn login(app: &Router) -> String {
    let r = send(
        app,
        Method::POST,
        "/login",
        None,
        Some(json!({"username": "alice", "password": "secret", "service": "im.bec3.com"})),
    )
    .await;
    assert_eq!(r.status, StatusCode::OK);
    r.body["token"].as_str().unwrap().to_owned()
}

pub fn gauge(name: &str) -> Value {
    json!({"name": name, "path": format!("yard/{name}"), "type": "gauge", "details": "", "widget": "none", "mqtt": false})
}

/// Every error response carries exactly `error` and `detail` strings.
pub fn assert_error_schema(r: &Reply) {
    let obj = r.body.as_object().unwrap_or_else(|| panic!("error body is not an object: {}", r.body));
    assert_eq!(obj.len(), 2, "{}", r.body);
    assert!(obj["error"].is_string() && obj["detail"].is_string(), "{}", r.body);
}
