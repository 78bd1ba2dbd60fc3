//! HTTP facade over the agent runtime.
//!
//! | method      | path                             | result                |
//! |-------------|----------------------------------|-----------------------|
//! | POST, PUT   | `/{agent}` or `/{agent}/`        | 202 `{agent, seq}`    |
//! | GET         | `/{agent}/decision`              | 200 decision or 204   |
//! | DELETE      | `/{agent}/percepts/{predicate}`  | 204                   |
//! | GET         | `/{agent}/beliefs`               | 200 sorted list       |

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use jason_rs_core::term::is_atom_name;
use jason_rs_core::{Decimal, Decision, Literal, Term};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::ApiError;
use crate::runtime::{Runtime, RuntimeError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Receipt {
    pub agent: String,
    pub seq: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionBody {
    pub decision: String,
    pub seq: u64,
    pub timestamp_ms: u64,
}

impl From<&Decision> for DecisionBody {
    fn from(d: &Decision) -> Self {
        DecisionBody { decision: d.content.to_string(), seq: d.seq, timestamp_ms: d.timestamp_ms }
    }
}

impl From<RuntimeError> for ApiError {
    fn from(e: RuntimeError) -> Self {
        match e {
            RuntimeError::UnknownAgent(name) => ApiError::unknown_agent(&name),
            other => ApiError::unprocessable(other.to_string()),
        }
    }
}

/// Rejects anything but a JSON body and parses it.
pub fn json_body(headers: &HeaderMap, body: &Bytes) -> Result<Value, ApiError> {
    let content_type = headers.get(header::CONTENT_TYPE).and_then(|v| v.to_str().ok()).unwrap_or("");
    let mut parts = content_type.split(';').map(str::trim);
    let mime = parts.next().unwrap_or("");
    let charset_ok = parts
        .filter_map(|p| p.split_once('='))
        .filter(|(k, _)| k.trim().eq_ignore_ascii_case("charset"))
        .all(|(_, v)| v.trim().trim_matches('"').eq_ignore_ascii_case("utf-8"));
    if !mime.eq_ignore_ascii_case("application/json") || !charset_ok {
        return Err(ApiError::new(
            StatusCode::UNSUPPORTED_MEDIA_TYPE,
            "unsupported_media_type",
            format!("expected application/json, got `{content_type}`"),
        ));
    }
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid JSON: {e}")))
}

/// Maps a JSON number to an exact decimal; fails on overflow or excess precision.
pub fn number_to_term(n: &serde_json::Number) -> Result<Term, ApiError> {
    n.to_string()
        .parse::<Decimal>()
        .map(Term::Num)
        .map_err(|e| ApiError::unprocessable(format!("number {n} cannot be represented: {e}")))
}

/// number → Num, text → Atom when it is a valid atom name else Str,
/// boolean → `true`/`false`. Null is unmappable; arrays and objects are not flat.
pub fn scalar_to_term(v: &Value) -> Result<Term, ApiError> {
    match v {
        Value::Number(n) => number_to_term(n),
        Value::String(s) if is_atom_name(s) => Ok(Term::Atom(s.clone())),
        Value::String(s) => Ok(Term::Str(s.clone())),
        Value::Bool(b) => Ok(Term::atom(if *b { "true" } else { "false" })),
        Value::Null => Err(ApiError::unprocessable("`data` is null")),
        Value::Array(_) | Value::Object(_) => Err(ApiError::bad_request("`data` must be a scalar")),
    }
}

/// Extracts the value of a `{"data": value}` body.
pub fn data_field(body: Value) -> Result<Value, ApiError> {
    let Value::Object(mut map) = body else {
        return Err(ApiError::bad_request("body must be a JSON object"));
    };
    only_key(&map, "data")?;
    Ok(map.remove("data").expect("checked"))
}

fn only_key(map: &Map<String, Value>, key: &str) -> Result<(), ApiError> {
    if map.len() != 1 || !map.contains_key(key) {
        let keys: Vec<&str> = map.keys().map(String::as_str).collect();
        return Err(ApiError::bad_request(format!("expected exactly one key `{key}`, got {keys:?}")));
    }
    Ok(())
}

fn percept_from_body(headers: &HeaderMap, body: &Bytes) -> Result<Literal, ApiError> {
    let value = data_field(json_body(headers, body)?)?;
    Ok(Literal::new("data", vec![scalar_to_term(&value)?]))
}

async fn post_percept(
    State(rt): State<Runtime>,
    Path(agent): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<(StatusCode, Json<Receipt>), ApiError> {
    if !rt.has_agent(&agent) {
        return Err(ApiError::unknown_agent(&agent));
    }
    let percept = percept_from_body(&headers, &body)?;
    let seq = rt.inject_percept(&agent, percept)?;
    Ok((StatusCode::ACCEPTED, Json(Receipt { agent, seq })))
}

async fn get_decision(State(rt): State<Runtime>, Path(agent): Path<String>) -> Result<Response, ApiError> {
    Ok(match rt.read_decision(&agent)? {
        Some(d) => Json(DecisionBody::from(&d)).into_response(),
        None => StatusCode::NO_CONTENT.into_response(),
    })
}

async fn delete_percepts(
    State(rt): State<Runtime>,
    Path((agent, predicate)): Path<(String, String)>,
) -> Result<StatusCode, ApiError> {
    rt.retract_percepts(&agent, &predicate)?;
    Ok(StatusCode::NO_CONTENT)
}

async fn get_beliefs(State(rt): State<Runtime>, Path(agent): Path<String>) -> Result<Json<Vec<String>>, ApiError> {
    Ok(Json(rt.beliefs(&agent)?))
}

pub fn router(runtime: Runtime) -> Router {
    Router::new()
        .route("/{agent}", post(post_percept).put(post_percept))
        .route("/{agent}/", post(post_percept).put(post_percept))
        .route("/{agent}/decision", get(get_decision))
        .route("/{agent}/beliefs", get(get_beliefs))
        .route("/{agent}/percepts/{predicate}", axum::routing::delete(delete_percepts))
        .with_state(runtime)
}
