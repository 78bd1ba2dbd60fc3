//! An emulator of a BeC³-style object platform: login sessions, connected
//! object features, and links that forward feature data to agents.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path as FsPath;
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use jason_rs_core::{Literal, Term};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::ApiError;
use crate::gateway::{data_field, json_body, number_to_term};
use crate::runtime::Runtime;

pub const DEFAULT_SESSION_TTL_MS: u64 = 3_600_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Account {
    pub username: String,
    pub password: String,
    pub service: String,
}

#[derive(Debug, thiserror::Error)]
pub enum AccountsError {
    #[error("line {line}: expected `username:password:service`")]
    Syntax { line: usize },
    #[error("cannot read accounts file: {0}")]
    Io(#[from] std::io::Error),
}

/// Parses `username:password:service` lines. Blank lines and lines starting
/// with `#` are skipped.
pub fn parse_accounts(text: &str) -> Result<Vec<Account>, AccountsError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.splitn(3, ':');
        match (parts.next(), parts.next(), parts.next()) {
            (Some(u), Some(p), Some(s)) if !u.is_empty() && !s.is_empty() => {
                out.push(Account { username: u.into(), password: p.into(), service: s.into() })
            }
            _ => return Err(AccountsError::Syntax { line: i + 1 }),
        }
    }
    Ok(out)
}

pub fn load_accounts(path: &FsPath) -> Result<Vec<Account>, AccountsError> {
    parse_accounts(&std::fs::read_to_string(path)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureType {
    Accelerometer,
    Button,
    Buzzer,
    Gauge,
    Gps,
    Switch,
}

impl FeatureType {
    pub const ALL: [FeatureType; 6] = [
        FeatureType::Accelerometer,
        FeatureType::Button,
        FeatureType::Buzzer,
        FeatureType::Gauge,
        FeatureType::Gps,
        FeatureType::Switch,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureType::Accelerometer => "accelerometer",
            FeatureType::Button => "button",
            FeatureType::Buzzer => "buzzer",
            FeatureType::Gauge => "gauge",
            FeatureType::Gps => "gps",
            FeatureType::Switch => "switch",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.as_str() == s)
    }

    /// Checks a data value against the type and returns the arguments of the
    /// `data(..)` percept it becomes.
    pub fn check(self, v: &Value) -> Result<Vec<Term>, String> {
        let number = |v: &Value| match v {
            Value::Number(n) => number_to_term(n).map_err(|e| e.detail),
            other => Err(format!("{} expects a number, got {other}", self.as_str())),
        };
        match self {
            FeatureType::Gauge | FeatureType::Accelerometer | FeatureType::Gps => match v {
                Value::Array(items) if !items.is_empty() => items.iter().map(number).collect(),
                other => Ok(vec![number(other)?]),
            },
            FeatureType::Buzzer => Ok(vec![number(v)?]),
            FeatureType::Button | FeatureType::Switch => match v {
                Value::Bool(b) => Ok(vec![Term::atom(if *b { "true" } else { "false" })]),
                other => Err(format!("{} expects a boolean, got {other}", self.as_str())),
            },
        }
    }
}

impl fmt::Display for FeatureType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Feature {
    pub id: u64,
    pub name: String,
    pub path: String,
    #[serde(rename = "type")]
    pub kind: FeatureType,
    pub details: String,
    pub widget: String,
    pub mqtt: bool,
    pub state: Option<Value>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChoreographyLink {
    pub id: u64,
    pub source_feature: u64,
    pub target_agent: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoginBody {
    pub username: String,
    pub password: String,
    pub service: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureBody {
    pub name: String,
    pub path: String,
    #[serde(rename = "type")]
    pub kind: String,
    pub details: String,
    pub widget: String,
    pub mqtt: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkBody {
    pub source_feature: u64,
    pub target_agent: String,
}

#[derive(Debug, Clone)]
struct Session {
    #[allow(dead_code)]
    username: String,
    #[allow(dead_code)]
    service: String,
    created_ms: u64,
}

#[derive(Debug, Default)]
struct Registry {
    last_feature: u64,
    last_link: u64,
    features: BTreeMap<u64, Feature>,
    /// Keyed by source feature.
    links: BTreeMap<u64, ChoreographyLink>,
}

pub type NowFn = Arc<dyn Fn() -> u64 + Send + Sync>;

struct Inner {
    accounts: Vec<Account>,
    sessions: Mutex<HashMap<String, Session>>,
    registry: Mutex<Registry>,
    runtime: Runtime,
    ttl_ms: u64,
    now: NowFn,
}

#[derive(Clone)]
pub struct Platform {
    inner: Arc<Inner>,
}

impl fmt::Debug for Platform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Platform").field("accounts", &self.inner.accounts.len()).finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlatformError {
    #[error("no feature with id {0}")]
    UnknownFeature(u64),
    #[error("no agent named `{0}`")]
    UnknownAgent(String),
    #[error("feature {0} is already linked")]
    AlreadyLinked(u64),
    #[error("{0}")]
    TypeMismatch(String),
}

impl From<PlatformError> for ApiError {
    fn from(e: PlatformError) -> Self {
        let detail = e.to_string();
        match e {
            PlatformError::UnknownFeature(_) => ApiError::new(StatusCode::NOT_FOUND, "unknown_feature", detail),
            PlatformError::UnknownAgent(_) => ApiError::new(StatusCode::NOT_FOUND, "unknown_agent", detail),
            PlatformError::AlreadyLinked(_) => ApiError::new(StatusCode::CONFLICT, "already_linked", detail),
            PlatformError::TypeMismatch(_) => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "type_mismatch", detail),
        }
    }
}

fn wall_clock_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

fn term_to_json(t: &Term) -> Value {
    match t {
        Term::Num(n) => match n.to_i64() {
            Some(i) if n.is_integer() => Value::from(i),
            _ => n.to_string().parse::<f64>().map(Value::from).unwrap_or(Value::Null),
        },
        Term::Atom(a) if a == "true" => Value::Bool(true),
        Term::Atom(a) if a == "false" => Value::Bool(false),
        Term::Str(s) => Value::String(s.clone()),
        other => Value::String(other.to_string()),
    }
}

impl Platform {
    pub fn new(accounts: Vec<Account>, runtime: Runtime) -> Self {
        Self::with_clock(accounts, runtime, DEFAULT_SESSION_TTL_MS, Arc::new(wall_clock_ms))
    }

    pub fn with_clock(accounts: Vec<Account>, runtime: Runtime, ttl_ms: u64, now: NowFn) -> Self {
        let platform = Platform {
            inner: Arc::new(Inner {
                accounts,
                sessions: Mutex::new(HashMap::new()),
                registry: Mutex::new(Registry::default()),
                runtime,
                ttl_ms,
                now,
            }),
        };
        platform.register_actuate();
        platform
    }

    /// Makes `actuate(FeatureId, Value)` available to agent plans.
    fn register_actuate(&self) {
        let weak = Arc::downgrade(&self.inner);
        self.inner.runtime.register_action(
            "actuate",
            Box::new(move |_agent, args| {
                let inner = weak.upgrade().ok_or("platform is gone")?;
                let [id, value] = args else {
                    return Err(format!("actuate expects 2 arguments, got {}", args.len()));
                };
                let id = id.as_num().and_then(|n| n.to_i64()).filter(|&i| i > 0).ok_or("feature id must be a positive integer")?;
                Platform { inner }.actuate(id as u64, term_to_json(value)).map_err(|e| e.to_string())
            }),
        );
    }

    pub fn runtime(&self) -> &Runtime {
        &self.inner.runtime
    }

    fn registry(&self) -> std::sync::MutexGuard<'_, Registry> {
        self.inner.registry.lock().expect("registry lock poisoned")
    }

    pub fn login(&self, username: &str, password: &str, service: &str) -> Option<String> {
        let ok = self
            .inner
            .accounts
            .iter()
            .any(|a| a.username == username && a.password == password && a.service == service);
        if !ok {
            return None;
        }
        let token = format!("{:032x}", rand::random::<u128>());
        let session = Session { username: username.into(), service: service.into(), created_ms: (self.inner.now)() };
        self.inner.sessions.lock().expect("session lock poisoned").insert(token.clone(), session);
        Some(token)
    }

    pub fn session_valid(&self, token: &str) -> bool {
        let now = (self.inner.now)();
        let mut sessions = self.inner.sessions.lock().expect("session lock poisoned");
        match sessions.get(token) {
            Some(s) if now.saturating_sub(s.created_ms) < self.inner.ttl_ms => true,
            Some(_) => {
                sessions.remove(token);
                false
            }
            None => false,
        }
    }

    pub fn create_feature(&self, body: FeatureBody) -> Result<u64, PlatformError> {
        let kind = FeatureType::parse(&body.kind)
            .ok_or_else(|| PlatformError::TypeMismatch(format!("unknown feature type `{}`", body.kind)))?;
        let mut reg = self.registry();
        reg.last_feature += 1;
        let id = reg.last_feature;
        let feature = Feature {
            id,
            name: body.name,
            path: body.path,
            kind,
            details: body.details,
            widget: body.widget,
            mqtt: body.mqtt,
            state: None,
        };
        reg.features.insert(id, feature);
        Ok(id)
    }

    pub fn feature(&self, id: u64) -> Option<Feature> {
        self.registry().features.get(&id).cloned()
    }

    /// Stores the value and, when the feature is linked, queues `data(..)`
    /// on the linked agent. Returns the agent it was forwarded to.
    pub fn update_feature(&self, id: u64, value: Value) -> Result<Option<String>, PlatformError> {
        let mut reg = self.registry();
        let feature = reg.features.get_mut(&id).ok_or(PlatformError::UnknownFeature(id))?;
        let args = feature.kind.check(&value).map_err(PlatformError::TypeMismatch)?;
        feature.state = Some(value);
        let Some(link) = reg.links.get(&id) else {
            return Ok(None);
        };
        // still under the registry lock so forwards keep PUT order
        let agent = link.target_agent.clone();
        self.inner
            .runtime
            .inject_percept(&agent, Literal::new("data", args))
            .map_err(|_| PlatformError::UnknownAgent(agent.clone()))?;
        Ok(Some(agent))
    }

    /// Sets feature state on behalf of an agent without forwarding it back.
    pub fn actuate(&self, id: u64, value: Value) -> Result<(), PlatformError> {
        let mut reg = self.registry();
        let feature = reg.features.get_mut(&id).ok_or(PlatformError::UnknownFeature(id))?;
        feature.kind.check(&value).map_err(PlatformError::TypeMismatch)?;
        feature.state = Some(value);
        Ok(())
    }

    /// Removes the feature and its link; returns whether it existed.
    pub fn delete_feature(&self, id: u64) -> bool {
        let mut reg = self.registry();
        reg.links.remove(&id);
        reg.features.remove(&id).is_some()
    }

    pub fn link(&self, source_feature: u64, target_agent: &str) -> Result<u64, PlatformError> {
        let mut reg = self.registry();
        if !reg.features.contains_key(&source_feature) {
            return Err(PlatformError::UnknownFeature(source_feature));
        }
        if !self.inner.runtime.has_agent(target_agent) {
            return Err(PlatformError::UnknownAgent(target_agent.into()));
        }
        if reg.links.contains_key(&source_feature) {
            return Err(PlatformError::AlreadyLinked(source_feature));
        }
        reg.last_link += 1;
        let id = reg.last_link;
        reg.links.insert(source_feature, ChoreographyLink { id, source_feature, target_agent: target_agent.into() });
        Ok(id)
    }

    pub fn links(&self) -> Vec<ChoreographyLink> {
        self.registry().links.values().cloned().collect()
    }

    fn authorize(&self, headers: &HeaderMap) -> Result<(), ApiError> {
        let token = headers
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .ok_or_else(|| ApiError::unauthorized("missing bearer token"))?;
        if self.session_valid(token.trim()) {
            Ok(())
        } else {
            Err(ApiError::unauthorized("unknown or expired token"))
        }
    }
}

fn typed_body<T: DeserializeOwned>(headers: &HeaderMap, body: &Bytes) -> Result<T, ApiError> {
    let value = json_body(headers, body)?;
    serde_json::from_value(value).map_err(|e| ApiError::bad_request(e.to_string()))
}

#[derive(Serialize)]
struct TokenBody {
    token: String,
}

#[derive(Serialize)]
struct IdBody {
    id: u64,
}

#[derive(Serialize)]
struct UpdateBody {
    id: u64,
    forwarded_to: Option<String>,
}

async fn login(State(p): State<Platform>, headers: HeaderMap, body: Bytes) -> Result<Response, ApiError> {
    let body: LoginBody = typed_body(&headers, &body)?;
    match p.login(&body.username, &body.password, &body.service) {
        Some(token) => Ok(Json(TokenBody { token }).into_response()),
        None => Err(ApiError::unauthorized("bad credentials")),
    }
}

async fn create_feature(State(p): State<Platform>, headers: HeaderMap, body: Bytes) -> Result<Response, ApiError> {
    p.authorize(&headers)?;
    let body: FeatureBody = typed_body(&headers, &body)?;
    let id = p.create_feature(body)?;
    let location = HeaderValue::from_str(&format!("/feature/{id}")).expect("ascii");
    Ok((StatusCode::CREATED, [(header::LOCATION, location)], Json(IdBody { id })).into_response())
}

async fn get_feature(
    State(p): State<Platform>,
    Path(id): Path<u64>,
    headers: HeaderMap,
) -> Result<Json<Feature>, ApiError> {
    p.authorize(&headers)?;
    p.feature(id).map(Json).ok_or_else(|| PlatformError::UnknownFeature(id).into())
}

async fn update_feature(
    State(p): State<Platform>,
    Path(id): Path<u64>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<(StatusCode, Json<UpdateBody>), ApiError> {
    p.authorize(&headers)?;
    let value = data_field(json_body(&headers, &body)?)?;
    let forwarded_to = p.update_feature(id, value)?;
    Ok((StatusCode::ACCEPTED, Json(UpdateBody { id, forwarded_to })))
}

async fn delete_feature(
    State(p): State<Platform>,
    Path(id): Path<u64>,
    headers: HeaderMap,
) -> Result<StatusCode, ApiError> {
    p.authorize(&headers)?;
    p.delete_feature(id);
    Ok(StatusCode::NO_CONTENT)
}

async fn create_link(State(p): State<Platform>, headers: HeaderMap, body: Bytes) -> Result<Response, ApiError> {
    p.authorize(&headers)?;
    let body: LinkBody = typed_body(&headers, &body)?;
    let id = p.link(body.source_feature, &body.target_agent)?;
    Ok((StatusCode::CREATED, Json(IdBody { id })).into_response())
}

pub fn router(platform: Platform) -> Router {
    Router::new()
        .route("/login", post(login))
        .route("/feature", post(create_feature))
        .route("/feature/{id}", get(get_feature).put(update_feature).delete(delete_feature))
        .route("/link", post(create_link))
        .with_state(platform)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicU64, Ordering};

    fn gauge() -> FeatureBody {
        FeatureBody {
            name: "bin".into(),
            path: "yard/bin1".into(),
            kind: "gauge".into(),
            details: String::new(),
            widget: "none".into(),
            mqtt: false,
        }
    }

    #[test]
    fn accounts_file() {
        let accs = parse_accounts("# demo\nalice:secret:im.bec3.com\n\nbob::x\n").unwrap();
        assert_eq!(accs.len(), 2);
        assert_eq!(accs[1].password, "");
        assert!(matches!(parse_accounts("nobody"), Err(AccountsError::Syntax { line: 1 })));
    }

    #[test]
    fn type_checks() {
        use serde_json::json;
        assert_eq!(FeatureType::Gauge.check(&json!(7)).unwrap(), vec![Term::int(7)]);
        assert_eq!(FeatureType::Gps.check(&json!([1, 2])).unwrap().len(), 2);
        assert!(FeatureType::Gauge.check(&json!(true)).is_err());
        assert!(FeatureType::Gauge.check(&json!([])).is_err());
        assert!(FeatureType::Buzzer.check(&json!([1])).is_err());
        assert!(FeatureType::Switch.check(&json!(3)).is_err());
        assert_eq!(FeatureType::Button.check(&json!(false)).unwrap(), vec![Term::atom("false")]);
        assert_eq!(FeatureType::parse("teleporter"), None);
    }

    #[test]
    fn sessions_expire() {
        let now = Arc::new(AtomicU64::new(0));
        let clock = now.clone();
        let accounts = parse_accounts("u:p:s").unwrap();
        let p = Platform::with_clock(accounts, Runtime::default(), 1000, Arc::new(move || clock.load(Ordering::SeqCst)));
        assert!(p.login("u", "wrong", "s").is_none());
        assert!(p.login("u", "p", "other").is_none());
        let token = p.login("u", "p", "s").unwrap();
        assert_eq!(token.len(), 32);
        assert!(p.session_valid(&token));
        now.store(999, Ordering::SeqCst);
        assert!(p.session_valid(&token));
        now.store(1000, Ordering::SeqCst);
        assert!(!p.session_valid(&token));
    }

    #[test]
    fn ids_increase_and_are_not_reused() {
        let p = Platform::new(vec![], Runtime::default());
        let a = p.create_feature(gauge()).unwrap();
        let b = p.create_feature(gauge()).unwrap();
        assert!(p.delete_feature(b));
        assert!(!p.delete_feature(b));
        let c = p.create_feature(gauge()).unwrap();
        assert!(a < b && b < c);
    }

    #[test]
    fn actuate_sets_state_without_forwarding() {
        let rt = Runtime::default();
        rt.create_agent("bin", jason_rs_core::parse_program("+!close <- actuate(1, 0).").unwrap()).unwrap();
        let p = Platform::new(vec![], rt.clone());
        let id = p.create_feature(gauge()).unwrap();
        p.link(id, "bin").unwrap();
        rt.deliver_message("bin", "ops", jason_rs_core::Performative::Achieve, jason_rs_core::parse_literal("close").unwrap())
            .unwrap();
        rt.run_until_quiescent(10).unwrap();
        assert_eq!(p.feature(id).unwrap().state, Some(Value::from(0)));
        assert!(rt.beliefs("bin").unwrap().is_empty());
    }
}
