//! The waste-disposal scenario: evacuator agents relay bin loads to a
//! decider, which allocates the job to the evacuator with the lowest
//! effective cost.
//!
//! Effective cost is `base_cost + latest load`, where the load is the last
//! value reported by any sensor bound to that evacuator (0 before the first
//! report). Ties go to the evacuator listed first.

use std::collections::{BTreeMap, BTreeSet};

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use jason_rs_core::term::is_atom_name;
use jason_rs_core::{Decimal, Decision, Literal, Performative, StepClock, Term};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tower::ServiceExt;

use crate::platform::{Account, Platform};
use crate::runtime::{Runtime, RuntimeError};
use crate::server::{self, RESERVED_NAMES};

pub const SCENARIO_CLOCK_START_MS: u64 = 1_700_000_000_000;
pub const MAX_CYCLES_PER_STEP: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Evacuator {
    pub name: String,
    pub base_cost: serde_json::Number,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorBinding {
    pub feature: u64,
    pub evacuator: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptStep {
    pub feature: u64,
    pub value: Value,
}

/// Feature ids here are the scenario's own labels; the platform assigns the
/// real ids when the sensors are registered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub evacuators: Vec<Evacuator>,
    #[serde(default)]
    pub sensor_bindings: Vec<SensorBinding>,
    pub decider: String,
    #[serde(default)]
    pub script: Vec<ScriptStep>,
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("{step} returned {status}: {body}")]
    Http { step: String, status: u16, body: String },
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
    #[error("cannot read scenario: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse scenario: {0}")]
    Json(#[from] serde_json::Error),
}

fn invalid(msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid(msg.into())
}

impl ScenarioSpec {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let spec: ScenarioSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    /// The default three-evacuator configuration, one sensor each.
    pub fn waste_default() -> Self {
        let evacuators = [("e1", 10), ("e2", 7), ("e3", 12)]
            .into_iter()
            .map(|(n, c)| Evacuator { name: n.into(), base_cost: c.into() })
            .collect();
        let sensor_bindings =
            (1..=3).map(|i| SensorBinding { feature: i, evacuator: format!("e{i}") }).collect();
        ScenarioSpec { evacuators, sensor_bindings, decider: "decider".into(), script: Vec::new() }
    }

    pub fn cost(&self, evacuator: &Evacuator) -> Result<Decimal, ScenarioError> {
        evacuator
            .base_cost
            .to_string()
            .parse()
            .map_err(|e| invalid(format!("cost of {}: {e}", evacuator.name)))
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.evacuators.len() < 2 {
            return Err(invalid("at least two evacuators are required"));
        }
        let mut names = BTreeSet::new();
        for name in self.evacuators.iter().map(|e| e.name.as_str()).chain([self.decider.as_str()]) {
            if !is_atom_name(name) || RESERVED_NAMES.contains(&name) {
                return Err(invalid(format!("`{name}` is not a usable agent name")));
            }
            if !names.insert(name) {
                return Err(invalid(format!("agent name `{name}` is used twice")));
            }
        }
        for e in &self.evacuators {
            self.cost(e)?;
        }
        let mut features = BTreeSet::new();
        for b in &self.sensor_bindings {
            if !self.evacuators.iter().any(|e| e.name == b.evacuator) {
                return Err(invalid(format!("feature {} is bound to unknown evacuator `{}`", b.feature, b.evacuator)));
            }
            if !features.insert(b.feature) {
                return Err(invalid(format!("feature {} is bound twice", b.feature)));
            }
        }
        self.validate_script(&self.script)
    }

    pub fn validate_script(&self, script: &[ScriptStep]) -> Result<(), ScenarioError> {
        for s in script {
            if !self.sensor_bindings.iter().any(|b| b.feature == s.feature) {
                return Err(invalid(format!("script uses unbound feature {}", s.feature)));
            }
            let ok = matches!(&s.value, Value::Number(n) if n.to_string().parse::<Decimal>().is_ok());
            if !ok {
                return Err(invalid(format!("script value {} for feature {} is not a load", s.value, s.feature)));
            }
        }
        Ok(())
    }

    pub fn evacuator_program(&self) -> String {
        format!("% relays every sensor reading to the decider\n+data(L) <- .send({}, tell, load(L)).\n", self.decider)
    }

    pub fn decider_program(&self) -> Result<String, ScenarioError> {
        let mut out = String::from("% base costs, in evacuator order (earlier wins ties)\n");
        for e in &self.evacuators {
            let fact = Literal::new("cost", vec![Term::atom(e.name.clone()), Term::Num(self.cost(e)?)]);
            out.push_str(&format!("{fact}.\n"));
        }
        out.push_str(DECIDER_RULES);
        Ok(out)
    }

    /// Agent name and program text for every agent, evacuators first.
    pub fn programs(&self) -> Result<Vec<(String, String)>, ScenarioError> {
        let mut out: Vec<(String, String)> =
            self.evacuators.iter().map(|e| (e.name.clone(), self.evacuator_program())).collect();
        out.push((self.decider.clone(), self.decider_program()?));
        Ok(out)
    }
}

const DECIDER_RULES: &str = r"
% the latest load reported by each evacuator, 0 before any report
load_of(A, L) :- load(L)[source(A)].
load_of(A, 0) :- not load(_)[source(A)].

effective(A, E) :- cost(A, C) & load_of(A, L) & E = C + L.
best(A) :- effective(A, E) & not (effective(B, F) & F < E).

% a new report replaces the previous one from the same evacuator
+load(L)[source(A)] : load(Old)[source(A)] & Old \== L
    <- -load(Old)[source(A)]; ?best(B); .publish_decision(allocate(B)).
+load(L)[source(A)] : best(B) <- .publish_decision(allocate(B)).

+!decide : best(B) <- .publish_decision(allocate(B)).
";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioOutcome {
    pub decider: String,
    /// Every decision the decider published, in order.
    pub decisions: Vec<Decision>,
    /// Non-idle cycle reports, one line each.
    pub cycles: Vec<String>,
}

impl ScenarioOutcome {
    pub fn final_decision(&self) -> Option<&Decision> {
        self.decisions.last()
    }

    /// One `seq timestamp content` line per decision.
    pub fn render_decisions(&self) -> String {
        self.decisions.iter().map(|d| format!("{} {} {}\n", d.seq, d.timestamp_ms, d.content)).collect()
    }
}

struct Client {
    app: Router,
    token: Option<String>,
}

impl Client {
    async fn call(&self, method: Method, uri: &str, body: Value, expect: StatusCode) -> Result<Value, ScenarioError> {
        let mut req = Request::builder().method(method.clone()).uri(uri).header(header::CONTENT_TYPE, "application/json");
        if let Some(t) = &self.token {
            req = req.header(header::AUTHORIZATION, format!("Bearer {t}"));
        }
        let req = req.body(Body::from(body.to_string())).expect("valid request");
        let resp = self.app.clone().oneshot(req).await.expect("infallible service");
        let status = resp.status();
        let bytes = axum::body::to_bytes(resp.into_body(), 1 << 20)
            .await
            .map_err(|e| ScenarioError::Http { step: format!("{method} {uri}"), status: status.as_u16(), body: e.to_string() })?;
        if status != expect {
            return Err(ScenarioError::Http {
                step: format!("{method} {uri}"),
                status: status.as_u16(),
                body: String::from_utf8_lossy(&bytes).into_owned(),
            });
        }
        Ok(serde_json::from_slice(&bytes).unwrap_or(Value::Null))
    }
}

/// Builds the agents and the platform in process, registers and links one
/// gauge per sensor binding, PUTs each script value (running the agents to
/// quiescence after every PUT), then asks the decider to `decide`.
pub async fn run_scenario(spec: &ScenarioSpec, script: &[ScriptStep]) -> Result<ScenarioOutcome, ScenarioError> {
    spec.validate()?;
    spec.validate_script(script)?;
    let runtime = Runtime::new(Box::new(StepClock::new(SCENARIO_CLOCK_START_MS, 1)));
    for (name, text) in spec.programs()? {
        let program = jason_rs_core::parse_program(&text).map_err(|e| invalid(format!("{name}: {e}")))?;
        runtime.create_agent(&name, program)?;
    }
    let account = Account { username: "scenario".into(), password: "scenario".into(), service: "local".into() };
    let platform = Platform::with_clock(vec![account], runtime.clone(), u64::MAX, std::sync::Arc::new(|| 0));
    let mut client = Client { app: server::app(platform), token: None };

    let login = json!({"username": "scenario", "password": "scenario", "service": "local"});
    let token = client.call(Method::POST, "/login", login, StatusCode::OK).await?;
    client.token = token["token"].as_str().map(String::from);

    let mut ids = BTreeMap::new();
    for b in &spec.sensor_bindings {
        let body = json!({
            "name": format!("sensor{}", b.feature),
            "path": format!("waste/{}/{}", b.evacuator, b.feature),
            "type": "gauge",
            "details": "bin load",
            "widget": "none",
            "mqtt": false
        });
        let created = client.call(Method::POST, "/feature", body, StatusCode::CREATED).await?;
        let id = created["id"].as_u64().ok_or_else(|| invalid("feature id missing"))?;
        let link = json!({"source_feature": id, "target_agent": b.evacuator});
        client.call(Method::POST, "/link", link, StatusCode::CREATED).await?;
        ids.insert(b.feature, id);
    }

    let mut outcome = ScenarioOutcome { decider: spec.decider.clone(), decisions: Vec::new(), cycles: Vec::new() };
    let mut trace = |r: &jason_rs_core::CycleReport| {
        if r.agent == spec.decider {
            if let Some(d) = &r.published {
                outcome.decisions.push(d.clone());
            }
        }
        if !r.is_noop() {
            outcome.cycles.push(r.to_string());
        }
    };
    runtime.run_until_quiescent_traced(MAX_CYCLES_PER_STEP, &mut trace)?;
    for step in script {
        let uri = format!("/feature/{}", ids[&step.feature]);
        client.call(Method::PUT, &uri, json!({"data": step.value}), StatusCode::ACCEPTED).await?;
        runtime.run_until_quiescent_traced(MAX_CYCLES_PER_STEP, &mut trace)?;
    }
    runtime.deliver_message(&spec.decider, "harness", Performative::Achieve, Literal::new("decide", vec![]))?;
    runtime.run_until_quiescent_traced(MAX_CYCLES_PER_STEP, &mut trace)?;
    Ok(outcome)
}
