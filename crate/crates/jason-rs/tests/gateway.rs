mod common;

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use common::{assert_error_schema, send, stack};
use jason_rs::core::{parse_literal, Performative};
use jason_rs::gateway::DecisionBody;
use serde_json::json;

const OBJECT_AGENT: &str = "+data(X) : X > 3 <- .publish_decision(high).";

#[tokio::test]
async fn percept_posts() {
    let s = stack(&[("object_agent", OBJECT_AGENT)]);
    for path in ["/object_agent/", "/object_agent"] {
        let r = send(&s.app, Method::POST, path, None, Some(json!({"data": 5}))).await;
        assert_eq!(r.status, StatusCode::ACCEPTED, "{path}");
        assert_eq!(r.body["agent"], "object_agent");
    }
    s.runtime.run_until_quiescent(100).unwrap();
    let r = send(&s.app, Method::GET, "/object_agent/beliefs", None, None).await;
    assert_eq!(r.body, json!(["data(5)[source(percept)]"]));

    let ghost = send(&s.app, Method::POST, "/ghost/", None, Some(json!({"data": 1}))).await;
    assert_eq!(ghost.status, StatusCode::NOT_FOUND);
    assert_error_schema(&ghost);

    for (body, status) in [
        (json!({"datum": 5}), StatusCode::BAD_REQUEST),
        (json!({"data": 5, "extra": 1}), StatusCode::BAD_REQUEST),
        (json!({"data": {"nested": 1}}), StatusCode::BAD_REQUEST),
        (json!({"data": [1, 2]}), StatusCode::BAD_REQUEST),
        (json!([5]), StatusCode::BAD_REQUEST),
        (json!({"data": null}), StatusCode::UNPROCESSABLE_ENTITY),
        (json!({"data": 1e300}), StatusCode::UNPROCESSABLE_ENTITY),
    ] {
        let r = send(&s.app, Method::POST, "/object_agent/", None, Some(body.clone())).await;
        assert_eq!(r.status, status, "{body}");
        assert_error_schema(&r);
    }

    let bad_json = Request::post("/object_agent/")
        .header(header::CONTENT_TYPE, "application/json")
        .body(Body::from("{\"data\": "))
        .unwrap();
    let r = common::raw(&s.app, bad_json).await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    assert_error_schema(&r);

    let text = Request::post("/object_agent/").header(header::CONTENT_TYPE, "text/plain").body(Body::from("5")).unwrap();
    let r = common::raw(&s.app, text).await;
    assert_eq!(r.status, StatusCode::UNSUPPORTED_MEDIA_TYPE);
    assert_error_schema(&r);
}

#[tokio::test]
async fn value_mapping() {
    let s = stack(&[("a", "")]);
    for v in [json!(2.5), json!("full"), json!("Half Full"), json!(true)] {
        let r = send(&s.app, Method::PUT, "/a/", None, Some(json!({ "data": v }))).await;
        assert_eq!(r.status, StatusCode::ACCEPTED);
    }
    s.runtime.run_until_quiescent(100).unwrap();
    let r = send(&s.app, Method::GET, "/a/beliefs", None, None).await;
    assert_eq!(r.body, json!(["data(true)[source(percept)]"]));
    let mut events = Vec::new();
    s.runtime.inspect(|mas| assert!(mas.is_quiescent()));
    s.runtime.inject_percept("a", parse_literal("data(\"Half Full\")").unwrap()).unwrap();
    s.runtime.run_until_quiescent_traced(10, &mut |r| events.extend(r.event.clone())).unwrap();
    assert_eq!(events.iter().map(ToString::to_string).collect::<Vec<_>>(), [
        "-data(true)[source(percept)]",
        "+data(\"Half Full\")[source(percept)]"
    ]);
}

#[tokio::test]
async fn put_replaces_percept() {
    let s = stack(&[("object_agent", OBJECT_AGENT)]);
    send(&s.app, Method::POST, "/object_agent/", None, Some(json!({"data": 5}))).await;
    s.runtime.run_until_quiescent(100).unwrap();
    let r = send(&s.app, Method::PUT, "/object_agent/", None, Some(json!({"data": 7}))).await;
    assert_eq!(r.status, StatusCode::ACCEPTED);
    s.runtime.run_until_quiescent(100).unwrap();
    let r = send(&s.app, Method::GET, "/object_agent/beliefs", None, None).await;
    assert_eq!(r.body, json!(["data(7)[source(percept)]"]));
    assert_eq!(send(&s.app, Method::PUT, "/ghost/", None, Some(json!({"data": 1}))).await.status, StatusCode::NOT_FOUND);
    assert_eq!(send(&s.app, Method::PUT, "/object_agent/", None, Some(json!({"x": 1}))).await.status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn decisions() {
    let s = stack(&[("object_agent", OBJECT_AGENT)]);
    let r = send(&s.app, Method::GET, "/object_agent/decision", None, None).await;
    assert_eq!(r.status, StatusCode::NO_CONTENT);
    let r = send(&s.app, Method::GET, "/ghost/decision", None, None).await;
    assert_eq!(r.status, StatusCode::NOT_FOUND);
    assert_error_schema(&r);

    send(&s.app, Method::POST, "/object_agent/", None, Some(json!({"data": 5}))).await;
    s.runtime.run_until_quiescent(100).unwrap();
    let r = send(&s.app, Method::GET, "/object_agent/decision", None, None).await;
    assert_eq!(r.status, StatusCode::OK);
    let d: DecisionBody = serde_json::from_value(r.body).unwrap();
    assert_eq!((d.decision.as_str(), d.seq), ("high", 1));

    // reads do not consume the decision
    let again = send(&s.app, Method::GET, "/object_agent/decision", None, None).await;
    assert_eq!(serde_json::from_value::<DecisionBody>(again.body).unwrap(), d);
}

#[tokio::test]
async fn delete_percepts() {
    let s = stack(&[("object_agent", "-data(X) <- +gone(X).")]);
    send(&s.app, Method::POST, "/object_agent/", None, Some(json!({"data": 7}))).await;
    s.runtime.run_until_quiescent(100).unwrap();
    for _ in 0..2 {
        let r = send(&s.app, Method::DELETE, "/object_agent/percepts/data", None, None).await;
        assert_eq!(r.status, StatusCode::NO_CONTENT);
        s.runtime.run_until_quiescent(100).unwrap();
    }
    let r = send(&s.app, Method::GET, "/object_agent/beliefs", None, None).await;
    assert_eq!(r.body, json!(["gone(7)[source(self)]"]));
    let r = send(&s.app, Method::DELETE, "/ghost/percepts/data", None, None).await;
    assert_eq!(r.status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn beliefs_listing() {
    let s = stack(&[("e1", "cost(e1,10).")]);
    let r = send(&s.app, Method::GET, "/e1/beliefs", None, None).await;
    assert_eq!(r.body, json!(["cost(e1,10)[source(self)]"]));
    send(&s.app, Method::POST, "/e1/", None, Some(json!({"data": 5}))).await;
    s.runtime.run_until_quiescent(100).unwrap();
    let r = send(&s.app, Method::GET, "/e1/beliefs", None, None).await;
    assert_eq!(r.body, json!(["cost(e1,10)[source(self)]", "data(5)[source(percept)]"]));
    assert_eq!(send(&s.app, Method::GET, "/ghost/beliefs", None, None).await.status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn unknown_routes_and_methods_use_error_schema() {
    let s = stack(&[("a", "")]);
    let r = send(&s.app, Method::GET, "/a/b/c/d", None, None).await;
    assert_eq!(r.status, StatusCode::NOT_FOUND);
    assert_error_schema(&r);
    let r = send(&s.app, Method::PATCH, "/a/decision", None, None).await;
    assert_eq!(r.status, StatusCode::METHOD_NOT_ALLOWED);
    assert_error_schema(&r);
}

/// The gateway only translates requests: the same inputs given straight to
/// the runtime produce the same decisions.
#[tokio::test]
async fn facade_purity() {
    let program = "+data(X) : X > 3 <- .publish_decision(high(X)).\n+data(X) <- .publish_decision(low(X)).";
    let values = [5, 1, 9, 9, 2, 4];

    let via_http = stack(&[("a", program)]);
    let mut http_trace = Vec::new();
    for v in values {
        send(&via_http.app, Method::POST, "/a/", None, Some(json!({ "data": v }))).await;
        via_http.runtime.run_until_quiescent_traced(100, &mut |r| http_trace.push(r.to_string())).unwrap();
    }

    let direct = stack(&[("a", program)]);
    let mut direct_trace = Vec::new();
    for v in values {
        direct.runtime.inject_percept("a", parse_literal(&format!("data({v})")).unwrap()).unwrap();
        direct.runtime.run_until_quiescent_traced(100, &mut |r| direct_trace.push(r.to_string())).unwrap();
    }
    assert_eq!(http_trace, direct_trace);
    assert_eq!(via_http.runtime.read_decision("a").unwrap(), direct.runtime.read_decision("a").unwrap());
    assert_eq!(direct.runtime.read_decision("a").unwrap().unwrap().content.to_string(), "high(4)");
}

#[test]
fn concurrent_injections_are_all_kept() {
    let s = stack(&[("a", "")]);
    let threads = 8;
    let per_thread = 250;
    let rt = s.runtime.clone();
    let driver = rt.spawn_driver();
    std::thread::scope(|scope| {
        for t in 0..threads {
            let rt = rt.clone();
            scope.spawn(move || {
                for i in 0..per_thread {
                    let l = parse_literal(&format!("s{t}_{i}(1)")).unwrap();
                    rt.inject_percept("a", l).unwrap();
                }
            });
        }
    });
    driver.stop();
    rt.run_until_quiescent(100_000).unwrap();
    assert_eq!(rt.beliefs("a").unwrap().len(), threads * per_thread);
    // messages from many senders land too
    rt.deliver_message("a", "b", Performative::Tell, parse_literal("hello").unwrap()).unwrap();
    rt.run_until_quiescent(10).unwrap();
    assert_eq!(rt.beliefs("a").unwrap().len(), threads * per_thread + 1);
}
