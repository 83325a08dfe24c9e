mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use axum::http::{Method, StatusCode};
use clinitime_core::EngineSettings;
use clinitime_service::{Config, Store};
use common::*;
use serde_json::{json, Value};

const DASH: &str = "/api/dashboards/patient/p1?asOf=2024-01-06T12:00:00Z";

async fn loaded() -> (Arc<clinitime_service::Store>, axum::Router) {
    let store = reference_store();
    let app = router(&store);
    assert_eq!(
        post(&app, "/api/ingest", read_fixture("reference-batch.json"))
            .await
            .status,
        StatusCode::OK
    );
    (store, app)
}

#[tokio::test]
async fn empty_batch_counts_zero_and_bumps_revision() {
    let store = reference_store();
    let app = router(&store);
    let r = post(&app, "/api/ingest", "{}").await;
    assert_eq!(r.status, StatusCode::OK);
    let body = r.json();
    assert_eq!(body["revision"], 1);
    assert_eq!(body["batchId"], "batch-1");
    assert!(body["counts"].as_object().unwrap().values().all(|v| v == 0));
}

#[tokio::test]
async fn counts_per_entity_type() {
    let store = reference_store();
    let app = router(&store);
    let batch = json!({
        "units": [{"id": "u1", "name": "U1"}],
        "patients": [
            {"id": "a", "displayName": "A", "unitId": "u1"},
            {"id": "b", "displayName": "B", "unitId": "u1"}
        ],
        "measures": [{"id": "m", "patientId": "a", "kind": "isolation", "startAt": "2024-01-01T00:00:00Z"}]
    });
    let counts = post(&app, "/api/ingest", batch.to_string()).await.json()["counts"].clone();
    assert_eq!(
        (
            counts["patients"].clone(),
            counts["units"].clone(),
            counts["measures"].clone()
        ),
        (json!(2), json!(1), json!(1))
    );
}

#[tokio::test]
async fn dangling_reference_is_422_and_store_unchanged() {
    let (store, app) = loaded().await;
    let before = get(&app, DASH).await;
    let r = post(&app, "/api/ingest", read_fixture("dangling-batch.json")).await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
    let issues = r.json()["report"]["issues"].clone();
    assert_eq!(issues.as_array().unwrap().len(), 1);
    assert_eq!(issues[0]["kind"], "dangling-reference");
    assert_eq!(store.revision(), 1);
    let after = get(&app, DASH).await;
    assert_eq!(before.etag(), after.etag());
    assert_eq!(before.body, after.body);
}

#[tokio::test]
async fn malformed_batches_are_400() {
    let store = reference_store();
    let app = router(&store);
    for body in [
        "not json",
        r#"{"patients": [{"id": "p"}]}"#,
        r#"{"surprise": []}"#,
        r#"{"measures": [{"id": "m", "patientId": "p", "kind": "isolation", "startAt": "2024-01-01T00:00:00"}]}"#,
    ] {
        assert_eq!(
            post(&app, "/api/ingest", body).await.status,
            StatusCode::BAD_REQUEST,
            "{body}"
        );
    }
    assert_eq!(store.revision(), 0);
}

#[tokio::test]
async fn dashboard_errors() {
    let (_, app) = loaded().await;
    assert_eq!(
        get(&app, "/api/dashboards/patient/ghost").await.status,
        StatusCode::NOT_FOUND
    );
    assert_eq!(
        get(&app, "/api/dashboards/unit/ghost").await.status,
        StatusCode::NOT_FOUND
    );
    let invalid = get(&app, "/api/dashboards/unit/u-psy1?view=atbviz").await;
    assert_eq!(
        (invalid.status, invalid.json()["error"].clone()),
        (StatusCode::BAD_REQUEST, json!("invalid-view"))
    );
    for q in [
        "view=gantt",
        "asOf=yesterday",
        "anticipate=maybe",
        "profession=baker",
        "start=2024-01-01T00:00:00Z",
    ] {
        let r = get(&app, &format!("/api/dashboards/patient/p1?{q}")).await;
        assert_eq!(r.status, StatusCode::BAD_REQUEST, "{q}");
    }
    let tiny = "/api/dashboards/patient/p1?start=2024-01-01T00:00:00Z&end=2024-01-01T00:01:00Z";
    assert_eq!(get(&app, tiny).await.status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn reads_are_deterministic_and_conditional() {
    let (_, app) = loaded().await;
    let a = get(&app, DASH).await;
    let b = get(&app, DASH).await;
    assert_eq!(a.status, StatusCode::OK);
    assert_eq!(a.body, b.body);
    assert_eq!(a.etag().as_deref(), Some("\"1\""));
    assert_eq!(a.etag(), b.etag());
    let c = call(&app, Method::GET, DASH, None, &[("if-none-match", "\"1\"")]).await;
    assert_eq!(c.status, StatusCode::NOT_MODIFIED);
    assert!(c.body.is_empty());
    let stale = call(&app, Method::GET, DASH, None, &[("if-none-match", "\"0\"")]).await;
    assert_eq!(stale.status, StatusCode::OK);
}

#[tokio::test]
async fn validation_lifecycle() {
    let (store, app) = loaded().await;
    let uri = "/api/tasks/m1:jld-referral:1/validate";
    let body =
        json!({"actor": "administrative", "timestamp": "2024-01-05T15:00:00+01:00"}).to_string();
    let ok = post(&app, uri, body.clone()).await;
    assert_eq!(ok.status, StatusCode::OK);
    assert_eq!(ok.json()["revision"], 2);
    assert_eq!(ok.json()["task"]["status"], "completed");
    assert_eq!(ok.json()["task"]["completedAt"], "2024-01-05T14:00:00Z");

    let item = get(&app, DASH).await.json()["components"][0]["items"][0].clone();
    assert_eq!(item["colorToken"], "done");
    assert_eq!(item["validatable"], false);

    assert_eq!(
        post(&app, uri, body.clone()).await.status,
        StatusCode::CONFLICT
    );
    assert_eq!(
        post(&app, "/api/tasks/nope/validate", body).await.status,
        StatusCode::NOT_FOUND
    );
    assert_eq!(
        post(&app, uri, r#"{"actor": "x"}"#).await.status,
        StatusCode::BAD_REQUEST
    );
    assert_eq!(store.revision(), 2);
}

fn two_rule_settings() -> EngineSettings {
    Config::from_json(
        r#"{"timezone": "UTC", "horizonDays": 2, "ruleSet": [
            {"id": "hearing", "label": "Hearing", "profession": "judge-liaison", "offsetH": 24},
            {"id": "renewal", "label": "Renewal", "profession": "physician", "offsetH": 12, "periodH": 12}
        ]}"#,
    )
    .unwrap()
    .settings
}

fn ward() -> Value {
    json!({
        "units": [{"id": "u1", "name": "Ward A"}, {"id": "u2", "name": "Ward B"}],
        "patients": [
            {"id": "p1", "displayName": "Zed", "unitId": "u1"},
            {"id": "p2", "displayName": "Amy", "unitId": "u1"},
            {"id": "p3", "displayName": "Bob", "unitId": "u2"}
        ],
        "measures": [
            {"id": "m1", "patientId": "p1", "kind": "isolation", "startAt": "2024-03-04T08:00:00Z"},
            {"id": "m2", "patientId": "p2", "kind": "restraint", "startAt": "2024-03-04T10:00:00Z"},
            {"id": "m3", "patientId": "p3", "kind": "isolation", "startAt": "2024-03-05T10:00:00Z"}
        ],
        "observations": [
            {"id": "o1", "patientId": "p1", "code": "temperature", "value": 37.5, "unit": "Cel", "at": "2024-03-04T09:00:00Z", "theme": "efficacy"}
        ]
    })
}

async fn ward_app() -> axum::Router {
    let store = Arc::new(Store::in_memory(two_rule_settings()));
    let app = router(&store);
    assert_eq!(
        post(&app, "/api/ingest", ward().to_string()).await.status,
        StatusCode::OK
    );
    app
}

fn task_items(doc: &Value) -> Vec<Value> {
    doc["components"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|c| c["items"].as_array().cloned().unwrap_or_default())
        .filter(|i| i["payloadRef"]["type"] == "task")
        .collect()
}

#[tokio::test]
async fn one_shot_plus_periodic_gives_five_items() {
    let app = ward_app().await;
    let doc = get(&app, "/api/dashboards/patient/p1?asOf=2024-03-05T08:00:00Z")
        .await
        .json();
    let items = task_items(&doc);
    // one-shot: 1; periodic: floor((48h - 12h) / 12h) + 1
    assert_eq!(items.len(), 1 + ((48 - 12) / 12 + 1));
    let lanes: BTreeSet<&str> = items.iter().map(|i| i["group"].as_str().unwrap()).collect();
    assert_eq!(lanes, BTreeSet::from(["hearing", "renewal"]));
    let labels = doc["components"][0]["groupLabels"].as_object().unwrap();
    assert_eq!(labels.keys().collect::<Vec<_>>(), ["hearing", "renewal"]);
}

#[tokio::test]
async fn unit_and_establishment_lanes_per_patient() {
    let app = ward_app().await;
    let unit = get(&app, "/api/dashboards/unit/u1?asOf=2024-03-05T08:00:00Z")
        .await
        .json();
    let labels = unit["components"][0]["groupLabels"].as_object().unwrap();
    assert_eq!(labels.len(), 2);
    // lane order, not key order
    assert_eq!(labels.values().collect::<Vec<_>>(), ["Amy", "Zed"]);
    let est = get(
        &app,
        "/api/dashboards/establishment?asOf=2024-03-05T08:00:00Z",
    )
    .await
    .json();
    let labels = est["components"][0]["groupLabels"].as_object().unwrap();
    assert_eq!(
        labels.values().collect::<Vec<_>>(),
        ["Amy (Ward A)", "Zed (Ward A)", "Bob (Ward B)"]
    );
}

#[tokio::test]
async fn profession_filters_cover_the_unfiltered_dashboard() {
    let app = ward_app().await;
    let base = "/api/dashboards/establishment?asOf=2024-03-05T08:00:00Z";
    let all: BTreeSet<String> = task_items(&get(&app, base).await.json())
        .iter()
        .map(|i| i["id"].to_string())
        .collect();
    let mut union = BTreeSet::new();
    for p in ["physician", "nurse", "administrative", "judge-liaison"] {
        let doc = get(&app, &format!("{base}&profession={p}")).await.json();
        for item in task_items(&doc) {
            assert!(all.contains(&item["id"].to_string()));
            union.insert(item["id"].to_string());
        }
    }
    assert_eq!(union, all);
}

#[tokio::test]
async fn every_reference_resolves() {
    let app = ward_app().await;
    let tasks: BTreeSet<String> = get(&app, "/api/tasks")
        .await
        .json()
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["id"].as_str().unwrap().to_owned())
        .collect();
    let doc = get(
        &app,
        "/api/dashboards/establishment?asOf=2024-03-05T08:00:00Z",
    )
    .await
    .json();
    for item in task_items(&doc) {
        assert!(tasks.contains(item["payloadRef"]["id"].as_str().unwrap()));
    }
    let observations: BTreeSet<&str> = ["o1"].into();
    let atb = get(
        &app,
        "/api/dashboards/patient/p1?view=atbviz&asOf=2024-03-05T08:00:00Z",
    )
    .await
    .json();
    assert_eq!(atb["components"].as_array().unwrap().len(), 4);
    let mut seen = 0;
    for c in atb["components"].as_array().unwrap() {
        for s in c["series"]
            .as_array()
            .into_iter()
            .flatten()
            .filter(|s| s["type"] == "numeric")
        {
            for p in s["points"].as_array().unwrap() {
                assert!(observations.contains(p["sourceId"].as_str().unwrap()));
                seen += 1;
            }
        }
    }
    assert_eq!(seen, 1);
}

#[tokio::test]
async fn task_listing_is_prioritised_and_filtered() {
    let app = ward_app().await;
    let all = get(&app, "/api/tasks?asOf=2024-03-05T08:00:00Z")
        .await
        .json();
    let rows = all.as_array().unwrap();
    assert_eq!(rows.len(), 3 * 5);
    let severity = |b: &str| {
        ["safe", "caution", "warning", "critical", "overdue"]
            .iter()
            .position(|x| *x == b)
            .unwrap()
    };
    for pair in rows.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let (sa, sb) = (
            severity(a["urgency"].as_str().unwrap()),
            severity(b["urgency"].as_str().unwrap()),
        );
        assert!(sa > sb || (sa == sb && a["dueAt"].as_str() <= b["dueAt"].as_str()));
    }
    let unit = get(&app, "/api/tasks?unit=u2&profession=judge-liaison")
        .await
        .json();
    assert_eq!(unit.as_array().unwrap().len(), 1);
    assert_eq!(unit[0]["patientId"], "p3");
    let done = get(&app, "/api/tasks?status=completed").await.json();
    assert!(done.as_array().unwrap().is_empty());
    assert_eq!(
        get(&app, "/api/tasks?status=late").await.status,
        StatusCode::BAD_REQUEST
    );
    assert_eq!(
        get(&app, "/api/tasks?profession=baker").await.status,
        StatusCode::BAD_REQUEST
    );
}

#[tokio::test]
async fn healthz_reports_revision() {
    let (_, app) = loaded().await;
    assert_eq!(
        get(&app, "/api/healthz").await.json(),
        json!({"status": "ok", "revision": 1})
    );
}
