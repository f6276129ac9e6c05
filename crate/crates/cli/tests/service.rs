use mediacube::Catalog;
use mediacube_cli::service::{spawn, AppState, RunningService};
use mediacube_testkit::five_event_fixture;
use mediacube_testkit::http::{get, post};
use serde_json::Value;
use tempfile::TempDir;

fn start() -> (TempDir, std::path::PathBuf, RunningService) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("catalog.jsonl");
    let catalog = five_event_fixture();
    catalog.save(&path).unwrap();
    let svc = spawn(AppState::new(catalog, Some(path.clone())), "127.0.0.1:0").unwrap();
    (dir, path, svc)
}

fn json(body: &str) -> Value {
    serde_json::from_str(body).unwrap_or_else(|e| panic!("{e}: {body}"))
}

#[test]
fn cube_endpoint() {
    let (_dir, _path, svc) = start();
    let (status, body) = get(svc.addr(), "/cube?context=teaching");
    assert_eq!(status, 200);
    let v = json(&body);
    assert_eq!(v["pattern"], 5);
    assert_eq!(v["total"], 3);
    assert_eq!(v["free"], serde_json::json!(["doc", "user", "time"]));
    assert_eq!(
        v["cells"][0],
        serde_json::json!({"count":1,"event_ids":[1],"key":{"doc":"lib:d1","time":"2024-01-01","user":"u1"}})
    );

    let (status, body) = get(svc.addr(), "/cube?doc=lib:d1&user=u1&granularity=month");
    assert_eq!(status, 200);
    assert_eq!(json(&body)["total"], 2);

    for (query, expected) in [
        ("/cube?time=2024-13-01", 400),
        ("/cube?colour=red", 400),
        ("/cube?granularity=week", 400),
        ("/cube?context=auditing", 404),
        ("/cube?user=u9", 404),
    ] {
        assert_eq!(get(svc.addr(), query).0, expected, "{query}");
    }
}

#[test]
fn records_and_contexts() {
    let (_dir, _path, svc) = start();
    let (status, body) = get(svc.addr(), "/records/lib:d1");
    assert_eq!(status, 200);
    let expected = five_event_fixture();
    let record = expected.get_record(&"lib:d1".parse().unwrap()).unwrap();
    assert_eq!(json(&body), serde_json::to_value(record).unwrap());

    let (status, body) = get(svc.addr(), "/records/s01:ghost");
    assert_eq!(status, 404);
    assert_eq!(json(&body)["error"], "RecordNotFound");
    assert_eq!(get(svc.addr(), "/records/BAD%20CODE:x").0, 400);

    let (status, body) = get(svc.addr(), "/contexts");
    assert_eq!(status, 200);
    let labels: Vec<_> = json(&body)
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["label"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(
        labels,
        ["teaching", "learning", "documentation", "entertainment"]
    );

    let (status, body) = get(svc.addr(), "/resolve/s99:x");
    assert_eq!(status, 404);
    assert_eq!(json(&body)["error"], "UnknownSource");
    let (status, body) = get(svc.addr(), "/resolve/https://example.org/a");
    assert_eq!(status, 200, "{body}");
    assert_eq!(json(&body)["raw_fields"]["uri"], "https://example.org/a");
}

#[test]
fn posting_usage() {
    let (_dir, path, svc) = start();
    let (status, body) = post(
        svc.addr(),
        "/usage",
        r#"{"document_code":"lib:d1","context":"teaching","user_id":"u9","use_type":"occasional"}"#,
    );
    assert_eq!(status, 409);
    assert_eq!(json(&body)["error"], "UnknownUser");

    let (status, body) = post(
        svc.addr(),
        "/usage",
        r#"{"document_code":"lib:zz","context":"teaching","user_id":"u1","use_type":"occasional"}"#,
    );
    assert_eq!(status, 409);
    assert_eq!(json(&body)["error"], "UnknownDocument");

    for bad in [
        "not json",
        "{}",
        r#"{"document_code":"lib:d1","context":"x","user_id":"u1","use_type":"never"}"#,
    ] {
        assert_eq!(post(svc.addr(), "/usage", bad).0, 400, "{bad}");
    }
    assert_eq!(
        Catalog::load(&path).unwrap().event_count(),
        5,
        "rejected posts change nothing"
    );

    let (status, body) = post(
        svc.addr(),
        "/usage",
        r#"{"document_code":"lib:d2","context":"Field Trip","user_id":"u2","use_type":"repetitive","timestamp":"2024-02-01T08:00:00Z"}"#,
    );
    assert_eq!(status, 201, "{body}");
    let v = json(&body);
    assert_eq!(v["event_id"], 6);
    assert_eq!(v["context"], "field trip");

    let saved = Catalog::load(&path).unwrap();
    assert_eq!(saved.event_count(), 6);
    assert_eq!(saved.list_contexts().len(), 5);
    let (_, body) = get(svc.addr(), "/cube?context=field%20trip");
    assert_eq!(json(&body)["total"], 1);
}

#[test]
fn gets_do_not_mutate() {
    let (_dir, path, svc) = start();
    let before = std::fs::read(&path).unwrap();
    for p in [
        "/cube",
        "/contexts",
        "/records/lib:d2",
        "/resolve/lib:d2",
        "/cube?user=u1",
    ] {
        get(svc.addr(), p);
    }
    assert_eq!(std::fs::read(&path).unwrap(), before);
}
