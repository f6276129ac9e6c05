use std::path::{Path, PathBuf};
use std::process::Command;

use mediacube_cli::{run, Outcome};
use mediacube_testkit::five_event_fixture;
use tempfile::TempDir;

fn fixture_catalog() -> (TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("catalog.jsonl");
    five_event_fixture().save(&path).unwrap();
    (dir, path)
}

fn mc(catalog: &Path, args: &[&str]) -> Outcome {
    let mut argv = vec!["mediacube", "--catalog", catalog.to_str().unwrap()];
    argv.extend_from_slice(args);
    run(argv)
}

#[test]
fn pattern_five_cube_as_tsv() {
    let (_dir, path) = fixture_catalog();
    let out = mc(&path, &["cube", "--fix", "context=teaching"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert_eq!(
        out.stdout,
        "doc\tuser\ttime\tcount\n\
         lib:d1\tu1\t2024-01-01\t1\n\
         lib:d1\tu1\t2024-01-02\t1\n\
         lib:d2\tu1\t2024-01-02\t1\n\
         TOTAL\t3\n"
    );
}

#[test]
fn cube_flags() {
    let (_dir, path) = fixture_catalog();
    let out = mc(
        &path,
        &[
            "cube",
            "--fix",
            "doc=lib:d1",
            "--fix",
            "user=u1",
            "--granularity",
            "month",
        ],
    );
    assert_eq!(
        out.stdout,
        "context\ttime\tcount\nteaching\t2024-01\t2\nTOTAL\t2\n"
    );

    let out = mc(
        &path,
        &[
            "cube",
            "--fix",
            "time=2024-01-01T10:00:00Z/2024-01-02T09:00:00Z",
            "--format",
            "json",
        ],
    );
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["pattern"], 2);
    assert_eq!(v["total"], 2);

    let out = mc(&path, &["cube", "--fix", "context=auditing"]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.starts_with("UnknownContext"), "{}", out.stderr);
}

#[test]
fn malformed_date_is_a_usage_error() {
    let (_dir, path) = fixture_catalog();
    let out = mc(&path, &["cube", "--fix", "time=2024-13-01"]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("YYYY-MM-DD"), "{}", out.stderr);
    assert!(out.stderr.contains("Usage"), "{}", out.stderr);
}

#[test]
fn usage_errors_exit_two() {
    let (_dir, path) = fixture_catalog();
    for args in [
        &["frobnicate"][..],
        &["cube", "--fix", "colour=red"],
        &["cube", "--fix", "context"],
        &["cube", "--fix", "user=u1", "--fix", "user=u2"],
        &["cube", "--granularity", "week"],
        &["contexts", "--verbose"],
        &[
            "usage-log",
            "--doc",
            "lib:d1",
            "--context",
            "x",
            "--user",
            "u1",
            "--type",
            "often",
        ],
    ] {
        let out = mc(&path, args);
        assert_eq!(out.code, 2, "{args:?}: {}", out.stderr);
        assert!(out.stdout.is_empty());
    }
    assert_eq!(
        run(["mediacube", "contexts"]).code,
        2,
        "catalog path is required"
    );
    assert_eq!(run(["mediacube", "--help"]).code, 0);
}

#[test]
fn unknown_source_is_a_domain_error() {
    let (_dir, path) = fixture_catalog();
    let out = mc(&path, &["resolve", "s99:x"]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.starts_with("UnknownSource"), "{}", out.stderr);
}

#[test]
fn missing_catalog_file_is_empty() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("new.jsonl");
    let out = mc(&path, &["contexts"]);
    assert_eq!(out.code, 0);
    assert_eq!(
        out.stdout,
        "label\torigin\tfirst_seen\n\
         teaching\tstatic\t1970-01-01T00:00:00Z\n\
         learning\tstatic\t1970-01-01T00:00:00Z\n\
         documentation\tstatic\t1970-01-01T00:00:00Z\n\
         entertainment\tstatic\t1970-01-01T00:00:00Z\n"
    );
    assert!(!path.exists(), "read-only commands do not create the file");
}

#[test]
fn corrupt_catalog_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.jsonl");
    std::fs::write(&path, "{\"kind\":\"user\"").unwrap();
    let out = mc(&path, &["contexts"]);
    assert_eq!(out.code, 1);
    assert!(
        out.stderr.starts_with("CorruptCatalog: line 1"),
        "{}",
        out.stderr
    );
}

#[test]
fn reports() {
    let (_dir, path) = fixture_catalog();
    let cases: [(&[&str], &str); 6] = [
        (
            &["report", "importance"],
            "doc\tcount\nlib:d1\t3\nlib:d2\t2\n",
        ),
        (
            &["report", "interest", "--user", "u1"],
            "dimension\tvalue\tcount\ncontext\tteaching\t3\ndoc\tlib:d1\t2\ndoc\tlib:d2\t1\n",
        ),
        (
            &["report", "evolution"],
            "time\tcount\n2024-01-01\t2\n2024-01-02\t3\n",
        ),
        (
            &["report", "evolution", "--granularity", "month"],
            "time\tcount\n2024-01\t5\n",
        ),
        (
            &["report", "usage-types"],
            "use_type\tcount\nrepetitive\t3\noccasional\t2\n",
        ),
        (
            &["report", "social-classes"],
            "social_class\tcontext\tcount\nstudent\tteaching\t3\nunspecified\tlearning\t2\n",
        ),
    ];
    for (args, expected) in cases {
        let out = mc(&path, args);
        assert_eq!(out.code, 0, "{args:?}: {}", out.stderr);
        assert_eq!(out.stdout, expected, "{args:?}");
    }
    let out = mc(&path, &["report", "interest", "--user", "u9"]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.starts_with("UnknownUser"));
}

#[test]
fn ingest_and_log_workflow() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("catalog.jsonl");
    let tsv = dir.path().join("books.tsv");
    std::fs::write(&tsv, "id\ttitle\nb1\tFirst\nb2\tSecond\nb3\n").unwrap();
    let mapping = dir.path().join("mapping.json");
    std::fs::write(
        &mapping,
        r#"{"presence_rules":[{"medium":"text","field":"title"}],
            "field_rules":[{"source":"title","target":"text.title"}]}"#,
    )
    .unwrap();

    let out = mc(
        &path,
        &[
            "source-register",
            "--id",
            "books",
            "--kind",
            "tabular",
            "--location",
            tsv.to_str().unwrap(),
            "--mapping",
            mapping.to_str().unwrap(),
        ],
    );
    assert_eq!(out.code, 0, "{}", out.stderr);

    let out = mc(&path, &["ingest", "books"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert_eq!(out.stdout, "ingested\t2\nerrors\t1\n");
    assert!(out.stderr.contains("books line 4"), "{}", out.stderr);

    let out = mc(&path, &["record-get", "books:b2"]);
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["text"]["title"], "Second");
    assert_eq!(v["media_class"], "text");

    let out = mc(&path, &["resolve", "books:b1"]);
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["raw_fields"]["title"], "First");
    let out = mc(&path, &["record-get", "books:b9"]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.starts_with("RecordNotFound"));

    let out = mc(
        &path,
        &[
            "user-register",
            "--id",
            "ann",
            "--name",
            "Ann",
            "--social-class",
            "teacher",
        ],
    );
    assert_eq!(out.code, 0, "{}", out.stderr);
    let log = |ctx: &str| {
        mc(
            &path,
            &[
                "usage-log",
                "--doc",
                "books:b1",
                "--context",
                ctx,
                "--user",
                "ann",
                "--type",
                "repetitive",
                "--at",
                "2024-03-01T12:00:00Z",
            ],
        )
    };
    assert_eq!(log("Auditing").stdout, "1\n");
    assert_eq!(log("teaching").stdout, "2\n");
    let out = mc(
        &path,
        &[
            "usage-log",
            "--doc",
            "books:b1",
            "--context",
            "x",
            "--user",
            "bob",
            "--type",
            "occasional",
        ],
    );
    assert_eq!(out.code, 1);
    assert!(out.stderr.starts_with("UnknownUser"));

    let out = mc(&path, &["contexts"]);
    assert!(
        out.stdout
            .ends_with("auditing\tdynamic\t2024-03-01T12:00:00Z\n"),
        "{}",
        out.stdout
    );
    assert_eq!(out.stdout.lines().count(), 6);
}

#[test]
fn save_and_load() {
    let (dir, path) = fixture_catalog();
    let copy = dir.path().join("copy.jsonl");
    assert_eq!(mc(&path, &["save", "--to", copy.to_str().unwrap()]).code, 0);
    assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&copy).unwrap());

    let other = dir.path().join("other.jsonl");
    let out = mc(&other, &["load", "--from", copy.to_str().unwrap()]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert_eq!(out.stdout, "loaded 2 records, 2 users, 5 events\n");
    assert_eq!(
        std::fs::read(&other).unwrap(),
        std::fs::read(&copy).unwrap()
    );

    std::fs::write(&copy, "garbage\n").unwrap();
    let out = mc(&other, &["load", "--from", copy.to_str().unwrap()]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.starts_with("CorruptCatalog"));
}

#[test]
fn binary_reads_catalog_from_environment() {
    let (dir, path) = fixture_catalog();
    let bin = env!("CARGO_BIN_EXE_mediacube");

    let out = Command::new(bin)
        .args(["report", "importance"])
        .env("MEDIACUBE_CATALOG", &path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "doc\tcount\nlib:d1\t3\nlib:d2\t2\n"
    );

    // The flag wins over the environment.
    let empty = dir.path().join("empty.jsonl");
    let out = Command::new(bin)
        .args(["--catalog", empty.to_str().unwrap(), "report", "importance"])
        .env("MEDIACUBE_CATALOG", &path)
        .output()
        .unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "doc\tcount\n");

    let out = Command::new(bin)
        .args(["cube", "--fix", "time=2024-13-01"])
        .env("MEDIACUBE_CATALOG", &path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
