//! Canonical catalog file: UTF-8 JSON Lines.
//!
//! Each line is `{"kind":"<kind>","<kind>":{...}}` with keys in
//! lexicographic order. Lines appear in the order sources, records, users,
//! contexts, events; every line (including the last) ends with `\n`.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use super::{
    static_entries, Catalog, ContextEntry, ContextOrigin, StoreError, UsageEvent, UserProfile,
};
use crate::descriptors::{validate_record, GenericRecord};
use crate::federation::SourceDescriptor;
use crate::ids::UserId;
use crate::json::canonical_json;

const KINDS: [&str; 5] = ["source", "record", "user", "context", "event"];

fn line<T: Serialize>(kind: &str, item: &T) -> String {
    let mut object = Map::new();
    object.insert("kind".into(), Value::String(kind.into()));
    object.insert(
        kind.into(),
        serde_json::to_value(item).expect("catalog items serialize to JSON"),
    );
    let mut out = canonical_json(&Value::Object(object)).expect("JSON values serialize");
    out.push('\n');
    out
}

/// The byte-exact file content for a catalog.
pub fn to_canonical_string(catalog: &Catalog) -> String {
    let mut out = String::new();
    for source in catalog.sources.iter() {
        out.push_str(&line("source", source));
    }
    for record in catalog.records.values() {
        out.push_str(&line("record", record));
    }
    for user in catalog.users.values() {
        out.push_str(&line("user", user));
    }
    for context in catalog.list_contexts() {
        out.push_str(&line("context", &context));
    }
    for event in &catalog.events {
        out.push_str(&line("event", event));
    }
    out
}

/// Write the catalog atomically (temporary file, then rename).
pub fn save(catalog: &Catalog, path: &Path) -> Result<(), StoreError> {
    let content = to_canonical_string(catalog);
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "catalog".into());
    let tmp = dir.join(format!(".{file_name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(content.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Catalog, StoreError> {
    let content = fs::read_to_string(path)?;
    from_canonical_str(&content)
}

fn corrupt(line: usize, reason: impl Into<String>) -> StoreError {
    StoreError::CorruptCatalog {
        line,
        reason: reason.into(),
    }
}

fn decode<T: DeserializeOwned>(line: usize, value: Value) -> Result<T, StoreError> {
    serde_json::from_value(value).map_err(|e| corrupt(line, e.to_string()))
}

/// Parse catalog file content, checking ordering and referential integrity.
pub fn from_canonical_str(content: &str) -> Result<Catalog, StoreError> {
    let mut catalog = Catalog::new();
    catalog.contexts.clear();
    let mut last_rank = 0;
    let line_count = content.lines().count();

    for (index, text) in content.lines().enumerate() {
        let n = index + 1;
        if n == line_count && !content.ends_with('\n') {
            return Err(corrupt(n, "truncated: final line has no newline"));
        }
        if text.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(text).map_err(|e| corrupt(n, e.to_string()))?;
        let Value::Object(mut object) = value else {
            return Err(corrupt(n, "line is not a JSON object"));
        };
        let kind = match object.remove("kind") {
            Some(Value::String(kind)) => kind,
            _ => return Err(corrupt(n, "missing \"kind\"")),
        };
        let rank = KINDS
            .iter()
            .position(|k| *k == kind)
            .ok_or_else(|| corrupt(n, format!("unknown kind {kind:?}")))?;
        if rank < last_rank {
            return Err(corrupt(
                n,
                format!("{kind} line after {}", KINDS[last_rank]),
            ));
        }
        last_rank = rank;
        let body = object
            .remove(&kind)
            .ok_or_else(|| corrupt(n, format!("missing \"{kind}\" body")))?;
        if !object.is_empty() {
            return Err(corrupt(n, "unexpected keys"));
        }

        match kind.as_str() {
            "source" => {
                let source: SourceDescriptor = decode(n, body)?;
                catalog
                    .sources
                    .register_source(source)
                    .map_err(|e| corrupt(n, e.to_string()))?;
            }
            "record" => {
                let record: GenericRecord = decode(n, body)?;
                let report = validate_record(&record, &catalog.vocabularies);
                if !report.is_valid() {
                    return Err(corrupt(
                        n,
                        format!("invalid record {}", record.document_code),
                    ));
                }
                if catalog.records.contains_key(&record.document_code) {
                    return Err(corrupt(
                        n,
                        format!("duplicate record {}", record.document_code),
                    ));
                }
                catalog.records.insert(record.document_code.clone(), record);
            }
            "user" => {
                let user: UserProfile = decode(n, body)?;
                let id =
                    UserId::new(user.user_id.clone()).map_err(|e| corrupt(n, e.to_string()))?;
                if catalog.users.insert(id, user).is_some() {
                    return Err(corrupt(n, "duplicate user"));
                }
            }
            "context" => {
                let entry: ContextEntry = decode(n, body)?;
                let is_static = super::static_rank(&entry.label).is_some();
                if is_static != (entry.origin == ContextOrigin::Static) {
                    return Err(corrupt(
                        n,
                        format!("context {} has the wrong origin", entry.label),
                    ));
                }
                if catalog
                    .contexts
                    .insert(entry.label.clone(), entry)
                    .is_some()
                {
                    return Err(corrupt(n, "duplicate context"));
                }
            }
            "event" => {
                let event: UsageEvent = decode(n, body)?;
                if event.event_id.0 < catalog.next_event {
                    return Err(corrupt(n, "event ids must be strictly increasing"));
                }
                if !catalog.records.contains_key(&event.document_code) {
                    return Err(corrupt(
                        n,
                        format!("unknown document {}", event.document_code),
                    ));
                }
                if !catalog.users.contains_key(&event.user_id) {
                    return Err(corrupt(n, format!("unknown user {}", event.user_id)));
                }
                if !catalog.contexts.contains_key(&event.context) {
                    return Err(corrupt(
                        n,
                        format!("unregistered context {}", event.context),
                    ));
                }
                catalog.next_event = event.event_id.0 + 1;
                catalog.events.push(event);
            }
            _ => unreachable!("kind checked against KINDS"),
        }
    }

    for (label, entry) in static_entries() {
        catalog.contexts.entry(label).or_insert(entry);
    }
    Ok(catalog)
}
