//! The catalog store: generic records, usage events, user profiles, the
//! usage-context registry and the source registry.
//!
//! A [`Catalog`] has a single writer (mutation takes `&mut self`); analytics
//! read from [`CatalogSnapshot`] values, which are independent copies and
//! never observe later writes.

mod persist;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytics::EventIndex;
use crate::code::DocumentCode;
use crate::descriptors::{
    dangling_references, validate_record, Finding, GenericRecord, ValidationReport, Vocabularies,
};
use crate::federation::{
    map_to_generic, FederationError, RecordError, SourceDescriptor, SourceRecord, SourceRegistry,
};
use crate::ids::{ContextLabel, EventId, Timestamp, UserId};

pub use persist::{from_canonical_str, load, save, to_canonical_string};

/// The four contexts known before any usage is observed, in display order.
pub const STATIC_CONTEXTS: [&str; 4] = ["teaching", "learning", "documentation", "entertainment"];

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("RecordInvalid: {}: {}", .code, .report.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    RecordInvalid {
        code: DocumentCode,
        report: ValidationReport,
    },
    #[error("RecordNotFound: {0}")]
    RecordNotFound(DocumentCode),
    #[error("UnknownDocument: {0}")]
    UnknownDocument(DocumentCode),
    #[error("UnknownUser: {0}")]
    UnknownUser(String),
    #[error("MalformedProfile: {0}")]
    MalformedProfile(String),
    #[error("StorageIO: {0}")]
    StorageIo(#[from] std::io::Error),
    #[error("CorruptCatalog: line {line}: {reason}")]
    CorruptCatalog { line: usize, reason: String },
    #[error(transparent)]
    Federation(#[from] FederationError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UseType {
    Repetitive,
    Occasional,
}

impl UseType {
    pub fn token(self) -> &'static str {
        match self {
            UseType::Repetitive => "repetitive",
            UseType::Occasional => "occasional",
        }
    }
}

impl fmt::Display for UseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for UseType {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "repetitive" => Ok(UseType::Repetitive),
            "occasional" => Ok(UseType::Occasional),
            other => Err(format!(
                "unknown use type {other:?} (expected repetitive or occasional)"
            )),
        }
    }
}

/// One observed use of a document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsageEvent {
    pub event_id: EventId,
    pub document_code: DocumentCode,
    pub context: ContextLabel,
    pub user_id: UserId,
    pub timestamp: Timestamp,
    pub use_type: UseType,
}

/// A usage event before the store assigns its id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewUsage {
    pub document_code: DocumentCode,
    pub context: ContextLabel,
    pub user_id: UserId,
    pub timestamp: Timestamp,
    pub use_type: UseType,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserProfile {
    pub user_id: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub address: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub social_class: Option<String>,
}

impl UserProfile {
    pub fn new(user_id: impl Into<String>, name: impl Into<String>) -> Self {
        Self {
            user_id: user_id.into(),
            name: name.into(),
            address: None,
            social_class: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContextOrigin {
    Static,
    Dynamic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextEntry {
    pub label: ContextLabel,
    pub origin: ContextOrigin,
    pub first_seen: Timestamp,
}

fn static_rank(label: &ContextLabel) -> Option<usize> {
    STATIC_CONTEXTS.iter().position(|s| *s == label.as_str())
}

/// Static entries in fixed order, then dynamic ones by first sighting.
fn context_order(a: &ContextEntry, b: &ContextEntry) -> std::cmp::Ordering {
    let key = |e: &ContextEntry| {
        (
            static_rank(&e.label).unwrap_or(usize::MAX),
            e.first_seen,
            e.label.clone(),
        )
    };
    key(a).cmp(&key(b))
}

fn static_entries() -> BTreeMap<ContextLabel, ContextEntry> {
    STATIC_CONTEXTS
        .iter()
        .map(|s| {
            let label = ContextLabel::new(s).expect("static labels are non-empty");
            (
                label.clone(),
                ContextEntry {
                    label,
                    origin: ContextOrigin::Static,
                    first_seen: Timestamp::epoch(),
                },
            )
        })
        .collect()
}

/// An immutable, internally consistent view of the catalog.
///
/// Equality compares contents and ignores `taken_at`.
#[derive(Debug, Clone)]
pub struct CatalogSnapshot {
    records: BTreeMap<DocumentCode, GenericRecord>,
    events: Vec<UsageEvent>,
    users: BTreeMap<UserId, UserProfile>,
    contexts: Vec<ContextEntry>,
    taken_at: Timestamp,
    /// Built on first analytical query; shared between clones.
    index: OnceLock<Arc<EventIndex>>,
}

impl PartialEq for CatalogSnapshot {
    fn eq(&self, other: &Self) -> bool {
        self.records == other.records
            && self.events == other.events
            && self.users == other.users
            && self.contexts == other.contexts
    }
}

impl CatalogSnapshot {
    pub fn records(&self) -> impl Iterator<Item = &GenericRecord> {
        self.records.values()
    }

    pub fn record(&self, code: &DocumentCode) -> Option<&GenericRecord> {
        self.records.get(code)
    }

    /// Events in insertion order (ascending event id).
    pub fn events(&self) -> &[UsageEvent] {
        &self.events
    }

    pub fn users(&self) -> impl Iterator<Item = &UserProfile> {
        self.users.values()
    }

    pub fn user(&self, id: &UserId) -> Option<&UserProfile> {
        self.users.get(id)
    }

    pub fn contexts(&self) -> &[ContextEntry] {
        &self.contexts
    }

    pub fn has_context(&self, label: &ContextLabel) -> bool {
        self.contexts.iter().any(|c| &c.label == label)
    }

    pub fn taken_at(&self) -> Timestamp {
        self.taken_at
    }

    pub(crate) fn event_index(&self) -> &EventIndex {
        self.index
            .get_or_init(|| Arc::new(EventIndex::build(&self.events)))
    }
}

/// Outcome of ingesting one source.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IngestReport {
    pub ingested: Vec<DocumentCode>,
    pub errors: Vec<RecordError>,
}

#[derive(Debug, Clone)]
pub struct Catalog {
    sources: SourceRegistry,
    records: BTreeMap<DocumentCode, GenericRecord>,
    users: BTreeMap<UserId, UserProfile>,
    contexts: BTreeMap<ContextLabel, ContextEntry>,
    events: Vec<UsageEvent>,
    next_event: u64,
    vocabularies: Vocabularies,
}

impl Default for Catalog {
    fn default() -> Self {
        Self::new()
    }
}

impl Catalog {
    pub fn new() -> Self {
        Self {
            sources: SourceRegistry::new(),
            records: BTreeMap::new(),
            users: BTreeMap::new(),
            contexts: static_entries(),
            events: Vec::new(),
            next_event: 1,
            vocabularies: Vocabularies::builtin(),
        }
    }

    pub fn sources(&self) -> &SourceRegistry {
        &self.sources
    }

    pub fn sources_mut(&mut self) -> &mut SourceRegistry {
        &mut self.sources
    }

    pub fn register_source(&mut self, d: SourceDescriptor) -> Result<String, FederationError> {
        self.sources.register_source(d)
    }

    pub fn resolve(&self, code: &DocumentCode) -> Result<SourceRecord, FederationError> {
        self.sources.resolve(code)
    }

    /// Harvest a source, map every raw record and store the results.
    ///
    /// Per-record harvest, mapping and validation failures are collected in
    /// the report; only source-level failures are returned as errors.
    pub fn ingest(&mut self, source_id: &str) -> Result<IngestReport, FederationError> {
        let harvest = self.sources.harvest(source_id)?;
        let mapping = self.sources.get(source_id)?.mapping.clone();
        let mut report = IngestReport {
            ingested: Vec::new(),
            errors: harvest.errors,
        };
        for raw in &harvest.records {
            let outcome = map_to_generic(raw, &mapping)
                .map_err(|e| e.to_string())
                .and_then(|record| {
                    let code = record.document_code.clone();
                    self.put_record(record)
                        .map(|_| code)
                        .map_err(|e| e.to_string())
                });
            match outcome {
                Ok(code) => report.ingested.push(code),
                Err(message) => report.errors.push(RecordError {
                    source_id: source_id.to_string(),
                    locator: raw.local_id.clone(),
                    message,
                }),
            }
        }
        Ok(report)
    }

    pub fn put_record(&mut self, r: GenericRecord) -> Result<(), StoreError> {
        let report = validate_record(&r, &self.vocabularies);
        if !report.is_valid() {
            return Err(StoreError::RecordInvalid {
                code: r.document_code,
                report,
            });
        }
        self.records.insert(r.document_code.clone(), r);
        Ok(())
    }

    pub fn get_record(&self, code: &DocumentCode) -> Result<&GenericRecord, StoreError> {
        self.records
            .get(code)
            .ok_or_else(|| StoreError::RecordNotFound(code.clone()))
    }

    pub fn record_count(&self) -> usize {
        self.records.len()
    }

    /// Related-document references that point outside the catalog.
    pub fn dangling_references(&self) -> Vec<(DocumentCode, Finding)> {
        self.records
            .values()
            .flat_map(|r| {
                dangling_references(r, |c| self.records.contains_key(c))
                    .into_iter()
                    .map(|f| (r.document_code.clone(), f))
            })
            .collect()
    }

    /// Insert or replace a user profile.
    pub fn register_user(&mut self, p: UserProfile) -> Result<(), StoreError> {
        let id = UserId::new(p.user_id.clone())
            .map_err(|_| StoreError::MalformedProfile("empty user_id".into()))?;
        self.users.insert(id, p);
        Ok(())
    }

    pub fn user(&self, id: &UserId) -> Option<&UserProfile> {
        self.users.get(id)
    }

    pub fn user_count(&self) -> usize {
        self.users.len()
    }

    /// Append a usage event, enriching the context registry when the
    /// context has not been seen before.
    pub fn record_usage(&mut self, e: NewUsage) -> Result<EventId, StoreError> {
        if !self.records.contains_key(&e.document_code) {
            return Err(StoreError::UnknownDocument(e.document_code));
        }
        if !self.users.contains_key(&e.user_id) {
            return Err(StoreError::UnknownUser(e.user_id.to_string()));
        }
        self.contexts
            .entry(e.context.clone())
            .or_insert_with(|| ContextEntry {
                label: e.context.clone(),
                origin: ContextOrigin::Dynamic,
                first_seen: e.timestamp,
            });
        let event_id = EventId(self.next_event);
        self.next_event += 1;
        self.events.push(UsageEvent {
            event_id,
            document_code: e.document_code,
            context: e.context,
            user_id: e.user_id,
            timestamp: e.timestamp,
            use_type: e.use_type,
        });
        Ok(event_id)
    }

    pub fn event_count(&self) -> usize {
        self.events.len()
    }

    pub fn list_contexts(&self) -> Vec<ContextEntry> {
        let mut entries: Vec<ContextEntry> = self.contexts.values().cloned().collect();
        entries.sort_by(context_order);
        entries
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), StoreError> {
        save(self, path)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, StoreError> {
        load(path)
    }

    pub fn snapshot(&self) -> CatalogSnapshot {
        CatalogSnapshot {
            records: self.records.clone(),
            events: self.events.clone(),
            users: self.users.clone(),
            contexts: self.list_contexts(),
            taken_at: Timestamp::now(),
            index: OnceLock::new(),
        }
    }
}
