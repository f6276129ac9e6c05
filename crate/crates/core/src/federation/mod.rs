//! Federated sources: registration, harvesting, mapping into the generic
//! schema, and resolution of document codes back to origin records.
//!
//! Three adapter kinds are built in:
//!
//! - `tabular`: a UTF-8 file whose first line is a tab-separated header of
//!   field paths; the `id` column carries the local id.
//! - `file-tree`: a directory where each document is `<local_id>.meta`
//!   holding `field<TAB>value` lines.
//! - `remote-line`: a TCP endpoint speaking the line protocol in
//!   [`remote`].
//!
//! Per-record problems are collected in the [`Harvest`]; only failures that
//! make the whole source unreadable abort a harvest.

mod filetree;
pub mod mapping;
pub mod remote;
mod tabular;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::code::DocumentCode;
pub use mapping::{
    map_to_generic, FieldMapping, FieldRule, InvalidMapping, MappingError, PresenceRule, Transform,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FederationError {
    #[error("DuplicateSource: {0}")]
    DuplicateSource(String),
    #[error("InvalidSourceId: {0:?} must match [a-z0-9_-]{{1,32}}")]
    InvalidSourceId(String),
    #[error(transparent)]
    InvalidMapping(#[from] InvalidMapping),
    #[error("UnknownSource: {0}")]
    UnknownSource(String),
    #[error("SourceDisabled: {0}")]
    SourceDisabled(String),
    #[error("SourceUnreachable: {source_id}: {reason}")]
    SourceUnreachable { source_id: String, reason: String },
    #[error("NotFoundAtSource: {0}")]
    NotFoundAtSource(String),
}

impl FederationError {
    fn unreachable(source_id: &str, reason: impl fmt::Display) -> Self {
        FederationError::SourceUnreachable {
            source_id: source_id.to_string(),
            reason: reason.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceKind {
    Tabular,
    FileTree,
    RemoteLine,
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SourceKind::Tabular => "tabular",
            SourceKind::FileTree => "file-tree",
            SourceKind::RemoteLine => "remote-line",
        })
    }
}

impl FromStr for SourceKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tabular" => Ok(SourceKind::Tabular),
            "file-tree" => Ok(SourceKind::FileTree),
            "remote-line" => Ok(SourceKind::RemoteLine),
            other => Err(format!(
                "unknown source kind {other:?} (expected tabular, file-tree or remote-line)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceDescriptor {
    pub source_id: String,
    pub kind: SourceKind,
    /// Path for tabular and file-tree sources, `tcp://host:port` for remote ones.
    pub location: String,
    pub mapping: FieldMapping,
    pub enabled: bool,
}

/// A record exactly as the origin source holds it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceRecord {
    pub source_id: String,
    pub local_id: String,
    pub raw_fields: BTreeMap<String, String>,
}

/// A per-record failure that did not stop the harvest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordError {
    pub source_id: String,
    /// Where the record lives (line number, file, or local id).
    pub locator: String,
    pub message: String,
}

impl fmt::Display for RecordError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", self.source_id, self.locator, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Harvest {
    /// Sorted by local id.
    pub records: Vec<SourceRecord>,
    pub errors: Vec<RecordError>,
}

impl Harvest {
    fn finish(mut self) -> Self {
        self.records.sort_by(|a, b| a.local_id.cmp(&b.local_id));
        self
    }
}

/// Per-kind access to one registered source.
pub trait SourceAdapter {
    fn harvest(&self) -> Result<Harvest, FederationError>;
    fn fetch(&self, local_id: &str) -> Result<SourceRecord, FederationError>;
}

pub fn adapter_for(d: &SourceDescriptor) -> Box<dyn SourceAdapter + '_> {
    match d.kind {
        SourceKind::Tabular => Box::new(tabular::TabularAdapter::new(&d.source_id, &d.location)),
        SourceKind::FileTree => Box::new(filetree::FileTreeAdapter::new(&d.source_id, &d.location)),
        SourceKind::RemoteLine => {
            Box::new(remote::RemoteLineAdapter::new(&d.source_id, &d.location))
        }
    }
}

/// The set of registered federated sources.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SourceRegistry {
    sources: BTreeMap<String, SourceDescriptor>,
}

impl SourceRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register_source(&mut self, d: SourceDescriptor) -> Result<String, FederationError> {
        if !crate::code::is_valid_source_id(&d.source_id) {
            return Err(FederationError::InvalidSourceId(d.source_id));
        }
        if self.sources.contains_key(&d.source_id) {
            return Err(FederationError::DuplicateSource(d.source_id));
        }
        d.mapping.validate()?;
        let id = d.source_id.clone();
        self.sources.insert(id.clone(), d);
        Ok(id)
    }

    pub fn get(&self, source_id: &str) -> Result<&SourceDescriptor, FederationError> {
        self.sources
            .get(source_id)
            .ok_or_else(|| FederationError::UnknownSource(source_id.to_string()))
    }

    pub fn set_enabled(&mut self, source_id: &str, enabled: bool) -> Result<(), FederationError> {
        self.sources
            .get_mut(source_id)
            .ok_or_else(|| FederationError::UnknownSource(source_id.to_string()))?
            .enabled = enabled;
        Ok(())
    }

    /// Sources in id order.
    pub fn iter(&self) -> impl Iterator<Item = &SourceDescriptor> {
        self.sources.values()
    }

    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }

    pub fn harvest(&self, source_id: &str) -> Result<Harvest, FederationError> {
        let d = self.get(source_id)?;
        if !d.enabled {
            return Err(FederationError::SourceDisabled(source_id.to_string()));
        }
        adapter_for(d).harvest().map(Harvest::finish)
    }

    /// Fetch the full origin record behind a document code.
    ///
    /// URI codes are not fetched; the returned record has an empty
    /// `source_id` and a single `uri` field.
    pub fn resolve(&self, code: &DocumentCode) -> Result<SourceRecord, FederationError> {
        match code {
            DocumentCode::Uri(uri) => Ok(SourceRecord {
                source_id: String::new(),
                local_id: uri.clone(),
                raw_fields: [("uri".to_string(), uri.clone())].into_iter().collect(),
            }),
            DocumentCode::Compound {
                source_id,
                local_id,
            } => {
                let d = self.get(source_id)?;
                adapter_for(d).fetch(local_id).map_err(|e| match e {
                    FederationError::NotFoundAtSource(_) => {
                        FederationError::NotFoundAtSource(code.to_string())
                    }
                    other => other,
                })
            }
        }
    }
}

/// Split a `field<TAB>value` line. The value keeps any further tabs.
fn split_field_line(line: &str) -> Option<(&str, &str)> {
    let (field, value) = line.split_once('\t')?;
    if field.trim().is_empty() {
        return None;
    }
    Some((field.trim(), value))
}
