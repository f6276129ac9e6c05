use std::collections::{BTreeMap, BTreeSet};
use std::fs;

use super::{FederationError, Harvest, RecordError, SourceAdapter, SourceRecord};

const ID_COLUMN: &str = "id";

pub(super) struct TabularAdapter<'a> {
    source_id: &'a str,
    path: &'a str,
}

impl<'a> TabularAdapter<'a> {
    pub(super) fn new(source_id: &'a str, path: &'a str) -> Self {
        Self { source_id, path }
    }

    fn read(&self) -> Result<Harvest, FederationError> {
        let content = fs::read_to_string(self.path).map_err(|e| {
            FederationError::unreachable(self.source_id, format!("{}: {e}", self.path))
        })?;
        let mut lines = content.lines().enumerate();
        let header: Vec<String> = match lines.next() {
            Some((_, h)) => h
                .trim_end_matches('\r')
                .split('\t')
                .map(|c| c.trim().to_string())
                .collect(),
            None => return Ok(Harvest::default()),
        };
        let Some(id_index) = header.iter().position(|c| c == ID_COLUMN) else {
            return Err(FederationError::unreachable(
                self.source_id,
                format!("{}: header has no {ID_COLUMN:?} column", self.path),
            ));
        };

        let mut harvest = Harvest::default();
        let mut seen = BTreeSet::new();
        for (index, line) in lines {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let locator = format!("line {}", index + 1);
            let cells: Vec<&str> = line.split('\t').collect();
            let problem = if cells.len() != header.len() {
                Some(format!(
                    "expected {} fields, found {}",
                    header.len(),
                    cells.len()
                ))
            } else if cells[id_index].trim().is_empty() {
                Some("empty id".to_string())
            } else if !seen.insert(cells[id_index].trim().to_string()) {
                Some(format!("duplicate id {:?}", cells[id_index].trim()))
            } else {
                None
            };
            if let Some(message) = problem {
                harvest.errors.push(RecordError {
                    source_id: self.source_id.to_string(),
                    locator,
                    message,
                });
                continue;
            }
            let raw_fields: BTreeMap<String, String> = header
                .iter()
                .zip(&cells)
                .map(|(k, v)| (k.clone(), v.to_string()))
                .collect();
            harvest.records.push(SourceRecord {
                source_id: self.source_id.to_string(),
                local_id: cells[id_index].trim().to_string(),
                raw_fields,
            });
        }
        Ok(harvest)
    }
}

impl SourceAdapter for TabularAdapter<'_> {
    fn harvest(&self) -> Result<Harvest, FederationError> {
        self.read()
    }

    fn fetch(&self, local_id: &str) -> Result<SourceRecord, FederationError> {
        self.read()?
            .records
            .into_iter()
            .find(|r| r.local_id == local_id)
            .ok_or_else(|| FederationError::NotFoundAtSource(local_id.to_string()))
    }
}
