use std::collections::BTreeMap;
use std::fs;
use std::path::{Component, Path, PathBuf};

use super::{split_field_line, FederationError, Harvest, RecordError, SourceAdapter, SourceRecord};

const EXTENSION: &str = "meta";

pub(super) struct FileTreeAdapter<'a> {
    source_id: &'a str,
    root: &'a Path,
}

impl<'a> FileTreeAdapter<'a> {
    pub(super) fn new(source_id: &'a str, root: &'a str) -> Self {
        Self {
            source_id,
            root: Path::new(root),
        }
    }

    fn walk(&self, dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
        for entry in fs::read_dir(dir)? {
            let path = entry?.path();
            if path.is_dir() {
                self.walk(&path, out)?;
            } else if path.extension().is_some_and(|e| e == EXTENSION) {
                out.push(path);
            }
        }
        Ok(())
    }

    fn local_id(&self, path: &Path) -> Option<String> {
        let relative = path.strip_prefix(self.root).ok()?.with_extension("");
        let parts: Option<Vec<&str>> = relative
            .components()
            .map(|c| c.as_os_str().to_str())
            .collect();
        Some(parts?.join("/"))
    }

    fn parse(&self, local_id: &str, path: &Path) -> Result<SourceRecord, String> {
        let content = fs::read_to_string(path).map_err(|e| e.to_string())?;
        let mut raw_fields = BTreeMap::new();
        for (index, line) in content.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let (field, value) = split_field_line(line)
                .ok_or_else(|| format!("line {}: expected field<TAB>value", index + 1))?;
            if raw_fields
                .insert(field.to_string(), value.to_string())
                .is_some()
            {
                return Err(format!("line {}: duplicate field {field:?}", index + 1));
            }
        }
        Ok(SourceRecord {
            source_id: self.source_id.to_string(),
            local_id: local_id.to_string(),
            raw_fields,
        })
    }
}

impl SourceAdapter for FileTreeAdapter<'_> {
    fn harvest(&self) -> Result<Harvest, FederationError> {
        if !self.root.is_dir() {
            return Err(FederationError::unreachable(
                self.source_id,
                format!("{} is not a directory", self.root.display()),
            ));
        }
        let mut files = Vec::new();
        self.walk(self.root, &mut files)
            .map_err(|e| FederationError::unreachable(self.source_id, e))?;

        let mut harvest = Harvest::default();
        for path in files {
            let locator = path.display().to_string();
            let parsed = self
                .local_id(&path)
                .ok_or_else(|| "file name is not valid UTF-8".to_string())
                .and_then(|id| self.parse(&id, &path));
            match parsed {
                Ok(record) => harvest.records.push(record),
                Err(message) => harvest.errors.push(RecordError {
                    source_id: self.source_id.to_string(),
                    locator,
                    message,
                }),
            }
        }
        Ok(harvest)
    }

    fn fetch(&self, local_id: &str) -> Result<SourceRecord, FederationError> {
        let relative = Path::new(local_id);
        let safe = relative
            .components()
            .all(|c| matches!(c, Component::Normal(_)));
        let path = self.root.join(format!("{local_id}.{EXTENSION}"));
        if !safe || !path.is_file() {
            if !self.root.is_dir() {
                return Err(FederationError::unreachable(
                    self.source_id,
                    format!("{} is not a directory", self.root.display()),
                ));
            }
            return Err(FederationError::NotFoundAtSource(local_id.to_string()));
        }
        self.parse(local_id, &path)
            .map_err(|reason| FederationError::unreachable(self.source_id, reason))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerates_sidecars_sorted() {
        let dir = tempfile::tempdir().unwrap();
        for id in ["c", "a", "b"] {
            fs::write(
                dir.path().join(format!("{id}.meta")),
                format!("title\tDoc {id}\nkind\tpicture\n"),
            )
            .unwrap();
        }
        fs::write(dir.path().join("ignored.txt"), "x").unwrap();
        let root = dir.path().to_str().unwrap();
        let adapter = FileTreeAdapter::new("ft", root);
        let harvest = adapter.harvest().unwrap().finish();
        let ids: Vec<_> = harvest
            .records
            .iter()
            .map(|r| r.local_id.as_str())
            .collect();
        assert_eq!(ids, ["a", "b", "c"]);
        assert!(harvest.errors.is_empty());
        assert_eq!(harvest.records[0].raw_fields["title"], "Doc a");
    }

    #[test]
    fn nested_directories_and_bad_files() {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir(dir.path().join("sub")).unwrap();
        fs::write(dir.path().join("sub/x.meta"), "title\tX\n").unwrap();
        fs::write(dir.path().join("bad.meta"), "no tab here\n").unwrap();
        let root = dir.path().to_str().unwrap();
        let adapter = FileTreeAdapter::new("ft", root);
        let harvest = adapter.harvest().unwrap();
        assert_eq!(harvest.records.len(), 1);
        assert_eq!(harvest.records[0].local_id, "sub/x");
        assert_eq!(harvest.errors.len(), 1);

        assert_eq!(adapter.fetch("sub/x").unwrap().raw_fields["title"], "X");
        assert_eq!(
            adapter.fetch("../etc/passwd"),
            Err(FederationError::NotFoundAtSource("../etc/passwd".into()))
        );
        assert_eq!(
            adapter.fetch("ghost"),
            Err(FederationError::NotFoundAtSource("ghost".into()))
        );
    }

    #[test]
    fn missing_directory_is_unreachable() {
        let adapter = FileTreeAdapter::new("ft", "/no/such/dir");
        assert!(matches!(
            adapter.harvest(),
            Err(FederationError::SourceUnreachable { .. })
        ));
    }
}
