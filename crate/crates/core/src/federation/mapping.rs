//! Declarative field mappings from raw source fields into the generic schema.

use std::collections::BTreeMap;
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::code::{parse_document_code, DocumentCode};
use crate::descriptors::{
    validate_record, GenericRecord, ImageDescriptor, SoundDescriptor, SoundTarget, SoundType,
    TextDescriptor, ValidationReport, Vocabularies,
};
use crate::taxonomy::{classify, MediaPresence, Medium};

use super::SourceRecord;

/// Target path that designates the document code instead of a descriptor field.
pub const DOCUMENT_CODE_FIELD: &str = "document_code";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Label,
    Date,
    List,
    CodeList,
    Target,
    SoundType,
    Code,
}

/// Every addressable generic-schema field with its value kind.
pub const GENERIC_FIELDS: &[(&str, FieldKind)] = &[
    ("text.author", FieldKind::Label),
    ("text.title", FieldKind::Label),
    ("text.summary", FieldKind::Label),
    ("text.reference_date", FieldKind::Date),
    ("text.descriptors", FieldKind::List),
    ("text.related_documents", FieldKind::CodeList),
    ("image.dominant_colour", FieldKind::Label),
    ("image.secondary_colour", FieldKind::Label),
    ("image.dominant_shape", FieldKind::Label),
    ("image.secondary_shape", FieldKind::Label),
    ("image.shape_specificity", FieldKind::Label),
    ("image.dominant_object", FieldKind::Label),
    ("image.object_specificity", FieldKind::Label),
    ("image.secondary_object", FieldKind::Label),
    ("image.dominant_feature", FieldKind::Label),
    ("image.secondary_feature", FieldKind::Label),
    ("image.dominant_feature_subclass", FieldKind::Label),
    ("image.secondary_feature_subclass", FieldKind::Label),
    ("image.image_format", FieldKind::Label),
    ("image.image_medium", FieldKind::Label),
    ("image.image_type", FieldKind::Label),
    ("sound.originator", FieldKind::Label),
    ("sound.target", FieldKind::Target),
    ("sound.descriptors", FieldKind::List),
    ("sound.publication_date", FieldKind::Date),
    ("sound.sound_type", FieldKind::SoundType),
    ("sound.sound_class", FieldKind::Label),
    ("sound.sound_subclass", FieldKind::Label),
    (DOCUMENT_CODE_FIELD, FieldKind::Code),
];

pub fn field_kind(path: &str) -> Option<FieldKind> {
    GENERIC_FIELDS
        .iter()
        .find(|(p, _)| *p == path)
        .map(|(_, k)| *k)
}

/// Fields that must be filled for each medium a record carries.
pub fn required_fields(medium: Medium) -> &'static [&'static str] {
    match medium {
        Medium::Text => &["text.title"],
        Medium::Image => &[
            "image.dominant_colour",
            "image.dominant_shape",
            "image.image_format",
            "image.image_medium",
            "image.image_type",
        ],
        Medium::Sound => &["sound.originator", "sound.sound_type"],
    }
}

fn medium_of(path: &str) -> Option<Medium> {
    match path.split_once('.')?.0 {
        "text" => Some(Medium::Text),
        "image" => Some(Medium::Image),
        "sound" => Some(Medium::Sound),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Transform {
    #[default]
    Identity,
    Lowercase,
    DateParse,
    SplitList,
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Transform::Identity => "identity",
            Transform::Lowercase => "lowercase",
            Transform::DateParse => "date-parse",
            Transform::SplitList => "split-list",
        })
    }
}

/// Marks `medium` present when raw `field` is non-empty and, if `equals` is
/// given, its trimmed value is one of the listed values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresenceRule {
    pub medium: Medium,
    pub field: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub equals: Vec<String>,
}

impl PresenceRule {
    pub fn when_present(medium: Medium, field: &str) -> Self {
        Self {
            medium,
            field: field.to_string(),
            equals: Vec::new(),
        }
    }

    pub fn when_equals(medium: Medium, field: &str, values: &[&str]) -> Self {
        Self {
            medium,
            field: field.to_string(),
            equals: values.iter().map(|v| v.to_string()).collect(),
        }
    }

    fn matches(&self, raw: &BTreeMap<String, String>) -> bool {
        match raw.get(&self.field).map(|v| v.trim()) {
            None | Some("") => false,
            Some(value) => self.equals.is_empty() || self.equals.iter().any(|e| e == value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldRule {
    pub source: String,
    pub target: String,
    #[serde(default)]
    pub transform: Transform,
}

impl FieldRule {
    pub fn new(source: &str, target: &str) -> Self {
        Self::with(source, target, Transform::Identity)
    }

    pub fn with(source: &str, target: &str, transform: Transform) -> Self {
        Self {
            source: source.to_string(),
            target: target.to_string(),
            transform,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FieldMapping {
    pub presence_rules: Vec<PresenceRule>,
    pub field_rules: Vec<FieldRule>,
    /// Literal values used for a target when no rule yields one.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub defaults: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("InvalidMapping: {rule}: {reason}")]
pub struct InvalidMapping {
    /// The offending rule, named by its target path (or `presence_rules`).
    pub rule: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MappingError {
    #[error("PresenceUndecidable: no presence rule matched {0}")]
    PresenceUndecidable(String),
    #[error("RequiredFieldMissing: {0}")]
    RequiredFieldMissing(String),
    #[error("InvalidValue: {field}: {value:?}: {reason}")]
    InvalidValue {
        field: String,
        value: String,
        reason: String,
    },
    #[error("ValidationFailed: {}", .0.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    ValidationFailed(ValidationReport),
}

impl FieldMapping {
    /// Checks targets against the generic schema and required-field coverage.
    pub fn validate(&self) -> Result<(), InvalidMapping> {
        let invalid = |rule: &str, reason: String| InvalidMapping {
            rule: rule.to_string(),
            reason,
        };
        if self.presence_rules.is_empty() {
            return Err(invalid("presence_rules", "no presence rules".into()));
        }
        for rule in &self.presence_rules {
            if rule.field.trim().is_empty() {
                return Err(invalid("presence_rules", "empty source field".into()));
            }
        }
        for rule in &self.field_rules {
            let Some(kind) = field_kind(&rule.target) else {
                return Err(invalid(&rule.target, "not a generic schema field".into()));
            };
            if rule.source.trim().is_empty() {
                return Err(invalid(&rule.target, "empty source field".into()));
            }
            let compatible = match rule.transform {
                Transform::Identity | Transform::Lowercase => true,
                Transform::DateParse => kind == FieldKind::Date,
                Transform::SplitList => matches!(kind, FieldKind::List | FieldKind::CodeList),
            };
            if !compatible {
                return Err(invalid(
                    &rule.target,
                    format!("transform {} does not apply to this field", rule.transform),
                ));
            }
        }
        for target in self.defaults.keys() {
            if field_kind(target).is_none() {
                return Err(invalid(target, "not a generic schema field".into()));
            }
        }
        let mut declared: Vec<Medium> = self.presence_rules.iter().map(|r| r.medium).collect();
        declared.sort();
        declared.dedup();
        for medium in declared {
            for required in required_fields(medium) {
                let covered = self.field_rules.iter().any(|r| r.target == *required)
                    || self.defaults.contains_key(*required);
                if !covered {
                    return Err(invalid(
                        required,
                        "required field has no rule or default".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn presence(&self, raw: &BTreeMap<String, String>) -> MediaPresence {
        let mut presence = MediaPresence::default();
        for rule in &self.presence_rules {
            if rule.matches(raw) {
                presence.set(rule.medium, true);
            }
        }
        presence
    }
}

enum Value {
    One(String),
    Many(Vec<String>),
}

fn parse_date(field: &str, value: &str, lenient: bool) -> Result<NaiveDate, MappingError> {
    let formats: &[&str] = if lenient {
        &["%Y-%m-%d", "%Y/%m/%d", "%Y%m%d"]
    } else {
        &["%Y-%m-%d"]
    };
    formats
        .iter()
        .find_map(|f| NaiveDate::parse_from_str(value, f).ok())
        .ok_or_else(|| MappingError::InvalidValue {
            field: field.to_string(),
            value: value.to_string(),
            reason: "not a calendar date".into(),
        })
}

fn apply_transform(field: &str, value: &str, transform: Transform) -> Result<Value, MappingError> {
    Ok(match transform {
        Transform::Identity => Value::One(value.to_string()),
        Transform::Lowercase => Value::One(value.to_lowercase()),
        Transform::DateParse => Value::One(
            parse_date(field, value, true)?
                .format("%Y-%m-%d")
                .to_string(),
        ),
        Transform::SplitList => Value::Many(
            value
                .split([';', ','])
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect(),
        ),
    })
}

/// Resolved values per target path, in rule order.
struct Collected {
    scalars: BTreeMap<String, String>,
    lists: BTreeMap<String, Vec<String>>,
}

impl Collected {
    fn label(&self, path: &str) -> Option<String> {
        self.scalars.get(path).cloned()
    }

    fn required(&self, path: &str) -> Result<String, MappingError> {
        self.label(path)
            .ok_or_else(|| MappingError::RequiredFieldMissing(path.to_string()))
    }

    fn date(&self, path: &str) -> Result<Option<NaiveDate>, MappingError> {
        self.scalars
            .get(path)
            .map(|v| parse_date(path, v, false))
            .transpose()
    }

    fn list(&self, path: &str) -> Vec<String> {
        self.lists.get(path).cloned().unwrap_or_default()
    }
}

fn collect(
    raw: &SourceRecord,
    m: &FieldMapping,
    presence: MediaPresence,
) -> Result<Collected, MappingError> {
    let mut out = Collected {
        scalars: BTreeMap::new(),
        lists: BTreeMap::new(),
    };
    let wanted = |target: &str| medium_of(target).is_none_or(|medium| presence.has(medium));

    for rule in &m.field_rules {
        if !wanted(&rule.target) {
            continue;
        }
        let Some(value) = raw
            .raw_fields
            .get(&rule.source)
            .map(|v| v.trim())
            .filter(|v| !v.is_empty())
        else {
            continue;
        };
        let is_list = matches!(
            field_kind(&rule.target),
            Some(FieldKind::List | FieldKind::CodeList)
        );
        match apply_transform(&rule.target, value, rule.transform)? {
            Value::Many(items) if is_list => out
                .lists
                .entry(rule.target.clone())
                .or_default()
                .extend(items),
            Value::One(item) if is_list => {
                out.lists.entry(rule.target.clone()).or_default().push(item)
            }
            Value::One(item) => {
                out.scalars.entry(rule.target.clone()).or_insert(item);
            }
            Value::Many(_) => unreachable!("split-list is only allowed on list fields"),
        }
    }

    for (target, value) in &m.defaults {
        if !wanted(target) {
            continue;
        }
        match field_kind(target) {
            Some(FieldKind::List | FieldKind::CodeList) => {
                if !out.lists.contains_key(target) {
                    out.lists.insert(target.clone(), vec![value.clone()]);
                }
            }
            _ => {
                out.scalars
                    .entry(target.clone())
                    .or_insert_with(|| value.clone());
            }
        }
    }
    Ok(out)
}

fn parse_code(field: &str, value: &str) -> Result<DocumentCode, MappingError> {
    parse_document_code(value).map_err(|e| MappingError::InvalidValue {
        field: field.to_string(),
        value: value.to_string(),
        reason: e.reason.to_string(),
    })
}

fn parse_token<T: std::str::FromStr>(field: &str, value: &str) -> Result<T, MappingError> {
    value.parse().map_err(|_| MappingError::InvalidValue {
        field: field.to_string(),
        value: value.to_string(),
        reason: "not an allowed token".into(),
    })
}

/// Map one raw source record into the generic schema.
pub fn map_to_generic(raw: &SourceRecord, m: &FieldMapping) -> Result<GenericRecord, MappingError> {
    let presence = m.presence(&raw.raw_fields);
    let media_class = classify(presence).map_err(|_| {
        MappingError::PresenceUndecidable(format!("{}:{}", raw.source_id, raw.local_id))
    })?;
    let values = collect(raw, m, presence)?;

    let document_code =
        match values.label(DOCUMENT_CODE_FIELD) {
            Some(code) => parse_code(DOCUMENT_CODE_FIELD, &code)?,
            None => DocumentCode::compound(raw.source_id.clone(), raw.local_id.clone()).map_err(
                |e| MappingError::InvalidValue {
                    field: DOCUMENT_CODE_FIELD.into(),
                    value: e.input,
                    reason: e.reason.into(),
                },
            )?,
        };

    let text = if presence.text {
        Some(TextDescriptor {
            author: values.label("text.author"),
            title: values.required("text.title")?,
            summary: values.label("text.summary"),
            reference_date: values.date("text.reference_date")?,
            descriptors: values.list("text.descriptors"),
            related_documents: values
                .list("text.related_documents")
                .iter()
                .map(|c| parse_code("text.related_documents", c))
                .collect::<Result<_, _>>()?,
        })
    } else {
        None
    };

    let image = if presence.image {
        Some(ImageDescriptor {
            dominant_colour: values.required("image.dominant_colour")?,
            secondary_colour: values.label("image.secondary_colour"),
            dominant_shape: values.required("image.dominant_shape")?,
            secondary_shape: values.label("image.secondary_shape"),
            shape_specificity: values.label("image.shape_specificity"),
            dominant_object: values.label("image.dominant_object"),
            object_specificity: values.label("image.object_specificity"),
            secondary_object: values.label("image.secondary_object"),
            dominant_feature: values.label("image.dominant_feature"),
            secondary_feature: values.label("image.secondary_feature"),
            dominant_feature_subclass: values.label("image.dominant_feature_subclass"),
            secondary_feature_subclass: values.label("image.secondary_feature_subclass"),
            image_format: values.required("image.image_format")?,
            image_medium: values.required("image.image_medium")?,
            image_type: values.required("image.image_type")?,
        })
    } else {
        None
    };

    let sound = if presence.sound {
        let originator = values.required("sound.originator")?;
        let sound_type: SoundType =
            parse_token("sound.sound_type", &values.required("sound.sound_type")?)?;
        let target: SoundTarget = match values.label("sound.target") {
            Some(t) => parse_token("sound.target", &t)?,
            None => SoundTarget::NotSpecified,
        };
        Some(SoundDescriptor {
            originator,
            target,
            descriptors: values.list("sound.descriptors"),
            publication_date: values.date("sound.publication_date")?,
            sound_type,
            sound_class: values.label("sound.sound_class"),
            sound_subclass: values.label("sound.sound_subclass"),
        })
    } else {
        None
    };

    let record = GenericRecord {
        document_code,
        media_class,
        text,
        image,
        sound,
    };
    let report = validate_record(&record, &Vocabularies::builtin());
    if !report.is_valid() {
        return Err(MappingError::ValidationFailed(report));
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::MediaClass;

    fn raw(local_id: &str, fields: &[(&str, &str)]) -> SourceRecord {
        SourceRecord {
            source_id: "s01".into(),
            local_id: local_id.into(),
            raw_fields: fields
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }

    fn book_mapping() -> FieldMapping {
        FieldMapping {
            presence_rules: vec![
                PresenceRule::when_equals(Medium::Text, "kind", &["book"]),
                PresenceRule::when_equals(Medium::Image, "kind", &["picture"]),
            ],
            field_rules: vec![
                FieldRule::new("title", "text.title"),
                FieldRule::new("author", "text.author"),
                FieldRule::with("keywords", "text.descriptors", Transform::SplitList),
                FieldRule::with("published", "text.reference_date", Transform::DateParse),
                FieldRule::with("colour", "image.dominant_colour", Transform::Lowercase),
                FieldRule::new("shape", "image.dominant_shape"),
                FieldRule::new("medium", "image.image_medium"),
            ],
            defaults: [
                ("image.image_format".to_string(), "jpeg".to_string()),
                ("image.image_type".to_string(), "digital image".to_string()),
            ]
            .into_iter()
            .collect(),
        }
    }

    #[test]
    fn book_row_becomes_text_record() {
        let m = book_mapping();
        m.validate().unwrap();
        let r = map_to_generic(
            &raw("b1", &[("kind", "book"), ("title", "X"), ("author", "Y")]),
            &m,
        )
        .unwrap();
        assert_eq!(r.media_class, MediaClass::Text);
        assert_eq!(r.document_code.to_string(), "s01:b1");
        let text = r.text.unwrap();
        assert_eq!(text.title, "X");
        assert_eq!(text.author.as_deref(), Some("Y"));
    }

    #[test]
    fn no_medium_evidence_is_undecidable() {
        let err = map_to_generic(&raw("b2", &[("title", "X")]), &book_mapping()).unwrap_err();
        assert!(matches!(err, MappingError::PresenceUndecidable(_)));
    }

    #[test]
    fn image_without_colour_is_missing_required_field() {
        let err = map_to_generic(
            &raw(
                "p1",
                &[("kind", "picture"), ("shape", "oval"), ("medium", "paper")],
            ),
            &book_mapping(),
        )
        .unwrap_err();
        assert_eq!(
            err,
            MappingError::RequiredFieldMissing("image.dominant_colour".into())
        );
    }

    #[test]
    fn transforms_apply() {
        let r = map_to_generic(
            &raw(
                "b3",
                &[
                    ("kind", "book"),
                    ("title", "T"),
                    ("keywords", "a; b,c ;"),
                    ("published", "2001/02/03"),
                ],
            ),
            &book_mapping(),
        )
        .unwrap();
        let text = r.text.unwrap();
        assert_eq!(text.descriptors, ["a", "b", "c"]);
        assert_eq!(text.reference_date, NaiveDate::from_ymd_opt(2001, 2, 3));

        let p = map_to_generic(
            &raw(
                "p2",
                &[
                    ("kind", "picture"),
                    ("colour", "RED"),
                    ("shape", "oval"),
                    ("medium", "glass"),
                ],
            ),
            &book_mapping(),
        )
        .unwrap();
        let image = p.image.unwrap();
        assert_eq!(image.dominant_colour, "red");
        assert_eq!(image.image_format, "jpeg");
    }

    #[test]
    fn closed_vocabulary_miss_fails_mapping() {
        let err = map_to_generic(
            &raw(
                "p3",
                &[
                    ("kind", "picture"),
                    ("colour", "red"),
                    ("shape", "dodecagon"),
                    ("medium", "glass"),
                ],
            ),
            &book_mapping(),
        )
        .unwrap_err();
        assert!(matches!(err, MappingError::ValidationFailed(_)));
    }

    #[test]
    fn bad_date_is_invalid_value() {
        let err = map_to_generic(
            &raw(
                "b4",
                &[("kind", "book"), ("title", "T"), ("published", "yesterday")],
            ),
            &book_mapping(),
        )
        .unwrap_err();
        assert!(
            matches!(err, MappingError::InvalidValue { ref field, .. } if field == "text.reference_date")
        );
    }

    #[test]
    fn uri_field_overrides_compound_code() {
        let mut m = book_mapping();
        m.field_rules
            .push(FieldRule::new("link", DOCUMENT_CODE_FIELD));
        let r = map_to_generic(
            &raw(
                "b5",
                &[
                    ("kind", "book"),
                    ("title", "T"),
                    ("link", "https://example.org/d/7"),
                ],
            ),
            &m,
        )
        .unwrap();
        assert_eq!(r.document_code.to_string(), "https://example.org/d/7");
    }

    #[test]
    fn mapping_validation_names_the_offending_rule() {
        let mut m = book_mapping();
        m.field_rules.push(FieldRule::new("hue", "image.hue"));
        assert_eq!(m.validate().unwrap_err().rule, "image.hue");

        let mut m = book_mapping();
        m.defaults.remove("image.image_type");
        assert_eq!(m.validate().unwrap_err().rule, "image.image_type");

        let mut m = book_mapping();
        m.field_rules
            .push(FieldRule::with("x", "text.title", Transform::DateParse));
        assert_eq!(m.validate().unwrap_err().rule, "text.title");

        assert_eq!(
            FieldMapping::default().validate().unwrap_err().rule,
            "presence_rules"
        );
    }

    #[test]
    fn mapping_is_idempotent() {
        let m = book_mapping();
        let row = raw(
            "b6",
            &[("kind", "book"), ("title", "T"), ("keywords", "x,y")],
        );
        assert_eq!(map_to_generic(&row, &m), map_to_generic(&row, &m));
    }

    #[test]
    fn mapping_json_shape() {
        let json = r#"{
            "presence_rules": [{"medium": "text", "field": "kind", "equals": ["book"]}],
            "field_rules": [{"source": "t", "target": "text.title"},
                            {"source": "d", "target": "text.reference_date", "transform": "date-parse"}]
        }"#;
        let m: FieldMapping = serde_json::from_str(json).unwrap();
        assert_eq!(m.field_rules[1].transform, Transform::DateParse);
        m.validate().unwrap();
    }
}
