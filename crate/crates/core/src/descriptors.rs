//! Per-media metadata descriptors, the composite generic record, and
//! validation against controlled vocabularies.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::code::DocumentCode;
use crate::taxonomy::{classify, decompose, MediaClass, MediaPresence, Medium, TaxonomyError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DescriptorError {
    #[error("DuplicateDescriptor: record already carries a {0} descriptor")]
    DuplicateDescriptor(Medium),
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
    #[error("InvalidToken: {value:?} is not a valid {what}")]
    InvalidToken { what: &'static str, value: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TextDescriptor {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub author: Option<String>,
    pub title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<String>,
    /// Publication date of the enclosing document.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_date: Option<NaiveDate>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub descriptors: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub related_documents: Vec<DocumentCode>,
}

impl TextDescriptor {
    pub fn titled(title: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            ..Default::default()
        }
    }
}

/// Visible physical properties of an image.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ImageDescriptor {
    pub dominant_colour: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secondary_colour: Option<String>,
    pub dominant_shape: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secondary_shape: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape_specificity: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dominant_object: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub object_specificity: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secondary_object: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dominant_feature: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secondary_feature: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dominant_feature_subclass: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secondary_feature_subclass: Option<String>,
    pub image_format: String,
    pub image_medium: String,
    pub image_type: String,
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
pub enum SoundTarget {
    #[serde(rename = "public")]
    Public,
    #[serde(rename = "private")]
    Private,
    #[default]
    #[serde(rename = "not-specified")]
    NotSpecified,
}

impl SoundTarget {
    pub const ALL: [SoundTarget; 3] = [
        SoundTarget::Public,
        SoundTarget::Private,
        SoundTarget::NotSpecified,
    ];

    pub fn token(self) -> &'static str {
        match self {
            SoundTarget::Public => "public",
            SoundTarget::Private => "private",
            SoundTarget::NotSpecified => "not-specified",
        }
    }
}

impl FromStr for SoundTarget {
    type Err = DescriptorError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SoundTarget::ALL
            .into_iter()
            .find(|t| t.token() == s)
            .ok_or_else(|| DescriptorError::InvalidToken {
                what: "sound target",
                value: s.to_string(),
            })
    }
}

impl fmt::Display for SoundTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SoundType {
    Noise,
    Music,
    Voice,
}

impl SoundType {
    pub const ALL: [SoundType; 3] = [SoundType::Noise, SoundType::Music, SoundType::Voice];

    pub fn token(self) -> &'static str {
        match self {
            SoundType::Noise => "noise",
            SoundType::Music => "music",
            SoundType::Voice => "voice",
        }
    }
}

impl FromStr for SoundType {
    type Err = DescriptorError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SoundType::ALL
            .into_iter()
            .find(|t| t.token() == s)
            .ok_or_else(|| DescriptorError::InvalidToken {
                what: "sound type",
                value: s.to_string(),
            })
    }
}

impl fmt::Display for SoundType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SoundDescriptor {
    pub originator: String,
    #[serde(default)]
    pub target: SoundTarget,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub descriptors: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub publication_date: Option<NaiveDate>,
    pub sound_type: SoundType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sound_class: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sound_subclass: Option<String>,
}

impl SoundDescriptor {
    pub fn new(originator: impl Into<String>, sound_type: SoundType) -> Self {
        Self {
            originator: originator.into(),
            target: SoundTarget::NotSpecified,
            descriptors: Vec::new(),
            publication_date: None,
            sound_type,
            sound_class: None,
            sound_subclass: None,
        }
    }
}

/// Any one of the three descriptor kinds.
// Short-lived argument type; boxing would only add noise at call sites.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Descriptor {
    Text(TextDescriptor),
    Image(ImageDescriptor),
    Sound(SoundDescriptor),
}

impl Descriptor {
    pub fn medium(&self) -> Medium {
        match self {
            Descriptor::Text(_) => Medium::Text,
            Descriptor::Image(_) => Medium::Image,
            Descriptor::Sound(_) => Medium::Sound,
        }
    }
}

/// One entry of the generic (derived) database.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenericRecord {
    pub document_code: DocumentCode,
    pub media_class: MediaClass,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<TextDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image: Option<ImageDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sound: Option<SoundDescriptor>,
}

impl GenericRecord {
    /// Builds a record whose class is derived from the descriptors supplied.
    pub fn new(
        document_code: DocumentCode,
        text: Option<TextDescriptor>,
        image: Option<ImageDescriptor>,
        sound: Option<SoundDescriptor>,
    ) -> Result<Self, DescriptorError> {
        let presence = MediaPresence::new(text.is_some(), image.is_some(), sound.is_some());
        Ok(Self {
            document_code,
            media_class: classify(presence)?,
            text,
            image,
            sound,
        })
    }

    /// Presence triple implied by the attached descriptors (not the stored class).
    pub fn descriptor_presence(&self) -> MediaPresence {
        MediaPresence::new(
            self.text.is_some(),
            self.image.is_some(),
            self.sound.is_some(),
        )
    }

    pub fn has_descriptor(&self, medium: Medium) -> bool {
        self.descriptor_presence().has(medium)
    }
}

/// Attach one more descriptor and reclassify.
pub fn attach_descriptor(
    mut r: GenericRecord,
    d: Descriptor,
) -> Result<GenericRecord, DescriptorError> {
    let medium = d.medium();
    if r.has_descriptor(medium) {
        return Err(DescriptorError::DuplicateDescriptor(medium));
    }
    match d {
        Descriptor::Text(t) => r.text = Some(t),
        Descriptor::Image(i) => r.image = Some(i),
        Descriptor::Sound(s) => r.sound = Some(s),
    }
    r.media_class = classify(r.descriptor_presence())?;
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlledVocabulary {
    pub name: String,
    pub members: BTreeSet<String>,
    /// Open vocabularies accept unseen members with a warning.
    pub open: bool,
}

impl ControlledVocabulary {
    pub fn new<'a>(name: &str, open: bool, members: impl IntoIterator<Item = &'a str>) -> Self {
        Self {
            name: name.to_string(),
            members: members.into_iter().map(str::to_string).collect(),
            open,
        }
    }

    pub fn contains(&self, value: &str) -> bool {
        self.members.contains(value)
    }
}

pub const COLOURS: [&str; 10] = [
    "red", "orange", "yellow", "green", "blue", "indigo", "violet", "grey", "black", "white",
];
pub const SHAPES: [&str; 9] = [
    "oval",
    "circle",
    "square",
    "rectangle",
    "triangle",
    "cylindrical",
    "rhombus",
    "irregular",
    "line",
];
pub const MEDIA: [&str; 7] = [
    "wood",
    "electronic",
    "paper",
    "glass",
    "stone",
    "plastic",
    "composite",
];

/// Named vocabularies keyed by name.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabularies {
    by_name: BTreeMap<String, ControlledVocabulary>,
}

impl Vocabularies {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The built-in closed and open vocabularies.
    pub fn builtin() -> Self {
        let sound_types: Vec<&str> = SoundType::ALL.iter().map(|t| t.token()).collect();
        let targets: Vec<&str> = SoundTarget::ALL.iter().map(|t| t.token()).collect();
        [
            ControlledVocabulary::new("colour", false, COLOURS),
            ControlledVocabulary::new("shape", false, SHAPES),
            ControlledVocabulary::new("medium", false, MEDIA),
            ControlledVocabulary::new("sound_type", false, sound_types),
            ControlledVocabulary::new("target", false, targets),
            ControlledVocabulary::new(
                "shape_specificity",
                true,
                ["repeated", "perfect shape", "deformed", "interposed"],
            ),
            ControlledVocabulary::new("object", true, ["equipment", "tool"]),
            ControlledVocabulary::new(
                "object_specificity",
                true,
                ["deformed", "at foreground", "at background"],
            ),
            ControlledVocabulary::new(
                "feature",
                true,
                [
                    "nature",
                    "water body",
                    "sporting",
                    "animal",
                    "human being",
                    "activity",
                ],
            ),
            ControlledVocabulary::new(
                "feature_subclass",
                true,
                [
                    "animal-mammal",
                    "animal-wild",
                    "animal-domestic",
                    "water-ocean",
                    "activity-war",
                    "activity-manufacturing",
                ],
            ),
            ControlledVocabulary::new(
                "image_type",
                true,
                [
                    "water colour",
                    "digital image",
                    "oil colour",
                    "sketch",
                    "humour",
                    "cartoon",
                ],
            ),
            ControlledVocabulary::new(
                "sound_class",
                true,
                ["debate", "dialogue", "music", "publicity"],
            ),
            ControlledVocabulary::new(
                "sound_subclass",
                true,
                [
                    "country music",
                    "blast noise",
                    "industrial noise",
                    "warning sound",
                    "disorder",
                ],
            ),
        ]
        .into_iter()
        .collect()
    }

    pub fn insert(&mut self, vocabulary: ControlledVocabulary) {
        self.by_name.insert(vocabulary.name.clone(), vocabulary);
    }

    pub fn get(&self, name: &str) -> Option<&ControlledVocabulary> {
        self.by_name.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &ControlledVocabulary> {
        self.by_name.values()
    }
}

impl FromIterator<ControlledVocabulary> for Vocabularies {
    fn from_iter<I: IntoIterator<Item = ControlledVocabulary>>(iter: I) -> Self {
        let mut v = Vocabularies::empty();
        for vocabulary in iter {
            v.insert(vocabulary);
        }
        v
    }
}

/// Which vocabulary governs a generic field, if any.
pub fn vocabulary_for(field: &str) -> Option<&'static str> {
    Some(match field {
        "image.dominant_colour" | "image.secondary_colour" => "colour",
        "image.dominant_shape" | "image.secondary_shape" => "shape",
        "image.shape_specificity" => "shape_specificity",
        "image.dominant_object" | "image.secondary_object" => "object",
        "image.object_specificity" => "object_specificity",
        "image.dominant_feature" | "image.secondary_feature" => "feature",
        "image.dominant_feature_subclass" | "image.secondary_feature_subclass" => {
            "feature_subclass"
        }
        "image.image_medium" => "medium",
        "image.image_type" => "image_type",
        "sound.sound_type" => "sound_type",
        "sound.target" => "target",
        "sound.sound_class" => "sound_class",
        "sound.sound_subclass" => "sound_subclass",
        _ => return None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    /// Descriptor presence disagrees with the stored media class.
    ClassMismatch,
    RequiredField,
    ClosedVocabulary,
    OpenVocabulary,
    SubclassForm,
    SubclassWithoutFeature,
    DanglingReference,
}

impl Rule {
    pub fn id(self) -> &'static str {
        match self {
            Rule::ClassMismatch => "class-mismatch",
            Rule::RequiredField => "required-field",
            Rule::ClosedVocabulary => "closed-vocabulary",
            Rule::OpenVocabulary => "open-vocabulary",
            Rule::SubclassForm => "subclass-form",
            Rule::SubclassWithoutFeature => "subclass-without-feature",
            Rule::DanglingReference => "dangling-reference",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub field: String,
    pub rule: Rule,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]: {}", self.field, self.rule, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Finding>,
    pub warnings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn violation(&mut self, field: &str, rule: Rule, message: String) {
        self.violations.push(Finding {
            field: field.to_string(),
            rule,
            message,
        });
    }

    fn warning(&mut self, field: &str, rule: Rule, message: String) {
        self.warnings.push(Finding {
            field: field.to_string(),
            rule,
            message,
        });
    }

    fn required(&mut self, field: &str, value: &str) {
        if value.trim().is_empty() {
            self.violation(field, Rule::RequiredField, "required field is empty".into());
        }
    }

    fn vocabulary(&mut self, vocabularies: &Vocabularies, field: &str, value: Option<&str>) {
        let Some(value) = value else { return };
        let Some(vocabulary) = vocabulary_for(field).and_then(|name| vocabularies.get(name)) else {
            return;
        };
        if vocabulary.contains(value) {
            return;
        }
        let message = format!("{value:?} is not in vocabulary {:?}", vocabulary.name);
        if vocabulary.open {
            self.warning(field, Rule::OpenVocabulary, message);
        } else {
            self.violation(field, Rule::ClosedVocabulary, message);
        }
    }

    fn subclass(&mut self, field: &str, subclass: Option<&str>, parent: Option<&str>) {
        let Some(subclass) = subclass else { return };
        if parent.is_none() {
            self.violation(
                field,
                Rule::SubclassWithoutFeature,
                "sub-class given without its feature".into(),
            );
        }
        let parts: Vec<&str> = subclass.split(['-', '.']).collect();
        if parts.len() < 2 || parts.iter().any(|p| p.trim().is_empty()) {
            self.violation(
                field,
                Rule::SubclassForm,
                format!("{subclass:?} is not of the form parent-child"),
            );
        }
    }
}

/// Check class/descriptor consistency, required fields and vocabularies.
///
/// Problems are collected, never thrown. Closed-vocabulary misses are
/// violations; open-vocabulary misses are warnings.
pub fn validate_record(r: &GenericRecord, vocabularies: &Vocabularies) -> ValidationReport {
    let mut report = ValidationReport::default();

    let expected = decompose(r.media_class);
    let actual = r.descriptor_presence();
    for medium in Medium::ALL {
        if expected.has(medium) != actual.has(medium) {
            let message = if actual.has(medium) {
                format!(
                    "descriptor/class mismatch: {medium} descriptor attached to a {} record",
                    r.media_class
                )
            } else {
                format!(
                    "descriptor/class mismatch: {} record lacks a {medium} descriptor",
                    r.media_class
                )
            };
            report.violation(medium.as_str(), Rule::ClassMismatch, message);
        }
    }

    if let Some(text) = &r.text {
        report.required("text.title", &text.title);
    }

    if let Some(image) = &r.image {
        report.required("image.dominant_colour", &image.dominant_colour);
        report.required("image.dominant_shape", &image.dominant_shape);
        report.required("image.image_format", &image.image_format);
        report.required("image.image_medium", &image.image_medium);
        report.required("image.image_type", &image.image_type);
        let fields: [(&str, Option<&str>); 12] = [
            ("image.dominant_colour", Some(&image.dominant_colour)),
            ("image.secondary_colour", image.secondary_colour.as_deref()),
            ("image.dominant_shape", Some(&image.dominant_shape)),
            ("image.secondary_shape", image.secondary_shape.as_deref()),
            (
                "image.shape_specificity",
                image.shape_specificity.as_deref(),
            ),
            ("image.dominant_object", image.dominant_object.as_deref()),
            (
                "image.object_specificity",
                image.object_specificity.as_deref(),
            ),
            ("image.secondary_object", image.secondary_object.as_deref()),
            ("image.dominant_feature", image.dominant_feature.as_deref()),
            (
                "image.secondary_feature",
                image.secondary_feature.as_deref(),
            ),
            ("image.image_medium", Some(&image.image_medium)),
            ("image.image_type", Some(&image.image_type)),
        ];
        for (field, value) in fields {
            if value.is_some_and(|v| !v.is_empty()) {
                report.vocabulary(vocabularies, field, value);
            }
        }
        report.subclass(
            "image.dominant_feature_subclass",
            image.dominant_feature_subclass.as_deref(),
            image.dominant_feature.as_deref(),
        );
        report.subclass(
            "image.secondary_feature_subclass",
            image.secondary_feature_subclass.as_deref(),
            image.secondary_feature.as_deref(),
        );
        report.vocabulary(
            vocabularies,
            "image.dominant_feature_subclass",
            image.dominant_feature_subclass.as_deref(),
        );
        report.vocabulary(
            vocabularies,
            "image.secondary_feature_subclass",
            image.secondary_feature_subclass.as_deref(),
        );
    }

    if let Some(sound) = &r.sound {
        report.required("sound.originator", &sound.originator);
        report.vocabulary(
            vocabularies,
            "sound.sound_type",
            Some(sound.sound_type.token()),
        );
        report.vocabulary(vocabularies, "sound.target", Some(sound.target.token()));
        report.vocabulary(
            vocabularies,
            "sound.sound_class",
            sound.sound_class.as_deref(),
        );
        report.vocabulary(
            vocabularies,
            "sound.sound_subclass",
            sound.sound_subclass.as_deref(),
        );
    }

    report
}

/// Warnings for related documents that are not in `known`.
pub fn dangling_references(
    r: &GenericRecord,
    mut known: impl FnMut(&DocumentCode) -> bool,
) -> Vec<Finding> {
    let Some(text) = &r.text else {
        return Vec::new();
    };
    text.related_documents
        .iter()
        .filter(|code| !known(code))
        .map(|code| Finding {
            field: "text.related_documents".into(),
            rule: Rule::DanglingReference,
            message: format!("{code} is not in the catalog"),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(s: &str) -> DocumentCode {
        s.parse().unwrap()
    }

    pub(crate) fn sample_image() -> ImageDescriptor {
        ImageDescriptor {
            dominant_colour: "blue".into(),
            dominant_shape: "circle".into(),
            image_format: "jpeg".into(),
            image_medium: "paper".into(),
            image_type: "sketch".into(),
            ..Default::default()
        }
    }

    #[test]
    fn music_record_is_valid() {
        let r = GenericRecord::new(
            code("s01:m1"),
            None,
            None,
            Some(SoundDescriptor::new("orchestra", SoundType::Music)),
        )
        .unwrap();
        assert_eq!(r.media_class, MediaClass::Sound);
        let report = validate_record(&r, &Vocabularies::builtin());
        assert_eq!(report, ValidationReport::default());
    }

    #[test]
    fn text_record_with_image_is_a_mismatch() {
        let mut r = GenericRecord::new(
            code("s01:b1"),
            Some(TextDescriptor::titled("X")),
            None,
            None,
        )
        .unwrap();
        r.image = Some(sample_image());
        let report = validate_record(&r, &Vocabularies::builtin());
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].rule, Rule::ClassMismatch);
        assert_eq!(report.violations[0].field, "image");
        assert!(report.violations[0]
            .message
            .contains("descriptor/class mismatch"));
    }

    #[test]
    fn closed_shape_vocabulary_rejects_dodecagon() {
        let mut image = sample_image();
        image.dominant_shape = "dodecagon".into();
        let r = GenericRecord::new(code("s01:i1"), None, Some(image), None).unwrap();
        let report = validate_record(&r, &Vocabularies::builtin());
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].field, "image.dominant_shape");
        assert_eq!(report.violations[0].rule, Rule::ClosedVocabulary);
    }

    #[test]
    fn every_listed_shape_is_accepted() {
        for shape in SHAPES {
            let mut image = sample_image();
            image.dominant_shape = shape.into();
            image.secondary_shape = Some(shape.into());
            let r = GenericRecord::new(code("s01:i1"), None, Some(image), None).unwrap();
            assert!(validate_record(&r, &Vocabularies::builtin()).is_valid());
        }
    }

    #[test]
    fn open_vocabulary_miss_is_a_warning() {
        let mut image = sample_image();
        image.dominant_object = Some("spaceship".into());
        image.image_type = "photograph".into();
        let r = GenericRecord::new(code("s01:i1"), None, Some(image), None).unwrap();
        let report = validate_record(&r, &Vocabularies::builtin());
        assert!(report.is_valid());
        let fields: Vec<_> = report.warnings.iter().map(|w| w.field.as_str()).collect();
        assert_eq!(fields, ["image.dominant_object", "image.image_type"]);
    }

    #[test]
    fn subclass_rules() {
        let mut image = sample_image();
        image.secondary_feature_subclass = Some("animal-mammal".into());
        image.dominant_feature = Some("animal".into());
        image.dominant_feature_subclass = Some("mammal".into());
        let r = GenericRecord::new(code("s01:i1"), None, Some(image), None).unwrap();
        let rules: Vec<_> = validate_record(&r, &Vocabularies::builtin())
            .violations
            .iter()
            .map(|v| (v.field.clone(), v.rule))
            .collect();
        assert_eq!(
            rules,
            [
                (
                    "image.dominant_feature_subclass".to_string(),
                    Rule::SubclassForm
                ),
                (
                    "image.secondary_feature_subclass".to_string(),
                    Rule::SubclassWithoutFeature
                ),
            ]
        );
    }

    #[test]
    fn required_fields_must_be_non_empty() {
        let r = GenericRecord::new(
            code("s01:x"),
            Some(TextDescriptor::titled("  ")),
            None,
            Some(SoundDescriptor::new("", SoundType::Voice)),
        )
        .unwrap();
        let fields: Vec<_> = validate_record(&r, &Vocabularies::empty())
            .violations
            .into_iter()
            .map(|v| v.field)
            .collect();
        assert_eq!(fields, ["text.title", "sound.originator"]);
    }

    #[test]
    fn attach_reclassifies() {
        let text = GenericRecord::new(
            code("s01:a"),
            Some(TextDescriptor::titled("Ad")),
            None,
            None,
        )
        .unwrap();
        let ad = attach_descriptor(
            text.clone(),
            Descriptor::Sound(SoundDescriptor::new("agency", SoundType::Voice)),
        )
        .unwrap();
        assert_eq!(ad.media_class, MediaClass::TextSound);
        assert_eq!(ad.text, text.text);

        let video = GenericRecord::new(
            code("s01:v"),
            None,
            Some(sample_image()),
            Some(SoundDescriptor::new("studio", SoundType::Music)),
        )
        .unwrap();
        let commented = attach_descriptor(
            video,
            Descriptor::Text(TextDescriptor::titled("commentary")),
        )
        .unwrap();
        assert_eq!(commented.media_class, MediaClass::TextImageSound);

        assert_eq!(
            attach_descriptor(text, Descriptor::Text(TextDescriptor::titled("again"))),
            Err(DescriptorError::DuplicateDescriptor(Medium::Text))
        );
    }

    #[test]
    fn builtin_vocabularies_match_lists() {
        let v = Vocabularies::builtin();
        let closed: Vec<_> = v
            .iter()
            .filter(|v| !v.open)
            .map(|v| v.name.as_str())
            .collect();
        assert_eq!(
            closed,
            ["colour", "medium", "shape", "sound_type", "target"]
        );
        assert_eq!(v.get("colour").unwrap().members.len(), 10);
        assert_eq!(v.get("shape").unwrap().members.len(), 9);
        assert_eq!(v.get("medium").unwrap().members.len(), 7);
        let targets: BTreeSet<_> = ["public", "private", "not-specified"]
            .into_iter()
            .map(String::from)
            .collect();
        assert_eq!(v.get("target").unwrap().members, targets);
        assert_eq!(v.get("feature").unwrap().members.len(), 6);
    }

    #[test]
    fn dangling_related_documents_are_warnings() {
        let mut text = TextDescriptor::titled("T");
        text.related_documents = vec![code("s01:a"), code("s01:b")];
        let r = GenericRecord::new(code("s01:c"), Some(text), None, None).unwrap();
        let found = dangling_references(&r, |c| c.to_string() == "s01:a");
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].rule, Rule::DanglingReference);
        assert!(validate_record(&r, &Vocabularies::builtin()).is_valid());
    }

    #[test]
    fn sound_target_defaults_to_not_specified() {
        let json = r#"{"originator":"x","sound_type":"noise"}"#;
        let s: SoundDescriptor = serde_json::from_str(json).unwrap();
        assert_eq!(s.target, SoundTarget::NotSpecified);
        assert!(serde_json::from_str::<SoundDescriptor>(
            r#"{"originator":"x","sound_type":"hum"}"#
        )
        .is_err());
    }
}
