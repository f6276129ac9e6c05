//! Three heterogeneous origin sources with known contents.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use mediacube::descriptors::{
    GenericRecord, ImageDescriptor, SoundDescriptor, SoundTarget, SoundType, TextDescriptor,
    COLOURS, MEDIA, SHAPES,
};
use mediacube::federation::remote::{RemoteEntry, RemoteLineServer};
use mediacube::federation::{
    FieldMapping, FieldRule, PresenceRule, SourceDescriptor, SourceKind, Transform,
};
use mediacube::{DocumentCode, Medium};
use tempfile::TempDir;

/// Documents per source.
pub const PER_SOURCE: usize = 50;

pub struct MockSources {
    pub dir: TempDir,
    pub server: RemoteLineServer,
    pub descriptors: Vec<SourceDescriptor>,
    /// What each valid document must map to, built without the mapper.
    pub expected: BTreeMap<DocumentCode, GenericRecord>,
}

fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

fn defaults(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn code(source: &str, local: &str) -> DocumentCode {
    DocumentCode::compound(source, local).unwrap()
}

fn library(dir: &Path, expected: &mut BTreeMap<DocumentCode, GenericRecord>) -> SourceDescriptor {
    let mut tsv =
        String::from("id\ttitle\tauthor\tpublished\tkeywords\tcover_colour\tcover_shape\n");
    for i in 1..=PER_SOURCE {
        let (m, d) = (1 + i as u32 % 12, 1 + i as u32 % 28);
        let illustrated = i % 5 == 0;
        tsv.push_str(&format!(
            "b{i:03}\tBook {i}\tAuthor {}\t2019/{m:02}/{d:02}\ttopic{}; shelf{}\t{}\t{}\n",
            i % 7,
            i % 5,
            i % 3,
            if illustrated { "Blue" } else { "" },
            if illustrated { "rectangle" } else { "" },
        ));
        let text = TextDescriptor {
            author: Some(format!("Author {}", i % 7)),
            title: format!("Book {i}"),
            reference_date: Some(date(2019, m, d)),
            descriptors: vec![format!("topic{}", i % 5), format!("shelf{}", i % 3)],
            ..Default::default()
        };
        let image = illustrated.then(|| ImageDescriptor {
            dominant_colour: "blue".into(),
            dominant_shape: "rectangle".into(),
            image_format: "jpeg".into(),
            image_medium: "paper".into(),
            image_type: "digital image".into(),
            ..Default::default()
        });
        let c = code("library", &format!("b{i:03}"));
        expected.insert(
            c.clone(),
            GenericRecord::new(c, Some(text), image, None).unwrap(),
        );
    }
    // The one deliberately corrupt row: too few columns.
    tsv.push_str("b999\tTorn page\n");
    let path = dir.join("library.tsv");
    fs::write(&path, tsv).unwrap();

    SourceDescriptor {
        source_id: "library".into(),
        kind: SourceKind::Tabular,
        location: path.to_string_lossy().into_owned(),
        mapping: FieldMapping {
            presence_rules: vec![
                PresenceRule::when_present(Medium::Text, "title"),
                PresenceRule::when_present(Medium::Image, "cover_colour"),
            ],
            field_rules: vec![
                FieldRule::new("title", "text.title"),
                FieldRule::new("author", "text.author"),
                FieldRule::with("published", "text.reference_date", Transform::DateParse),
                FieldRule::with("keywords", "text.descriptors", Transform::SplitList),
                FieldRule::with(
                    "cover_colour",
                    "image.dominant_colour",
                    Transform::Lowercase,
                ),
                FieldRule::new("cover_shape", "image.dominant_shape"),
            ],
            defaults: defaults(&[
                ("image.image_format", "jpeg"),
                ("image.image_medium", "paper"),
                ("image.image_type", "digital image"),
            ]),
        },
        enabled: true,
    }
}

fn gallery(dir: &Path, expected: &mut BTreeMap<DocumentCode, GenericRecord>) -> SourceDescriptor {
    const TYPES: [&str; 3] = ["water colour", "oil colour", "sketch"];
    let root = dir.join("gallery");
    for i in 1..=PER_SOURCE {
        let local = format!("wing{}/room{}/p{i:03}", i % 4, i % 3);
        let path = root.join(format!("{local}.meta"));
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        let mut meta = format!(
            "colour\t{}\nshape\t{}\nmedium\t{}\ntype\t{}\nformat\ttiff\n",
            COLOURS[i % 10],
            SHAPES[i % 9],
            MEDIA[i % 7],
            TYPES[i % 3],
        );
        if i % 2 == 1 {
            meta.push_str("object\ttool\n");
        }
        if i % 4 == 0 {
            meta.push_str(&format!("caption\tCaption {i}\n"));
        }
        fs::write(&path, meta).unwrap();

        let image = ImageDescriptor {
            dominant_colour: COLOURS[i % 10].into(),
            dominant_shape: SHAPES[i % 9].into(),
            dominant_object: (i % 2 == 1).then(|| "tool".into()),
            image_format: "tiff".into(),
            image_medium: MEDIA[i % 7].into(),
            image_type: TYPES[i % 3].into(),
            ..Default::default()
        };
        let text = (i % 4 == 0).then(|| TextDescriptor::titled(format!("Caption {i}")));
        let c = code("gallery", &local);
        expected.insert(
            c.clone(),
            GenericRecord::new(c, text, Some(image), None).unwrap(),
        );
    }

    SourceDescriptor {
        source_id: "gallery".into(),
        kind: SourceKind::FileTree,
        location: root.to_string_lossy().into_owned(),
        mapping: FieldMapping {
            presence_rules: vec![
                PresenceRule::when_present(Medium::Image, "colour"),
                PresenceRule::when_present(Medium::Text, "caption"),
            ],
            field_rules: vec![
                FieldRule::new("colour", "image.dominant_colour"),
                FieldRule::new("shape", "image.dominant_shape"),
                FieldRule::new("medium", "image.image_medium"),
                FieldRule::new("type", "image.image_type"),
                FieldRule::new("format", "image.image_format"),
                FieldRule::new("object", "image.dominant_object"),
                FieldRule::new("caption", "text.title"),
            ],
            defaults: BTreeMap::new(),
        },
        enabled: true,
    }
}

fn sounds(
    expected: &mut BTreeMap<DocumentCode, GenericRecord>,
) -> (RemoteLineServer, SourceDescriptor) {
    const CLASSES: [&str; 4] = ["debate", "dialogue", "music", "publicity"];
    let mut entries: BTreeMap<String, RemoteEntry> = BTreeMap::new();
    for i in 1..=PER_SOURCE {
        let (m, d) = (1 + i as u32 % 12, 1 + i as u32 % 28);
        let sound_type = SoundType::ALL[i % 3];
        let target = [SoundTarget::Public, SoundTarget::Private][i % 2];
        let mut fields: BTreeMap<String, String> = [
            ("originator", format!("Studio {}", i % 6)),
            ("kind", sound_type.token().to_string()),
            ("audience", target.token().to_string()),
            ("class", CLASSES[i % 4].to_string()),
            ("recorded", format!("2021-{m:02}-{d:02}")),
            ("tags", format!("live, take{}", i % 2)),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        if i % 6 == 0 {
            fields.insert("transcript".into(), format!("Transcript {i}"));
        }
        if i % 10 == 0 {
            fields.insert("still".into(), "grey".into());
        }
        let local = format!("t{i:03}");
        entries.insert(local.clone(), Ok(fields));

        let sound = SoundDescriptor {
            originator: format!("Studio {}", i % 6),
            target,
            descriptors: vec!["live".into(), format!("take{}", i % 2)],
            publication_date: Some(date(2021, m, d)),
            sound_type,
            sound_class: Some(CLASSES[i % 4].into()),
            sound_subclass: None,
        };
        let text = (i % 6 == 0).then(|| TextDescriptor::titled(format!("Transcript {i}")));
        let image = (i % 10 == 0).then(|| ImageDescriptor {
            dominant_colour: "grey".into(),
            dominant_shape: "rectangle".into(),
            image_format: "png".into(),
            image_medium: "electronic".into(),
            image_type: "digital image".into(),
            ..Default::default()
        });
        let c = code("sounds", &local);
        expected.insert(
            c.clone(),
            GenericRecord::new(c, text, image, Some(sound)).unwrap(),
        );
    }
    let server = RemoteLineServer::start(entries).unwrap();
    let descriptor = SourceDescriptor {
        source_id: "sounds".into(),
        kind: SourceKind::RemoteLine,
        location: server.location(),
        mapping: FieldMapping {
            presence_rules: vec![
                PresenceRule::when_present(Medium::Sound, "originator"),
                PresenceRule::when_present(Medium::Text, "transcript"),
                PresenceRule::when_present(Medium::Image, "still"),
            ],
            field_rules: vec![
                FieldRule::new("originator", "sound.originator"),
                FieldRule::new("kind", "sound.sound_type"),
                FieldRule::new("audience", "sound.target"),
                FieldRule::new("class", "sound.sound_class"),
                FieldRule::new("recorded", "sound.publication_date"),
                FieldRule::with("tags", "sound.descriptors", Transform::SplitList),
                FieldRule::new("transcript", "text.title"),
                FieldRule::new("still", "image.dominant_colour"),
            ],
            defaults: defaults(&[
                ("image.dominant_shape", "rectangle"),
                ("image.image_format", "png"),
                ("image.image_medium", "electronic"),
                ("image.image_type", "digital image"),
            ]),
        },
        enabled: true,
    };
    (server, descriptor)
}

/// Build all three sources: 150 valid documents and exactly one corrupt
/// tabular row.
pub fn mock_sources() -> MockSources {
    let dir = tempfile::tempdir().unwrap();
    let mut expected = BTreeMap::new();
    let lib = library(dir.path(), &mut expected);
    let gal = gallery(dir.path(), &mut expected);
    let (server, snd) = sounds(&mut expected);
    MockSources {
        dir,
        server,
        descriptors: vec![lib, gal, snd],
        expected,
    }
}
