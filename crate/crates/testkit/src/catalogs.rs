use std::collections::BTreeMap;

use mediacube::descriptors::{GenericRecord, TextDescriptor};
use mediacube::{
    Catalog, CatalogSnapshot, ContextLabel, CubeQuery, CubeResult, DimensionFilter, DocumentCode,
    Granularity, NewUsage, TimeFilter, Timestamp, UseType, UserId, UserProfile,
};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

pub const STATIC: [&str; 4] = ["teaching", "learning", "documentation", "entertainment"];
const CLASSES: [Option<&str>; 4] = [Some("student"), Some("teacher"), Some("researcher"), None];

/// 2023-12-01T00:00:00Z; events spread over ~100 days so they cross month
/// and year boundaries.
const BASE: i64 = 1_701_388_800;
const SPAN: i64 = 100 * 86_400;

pub struct Limits {
    pub docs: usize,
    pub users: usize,
    pub contexts: usize,
    pub events: usize,
}

pub const SMALL: Limits = Limits {
    docs: 50,
    users: 20,
    contexts: 10,
    events: 1000,
};

/// A catalog with sizes drawn uniformly up to `limits`.
pub fn random_catalog(rng: &mut StdRng, limits: &Limits) -> Catalog {
    let exact = Limits {
        docs: rng.gen_range(1..=limits.docs),
        users: rng.gen_range(1..=limits.users),
        contexts: rng.gen_range(1..=limits.contexts),
        events: rng.gen_range(0..=limits.events),
    };
    sized_catalog(rng, &exact)
}

/// A catalog with exactly the given numbers of documents, users and events,
/// and events spread over exactly `contexts` candidate labels.
pub fn sized_catalog(rng: &mut StdRng, size: &Limits) -> Catalog {
    let mut c = Catalog::new();
    let (n_docs, n_users, n_contexts, n_events) =
        (size.docs, size.users, size.contexts, size.events);

    let docs: Vec<DocumentCode> = (0..n_docs)
        .map(|i| {
            let source = ["alpha", "beta", "gamma"][i % 3];
            DocumentCode::compound(source, format!("doc{i:03}")).unwrap()
        })
        .collect();
    for d in &docs {
        let r = GenericRecord::new(
            d.clone(),
            Some(TextDescriptor::titled(d.to_string())),
            None,
            None,
        )
        .unwrap();
        c.put_record(r).unwrap();
    }

    let users: Vec<UserId> = (0..n_users)
        .map(|i| UserId::new(format!("u{i:02}")).unwrap())
        .collect();
    for u in &users {
        let mut p = UserProfile::new(u.as_str(), format!("User {u}"));
        p.social_class = CLASSES.choose(rng).unwrap().map(str::to_string);
        c.register_user(p).unwrap();
    }

    let contexts: Vec<ContextLabel> = (0..n_contexts)
        .map(|i| match STATIC.get(i) {
            Some(s) => ContextLabel::new(s).unwrap(),
            None => ContextLabel::new(&format!("extra{i}")).unwrap(),
        })
        .collect();

    for _ in 0..n_events {
        c.record_usage(NewUsage {
            document_code: docs.choose(rng).unwrap().clone(),
            context: contexts.choose(rng).unwrap().clone(),
            user_id: users.choose(rng).unwrap().clone(),
            timestamp: Timestamp::from_unix(BASE + rng.gen_range(0..SPAN)).unwrap(),
            use_type: if rng.gen_bool(0.5) {
                UseType::Repetitive
            } else {
                UseType::Occasional
            },
        })
        .unwrap();
    }
    c
}

/// A query fixing dimensions per the bits of `mask` (8 = D, 4 = C, 2 = U,
/// 1 = T) to values drawn from the catalog.
pub fn random_query(rng: &mut StdRng, s: &CatalogSnapshot, mask: u8) -> CubeQuery {
    let docs: Vec<_> = s.records().map(|r| r.document_code.clone()).collect();
    let users: Vec<_> = s
        .users()
        .map(|u| UserId::new(u.user_id.clone()).unwrap())
        .collect();
    let contexts: Vec<_> = s.contexts().iter().map(|e| e.label.clone()).collect();
    let time = if rng.gen_bool(0.7) {
        // A day that usually has events.
        let t = match s.events().choose(rng) {
            Some(e) => e.timestamp,
            None => Timestamp::from_unix(BASE).unwrap(),
        };
        TimeFilter::Day(t.date())
    } else {
        let a = BASE + rng.gen_range(0..SPAN);
        let b = a + rng.gen_range(1..SPAN / 2);
        TimeFilter::range(
            Timestamp::from_unix(a).unwrap(),
            Timestamp::from_unix(b).unwrap(),
        )
        .unwrap()
    };
    let fixed = DimensionFilter {
        document: (mask & 8 != 0).then(|| docs.choose(rng).unwrap().clone()),
        context: (mask & 4 != 0).then(|| contexts.choose(rng).unwrap().clone()),
        user: (mask & 2 != 0).then(|| users.choose(rng).unwrap().clone()),
        time: (mask & 1 != 0).then_some(time),
    };
    CubeQuery {
        fixed,
        granularity: *[Granularity::Day, Granularity::Month, Granularity::Year]
            .choose(rng)
            .unwrap(),
    }
}

/// Cell as plain strings: free-dimension values in D, C, U, T order.
pub type FlatCell = (Vec<String>, u64, Vec<u64>);

/// Pattern rows in table order: which of D, C, U, T are fixed.
pub const PATTERN_ROWS: [&str; 16] = [
    "", "T", "U", "UT", "C", "CT", "CU", "CUT", "D", "DT", "DU", "DUT", "DC", "DCT", "DCU", "DCUT",
];

pub fn oracle_pattern(q: &CubeQuery) -> u8 {
    let mut row = String::new();
    for (letter, fixed) in [
        ('D', q.fixed.document.is_some()),
        ('C', q.fixed.context.is_some()),
        ('U', q.fixed.user.is_some()),
        ('T', q.fixed.time.is_some()),
    ] {
        if fixed {
            row.push(letter);
        }
    }
    PATTERN_ROWS.iter().position(|r| *r == row).unwrap() as u8 + 1
}

/// Filter-and-group by brute force over string renderings of each event.
pub fn oracle(s: &CatalogSnapshot, q: &CubeQuery) -> (Vec<FlatCell>, u64) {
    let mut groups: BTreeMap<Vec<String>, Vec<u64>> = BTreeMap::new();
    for e in s.events() {
        let doc = e.document_code.to_string();
        let context = e.context.as_str().to_string();
        let user = e.user_id.as_str().to_string();
        let ts = e.timestamp.to_string();

        if q.fixed
            .document
            .as_ref()
            .is_some_and(|d| d.to_string() != doc)
            || q.fixed
                .context
                .as_ref()
                .is_some_and(|x| x.as_str() != context)
            || q.fixed.user.as_ref().is_some_and(|u| u.as_str() != user)
        {
            continue;
        }
        match q.fixed.time {
            Some(TimeFilter::Day(d)) if d.format("%Y-%m-%d").to_string() != ts[..10] => continue,
            Some(TimeFilter::Range { start, end })
                if !(start.to_string() <= ts && ts < end.to_string()) =>
            {
                continue
            }
            _ => {}
        }

        let bucket = match q.granularity {
            Granularity::Day => &ts[..10],
            Granularity::Month => &ts[..7],
            Granularity::Year => &ts[..4],
        };
        let mut key = Vec::new();
        if q.fixed.document.is_none() {
            key.push(doc);
        }
        if q.fixed.context.is_none() {
            key.push(context);
        }
        if q.fixed.user.is_none() {
            key.push(user);
        }
        if q.fixed.time.is_none() {
            key.push(bucket.to_string());
        }
        groups.entry(key).or_default().push(e.event_id.0);
    }
    let mut total = 0;
    let cells = groups
        .into_iter()
        .map(|(k, mut ids)| {
            ids.sort_unstable();
            total += ids.len() as u64;
            (k, ids.len() as u64, ids)
        })
        .collect();
    (cells, total)
}

pub fn flatten(r: &CubeResult) -> Vec<FlatCell> {
    r.cells
        .iter()
        .map(|c| {
            let key = r.free.iter().map(|d| c.key.value(*d).unwrap()).collect();
            (key, c.count, c.event_ids.iter().map(|e| e.0).collect())
        })
        .collect()
}

/// The five-event reference catalog:
///
/// | event | document  | context  | user | day        |
/// |-------|-----------|----------|------|------------|
/// | 1     | lib:d1    | teaching | u1   | 2024-01-01 |
/// | 2     | lib:d1    | learning | u2   | 2024-01-01 |
/// | 3     | lib:d2    | teaching | u1   | 2024-01-02 |
/// | 4     | lib:d1    | teaching | u1   | 2024-01-02 |
/// | 5     | lib:d2    | learning | u2   | 2024-01-02 |
///
/// u1 is a student; u2 has no social class.
pub fn five_event_fixture() -> Catalog {
    let mut c = Catalog::new();
    for d in ["lib:d1", "lib:d2"] {
        let r = GenericRecord::new(
            d.parse().unwrap(),
            Some(TextDescriptor::titled(d)),
            None,
            None,
        )
        .unwrap();
        c.put_record(r).unwrap();
    }
    let mut u1 = UserProfile::new("u1", "Ada");
    u1.social_class = Some("student".into());
    c.register_user(u1).unwrap();
    c.register_user(UserProfile::new("u2", "Bo")).unwrap();
    for (d, cx, u, t, use_type) in [
        (
            "lib:d1",
            "teaching",
            "u1",
            "2024-01-01T09:00:00Z",
            UseType::Repetitive,
        ),
        (
            "lib:d1",
            "learning",
            "u2",
            "2024-01-01T10:30:00Z",
            UseType::Occasional,
        ),
        (
            "lib:d2",
            "teaching",
            "u1",
            "2024-01-02T08:15:00Z",
            UseType::Repetitive,
        ),
        (
            "lib:d1",
            "teaching",
            "u1",
            "2024-01-02T14:00:00Z",
            UseType::Repetitive,
        ),
        (
            "lib:d2",
            "learning",
            "u2",
            "2024-01-02T16:45:00Z",
            UseType::Occasional,
        ),
    ] {
        c.record_usage(NewUsage {
            document_code: d.parse().unwrap(),
            context: ContextLabel::new(cx).unwrap(),
            user_id: UserId::new(u).unwrap(),
            timestamp: t.parse().unwrap(),
            use_type,
        })
        .unwrap();
    }
    c
}
