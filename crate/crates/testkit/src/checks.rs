//! Property checks that report violations instead of panicking, so callers
//! can count them.

use std::collections::{BTreeMap, BTreeSet};

use mediacube::analytics::{
    context_by_social_class, cube_query, document_importance, usage_evolution, usage_type_ratio,
    user_interest, CubeQuery, Dimension, DimensionFilter, Granularity, TimeFilter,
    UNSPECIFIED_CLASS,
};
use mediacube::{CatalogSnapshot, UseType, UserId};

use crate::catalogs::{flatten, oracle, oracle_pattern};

/// `None` when `cube_query` agrees with the brute-force oracle.
pub fn oracle_mismatch(s: &CatalogSnapshot, q: &CubeQuery) -> Option<String> {
    let r = match cube_query(s, q) {
        Ok(r) => r,
        Err(e) => return Some(format!("{q:?}: {e}")),
    };
    let (cells, total) = oracle(s, q);
    if r.pattern != oracle_pattern(q) {
        return Some(format!(
            "{q:?}: pattern {} != {}",
            r.pattern,
            oracle_pattern(q)
        ));
    }
    if flatten(&r) != cells || r.total != total {
        return Some(format!("{q:?}: cells differ from oracle"));
    }
    None
}

/// Every way of fixing the free dimension `d` of `q` to an observed value.
pub fn fixings(s: &CatalogSnapshot, q: &CubeQuery, d: Dimension) -> Vec<CubeQuery> {
    let with = |f: &dyn Fn(&mut DimensionFilter)| {
        let mut q = q.clone();
        f(&mut q.fixed);
        q
    };
    match d {
        Dimension::Document => s
            .records()
            .map(|r| with(&|f| f.document = Some(r.document_code.clone())))
            .collect(),
        Dimension::Context => s
            .contexts()
            .iter()
            .map(|e| with(&|f| f.context = Some(e.label.clone())))
            .collect(),
        Dimension::User => s
            .users()
            .map(|u| with(&|f| f.user = Some(UserId::new(u.user_id.clone()).unwrap())))
            .collect(),
        Dimension::Time => s
            .events()
            .iter()
            .map(|e| e.timestamp.date())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .map(|day| with(&|f| f.time = Some(TimeFilter::Day(day))))
            .collect(),
    }
}

/// For each free dimension of `q`, the children's totals must sum to the
/// parent total.
pub fn rollup_violations(s: &CatalogSnapshot, q: &CubeQuery) -> Vec<String> {
    let parent = cube_query(s, q).unwrap().total;
    q.free_dimensions()
        .into_iter()
        .filter_map(|d| {
            let sum: u64 = fixings(s, q, d)
                .iter()
                .map(|child| cube_query(s, child).unwrap().total)
                .sum();
            (sum != parent).then(|| format!("{q:?}: over {d}: {sum} != {parent}"))
        })
        .collect()
}

fn total(s: &CatalogSnapshot, f: DimensionFilter) -> u64 {
    cube_query(s, &CubeQuery::new(f)).unwrap().total
}

/// Each report against its re-expression as cube queries plus re-grouping.
pub fn report_mismatches(s: &CatalogSnapshot) -> Vec<String> {
    let mut bad = Vec::new();

    let mut importance: Vec<_> = s
        .records()
        .map(|r| {
            let f = DimensionFilter {
                document: Some(r.document_code.clone()),
                ..Default::default()
            };
            (r.document_code.clone(), total(s, f))
        })
        .filter(|(_, n)| *n > 0)
        .collect();
    importance.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    if document_importance(s) != importance {
        bad.push("document_importance".to_string());
    }

    for u in s.users() {
        let id = UserId::new(u.user_id.clone()).unwrap();
        let interest = user_interest(s, &id).unwrap();
        let mut contexts = BTreeMap::new();
        for e in s.contexts() {
            let n = total(
                s,
                DimensionFilter {
                    user: Some(id.clone()),
                    context: Some(e.label.clone()),
                    ..Default::default()
                },
            );
            if n > 0 {
                contexts.insert(e.label.clone(), n);
            }
        }
        let mut documents = BTreeMap::new();
        for r in s.records() {
            let n = total(
                s,
                DimensionFilter {
                    user: Some(id.clone()),
                    document: Some(r.document_code.clone()),
                    ..Default::default()
                },
            );
            if n > 0 {
                documents.insert(r.document_code.clone(), n);
            }
        }
        if interest.contexts != contexts || interest.documents != documents {
            bad.push(format!("user_interest({id})"));
        }
    }

    for g in [Granularity::Day, Granularity::Month, Granularity::Year] {
        let q = CubeQuery {
            fixed: DimensionFilter::default(),
            granularity: g,
        };
        let mut by_time: BTreeMap<String, u64> = BTreeMap::new();
        for cell in cube_query(s, &q).unwrap().cells {
            *by_time.entry(cell.key.time.unwrap()).or_default() += cell.count;
        }
        if usage_evolution(s, g) != by_time.into_iter().collect::<Vec<_>>() {
            bad.push(format!("usage_evolution({g})"));
        }
    }

    let all = cube_query(s, &CubeQuery::default()).unwrap();
    let use_types: BTreeMap<_, _> = s
        .events()
        .iter()
        .map(|e| (e.event_id, e.use_type))
        .collect();
    let repetitive = all
        .cells
        .iter()
        .flat_map(|c| &c.event_ids)
        .filter(|id| use_types[id] == UseType::Repetitive)
        .count() as u64;
    let ratio = usage_type_ratio(s);
    if ratio.repetitive != repetitive || ratio.repetitive + ratio.occasional != all.total {
        bad.push("usage_type_ratio".to_string());
    }

    let mut cross: BTreeMap<_, u64> = BTreeMap::new();
    for u in s.users() {
        let class = u
            .social_class
            .clone()
            .unwrap_or_else(|| UNSPECIFIED_CLASS.to_string());
        for e in s.contexts() {
            let n = total(
                s,
                DimensionFilter {
                    user: Some(UserId::new(u.user_id.clone()).unwrap()),
                    context: Some(e.label.clone()),
                    ..Default::default()
                },
            );
            if n > 0 {
                *cross.entry((class.clone(), e.label.clone())).or_default() += n;
            }
        }
    }
    if context_by_social_class(s) != cross {
        bad.push("context_by_social_class".to_string());
    }
    bad
}
