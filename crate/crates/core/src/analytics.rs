//! The four-dimensional usage cube (document, context, user, time) and the
//! reports derived from it.
//!
//! A query fixes any subset of the four dimensions; the result groups the
//! matching events by the values of the remaining free dimensions. The 16
//! possible subsets are numbered 1..=16 by
//! `1 + 8·[D fixed] + 4·[C fixed] + 2·[U fixed] + [T fixed]`, so pattern 1
//! fixes nothing and pattern 16 fixes everything.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate, NaiveTime};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::code::DocumentCode;
use crate::ids::{ContextLabel, EventId, Timestamp, UserId};
use crate::store::{CatalogSnapshot, UsageEvent, UseType};

/// Social-class label used for users without one.
pub const UNSPECIFIED_CLASS: &str = "unspecified";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalyticsError {
    #[error("UnknownDocument: {0}")]
    UnknownDocument(DocumentCode),
    #[error("UnknownUser: {0}")]
    UnknownUser(UserId),
    #[error("UnknownContext: {0}")]
    UnknownContext(ContextLabel),
    #[error("InvalidTimeRange: start {start} is not before end {end}")]
    InvalidTimeRange { start: Timestamp, end: Timestamp },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dimension {
    #[serde(rename = "doc")]
    Document,
    Context,
    User,
    Time,
}

impl Dimension {
    pub const ALL: [Dimension; 4] = [
        Dimension::Document,
        Dimension::Context,
        Dimension::User,
        Dimension::Time,
    ];

    /// Column / flag name.
    pub fn name(self) -> &'static str {
        match self {
            Dimension::Document => "doc",
            Dimension::Context => "context",
            Dimension::User => "user",
            Dimension::Time => "time",
        }
    }

    fn weight(self) -> u8 {
        match self {
            Dimension::Document => 8,
            Dimension::Context => 4,
            Dimension::User => 2,
            Dimension::Time => 1,
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Dimension {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Dimension::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| format!("unknown dimension {s:?} (expected doc, context, user or time)"))
    }
}

/// Time restriction: one UTC day, or a half-open instant range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeFilter {
    Day(NaiveDate),
    Range { start: Timestamp, end: Timestamp },
}

impl TimeFilter {
    pub fn range(start: Timestamp, end: Timestamp) -> Result<Self, AnalyticsError> {
        if start >= end {
            return Err(AnalyticsError::InvalidTimeRange { start, end });
        }
        Ok(TimeFilter::Range { start, end })
    }

    pub fn matches(&self, t: Timestamp) -> bool {
        let (start, end) = self.unix_bounds();
        (start..end).contains(&t.unix())
    }

    /// Half-open bounds in unix seconds.
    fn unix_bounds(&self) -> (i64, i64) {
        match *self {
            TimeFilter::Day(day) => {
                let start = day.and_time(NaiveTime::MIN).and_utc().timestamp();
                (start, start + 86_400)
            }
            TimeFilter::Range { start, end } => (start.unix(), end.unix()),
        }
    }
}

impl fmt::Display for TimeFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeFilter::Day(d) => write!(f, "{}", d.format("%Y-%m-%d")),
            TimeFilter::Range { start, end } => write!(f, "{start}/{end}"),
        }
    }
}

/// Grammar error for time filter text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid time {input:?}: expected YYYY-MM-DD or YYYY-MM-DDThh:mm:ssZ/YYYY-MM-DDThh:mm:ssZ ({reason})")]
pub struct TimeSyntaxError {
    pub input: String,
    pub reason: String,
}

impl FromStr for TimeFilter {
    type Err = TimeSyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason: &str| TimeSyntaxError {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        if let Some((start, end)) = s.split_once('/') {
            let start: Timestamp = start.parse().map_err(|_| err("bad range start"))?;
            let end: Timestamp = end.parse().map_err(|_| err("bad range end"))?;
            return TimeFilter::range(start, end).map_err(|_| err("range start must precede end"));
        }
        if s.len() != 10 {
            return Err(err("not a calendar date"));
        }
        NaiveDate::parse_from_str(s, "%Y-%m-%d")
            .map(TimeFilter::Day)
            .map_err(|_| err("not a calendar date"))
    }
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    #[default]
    Day,
    Month,
    Year,
}

impl Granularity {
    /// Bucket label; lexicographic order equals chronological order.
    pub fn bucket(self, t: Timestamp) -> String {
        let d = t.date();
        match self {
            Granularity::Day => format!("{:04}-{:02}-{:02}", d.year(), d.month(), d.day()),
            Granularity::Month => format!("{:04}-{:02}", d.year(), d.month()),
            Granularity::Year => format!("{:04}", d.year()),
        }
    }
}

impl FromStr for Granularity {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "day" => Ok(Granularity::Day),
            "month" => Ok(Granularity::Month),
            "year" => Ok(Granularity::Year),
            other => Err(format!(
                "unknown granularity {other:?} (expected day, month or year)"
            )),
        }
    }
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Granularity::Day => "day",
            Granularity::Month => "month",
            Granularity::Year => "year",
        })
    }
}

/// Present fields are the fixed dimensions.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DimensionFilter {
    pub document: Option<DocumentCode>,
    pub context: Option<ContextLabel>,
    pub user: Option<UserId>,
    pub time: Option<TimeFilter>,
}

impl DimensionFilter {
    pub fn is_fixed(&self, d: Dimension) -> bool {
        match d {
            Dimension::Document => self.document.is_some(),
            Dimension::Context => self.context.is_some(),
            Dimension::User => self.user.is_some(),
            Dimension::Time => self.time.is_some(),
        }
    }

    pub fn matches(&self, e: &UsageEvent) -> bool {
        self.document.as_ref().is_none_or(|d| *d == e.document_code)
            && self.context.as_ref().is_none_or(|c| *c == e.context)
            && self.user.as_ref().is_none_or(|u| *u == e.user_id)
            && self.time.as_ref().is_none_or(|t| t.matches(e.timestamp))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CubeQuery {
    pub fixed: DimensionFilter,
    pub granularity: Granularity,
}

impl CubeQuery {
    pub fn new(fixed: DimensionFilter) -> Self {
        Self {
            fixed,
            granularity: Granularity::Day,
        }
    }

    pub fn free_dimensions(&self) -> Vec<Dimension> {
        Dimension::ALL
            .into_iter()
            .filter(|d| !self.fixed.is_fixed(*d))
            .collect()
    }
}

/// Pattern number 1..=16 of the fixed-dimension subset.
pub fn pattern_id(q: &CubeQuery) -> u8 {
    1 + Dimension::ALL
        .into_iter()
        .filter(|d| q.fixed.is_fixed(*d))
        .map(Dimension::weight)
        .sum::<u8>()
}

/// Values of the free dimensions; fixed dimensions are `None`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct CellKey {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doc: Option<DocumentCode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<ContextLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub user: Option<UserId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<String>,
}

impl CellKey {
    pub fn value(&self, d: Dimension) -> Option<String> {
        match d {
            Dimension::Document => self.doc.as_ref().map(|v| v.to_string()),
            Dimension::Context => self.context.as_ref().map(|v| v.to_string()),
            Dimension::User => self.user.as_ref().map(|v| v.to_string()),
            Dimension::Time => self.time.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubeCell {
    pub key: CellKey,
    pub count: u64,
    /// Ascending.
    pub event_ids: Vec<EventId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubeResult {
    pub pattern: u8,
    pub free: Vec<Dimension>,
    /// Sorted by key; empty cells are omitted.
    pub cells: Vec<CubeCell>,
    pub total: u64,
}

impl CubeResult {
    /// Header of free-dimension names plus `count`, one row per cell, then
    /// `TOTAL<TAB>n`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        let mut header: Vec<&str> = self.free.iter().map(|d| d.name()).collect();
        header.push("count");
        out.push_str(&header.join("\t"));
        out.push('\n');
        for cell in &self.cells {
            let mut row: Vec<String> = self
                .free
                .iter()
                .map(|d| cell.key.value(*d).unwrap_or_default())
                .collect();
            row.push(cell.count.to_string());
            out.push_str(&row.join("\t"));
            out.push('\n');
        }
        out.push_str(&format!("TOTAL\t{}\n", self.total));
        out
    }
}

fn check_fixed_values(s: &CatalogSnapshot, q: &CubeQuery) -> Result<(), AnalyticsError> {
    let f = &q.fixed;
    if let Some(doc) = &f.document {
        if s.record(doc).is_none() {
            return Err(AnalyticsError::UnknownDocument(doc.clone()));
        }
    }
    if let Some(context) = &f.context {
        if !s.has_context(context) {
            return Err(AnalyticsError::UnknownContext(context.clone()));
        }
    }
    if let Some(user) = &f.user {
        if s.user(user).is_none() {
            return Err(AnalyticsError::UnknownUser(user.clone()));
        }
    }
    if let Some(TimeFilter::Range { start, end }) = f.time {
        if start >= end {
            return Err(AnalyticsError::InvalidTimeRange { start, end });
        }
    }
    Ok(())
}

fn cell_key(e: &UsageEvent, q: &CubeQuery) -> CellKey {
    let f = &q.fixed;
    CellKey {
        doc: f.document.is_none().then(|| e.document_code.clone()),
        context: f.context.is_none().then(|| e.context.clone()),
        user: f.user.is_none().then(|| e.user_id.clone()),
        time: f.time.is_none().then(|| q.granularity.bucket(e.timestamp)),
    }
}

/// Posting lists over a snapshot's events, by position in the event slice.
#[derive(Debug, Default)]
pub(crate) struct EventIndex {
    by_document: HashMap<DocumentCode, Vec<usize>>,
    by_context: HashMap<ContextLabel, Vec<usize>>,
    by_user: HashMap<UserId, Vec<usize>>,
    /// (unix seconds, position), ascending.
    by_time: Vec<(i64, usize)>,
}

impl EventIndex {
    pub(crate) fn build(events: &[UsageEvent]) -> Self {
        let mut index = EventIndex::default();
        for (i, e) in events.iter().enumerate() {
            index
                .by_document
                .entry(e.document_code.clone())
                .or_default()
                .push(i);
            index
                .by_context
                .entry(e.context.clone())
                .or_default()
                .push(i);
            index.by_user.entry(e.user_id.clone()).or_default().push(i);
            index.by_time.push((e.timestamp.unix(), i));
        }
        index.by_time.sort_unstable();
        index
    }

    /// Positions that may match `f`: the smallest posting list among the
    /// fixed dimensions, or every event when nothing is fixed.
    fn candidates(&self, f: &DimensionFilter, n_events: usize) -> Vec<usize> {
        const NONE: &[usize] = &[];
        let best = [
            f.document
                .as_ref()
                .map(|d| self.by_document.get(d).map_or(NONE, Vec::as_slice)),
            f.context
                .as_ref()
                .map(|c| self.by_context.get(c).map_or(NONE, Vec::as_slice)),
            f.user
                .as_ref()
                .map(|u| self.by_user.get(u).map_or(NONE, Vec::as_slice)),
        ]
        .into_iter()
        .flatten()
        .min_by_key(|list| list.len());
        let window = f.time.map(|t| {
            let (start, end) = t.unix_bounds();
            let lo = self.by_time.partition_point(|(t, _)| *t < start);
            let hi = self.by_time.partition_point(|(t, _)| *t < end);
            &self.by_time[lo..hi]
        });
        match (best, window) {
            (Some(list), Some(w)) if w.len() < list.len() => w.iter().map(|(_, i)| *i).collect(),
            (Some(list), _) => list.to_vec(),
            (None, Some(w)) => w.iter().map(|(_, i)| *i).collect(),
            (None, None) => (0..n_events).collect(),
        }
    }
}

/// Filter events by the fixed dimensions and group by the free ones.
pub fn cube_query(s: &CatalogSnapshot, q: &CubeQuery) -> Result<CubeResult, AnalyticsError> {
    check_fixed_values(s, q)?;
    let events = s.events();
    let mut groups: BTreeMap<CellKey, Vec<EventId>> = BTreeMap::new();
    for i in s.event_index().candidates(&q.fixed, events.len()) {
        let e = &events[i];
        if q.fixed.matches(e) {
            groups.entry(cell_key(e, q)).or_default().push(e.event_id);
        }
    }
    let mut total = 0;
    let cells = groups
        .into_iter()
        .map(|(key, mut event_ids)| {
            event_ids.sort();
            let count = event_ids.len() as u64;
            total += count;
            CubeCell {
                key,
                count,
                event_ids,
            }
        })
        .collect();
    Ok(CubeResult {
        pattern: pattern_id(q),
        free: q.free_dimensions(),
        cells,
        total,
    })
}

/// Documents ranked by event count, descending; ties by code ascending.
pub fn document_importance(s: &CatalogSnapshot) -> Vec<(DocumentCode, u64)> {
    let mut counts: BTreeMap<&DocumentCode, u64> = BTreeMap::new();
    for e in s.events() {
        *counts.entry(&e.document_code).or_default() += 1;
    }
    let mut ranked: Vec<(DocumentCode, u64)> =
        counts.into_iter().map(|(c, n)| (c.clone(), n)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct UserInterest {
    pub contexts: BTreeMap<ContextLabel, u64>,
    pub documents: BTreeMap<DocumentCode, u64>,
}

/// What one user used, by context and by document.
pub fn user_interest(s: &CatalogSnapshot, user: &UserId) -> Result<UserInterest, AnalyticsError> {
    if s.user(user).is_none() {
        return Err(AnalyticsError::UnknownUser(user.clone()));
    }
    let mut interest = UserInterest::default();
    for e in s.events().iter().filter(|e| &e.user_id == user) {
        *interest.contexts.entry(e.context.clone()).or_default() += 1;
        *interest
            .documents
            .entry(e.document_code.clone())
            .or_default() += 1;
    }
    Ok(interest)
}

/// Event counts per time bucket, ascending; empty buckets omitted.
pub fn usage_evolution(s: &CatalogSnapshot, granularity: Granularity) -> Vec<(String, u64)> {
    let mut buckets: BTreeMap<String, u64> = BTreeMap::new();
    for e in s.events() {
        *buckets.entry(granularity.bucket(e.timestamp)).or_default() += 1;
    }
    buckets.into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct UsageTypeRatio {
    pub repetitive: u64,
    pub occasional: u64,
}

pub fn usage_type_ratio(s: &CatalogSnapshot) -> UsageTypeRatio {
    let mut ratio = UsageTypeRatio::default();
    for e in s.events() {
        match e.use_type {
            UseType::Repetitive => ratio.repetitive += 1,
            UseType::Occasional => ratio.occasional += 1,
        }
    }
    ratio
}

/// Cross-tab of (social class, context) → event count. Users without a
/// social class count under [`UNSPECIFIED_CLASS`].
pub fn context_by_social_class(s: &CatalogSnapshot) -> BTreeMap<(String, ContextLabel), u64> {
    let mut table = BTreeMap::new();
    for e in s.events() {
        let class = s
            .user(&e.user_id)
            .and_then(|u| u.social_class.as_deref())
            .filter(|c| !c.trim().is_empty())
            .unwrap_or(UNSPECIFIED_CLASS)
            .to_string();
        *table.entry((class, e.context.clone())).or_default() += 1;
    }
    table
}
