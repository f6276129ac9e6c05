//! Identifier newtypes and UTC timestamps shared by the store and analytics.

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, SecondsFormat, Timelike, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdError {
    #[error("empty {0}")]
    Empty(&'static str),
    #[error("invalid timestamp {0:?}: expected YYYY-MM-DDThh:mm:ssZ")]
    Timestamp(String),
}

/// Non-empty free-form user identifier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct UserId(String);

impl UserId {
    pub fn new(id: impl Into<String>) -> Result<Self, IdError> {
        let id = id.into();
        if id.trim().is_empty() {
            return Err(IdError::Empty("user id"));
        }
        Ok(UserId(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for UserId {
    type Err = IdError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        UserId::new(s)
    }
}

impl<'de> Deserialize<'de> for UserId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        UserId::new(String::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// Usage-context label, normalized to trimmed lowercase.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct ContextLabel(String);

impl ContextLabel {
    pub fn new(label: &str) -> Result<Self, IdError> {
        let label = label.trim().to_lowercase();
        if label.is_empty() {
            return Err(IdError::Empty("context label"));
        }
        Ok(ContextLabel(label))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ContextLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for ContextLabel {
    type Err = IdError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ContextLabel::new(s)
    }
}

impl<'de> Deserialize<'de> for ContextLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        ContextLabel::new(&String::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// Store-assigned event sequence number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EventId(pub u64);

impl fmt::Display for EventId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// UTC instant at second precision, written as `YYYY-MM-DDThh:mm:ssZ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(DateTime<Utc>);

impl Timestamp {
    pub fn new(instant: DateTime<Utc>) -> Self {
        Timestamp(instant.with_nanosecond(0).unwrap_or(instant))
    }

    pub fn now() -> Self {
        Timestamp::new(Utc::now())
    }

    pub fn from_unix(secs: i64) -> Option<Self> {
        DateTime::from_timestamp(secs, 0).map(Timestamp)
    }

    pub fn epoch() -> Self {
        Timestamp(DateTime::UNIX_EPOCH)
    }

    pub fn instant(&self) -> DateTime<Utc> {
        self.0
    }

    pub fn date(&self) -> NaiveDate {
        self.0.date_naive()
    }

    pub fn unix(&self) -> i64 {
        self.0.timestamp()
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.to_rfc3339_opts(SecondsFormat::Secs, true))
    }
}

impl FromStr for Timestamp {
    type Err = IdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || IdError::Timestamp(s.to_string());
        if s.len() != 20 || !s.ends_with('Z') {
            return Err(bad());
        }
        let parsed = DateTime::parse_from_rfc3339(s).map_err(|_| bad())?;
        Ok(Timestamp(parsed.with_timezone(&Utc)))
    }
}

impl Serialize for Timestamp {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn timestamp_text_form() {
        let t: Timestamp = "2024-01-02T03:04:05Z".parse().unwrap();
        assert_eq!(t.to_string(), "2024-01-02T03:04:05Z");
        assert_eq!(t.date(), NaiveDate::from_ymd_opt(2024, 1, 2).unwrap());
        for bad in [
            "2024-01-02",
            "2024-01-02T03:04:05+01:00",
            "2024-01-02T03:04:05.5Z",
            "2024-13-02T03:04:05Z",
        ] {
            assert!(bad.parse::<Timestamp>().is_err(), "{bad}");
        }
    }

    #[test]
    fn timestamps_truncate_to_seconds() {
        let instant = DateTime::from_timestamp(1_700_000_000, 999_000_000).unwrap();
        assert_eq!(Timestamp::new(instant).unix(), 1_700_000_000);
        assert_eq!(
            Timestamp::new(instant).to_string(),
            Timestamp::from_unix(1_700_000_000).unwrap().to_string()
        );
    }

    #[test]
    fn text_order_matches_chronological_order() {
        let a = Timestamp::from_unix(86_400 * 365).unwrap();
        let b = Timestamp::from_unix(86_400 * 366 + 5).unwrap();
        assert!(a < b);
        assert!(a.to_string() < b.to_string());
    }

    #[test]
    fn context_labels_normalize() {
        assert_eq!(
            ContextLabel::new("  Teaching ").unwrap().as_str(),
            "teaching"
        );
        assert!(ContextLabel::new("   ").is_err());
        assert!(UserId::new("").is_err());
    }
}
