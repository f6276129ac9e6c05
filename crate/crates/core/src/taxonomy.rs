//! Seven-class multimedia taxonomy.
//!
//! Every document is described by which of the three media (text, image,
//! sound) it carries. The seven nonempty combinations are the media classes;
//! the empty combination does not describe a document.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TaxonomyError {
    #[error("AllAbsent: a document must carry at least one of text, image or sound")]
    AllAbsent,
    #[error("UnknownClass: {0:?} is not a media class token")]
    UnknownClass(String),
}

/// One of the three media a document can carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Medium {
    Text,
    Image,
    Sound,
}

impl Medium {
    pub const ALL: [Medium; 3] = [Medium::Text, Medium::Image, Medium::Sound];

    pub fn as_str(self) -> &'static str {
        match self {
            Medium::Text => "text",
            Medium::Image => "image",
            Medium::Sound => "sound",
        }
    }
}

impl fmt::Display for Medium {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which media are present in a document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct MediaPresence {
    pub text: bool,
    pub image: bool,
    pub sound: bool,
}

impl MediaPresence {
    pub const fn new(text: bool, image: bool, sound: bool) -> Self {
        Self { text, image, sound }
    }

    pub fn has(&self, medium: Medium) -> bool {
        match medium {
            Medium::Text => self.text,
            Medium::Image => self.image,
            Medium::Sound => self.sound,
        }
    }

    pub fn set(&mut self, medium: Medium, present: bool) {
        match medium {
            Medium::Text => self.text = present,
            Medium::Image => self.image = present,
            Medium::Sound => self.sound = present,
        }
    }

    pub fn is_empty(&self) -> bool {
        !(self.text || self.image || self.sound)
    }

    /// True when every medium present in `other` is also present here.
    pub fn contains(&self, other: &MediaPresence) -> bool {
        Medium::ALL.iter().all(|&m| !other.has(m) || self.has(m))
    }
}

/// The seven media classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MediaClass {
    #[serde(rename = "text")]
    Text,
    #[serde(rename = "image")]
    Image,
    #[serde(rename = "sound")]
    Sound,
    #[serde(rename = "text-image")]
    TextImage,
    #[serde(rename = "text-sound")]
    TextSound,
    #[serde(rename = "image-sound")]
    ImageSound,
    #[serde(rename = "text-image-sound")]
    TextImageSound,
}

impl MediaClass {
    pub const ALL: [MediaClass; 7] = [
        MediaClass::Text,
        MediaClass::Image,
        MediaClass::Sound,
        MediaClass::TextImage,
        MediaClass::TextSound,
        MediaClass::ImageSound,
        MediaClass::TextImageSound,
    ];

    /// Serialized token, e.g. `"text-image-sound"`.
    pub fn token(self) -> &'static str {
        match self {
            MediaClass::Text => "text",
            MediaClass::Image => "image",
            MediaClass::Sound => "sound",
            MediaClass::TextImage => "text-image",
            MediaClass::TextSound => "text-sound",
            MediaClass::ImageSound => "image-sound",
            MediaClass::TextImageSound => "text-image-sound",
        }
    }
}

impl fmt::Display for MediaClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for MediaClass {
    type Err = TaxonomyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MediaClass::ALL
            .into_iter()
            .find(|c| c.token() == s)
            .ok_or_else(|| TaxonomyError::UnknownClass(s.to_string()))
    }
}

/// Map a presence triple to its media class.
pub fn classify(p: MediaPresence) -> Result<MediaClass, TaxonomyError> {
    let class = match (p.text, p.image, p.sound) {
        (false, false, false) => return Err(TaxonomyError::AllAbsent),
        (true, false, false) => MediaClass::Text,
        (false, true, false) => MediaClass::Image,
        (false, false, true) => MediaClass::Sound,
        (true, true, false) => MediaClass::TextImage,
        (true, false, true) => MediaClass::TextSound,
        (false, true, true) => MediaClass::ImageSound,
        (true, true, true) => MediaClass::TextImageSound,
    };
    Ok(class)
}

/// Presence triple of a media class; inverse of [`classify`].
pub fn decompose(c: MediaClass) -> MediaPresence {
    match c {
        MediaClass::Text => MediaPresence::new(true, false, false),
        MediaClass::Image => MediaPresence::new(false, true, false),
        MediaClass::Sound => MediaPresence::new(false, false, true),
        MediaClass::TextImage => MediaPresence::new(true, true, false),
        MediaClass::TextSound => MediaPresence::new(true, false, true),
        MediaClass::ImageSound => MediaPresence::new(false, true, true),
        MediaClass::TextImageSound => MediaPresence::new(true, true, true),
    }
}

/// Whether `a` carries every medium that `b` carries.
pub fn subsumes(a: MediaClass, b: MediaClass) -> bool {
    decompose(a).contains(&decompose(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_triples() -> impl Iterator<Item = MediaPresence> {
        (0u8..8).map(|bits| MediaPresence::new(bits & 4 != 0, bits & 2 != 0, bits & 1 != 0))
    }

    #[test]
    fn classify_examples() {
        assert_eq!(
            classify(MediaPresence::new(true, false, false)),
            Ok(MediaClass::Text)
        );
        assert_eq!(
            classify(MediaPresence::new(true, true, true)),
            Ok(MediaClass::TextImageSound)
        );
        assert_eq!(
            classify(MediaPresence::new(false, false, false)),
            Err(TaxonomyError::AllAbsent)
        );
    }

    #[test]
    fn decompose_examples() {
        assert_eq!(
            decompose(MediaClass::ImageSound),
            MediaPresence::new(false, true, true)
        );
        assert_eq!(
            decompose(MediaClass::Sound),
            MediaPresence::new(false, false, true)
        );
        assert_eq!(
            decompose(MediaClass::TextImageSound),
            MediaPresence::new(true, true, true)
        );
    }

    #[test]
    fn subsumes_examples() {
        assert!(subsumes(MediaClass::TextImageSound, MediaClass::Image));
        assert!(!subsumes(MediaClass::Text, MediaClass::Sound));
        assert!(subsumes(MediaClass::TextImage, MediaClass::Text));
    }

    #[test]
    fn bijection_is_exhaustive() {
        for c in MediaClass::ALL {
            assert_eq!(classify(decompose(c)), Ok(c));
        }
        let nonempty: Vec<_> = all_triples().filter(|p| !p.is_empty()).collect();
        assert_eq!(nonempty.len(), 7);
        for p in nonempty {
            assert_eq!(decompose(classify(p).unwrap()), p);
        }
    }

    #[test]
    fn subsumes_is_a_partial_order() {
        for a in MediaClass::ALL {
            assert!(subsumes(a, a));
            assert!(subsumes(MediaClass::TextImageSound, a));
            for b in MediaClass::ALL {
                if subsumes(a, b) && subsumes(b, a) {
                    assert_eq!(a, b);
                }
                for c in MediaClass::ALL {
                    if subsumes(a, b) && subsumes(b, c) {
                        assert!(subsumes(a, c));
                    }
                }
            }
        }
    }

    #[test]
    fn tokens_round_trip() {
        for c in MediaClass::ALL {
            assert_eq!(c.token().parse::<MediaClass>(), Ok(c));
            let json = serde_json::to_string(&c).unwrap();
            assert_eq!(json, format!("\"{}\"", c.token()));
        }
        assert!("Text".parse::<MediaClass>().is_err());
    }
}
