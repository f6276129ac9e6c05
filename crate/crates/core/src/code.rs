//! Document codes: the link from a generic record back to its origin.
//!
//! A code is either source-scoped (`<source_id>:<local_id>`) or an absolute
//! URI. In the compound form, `:` and `\` inside the local id are escaped
//! with a backslash so that the canonical text always has exactly one
//! unescaped separator; a leading `/` is escaped the same way.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

const URI_SCHEMES: [&str; 3] = ["http://", "https://", "file://"];
const MAX_SOURCE_ID: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("MalformedCode: {input:?}: {reason}")]
pub struct MalformedCode {
    pub input: String,
    pub reason: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DocumentCode {
    Compound { source_id: String, local_id: String },
    Uri(String),
}

/// `[a-z0-9_-]{1,32}`
pub fn is_valid_source_id(s: &str) -> bool {
    !s.is_empty()
        && s.len() <= MAX_SOURCE_ID
        && s.bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_' || b == b'-')
}

impl DocumentCode {
    pub fn compound(
        source_id: impl Into<String>,
        local_id: impl Into<String>,
    ) -> Result<Self, MalformedCode> {
        let source_id = source_id.into();
        let local_id = local_id.into();
        if !is_valid_source_id(&source_id) {
            return Err(MalformedCode {
                input: source_id,
                reason: "source id must match [a-z0-9_-]{1,32}",
            });
        }
        if local_id.is_empty() {
            return Err(MalformedCode {
                input: format!("{source_id}:"),
                reason: "empty local id",
            });
        }
        Ok(DocumentCode::Compound {
            source_id,
            local_id,
        })
    }

    pub fn uri(uri: impl Into<String>) -> Result<Self, MalformedCode> {
        let uri = uri.into();
        match URI_SCHEMES.iter().find(|s| uri.starts_with(*s)) {
            Some(scheme) if uri.len() > scheme.len() => Ok(DocumentCode::Uri(uri)),
            Some(_) => Err(MalformedCode {
                input: uri,
                reason: "URI has no body after the scheme",
            }),
            None => Err(MalformedCode {
                input: uri,
                reason: "URI scheme must be http, https or file",
            }),
        }
    }

    pub fn source_id(&self) -> Option<&str> {
        match self {
            DocumentCode::Compound { source_id, .. } => Some(source_id),
            DocumentCode::Uri(_) => None,
        }
    }

    pub fn is_uri(&self) -> bool {
        matches!(self, DocumentCode::Uri(_))
    }
}

fn escape_local(local: &str, out: &mut String) {
    // A leading '/' is escaped so "http" + "//x" cannot read back as a URI.
    if local.starts_with('/') {
        out.push('\\');
    }
    for ch in local.chars() {
        if ch == ':' || ch == '\\' {
            out.push('\\');
        }
        out.push(ch);
    }
}

fn unescape_local(input: &str, local: &str) -> Result<String, MalformedCode> {
    let mut out = String::with_capacity(local.len());
    let mut chars = local.chars();
    while let Some(ch) = chars.next() {
        match ch {
            '\\' => match chars.next() {
                Some(next @ (':' | '\\' | '/')) => out.push(next),
                _ => {
                    return Err(MalformedCode {
                        input: input.to_string(),
                        reason: "invalid escape in local id",
                    })
                }
            },
            ':' => {
                return Err(MalformedCode {
                    input: input.to_string(),
                    reason: "unescaped ':' in local id",
                })
            }
            other => out.push(other),
        }
    }
    Ok(out)
}

/// Parse the canonical text form of a document code.
pub fn parse_document_code(s: &str) -> Result<DocumentCode, MalformedCode> {
    if s.is_empty() {
        return Err(MalformedCode {
            input: String::new(),
            reason: "empty code",
        });
    }
    if URI_SCHEMES.iter().any(|scheme| s.starts_with(scheme)) {
        return DocumentCode::uri(s);
    }
    let Some((source_id, rest)) = s.split_once(':') else {
        return Err(MalformedCode {
            input: s.to_string(),
            reason: "missing ':' separator and not a URI",
        });
    };
    let local_id = unescape_local(s, rest)?;
    DocumentCode::compound(source_id, local_id).map_err(|e| MalformedCode {
        input: s.to_string(),
        reason: e.reason,
    })
}

pub fn format_document_code(c: &DocumentCode) -> String {
    c.to_string()
}

impl fmt::Display for DocumentCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DocumentCode::Compound {
                source_id,
                local_id,
            } => {
                let mut out = String::with_capacity(source_id.len() + local_id.len() + 1);
                out.push_str(source_id);
                out.push(':');
                escape_local(local_id, &mut out);
                f.write_str(&out)
            }
            DocumentCode::Uri(uri) => f.write_str(uri),
        }
    }
}

impl FromStr for DocumentCode {
    type Err = MalformedCode;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_document_code(s)
    }
}

// Codes order by their canonical text so that reports sort the way the
// serialized catalog reads.
impl Ord for DocumentCode {
    fn cmp(&self, other: &Self) -> Ordering {
        self.to_string().cmp(&other.to_string())
    }
}

impl PartialOrd for DocumentCode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Serialize for DocumentCode {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DocumentCode {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_document_code(&s).map_err(serde::de::Error::custom)
    }
}
