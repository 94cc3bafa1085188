use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Sentinel action standing for "no cause / no effect".
pub const NOTHING: &str = "nothing";
/// Sentinel action standing for an unrecorded cause or effect.
pub const UNKNOWN: &str = "unknown";
/// Sentinel participant performing the sentinel actions.
pub const NOBODY: &str = "nobody";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdError {
    #[error("object id must not be empty")]
    Empty,
    #[error("object id {0:?} contains whitespace or a quote")]
    BadChar(String),
}

/// Opaque identifier of an object (action, participant, class, characteristic).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObjectId(String);

impl ObjectId {
    pub fn new(id: impl Into<String>) -> Result<Self, IdError> {
        let id = id.into();
        if id.is_empty() {
            return Err(IdError::Empty);
        }
        if id.chars().any(|c| c.is_whitespace() || c == '"') {
            return Err(IdError::BadChar(id));
        }
        Ok(ObjectId(id))
    }

    pub fn nothing() -> Self {
        ObjectId(NOTHING.to_string())
    }

    pub fn unknown() -> Self {
        ObjectId(UNKNOWN.to_string())
    }

    pub fn nobody() -> Self {
        ObjectId(NOBODY.to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_sentinel(&self) -> bool {
        self.is_sentinel_action() || self.0 == NOBODY
    }

    pub fn is_sentinel_action(&self) -> bool {
        self.0 == NOTHING || self.0 == UNKNOWN
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for ObjectId {
    type Err = IdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ObjectId::new(s)
    }
}

impl AsRef<str> for ObjectId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl PartialEq<str> for ObjectId {
    fn eq(&self, other: &str) -> bool {
        self.0 == other
    }
}

impl PartialEq<&str> for ObjectId {
    fn eq(&self, other: &&str) -> bool {
        self.0 == *other
    }
}

/// Shorthand used throughout tests and fixtures. Panics on an invalid id.
pub fn oid(s: &str) -> ObjectId {
    ObjectId::new(s).unwrap_or_else(|e| panic!("invalid object id: {e}"))
}
