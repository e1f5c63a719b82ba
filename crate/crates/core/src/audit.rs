//! Named property checks with witnesses.

use serde::{Deserialize, Serialize};

/// One failed property check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub check: String,
    pub witness: String,
}

impl Violation {
    pub fn new(check: &str, witness: impl Into<String>) -> Self {
        Violation { check: check.to_string(), witness: witness.into() }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.check, self.witness)
    }
}
