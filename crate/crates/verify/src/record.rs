//! JSON audit records.

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    /// Short audit id, e.g. `encodings` or `decomposition`.
    pub audit: String,
    /// The bound or identity being checked.
    pub lemma: String,
    pub params: Value,
    pub measured: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub envelope: Option<f64>,
    pub pass: bool,
    /// Exact identities count toward the process exit status; empirical
    /// envelopes do not.
    pub exact_identity: bool,
    #[serde(skip_serializing_if = "Value::is_null", default)]
    pub details: Value,
}

impl AuditRecord {
    pub fn new(audit: &str, lemma: &str, params: Value, measured: f64, pass: bool, exact_identity: bool) -> Self {
        Self {
            audit: audit.to_string(),
            lemma: lemma.to_string(),
            params,
            measured,
            envelope: None,
            pass,
            exact_identity,
            details: Value::Null,
        }
    }

    pub fn with_envelope(mut self, envelope: f64) -> Self {
        self.envelope = Some(envelope);
        self
    }

    pub fn with_details(mut self, details: Value) -> Self {
        self.details = details;
        self
    }

    /// True when this record should make the run fail.
    pub fn is_identity_failure(&self) -> bool {
        self.exact_identity && !self.pass
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("audit records always serialize")
    }
}
