//! Toolkit for Ethical Value Registers: a typed model, a text format with
//! diagnostics, conformance rules, traceability and analytics.

use std::fmt;

use serde::Serialize;

pub mod analytics;
pub mod dsl;
pub mod model;
pub mod rules;
pub mod trace;

pub use dsl::{export_interchange, parse_register, serialize_canonical, ParseResult};
pub use model::RegisterDocument;
pub use rules::{check_rule, rule_catalog, run_rules, Diagnostic};

/// Diagnostic severity. Errors order before warnings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}
