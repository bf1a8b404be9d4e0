//! Conformance rules: process requirements (errors) and recommendations
//! (warnings) evaluated over a parsed register.
//!
//! Structural rules read the model directly. Attested rules only look for a
//! signed attestation with the right subject and signatory role; the text of
//! the attestation is never judged.

mod catalog;

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::dsl::{SourceMap, SourceSpan};
use crate::model::{EntityKind, EntityRef, Phase, RegisterDocument};
use crate::Severity;

pub use catalog::rule_catalog;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleMode {
    Structural,
    Attested,
}

impl fmt::Display for RuleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RuleMode::Structural => "structural",
            RuleMode::Attested => "attested",
        })
    }
}

type Check = fn(&RegisterDocument, &mut Findings);

#[derive(Clone, Copy)]
pub struct Rule {
    pub id: &'static str,
    pub severity: Severity,
    pub mode: RuleMode,
    /// Earliest phase in which the rule fires.
    pub phase: Phase,
    pub title: &'static str,
    /// Short tag naming the obligation the rule enforces.
    pub anchor: &'static str,
    pub predicate: &'static str,
    check: Check,
}

impl fmt::Debug for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Rule")
            .field("id", &self.id)
            .field("severity", &self.severity)
            .field("mode", &self.mode)
            .field("phase", &self.phase)
            .finish_non_exhaustive()
    }
}

impl Rule {
    fn evaluate(&self, doc: &RegisterDocument) -> Vec<Diagnostic> {
        if doc.phase < self.phase {
            return Vec::new();
        }
        let mut findings = Findings::default();
        (self.check)(doc, &mut findings);
        findings
            .0
            .into_iter()
            .map(|(entity, message)| Diagnostic {
                rule_id: self.id,
                severity: self.severity,
                subject: if entity.kind == EntityKind::Project {
                    "register".to_string()
                } else if entity.id.is_empty() {
                    entity.kind.keyword().to_string()
                } else {
                    entity.id.clone()
                },
                span: None,
                message,
                entity,
            })
            .collect()
    }
}

#[derive(Default)]
struct Findings(Vec<(EntityRef, String)>);

impl Findings {
    fn at(&mut self, kind: EntityKind, id: impl ToString, message: impl Into<String>) {
        self.0.push((EntityRef::new(kind, id), message.into()));
    }

    fn register(&mut self, message: impl Into<String>) {
        self.at(EntityKind::Project, "", message);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub rule_id: &'static str,
    pub severity: Severity,
    /// Entity id, or "register" for register-wide findings.
    pub subject: String,
    pub span: Option<SourceSpan>,
    pub message: String,
    #[serde(skip)]
    pub entity: EntityRef,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {}: {}",
            self.severity, self.rule_id, self.subject, self.message
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("invalid argument: unknown rule id(s): {}", .0.join(", "))]
    UnknownRules(Vec<String>),
}

pub fn find_rule(id: &str) -> Option<&'static Rule> {
    rule_catalog().iter().find(|r| r.id == id)
}

/// Runs the selected rules (all rules when `selection` is empty) and returns
/// diagnostics sorted by severity, rule id, subject and message.
pub fn run_rules(doc: &RegisterDocument, selection: &[&str]) -> Result<Vec<Diagnostic>, RuleError> {
    let unknown: BTreeSet<String> = selection
        .iter()
        .filter(|id| find_rule(id).is_none())
        .map(|id| id.to_string())
        .collect();
    if !unknown.is_empty() {
        return Err(RuleError::UnknownRules(unknown.into_iter().collect()));
    }
    let mut out: Vec<Diagnostic> = rule_catalog()
        .iter()
        .filter(|r| selection.is_empty() || selection.contains(&r.id))
        .flat_map(|r| r.evaluate(doc))
        .collect();
    out.sort_by(|a, b| {
        (a.severity, a.rule_id, &a.subject, &a.message)
            .cmp(&(b.severity, b.rule_id, &b.subject, &b.message))
    });
    out.dedup();
    Ok(out)
}

/// Diagnostics of a single rule; equal to the matching subset of
/// [`run_rules`].
pub fn check_rule(doc: &RegisterDocument, rule_id: &str) -> Result<Vec<Diagnostic>, RuleError> {
    run_rules(doc, &[rule_id])
}

/// Fills in source spans for diagnostics whose subject was declared in the
/// parsed text. Register-wide findings point at the header.
pub fn attach_spans(diagnostics: &mut [Diagnostic], map: &SourceMap) {
    for d in diagnostics {
        d.span = map.span_of(&d.entity).cloned();
    }
}
