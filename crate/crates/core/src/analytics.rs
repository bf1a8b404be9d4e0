//! Exploration-phase computations: lens coverage, value frequency tallies,
//! criteria-based ranking, risk-path classification and control rigor.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet};
use std::num::NonZeroUsize;

use serde::Serialize;
use thiserror::Error;

use crate::model::*;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalyticsError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("control {control} does not mitigate threats of EVR {evr}")]
    Mismatch { control: ControlId, evr: EvrId },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SessionLenses {
    pub session: String,
    /// Mandatory lenses the session did not use.
    pub missing: Vec<Lens>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LensCoverage {
    pub sessions: Vec<SessionLenses>,
    /// Deployment regions are declared but no session used a cultural lens.
    pub cultural_lens_missing: bool,
}

pub fn lens_coverage(doc: &RegisterDocument) -> LensCoverage {
    let sessions = doc
        .sessions
        .iter()
        .map(|s| SessionLenses {
            session: s.id.clone(),
            missing: Lens::MANDATORY
                .iter()
                .filter(|l| !s.lenses_used.contains(*l))
                .cloned()
                .collect(),
        })
        .collect();
    let cultural = doc
        .sessions
        .iter()
        .any(|s| s.lenses_used.iter().any(Lens::is_cultural));
    LensCoverage {
        sessions,
        cultural_lens_missing: !doc.soi.deployment_regions.is_empty() && !cultural,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TallyEntry {
    pub positive: usize,
    pub negative: usize,
    /// Contributing statements in declaration order.
    pub statements: Vec<String>,
}

impl TallyEntry {
    pub fn total(&self) -> usize {
        self.positive + self.negative
    }
}

/// Statement counts per canonical value name.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValueTally {
    pub values: BTreeMap<String, TallyEntry>,
}

impl ValueTally {
    pub fn positive(&self) -> usize {
        self.values.values().map(|e| e.positive).sum()
    }

    pub fn negative(&self) -> usize {
        self.values.values().map(|e| e.negative).sum()
    }

    pub fn get(&self, name: &str) -> Option<&TallyEntry> {
        self.values.get(name)
    }
}

/// Counts, per alias-resolved value name, the statements that mention it.
/// A statement counts at most once per name, under its own polarity.
pub fn tally_values(doc: &RegisterDocument) -> ValueTally {
    let mut tally = ValueTally::default();
    for st in &doc.statements {
        let names: BTreeSet<&str> = st
            .named_values
            .iter()
            .chain(&st.extracted_values)
            .map(|n| resolve_alias(doc, n))
            .collect();
        for name in names {
            let entry = tally.values.entry(name.to_string()).or_default();
            match st.polarity {
                Polarity::Positive => entry.positive += 1,
                Polarity::Negative => entry.negative += 1,
            }
            entry.statements.push(st.id.clone());
        }
    }
    tally
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Candidate {
    pub name: String,
    pub count: usize,
}

/// Value names mentioned by at least `min_count` statements, most frequent
/// first, ties by name. A proposal only; nothing is written to the register.
pub fn propose_core_values(tally: &ValueTally, min_count: NonZeroUsize) -> Vec<Candidate> {
    let mut out: Vec<Candidate> = tally
        .values
        .iter()
        .filter(|(_, e)| e.total() >= min_count.get())
        .map(|(name, e)| Candidate {
            name: name.clone(),
            count: e.total(),
        })
        .collect();
    out.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.name.cmp(&b.name)));
    out
}

/// Equal weights for the five criteria.
pub const UNIT_WEIGHTS: [f64; 5] = [1.0; 5];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairComparison {
    /// Ranked ahead.
    pub first: u32,
    pub second: u32,
    pub first_scores: [u8; 5],
    pub second_scores: [u8; 5],
    pub first_total: f64,
    pub second_total: f64,
    /// "score", "priority_rank" or "id": what separated the pair.
    pub decided_by: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankingExplanation {
    /// Core value ids, best first.
    pub order: Vec<u32>,
    pub totals: BTreeMap<u32, f64>,
    /// One record per pair, in ranking order.
    pub comparisons: Vec<PairComparison>,
}

/// Advisory ranking by weighted criterion scores. Ties fall back to the
/// human-set priority rank, then id. The order does not change when all
/// weights are multiplied by the same positive factor.
pub fn rank_values(
    values: &[CoreValue],
    weights: [f64; 5],
) -> Result<RankingExplanation, AnalyticsError> {
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(AnalyticsError::InvalidArgument(
            "weights must be finite and non-negative".into(),
        ));
    }
    let weight_sum: f64 = weights.iter().sum();
    if weight_sum <= 0.0 || !weight_sum.is_finite() {
        return Err(AnalyticsError::InvalidArgument(
            "weights must not all be zero".into(),
        ));
    }
    struct Entry<'a> {
        cv: &'a CoreValue,
        scores: [u8; 5],
        total: f64,
        key: i64,
    }
    let mut entries = Vec::with_capacity(values.len());
    for cv in values {
        let Some(scores) = cv.hierarchy_scores.as_ref().map(HierarchyScores::as_array) else {
            return Err(AnalyticsError::InvalidArgument(format!(
                "core value {} `{}` has no hierarchy scores",
                cv.id, cv.name
            )));
        };
        let total: f64 = scores
            .iter()
            .zip(weights)
            .map(|(s, w)| f64::from(*s) * w)
            .sum();
        // Normalizing by the weight sum and rounding makes the key exactly
        // scale-free despite floating-point error.
        let key = (total / weight_sum * 1e9).round() as i64;
        entries.push(Entry {
            cv,
            scores,
            total,
            key,
        });
    }
    entries.sort_by_key(|e| (Reverse(e.key), e.cv.priority_rank, e.cv.id));

    let mut comparisons = Vec::new();
    for (i, a) in entries.iter().enumerate() {
        for b in &entries[i + 1..] {
            let decided_by = if a.key != b.key {
                "score"
            } else if a.cv.priority_rank != b.cv.priority_rank {
                "priority_rank"
            } else {
                "id"
            };
            comparisons.push(PairComparison {
                first: a.cv.id,
                second: b.cv.id,
                first_scores: a.scores,
                second_scores: b.scores,
                first_total: a.total,
                second_total: b.total,
                decided_by,
            });
        }
    }
    Ok(RankingExplanation {
        order: entries.iter().map(|e| e.cv.id).collect(),
        totals: entries.iter().map(|e| (e.cv.id, e.total)).collect(),
        comparisons,
    })
}

/// High when the EVR is legally protected, or when life or health harm is
/// reasonably likely; low otherwise.
pub fn classify_risk_path(evr: &Evr) -> RiskPath {
    let legal = !evr.legal_instruments.is_empty() || evr.harm_flags.legal_breach;
    let bodily = (evr.harm_flags.life || evr.harm_flags.health)
        && evr.harm_likelihood == Likelihood::ReasonablyLikely;
    if legal || bodily {
        RiskPath::High
    } else {
        RiskPath::Low
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RigorCheck {
    Ok,
    Violation { rigor: Level, demand: Level },
}

/// Compares a control's rigor with the protection demand of the EVR whose
/// threats it mitigates. An EVR without a demand accepts any rigor.
pub fn check_control_rigor(control: &Control, evr: &Evr) -> Result<RigorCheck, AnalyticsError> {
    if control.id.evr != evr.id || control.threats.iter().any(|t| t.evr != evr.id) {
        return Err(AnalyticsError::Mismatch {
            control: control.id,
            evr: evr.id,
        });
    }
    Ok(match &evr.protection_demand {
        Some(d) if control.rigor < d.level => RigorCheck::Violation {
            rigor: control.rigor,
            demand: d.level,
        },
        _ => RigorCheck::Ok,
    })
}
