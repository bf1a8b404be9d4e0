use serde::Serialize;

use super::maturity::is_addressed;
use crate::model::*;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverageRow {
    pub core_value: u32,
    pub name: String,
    pub rank: u32,
    pub qualities: usize,
    pub evrs: usize,
    /// EVRs carrying a threshold.
    pub thresholds: usize,
    pub threats: usize,
    pub controls: usize,
    /// Priority attestations for the value plus risk attestations for its
    /// controls.
    pub attestations: usize,
    pub addressed: bool,
}

/// One row per core value, in priority order.
pub fn coverage_report(doc: &RegisterDocument) -> Vec<CoverageRow> {
    doc.core_values_by_priority()
        .into_iter()
        .map(|cv| {
            let evrs: Vec<&Evr> = doc
                .evrs
                .iter()
                .filter(|e| e.quality.core == cv.id)
                .collect();
            let threats = doc.threats.iter().filter(|t| t.evr.core == cv.id).count();
            let controls = doc
                .controls
                .iter()
                .filter(|c| c.id.evr.core == cv.id)
                .count();
            let attestations = doc
                .attestations
                .iter()
                .filter(|a| match &a.subject {
                    AttestationSubject::PriorityDecision(id) => *id == cv.id,
                    AttestationSubject::RiskAcceptance(c) => c.evr.core == cv.id,
                    _ => false,
                })
                .count();
            CoverageRow {
                core_value: cv.id,
                name: cv.name.clone(),
                rank: cv.priority_rank,
                qualities: doc.qualities_of(cv.id).count(),
                evrs: evrs.len(),
                thresholds: evrs.iter().filter(|e| e.threshold.is_some()).count(),
                threats,
                controls,
                attestations,
                addressed: is_addressed(doc, cv.id),
            }
        })
        .collect()
}
