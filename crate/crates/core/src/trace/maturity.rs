use serde::Serialize;

use crate::model::*;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Maturity {
    pub addressed: usize,
    pub total: usize,
    /// `addressed / total`, or 0 when there are no core values.
    pub ratio: f64,
    pub empty: bool,
}

/// A core value is addressed when every supporting quality has an EVR and
/// every realistic threat is controlled on its high-risk EVRs and on the
/// EVRs of its undermining qualities.
pub fn is_addressed(doc: &RegisterDocument, core_value: u32) -> bool {
    doc.qualities_of(core_value).all(|q| {
        let mut evrs = doc.evrs_of(q.id).peekable();
        if q.direction == Direction::Supports && evrs.peek().is_none() {
            return false;
        }
        evrs.filter(|e| e.risk_path == RiskPath::High || q.direction == Direction::Undermines)
            .all(|e| {
                doc.threats_of(e.id)
                    .all(|t| !t.realistic || doc.is_controlled(t.id))
            })
    })
}

pub fn maturity_score(doc: &RegisterDocument) -> Maturity {
    let total = doc.core_values.len();
    let addressed = doc
        .core_values
        .iter()
        .filter(|cv| is_addressed(doc, cv.id))
        .count();
    Maturity {
        addressed,
        total,
        ratio: if total == 0 {
            0.0
        } else {
            addressed as f64 / total as f64
        },
        empty: total == 0,
    }
}
