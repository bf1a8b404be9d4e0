//! Phase transitions and their gate conditions.

use std::fmt;

use thiserror::Error;

use super::*;

/// One unmet gate condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateFailure {
    /// Entity the condition concerns, or "register".
    pub subject: String,
    pub condition: String,
}

impl fmt::Display for GateFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.subject, self.condition)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PhaseError {
    #[error("invalid transition from {from} to {to}")]
    InvalidTransition { from: Phase, to: Phase },
    #[error("gate to {target} not satisfied ({} condition(s) failed)", .failures.len())]
    Gate {
        target: Phase,
        failures: Vec<GateFailure>,
    },
}

fn failure(subject: impl Into<String>, condition: impl Into<String>) -> GateFailure {
    GateFailure {
        subject: subject.into(),
        condition: condition.into(),
    }
}

fn gate_failures(doc: &RegisterDocument, target: Phase) -> Vec<GateFailure> {
    let mut failures = Vec::new();
    match target {
        Phase::Concept => {}
        Phase::Exploration => {
            if doc.soi.concept_of_operation.trim().is_empty() {
                failures.push(failure("register", "no concept of operation described"));
            }
        }
        Phase::Design => {
            if doc.core_values.is_empty() {
                failures.push(failure("register", "no core values defined"));
            }
            let n = doc.core_values.len() as u32;
            let mut ranks: Vec<u32> = doc.core_values.iter().map(|cv| cv.priority_rank).collect();
            ranks.sort_unstable();
            if !ranks.iter().copied().eq(1..=n) {
                failures.push(failure("register", "priority ranks not assigned"));
            }
            if doc.evrs.is_empty() {
                failures.push(failure("register", "no EVRs defined"));
            }
            let no_go = doc
                .investment_decision
                .as_ref()
                .is_some_and(|d| d.verdict == Verdict::NoGo);
            if doc.mission.is_none() && !no_go {
                failures.push(failure(
                    "register",
                    "neither a value mission nor a no_go investment decision recorded",
                ));
            }
        }
        Phase::Deployment => {
            for evr in doc.evrs.iter().filter(|e| e.risk_path == RiskPath::High) {
                let open: Vec<String> = doc
                    .threats_of(evr.id)
                    .filter(|t| t.realistic && !doc.is_controlled(t.id))
                    .map(|t| t.id.to_string())
                    .collect();
                if !open.is_empty() {
                    failures.push(failure(
                        evr.id.to_string(),
                        format!(
                            "high-risk EVR {} has uncontrolled realistic threats: {}",
                            evr.id,
                            open.join(", ")
                        ),
                    ));
                }
            }
        }
    }
    failures
}

/// Moves the register to `target`, which must be the immediate successor of
/// its current phase. The gate conditions of the target phase must hold and
/// the resulting register must still satisfy every structural invariant.
pub fn advance_phase(
    doc: &RegisterDocument,
    target: Phase,
) -> Result<RegisterDocument, PhaseError> {
    if doc.phase.successor() != Some(target) {
        return Err(PhaseError::InvalidTransition {
            from: doc.phase,
            to: target,
        });
    }
    let mut failures = gate_failures(doc, target);
    let mut next = doc.clone();
    next.phase = target;
    if failures.is_empty() {
        failures.extend(
            validate(&next)
                .into_iter()
                .map(|v| failure(v.subject.to_string(), v.message)),
        );
    }
    if failures.is_empty() {
        Ok(next)
    } else {
        Err(PhaseError::Gate { target, failures })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_successor() {
        let doc = new_empty_register("X").unwrap();
        assert_eq!(
            advance_phase(&doc, Phase::Design),
            Err(PhaseError::InvalidTransition {
                from: Phase::Concept,
                to: Phase::Design
            })
        );
        assert!(advance_phase(&doc, Phase::Concept).is_err());
    }

    #[test]
    fn concept_to_exploration_needs_operation() {
        let mut doc = new_empty_register("X").unwrap();
        let Err(PhaseError::Gate { failures, .. }) = advance_phase(&doc, Phase::Exploration) else {
            panic!("gate should fail");
        };
        assert_eq!(failures.len(), 1);
        doc.soi.concept_of_operation = "online help desk".into();
        let next = advance_phase(&doc, Phase::Exploration).unwrap();
        assert_eq!(next.phase, Phase::Exploration);
        assert_eq!(doc.phase, Phase::Concept);
    }

    #[test]
    fn exploration_to_design_without_evrs() {
        let mut doc = new_empty_register("X").unwrap();
        doc.soi.concept_of_operation = "online help desk".into();
        let doc = advance_phase(&doc, Phase::Exploration).unwrap();
        let Err(PhaseError::Gate { failures, .. }) = advance_phase(&doc, Phase::Design) else {
            panic!("gate should fail");
        };
        assert!(failures.iter().any(|f| f.condition == "no EVRs defined"));
        assert!(failures
            .iter()
            .any(|f| f.condition == "no core values defined"));
    }
}
