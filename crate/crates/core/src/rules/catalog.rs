use std::sync::OnceLock;

use super::{Findings, Rule, RuleMode};
use crate::analytics::classify_risk_path;
use crate::model::*;
use crate::Severity;

use EntityKind as K;

fn signed(doc: &RegisterDocument, subject: &AttestationSubject, role: SignatoryRole) -> bool {
    doc.attestations_for(subject)
        .any(|a| a.signatory.role == role)
}

fn signed_rule(doc: &RegisterDocument, rule: &str, role: SignatoryRole) -> bool {
    signed(doc, &AttestationSubject::Rule(rule.to_string()), role)
}

fn evrs_of_value(doc: &RegisterDocument, core: u32) -> impl Iterator<Item = &Evr> {
    doc.evrs.iter().filter(move |e| e.quality.core == core)
}

fn r01(doc: &RegisterDocument, out: &mut Findings) {
    for e in &doc.sos_elements {
        if e.processes_personal_data && !e.in_ethical_scope {
            out.at(
                K::Sos,
                &e.id,
                "processes personal data but is outside the ethical scope",
            );
        }
    }
}

fn r02(doc: &RegisterDocument, out: &mut Findings) {
    for kind in StakeholderKind::ALL {
        if !doc.stakeholders.iter().any(|s| s.kind == *kind) {
            out.register(format!("no {kind} stakeholder declared"));
        }
    }
}

fn r03(doc: &RegisterDocument, out: &mut Findings) {
    if !doc
        .contexts
        .iter()
        .any(|c| c.captured == Capture::PreDesign)
    {
        out.register("no pre_design context of use captured");
    }
}

fn r05a(doc: &RegisterDocument, out: &mut Findings) {
    for s in &doc.sessions {
        let missing: Vec<String> = Lens::MANDATORY
            .iter()
            .filter(|l| !s.lenses_used.contains(*l))
            .map(ToString::to_string)
            .collect();
        if !missing.is_empty() {
            out.at(
                K::Session,
                &s.id,
                format!("session lenses omit {}", missing.join(", ")),
            );
        }
    }
}

fn r05b(doc: &RegisterDocument, out: &mut Findings) {
    let cultural = doc
        .sessions
        .iter()
        .any(|s| s.lenses_used.iter().any(Lens::is_cultural));
    if !doc.soi.deployment_regions.is_empty() && !cultural {
        out.register(format!(
            "deployment regions {} declared but no session uses a cultural lens",
            doc.soi.deployment_regions.join(", ")
        ));
    }
}

fn r06(doc: &RegisterDocument, out: &mut Findings) {
    for s in &doc.statements {
        if s.named_values.is_empty() {
            out.at(K::Statement, &s.id, "statement names no value");
        }
    }
}

fn r07(doc: &RegisterDocument, out: &mut Findings) {
    for cv in &doc.core_values {
        let subject = AttestationSubject::PriorityDecision(cv.id);
        if !signed(doc, &subject, SignatoryRole::Executive) {
            out.at(
                K::CoreValue,
                cv.id,
                format!("priority of `{}` lacks an executive attestation", cv.name),
            );
        }
    }
}

fn r08(doc: &RegisterDocument, out: &mut Findings) {
    if doc.feedback.is_empty() {
        out.register("no post-deployment feedback recorded");
    }
}

fn r09(doc: &RegisterDocument, out: &mut Findings) {
    if signed_rule(doc, "VBE-R09", SignatoryRole::Executive) {
        return;
    }
    let flagged =
        |cv: &CoreValue| evrs_of_value(doc, cv.id).any(|e| !e.legal_instruments.is_empty());
    for cv in doc.core_values.iter().filter(|cv| flagged(cv)) {
        let above: Vec<String> = doc
            .core_values_by_priority()
            .into_iter()
            .filter(|other| other.priority_rank < cv.priority_rank && !flagged(other))
            .map(|other| format!("`{}`", other.name))
            .collect();
        if !above.is_empty() {
            out.at(
                K::CoreValue,
                cv.id,
                format!(
                    "legally bound value `{}` is ranked below {} without an attested justification",
                    cv.name,
                    above.join(", ")
                ),
            );
        }
    }
}

fn r10(doc: &RegisterDocument, out: &mut Findings) {
    if doc.investment_decision.is_none() {
        out.register("no investment decision recorded");
    } else if !signed(
        doc,
        &AttestationSubject::InvestmentDecision,
        SignatoryRole::Executive,
    ) {
        out.at(
            K::Decision,
            "",
            "investment decision lacks an executive attestation",
        );
    }
}

fn r11(doc: &RegisterDocument, out: &mut Findings) {
    for cv in &doc.core_values {
        if !doc
            .qualities_of(cv.id)
            .any(|q| q.source == QualitySource::ConceptualInvestigation)
        {
            out.at(
                K::CoreValue,
                cv.id,
                format!(
                    "`{}` has no quality from a conceptual investigation",
                    cv.name
                ),
            );
        }
    }
}

fn r12(doc: &RegisterDocument, out: &mut Findings) {
    for q in &doc.qualities {
        if q.direction == Direction::Supports && doc.evrs_of(q.id).next().is_none() {
            out.at(
                K::Quality,
                q.id,
                format!("supporting quality `{}` has no EVR", q.name),
            );
        }
    }
}

fn r13(doc: &RegisterDocument, out: &mut Findings) {
    for e in &doc.evrs {
        if classify_risk_path(e) == RiskPath::High && e.risk_path != RiskPath::High {
            out.at(
                K::Evr,
                e.id,
                format!(
                    "must take the high-risk design path (recorded {})",
                    e.risk_path
                ),
            );
        } else if e.risk_path == RiskPath::Unclassified {
            out.at(K::Evr, e.id, "risk path not classified");
        }
    }
}

fn r14(doc: &RegisterDocument, out: &mut Findings) {
    if !doc.functional_requirements.is_empty()
        && !doc
            .design_concepts
            .iter()
            .any(|c| !c.ethical_refs.is_empty() && !c.functional_refs.is_empty())
    {
        out.register("no design concept joins ethical and functional requirements");
    }
}

fn c01(doc: &RegisterDocument, out: &mut Findings) {
    for e in &doc.sos_elements {
        if e.tier == 1 && !e.in_ethical_scope {
            out.at(
                K::Sos,
                &e.id,
                "first-tier partner is outside the ethical scope",
            );
        }
    }
}

fn c02(doc: &RegisterDocument, out: &mut Findings) {
    for e in &doc.sos_elements {
        let steerable = matches!(
            e.cooperation_type,
            Cooperation::Acknowledged | Cooperation::Directed
        );
        if e.in_ethical_scope && steerable && !e.access_to_enabling_elements {
            out.at(
                K::Sos,
                &e.id,
                format!(
                    "{} partner in scope without access to its enabling elements",
                    e.cooperation_type
                ),
            );
        }
    }
}

fn c03(doc: &RegisterDocument, out: &mut Findings) {
    for region in &doc.soi.deployment_regions {
        if !doc
            .stakeholders
            .iter()
            .any(|s| s.region.as_deref() == Some(region))
        {
            out.register(format!("no stakeholder from deployment region {region}"));
        }
    }
}

fn c04(doc: &RegisterDocument, out: &mut Findings) {
    for c in &doc.contexts {
        if c.integrity_expectations.is_empty() {
            out.at(
                K::Context,
                &c.id,
                "no contextual integrity expectation recorded",
            );
        }
    }
}

fn c05(doc: &RegisterDocument, out: &mut Findings) {
    if !doc
        .contexts
        .iter()
        .any(|c| c.captured == Capture::PostDeployment)
    {
        out.register("no post_deployment context of use captured");
    }
}

fn c06(doc: &RegisterDocument, out: &mut Findings) {
    for c in doc
        .contexts
        .iter()
        .filter(|c| c.captured == Capture::PreDesign)
    {
        if c.data_elements.is_empty() || c.data_subjects.is_empty() {
            out.at(
                K::Context,
                &c.id,
                "pre-design context lacks data elements or data subjects",
            );
        }
    }
}

fn c07(doc: &RegisterDocument, out: &mut Findings) {
    for cv in &doc.core_values {
        if doc.qualities_of(cv.id).next().is_none() {
            out.at(
                K::CoreValue,
                cv.id,
                format!("`{}` has no value quality", cv.name),
            );
        }
    }
}

fn c08(doc: &RegisterDocument, out: &mut Findings) {
    if !doc
        .attestations
        .iter()
        .any(|a| a.signatory.role == SignatoryRole::ValueExpert)
    {
        out.register("no value expert has signed any attestation");
    }
}

fn c09(doc: &RegisterDocument, out: &mut Findings) {
    if !signed_rule(doc, "VBE-C09", SignatoryRole::ValueExpert) {
        out.register("value clustering not confirmed by a value expert");
    }
}

fn c10(doc: &RegisterDocument, out: &mut Findings) {
    if !signed_rule(doc, "VBE-C10", SignatoryRole::StakeholderRep) {
        out.register("value clustering not confirmed by a stakeholder representative");
    }
}

fn c11(doc: &RegisterDocument, out: &mut Findings) {
    if !signed_rule(doc, "VBE-C11", SignatoryRole::Executive) {
        out.register("no executive endorsement of the value priorities");
    }
}

fn c12(doc: &RegisterDocument, out: &mut Findings) {
    for cv in &doc.core_values {
        let consented = doc
            .attestations_for(&AttestationSubject::PriorityDecision(cv.id))
            .any(|a| a.signatory.role == SignatoryRole::StakeholderRep && a.consent);
        if !consented {
            out.at(
                K::CoreValue,
                cv.id,
                format!("priority of `{}` lacks stakeholder consent", cv.name),
            );
        }
    }
}

fn c13(doc: &RegisterDocument, out: &mut Findings) {
    if doc.mission.is_none() {
        out.register("no value mission statement recorded");
    } else if !signed(doc, &AttestationSubject::Mission, SignatoryRole::Executive) {
        out.at(
            K::Mission,
            "",
            "value mission is not signed by an executive",
        );
    }
}

fn c14b(doc: &RegisterDocument, out: &mut Findings) {
    for e in &doc.evrs {
        if e.threshold.is_none() {
            out.at(K::Evr, e.id, "EVR has no threshold");
        }
    }
}

fn c15(doc: &RegisterDocument, out: &mut Findings) {
    if !doc
        .personas
        .iter()
        .any(|p| p.kind == StakeholderKind::Indirect)
    {
        out.register("no persona for an indirect stakeholder");
    }
}

fn c16(doc: &RegisterDocument, out: &mut Findings) {
    for e in doc.evrs.iter().filter(|e| e.risk_path == RiskPath::Low) {
        if doc.threats_of(e.id).next().is_none() {
            out.at(K::Evr, e.id, "low-risk EVR has no threat considered");
        }
    }
}

fn c17(doc: &RegisterDocument, out: &mut Findings) {
    if !doc
        .feedback
        .iter()
        .any(|f| matches!(f.source, FeedbackSource::Stakeholder(_)))
    {
        out.register("no feedback entry comes from a stakeholder");
    }
}

fn c18(doc: &RegisterDocument, out: &mut Findings) {
    for e in doc.evrs.iter().filter(|e| e.risk_path == RiskPath::High) {
        if doc.threats_of(e.id).next().is_none() {
            out.at(K::Evr, e.id, "high-risk EVR has no threat analysis");
        }
    }
}

fn c19(doc: &RegisterDocument, out: &mut Findings) {
    let participants = doc.sessions.iter().any(|s| !s.participants.is_empty());
    if !participants || doc.attestations.is_empty() {
        out.register("register does not yet record who took part and who signed off");
    }
}

fn c20(doc: &RegisterDocument, out: &mut Findings) {
    for c in doc.controls.iter().filter(|c| c.is_effective()) {
        let high = doc
            .evr(c.id.evr)
            .is_some_and(|e| e.risk_path == RiskPath::High);
        if high
            && !signed(
                doc,
                &AttestationSubject::RiskAcceptance(c.id),
                SignatoryRole::Engineer,
            )
        {
            out.at(
                K::Control,
                c.id,
                "high-risk control lacks an engineer endorsement",
            );
        }
    }
}

macro_rules! rule {
    ($id:literal, $sev:ident, $mode:ident, $phase:ident, $check:ident, $title:literal, $anchor:literal, $pred:literal) => {
        Rule {
            id: $id,
            severity: Severity::$sev,
            mode: RuleMode::$mode,
            phase: Phase::$phase,
            title: $title,
            anchor: $anchor,
            predicate: $pred,
            check: $check,
        }
    };
}

/// The fixed rule catalog, ordered by id.
pub fn rule_catalog() -> &'static [Rule] {
    static CATALOG: OnceLock<Vec<Rule>> = OnceLock::new();
    CATALOG.get_or_init(|| {
        vec![
            rule!("VBE-C01", Warning, Structural, Exploration, c01,
                "First-tier partners in scope", "sos-first-tier-scope",
                "every tier-1 SOS element is in the ethical scope"),
            rule!("VBE-C02", Warning, Structural, Exploration, c02,
                "Steerable partners are controllable", "sos-controllability",
                "acknowledged or directed SOS elements in scope have access to enabling elements"),
            rule!("VBE-C03", Warning, Structural, Exploration, c03,
                "Regional stakeholders", "region-representation",
                "every deployment region has a stakeholder from that region"),
            rule!("VBE-C04", Warning, Structural, Exploration, c04,
                "Contextual integrity expectations", "context-integrity",
                "every context of use records at least one integrity expectation"),
            rule!("VBE-C05", Warning, Structural, Deployment, c05,
                "Post-deployment context", "context-post-deployment",
                "at least one post_deployment context of use exists"),
            rule!("VBE-C06", Warning, Structural, Exploration, c06,
                "Context described before design", "context-pre-design-detail",
                "pre_design contexts declare data elements and data subjects"),
            rule!("VBE-C07", Warning, Structural, Design, c07,
                "Core values are elaborated", "value-quality-elaboration",
                "every core value has at least one value quality"),
            rule!("VBE-C08", Warning, Structural, Design, c08,
                "Value expert involved", "value-expert-role",
                "at least one attestation is signed by a value expert"),
            rule!("VBE-C09", Warning, Attested, Design, c09,
                "Clustering confirmed by value expert", "clustering-expert-confirmation",
                "a `rule VBE-C09` attestation signed by a value expert exists"),
            rule!("VBE-C10", Warning, Attested, Design, c10,
                "Clustering confirmed by stakeholders", "clustering-stakeholder-confirmation",
                "a `rule VBE-C10` attestation signed by a stakeholder representative exists"),
            rule!("VBE-C11", Warning, Attested, Design, c11,
                "Executive endorsement of priorities", "executive-universal-endorsement",
                "a `rule VBE-C11` attestation signed by an executive exists"),
            rule!("VBE-C12", Warning, Attested, Design, c12,
                "Stakeholder consent on priorities", "priority-stakeholder-consent",
                "each core value priority has a consenting stakeholder representative attestation"),
            rule!("VBE-C13", Warning, Attested, Design, c13,
                "Signed value mission", "value-mission-signed",
                "a value mission exists and is signed by an executive"),
            rule!("VBE-C14b", Warning, Structural, Design, c14b,
                "EVR thresholds", "evr-threshold",
                "every EVR carries a threshold"),
            rule!("VBE-C15", Warning, Structural, Design, c15,
                "Indirect persona", "indirect-persona",
                "at least one persona represents an indirect stakeholder"),
            rule!("VBE-C16", Warning, Structural, Design, c16,
                "Low-risk threats considered", "low-risk-threat-review",
                "every low-risk EVR has at least one threat"),
            rule!("VBE-C17", Warning, Structural, Deployment, c17,
                "Stakeholder feedback", "stakeholder-feedback",
                "at least one feedback entry comes from a stakeholder"),
            rule!("VBE-C18", Warning, Structural, Design, c18,
                "High-risk chain analysed", "high-risk-chain",
                "every high-risk EVR has at least one threat"),
            rule!("VBE-C19", Warning, Structural, Design, c19,
                "Audit trail recorded", "audit-trail",
                "sessions record participants and at least one attestation exists"),
            rule!("VBE-C20", Warning, Attested, Design, c20,
                "Engineer endorsement of high-risk controls", "engineer-risk-endorsement",
                "every accepted or implemented high-risk control has an engineer risk attestation"),
            rule!("VBE-R01", Error, Structural, Exploration, r01,
                "Personal data partners in scope", "sos-personal-data-scope",
                "every SOS element processing personal data is in the ethical scope"),
            rule!("VBE-R02", Error, Structural, Exploration, r02,
                "Direct and indirect stakeholders", "stakeholder-breadth",
                "at least one direct and one indirect stakeholder exist"),
            rule!("VBE-R03", Error, Structural, Exploration, r03,
                "Envisioned context of use", "context-pre-design",
                "at least one pre_design context of use exists"),
            rule!("VBE-R05a", Error, Structural, Exploration, r05a,
                "Three ethical lenses", "elicitation-three-lenses",
                "every session uses the utilitarian, virtue and duty lenses"),
            rule!("VBE-R05b", Error, Structural, Exploration, r05b,
                "Cultural lens", "elicitation-cultural-lens",
                "some session uses a cultural lens when deployment regions are declared"),
            rule!("VBE-R06", Error, Structural, Exploration, r06,
                "Statements name values", "statement-values",
                "every value statement names at least one value"),
            rule!("VBE-R07", Error, Attested, Design, r07,
                "Executive prioritization", "executive-prioritization",
                "each core value priority is attested by an executive"),
            rule!("VBE-R08", Error, Structural, Deployment, r08,
                "Post-deployment feedback", "deployment-feedback",
                "at least one feedback entry exists"),
            rule!("VBE-R09", Error, Structural, Design, r09,
                "Legal boundary ordering", "legal-boundary-priority",
                "no legally bound core value is ranked below an unbound one without a `rule VBE-R09` executive attestation"),
            rule!("VBE-R10", Error, Attested, Design, r10,
                "Investment decision", "go-no-go-decision",
                "an investment decision exists and is attested by an executive"),
            rule!("VBE-R11", Error, Structural, Design, r11,
                "Conceptual investigation", "conceptual-investigation",
                "every core value has a quality sourced from a conceptual investigation"),
            rule!("VBE-R12", Error, Structural, Design, r12,
                "Qualities become requirements", "quality-to-evr",
                "every supporting quality has at least one EVR"),
            rule!("VBE-R13", Error, Structural, Design, r13,
                "Risk path agreement", "high-risk-path",
                "every EVR's risk path is classified and agrees with the risk classifier"),
            rule!("VBE-R14", Error, Structural, Design, r14,
                "Holistic design concept", "holistic-design-concept",
                "some design concept references both an ethical and a functional requirement"),
        ]
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn catalog_shape() {
        let cat = rule_catalog();
        assert_eq!(
            cat.iter().filter(|r| r.severity == Severity::Error).count(),
            14
        );
        assert_eq!(
            cat.iter()
                .filter(|r| r.severity == Severity::Warning)
                .count(),
            20
        );
        let ids: HashSet<&str> = cat.iter().map(|r| r.id).collect();
        assert_eq!(ids.len(), cat.len());
        assert!(cat.iter().all(|r| !r.anchor.is_empty()));
        assert!(cat.windows(2).all(|w| w[0].id < w[1].id));
        for r in cat {
            let letter = if r.severity == Severity::Error {
                "VBE-R"
            } else {
                "VBE-C"
            };
            assert!(r.id.starts_with(letter), "{}", r.id);
        }
    }
}
