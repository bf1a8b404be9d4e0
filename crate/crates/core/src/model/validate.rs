//! Structural invariants of a register: unique ids, resolvable references,
//! coherent dotted numbering and phase-consistent content.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use super::*;

/// Kind of entity a violation or a source span belongs to. The keyword is the
/// DSL block keyword that declares the entity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EntityKind {
    Project,
    Soi,
    Sos,
    Stakeholder,
    Context,
    Session,
    Statement,
    CoreValue,
    Quality,
    Evr,
    Threat,
    Control,
    Disposition,
    FunctionalRequirement,
    DesignConcept,
    Persona,
    Attestation,
    Mission,
    Decision,
    Feedback,
    Alias,
}

impl EntityKind {
    pub fn keyword(self) -> &'static str {
        match self {
            EntityKind::Project => "register",
            EntityKind::Soi => "soi",
            EntityKind::Sos => "sos",
            EntityKind::Stakeholder => "stakeholder",
            EntityKind::Context => "context",
            EntityKind::Session => "session",
            EntityKind::Statement => "statement",
            EntityKind::CoreValue => "corevalue",
            EntityKind::Quality => "quality",
            EntityKind::Evr => "evr",
            EntityKind::Threat => "threat",
            EntityKind::Control => "control",
            EntityKind::Disposition => "disposition",
            EntityKind::FunctionalRequirement => "funcreq",
            EntityKind::DesignConcept => "concept",
            EntityKind::Persona => "persona",
            EntityKind::Attestation => "attestation",
            EntityKind::Mission => "mission",
            EntityKind::Decision => "decision",
            EntityKind::Feedback => "feedback",
            EntityKind::Alias => "alias",
        }
    }
}

/// Identifies one declared entity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntityRef {
    pub kind: EntityKind,
    pub id: String,
    /// Index among entities sharing this kind and id; non-zero only for
    /// duplicates.
    pub occurrence: usize,
}

impl EntityRef {
    pub fn new(kind: EntityKind, id: impl ToString) -> Self {
        EntityRef {
            kind,
            id: id.to_string(),
            occurrence: 0,
        }
    }

    fn nth(kind: EntityKind, id: impl ToString, occurrence: usize) -> Self {
        EntityRef {
            kind,
            id: id.to_string(),
            occurrence,
        }
    }
}

impl fmt::Display for EntityRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.id.is_empty() {
            f.write_str(self.kind.keyword())
        } else {
            write!(f, "{} {}", self.kind.keyword(), self.id)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Invariant {
    DuplicateId,
    UnresolvedReference,
    QualityPrefix,
    EvrPrefix,
    ThreatPrefix,
    ControlPrefix,
    NonContiguous,
    PriorityRanks,
    CoreValueOrder,
    OutOfRange,
    MissingProtectionDemand,
    ImplementedWithoutDisposition,
    PhaseContent,
    AliasChain,
    PersonaKind,
    NoGoDecision,
    MissionOrder,
    ContextFlow,
    DispositionWithoutControl,
    EmptyField,
    IdSpace,
    DispositionMismatch,
}

impl Invariant {
    /// Diagnostic code reported by the parser for this invariant.
    pub fn code(self) -> &'static str {
        match self {
            Invariant::DuplicateId => "P010",
            Invariant::UnresolvedReference => "P011",
            Invariant::QualityPrefix => "P013",
            Invariant::EvrPrefix => "P014",
            Invariant::ThreatPrefix => "P015",
            Invariant::ControlPrefix => "P016",
            Invariant::NonContiguous => "P017",
            Invariant::PriorityRanks => "P018",
            Invariant::CoreValueOrder => "P019",
            Invariant::OutOfRange => "P024",
            Invariant::MissingProtectionDemand => "P025",
            Invariant::ImplementedWithoutDisposition => "P026",
            Invariant::PhaseContent => "P027",
            Invariant::AliasChain => "P028",
            Invariant::PersonaKind => "P029",
            Invariant::NoGoDecision => "P030",
            Invariant::MissionOrder => "P031",
            Invariant::ContextFlow => "P032",
            Invariant::DispositionWithoutControl => "P034",
            Invariant::EmptyField => "P035",
            Invariant::IdSpace => "P036",
            Invariant::DispositionMismatch => "P037",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub invariant: Invariant,
    pub subject: EntityRef,
    pub message: String,
}

struct Checker<'a> {
    doc: &'a RegisterDocument,
    out: Vec<Violation>,
}

impl Checker<'_> {
    fn push(&mut self, invariant: Invariant, subject: EntityRef, message: impl Into<String>) {
        self.out.push(Violation {
            invariant,
            subject,
            message: message.into(),
        });
    }

    fn unresolved(&mut self, subject: EntityRef, what: &str, target: impl fmt::Display) {
        self.push(
            Invariant::UnresolvedReference,
            subject,
            format!("reference to undeclared {what} `{target}`"),
        );
    }

    fn duplicates<I, K>(&mut self, kind: EntityKind, ids: I)
    where
        I: IntoIterator<Item = K>,
        K: fmt::Display,
    {
        let mut seen: HashMap<String, usize> = HashMap::new();
        for id in ids {
            let key = id.to_string();
            let count = seen.entry(key.clone()).or_insert(0);
            if *count > 0 {
                let message = format!("duplicate {} id `{key}`", kind.keyword());
                self.push(
                    Invariant::DuplicateId,
                    EntityRef::nth(kind, &key, *count),
                    message,
                );
            }
            *count += 1;
        }
    }

    /// Reports every parent whose children are not numbered exactly 1..=n.
    fn contiguity<P: Ord + fmt::Display + Copy>(
        &mut self,
        kind: EntityKind,
        what: &str,
        children: impl Iterator<Item = (P, u32, String)>,
    ) {
        let mut groups: BTreeMap<P, (BTreeSet<u32>, Vec<String>)> = BTreeMap::new();
        for (parent, index, id) in children {
            let group = groups.entry(parent).or_default();
            group.0.insert(index);
            group.1.push(id);
        }
        for (parent, (indices, ids)) in groups {
            let n = indices.len() as u32;
            if indices.iter().copied().ne(1..=n) {
                let listed: Vec<String> = indices.iter().map(u32::to_string).collect();
                let first = ids.into_iter().next().unwrap_or_default();
                self.push(
                    Invariant::NonContiguous,
                    EntityRef::new(kind, first),
                    format!(
                        "{what} under {parent} are numbered {{{}}}, expected 1..{n}",
                        listed.join(", ")
                    ),
                );
            }
        }
    }
}

/// Checks every structural invariant and returns the violations found, in a
/// deterministic order.
pub fn validate(doc: &RegisterDocument) -> Vec<Violation> {
    let mut c = Checker {
        doc,
        out: Vec::new(),
    };
    check_ids(&mut c);
    check_meta(&mut c);
    check_actors(&mut c);
    check_elicitation(&mut c);
    check_core_values(&mut c);
    check_chain(&mut c);
    check_design(&mut c);
    check_decisions(&mut c);
    c.out
}

fn check_ids(c: &mut Checker) {
    let doc = c.doc;
    c.duplicates(EntityKind::Sos, doc.sos_elements.iter().map(|e| &e.id));
    c.duplicates(
        EntityKind::Stakeholder,
        doc.stakeholders.iter().map(|e| &e.id),
    );
    c.duplicates(EntityKind::Context, doc.contexts.iter().map(|e| &e.id));
    c.duplicates(EntityKind::Session, doc.sessions.iter().map(|e| &e.id));
    c.duplicates(EntityKind::Statement, doc.statements.iter().map(|e| &e.id));
    c.duplicates(EntityKind::CoreValue, doc.core_values.iter().map(|e| e.id));
    c.duplicates(EntityKind::Quality, doc.qualities.iter().map(|e| e.id));
    c.duplicates(EntityKind::Evr, doc.evrs.iter().map(|e| e.id));
    c.duplicates(EntityKind::Threat, doc.threats.iter().map(|e| e.id));
    c.duplicates(EntityKind::Control, doc.controls.iter().map(|e| e.id));
    c.duplicates(
        EntityKind::Disposition,
        doc.dispositions.iter().map(|e| &e.id),
    );
    c.duplicates(
        EntityKind::FunctionalRequirement,
        doc.functional_requirements.iter().map(|e| &e.id),
    );
    c.duplicates(
        EntityKind::DesignConcept,
        doc.design_concepts.iter().map(|e| &e.id),
    );
    c.duplicates(EntityKind::Persona, doc.personas.iter().map(|e| &e.id));
    c.duplicates(
        EntityKind::Attestation,
        doc.attestations.iter().map(|e| &e.id),
    );
    c.duplicates(EntityKind::Feedback, doc.feedback.iter().map(|e| &e.id));

    for fr in &doc.functional_requirements {
        if fr.id.parse::<EvrId>().is_ok()
            || fr.id.parse::<ControlId>().is_ok()
            || fr.id.parse::<ThreatId>().is_ok()
            || fr.id.parse::<QualityId>().is_ok()
        {
            c.push(
                Invariant::IdSpace,
                EntityRef::new(EntityKind::FunctionalRequirement, &fr.id),
                format!(
                    "functional requirement id `{}` collides with the value-chain id space",
                    fr.id
                ),
            );
        }
    }
}

fn check_meta(c: &mut Checker) {
    let doc = c.doc;
    if doc.phase >= Phase::Exploration && doc.soi.concept_of_operation.trim().is_empty() {
        c.push(
            Invariant::PhaseContent,
            EntityRef::new(EntityKind::Soi, ""),
            format!(
                "concept of operation must be described in phase {}",
                doc.phase
            ),
        );
    }
    if doc.phase == Phase::Concept {
        for control in &doc.controls {
            c.push(
                Invariant::PhaseContent,
                EntityRef::new(EntityKind::Control, control.id),
                "controls cannot be declared in phase concept",
            );
        }
    }
    for (alias, canonical) in &doc.alias_map {
        let subject = EntityRef::new(EntityKind::Alias, alias);
        if alias.is_empty() || canonical.is_empty() {
            c.push(
                Invariant::EmptyField,
                subject,
                "alias names must not be empty",
            );
        } else if alias == canonical {
            c.push(
                Invariant::AliasChain,
                subject,
                format!("alias `{alias}` maps to itself"),
            );
        } else if doc.alias_map.contains_key(canonical) {
            c.push(
                Invariant::AliasChain,
                subject,
                format!("alias `{alias}` maps to `{canonical}`, which is itself an alias"),
            );
        }
    }
}

fn check_actors(c: &mut Checker) {
    let doc = c.doc;
    for sos in &doc.sos_elements {
        if sos.tier == 0 {
            c.push(
                Invariant::OutOfRange,
                EntityRef::new(EntityKind::Sos, &sos.id),
                "tier must be a positive integer",
            );
        }
    }
    for persona in &doc.personas {
        let subject = EntityRef::new(EntityKind::Persona, &persona.id);
        match doc.stakeholder(&persona.stakeholder) {
            None => c.unresolved(subject, "stakeholder", &persona.stakeholder),
            Some(s) if s.kind != persona.kind => c.push(
                Invariant::PersonaKind,
                subject,
                format!(
                    "persona kind {} differs from stakeholder `{}` kind {}",
                    persona.kind, s.id, s.kind
                ),
            ),
            Some(_) => {}
        }
    }
    for ctx in &doc.contexts {
        let subject = || EntityRef::new(EntityKind::Context, &ctx.id);
        for flow in &ctx.data_flows {
            for end in [&flow.source, &flow.sink] {
                if !ctx.data_elements.contains(end) {
                    c.push(
                        Invariant::ContextFlow,
                        subject(),
                        format!("data flow endpoint `{end}` is not a declared element"),
                    );
                }
            }
            if !ctx.data_types.contains(&flow.data_type) {
                c.push(
                    Invariant::ContextFlow,
                    subject(),
                    format!("data flow type `{}` is not a declared type", flow.data_type),
                );
            }
        }
        for data_subject in &ctx.data_subjects {
            if let DataSubject::Stakeholder(id) = data_subject {
                if doc.stakeholder(id).is_none() {
                    c.unresolved(subject(), "stakeholder", id);
                }
            }
        }
    }
}

fn check_lens(c: &mut Checker, subject: &EntityRef, lens: &Lens) {
    if let Lens::Cultural(framework) = lens {
        if framework.trim().is_empty() {
            c.push(
                Invariant::EmptyField,
                subject.clone(),
                "cultural lens must name its framework",
            );
        }
    }
}

fn check_elicitation(c: &mut Checker) {
    let doc = c.doc;
    for session in &doc.sessions {
        let subject = EntityRef::new(EntityKind::Session, &session.id);
        for p in &session.participants {
            if doc.stakeholder(p).is_none() {
                c.unresolved(subject.clone(), "stakeholder", p);
            }
        }
        for lens in &session.lenses_used {
            check_lens(c, &subject, lens);
        }
    }
    let sessions: HashSet<&str> = doc.sessions.iter().map(|s| s.id.as_str()).collect();
    for st in &doc.statements {
        let subject = EntityRef::new(EntityKind::Statement, &st.id);
        if !sessions.contains(st.session.as_str()) {
            c.unresolved(subject.clone(), "session", &st.session);
        }
        if doc.stakeholder(&st.stakeholder).is_none() {
            c.unresolved(subject.clone(), "stakeholder", &st.stakeholder);
        }
        check_lens(c, &subject, &st.lens);
    }
    let statements: HashSet<&str> = doc.statements.iter().map(|s| s.id.as_str()).collect();
    for fb in &doc.feedback {
        let subject = EntityRef::new(EntityKind::Feedback, &fb.id);
        if let FeedbackSource::Stakeholder(id) = &fb.source {
            if doc.stakeholder(id).is_none() {
                c.unresolved(subject.clone(), "stakeholder", id);
            }
        }
        for st in &fb.statements {
            if !statements.contains(st.as_str()) {
                c.unresolved(subject.clone(), "statement", st);
            }
        }
        for q in &fb.qualities {
            if doc.quality(*q).is_none() {
                c.unresolved(subject.clone(), "quality", q);
            }
        }
    }
    for cv in &doc.core_values {
        for st in &cv.supporting_statements {
            if !statements.contains(st.as_str()) {
                c.unresolved(
                    EntityRef::new(EntityKind::CoreValue, cv.id),
                    "statement",
                    st,
                );
            }
        }
    }
}

fn check_core_values(c: &mut Checker) {
    let doc = c.doc;
    for (position, cv) in doc.core_values.iter().enumerate() {
        let expected = position as u32 + 1;
        if cv.id != expected {
            c.push(
                Invariant::CoreValueOrder,
                EntityRef::new(EntityKind::CoreValue, cv.id),
                format!(
                    "core value ids must run 1..n in declaration order; expected {expected}, found {}",
                    cv.id
                ),
            );
        }
        if let Some(scores) = &cv.hierarchy_scores {
            if scores.as_array().iter().any(|s| !(1..=5).contains(s)) {
                c.push(
                    Invariant::OutOfRange,
                    EntityRef::new(EntityKind::CoreValue, cv.id),
                    "hierarchy scores must lie in 1..=5",
                );
            }
        }
    }
    let n = doc.core_values.len() as u32;
    let ranks: BTreeSet<u32> = doc.core_values.iter().map(|cv| cv.priority_rank).collect();
    if ranks.len() as u32 != n || ranks.iter().copied().ne(1..=n) {
        let mut seen = HashSet::new();
        let offender = doc
            .core_values
            .iter()
            .find(|cv| {
                cv.priority_rank == 0 || cv.priority_rank > n || !seen.insert(cv.priority_rank)
            })
            .map(|cv| cv.id)
            .unwrap_or(1);
        c.push(
            Invariant::PriorityRanks,
            EntityRef::new(EntityKind::CoreValue, offender),
            format!("priority ranks must form a permutation of 1..{n}"),
        );
    }
}

fn check_chain(c: &mut Checker) {
    let doc = c.doc;
    for q in &doc.qualities {
        let subject = EntityRef::new(EntityKind::Quality, q.id);
        if doc.core_value(q.core_value).is_none() {
            c.unresolved(subject.clone(), "core value", q.core_value);
        }
        if q.id.core != q.core_value {
            c.push(
                Invariant::QualityPrefix,
                subject,
                format!(
                    "quality id prefix does not match parent core value {}",
                    q.core_value
                ),
            );
        }
    }
    c.contiguity(
        EntityKind::Quality,
        "qualities",
        doc.qualities
            .iter()
            .map(|q| (q.id.core, q.id.index, q.id.to_string())),
    );

    for evr in &doc.evrs {
        let subject = EntityRef::new(EntityKind::Evr, evr.id);
        if doc.quality(evr.quality).is_none() {
            c.unresolved(subject.clone(), "quality", evr.quality);
        }
        if evr.id.quality_id() != evr.quality {
            c.push(
                Invariant::EvrPrefix,
                subject.clone(),
                format!(
                    "EVR id prefix does not match parent quality {}",
                    evr.quality
                ),
            );
        }
        match &evr.protection_demand {
            None if evr.risk_path == RiskPath::High => c.push(
                Invariant::MissingProtectionDemand,
                subject,
                "high-risk EVR needs a protection demand",
            ),
            Some(demand) if demand.rationale.trim().is_empty() => c.push(
                Invariant::EmptyField,
                subject,
                "protection demand rationale must not be empty",
            ),
            _ => {}
        }
    }
    c.contiguity(
        EntityKind::Evr,
        "EVRs",
        doc.evrs
            .iter()
            .map(|e| (e.id.quality_id(), e.id.index, e.id.to_string())),
    );

    for t in &doc.threats {
        let subject = EntityRef::new(EntityKind::Threat, t.id);
        if doc.evr(t.evr).is_none() {
            c.unresolved(subject.clone(), "EVR", t.evr);
        }
        if t.id.evr != t.evr {
            c.push(
                Invariant::ThreatPrefix,
                subject,
                format!("threat id prefix does not match parent EVR {}", t.evr),
            );
        }
    }
    c.contiguity(
        EntityKind::Threat,
        "threats",
        doc.threats
            .iter()
            .map(|t| (t.id.evr, t.id.index, t.id.to_string())),
    );

    for ctl in &doc.controls {
        let subject = EntityRef::new(EntityKind::Control, ctl.id);
        if ctl.threats.is_empty() {
            c.push(
                Invariant::EmptyField,
                subject.clone(),
                "control must reference at least one threat",
            );
        }
        for t in &ctl.threats {
            if doc.threat(*t).is_none() {
                c.unresolved(subject.clone(), "threat", t);
            }
            if t.evr != ctl.id.evr {
                c.push(
                    Invariant::ControlPrefix,
                    subject.clone(),
                    format!(
                        "threat {t} does not belong to EVR {} of this control",
                        ctl.id.evr
                    ),
                );
            }
        }
        match &ctl.implementing_disposition {
            None if ctl.status == ControlStatus::Implemented => c.push(
                Invariant::ImplementedWithoutDisposition,
                subject,
                "implemented control needs an implementing disposition",
            ),
            Some(d) => match doc.dispositions.iter().find(|x| &x.id == d) {
                None => c.unresolved(subject, "disposition", d),
                Some(disp) if !disp.controls.contains(&ctl.id) => c.push(
                    Invariant::DispositionMismatch,
                    subject,
                    format!("disposition `{d}` does not list this control"),
                ),
                Some(_) => {}
            },
            None => {}
        }
    }
    c.contiguity(
        EntityKind::Control,
        "controls",
        doc.controls
            .iter()
            .map(|x| (x.id.evr, x.id.index, x.id.to_string())),
    );
}

fn check_design(c: &mut Checker) {
    let doc = c.doc;
    for d in &doc.dispositions {
        let subject = EntityRef::new(EntityKind::Disposition, &d.id);
        if d.controls.is_empty() {
            c.push(
                Invariant::DispositionWithoutControl,
                subject.clone(),
                "disposition must implement at least one control",
            );
        }
        for ctl in &d.controls {
            if doc.control(*ctl).is_none() {
                c.unresolved(subject.clone(), "control", ctl);
            }
        }
    }
    let functional: HashSet<&str> = doc
        .functional_requirements
        .iter()
        .map(|f| f.id.as_str())
        .collect();
    for concept in &doc.design_concepts {
        let subject = EntityRef::new(EntityKind::DesignConcept, &concept.id);
        for r in &concept.ethical_refs {
            let found = match r {
                EthicalRef::Evr(id) => doc.evr(*id).is_some(),
                EthicalRef::Control(id) => doc.control(*id).is_some(),
            };
            if !found {
                c.unresolved(subject.clone(), "ethical requirement", r);
            }
        }
        for f in &concept.functional_refs {
            if !functional.contains(f.as_str()) {
                c.unresolved(subject.clone(), "functional requirement", f);
            }
        }
    }
}

fn check_decisions(c: &mut Checker) {
    let doc = c.doc;
    for att in &doc.attestations {
        let subject = EntityRef::new(EntityKind::Attestation, &att.id);
        if att.signatory.name.trim().is_empty() {
            c.push(
                Invariant::EmptyField,
                subject.clone(),
                "signatory name must not be empty",
            );
        }
        match &att.subject {
            AttestationSubject::PriorityDecision(id) => {
                if doc.core_value(*id).is_none() {
                    c.unresolved(subject, "core value", id);
                }
            }
            AttestationSubject::RiskAcceptance(id) => {
                if doc.control(*id).is_none() {
                    c.unresolved(subject, "control", id);
                }
            }
            AttestationSubject::Mission => {
                if doc.mission.is_none() {
                    c.unresolved(subject, "subject", "mission");
                }
            }
            AttestationSubject::InvestmentDecision => {
                if doc.investment_decision.is_none() {
                    c.unresolved(subject, "subject", "decision");
                }
            }
            AttestationSubject::Rule(rule) => {
                if crate::rules::find_rule(rule).is_none() {
                    c.unresolved(subject, "rule", rule);
                }
            }
        }
    }

    if let Some(mission) = &doc.mission {
        let subject = || EntityRef::new(EntityKind::Mission, "");
        for id in &mission.featured {
            if doc.core_value(*id).is_none() {
                c.unresolved(subject(), "core value", id);
            }
        }
        let order: Vec<u32> = doc
            .core_values_by_priority()
            .iter()
            .map(|cv| cv.id)
            .collect();
        if !order.starts_with(&mission.featured) {
            c.push(
                Invariant::MissionOrder,
                subject(),
                "featured values must be the top-ranked core values in priority order",
            );
        }
        for a in &mission.attestations {
            if doc.attestation(a).is_none() {
                c.unresolved(subject(), "attestation", a);
            }
        }
    }

    if let Some(decision) = &doc.investment_decision {
        let subject = || EntityRef::new(EntityKind::Decision, "");
        for a in &decision.attestations {
            if doc.attestation(a).is_none() {
                c.unresolved(subject(), "attestation", a);
            }
        }
        if decision.verdict == Verdict::NoGo {
            if decision.rationale.trim().is_empty() {
                c.push(
                    Invariant::NoGoDecision,
                    subject(),
                    "a no_go decision needs a rationale",
                );
            }
            let executive = decision.attestations.iter().any(|a| {
                doc.attestation(a)
                    .is_some_and(|att| att.signatory.role == SignatoryRole::Executive)
            });
            if !executive {
                c.push(
                    Invariant::NoGoDecision,
                    subject(),
                    "a no_go decision needs an executive attestation",
                );
            }
        }
    }
}
