//! In-memory model of an Ethical Value Register.
//!
//! A [`RegisterDocument`] is a plain value: operations never mutate it in
//! place, they return a new document or a report. Structural invariants are
//! checked by [`validate`]; conformance to the engineering process is the job
//! of [`crate::rules`].

mod ids;
mod lifecycle;
mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use ids::{parse_positive, ControlId, EvrId, IdError, QualityId, ThreatId};
pub use lifecycle::{advance_phase, GateFailure, PhaseError};
pub use validate::{validate, EntityKind, EntityRef, Invariant, Violation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown {kind} keyword `{text}`")]
pub struct KeywordError {
    pub kind: &'static str,
    pub text: String,
}

/// Declares a closed enum together with its DSL keyword spelling.
macro_rules! keyword_enum {
    ($(#[$meta:meta])* $name:ident : $label:literal { $($variant:ident => $kw:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn keyword(self) -> &'static str {
                match self {
                    $($name::$variant => $kw),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.keyword())
            }
        }

        impl FromStr for $name {
            type Err = KeywordError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($kw => Ok($name::$variant),)+
                    _ => Err(KeywordError { kind: $label, text: s.to_string() }),
                }
            }
        }
    };
}

keyword_enum!(
    /// Coarse lifecycle state of a register; content requirements grow with it.
    Phase: "phase" {
        Concept => "concept",
        Exploration => "exploration",
        Design => "design",
        Deployment => "deployment",
    }
);

impl Phase {
    pub fn successor(self) -> Option<Phase> {
        match self {
            Phase::Concept => Some(Phase::Exploration),
            Phase::Exploration => Some(Phase::Design),
            Phase::Design => Some(Phase::Deployment),
            Phase::Deployment => None,
        }
    }
}

keyword_enum!(
    /// The four system-of-systems cooperation types.
    Cooperation: "cooperation" {
        Virtual => "virtual",
        Collaborative => "collaborative",
        Acknowledged => "acknowledged",
        Directed => "directed",
    }
);

keyword_enum!(StakeholderKind: "stakeholder kind" {
    Direct => "direct",
    Indirect => "indirect",
});

keyword_enum!(Capture: "capture" {
    PreDesign => "pre_design",
    PostDeployment => "post_deployment",
});

keyword_enum!(Polarity: "polarity" {
    Positive => "positive",
    Negative => "negative",
});

keyword_enum!(Direction: "direction" {
    Supports => "supports",
    Undermines => "undermines",
});

keyword_enum!(QualitySource: "quality source" {
    Stakeholder => "stakeholder",
    ConceptualInvestigation => "conceptual_investigation",
    PostDeployment => "post_deployment",
});

keyword_enum!(EvrKind: "requirement kind" {
    Organizational => "organizational",
    Technical => "technical",
});

keyword_enum!(Comparator: "comparator" {
    AtLeast => "at_least",
    AtMost => "at_most",
    Exactly => "exactly",
    Above => "above",
    Below => "below",
});

keyword_enum!(RiskPath: "risk path" {
    Unclassified => "unclassified",
    Low => "low",
    High => "high",
});

keyword_enum!(Likelihood: "likelihood" {
    Unlikely => "unlikely",
    ReasonablyLikely => "reasonably_likely",
});

keyword_enum!(ControlForm: "control form" {
    Functional => "functional",
    NonFunctional => "non_functional",
    Operational => "operational",
    Procedural => "procedural",
    Organizational => "organizational",
    Structural => "structural",
});

keyword_enum!(ControlStatus: "control status" {
    Proposed => "proposed",
    Accepted => "accepted",
    Implemented => "implemented",
});

keyword_enum!(SignatoryRole: "signatory role" {
    Executive => "executive",
    Engineer => "engineer",
    StakeholderRep => "stakeholder_rep",
    ValueExpert => "value_expert",
});

keyword_enum!(Verdict: "verdict" {
    Go => "go",
    NoGo => "no_go",
});

/// Ordinal scale shared by protection demand and control rigor:
/// 1 = low, 2 = standard, 3 = high, 4 = very high.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Level(u8);

impl Level {
    pub const LOW: Level = Level(1);
    pub const STANDARD: Level = Level(2);
    pub const HIGH: Level = Level(3);
    pub const VERY_HIGH: Level = Level(4);

    pub fn new(value: u8) -> Option<Level> {
        (1..=4).contains(&value).then_some(Level(value))
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn label(self) -> &'static str {
        match self.0 {
            1 => "low",
            2 => "standard",
            3 => "high",
            _ => "very_high",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for Level {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_u8(self.0)
    }
}

impl<'de> Deserialize<'de> for Level {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = u8::deserialize(deserializer)?;
        Level::new(raw).ok_or_else(|| serde::de::Error::custom(format!("level {raw} out of 1..=4")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectMeta {
    pub name: String,
    pub version: Option<String>,
}

/// The system of interest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Soi {
    pub name: String,
    pub concept_of_operation: String,
    pub deployment_regions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SosElement {
    pub id: String,
    pub name: String,
    pub cooperation_type: Cooperation,
    pub tier: u32,
    pub processes_personal_data: bool,
    pub in_ethical_scope: bool,
    pub access_to_enabling_elements: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionProfile {
    pub motivation: String,
    pub power: String,
    pub knowledge: String,
    pub legitimization: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stakeholder {
    pub id: String,
    pub name: String,
    pub kind: StakeholderKind,
    pub description: String,
    pub region: Option<String>,
    pub selection_profile: Option<SelectionProfile>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataFlow {
    pub source: String,
    pub sink: String,
    pub data_type: String,
}

/// Someone whose data is processed in a context: a declared stakeholder or a
/// free-form name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSubject {
    Stakeholder(String),
    Named(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextOfUse {
    pub id: String,
    pub name: String,
    pub captured: Capture,
    pub data_elements: Vec<String>,
    pub data_flows: Vec<DataFlow>,
    pub data_subjects: Vec<DataSubject>,
    pub data_types: Vec<String>,
    pub integrity_expectations: Vec<String>,
}

/// An elicitation question family. The cultural lens names the regional
/// philosophical framework it draws on.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lens {
    Utilitarian,
    Virtue,
    Duty,
    Cultural(String),
}

impl Lens {
    /// The three lenses every session must use.
    pub const MANDATORY: [Lens; 3] = [Lens::Utilitarian, Lens::Virtue, Lens::Duty];

    pub fn is_cultural(&self) -> bool {
        matches!(self, Lens::Cultural(_))
    }
}

impl fmt::Display for Lens {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lens::Utilitarian => f.write_str("utilitarian"),
            Lens::Virtue => f.write_str("virtue"),
            Lens::Duty => f.write_str("duty"),
            Lens::Cultural(framework) => write!(f, "cultural({framework})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElicitationSession {
    pub id: String,
    pub date: NaiveDate,
    pub participants: Vec<String>,
    pub lenses_used: BTreeSet<Lens>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueStatement {
    pub id: String,
    pub session: String,
    pub stakeholder: String,
    pub lens: Lens,
    pub text: String,
    pub polarity: Polarity,
    pub named_values: Vec<String>,
    pub extracted_values: Vec<String>,
}

/// Scores for the five superiority criteria, each in 1..=5.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HierarchyScores {
    pub endurance: u8,
    pub depth: u8,
    pub indivisibility: u8,
    pub bearer_independence: u8,
    pub intrinsic_worth: u8,
}

impl HierarchyScores {
    pub const CRITERIA: [&'static str; 5] = [
        "endurance",
        "depth",
        "indivisibility",
        "bearer_independence",
        "intrinsic_worth",
    ];

    pub fn as_array(&self) -> [u8; 5] {
        [
            self.endurance,
            self.depth,
            self.indivisibility,
            self.bearer_independence,
            self.intrinsic_worth,
        ]
    }

    pub fn from_array(scores: [u8; 5]) -> Self {
        let [endurance, depth, indivisibility, bearer_independence, intrinsic_worth] = scores;
        HierarchyScores {
            endurance,
            depth,
            indivisibility,
            bearer_independence,
            intrinsic_worth,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoreValue {
    pub id: u32,
    pub name: String,
    pub aliases: Vec<String>,
    pub priority_rank: u32,
    pub intrinsic: bool,
    pub hierarchy_scores: Option<HierarchyScores>,
    pub supporting_statements: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueQuality {
    pub id: QualityId,
    pub core_value: u32,
    pub name: String,
    pub direction: Direction,
    pub source: QualitySource,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Threshold {
    pub metric: String,
    pub comparator: Comparator,
    pub level: String,
    pub rationale: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarmFlags {
    pub life: bool,
    pub health: bool,
    pub legal_breach: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtectionDemand {
    pub level: Level,
    pub rationale: String,
}

/// An ethical value requirement derived from one value quality.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evr {
    pub id: EvrId,
    pub quality: QualityId,
    pub text: String,
    pub kind: EvrKind,
    pub threshold: Option<Threshold>,
    pub risk_path: RiskPath,
    pub legal_instruments: Vec<String>,
    pub harm_flags: HarmFlags,
    pub harm_likelihood: Likelihood,
    pub protection_demand: Option<ProtectionDemand>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Threat {
    pub id: ThreatId,
    pub evr: EvrId,
    pub description: String,
    pub realistic: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Control {
    pub id: ControlId,
    pub threats: Vec<ThreatId>,
    pub description: String,
    pub rigor: Level,
    pub form: ControlForm,
    pub status: ControlStatus,
    pub implementing_disposition: Option<String>,
}

impl Control {
    /// Accepted and implemented controls count as mitigation.
    pub fn is_effective(&self) -> bool {
        matches!(
            self.status,
            ControlStatus::Accepted | ControlStatus::Implemented
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueDisposition {
    pub id: String,
    pub description: String,
    pub soi_component: String,
    pub controls: Vec<ControlId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionalRequirement {
    pub id: String,
    pub text: String,
}

/// A requirement on the ethical side of a design concept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EthicalRef {
    Evr(EvrId),
    Control(ControlId),
}

impl fmt::Display for EthicalRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EthicalRef::Evr(id) => id.fmt(f),
            EthicalRef::Control(id) => id.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignConcept {
    pub id: String,
    pub name: String,
    pub ethical_refs: Vec<EthicalRef>,
    pub functional_refs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Persona {
    pub id: String,
    pub name: String,
    pub stakeholder: String,
    pub kind: StakeholderKind,
    pub narrative: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttestationSubject {
    PriorityDecision(u32),
    RiskAcceptance(ControlId),
    Mission,
    InvestmentDecision,
    Rule(String),
}

impl fmt::Display for AttestationSubject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttestationSubject::PriorityDecision(id) => write!(f, "priority {id}"),
            AttestationSubject::RiskAcceptance(id) => write!(f, "risk {id}"),
            AttestationSubject::Mission => f.write_str("mission"),
            AttestationSubject::InvestmentDecision => f.write_str("decision"),
            AttestationSubject::Rule(id) => write!(f, "rule {id}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signatory {
    pub name: String,
    pub role: SignatoryRole,
}

/// A dated endorsement signed by a named person.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attestation {
    pub id: String,
    pub subject: AttestationSubject,
    pub signatory: Signatory,
    pub date: NaiveDate,
    pub statement: String,
    pub consent: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueMission {
    pub text: String,
    pub featured: Vec<u32>,
    pub attestations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvestmentDecision {
    pub verdict: Verdict,
    pub rationale: String,
    pub attestations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackSource {
    Stakeholder(String),
    Market,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackEntry {
    pub id: String,
    pub date: NaiveDate,
    pub source: FeedbackSource,
    pub text: String,
    pub statements: Vec<String>,
    pub qualities: Vec<QualityId>,
    pub reprioritization_required: bool,
}

/// The whole register of one project. Field order is the interchange key
/// order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterDocument {
    pub project: ProjectMeta,
    pub phase: Phase,
    pub soi: Soi,
    pub sos_elements: Vec<SosElement>,
    pub stakeholders: Vec<Stakeholder>,
    pub contexts: Vec<ContextOfUse>,
    pub sessions: Vec<ElicitationSession>,
    pub statements: Vec<ValueStatement>,
    pub core_values: Vec<CoreValue>,
    pub qualities: Vec<ValueQuality>,
    pub evrs: Vec<Evr>,
    pub threats: Vec<Threat>,
    pub controls: Vec<Control>,
    pub dispositions: Vec<ValueDisposition>,
    pub functional_requirements: Vec<FunctionalRequirement>,
    pub design_concepts: Vec<DesignConcept>,
    pub personas: Vec<Persona>,
    pub attestations: Vec<Attestation>,
    pub mission: Option<ValueMission>,
    pub investment_decision: Option<InvestmentDecision>,
    pub feedback: Vec<FeedbackEntry>,
    pub alias_map: BTreeMap<String, String>,
}

/// Creates an empty register in the concept phase.
pub fn new_empty_register(project_name: &str) -> Result<RegisterDocument, ModelError> {
    if project_name.trim().is_empty() {
        return Err(ModelError::InvalidArgument(
            "project name must not be empty".into(),
        ));
    }
    Ok(RegisterDocument::blank(project_name))
}

/// Maps a value name to its canonical name through the alias map.
///
/// Aliases map directly to canonical names (no chains), so one lookup is
/// enough and the result is a fixed point.
pub fn resolve_alias<'a>(doc: &'a RegisterDocument, name: &'a str) -> &'a str {
    doc.alias_map.get(name).map(String::as_str).unwrap_or(name)
}

impl RegisterDocument {
    /// An empty register without the non-empty name check. The parser uses
    /// this for inputs that carry no header at all.
    pub fn blank(project_name: &str) -> Self {
        RegisterDocument {
            project: ProjectMeta {
                name: project_name.to_string(),
                version: None,
            },
            phase: Phase::Concept,
            soi: Soi {
                name: project_name.to_string(),
                concept_of_operation: String::new(),
                deployment_regions: Vec::new(),
            },
            sos_elements: Vec::new(),
            stakeholders: Vec::new(),
            contexts: Vec::new(),
            sessions: Vec::new(),
            statements: Vec::new(),
            core_values: Vec::new(),
            qualities: Vec::new(),
            evrs: Vec::new(),
            threats: Vec::new(),
            controls: Vec::new(),
            dispositions: Vec::new(),
            functional_requirements: Vec::new(),
            design_concepts: Vec::new(),
            personas: Vec::new(),
            attestations: Vec::new(),
            mission: None,
            investment_decision: None,
            feedback: Vec::new(),
            alias_map: BTreeMap::new(),
        }
    }

    pub fn stakeholder(&self, id: &str) -> Option<&Stakeholder> {
        self.stakeholders.iter().find(|s| s.id == id)
    }

    pub fn core_value(&self, id: u32) -> Option<&CoreValue> {
        self.core_values.iter().find(|c| c.id == id)
    }

    pub fn quality(&self, id: QualityId) -> Option<&ValueQuality> {
        self.qualities.iter().find(|q| q.id == id)
    }

    pub fn evr(&self, id: EvrId) -> Option<&Evr> {
        self.evrs.iter().find(|e| e.id == id)
    }

    pub fn threat(&self, id: ThreatId) -> Option<&Threat> {
        self.threats.iter().find(|t| t.id == id)
    }

    pub fn control(&self, id: ControlId) -> Option<&Control> {
        self.controls.iter().find(|c| c.id == id)
    }

    pub fn attestation(&self, id: &str) -> Option<&Attestation> {
        self.attestations.iter().find(|a| a.id == id)
    }

    pub fn qualities_of(&self, core: u32) -> impl Iterator<Item = &ValueQuality> {
        self.qualities.iter().filter(move |q| q.core_value == core)
    }

    pub fn evrs_of(&self, quality: QualityId) -> impl Iterator<Item = &Evr> {
        self.evrs.iter().filter(move |e| e.quality == quality)
    }

    pub fn threats_of(&self, evr: EvrId) -> impl Iterator<Item = &Threat> {
        self.threats.iter().filter(move |t| t.evr == evr)
    }

    /// Controls referencing `threat`.
    pub fn controls_for(&self, threat: ThreatId) -> impl Iterator<Item = &Control> {
        self.controls
            .iter()
            .filter(move |c| c.threats.contains(&threat))
    }

    /// True when at least one accepted or implemented control covers `threat`.
    pub fn is_controlled(&self, threat: ThreatId) -> bool {
        self.controls_for(threat).any(Control::is_effective)
    }

    /// Core values ordered by priority rank (rank 1 first).
    pub fn core_values_by_priority(&self) -> Vec<&CoreValue> {
        let mut values: Vec<&CoreValue> = self.core_values.iter().collect();
        values.sort_by_key(|c| (c.priority_rank, c.id));
        values
    }

    /// Attestations whose subject equals `subject`.
    pub fn attestations_for<'a>(
        &'a self,
        subject: &'a AttestationSubject,
    ) -> impl Iterator<Item = &'a Attestation> {
        self.attestations
            .iter()
            .filter(move |a| &a.subject == subject)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_register_starts_in_concept() {
        let doc = new_empty_register("TM").unwrap();
        assert_eq!(doc.phase, Phase::Concept);
        assert!(doc.stakeholders.is_empty());
        assert!(doc.core_values.is_empty());
        assert!(validate(&doc).is_empty());
    }

    #[test]
    fn empty_name_is_rejected() {
        assert!(matches!(
            new_empty_register(""),
            Err(ModelError::InvalidArgument(_))
        ));
        assert!(new_empty_register("   ").is_err());
    }

    #[test]
    fn alias_resolution() {
        let mut doc = new_empty_register("TM").unwrap();
        assert_eq!(resolve_alias(&doc, "privacy"), "privacy");
        doc.alias_map.insert("anonymity".into(), "privacy".into());
        assert_eq!(resolve_alias(&doc, "anonymity"), "privacy");
        assert_eq!(
            resolve_alias(&doc, resolve_alias(&doc, "anonymity")),
            "privacy"
        );
    }

    #[test]
    fn keywords_round_trip() {
        for phase in Phase::ALL {
            assert_eq!(phase.keyword().parse::<Phase>().unwrap(), *phase);
        }
        for form in ControlForm::ALL {
            assert_eq!(form.keyword().parse::<ControlForm>().unwrap(), *form);
        }
        assert!("Concept".parse::<Phase>().is_err());
        assert_eq!(Level::new(0), None);
        assert_eq!(Level::new(5), None);
        assert_eq!(Level::new(4), Some(Level::VERY_HIGH));
    }
}
