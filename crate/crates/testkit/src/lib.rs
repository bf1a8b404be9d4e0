//! Test support for evrforge: fixture access and seeded generators of
//! structurally valid registers.

pub mod repairs;

use std::collections::BTreeSet;
use std::path::PathBuf;

use chrono::NaiveDate;
use evrforge::model::*;
use evrforge::rules::rule_catalog;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

pub fn fixture_path(name: &str) -> PathBuf {
    fixtures_dir().join(name)
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name))
        .unwrap_or_else(|e| panic!("cannot read fixture {name}: {e}"))
}

/// Parses a fixture and panics with its diagnostics if it does not parse.
pub fn fixture_doc(name: &str) -> RegisterDocument {
    let result = evrforge::parse_register(&fixture_text(name), name);
    match result.document {
        Some(doc) => doc,
        None => {
            let lines: Vec<String> = result.diagnostics.iter().map(|d| d.to_string()).collect();
            panic!("fixture {name} does not parse:\n{}", lines.join("\n"))
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const SYLLABLES: &[&str] = &[
    "ka", "lo", "mi", "ne", "su", "ta", "vi", "ro", "ze", "pa", "qu", "ix",
];
const AWKWARD: &[&str] = &[
    "\"quoted\"",
    "back\\slash",
    "tab\there",
    "# not a comment",
    "end",
    "évaluation",
    "数据",
    "  padded  ",
    "a,b",
    "",
];

fn word(rng: &mut impl Rng) -> String {
    (0..rng.gen_range(1..=3))
        .map(|_| *SYLLABLES.choose(rng).unwrap())
        .collect()
}

/// Free text that exercises escaping; never contains a newline.
pub fn text(rng: &mut impl Rng) -> String {
    let mut parts: Vec<String> = (0..rng.gen_range(1..=4)).map(|_| word(rng)).collect();
    if rng.gen_bool(0.3) {
        parts.push(AWKWARD.choose(rng).unwrap().to_string());
    }
    parts.join(" ")
}

/// Non-blank free text.
fn label(rng: &mut impl Rng) -> String {
    format!("{} {}", word(rng), text(rng))
}

fn date(rng: &mut impl Rng) -> NaiveDate {
    NaiveDate::from_ymd_opt(
        rng.gen_range(2000..=2030),
        rng.gen_range(1..=12),
        rng.gen_range(1..=28),
    )
    .unwrap()
}

fn pick<'a, T>(rng: &mut impl Rng, items: &'a [T]) -> Option<&'a T> {
    items.choose(rng)
}

fn keyword<T: Copy>(rng: &mut impl Rng, all: &[T]) -> T {
    *all.choose(rng).unwrap()
}

fn subset<T: Clone>(rng: &mut impl Rng, items: &[T], p: f64) -> Vec<T> {
    items.iter().filter(|_| rng.gen_bool(p)).cloned().collect()
}

fn lens(rng: &mut impl Rng) -> Lens {
    match rng.gen_range(0..4) {
        0 => Lens::Utilitarian,
        1 => Lens::Virtue,
        2 => Lens::Duty,
        _ => Lens::Cultural(label(rng)),
    }
}

fn evr(rng: &mut impl Rng, id: EvrId) -> Evr {
    let risk_path = keyword(rng, RiskPath::ALL);
    let demand = risk_path == RiskPath::High || rng.gen_bool(0.3);
    Evr {
        id,
        quality: id.quality_id(),
        text: label(rng),
        kind: keyword(rng, EvrKind::ALL),
        threshold: rng.gen_bool(0.6).then(|| Threshold {
            metric: text(rng),
            comparator: keyword(rng, Comparator::ALL),
            level: text(rng),
            rationale: text(rng),
        }),
        risk_path,
        legal_instruments: (0..rng.gen_range(0..=2)).map(|_| label(rng)).collect(),
        harm_flags: HarmFlags {
            life: rng.gen_bool(0.2),
            health: rng.gen_bool(0.3),
            legal_breach: rng.gen_bool(0.2),
        },
        harm_likelihood: keyword(rng, Likelihood::ALL),
        protection_demand: demand.then(|| ProtectionDemand {
            level: Level::new(rng.gen_range(1..=4)).unwrap(),
            rationale: label(rng),
        }),
    }
}

fn control(rng: &mut impl Rng, id: ControlId, threats: Vec<ThreatId>) -> Control {
    Control {
        id,
        threats,
        description: text(rng),
        rigor: Level::new(rng.gen_range(1..=4)).unwrap(),
        form: keyword(rng, ControlForm::ALL),
        // Implemented controls are assigned a disposition afterwards.
        status: keyword(rng, &[ControlStatus::Proposed, ControlStatus::Accepted]),
        implementing_disposition: None,
    }
}

/// A random register that passes `validate`. The same seed always gives the
/// same register.
pub fn random_register(rng: &mut impl Rng) -> RegisterDocument {
    let name = label(rng);
    let mut doc = RegisterDocument::blank(&name);
    doc.project.version = rng
        .gen_bool(0.5)
        .then(|| format!("{}.{}", rng.gen_range(0..5), rng.gen_range(0..10)));
    doc.phase = keyword(rng, Phase::ALL);

    let regions: Vec<String> = ["DE", "FR", "JP", "KE", "BR"]
        .iter()
        .filter(|_| rng.gen_bool(0.3))
        .map(|r| r.to_string())
        .collect();
    if doc.phase >= Phase::Exploration || rng.gen_bool(0.5) {
        doc.soi.concept_of_operation = label(rng);
    }
    if rng.gen_bool(0.3) {
        doc.soi.name = label(rng);
    }
    doc.soi.deployment_regions = regions.clone();

    for i in 1..=rng.gen_range(0..=3) {
        doc.sos_elements.push(SosElement {
            id: format!("SOS{i}"),
            name: label(rng),
            cooperation_type: keyword(rng, Cooperation::ALL),
            tier: rng.gen_range(1..=3),
            processes_personal_data: rng.gen_bool(0.5),
            in_ethical_scope: rng.gen_bool(0.5),
            access_to_enabling_elements: rng.gen_bool(0.5),
        });
    }

    for i in 1..=rng.gen_range(0..=5) {
        doc.stakeholders.push(Stakeholder {
            id: format!("S{i}"),
            name: label(rng),
            kind: keyword(rng, StakeholderKind::ALL),
            description: text(rng),
            region: pick(rng, &regions).cloned().filter(|_| rng.gen_bool(0.7)),
            selection_profile: rng.gen_bool(0.4).then(|| SelectionProfile {
                motivation: text(rng),
                power: text(rng),
                knowledge: text(rng),
                legitimization: text(rng),
            }),
        });
    }
    let stakeholder_ids: Vec<String> = doc.stakeholders.iter().map(|s| s.id.clone()).collect();

    for i in 1..=rng.gen_range(0..=2) {
        let elements: Vec<String> = (0..rng.gen_range(0..=3)).map(|_| text(rng)).collect();
        let types: Vec<String> = (0..rng.gen_range(0..=2)).map(|_| text(rng)).collect();
        let mut flows = Vec::new();
        if !elements.is_empty() && !types.is_empty() {
            for _ in 0..rng.gen_range(0..=2) {
                flows.push(DataFlow {
                    source: pick(rng, &elements).unwrap().clone(),
                    sink: pick(rng, &elements).unwrap().clone(),
                    data_type: pick(rng, &types).unwrap().clone(),
                });
            }
        }
        let mut subjects = Vec::new();
        for _ in 0..rng.gen_range(0..=2) {
            match pick(rng, &stakeholder_ids) {
                Some(id) if rng.gen_bool(0.6) => {
                    subjects.push(DataSubject::Stakeholder(id.clone()))
                }
                _ => subjects.push(DataSubject::Named(text(rng))),
            }
        }
        doc.contexts.push(ContextOfUse {
            id: format!("CTX{i}"),
            name: label(rng),
            captured: keyword(rng, Capture::ALL),
            data_elements: elements,
            data_flows: flows,
            data_subjects: subjects,
            data_types: types,
            integrity_expectations: (0..rng.gen_range(0..=2)).map(|_| text(rng)).collect(),
        });
    }

    if !stakeholder_ids.is_empty() {
        for i in 1..=rng.gen_range(0..=2) {
            let mut lenses: BTreeSet<Lens> = BTreeSet::new();
            for _ in 0..rng.gen_range(0..=4) {
                lenses.insert(lens(rng));
            }
            doc.sessions.push(ElicitationSession {
                id: format!("E{i}"),
                date: date(rng),
                participants: subset(rng, &stakeholder_ids, 0.5),
                lenses_used: lenses,
            });
        }
    }
    let session_ids: Vec<String> = doc.sessions.iter().map(|s| s.id.clone()).collect();
    let vocabulary = [
        "privacy",
        "equality",
        "trust",
        "security",
        "anonymity",
        "health",
    ];
    if !session_ids.is_empty() {
        for i in 1..=rng.gen_range(0..=6) {
            doc.statements.push(ValueStatement {
                id: format!("ST{i}"),
                session: pick(rng, &session_ids).unwrap().clone(),
                stakeholder: pick(rng, &stakeholder_ids).unwrap().clone(),
                lens: lens(rng),
                text: text(rng),
                polarity: keyword(rng, Polarity::ALL),
                named_values: subset(rng, &vocabulary, 0.3)
                    .into_iter()
                    .map(String::from)
                    .collect(),
                extracted_values: subset(rng, &vocabulary, 0.15)
                    .into_iter()
                    .map(String::from)
                    .collect(),
            });
        }
    }
    let statement_ids: Vec<String> = doc.statements.iter().map(|s| s.id.clone()).collect();
    if rng.gen_bool(0.5) {
        doc.alias_map.insert("anonymity".into(), "privacy".into());
        doc.alias_map.insert("security".into(), "privacy".into());
    }

    let n_values = rng.gen_range(0..=4u32);
    let mut ranks: Vec<u32> = (1..=n_values).collect();
    ranks.shuffle(rng);
    for (i, rank) in ranks.into_iter().enumerate() {
        doc.core_values.push(CoreValue {
            id: i as u32 + 1,
            name: label(rng),
            aliases: (0..rng.gen_range(0..=2)).map(|_| text(rng)).collect(),
            priority_rank: rank,
            intrinsic: rng.gen_bool(0.5),
            hierarchy_scores: rng.gen_bool(0.7).then(|| {
                HierarchyScores::from_array(std::array::from_fn(|_| rng.gen_range(1..=5)))
            }),
            supporting_statements: subset(rng, &statement_ids, 0.3),
        });
    }

    for cv in 1..=n_values {
        for q in 1..=rng.gen_range(0..=3) {
            doc.qualities.push(ValueQuality {
                id: QualityId { core: cv, index: q },
                core_value: cv,
                name: label(rng),
                direction: keyword(rng, Direction::ALL),
                source: keyword(rng, QualitySource::ALL),
            });
        }
    }
    let quality_ids: Vec<QualityId> = doc.qualities.iter().map(|q| q.id).collect();
    for q in &quality_ids {
        for k in 1..=rng.gen_range(0..=3) {
            let id = EvrId {
                core: q.core,
                quality: q.index,
                index: k,
            };
            doc.evrs.push(evr(rng, id));
        }
    }
    let evr_ids: Vec<EvrId> = doc.evrs.iter().map(|e| e.id).collect();
    for e in &evr_ids {
        for t in 1..=rng.gen_range(0..=2) {
            doc.threats.push(Threat {
                id: ThreatId { evr: *e, index: t },
                evr: *e,
                description: text(rng),
                realistic: rng.gen_bool(0.6),
            });
        }
    }

    if doc.phase != Phase::Concept {
        for e in &evr_ids {
            let threats: Vec<ThreatId> = doc.threats_of(*e).map(|t| t.id).collect();
            if threats.is_empty() {
                continue;
            }
            for c in 1..=rng.gen_range(0..=2) {
                let mut covered = subset(rng, &threats, 0.5);
                if covered.is_empty() {
                    covered.push(*pick(rng, &threats).unwrap());
                }
                doc.controls
                    .push(control(rng, ControlId { evr: *e, index: c }, covered));
            }
        }
        let n_disp = if doc.controls.is_empty() {
            0
        } else {
            rng.gen_range(0..=2)
        };
        for i in 1..=n_disp {
            let ids: Vec<ControlId> = doc.controls.iter().map(|c| c.id).collect();
            let mut listed = subset(rng, &ids, 0.5);
            if listed.is_empty() {
                listed.push(*pick(rng, &ids).unwrap());
            }
            doc.dispositions.push(ValueDisposition {
                id: format!("D{i}"),
                description: label(rng),
                soi_component: text(rng),
                controls: listed,
            });
        }
        for c in doc.controls.iter_mut() {
            let owners: Vec<&ValueDisposition> = doc
                .dispositions
                .iter()
                .filter(|d| d.controls.contains(&c.id))
                .collect();
            if let Some(owner) = owners.choose(rng) {
                if rng.gen_bool(0.7) {
                    c.implementing_disposition = Some(owner.id.clone());
                    if rng.gen_bool(0.6) {
                        c.status = ControlStatus::Implemented;
                    }
                }
            }
        }
    }

    for i in 1..=rng.gen_range(0..=2) {
        doc.functional_requirements.push(FunctionalRequirement {
            id: format!("F{i}"),
            text: label(rng),
        });
    }
    let fr_ids: Vec<String> = doc
        .functional_requirements
        .iter()
        .map(|f| f.id.clone())
        .collect();
    let mut ethical: Vec<EthicalRef> = evr_ids.iter().map(|e| EthicalRef::Evr(*e)).collect();
    ethical.extend(doc.controls.iter().map(|c| EthicalRef::Control(c.id)));
    for i in 1..=rng.gen_range(0..=2) {
        doc.design_concepts.push(DesignConcept {
            id: format!("HC{i}"),
            name: label(rng),
            ethical_refs: subset(rng, &ethical, 0.4),
            functional_refs: subset(rng, &fr_ids, 0.5),
        });
    }

    let represented = subset(rng, &doc.stakeholders, 0.3);
    for (i, s) in represented.iter().enumerate() {
        doc.personas.push(Persona {
            id: format!("P{}", i + 1),
            name: label(rng),
            stakeholder: s.id.clone(),
            kind: s.kind,
            narrative: text(rng),
        });
    }

    let has_mission = rng.gen_bool(0.5);
    let has_decision = rng.gen_bool(0.5);
    let rules: Vec<&str> = rule_catalog().iter().map(|r| r.id).collect();
    let control_ids: Vec<ControlId> = doc.controls.iter().map(|c| c.id).collect();
    for i in 1..=rng.gen_range(0..=5) {
        let subject = match rng.gen_range(0..5) {
            0 if n_values > 0 => AttestationSubject::PriorityDecision(rng.gen_range(1..=n_values)),
            1 if !control_ids.is_empty() => {
                AttestationSubject::RiskAcceptance(*pick(rng, &control_ids).unwrap())
            }
            2 if has_mission => AttestationSubject::Mission,
            3 if has_decision => AttestationSubject::InvestmentDecision,
            _ => AttestationSubject::Rule(pick(rng, &rules).unwrap().to_string()),
        };
        doc.attestations.push(Attestation {
            id: format!("A{i}"),
            subject,
            signatory: Signatory {
                name: label(rng),
                role: keyword(rng, SignatoryRole::ALL),
            },
            date: date(rng),
            statement: text(rng),
            consent: rng.gen_bool(0.5),
        });
    }
    let attestation_ids: Vec<String> = doc.attestations.iter().map(|a| a.id.clone()).collect();

    if has_mission {
        let order: Vec<u32> = doc
            .core_values_by_priority()
            .iter()
            .map(|cv| cv.id)
            .collect();
        let featured = order[..rng.gen_range(0..=order.len())].to_vec();
        doc.mission = Some(ValueMission {
            text: label(rng),
            featured,
            attestations: subset(rng, &attestation_ids, 0.3),
        });
    }
    if has_decision {
        let executives: Vec<String> = doc
            .attestations
            .iter()
            .filter(|a| a.signatory.role == SignatoryRole::Executive)
            .map(|a| a.id.clone())
            .collect();
        let verdict = if executives.is_empty() {
            Verdict::Go
        } else {
            keyword(rng, Verdict::ALL)
        };
        let mut attestations = subset(rng, &attestation_ids, 0.3);
        if verdict == Verdict::NoGo && !attestations.iter().any(|a| executives.contains(a)) {
            attestations.push(executives[0].clone());
        }
        doc.investment_decision = Some(InvestmentDecision {
            verdict,
            rationale: label(rng),
            attestations,
        });
    }

    for i in 1..=rng.gen_range(0..=2) {
        let source = match pick(rng, &stakeholder_ids) {
            Some(id) if rng.gen_bool(0.6) => FeedbackSource::Stakeholder(id.clone()),
            _ => FeedbackSource::Market,
        };
        doc.feedback.push(FeedbackEntry {
            id: format!("FB{i}"),
            date: date(rng),
            source,
            text: text(rng),
            statements: subset(rng, &statement_ids, 0.3),
            qualities: subset(rng, &quality_ids, 0.3),
            reprioritization_required: rng.gen_bool(0.3),
        });
    }

    debug_assert!(validate(&doc).is_empty(), "{:?}", validate(&doc));
    doc
}

/// Adds one EVR under a random quality. Returns false when there is no
/// quality to attach it to.
pub fn add_random_evr(doc: &mut RegisterDocument, rng: &mut impl Rng) -> bool {
    let Some(q) = doc.qualities.choose(rng).map(|q| q.id) else {
        return false;
    };
    let index = doc.evrs_of(q).count() as u32 + 1;
    let id = EvrId {
        core: q.core,
        quality: q.index,
        index,
    };
    let e = evr(rng, id);
    doc.evrs.push(e);
    true
}

/// Adds one control for threats of a random threatened EVR, possibly
/// implemented through a fresh disposition.
pub fn add_random_control(doc: &mut RegisterDocument, rng: &mut impl Rng) -> bool {
    if doc.phase == Phase::Concept {
        return false;
    }
    let threatened: Vec<EvrId> = doc
        .evrs
        .iter()
        .map(|e| e.id)
        .filter(|e| doc.threats_of(*e).next().is_some())
        .collect();
    let Some(&e) = threatened.choose(rng) else {
        return false;
    };
    let threats: Vec<ThreatId> = doc.threats_of(e).map(|t| t.id).collect();
    let mut covered = subset(rng, &threats, 0.6);
    if covered.is_empty() {
        covered.push(threats[0]);
    }
    let index = doc.controls.iter().filter(|c| c.id.evr == e).count() as u32 + 1;
    let id = ControlId { evr: e, index };
    let mut c = control(rng, id, covered);
    if rng.gen_bool(0.5) {
        let d = format!("D{}", doc.dispositions.len() + 1);
        if doc.dispositions.iter().all(|x| x.id != d) {
            doc.dispositions.push(ValueDisposition {
                id: d.clone(),
                description: label(rng),
                soi_component: text(rng),
                controls: vec![id],
            });
            c.implementing_disposition = Some(d);
            c.status = ControlStatus::Implemented;
        }
    }
    doc.controls.push(c);
    true
}

/// Adds a disposition listing some existing controls.
pub fn add_random_disposition(doc: &mut RegisterDocument, rng: &mut impl Rng) -> bool {
    let ids: Vec<ControlId> = doc.controls.iter().map(|c| c.id).collect();
    if ids.is_empty() {
        return false;
    }
    let mut listed = subset(rng, &ids, 0.4);
    if listed.is_empty() {
        listed.push(ids[0]);
    }
    let mut n = doc.dispositions.len() + 1;
    while doc.dispositions.iter().any(|d| d.id == format!("D{n}")) {
        n += 1;
    }
    doc.dispositions.push(ValueDisposition {
        id: format!("D{n}"),
        description: label(rng),
        soi_component: text(rng),
        controls: listed,
    });
    true
}

/// Random bytes shaped like register text: keywords, ids, strings and noise.
pub fn fuzz_input(rng: &mut impl Rng) -> String {
    const PIECES: &[&str] = &[
        "register",
        "\"TM\"",
        "phase",
        "design",
        "exploration",
        "end",
        "evr",
        "1.1.1",
        "of",
        "1.1",
        "quality",
        "corevalue",
        "1",
        "rank",
        "direction",
        "supports",
        "threat",
        "1.1.1-T1",
        "control",
        "1.1.1-C1",
        "for",
        ",",
        "session",
        "lens",
        "cultural",
        "\"",
        "\\",
        "#",
        "\n",
        "  ",
        "date",
        "2024-02-30",
        "alias",
        "to",
        "mission",
        "decision",
        "go",
        "rigor",
        "9",
        "99999999999999",
        "attestation",
        "subject",
        "risk",
        "@",
        "é",
        "\u{0}",
        "\t",
        "\r\n",
        "stakeholder",
        "S1",
        "kind",
        "direct",
        "harm",
        "life",
        "0.0.0",
        "-",
        ".",
    ];
    let mut out = String::new();
    for _ in 0..rng.gen_range(0..60) {
        if rng.gen_bool(0.1) {
            out.push(char::from_u32(rng.gen_range(0..0x3000)).unwrap_or('?'));
        } else {
            out.push_str(PIECES.choose(rng).unwrap());
        }
        if rng.gen_bool(0.6) {
            out.push(' ');
        }
    }
    out
}
