use evrforge::dsl::parse_register;
use evrforge::model::*;
use evrforge::run_rules;
use evrforge_testkit::{fixture_doc, fixture_text, random_register, rng};
use proptest::prelude::*;

fn codes(doc: &RegisterDocument) -> Vec<&'static str> {
    validate(doc).iter().map(|v| v.invariant.code()).collect()
}

#[test]
fn empty_register() {
    let doc = new_empty_register("TM").unwrap();
    assert_eq!(doc.phase, Phase::Concept);
    assert!(doc.stakeholders.is_empty() && doc.core_values.is_empty());
    assert!(validate(&doc).is_empty());
    assert_eq!(run_rules(&doc, &[]).unwrap(), []);
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
    doc.alias_map.insert("privacy".into(), "secrecy".into());
    assert_eq!(codes(&doc), ["P028"]);
}

proptest! {
    #[test]
    fn resolve_is_idempotent(pairs in prop::collection::btree_map("[a-e]", "[f-j]", 0..5), name in "[a-j]") {
        let mut doc = new_empty_register("X").unwrap();
        doc.alias_map = pairs;
        prop_assert!(validate(&doc).is_empty());
        let once = resolve_alias(&doc, &name).to_string();
        prop_assert_eq!(resolve_alias(&doc, &once), once.as_str());
    }
}

#[test]
fn structural_invariants_are_caught() {
    let clean = fixture_doc("tm_clean.evr");

    let mut doc = clean.clone();
    doc.stakeholders.push(doc.stakeholders[0].clone());
    assert_eq!(codes(&doc), ["P010"]);

    let mut doc = clean.clone();
    doc.sessions[0].participants.push("S9".into());
    assert_eq!(codes(&doc), ["P011"]);

    let mut doc = clean.clone();
    doc.core_values[0].priority_rank = 2;
    assert!(codes(&doc).contains(&"P018"));

    let mut doc = clean.clone();
    doc.evrs[1].protection_demand = None;
    assert_eq!(codes(&doc), ["P025"]);

    let mut doc = clean.clone();
    doc.controls[0].implementing_disposition = None;
    doc.dispositions.clear();
    doc.attestations
        .retain(|a| !matches!(a.subject, AttestationSubject::RiskAcceptance(_)));
    assert_eq!(codes(&doc), ["P026"]);

    let mut doc = clean.clone();
    doc.phase = Phase::Concept;
    assert_eq!(codes(&doc), ["P027"]);

    let mut doc = clean.clone();
    doc.personas[0].kind = StakeholderKind::Direct;
    assert_eq!(codes(&doc), ["P029"]);

    let mut doc = clean.clone();
    doc.mission.as_mut().unwrap().featured = vec![2];
    assert!(!codes(&doc).is_empty());

    let mut doc = clean.clone();
    doc.investment_decision = Some(InvestmentDecision {
        verdict: Verdict::NoGo,
        rationale: String::new(),
        attestations: Vec::new(),
    });
    assert!(codes(&doc).iter().all(|c| *c == "P030"));
    assert!(!codes(&doc).is_empty());

    let mut doc = clean.clone();
    doc.contexts[0].data_flows[0].data_type = "location".into();
    assert_eq!(codes(&doc), ["P032"]);

    let mut doc = clean.clone();
    doc.functional_requirements[0].id = "1.1.1".into();
    doc.design_concepts[0].functional_refs = vec!["1.1.1".into()];
    assert_eq!(codes(&doc), ["P036"]);
}

#[test]
fn concept_to_exploration_needs_an_operation() {
    let doc = new_empty_register("TM").unwrap();
    let err = advance_phase(&doc, Phase::Exploration).unwrap_err();
    assert!(matches!(
        err,
        PhaseError::Gate {
            target: Phase::Exploration,
            ..
        }
    ));
    let mut doc = doc;
    doc.soi.concept_of_operation = "Match patients with specialists".into();
    let next = advance_phase(&doc, Phase::Exploration).unwrap();
    assert_eq!(next.phase, Phase::Exploration);
    assert!(matches!(
        advance_phase(&next, Phase::Deployment),
        Err(PhaseError::InvalidTransition { .. })
    ));
}

#[test]
fn design_gate_lists_missing_evrs() {
    let text = fixture_text("tm_full.evr");
    let mut doc = parse_register(&text, "t.evr").document.unwrap();
    doc.evrs.clear();
    let Err(PhaseError::Gate { failures, .. }) = advance_phase(&doc, Phase::Design) else {
        panic!("gate should fail");
    };
    let conditions: Vec<&str> = failures.iter().map(|f| f.condition.as_str()).collect();
    assert!(conditions.contains(&"no EVRs defined"));
    assert!(advance_phase(&fixture_doc("tm_full.evr"), Phase::Design).is_ok());
}

#[test]
fn deployment_gate_names_the_uncontrolled_evr() {
    let mut doc = fixture_doc("tm_clean.evr");
    assert!(advance_phase(&doc, Phase::Deployment).is_ok());
    doc.controls[0].status = ControlStatus::Proposed;
    let Err(PhaseError::Gate { failures, .. }) = advance_phase(&doc, Phase::Deployment) else {
        panic!("gate should fail");
    };
    assert_eq!(failures.len(), 1);
    assert_eq!(failures[0].subject, "1.1.2");
    assert!(failures[0].condition.contains("1.1.2-T1"));
}

#[test]
fn advancing_keeps_registers_valid() {
    let mut r = rng(41);
    for _ in 0..200 {
        let doc = random_register(&mut r);
        if let Some(next) = doc.phase.successor() {
            if let Ok(advanced) = advance_phase(&doc, next) {
                assert!(validate(&advanced).is_empty());
                assert_eq!(advanced.phase, next);
            }
        }
    }
}
