use evrforge::dsl::{parse_register, serialize_canonical};
use evrforge::model::*;
use evrforge::trace::*;
use evrforge_testkit::{
    add_random_control, add_random_disposition, add_random_evr, fixture_doc, fixture_text,
    random_register, rng,
};
use rand::Rng;

fn ids(chain: &[TraceNode]) -> Vec<&str> {
    chain.iter().map(|n| n.id.as_str()).collect()
}

#[test]
fn fixture_chains() {
    let graph = build_graph(&fixture_doc("tm_clean.evr"));
    assert_eq!(
        ids(&trace_chain(&graph, "1.1.3").unwrap()),
        ["1", "1.1", "1.1.3"]
    );
    assert_eq!(ids(&trace_chain(&graph, "1").unwrap()), ["1"]);
    assert_eq!(
        ids(&trace_chain(&graph, "1.1.2-C1").unwrap()),
        ["1", "1.1", "1.1.2", "1.1.2-T1", "1.1.2-C1"]
    );
    assert_eq!(
        ids(&trace_chain(&graph, "D1").unwrap()),
        ["1", "1.1", "1.1.2", "1.1.2-T1", "1.1.2-C1", "D1"]
    );
    assert_eq!(ids(&trace_chain(&graph, "F1").unwrap()), ["F1"]);
    assert_eq!(
        trace_chain(&graph, "9.9.9"),
        Err(TraceError::UnknownId("9.9.9".into()))
    );
    let kinds: Vec<NodeKind> = trace_chain(&graph, "1.1.3")
        .unwrap()
        .iter()
        .map(|n| n.kind)
        .collect();
    assert_eq!(
        kinds,
        [NodeKind::CoreValue, NodeKind::Quality, NodeKind::Evr]
    );
}

#[test]
fn every_evr_is_two_steps_below_its_core_value() {
    let graph = build_graph(&fixture_doc("tm_clean.evr"));
    for k in 1..=5 {
        let chain = trace_chain(&graph, &format!("1.1.{k}")).unwrap();
        assert_eq!(chain.len(), 3);
        assert_eq!(chain[0].id, "1");
    }
    let evrs: Vec<&str> = graph
        .children("1.1")
        .iter()
        .map(|n| n.id.as_str())
        .collect();
    assert_eq!(evrs, ["1.1.1", "1.1.2", "1.1.3", "1.1.4", "1.1.5"]);
}

#[test]
fn empty_register_gives_empty_graph() {
    let graph = build_graph(&new_empty_register("X").unwrap());
    assert_eq!((graph.node_count(), graph.edge_count()), (0, 0));
    assert_eq!(
        maturity_score(&new_empty_register("X").unwrap()),
        Maturity {
            addressed: 0,
            total: 0,
            ratio: 0.0,
            empty: true
        }
    );
    assert!(coverage_report(&new_empty_register("X").unwrap()).is_empty());
}

/// Node and edge counts recomputed straight from the document.
fn recount(doc: &RegisterDocument) -> (usize, usize) {
    let nodes = doc.core_values.len()
        + doc.qualities.len()
        + doc.evrs.len()
        + doc.threats.len()
        + doc.controls.len()
        + doc.dispositions.len()
        + doc.functional_requirements.len()
        + doc.design_concepts.len();
    let mut links = std::collections::BTreeSet::new();
    for c in &doc.controls {
        for d in &doc.dispositions {
            if d.controls.contains(&c.id) {
                links.insert((c.id.to_string(), d.id.clone()));
            }
        }
        if let Some(d) = &c.implementing_disposition {
            links.insert((c.id.to_string(), d.clone()));
        }
    }
    let edges = doc.qualities.len()
        + doc.evrs.len()
        + doc.threats.len()
        + doc.controls.iter().map(|c| c.threats.len()).sum::<usize>()
        + links.len()
        + doc
            .design_concepts
            .iter()
            .map(|c| c.ethical_refs.len() + c.functional_refs.len())
            .sum::<usize>();
    (nodes, edges)
}

#[test]
fn graph_counts_match_recount() {
    let mut r = rng(21);
    for _ in 0..300 {
        let doc = random_register(&mut r);
        let graph = build_graph(&doc);
        assert_eq!((graph.node_count(), graph.edge_count()), recount(&doc));
        assert!(graph.is_acyclic());
        // Forest: every value-chain node has one chain ending at a core value.
        for node in graph.nodes() {
            let chain = trace_chain(&graph, &node.id).unwrap();
            assert_eq!(chain.last().unwrap(), node);
            match node.kind {
                NodeKind::FunctionalRequirement | NodeKind::DesignConcept => {
                    assert_eq!(chain.len(), 1)
                }
                _ => assert_eq!(chain[0].kind, NodeKind::CoreValue),
            }
        }
    }
    assert_eq!(recount(&fixture_doc("tm_clean.evr")), {
        let g = build_graph(&fixture_doc("tm_clean.evr"));
        (g.node_count(), g.edge_count())
    });
}

#[test]
fn full_fixture_maturity_is_half() {
    let m = maturity_score(&fixture_doc("tm_full.evr"));
    assert_eq!(
        (m.addressed, m.total, m.ratio, m.empty),
        (7, 14, 0.5, false)
    );
}

#[test]
fn clean_fixture_maturity() {
    let doc = fixture_doc("tm_clean.evr");
    assert_eq!(maturity_score(&doc).addressed, 1);
}

#[test]
fn adding_the_missing_control_addresses_one_more_value() {
    // 1.1.2 is high risk; make its realistic threat uncontrolled.
    let text =
        fixture_text("tm_clean.evr").replace("  status implemented\n", "  status proposed\n");
    let text = text
        .replace("  implemented_by D1\n", "")
        .replace("disposition D1 \"Insurance-blind ranking\"\n  component \"matching service\"\n  implements 1.1.2-C1\nend\n", "")
        .replace("subject risk 1.1.2-C1", "subject rule VBE-C20");
    let before = parse_register(&text, "t.evr").document.expect("valid");
    assert_eq!(maturity_score(&before).addressed, 0);
    let text = text.replace("  status proposed\n", "  status accepted\n");
    let after = parse_register(&text, "t.evr").document.expect("valid");
    assert_eq!(maturity_score(&after).addressed, 1);
}

#[test]
fn maturity_never_drops_when_adding_artifacts() {
    let mut r = rng(22);
    for _ in 0..200 {
        let mut doc = random_register(&mut r);
        let mut last = maturity_score(&doc).addressed;
        for _ in 0..10 {
            match r.gen_range(0..3) {
                0 => add_random_evr(&mut doc, &mut r),
                1 => add_random_control(&mut doc, &mut r),
                _ => add_random_disposition(&mut doc, &mut r),
            };
            let now = maturity_score(&doc).addressed;
            assert!(now >= last);
            last = now;
        }
    }
}

#[test]
fn coverage_of_clean_fixture() {
    let rows = coverage_report(&fixture_doc("tm_clean.evr"));
    assert_eq!(rows.len(), 1);
    let row = &rows[0];
    assert_eq!(row.name, "equality");
    assert_eq!(
        (
            row.qualities,
            row.evrs,
            row.thresholds,
            row.threats,
            row.controls
        ),
        (2, 5, 5, 5, 1)
    );
    // Two priority attestations plus the risk attestation of 1.1.2-C1.
    assert_eq!(row.attestations, 3);
    assert!(row.addressed);
    assert_eq!(
        coverage_to_csv(&rows),
        format!(
            "{}\nequality,1,2,5,5,5,1,3,true\n",
            COVERAGE_HEADER.join(",")
        )
    );
}

#[test]
fn coverage_matches_brute_force_tally() {
    let mut r = rng(23);
    for _ in 0..200 {
        let doc = random_register(&mut r);
        let rows = coverage_report(&doc);
        assert_eq!(rows.len(), doc.core_values.len());
        let ranks: Vec<u32> = rows.iter().map(|row| row.rank).collect();
        assert!(ranks.windows(2).all(|w| w[0] < w[1]));
        for row in rows {
            let cv = row.core_value;
            let mut evrs = 0;
            let mut thresholds = 0;
            for e in &doc.evrs {
                if e.id.core == cv {
                    evrs += 1;
                    thresholds += e.threshold.is_some() as usize;
                }
            }
            assert_eq!(row.evrs, evrs);
            assert_eq!(row.thresholds, thresholds);
            assert_eq!(
                row.qualities,
                doc.qualities.iter().filter(|q| q.id.core == cv).count()
            );
            assert_eq!(
                row.threats,
                doc.threats.iter().filter(|t| t.id.evr.core == cv).count()
            );
            assert_eq!(
                row.controls,
                doc.controls.iter().filter(|c| c.id.evr.core == cv).count()
            );
            assert_eq!(row.addressed, is_addressed(&doc, cv));
        }
    }
}

#[test]
fn dot_export_lists_every_node_and_edge() {
    let graph = build_graph(&fixture_doc("tm_clean.evr"));
    let dot = graph_to_dot(&graph);
    assert!(dot.starts_with("digraph register {\n"));
    assert!(dot.ends_with("}\n"));
    assert!(dot.contains("\"evr:1.1.3\" [label=\"1.1.3 Publish the fee agreement with specialists in plain language\"]"));
    assert!(dot.contains("\"quality:1.1\" -> \"evr:1.1.3\""));
    assert_eq!(dot.matches(" -> ").count(), graph.edge_count());
    assert_eq!(dot.matches("[label=").count(), graph.node_count());
}

#[test]
fn diff_of_identical_registers_is_empty() {
    let doc = fixture_doc("tm_full.evr");
    let changes = diff_registers(&doc, &doc);
    assert!(changes.is_empty());
    assert!(!changes.new_core_values_require_reprioritization);
}

#[test]
fn new_core_value_requests_reprioritization() {
    let old = fixture_doc("tm_full.evr");
    let text = format!(
        "{}\ncorevalue 15 \"addiction avoidance\" rank 15\nend\n",
        fixture_text("tm_full.evr")
    );
    let new = parse_register(&text, "t.evr").document.expect("valid");
    let changes = diff_registers(&old, &new);
    assert_eq!(changes.added("core_values"), ["15"]);
    assert!(changes.new_core_values_require_reprioritization);
    assert_eq!(changes.lines(), ["added.core_values: 15"]);
    let back = diff_registers(&new, &old);
    assert_eq!(back.removed("core_values"), ["15"]);
    assert!(!back.new_core_values_require_reprioritization);
}

#[test]
fn renames_are_modifications() {
    let old = fixture_doc("tm_clean.evr");
    let mut new = old.clone();
    new.evrs[3].text = "Waive all fees for uninsured patients".into();
    new.evrs.remove(4);
    new.threats.retain(|t| t.evr.to_string() != "1.1.5");
    let changes = diff_registers(&old, &new);
    assert_eq!(changes.modified("evrs"), ["1.1.4"]);
    assert_eq!(changes.removed("evrs"), ["1.1.5"]);
    assert_eq!(changes.removed("threats"), ["1.1.5-T1"]);
    assert!(changes.added("evrs").is_empty());
}

fn mutate(doc: &mut RegisterDocument, r: &mut impl Rng) {
    for _ in 0..r.gen_range(0..6) {
        match r.gen_range(0..7) {
            0 => {
                add_random_evr(doc, r);
            }
            1 => {
                add_random_control(doc, r);
            }
            2 => {
                add_random_disposition(doc, r);
            }
            3 if !doc.stakeholders.is_empty() => {
                let i = r.gen_range(0..doc.stakeholders.len());
                doc.stakeholders[i].description.push_str(" (revised)");
            }
            4 => {
                doc.functional_requirements.pop();
                doc.design_concepts.clear();
            }
            5 => {
                doc.stakeholders.reverse();
            }
            _ => {
                doc.alias_map.insert("care".into(), "health".into());
            }
        }
    }
}

#[test]
fn diff_is_symmetric_and_revertible() {
    let mut r = rng(24);
    for _ in 0..300 {
        let old = random_register(&mut r);
        let mut new = old.clone();
        mutate(&mut new, &mut r);
        let forward = diff_registers(&old, &new);
        let backward = diff_registers(&new, &old);
        for kind in forward.kinds.keys() {
            assert_eq!(forward.added(kind), backward.removed(kind), "{kind}");
            assert_eq!(forward.removed(kind), backward.added(kind), "{kind}");
            let added: Vec<&str> = forward.added(kind);
            assert!(forward.removed(kind).iter().all(|id| !added.contains(id)));
        }
        let restored = revert(&new, &forward).unwrap();
        assert_eq!(serialize_canonical(&restored), serialize_canonical(&old));
        assert_eq!(restored, old);
    }
}
