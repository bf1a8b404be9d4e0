use evrforge::dsl::{parse_register, serialize_canonical, Position};
use evrforge::model::*;
use evrforge::Severity;
use evrforge_testkit::{fixture_doc, fixture_text, random_register, rng};

fn codes(text: &str) -> Vec<&'static str> {
    parse_register(text, "t.evr")
        .diagnostics
        .iter()
        .map(|d| d.code)
        .collect()
}

#[test]
fn clean_fixture_parses() {
    let doc = fixture_doc("tm_clean.evr");
    assert_eq!(doc.phase, Phase::Design);
    assert_eq!(doc.core_values.len(), 1);
    assert_eq!(doc.core_values[0].name, "equality");
    let evrs: Vec<String> = doc.evrs.iter().map(|e| e.id.to_string()).collect();
    assert_eq!(evrs, ["1.1.1", "1.1.2", "1.1.3", "1.1.4", "1.1.5"]);
    assert_eq!(doc.soi.deployment_regions, ["DE"]);
    assert_eq!(doc.contexts[0].data_subjects.len(), 2);
    assert_eq!(doc.sessions[0].lenses_used.len(), 4);
}

#[test]
fn fixture_round_trips() {
    for name in ["tm_clean.evr", "tm_full.evr"] {
        let doc = fixture_doc(name);
        let text = serialize_canonical(&doc);
        let again = parse_register(&text, name);
        assert_eq!(again.document.as_ref(), Some(&doc), "{name}");
        assert_eq!(serialize_canonical(&again.document.unwrap()), text);
    }
}

#[test]
fn empty_input_is_a_blank_register() {
    let result = parse_register("", "empty.evr");
    assert!(result.diagnostics.is_empty());
    assert_eq!(result.document, Some(RegisterDocument::blank("")));
    let result = parse_register("  # only a comment\n", "c.evr");
    assert_eq!(result.document, Some(RegisterDocument::blank("")));
}

#[test]
fn header_errors() {
    assert_eq!(codes("evr 1.1.1 \"x\" of 1.1\nend\n"), ["P004"]);
    assert_eq!(codes("register \"x\" phase later\n"), ["P021"]);
    assert_eq!(
        codes("register \"x\" phase concept\nregister \"y\" phase concept\n"),
        ["P004"]
    );
}

#[test]
fn missing_end_is_reported_at_the_block() {
    let text = "register \"x\" phase concept\nfuncreq F1 \"a\"\nfuncreq F2 \"b\"\nend\n";
    let result = parse_register(text, "t.evr");
    assert_eq!(result.diagnostics.len(), 1);
    let d = &result.diagnostics[0];
    assert_eq!(d.code, "P006");
    assert_eq!(d.span.start, Position { line: 2, column: 1 });
    assert!(result.document.is_none());
}

#[test]
fn recovery_reports_several_blocks() {
    let text = "register \"x\" phase concept\n\
        stakeholder S1 \"a\"\n  kind sideways\nend\n\
        stakeholder S2 \"b\"\n  description \"no kind\"\nend\n\
        end\n\
        bogus\n\
        stakeholder S3 \"c\"\n  kind direct\n  colour \"red\"\nend\n";
    let result = parse_register(text, "t.evr");
    let got: Vec<(&str, usize)> = result
        .diagnostics
        .iter()
        .map(|d| (d.code, d.span.start.line))
        .collect();
    assert_eq!(
        got,
        [
            ("P021", 3),
            ("P020", 5),
            ("P007", 8),
            ("P008", 9),
            ("P090", 12)
        ]
    );
    assert_eq!(
        result
            .diagnostics
            .iter()
            .filter(|d| d.severity == Severity::Warning)
            .count(),
        1
    );
}

#[test]
fn unknown_key_alone_keeps_the_document() {
    let text = "register \"x\" phase concept\nfuncreq F1 \"a\"\n  owner \"me\"\nend\n";
    let result = parse_register(text, "t.evr");
    assert_eq!(codes(text), ["P090"]);
    assert_eq!(result.document.unwrap().functional_requirements.len(), 1);
}

#[test]
fn model_invariants_surface_as_diagnostics() {
    let text = "register \"x\" phase concept\n\
        corevalue 1 \"a\" rank 1\nend\n\
        quality 1.2 \"q\" of 1 direction supports\nend\n\
        evr 1.3.1 \"e\" of 1.2\nend\n";
    let result = parse_register(text, "t.evr");
    let got: Vec<(&str, usize)> = result
        .diagnostics
        .iter()
        .map(|d| (d.code, d.span.start.line))
        .collect();
    assert_eq!(got, [("P017", 4), ("P014", 6)]);
    assert!(result.diagnostics[1]
        .message
        .contains("EVR id prefix does not match parent quality"));
}

#[test]
fn duplicate_ids_point_at_the_second_declaration() {
    let text = "register \"x\" phase concept\nfuncreq F1 \"a\"\nend\nfuncreq F1 \"b\"\nend\n";
    let result = parse_register(text, "t.evr");
    assert_eq!(result.diagnostics.len(), 1);
    assert_eq!(result.diagnostics[0].code, "P010");
    assert_eq!(result.diagnostics[0].span.start.line, 4);
}

#[test]
fn lexical_and_value_errors() {
    assert_eq!(codes("register \"x phase concept\n"), ["P002", "P006"]);
    let text = "register \"x\" phase exploration\nsession E1\n  date 2024-02-30\nend\n";
    assert_eq!(codes(text), ["P022"]);
    let text = "register \"x\" phase concept\nsos A \"a\"\n  cooperation virtual\n  tier 1\n  tier 2\nend\n";
    assert_eq!(codes(text), ["P023"]);
    let text = "register \"x\" phase concept\nevr 1.1 \"e\" of 1.1\nend\n";
    assert_eq!(codes(text), ["P012"]);
    let text = "register \"x\" phase concept\ncorevalue 1 \"a\" rank 1\n  scores 1 2 3 4 6\nend\n";
    assert_eq!(codes(text), ["P024"]);
}

#[test]
fn spans_are_in_bounds_on_fixture_mutations() {
    let text = fixture_text("tm_clean.evr");
    for cut in (0..text.len())
        .step_by(97)
        .filter(|i| text.is_char_boundary(*i))
    {
        let piece = &text[..cut];
        for d in parse_register(piece, "t.evr").diagnostics {
            assert!(d.span.within(piece), "{d} out of bounds at cut {cut}");
        }
    }
}

#[test]
fn random_registers_round_trip() {
    let mut r = rng(7);
    for _ in 0..200 {
        let doc = random_register(&mut r);
        assert!(validate(&doc).is_empty());
        let text = serialize_canonical(&doc);
        let parsed = parse_register(&text, "gen.evr");
        assert_eq!(
            parsed.document.as_ref(),
            Some(&doc),
            "{text}\n{:?}",
            parsed.diagnostics
        );
    }
}
