use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use evrforge::dsl::parse_register;
use evrforge_testkit::fixture_path;

fn evrforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evrforge"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fixture(name: &str) -> String {
    fixture_path(name).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn check_exit_codes() {
    let clean = evrforge(&["check", &fixture("tm_clean.evr")]);
    assert_eq!(clean.status.code(), Some(0));
    assert_eq!(stderr(&clean), "0 errors, 0 warnings\n");

    let warned = evrforge(&["check", &fixture("tm_no_mission.evr")]);
    assert_eq!(warned.status.code(), Some(1));
    assert!(stderr(&warned).ends_with("0 errors, 1 warning\n"));

    let strict = evrforge(&["check", "--strict", &fixture("tm_no_mission.evr")]);
    assert_eq!(strict.status.code(), Some(2));
    assert!(stderr(&strict).starts_with("warning VBE-C13"));

    let failed = evrforge(&["check", &fixture("tm_no_indirect.evr")]);
    assert_eq!(failed.status.code(), Some(2));
    assert_eq!(
        stderr(&failed)
            .lines()
            .filter(|l| l.contains("VBE-R02"))
            .count(),
        1
    );

    let missing = evrforge(&["check", "does/not/exist.evr"]);
    assert_eq!(missing.status.code(), Some(3));
    assert!(stderr(&missing).contains("cannot read"));
}

#[test]
fn check_rule_selection_and_interchange() {
    let only = evrforge(&[
        "check",
        "--rules",
        "VBE-C15",
        &fixture("tm_no_indirect.evr"),
    ]);
    assert_eq!(only.status.code(), Some(1));
    let unknown = evrforge(&["check", "--rules", "VBE-Z01", &fixture("tm_clean.evr")]);
    assert_eq!(unknown.status.code(), Some(3));
    assert!(stderr(&unknown).contains("VBE-Z01"));

    let json = evrforge(&[
        "check",
        "--format",
        "interchange",
        &fixture("tm_no_indirect.evr"),
    ]);
    assert_eq!(json.status.code(), Some(2));
    let value: serde_json::Value = serde_json::from_str(&stdout(&json)).unwrap();
    assert_eq!(value["errors"], 1);
    assert_eq!(value["warnings"], 1);
    assert_eq!(value["rules"][0]["rule_id"], "VBE-R02");
    assert_eq!(value["rules"][0]["severity"], "error");
}

#[test]
fn parse_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.evr");
    fs::write(&path, "register \"x\" phase concept\nfuncreq F1 \"a\"\n").unwrap();
    let path = path.display().to_string();
    for args in [
        vec!["check", &path],
        vec!["report", &path],
        vec!["score", &path],
        vec!["export", &path, "--format", "dot"],
    ] {
        let out = evrforge(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(stderr(&out).contains("P006"));
        assert!(stdout(&out).is_empty());
    }
}

#[test]
fn audit_report_matches_golden_file() {
    let golden = fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/tm_clean_audit.txt"),
    )
    .unwrap();
    let first = evrforge(&["report", "--kind", "audit", &fixture("tm_clean.evr")]);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(stdout(&first), golden);
    let second = evrforge(&["report", &fixture("tm_clean.evr")]);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn mission_report() {
    let out = evrforge(&["report", "--kind", "mission", &fixture("tm_clean.evr")]);
    let text = stdout(&out);
    assert!(text.contains("equal access"));
    assert!(text.contains("insurance status"));
    assert!(text.contains("A3 M. Weber (executive, 2023-04-03)"));
    let none = evrforge(&["report", "--kind", "mission", &fixture("tm_no_mission.evr")]);
    assert_eq!(none.status.code(), Some(1));
    assert!(stdout(&none).contains("\nnone\n"));
    assert!(stderr(&none).contains("VBE-C13"));
    let audit = evrforge(&["report", &fixture("tm_no_mission.evr")]);
    assert!(stdout(&audit).contains("== Mission ==\nnone\n"));
}

#[test]
fn report_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("coverage.txt");
    let run = evrforge(&[
        "report",
        "--kind",
        "coverage",
        "--out",
        out.to_str().unwrap(),
        &fixture("tm_full.evr"),
    ]);
    assert_eq!(run.status.code(), Some(2));
    assert!(stdout(&run).is_empty());
    let text = fs::read_to_string(out).unwrap();
    assert!(text.contains("Maturity: 7/14 (0.50)"));
}

#[test]
fn trace_lines() {
    let out = evrforge(&["trace", &fixture("tm_clean.evr"), "1.1.3"]);
    assert_eq!(out.status.code(), Some(0));
    let lines: Vec<String> = stdout(&out).lines().map(String::from).collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], "1  core_value  equality");
    assert!(lines[2].starts_with("1.1.3  evr  Publish"));
    assert_eq!(
        stdout(&evrforge(&["trace", &fixture("tm_clean.evr"), "1"]))
            .lines()
            .count(),
        1
    );
    let control = stdout(&evrforge(&["trace", &fixture("tm_clean.evr"), "1.1.2-C1"]));
    assert_eq!(control.lines().count(), 5);
    assert!(control.contains("1.1.2-T1  threat"));
    assert_eq!(
        evrforge(&["trace", &fixture("tm_clean.evr"), "7.7"])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn score_lines() {
    assert_eq!(
        stdout(&evrforge(&["score", &fixture("tm_full.evr")])),
        "7/14 (0.50)\n"
    );
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.evr");
    fs::write(&empty, "register \"E\" phase concept\n").unwrap();
    assert_eq!(
        stdout(&evrforge(&["score", empty.to_str().unwrap()])),
        "0/0 (empty)\n"
    );
}

#[test]
fn diff_output() {
    let same = evrforge(&["diff", &fixture("tm_clean.evr"), &fixture("tm_clean.evr")]);
    assert_eq!(stdout(&same), "no changes\n");

    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(fixture_path("tm_clean.evr")).unwrap();
    let added = dir.path().join("added.evr");
    fs::write(
        &added,
        format!("{text}\ncorevalue 2 \"addiction avoidance\" rank 2\nend\n"),
    )
    .unwrap();
    let out = stdout(&evrforge(&[
        "diff",
        &fixture("tm_clean.evr"),
        added.to_str().unwrap(),
    ]));
    assert_eq!(out, "REPRIORITIZATION REQUIRED\nadded.core_values: 2\n");

    // Ids stay contiguous, so 1.1.5 goes with 1.1.4.
    let mut removed_text = text.clone();
    for header in [
        "threat 1.1.5-T1",
        "threat 1.1.4-T1",
        "evr 1.1.5",
        "evr 1.1.4",
    ] {
        let start = removed_text.find(header).unwrap();
        let end = start + removed_text[start..].find("\nend\n").unwrap() + 5;
        removed_text.replace_range(start..end, "");
    }
    let removed = dir.path().join("removed.evr");
    fs::write(&removed, removed_text).unwrap();
    let run = evrforge(&["diff", &fixture("tm_clean.evr"), removed.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
    let out = stdout(&run);
    assert!(out.lines().any(|l| l == "removed.evrs: 1.1.4"), "{out}");
    assert!(!out.contains("REPRIORITIZATION"));
}

#[test]
fn init_template() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("demo.evr");
    let p = path.to_str().unwrap();
    assert_eq!(
        evrforge(&["init", "demo \"quoted\"", "--out", p])
            .status
            .code(),
        Some(0)
    );
    let text = fs::read_to_string(&path).unwrap();
    for lens in ["utilitarian", "virtue", "duty"] {
        assert!(text.contains(lens));
    }
    let parsed = parse_register(&text, "demo.evr");
    assert!(parsed.diagnostics.is_empty(), "{:?}", parsed.diagnostics);
    assert_eq!(parsed.document.unwrap().project.name, "demo \"quoted\"");
    let check = evrforge(&["check", p]);
    assert!(matches!(check.status.code(), Some(0 | 1)));

    assert_eq!(
        evrforge(&["init", "demo", "--out", p]).status.code(),
        Some(3)
    );
    assert_eq!(
        evrforge(&["init", "other", "--out", p, "--force"])
            .status
            .code(),
        Some(0)
    );
    assert!(fs::read_to_string(&path)
        .unwrap()
        .contains("register \"other\""));
    let unwritable = dir.path().join("missing/dir/x.evr");
    assert_eq!(
        evrforge(&["init", "demo", "--out", unwritable.to_str().unwrap()])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn exports() {
    let csv = evrforge(&["export", &fixture("tm_clean.evr"), "--format", "csv"]);
    assert_eq!(
        stdout(&csv).lines().next().unwrap(),
        "core_value,rank,qualities,evrs,thresholds,threats,controls,attestations,addressed"
    );
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.evr");
    fs::write(&empty, "register \"E\" phase concept\n").unwrap();
    let dot = stdout(&evrforge(&[
        "export",
        empty.to_str().unwrap(),
        "--format",
        "dot",
    ]));
    assert!(dot.starts_with("digraph register {"));
    assert!(!dot.contains("label="));
    let json = stdout(&evrforge(&[
        "export",
        &fixture("tm_full.evr"),
        "--format",
        "interchange",
    ]));
    let value: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(value["core_values"].as_array().unwrap().len(), 14);
    assert_eq!(
        evrforge(&["export", &fixture("tm_clean.evr"), "--format", "yaml"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(evrforge(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(evrforge(&["--help"]).status.code(), Some(0));
}

#[test]
fn commands_leave_input_untouched() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tm.evr");
    let text = fs::read_to_string(fixture_path("tm_clean.evr")).unwrap();
    fs::write(&path, &text).unwrap();
    let p = path.to_str().unwrap();
    for args in [
        vec!["check", p],
        vec!["report", p],
        vec!["score", p],
        vec!["trace", p, "1"],
        vec!["export", p, "--format", "interchange"],
    ] {
        evrforge(&args);
    }
    assert_eq!(fs::read_to_string(&path).unwrap(), text);
}
