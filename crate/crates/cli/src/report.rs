//! Plain-text reports. Output depends only on register content, so the same
//! input always renders the same bytes.

use std::fmt::Write;

use evrforge::dsl::ParseDiagnostic;
use evrforge::model::*;
use evrforge::rules::Diagnostic;
use evrforge::trace::{coverage_report, maturity_score, Maturity, COVERAGE_HEADER};

const NONE: &str = "none";

/// Everything a check produced for one register.
#[derive(Debug, Clone, Default)]
pub struct Findings {
    pub parse: Vec<ParseDiagnostic>,
    pub rules: Vec<Diagnostic>,
}

/// `addressed/total (ratio)`, or `0/0 (empty)`.
pub fn score_line(m: &Maturity) -> String {
    if m.empty {
        format!("{}/{} (empty)", m.addressed, m.total)
    } else {
        format!("{}/{} ({:.2})", m.addressed, m.total, m.ratio)
    }
}

/// Left-aligned columns separated by two spaces.
fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let mut out = String::new();
        for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
            if i + 1 == cells.len() {
                out.push_str(cell);
            } else {
                let pad = w - cell.chars().count();
                write!(out, "{cell}{}  ", " ".repeat(pad)).unwrap();
            }
        }
        out.trim_end().to_string() + "\n"
    };
    let mut out = line(header.to_vec());
    for row in rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
    }
    out
}

fn signer(a: &Attestation) -> String {
    format!("{} ({}, {})", a.signatory.name, a.signatory.role, a.date)
}

fn signers(doc: &RegisterDocument, ids: &[String]) -> Vec<String> {
    ids.iter()
        .map(|id| match doc.attestation(id) {
            Some(a) => format!("{id} {}", signer(a)),
            None => id.clone(),
        })
        .collect()
}

fn mission_body(doc: &RegisterDocument) -> String {
    let Some(mission) = &doc.mission else {
        return format!("{NONE}\n");
    };
    let mut out = format!("{}\n", mission.text);
    let featured: Vec<String> = mission
        .featured
        .iter()
        .map(|id| match doc.core_value(*id) {
            Some(cv) => format!("{}. {} (core value {id})", cv.priority_rank, cv.name),
            None => format!("core value {id}"),
        })
        .collect();
    out.push_str("\nFeatured values:\n");
    if featured.is_empty() {
        writeln!(out, "  {NONE}").unwrap();
    }
    for f in featured {
        writeln!(out, "  {f}").unwrap();
    }
    out.push_str("\nSigned by:\n");
    let signed = signers(doc, &mission.attestations);
    if signed.is_empty() {
        writeln!(out, "  {NONE}").unwrap();
    }
    for s in signed {
        writeln!(out, "  {s}").unwrap();
    }
    out
}

fn heading(doc: &RegisterDocument) -> String {
    match &doc.project.version {
        Some(v) => format!("{} {v}", doc.project.name),
        None => doc.project.name.clone(),
    }
}

/// The value mission with its featured values and signatories.
pub fn render_mission(doc: &RegisterDocument) -> String {
    format!("Value mission: {}\n\n{}", heading(doc), mission_body(doc))
}

fn coverage_table(doc: &RegisterDocument) -> String {
    let rows: Vec<Vec<String>> = coverage_report(doc)
        .into_iter()
        .map(|r| {
            vec![
                r.name,
                r.rank.to_string(),
                r.qualities.to_string(),
                r.evrs.to_string(),
                r.thresholds.to_string(),
                r.threats.to_string(),
                r.controls.to_string(),
                r.attestations.to_string(),
                if r.addressed { "yes" } else { "no" }.to_string(),
            ]
        })
        .collect();
    if rows.is_empty() {
        return format!("{NONE}\n");
    }
    table(&COVERAGE_HEADER, &rows)
}

/// Per-core-value coverage and the maturity score.
pub fn render_coverage(doc: &RegisterDocument) -> String {
    format!(
        "Coverage: {}\n\n{}\nMaturity: {}\n",
        heading(doc),
        coverage_table(doc),
        score_line(&maturity_score(doc))
    )
}

fn priorities(doc: &RegisterDocument) -> String {
    let rows: Vec<Vec<String>> = doc
        .core_values_by_priority()
        .into_iter()
        .map(|cv| {
            let scores = cv
                .hierarchy_scores
                .map(|s| s.as_array().map(|n| n.to_string()).join(" "))
                .unwrap_or_else(|| "-".into());
            let attested: Vec<String> = doc
                .attestations_for(&AttestationSubject::PriorityDecision(cv.id))
                .map(|a| a.id.clone())
                .collect();
            vec![
                cv.priority_rank.to_string(),
                cv.id.to_string(),
                cv.name.clone(),
                scores,
                if attested.is_empty() {
                    NONE.to_string()
                } else {
                    attested.join(" ")
                },
            ]
        })
        .collect();
    if rows.is_empty() {
        return format!("{NONE}\n");
    }
    table(&["rank", "id", "name", "scores", "attested_by"], &rows)
}

fn diagnostics(findings: &Findings) -> String {
    let mut out = format!("{}\n", findings.summary());
    for d in &findings.parse {
        writeln!(out, "{d}").unwrap();
    }
    for d in &findings.rules {
        writeln!(out, "{d}").unwrap();
    }
    out
}

fn roster(doc: &RegisterDocument) -> String {
    let mut attestations: Vec<&Attestation> = doc.attestations.iter().collect();
    attestations.sort_by(|a, b| (a.date, &a.id).cmp(&(b.date, &b.id)));
    let rows: Vec<Vec<String>> = attestations
        .into_iter()
        .map(|a| {
            vec![
                a.date.to_string(),
                a.id.clone(),
                a.subject.to_string(),
                a.signatory.name.clone(),
                a.signatory.role.to_string(),
                if a.consent { "yes" } else { "no" }.to_string(),
            ]
        })
        .collect();
    if rows.is_empty() {
        return format!("{NONE}\n");
    }
    table(
        &["date", "id", "subject", "signatory", "role", "consent"],
        &rows,
    )
}

fn decision(doc: &RegisterDocument) -> String {
    let Some(d) = &doc.investment_decision else {
        return format!("{NONE}\n");
    };
    let signed = signers(doc, &d.attestations);
    let mut out = format!("{}\n", d.verdict);
    if !d.rationale.is_empty() {
        writeln!(out, "{}", d.rationale).unwrap();
    }
    writeln!(
        out,
        "Signed by: {}",
        if signed.is_empty() {
            NONE.to_string()
        } else {
            signed.join("; ")
        }
    )
    .unwrap();
    out
}

/// Full audit trail: goals, priorities, coverage, findings, and who signed
/// what and when.
pub fn render_audit(doc: &RegisterDocument, findings: &Findings) -> String {
    let sections = [
        ("Mission", mission_body(doc)),
        ("Priorities", priorities(doc)),
        ("Coverage", coverage_table(doc)),
        (
            "Maturity",
            format!("{}\n", score_line(&maturity_score(doc))),
        ),
        ("Investment decision", decision(doc)),
        ("Diagnostics", diagnostics(findings)),
        ("Attestations", roster(doc)),
    ];
    let mut out = format!("Audit report: {}\nPhase: {}\n", heading(doc), doc.phase);
    for (title, body) in sections {
        write!(out, "\n== {title} ==\n{body}").unwrap();
    }
    out
}
