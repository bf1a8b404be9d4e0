use std::fmt::Write;

use crate::model::*;

/// Quotes a string for register source, escaping `"` and `\`.
pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if matches!(c, '"' | '\\') {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

fn quoted_list<S: AsRef<str>>(items: &[S]) -> String {
    items
        .iter()
        .map(|s| quote(s.as_ref()))
        .collect::<Vec<_>>()
        .join(" ")
}

fn joined<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items
        .into_iter()
        .map(|t| t.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn lens(l: &Lens) -> String {
    match l {
        Lens::Cultural(framework) => format!("cultural {}", quote(framework)),
        other => other.to_string(),
    }
}

struct Block {
    out: String,
}

impl Block {
    fn open(header: String) -> Block {
        Block {
            out: format!("{header}\n"),
        }
    }

    fn line(&mut self, key: &str, value: impl AsRef<str>) {
        let _ = writeln!(self.out, "  {key} {}", value.as_ref());
    }

    fn list(&mut self, key: &str, value: String) {
        if !value.is_empty() {
            self.line(key, value);
        }
    }

    fn close(mut self) -> String {
        self.out.push_str("end\n");
        self.out
    }
}

/// Renders the register in canonical text form. Parsing the output yields an
/// equal document, and re-serializing that document yields identical bytes.
pub fn serialize_canonical(doc: &RegisterDocument) -> String {
    let mut blocks: Vec<String> = Vec::new();

    let mut header = format!("register {}", quote(&doc.project.name));
    if let Some(v) = &doc.project.version {
        let _ = write!(header, " version {}", quote(v));
    }
    let _ = write!(header, " phase {}", doc.phase);
    blocks.push(format!("{header}\n"));

    let soi = &doc.soi;
    if soi.name != doc.project.name
        || !soi.concept_of_operation.is_empty()
        || !soi.deployment_regions.is_empty()
    {
        let mut b = Block::open(format!("soi {}", quote(&soi.name)));
        b.line("operation", quote(&soi.concept_of_operation));
        b.list("region", joined(&soi.deployment_regions));
        blocks.push(b.close());
    }

    for e in &doc.sos_elements {
        let mut b = Block::open(format!("sos {} {}", e.id, quote(&e.name)));
        b.line("cooperation", e.cooperation_type.keyword());
        b.line("tier", e.tier.to_string());
        b.line("personal_data", e.processes_personal_data.to_string());
        b.line("in_scope", e.in_ethical_scope.to_string());
        b.line("enabling_access", e.access_to_enabling_elements.to_string());
        blocks.push(b.close());
    }

    for s in &doc.stakeholders {
        let mut b = Block::open(format!("stakeholder {} {}", s.id, quote(&s.name)));
        b.line("kind", s.kind.keyword());
        b.line("description", quote(&s.description));
        if let Some(region) = &s.region {
            b.line("region", region);
        }
        if let Some(p) = &s.selection_profile {
            b.line("motivation", quote(&p.motivation));
            b.line("power", quote(&p.power));
            b.line("knowledge", quote(&p.knowledge));
            b.line("legitimization", quote(&p.legitimization));
        }
        blocks.push(b.close());
    }

    for c in &doc.contexts {
        let mut b = Block::open(format!("context {} {}", c.id, quote(&c.name)));
        b.line("captured", c.captured.keyword());
        b.list("element", quoted_list(&c.data_elements));
        for f in &c.data_flows {
            b.line(
                "flow",
                format!(
                    "{} {} {}",
                    quote(&f.source),
                    quote(&f.sink),
                    quote(&f.data_type)
                ),
            );
        }
        let subjects = c
            .data_subjects
            .iter()
            .map(|s| match s {
                DataSubject::Stakeholder(id) => id.clone(),
                DataSubject::Named(name) => quote(name),
            })
            .collect::<Vec<_>>();
        b.list("subject", subjects.join(" "));
        b.list("type", quoted_list(&c.data_types));
        b.list("expectation", quoted_list(&c.integrity_expectations));
        blocks.push(b.close());
    }

    for s in &doc.sessions {
        let mut b = Block::open(format!("session {}", s.id));
        b.line("date", s.date.format("%Y-%m-%d").to_string());
        b.list("participant", joined(&s.participants));
        b.list("lens", joined(s.lenses_used.iter().map(lens)));
        blocks.push(b.close());
    }

    for s in &doc.statements {
        let mut b = Block::open(format!("statement {}", s.id));
        b.line("in", &s.session);
        b.line("from", &s.stakeholder);
        b.line("lens", lens(&s.lens));
        b.line("polarity", s.polarity.keyword());
        b.line("text", quote(&s.text));
        b.list("value", quoted_list(&s.named_values));
        b.list("extracted", quoted_list(&s.extracted_values));
        blocks.push(b.close());
    }

    for cv in &doc.core_values {
        let mut b = Block::open(format!(
            "corevalue {} {} rank {}",
            cv.id,
            quote(&cv.name),
            cv.priority_rank
        ));
        b.list("aka", quoted_list(&cv.aliases));
        b.line("intrinsic", cv.intrinsic.to_string());
        if let Some(scores) = &cv.hierarchy_scores {
            b.line("scores", joined(scores.as_array()));
        }
        b.list("supported_by", joined(&cv.supporting_statements));
        blocks.push(b.close());
    }

    for q in &doc.qualities {
        let mut b = Block::open(format!(
            "quality {} {} of {} direction {}",
            q.id,
            quote(&q.name),
            q.core_value,
            q.direction
        ));
        b.line("source", q.source.keyword());
        blocks.push(b.close());
    }

    for e in &doc.evrs {
        let mut b = Block::open(format!("evr {} {} of {}", e.id, quote(&e.text), e.quality));
        b.line("kind", e.kind.keyword());
        if let Some(t) = &e.threshold {
            b.line(
                "threshold",
                format!(
                    "{} {} {} {}",
                    quote(&t.metric),
                    t.comparator,
                    quote(&t.level),
                    quote(&t.rationale)
                ),
            );
        }
        b.line("risk", e.risk_path.keyword());
        b.list("legal", quoted_list(&e.legal_instruments));
        let flags = [
            (e.harm_flags.life, "life"),
            (e.harm_flags.health, "health"),
            (e.harm_flags.legal_breach, "legal_breach"),
        ];
        b.list("harm", joined(flags.iter().filter(|f| f.0).map(|f| f.1)));
        b.line("likelihood", e.harm_likelihood.keyword());
        if let Some(d) = &e.protection_demand {
            b.line("demand", format!("{} {}", d.level, quote(&d.rationale)));
        }
        blocks.push(b.close());
    }

    for t in &doc.threats {
        let mut b = Block::open(format!("threat {} of {}", t.id, t.evr));
        b.line("description", quote(&t.description));
        b.line("realistic", t.realistic.to_string());
        blocks.push(b.close());
    }

    for c in &doc.controls {
        let threats = c
            .threats
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>();
        let mut b = Block::open(format!("control {} for {}", c.id, threats.join(", ")));
        b.line("description", quote(&c.description));
        b.line("rigor", c.rigor.to_string());
        b.line("form", c.form.keyword());
        b.line("status", c.status.keyword());
        if let Some(d) = &c.implementing_disposition {
            b.line("implemented_by", d);
        }
        blocks.push(b.close());
    }

    for d in &doc.dispositions {
        let mut b = Block::open(format!("disposition {} {}", d.id, quote(&d.description)));
        b.line("component", quote(&d.soi_component));
        b.list("implements", joined(&d.controls));
        blocks.push(b.close());
    }

    for f in &doc.functional_requirements {
        blocks.push(Block::open(format!("funcreq {} {}", f.id, quote(&f.text))).close());
    }

    for c in &doc.design_concepts {
        let mut b = Block::open(format!("concept {} {}", c.id, quote(&c.name)));
        b.list("ethical", joined(&c.ethical_refs));
        b.list("functional", joined(&c.functional_refs));
        blocks.push(b.close());
    }

    for p in &doc.personas {
        let mut b = Block::open(format!("persona {} {}", p.id, quote(&p.name)));
        b.line("represents", &p.stakeholder);
        b.line("kind", p.kind.keyword());
        b.line("narrative", quote(&p.narrative));
        blocks.push(b.close());
    }

    for a in &doc.attestations {
        let mut b = Block::open(format!("attestation {}", a.id));
        b.line("subject", a.subject.to_string());
        b.line(
            "signatory",
            format!("{} {}", quote(&a.signatory.name), a.signatory.role),
        );
        b.line("date", a.date.format("%Y-%m-%d").to_string());
        b.line("says", quote(&a.statement));
        b.line("consent", a.consent.to_string());
        blocks.push(b.close());
    }

    if let Some(m) = &doc.mission {
        let mut b = Block::open(format!("mission {}", quote(&m.text)));
        b.list("featuring", joined(&m.featured));
        b.list("signed_by", joined(&m.attestations));
        blocks.push(b.close());
    }

    if let Some(d) = &doc.investment_decision {
        let mut b = Block::open(format!("decision {}", d.verdict));
        b.line("rationale", quote(&d.rationale));
        b.list("signed_by", joined(&d.attestations));
        blocks.push(b.close());
    }

    for f in &doc.feedback {
        let mut b = Block::open(format!("feedback {}", f.id));
        b.line("date", f.date.format("%Y-%m-%d").to_string());
        b.line(
            "source",
            match &f.source {
                FeedbackSource::Market => "market".to_string(),
                FeedbackSource::Stakeholder(id) => format!("stakeholder {id}"),
            },
        );
        b.line("text", quote(&f.text));
        b.list("yields_statement", joined(&f.statements));
        b.list("yields_quality", joined(&f.qualities));
        b.line("reprioritize", f.reprioritization_required.to_string());
        blocks.push(b.close());
    }

    if !doc.alias_map.is_empty() {
        let lines: String = doc
            .alias_map
            .iter()
            .map(|(a, c)| format!("alias {} to {}\n", quote(a), quote(c)))
            .collect();
        blocks.push(lines);
    }

    blocks.join("\n")
}
