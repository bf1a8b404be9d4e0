use std::fmt::Write;

use super::coverage::CoverageRow;
use super::graph::TraceGraph;

pub const COVERAGE_HEADER: [&str; 9] = [
    "core_value",
    "rank",
    "qualities",
    "evrs",
    "thresholds",
    "threats",
    "controls",
    "attestations",
    "addressed",
];

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\")
        .replace('"', "\\\"")
        .replace('\n', "\\n")
}

/// Graphviz rendering; node labels are `id name`.
pub fn graph_to_dot(graph: &TraceGraph) -> String {
    let mut out = String::from("digraph register {\n  rankdir=TB;\n  node [shape=box];\n");
    let key = |kind: &str, id: &str| dot_escape(&format!("{kind}:{id}"));
    for n in graph.nodes() {
        let _ = writeln!(
            out,
            "  \"{}\" [label=\"{}\"];",
            key(n.kind.label(), &n.id),
            dot_escape(&format!("{} {}", n.id, n.name))
        );
    }
    for (from, to) in graph.edges() {
        let _ = writeln!(
            out,
            "  \"{}\" -> \"{}\";",
            key(from.kind.label(), &from.id),
            key(to.kind.label(), &to.id)
        );
    }
    out.push_str("}\n");
    out
}

pub fn coverage_to_csv(rows: &[CoverageRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(COVERAGE_HEADER).expect("write to memory");
    for r in rows {
        w.write_record([
            r.name.clone(),
            r.rank.to_string(),
            r.qualities.to_string(),
            r.evrs.to_string(),
            r.thresholds.to_string(),
            r.threats.to_string(),
            r.controls.to_string(),
            r.attestations.to_string(),
            r.addressed.to_string(),
        ])
        .expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv output is UTF-8")
}
