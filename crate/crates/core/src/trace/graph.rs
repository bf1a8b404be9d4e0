use std::collections::HashMap;
use std::fmt;

use petgraph::graph::{DiGraph, NodeIndex};
use petgraph::visit::EdgeRef;
use serde::Serialize;

use super::TraceError;
use crate::model::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    CoreValue,
    Quality,
    Evr,
    Threat,
    Control,
    Disposition,
    FunctionalRequirement,
    DesignConcept,
}

impl NodeKind {
    pub const ALL: [NodeKind; 8] = [
        NodeKind::CoreValue,
        NodeKind::Quality,
        NodeKind::Evr,
        NodeKind::Threat,
        NodeKind::Control,
        NodeKind::Disposition,
        NodeKind::FunctionalRequirement,
        NodeKind::DesignConcept,
    ];

    pub fn label(self) -> &'static str {
        match self {
            NodeKind::CoreValue => "core_value",
            NodeKind::Quality => "quality",
            NodeKind::Evr => "evr",
            NodeKind::Threat => "threat",
            NodeKind::Control => "control",
            NodeKind::Disposition => "disposition",
            NodeKind::FunctionalRequirement => "functional_requirement",
            NodeKind::DesignConcept => "design_concept",
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceNode {
    pub kind: NodeKind,
    pub id: String,
    pub name: String,
}

/// Traceability graph over the value chain and the design artifacts hanging
/// off it. Edges point from parent to child.
#[derive(Debug, Clone)]
pub struct TraceGraph {
    graph: DiGraph<TraceNode, ()>,
    index: HashMap<(NodeKind, String), NodeIndex>,
    /// Parent used for chains; for controls the first listed threat, for
    /// dispositions the first implemented control.
    primary_parent: HashMap<NodeIndex, NodeIndex>,
}

impl TraceGraph {
    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn nodes(&self) -> impl Iterator<Item = &TraceNode> {
        self.graph.node_weights()
    }

    /// Edges as (parent, child) pairs in insertion order.
    pub fn edges(&self) -> impl Iterator<Item = (&TraceNode, &TraceNode)> {
        self.graph
            .edge_references()
            .map(|e| (&self.graph[e.source()], &self.graph[e.target()]))
    }

    /// Looks an id up across node kinds, value-chain kinds first.
    pub fn find(&self, id: &str) -> Option<&TraceNode> {
        self.locate(id).map(|ix| &self.graph[ix])
    }

    fn locate(&self, id: &str) -> Option<NodeIndex> {
        NodeKind::ALL
            .iter()
            .find_map(|k| self.index.get(&(*k, id.to_string())).copied())
    }

    pub fn children(&self, id: &str) -> Vec<&TraceNode> {
        let Some(ix) = self.locate(id) else {
            return Vec::new();
        };
        let mut out: Vec<(usize, &TraceNode)> = self
            .graph
            .edges(ix)
            .map(|e| (e.id().index(), &self.graph[e.target()]))
            .collect();
        out.sort_by_key(|(edge, _)| *edge);
        out.into_iter().map(|(_, n)| n).collect()
    }

    pub fn is_acyclic(&self) -> bool {
        !petgraph::algo::is_cyclic_directed(&self.graph)
    }
}

struct Builder {
    g: TraceGraph,
}

impl Builder {
    fn node(&mut self, kind: NodeKind, id: String, name: &str) {
        let ix = self.g.graph.add_node(TraceNode {
            kind,
            id: id.clone(),
            name: name.to_string(),
        });
        self.g.index.insert((kind, id), ix);
    }

    fn get(&self, kind: NodeKind, id: impl ToString) -> Option<NodeIndex> {
        self.g.index.get(&(kind, id.to_string())).copied()
    }

    fn edge(&mut self, parent: Option<NodeIndex>, child: Option<NodeIndex>, primary: bool) {
        if let (Some(p), Some(c)) = (parent, child) {
            self.g.graph.add_edge(p, c, ());
            if primary {
                self.g.primary_parent.entry(c).or_insert(p);
            }
        }
    }
}

/// Builds the trace graph of a structurally valid register. Dangling
/// references are skipped rather than reported.
pub fn build_graph(doc: &RegisterDocument) -> TraceGraph {
    let mut b = Builder {
        g: TraceGraph {
            graph: DiGraph::new(),
            index: HashMap::new(),
            primary_parent: HashMap::new(),
        },
    };
    for cv in &doc.core_values {
        b.node(NodeKind::CoreValue, cv.id.to_string(), &cv.name);
    }
    for q in &doc.qualities {
        b.node(NodeKind::Quality, q.id.to_string(), &q.name);
    }
    for e in &doc.evrs {
        b.node(NodeKind::Evr, e.id.to_string(), &e.text);
    }
    for t in &doc.threats {
        b.node(NodeKind::Threat, t.id.to_string(), &t.description);
    }
    for c in &doc.controls {
        b.node(NodeKind::Control, c.id.to_string(), &c.description);
    }
    for d in &doc.dispositions {
        b.node(NodeKind::Disposition, d.id.clone(), &d.description);
    }
    for f in &doc.functional_requirements {
        b.node(NodeKind::FunctionalRequirement, f.id.clone(), &f.text);
    }
    for c in &doc.design_concepts {
        b.node(NodeKind::DesignConcept, c.id.clone(), &c.name);
    }

    for q in &doc.qualities {
        let (p, c) = (
            b.get(NodeKind::CoreValue, q.core_value),
            b.get(NodeKind::Quality, q.id),
        );
        b.edge(p, c, true);
    }
    for e in &doc.evrs {
        let (p, c) = (
            b.get(NodeKind::Quality, e.quality),
            b.get(NodeKind::Evr, e.id),
        );
        b.edge(p, c, true);
    }
    for t in &doc.threats {
        let (p, c) = (b.get(NodeKind::Evr, t.evr), b.get(NodeKind::Threat, t.id));
        b.edge(p, c, true);
    }
    for ctl in &doc.controls {
        let c = b.get(NodeKind::Control, ctl.id);
        for t in &ctl.threats {
            let p = b.get(NodeKind::Threat, t);
            b.edge(p, c, true);
        }
    }
    for ctl in &doc.controls {
        let mut dispositions: Vec<&str> = doc
            .dispositions
            .iter()
            .filter(|d| d.controls.contains(&ctl.id))
            .map(|d| d.id.as_str())
            .collect();
        if let Some(d) = &ctl.implementing_disposition {
            if !dispositions.contains(&d.as_str()) {
                dispositions.push(d);
            }
        }
        let p = b.get(NodeKind::Control, ctl.id);
        for d in dispositions {
            let c = b.get(NodeKind::Disposition, d);
            b.edge(p, c, true);
        }
    }
    for concept in &doc.design_concepts {
        let p = b.get(NodeKind::DesignConcept, &concept.id);
        for r in &concept.ethical_refs {
            let c = match r {
                EthicalRef::Evr(id) => b.get(NodeKind::Evr, id),
                EthicalRef::Control(id) => b.get(NodeKind::Control, id),
            };
            b.edge(p, c, false);
        }
        for f in &concept.functional_refs {
            let c = b.get(NodeKind::FunctionalRequirement, f);
            b.edge(p, c, false);
        }
    }
    b.g
}

/// The chain from a root down to `entity_id`, root first. Value-chain
/// entities root at their core value; functional requirements and design
/// concepts are their own root.
pub fn trace_chain(graph: &TraceGraph, entity_id: &str) -> Result<Vec<TraceNode>, TraceError> {
    let mut ix = graph
        .locate(entity_id)
        .ok_or_else(|| TraceError::UnknownId(entity_id.to_string()))?;
    let mut chain = vec![graph.graph[ix].clone()];
    while let Some(&parent) = graph.primary_parent.get(&ix) {
        chain.push(graph.graph[parent].clone());
        ix = parent;
    }
    chain.reverse();
    Ok(chain)
}
