//! Traceability from core values down to design artifacts: the trace graph,
//! coverage, maturity and version diffs.

mod coverage;
mod diff;
mod export;
mod graph;
mod maturity;

use thiserror::Error;

pub use coverage::{coverage_report, CoverageRow};
pub use diff::{diff_registers, revert, Change, ChangeSet, KindChanges};
pub use export::{coverage_to_csv, graph_to_dot, COVERAGE_HEADER};
pub use graph::{build_graph, trace_chain, NodeKind, TraceGraph, TraceNode};
pub use maturity::{is_addressed, maturity_score, Maturity};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("unknown entity id `{0}`")]
    UnknownId(String),
}
