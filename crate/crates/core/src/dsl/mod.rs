//! The `.evr` text format: parsing with positioned diagnostics, canonical
//! serialization and JSON interchange export.

mod interchange;
mod lexer;
mod parser;
mod serialize;
mod span;

pub use interchange::export_interchange;
pub use parser::{parse_register, ParseResult, SourceMap};
pub use serialize::{quote, serialize_canonical};
pub use span::{ParseDiagnostic, Position, SourceSpan};
