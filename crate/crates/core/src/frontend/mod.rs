//! Concrete syntax and trace documents.

mod parse;
mod trace;

pub use parse::{
    parse_atom, parse_formula, parse_goal, parse_program, parse_proof, parse_source, parse_term, ParseError, Position,
    SourceProgram,
};
pub use trace::{
    proof_doc, proved_doc, replay_document, result_doc, step_doc, ProofDoc, ResultDoc, StepDoc, TraceDocument,
    TraceError, SCHEMA_VERSION,
};
