//! First-order syntax: terms, atoms, labelled Horn clauses, programs,
//! substitutions and fresh-name management.

mod fresh;
mod program;
mod subst;
mod term;

pub use fresh::{rename_apart, FreshSource};
pub(crate) use fresh::rename_with_generation;
pub use program::{
    witness_label, witness_symbol, Program, ProgramError, Signature, PROOF_CONST_PREFIX, PROOF_FN_PREFIX,
};
pub use subst::Substitution;
pub use term::{extend_atom, Atom, Canonicalizer, Goal, HornClause, Symbol, Term};
