//! Horn-clause resolution under three reduction strategies (unification,
//! term matching, structural), with proof-term extraction via the
//! realizability transformation, a proof checker, and static analyses for
//! non-overlap and productivity.

pub mod analysis;
pub mod frontend;
pub mod proofs;
pub mod realizability;
pub mod reduction;
pub mod syntax;
pub mod typecheck;
pub mod unify;

pub use proofs::{beta_normalize, is_first_order, represent, unrepresent, ProofError, ProofTerm, ProofVarEnv};
pub use reduction::{solve, solve_goal, Exploration, Outcome, SearchConfig, StepKind, StepRecord, Strategy};
pub use syntax::{Atom, FreshSource, Goal, HornClause, Program, ProgramError, Substitution, Symbol, Term};
pub use unify::{match_atom, unify};
