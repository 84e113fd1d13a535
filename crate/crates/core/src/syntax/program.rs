use std::collections::{BTreeMap, HashSet};
use std::fmt;

use thiserror::Error;

use super::term::{Atom, HornClause, Symbol, Term};

pub const PROOF_FN_PREFIX: &str = "pf_";
pub const PROOF_CONST_PREFIX: &str = "pc_";

/// The function symbol standing for clause `label` in proof witnesses:
/// `pf_<label>` for rules and `pc_<label>` for facts.
pub fn witness_symbol(label: &str, premises: usize) -> Symbol {
    if premises == 0 {
        Symbol::from(format!("{PROOF_CONST_PREFIX}{label}"))
    } else {
        Symbol::from(format!("{PROOF_FN_PREFIX}{label}"))
    }
}

/// Splits a witness symbol into its clause label, if it has the reserved shape.
pub fn witness_label(sym: &str) -> Option<(&str, bool)> {
    if let Some(l) = sym.strip_prefix(PROOF_FN_PREFIX) {
        Some((l, true))
    } else {
        sym.strip_prefix(PROOF_CONST_PREFIX).map(|l| (l, false))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgramError {
    #[error("duplicate clause label `{0}`")]
    DuplicateLabel(Symbol),
    #[error("predicate `{name}` used with arity {found}, previously {expected}")]
    PredicateArity { name: Symbol, expected: usize, found: usize },
    #[error("function symbol `{name}` used with arity {found}, previously {expected}")]
    FunctionArity { name: Symbol, expected: usize, found: usize },
    #[error("symbol `{0}` is in the reserved proof-witness namespace but does not denote a clause of this program")]
    ReservedSymbol(Symbol),
    #[error("unknown predicate `{name}/{arity}`")]
    UnknownPredicate { name: Symbol, arity: usize },
}

/// Arity tables for predicates and function symbols.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    pub predicates: BTreeMap<Symbol, usize>,
    pub functions: BTreeMap<Symbol, usize>,
}

impl Signature {
    fn add_predicate(&mut self, a: &Atom) -> Result<(), ProgramError> {
        record(&mut self.predicates, &a.pred, a.arity()).map_err(|expected| ProgramError::PredicateArity {
            name: a.pred.clone(),
            expected,
            found: a.arity(),
        })
    }

    fn add_functions(&mut self, a: &Atom) -> Result<(), ProgramError> {
        let mut fns = Vec::new();
        a.args.iter().for_each(|t| t.collect_functions(&mut fns));
        for (f, n) in fns {
            record(&mut self.functions, &f, n)
                .map_err(|expected| ProgramError::FunctionArity { name: f.clone(), expected, found: n })?;
        }
        Ok(())
    }

    pub fn predicate_arity(&self, name: &str) -> Option<usize> {
        self.predicates.get(name).copied()
    }
}

fn record(table: &mut BTreeMap<Symbol, usize>, name: &Symbol, arity: usize) -> Result<(), usize> {
    match table.get(name) {
        Some(&n) if n != arity => Err(n),
        Some(_) => Ok(()),
        None => {
            table.insert(name.clone(), arity);
            Ok(())
        }
    }
}

/// An ordered list of labelled Horn clauses with a consistent signature.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    clauses: Vec<HornClause>,
    signature: Signature,
}

impl Program {
    pub fn new(clauses: Vec<HornClause>) -> Result<Program, ProgramError> {
        let mut labels = HashSet::new();
        let mut signature = Signature::default();
        for c in &clauses {
            if !labels.insert(c.label.clone()) {
                return Err(ProgramError::DuplicateLabel(c.label.clone()));
            }
            for a in std::iter::once(&c.head).chain(&c.body) {
                signature.add_predicate(a)?;
                signature.add_functions(a)?;
            }
        }
        let program = Program { clauses, signature };
        // Witness symbols may only appear with the shape their clause dictates.
        for (f, &arity) in &program.signature.functions {
            if let Some((label, is_fn)) = witness_label(f.as_str()) {
                let ok = program.clause(label).is_some_and(|c| {
                    let m = c.body.len();
                    if is_fn { m > 0 && m == arity } else { m == 0 && arity == 0 }
                });
                if !ok {
                    return Err(ProgramError::ReservedSymbol(f.clone()));
                }
            }
        }
        Ok(program)
    }

    pub fn empty() -> Program {
        Program::default()
    }

    pub fn clauses(&self) -> &[HornClause] {
        &self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn clause(&self, label: &str) -> Option<&HornClause> {
        self.clauses.iter().find(|c| c.label.as_str() == label)
    }

    pub fn defines(&self, a: &Atom) -> bool {
        self.clauses.iter().any(|c| c.head.same_predicate(a))
    }

    /// Checks that `a` uses a declared predicate with the right arity and that
    /// known function symbols keep their arity. Unknown constants and
    /// functions are allowed in queries.
    pub fn check_atom(&self, a: &Atom) -> Result<(), ProgramError> {
        match self.signature.predicates.get(&a.pred) {
            None => {
                return Err(ProgramError::UnknownPredicate { name: a.pred.clone(), arity: a.arity() });
            }
            Some(&n) if n != a.arity() => {
                return Err(ProgramError::PredicateArity { name: a.pred.clone(), expected: n, found: a.arity() });
            }
            Some(_) => {}
        }
        let mut fns = Vec::new();
        a.args.iter().for_each(|t| t.collect_functions(&mut fns));
        for (f, n) in fns {
            if let Some(&expected) = self.signature.functions.get(&f) {
                if expected != n {
                    return Err(ProgramError::FunctionArity { name: f, expected, found: n });
                }
            }
        }
        Ok(())
    }

    pub fn witness_term(&self, label: &str, args: Vec<Term>) -> Option<Term> {
        let c = self.clause(label)?;
        (c.body.len() == args.len()).then(|| Term::App(witness_symbol(label, args.len()), args))
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}
