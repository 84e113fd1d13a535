//! Checking proof terms against Horn formulas under a program's axioms.
//!
//! Only the fragment produced by resolution is handled directly: a lambda
//! prefix over a first-order application spine. Other terms are beta
//! normalized first. Quantifiers stay implicit: instantiation happens by
//! unification while walking the spine, premises left to right, and the
//! variables of the formula being proved are held rigid.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::proofs::{beta_normalize, fresh_name, ProofError, ProofTerm, DEFAULT_BETA_FUEL};
use crate::syntax::{rename_with_generation, Atom, FreshSource, HornClause, Program, ProgramError, Substitution, Symbol, Term};
use crate::unify::unify;

/// A Horn formula `A1, ..., An ⇒ B`, implicitly closed over its variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Formula {
    pub body: Vec<Atom>,
    pub head: Atom,
}

impl Formula {
    pub fn new(body: Vec<Atom>, head: Atom) -> Formula {
        Formula { body, head }
    }

    /// `⇒ a`
    pub fn goal(a: Atom) -> Formula {
        Formula { body: Vec::new(), head: a }
    }
}

impl From<&HornClause> for Formula {
    fn from(c: &HornClause) -> Formula {
        Formula { body: c.body.clone(), head: c.head.clone() }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        for (i, b) in self.body.iter().enumerate() {
            f.write_str(if i == 0 { " <= " } else { ", " })?;
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// Where in a proof spine something went wrong: the sequence of argument
/// positions (0-based) leading from the root.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SpinePath(pub Vec<usize>);

impl fmt::Display for SpinePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("root");
        }
        let parts: Vec<String> = self.0.iter().map(|i| (i + 1).to_string()).collect();
        write!(f, "argument {}", parts.join("."))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error(transparent)]
    Signature(#[from] ProgramError),
    #[error(transparent)]
    Normalize(#[from] ProofError),
    #[error("at {path}: no clause labelled `{label}`")]
    UnknownClause { path: SpinePath, label: Symbol },
    #[error("at {path}: `{label}` has {expected} premises but is applied to {found} proofs")]
    Arity { path: SpinePath, label: Symbol, expected: usize, found: usize },
    #[error("at {path}: `{by}` proves `{found}`, which does not unify with `{expected}`")]
    Mismatch { path: SpinePath, by: Symbol, expected: Atom, found: Atom },
    #[error("at {path}: lambda inside a proof spine")]
    NotFirstOrder { path: SpinePath },
    #[error("at {path}: assumption `{var}` is applied to arguments")]
    AssumptionApplied { path: SpinePath, var: Symbol },
    #[error("at {path}: proof variable `{var}` is not bound")]
    UnboundVariable { path: SpinePath, var: Symbol },
    #[error("proof abstracts {binders} assumptions but the formula has {premises} premises")]
    BinderCount { binders: usize, premises: usize },
}

/// One node of an accepted proof: the clause (or assumption) used and the
/// instance of it that was needed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub path: SpinePath,
    pub by: Symbol,
    pub formula: Formula,
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.by, self.path, self.formula)
    }
}

/// Successful check: instances used, in preorder over the spine.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Checked {
    pub instances: Vec<Instance>,
}

// Rigid variables of the formula under proof become constants whose names
// cannot be produced by the parser.
const RIGID: &str = "?";

fn rigidify(t: &Term) -> Term {
    match t {
        Term::Var(v) => Term::App(Symbol::from(format!("{RIGID}{v}")), Vec::new()),
        Term::App(f, args) => Term::App(f.clone(), args.iter().map(rigidify).collect()),
    }
}

fn rigidify_atom(a: &Atom) -> Atom {
    Atom { pred: a.pred.clone(), args: a.args.iter().map(rigidify).collect() }
}

fn flexify(t: &Term) -> Term {
    match t {
        Term::App(f, args) if args.is_empty() && f.as_str().starts_with(RIGID) => Term::var(&f.as_str()[RIGID.len()..]),
        Term::App(f, args) => Term::App(f.clone(), args.iter().map(flexify).collect()),
        Term::Var(_) => t.clone(),
    }
}

fn flexify_atom(a: &Atom) -> Atom {
    Atom { pred: a.pred.clone(), args: a.args.iter().map(flexify).collect() }
}

struct Checker<'p> {
    program: &'p Program,
    assumptions: BTreeMap<Symbol, Atom>,
    fresh: FreshSource,
    theta: Substitution,
    used: Vec<(SpinePath, Symbol, Vec<Atom>, Atom)>,
}

impl Checker<'_> {
    fn check(&mut self, n: &ProofTerm, target: &Atom, path: &mut Vec<usize>) -> Result<(), CheckError> {
        let (head, args) = n.as_spine();
        let here = || SpinePath(path.clone());
        match head {
            ProofTerm::Lam(..) => Err(CheckError::NotFirstOrder { path: here() }),
            ProofTerm::App(..) => unreachable!("spine head is never an application"),
            ProofTerm::Var(a) => {
                let Some(assumed) = self.assumptions.get(a).cloned() else {
                    return Err(CheckError::UnboundVariable { path: here(), var: a.clone() });
                };
                if !args.is_empty() {
                    return Err(CheckError::AssumptionApplied { path: here(), var: a.clone() });
                }
                self.resolve_against(a, &assumed, target, here())?;
                self.used.push((here(), a.clone(), Vec::new(), assumed));
                Ok(())
            }
            ProofTerm::Const(k) => {
                let clause = self
                    .program
                    .clause(k.as_str())
                    .ok_or_else(|| CheckError::UnknownClause { path: here(), label: k.clone() })?;
                if clause.body.len() != args.len() {
                    return Err(CheckError::Arity {
                        path: here(),
                        label: k.clone(),
                        expected: clause.body.len(),
                        found: args.len(),
                    });
                }
                let renamed = rename_with_generation(clause, self.fresh.next_generation());
                self.resolve_against(k, &renamed.head, target, here())?;
                self.used.push((here(), k.clone(), renamed.body.clone(), renamed.head.clone()));
                for (i, (arg, premise)) in args.into_iter().zip(&renamed.body).enumerate() {
                    path.push(i);
                    self.check(arg, premise, path)?;
                    path.pop();
                }
                Ok(())
            }
        }
    }

    fn resolve_against(&mut self, by: &Symbol, proved: &Atom, target: &Atom, path: SpinePath) -> Result<(), CheckError> {
        let expected = self.theta.apply_atom(target);
        let found = self.theta.apply_atom(proved);
        match unify(&found, &expected) {
            Some(g) => {
                self.theta = Substitution::compose(&g, &self.theta);
                Ok(())
            }
            None => Err(CheckError::Mismatch {
                path,
                by: by.clone(),
                expected: flexify_atom(&expected),
                found: flexify_atom(&found),
            }),
        }
    }

    fn finish(self) -> Checked {
        let theta = self.theta;
        let inst = |a: &Atom| flexify_atom(&theta.apply_atom(a));
        let instances = self
            .used
            .into_iter()
            .map(|(path, by, body, head)| Instance {
                path,
                by,
                formula: Formula { body: body.iter().map(inst).collect(), head: inst(&head) },
            })
            .collect();
        Checked { instances }
    }
}

fn new_checker<'p>(p: &'p Program, f: &Formula) -> Checker<'p> {
    let mut fresh = FreshSource::new();
    for a in f.body.iter().chain(std::iter::once(&f.head)) {
        fresh.witness_atom(a);
    }
    Checker { program: p, assumptions: BTreeMap::new(), fresh, theta: Substitution::new(), used: Vec::new() }
}

/// Checks `n : ⇒ a`. The proof is beta normalized first.
pub fn check_goal_proof(p: &Program, n: &ProofTerm, a: &Atom) -> Result<Checked, CheckError> {
    p.check_atom(a)?;
    let n = beta_normalize(n, DEFAULT_BETA_FUEL)?;
    let formula = Formula::goal(a.clone());
    let mut checker = new_checker(p, &formula);
    checker.check(&n, &rigidify_atom(a), &mut Vec::new())?;
    Ok(checker.finish())
}

/// Normalizes `e` to `λa1 … λan. n` for a formula with `premises` premises,
/// adding missing binders by eta expansion.
pub fn lambda_normal_form(e: &ProofTerm, premises: usize) -> Result<(Vec<Symbol>, ProofTerm), CheckError> {
    let normal = beta_normalize(e, DEFAULT_BETA_FUEL)?;
    let (binders, body) = normal.as_lambdas();
    if binders.len() > premises {
        return Err(CheckError::BinderCount { binders: binders.len(), premises });
    }
    let mut names: Vec<Symbol> = binders.into_iter().cloned().collect();
    let mut avoid = normal.free_vars();
    avoid.extend(names.iter().cloned());
    let mut spine = body.clone();
    while names.len() < premises {
        let v = fresh_name(&Symbol::new("a"), &avoid);
        avoid.insert(v.clone());
        spine = ProofTerm::app(spine, ProofTerm::Var(v.clone()));
        names.push(v);
    }
    Ok((names, spine))
}

/// Checks `e : A1, ..., An ⇒ B`. After normalization `e` must have the shape
/// `λa1 … λak. n` with `k ≤ n`; missing binders are supplied by eta
/// expansion. Each `ai` is then an assumption proving `Ai`.
pub fn check_clause_proof(p: &Program, e: &ProofTerm, f: &Formula) -> Result<Checked, CheckError> {
    for a in f.body.iter().chain(std::iter::once(&f.head)) {
        p.check_atom(a)?;
    }
    let (names, spine) = lambda_normal_form(e, f.body.len())?;
    let mut checker = new_checker(p, f);
    for (name, premise) in names.into_iter().zip(&f.body) {
        checker.assumptions.insert(name, rigidify_atom(premise));
    }
    checker.check(&spine, &rigidify_atom(&f.head), &mut Vec::new())?;
    Ok(checker.finish())
}
