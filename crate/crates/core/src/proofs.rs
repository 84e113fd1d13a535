//! Proof terms (`κ | a | λa.e | e e'`), beta normalization, and the encoding
//! of first-order normal proofs as first-order terms over witness symbols.
//!
//! Convention: the proof of a clause application is the clause constant
//! applied to the proofs of its premises in body order, `κ p1 … pn`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::syntax::{witness_label, witness_symbol, Program, Symbol, Term};

pub const DEFAULT_BETA_FUEL: usize = 100_000;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum ProofTerm {
    /// A clause label used as an axiom.
    Const(Symbol),
    Var(Symbol),
    Lam(Symbol, Box<ProofTerm>),
    App(Box<ProofTerm>, Box<ProofTerm>),
}

/// Maps proof variables to the first-order terms that stand for them.
pub type ProofVarEnv = BTreeMap<Symbol, Term>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProofError {
    #[error("beta normalization did not finish within {0} steps")]
    FuelExhausted(usize),
    #[error("proof term is not first order (contains a lambda)")]
    NotFirstOrder,
    #[error("proof variable `{0}` is applied to arguments")]
    VariableHead(Symbol),
    #[error("proof variable `{0}` has no first-order representation")]
    Unmapped(Symbol),
    #[error("`{0}` is not a proof-witness symbol of this program")]
    NotWitness(Symbol),
    #[error("witness `{symbol}` has {found} arguments, clause has {expected} premises")]
    WitnessArity { symbol: Symbol, expected: usize, found: usize },
}

impl ProofTerm {
    pub fn constant(label: &str) -> ProofTerm {
        ProofTerm::Const(Symbol::new(label))
    }

    pub fn var(name: &str) -> ProofTerm {
        ProofTerm::Var(Symbol::new(name))
    }

    pub fn lam(binder: &str, body: ProofTerm) -> ProofTerm {
        ProofTerm::Lam(Symbol::new(binder), Box::new(body))
    }

    pub fn app(f: ProofTerm, a: ProofTerm) -> ProofTerm {
        ProofTerm::App(Box::new(f), Box::new(a))
    }

    /// Left-nested application `head a1 … an`.
    pub fn spine(head: ProofTerm, args: impl IntoIterator<Item = ProofTerm>) -> ProofTerm {
        args.into_iter().fold(head, ProofTerm::app)
    }

    /// Splits `h a1 … an` into its head and arguments.
    pub fn as_spine(&self) -> (&ProofTerm, Vec<&ProofTerm>) {
        let mut args = Vec::new();
        let mut cur = self;
        while let ProofTerm::App(f, a) = cur {
            args.push(&**a);
            cur = f;
        }
        args.reverse();
        (cur, args)
    }

    /// Strips a prefix of lambdas.
    pub fn as_lambdas(&self) -> (Vec<&Symbol>, &ProofTerm) {
        let mut binders = Vec::new();
        let mut cur = self;
        while let ProofTerm::Lam(b, body) = cur {
            binders.push(b);
            cur = body;
        }
        (binders, cur)
    }

    pub fn free_vars(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Symbol>, out: &mut BTreeSet<Symbol>) {
        match self {
            ProofTerm::Const(_) => {}
            ProofTerm::Var(v) => {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
            ProofTerm::Lam(b, body) => {
                bound.push(b.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            ProofTerm::App(f, a) => {
                f.collect_free(bound, out);
                a.collect_free(bound, out);
            }
        }
    }

    fn names(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            ProofTerm::Const(_) => {}
            ProofTerm::Var(v) => {
                out.insert(v.clone());
            }
            ProofTerm::Lam(b, body) => {
                out.insert(b.clone());
                body.names(out);
            }
            ProofTerm::App(f, a) => {
                f.names(out);
                a.names(out);
            }
        }
    }

    pub fn constants(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_constants(&mut out);
        out
    }

    fn collect_constants(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            ProofTerm::Const(c) => {
                out.insert(c.clone());
            }
            ProofTerm::Var(_) => {}
            ProofTerm::Lam(_, body) => body.collect_constants(out),
            ProofTerm::App(f, a) => {
                f.collect_constants(out);
                a.collect_constants(out);
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            ProofTerm::Const(_) | ProofTerm::Var(_) => 1,
            ProofTerm::Lam(_, b) => 1 + b.size(),
            ProofTerm::App(f, a) => 1 + f.size() + a.size(),
        }
    }

    pub fn is_normal(&self) -> bool {
        match self {
            ProofTerm::Const(_) | ProofTerm::Var(_) => true,
            ProofTerm::Lam(_, b) => b.is_normal(),
            ProofTerm::App(f, a) => !matches!(**f, ProofTerm::Lam(..)) && f.is_normal() && a.is_normal(),
        }
    }
}

/// Built from constants, variables and applications only.
pub fn is_first_order(e: &ProofTerm) -> bool {
    match e {
        ProofTerm::Const(_) | ProofTerm::Var(_) => true,
        ProofTerm::Lam(..) => false,
        ProofTerm::App(f, a) => is_first_order(f) && is_first_order(a),
    }
}

/// Capture-avoiding substitution `[arg/var]body`.
pub fn substitute(body: &ProofTerm, var: &Symbol, arg: &ProofTerm) -> ProofTerm {
    let arg_free = arg.free_vars();
    subst_rec(body, var, arg, &arg_free)
}

fn subst_rec(body: &ProofTerm, var: &Symbol, arg: &ProofTerm, arg_free: &BTreeSet<Symbol>) -> ProofTerm {
    match body {
        ProofTerm::Var(v) if v == var => arg.clone(),
        ProofTerm::Var(_) | ProofTerm::Const(_) => body.clone(),
        ProofTerm::App(f, a) => ProofTerm::app(subst_rec(f, var, arg, arg_free), subst_rec(a, var, arg, arg_free)),
        ProofTerm::Lam(b, inner) => {
            if b == var || !inner.free_vars().contains(var) {
                return body.clone();
            }
            if arg_free.contains(b) {
                let mut avoid = BTreeSet::new();
                inner.names(&mut avoid);
                avoid.extend(arg_free.iter().cloned());
                avoid.insert(var.clone());
                let fresh = fresh_name(b, &avoid);
                let renamed = substitute(inner, b, &ProofTerm::Var(fresh.clone()));
                ProofTerm::Lam(fresh, Box::new(subst_rec(&renamed, var, arg, arg_free)))
            } else {
                ProofTerm::Lam(b.clone(), Box::new(subst_rec(inner, var, arg, arg_free)))
            }
        }
    }
}

pub(crate) fn fresh_name(base: &Symbol, avoid: &BTreeSet<Symbol>) -> Symbol {
    (1..)
        .map(|n| Symbol::from(format!("{base}{n}")))
        .find(|s| !avoid.contains(s))
        .expect("unbounded supply")
}

/// One leftmost-outermost beta step, if the term has a redex.
pub fn beta_step(e: &ProofTerm) -> Option<ProofTerm> {
    match e {
        ProofTerm::App(f, a) => {
            if let ProofTerm::Lam(b, body) = &**f {
                return Some(substitute(body, b, a));
            }
            if let Some(f2) = beta_step(f) {
                return Some(ProofTerm::App(Box::new(f2), a.clone()));
            }
            beta_step(a).map(|a2| ProofTerm::App(f.clone(), Box::new(a2)))
        }
        ProofTerm::Lam(b, body) => beta_step(body).map(|body| ProofTerm::Lam(b.clone(), Box::new(body))),
        ProofTerm::Const(_) | ProofTerm::Var(_) => None,
    }
}

/// Normalizes by repeated leftmost-outermost contraction.
pub fn beta_normalize(e: &ProofTerm, fuel: usize) -> Result<ProofTerm, ProofError> {
    let mut cur = e.clone();
    for _ in 0..fuel {
        match beta_step(&cur) {
            Some(next) => cur = next,
            None => return Ok(cur),
        }
    }
    if cur.is_normal() {
        Ok(cur)
    } else {
        Err(ProofError::FuelExhausted(fuel))
    }
}

/// The first-order term encoding `⟦n⟧φ` of a first-order normal proof.
pub fn represent(n: &ProofTerm, env: &ProofVarEnv) -> Result<Term, ProofError> {
    let (head, args) = n.as_spine();
    match head {
        ProofTerm::Lam(..) => Err(ProofError::NotFirstOrder),
        ProofTerm::App(..) => unreachable!("spine head is never an application"),
        ProofTerm::Var(a) => {
            if !args.is_empty() {
                return Err(ProofError::VariableHead(a.clone()));
            }
            env.get(a).cloned().ok_or_else(|| ProofError::Unmapped(a.clone()))
        }
        ProofTerm::Const(k) => {
            let args = args.into_iter().map(|p| represent(p, env)).collect::<Result<Vec<_>, _>>()?;
            Ok(Term::App(witness_symbol(k.as_str(), args.len()), args))
        }
    }
}

/// Decodes a witness term back into a proof. Term variables become free proof
/// variables of the same name.
pub fn unrepresent(t: &Term, p: &Program) -> Result<ProofTerm, ProofError> {
    match t {
        Term::Var(v) => Ok(ProofTerm::Var(v.clone())),
        Term::App(f, args) => {
            let Some((label, is_fn)) = witness_label(f.as_str()) else {
                return Err(ProofError::NotWitness(f.clone()));
            };
            let clause = p.clause(label).ok_or_else(|| ProofError::NotWitness(f.clone()))?;
            let premises = clause.body.len();
            if is_fn != (premises > 0) || premises != args.len() {
                return Err(ProofError::WitnessArity { symbol: f.clone(), expected: premises, found: args.len() });
            }
            let args = args.iter().map(|a| unrepresent(a, p)).collect::<Result<Vec<_>, _>>()?;
            Ok(ProofTerm::spine(ProofTerm::Const(clause.label.clone()), args))
        }
    }
}

/// The cut rule's proof: from `e1 : A1..An ⇒ D` and `e2 : B1..Bm, D ⇒ C`
/// builds `λa1..an. λb1..bm. (e2 b1..bm) (e1 a1..an)`.
pub fn cut(e1: &ProofTerm, premises1: usize, e2: &ProofTerm, premises2: usize) -> ProofTerm {
    let mut avoid = BTreeSet::new();
    e1.names(&mut avoid);
    e2.names(&mut avoid);
    let mut fresh = |base: &str| {
        let s = fresh_name(&Symbol::new(base), &avoid);
        avoid.insert(s.clone());
        s
    };
    let a: Vec<Symbol> = (0..premises1).map(|_| fresh("a")).collect();
    let b: Vec<Symbol> = (0..premises2).map(|_| fresh("b")).collect();
    let left = ProofTerm::spine(e2.clone(), b.iter().cloned().map(ProofTerm::Var));
    let right = ProofTerm::spine(e1.clone(), a.iter().cloned().map(ProofTerm::Var));
    let body = ProofTerm::app(left, right);
    a.iter().chain(&b).rev().fold(body, |acc, v| ProofTerm::Lam(v.clone(), Box::new(acc)))
}

// Printing: `\a. e` for abstraction, juxtaposition for application. Free
// variables are written `?a` so they read back as variables, not constants.
impl fmt::Display for ProofTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_proof(f, self, &mut Vec::new(), Ctx::Top)
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Ctx {
    Top,
    Fun,
    Arg,
}

fn write_proof(f: &mut fmt::Formatter<'_>, e: &ProofTerm, bound: &mut Vec<Symbol>, ctx: Ctx) -> fmt::Result {
    match e {
        ProofTerm::Const(c) => write!(f, "{c}"),
        ProofTerm::Var(v) if bound.contains(v) => write!(f, "{v}"),
        ProofTerm::Var(v) => write!(f, "?{v}"),
        ProofTerm::Lam(b, body) => {
            if ctx != Ctx::Top {
                f.write_str("(")?;
            }
            write!(f, "\\{b}. ")?;
            bound.push(b.clone());
            write_proof(f, body, bound, Ctx::Top)?;
            bound.pop();
            if ctx != Ctx::Top {
                f.write_str(")")?;
            }
            Ok(())
        }
        ProofTerm::App(fun, arg) => {
            if ctx == Ctx::Arg {
                f.write_str("(")?;
            }
            write_proof(f, fun, bound, Ctx::Fun)?;
            f.write_str(" ")?;
            write_proof(f, arg, bound, Ctx::Arg)?;
            if ctx == Ctx::Arg {
                f.write_str(")")?;
            }
            Ok(())
        }
    }
}
