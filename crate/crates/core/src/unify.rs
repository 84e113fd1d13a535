//! Most-general unification (with occurs check) and one-way matching.

use std::collections::BTreeMap;

use crate::syntax::{Atom, Substitution, Symbol, Term};

/// Computes an idempotent most general unifier of two atoms.
///
/// Arguments are solved left to right. When two variables meet, the one from
/// `a` is bound to the one from `b`; engines pass the renamed clause head as
/// `a` so clause variables are bound to goal variables.
pub fn unify(a: &Atom, b: &Atom) -> Option<Substitution> {
    if !a.same_predicate(b) {
        return None;
    }
    let mut s = Substitution::new();
    for (x, y) in a.args.iter().zip(&b.args) {
        unify_into(&mut s, x, y)?;
    }
    Some(s)
}

pub fn unify_terms(a: &Term, b: &Term) -> Option<Substitution> {
    let mut s = Substitution::new();
    unify_into(&mut s, a, b)?;
    Some(s)
}

fn unify_into(s: &mut Substitution, a: &Term, b: &Term) -> Option<()> {
    let (a, b) = (s.apply(a), s.apply(b));
    match (&a, &b) {
        _ if a == b => Some(()),
        (Term::Var(x), t) | (t, Term::Var(x)) => {
            if t.occurs(x) {
                return None;
            }
            s.bind_resolved(x.clone(), t.clone());
            Some(())
        }
        (Term::App(f, xs), Term::App(g, ys)) => {
            if f != g || xs.len() != ys.len() {
                return None;
            }
            for (x, y) in xs.iter().zip(ys) {
                unify_into(s, x, y)?;
            }
            Some(())
        }
    }
}

/// Finds `σ` with `σ(pattern) = target`, binding only pattern variables.
pub fn match_atom(pattern: &Atom, target: &Atom) -> Option<Substitution> {
    if !pattern.same_predicate(target) {
        return None;
    }
    let mut m = BTreeMap::new();
    for (p, t) in pattern.args.iter().zip(&target.args) {
        match_into(&mut m, p, t)?;
    }
    Some(Substitution::from_pairs(m))
}

pub fn match_term(pattern: &Term, target: &Term) -> Option<Substitution> {
    let mut m = BTreeMap::new();
    match_into(&mut m, pattern, target)?;
    Some(Substitution::from_pairs(m))
}

fn match_into(m: &mut BTreeMap<Symbol, Term>, p: &Term, t: &Term) -> Option<()> {
    match (p, t) {
        (Term::Var(x), _) => match m.get(x) {
            Some(bound) => (bound == t).then_some(()),
            None => {
                m.insert(x.clone(), t.clone());
                Some(())
            }
        },
        (Term::App(f, ps), Term::App(g, ts)) => {
            if f != g || ps.len() != ts.len() {
                return None;
            }
            for (p, t) in ps.iter().zip(ts) {
                match_into(m, p, t)?;
            }
            Some(())
        }
        (Term::App(..), Term::Var(_)) => None,
    }
}
