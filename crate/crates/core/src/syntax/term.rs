use std::borrow::Borrow;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// An immutable, cheaply clonable identifier used for variables, function
/// symbols, predicates and clause labels.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

impl From<String> for Symbol {
    fn from(s: String) -> Self {
        Symbol(Arc::from(s))
    }
}

impl Borrow<str> for Symbol {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for Symbol {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Symbol {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d).map(Symbol::from)
    }
}

/// A first-order term: a variable or a function symbol applied to arguments.
/// Constants are zero-arity applications.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Term {
    Var(Symbol),
    App(Symbol, Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Symbol::new(name))
    }

    pub fn constant(name: &str) -> Term {
        Term::App(Symbol::new(name), Vec::new())
    }

    pub fn app(name: &str, args: Vec<Term>) -> Term {
        Term::App(Symbol::new(name), args)
    }

    pub fn as_var(&self) -> Option<&Symbol> {
        match self {
            Term::Var(v) => Some(v),
            Term::App(..) => None,
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    pub fn occurs(&self, v: &Symbol) -> bool {
        match self {
            Term::Var(w) => w == v,
            Term::App(_, args) => args.iter().any(|a| a.occurs(v)),
        }
    }

    /// Pushes variables in order of first occurrence, skipping duplicates.
    pub fn collect_vars(&self, out: &mut Vec<Symbol>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn vars(&self) -> Vec<Symbol> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    /// True when `self` occurs inside `other` at a non-root position.
    pub fn is_strict_subterm_of(&self, other: &Term) -> bool {
        match other {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().any(|a| a == self || self.is_strict_subterm_of(a)),
        }
    }

    pub(crate) fn collect_functions(&self, out: &mut Vec<(Symbol, usize)>) {
        if let Term::App(f, args) = self {
            out.push((f.clone(), args.len()));
            args.iter().for_each(|a| a.collect_functions(out));
        }
    }

    pub fn rename_vars(&self, map: &HashMap<Symbol, Symbol>) -> Term {
        match self {
            Term::Var(v) => Term::Var(map.get(v).cloned().unwrap_or_else(|| v.clone())),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.rename_vars(map)).collect()),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::App(name, args) => {
                write!(f, "{name}")?;
                write_args(f, args)
            }
        }
    }
}

fn write_args(f: &mut fmt::Formatter<'_>, args: &[Term]) -> fmt::Result {
    if args.is_empty() {
        return Ok(());
    }
    f.write_str("(")?;
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{a}")?;
    }
    f.write_str(")")
}

/// An atomic formula `P(t1, ..., tn)`. Predicates are identified by name and
/// arity together.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Atom {
    pub pred: Symbol,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(pred: &str, args: Vec<Term>) -> Atom {
        Atom { pred: Symbol::new(pred), args }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn same_predicate(&self, other: &Atom) -> bool {
        self.pred == other.pred && self.args.len() == other.args.len()
    }

    pub fn collect_vars(&self, out: &mut Vec<Symbol>) {
        self.args.iter().for_each(|a| a.collect_vars(out));
    }

    pub fn vars(&self) -> Vec<Symbol> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn rename_vars(&self, map: &HashMap<Symbol, Symbol>) -> Atom {
        Atom { pred: self.pred.clone(), args: self.args.iter().map(|a| a.rename_vars(map)).collect() }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pred)?;
        write_args(f, &self.args)
    }
}

/// Appends `t` as a new trailing argument, producing the arity n+1 variant of
/// the predicate.
pub fn extend_atom(a: &Atom, t: Term) -> Atom {
    let mut args = a.args.clone();
    args.push(t);
    Atom { pred: a.pred.clone(), args }
}

/// A labelled Horn clause `label: head <= body`. Every variable is implicitly
/// universally quantified.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct HornClause {
    pub label: Symbol,
    pub head: Atom,
    pub body: Vec<Atom>,
}

impl HornClause {
    pub fn new(label: &str, head: Atom, body: Vec<Atom>) -> HornClause {
        HornClause { label: Symbol::new(label), head, body }
    }

    pub fn is_fact(&self) -> bool {
        self.body.is_empty()
    }

    pub fn vars(&self) -> Vec<Symbol> {
        let mut out = Vec::new();
        self.head.collect_vars(&mut out);
        self.body.iter().for_each(|b| b.collect_vars(&mut out));
        out
    }

    pub fn rename_vars(&self, map: &HashMap<Symbol, Symbol>) -> HornClause {
        HornClause {
            label: self.label.clone(),
            head: self.head.rename_vars(map),
            body: self.body.iter().map(|b| b.rename_vars(map)).collect(),
        }
    }

    /// Structural equality after canonical renaming of variables.
    pub fn is_variant_of(&self, other: &HornClause) -> bool {
        if self.label != other.label || self.body.len() != other.body.len() {
            return false;
        }
        let mine: Vec<&Atom> = std::iter::once(&self.head).chain(&self.body).collect();
        let theirs: Vec<&Atom> = std::iter::once(&other.head).chain(&other.body).collect();
        atoms_are_variants(&mine, &theirs)
    }
}

impl fmt::Display for HornClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.label, self.head)?;
        for (i, b) in self.body.iter().enumerate() {
            f.write_str(if i == 0 { " <= " } else { ", " })?;
            write!(f, "{b}")?;
        }
        f.write_str(".")
    }
}

/// A goal: an ordered sequence of atoms. Order fixes the selection rule.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Goal(pub Vec<Atom>);

impl Goal {
    pub fn new(atoms: Vec<Atom>) -> Goal {
        Goal(atoms)
    }

    pub fn single(a: Atom) -> Goal {
        Goal(vec![a])
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn vars(&self) -> Vec<Symbol> {
        let mut out = Vec::new();
        self.0.iter().for_each(|a| a.collect_vars(&mut out));
        out
    }

    /// Equality up to a consistent renaming of variables.
    pub fn is_variant_of(&self, other: &Goal) -> bool {
        let mine: Vec<&Atom> = self.0.iter().collect();
        let theirs: Vec<&Atom> = other.0.iter().collect();
        atoms_are_variants(&mine, &theirs)
    }
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str("}")
    }
}

/// Renames variables by order of first occurrence (`_0`, `_1`, ...), so two
/// structures are alpha-equivalent iff their canonical forms are equal.
#[derive(Default)]
pub struct Canonicalizer {
    map: HashMap<Symbol, Symbol>,
}

impl Canonicalizer {
    pub fn term(&mut self, t: &Term) -> Term {
        match t {
            Term::Var(v) => {
                let next = self.map.len();
                Term::Var(self.map.entry(v.clone()).or_insert_with(|| Symbol::from(format!("_{next}"))).clone())
            }
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| self.term(a)).collect()),
        }
    }

    pub fn atom(&mut self, a: &Atom) -> Atom {
        Atom { pred: a.pred.clone(), args: a.args.iter().map(|t| self.term(t)).collect() }
    }
}

fn atoms_are_variants(a: &[&Atom], b: &[&Atom]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let (mut ca, mut cb) = (Canonicalizer::default(), Canonicalizer::default());
    a.iter().zip(b).all(|(x, y)| ca.atom(x) == cb.atom(y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extend_atom_appends_trailing_argument() {
        let eq = Atom::new("eq", vec![Term::app("list", vec![Term::constant("char")])]);
        assert_eq!(extend_atom(&eq, Term::var("U")).to_string(), "eq(list(char), U)");

        let p = Atom::new("p", vec![]);
        let ext = extend_atom(&p, Term::constant("c"));
        assert_eq!(ext.arity(), 1);
        assert!(!ext.same_predicate(&p));

        let conn = Atom::new("connect", vec![Term::var("X"), Term::var("Z")]);
        let w = Term::app("pf_k1", vec![Term::var("U1"), Term::var("U2")]);
        assert_eq!(extend_atom(&conn, w).to_string(), "connect(X, Z, pf_k1(U1, U2))");
    }

    #[test]
    fn strict_subterm() {
        let x = Term::var("X");
        let t = Term::app("cons", vec![x.clone(), Term::var("Y")]);
        assert!(x.is_strict_subterm_of(&t));
        assert!(!t.is_strict_subterm_of(&t));
        assert!(!x.is_strict_subterm_of(&x));
    }

    #[test]
    fn goal_variants() {
        let g1 = Goal::new(vec![Atom::new("q", vec![Term::var("X_1")])]);
        let g2 = Goal::new(vec![Atom::new("q", vec![Term::var("X")])]);
        let g3 = Goal::new(vec![Atom::new("q", vec![Term::constant("x")])]);
        assert!(g1.is_variant_of(&g2));
        assert!(!g1.is_variant_of(&g3));

        let two = |a: &str, b: &str| Goal::new(vec![Atom::new("p", vec![Term::var(a), Term::var(b)])]);
        assert!(two("A", "B").is_variant_of(&two("X", "Y")));
        assert!(!two("A", "A").is_variant_of(&two("X", "Y")));
    }
}
