use std::collections::BTreeMap;
use std::fmt;

use super::term::{Atom, Goal, Symbol, Term};

/// A finite map from variables to terms. Bindings `x ↦ x` are never stored.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Substitution {
    bindings: BTreeMap<Symbol, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(v: Symbol, t: Term) -> Self {
        let mut s = Self::new();
        s.insert(v, t);
        s
    }

    pub fn from_pairs<I: IntoIterator<Item = (Symbol, Term)>>(pairs: I) -> Self {
        let mut s = Self::new();
        for (v, t) in pairs {
            s.insert(v, t);
        }
        s
    }

    /// Raw insertion; drops identity bindings. Does not restore idempotence.
    pub(crate) fn insert(&mut self, v: Symbol, t: Term) {
        if t.as_var() == Some(&v) {
            self.bindings.remove(&v);
        } else {
            self.bindings.insert(v, t);
        }
    }

    pub fn get(&self, v: &str) -> Option<&Term> {
        self.bindings.get(v)
    }

    pub fn contains(&self, v: &str) -> bool {
        self.bindings.contains_key(v)
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Symbol, &Term)> {
        self.bindings.iter()
    }

    pub fn domain(&self) -> impl Iterator<Item = &Symbol> {
        self.bindings.keys()
    }

    pub fn apply(&self, t: &Term) -> Term {
        if self.is_empty() {
            return t.clone();
        }
        match t {
            Term::Var(v) => self.bindings.get(v).cloned().unwrap_or_else(|| t.clone()),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| self.apply(a)).collect()),
        }
    }

    pub fn apply_atom(&self, a: &Atom) -> Atom {
        Atom { pred: a.pred.clone(), args: a.args.iter().map(|t| self.apply(t)).collect() }
    }

    pub fn apply_goal(&self, g: &Goal) -> Goal {
        Goal(g.0.iter().map(|a| self.apply_atom(a)).collect())
    }

    /// The substitution equivalent to applying `inner` first, then `outer`.
    pub fn compose(outer: &Substitution, inner: &Substitution) -> Substitution {
        let mut out = Substitution::new();
        for (v, t) in &inner.bindings {
            out.insert(v.clone(), outer.apply(t));
        }
        for (v, t) in &outer.bindings {
            if !inner.bindings.contains_key(v) {
                out.insert(v.clone(), t.clone());
            }
        }
        out
    }

    /// Extends an idempotent substitution with `v ↦ t` (where `t` is already
    /// fully substituted and does not mention `v`), keeping it idempotent.
    pub(crate) fn bind_resolved(&mut self, v: Symbol, t: Term) {
        let single = Substitution::singleton(v.clone(), t.clone());
        for range in self.bindings.values_mut() {
            if range.occurs(&v) {
                *range = single.apply(range);
            }
        }
        self.bindings.retain(|k, r| r.as_var() != Some(k));
        self.insert(v, t);
    }

    pub fn restrict<'a, I: IntoIterator<Item = &'a Symbol>>(&self, vars: I) -> Substitution {
        let mut out = Substitution::new();
        for v in vars {
            if let Some(t) = self.bindings.get(v) {
                out.insert(v.clone(), t.clone());
            }
        }
        out
    }

    pub fn is_idempotent(&self) -> bool {
        self.bindings.values().all(|t| self.apply(t) == *t)
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, (v, t)) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v} = {t}")?;
        }
        f.write_str("]")
    }
}
