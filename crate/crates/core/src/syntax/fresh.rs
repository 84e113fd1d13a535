use std::collections::HashMap;

use super::term::{Atom, HornClause, Symbol, Term};

/// Source of variable names that are unused in the current derivation.
///
/// Generated names have the shape `<base>_<n>` where `n` is strictly larger
/// than every numeric suffix the source has witnessed, so they cannot collide
/// with witnessed names or with each other.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreshSource {
    counter: u64,
}

impl Default for FreshSource {
    fn default() -> Self {
        FreshSource { counter: 1 }
    }
}

impl FreshSource {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    pub fn witness_name(&mut self, name: &str) {
        if let Some((_, suffix)) = name.rsplit_once('_') {
            if let Ok(n) = suffix.parse::<u64>() {
                self.counter = self.counter.max(n.saturating_add(1));
            }
        }
    }

    pub fn witness_term(&mut self, t: &Term) {
        for v in t.vars() {
            self.witness_name(v.as_str());
        }
    }

    pub fn witness_atom(&mut self, a: &Atom) {
        a.args.iter().for_each(|t| self.witness_term(t));
    }

    pub fn witness_clause(&mut self, c: &HornClause) {
        for v in c.vars() {
            self.witness_name(v.as_str());
        }
    }

    /// Claims the next generation number.
    pub fn next_generation(&mut self) -> u64 {
        let n = self.counter;
        self.counter += 1;
        n
    }

    pub fn fresh(&mut self, base: &str) -> Symbol {
        let n = self.next_generation();
        Symbol::from(format!("{base}_{n}"))
    }
}

pub(crate) fn renamed(v: &Symbol, generation: u64) -> Symbol {
    Symbol::from(format!("{v}_{generation}"))
}

pub(crate) fn rename_with_generation(c: &HornClause, generation: u64) -> HornClause {
    let map: HashMap<Symbol, Symbol> = c.vars().into_iter().map(|v| {
        let r = renamed(&v, generation);
        (v, r)
    }).collect();
    c.rename_vars(&map)
}

/// Returns an alpha-variant of `c` whose variables are disjoint from
/// everything `fs` has witnessed, advancing `fs`.
pub fn rename_apart(c: &HornClause, fs: &mut FreshSource) -> HornClause {
    let generation = fs.next_generation();
    rename_with_generation(c, generation)
}
