//! Static checks for the conditions under which structural resolution and
//! SLD resolution agree: heads that never overlap, and productivity (every
//! term-matching reduction is finite).
//!
//! Productivity is undecidable. [`certify_productive`] looks for a sound
//! sufficient condition and [`probe_productivity`] runs a bounded test.

use std::collections::BTreeMap;
use std::fmt;

use crate::reduction::{tm_normalize, EngineState};
use crate::syntax::{rename_with_generation, Atom, Goal, HornClause, Program, Substitution, Symbol, Term};
use crate::unify::unify;

/// Two clause heads with a common instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Overlap {
    pub first: Symbol,
    pub second: Symbol,
    /// Unifier of the renamed-apart heads.
    pub unifier: Substitution,
    /// The common instance.
    pub instance: Atom,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OverlapReport {
    /// Distinct clauses whose heads unify.
    pub violations: Vec<Overlap>,
    /// A clause against a renamed copy of itself. Every clause unifies with
    /// its own copy, so these never count against certification.
    pub self_overlaps: Vec<Symbol>,
}

impl OverlapReport {
    pub fn is_certified(&self) -> bool {
        self.violations.is_empty()
    }
}

fn renamed_heads(a: &HornClause, b: &HornClause) -> (Atom, Atom) {
    (rename_with_generation(a, 1).head, rename_with_generation(b, 2).head)
}

pub fn check_non_overlapping(p: &Program) -> OverlapReport {
    let clauses = p.clauses();
    let mut report = OverlapReport::default();
    for (i, a) in clauses.iter().enumerate() {
        let (h1, h2) = renamed_heads(a, a);
        if unify(&h1, &h2).is_some() {
            report.self_overlaps.push(a.label.clone());
        }
        for b in &clauses[i + 1..] {
            let (ha, hb) = renamed_heads(a, b);
            if let Some(unifier) = unify(&ha, &hb) {
                let instance = unifier.apply_atom(&ha);
                report.violations.push(Overlap { first: a.label.clone(), second: b.label.clone(), unifier, instance });
            }
        }
    }
    report
}

/// A predicate, identified by name and arity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredicateKey {
    pub name: Symbol,
    pub arity: usize,
}

impl fmt::Display for PredicateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

impl PredicateKey {
    fn of(a: &Atom) -> PredicateKey {
        PredicateKey { name: a.pred.clone(), arity: a.arity() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProductivityCertificate {
    /// For each predicate (that occurs in a rule), an argument position such
    /// that in every rule each body atom's argument at its position is a
    /// strict subterm of the head's argument at its position. Positions are
    /// 0-based.
    MeasureFound { positions: BTreeMap<String, usize> },
    Unknown { reason: String },
    ProbedDivergent { query: String, steps: usize },
}

impl ProductivityCertificate {
    pub fn is_measure(&self) -> bool {
        matches!(self, ProductivityCertificate::MeasureFound { .. })
    }
}

const SEARCH_LIMIT: usize = 1_000_000;

struct MeasureSearch<'a> {
    preds: Vec<PredicateKey>,
    rules: Vec<&'a HornClause>,
    // rules whose predicates are all assigned once predicate `i` is
    rules_ready_at: Vec<Vec<usize>>,
    choice: Vec<usize>,
    visited: usize,
}

impl MeasureSearch<'_> {
    fn pos_of(&self, a: &Atom) -> usize {
        let i = self.preds.binary_search(&PredicateKey::of(a)).expect("collected predicate");
        self.choice[i]
    }

    fn rule_ok(&self, c: &HornClause) -> bool {
        let head = &c.head.args[self.pos_of(&c.head)];
        c.body.iter().all(|b| b.args[self.pos_of(b)].is_strict_subterm_of(head))
    }

    fn search(&mut self, i: usize) -> Result<bool, ()> {
        if i == self.preds.len() {
            return Ok(true);
        }
        // try the rightmost position first
        for pos in (0..self.preds[i].arity).rev() {
            self.visited += 1;
            if self.visited > SEARCH_LIMIT {
                return Err(());
            }
            self.choice[i] = pos;
            let ready = self.rules_ready_at[i].clone();
            if ready.iter().all(|&r| self.rule_ok(self.rules[r])) && self.search(i + 1)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Searches for an argument-position measure that strictly decreases along
/// every term-matching step. Facts impose no constraint.
pub fn certify_productive(p: &Program) -> ProductivityCertificate {
    let rules: Vec<&HornClause> = p.clauses().iter().filter(|c| !c.is_fact()).collect();
    let mut preds: Vec<PredicateKey> = rules
        .iter()
        .flat_map(|c| std::iter::once(&c.head).chain(&c.body))
        .map(PredicateKey::of)
        .collect();
    preds.sort();
    preds.dedup();
    if let Some(k) = preds.iter().find(|k| k.arity == 0) {
        return ProductivityCertificate::Unknown {
            reason: format!("predicate {k} has no arguments and occurs in a rule"),
        };
    }
    let mut rules_ready_at = vec![Vec::new(); preds.len()];
    for (r, c) in rules.iter().enumerate() {
        let last = std::iter::once(&c.head)
            .chain(&c.body)
            .map(|a| preds.binary_search(&PredicateKey::of(a)).expect("collected predicate"))
            .max()
            .expect("rule has a head");
        rules_ready_at[last].push(r);
    }
    let n = preds.len();
    let mut search = MeasureSearch { preds, rules, rules_ready_at, choice: vec![0; n], visited: 0 };
    match search.search(0) {
        Ok(true) => ProductivityCertificate::MeasureFound {
            positions: search.preds.iter().zip(&search.choice).map(|(k, &pos)| (k.to_string(), pos)).collect(),
        },
        Ok(false) => ProductivityCertificate::Unknown {
            reason: "no argument position decreases by strict subterm in every rule".into(),
        },
        Err(()) => ProductivityCertificate::Unknown { reason: "measure search limit reached".into() },
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProbeResult {
    Terminated { steps: usize },
    ProbedDivergent { steps: usize },
}

/// Term-matching normalization of `{query}` within `tm_fuel` steps.
pub fn probe_productivity(p: &Program, query: &Atom, tm_fuel: usize) -> ProbeResult {
    let g = Goal::single(query.clone());
    match tm_normalize(p, &g, &EngineState::for_goal(&g), tm_fuel) {
        Ok(run) => ProbeResult::Terminated { steps: run.trace.len() },
        Err(d) => ProbeResult::ProbedDivergent { steps: d.0.trace.len() },
    }
}

/// Runs the probe on `query` and turns a divergence into a certificate.
pub fn probe_certificate(p: &Program, query: &Atom, tm_fuel: usize) -> Option<ProductivityCertificate> {
    match probe_productivity(p, query, tm_fuel) {
        ProbeResult::ProbedDivergent { steps } => {
            Some(ProductivityCertificate::ProbedDivergent { query: query.to_string(), steps })
        }
        ProbeResult::Terminated { .. } => None,
    }
}

/// Rechecks the measure condition of a certificate on one clause.
pub fn measure_decreases(c: &HornClause, positions: &BTreeMap<String, usize>) -> bool {
    let pos = |a: &Atom| positions.get(&PredicateKey::of(a).to_string()).copied();
    let Some(hp) = pos(&c.head) else { return c.is_fact() };
    let head: &Term = &c.head.args[hp];
    c.body.iter().all(|b| pos(b).is_some_and(|bp| b.args[bp].is_strict_subterm_of(head)))
}
