//! Random programs, queries, terms and derivations over a small fixed
//! signature, and the property checks run over them.
#![allow(dead_code)]

use std::collections::BTreeSet;

use horn_core::analysis::{certify_productive, check_non_overlapping};
use horn_core::realizability::{transform_program, ProofOutcome, ProofSearch, Verdict};
use horn_core::syntax::{rename_apart, Canonicalizer};
use horn_core::typecheck::check_goal_proof;
use horn_core::unify::unify_terms;
use horn_core::{
    represent, solve, Atom, FreshSource, HornClause, Outcome, Program, ProofTerm, ProofVarEnv, SearchConfig,
    Strategy, Substitution, Symbol, Term,
};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

const PREDS: &[(&str, usize)] = &[("p", 1), ("q", 1), ("r", 2)];
const FUNS: &[(&str, usize)] = &[("a", 0), ("b", 0), ("f", 1), ("g", 2)];
const VARS: &[&str] = &["X", "Y", "Z"];

// Clauses such as `p(Y) <= p(g(Y, Y))` double term size with every step, so
// searches are kept shallow.
const FUEL: usize = 150;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn term(rng: &mut StdRng, depth: usize, vars: &[&str]) -> Term {
    if depth == 0 || rng.gen_bool(0.35) {
        if !vars.is_empty() && rng.gen_bool(0.5) {
            return Term::var(vars.choose(rng).unwrap());
        }
        let (c, _) = FUNS[rng.gen_range(0..2)];
        return Term::constant(c);
    }
    let (f, n) = FUNS[rng.gen_range(2..FUNS.len())];
    Term::app(f, (0..n).map(|_| term(rng, depth - 1, vars)).collect())
}

pub fn atom(rng: &mut StdRng, depth: usize, vars: &[&str]) -> Atom {
    let (p, n) = *PREDS.choose(rng).unwrap();
    Atom::new(p, (0..n).map(|_| term(rng, depth, vars)).collect())
}

/// One to four clauses `k0, k1, ...`; bodies of up to two atoms.
pub fn program(rng: &mut StdRng) -> Program {
    let n = rng.gen_range(1..=4);
    let clauses = (0..n)
        .map(|i| {
            let head = atom(rng, 2, VARS);
            let body_len = rng.gen_range(0..=2);
            let body = (0..body_len).map(|_| atom(rng, 1, VARS)).collect();
            HornClause::new(&format!("k{i}"), head, body)
        })
        .collect();
    Program::new(clauses).expect("fixed arities")
}

/// Half the time an arbitrary atom; otherwise a generalization of one of
/// the program's heads, so that the query has a chance to succeed.
pub fn query(rng: &mut StdRng, p: &Program) -> Atom {
    if rng.gen_bool(0.5) {
        return atom(rng, 1, &["X", "Y"]);
    }
    let head = &p.clauses().choose(rng).expect("non-empty program").head;
    let mut bound = Vec::new();
    let args = head.args.iter().map(|t| generalize(rng, t, "Q", &mut bound)).collect();
    Atom { pred: head.pred.clone(), args }
}

/// The query instantiated by an answer, with variables renamed canonically.
pub fn answer_instance(query: &Atom, answer: &Substitution) -> String {
    Canonicalizer::default().atom(&answer.apply_atom(query)).to_string()
}

/// Decided result of a search: `Some(answers)` if it ran to completion,
/// `None` if fuel ran out first.
fn decided(outcomes: &[Outcome], query: &Atom) -> Option<BTreeSet<String>> {
    if outcomes.iter().any(|o| matches!(o, Outcome::FuelExhausted { .. })) {
        return None;
    }
    Some(outcomes.iter().filter_map(|o| o.answer()).map(|a| answer_instance(query, a)).collect())
}

#[derive(Debug, Default)]
pub struct Tally {
    pub cases: usize,
    /// Cases where the property had something to say (e.g. a success
    /// existed, or both searches terminated).
    pub informative: usize,
    pub failures: Vec<String>,
}

impl Tally {
    fn fail(&mut self, msg: String) {
        if self.failures.len() < 5 {
            self.failures.push(msg);
        }
    }

    pub fn ok(&self) -> Result<String, String> {
        if self.failures.is_empty() {
            Ok(format!("{} cases, {} informative", self.cases, self.informative))
        } else {
            Err(format!("{} cases; failures: {}", self.cases, self.failures.join(" | ")))
        }
    }
}

/// Every success on the transformed program carries a checked proof whose
/// representation is the witness binding.
pub fn soundness(cases: usize, seed: u64) -> Tally {
    let mut r = rng(seed);
    let mut t = Tally::default();
    let cfg = SearchConfig::new(Strategy::Unif).with_fuel(FUEL);
    while t.cases < cases {
        let p = program(&mut r);
        let q = query(&mut r, &p);
        if p.check_atom(&q).is_err() {
            continue;
        }
        t.cases += 1;
        let search = ProofSearch::new(&p, &q).unwrap();
        let mut any = false;
        for o in search.run(&cfg) {
            let ProofOutcome::Proved(pa) = o else { continue };
            any = true;
            if pa.verdict != Verdict::Checked {
                t.fail(format!("{p} ?- {q}: verdict {:?}", pa.verdict));
                continue;
            }
            let proof = pa.proof.as_ref().unwrap();
            match represent(proof, &ProofVarEnv::new()) {
                Ok(w) if w == pa.witness => {}
                other => t.fail(format!("{p} ?- {q}: represent({proof}) = {other:?}, witness {}", pa.witness)),
            }
            if let Err(e) = check_goal_proof(&p, proof, &pa.answer.apply_atom(&q)) {
                t.fail(format!("{p} ?- {q}: {proof} rejected on the original program: {e}"));
            }
        }
        t.informative += any as usize;
    }
    t
}

/// Success on the program iff success on the transformed program with the
/// lifted query, with the same answers.
pub fn preservation(cases: usize, seed: u64) -> Tally {
    let mut r = rng(seed);
    let mut t = Tally::default();
    let cfg = SearchConfig::new(Strategy::Unif).with_fuel(FUEL);
    while t.cases < cases {
        let p = program(&mut r);
        let q = query(&mut r, &p);
        if p.check_atom(&q).is_err() {
            continue;
        }
        t.cases += 1;
        let plain: Vec<Outcome> = solve(&p, &q, &cfg).collect();
        let search = ProofSearch::new(&p, &q).unwrap();
        let lifted: Vec<Outcome> = solve(&search.transformed, &search.lifted, &cfg).collect();
        let stripped: Vec<Outcome> = lifted
            .into_iter()
            .map(|o| match o {
                Outcome::Success { answer, trace } => Outcome::Success { answer: answer.restrict(&q.vars()), trace },
                other => other,
            })
            .collect();
        if let (Some(a), Some(b)) = (decided(&plain, &q), decided(&stripped, &q)) {
            t.informative += 1;
            if a.is_empty() != b.is_empty() || a != b {
                t.fail(format!("{p} ?- {q}: {a:?} vs {b:?}"));
            }
        }
    }
    t
}

/// The transformed program is always non-overlapping with a measure.
pub fn certification(cases: usize, seed: u64) -> Tally {
    let mut r = rng(seed);
    let mut t = Tally::default();
    while t.cases < cases {
        let p = program(&mut r);
        t.cases += 1;
        t.informative += 1;
        let f = transform_program(&p).unwrap();
        let overlap = check_non_overlapping(&f);
        if !overlap.is_certified() {
            t.fail(format!("{f}: {:?}", overlap.violations));
        }
        let cert = certify_productive(&f);
        if !cert.is_measure() {
            t.fail(format!("{f}: {cert:?}"));
        }
    }
    t
}

/// Unif and struct agree on the answers of certified programs. The
/// population is every transformed program, plus any generated program
/// that is certified as it stands.
pub fn equivalence(cases: usize, seed: u64) -> Tally {
    let mut r = rng(seed);
    let mut t = Tally::default();
    let unif = SearchConfig::new(Strategy::Unif).with_fuel(FUEL);
    let strct = SearchConfig::new(Strategy::Struct).with_fuel(FUEL);
    while t.cases < cases {
        let p = program(&mut r);
        let q = query(&mut r, &p);
        if p.check_atom(&q).is_err() {
            continue;
        }
        let search = ProofSearch::new(&p, &q).unwrap();
        let mut pairs = vec![(search.transformed.clone(), search.lifted.clone())];
        if check_non_overlapping(&p).is_certified() && certify_productive(&p).is_measure() {
            pairs.push((p.clone(), q.clone()));
        }
        for (prog, goal) in pairs {
            t.cases += 1;
            let a: Vec<Outcome> = solve(&prog, &goal, &unif).collect();
            let b: Vec<Outcome> = solve(&prog, &goal, &strct).collect();
            if let (Some(a), Some(b)) = (decided(&a, &goal), decided(&b, &goal)) {
                t.informative += 1;
                if a != b {
                    t.fail(format!("{prog} ?- {goal}: unif {a:?} struct {b:?}"));
                }
            }
        }
    }
    t
}

/// Builds a random derivation top-down: picks a clause for the current
/// atom, then proves its body atoms in order. Returns the proof; `theta`
/// accumulates the unifiers.
fn derive(
    p: &Program,
    r: &mut StdRng,
    fs: &mut FreshSource,
    theta: &mut Substitution,
    target: &Atom,
    depth: usize,
) -> Option<ProofTerm> {
    let mut order: Vec<&HornClause> = p.clauses().iter().collect();
    order.shuffle(r);
    for c in order {
        if !c.is_fact() && depth == 0 {
            continue;
        }
        let renamed = rename_apart(c, fs);
        let Some(mgu) = unify_atoms(&theta.apply_atom(target), &renamed.head) else { continue };
        let saved = theta.clone();
        *theta = Substitution::compose(&mgu, theta);
        let mut args = Vec::new();
        for b in &renamed.body {
            match derive(p, r, fs, theta, b, depth - 1) {
                Some(e) => args.push(e),
                None => break,
            }
        }
        if args.len() == renamed.body.len() {
            return Some(ProofTerm::spine(ProofTerm::constant(c.label.as_str()), args));
        }
        *theta = saved;
    }
    None
}

fn unify_atoms(a: &Atom, b: &Atom) -> Option<Substitution> {
    horn_core::unify(a, b)
}

/// Untyped proof terms over binders `x`, `y`, `z` and labels `k1`, `k2`.
pub fn lambda(r: &mut StdRng, depth: usize) -> ProofTerm {
    const NAMES: [&str; 3] = ["x", "y", "z"];
    match r.gen_range(0..if depth == 0 { 2 } else { 4 }) {
        0 => ProofTerm::var(NAMES.choose(r).unwrap()),
        1 => ProofTerm::constant(["k1", "k2"].choose(r).unwrap()),
        2 => ProofTerm::lam(NAMES.choose(r).unwrap(), lambda(r, depth - 1)),
        _ => ProofTerm::app(lambda(r, depth - 1), lambda(r, depth - 1)),
    }
}

/// A random derivation of depth at most `depth` for some atom of a random
/// predicate; the atom is as general as the derivation allows.
pub fn derived_goal(p: &Program, r: &mut StdRng, depth: usize) -> Option<(ProofTerm, Atom)> {
    let (pred, n) = *PREDS.choose(r).unwrap();
    let target = Atom::new(pred, (0..n).map(|i| Term::var(&format!("G{i}"))).collect());
    let mut fs = FreshSource::new();
    for c in p.clauses() {
        fs.witness_clause(c);
    }
    fs.witness_atom(&target);
    let mut theta = Substitution::new();
    let proof = derive(p, r, &mut fs, &mut theta, &target, depth)?;
    Some((proof, theta.apply_atom(&target)))
}

/// Checker-accepted (proof, goal) pairs are found by unif search.
pub fn completeness(cases: usize, seed: u64) -> Tally {
    let mut r = rng(seed);
    let mut t = Tally::default();
    let cfg = SearchConfig::new(Strategy::Unif).with_fuel(100_000);
    let mut attempts = 0;
    while t.cases < cases {
        attempts += 1;
        assert!(attempts < cases * 1000, "generator cannot produce derivations");
        let p = program(&mut r);
        let Some((proof, goal)) = derived_goal(&p, &mut r, 3) else { continue };
        t.cases += 1;
        if let Err(e) = check_goal_proof(&p, &proof, &goal) {
            t.fail(format!("{p}: derived {proof} : {goal} rejected: {e}"));
            continue;
        }
        t.informative += 1;
        if !solve(&p, &goal, &cfg).any(|o| o.is_success()) {
            t.fail(format!("{p}: no success for {goal} (proof {proof})"));
        }
    }
    t
}

/// Replaces random subterms of `g` by fresh variables named `prefix0`,
/// `prefix1`, ...; records what each variable stands for.
fn generalize(r: &mut StdRng, g: &Term, prefix: &str, out: &mut Vec<(Symbol, Term)>) -> Term {
    if r.gen_bool(0.25) {
        let v = Symbol::from(format!("{prefix}{}", out.len()));
        out.push((v.clone(), g.clone()));
        return Term::Var(v);
    }
    match g {
        Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| generalize(r, a, prefix, out)).collect()),
        Term::Var(_) => g.clone(),
    }
}

/// MGU soundness, idempotence and generality; occurs-check rejection.
pub fn unification_laws(cases: usize, seed: u64) -> Tally {
    let mut r = rng(seed);
    let mut t = Tally::default();
    while t.cases < cases {
        t.cases += 1;
        // two generalizations of one ground term: a known unifier exists
        let g = term(&mut r, 4, &[]);
        let mut known = Vec::new();
        let s = generalize(&mut r, &g, "A", &mut known);
        let u = generalize(&mut r, &g, "B", &mut known);
        let rho = Substitution::from_pairs(known);
        match unify_terms(&s, &u) {
            None => t.fail(format!("{s} and {u} have unifier {rho} but unify failed")),
            Some(sigma) => {
                t.informative += 1;
                check_mgu(&mut t, &s, &u, &sigma);
                let mut vars = s.vars();
                vars.extend(u.vars());
                for v in vars {
                    let x = Term::Var(v);
                    if rho.apply(&sigma.apply(&x)) != rho.apply(&x) {
                        t.fail(format!("{rho} does not factor through {sigma} at {x}"));
                    }
                }
            }
        }

        // arbitrary pairs: whatever unify returns must be an idempotent unifier
        let a = term(&mut r, 3, VARS);
        let b = term(&mut r, 3, VARS);
        if let Some(sigma) = unify_terms(&a, &b) {
            check_mgu(&mut t, &a, &b, &sigma);
        }

        // a variable never unifies with a compound term containing it
        let v = *VARS.choose(&mut r).unwrap();
        let (f, n) = FUNS[rng_index(&mut r)];
        let mut args: Vec<Term> = (0..n).map(|_| term(&mut r, 2, VARS)).collect();
        let at = r.gen_range(0..n);
        args[at] = Term::app("f", vec![Term::var(v)]);
        let host = Term::app(f, args);
        if unify_terms(&Term::var(v), &host).is_some() {
            t.fail(format!("{v} unified with {host}"));
        }
    }
    t
}

fn rng_index(r: &mut StdRng) -> usize {
    r.gen_range(2..FUNS.len())
}

fn check_mgu(t: &mut Tally, a: &Term, b: &Term, sigma: &Substitution) {
    if sigma.apply(a) != sigma.apply(b) {
        t.fail(format!("{sigma} does not unify {a} and {b}"));
    }
    if !sigma.is_idempotent() {
        t.fail(format!("{sigma} is not idempotent"));
    }
    let mut vars: BTreeSet<Symbol> = a.vars().into_iter().collect();
    vars.extend(b.vars());
    if let Some(v) = sigma.domain().find(|v| !vars.contains(*v)) {
        t.fail(format!("{sigma} binds {v}, which occurs in neither {a} nor {b}"));
    }
}
