//! The realizability transformation and proof extraction.
//!
//! Every predicate gains a trailing witness argument. Clause
//! `κ: A1, ..., Am ⇒ B` becomes `κ: A1[U1], ..., Am[Um] ⇒ B[pf_κ(U1, ..., Um)]`
//! (`pc_κ` for facts), so solving a lifted query `A[U]` records in `U` a
//! first-order encoding of the proof.
//!
//! Transformed predicates keep their names; since predicates are identified
//! by name and arity, they never resolve against the originals.

use std::collections::BTreeSet;

use crate::proofs::{represent, unrepresent, ProofError, ProofTerm, ProofVarEnv};
use crate::reduction::{solve, Outcome, SearchConfig, Solutions, StepRecord};
use crate::syntax::{
    extend_atom, witness_label, witness_symbol, Atom, FreshSource, Goal, HornClause, Program, ProgramError,
    Substitution, Symbol, Term,
};
use crate::typecheck::{check_goal_proof, lambda_normal_form, CheckError, Formula};

/// Picks `m` witness variable names that do not occur in `taken`.
fn witness_vars(m: usize, taken: &BTreeSet<Symbol>) -> Vec<Symbol> {
    let mut prefix = String::from("U");
    loop {
        let names: Vec<Symbol> = (1..=m).map(|i| Symbol::from(format!("{prefix}{i}"))).collect();
        if names.iter().all(|n| !taken.contains(n)) {
            return names;
        }
        prefix.push('U');
    }
}

/// Transforms one clause.
pub fn transform_clause(c: &HornClause) -> HornClause {
    let taken: BTreeSet<Symbol> = c.vars().into_iter().collect();
    let ys = witness_vars(c.body.len(), &taken);
    let body = c.body.iter().zip(&ys).map(|(a, y)| extend_atom(a, Term::Var(y.clone()))).collect();
    let witness = Term::App(witness_symbol(c.label.as_str(), ys.len()), ys.into_iter().map(Term::Var).collect());
    HornClause { label: c.label.clone(), head: extend_atom(&c.head, witness), body }
}

/// `F(Φ)`. Rejects programs that already use witness symbols.
pub fn transform_program(p: &Program) -> Result<Program, ProgramError> {
    if let Some(f) = p.signature().functions.keys().find(|f| witness_label(f.as_str()).is_some()) {
        return Err(ProgramError::ReservedSymbol(f.clone()));
    }
    Program::new(p.clauses().iter().map(transform_clause).collect())
}

/// `A[U]` with `U` fresh for `fs`.
pub fn lift_query(a: &Atom, fs: &mut FreshSource) -> (Atom, Symbol) {
    fs.witness_atom(a);
    let u = fs.fresh("U");
    (extend_atom(a, Term::Var(u.clone())), u)
}

/// Drops the witness argument.
pub fn strip_atom(a: &Atom) -> Atom {
    let mut args = a.args.clone();
    args.pop();
    Atom { pred: a.pred.clone(), args }
}

pub fn strip_goal(g: &Goal) -> Goal {
    Goal::new(g.atoms().iter().map(strip_atom).collect())
}

/// The transformed judgement for a clause proof: from `e : A1..An ⇒ B` over
/// `Φ`, the formula `A1[Y1], ..., An[Yn] ⇒ B[⟦n⟧]` that `e` proves over
/// `F(Φ)`, where `e` normalizes to `λa1..an. n` and `ai` is represented by `Yi`.
pub fn transform_judgement(e: &ProofTerm, f: &Formula) -> Result<Formula, CheckError> {
    let (names, n) = lambda_normal_form(e, f.body.len())?;
    let mut taken = BTreeSet::new();
    for a in f.body.iter().chain(std::iter::once(&f.head)) {
        taken.extend(a.vars());
    }
    let ys = witness_vars(names.len(), &taken);
    let env: ProofVarEnv = names.into_iter().zip(ys.iter().cloned().map(Term::Var)).collect();
    let head_witness = represent(&n, &env)?;
    Ok(Formula {
        body: f.body.iter().zip(ys).map(|(a, y)| extend_atom(a, Term::Var(y))).collect(),
        head: extend_atom(&f.head, head_witness),
    })
}

/// Whether an extracted proof was validated by the checker.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Checked,
    /// The witness still contains variables, so the proof is partial.
    OpenProof,
    Rejected(String),
}

impl Verdict {
    pub fn is_checked(&self) -> bool {
        matches!(self, Verdict::Checked)
    }

    pub fn reason(&self) -> Option<String> {
        match self {
            Verdict::Checked => None,
            Verdict::OpenProof => Some("open proof".to_string()),
            Verdict::Rejected(r) => Some(r.clone()),
        }
    }
}

/// One answer with its recorded proof.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProvedAnswer {
    /// Answer over the query's own variables.
    pub answer: Substitution,
    /// Final binding of the witness variable.
    pub witness: Term,
    pub proof: Result<ProofTerm, ProofError>,
    pub verdict: Verdict,
    /// Derivation over the transformed program.
    pub trace: Vec<StepRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProofOutcome {
    Proved(ProvedAnswer),
    /// A non-success outcome of the search on the transformed program.
    Other(Outcome),
}

/// The transformed program together with the lifted query.
#[derive(Clone, Debug)]
pub struct ProofSearch {
    pub original: Program,
    pub transformed: Program,
    pub query: Atom,
    pub lifted: Atom,
    pub witness: Symbol,
}

impl ProofSearch {
    pub fn new(p: &Program, query: &Atom) -> Result<ProofSearch, ProgramError> {
        p.check_atom(query)?;
        let transformed = transform_program(p)?;
        let (lifted, witness) = lift_query(query, &mut FreshSource::new());
        Ok(ProofSearch { original: p.clone(), transformed, query: query.clone(), lifted, witness })
    }

    /// Solves the lifted query on `F(Φ)` and extracts a proof from each
    /// success.
    pub fn run<'s>(&'s self, cfg: &SearchConfig) -> impl Iterator<Item = ProofOutcome> + 's {
        let sols: Solutions<'s> = solve(&self.transformed, &self.lifted, cfg);
        sols.map(move |o| match o {
            Outcome::Success { answer, trace } => ProofOutcome::Proved(self.extract(&answer, trace)),
            other => ProofOutcome::Other(other),
        })
    }

    /// Builds the proved answer for a success on the lifted query.
    pub fn extract(&self, answer: &Substitution, trace: Vec<StepRecord>) -> ProvedAnswer {
        let witness = answer.apply(&Term::Var(self.witness.clone()));
        let query_vars = self.query.vars();
        let stripped = answer.restrict(&query_vars);
        let proof = unrepresent(&witness, &self.transformed);
        let verdict = match &proof {
            Err(e) => Verdict::Rejected(e.to_string()),
            Ok(_) if !witness.is_ground() => Verdict::OpenProof,
            Ok(n) => match check_goal_proof(&self.transformed, n, &answer.apply_atom(&self.lifted)) {
                Ok(_) => Verdict::Checked,
                Err(e) => Verdict::Rejected(e.to_string()),
            },
        };
        ProvedAnswer { answer: stripped, witness, proof, verdict, trace }
    }
}

/// Convenience wrapper: all outcomes of [`ProofSearch::run`].
pub fn solve_with_proof(p: &Program, query: &Atom, cfg: &SearchConfig) -> Result<Vec<ProofOutcome>, ProgramError> {
    let search = ProofSearch::new(p, query)?;
    let out = search.run(cfg).collect();
    Ok(out)
}
