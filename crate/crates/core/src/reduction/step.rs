use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::syntax::{rename_with_generation, Atom, FreshSource, Goal, HornClause, Program, Substitution, Symbol};
use crate::unify::{match_atom, unify};

/// Which of the three one-step relations produced a step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepKind {
    /// Resolution with a unifier (`⤳`).
    Unif,
    /// Resolution with a matcher; the goal is never instantiated (`→`).
    Tm,
    /// Instantiates the whole goal with a head unifier, no unfolding (`↪`).
    Subst,
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StepKind::Unif => "unif",
            StepKind::Tm => "tm",
            StepKind::Subst => "subst",
        })
    }
}

/// Threaded derivation state: accumulated answer, name supply, step count.
/// The answer only records the variables of the initial goal.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct EngineState {
    pub answer: Substitution,
    pub fresh: FreshSource,
    pub steps: usize,
    roots: Arc<[Symbol]>,
}

impl EngineState {
    /// Initial state for a derivation starting from `goal`.
    pub fn for_goal(goal: &Goal) -> EngineState {
        let mut fresh = FreshSource::new();
        goal.atoms().iter().for_each(|a| fresh.witness_atom(a));
        EngineState { answer: Substitution::new(), fresh, steps: 0, roots: goal.vars().into() }
    }
}

/// One step of a derivation. `binding` is the step's own unifier or matcher;
/// `goal` is the goal after the step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepRecord {
    pub kind: StepKind,
    pub label: Symbol,
    pub index: usize,
    pub binding: Substitution,
    pub goal: Goal,
}

impl fmt::Display for StepRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let arrow = match self.kind {
            StepKind::Unif => "~>",
            StepKind::Tm => "->",
            StepKind::Subst => "+>",
        };
        write!(f, "{arrow} {} @{}", self.label, self.index)?;
        if self.kind != StepKind::Tm {
            write!(f, " {}", self.binding)?;
        }
        write!(f, "  {}", self.goal)
    }
}

pub type Transition = (StepRecord, Goal, EngineState);

/// Applies one step of `kind` with `clause` at goal position `index`, renaming
/// the clause with the state's next generation. Returns `None` when the clause
/// head does not unify (or match, for `Tm`) with the selected atom.
pub fn apply_step(
    kind: StepKind,
    clause: &HornClause,
    index: usize,
    goal: &Goal,
    st: &EngineState,
) -> Option<Transition> {
    let selected = goal.atoms().get(index)?;
    let mut fresh = st.fresh.clone();
    let renamed = rename_with_generation(clause, fresh.next_generation());
    let (binding, atoms, answer) = match kind {
        StepKind::Unif => {
            let g = unify(&renamed.head, selected)?;
            let atoms = splice(goal.atoms(), index, &renamed.body, |a| g.apply_atom(a));
            let answer = Substitution::compose(&g, &st.answer).restrict(st.roots.iter());
            (g, atoms, answer)
        }
        StepKind::Tm => {
            let s = match_atom(&renamed.head, selected)?;
            let body: Vec<Atom> = renamed.body.iter().map(|b| s.apply_atom(b)).collect();
            let atoms = splice(goal.atoms(), index, &body, Atom::clone);
            (s, atoms, st.answer.clone())
        }
        StepKind::Subst => {
            let g = unify(&renamed.head, selected)?;
            let atoms = goal.atoms().iter().map(|a| g.apply_atom(a)).collect();
            let answer = Substitution::compose(&g, &st.answer).restrict(st.roots.iter());
            (g, atoms, answer)
        }
    };
    let next = Goal::new(atoms);
    let record = StepRecord { kind, label: clause.label.clone(), index, binding, goal: next.clone() };
    Some((record, next, EngineState { answer, fresh, steps: st.steps + 1, roots: st.roots.clone() }))
}

fn splice(atoms: &[Atom], index: usize, body: &[Atom], f: impl Fn(&Atom) -> Atom) -> Vec<Atom> {
    let mut out = Vec::with_capacity(atoms.len() + body.len());
    out.extend(atoms[..index].iter().map(&f));
    out.extend(body.iter().map(&f));
    out.extend(atoms[index + 1..].iter().map(&f));
    out
}

fn all_clauses(kind: StepKind, p: &Program, index: usize, g: &Goal, st: &EngineState) -> Vec<Transition> {
    p.clauses().iter().filter_map(|c| apply_step(kind, c, index, g, st)).collect()
}

/// LP-Unif steps at the leftmost atom, one per unifying clause, program order.
pub fn step_unif(p: &Program, g: &Goal, st: &EngineState) -> Vec<Transition> {
    all_clauses(StepKind::Unif, p, 0, g, st)
}

/// Term-matching steps at the leftmost atom. The answer is passed through.
pub fn step_tm(p: &Program, g: &Goal, st: &EngineState) -> Vec<Transition> {
    step_tm_at(p, g, st, 0)
}

pub fn step_tm_at(p: &Program, g: &Goal, st: &EngineState, index: usize) -> Vec<Transition> {
    all_clauses(StepKind::Tm, p, index, g, st)
}

/// Substitutional steps at the leftmost atom.
pub fn step_subst(p: &Program, g: &Goal, st: &EngineState) -> Vec<Transition> {
    step_subst_at(p, g, st, 0)
}

pub fn step_subst_at(p: &Program, g: &Goal, st: &EngineState, index: usize) -> Vec<Transition> {
    all_clauses(StepKind::Subst, p, index, g, st)
}

/// Position and clause of the first applicable term-matching step, scanning
/// atoms left to right and clauses in program order.
pub fn first_tm_redex<'p>(p: &'p Program, g: &Goal) -> Option<(usize, &'p HornClause)> {
    g.atoms()
        .iter()
        .enumerate()
        .find_map(|(i, a)| p.clauses().iter().find(|c| match_atom(&c.head, a).is_some()).map(|c| (i, c)))
}

/// Result of driving a goal to `→`-normal form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TmRun {
    pub goal: Goal,
    pub state: EngineState,
    pub trace: Vec<StepRecord>,
}

/// Error side of [`tm_normalize`]: the phase was cut off after `fuel` steps
/// with a redex still present.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TmDiverged(pub TmRun);

/// Applies term-matching steps (first clause at the leftmost reducible atom)
/// until no atom is matched by any head, or until `fuel` steps were taken.
pub fn tm_normalize(p: &Program, g: &Goal, st: &EngineState, fuel: usize) -> Result<TmRun, TmDiverged> {
    let mut run = TmRun { goal: g.clone(), state: st.clone(), trace: Vec::new() };
    while let Some((i, clause)) = first_tm_redex(p, &run.goal) {
        if run.trace.len() >= fuel {
            return Err(TmDiverged(run));
        }
        let (rec, goal, state) =
            apply_step(StepKind::Tm, clause, i, &run.goal, &run.state).expect("redex was matchable");
        run.trace.push(rec);
        run.goal = goal;
        run.state = state;
    }
    Ok(run)
}
