use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::step::{apply_step, EngineState, StepKind, StepRecord};
use crate::syntax::{rename_with_generation, Atom, Goal, HornClause, Program, Substitution, Symbol, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// SLD resolution: unify the leftmost atom with a clause head and unfold.
    Unif,
    /// Term-matching only.
    Tm,
    /// Structural resolution: `→`-normalize, then one substitutional step.
    Struct,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Unif => "unif",
            Strategy::Tm => "tm",
            Strategy::Struct => "struct",
        })
    }
}

impl FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "unif" => Ok(Strategy::Unif),
            "tm" => Ok(Strategy::Tm),
            "struct" => Ok(Strategy::Struct),
            _ => Err(format!("unknown strategy `{s}` (expected unif, tm or struct)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Exploration {
    #[serde(rename = "dfs")]
    DepthFirst,
    #[serde(rename = "iddfs")]
    IterativeDeepening,
}

impl fmt::Display for Exploration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Exploration::DepthFirst => "dfs",
            Exploration::IterativeDeepening => "iddfs",
        })
    }
}

impl FromStr for Exploration {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "dfs" => Ok(Exploration::DepthFirst),
            "iddfs" => Ok(Exploration::IterativeDeepening),
            _ => Err(format!("unknown search `{s}` (expected dfs or iddfs)")),
        }
    }
}

pub const DEFAULT_FUEL: usize = 10_000;
pub const DEFAULT_TM_FUEL: usize = 1_000;

/// How to search. `fuel` bounds the total number of relation steps over the
/// whole search; `tm_fuel` bounds each `→`-normalization phase of `Struct`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    pub strategy: Strategy,
    pub exploration: Exploration,
    pub fuel: usize,
    pub tm_fuel: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            strategy: Strategy::Unif,
            exploration: Exploration::IterativeDeepening,
            fuel: DEFAULT_FUEL,
            tm_fuel: DEFAULT_TM_FUEL,
        }
    }
}

impl SearchConfig {
    pub fn new(strategy: Strategy) -> Self {
        SearchConfig { strategy, ..Self::default() }
    }

    pub fn dfs(mut self) -> Self {
        self.exploration = Exploration::DepthFirst;
        self
    }

    pub fn with_fuel(mut self, fuel: usize) -> Self {
        self.fuel = fuel;
        self
    }

    pub fn with_tm_fuel(mut self, tm_fuel: usize) -> Self {
        self.tm_fuel = tm_fuel;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FuelKind {
    /// The whole search ran out of steps.
    Total,
    /// One `→`-normalization phase did not reach a normal form.
    TmPhase,
}

/// One result of a search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// The goal was reduced to empty. `answer` is restricted to the query's
    /// variables.
    Success { answer: Substitution, trace: Vec<StepRecord> },
    /// The branch reached a goal where the strategy has no applicable step.
    Stuck { goal: Goal, trace: Vec<StepRecord> },
    /// Fuel ran out on the branch reached by `path`, holding `goal`. `Total`
    /// ends the search; `open_branches` counts choice points left.
    FuelExhausted { cause: FuelKind, goal: Goal, path: Vec<StepRef>, open_branches: usize },
}

impl Outcome {
    pub fn is_success(&self) -> bool {
        matches!(self, Outcome::Success { .. })
    }

    pub fn answer(&self) -> Option<&Substitution> {
        match self {
            Outcome::Success { answer, .. } => Some(answer),
            _ => None,
        }
    }

    pub fn trace(&self) -> &[StepRecord] {
        match self {
            Outcome::Success { trace, .. } | Outcome::Stuck { trace, .. } => trace,
            Outcome::FuelExhausted { .. } => &[],
        }
    }
}

/// A step named by clause label, as stored in serialized traces.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StepRef {
    pub kind: StepKind,
    pub label: Symbol,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("step {step}: no clause labelled `{label}`")]
    UnknownLabel { step: usize, label: Symbol },
    #[error("step {step}: {kind} with `{label}` does not apply at position {index}")]
    NotApplicable { step: usize, kind: StepKind, label: Symbol, index: usize },
}

/// Re-runs a derivation from `goal` through the one-step relations.
pub fn replay(
    p: &Program,
    goal: &Goal,
    steps: &[StepRef],
) -> Result<(Vec<StepRecord>, Goal, EngineState), ReplayError> {
    let mut goal = goal.clone();
    let mut state = EngineState::for_goal(&goal);
    let mut records = Vec::with_capacity(steps.len());
    for (n, s) in steps.iter().enumerate() {
        let clause = p
            .clause(s.label.as_str())
            .ok_or_else(|| ReplayError::UnknownLabel { step: n, label: s.label.clone() })?;
        let (rec, g, st) = apply_step(s.kind, clause, s.index, &goal, &state).ok_or_else(|| {
            ReplayError::NotApplicable { step: n, kind: s.kind, label: s.label.clone(), index: s.index }
        })?;
        records.push(rec);
        goal = g;
        state = st;
    }
    Ok((records, goal, state))
}

/// Enumerates outcomes for `query` under `cfg`.
pub fn solve<'p>(p: &'p Program, query: &Atom, cfg: &SearchConfig) -> Solutions<'p> {
    solve_goal(p, &Goal::single(query.clone()), cfg)
}

pub fn solve_goal<'p>(p: &'p Program, goal: &Goal, cfg: &SearchConfig) -> Solutions<'p> {
    Solutions::new(p, goal.clone(), *cfg)
}

// ---------------------------------------------------------------------------
// Search engine. Goals are shared cons lists of unresolved atoms; variable
// bindings live in one store with a trail that is unwound on backtracking.
// ---------------------------------------------------------------------------

type GoalList = Option<Arc<GoalCell>>;

struct GoalCell {
    atom: Atom,
    next: GoalList,
}

fn cons(atom: Atom, next: GoalList) -> GoalList {
    Some(Arc::new(GoalCell { atom, next }))
}

#[derive(Clone, Copy)]
struct CompactStep {
    kind: StepKind,
    clause: usize,
    index: usize,
}

type TraceList = Option<Arc<TraceCell>>;

struct TraceCell {
    step: CompactStep,
    prev: TraceList,
}

#[derive(Clone)]
struct Node {
    goal: GoalList,
    trace: TraceList,
    steps: usize,
    fresh: u64,
    depth: usize,
}

struct Frame {
    node: Node,
    index: usize,
    next_clause: usize,
    mark: usize,
}

#[derive(Default)]
struct Store {
    map: HashMap<Symbol, Term>,
    trail: Vec<Symbol>,
}

impl Store {
    fn resolve(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => match self.map.get(v) {
                Some(b) => self.resolve(b),
                None => t.clone(),
            },
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| self.resolve(a)).collect()),
        }
    }

    fn resolve_atom(&self, a: &Atom) -> Atom {
        Atom { pred: a.pred.clone(), args: a.args.iter().map(|t| self.resolve(t)).collect() }
    }

    /// Follows variable bindings until an unbound variable or a compound
    /// term is reached.
    fn walk<'t>(&'t self, mut t: &'t Term) -> &'t Term {
        while let Term::Var(v) = t {
            match self.map.get(v) {
                Some(b) => t = b,
                None => break,
            }
        }
        t
    }

    fn bind(&mut self, v: &Symbol, t: Term) {
        self.map.insert(v.clone(), t);
        self.trail.push(v.clone());
    }

    /// Occurs check through the store. Bound variables are expanded at most
    /// once, so shared bindings cost linear time.
    fn occurs(&self, v: &Symbol, t: &Term, seen: &mut HashSet<Symbol>) -> bool {
        match t {
            Term::Var(w) => match self.map.get(w) {
                Some(b) => seen.insert(w.clone()) && self.occurs(v, b, seen),
                None => w == v,
            },
            Term::App(_, args) => args.iter().any(|a| self.occurs(v, a, seen)),
        }
    }

    /// Unifies in place, with the same orientation as [`crate::unify::unify`]: a variable
    /// of `a` is bound to a variable of `b`. On failure the caller unwinds
    /// the trail.
    fn unify(&mut self, a: &Term, b: &Term) -> bool {
        let (a, b) = (self.walk(a).clone(), self.walk(b).clone());
        match (&a, &b) {
            (Term::Var(x), Term::Var(y)) if x == y => true,
            (Term::Var(x), t) | (t, Term::Var(x)) => {
                if self.occurs(x, t, &mut HashSet::new()) {
                    return false;
                }
                self.bind(x, t.clone());
                true
            }
            (Term::App(f, xs), Term::App(g, ys)) => {
                f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| self.unify(x, y))
            }
        }
    }

    fn unify_atoms(&mut self, head: &Atom, goal: &Atom) -> bool {
        head.same_predicate(goal) && head.args.iter().zip(&goal.args).all(|(x, y)| self.unify(x, y))
    }

    /// Structural equality of two terms read through the store.
    fn equal(&self, a: &Term, b: &Term) -> bool {
        match (self.walk(a), self.walk(b)) {
            (Term::Var(x), Term::Var(y)) => x == y,
            (Term::App(f, xs), Term::App(g, ys)) => {
                f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| self.equal(x, y))
            }
            _ => false,
        }
    }

    /// One-way matching of a clause term against a goal term read through
    /// the store; only `m` (pattern variables) is extended.
    fn matches(&self, m: &mut HashMap<Symbol, Term>, p: &Term, t: &Term) -> bool {
        match p {
            Term::Var(x) => match m.get(x) {
                Some(bound) => self.equal(bound, t),
                None => {
                    m.insert(x.clone(), t.clone());
                    true
                }
            },
            Term::App(f, ps) => match self.walk(t) {
                Term::App(g, ts) => {
                    f == g && ps.len() == ts.len() && ps.iter().zip(ts).all(|(p, t)| self.matches(m, p, t))
                }
                Term::Var(_) => false,
            },
        }
    }

    fn match_atoms(&self, head: &Atom, goal: &Atom) -> Option<HashMap<Symbol, Term>> {
        if !head.same_predicate(goal) {
            return None;
        }
        let mut m = HashMap::new();
        head.args.iter().zip(&goal.args).all(|(p, t)| self.matches(&mut m, p, t)).then_some(m)
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let v = self.trail.pop().expect("trail above mark");
            self.map.remove(&v);
        }
    }

    fn clear(&mut self) {
        self.map.clear();
        self.trail.clear();
    }
}

/// Lazy stream of [`Outcome`]s produced by [`solve`].
pub struct Solutions<'p> {
    program: &'p Program,
    cfg: SearchConfig,
    root: Goal,
    root_fresh: u64,
    query_vars: Vec<Symbol>,
    store: Store,
    stack: Vec<Frame>,
    pending: VecDeque<Outcome>,
    fuel_left: usize,
    bound: Option<usize>,
    cutoff: bool,
    started: bool,
    done: bool,
}

struct Halt;

impl<'p> Solutions<'p> {
    fn new(program: &'p Program, root: Goal, cfg: SearchConfig) -> Self {
        let root_fresh = EngineState::for_goal(&root).fresh.counter();
        let bound = match cfg.exploration {
            Exploration::DepthFirst => None,
            Exploration::IterativeDeepening => Some(0),
        };
        Solutions {
            program,
            cfg,
            query_vars: root.vars(),
            root,
            root_fresh,
            store: Store::default(),
            stack: Vec::new(),
            pending: VecDeque::new(),
            fuel_left: cfg.fuel,
            bound,
            cutoff: false,
            started: false,
            done: false,
        }
    }

    /// Steps spent so far across all branches and deepening rounds.
    pub fn fuel_used(&self) -> usize {
        self.cfg.fuel - self.fuel_left
    }

    fn root_node(&self) -> Node {
        let goal = self.root.atoms().iter().rev().fold(None, |acc, a| cons(a.clone(), acc));
        Node { goal, trace: None, steps: 0, fresh: self.root_fresh, depth: 0 }
    }

    fn emits_at(&self, depth: usize) -> bool {
        self.bound.is_none_or(|b| b == depth)
    }

    fn resolved_goal(&self, mut list: &GoalList) -> Goal {
        let mut atoms = Vec::new();
        while let Some(cell) = list {
            atoms.push(self.store.resolve_atom(&cell.atom));
            list = &cell.next;
        }
        Goal::new(atoms)
    }

    fn step_kind(&self) -> StepKind {
        match self.cfg.strategy {
            Strategy::Unif => StepKind::Unif,
            Strategy::Tm => StepKind::Tm,
            Strategy::Struct => StepKind::Subst,
        }
    }

    fn stored_atom(list: &GoalList, index: usize) -> Option<&Atom> {
        let mut cur = list;
        for _ in 0..index {
            cur = &cur.as_ref()?.next;
        }
        cur.as_ref().map(|c| &c.atom)
    }

    /// Performs one step on `node`, binding into the store. On failure the
    /// store is left as it was; on success the caller is responsible for
    /// unwinding the trail.
    fn try_step(&mut self, node: &Node, kind: StepKind, clause: usize, index: usize) -> Option<Node> {
        let selected = Self::stored_atom(&node.goal, index)?;
        let c: &HornClause = &self.program.clauses()[clause];
        let renamed = rename_with_generation(c, node.fresh);
        match kind {
            StepKind::Tm => {
                let m = self.store.match_atoms(&renamed.head, selected)?;
                for (v, t) in m {
                    self.store.bind(&v, t);
                }
            }
            StepKind::Unif | StepKind::Subst => {
                let mark = self.store.trail.len();
                if !self.store.unify_atoms(&renamed.head, selected) {
                    self.store.undo(mark);
                    return None;
                }
            }
        }
        let goal = match kind {
            StepKind::Subst => node.goal.clone(),
            StepKind::Unif | StepKind::Tm => splice(&node.goal, index, renamed.body),
        };
        let step = CompactStep { kind, clause, index };
        Some(Node {
            goal,
            trace: Some(Arc::new(TraceCell { step, prev: node.trace.clone() })),
            steps: node.steps + 1,
            fresh: node.fresh + 1,
            depth: node.depth + 1,
        })
    }

    fn applicable(&mut self, node: &Node, kind: StepKind, index: usize) -> bool {
        let Some(selected) = Self::stored_atom(&node.goal, index) else { return false };
        let selected = selected.clone();
        (0..self.program.len()).any(|ci| {
            let c = &self.program.clauses()[ci];
            match kind {
                StepKind::Tm => self.store.match_atoms(&c.head, &selected).is_some(),
                StepKind::Unif | StepKind::Subst => {
                    let renamed = rename_with_generation(c, node.fresh);
                    let mark = self.store.trail.len();
                    let ok = self.store.unify_atoms(&renamed.head, &selected);
                    self.store.undo(mark);
                    ok
                }
            }
        })
    }

    fn goal_len(list: &GoalList) -> usize {
        let mut n = 0;
        let mut cur = list;
        while let Some(c) = cur {
            n += 1;
            cur = &c.next;
        }
        n
    }

    fn spend(&mut self, node: &Node) -> Result<(), Halt> {
        if self.fuel_left == 0 {
            let goal = self.resolved_goal(&node.goal);
            self.pending.push_back(Outcome::FuelExhausted {
                cause: FuelKind::Total,
                goal,
                path: self.compact_steps(node),
                open_branches: self.stack.len(),
            });
            self.done = true;
            return Err(Halt);
        }
        self.fuel_left -= 1;
        Ok(())
    }

    /// Runs the `→`-normalization phase of structural resolution in place.
    /// Returns false if the phase was cut off by `tm_fuel`.
    fn tm_phase(&mut self, node: &mut Node) -> Result<bool, Halt> {
        let depth = node.depth;
        let mut phase_steps = 0;
        loop {
            let redex = {
                let mut found = None;
                let mut cur = &node.goal;
                let mut i = 0;
                'scan: while let Some(cell) = cur {
                    for (ci, c) in self.program.clauses().iter().enumerate() {
                        if self.store.match_atoms(&c.head, &cell.atom).is_some() {
                            found = Some((i, ci));
                            break 'scan;
                        }
                    }
                    cur = &cell.next;
                    i += 1;
                }
                found
            };
            let Some((index, clause)) = redex else { return Ok(true) };
            if phase_steps >= self.cfg.tm_fuel {
                return Ok(false);
            }
            self.spend(node)?;
            let mut next = self.try_step(node, StepKind::Tm, clause, index).expect("redex matched");
            next.depth = depth;
            *node = next;
            phase_steps += 1;
        }
    }

    fn enter(&mut self, mut node: Node) -> Result<(), Halt> {
        if self.cfg.strategy == Strategy::Struct && !self.tm_phase(&mut node)? {
            if self.emits_at(node.depth) {
                let goal = self.resolved_goal(&node.goal);
                self.pending.push_back(Outcome::FuelExhausted {
                    cause: FuelKind::TmPhase,
                    goal,
                    path: self.compact_steps(&node),
                    open_branches: self.stack.len(),
                });
            }
            return Ok(());
        }
        if node.goal.is_none() {
            if self.emits_at(node.depth) {
                let outcome = self.success(&node);
                self.pending.push_back(outcome);
            }
            return Ok(());
        }
        let kind = self.step_kind();
        let selected = match self.cfg.strategy {
            Strategy::Unif => self.applicable(&node, kind, 0).then_some(0),
            Strategy::Tm | Strategy::Struct => {
                (0..Self::goal_len(&node.goal)).find(|&i| self.applicable(&node, kind, i))
            }
        };
        match selected {
            None => {
                if self.emits_at(node.depth) {
                    let outcome = self.stuck(&node);
                    self.pending.push_back(outcome);
                }
            }
            Some(_) if self.bound == Some(node.depth) => self.cutoff = true,
            Some(index) => {
                let mark = self.store.trail.len();
                self.stack.push(Frame { node, index, next_clause: 0, mark });
            }
        }
        Ok(())
    }

    fn restart(&mut self) -> Result<(), Halt> {
        self.store.clear();
        self.stack.clear();
        self.cutoff = false;
        let root = self.root_node();
        self.enter(root)
    }

    fn advance(&mut self) -> Result<(), Halt> {
        if !self.started {
            self.started = true;
            return self.restart();
        }
        let kind = self.step_kind();
        let Some(frame) = self.stack.last() else {
            match self.bound {
                Some(b) if self.cutoff => {
                    self.bound = Some(b + 1);
                    return self.restart();
                }
                _ => {
                    self.done = true;
                    return Ok(());
                }
            }
        };
        let (node, index, from, mark) = (frame.node.clone(), frame.index, frame.next_clause, frame.mark);
        self.store.undo(mark);
        for ci in from..self.program.len() {
            if let Some(child) = self.try_step(&node, kind, ci, index) {
                self.stack.last_mut().expect("frame").next_clause = ci + 1;
                if self.fuel_left == 0 {
                    self.store.undo(mark);
                    return self.spend(&node);
                }
                self.fuel_left -= 1;
                return self.enter(child);
            }
        }
        self.stack.pop();
        Ok(())
    }

    fn compact_steps(&self, node: &Node) -> Vec<StepRef> {
        let mut out = Vec::with_capacity(node.steps);
        let mut cur = &node.trace;
        while let Some(cell) = cur {
            let s = cell.step;
            out.push(StepRef { kind: s.kind, label: self.program.clauses()[s.clause].label.clone(), index: s.index });
            cur = &cell.prev;
        }
        out.reverse();
        out
    }

    fn materialize(&self, node: &Node) -> (Vec<StepRecord>, Goal, EngineState) {
        let steps = self.compact_steps(node);
        replay(self.program, &self.root, &steps).expect("engine trace replays through the step relations")
    }

    fn success(&self, node: &Node) -> Outcome {
        let (trace, goal, state) = self.materialize(node);
        debug_assert!(goal.is_empty());
        let answer = state.answer.restrict(&self.query_vars);
        debug_assert_eq!(
            answer,
            Substitution::from_pairs(
                self.query_vars.iter().map(|v| (v.clone(), self.store.resolve(&Term::Var(v.clone()))))
            )
        );
        Outcome::Success { answer, trace }
    }

    fn stuck(&self, node: &Node) -> Outcome {
        let (trace, goal, _) = self.materialize(node);
        debug_assert_eq!(goal, self.resolved_goal(&node.goal));
        Outcome::Stuck { goal, trace }
    }
}

fn splice(list: &GoalList, index: usize, body: Vec<Atom>) -> GoalList {
    let mut prefix = Vec::with_capacity(index);
    let mut cur = list;
    for _ in 0..index {
        let cell = cur.as_ref().expect("index within goal");
        prefix.push(cell.atom.clone());
        cur = &cell.next;
    }
    let rest = cur.as_ref().expect("index within goal").next.clone();
    let tail = body.into_iter().rev().fold(rest, |acc, a| cons(a, acc));
    prefix.into_iter().rev().fold(tail, |acc, a| cons(a, acc))
}

impl Iterator for Solutions<'_> {
    type Item = Outcome;

    fn next(&mut self) -> Option<Outcome> {
        loop {
            if let Some(o) = self.pending.pop_front() {
                return Some(o);
            }
            if self.done {
                return None;
            }
            // a Halt has already queued its outcome and set `done`
            let _ = self.advance();
        }
    }
}

impl Drop for GoalCell {
    fn drop(&mut self) {
        // unlink iteratively so long goals do not overflow the stack
        let mut next = self.next.take();
        while let Some(cell) = next {
            match Arc::try_unwrap(cell) {
                Ok(mut c) => next = c.next.take(),
                Err(_) => break,
            }
        }
    }
}

impl Drop for TraceCell {
    fn drop(&mut self) {
        let mut prev = self.prev.take();
        while let Some(cell) = prev {
            match Arc::try_unwrap(cell) {
                Ok(mut c) => prev = c.prev.take(),
                Err(_) => break,
            }
        }
    }
}
