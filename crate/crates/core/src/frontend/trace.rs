use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::parse::{parse_atom, ParseError};
use crate::realizability::{ProofSearch, ProvedAnswer};
use crate::reduction::{
    replay, step_subst_at, step_tm_at, step_unif, EngineState, FuelKind, Outcome, ReplayError, StepKind, StepRecord,
    StepRef, Strategy,
};
use crate::syntax::{Atom, Goal, Program, ProgramError, Substitution, Symbol};

pub const SCHEMA_VERSION: u32 = 1;

/// A serialized search: the query, how it was run, and one entry per
/// outcome. Terms and atoms are stored in concrete syntax.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceDocument {
    pub schema: u32,
    pub strategy: Strategy,
    pub query: String,
    /// Present when the search ran on the transformed program; holds the
    /// lifted query that was actually solved.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lifted_query: Option<String>,
    pub results: Vec<ResultDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepDoc {
    pub kind: StepKind,
    pub label: String,
    pub index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub binding: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofDoc {
    pub witness: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proof: Option<String>,
    pub checked: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ResultDoc {
    Success {
        answer: BTreeMap<String, String>,
        steps: Vec<StepDoc>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        proof: Option<ProofDoc>,
    },
    Stuck {
        goal: Vec<String>,
        steps: Vec<StepDoc>,
    },
    /// Steps here carry only clause and position; goals along a long
    /// divergent path are not materialized.
    FuelExhausted {
        cause: FuelKind,
        goal: Vec<String>,
        steps: Vec<StepDoc>,
        open_branches: usize,
    },
}

impl ResultDoc {
    pub fn status(&self) -> &'static str {
        match self {
            ResultDoc::Success { .. } => "success",
            ResultDoc::Stuck { .. } => "stuck",
            ResultDoc::FuelExhausted { .. } => "fuel_exhausted",
        }
    }

    pub fn steps(&self) -> &[StepDoc] {
        match self {
            ResultDoc::Success { steps, .. } | ResultDoc::Stuck { steps, .. } | ResultDoc::FuelExhausted { steps, .. } => {
                steps
            }
        }
    }
}

fn subst_doc(s: &Substitution) -> BTreeMap<String, String> {
    s.iter().map(|(v, t)| (v.to_string(), t.to_string())).collect()
}

fn goal_doc(g: &Goal) -> Vec<String> {
    g.atoms().iter().map(Atom::to_string).collect()
}

pub fn step_doc(r: &StepRecord) -> StepDoc {
    StepDoc {
        kind: r.kind,
        label: r.label.to_string(),
        index: r.index,
        binding: Some(subst_doc(&r.binding)),
        goal: Some(goal_doc(&r.goal)),
    }
}

fn path_doc(s: &StepRef) -> StepDoc {
    StepDoc { kind: s.kind, label: s.label.to_string(), index: s.index, binding: None, goal: None }
}

pub fn proof_doc(p: &ProvedAnswer) -> ProofDoc {
    ProofDoc {
        witness: p.witness.to_string(),
        proof: p.proof.as_ref().ok().map(|n| n.to_string()),
        checked: p.verdict.is_checked(),
        reason: p.verdict.reason(),
    }
}

/// Serializes an engine outcome.
pub fn result_doc(o: &Outcome) -> ResultDoc {
    match o {
        Outcome::Success { answer, trace } => {
            ResultDoc::Success { answer: subst_doc(answer), steps: trace.iter().map(step_doc).collect(), proof: None }
        }
        Outcome::Stuck { goal, trace } => {
            ResultDoc::Stuck { goal: goal_doc(goal), steps: trace.iter().map(step_doc).collect() }
        }
        Outcome::FuelExhausted { cause, goal, path, open_branches } => ResultDoc::FuelExhausted {
            cause: *cause,
            goal: goal_doc(goal),
            steps: path.iter().map(path_doc).collect(),
            open_branches: *open_branches,
        },
    }
}

/// Serializes a proved answer from a search on the transformed program.
pub fn proved_doc(p: &ProvedAnswer) -> ResultDoc {
    ResultDoc::Success {
        answer: subst_doc(&p.answer),
        steps: p.trace.iter().map(step_doc).collect(),
        proof: Some(proof_doc(p)),
    }
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("unsupported trace schema {0} (expected {SCHEMA_VERSION})")]
    Schema(u32),
    #[error("query: {0}")]
    Query(#[from] ParseError),
    #[error(transparent)]
    Program(#[from] ProgramError),
    #[error("result {result}: {source}")]
    Replay { result: usize, source: ReplayError },
    #[error("result {result}: {message}")]
    Mismatch { result: usize, message: String },
}

/// Replays every result of `doc` against `p` and rebuilds the document from
/// the replayed derivations. Returns the rebuilt document; it equals `doc`
/// exactly when the trace is faithful.
pub fn replay_document(p: &Program, doc: &TraceDocument) -> Result<TraceDocument, TraceError> {
    if doc.schema != SCHEMA_VERSION {
        return Err(TraceError::Schema(doc.schema));
    }
    let query = parse_atom(&doc.query)?;
    let search = match &doc.lifted_query {
        Some(_) => Some(ProofSearch::new(p, &query)?),
        None => None,
    };
    if let (Some(s), Some(lifted)) = (&search, &doc.lifted_query) {
        if &s.lifted.to_string() != lifted {
            return Err(TraceError::Mismatch {
                result: 0,
                message: format!("lifted query is `{}`, document has `{lifted}`", s.lifted),
            });
        }
    }
    let (program, root) = match &search {
        Some(s) => (&s.transformed, Goal::single(s.lifted.clone())),
        None => (p, Goal::single(query.clone())),
    };

    let mut results = Vec::with_capacity(doc.results.len());
    for (n, r) in doc.results.iter().enumerate() {
        let refs: Vec<StepRef> = r
            .steps()
            .iter()
            .map(|s| StepRef { kind: s.kind, label: Symbol::new(&s.label), index: s.index })
            .collect();
        let (records, goal, state) =
            replay(program, &root, &refs).map_err(|source| TraceError::Replay { result: n, source })?;
        let rebuilt = match r {
            ResultDoc::Success { .. } => {
                if !goal.is_empty() {
                    return Err(TraceError::Mismatch { result: n, message: format!("replay ends in {goal}, not in {{}}") });
                }
                match &search {
                    Some(s) => {
                        let answer = state.answer.restrict(&s.lifted.vars());
                        proved_doc(&s.extract(&answer, records))
                    }
                    None => result_doc(&Outcome::Success { answer: state.answer.restrict(&query.vars()), trace: records }),
                }
            }
            ResultDoc::Stuck { .. } => {
                if !is_stuck(program, doc.strategy, &goal, &state) {
                    return Err(TraceError::Mismatch {
                        result: n,
                        message: format!("{} has an applicable {} step", goal, doc.strategy),
                    });
                }
                result_doc(&Outcome::Stuck { goal, trace: records })
            }
            ResultDoc::FuelExhausted { cause, open_branches, .. } => result_doc(&Outcome::FuelExhausted {
                cause: *cause,
                goal,
                path: refs,
                open_branches: *open_branches,
            }),
        };
        results.push(rebuilt);
    }
    Ok(TraceDocument {
        schema: SCHEMA_VERSION,
        strategy: doc.strategy,
        query: query.to_string(),
        lifted_query: doc.lifted_query.clone(),
        results,
    })
}

fn is_stuck(p: &Program, strategy: Strategy, goal: &Goal, st: &EngineState) -> bool {
    if goal.is_empty() {
        return false;
    }
    let any_at = |f: fn(&Program, &Goal, &EngineState, usize) -> Vec<_>| (0..goal.len()).any(|i| !f(p, goal, st, i).is_empty());
    match strategy {
        Strategy::Unif => step_unif(p, goal, st).is_empty(),
        Strategy::Tm => !any_at(step_tm_at),
        Strategy::Struct => !any_at(step_tm_at) && !any_at(step_subst_at),
    }
}

impl fmt::Display for TraceDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "query {} ({})", self.query, self.strategy)?;
        if let Some(l) = &self.lifted_query {
            writeln!(f, "solving {l} on the transformed program")?;
        }
        for r in &self.results {
            write_result(f, r)?;
        }
        Ok(())
    }
}

fn write_map(f: &mut fmt::Formatter<'_>, m: &BTreeMap<String, String>) -> fmt::Result {
    let parts: Vec<String> = m.iter().map(|(k, v)| format!("{k} = {v}")).collect();
    write!(f, "[{}]", parts.join(", "))
}

fn write_steps(f: &mut fmt::Formatter<'_>, steps: &[StepDoc]) -> fmt::Result {
    for s in steps {
        let arrow = match s.kind {
            StepKind::Unif => "~>",
            StepKind::Tm => "->",
            StepKind::Subst => "+>",
        };
        write!(f, "  {arrow} {} @{}", s.label, s.index)?;
        if let (Some(b), true) = (&s.binding, s.kind != StepKind::Tm) {
            f.write_str(" ")?;
            write_map(f, b)?;
        }
        if let Some(g) = &s.goal {
            write!(f, "  {{{}}}", g.join(", "))?;
        }
        writeln!(f)?;
    }
    Ok(())
}

fn write_result(f: &mut fmt::Formatter<'_>, r: &ResultDoc) -> fmt::Result {
    match r {
        ResultDoc::Success { answer, steps, proof } => {
            f.write_str("success ")?;
            write_map(f, answer)?;
            writeln!(f)?;
            write_steps(f, steps)?;
            if let Some(p) = proof {
                writeln!(f, "  witness {}", p.witness)?;
                if let Some(n) = &p.proof {
                    writeln!(f, "  proof {n}")?;
                }
                match &p.reason {
                    None => writeln!(f, "  checked")?,
                    Some(r) => writeln!(f, "  not checked: {r}")?,
                }
            }
        }
        ResultDoc::Stuck { goal, steps } => {
            writeln!(f, "stuck at {{{}}}", goal.join(", "))?;
            write_steps(f, steps)?;
        }
        ResultDoc::FuelExhausted { cause, goal, steps, open_branches } => {
            let what = match cause {
                FuelKind::Total => "fuel exhausted",
                FuelKind::TmPhase => "term-matching phase exhausted its fuel",
            };
            let shown = if goal.len() > 6 {
                format!("{}, ... ({} atoms)", goal[..3].join(", "), goal.len())
            } else {
                goal.join(", ")
            };
            writeln!(
                f,
                "{what} after {} steps on this branch ({open_branches} open choice points), at {{{shown}}}",
                steps.len(),
            )?;
        }
    }
    Ok(())
}
