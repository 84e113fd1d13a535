//! The reduction relations (`⤳` unification, `→` term matching, `↪`
//! substitution) and search over them.
//!
//! The one-step functions here work on fully instantiated goals and are the
//! reference semantics; [`solve`] searches with a shared-structure engine and
//! reconstructs every reported trace by replaying it through them.
//!
//! The `→` relation threads the answer substitution through unchanged: it
//! only matters once term-matching steps are interleaved with `↪` steps.

mod engine;
mod step;

pub use engine::{
    replay, solve, solve_goal, Exploration, FuelKind, Outcome, ReplayError, SearchConfig, Solutions, StepRef, Strategy,
    DEFAULT_FUEL, DEFAULT_TM_FUEL,
};
pub use step::{
    apply_step, first_tm_redex, step_subst, step_subst_at, step_tm, step_tm_at, step_unif, tm_normalize, EngineState,
    StepKind, StepRecord, TmDiverged, TmRun, Transition,
};
