//! AgentSpeak subset for BDI agents, usable without the standard library.
//!
//! The crate covers the language (terms, parser, unification, a Horn-clause
//! solver with negation as failure) and the per-agent reasoning cycle. IO,
//! threading and HTTP live in the `jason-rs` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod agent;
pub mod belief;
pub mod decimal;
pub mod formula;
pub mod mas;
pub mod parser;
pub mod program;
pub mod solve;
pub mod term;
pub mod unify;

pub use agent::{
    Agent, AgentEnv, AgentError, CycleReport, Decision, DecisionRegister, Event, EventOrigin, Intention, IntentionId,
    Message, StepOutcome, StepRecord,
};
pub use belief::BeliefBase;
pub use decimal::Decimal;
pub use formula::{eval_expr, BinOp, ContextFormula, EvalError, Expr, RelOp, Rule};
pub use mas::{ActionFn, ActionTable, Clock, Mas, MasError, StepClock};
pub use parser::{parse_formula, parse_literal, parse_program, parse_term, ParseError};
pub use program::{ActionStep, AgentProgram, LintWarning, Performative, Plan, Trigger, TriggerKind};
pub use solve::{solve, SolveConfig, SolveError, Solutions};
pub use term::{Literal, Substitution, Term};
pub use unify::unify;
