//! Agent programs: initial beliefs, rules and plans.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::formula::{ContextFormula, Rule};
use crate::term::{Literal, Term};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum TriggerKind {
    AddBelief,
    DelBelief,
    AddGoal,
    DelGoal,
}

impl TriggerKind {
    pub fn prefix(self) -> &'static str {
        match self {
            TriggerKind::AddBelief => "+",
            TriggerKind::DelBelief => "-",
            TriggerKind::AddGoal => "+!",
            TriggerKind::DelGoal => "-!",
        }
    }

    pub fn is_goal(self) -> bool {
        matches!(self, TriggerKind::AddGoal | TriggerKind::DelGoal)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Trigger {
    pub kind: TriggerKind,
    pub literal: Literal,
}

impl Trigger {
    pub fn new(kind: TriggerKind, literal: Literal) -> Self {
        Trigger { kind, literal }
    }
}

impl fmt::Display for Trigger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.kind.prefix(), self.literal)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Performative {
    Tell,
    Achieve,
}

impl Performative {
    pub fn as_str(self) -> &'static str {
        match self {
            Performative::Tell => "tell",
            Performative::Achieve => "achieve",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "tell" => Some(Performative::Tell),
            "achieve" => Some(Performative::Achieve),
            _ => None,
        }
    }
}

impl fmt::Display for Performative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One element of a plan body.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum ActionStep {
    AddBelief(Literal),
    DelBelief(Literal),
    Achieve(Literal),
    Test(ContextFormula),
    /// `.send(To, tell|achieve, Content)`. `to` may be a variable bound by
    /// the plan's trigger or context.
    Send { to: Term, performative: Performative, content: Literal },
    PublishDecision(Term),
    External { name: String, args: Vec<Term> },
}

impl fmt::Display for ActionStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionStep::AddBelief(l) => write!(f, "+{l}"),
            ActionStep::DelBelief(l) => write!(f, "-{l}"),
            ActionStep::Achieve(l) => write!(f, "!{l}"),
            ActionStep::Test(c) => write!(f, "?{c}"),
            ActionStep::Send { to, performative, content } => {
                write!(f, ".send({to},{performative},{content})")
            }
            ActionStep::PublishDecision(t) => write!(f, ".publish_decision({t})"),
            ActionStep::External { name, args } => write!(f, "{}", Term::compound(name.clone(), args.clone())),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Plan {
    pub trigger: Trigger,
    pub context: ContextFormula,
    pub body: Vec<ActionStep>,
}

impl fmt::Display for Plan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.trigger)?;
        if self.context != ContextFormula::True {
            write!(f, " : {}", self.context)?;
        }
        if !self.body.is_empty() {
            f.write_str(" <- ")?;
            for (i, step) in self.body.iter().enumerate() {
                if i > 0 {
                    f.write_str("; ")?;
                }
                write!(f, "{step}")?;
            }
        }
        f.write_str(".")
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct AgentProgram {
    pub initial_beliefs: Vec<Literal>,
    pub rules: Vec<Rule>,
    /// Kept in source order; the first applicable plan wins.
    pub plans: Vec<Plan>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LintWarning {
    pub message: String,
}

impl fmt::Display for LintWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "warning: {}", self.message)
    }
}

impl AgentProgram {
    pub fn lint(&self) -> Vec<LintWarning> {
        let mut out = Vec::new();
        for rule in &self.rules {
            for v in rule.unbound_head_vars() {
                out.push(LintWarning {
                    message: format!("variable {v} in the head of `{rule}` does not occur in its body"),
                });
            }
        }
        out
    }
}

impl fmt::Display for AgentProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.initial_beliefs {
            writeln!(f, "{b}.")?;
        }
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        for p in &self.plans {
            writeln!(f, "{p}")?;
        }
        Ok(())
    }
}
