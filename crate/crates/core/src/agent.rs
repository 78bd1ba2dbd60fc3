//! A single BDI agent and its reasoning cycle.
//!
//! One call to [`Agent::reasoning_cycle`]:
//!
//! 1. applies queued messages from the mailbox,
//! 2. pops the oldest event, if any,
//! 3. collects relevant plans (trigger unifies with the event) in source order,
//! 4. takes the first whose context has a solution, with its first solution,
//! 5. starts a new intention for it, or stacks it on the intention that
//!    posted the subgoal,
//! 6. picks the next runnable intention round-robin and runs exactly one
//!    body step.
//!
//! The agent only touches the outside world through [`AgentEnv`].

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use log::{debug, warn};

use crate::belief::BeliefBase;
use crate::program::{ActionStep, AgentProgram, Performative, Plan, Trigger, TriggerKind};
use crate::solve::SolveConfig;
use crate::term::{Literal, Substitution, Term};
use crate::unify::{match_literal, unify_literal_args};

pub type IntentionId = u64;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum EventOrigin {
    Percept,
    /// Raised by an intention, or by program installation when `None`.
    Internal(Option<IntentionId>),
    Message(String),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Event {
    pub trigger: Trigger,
    pub origin: EventOrigin,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Message {
    pub from: String,
    pub performative: Performative,
    pub content: Literal,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Decision {
    pub content: Term,
    pub seq: u64,
    pub timestamp_ms: u64,
}

#[derive(Clone, Default, Debug)]
pub struct DecisionRegister {
    latest: Option<Decision>,
}

impl DecisionRegister {
    pub fn latest(&self) -> Option<&Decision> {
        self.latest.as_ref()
    }

    pub fn publish(&mut self, content: Term, timestamp_ms: u64) -> &Decision {
        let seq = self.latest.as_ref().map_or(1, |d| d.seq + 1);
        self.latest.insert(Decision { content, seq, timestamp_ms })
    }
}

#[derive(Clone, Debug)]
struct Frame {
    plan: usize,
    step: usize,
    subst: Substitution,
    /// The subgoal this frame achieves, as posted by the frame below.
    goal: Option<Literal>,
}

#[derive(Clone, Debug)]
pub struct Intention {
    id: IntentionId,
    frames: Vec<Frame>,
    /// Suspended until the posted subgoal event is handled.
    waiting: bool,
}

impl Intention {
    pub fn id(&self) -> IntentionId {
        self.id
    }

    pub fn depth(&self) -> usize {
        self.frames.len()
    }

    pub fn is_waiting(&self) -> bool {
        self.waiting
    }
}

/// Services an agent needs from its runtime while executing a step.
pub trait AgentEnv {
    fn now_ms(&self) -> u64;
    fn agent_exists(&self, name: &str) -> bool;
    fn send(&mut self, to: &str, message: Message);
    fn perform(&mut self, agent: &str, action: &str, args: &[Term]) -> Result<(), String>;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AgentError {
    NonGroundPercept(Literal),
    NonGroundContent(Literal),
}

impl fmt::Display for AgentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgentError::NonGroundPercept(l) => write!(f, "percept `{l}` is not ground"),
            AgentError::NonGroundContent(l) => write!(f, "message content `{l}` is not ground"),
        }
    }
}

impl core::error::Error for AgentError {}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum StepOutcome {
    Done,
    /// The intention posted a subgoal and waits for it.
    Suspended,
    Failed(String),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct StepRecord {
    pub intention: IntentionId,
    /// The step with the frame's bindings applied.
    pub step: String,
    pub outcome: StepOutcome,
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct CycleReport {
    pub agent: String,
    pub messages: usize,
    pub event: Option<Trigger>,
    /// Index of the selected plan in the plan library.
    pub plan: Option<usize>,
    pub step: Option<StepRecord>,
    pub published: Option<Decision>,
    pub notes: Vec<String>,
}

impl CycleReport {
    pub fn is_noop(&self) -> bool {
        self.messages == 0 && self.event.is_none() && self.step.is_none()
    }
}

impl fmt::Display for CycleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.agent)?;
        if self.is_noop() {
            return f.write_str(" idle");
        }
        if self.messages > 0 {
            write!(f, " msgs={}", self.messages)?;
        }
        if let Some(ev) = &self.event {
            write!(f, " event={ev}")?;
            match self.plan {
                Some(p) => write!(f, " plan=#{p}")?,
                None => f.write_str(" plan=none")?,
            }
        }
        if let Some(s) = &self.step {
            write!(f, " step=i{}:{}", s.intention, s.step)?;
            match &s.outcome {
                StepOutcome::Done => {}
                StepOutcome::Suspended => f.write_str(" (suspended)")?,
                StepOutcome::Failed(why) => write!(f, " (failed: {why})")?,
            }
        }
        if let Some(d) = &self.published {
            write!(f, " decision={}#{}", d.content, d.seq)?;
        }
        for n in &self.notes {
            write!(f, " [{n}]")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Agent {
    name: String,
    beliefs: BeliefBase,
    plans: Vec<Plan>,
    events: VecDeque<Event>,
    intentions: Vec<Intention>,
    last_run: IntentionId,
    mailbox: VecDeque<Message>,
    decisions: DecisionRegister,
    next_intention: IntentionId,
    fresh: u64,
    percept_seq: u64,
    solve_config: SolveConfig,
}

impl Agent {
    /// Builds the agent and installs the initial beliefs, each raising a
    /// `+belief` event annotated `source(self)`.
    pub fn new(name: impl Into<String>, program: AgentProgram) -> Self {
        let mut agent = Agent {
            name: name.into(),
            beliefs: BeliefBase::new(program.rules),
            plans: program.plans,
            events: VecDeque::new(),
            intentions: Vec::new(),
            last_run: 0,
            mailbox: VecDeque::new(),
            decisions: DecisionRegister::default(),
            next_intention: 1,
            fresh: 0,
            percept_seq: 0,
            solve_config: SolveConfig::default(),
        };
        for mut b in program.initial_beliefs {
            if b.source().is_none() {
                b.set_source(Term::atom("self"));
            }
            agent.add_belief(b, EventOrigin::Internal(None));
        }
        agent
    }

    pub fn with_solve_config(mut self, config: SolveConfig) -> Self {
        self.solve_config = config;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn beliefs(&self) -> &BeliefBase {
        &self.beliefs
    }

    pub fn plans(&self) -> &[Plan] {
        &self.plans
    }

    pub fn events(&self) -> impl Iterator<Item = &Event> {
        self.events.iter()
    }

    pub fn intentions(&self) -> &[Intention] {
        &self.intentions
    }

    pub fn mailbox_len(&self) -> usize {
        self.mailbox.len()
    }

    pub fn decision(&self) -> Option<&Decision> {
        self.decisions.latest()
    }

    /// No pending messages, events or intentions.
    pub fn is_idle(&self) -> bool {
        self.mailbox.is_empty() && self.events.is_empty() && self.intentions.is_empty()
    }

    fn add_belief(&mut self, l: Literal, origin: EventOrigin) -> bool {
        let added = self.beliefs.add(l.clone());
        if added {
            self.events.push_back(Event { trigger: Trigger::new(TriggerKind::AddBelief, l), origin });
        }
        added
    }

    fn retracted(&mut self, l: Literal, origin: EventOrigin) {
        self.events.push_back(Event { trigger: Trigger::new(TriggerKind::DelBelief, l), origin });
    }

    /// Adds `literal` as a `source(percept)` belief. An existing percept with
    /// the same predicate and arity but a different value is retracted first
    /// (`-old` then `+new`); an identical percept changes nothing.
    pub fn inject_percept(&mut self, mut literal: Literal) -> Result<u64, AgentError> {
        if !literal.is_ground() {
            return Err(AgentError::NonGroundPercept(literal));
        }
        literal.set_source(Term::atom("percept"));
        self.percept_seq += 1;
        if self.beliefs.contains(&literal) {
            return Ok(self.percept_seq);
        }
        let old: Vec<Literal> = self
            .beliefs
            .facts()
            .iter()
            .filter(|f| f.same_signature(&literal) && f.has_source("percept"))
            .cloned()
            .collect();
        for o in old {
            self.beliefs.remove(&o);
            self.retracted(o, EventOrigin::Percept);
        }
        self.add_belief(literal, EventOrigin::Percept);
        Ok(self.percept_seq)
    }

    /// Retracts every percept-sourced belief named `predicate`; returns how many.
    pub fn retract_percepts(&mut self, predicate: &str) -> usize {
        let gone: Vec<Literal> = self
            .beliefs
            .facts()
            .iter()
            .filter(|f| f.predicate == predicate && f.has_source("percept"))
            .cloned()
            .collect();
        for g in &gone {
            self.beliefs.remove(g);
            self.retracted(g.clone(), EventOrigin::Percept);
        }
        gone.len()
    }

    /// Queues a message; it is applied at the start of the next cycle.
    pub fn receive(&mut self, message: Message) {
        self.mailbox.push_back(message);
    }

    /// Applies a message now: `tell` adds the content as a belief annotated
    /// with the sender, `achieve` raises a `+!content` event.
    pub fn deliver_message(&mut self, from: &str, performative: Performative, content: Literal) -> Result<(), AgentError> {
        if !content.is_ground() {
            return Err(AgentError::NonGroundContent(content));
        }
        let mut content = content;
        content.set_source(Term::atom(from));
        let origin = EventOrigin::Message(from.into());
        match performative {
            Performative::Tell => {
                self.add_belief(content, origin);
            }
            Performative::Achieve => {
                self.events.push_back(Event { trigger: Trigger::new(TriggerKind::AddGoal, content), origin });
            }
        }
        Ok(())
    }

    pub fn reasoning_cycle(&mut self, env: &mut dyn AgentEnv) -> CycleReport {
        let mut report = CycleReport { agent: self.name.clone(), ..CycleReport::default() };
        while let Some(m) = self.mailbox.pop_front() {
            report.messages += 1;
            if let Err(e) = self.deliver_message(&m.from, m.performative, m.content) {
                report.notes.push(e.to_string());
            }
        }
        if let Some(event) = self.events.pop_front() {
            report.event = Some(event.trigger.clone());
            report.plan = self.handle_event(event, &mut report.notes);
        }
        self.execute_next(env, &mut report);
        report
    }

    fn rename_event_vars(&mut self, l: &Literal) -> Literal {
        self.fresh += 1;
        let n = self.fresh;
        l.map_vars(&mut |v| Term::Var(format!("{v}#e{n}")))
    }

    /// First applicable plan for `trigger` with its first context solution.
    fn select_plan(&mut self, trigger: &Trigger, notes: &mut Vec<String>) -> Option<(usize, Substitution)> {
        let event_literal = self.rename_event_vars(&trigger.literal);
        for (i, plan) in self.plans.iter().enumerate() {
            if plan.trigger.kind != trigger.kind {
                continue;
            }
            let Some(s) = match_literal(&plan.trigger.literal, &event_literal, &Substitution::new()) else {
                continue;
            };
            match self.beliefs.query(&plan.context, s, self.solve_config).next() {
                Some(Ok(solution)) => return Some((i, solution)),
                Some(Err(e)) => {
                    warn!("{}: context of plan #{i} failed: {e}", self.name);
                    notes.push(format!("plan #{i} context error: {e}"));
                }
                None => {}
            }
        }
        None
    }

    fn handle_event(&mut self, event: Event, notes: &mut Vec<String>) -> Option<usize> {
        let selected = self.select_plan(&event.trigger, notes);
        let parent = match (&event.origin, event.trigger.kind) {
            (EventOrigin::Internal(Some(id)), TriggerKind::AddGoal) => Some(*id),
            _ => None,
        };
        let Some((plan, subst)) = selected else {
            match event.trigger.kind {
                TriggerKind::AddGoal => {
                    notes.push(format!("no applicable plan for {}", event.trigger));
                    if let Some(id) = parent {
                        self.drop_intention(id);
                    }
                    self.post_goal_failure(&event.trigger.literal);
                }
                _ => {
                    debug!("{}: discarding {} (no applicable plan)", self.name, event.trigger);
                    notes.push(format!("discarded {}", event.trigger));
                }
            }
            return None;
        };
        let goal = event.trigger.kind.is_goal().then(|| event.trigger.literal.clone());
        let frame = Frame { plan, step: 0, subst, goal };
        let target = parent.and_then(|id| self.intentions.iter().position(|i| i.id == id));
        let idx = match target {
            Some(idx) => {
                let int = &mut self.intentions[idx];
                int.frames.push(frame);
                int.waiting = false;
                idx
            }
            None => {
                if parent.is_some() {
                    // the posting intention is gone; nothing to extend
                    notes.push(format!("intention for {} no longer exists", event.trigger));
                    return Some(plan);
                }
                let id = self.next_intention;
                self.next_intention += 1;
                self.intentions.push(Intention { id, frames: alloc::vec![frame], waiting: false });
                self.intentions.len() - 1
            }
        };
        self.pop_finished(idx);
        Some(plan)
    }

    fn post_goal_failure(&mut self, goal: &Literal) {
        let trigger = Trigger::new(TriggerKind::DelGoal, goal.clone());
        if self.plans.iter().any(|p| p.trigger.kind == TriggerKind::DelGoal) {
            self.events.push_back(Event { trigger, origin: EventOrigin::Internal(None) });
        }
    }

    fn drop_intention(&mut self, id: IntentionId) {
        if let Some(idx) = self.intentions.iter().position(|i| i.id == id) {
            self.remove_intention(idx);
        }
    }

    fn remove_intention(&mut self, idx: usize) {
        self.intentions.remove(idx);
    }

    fn fail_intention(&mut self, idx: usize) {
        let goal = self.intentions[idx].frames.iter().rev().find_map(|f| f.goal.clone());
        self.remove_intention(idx);
        if let Some(g) = goal {
            self.post_goal_failure(&g);
        }
    }

    /// Pops completed frames, propagating subgoal bindings downward. Retires
    /// the intention when its stack empties; returns whether it was retired.
    fn pop_finished(&mut self, idx: usize) -> bool {
        loop {
            let int = &mut self.intentions[idx];
            let Some(top) = int.frames.last() else { break };
            if top.step < self.plans[top.plan].body.len() {
                return false;
            }
            let done = int.frames.pop().expect("non-empty");
            if let (Some(goal), Some(parent)) = (&done.goal, int.frames.last_mut()) {
                let achieved = done.subst.apply_literal(&self.plans[done.plan].trigger.literal);
                if let Some(s) = unify_literal_args(goal, &achieved, &parent.subst) {
                    parent.subst = s;
                }
            }
        }
        self.remove_intention(idx);
        true
    }

    fn execute_next(&mut self, env: &mut dyn AgentEnv, report: &mut CycleReport) {
        // intentions are kept in creation order, so ids ascend
        let runnable = |i: &Intention| !i.waiting;
        let after = self.intentions.iter().position(|i| runnable(i) && i.id > self.last_run);
        let Some(idx) = after.or_else(|| self.intentions.iter().position(runnable)) else {
            return;
        };
        let id = self.intentions[idx].id;
        self.last_run = id;
        let (step, subst) = {
            let frame = self.intentions[idx].frames.last_mut().expect("live intention has a frame");
            let step = self.plans[frame.plan].body[frame.step].clone();
            frame.step += 1;
            (step, frame.subst.clone())
        };
        let rendered = render_step(&step, &subst);
        let outcome = match self.run_step(idx, step, subst, env, report) {
            Ok(true) => StepOutcome::Suspended,
            Ok(false) => StepOutcome::Done,
            Err(why) => StepOutcome::Failed(why),
        };
        match &outcome {
            StepOutcome::Failed(why) => {
                warn!("{}: intention {id} failed: {why}", self.name);
                self.fail_intention(idx);
            }
            StepOutcome::Done => {
                self.pop_finished(idx);
            }
            StepOutcome::Suspended => {}
        }
        report.step = Some(StepRecord { intention: id, step: rendered, outcome });
    }

    /// Runs one step. `Ok(true)` means the intention is now suspended.
    fn run_step(
        &mut self,
        idx: usize,
        step: ActionStep,
        subst: Substitution,
        env: &mut dyn AgentEnv,
        report: &mut CycleReport,
    ) -> Result<bool, String> {
        let id = self.intentions[idx].id;
        let origin = EventOrigin::Internal(Some(id));
        match step {
            ActionStep::AddBelief(l) => {
                let mut l = subst.apply_literal(&l);
                if !l.is_ground() {
                    return Err(format!("cannot add non-ground belief {l}"));
                }
                if l.source().is_none() {
                    l.set_source(Term::atom("self"));
                }
                self.add_belief(l, origin);
            }
            ActionStep::DelBelief(l) => {
                let mut pattern = subst.apply_literal(&l);
                if pattern.source().is_none() {
                    pattern.set_source(Term::atom("self"));
                }
                for gone in self.beliefs.remove_matching(&pattern) {
                    self.retracted(gone, origin.clone());
                }
            }
            ActionStep::Achieve(g) => {
                let goal = subst.apply_literal(&g);
                self.events.push_back(Event { trigger: Trigger::new(TriggerKind::AddGoal, goal), origin });
                self.intentions[idx].waiting = true;
                return Ok(true);
            }
            ActionStep::Test(f) => {
                let found = self.beliefs.query(&f, subst, self.solve_config).next();
                match found {
                    Some(Ok(s)) => self.intentions[idx].frames.last_mut().expect("frame").subst = s,
                    Some(Err(e)) => return Err(format!("test goal error: {e}")),
                    None => return Err(format!("test goal ?{} has no solution", f)),
                }
            }
            ActionStep::Send { to, performative, content } => {
                let to = match subst.apply(&to) {
                    Term::Atom(a) => a,
                    other => return Err(format!("send target {other} is not an agent name")),
                };
                let content = subst.apply_literal(&content);
                if !content.is_ground() {
                    return Err(format!("cannot send non-ground content {content}"));
                }
                if !env.agent_exists(&to) {
                    return Err(format!("unknown agent {to}"));
                }
                env.send(&to, Message { from: self.name.clone(), performative, content });
            }
            ActionStep::PublishDecision(t) => {
                let d = self.decisions.publish(subst.apply(&t), env.now_ms());
                report.published = Some(d.clone());
            }
            ActionStep::External { name, args } => {
                let args: Vec<Term> = args.iter().map(|a| subst.apply(a)).collect();
                env.perform(&self.name, &name, &args)?;
            }
        }
        Ok(false)
    }
}

fn render_step(step: &ActionStep, s: &Substitution) -> String {
    match step {
        ActionStep::AddBelief(l) => format!("+{}", s.apply_literal(l)),
        ActionStep::DelBelief(l) => format!("-{}", s.apply_literal(l)),
        ActionStep::Achieve(l) => format!("!{}", s.apply_literal(l)),
        ActionStep::Test(f) => format!("?{}", f.apply(s)),
        ActionStep::Send { to, performative, content } => {
            format!(".send({},{performative},{})", s.apply(to), s.apply_literal(content))
        }
        ActionStep::PublishDecision(t) => format!(".publish_decision({})", s.apply(t)),
        ActionStep::External { name, args } => {
            Term::compound(name.clone(), args.iter().map(|a| s.apply(a)).collect()).to_string()
        }
    }
}
