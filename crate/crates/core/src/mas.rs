//! A set of agents cycled round-robin in registration order.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::sync::atomic::{AtomicU64, Ordering};

use log::info;

use crate::agent::{Agent, AgentEnv, AgentError, CycleReport, Decision, Message};
use crate::program::{AgentProgram, Performative};
use crate::term::{Literal, Term};

pub trait Clock: Send {
    fn now_ms(&self) -> u64;
}

/// Starts at `start` and advances by `step` on every reading.
#[derive(Debug)]
pub struct StepClock {
    next: AtomicU64,
    step: u64,
}

impl StepClock {
    pub fn new(start: u64, step: u64) -> Self {
        StepClock { next: AtomicU64::new(start), step }
    }
}

impl Clock for StepClock {
    fn now_ms(&self) -> u64 {
        self.next.fetch_add(self.step, Ordering::Relaxed)
    }
}

pub type ActionFn = Box<dyn FnMut(&str, &[Term]) -> Result<(), String> + Send>;

/// External actions by name. The callback receives the calling agent's name
/// and the instantiated arguments.
#[derive(Default)]
pub struct ActionTable {
    actions: BTreeMap<String, ActionFn>,
}

impl ActionTable {
    pub fn register(&mut self, name: impl Into<String>, action: ActionFn) {
        self.actions.insert(name.into(), action);
    }

    pub fn perform(&mut self, agent: &str, name: &str, args: &[Term]) -> Result<(), String> {
        match self.actions.get_mut(name) {
            Some(f) => f(agent, args),
            None => {
                info!("{agent}: unregistered action {}", Term::compound(name, args.to_vec()));
                Ok(())
            }
        }
    }
}

impl fmt::Debug for ActionTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.actions.keys()).finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MasError {
    DuplicateAgentName(String),
    UnknownAgent(String),
    Agent(AgentError),
    QuiescenceTimeout { cycles: usize },
    ZeroCycleLimit,
}

impl fmt::Display for MasError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MasError::DuplicateAgentName(n) => write!(f, "agent `{n}` already exists"),
            MasError::UnknownAgent(n) => write!(f, "no agent named `{n}`"),
            MasError::Agent(e) => write!(f, "{e}"),
            MasError::QuiescenceTimeout { cycles } => write!(f, "still busy after {cycles} cycles"),
            MasError::ZeroCycleLimit => f.write_str("cycle limit must be positive"),
        }
    }
}

impl core::error::Error for MasError {}

impl From<AgentError> for MasError {
    fn from(e: AgentError) -> Self {
        MasError::Agent(e)
    }
}

struct Env<'a> {
    names: &'a [String],
    clock: &'a dyn Clock,
    actions: &'a mut ActionTable,
    outbox: Vec<(String, Message)>,
}

impl AgentEnv for Env<'_> {
    fn now_ms(&self) -> u64 {
        self.clock.now_ms()
    }

    fn agent_exists(&self, name: &str) -> bool {
        self.names.iter().any(|n| n == name)
    }

    fn send(&mut self, to: &str, message: Message) {
        self.outbox.push((to.into(), message));
    }

    fn perform(&mut self, agent: &str, action: &str, args: &[Term]) -> Result<(), String> {
        self.actions.perform(agent, action, args)
    }
}

pub struct Mas {
    agents: Vec<Agent>,
    names: Vec<String>,
    clock: Box<dyn Clock>,
    actions: ActionTable,
}

impl fmt::Debug for Mas {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Mas").field("agents", &self.names).field("actions", &self.actions).finish()
    }
}

impl Mas {
    pub fn new(clock: Box<dyn Clock>) -> Self {
        Mas { agents: Vec::new(), names: Vec::new(), clock, actions: ActionTable::default() }
    }

    pub fn actions_mut(&mut self) -> &mut ActionTable {
        &mut self.actions
    }

    pub fn create_agent(&mut self, name: &str, program: AgentProgram) -> Result<&Agent, MasError> {
        if self.index(name).is_some() {
            return Err(MasError::DuplicateAgentName(name.into()));
        }
        self.agents.push(Agent::new(name, program));
        self.names.push(name.into());
        Ok(self.agents.last().expect("just pushed"))
    }

    pub fn agent_names(&self) -> &[String] {
        &self.names
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn agent(&self, name: &str) -> Result<&Agent, MasError> {
        self.index(name).map(|i| &self.agents[i]).ok_or_else(|| MasError::UnknownAgent(name.into()))
    }

    pub fn agent_mut(&mut self, name: &str) -> Result<&mut Agent, MasError> {
        match self.index(name) {
            Some(i) => Ok(&mut self.agents[i]),
            None => Err(MasError::UnknownAgent(name.into())),
        }
    }

    pub fn inject_percept(&mut self, agent: &str, literal: Literal) -> Result<u64, MasError> {
        Ok(self.agent_mut(agent)?.inject_percept(literal)?)
    }

    pub fn retract_percepts(&mut self, agent: &str, predicate: &str) -> Result<usize, MasError> {
        Ok(self.agent_mut(agent)?.retract_percepts(predicate))
    }

    pub fn deliver_message(
        &mut self,
        to: &str,
        from: &str,
        performative: Performative,
        content: Literal,
    ) -> Result<(), MasError> {
        Ok(self.agent_mut(to)?.deliver_message(from, performative, content)?)
    }

    pub fn read_decision(&self, agent: &str) -> Result<Option<Decision>, MasError> {
        Ok(self.agent(agent)?.decision().cloned())
    }

    pub fn is_quiescent(&self) -> bool {
        self.agents.iter().all(Agent::is_idle)
    }

    /// Runs one reasoning cycle on every agent in registration order. Messages
    /// sent during an agent's cycle land in the recipients' mailboxes before
    /// the next agent runs.
    pub fn cycle_all(&mut self) -> Vec<CycleReport> {
        let mut reports = Vec::with_capacity(self.agents.len());
        for i in 0..self.agents.len() {
            let mut env =
                Env { names: &self.names, clock: self.clock.as_ref(), actions: &mut self.actions, outbox: Vec::new() };
            reports.push(self.agents[i].reasoning_cycle(&mut env));
            for (to, message) in env.outbox {
                if let Some(j) = self.names.iter().position(|n| *n == to) {
                    self.agents[j].receive(message);
                }
            }
        }
        reports
    }

    /// Cycles until every agent is idle. One cycle is one pass over all
    /// agents; returns the number of passes.
    pub fn run_until_quiescent(&mut self, max_cycles: usize) -> Result<usize, MasError> {
        self.run_until_quiescent_traced(max_cycles, &mut |_| {})
    }

    pub fn run_until_quiescent_traced(
        &mut self,
        max_cycles: usize,
        trace: &mut dyn FnMut(&CycleReport),
    ) -> Result<usize, MasError> {
        if max_cycles == 0 {
            return Err(MasError::ZeroCycleLimit);
        }
        let mut used = 0;
        while !self.is_quiescent() {
            if used == max_cycles {
                return Err(MasError::QuiescenceTimeout { cycles: used });
            }
            for r in self.cycle_all() {
                trace(&r);
            }
            used += 1;
        }
        Ok(used)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_literal, parse_program};
    use alloc::string::ToString;
    use alloc::sync::Arc;
    use alloc::vec;
    use core::sync::atomic::AtomicUsize;

    fn mas() -> Mas {
        Mas::new(Box::new(StepClock::new(1_000, 1)))
    }

    fn lit(s: &str) -> Literal {
        parse_literal(s).unwrap()
    }

    #[test]
    fn create_agent_contract() {
        let mut m = mas();
        assert_eq!(m.create_agent("decider", AgentProgram::default()).unwrap().events().count(), 0);
        let e1 = m.create_agent("e1", parse_program("cost(e1,10).").unwrap()).unwrap();
        let evs: Vec<String> = e1.events().map(|e| e.trigger.to_string()).collect();
        assert_eq!(evs, vec!["+cost(e1,10)[source(self)]"]);
        assert_eq!(m.create_agent("e1", AgentProgram::default()).unwrap_err(), MasError::DuplicateAgentName("e1".into()));
    }

    #[test]
    fn unknown_agents() {
        let mut m = mas();
        let ghost = MasError::UnknownAgent("ghost".into());
        assert_eq!(m.deliver_message("ghost", "x", Performative::Tell, lit("p")).unwrap_err(), ghost);
        assert_eq!(m.read_decision("ghost").unwrap_err(), ghost);
        assert_eq!(m.inject_percept("ghost", lit("p")).unwrap_err(), ghost);
    }

    #[test]
    fn quiescence() {
        let mut m = mas();
        assert_eq!(m.run_until_quiescent(5), Ok(0));
        assert_eq!(m.run_until_quiescent(0), Err(MasError::ZeroCycleLimit));

        m.create_agent("a", parse_program("+data(X) <- .publish_decision(X).").unwrap()).unwrap();
        m.inject_percept("a", lit("data(1)")).unwrap();
        let used = m.run_until_quiescent(10).unwrap();
        assert!(used <= 3, "{used}");
        let d = m.read_decision("a").unwrap().unwrap();
        assert_eq!((d.content, d.seq), (Term::int(1), 1));
    }

    #[test]
    fn mutual_tell_loop_times_out() {
        let ping = "+ping(X)[source(b)] <- -ping(X)[source(b)]; .send(b, tell, ping(X)).";
        let pong = "+ping(X)[source(a)] <- -ping(X)[source(a)]; .send(a, tell, ping(X)).";
        let mut m = mas();
        m.create_agent("a", parse_program(ping).unwrap()).unwrap();
        m.create_agent("b", parse_program(pong).unwrap()).unwrap();
        m.deliver_message("a", "b", Performative::Tell, lit("ping(0)")).unwrap();
        assert_eq!(m.run_until_quiescent(50), Err(MasError::QuiescenceTimeout { cycles: 50 }));
    }

    #[test]
    fn messages_are_routed() {
        let mut m = mas();
        m.create_agent("e1", parse_program("cost(e1,10).\n+cost(A,C)[source(self)] <- .send(d, tell, cost(A,C)).").unwrap())
            .unwrap();
        m.create_agent("d", parse_program("+cost(A,C)[source(A)] <- .publish_decision(A).").unwrap()).unwrap();
        m.run_until_quiescent(10).unwrap();
        assert!(m.agent("d").unwrap().beliefs().contains(&lit("cost(e1,10)[source(e1)]")));
        assert_eq!(m.read_decision("d").unwrap().unwrap().content, Term::atom("e1"));
    }

    #[test]
    fn registered_actions_are_called() {
        let calls = Arc::new(AtomicUsize::new(0));
        let seen = calls.clone();
        let mut m = mas();
        m.actions_mut().register(
            "ring",
            Box::new(move |agent, args| {
                assert_eq!(agent, "a");
                assert_eq!(args, [Term::int(2)]);
                seen.fetch_add(1, Ordering::SeqCst);
                Ok(())
            }),
        );
        m.create_agent("a", parse_program("+!go <- ring(2); unknown(1).").unwrap()).unwrap();
        m.deliver_message("a", "h", Performative::Achieve, lit("go")).unwrap();
        m.run_until_quiescent(10).unwrap();
        assert_eq!(calls.load(Ordering::SeqCst), 1);
    }

    #[test]
    fn identical_runs_give_identical_traces() {
        let src = "cost(e1,10). cost(e2,7).\n\
                   best(A) :- cost(A,C) & not (cost(B,D) & D < C).\n\
                   +data(X) : best(A) <- +seen(X); .publish_decision(pick(A,X)).";
        let run = || {
            let mut m = mas();
            m.create_agent("d", parse_program(src).unwrap()).unwrap();
            let mut trace = Vec::new();
            for v in [3, 9, 3] {
                m.inject_percept("d", Literal::new("data", vec![Term::int(v)])).unwrap();
                m.run_until_quiescent_traced(20, &mut |r| trace.push(r.to_string())).unwrap();
            }
            (trace, m.read_decision("d").unwrap())
        };
        let (t1, d1) = run();
        let (t2, d2) = run();
        assert_eq!(t1, t2);
        assert_eq!(d1, d2);
        let d = d1.unwrap();
        assert_eq!(d.content.to_string(), "pick(e2,3)");
        assert_eq!(d.seq, 3);
    }
}
