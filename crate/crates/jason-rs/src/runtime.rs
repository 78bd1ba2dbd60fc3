//! Thread-safe wrapper around the core multi-agent system.
//!
//! Callers on any thread enqueue percepts and messages into per-agent
//! inboxes; only [`Runtime::step`] mutates agent state. Decisions are
//! snapshotted after every step so reads never wait on a cycle.

use std::collections::{BTreeMap, VecDeque};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Condvar, Mutex, RwLock};
use std::thread::JoinHandle;
use std::time::{SystemTime, UNIX_EPOCH};

use jason_rs_core::{ActionFn, AgentProgram, Clock, CycleReport, Decision, Literal, Mas, MasError, Performative};

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum RuntimeError {
    #[error("agent `{0}` already exists")]
    DuplicateAgentName(String),
    #[error("no agent named `{0}`")]
    UnknownAgent(String),
    #[error("percept `{0}` is not ground")]
    NonGroundPercept(String),
    #[error("message content `{0}` is not ground")]
    NonGroundContent(String),
    #[error("still busy after {cycles} cycles")]
    QuiescenceTimeout { cycles: usize },
    #[error("cycle limit must be positive")]
    ZeroCycleLimit,
}

impl From<MasError> for RuntimeError {
    fn from(e: MasError) -> Self {
        match e {
            MasError::DuplicateAgentName(n) => RuntimeError::DuplicateAgentName(n),
            MasError::UnknownAgent(n) => RuntimeError::UnknownAgent(n),
            MasError::Agent(jason_rs_core::AgentError::NonGroundPercept(l)) => {
                RuntimeError::NonGroundPercept(l.to_string())
            }
            MasError::Agent(jason_rs_core::AgentError::NonGroundContent(l)) => {
                RuntimeError::NonGroundContent(l.to_string())
            }
            MasError::QuiescenceTimeout { cycles } => RuntimeError::QuiescenceTimeout { cycles },
            MasError::ZeroCycleLimit => RuntimeError::ZeroCycleLimit,
        }
    }
}

#[derive(Debug, Clone)]
enum Input {
    Percept(Literal),
    Message { from: String, performative: Performative, content: Literal },
    Retract(String),
}

#[derive(Default)]
struct Cell {
    inbox: Mutex<VecDeque<Input>>,
    receipts: AtomicU64,
    decision: Mutex<Option<Decision>>,
}

/// Wall-clock milliseconds since the Unix epoch.
#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now_ms(&self) -> u64 {
        SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
    }
}

struct Inner {
    mas: Mutex<Mas>,
    cells: RwLock<BTreeMap<String, Arc<Cell>>>,
    pending: Mutex<bool>,
    wake: Condvar,
    stop: AtomicBool,
}

/// Cheap to clone; all clones share the same agents.
#[derive(Clone)]
pub struct Runtime {
    inner: Arc<Inner>,
}

impl std::fmt::Debug for Runtime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Runtime").field("agents", &self.agent_names()).finish()
    }
}

impl Default for Runtime {
    fn default() -> Self {
        Runtime::new(Box::new(SystemClock))
    }
}

impl Runtime {
    pub fn new(clock: Box<dyn Clock>) -> Self {
        Runtime {
            inner: Arc::new(Inner {
                mas: Mutex::new(Mas::new(clock)),
                cells: RwLock::new(BTreeMap::new()),
                pending: Mutex::new(false),
                wake: Condvar::new(),
                stop: AtomicBool::new(false),
            }),
        }
    }

    fn mas(&self) -> std::sync::MutexGuard<'_, Mas> {
        self.inner.mas.lock().expect("runtime lock poisoned")
    }

    fn cell(&self, agent: &str) -> Result<Arc<Cell>, RuntimeError> {
        let cells = self.inner.cells.read().expect("runtime lock poisoned");
        cells.get(agent).cloned().ok_or_else(|| RuntimeError::UnknownAgent(agent.into()))
    }

    pub fn create_agent(&self, name: &str, program: AgentProgram) -> Result<(), RuntimeError> {
        let mut mas = self.mas();
        mas.create_agent(name, program)?;
        self.inner.cells.write().expect("runtime lock poisoned").insert(name.into(), Arc::new(Cell::default()));
        drop(mas);
        self.notify();
        Ok(())
    }

    pub fn register_action(&self, name: &str, action: ActionFn) {
        self.mas().actions_mut().register(name, action);
    }

    pub fn has_agent(&self, name: &str) -> bool {
        self.inner.cells.read().expect("runtime lock poisoned").contains_key(name)
    }

    pub fn agent_names(&self) -> Vec<String> {
        self.mas().agent_names().to_vec()
    }

    fn enqueue(&self, agent: &str, input: Input) -> Result<u64, RuntimeError> {
        let cell = self.cell(agent)?;
        let seq = {
            let mut inbox = cell.inbox.lock().expect("inbox lock poisoned");
            inbox.push_back(input);
            cell.receipts.fetch_add(1, Ordering::SeqCst) + 1
        };
        self.notify();
        Ok(seq)
    }

    /// Queues a percept; returns the agent's input receipt number.
    pub fn inject_percept(&self, agent: &str, literal: Literal) -> Result<u64, RuntimeError> {
        if !literal.is_ground() {
            return Err(RuntimeError::NonGroundPercept(literal.to_string()));
        }
        self.enqueue(agent, Input::Percept(literal))
    }

    pub fn deliver_message(
        &self,
        to: &str,
        from: &str,
        performative: Performative,
        content: Literal,
    ) -> Result<u64, RuntimeError> {
        if !content.is_ground() {
            return Err(RuntimeError::NonGroundContent(content.to_string()));
        }
        self.enqueue(to, Input::Message { from: from.into(), performative, content })
    }

    pub fn retract_percepts(&self, agent: &str, predicate: &str) -> Result<u64, RuntimeError> {
        self.enqueue(agent, Input::Retract(predicate.into()))
    }

    pub fn read_decision(&self, agent: &str) -> Result<Option<Decision>, RuntimeError> {
        let cell = self.cell(agent)?;
        let d = cell.decision.lock().expect("decision lock poisoned").clone();
        Ok(d)
    }

    /// Rendered beliefs, sorted.
    pub fn beliefs(&self, agent: &str) -> Result<Vec<String>, RuntimeError> {
        let mas = self.mas();
        let mut out: Vec<String> = mas.agent(agent)?.beliefs().facts().iter().map(ToString::to_string).collect();
        out.sort();
        Ok(out)
    }

    /// Runs `f` against the core system while holding the executor lock.
    pub fn inspect<R>(&self, f: impl FnOnce(&Mas) -> R) -> R {
        f(&self.mas())
    }

    fn drain(&self, mas: &mut Mas) {
        let cells: Vec<(String, Arc<Cell>)> = {
            let cells = self.inner.cells.read().expect("runtime lock poisoned");
            mas.agent_names().iter().filter_map(|n| cells.get(n).map(|c| (n.clone(), c.clone()))).collect()
        };
        for (name, cell) in cells {
            let inputs: Vec<Input> = cell.inbox.lock().expect("inbox lock poisoned").drain(..).collect();
            let agent = mas.agent_mut(&name).expect("cells mirror agents");
            for input in inputs {
                // inputs are validated on enqueue
                match input {
                    Input::Percept(l) => {
                        agent.inject_percept(l).expect("ground percept");
                    }
                    Input::Message { from, performative, content } => {
                        agent.deliver_message(&from, performative, content).expect("ground content");
                    }
                    Input::Retract(p) => {
                        agent.retract_percepts(&p);
                    }
                }
            }
        }
    }

    fn snapshot(&self, mas: &Mas) {
        let cells = self.inner.cells.read().expect("runtime lock poisoned");
        for agent in mas.agents() {
            if let Some(cell) = cells.get(agent.name()) {
                let mut slot = cell.decision.lock().expect("decision lock poisoned");
                if slot.as_ref() != agent.decision() {
                    *slot = agent.decision().cloned();
                }
            }
        }
    }

    fn inboxes_empty(&self) -> bool {
        let cells = self.inner.cells.read().expect("runtime lock poisoned");
        cells.values().all(|c| c.inbox.lock().expect("inbox lock poisoned").is_empty())
    }

    pub fn is_quiescent(&self) -> bool {
        let mas = self.mas();
        self.inboxes_empty() && mas.is_quiescent()
    }

    /// Moves queued inputs into the agents and runs one cycle on each.
    pub fn step(&self) -> Vec<CycleReport> {
        let mut mas = self.mas();
        self.drain(&mut mas);
        let reports = mas.cycle_all();
        self.snapshot(&mas);
        reports
    }

    pub fn run_until_quiescent(&self, max_cycles: usize) -> Result<usize, RuntimeError> {
        self.run_until_quiescent_traced(max_cycles, &mut |_| {})
    }

    /// Like [`Runtime::run_until_quiescent`], passing every cycle report to `trace`.
    pub fn run_until_quiescent_traced(
        &self,
        max_cycles: usize,
        trace: &mut dyn FnMut(&CycleReport),
    ) -> Result<usize, RuntimeError> {
        if max_cycles == 0 {
            return Err(RuntimeError::ZeroCycleLimit);
        }
        let mut used = 0;
        loop {
            let mut mas = self.mas();
            self.drain(&mut mas);
            if mas.is_quiescent() {
                return Ok(used);
            }
            if used == max_cycles {
                return Err(RuntimeError::QuiescenceTimeout { cycles: used });
            }
            for r in mas.cycle_all() {
                trace(&r);
            }
            self.snapshot(&mas);
            used += 1;
        }
    }

    fn notify(&self) {
        *self.inner.pending.lock().expect("wake lock poisoned") = true;
        self.inner.wake.notify_all();
    }

    /// Starts a background thread that cycles agents whenever work arrives.
    pub fn spawn_driver(&self) -> Driver {
        self.inner.stop.store(false, Ordering::SeqCst);
        let rt = self.clone();
        let handle = std::thread::Builder::new()
            .name("jason-rs-driver".into())
            .spawn(move || rt.drive())
            .expect("spawn driver thread");
        Driver { runtime: self.clone(), handle: Some(handle) }
    }

    fn drive(&self) {
        loop {
            {
                let mut pending = self.inner.pending.lock().expect("wake lock poisoned");
                while !*pending && !self.inner.stop.load(Ordering::SeqCst) {
                    pending = self.inner.wake.wait(pending).expect("wake lock poisoned");
                }
                *pending = false;
            }
            if self.inner.stop.load(Ordering::SeqCst) {
                return;
            }
            while !self.inner.stop.load(Ordering::SeqCst) && !self.is_quiescent() {
                for r in self.step() {
                    if !r.is_noop() {
                        tracing::debug!(target: "jason_rs::cycle", "{r}");
                    }
                }
            }
        }
    }
}

/// Stops the driver thread when dropped.
pub struct Driver {
    runtime: Runtime,
    handle: Option<JoinHandle<()>>,
}

impl Driver {
    pub fn stop(mut self) {
        self.shutdown();
    }

    fn shutdown(&mut self) {
        if let Some(h) = self.handle.take() {
            self.runtime.inner.stop.store(true, Ordering::SeqCst);
            self.runtime.notify();
            let _ = h.join();
        }
    }
}

impl Drop for Driver {
    fn drop(&mut self) {
        self.shutdown();
    }
}
