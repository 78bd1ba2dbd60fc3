use alloc::vec::Vec;

use crate::formula::{ContextFormula, Rule};
use crate::solve::{SolveConfig, Solutions};
use crate::term::{Literal, Substitution};
use crate::unify::match_literal;

/// Ground facts in insertion order plus the agent's rules.
///
/// Facts have set semantics: two literals that are equal including their
/// annotations are never stored twice.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BeliefBase {
    facts: Vec<Literal>,
    rules: Vec<Rule>,
}

impl BeliefBase {
    pub fn new(rules: Vec<Rule>) -> Self {
        BeliefBase { facts: Vec::new(), rules }
    }

    pub fn facts(&self) -> &[Literal] {
        &self.facts
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn contains(&self, l: &Literal) -> bool {
        self.facts.contains(l)
    }

    /// Returns `false` when the literal was already present.
    pub fn add(&mut self, l: Literal) -> bool {
        debug_assert!(l.is_ground());
        if self.contains(&l) {
            false
        } else {
            self.facts.push(l);
            true
        }
    }

    pub fn remove(&mut self, l: &Literal) -> bool {
        match self.facts.iter().position(|f| f == l) {
            Some(i) => {
                self.facts.remove(i);
                true
            }
            None => false,
        }
    }

    /// Removes every fact that `pattern` matches, returning them in order.
    pub fn remove_matching(&mut self, pattern: &Literal) -> Vec<Literal> {
        let empty = Substitution::new();
        let mut removed = Vec::new();
        self.facts.retain(|f| {
            if match_literal(pattern, f, &empty).is_some() {
                removed.push(f.clone());
                false
            } else {
                true
            }
        });
        removed
    }

    pub fn query(&self, goal: &ContextFormula, initial: Substitution, config: SolveConfig) -> Solutions<'_> {
        Solutions::new(goal, initial, &self.facts, &self.rules, config)
    }
}
