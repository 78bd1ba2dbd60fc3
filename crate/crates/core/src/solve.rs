//! Depth-first SLD resolution with negation as failure.
//!
//! [`Solutions`] is a lazy iterator over answer substitutions. Clauses are
//! tried in source order: facts first, in belief-base order, then rules.
//! Every successful resolution step counts against
//! [`SolveConfig::max_steps`]; passing it yields
//! [`SolveError::DepthExceeded`] and ends the sequence.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::formula::{eval_expr, ContextFormula, EvalError, Expr, RelOp, Rule};
use crate::term::{Literal, Substitution, Term};
use crate::unify::{match_literal, unify};

pub const DEFAULT_MAX_STEPS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolveConfig {
    pub max_steps: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig { max_steps: DEFAULT_MAX_STEPS }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveError {
    DepthExceeded { limit: usize },
    UnboundArithmetic(String),
    /// `not` reached with a variable that is shared with the rest of the
    /// query but still unbound.
    FlounderingNegation(String),
    Eval(EvalError),
}

impl From<EvalError> for SolveError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::UnboundArithmetic(v) => SolveError::UnboundArithmetic(v),
            other => SolveError::Eval(other),
        }
    }
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::DepthExceeded { limit } => write!(f, "resolution exceeded {limit} steps"),
            SolveError::UnboundArithmetic(v) => write!(f, "unbound variable {v} in arithmetic"),
            SolveError::FlounderingNegation(v) => {
                write!(f, "variable {v} is unbound when negation is evaluated")
            }
            SolveError::Eval(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for SolveError {}

/// All answers to `goal` over `facts` and `rules` with the default step bound.
pub fn solve<'a>(goal: &ContextFormula, facts: &'a [Literal], rules: &'a [Rule]) -> Solutions<'a> {
    Solutions::new(goal, Substitution::new(), facts, rules, SolveConfig::default())
}

enum State {
    Run { goals: Vec<ContextFormula>, subst: Substitution },
    Choice { goals: Vec<ContextFormula>, subst: Substitution, literal: Literal, next: usize },
}

pub struct Solutions<'a> {
    facts: &'a [Literal],
    rules: &'a [Rule],
    config: SolveConfig,
    answer_vars: Vec<String>,
    // variables visible outside any `not`; a `not` may not leave one unbound
    shared_vars: Vec<String>,
    stack: Vec<State>,
    steps: usize,
    renames: usize,
    done: bool,
}

impl<'a> Solutions<'a> {
    /// Answers extend `initial`; each yielded substitution binds the goal's
    /// variables together with everything already bound in `initial`.
    pub fn new(
        goal: &ContextFormula,
        initial: Substitution,
        facts: &'a [Literal],
        rules: &'a [Rule],
        config: SolveConfig,
    ) -> Self {
        let mut answer_vars: Vec<String> = initial.iter().map(|(k, _)| k.clone()).collect();
        for v in goal.vars() {
            if !answer_vars.contains(&v) {
                answer_vars.push(v);
            }
        }
        let mut shared_vars: Vec<String> = initial.iter().map(|(k, _)| k.clone()).collect();
        collect_vars_outside_not(goal, &mut shared_vars);
        Solutions {
            facts,
            rules,
            config,
            answer_vars,
            shared_vars,
            stack: vec![State::Run { goals: vec![goal.clone()], subst: initial }],
            steps: 0,
            renames: 0,
            done: false,
        }
    }

    /// Resolution steps consumed so far.
    pub fn steps(&self) -> usize {
        self.steps
    }

    fn count_step(&mut self) -> Result<(), SolveError> {
        self.steps += 1;
        if self.steps > self.config.max_steps {
            Err(SolveError::DepthExceeded { limit: self.config.max_steps })
        } else {
            Ok(())
        }
    }

    fn rename(&mut self, rule: &Rule) -> Rule {
        self.renames += 1;
        let n = self.renames;
        // '#' cannot appear in source variables, so renamed names never clash
        let mut f = |v: &str| Term::Var(format!("{v}#{n}"));
        Rule { head: rule.head.map_vars(&mut f), body: rule.body.map_vars(&mut f) }
    }

    fn answer(&self, subst: &Substitution) -> Substitution {
        self.answer_vars
            .iter()
            .filter_map(|v| match subst.apply(&Term::Var(v.clone())) {
                Term::Var(same) if &same == v => None,
                t => Some((v.clone(), t)),
            })
            .collect()
    }

    /// Runs goals until success (`Some`) or failure (`None`).
    fn run(&mut self, mut goals: Vec<ContextFormula>, mut subst: Substitution) -> Result<Option<Substitution>, SolveError> {
        while let Some(goal) = goals.pop() {
            match goal {
                ContextFormula::True => {}
                ContextFormula::And(l, r) => {
                    goals.push(*r);
                    goals.push(*l);
                }
                ContextFormula::Rel(op, l, r) => match eval_rel(op, &l, &r, &subst)? {
                    Some(next) => subst = next,
                    None => return Ok(None),
                },
                ContextFormula::Not(inner) => {
                    self.check_negation(&inner, &goals, &subst)?;
                    if self.provable(&inner, &subst)? {
                        return Ok(None);
                    }
                }
                ContextFormula::Literal(literal) => {
                    self.stack.push(State::Choice { goals, subst, literal, next: 0 });
                    return Ok(None);
                }
            }
        }
        Ok(Some(subst))
    }

    fn check_negation(&self, inner: &ContextFormula, rest: &[ContextFormula], subst: &Substitution) -> Result<(), SolveError> {
        let free = inner.apply(subst).vars();
        if free.is_empty() {
            return Ok(());
        }
        let mut outside = Vec::new();
        for g in rest {
            g.apply(subst).collect_vars(&mut outside);
        }
        for v in &self.shared_vars {
            subst.apply(&Term::Var(v.clone())).collect_vars(&mut outside);
        }
        match free.into_iter().find(|v| outside.contains(v)) {
            Some(v) => Err(SolveError::FlounderingNegation(v)),
            None => Ok(()),
        }
    }

    fn provable(&mut self, inner: &ContextFormula, subst: &Substitution) -> Result<bool, SolveError> {
        let mut sub = Solutions::new(inner, subst.clone(), self.facts, self.rules, self.config);
        sub.steps = self.steps;
        sub.renames = self.renames;
        let found = sub.next();
        self.steps = sub.steps;
        self.renames = sub.renames;
        match found {
            Some(Err(e)) => Err(e),
            Some(Ok(_)) => Ok(true),
            None => Ok(false),
        }
    }

    /// Tries clauses for `literal` from index `next`; on success pushes the
    /// remaining alternatives and the resolvent.
    fn expand(&mut self, goals: Vec<ContextFormula>, subst: Substitution, literal: Literal, next: usize) -> Result<(), SolveError> {
        let facts = self.facts;
        let rules = self.rules;
        let total = facts.len() + rules.len();
        let mut i = next;
        while i < total {
            let resolvent = if i < facts.len() {
                match_literal(&literal, &facts[i], &subst).map(|s| (s, None))
            } else {
                let rule = self.rename(&rules[i - facts.len()]);
                match_literal(&literal, &rule.head, &subst).map(|s| (s, Some(rule.body)))
            };
            i += 1;
            if let Some((new_subst, body)) = resolvent {
                self.count_step()?;
                if i < total {
                    self.stack.push(State::Choice { goals: goals.clone(), subst, literal, next: i });
                }
                let mut goals = goals;
                if let Some(body) = body {
                    goals.push(body);
                }
                self.stack.push(State::Run { goals, subst: new_subst });
                return Ok(());
            }
        }
        Ok(())
    }

    fn advance(&mut self) -> Result<Option<Substitution>, SolveError> {
        while let Some(state) = self.stack.pop() {
            match state {
                State::Run { goals, subst } => {
                    if let Some(s) = self.run(goals, subst)? {
                        return Ok(Some(self.answer(&s)));
                    }
                }
                State::Choice { goals, subst, literal, next } => self.expand(goals, subst, literal, next)?,
            }
        }
        Ok(None)
    }
}

impl Iterator for Solutions<'_> {
    type Item = Result<Substitution, SolveError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.advance() {
            Ok(Some(s)) => Some(Ok(s)),
            Ok(None) => {
                self.done = true;
                None
            }
            Err(e) => {
                self.done = true;
                self.stack.clear();
                Some(Err(e))
            }
        }
    }
}

fn collect_vars_outside_not(f: &ContextFormula, out: &mut Vec<String>) {
    match f {
        ContextFormula::Not(_) => {}
        ContextFormula::And(l, r) => {
            collect_vars_outside_not(l, out);
            collect_vars_outside_not(r, out);
        }
        other => other.collect_vars(out),
    }
}

fn leaf_or_value(e: &Expr, s: &Substitution) -> Result<Term, EvalError> {
    match e {
        Expr::Leaf(t) => Ok(s.apply(t)),
        Expr::Bin(..) => eval_expr(e, s).map(Term::Num),
    }
}

/// Evaluates a relation. `Ok(None)` means the relation is false.
pub(crate) fn eval_rel(op: RelOp, l: &Expr, r: &Expr, s: &Substitution) -> Result<Option<Substitution>, SolveError> {
    let holds = match op {
        RelOp::Unify => {
            let lt = leaf_or_value(l, s)?;
            let rt = leaf_or_value(r, s)?;
            return Ok(unify(&lt, &rt, s));
        }
        RelOp::Eq | RelOp::Ne => {
            let same = leaf_or_value(l, s)? == leaf_or_value(r, s)?;
            same == (op == RelOp::Eq)
        }
        RelOp::Lt | RelOp::Le | RelOp::Gt | RelOp::Ge => {
            let a = eval_expr(l, s)?;
            let b = eval_expr(r, s)?;
            match op {
                RelOp::Lt => a < b,
                RelOp::Le => a <= b,
                RelOp::Gt => a > b,
                _ => a >= b,
            }
        }
    };
    Ok(if holds { Some(s.clone()) } else { None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::BinOp;

    fn cost(e: &str, c: i64) -> Literal {
        Literal::new("cost", vec![Term::atom(e), Term::int(c)])
    }

    fn goal(pred: &str, args: Vec<Term>) -> ContextFormula {
        ContextFormula::lit(Literal::new(pred, args))
    }

    fn all(goal: &ContextFormula, facts: &[Literal], rules: &[Rule]) -> Vec<Substitution> {
        solve(goal, facts, rules).collect::<Result<_, _>>().unwrap()
    }

    #[test]
    fn fact_lookup() {
        let facts = [cost("e1", 10), cost("e2", 7)];
        let got = all(&goal("cost", vec![Term::atom("e1"), Term::var("X")]), &facts, &[]);
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].get("X"), Some(&Term::int(10)));
        assert!(all(&goal("cost", vec![Term::atom("e9"), Term::var("X")]), &facts, &[]).is_empty());
    }

    #[test]
    fn answers_follow_source_order() {
        let facts = [cost("e3", 12), cost("e1", 10), cost("e2", 7)];
        let got = all(&goal("cost", vec![Term::var("A"), Term::var("_C")]), &facts, &[]);
        let names: Vec<_> = got.iter().map(|s| s.get("A").unwrap().clone()).collect();
        assert_eq!(names, vec![Term::atom("e3"), Term::atom("e1"), Term::atom("e2")]);
    }

    #[test]
    fn cheapest_with_negation() {
        // cheapest(A) :- cost(A,C) & not (cost(B,D) & D < C)
        let facts = [cost("e1", 10), cost("e2", 7), cost("e3", 12)];
        let rule = Rule {
            head: Literal::new("cheapest", vec![Term::var("A")]),
            body: ContextFormula::conj([
                goal("cost", vec![Term::var("A"), Term::var("C")]),
                ContextFormula::negate(ContextFormula::conj([
                    goal("cost", vec![Term::var("B"), Term::var("D")]),
                    ContextFormula::rel(RelOp::Lt, Expr::var("D"), Expr::var("C")),
                ])),
            ]),
        };
        let got = all(&goal("cheapest", vec![Term::var("A")]), &facts, &[rule]);
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].get("A"), Some(&Term::atom("e2")));
        assert_eq!(got[0].len(), 1);
    }

    #[test]
    fn unify_relation_evaluates_arithmetic() {
        let facts = [cost("e1", 10)];
        let g = ContextFormula::conj([
            goal("cost", vec![Term::atom("e1"), Term::var("C")]),
            ContextFormula::rel(RelOp::Unify, Expr::var("E"), Expr::bin(BinOp::Add, Expr::var("C"), Expr::num(5))),
        ]);
        let got = all(&g, &facts, &[]);
        assert_eq!(got[0].get("E"), Some(&Term::int(15)));
    }

    #[test]
    fn unbound_arithmetic_is_an_error() {
        let g = ContextFormula::rel(RelOp::Gt, Expr::var("X"), Expr::num(3));
        let mut it = solve(&g, &[], &[]);
        assert_eq!(it.next(), Some(Err(SolveError::UnboundArithmetic("X".into()))));
        assert_eq!(it.next(), None);
    }

    #[test]
    fn floundering_negation_is_an_error() {
        let facts = [Literal::new("q", vec![Term::int(1)])];
        let g = ContextFormula::conj([
            ContextFormula::negate(goal("p", vec![Term::var("X")])),
            goal("q", vec![Term::var("X")]),
        ]);
        let mut it = solve(&g, &facts, &[]);
        assert_eq!(it.next(), Some(Err(SolveError::FlounderingNegation("X".into()))));
    }

    #[test]
    fn left_recursion_hits_the_step_bound() {
        let rule = Rule {
            head: Literal::new("loop", vec![Term::var("X")]),
            body: goal("loop", vec![Term::var("X")]),
        };
        let g = goal("loop", vec![Term::int(1)]);
        let mut it = Solutions::new(&g, Substitution::new(), &[], core::slice::from_ref(&rule), SolveConfig { max_steps: 50 });
        assert_eq!(it.next(), Some(Err(SolveError::DepthExceeded { limit: 50 })));
    }

    #[test]
    fn initial_bindings_are_kept() {
        let facts = [cost("e1", 10), cost("e2", 7)];
        let mut init = Substitution::new();
        init.bind("A", Term::atom("e2"));
        let g = goal("cost", vec![Term::var("A"), Term::var("C")]);
        let got: Vec<_> = Solutions::new(&g, init, &facts, &[], SolveConfig::default()).collect();
        assert_eq!(got.len(), 1);
        let s = got[0].as_ref().unwrap();
        assert_eq!(s.get("A"), Some(&Term::atom("e2")));
        assert_eq!(s.get("C"), Some(&Term::int(7)));
    }

    #[test]
    fn strong_negation_is_its_own_namespace() {
        let mut neg = Literal::new("p", vec![Term::int(1)]);
        neg.negated = true;
        let facts = [neg.clone()];
        assert!(all(&goal("p", vec![Term::var("X")]), &facts, &[]).is_empty());
        assert_eq!(all(&ContextFormula::lit(Literal { args: vec![Term::var("X")], ..neg }), &facts, &[]).len(), 1);
    }
}
