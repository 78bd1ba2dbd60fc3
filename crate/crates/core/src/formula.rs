//! Plan contexts, rule bodies and arithmetic expressions.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::decimal::{Decimal, DecimalError};
use crate::term::{Literal, Substitution, Term};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

/// Arithmetic expression. Leaves are arbitrary terms so that `==` and `=`
/// can also compare non-numeric values.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Expr {
    Leaf(Term),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn num(v: i64) -> Self {
        Expr::Leaf(Term::int(v))
    }

    pub fn var(name: &str) -> Self {
        Expr::Leaf(Term::var(name))
    }

    pub fn bin(op: BinOp, l: Expr, r: Expr) -> Self {
        Expr::Bin(op, Box::new(l), Box::new(r))
    }

    pub fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Expr::Leaf(t) => t.collect_vars(out),
            Expr::Bin(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
        }
    }

    pub(crate) fn map_vars(&self, f: &mut impl FnMut(&str) -> Term) -> Expr {
        match self {
            Expr::Leaf(t) => Expr::Leaf(t.map_vars(f)),
            Expr::Bin(op, l, r) => Expr::bin(*op, l.map_vars(f), r.map_vars(f)),
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        match self {
            Expr::Leaf(t) => write!(f, "{t}"),
            Expr::Bin(op, l, r) => {
                let p = op.precedence();
                let paren = p < min_prec;
                if paren {
                    f.write_str("(")?;
                }
                l.fmt_prec(f, p)?;
                write!(f, " {} ", op.symbol())?;
                // operators are left-associative: a right operand of equal
                // precedence needs parentheses
                r.fmt_prec(f, p + 1)?;
                if paren {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalError {
    UnboundArithmetic(String),
    NotANumber(Term),
    DivisionByZero,
    Overflow,
}

impl From<DecimalError> for EvalError {
    fn from(e: DecimalError) -> Self {
        match e {
            DecimalError::DivisionByZero => EvalError::DivisionByZero,
            _ => EvalError::Overflow,
        }
    }
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::UnboundArithmetic(v) => write!(f, "unbound variable {v} in arithmetic"),
            EvalError::NotANumber(t) => write!(f, "`{t}` is not a number"),
            EvalError::DivisionByZero => f.write_str("division by zero"),
            EvalError::Overflow => f.write_str("arithmetic overflow"),
        }
    }
}

impl core::error::Error for EvalError {}

/// Evaluates `e` under `s` with exact decimal arithmetic.
pub fn eval_expr(e: &Expr, s: &Substitution) -> Result<Decimal, EvalError> {
    match e {
        Expr::Leaf(t) => match s.apply(t) {
            Term::Num(n) => Ok(n),
            Term::Var(v) => Err(EvalError::UnboundArithmetic(v)),
            other => {
                if other.is_ground() {
                    Err(EvalError::NotANumber(other))
                } else {
                    let mut vars = Vec::new();
                    other.collect_vars(&mut vars);
                    Err(EvalError::UnboundArithmetic(vars.swap_remove(0)))
                }
            }
        },
        Expr::Bin(op, l, r) => {
            let l = eval_expr(l, s)?;
            let r = eval_expr(r, s)?;
            Ok(match op {
                BinOp::Add => l.checked_add(r)?,
                BinOp::Sub => l.checked_sub(r)?,
                BinOp::Mul => l.checked_mul(r)?,
                BinOp::Div => l.checked_div(r)?,
            })
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum RelOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    Unify,
}

impl RelOp {
    pub fn symbol(self) -> &'static str {
        match self {
            RelOp::Lt => "<",
            RelOp::Le => "<=",
            RelOp::Gt => ">",
            RelOp::Ge => ">=",
            RelOp::Eq => "==",
            RelOp::Ne => "\\==",
            RelOp::Unify => "=",
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum ContextFormula {
    True,
    Literal(Literal),
    /// Negation as failure.
    Not(Box<ContextFormula>),
    And(Box<ContextFormula>, Box<ContextFormula>),
    Rel(RelOp, Expr, Expr),
}

impl ContextFormula {
    pub fn lit(l: Literal) -> Self {
        ContextFormula::Literal(l)
    }

    pub fn negate(f: ContextFormula) -> Self {
        ContextFormula::Not(Box::new(f))
    }

    pub fn and(l: ContextFormula, r: ContextFormula) -> Self {
        ContextFormula::And(Box::new(l), Box::new(r))
    }

    /// Left-nested conjunction of `parts`; `True` when empty.
    pub fn conj(parts: impl IntoIterator<Item = ContextFormula>) -> Self {
        parts.into_iter().reduce(ContextFormula::and).unwrap_or(ContextFormula::True)
    }

    pub fn rel(op: RelOp, l: Expr, r: Expr) -> Self {
        ContextFormula::Rel(op, l, r)
    }

    pub fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            ContextFormula::True => {}
            ContextFormula::Literal(l) => l.collect_vars(out),
            ContextFormula::Not(f) => f.collect_vars(out),
            ContextFormula::And(l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            ContextFormula::Rel(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
        }
    }

    pub fn vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    pub(crate) fn map_vars(&self, f: &mut impl FnMut(&str) -> Term) -> ContextFormula {
        match self {
            ContextFormula::True => ContextFormula::True,
            ContextFormula::Literal(l) => ContextFormula::Literal(l.map_vars(f)),
            ContextFormula::Not(inner) => ContextFormula::negate(inner.map_vars(f)),
            ContextFormula::And(l, r) => ContextFormula::and(l.map_vars(f), r.map_vars(f)),
            ContextFormula::Rel(op, l, r) => ContextFormula::Rel(*op, l.map_vars(f), r.map_vars(f)),
        }
    }

    pub fn apply(&self, s: &Substitution) -> ContextFormula {
        self.map_vars(&mut |v| s.get(v).cloned().unwrap_or_else(|| Term::Var(v.into())))
    }
}

impl fmt::Display for ContextFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContextFormula::True => f.write_str("true"),
            ContextFormula::Literal(l) => write!(f, "{l}"),
            ContextFormula::Not(inner) => write!(f, "not ({inner})"),
            ContextFormula::And(l, r) => {
                write!(f, "{l} & ")?;
                if matches!(**r, ContextFormula::And(..)) {
                    write!(f, "({r})")
                } else {
                    write!(f, "{r}")
                }
            }
            ContextFormula::Rel(op, l, r) => write!(f, "{l} {} {r}", op.symbol()),
        }
    }
}

/// Horn rule `head :- body`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Rule {
    pub head: Literal,
    pub body: ContextFormula,
}

impl Rule {
    /// Head variables that never occur in the body.
    pub fn unbound_head_vars(&self) -> Vec<String> {
        let mut head = Vec::new();
        self.head.collect_vars(&mut head);
        let body = self.body.vars();
        head.into_iter().filter(|v| !body.contains(v)).collect()
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} :- {}.", self.head, self.body)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn evaluates_examples() {
        let s = Substitution::new();
        assert_eq!(eval_expr(&Expr::bin(BinOp::Add, Expr::num(3), Expr::num(4)), &s), Ok(Decimal::from_int(7)));
        let mut x5 = Substitution::new();
        x5.bind("X", Term::int(5));
        assert_eq!(eval_expr(&Expr::bin(BinOp::Mul, Expr::var("X"), Expr::num(2)), &x5), Ok(Decimal::from_int(10)));
        assert_eq!(
            eval_expr(&Expr::bin(BinOp::Add, Expr::var("X"), Expr::num(1)), &s),
            Err(EvalError::UnboundArithmetic("X".into()))
        );
    }

    #[test]
    fn evaluation_errors() {
        let s = Substitution::new();
        assert_eq!(eval_expr(&Expr::bin(BinOp::Div, Expr::num(1), Expr::num(0)), &s), Err(EvalError::DivisionByZero));
        assert_eq!(eval_expr(&Expr::Leaf(Term::atom("a")), &s), Err(EvalError::NotANumber(Term::atom("a"))));
        let big = Expr::Leaf(Term::Num(Decimal::from_raw(i128::MAX / 2)));
        assert_eq!(eval_expr(&Expr::bin(BinOp::Mul, big.clone(), big), &s), Err(EvalError::Overflow));
    }

    #[test]
    fn display_parenthesizes_by_precedence() {
        let e = Expr::bin(BinOp::Mul, Expr::bin(BinOp::Add, Expr::var("X"), Expr::num(1)), Expr::num(2));
        assert_eq!(e.to_string(), "(X + 1) * 2");
        let e = Expr::bin(BinOp::Sub, Expr::num(1), Expr::bin(BinOp::Sub, Expr::num(2), Expr::num(3)));
        assert_eq!(e.to_string(), "1 - (2 - 3)");
        let e = Expr::bin(BinOp::Sub, Expr::bin(BinOp::Sub, Expr::num(1), Expr::num(2)), Expr::num(3));
        assert_eq!(e.to_string(), "1 - 2 - 3");
    }

    #[test]
    fn lint_reports_unbound_head_vars() {
        let r = Rule {
            head: Literal::new("p", alloc::vec![Term::var("X"), Term::var("Y")]),
            body: ContextFormula::lit(Literal::new("q", alloc::vec![Term::var("X")])),
        };
        assert_eq!(r.unbound_head_vars(), alloc::vec![String::from("Y")]);
    }
}
