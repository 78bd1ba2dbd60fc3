//! Lexer and recursive-descent parser for `.asl` agent programs.
//!
//! ```text
//! program  := item*
//! item     := fact | rule | plan
//! fact     := literal "."
//! rule     := literal ":-" formula "."
//! plan     := ("+" | "-") ["!"] literal [":" formula] ["<-" step (";" step)*] "."
//! step     := "+" literal | "-" literal | "!" literal | "?" formula
//!           | ".send(" term "," ("tell" | "achieve") "," literal ")"
//!           | ".publish_decision(" term ")" | literal
//! formula  := unary ("&" unary)*
//! unary    := "not" unary | "(" formula ")" | "true" | expr relop expr | literal
//! ```
//!
//! `%` starts a comment that runs to the end of the line. A bare `_` is
//! replaced with a fresh variable per occurrence.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::decimal::Decimal;
use crate::formula::{BinOp, ContextFormula, Expr, RelOp, Rule};
use crate::program::{ActionStep, AgentProgram, Performative, Plan, Trigger, TriggerKind};
use crate::term::{is_source_annotation, Literal, Term};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub expected: String,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: expected {}, found {}", self.line, self.column, self.expected, self.found)
    }
}

impl core::error::Error for ParseError {}

#[derive(Clone, PartialEq, Debug)]
enum Tok {
    Ident(String),
    Var(String),
    Num(Decimal),
    Str(String),
    Internal(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Dot,
    Colon,
    Neck,
    Arrow,
    Semi,
    Amp,
    Plus,
    Minus,
    Star,
    Slash,
    Bang,
    Question,
    Tilde,
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    NotEq,
    Eq,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "`{s}`"),
            Tok::Var(s) => return write!(f, "variable `{s}`"),
            Tok::Num(n) => return write!(f, "number `{n}`"),
            Tok::Str(_) => "string",
            Tok::Internal(s) => return write!(f, "`.{s}`"),
            Tok::LParen => "'('",
            Tok::RParen => "')'",
            Tok::LBracket => "'['",
            Tok::RBracket => "']'",
            Tok::Comma => "','",
            Tok::Dot => "'.'",
            Tok::Colon => "':'",
            Tok::Neck => "':-'",
            Tok::Arrow => "'<-'",
            Tok::Semi => "';'",
            Tok::Amp => "'&'",
            Tok::Plus => "'+'",
            Tok::Minus => "'-'",
            Tok::Star => "'*'",
            Tok::Slash => "'/'",
            Tok::Bang => "'!'",
            Tok::Question => "'?'",
            Tok::Tilde => "'~'",
            Tok::Lt => "'<'",
            Tok::Le => "'<='",
            Tok::Gt => "'>'",
            Tok::Ge => "'>='",
            Tok::EqEq => "'=='",
            Tok::NotEq => "'\\=='",
            Tok::Eq => "'='",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    macro_rules! peek {
        ($k:expr) => {
            chars.get(i + $k).copied()
        };
    }
    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        let (start_line, start_col) = (line, col);
        let err = |expected: &str, found: String| ParseError {
            line: start_line,
            column: start_col,
            expected: expected.into(),
            found,
        };
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                s.push(chars[i]);
                bump!();
            }
            if c.is_ascii_lowercase() {
                Tok::Ident(s)
            } else {
                Tok::Var(s)
            }
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while i < chars.len() && chars[i].is_ascii_digit() {
                s.push(chars[i]);
                bump!();
            }
            if peek!(0) == Some('.') && peek!(1).is_some_and(|d| d.is_ascii_digit()) {
                s.push('.');
                bump!();
                while i < chars.len() && chars[i].is_ascii_digit() {
                    s.push(chars[i]);
                    bump!();
                }
            }
            Tok::Num(s.parse().map_err(|_| err("a number with at most 9 decimals", format!("`{s}`")))?)
        } else if c == '"' {
            bump!();
            let mut s = String::new();
            loop {
                match peek!(0) {
                    None => return Err(err("closing '\"'", "end of input".into())),
                    Some('"') => {
                        bump!();
                        break;
                    }
                    Some('\\') => {
                        bump!();
                        let e = peek!(0).ok_or_else(|| err("escape character", "end of input".into()))?;
                        s.push(match e {
                            'n' => '\n',
                            't' => '\t',
                            other => other,
                        });
                        bump!();
                    }
                    Some(ch) => {
                        s.push(ch);
                        bump!();
                    }
                }
            }
            Tok::Str(s)
        } else if c == '.' && peek!(1).is_some_and(|d| d.is_ascii_lowercase()) {
            bump!();
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                s.push(chars[i]);
                bump!();
            }
            Tok::Internal(s)
        } else {
            let two: String = chars[i..chars.len().min(i + 3)].iter().collect();
            let (tok, len) = if two.starts_with("\\==") {
                (Tok::NotEq, 3)
            } else if two.starts_with(":-") {
                (Tok::Neck, 2)
            } else if two.starts_with("<-") {
                (Tok::Arrow, 2)
            } else if two.starts_with("<=") {
                (Tok::Le, 2)
            } else if two.starts_with(">=") {
                (Tok::Ge, 2)
            } else if two.starts_with("==") {
                (Tok::EqEq, 2)
            } else {
                let t = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    ',' => Tok::Comma,
                    '.' => Tok::Dot,
                    ':' => Tok::Colon,
                    ';' => Tok::Semi,
                    '&' => Tok::Amp,
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    '/' => Tok::Slash,
                    '!' => Tok::Bang,
                    '?' => Tok::Question,
                    '~' => Tok::Tilde,
                    '<' => Tok::Lt,
                    '>' => Tok::Gt,
                    '=' => Tok::Eq,
                    other => return Err(err("a token", format!("`{other}`"))),
                };
                (t, 1)
            };
            for _ in 0..len {
                bump!();
            }
            tok
        };
        out.push(Spanned { tok, line: start_line, column: start_col });
    }
    out.push(Spanned { tok: Tok::Eof, line, column: col });
    Ok(out)
}

/// Parses a complete agent program. No partial program is returned on error.
pub fn parse_program(source: &str) -> Result<AgentProgram, ParseError> {
    let mut p = Parser::new(source)?;
    let mut program = AgentProgram::default();
    while p.peek() != &Tok::Eof {
        match p.peek() {
            Tok::Plus | Tok::Minus => program.plans.push(p.plan()?),
            _ => {
                let at = p.pos;
                let head = p.literal()?;
                match p.peek() {
                    Tok::Neck => {
                        p.bump();
                        let body = p.formula()?;
                        p.expect(&Tok::Dot, "'.' to end the rule")?;
                        program.rules.push(Rule { head, body });
                    }
                    Tok::Dot => {
                        if !head.is_ground() {
                            return Err(p.error_at(at, "a ground fact (initial beliefs may not contain variables)"));
                        }
                        p.bump();
                        program.initial_beliefs.push(head);
                    }
                    _ => return Err(p.error("'.' or ':-' after literal")),
                }
            }
        }
    }
    Ok(program)
}

/// Parses a single context formula, e.g. `cost(A,C) & C < 10`.
pub fn parse_formula(source: &str) -> Result<ContextFormula, ParseError> {
    let mut p = Parser::new(source)?;
    let f = p.formula()?;
    p.expect(&Tok::Eof, "end of input")?;
    Ok(f)
}

/// Parses a single term.
pub fn parse_term(source: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(source)?;
    let t = p.term()?;
    p.expect(&Tok::Eof, "end of input")?;
    Ok(t)
}

/// Parses a single literal, with optional `~` and annotations.
pub fn parse_literal(source: &str) -> Result<Literal, ParseError> {
    let mut p = Parser::new(source)?;
    let l = p.literal()?;
    p.expect(&Tok::Eof, "end of input")?;
    Ok(l)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    anon: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Parser { toks: lex(src)?, pos: 0, anon: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> ParseError {
        self.error_at(self.pos, expected)
    }

    fn error_at(&self, pos: usize, expected: &str) -> ParseError {
        let s = &self.toks[pos];
        ParseError { line: s.line, column: s.column, expected: expected.into(), found: s.tok.to_string() }
    }

    fn expect(&mut self, tok: &Tok, expected: &str) -> Result<(), ParseError> {
        if self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(expected))
        }
    }

    fn plan(&mut self) -> Result<Plan, ParseError> {
        let add = self.bump() == Tok::Plus;
        let goal = if self.peek() == &Tok::Bang {
            self.bump();
            true
        } else {
            false
        };
        let kind = match (add, goal) {
            (true, false) => TriggerKind::AddBelief,
            (false, false) => TriggerKind::DelBelief,
            (true, true) => TriggerKind::AddGoal,
            (false, true) => TriggerKind::DelGoal,
        };
        let literal = self.literal()?;
        let context = if self.peek() == &Tok::Colon {
            self.bump();
            self.formula()?
        } else {
            ContextFormula::True
        };
        let mut body = Vec::new();
        if self.peek() == &Tok::Arrow {
            self.bump();
            body.push(self.step()?);
            while self.peek() == &Tok::Semi {
                self.bump();
                body.push(self.step()?);
            }
        }
        self.expect(&Tok::Dot, "'.' to end the plan")?;
        Ok(Plan { trigger: Trigger::new(kind, literal), context, body })
    }

    fn step(&mut self) -> Result<ActionStep, ParseError> {
        match self.peek().clone() {
            Tok::Plus => {
                self.bump();
                Ok(ActionStep::AddBelief(self.literal()?))
            }
            Tok::Minus => {
                self.bump();
                Ok(ActionStep::DelBelief(self.literal()?))
            }
            Tok::Bang => {
                self.bump();
                Ok(ActionStep::Achieve(self.literal()?))
            }
            Tok::Question => {
                self.bump();
                Ok(ActionStep::Test(self.formula()?))
            }
            Tok::Internal(name) => {
                let at = self.pos;
                self.bump();
                match name.as_str() {
                    "send" => {
                        self.expect(&Tok::LParen, "'(' after .send")?;
                        let to = self.term()?;
                        self.expect(&Tok::Comma, "','")?;
                        let perf_at = self.pos;
                        let performative = match self.bump() {
                            Tok::Ident(p) => Performative::parse(&p),
                            _ => None,
                        }
                        .ok_or_else(|| self.error_at(perf_at, "performative `tell` or `achieve`"))?;
                        self.expect(&Tok::Comma, "','")?;
                        let content = self.literal()?;
                        self.expect(&Tok::RParen, "')' to close .send")?;
                        Ok(ActionStep::Send { to, performative, content })
                    }
                    "publish_decision" => {
                        self.expect(&Tok::LParen, "'(' after .publish_decision")?;
                        let t = self.term()?;
                        self.expect(&Tok::RParen, "')' to close .publish_decision")?;
                        Ok(ActionStep::PublishDecision(t))
                    }
                    _ => Err(self.error_at(at, "internal action `.send` or `.publish_decision`")),
                }
            }
            Tok::Ident(_) => {
                let l = self.literal()?;
                if !l.annotations.is_empty() || l.negated {
                    return Err(self.error("plain action name and arguments"));
                }
                Ok(ActionStep::External { name: l.predicate, args: l.args })
            }
            _ => Err(self.error("a plan body step")),
        }
    }

    fn formula(&mut self) -> Result<ContextFormula, ParseError> {
        let mut f = self.unary()?;
        while self.peek() == &Tok::Amp {
            self.bump();
            let r = self.unary()?;
            f = ContextFormula::and(f, r);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<ContextFormula, ParseError> {
        match self.peek() {
            Tok::Ident(n) if n == "not" => {
                self.bump();
                Ok(ContextFormula::negate(self.unary()?))
            }
            Tok::Ident(n) if n == "true" && self.peek_at(1) != &Tok::LParen => {
                self.bump();
                Ok(ContextFormula::True)
            }
            Tok::LParen => {
                let save = (self.pos, self.anon);
                let grouped = (|| {
                    self.bump();
                    let f = self.formula()?;
                    self.expect(&Tok::RParen, "')'")?;
                    Ok::<_, ParseError>(f)
                })();
                match grouped {
                    Ok(f) if !is_expr_continuation(self.peek()) => Ok(f),
                    _ => {
                        (self.pos, self.anon) = save;
                        self.relation_or_literal()
                    }
                }
            }
            _ => self.relation_or_literal(),
        }
    }

    fn relation_or_literal(&mut self) -> Result<ContextFormula, ParseError> {
        if self.peek() == &Tok::Tilde {
            return Ok(ContextFormula::Literal(self.literal()?));
        }
        let start = self.pos;
        let lhs = self.expr()?;
        if let Some(op) = rel_op(self.peek()) {
            self.bump();
            let rhs = self.expr()?;
            return Ok(ContextFormula::Rel(op, lhs, rhs));
        }
        match lhs {
            Expr::Leaf(t @ (Term::Atom(_) | Term::Struct(..))) => {
                let mut l = Literal::from_term(&t).expect("atom or struct");
                if self.peek() == &Tok::LBracket {
                    l.annotations = self.annotations()?;
                }
                Ok(ContextFormula::Literal(l))
            }
            _ => Err(self.error_at(start, "a literal or a relation")),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.product()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(e),
            };
            self.bump();
            e = Expr::bin(op, e, self.product()?);
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(e),
            };
            self.bump();
            e = Expr::bin(op, e, self.factor()?);
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(&Tok::RParen, "')' to close the expression")?;
                Ok(e)
            }
            Tok::Minus if !matches!(self.peek_at(1), Tok::Num(_)) => {
                self.bump();
                Ok(Expr::bin(BinOp::Sub, Expr::Leaf(Term::Num(Decimal::ZERO)), self.factor()?))
            }
            _ => Ok(Expr::Leaf(self.term()?)),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Var(v) => {
                self.bump();
                if v == "_" {
                    self.anon += 1;
                    Ok(Term::Var(format!("_G{}", self.anon)))
                } else {
                    Ok(Term::Var(v))
                }
            }
            Tok::Num(n) => {
                self.bump();
                Ok(Term::Num(n))
            }
            Tok::Minus if matches!(self.peek_at(1), Tok::Num(_)) => {
                self.bump();
                match self.bump() {
                    Tok::Num(n) => Ok(Term::Num(n.checked_neg().map_err(|_| self.error("a number in range"))?)),
                    _ => unreachable!(),
                }
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Term::Str(s))
            }
            Tok::Ident(name) => {
                self.bump();
                if self.peek() == &Tok::LParen {
                    self.bump();
                    let args = self.args()?;
                    Ok(Term::Struct(name, args))
                } else {
                    Ok(Term::Atom(name))
                }
            }
            _ => Err(self.error("a term")),
        }
    }

    /// Arguments after an opening parenthesis, through the closing one.
    fn args(&mut self) -> Result<Vec<Term>, ParseError> {
        let mut args = alloc::vec![self.term()?];
        loop {
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                    args.push(self.term()?);
                }
                Tok::RParen => {
                    self.bump();
                    return Ok(args);
                }
                _ => return Err(self.error("',' or ')' to close the argument list")),
            }
        }
    }

    fn literal(&mut self) -> Result<Literal, ParseError> {
        let negated = if self.peek() == &Tok::Tilde {
            self.bump();
            true
        } else {
            false
        };
        let name = match self.peek().clone() {
            Tok::Ident(n) => n,
            _ => return Err(self.error("a predicate name")),
        };
        self.bump();
        let args = if self.peek() == &Tok::LParen {
            self.bump();
            self.args()?
        } else {
            Vec::new()
        };
        let annotations = if self.peek() == &Tok::LBracket { self.annotations()? } else { Vec::new() };
        Ok(Literal { negated, predicate: name, args, annotations })
    }

    fn annotations(&mut self) -> Result<Vec<Term>, ParseError> {
        let open = self.pos;
        self.expect(&Tok::LBracket, "'['")?;
        let mut out = alloc::vec![self.term()?];
        loop {
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                    out.push(self.term()?);
                }
                Tok::RBracket => {
                    self.bump();
                    break;
                }
                _ => return Err(self.error("',' or ']' to close the annotations")),
            }
        }
        if out.iter().filter(|a| is_source_annotation(a)).count() > 1 {
            return Err(self.error_at(open, "at most one source(_) annotation"));
        }
        Ok(out)
    }
}

fn rel_op(t: &Tok) -> Option<RelOp> {
    Some(match t {
        Tok::Lt => RelOp::Lt,
        Tok::Le => RelOp::Le,
        Tok::Gt => RelOp::Gt,
        Tok::Ge => RelOp::Ge,
        Tok::EqEq => RelOp::Eq,
        Tok::NotEq => RelOp::Ne,
        Tok::Eq => RelOp::Unify,
        _ => return None,
    })
}

fn is_expr_continuation(t: &Tok) -> bool {
    rel_op(t).is_some() || matches!(t, Tok::Plus | Tok::Minus | Tok::Star | Tok::Slash)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn single_fact() {
        let p = parse_program("cost(e1,10).").unwrap();
        assert_eq!(p.initial_beliefs, vec![Literal::new("cost", vec![Term::atom("e1"), Term::int(10)])]);
        assert!(p.rules.is_empty() && p.plans.is_empty());
    }

    #[test]
    fn plan_with_context_and_publish() {
        let p = parse_program("+data(X) : X > 3 <- .publish_decision(high).").unwrap();
        assert_eq!(p.plans.len(), 1);
        let plan = &p.plans[0];
        assert_eq!(plan.trigger, Trigger::new(TriggerKind::AddBelief, Literal::new("data", vec![Term::var("X")])));
        assert_eq!(plan.context, ContextFormula::rel(RelOp::Gt, Expr::var("X"), Expr::num(3)));
        assert_eq!(plan.body, vec![ActionStep::PublishDecision(Term::atom("high"))]);
    }

    #[test]
    fn unclosed_argument_list() {
        let e = parse_program("+data(X").unwrap_err();
        assert_eq!((e.line, e.column), (1, 8));
        assert!(e.expected.contains("close the argument list"), "{e}");
        assert_eq!(e.found, "end of input");
    }

    #[test]
    fn rule_with_negation() {
        let p = parse_program("cheapest(A) :- cost(A,C) & not (cost(B,D) & D < C).").unwrap();
        let r = &p.rules[0];
        assert_eq!(r.head, Literal::new("cheapest", vec![Term::var("A")]));
        match &r.body {
            ContextFormula::And(l, r) => {
                assert!(matches!(**l, ContextFormula::Literal(_)));
                assert!(matches!(**r, ContextFormula::Not(_)));
            }
            other => panic!("unexpected body {other:?}"),
        }
    }

    #[test]
    fn body_step_kinds() {
        let src = "+!go(X)[source(S)] : true <- +a(X); -b(1); !c; ?d(Y) & Y > 1; .send(S, tell, e(Y)); act(X, 2); stop.";
        let p = parse_program(src).unwrap();
        let body = &p.plans[0].body;
        assert_eq!(body.len(), 7);
        assert!(matches!(body[0], ActionStep::AddBelief(_)));
        assert!(matches!(body[1], ActionStep::DelBelief(_)));
        assert!(matches!(body[2], ActionStep::Achieve(_)));
        assert!(matches!(body[3], ActionStep::Test(ContextFormula::And(..))));
        assert_eq!(
            body[4],
            ActionStep::Send {
                to: Term::var("S"),
                performative: Performative::Tell,
                content: Literal::new("e", vec![Term::var("Y")])
            }
        );
        assert_eq!(body[5], ActionStep::External { name: "act".into(), args: vec![Term::var("X"), Term::int(2)] });
        assert_eq!(body[6], ActionStep::External { name: "stop".into(), args: vec![] });
        assert_eq!(p.plans[0].trigger.kind, TriggerKind::AddGoal);
        assert_eq!(p.plans[0].trigger.literal.annotations.len(), 1);
    }

    #[test]
    fn comments_strings_and_negatives() {
        let src = "% header\np(\"a b\", -3, 2.5). % trailing\n~q(a).";
        let p = parse_program(src).unwrap();
        assert_eq!(p.initial_beliefs[0].args[0], Term::Str("a b".into()));
        assert_eq!(p.initial_beliefs[0].args[1], Term::int(-3));
        assert_eq!(p.initial_beliefs[0].args[2].to_string(), "2.5");
        assert!(p.initial_beliefs[1].negated);
    }

    #[test]
    fn anonymous_variables_are_distinct() {
        let f = parse_formula("p(_, _)").unwrap();
        assert_eq!(f.vars().len(), 2);
    }

    #[test]
    fn parenthesized_arithmetic_is_not_a_group() {
        let f = parse_formula("(X + 1) * 2 > 3 & (p(X) & q)").unwrap();
        let ContextFormula::And(l, r) = f else { panic!() };
        assert!(matches!(*l, ContextFormula::Rel(RelOp::Gt, Expr::Bin(BinOp::Mul, ..), _)));
        assert!(matches!(*r, ContextFormula::And(..)));
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_program("a.\nb(X).").unwrap_err();
        assert_eq!((e.line, e.column), (2, 1));
        let e = parse_program("+x <- .print(1).").unwrap_err();
        assert!(e.expected.contains(".send"));
        let e = parse_program("p(a)[source(a),source(b)].").unwrap_err();
        assert!(e.expected.contains("at most one source"));
        let e = parse_program("+x <- .send(b, ask, y).").unwrap_err();
        assert!(e.expected.contains("performative"));
        assert!(parse_program("p(a) q.").is_err());
        assert!(parse_program("p(\"open").is_err());
        assert!(parse_program("p(#).").is_err());
    }

    #[test]
    fn pretty_print_round_trips() {
        let src = "cost(e1,10).\n\
                   cost(e2,7.25)[source(self)].\n\
                   best(A) :- cost(A,C) & not (cost(B,D) & D < C).\n\
                   x(E) :- y(A, B) & E = (A - B) * 2 & E \\== -1 & (z & w).\n\
                   +data(X) : X > 3 <- .publish_decision(high).\n\
                   -!g(X) <- +failed(X); !retry; ?p(_); .send(a, achieve, go); act(X).\n\
                   +~alarm.";
        let p = parse_program(src).unwrap();
        let printed = p.to_string();
        let again = parse_program(&printed).unwrap();
        assert_eq!(p, again, "{printed}");
    }
}
