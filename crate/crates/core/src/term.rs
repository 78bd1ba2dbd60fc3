//! First-order terms, literals and substitutions.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::decimal::Decimal;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Term {
    Atom(String),
    Var(String),
    Num(Decimal),
    Str(String),
    /// Compound term. Arity is always at least one; zero-arity terms are atoms.
    Struct(String, Vec<Term>),
}

impl Term {
    pub fn atom(name: impl Into<String>) -> Self {
        Term::Atom(name.into())
    }

    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn int(v: i64) -> Self {
        Term::Num(Decimal::from_int(v))
    }

    /// Builds a compound term, collapsing an empty argument list to an atom.
    pub fn compound(functor: impl Into<String>, args: Vec<Term>) -> Self {
        if args.is_empty() {
            Term::Atom(functor.into())
        } else {
            Term::Struct(functor.into(), args)
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Struct(_, args) => args.iter().all(Term::is_ground),
            _ => true,
        }
    }

    pub fn occurs(&self, var: &str) -> bool {
        match self {
            Term::Var(v) => v == var,
            Term::Struct(_, args) => args.iter().any(|a| a.occurs(var)),
            _ => false,
        }
    }

    /// Appends every variable name in depth-first order, without duplicates.
    pub fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Term::Var(v) => {
                if !out.iter().any(|o| o == v) {
                    out.push(v.clone());
                }
            }
            Term::Struct(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            _ => {}
        }
    }

    pub fn as_num(&self) -> Option<Decimal> {
        match self {
            Term::Num(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Term::Atom(a) => Some(a),
            _ => None,
        }
    }

    pub(crate) fn map_vars(&self, f: &mut impl FnMut(&str) -> Term) -> Term {
        match self {
            Term::Var(v) => f(v),
            Term::Struct(name, args) => {
                Term::Struct(name.clone(), args.iter().map(|a| a.map_vars(f)).collect())
            }
            other => other.clone(),
        }
    }
}

/// True when `s` lexes as a bare atom (lowercase start, then alphanumerics or `_`).
pub fn is_atom_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn write_str_literal(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    f.write_str("\"")?;
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\t' => f.write_str("\\t")?,
            c => write!(f, "{c}")?,
        }
    }
    f.write_str("\"")
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Atom(a) => f.write_str(a),
            Term::Var(v) => f.write_str(v),
            Term::Num(n) => write!(f, "{n}"),
            Term::Str(s) => write_str_literal(f, s),
            Term::Struct(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Predicate applied to arguments, with optional strong negation and
/// annotations such as `source(percept)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Literal {
    pub negated: bool,
    pub predicate: String,
    pub args: Vec<Term>,
    pub annotations: Vec<Term>,
}

impl Literal {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Literal { negated: false, predicate: predicate.into(), args, annotations: Vec::new() }
    }

    pub fn with_source(mut self, source: &str) -> Self {
        self.set_source(Term::atom(source));
        self
    }

    /// Replaces any existing `source(_)` annotation.
    pub fn set_source(&mut self, source: Term) {
        self.annotations.retain(|a| !is_source_annotation(a));
        self.annotations.push(Term::Struct("source".into(), alloc::vec![source]));
    }

    pub fn source(&self) -> Option<&Term> {
        self.annotations.iter().find_map(|a| match a {
            Term::Struct(name, args) if name == "source" && args.len() == 1 => Some(&args[0]),
            _ => None,
        })
    }

    pub fn has_source(&self, source: &str) -> bool {
        matches!(self.source(), Some(Term::Atom(a)) if a == source)
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    /// Same predicate name, arity and negation flag.
    pub fn same_signature(&self, other: &Literal) -> bool {
        self.negated == other.negated
            && self.predicate == other.predicate
            && self.args.len() == other.args.len()
    }

    /// Ground when no argument contains a variable. Annotations are not considered.
    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn collect_vars(&self, out: &mut Vec<String>) {
        self.args.iter().for_each(|a| a.collect_vars(out));
        self.annotations.iter().for_each(|a| a.collect_vars(out));
    }

    pub fn without_annotations(&self) -> Literal {
        Literal { annotations: Vec::new(), ..self.clone() }
    }

    /// The literal viewed as a term (annotations dropped).
    pub fn to_term(&self) -> Term {
        Term::compound(self.predicate.clone(), self.args.clone())
    }

    /// Converts an atom or compound term into a literal.
    pub fn from_term(t: &Term) -> Option<Literal> {
        match t {
            Term::Atom(a) => Some(Literal::new(a.clone(), Vec::new())),
            Term::Struct(name, args) => Some(Literal::new(name.clone(), args.clone())),
            _ => None,
        }
    }

    pub(crate) fn map_vars(&self, f: &mut impl FnMut(&str) -> Term) -> Literal {
        Literal {
            negated: self.negated,
            predicate: self.predicate.clone(),
            args: self.args.iter().map(|a| a.map_vars(f)).collect(),
            annotations: self.annotations.iter().map(|a| a.map_vars(f)).collect(),
        }
    }
}

pub(crate) fn is_source_annotation(t: &Term) -> bool {
    matches!(t, Term::Struct(name, args) if name == "source" && args.len() == 1)
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("~")?;
        }
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        if !self.annotations.is_empty() {
            f.write_str("[")?;
            for (i, a) in self.annotations.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str("]")?;
        }
        Ok(())
    }
}

/// Idempotent variable bindings.
///
/// Every stored value is already fully resolved against the other bindings,
/// so a single application reaches the fixpoint.
#[derive(Clone, PartialEq, Eq, Default, Debug)]
pub struct Substitution {
    bindings: BTreeMap<String, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.bindings.get(var)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Term)> {
        self.bindings.iter()
    }

    /// Adds `var ↦ term`, keeping the substitution idempotent. Returns `false`
    /// (leaving `self` untouched) if the occurs check fails.
    pub fn bind(&mut self, var: &str, term: Term) -> bool {
        let term = self.apply(&term);
        if let Some(existing) = self.bindings.get(var) {
            return *existing == term;
        }
        if let Term::Var(v) = &term {
            if v == var {
                return true;
            }
        }
        if term.occurs(var) {
            return false;
        }
        for value in self.bindings.values_mut() {
            if value.occurs(var) {
                *value = value.map_vars(&mut |v| {
                    if v == var {
                        term.clone()
                    } else {
                        Term::Var(v.into())
                    }
                });
            }
        }
        self.bindings.insert(var.into(), term);
        true
    }

    pub fn apply(&self, t: &Term) -> Term {
        if self.bindings.is_empty() {
            return t.clone();
        }
        t.map_vars(&mut |v| self.bindings.get(v).cloned().unwrap_or_else(|| Term::Var(v.into())))
    }

    pub fn apply_literal(&self, l: &Literal) -> Literal {
        l.map_vars(&mut |v| self.bindings.get(v).cloned().unwrap_or_else(|| Term::Var(v.into())))
    }

    /// Keeps only the bindings for `vars`.
    pub fn restrict(&self, vars: &[String]) -> Substitution {
        Substitution {
            bindings: self
                .bindings
                .iter()
                .filter(|(k, _)| vars.contains(k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }
}

impl FromIterator<(String, Term)> for Substitution {
    /// Binds pairs one at a time; pairs that fail the occurs check are skipped.
    fn from_iter<I: IntoIterator<Item = (String, Term)>>(iter: I) -> Self {
        let mut s = Substitution::new();
        for (k, v) in iter {
            s.bind(&k, v);
        }
        s
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}↦{v}")?;
        }
        f.write_str("}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    #[test]
    fn renders_terms_and_literals() {
        let t = Term::compound("cost", vec![Term::atom("e1"), Term::int(10)]);
        assert_eq!(t.to_string(), "cost(e1,10)");
        let l = Literal::new("cost", vec![Term::atom("e1"), Term::int(10)]).with_source("self");
        assert_eq!(l.to_string(), "cost(e1,10)[source(self)]");
        assert_eq!(Term::Str("a\"b".into()).to_string(), "\"a\\\"b\"");
        assert_eq!(Term::compound("go", vec![]), Term::atom("go"));
    }

    #[test]
    fn source_annotation_is_unique() {
        let mut l = Literal::new("p", vec![]).with_source("percept");
        l.set_source(Term::atom("e1"));
        assert_eq!(l.annotations.len(), 1);
        assert!(l.has_source("e1"));
    }

    #[test]
    fn bind_keeps_substitution_idempotent() {
        let mut s = Substitution::new();
        assert!(s.bind("X", Term::var("Y")));
        assert!(s.bind("Y", Term::atom("a")));
        assert_eq!(s.get("X"), Some(&Term::atom("a")));
        let t = Term::compound("f", vec![Term::var("X"), Term::var("Y"), Term::var("Z")]);
        assert_eq!(s.apply(&s.apply(&t)), s.apply(&t));
    }

    #[test]
    fn bind_refuses_cycles() {
        let mut s = Substitution::new();
        assert!(!s.bind("X", Term::compound("f", vec![Term::var("X")])));
        assert!(s.bind("X", Term::var("Y")));
        assert!(!s.bind("Y", Term::compound("g", vec![Term::var("X")])));
        assert!(s.bind("X", Term::var("X")));
    }

    #[test]
    fn atom_names() {
        assert!(is_atom_name("e2"));
        assert!(is_atom_name("allocate_x"));
        assert!(!is_atom_name("E2"));
        assert!(!is_atom_name("hello world"));
        assert!(!is_atom_name(""));
    }
}
