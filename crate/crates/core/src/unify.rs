//! Robinson unification with occurs check.

use crate::term::{Literal, Substitution, Term};

/// Most general unifier of `a` and `b` extending `s`, or `None` on clash.
pub fn unify(a: &Term, b: &Term, s: &Substitution) -> Option<Substitution> {
    let mut out = s.clone();
    if unify_in_place(a, b, &mut out) {
        Some(out)
    } else {
        None
    }
}

pub(crate) fn unify_in_place(a: &Term, b: &Term, s: &mut Substitution) -> bool {
    let a = s.apply(a);
    let b = s.apply(b);
    unify_resolved(&a, &b, s)
}

fn unify_resolved(a: &Term, b: &Term, s: &mut Substitution) -> bool {
    match (a, b) {
        (Term::Var(x), Term::Var(y)) if x == y => true,
        (Term::Var(x), t) | (t, Term::Var(x)) => s.bind(x, t.clone()),
        (Term::Struct(f, xs), Term::Struct(g, ys)) => {
            if f != g || xs.len() != ys.len() {
                return false;
            }
            for (x, y) in xs.iter().zip(ys) {
                // earlier bindings must be visible to later arguments
                let x = s.apply(x);
                let y = s.apply(y);
                if !unify_resolved(&x, &y, s) {
                    return false;
                }
            }
            true
        }
        (x, y) => x == y,
    }
}

/// Unifies the predicate and arguments of two literals, ignoring annotations.
pub fn unify_literal_args(a: &Literal, b: &Literal, s: &Substitution) -> Option<Substitution> {
    if !a.same_signature(b) {
        return None;
    }
    let mut out = s.clone();
    for (x, y) in a.args.iter().zip(&b.args) {
        if !unify_in_place(x, y, &mut out) {
            return None;
        }
    }
    Some(out)
}

/// Unifies `pattern` against `target`, requiring every annotation of
/// `pattern` to unify with some annotation of `target`. Annotations are
/// matched greedily in order; the first unifying target annotation is taken.
pub fn match_literal(pattern: &Literal, target: &Literal, s: &Substitution) -> Option<Substitution> {
    let mut out = unify_literal_args(pattern, target, s)?;
    'outer: for pa in &pattern.annotations {
        for ta in &target.annotations {
            if let Some(next) = unify(pa, ta, &out) {
                out = next;
                continue 'outer;
            }
        }
        return None;
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn f(name: &str, args: alloc::vec::Vec<Term>) -> Term {
        Term::compound(name, args)
    }

    #[test]
    fn binds_variable() {
        let s = unify(&f("data", vec![Term::var("X")]), &f("data", vec![Term::int(5)]), &Substitution::new())
            .unwrap();
        assert_eq!(s.get("X"), Some(&Term::int(5)));
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn argument_clash_fails() {
        let a = f("cost", vec![Term::atom("e1"), Term::var("C")]);
        let b = f("cost", vec![Term::atom("e2"), Term::int(10)]);
        assert!(unify(&a, &b, &Substitution::new()).is_none());
    }

    #[test]
    fn shared_variable_propagates() {
        // f(X, g(X)) = f(a, g(Y))  gives  {X↦a, Y↦a}
        let a = f("f", vec![Term::var("X"), f("g", vec![Term::var("X")])]);
        let b = f("f", vec![Term::atom("a"), f("g", vec![Term::var("Y")])]);
        let s = unify(&a, &b, &Substitution::new()).unwrap();
        assert_eq!(s.get("X"), Some(&Term::atom("a")));
        assert_eq!(s.get("Y"), Some(&Term::atom("a")));
        assert_eq!(s.apply(&a), s.apply(&b));
    }

    #[test]
    fn occurs_check() {
        let x = Term::var("X");
        assert!(unify(&x, &f("f", vec![x.clone()]), &Substitution::new()).is_none());
        let a = f("p", vec![Term::var("X"), Term::var("Y")]);
        let b = f("p", vec![Term::var("Y"), f("s", vec![Term::var("X")])]);
        assert!(unify(&a, &b, &Substitution::new()).is_none());
    }

    #[test]
    fn arity_and_kind_mismatch() {
        assert!(unify(&f("p", vec![Term::int(1)]), &f("p", vec![Term::int(1), Term::int(2)]), &Substitution::new())
            .is_none());
        assert!(unify(&Term::atom("a"), &Term::Str("a".into()), &Substitution::new()).is_none());
        assert!(unify(&Term::int(3), &"3.0".parse().map(Term::Num).unwrap(), &Substitution::new()).is_some());
    }

    #[test]
    fn annotation_subset_matching() {
        let pat = Literal {
            annotations: vec![f("source", vec![Term::var("S")])],
            ..Literal::new("load", vec![Term::var("L")])
        };
        let fact = Literal::new("load", vec![Term::int(5)]).with_source("e2");
        let s = match_literal(&pat, &fact, &Substitution::new()).unwrap();
        assert_eq!(s.get("S"), Some(&Term::atom("e2")));
        assert!(match_literal(&pat, &fact.without_annotations(), &Substitution::new()).is_none());
        // a pattern without annotations matches regardless
        assert!(match_literal(&pat.without_annotations(), &fact, &Substitution::new()).is_some());
    }
}
