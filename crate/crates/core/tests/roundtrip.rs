use jason_rs_core::{parse_literal, parse_program, parse_term, Decimal, Literal, Term};
use proptest::prelude::*;

fn atom() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["a", "b", "e1", "load", "cost_2", "zz"]).prop_map(String::from)
}

fn var() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["X", "Y", "Old", "A_1"]).prop_map(String::from)
}

fn term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        atom().prop_map(Term::Atom),
        var().prop_map(Term::Var),
        (-1_000_000i64..1_000_000, 0u32..4).prop_map(|(n, shift)| {
            let d: Decimal = format!("{}e-{shift}", n).parse().unwrap();
            Term::Num(d)
        }),
        "[a-z ]{0,6}".prop_map(Term::Str),
    ];
    leaf.prop_recursive(3, 16, 3, |inner| {
        (atom(), prop::collection::vec(inner, 1..4)).prop_map(|(f, args)| Term::Struct(f, args))
    })
}

fn literal() -> impl Strategy<Value = Literal> {
    (any::<bool>(), atom(), prop::collection::vec(term(), 0..3), prop::option::of(atom())).prop_map(
        |(negated, p, args, src)| {
            let mut l = Literal::new(p, args);
            l.negated = negated;
            if let Some(s) = src {
                l = l.with_source(&s);
            }
            l
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn terms_print_and_parse_back(t in term()) {
        let text = t.to_string();
        prop_assert_eq!(parse_term(&text).unwrap(), t, "{}", text);
    }

    #[test]
    fn literals_print_and_parse_back(l in literal()) {
        let text = l.to_string();
        prop_assert_eq!(parse_literal(&text).unwrap(), l, "{}", text);
    }
}

#[test]
fn programs_print_and_parse_back() {
    let src = "cost(e1,10). cost(e2,7.5). label(\"north yard\").\n\
               load_of(A, 0) :- not load(_)[source(A)].\n\
               best(A) :- cost(A, C) & not (cost(B, D) & D < C).\n\
               +data(L)[source(percept)] : L >= 3 & L \\== 4 <- .send(decider, tell, load(L)); -seen(_).\n\
               +!go(X) : best(X) <- ?cost(X, C); !report(C); actuate(1, C); .publish_decision(allocate(X)).\n\
               -!go(_) <- +failed.\n\
               +ready.";
    let p = parse_program(src).unwrap();
    let printed = p.to_string();
    let again = parse_program(&printed).unwrap();
    assert_eq!(again.initial_beliefs, p.initial_beliefs);
    assert_eq!(again.rules.len(), p.rules.len());
    assert_eq!(again.plans.len(), p.plans.len());
    // anonymous variables get fresh names on every parse, so compare the text
    assert_eq!(again.to_string(), printed);
}
