//! Exhaustive cross-checks of the recognizer against the CYK oracle and the
//! flattened single PDA.

use comodi_core::automata::{
    build_network, network_to_single_pda, recognize, recognize_with, AutomatonNetwork,
    RecognizeOptions, Token,
};
use comodi_core::ebnf::{has_errors, parse_ebnf, validate_grammar, GrammarSource};
use comodi_oracles::{enumerate_strings, random_grammar, Bnf, Cnf, Ex, RandGrammar};
use rand::rngs::StdRng;
use rand::SeedableRng;

const ALPHABET: [&str; 3] = ["a", "b", "c"];

fn network(text: &str) -> Option<AutomatonNetwork> {
    let g = parse_ebnf(&GrammarSource::new("random", text)).ok()?;
    if has_errors(&validate_grammar(&g)) {
        return None;
    }
    Some(build_network(&g).expect("validated grammar builds"))
}

/// Seeded random grammars that pass validation.
fn validated_grammars(seed: u64, count: usize) -> Vec<(RandGrammar, AutomatonNetwork)> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let rules = 1 + (out.len() % 5);
        let g = random_grammar(&mut rng, rules, 3, &ALPHABET);
        if let Some(net) = network(&g.to_ebnf()) {
            out.push((g, net));
        }
    }
    out
}

fn parens() -> RandGrammar {
    let t = |s: &str| Ex::T(s.into());
    RandGrammar {
        rules: vec![Ex::Alt(vec![Ex::Seq(vec![t("("), Ex::N(0), t(")")]), Ex::Empty])],
    }
}

#[test]
fn balanced_parens_matches_cyk() {
    let g = parens();
    let net = network(&g.to_ebnf()).unwrap();
    let cnf = Cnf::from_bnf(&Bnf::from_rand(&g));
    let mut accepted = 0;
    for word in enumerate_strings(&["(", ")"], 8) {
        let ours = recognize(&net, &Token::symbols(&word)).is_ok();
        assert_eq!(ours, cnf.accepts(&word), "{word:?}");
        accepted += ours as usize;
    }
    // Only the words (^n )^n for n = 0..=4.
    assert_eq!(accepted, 5);
}

#[test]
fn random_grammars_match_cyk() {
    let words = enumerate_strings(&ALPHABET, 6);
    for (g, net) in validated_grammars(7, 30) {
        let cnf = Cnf::from_bnf(&Bnf::from_rand(&g));
        for word in &words {
            let ours = recognize(&net, &Token::symbols(word)).is_ok();
            assert_eq!(ours, cnf.accepts(word), "grammar:\n{}word: {word:?}", g.to_ebnf());
        }
    }
}

#[test]
fn single_pda_agrees_with_recognizer() {
    let words = enumerate_strings(&ALPHABET, 6);
    let mut cases = validated_grammars(11, 25);
    let center = network(r#"s = "(", s, ")" | "x";"#).unwrap();
    let pda = network_to_single_pda(&center);
    for word in enumerate_strings(&["(", ")", "x"], 8) {
        let toks = Token::symbols(&word);
        assert_eq!(pda.accepts(&toks), recognize(&center, &toks).is_ok(), "{word:?}");
    }
    for (g, net) in cases.drain(..) {
        let pda = network_to_single_pda(&net);
        for word in &words {
            let toks = Token::symbols(word);
            assert_eq!(
                pda.accepts(&toks),
                recognize(&net, &toks).is_ok(),
                "grammar:\n{}word: {word:?}",
                g.to_ebnf()
            );
        }
    }
}

#[test]
fn memoization_is_transparent_and_fuel_bounded() {
    let words = enumerate_strings(&ALPHABET, 5);
    let with = RecognizeOptions { memoize: true, fuel: Some(1_000_000) };
    let without = RecognizeOptions { memoize: false, fuel: Some(10_000_000) };
    for (_, net) in validated_grammars(3, 15) {
        for word in &words {
            let toks = Token::symbols(word);
            let a = recognize_with(&net, &toks, with);
            let b = recognize_with(&net, &toks, without);
            assert_eq!(a, b, "{word:?}");
        }
    }
}

#[test]
fn accepted_trees_cover_all_tokens() {
    let words = enumerate_strings(&ALPHABET, 5);
    for (_, net) in validated_grammars(5, 15) {
        for word in &words {
            let toks = Token::symbols(word);
            if let Ok(tree) = recognize(&net, &toks) {
                assert_eq!(tree.span, 0..word.len());
                assert_eq!(tree.label, net.start_symbol);
                let mut leaves = Vec::new();
                tree.walk(&mut |n| {
                    if let Some(i) = n.token {
                        leaves.push(i);
                    }
                });
                assert_eq!(leaves, (0..word.len()).collect::<Vec<_>>());
            }
        }
    }
}
