use std::collections::BTreeSet;

use comodi_core::automata::{build_network, tokenize, Token};
use comodi_core::ebnf::{parse_ebnf, validate_grammar, GrammarIssue, GrammarSource};
use comodi_oracles::{left_derives_itself, random_grammar, Bnf, RandGrammar};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn seeded(seed: u64, rules: usize) -> RandGrammar {
    random_grammar(&mut StdRng::seed_from_u64(seed), rules, 3, &["a", "b"])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn left_recursion_matches_derivation_search(seed in any::<u64>()) {
        let rg = seeded(seed, 4);
        let g = parse_ebnf(&GrammarSource::new("random", &rg.to_ebnf())).unwrap();
        let reported: BTreeSet<String> = validate_grammar(&g)
            .into_iter()
            .filter_map(|i| match i {
                GrammarIssue::LeftRecursion(r) => Some(r),
                _ => None,
            })
            .collect();
        let bnf = Bnf::from_rand(&rg);
        let window = bnf.prods.iter().flatten().map(Vec::len).max().unwrap_or(1);
        let expected: BTreeSet<String> = (0..rg.rules.len())
            .filter(|&i| left_derives_itself(&bnf, i, window))
            .map(RandGrammar::name)
            .collect();
        prop_assert_eq!(reported, expected, "{}", rg.to_ebnf());
    }

    #[test]
    fn pretty_print_round_trips(seed in any::<u64>(), rules in 1usize..6) {
        let rg = seeded(seed, rules);
        let g = parse_ebnf(&GrammarSource::new("random", &rg.to_ebnf())).unwrap();
        let printed = g.to_string();
        let again = parse_ebnf(&GrammarSource::new("printed", &printed)).unwrap();
        prop_assert_eq!(&g, &again);
        prop_assert_eq!(printed, again.to_string());
    }

    #[test]
    fn tokens_and_skipped_spans_reproduce_input(src in "[a-z0-9_ ;,\n\t]{0,40}|(/\\*[a-z *]{0,8}\\*/|[a-z]{1,4}| |;){0,12}") {
        let net = build_network(&parse_ebnf(&GrammarSource::new("lex", LEXICON)).unwrap()).unwrap();
        let out = tokenize(&net, &src).unwrap();
        let mut pieces: Vec<&Token> = out.tokens.iter().chain(&out.skipped).collect();
        pieces.sort_by_key(|t| t.offset);
        let joined: String = pieces.iter().map(|t| t.text.as_str()).collect();
        prop_assert_eq!(joined, src);
        prop_assert!(out.tokens.last().unwrap().is_end());
        prop_assert!(out.tokens[..out.tokens.len() - 1].iter().all(|t| !t.text.is_empty()));
    }
}

const LEXICON: &str = r#"(*LEXICAL*)
(*SKIP*) whitespace = ? whitespace ?, { ? whitespace ? };
(*SKIP*) comment = "/*", { ? any ? - "*" | "*", { "*" }, ? any ? - ( "*" | "/" ) }, "*", { "*" }, "/";
word = ( ? letter ? | ? digit ? | "_" ), { ? letter ? | ? digit ? | "_" };
punct = ";" | "," | "*" | "/";
(*SYNTAX*)
text = { word | punct };
"#;
