//! Network of per-rule pushdown automata built from a [`Grammar`].
//!
//! Every rule compiles into one automaton whose transitions read a terminal,
//! read one character of a class, call another rule's automaton, or move
//! silently. Group boundaries push a marker on the automaton's own stack and
//! pop it on exit, so an automaton accepts only in a final state with its
//! inner stack empty.

mod dump;
mod engine;
mod pda;

use indexmap::IndexMap;
use thiserror::Error;

use crate::ebnf::{has_errors, validate_grammar, CharClass, Grammar, GrammarIssue, RuleExpr};

pub use dump::{network_to_xml, tree_to_xml};
pub use engine::{
    lexeme_matches, recognize, recognize_with, tokenize, LexicalError, ParseTree, RecognizeError,
    RecognizeOptions, Token, Tokenized, END_OF_INPUT,
};
pub use pda::{network_to_single_pda, Pda, PdaInput, PdaTransition, StackSymbol};

pub type StateId = usize;

/// Symbol on an automaton's inner stack; one per group in the grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Marker(pub u32);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CharMatcher {
    Class(CharClass),
    Char(char),
    Except {
        base: Box<CharMatcher>,
        excluded: Vec<CharMatcher>,
    },
}

impl CharMatcher {
    pub fn matches(&self, c: char) -> bool {
        match self {
            CharMatcher::Class(class) => class.contains(c),
            CharMatcher::Char(x) => *x == c,
            CharMatcher::Except { base, excluded } => {
                base.matches(c) && !excluded.iter().any(|e| e.matches(c))
            }
        }
    }

    pub fn is_zero_width(&self) -> bool {
        matches!(self, CharMatcher::Class(c) if c.is_zero_width())
    }

    fn from_operand(e: &RuleExpr) -> CharMatcher {
        match e {
            RuleExpr::Terminal(s) => CharMatcher::Char(s.chars().next().expect("non-empty")),
            RuleExpr::Special(c) => CharMatcher::Class(*c),
            other => unreachable!("parser only admits character operands, got {other:?}"),
        }
    }
}

impl std::fmt::Display for CharMatcher {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CharMatcher::Class(c) => write!(f, "?{}?", c.name()),
            CharMatcher::Char(c) => write!(f, "{c:?}"),
            CharMatcher::Except { base, excluded } => {
                write!(f, "{base}")?;
                for e in excluded {
                    write!(f, " - {e}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Condition {
    Terminal(String),
    CharClass(CharMatcher),
    Call(String),
    Epsilon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StackOp {
    None,
    Push(Marker),
    PopExpect(Marker),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub from: StateId,
    pub to: StateId,
    pub condition: Condition,
    pub stack_op: StackOp,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Automaton {
    pub owner: String,
    pub state_count: usize,
    pub initial: StateId,
    pub finals: Vec<StateId>,
    pub transitions: Vec<Transition>,
    outgoing: Vec<Vec<usize>>,
}

impl Automaton {
    /// Indices into `transitions` leaving `state`, in construction order.
    pub fn outgoing(&self, state: StateId) -> &[usize] {
        &self.outgoing[state]
    }

    pub fn is_final(&self, state: StateId) -> bool {
        self.finals.contains(&state)
    }

    fn index(&mut self) {
        self.outgoing = vec![Vec::new(); self.state_count];
        for (i, t) in self.transitions.iter().enumerate() {
            self.outgoing[t.from].push(i);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexicalEntry {
    pub kind: String,
    pub skip: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AutomatonNetwork {
    /// Syntax automata first (in rule order), then lexical ones.
    pub automata: IndexMap<String, Automaton>,
    pub start_symbol: String,
    /// Token kinds in declaration order; each names an entry of `automata`.
    pub lexical: Vec<LexicalEntry>,
    pub marker_count: u32,
}

impl AutomatonNetwork {
    pub fn is_lexical(&self, name: &str) -> bool {
        self.lexical.iter().any(|l| l.kind == name)
    }

    pub fn automaton(&self, name: &str) -> Option<&Automaton> {
        self.automata.get(name)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BuildError {
    #[error("grammar failed validation: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidGrammar(Vec<GrammarIssue>),
}

/// Compiles every rule of a validated grammar into its automaton.
pub fn build_network(g: &Grammar) -> Result<AutomatonNetwork, BuildError> {
    let issues = validate_grammar(g);
    if has_errors(&issues) {
        return Err(BuildError::InvalidGrammar(
            issues
                .into_iter()
                .filter(|i| i.severity() == crate::Severity::Error)
                .collect(),
        ));
    }
    let mut markers = 0u32;
    let mut automata = IndexMap::new();
    for (name, expr) in &g.rules {
        automata.insert(name.clone(), compile_rule(name, expr, &mut markers));
    }
    for rule in &g.lexical_rules {
        automata.insert(rule.name.clone(), compile_rule(&rule.name, &rule.expr, &mut markers));
    }
    Ok(AutomatonNetwork {
        automata,
        start_symbol: g.start_symbol.clone(),
        lexical: g
            .lexical_rules
            .iter()
            .map(|r| LexicalEntry {
                kind: r.name.clone(),
                skip: r.skip,
            })
            .collect(),
        marker_count: markers,
    })
}

struct Builder<'m> {
    auto: Automaton,
    markers: &'m mut u32,
}

fn compile_rule(name: &str, expr: &RuleExpr, markers: &mut u32) -> Automaton {
    let mut b = Builder {
        auto: Automaton {
            owner: name.to_string(),
            state_count: 2,
            initial: 0,
            finals: vec![1],
            transitions: Vec::new(),
            outgoing: Vec::new(),
        },
        markers,
    };
    b.compile(expr, 0, 1);
    b.auto.index();
    b.auto
}

impl Builder<'_> {
    fn state(&mut self) -> StateId {
        self.auto.state_count += 1;
        self.auto.state_count - 1
    }

    fn edge(&mut self, from: StateId, to: StateId, condition: Condition, stack_op: StackOp) {
        self.auto.transitions.push(Transition {
            from,
            to,
            condition,
            stack_op,
        });
    }

    // Fragments only add edges out of `from` or fresh states and into `to` or
    // fresh states, which keeps sharing endpoints between alternatives sound.
    fn compile(&mut self, e: &RuleExpr, from: StateId, to: StateId) {
        match e {
            RuleExpr::Terminal(s) => self.edge(from, to, Condition::Terminal(s.clone()), StackOp::None),
            RuleExpr::Nonterminal(n) => self.edge(from, to, Condition::Call(n.clone()), StackOp::None),
            RuleExpr::Special(c) => self.edge(
                from,
                to,
                Condition::CharClass(CharMatcher::Class(*c)),
                StackOp::None,
            ),
            RuleExpr::Exception { base, subtrahend } => {
                let excluded = match subtrahend.as_ref() {
                    RuleExpr::Group(inner) => match inner.as_ref() {
                        RuleExpr::Alternation(alts) => alts.iter().map(CharMatcher::from_operand).collect(),
                        other => vec![CharMatcher::from_operand(other)],
                    },
                    other => vec![CharMatcher::from_operand(other)],
                };
                let m = CharMatcher::Except {
                    base: Box::new(CharMatcher::from_operand(base)),
                    excluded,
                };
                self.edge(from, to, Condition::CharClass(m), StackOp::None);
            }
            RuleExpr::Empty => self.edge(from, to, Condition::Epsilon, StackOp::None),
            RuleExpr::Sequence(items) => {
                let mut cur = from;
                for (i, item) in items.iter().enumerate() {
                    let next = if i + 1 == items.len() { to } else { self.state() };
                    self.compile(item, cur, next);
                    cur = next;
                }
            }
            RuleExpr::Alternation(alts) => {
                for alt in alts {
                    self.compile(alt, from, to);
                }
            }
            RuleExpr::Optional(inner) => {
                self.compile(inner, from, to);
                self.edge(from, to, Condition::Epsilon, StackOp::None);
            }
            RuleExpr::Repetition { inner, min } => {
                let mut cur = from;
                for _ in 0..*min {
                    let next = self.state();
                    self.compile(inner, cur, next);
                    cur = next;
                }
                let hub = self.state();
                self.edge(cur, hub, Condition::Epsilon, StackOp::None);
                self.compile(inner, hub, hub);
                self.edge(hub, to, Condition::Epsilon, StackOp::None);
            }
            RuleExpr::Group(inner) => {
                let marker = Marker(*self.markers);
                *self.markers += 1;
                let open = self.state();
                let close = self.state();
                self.edge(from, open, Condition::Epsilon, StackOp::Push(marker));
                self.compile(inner, open, close);
                self.edge(close, to, Condition::Epsilon, StackOp::PopExpect(marker));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ebnf::{parse_ebnf, GrammarSource};

    fn net(text: &str) -> Result<AutomatonNetwork, BuildError> {
        build_network(&parse_ebnf(&GrammarSource::new("t", text)).unwrap())
    }

    #[test]
    fn digit_has_two_terminal_edges_to_final() {
        let n = net(r#"digit = "0"|"1";"#).unwrap();
        let a = n.automaton("digit").unwrap();
        assert_eq!(a.transitions.len(), 2);
        for t in &a.transitions {
            assert_eq!(t.from, a.initial);
            assert!(a.is_final(t.to));
            assert!(matches!(t.condition, Condition::Terminal(_)));
        }
    }

    #[test]
    fn recursive_rule_has_one_call() {
        let n = net(r#"s = "(", s, ")" | "x";"#).unwrap();
        let calls = n.automaton("s").unwrap().transitions.iter()
            .filter(|t| t.condition == Condition::Call("s".into()))
            .count();
        assert_eq!(calls, 1);
    }

    #[test]
    fn left_recursive_grammar_rejected() {
        let err = net(r#"a = a, "x" | "x";"#).unwrap_err();
        assert_eq!(err, BuildError::InvalidGrammar(vec![GrammarIssue::LeftRecursion("a".into())]));
    }

    #[test]
    fn groups_push_and_pop_matching_markers() {
        let n = net(r#"e = "x", { ( "+" | "-" ), "x" };"#).unwrap();
        let a = n.automaton("e").unwrap();
        let pushes: Vec<_> = a.transitions.iter().filter_map(|t| match t.stack_op {
            StackOp::Push(m) => Some(m),
            _ => None,
        }).collect();
        let pops: Vec<_> = a.transitions.iter().filter_map(|t| match t.stack_op {
            StackOp::PopExpect(m) => Some(m),
            _ => None,
        }).collect();
        assert_eq!(pushes, vec![Marker(0)]);
        assert_eq!(pops, vec![Marker(0)]);
        assert_eq!(n.marker_count, 1);
    }

    #[test]
    fn all_endpoints_valid() {
        let n = net(r#"a = [ "x" ], { b | "y" }, 2 * { "z" }; b = ( "q" ), "r";"#).unwrap();
        for a in n.automata.values() {
            assert!(a.initial < a.state_count);
            assert!(!a.finals.is_empty());
            for t in &a.transitions {
                assert!(t.from < a.state_count && t.to < a.state_count);
                if let Condition::Call(c) = &t.condition {
                    assert!(n.automata.contains_key(c));
                }
            }
        }
    }
}
