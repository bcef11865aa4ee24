//! Flattening the network into one nondeterministic pushdown automaton.
//!
//! Each syntax automaton's states are laid out in a single numbering. A call
//! pushes the caller's return state and jumps to the callee's initial state;
//! every final state of the callee may pop a return state and continue there.
//! Lexical calls become single token reads, since tokens are the alphabet.

use std::collections::{BTreeSet, HashSet};

use super::{AutomatonNetwork, Condition, Marker, StackOp, StateId, Token};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StackSymbol {
    Bottom,
    Return(StateId),
    Marker(Marker),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PdaInput {
    Terminal(String),
    TokenKind(String),
    Epsilon,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PdaTransition {
    pub from: StateId,
    pub to: StateId,
    pub input: PdaInput,
    pub pop: Option<StackSymbol>,
    pub push: Option<StackSymbol>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pda {
    pub state_count: usize,
    pub initial: StateId,
    /// Final states of the start rule; acceptance also needs only the bottom
    /// marker left on the stack.
    pub finals: Vec<StateId>,
    pub stack_alphabet: BTreeSet<StackSymbol>,
    pub transitions: Vec<PdaTransition>,
    /// `(rule, first state)` for every flattened automaton.
    pub layout: Vec<(String, StateId)>,
    outgoing: Vec<Vec<usize>>,
}

pub fn network_to_single_pda(net: &AutomatonNetwork) -> Pda {
    let syntax: Vec<(&String, &super::Automaton)> = net
        .automata
        .iter()
        .filter(|(name, _)| !net.is_lexical(name))
        .collect();
    let mut layout = Vec::new();
    let mut offset = 0;
    for (name, a) in &syntax {
        layout.push(((*name).clone(), offset));
        offset += a.state_count;
    }
    let base = |name: &str| layout.iter().find(|(n, _)| n == name).map(|(_, o)| *o);

    let mut transitions = Vec::new();
    let mut alphabet = BTreeSet::from([StackSymbol::Bottom]);
    let mut returns: Vec<(String, StateId)> = Vec::new();

    for (name, a) in &syntax {
        let off = base(name).expect("laid out");
        for t in &a.transitions {
            let (from, to) = (off + t.from, off + t.to);
            let (pop, push) = match t.stack_op {
                StackOp::None => (None, None),
                StackOp::Push(m) => (None, Some(StackSymbol::Marker(m))),
                StackOp::PopExpect(m) => (Some(StackSymbol::Marker(m)), None),
            };
            if let Some(m) = pop.or(push) {
                alphabet.insert(m);
            }
            let input = match &t.condition {
                Condition::Terminal(s) => PdaInput::Terminal(s.clone()),
                Condition::Epsilon => PdaInput::Epsilon,
                Condition::Call(c) if net.is_lexical(c) => PdaInput::TokenKind(c.clone()),
                Condition::Call(c) => {
                    let ret = StackSymbol::Return(to);
                    alphabet.insert(ret);
                    returns.push((c.clone(), to));
                    let callee = &net.automata[c.as_str()];
                    transitions.push(PdaTransition {
                        from,
                        to: base(c).expect("laid out") + callee.initial,
                        input: PdaInput::Epsilon,
                        pop,
                        push: Some(ret),
                    });
                    continue;
                }
                Condition::CharClass(_) => unreachable!("validated syntax rules read no characters"),
            };
            transitions.push(PdaTransition {
                from,
                to,
                input,
                pop,
                push,
            });
        }
    }
    for (callee, ret) in returns {
        let a = &net.automata[callee.as_str()];
        let off = base(&callee).expect("laid out");
        for f in &a.finals {
            transitions.push(PdaTransition {
                from: off + f,
                to: ret,
                input: PdaInput::Epsilon,
                pop: Some(StackSymbol::Return(ret)),
                push: None,
            });
        }
    }

    let start = &net.automata[net.start_symbol.as_str()];
    let start_off = base(&net.start_symbol).expect("start laid out");
    let mut outgoing = vec![Vec::new(); offset];
    for (i, t) in transitions.iter().enumerate() {
        outgoing[t.from].push(i);
    }
    Pda {
        state_count: offset,
        initial: start_off + start.initial,
        finals: start.finals.iter().map(|f| start_off + f).collect(),
        stack_alphabet: alphabet,
        transitions,
        layout,
        outgoing,
    }
}

#[derive(Clone)]
struct Stack {
    top: StackSymbol,
    rest: Option<std::rc::Rc<Stack>>,
}

impl Pda {
    /// Stack symbols other than the bottom marker.
    pub fn extra_stack_symbols(&self) -> usize {
        self.stack_alphabet.len() - 1
    }

    /// Simulates the automaton on a token sequence (optionally terminated by
    /// an end-of-input token). Accepts in a final state with only the bottom
    /// marker on the stack after all tokens are read.
    pub fn accepts(&self, tokens: &[Token]) -> bool {
        let tokens = match tokens.last() {
            Some(t) if t.is_end() => &tokens[..tokens.len() - 1],
            _ => tokens,
        };
        let bottom = std::rc::Rc::new(Stack {
            top: StackSymbol::Bottom,
            rest: None,
        });
        let mut seen: HashSet<(StateId, usize, Vec<StackSymbol>)> = HashSet::new();
        let mut work = vec![(self.initial, 0usize, bottom)];
        while let Some((state, pos, stack)) = work.pop() {
            if !seen.insert((state, pos, flatten(&stack))) {
                continue;
            }
            if pos == tokens.len()
                && self.finals.contains(&state)
                && stack.top == StackSymbol::Bottom
            {
                return true;
            }
            for &ti in &self.outgoing[state] {
                let t = &self.transitions[ti];
                let next_pos = match &t.input {
                    PdaInput::Epsilon => pos,
                    PdaInput::Terminal(s) => match tokens.get(pos) {
                        Some(tok) if &tok.text == s => pos + 1,
                        _ => continue,
                    },
                    PdaInput::TokenKind(k) => match tokens.get(pos) {
                        Some(tok) if &tok.kind == k => pos + 1,
                        _ => continue,
                    },
                };
                let mut next = stack.clone();
                if let Some(p) = t.pop {
                    if next.top != p {
                        continue;
                    }
                    next = next.rest.clone().expect("bottom is never popped");
                }
                if let Some(p) = t.push {
                    next = std::rc::Rc::new(Stack {
                        top: p,
                        rest: Some(next),
                    });
                }
                work.push((t.to, next_pos, next));
            }
        }
        false
    }
}

fn flatten(stack: &Stack) -> Vec<StackSymbol> {
    let mut out = vec![stack.top];
    let mut cur = stack.rest.as_deref();
    while let Some(s) = cur {
        out.push(s.top);
        cur = s.rest.as_deref();
    }
    out
}
