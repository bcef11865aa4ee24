//! Running the automata network.
//!
//! Nondeterminism is resolved by ordered depth-first search: transitions are
//! tried in construction order and, for every rule called at a position, the
//! full ordered list of reachable end positions is computed. Those lists are
//! memoized on `(rule, position)`, so the first-found parse is both the
//! preferred one and independent of whether memoization is on.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::ops::Range;
use std::rc::Rc;

use thiserror::Error;

use super::{AutomatonNetwork, CharMatcher, Condition, StackOp};

pub const END_OF_INPUT: &str = "end-of-input";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    pub kind: String,
    pub text: String,
    pub line: usize,
    pub column: usize,
    /// Byte offset of the first character in the source text.
    pub offset: usize,
}

impl Token {
    pub fn end_of_input(line: usize, column: usize, offset: usize) -> Self {
        Token {
            kind: END_OF_INPUT.to_string(),
            text: String::new(),
            line,
            column,
            offset,
        }
    }

    /// Token stream for a grammar without a lexical section: every symbol is
    /// its own kind. Appends the end-of-input token.
    pub fn symbols<S: AsRef<str>>(symbols: &[S]) -> Vec<Token> {
        let mut offset = 0;
        let mut out: Vec<Token> = symbols
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let t = Token {
                    kind: s.as_ref().to_string(),
                    text: s.as_ref().to_string(),
                    line: 1,
                    column: i + 1,
                    offset,
                };
                offset += s.as_ref().len();
                t
            })
            .collect();
        out.push(Token::end_of_input(1, symbols.len() + 1, offset));
        out
    }

    pub fn is_end(&self) -> bool {
        self.kind == END_OF_INPUT
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseTree {
    /// Rule name for inner nodes, token kind for leaves.
    pub label: String,
    /// Token index range covered by this node.
    pub span: Range<usize>,
    /// Set on leaves only.
    pub token: Option<usize>,
    pub children: Vec<ParseTree>,
}

impl ParseTree {
    pub fn is_leaf(&self) -> bool {
        self.token.is_some()
    }

    /// Longest root-to-node chain counting only rule nodes.
    pub fn depth(&self) -> usize {
        if self.is_leaf() {
            return 0;
        }
        1 + self.children.iter().map(ParseTree::depth).max().unwrap_or(0)
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a ParseTree)) {
        f(self);
        for c in &self.children {
            c.walk(f);
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Tokenized {
    pub tokens: Vec<Token>,
    /// Skipped tokens whose kind names a comment.
    pub comments: Vec<Token>,
    /// Every skipped token, comments included, in source order.
    pub skipped: Vec<Token>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RecognizeError {
    #[error("{line}:{column}: unexpected {found}; expected {}", expected.join(", "))]
    Syntax {
        position: usize,
        line: usize,
        column: usize,
        found: String,
        expected: Vec<String>,
    },
    #[error("recognizer ran out of fuel")]
    FuelExhausted,
    #[error("rule `{0}` re-entered at the same position")]
    Reentrant(String),
    #[error("token sequence must end with an end-of-input token")]
    MissingEndOfInput,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LexicalError {
    #[error("{line}:{column}: no token matches at `{found}`")]
    NoMatch {
        line: usize,
        column: usize,
        found: char,
    },
    #[error("grammar has no lexical rules")]
    NoLexicon,
    #[error("lexer failed: {0}")]
    Engine(RecognizeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RecognizeOptions {
    pub memoize: bool,
    /// Upper bound on explored configurations.
    pub fuel: Option<u64>,
}

impl Default for RecognizeOptions {
    fn default() -> Self {
        RecognizeOptions {
            memoize: true,
            fuel: None,
        }
    }
}

trait Input {
    fn terminal(&self, pos: usize, s: &str) -> Option<usize>;
    fn char_class(&self, pos: usize, m: &CharMatcher) -> Option<usize>;
    fn token_kind(&self, pos: usize, kind: &str) -> Option<usize>;
}

struct CharInput {
    chars: Vec<char>,
}

impl Input for CharInput {
    fn terminal(&self, pos: usize, s: &str) -> Option<usize> {
        let mut end = pos;
        for c in s.chars() {
            if self.chars.get(end) != Some(&c) {
                return None;
            }
            end += 1;
        }
        Some(end)
    }

    fn char_class(&self, pos: usize, m: &CharMatcher) -> Option<usize> {
        if m.is_zero_width() {
            return (pos == 0 || self.chars.get(pos - 1) == Some(&'\n')).then_some(pos);
        }
        self.chars.get(pos).filter(|c| m.matches(**c)).map(|_| pos + 1)
    }

    fn token_kind(&self, _: usize, _: &str) -> Option<usize> {
        None
    }
}

struct TokenInput<'t> {
    tokens: &'t [Token],
}

impl Input for TokenInput<'_> {
    fn terminal(&self, pos: usize, s: &str) -> Option<usize> {
        let t = self.tokens.get(pos)?;
        (!t.is_end() && t.text == s).then_some(pos + 1)
    }

    fn char_class(&self, _: usize, _: &CharMatcher) -> Option<usize> {
        None
    }

    fn token_kind(&self, pos: usize, kind: &str) -> Option<usize> {
        let t = self.tokens.get(pos)?;
        (!t.is_end() && t.kind == kind).then_some(pos + 1)
    }
}

enum Node {
    Leaf(usize),
    Rule {
        rule: usize,
        start: usize,
        end: usize,
        children: Vec<Rc<Node>>,
    },
}

struct Cons {
    node: Rc<Node>,
    prev: Option<Rc<Cons>>,
}

#[derive(Clone)]
struct Match {
    end: usize,
    node: Option<Rc<Node>>,
}

struct Item {
    state: usize,
    pos: usize,
    markers: Vec<u32>,
    children: Option<Rc<Cons>>,
}

struct Engine<'n, I> {
    net: &'n AutomatonNetwork,
    input: I,
    lexical_level: bool,
    build_trees: bool,
    memoize: bool,
    memo: HashMap<(usize, usize), Rc<Vec<Match>>>,
    active: HashSet<(usize, usize)>,
    fuel: Option<u64>,
    furthest: usize,
    expected: BTreeSet<String>,
}

impl<'n, I: Input> Engine<'n, I> {
    fn new(net: &'n AutomatonNetwork, input: I, lexical_level: bool, opts: RecognizeOptions) -> Self {
        Engine {
            net,
            input,
            lexical_level,
            build_trees: !lexical_level,
            memoize: opts.memoize,
            memo: HashMap::new(),
            active: HashSet::new(),
            fuel: opts.fuel,
            furthest: 0,
            expected: BTreeSet::new(),
        }
    }

    fn fail(&mut self, pos: usize, what: String) {
        if pos > self.furthest {
            self.furthest = pos;
            self.expected.clear();
        }
        if pos == self.furthest {
            self.expected.insert(what);
        }
    }

    /// All ways rule `rule` matches starting at `pos`, in preference order.
    fn run(&mut self, rule: usize, pos: usize) -> Result<Rc<Vec<Match>>, RecognizeError> {
        if self.memoize {
            if let Some(hit) = self.memo.get(&(rule, pos)) {
                return Ok(hit.clone());
            }
        }
        if !self.active.insert((rule, pos)) {
            let name = self.net.automata.get_index(rule).expect("rule index").0;
            return Err(RecognizeError::Reentrant(name.clone()));
        }
        let result = Rc::new(self.explore(rule, pos)?);
        self.active.remove(&(rule, pos));
        if self.memoize {
            self.memo.insert((rule, pos), result.clone());
        }
        Ok(result)
    }

    fn explore(&mut self, rule: usize, start: usize) -> Result<Vec<Match>, RecognizeError> {
        let net = self.net;
        let auto = net.automata.get_index(rule).expect("rule index").1;
        let mut results: Vec<Match> = Vec::new();
        let mut ends: HashSet<usize> = HashSet::new();
        let mut visited: HashSet<(usize, usize, Vec<u32>)> = HashSet::new();
        let mut stack = vec![Item {
            state: auto.initial,
            pos: start,
            markers: Vec::new(),
            children: None,
        }];

        while let Some(item) = stack.pop() {
            if let Some(fuel) = self.fuel.as_mut() {
                if *fuel == 0 {
                    return Err(RecognizeError::FuelExhausted);
                }
                *fuel -= 1;
            }
            if !visited.insert((item.state, item.pos, item.markers.clone())) {
                continue;
            }
            if auto.is_final(item.state) && item.markers.is_empty() && ends.insert(item.pos) {
                let node = self.build_trees.then(|| {
                    Rc::new(Node::Rule {
                        rule,
                        start,
                        end: item.pos,
                        children: collect(&item.children),
                    })
                });
                results.push(Match {
                    end: item.pos,
                    node,
                });
            }

            let mut successors: Vec<Item> = Vec::new();
            for &ti in auto.outgoing(item.state) {
                let t = &auto.transitions[ti];
                let markers = match t.stack_op {
                    StackOp::None => item.markers.clone(),
                    StackOp::Push(m) => {
                        let mut v = item.markers.clone();
                        v.push(m.0);
                        v
                    }
                    StackOp::PopExpect(m) => {
                        if item.markers.last() != Some(&m.0) {
                            continue;
                        }
                        item.markers[..item.markers.len() - 1].to_vec()
                    }
                };
                let advance = |end: usize, node: Option<Rc<Node>>| Item {
                    state: t.to,
                    pos: end,
                    markers: markers.clone(),
                    children: match node {
                        Some(node) => Some(Rc::new(Cons {
                            node,
                            prev: item.children.clone(),
                        })),
                        None => item.children.clone(),
                    },
                };
                match &t.condition {
                    Condition::Epsilon => successors.push(advance(item.pos, None)),
                    Condition::Terminal(s) => match self.input.terminal(item.pos, s) {
                        Some(end) => successors.push(advance(end, self.leaf(item.pos))),
                        None => self.fail(item.pos, format!("{s:?}")),
                    },
                    Condition::CharClass(m) => match self.input.char_class(item.pos, m) {
                        Some(end) => successors.push(advance(end, None)),
                        None => self.fail(item.pos, m.to_string()),
                    },
                    Condition::Call(name) if !self.lexical_level && net.is_lexical(name) => {
                        match self.input.token_kind(item.pos, name) {
                            Some(end) => successors.push(advance(end, self.leaf(item.pos))),
                            None => self.fail(item.pos, name.clone()),
                        }
                    }
                    Condition::Call(name) => {
                        let callee = net.automata.get_index_of(name).expect("closed network");
                        let sub = self.run(callee, item.pos)?;
                        for m in sub.iter() {
                            successors.push(advance(m.end, m.node.clone()));
                        }
                    }
                }
            }
            stack.extend(successors.into_iter().rev());
        }
        Ok(results)
    }

    fn leaf(&self, pos: usize) -> Option<Rc<Node>> {
        self.build_trees.then(|| Rc::new(Node::Leaf(pos)))
    }
}

fn collect(list: &Option<Rc<Cons>>) -> Vec<Rc<Node>> {
    let mut out = Vec::new();
    let mut cur = list.as_ref();
    while let Some(c) = cur {
        out.push(c.node.clone());
        cur = c.prev.as_ref();
    }
    out.reverse();
    out
}

fn to_tree(node: &Node, net: &AutomatonNetwork, tokens: &[Token]) -> ParseTree {
    match node {
        Node::Leaf(i) => ParseTree {
            label: tokens[*i].kind.clone(),
            span: *i..*i + 1,
            token: Some(*i),
            children: Vec::new(),
        },
        Node::Rule {
            rule,
            start,
            end,
            children,
        } => ParseTree {
            label: net.automata.get_index(*rule).expect("rule").0.clone(),
            span: *start..*end,
            token: None,
            children: children.iter().map(|c| to_tree(c, net, tokens)).collect(),
        },
    }
}

/// Accepts `tokens` (terminated by an end-of-input token) iff they belong to
/// the language of the network's start symbol.
pub fn recognize(net: &AutomatonNetwork, tokens: &[Token]) -> Result<ParseTree, RecognizeError> {
    recognize_with(net, tokens, RecognizeOptions::default())
}

pub fn recognize_with(
    net: &AutomatonNetwork,
    tokens: &[Token],
    opts: RecognizeOptions,
) -> Result<ParseTree, RecognizeError> {
    if !tokens.last().is_some_and(Token::is_end) {
        return Err(RecognizeError::MissingEndOfInput);
    }
    let target = tokens.len() - 1;
    let start = net
        .automata
        .get_index_of(&net.start_symbol)
        .expect("start symbol present");
    let mut engine = Engine::new(net, TokenInput { tokens }, false, opts);
    let matches = engine.run(start, 0)?;

    if let Some(m) = matches.iter().find(|m| m.end == target) {
        // Matches are only recorded in a final state with an empty inner stack.
        let node = m.node.as_ref().expect("trees are built at syntax level");
        return Ok(to_tree(node, net, tokens));
    }
    for m in matches.iter() {
        engine.fail(m.end, "end of input".into());
    }
    let pos = engine.furthest.min(target);
    let tok = &tokens[pos];
    Err(RecognizeError::Syntax {
        position: pos,
        line: tok.line,
        column: tok.column,
        found: if tok.is_end() {
            "end of input".into()
        } else {
            format!("{:?}", tok.text)
        },
        expected: engine.expected.into_iter().collect(),
    })
}

/// Whether lexical rule `kind` matches the whole of `text`.
pub fn lexeme_matches(net: &AutomatonNetwork, kind: &str, text: &str) -> bool {
    let Some(rule) = net.automata.get_index_of(kind) else {
        return false;
    };
    let chars: Vec<char> = text.chars().collect();
    let n = chars.len();
    let mut engine = Engine::new(net, CharInput { chars }, true, RecognizeOptions::default());
    engine.run(rule, 0).is_ok_and(|m| m.iter().any(|m| m.end == n))
}

/// Splits `text` into tokens: longest match wins, ties go to the rule
/// declared first. Skip-flagged tokens are set aside.
pub fn tokenize(net: &AutomatonNetwork, text: &str) -> Result<Tokenized, LexicalError> {
    if net.lexical.is_empty() {
        return Err(LexicalError::NoLexicon);
    }
    let indexed: Vec<(usize, char)> = text.char_indices().collect();
    let chars: Vec<char> = indexed.iter().map(|(_, c)| *c).collect();
    let rules: Vec<usize> = net
        .lexical
        .iter()
        .map(|l| net.automata.get_index_of(&l.kind).expect("lexical automaton"))
        .collect();
    let mut engine = Engine::new(net, CharInput { chars }, true, RecognizeOptions::default());
    let n = indexed.len();
    let mut out = Tokenized::default();
    let (mut pos, mut line, mut column) = (0usize, 1usize, 1usize);

    while pos < n {
        let mut best: Option<(usize, usize)> = None;
        for (i, &rule) in rules.iter().enumerate() {
            let matches = engine.run(rule, pos).map_err(LexicalError::Engine)?;
            if let Some(end) = matches.iter().map(|m| m.end).max() {
                if end > pos && best.is_none_or(|(_, e)| end > e) {
                    best = Some((i, end));
                }
            }
        }
        let Some((which, end)) = best else {
            return Err(LexicalError::NoMatch {
                line,
                column,
                found: indexed[pos].1,
            });
        };
        let byte_start = indexed[pos].0;
        let byte_end = indexed.get(end).map_or(text.len(), |(b, _)| *b);
        let entry = &net.lexical[which];
        let token = Token {
            kind: entry.kind.clone(),
            text: text[byte_start..byte_end].to_string(),
            line,
            column,
            offset: byte_start,
        };
        for &(_, c) in &indexed[pos..end] {
            if c == '\n' {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
        }
        if entry.skip {
            if entry.kind.to_ascii_lowercase().contains("comment") {
                out.comments.push(token.clone());
            }
            out.skipped.push(token);
        } else {
            out.tokens.push(token);
        }
        pos = end;
    }
    out.tokens.push(Token::end_of_input(line, column, text.len()));
    Ok(out)
}
