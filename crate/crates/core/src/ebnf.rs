//! ISO/IEC 14977 EBNF grammar files.
//!
//! Supported subset: quoted terminals (either quote style), concatenation `,`,
//! alternation `|`, `[ ]`, `{ }`, `( )`, `;` terminators, `(* *)` comments,
//! repetition factors `n *`, special sequences naming a fixed catalog of
//! character classes, and exceptions `-` between single-character operands.
//!
//! The directive comments `(*LEXICAL*)` and `(*SYNTAX*)` split the file into
//! token rules and phrase rules; `(*SKIP*)` before a lexical rule marks tokens
//! the tokenizer discards.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::path::Path;

use indexmap::IndexMap;
use thiserror::Error;

use crate::diag::Severity;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrammarSource {
    pub origin: String,
    pub text: String,
}

impl GrammarSource {
    pub fn new(origin: impl Into<String>, text: impl Into<String>) -> Self {
        GrammarSource {
            origin: origin.into(),
            text: text.into(),
        }
    }

    pub fn from_file(path: &Path) -> std::io::Result<Self> {
        Ok(GrammarSource::new(
            path.display().to_string(),
            std::fs::read_to_string(path)?,
        ))
    }
}

/// Character classes usable in `? ... ?` special sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CharClass {
    Letter,
    Digit,
    Any,
    Eol,
    Whitespace,
    /// Zero-width: matches at offset 0 or right after a line feed.
    LineStart,
}

impl CharClass {
    pub const CATALOG: [CharClass; 6] = [
        CharClass::Letter,
        CharClass::Digit,
        CharClass::Any,
        CharClass::Eol,
        CharClass::Whitespace,
        CharClass::LineStart,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CharClass::Letter => "letter",
            CharClass::Digit => "digit",
            CharClass::Any => "any",
            CharClass::Eol => "eol",
            CharClass::Whitespace => "whitespace",
            CharClass::LineStart => "line start",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        let norm = name.split_whitespace().collect::<Vec<_>>().join(" ");
        Self::CATALOG.into_iter().find(|c| c.name() == norm)
    }

    pub fn is_zero_width(self) -> bool {
        self == CharClass::LineStart
    }

    pub fn contains(self, c: char) -> bool {
        match self {
            CharClass::Letter => c.is_ascii_alphabetic(),
            CharClass::Digit => c.is_ascii_digit(),
            CharClass::Any => true,
            CharClass::Eol => c == '\n' || c == '\r',
            CharClass::Whitespace => c.is_whitespace(),
            CharClass::LineStart => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleExpr {
    Terminal(String),
    Nonterminal(String),
    Sequence(Vec<RuleExpr>),
    Alternation(Vec<RuleExpr>),
    Optional(Box<RuleExpr>),
    /// `{ x }` when `min` is 0, `n * { x }` otherwise: at least `min` repetitions.
    Repetition { inner: Box<RuleExpr>, min: u32 },
    Group(Box<RuleExpr>),
    Special(CharClass),
    Exception {
        base: Box<RuleExpr>,
        subtrahend: Box<RuleExpr>,
    },
    /// An empty alternative, as in `s = "(", s, ")" | ;`.
    Empty,
}

impl RuleExpr {
    pub fn terminal(s: &str) -> Self {
        RuleExpr::Terminal(s.to_string())
    }

    pub fn nonterminal(s: &str) -> Self {
        RuleExpr::Nonterminal(s.to_string())
    }

    /// Visits every nonterminal reference in source order.
    pub fn for_each_reference<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            RuleExpr::Nonterminal(n) => f(n),
            RuleExpr::Sequence(items) | RuleExpr::Alternation(items) => {
                items.iter().for_each(|i| i.for_each_reference(f))
            }
            RuleExpr::Optional(inner)
            | RuleExpr::Group(inner)
            | RuleExpr::Repetition { inner, .. } => inner.for_each_reference(f),
            RuleExpr::Exception { base, subtrahend } => {
                base.for_each_reference(f);
                subtrahend.for_each_reference(f);
            }
            RuleExpr::Terminal(_) | RuleExpr::Special(_) | RuleExpr::Empty => {}
        }
    }

    fn contains_char_level(&self) -> bool {
        match self {
            RuleExpr::Special(_) | RuleExpr::Exception { .. } => true,
            RuleExpr::Sequence(items) | RuleExpr::Alternation(items) => {
                items.iter().any(RuleExpr::contains_char_level)
            }
            RuleExpr::Optional(inner)
            | RuleExpr::Group(inner)
            | RuleExpr::Repetition { inner, .. } => inner.contains_char_level(),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexicalRule {
    pub name: String,
    pub expr: RuleExpr,
    pub skip: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grammar {
    pub rules: IndexMap<String, RuleExpr>,
    pub start_symbol: String,
    pub lexical_rules: Vec<LexicalRule>,
}

impl Grammar {
    pub fn lexical(&self, name: &str) -> Option<&LexicalRule> {
        self.lexical_rules.iter().find(|r| r.name == name)
    }

    pub fn is_defined(&self, name: &str) -> bool {
        self.rules.contains_key(name) || self.lexical(name).is_some()
    }

    /// Renders the grammar back into EBNF text.
    pub fn pretty_print(&self) -> String {
        self.to_string()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EbnfError {
    #[error("{origin}:{line}:{column}: {message}")]
    Syntax {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{origin}:{line}:{column}: duplicate rule `{name}`")]
    DuplicateRule {
        origin: String,
        name: String,
        line: usize,
        column: usize,
    },
    #[error("{origin}:{line}:{column}: missing section marker: {message}")]
    MissingSectionMarker {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{origin}: grammar has no syntax rules")]
    NoStartRule { origin: String },
    #[error("{origin}: grammar source is empty")]
    EmptySource { origin: String },
}

impl EbnfError {
    pub fn position(&self) -> Option<(usize, usize)> {
        match self {
            EbnfError::Syntax { line, column, .. }
            | EbnfError::DuplicateRule { line, column, .. }
            | EbnfError::MissingSectionMarker { line, column, .. } => Some((*line, *column)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Terminal(String),
    Special(String),
    Integer(u32),
    Sym(char),
    Lexical,
    Syntax,
    Skip,
    End,
}

#[derive(Debug, Clone)]
struct Lexeme {
    tok: Tok,
    line: usize,
    column: usize,
}

struct Scanner<'a> {
    origin: &'a str,
    chars: Vec<char>,
    pos: usize,
    line: usize,
    column: usize,
}

impl<'a> Scanner<'a> {
    fn new(origin: &'a str, text: &str) -> Self {
        Scanner {
            origin,
            chars: text.chars().collect(),
            pos: 0,
            line: 1,
            column: 1,
        }
    }

    fn error(&self, line: usize, column: usize, message: impl Into<String>) -> EbnfError {
        EbnfError::Syntax {
            origin: self.origin.to_string(),
            line,
            column,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, off: usize) -> Option<char> {
        self.chars.get(self.pos + off).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn scan(mut self) -> Result<Vec<Lexeme>, EbnfError> {
        let mut out = Vec::new();
        loop {
            while self.peek().is_some_and(char::is_whitespace) {
                self.bump();
            }
            let (line, column) = (self.line, self.column);
            let Some(c) = self.peek() else {
                out.push(Lexeme {
                    tok: Tok::End,
                    line,
                    column,
                });
                return Ok(out);
            };
            let tok = if c == '(' && self.peek_at(1) == Some('*') {
                self.bump();
                self.bump();
                let mut body = String::new();
                loop {
                    match self.bump() {
                        Some('*') if self.peek() == Some(')') => {
                            self.bump();
                            break;
                        }
                        Some(ch) => body.push(ch),
                        None => return Err(self.error(line, column, "unterminated comment")),
                    }
                }
                match body.trim() {
                    "LEXICAL" => Tok::Lexical,
                    "SYNTAX" => Tok::Syntax,
                    "SKIP" => Tok::Skip,
                    _ => continue,
                }
            } else if c == '"' || c == '\'' {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        Some(ch) if ch == c => break,
                        Some('\n') | None => {
                            return Err(self.error(line, column, "unterminated terminal string"))
                        }
                        Some(ch) => s.push(ch),
                    }
                }
                if s.is_empty() {
                    return Err(self.error(line, column, "empty terminal string"));
                }
                Tok::Terminal(s)
            } else if c == '?' {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        Some('?') => break,
                        Some(ch) => s.push(ch),
                        None => {
                            return Err(self.error(line, column, "unterminated special sequence"))
                        }
                    }
                }
                Tok::Special(s)
            } else if c.is_ascii_digit() {
                let mut n: u32 = 0;
                while let Some(d) = self.peek().and_then(|c| c.to_digit(10)) {
                    self.bump();
                    n = n
                        .checked_mul(10)
                        .and_then(|n| n.checked_add(d))
                        .ok_or_else(|| self.error(line, column, "repetition factor too large"))?;
                }
                Tok::Integer(n)
            } else if c.is_ascii_alphabetic() || c == '_' {
                let mut s = String::new();
                while let Some(ch) = self
                    .peek()
                    .filter(|ch| ch.is_ascii_alphanumeric() || *ch == '_' || *ch == '-')
                {
                    // A `-` is only part of a name when followed by a name character.
                    if ch == '-'
                        && !self
                            .peek_at(1)
                            .is_some_and(|n| n.is_ascii_alphanumeric() || n == '_')
                    {
                        break;
                    }
                    s.push(ch);
                    self.bump();
                }
                Tok::Ident(s)
            } else if "=,|[]{}();-*".contains(c) {
                self.bump();
                Tok::Sym(c)
            } else {
                return Err(self.error(line, column, format!("unexpected character `{c}`")));
            };
            out.push(Lexeme { tok, line, column });
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Unmarked,
    Lexical,
    Syntax,
}

struct Parser<'a> {
    origin: &'a str,
    toks: Vec<Lexeme>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Lexeme {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Lexeme {
        let l = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        l
    }

    fn error_at(&self, lex: &Lexeme, message: impl Into<String>) -> EbnfError {
        EbnfError::Syntax {
            origin: self.origin.to_string(),
            line: lex.line,
            column: lex.column,
            message: message.into(),
        }
    }

    fn expect_sym(&mut self, c: char) -> Result<(), EbnfError> {
        let lex = self.next();
        if lex.tok == Tok::Sym(c) {
            Ok(())
        } else {
            Err(self.error_at(&lex, format!("expected `{c}`, found {}", describe(&lex.tok))))
        }
    }

    fn at_list_end(&self) -> bool {
        matches!(
            self.peek().tok,
            Tok::Sym('|') | Tok::Sym(';') | Tok::Sym(')') | Tok::Sym(']') | Tok::Sym('}')
        )
    }

    fn definitions_list(&mut self) -> Result<RuleExpr, EbnfError> {
        let first = self.peek().clone();
        let mut alts = vec![self.single_definition()?];
        while self.peek().tok == Tok::Sym('|') {
            self.next();
            alts.push(self.single_definition()?);
        }
        if alts.len() == 1 {
            let only = alts.pop().expect("one alternative");
            if only == RuleExpr::Empty {
                return Err(self.error_at(&first, "empty definition"));
            }
            Ok(only)
        } else {
            Ok(RuleExpr::Alternation(alts))
        }
    }

    fn single_definition(&mut self) -> Result<RuleExpr, EbnfError> {
        if self.at_list_end() {
            return Ok(RuleExpr::Empty);
        }
        let mut items = vec![self.term()?];
        while self.peek().tok == Tok::Sym(',') {
            self.next();
            items.push(self.term()?);
        }
        Ok(if items.len() == 1 {
            items.pop().expect("one item")
        } else {
            RuleExpr::Sequence(items)
        })
    }

    fn term(&mut self) -> Result<RuleExpr, EbnfError> {
        let start = self.peek().clone();
        let base = self.factor()?;
        if self.peek().tok != Tok::Sym('-') {
            return Ok(base);
        }
        self.next();
        let sub_start = self.peek().clone();
        let subtrahend = self.factor()?;
        if !is_char_operand(&base) {
            return Err(self.error_at(
                &start,
                "exception base must be a single-character terminal or a character class",
            ));
        }
        let sub_ok = match &subtrahend {
            RuleExpr::Group(inner) => match inner.as_ref() {
                RuleExpr::Alternation(alts) => alts.iter().all(is_char_operand),
                other => is_char_operand(other),
            },
            other => is_char_operand(other),
        };
        if !sub_ok {
            return Err(self.error_at(
                &sub_start,
                "exception subtrahend must be single-character terminals or character classes",
            ));
        }
        Ok(RuleExpr::Exception {
            base: Box::new(base),
            subtrahend: Box::new(subtrahend),
        })
    }

    fn factor(&mut self) -> Result<RuleExpr, EbnfError> {
        if let Tok::Integer(n) = self.peek().tok {
            let at = self.next();
            self.expect_sym('*')?;
            let is_brace = self.peek().tok == Tok::Sym('{');
            let primary = self.primary()?;
            return match (primary, n) {
                (RuleExpr::Repetition { inner, .. }, n) if is_brace => {
                    Ok(RuleExpr::Repetition { inner, min: n })
                }
                (_, 0) => Err(self.error_at(&at, "repetition factor 0 is only allowed before `{ }`")),
                (p, 1) => Ok(p),
                (p, n) => Ok(RuleExpr::Group(Box::new(RuleExpr::Sequence(vec![
                    p;
                    n as usize
                ])))),
            };
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<RuleExpr, EbnfError> {
        let lex = self.next();
        match lex.tok.clone() {
            Tok::Sym(open @ ('[' | '{' | '(')) => {
                let close = match open {
                    '[' => ']',
                    '{' => '}',
                    _ => ')',
                };
                if self.peek().tok == Tok::Sym(close) {
                    return Err(self.error_at(self.peek(), "empty bracket"));
                }
                let inner = Box::new(self.definitions_list()?);
                self.expect_sym(close)?;
                Ok(match open {
                    '[' => RuleExpr::Optional(inner),
                    '{' => RuleExpr::Repetition { inner, min: 0 },
                    _ => RuleExpr::Group(inner),
                })
            }
            Tok::Ident(name) => Ok(RuleExpr::Nonterminal(name)),
            Tok::Terminal(s) => Ok(RuleExpr::Terminal(s)),
            Tok::Special(s) => CharClass::from_name(&s)
                .map(RuleExpr::Special)
                .ok_or_else(|| self.error_at(&lex, format!("unknown special sequence `?{s}?`"))),
            other => Err(self.error_at(&lex, format!("unexpected {}", describe(&other)))),
        }
    }
}

fn is_char_operand(e: &RuleExpr) -> bool {
    match e {
        RuleExpr::Terminal(s) => s.chars().count() == 1,
        RuleExpr::Special(c) => !c.is_zero_width(),
        _ => false,
    }
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Ident(s) => format!("name `{s}`"),
        Tok::Terminal(s) => format!("terminal {s:?}"),
        Tok::Special(s) => format!("special sequence `?{s}?`"),
        Tok::Integer(n) => format!("integer {n}"),
        Tok::Sym(c) => format!("`{c}`"),
        Tok::Lexical => "(*LEXICAL*) marker".into(),
        Tok::Syntax => "(*SYNTAX*) marker".into(),
        Tok::Skip => "(*SKIP*) marker".into(),
        Tok::End => "end of input".into(),
    }
}

/// Parses a grammar file.
pub fn parse_ebnf(src: &GrammarSource) -> Result<Grammar, EbnfError> {
    let origin = src.origin.as_str();
    if src.text.trim().is_empty() {
        return Err(EbnfError::EmptySource {
            origin: origin.to_string(),
        });
    }
    let toks = Scanner::new(origin, &src.text).scan()?;
    let marked = toks
        .iter()
        .any(|l| matches!(l.tok, Tok::Lexical | Tok::Syntax));
    let mut p = Parser {
        origin,
        toks,
        pos: 0,
    };

    let mut section = Section::Unmarked;
    let mut saw_syntax = false;
    let mut pending_skip: Option<Lexeme> = None;
    let mut rules = IndexMap::new();
    let mut lexical_rules: Vec<LexicalRule> = Vec::new();
    let mut seen = HashSet::new();

    let marker_error = |lex: &Lexeme, message: &str| EbnfError::MissingSectionMarker {
        origin: origin.to_string(),
        line: lex.line,
        column: lex.column,
        message: message.to_string(),
    };

    loop {
        let lex = p.next();
        match lex.tok.clone() {
            Tok::End => {
                if let Some(skip) = pending_skip {
                    return Err(p.error_at(&skip, "(*SKIP*) must precede a lexical rule"));
                }
                if section == Section::Lexical {
                    return Err(marker_error(&lex, "lexical section is not followed by (*SYNTAX*)"));
                }
                break;
            }
            Tok::Lexical => {
                if saw_syntax {
                    return Err(p.error_at(&lex, "(*LEXICAL*) after (*SYNTAX*)"));
                }
                section = Section::Lexical;
            }
            Tok::Syntax => {
                if pending_skip.is_some() {
                    return Err(p.error_at(&lex, "(*SKIP*) must precede a lexical rule"));
                }
                section = Section::Syntax;
                saw_syntax = true;
            }
            Tok::Skip => {
                if section != Section::Lexical {
                    return Err(p.error_at(&lex, "(*SKIP*) outside the lexical section"));
                }
                pending_skip = Some(lex);
            }
            Tok::Ident(name) => {
                if marked && section == Section::Unmarked {
                    return Err(marker_error(
                        &lex,
                        "rule appears before (*LEXICAL*) or (*SYNTAX*)",
                    ));
                }
                p.expect_sym('=')?;
                let expr = p.definitions_list()?;
                p.expect_sym(';')?;
                if !seen.insert(name.clone()) {
                    return Err(EbnfError::DuplicateRule {
                        origin: origin.to_string(),
                        name,
                        line: lex.line,
                        column: lex.column,
                    });
                }
                if section == Section::Lexical {
                    lexical_rules.push(LexicalRule {
                        name,
                        expr,
                        skip: pending_skip.take().is_some(),
                    });
                } else {
                    rules.insert(name, expr);
                }
            }
            other => {
                return Err(p.error_at(
                    &lex,
                    format!("expected a rule name, found {}", describe(&other)),
                ))
            }
        }
    }

    let start_symbol = rules
        .keys()
        .next()
        .cloned()
        .ok_or_else(|| EbnfError::NoStartRule {
            origin: origin.to_string(),
        })?;
    Ok(Grammar {
        rules,
        start_symbol,
        lexical_rules,
    })
}

impl fmt::Display for RuleExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleExpr::Terminal(s) if s.contains('"') => write!(f, "'{s}'"),
            RuleExpr::Terminal(s) => write!(f, "\"{s}\""),
            RuleExpr::Nonterminal(n) => f.write_str(n),
            RuleExpr::Sequence(items) => {
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    match item {
                        RuleExpr::Alternation(_) | RuleExpr::Sequence(_) | RuleExpr::Empty => {
                            write!(f, "( {item} )")?
                        }
                        _ => write!(f, "{item}")?,
                    }
                }
                Ok(())
            }
            RuleExpr::Alternation(alts) => {
                for (i, alt) in alts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" |")?;
                        if *alt != RuleExpr::Empty {
                            f.write_str(" ")?;
                        }
                    }
                    match alt {
                        RuleExpr::Alternation(_) => write!(f, "( {alt} )")?,
                        _ => write!(f, "{alt}")?,
                    }
                }
                Ok(())
            }
            RuleExpr::Optional(inner) => write!(f, "[ {inner} ]"),
            RuleExpr::Repetition { inner, min: 0 } => write!(f, "{{ {inner} }}"),
            RuleExpr::Repetition { inner, min } => write!(f, "{min} * {{ {inner} }}"),
            RuleExpr::Group(inner) => write!(f, "( {inner} )"),
            RuleExpr::Special(c) => write!(f, "? {} ?", c.name()),
            RuleExpr::Exception { base, subtrahend } => write!(f, "{base} - {subtrahend}"),
            RuleExpr::Empty => Ok(()),
        }
    }
}

impl fmt::Display for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.lexical_rules.is_empty() {
            writeln!(f, "(*LEXICAL*)")?;
            for rule in &self.lexical_rules {
                if rule.skip {
                    f.write_str("(*SKIP*) ")?;
                }
                writeln!(f, "{} = {};", rule.name, rule.expr)?;
            }
            writeln!(f, "(*SYNTAX*)")?;
        }
        for (name, expr) in &self.rules {
            writeln!(f, "{name} = {expr};")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum GrammarIssue {
    UndefinedNonterminal { name: String, rule: String },
    UnreachableRule(String),
    LeftRecursion(String),
    /// Character classes or exceptions inside a syntax rule.
    CharLevelInSyntax(String),
    /// A lexical rule referring to a syntax rule.
    LexicalCallsSyntax { rule: String, callee: String },
}

impl GrammarIssue {
    pub fn severity(&self) -> Severity {
        match self {
            GrammarIssue::UnreachableRule(_) => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

impl fmt::Display for GrammarIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GrammarIssue::UndefinedNonterminal { name, rule } => {
                write!(f, "undefined nonterminal `{name}` referenced from `{rule}`")
            }
            GrammarIssue::UnreachableRule(r) => write!(f, "rule `{r}` is unreachable"),
            GrammarIssue::LeftRecursion(r) => write!(f, "rule `{r}` is left-recursive"),
            GrammarIssue::CharLevelInSyntax(r) => write!(
                f,
                "syntax rule `{r}` uses character classes or exceptions"
            ),
            GrammarIssue::LexicalCallsSyntax { rule, callee } => write!(
                f,
                "lexical rule `{rule}` refers to syntax rule `{callee}`"
            ),
        }
    }
}

/// Checks that the automata builder can accept the grammar.
pub fn validate_grammar(g: &Grammar) -> Vec<GrammarIssue> {
    let mut issues = Vec::new();
    let lexical: HashSet<&str> = g.lexical_rules.iter().map(|r| r.name.as_str()).collect();
    let all_rules = g
        .rules
        .iter()
        .map(|(n, e)| (n.as_str(), e, false))
        .chain(g.lexical_rules.iter().map(|r| (r.name.as_str(), &r.expr, true)));

    for (name, expr, is_lexical) in all_rules.clone() {
        let mut reported = BTreeSet::new();
        expr.for_each_reference(&mut |callee| {
            if !g.is_defined(callee) {
                if reported.insert(callee) {
                    issues.push(GrammarIssue::UndefinedNonterminal {
                        name: callee.to_string(),
                        rule: name.to_string(),
                    });
                }
            } else if is_lexical && !lexical.contains(callee) && reported.insert(callee) {
                issues.push(GrammarIssue::LexicalCallsSyntax {
                    rule: name.to_string(),
                    callee: callee.to_string(),
                });
            }
        });
        if !is_lexical && expr.contains_char_level() {
            issues.push(GrammarIssue::CharLevelInSyntax(name.to_string()));
        }
    }

    // Reachability over syntax rules from the start symbol; token rules are roots of their own.
    let mut reachable = HashSet::new();
    let mut work = vec![g.start_symbol.as_str()];
    while let Some(r) = work.pop() {
        if !reachable.insert(r) {
            continue;
        }
        if let Some(expr) = g.rules.get(r) {
            expr.for_each_reference(&mut |c| {
                if g.rules.contains_key(c) {
                    work.push(c)
                }
            });
        }
    }
    for name in g.rules.keys() {
        if !reachable.contains(name.as_str()) {
            issues.push(GrammarIssue::UnreachableRule(name.clone()));
        }
    }

    for name in left_recursive(g) {
        issues.push(GrammarIssue::LeftRecursion(name));
    }
    issues
}

pub fn has_errors(issues: &[GrammarIssue]) -> bool {
    issues.iter().any(|i| i.severity() == Severity::Error)
}

/// Rules that can reach themselves through calls preceded only by nullable material.
fn left_recursive(g: &Grammar) -> Vec<String> {
    let lexical: HashSet<&str> = g.lexical_rules.iter().map(|r| r.name.as_str()).collect();
    let exprs: Vec<(&str, &RuleExpr, bool)> = g
        .rules
        .iter()
        .map(|(n, e)| (n.as_str(), e, false))
        .chain(g.lexical_rules.iter().map(|r| (r.name.as_str(), &r.expr, true)))
        .collect();
    // From a syntax rule, a lexical name is one token: never nullable, never a call edge.
    let is_call = |from_lexical: bool, callee: &str| -> bool {
        g.is_defined(callee) && (from_lexical || !lexical.contains(callee))
    };

    let mut nullable: HashMap<(&str, bool), bool> = HashMap::new();
    loop {
        let mut changed = false;
        for &(name, expr, lex) in &exprs {
            let n = leading(expr, lex, &|c| nullable.get(&(c, lex)).copied().unwrap_or(false), &is_call).1;
            if n && !nullable.get(&(name, lex)).copied().unwrap_or(false) {
                nullable.insert((name, lex), true);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let edges: HashMap<&str, BTreeSet<String>> = exprs
        .iter()
        .map(|&(name, expr, lex)| {
            let calls = leading(
                expr,
                lex,
                &|c| nullable.get(&(c, lex)).copied().unwrap_or(false),
                &is_call,
            )
            .0;
            (name, calls)
        })
        .collect();

    let mut out = Vec::new();
    for &(name, _, _) in &exprs {
        let mut seen = HashSet::new();
        let mut work: Vec<&str> = edges[name].iter().map(String::as_str).collect();
        let mut found = false;
        while let Some(n) = work.pop() {
            if n == name {
                found = true;
                break;
            }
            if seen.insert(n) {
                if let Some(next) = edges.get(n) {
                    work.extend(next.iter().map(String::as_str));
                }
            }
        }
        if found {
            out.push(name.to_string());
        }
    }
    out
}

/// Calls reachable at the start of `expr`, and whether `expr` is nullable.
fn leading(
    expr: &RuleExpr,
    lexical: bool,
    nullable: &dyn Fn(&str) -> bool,
    is_call: &dyn Fn(bool, &str) -> bool,
) -> (BTreeSet<String>, bool) {
    match expr {
        RuleExpr::Terminal(_) | RuleExpr::Exception { .. } => (BTreeSet::new(), false),
        RuleExpr::Special(c) => (BTreeSet::new(), c.is_zero_width()),
        RuleExpr::Empty => (BTreeSet::new(), true),
        RuleExpr::Nonterminal(n) => {
            if is_call(lexical, n) {
                (BTreeSet::from([n.clone()]), nullable(n))
            } else {
                (BTreeSet::new(), false)
            }
        }
        RuleExpr::Sequence(items) => {
            let mut calls = BTreeSet::new();
            for item in items {
                let (c, n) = leading(item, lexical, nullable, is_call);
                calls.extend(c);
                if !n {
                    return (calls, false);
                }
            }
            (calls, true)
        }
        RuleExpr::Alternation(alts) => {
            let mut calls = BTreeSet::new();
            let mut any = false;
            for alt in alts {
                let (c, n) = leading(alt, lexical, nullable, is_call);
                calls.extend(c);
                any |= n;
            }
            (calls, any)
        }
        RuleExpr::Optional(inner) => (leading(inner, lexical, nullable, is_call).0, true),
        RuleExpr::Repetition { inner, min } => {
            let (c, n) = leading(inner, lexical, nullable, is_call);
            (c, *min == 0 || n)
        }
        RuleExpr::Group(inner) => leading(inner, lexical, nullable, is_call),
    }
}
