//! Reference oracles for grammar tests.
//!
//! Nothing here depends on the toolchain crates: random grammars are produced
//! as their own small AST and rendered to EBNF text, and membership is decided
//! by a textbook BNF → CNF conversion followed by CYK.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

use rand::Rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ex {
    T(String),
    N(usize),
    Seq(Vec<Ex>),
    Alt(Vec<Ex>),
    Opt(Box<Ex>),
    Rep(Box<Ex>),
    Grp(Box<Ex>),
    Empty,
}

/// A grammar whose rule `i` is named `r{i}`; `r0` is the start symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandGrammar {
    pub rules: Vec<Ex>,
}

impl RandGrammar {
    pub fn name(i: usize) -> String {
        format!("r{i}")
    }

    pub fn to_ebnf(&self) -> String {
        let mut out = String::new();
        for (i, rule) in self.rules.iter().enumerate() {
            let _ = writeln!(out, "{} = {};", Self::name(i), render(rule));
        }
        out
    }
}

fn render(e: &Ex) -> String {
    match e {
        Ex::T(s) => format!("\"{s}\""),
        Ex::N(i) => RandGrammar::name(*i),
        Ex::Seq(items) => items.iter().map(render).collect::<Vec<_>>().join(", "),
        Ex::Alt(alts) => alts.iter().map(render).collect::<Vec<_>>().join(" | "),
        Ex::Opt(x) => format!("[ {} ]", render(x)),
        Ex::Rep(x) => format!("{{ {} }}", render(x)),
        Ex::Grp(x) => format!("( {} )", render(x)),
        Ex::Empty => String::new(),
    }
}

/// Random grammar with `rules` rules, at most `max_alts` alternatives per rule,
/// terminals drawn from `alphabet`.
pub fn random_grammar(rng: &mut impl Rng, rules: usize, max_alts: usize, alphabet: &[&str]) -> RandGrammar {
    let rules_vec = (0..rules)
        .map(|_| {
            let n_alts = rng.gen_range(1..=max_alts);
            let mut alts: Vec<Ex> = (0..n_alts)
                .map(|_| random_seq(rng, rules, alphabet, 0, n_alts > 1))
                .collect();
            if alts.len() == 1 {
                alts.pop().unwrap()
            } else {
                Ex::Alt(alts)
            }
        })
        .collect();
    RandGrammar { rules: rules_vec }
}

fn random_seq(rng: &mut impl Rng, rules: usize, alphabet: &[&str], depth: usize, may_be_empty: bool) -> Ex {
    let lo = if may_be_empty { 0 } else { 1 };
    let len = rng.gen_range(lo..=3);
    if len == 0 {
        return Ex::Empty;
    }
    let mut items: Vec<Ex> = (0..len).map(|_| random_item(rng, rules, alphabet, depth)).collect();
    if items.len() == 1 {
        items.pop().unwrap()
    } else {
        Ex::Seq(items)
    }
}

fn random_item(rng: &mut impl Rng, rules: usize, alphabet: &[&str], depth: usize) -> Ex {
    let roll = rng.gen_range(0..100);
    if roll < 50 || depth >= 1 && roll < 70 {
        Ex::T(alphabet[rng.gen_range(0..alphabet.len())].to_string())
    } else if roll < 80 {
        Ex::N(rng.gen_range(0..rules))
    } else {
        let inner = if rng.gen_bool(0.3) {
            Ex::Alt(vec![
                random_seq(rng, rules, alphabet, depth + 1, false),
                random_seq(rng, rules, alphabet, depth + 1, false),
            ])
        } else {
            random_seq(rng, rules, alphabet, depth + 1, false)
        };
        match rng.gen_range(0..3) {
            0 => Ex::Opt(Box::new(inner)),
            1 => Ex::Rep(Box::new(inner)),
            _ => Ex::Grp(Box::new(inner)),
        }
    }
}

/// All strings over `alphabet` of length `0..=max_len`, shortest first.
pub fn enumerate_strings(alphabet: &[&str], max_len: usize) -> Vec<Vec<String>> {
    let mut out = vec![Vec::new()];
    let mut layer: Vec<Vec<String>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in &layer {
            for a in alphabet {
                let mut t = s.clone();
                t.push(a.to_string());
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sym {
    T(String),
    N(usize),
}

/// Plain BNF: `prods[i]` lists the alternatives of nonterminal `i`.
#[derive(Debug, Clone)]
pub struct Bnf {
    pub prods: Vec<Vec<Vec<Sym>>>,
    pub start: usize,
}

impl Bnf {
    pub fn from_rand(g: &RandGrammar) -> Self {
        let mut prods: Vec<Vec<Vec<Sym>>> = vec![Vec::new(); g.rules.len()];
        for (i, rule) in g.rules.iter().enumerate() {
            let alts = expand_alts(rule, &mut prods);
            prods[i] = alts;
        }
        Bnf { prods, start: 0 }
    }

    /// Nullable nonterminals by fixpoint over the productions.
    pub fn nullable(&self) -> Vec<bool> {
        let mut nullable = vec![false; self.prods.len()];
        loop {
            let mut changed = false;
            for (i, alts) in self.prods.iter().enumerate() {
                if nullable[i] {
                    continue;
                }
                if alts.iter().any(|rhs| {
                    rhs.iter().all(|s| match s {
                        Sym::N(n) => nullable[*n],
                        Sym::T(_) => false,
                    })
                }) {
                    nullable[i] = true;
                    changed = true;
                }
            }
            if !changed {
                return nullable;
            }
        }
    }
}

fn fresh(prods: &mut Vec<Vec<Vec<Sym>>>) -> usize {
    prods.push(Vec::new());
    prods.len() - 1
}

fn expand_alts(e: &Ex, prods: &mut Vec<Vec<Vec<Sym>>>) -> Vec<Vec<Sym>> {
    match e {
        Ex::Alt(alts) => alts.iter().flat_map(|a| expand_alts(a, prods)).collect(),
        other => vec![expand_seq(other, prods)],
    }
}

fn expand_seq(e: &Ex, prods: &mut Vec<Vec<Vec<Sym>>>) -> Vec<Sym> {
    match e {
        Ex::Seq(items) => items.iter().flat_map(|i| expand_seq(i, prods)).collect(),
        Ex::Empty => Vec::new(),
        Ex::T(s) => vec![Sym::T(s.clone())],
        Ex::N(n) => vec![Sym::N(*n)],
        Ex::Alt(_) | Ex::Grp(_) => {
            let inner = match e {
                Ex::Grp(x) => x.as_ref(),
                _ => e,
            };
            let id = fresh(prods);
            prods[id] = expand_alts(inner, prods);
            vec![Sym::N(id)]
        }
        Ex::Opt(x) => {
            let id = fresh(prods);
            let mut alts = expand_alts(x, prods);
            alts.push(Vec::new());
            prods[id] = alts;
            vec![Sym::N(id)]
        }
        Ex::Rep(x) => {
            let id = fresh(prods);
            let mut alts: Vec<Vec<Sym>> = expand_alts(x, prods)
                .into_iter()
                .map(|mut rhs| {
                    rhs.push(Sym::N(id));
                    rhs
                })
                .collect();
            alts.push(Vec::new());
            prods[id] = alts;
            vec![Sym::N(id)]
        }
    }
}

/// Chomsky normal form grammar with CYK membership.
#[derive(Debug, Clone)]
pub struct Cnf {
    /// `(A, terminal)` productions.
    terminal: Vec<(usize, String)>,
    /// `(A, B, C)` productions.
    binary: Vec<(usize, usize, usize)>,
    start: usize,
    accepts_empty: bool,
}

impl Cnf {
    pub fn from_bnf(bnf: &Bnf) -> Self {
        let nullable = bnf.nullable();
        let mut count = bnf.prods.len();

        // Remove epsilon productions by expanding every subset of nullable occurrences.
        let mut rules: BTreeSet<(usize, Vec<Sym>)> = BTreeSet::new();
        for (lhs, alts) in bnf.prods.iter().enumerate() {
            for rhs in alts {
                let positions: Vec<usize> = rhs
                    .iter()
                    .enumerate()
                    .filter(|(_, s)| matches!(s, Sym::N(n) if nullable[*n]))
                    .map(|(i, _)| i)
                    .collect();
                for mask in 0u32..(1 << positions.len()) {
                    let dropped: HashSet<usize> = positions
                        .iter()
                        .enumerate()
                        .filter(|(bit, _)| mask & (1 << bit) != 0)
                        .map(|(_, p)| *p)
                        .collect();
                    let body: Vec<Sym> = rhs
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| !dropped.contains(i))
                        .map(|(_, s)| s.clone())
                        .collect();
                    if !body.is_empty() {
                        rules.insert((lhs, body));
                    }
                }
            }
        }

        // Unit closure.
        let mut unit: Vec<BTreeSet<usize>> = (0..count).map(|i| BTreeSet::from([i])).collect();
        loop {
            let mut changed = false;
            for (lhs, body) in &rules {
                if let [Sym::N(b)] = body.as_slice() {
                    for a in 0..count {
                        if unit[a].contains(lhs) && unit[a].insert(*b) {
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let mut non_unit: BTreeSet<(usize, Vec<Sym>)> = BTreeSet::new();
        for a in 0..count {
            for (lhs, body) in &rules {
                if unit[a].contains(lhs) && !matches!(body.as_slice(), [Sym::N(_)]) {
                    non_unit.insert((a, body.clone()));
                }
            }
        }

        let mut terminal = Vec::new();
        let mut binary = Vec::new();
        let mut term_nt: HashMap<String, usize> = HashMap::new();
        for (lhs, body) in non_unit {
            if let [Sym::T(t)] = body.as_slice() {
                terminal.push((lhs, t.clone()));
                continue;
            }
            let ids: Vec<usize> = body
                .iter()
                .map(|s| match s {
                    Sym::N(n) => *n,
                    Sym::T(t) => *term_nt.entry(t.clone()).or_insert_with(|| {
                        let id = count;
                        count += 1;
                        terminal.push((id, t.clone()));
                        id
                    }),
                })
                .collect();
            let mut left = lhs;
            for i in 0..ids.len() - 2 {
                let next = count;
                count += 1;
                binary.push((left, ids[i], next));
                left = next;
            }
            binary.push((left, ids[ids.len() - 2], ids[ids.len() - 1]));
        }

        Cnf {
            terminal,
            binary,
            start: bnf.start,
            accepts_empty: nullable[bnf.start],
        }
    }

    pub fn accepts<S: AsRef<str>>(&self, word: &[S]) -> bool {
        let n = word.len();
        if n == 0 {
            return self.accepts_empty;
        }
        // table[len-1][i]: nonterminals deriving word[i..i+len]
        let mut table: Vec<Vec<HashSet<usize>>> = vec![vec![HashSet::new(); n]; n];
        for (i, w) in word.iter().enumerate() {
            for (a, t) in &self.terminal {
                if t == w.as_ref() {
                    table[0][i].insert(*a);
                }
            }
        }
        for len in 2..=n {
            for i in 0..=n - len {
                for split in 1..len {
                    for &(a, b, c) in &self.binary {
                        if table[split - 1][i].contains(&b)
                            && table[len - split - 1][i + split].contains(&c)
                        {
                            table[len - 1][i].insert(a);
                        }
                    }
                }
            }
        }
        table[n - 1][0].contains(&self.start)
    }
}

/// Brute-force search: can rule `target` derive a sentential form that begins
/// with itself, where symbols in front of it derive the empty string?
///
/// Explores leftmost expansions breadth-first; a nullable leftmost symbol may
/// also be erased. Forms are truncated to `window` symbols and deduplicated.
/// Only the leading symbols of a form can ever become its head, so a window at
/// least as long as the longest right-hand side loses nothing.
pub fn left_derives_itself(bnf: &Bnf, target: usize, window: usize) -> bool {
    let nullable = bnf.nullable();
    let mut seen: HashSet<Vec<Sym>> = HashSet::new();
    let mut queue: VecDeque<Vec<Sym>> = VecDeque::new();
    for rhs in &bnf.prods[target] {
        let mut f = rhs.clone();
        f.truncate(window);
        queue.push_back(f);
    }
    while let Some(form) = queue.pop_front() {
        if !seen.insert(form.clone()) {
            continue;
        }
        let Some(Sym::N(head)) = form.first() else {
            continue;
        };
        if *head == target {
            return true;
        }
        if nullable[*head] {
            queue.push_back(form[1..].to_vec());
        }
        for rhs in &bnf.prods[*head] {
            let mut f = rhs.clone();
            f.extend_from_slice(&form[1..]);
            f.truncate(window);
            queue.push_back(f);
        }
    }
    false
}
