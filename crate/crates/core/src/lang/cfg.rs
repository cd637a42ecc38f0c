//! Context-free grammars: CYK membership after binarization, emptiness and
//! cardinality analysis, quotients, prefix closure and the product with a
//! finite automaton.

use super::nfa::Nfa;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CfgError {
    #[error("grammar parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("grammar has no productions")]
    NoProductions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Sym {
    T(char),
    N(usize),
}

/// A context-free grammar.  The Chomsky normal form used by CYK and the
/// cardinality analysis is computed once at construction.
#[derive(Debug, Clone)]
pub struct Cfg {
    nonterminals: Vec<String>,
    terminals: BTreeSet<char>,
    productions: Vec<(usize, Vec<Sym>)>,
    start: usize,
    cnf: Cnf,
}

/// Chomsky normal form of the useful part of a grammar.  `start` may be
/// unproductive, in which case both production lists are empty.
#[derive(Debug, Clone, Default)]
struct Cnf {
    nt_count: usize,
    start: usize,
    nullable_start: bool,
    binary: Vec<(usize, usize, usize)>,
    term: Vec<(usize, char)>,
}

impl PartialEq for Cfg {
    fn eq(&self, other: &Self) -> bool {
        self.nonterminals == other.nonterminals
            && self.terminals == other.terminals
            && self.productions == other.productions
            && self.start == other.start
    }
}
impl Eq for Cfg {}

impl Cfg {
    pub fn new(
        nonterminals: Vec<String>,
        terminals: BTreeSet<char>,
        productions: Vec<(usize, Vec<Sym>)>,
        start: usize,
    ) -> Cfg {
        let cnf = build_cnf(nonterminals.len(), &productions, start);
        Cfg {
            nonterminals,
            terminals,
            productions,
            start,
            cnf,
        }
    }

    /// Grammar for the palindromes over the given letters.
    pub fn palindromes(letters: &[char]) -> Cfg {
        let mut productions = vec![(0, vec![])];
        for &a in letters {
            productions.push((0, vec![Sym::T(a)]));
            productions.push((0, vec![Sym::T(a), Sym::N(0), Sym::T(a)]));
        }
        Cfg::new(
            vec!["P".into()],
            letters.iter().copied().collect(),
            productions,
            0,
        )
    }

    /// Grammar for {w·suffix | w palindrome over `letters`}.
    pub fn palindromes_with_suffix(letters: &[char], suffix: char) -> Cfg {
        let pal = Cfg::palindromes(letters);
        let mut productions = vec![(0, vec![Sym::N(1), Sym::T(suffix)])];
        for (head, body) in &pal.productions {
            let body = body
                .iter()
                .map(|s| match s {
                    Sym::T(c) => Sym::T(*c),
                    Sym::N(n) => Sym::N(n + 1),
                })
                .collect();
            productions.push((head + 1, body));
        }
        let mut terminals = pal.terminals.clone();
        terminals.insert(suffix);
        Cfg::new(vec!["S".into(), "P".into()], terminals, productions, 0)
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn nonterminal_count(&self) -> usize {
        self.nonterminals.len()
    }

    pub fn nonterminal_name(&self, id: usize) -> &str {
        &self.nonterminals[id]
    }

    pub fn terminals(&self) -> &BTreeSet<char> {
        &self.terminals
    }

    pub fn productions(&self) -> &[(usize, Vec<Sym>)] {
        &self.productions
    }

    /// Parse the line-oriented `S -> a S b | _` format.  The head of the
    /// first line is the start symbol; every token that occurs as a head is
    /// a nonterminal, every other token must be a single letter.
    pub fn parse(text: &str) -> Result<Cfg, CfgError> {
        let mut raw: Vec<(String, Vec<Vec<String>>, usize)> = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (head, rest) = line.split_once("->").ok_or_else(|| CfgError::Parse {
                line: line_no,
                msg: "expected `HEAD -> body | body`".into(),
            })?;
            let head = head.trim().to_string();
            if head.is_empty() || head.contains(char::is_whitespace) {
                return Err(CfgError::Parse {
                    line: line_no,
                    msg: "head must be a single identifier".into(),
                });
            }
            let bodies: Vec<Vec<String>> = rest
                .split('|')
                .map(|alt| {
                    alt.split_whitespace()
                        .map(|t| t.to_string())
                        .collect::<Vec<_>>()
                })
                .collect();
            raw.push((head, bodies, line_no));
        }
        if raw.is_empty() {
            return Err(CfgError::NoProductions);
        }
        let mut nonterminals: Vec<String> = Vec::new();
        let mut nt_index: BTreeMap<String, usize> = BTreeMap::new();
        for (head, _, _) in &raw {
            if !nt_index.contains_key(head) {
                nt_index.insert(head.clone(), nonterminals.len());
                nonterminals.push(head.clone());
            }
        }
        let mut terminals = BTreeSet::new();
        let mut productions = Vec::new();
        for (head, bodies, line_no) in &raw {
            let head_id = nt_index[head];
            for body in bodies {
                let mut syms = Vec::new();
                for tok in body {
                    if tok == "_" {
                        continue;
                    }
                    if let Some(&id) = nt_index.get(tok) {
                        syms.push(Sym::N(id));
                    } else {
                        let mut chars = tok.chars();
                        let c = chars.next().unwrap();
                        if chars.next().is_some() {
                            return Err(CfgError::Parse {
                                line: *line_no,
                                msg: format!("unknown symbol `{tok}` (terminals are single letters)"),
                            });
                        }
                        terminals.insert(c);
                        syms.push(Sym::T(c));
                    }
                }
                productions.push((head_id, syms));
            }
        }
        let start = 0;
        Ok(Cfg::new(nonterminals, terminals, productions, start))
    }

    pub fn accepts_empty_word(&self) -> bool {
        self.cnf.nullable_start
    }

    /// CYK membership on the cached normal form.
    pub fn accepts(&self, w: &str) -> bool {
        let chars: Vec<char> = w.chars().collect();
        if chars.is_empty() {
            return self.cnf.nullable_start;
        }
        if self.cnf.binary.is_empty() && self.cnf.term.is_empty() {
            return false;
        }
        let n = chars.len();
        let nt = self.cnf.nt_count;
        // table[i][j] = set of nonterminals deriving chars[i..=i+j]
        let mut table = vec![vec![fixed_bitset(nt); n]; n];
        for (i, &c) in chars.iter().enumerate() {
            for &(a, tc) in &self.cnf.term {
                if tc == c {
                    set_bit(&mut table[i][0], a);
                }
            }
        }
        for span in 2..=n {
            for i in 0..=(n - span) {
                let j = span - 1;
                for split in 1..span {
                    let mut add: Vec<usize> = Vec::new();
                    for &(a, b, c) in &self.cnf.binary {
                        if get_bit(&table[i][split - 1], b)
                            && get_bit(&table[i + split][span - split - 1], c)
                        {
                            add.push(a);
                        }
                    }
                    for a in add {
                        set_bit(&mut table[i][j], a);
                    }
                }
            }
        }
        get_bit(&table[0][n - 1], self.cnf.start)
    }

    /// Emptiness through the productive-nonterminal fixpoint.
    pub fn is_empty(&self) -> bool {
        !productive(self.nonterminals.len(), &self.productions).contains(&self.start)
    }

    /// `None` for zero or at least two words, `Some(w)` for the singleton.
    pub fn singleton_word(&self) -> Option<String> {
        match self.cardinality_up_to_two() {
            Cardinality::One(w) => Some(w),
            _ => None,
        }
    }

    /// Cardinality classification with early cutoff at two words.
    pub fn cardinality_up_to_two(&self) -> Cardinality {
        let cnf = &self.cnf;
        let empty_cnf = cnf.binary.is_empty() && cnf.term.is_empty();
        let base = if empty_cnf {
            Cardinality::Zero
        } else {
            // Cycle in the nonterminal dependency graph of the (useful)
            // normal form means infinitely many words.
            let mut deps: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
            for &(a, b, c) in &cnf.binary {
                deps.entry(a).or_default().insert(b);
                deps.entry(a).or_default().insert(c);
            }
            if has_cycle(cnf.nt_count, &deps) {
                Cardinality::TwoOrMore
            } else {
                words_up_to_two(cnf)
            }
        };
        if cnf.nullable_start {
            match base {
                Cardinality::Zero => Cardinality::One(String::new()),
                Cardinality::One(_) => Cardinality::TwoOrMore,
                Cardinality::TwoOrMore => Cardinality::TwoOrMore,
            }
        } else {
            base
        }
    }

    /// Accepted words of length at most `max_len`, shortlex order, by
    /// filtering through CYK.
    pub fn enumerate(&self, max_len: usize) -> Vec<String> {
        let letters: Vec<char> = self.terminals.iter().copied().collect();
        crate::alphabet::words_up_to(&letters, max_len)
            .into_iter()
            .filter(|w| self.accepts(w))
            .collect()
    }

    /// Grammar for L ∖ {ε}: standard ε-production elimination without
    /// re-adding the empty word.
    pub fn remove_empty_word(&self) -> Cfg {
        let nullable = nullable_set(self.nonterminals.len(), &self.productions);
        let mut productions: BTreeSet<(usize, Vec<Sym>)> = BTreeSet::new();
        for (head, body) in &self.productions {
            for variant in nullable_variants(body, &nullable) {
                if !variant.is_empty() {
                    productions.insert((*head, variant));
                }
            }
        }
        Cfg::new(
            self.nonterminals.clone(),
            self.terminals.clone(),
            productions.into_iter().collect(),
            self.start,
        )
    }

    /// Grammar for a∖L via left derivatives of nonterminals.
    pub fn left_quotient_letter(&self, a: char) -> Cfg {
        self.quotient_letter(a, true)
    }

    /// Grammar for L/a via right derivatives.
    pub fn right_quotient_letter(&self, a: char) -> Cfg {
        self.quotient_letter(a, false)
    }

    fn quotient_letter(&self, a: char, left: bool) -> Cfg {
        let n = self.nonterminals.len();
        let nullable = nullable_set(n, &self.productions);
        // Derivative nonterminal of id i is n + i.
        let mut nonterminals = self.nonterminals.clone();
        for name in &self.nonterminals {
            nonterminals.push(format!("{name}'"));
        }
        let mut productions = self.productions.clone();
        for (head, body) in &self.productions {
            let k = body.len();
            for i in 0..k {
                let before_nullable = if left {
                    body[..i].iter().all(|s| sym_nullable(s, &nullable))
                } else {
                    body[i + 1..].iter().all(|s| sym_nullable(s, &nullable))
                };
                if !before_nullable {
                    continue;
                }
                let rest: Vec<Sym> = if left {
                    body[i + 1..].to_vec()
                } else {
                    body[..i].to_vec()
                };
                match body[i] {
                    Sym::T(c) if c == a => {
                        productions.push((n + head, rest));
                    }
                    Sym::T(_) => {}
                    Sym::N(b) => {
                        let mut new_body = Vec::with_capacity(rest.len() + 1);
                        if left {
                            new_body.push(Sym::N(n + b));
                            new_body.extend(rest);
                        } else {
                            new_body.extend(rest);
                            new_body.push(Sym::N(n + b));
                        }
                        productions.push((n + head, new_body));
                    }
                }
            }
        }
        Cfg::new(nonterminals, self.terminals.clone(), productions, n + self.start)
    }

    /// Grammar for the prefix closure of L (including ε).
    pub fn prefix_closure(&self) -> Cfg {
        let n = self.nonterminals.len();
        let mut nonterminals = self.nonterminals.clone();
        for name in &self.nonterminals {
            nonterminals.push(format!("{name}^"));
        }
        let mut productions = self.productions.clone();
        for i in 0..n {
            productions.push((n + i, vec![]));
        }
        for (head, body) in &self.productions {
            for i in 0..body.len() {
                let mut new_body: Vec<Sym> = body[..i].to_vec();
                match body[i] {
                    Sym::T(c) => new_body.push(Sym::T(c)),
                    Sym::N(b) => new_body.push(Sym::N(n + b)),
                }
                // For a terminal the position itself is the last kept
                // letter; for a nonterminal its prefix variant continues.
                if let Sym::T(_) = body[i] {
                    // Both "stop before" (handled by shorter i) and "stop
                    // after this terminal" are required.
                }
                productions.push((n + head, new_body));
            }
        }
        Cfg::new(nonterminals, self.terminals.clone(), productions, n + self.start)
    }

    /// Grammar for a·L.
    pub fn prefix_letter(&self, a: char) -> Cfg {
        let mut nonterminals = self.nonterminals.clone();
        let fresh = nonterminals.len();
        nonterminals.push("S^".into());
        let mut productions = self.productions.clone();
        productions.push((fresh, vec![Sym::T(a), Sym::N(self.start)]));
        let mut terminals = self.terminals.clone();
        terminals.insert(a);
        Cfg::new(nonterminals, terminals, productions, fresh)
    }

    /// For a transition graph, the pairs (p, q) such that some word of the
    /// grammar labels a path from p to q.  This is the triple-construction
    /// productivity fixpoint without materializing the product grammar.
    pub fn nonempty_state_pairs(
        &self,
        state_count: usize,
        edges: &BTreeSet<(usize, char, usize)>,
    ) -> BTreeSet<(usize, usize)> {
        let cnf = &self.cnf;
        let mut productive: BTreeMap<usize, BTreeSet<(usize, usize)>> = BTreeMap::new();
        for &(a, c) in &cnf.term {
            let entry = productive.entry(a).or_default();
            for &(p, ec, q) in edges {
                if ec == c {
                    entry.insert((p, q));
                }
            }
        }
        loop {
            let mut grew = false;
            for &(a, b, c) in &cnf.binary {
                let left = productive.get(&b).cloned().unwrap_or_default();
                let right = productive.get(&c).cloned().unwrap_or_default();
                let mut additions = Vec::new();
                for &(p, r) in &left {
                    for &(r2, q) in &right {
                        if r == r2 {
                            additions.push((p, q));
                        }
                    }
                }
                let entry = productive.entry(a).or_default();
                for pair in additions {
                    if entry.insert(pair) {
                        grew = true;
                    }
                }
            }
            if !grew {
                break;
            }
        }
        let mut out = productive.remove(&cnf.start).unwrap_or_default();
        if cnf.nullable_start {
            for p in 0..state_count {
                out.insert((p, p));
            }
        }
        out
    }

    /// Product with a finite automaton (triple construction on the cached
    /// normal form).
    pub fn intersect_nfa(&self, nfa: &Nfa) -> Cfg {
        let flat = nfa.eps_free();
        let dfa = flat.to_dfa(&self.terminals.iter().copied().collect::<Vec<_>>());
        let states = dfa.state_count();
        let cnf = &self.cnf;
        let nt = cnf.nt_count;
        // Triple [p, A, q] has id p*nt*states + A*states + q, after the
        // fresh start symbol at id 0.
        let triple = |p: usize, a: usize, q: usize| 1 + p * nt * states + a * states + q;
        let mut nonterminals = vec!["S!".to_string()];
        for p in 0..states {
            for a in 0..nt {
                for q in 0..states {
                    nonterminals.push(format!("[{p},{a},{q}]"));
                }
            }
        }
        let mut productions: Vec<(usize, Vec<Sym>)> = Vec::new();
        for &(a, b, c) in &cnf.binary {
            for p in 0..states {
                for r in 0..states {
                    for q in 0..states {
                        productions.push((
                            triple(p, a, q),
                            vec![Sym::N(triple(p, b, r)), Sym::N(triple(r, c, q))],
                        ));
                    }
                }
            }
        }
        for &(a, c) in &cnf.term {
            if let Some(idx) = dfa.letter_index(c) {
                for p in 0..states {
                    let q = dfa.table[p][idx];
                    productions.push((triple(p, a, q), vec![Sym::T(c)]));
                }
            }
        }
        if !(cnf.binary.is_empty() && cnf.term.is_empty()) {
            for &f in &dfa.finals {
                productions.push((0, vec![Sym::N(triple(dfa.initial, cnf.start, f))]));
            }
        }
        if cnf.nullable_start && dfa.finals.contains(&dfa.initial) {
            productions.push((0, vec![]));
        }
        Cfg::new(nonterminals, self.terminals.clone(), productions, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cardinality {
    Zero,
    One(String),
    TwoOrMore,
}

impl fmt::Display for Cfg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut by_head: BTreeMap<usize, Vec<&Vec<Sym>>> = BTreeMap::new();
        for (head, body) in &self.productions {
            by_head.entry(*head).or_default().push(body);
        }
        for (head, bodies) in by_head {
            write!(f, "{} ->", self.nonterminals[head])?;
            for (i, body) in bodies.iter().enumerate() {
                if i > 0 {
                    write!(f, " |")?;
                }
                if body.is_empty() {
                    write!(f, " _")?;
                } else {
                    for sym in body.iter() {
                        match sym {
                            Sym::T(c) => write!(f, " {c}")?,
                            Sym::N(n) => write!(f, " {}", self.nonterminals[*n])?,
                        }
                    }
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

fn sym_nullable(s: &Sym, nullable: &BTreeSet<usize>) -> bool {
    match s {
        Sym::T(_) => false,
        Sym::N(n) => nullable.contains(n),
    }
}

fn nullable_set(nt_count: usize, productions: &[(usize, Vec<Sym>)]) -> BTreeSet<usize> {
    let _ = nt_count;
    let mut nullable = BTreeSet::new();
    loop {
        let mut grew = false;
        for (head, body) in productions {
            if !nullable.contains(head) && body.iter().all(|s| sym_nullable(s, &nullable)) {
                nullable.insert(*head);
                grew = true;
            }
        }
        if !grew {
            return nullable;
        }
    }
}

fn productive(nt_count: usize, productions: &[(usize, Vec<Sym>)]) -> BTreeSet<usize> {
    let _ = nt_count;
    let mut prod = BTreeSet::new();
    loop {
        let mut grew = false;
        for (head, body) in productions {
            if !prod.contains(head)
                && body.iter().all(|s| match s {
                    Sym::T(_) => true,
                    Sym::N(n) => prod.contains(n),
                })
            {
                prod.insert(*head);
                grew = true;
            }
        }
        if !grew {
            return prod;
        }
    }
}

fn reachable(start: usize, productions: &[(usize, Vec<Sym>)]) -> BTreeSet<usize> {
    let mut reach = BTreeSet::from([start]);
    loop {
        let mut grew = false;
        for (head, body) in productions {
            if reach.contains(head) {
                for s in body {
                    if let Sym::N(n) = s {
                        if reach.insert(*n) {
                            grew = true;
                        }
                    }
                }
            }
        }
        if !grew {
            return reach;
        }
    }
}

/// All body variants obtained by dropping any subset of nullable
/// nonterminal occurrences.
fn nullable_variants(body: &[Sym], nullable: &BTreeSet<usize>) -> Vec<Vec<Sym>> {
    let mut variants: Vec<Vec<Sym>> = vec![Vec::new()];
    for sym in body {
        let drop_ok = sym_nullable(sym, nullable);
        let mut next = Vec::with_capacity(variants.len() * 2);
        for v in &variants {
            let mut keep = v.clone();
            keep.push(*sym);
            next.push(keep);
            if drop_ok {
                next.push(v.clone());
            }
        }
        variants = next;
        if variants.len() > 4096 {
            // Bodies this long do not occur in practice; keep the full
            // variant only to stay total.
            variants.truncate(4096);
        }
    }
    variants
}

/// Build the Chomsky normal form of the useful part of the grammar.
fn build_cnf(nt_count: usize, productions: &[(usize, Vec<Sym>)], start: usize) -> Cnf {
    let nullable_start = nullable_set(nt_count, productions).contains(&start);

    // Keep only useful productions first.
    let prod_set = productive(nt_count, productions);
    let useful_prods: Vec<(usize, Vec<Sym>)> = productions
        .iter()
        .filter(|(_, body)| {
            body.iter().all(|s| match s {
                Sym::T(_) => true,
                Sym::N(n) => prod_set.contains(n),
            })
        })
        .cloned()
        .collect();
    let reach = reachable(start, &useful_prods);
    let mut prods: Vec<(usize, Vec<Sym>)> = useful_prods
        .into_iter()
        .filter(|(head, _)| reach.contains(head) && prod_set.contains(head))
        .collect();

    if !prod_set.contains(&start) {
        return Cnf {
            nt_count: 1,
            start: 0,
            nullable_start,
            binary: vec![],
            term: vec![],
        };
    }

    let mut next_id = nt_count;
    // START
    let s0 = next_id;
    next_id += 1;
    prods.push((s0, vec![Sym::N(start)]));

    // TERM: replace terminals in long bodies.
    let mut term_wrapper: BTreeMap<char, usize> = BTreeMap::new();
    let mut cur: Vec<(usize, Vec<Sym>)> = Vec::new();
    for (head, body) in prods {
        if body.len() >= 2 {
            let body = body
                .into_iter()
                .map(|s| match s {
                    Sym::T(c) => {
                        let id = *term_wrapper.entry(c).or_insert_with(|| {
                            let id = next_id;
                            next_id += 1;
                            id
                        });
                        Sym::N(id)
                    }
                    n => n,
                })
                .collect();
            cur.push((head, body));
        } else {
            cur.push((head, body));
        }
    }
    for (c, id) in &term_wrapper {
        cur.push((*id, vec![Sym::T(*c)]));
    }

    // BIN: split bodies longer than two.
    let mut bin: Vec<(usize, Vec<Sym>)> = Vec::new();
    for (head, body) in cur {
        if body.len() <= 2 {
            bin.push((head, body));
            continue;
        }
        let mut current_head = head;
        for i in 0..body.len() - 2 {
            let fresh = next_id;
            next_id += 1;
            bin.push((current_head, vec![body[i], Sym::N(fresh)]));
            current_head = fresh;
        }
        bin.push((current_head, vec![body[body.len() - 2], body[body.len() - 1]]));
    }

    // DEL: remove ε-productions.
    let nullable = nullable_set(next_id, &bin);
    let mut no_eps: BTreeSet<(usize, Vec<Sym>)> = BTreeSet::new();
    for (head, body) in &bin {
        for variant in nullable_variants(body, &nullable) {
            if !variant.is_empty() {
                no_eps.insert((*head, variant));
            }
        }
    }

    // UNIT: close over unit productions.
    let mut unit_pairs: BTreeSet<(usize, usize)> = (0..next_id).map(|i| (i, i)).collect();
    loop {
        let mut grew = false;
        for (head, body) in &no_eps {
            if let [Sym::N(b)] = body[..] {
                let additions: Vec<(usize, usize)> = unit_pairs
                    .iter()
                    .filter(|(_, y)| y == head)
                    .map(|(x, _)| (*x, b))
                    .collect();
                for pair in additions {
                    if unit_pairs.insert(pair) {
                        grew = true;
                    }
                }
            }
        }
        if !grew {
            break;
        }
    }
    let mut binary: BTreeSet<(usize, usize, usize)> = BTreeSet::new();
    let mut term: BTreeSet<(usize, char)> = BTreeSet::new();
    for (a, b) in &unit_pairs {
        for (head, body) in &no_eps {
            if head != b {
                continue;
            }
            match body[..] {
                [Sym::T(c)] => {
                    term.insert((*a, c));
                }
                [Sym::N(x), Sym::N(y)] => {
                    binary.insert((*a, x, y));
                }
                _ => {}
            }
        }
    }

    // Final trim on the normal form.
    let cnf_prods: Vec<(usize, Vec<Sym>)> = binary
        .iter()
        .map(|&(a, b, c)| (a, vec![Sym::N(b), Sym::N(c)]))
        .chain(term.iter().map(|&(a, c)| (a, vec![Sym::T(c)])))
        .collect();
    let prod2 = productive(next_id, &cnf_prods);
    let useful: Vec<(usize, Vec<Sym>)> = cnf_prods
        .iter()
        .filter(|(head, body)| {
            prod2.contains(head)
                && body.iter().all(|s| match s {
                    Sym::T(_) => true,
                    Sym::N(n) => prod2.contains(n),
                })
        })
        .cloned()
        .collect();
    let reach2 = reachable(s0, &useful);
    let binary = useful
        .iter()
        .filter(|(head, _)| reach2.contains(head))
        .filter_map(|(head, body)| match body[..] {
            [Sym::N(b), Sym::N(c)] => Some((*head, b, c)),
            _ => None,
        })
        .collect();
    let term = useful
        .iter()
        .filter(|(head, _)| reach2.contains(head))
        .filter_map(|(head, body)| match body[..] {
            [Sym::T(c)] => Some((*head, c)),
            _ => None,
        })
        .collect();

    Cnf {
        nt_count: next_id,
        start: s0,
        nullable_start,
        binary,
        term,
    }
}

fn has_cycle(count: usize, deps: &BTreeMap<usize, BTreeSet<usize>>) -> bool {
    let mut color: Vec<u8> = vec![0; count];
    fn dfs(v: usize, deps: &BTreeMap<usize, BTreeSet<usize>>, color: &mut Vec<u8>) -> bool {
        color[v] = 1;
        if let Some(targets) = deps.get(&v) {
            for &t in targets {
                match color[t] {
                    1 => return true,
                    0 => {
                        if dfs(t, deps, color) {
                            return true;
                        }
                    }
                    _ => {}
                }
            }
        }
        color[v] = 2;
        false
    }
    for v in 0..count {
        if color[v] == 0 && dfs(v, deps, &mut color) {
            return true;
        }
    }
    false
}

/// Word sets per nonterminal in an acyclic normal form, capped at two
/// distinct words.
fn words_up_to_two(cnf: &Cnf) -> Cardinality {
    let mut sets: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
    // Fixpoint; terminates because the normal form is acyclic here.
    loop {
        let mut grew = false;
        for &(a, c) in &cnf.term {
            let entry = sets.entry(a).or_default();
            if entry.len() < 2 && entry.insert(c.to_string()) {
                grew = true;
            }
        }
        let additions: Vec<(usize, String)> = cnf
            .binary
            .iter()
            .flat_map(|&(a, b, c)| {
                let left = sets.get(&b).cloned().unwrap_or_default();
                let right = sets.get(&c).cloned().unwrap_or_default();
                let mut words = Vec::new();
                for l in &left {
                    for r in &right {
                        words.push((a, format!("{l}{r}")));
                    }
                }
                words
            })
            .collect();
        for (a, w) in additions {
            let entry = sets.entry(a).or_default();
            if entry.len() < 2 && entry.insert(w) {
                grew = true;
            }
        }
        if !grew {
            break;
        }
    }
    match sets.get(&cnf.start) {
        None => Cardinality::Zero,
        Some(words) if words.is_empty() => Cardinality::Zero,
        Some(words) if words.len() == 1 => Cardinality::One(words.iter().next().unwrap().clone()),
        Some(_) => Cardinality::TwoOrMore,
    }
}

fn fixed_bitset(bits: usize) -> Vec<u64> {
    vec![0u64; (bits + 63) / 64]
}

fn set_bit(set: &mut [u64], i: usize) {
    set[i / 64] |= 1 << (i % 64);
}

fn get_bit(set: &[u64], i: usize) -> bool {
    set[i / 64] & (1 << (i % 64)) != 0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn anbn() -> Cfg {
        Cfg::parse("S -> a S b | _").unwrap()
    }

    #[test]
    fn cyk_on_anbn() {
        let g = anbn();
        assert!(g.accepts(""));
        assert!(g.accepts("ab"));
        assert!(g.accepts("aaabbb"));
        assert!(!g.accepts("aab"));
        assert!(!g.accepts("ba"));
    }

    #[test]
    fn palindrome_grammar() {
        let g = Cfg::palindromes(&['0', '1']);
        assert!(g.accepts(""));
        assert!(g.accepts("0110"));
        assert!(g.accepts("1110111"));
        assert!(!g.accepts("01"));
        assert_eq!(g.enumerate(2), vec!["", "0", "1", "00", "11"]);
    }

    #[test]
    fn emptiness_and_cardinality() {
        let empty = Cfg::parse("S -> a S").unwrap();
        assert!(empty.is_empty());
        assert_eq!(empty.cardinality_up_to_two(), Cardinality::Zero);

        let one = Cfg::parse("S -> a B\nB -> b").unwrap();
        assert_eq!(one.cardinality_up_to_two(), Cardinality::One("ab".into()));

        assert_eq!(anbn().cardinality_up_to_two(), Cardinality::TwoOrMore);

        let eps_only = Cfg::parse("S -> _").unwrap();
        assert_eq!(
            eps_only.cardinality_up_to_two(),
            Cardinality::One(String::new())
        );
    }

    #[test]
    fn remove_empty_word_and_quotients() {
        let g = anbn().remove_empty_word();
        assert!(!g.accepts(""));
        assert!(g.accepts("ab"));
        assert!(g.accepts("aabb"));

        let q = anbn().left_quotient_letter('a');
        // a \ {aⁿbⁿ} = {aⁿbⁿ⁺¹}
        assert!(q.accepts("b"));
        assert!(q.accepts("abb"));
        assert!(!q.accepts("ab"));
        assert!(!q.accepts(""));

        let r = anbn().right_quotient_letter('b');
        assert!(r.accepts("a"));
        assert!(r.accepts("aab" /* aabb / b */));
        assert!(!r.accepts("ab"));
    }

    #[test]
    fn prefix_closure_words() {
        let g = anbn().prefix_closure();
        for w in ["", "a", "aa", "aab", "aabb", "ab"] {
            assert!(g.accepts(w), "prefix {w}");
        }
        assert!(!g.accepts("b"));
        assert!(!g.accepts("aba"));
    }

    #[test]
    fn intersection_with_automaton() {
        let pal = Cfg::palindromes(&['0', '1']);
        let starts_zero = super::super::nfa::regex_to_nfa("0(0|1)*").unwrap();
        let product = pal.intersect_nfa(&starts_zero);
        assert!(product.accepts("010"));
        assert!(product.accepts("0"));
        assert!(!product.accepts("101"));
        assert!(!product.accepts(""));
        assert!(!product.is_empty());

        let none = anbn().intersect_nfa(&super::super::nfa::regex_to_nfa("b a*").unwrap());
        assert!(none.is_empty());
    }

    #[test]
    fn prefix_letter_grammar() {
        let g = anbn().prefix_letter('c');
        assert!(g.accepts("c"));
        assert!(g.accepts("cab"));
        assert!(!g.accepts("ab"));
    }
}
