//! Nondeterministic finite automata with ε-moves, a small regex frontend
//! and the closure operations the regular backend needs.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RegexError {
    #[error("regex syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
}

/// NFA over `char` letters.  Multiple initial states are allowed; the
/// quotient operations rely on that.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nfa {
    state_count: usize,
    initials: BTreeSet<usize>,
    finals: BTreeSet<usize>,
    trans: BTreeMap<(usize, char), BTreeSet<usize>>,
    eps: BTreeMap<usize, BTreeSet<usize>>,
}

impl Nfa {
    pub fn empty_language() -> Nfa {
        Nfa {
            state_count: 1,
            initials: BTreeSet::from([0]),
            finals: BTreeSet::new(),
            trans: BTreeMap::new(),
            eps: BTreeMap::new(),
        }
    }

    /// Automaton for a single word.
    pub fn from_word(w: &str) -> Nfa {
        let chars: Vec<char> = w.chars().collect();
        let mut nfa = Nfa {
            state_count: chars.len() + 1,
            initials: BTreeSet::from([0]),
            finals: BTreeSet::from([chars.len()]),
            trans: BTreeMap::new(),
            eps: BTreeMap::new(),
        };
        for (i, c) in chars.iter().enumerate() {
            nfa.add_trans(i, *c, i + 1);
        }
        nfa
    }

    /// Automaton for Σ* over the given letters.
    pub fn all_words(letters: &[char]) -> Nfa {
        let mut nfa = Nfa {
            state_count: 1,
            initials: BTreeSet::from([0]),
            finals: BTreeSet::from([0]),
            trans: BTreeMap::new(),
            eps: BTreeMap::new(),
        };
        for &c in letters {
            nfa.add_trans(0, c, 0);
        }
        nfa
    }

    /// Automaton for Σ*$: any word over `sigma` followed by the marker.
    pub fn sigma_star_dollar(sigma: &[char], dollar: char) -> Nfa {
        let mut nfa = Nfa {
            state_count: 2,
            initials: BTreeSet::from([0]),
            finals: BTreeSet::from([1]),
            trans: BTreeMap::new(),
            eps: BTreeMap::new(),
        };
        for &c in sigma {
            nfa.add_trans(0, c, 0);
        }
        nfa.add_trans(0, dollar, 1);
        nfa
    }

    pub fn state_count(&self) -> usize {
        self.state_count
    }

    pub fn add_trans(&mut self, from: usize, letter: char, to: usize) {
        self.trans.entry((from, letter)).or_default().insert(to);
    }

    pub fn add_eps(&mut self, from: usize, to: usize) {
        self.eps.entry(from).or_default().insert(to);
    }

    fn fresh_state(&mut self) -> usize {
        self.state_count += 1;
        self.state_count - 1
    }

    /// Letters that actually occur on transitions.
    pub fn used_letters(&self) -> BTreeSet<char> {
        self.trans.keys().map(|(_, c)| *c).collect()
    }

    pub fn initials_set(&self) -> BTreeSet<usize> {
        self.initials.clone()
    }

    pub fn finals_set(&self) -> BTreeSet<usize> {
        self.finals.clone()
    }

    /// All (from, to) moves on a letter.
    pub fn letter_moves(&self, c: char) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for ((from, tc), targets) in &self.trans {
            if *tc == c {
                for &t in targets {
                    out.push((*from, t));
                }
            }
        }
        out
    }

    pub fn closure(&self, set: &BTreeSet<usize>) -> BTreeSet<usize> {
        let mut out = set.clone();
        let mut queue: VecDeque<usize> = set.iter().copied().collect();
        while let Some(s) = queue.pop_front() {
            if let Some(targets) = self.eps.get(&s) {
                for &t in targets {
                    if out.insert(t) {
                        queue.push_back(t);
                    }
                }
            }
        }
        out
    }

    fn step(&self, set: &BTreeSet<usize>, c: char) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for &s in set {
            if let Some(targets) = self.trans.get(&(s, c)) {
                out.extend(targets.iter().copied());
            }
        }
        self.closure(&out)
    }

    pub fn accepts(&self, w: &str) -> bool {
        let mut set = self.closure(&self.initials);
        for c in w.chars() {
            set = self.step(&set, c);
            if set.is_empty() {
                return false;
            }
        }
        set.iter().any(|s| self.finals.contains(s))
    }

    pub fn accepts_empty_word(&self) -> bool {
        self.closure(&self.initials)
            .iter()
            .any(|s| self.finals.contains(s))
    }

    /// Automaton for L ∖ {ε}: a fresh initial state that copies the
    /// outgoing letter moves of the old initial closure but is not final.
    pub fn remove_empty_word(&self) -> Nfa {
        let mut out = self.clone();
        let start = self.closure(&self.initials);
        let fresh = out.fresh_state();
        for ((from, c), targets) in &self.trans {
            if start.contains(from) {
                for &t in targets {
                    out.add_trans(fresh, *c, t);
                }
            }
        }
        out.initials = BTreeSet::from([fresh]);
        out
    }

    /// Automaton for a∖L: shift the initial set across one `a` move.
    pub fn left_quotient_letter(&self, a: char) -> Nfa {
        let mut out = self.clone();
        let start = self.closure(&self.initials);
        out.initials = self.step(&start, a);
        if out.initials.is_empty() {
            return Nfa::empty_language();
        }
        out
    }

    /// Automaton for L/a: keep states from which exactly one `a` reaches
    /// acceptance.
    pub fn right_quotient_letter(&self, a: char) -> Nfa {
        let flat = self.eps_free();
        let mut out = flat.clone();
        out.finals = (0..flat.state_count)
            .filter(|&q| {
                flat.trans
                    .get(&(q, a))
                    .map(|ts| ts.iter().any(|t| flat.finals.contains(t)))
                    .unwrap_or(false)
            })
            .collect();
        out
    }

    /// Automaton for the prefix closure of L: every state that can still
    /// reach acceptance becomes final.
    pub fn prefix_closure(&self) -> Nfa {
        let mut out = self.clone();
        out.finals = self.coaccessible();
        out
    }

    /// Automaton for a·L.
    pub fn prefix_letter(&self, a: char) -> Nfa {
        let mut out = self.clone();
        let fresh = out.fresh_state();
        for &i in &self.initials {
            out.add_trans(fresh, a, i);
        }
        out.initials = BTreeSet::from([fresh]);
        out
    }

    fn accessible(&self) -> BTreeSet<usize> {
        let mut seen = self.initials.clone();
        let mut queue: VecDeque<usize> = seen.iter().copied().collect();
        while let Some(s) = queue.pop_front() {
            let push = |t: usize, seen: &mut BTreeSet<usize>, queue: &mut VecDeque<usize>| {
                if seen.insert(t) {
                    queue.push_back(t);
                }
            };
            for ((from, _), targets) in &self.trans {
                if *from == s {
                    for &t in targets {
                        push(t, &mut seen, &mut queue);
                    }
                }
            }
            if let Some(targets) = self.eps.get(&s) {
                for &t in targets {
                    push(t, &mut seen, &mut queue);
                }
            }
        }
        seen
    }

    fn coaccessible(&self) -> BTreeSet<usize> {
        let mut seen = self.finals.clone();
        loop {
            let mut grew = false;
            for ((from, _), targets) in &self.trans {
                if !seen.contains(from) && targets.iter().any(|t| seen.contains(t)) {
                    seen.insert(*from);
                    grew = true;
                }
            }
            for (from, targets) in &self.eps {
                if !seen.contains(from) && targets.iter().any(|t| seen.contains(t)) {
                    seen.insert(*from);
                    grew = true;
                }
            }
            if !grew {
                return seen;
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        let acc = self.accessible();
        !acc.iter().any(|s| self.finals.contains(s))
    }

    /// ε-free equivalent automaton on the same state set.
    pub fn eps_free(&self) -> Nfa {
        let mut out = Nfa {
            state_count: self.state_count,
            initials: self.closure(&self.initials),
            finals: BTreeSet::new(),
            trans: BTreeMap::new(),
            eps: BTreeMap::new(),
        };
        for q in 0..self.state_count {
            let cl = self.closure(&BTreeSet::from([q]));
            if cl.iter().any(|s| self.finals.contains(s)) {
                out.finals.insert(q);
            }
            for &s in &cl {
                for ((from, c), targets) in &self.trans {
                    if *from == s {
                        for &t in targets {
                            for &t2 in &self.closure(&BTreeSet::from([t])) {
                                out.add_trans(q, *c, t2);
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Product automaton for L₁ ∩ L₂.
    pub fn intersect(&self, other: &Nfa) -> Nfa {
        let a = self.eps_free();
        let b = other.eps_free();
        let pair_id = |x: usize, y: usize| x * b.state_count + y;
        let mut out = Nfa {
            state_count: a.state_count * b.state_count,
            initials: BTreeSet::new(),
            finals: BTreeSet::new(),
            trans: BTreeMap::new(),
            eps: BTreeMap::new(),
        };
        for &x in &a.initials {
            for &y in &b.initials {
                out.initials.insert(pair_id(x, y));
            }
        }
        for &x in &a.finals {
            for &y in &b.finals {
                out.finals.insert(pair_id(x, y));
            }
        }
        for ((from_a, c), targets_a) in &a.trans {
            for ((from_b, c2), targets_b) in &b.trans {
                if c != c2 {
                    continue;
                }
                for &ta in targets_a {
                    for &tb in targets_b {
                        out.add_trans(pair_id(*from_a, *from_b), *c, pair_id(ta, tb));
                    }
                }
            }
        }
        if out.state_count == 0 {
            return Nfa::empty_language();
        }
        out
    }

    /// Accepted words of length at most `max_len`, shortlex order.
    pub fn enumerate(&self, max_len: usize) -> Vec<String> {
        let mut out = Vec::new();
        let start = self.closure(&self.initials);
        let letters: Vec<char> = self.used_letters().into_iter().collect();
        let mut layer: Vec<(String, BTreeSet<usize>)> = vec![(String::new(), start)];
        for len in 0..=max_len {
            for (w, set) in &layer {
                if set.iter().any(|s| self.finals.contains(s)) {
                    out.push(w.clone());
                }
            }
            if len == max_len {
                break;
            }
            let mut next = Vec::new();
            for (w, set) in &layer {
                for &c in &letters {
                    let stepped = self.step(set, c);
                    if !stepped.is_empty() {
                        let mut w2 = w.clone();
                        w2.push(c);
                        next.push((w2, stepped));
                    }
                }
            }
            layer = next;
        }
        out
    }

    /// Exact cardinality classification: `None` for empty or two or more
    /// words, `Some(w)` when the language is the singleton {w}.
    pub fn singleton_word(&self) -> Option<String> {
        let acc = self.accessible();
        let coacc = self.coaccessible();
        let useful: BTreeSet<usize> = acc.intersection(&coacc).copied().collect();
        if !useful.iter().any(|s| self.initials.contains(s)) {
            return None; // empty language
        }
        // A cycle among useful states reachable on an accepting path means
        // infinitely many words.
        if self.has_useful_cycle(&useful) {
            return None;
        }
        // Acyclic among useful states: enumerate accepted words, stopping
        // at the second distinct one.
        let mut words: BTreeSet<String> = BTreeSet::new();
        let start: BTreeSet<usize> = self
            .closure(&self.initials)
            .intersection(&useful)
            .copied()
            .collect();
        let mut stack: Vec<(String, BTreeSet<usize>)> = vec![(String::new(), start)];
        let letters: Vec<char> = self.used_letters().into_iter().collect();
        while let Some((w, set)) = stack.pop() {
            if set.iter().any(|s| self.finals.contains(s)) {
                words.insert(w.clone());
                if words.len() > 1 {
                    return None;
                }
            }
            for &c in &letters {
                let stepped: BTreeSet<usize> = self
                    .step(&set, c)
                    .intersection(&useful)
                    .copied()
                    .collect();
                if !stepped.is_empty() {
                    let mut w2 = w.clone();
                    w2.push(c);
                    stack.push((w2, stepped));
                }
            }
        }
        words.into_iter().next()
    }

    fn has_useful_cycle(&self, useful: &BTreeSet<usize>) -> bool {
        // DFS cycle detection over letter and ε moves restricted to useful
        // states.
        let mut color: BTreeMap<usize, u8> = BTreeMap::new();
        for &s in useful {
            if color.get(&s).copied().unwrap_or(0) == 0
                && self.cycle_dfs(s, useful, &mut color)
            {
                return true;
            }
        }
        false
    }

    fn cycle_dfs(&self, s: usize, useful: &BTreeSet<usize>, color: &mut BTreeMap<usize, u8>) -> bool {
        color.insert(s, 1);
        let mut targets: Vec<usize> = Vec::new();
        for ((from, _), ts) in &self.trans {
            if *from == s {
                targets.extend(ts.iter().copied());
            }
        }
        if let Some(ts) = self.eps.get(&s) {
            targets.extend(ts.iter().copied());
        }
        for t in targets {
            if !useful.contains(&t) {
                continue;
            }
            match color.get(&t).copied().unwrap_or(0) {
                1 => return true,
                0 => {
                    if self.cycle_dfs(t, useful, color) {
                        return true;
                    }
                }
                _ => {}
            }
        }
        color.insert(s, 2);
        false
    }

    /// Complete DFA over the given letter universe by subset construction.
    pub fn to_dfa(&self, letters: &[char]) -> Dfa {
        let mut letters: Vec<char> = letters.to_vec();
        letters.sort_unstable();
        letters.dedup();
        let start = self.closure(&self.initials);
        let mut index: BTreeMap<BTreeSet<usize>, usize> = BTreeMap::new();
        index.insert(start.clone(), 0);
        let mut order: Vec<BTreeSet<usize>> = vec![start];
        let mut table: Vec<Vec<usize>> = Vec::new();
        let mut i = 0;
        while i < order.len() {
            let set = order[i].clone();
            let mut row = Vec::with_capacity(letters.len());
            for &c in &letters {
                let next = self.step(&set, c);
                let id = *index.entry(next.clone()).or_insert_with(|| {
                    order.push(next.clone());
                    order.len() - 1
                });
                row.push(id);
            }
            table.push(row);
            i += 1;
        }
        let finals = order
            .iter()
            .enumerate()
            .filter(|(_, set)| set.iter().any(|s| self.finals.contains(s)))
            .map(|(i, _)| i)
            .collect();
        Dfa {
            letters,
            initial: 0,
            finals,
            table,
        }
    }
}

/// Complete deterministic automaton produced by subset construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfa {
    pub letters: Vec<char>,
    pub initial: usize,
    pub finals: BTreeSet<usize>,
    pub table: Vec<Vec<usize>>,
}

impl Dfa {
    pub fn state_count(&self) -> usize {
        self.table.len()
    }

    pub fn letter_index(&self, c: char) -> Option<usize> {
        self.letters.iter().position(|&l| l == c)
    }

    pub fn step(&self, state: usize, c: char) -> Option<usize> {
        self.letter_index(c).map(|i| self.table[state][i])
    }

    pub fn accepts(&self, w: &str) -> bool {
        let mut s = self.initial;
        for c in w.chars() {
            match self.step(s, c) {
                Some(t) => s = t,
                None => return false,
            }
        }
        self.finals.contains(&s)
    }
}

/// Thompson construction for a small regex dialect: literals, `_` for ε,
/// `|`, `*`, `+`, `?`, parentheses, `\x` escapes.  Whitespace is ignored.
pub fn regex_to_nfa(pattern: &str) -> Result<Nfa, RegexError> {
    let tokens = lex_regex(pattern)?;
    let mut parser = RegexParser { tokens, pos: 0 };
    let frag = parser.alternation()?;
    if parser.pos != parser.tokens.len() {
        return Err(RegexError::Syntax {
            pos: parser.tokens[parser.pos].1,
            msg: "unexpected trailing input".into(),
        });
    }
    Ok(frag.into_nfa())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RegexToken {
    Char(char),
    Epsilon,
    Open,
    Close,
    Alt,
    Star,
    Plus,
    Opt,
}

fn lex_regex(pattern: &str) -> Result<Vec<(RegexToken, usize)>, RegexError> {
    let mut out = Vec::new();
    let mut chars = pattern.char_indices().peekable();
    while let Some((pos, c)) = chars.next() {
        let tok = match c {
            ' ' | '\t' => continue,
            '(' => RegexToken::Open,
            ')' => RegexToken::Close,
            '|' => RegexToken::Alt,
            '*' => RegexToken::Star,
            '+' => RegexToken::Plus,
            '?' => RegexToken::Opt,
            '_' => RegexToken::Epsilon,
            '\\' => match chars.next() {
                Some((_, e)) => RegexToken::Char(e),
                None => {
                    return Err(RegexError::Syntax {
                        pos,
                        msg: "dangling escape".into(),
                    })
                }
            },
            other => RegexToken::Char(other),
        };
        out.push((tok, pos));
    }
    Ok(out)
}

/// NFA fragment under construction: local states with one initial and one
/// final state.
struct Fragment {
    state_count: usize,
    initial: usize,
    fin: usize,
    trans: Vec<(usize, char, usize)>,
    eps: Vec<(usize, usize)>,
}

impl Fragment {
    fn epsilon() -> Fragment {
        Fragment {
            state_count: 1,
            initial: 0,
            fin: 0,
            trans: vec![],
            eps: vec![],
        }
    }

    fn letter(c: char) -> Fragment {
        Fragment {
            state_count: 2,
            initial: 0,
            fin: 1,
            trans: vec![(0, c, 1)],
            eps: vec![],
        }
    }

    fn shift(&mut self, by: usize) {
        self.initial += by;
        self.fin += by;
        for t in &mut self.trans {
            t.0 += by;
            t.2 += by;
        }
        for e in &mut self.eps {
            e.0 += by;
            e.1 += by;
        }
    }

    fn concat(mut self, mut other: Fragment) -> Fragment {
        other.shift(self.state_count);
        self.eps.push((self.fin, other.initial));
        Fragment {
            state_count: self.state_count + other.state_count,
            initial: self.initial,
            fin: other.fin,
            trans: self.trans.into_iter().chain(other.trans).collect(),
            eps: self.eps.into_iter().chain(other.eps).collect(),
        }
    }

    fn alternate(self, mut other: Fragment) -> Fragment {
        other.shift(self.state_count);
        let base = self.state_count + other.state_count;
        let initial = base;
        let fin = base + 1;
        let mut eps = self.eps;
        eps.extend(other.eps);
        eps.push((initial, self.initial));
        eps.push((initial, other.initial));
        eps.push((self.fin, fin));
        eps.push((other.fin, fin));
        Fragment {
            state_count: base + 2,
            initial,
            fin,
            trans: self.trans.into_iter().chain(other.trans).collect(),
            eps,
        }
    }

    fn star(mut self) -> Fragment {
        let initial = self.state_count;
        let fin = self.state_count + 1;
        self.eps.push((initial, self.initial));
        self.eps.push((initial, fin));
        self.eps.push((self.fin, self.initial));
        self.eps.push((self.fin, fin));
        Fragment {
            state_count: self.state_count + 2,
            initial,
            fin,
            trans: self.trans,
            eps: self.eps,
        }
    }

    fn plus(self) -> Fragment {
        // x+ = x x*
        let mut copy = Fragment {
            state_count: self.state_count,
            initial: self.initial,
            fin: self.fin,
            trans: self.trans.clone(),
            eps: self.eps.clone(),
        };
        copy = copy.star();
        self.concat(copy)
    }

    fn opt(mut self) -> Fragment {
        let initial = self.state_count;
        let fin = self.state_count + 1;
        self.eps.push((initial, self.initial));
        self.eps.push((initial, fin));
        self.eps.push((self.fin, fin));
        Fragment {
            state_count: self.state_count + 2,
            initial,
            fin,
            trans: self.trans,
            eps: self.eps,
        }
    }

    fn into_nfa(self) -> Nfa {
        let mut nfa = Nfa {
            state_count: self.state_count,
            initials: BTreeSet::from([self.initial]),
            finals: BTreeSet::from([self.fin]),
            trans: BTreeMap::new(),
            eps: BTreeMap::new(),
        };
        for (from, c, to) in self.trans {
            nfa.add_trans(from, c, to);
        }
        for (from, to) in self.eps {
            nfa.add_eps(from, to);
        }
        nfa
    }
}

struct RegexParser {
    tokens: Vec<(RegexToken, usize)>,
    pos: usize,
}

impl RegexParser {
    fn peek(&self) -> Option<RegexToken> {
        self.tokens.get(self.pos).map(|(t, _)| *t)
    }

    fn alternation(&mut self) -> Result<Fragment, RegexError> {
        let mut frag = self.concatenation()?;
        while self.peek() == Some(RegexToken::Alt) {
            self.pos += 1;
            let rhs = self.concatenation()?;
            frag = frag.alternate(rhs);
        }
        Ok(frag)
    }

    fn concatenation(&mut self) -> Result<Fragment, RegexError> {
        let mut frag: Option<Fragment> = None;
        loop {
            match self.peek() {
                Some(RegexToken::Char(_))
                | Some(RegexToken::Epsilon)
                | Some(RegexToken::Open) => {
                    let atom = self.repetition()?;
                    frag = Some(match frag {
                        None => atom,
                        Some(f) => f.concat(atom),
                    });
                }
                _ => break,
            }
        }
        Ok(frag.unwrap_or_else(Fragment::epsilon))
    }

    fn repetition(&mut self) -> Result<Fragment, RegexError> {
        let mut frag = self.atom()?;
        loop {
            match self.peek() {
                Some(RegexToken::Star) => {
                    self.pos += 1;
                    frag = frag.star();
                }
                Some(RegexToken::Plus) => {
                    self.pos += 1;
                    frag = frag.plus();
                }
                Some(RegexToken::Opt) => {
                    self.pos += 1;
                    frag = frag.opt();
                }
                _ => return Ok(frag),
            }
        }
    }

    fn atom(&mut self) -> Result<Fragment, RegexError> {
        match self.tokens.get(self.pos) {
            Some((RegexToken::Char(c), _)) => {
                self.pos += 1;
                Ok(Fragment::letter(*c))
            }
            Some((RegexToken::Epsilon, _)) => {
                self.pos += 1;
                Ok(Fragment::epsilon())
            }
            Some((RegexToken::Open, pos)) => {
                let pos = *pos;
                self.pos += 1;
                let inner = self.alternation()?;
                if self.peek() != Some(RegexToken::Close) {
                    return Err(RegexError::Syntax {
                        pos,
                        msg: "unclosed group".into(),
                    });
                }
                self.pos += 1;
                Ok(inner)
            }
            Some((_, pos)) => Err(RegexError::Syntax {
                pos: *pos,
                msg: "expected an atom".into(),
            }),
            None => Err(RegexError::Syntax {
                pos: 0,
                msg: "unexpected end of pattern".into(),
            }),
        }
    }
}
