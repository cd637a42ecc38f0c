//! Deterministic pushdown automata with final-state acceptance.
//!
//! The model admits an initial stack word, which keeps the quotient
//! operations of the extraction pipeline inside the model.  Stack words in
//! rules, files and reports are written top-first; the internal `Vec`
//! representation keeps the top at the end.
//!
//! ε-chains are followed with exact divergence detection: during a chain we
//! track the live stair configurations (positions whose stack has stayed a
//! prefix of everything after them).  Two live stairs naming the same state
//! and top symbol force the deterministic chain to repeat forever, so the
//! run is reported divergent without any arbitrary step bound, and every
//! control state the infinite tail would visit has already been seen.

use super::cfg::{Cfg, Sym};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

pub type StateId = usize;
pub type StackSym = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DpdaError {
    #[error("dpda parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("determinism violation: state `{state}` with top `{top}` has both an ε-rule and letter rules")]
    EpsilonClash { state: String, top: String },
    #[error("determinism violation: duplicate rule for ({state}, {letter}, {top})")]
    DuplicateRule {
        state: String,
        letter: String,
        top: String,
    },
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("automaton is not in push/pop normal form")]
    NotNormalized,
    #[error("initial stack must not be empty")]
    EmptyInitialStack,
}

/// Effect of a rule on the stack.  `Push` words and `Replace` words are
/// top-first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StackAction {
    Push(Vec<StackSym>),
    Pop,
    Keep,
    Replace(Vec<StackSym>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dpda {
    state_names: Vec<String>,
    stack_names: Vec<String>,
    input_letters: BTreeSet<char>,
    initial_state: StateId,
    initial_stack: Vec<StackSym>, // top last
    finals: BTreeSet<StateId>,
    rules: BTreeMap<(StateId, Option<char>, StackSym), (StateId, StackAction)>,
}

/// One configuration of a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub state: StateId,
    pub stack: Vec<StackSym>, // top last
    /// Letter consumed by the move that produced this configuration.
    pub consumed_letter: Option<char>,
    /// Number of input letters consumed so far.
    pub input_index: usize,
}

/// A maximal deterministic run on a finite input.
#[derive(Debug, Clone)]
pub struct RunTrace {
    pub steps: Vec<TraceStep>,
    pub consumed: usize,
    pub all_consumed: bool,
    pub accepting: bool,
    pub diverged: bool,
}

impl RunTrace {
    /// Input lengths `k` such that the consumed prefix of length `k` is
    /// accepted (some configuration at input index `k` is final).
    pub fn accepted_prefix_lengths(&self, dpda: &Dpda) -> BTreeSet<usize> {
        self.steps
            .iter()
            .filter(|s| dpda.finals.contains(&s.state))
            .map(|s| s.input_index)
            .collect()
    }
}

enum ChainEnd {
    /// No ε-rule applies; letter rules may.
    Stuck,
    Diverged,
}

impl Dpda {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        state_names: Vec<String>,
        stack_names: Vec<String>,
        initial_state: StateId,
        initial_stack_top_first: Vec<StackSym>,
        finals: BTreeSet<StateId>,
        rules: Vec<(StateId, Option<char>, StackSym, StateId, StackAction)>,
    ) -> Result<Dpda, DpdaError> {
        if initial_stack_top_first.is_empty() {
            return Err(DpdaError::EmptyInitialStack);
        }
        let mut map = BTreeMap::new();
        let mut input_letters = BTreeSet::new();
        for (state, letter, top, target, action) in rules {
            if let Some(c) = letter {
                input_letters.insert(c);
            }
            if map
                .insert((state, letter, top), (target, action))
                .is_some()
            {
                return Err(DpdaError::DuplicateRule {
                    state: state_names[state].clone(),
                    letter: letter.map(|c| c.to_string()).unwrap_or_else(|| "_".into()),
                    top: stack_names[top].clone(),
                });
            }
        }
        // ε-exclusivity per (state, top).
        for (&(state, letter, top), _) in &map {
            if letter.is_none() {
                let clash = map
                    .keys()
                    .any(|&(s, l, t)| s == state && t == top && l.is_some());
                if clash {
                    return Err(DpdaError::EpsilonClash {
                        state: state_names[state].clone(),
                        top: stack_names[top].clone(),
                    });
                }
            }
        }
        let initial_stack = initial_stack_top_first.into_iter().rev().collect();
        Ok(Dpda {
            state_names,
            stack_names,
            input_letters,
            initial_state,
            initial_stack,
            finals,
            rules: map,
        })
    }

    pub fn state_count(&self) -> usize {
        self.state_names.len()
    }

    pub fn stack_sym_count(&self) -> usize {
        self.stack_names.len()
    }

    pub fn state_name(&self, id: StateId) -> &str {
        &self.state_names[id]
    }

    pub fn stack_name(&self, id: StackSym) -> &str {
        &self.stack_names[id]
    }

    pub fn input_letters(&self) -> &BTreeSet<char> {
        &self.input_letters
    }

    pub fn finals(&self) -> &BTreeSet<StateId> {
        &self.finals
    }

    pub fn initial_state(&self) -> StateId {
        self.initial_state
    }

    /// Initial stack, top first.
    pub fn initial_stack_top_first(&self) -> Vec<StackSym> {
        self.initial_stack.iter().rev().copied().collect()
    }

    pub fn rules(
        &self,
    ) -> impl Iterator<Item = (&(StateId, Option<char>, StackSym), &(StateId, StackAction))> {
        self.rules.iter()
    }

    /// The replacement word (top-first) a rule applies to the matched top.
    pub fn replacement_word(top: StackSym, action: &StackAction) -> Vec<StackSym> {
        match action {
            StackAction::Push(w) => {
                let mut out = w.clone();
                out.push(top);
                out
            }
            StackAction::Pop => vec![],
            StackAction::Keep => vec![top],
            StackAction::Replace(w) => w.clone(),
        }
    }

    /// True iff no rule changes the symbol it matched: every action only
    /// erases or pushes.
    pub fn is_normalized(&self) -> bool {
        self.rules.iter().all(|(&(_, _, top), (_, action))| match action {
            StackAction::Push(_) | StackAction::Pop | StackAction::Keep => true,
            StackAction::Replace(w) => w.last() == Some(&top),
        })
    }

    fn apply(&self, stack: &mut Vec<StackSym>, action: &StackAction) {
        match action {
            StackAction::Push(w) => stack.extend(w.iter().rev()),
            StackAction::Pop => {
                stack.pop();
            }
            StackAction::Keep => {}
            StackAction::Replace(w) => {
                stack.pop();
                stack.extend(w.iter().rev());
            }
        }
    }

    fn eps_rule(&self, state: StateId, top: StackSym) -> Option<&(StateId, StackAction)> {
        self.rules.get(&(state, None, top))
    }

    fn letter_rule(
        &self,
        state: StateId,
        letter: char,
        top: StackSym,
    ) -> Option<&(StateId, StackAction)> {
        self.rules.get(&(state, Some(letter), top))
    }

    /// Follow the ε-chain from the last configuration of `steps`, recording
    /// every configuration reached.
    fn eps_chain(&self, steps: &mut Vec<TraceStep>, input_index: usize) -> ChainEnd {
        // Live stairs: (state, top, height).  An entry dies when the stack
        // pops below its height; two live entries with equal state and top
        // certify divergence.
        let mut stairs: Vec<(StateId, StackSym, usize)> = Vec::new();
        let register =
            |state: StateId, stack: &[StackSym], stairs: &mut Vec<(StateId, StackSym, usize)>| {
                let height = stack.len();
                while let Some(&(_, _, h)) = stairs.last() {
                    if h > height {
                        stairs.pop();
                    } else {
                        break;
                    }
                }
                let top = match stack.last() {
                    Some(&t) => t,
                    None => return false, // empty stack: chain is about to end
                };
                if stairs.iter().any(|&(s, t, _)| s == state && t == top) {
                    return true;
                }
                stairs.push((state, top, height));
                false
            };

        let (mut state, mut stack) = {
            let last = steps.last().expect("chain needs a start configuration");
            (last.state, last.stack.clone())
        };
        register(state, &stack, &mut stairs);
        loop {
            let top = match stack.last() {
                Some(&t) => t,
                None => return ChainEnd::Stuck,
            };
            let (target, action) = match self.eps_rule(state, top) {
                Some(rule) => rule.clone(),
                None => return ChainEnd::Stuck,
            };
            self.apply(&mut stack, &action);
            state = target;
            steps.push(TraceStep {
                state,
                stack: stack.clone(),
                consumed_letter: None,
                input_index,
            });
            if register(state, &stack, &mut stairs) {
                return ChainEnd::Diverged;
            }
        }
    }

    /// The unique maximal run consuming a prefix of `w`.
    pub fn run(&self, w: &str) -> RunTrace {
        let letters: Vec<char> = w.chars().collect();
        let mut fetch = |i: usize| letters.get(i).copied();
        self.run_general(&mut fetch, letters.len())
    }

    /// Run against a letter stream, consuming at most `max_letters`.
    pub fn run_stream(
        &self,
        stream: &mut dyn FnMut(usize) -> char,
        max_letters: usize,
    ) -> RunTrace {
        let mut fetch = |i: usize| if i < max_letters { Some(stream(i)) } else { None };
        self.run_general(&mut fetch, max_letters)
    }

    fn run_general(
        &self,
        fetch: &mut dyn FnMut(usize) -> Option<char>,
        target_len: usize,
    ) -> RunTrace {
        let mut steps = vec![TraceStep {
            state: self.initial_state,
            stack: self.initial_stack.clone(),
            consumed_letter: None,
            input_index: 0,
        }];
        let mut consumed = 0;
        let mut diverged = false;
        loop {
            match self.eps_chain(&mut steps, consumed) {
                ChainEnd::Diverged => {
                    diverged = true;
                    break;
                }
                ChainEnd::Stuck => {}
            }
            let letter = match fetch(consumed) {
                Some(c) => c,
                None => break,
            };
            let (state, mut stack) = {
                let last = steps.last().unwrap();
                (last.state, last.stack.clone())
            };
            let top = match stack.last() {
                Some(&t) => t,
                None => break,
            };
            let (target, action) = match self.letter_rule(state, letter, top) {
                Some(rule) => rule.clone(),
                None => break,
            };
            self.apply(&mut stack, &action);
            consumed += 1;
            steps.push(TraceStep {
                state: target,
                stack,
                consumed_letter: Some(letter),
                input_index: consumed,
            });
        }
        let all_consumed = consumed == target_len;
        let accepting = all_consumed
            && steps
                .iter()
                .any(|s| s.input_index == consumed && self.finals.contains(&s.state));
        RunTrace {
            steps,
            consumed,
            all_consumed,
            accepting,
            diverged,
        }
    }

    pub fn accepts(&self, w: &str) -> bool {
        self.run(w).accepting
    }

    pub fn accepts_empty_word(&self) -> bool {
        self.accepts("")
    }

    /// Machine for L ∖ {ε}: a started/unstarted flag in the control state
    /// disables acceptance before the first letter.
    pub fn remove_empty_word(&self) -> Dpda {
        let n = self.state_count();
        let mut state_names: Vec<String> = Vec::with_capacity(2 * n);
        for name in &self.state_names {
            state_names.push(format!("{name}°"));
        }
        state_names.extend(self.state_names.iter().cloned());
        // id q = unstarted, id n + q = started
        let mut rules = Vec::new();
        for (&(state, letter, top), (target, action)) in &self.rules {
            rules.push((n + state, letter, top, n + target, action.clone()));
            match letter {
                None => rules.push((state, None, top, *target, action.clone())),
                Some(c) => rules.push((state, Some(c), top, n + target, action.clone())),
            }
        }
        Dpda::new(
            state_names,
            self.stack_names.clone(),
            self.initial_state,
            self.initial_stack_top_first(),
            self.finals.iter().map(|f| n + f).collect(),
            rules,
        )
        .expect("flag construction preserves determinism")
    }

    /// Machine for a∖L: advance the initial configuration across `a`.
    /// `None` when the ε-chain blocks or diverges before consuming `a`;
    /// the `bool` reports divergence.
    pub fn left_quotient_letter(&self, a: char) -> (Option<Dpda>, bool) {
        let mut steps = vec![TraceStep {
            state: self.initial_state,
            stack: self.initial_stack.clone(),
            consumed_letter: None,
            input_index: 0,
        }];
        match self.eps_chain(&mut steps, 0) {
            ChainEnd::Diverged => return (None, true),
            ChainEnd::Stuck => {}
        }
        let last = steps.last().unwrap();
        let top = match last.stack.last() {
            Some(&t) => t,
            None => return (None, false),
        };
        let (target, action) = match self.letter_rule(last.state, a, top) {
            Some(rule) => rule.clone(),
            None => return (None, false),
        };
        let mut stack = last.stack.clone();
        self.apply(&mut stack, &action);
        if stack.is_empty() {
            // Quotient language is {ε} when the landing state accepts via
            // ε-chain, else ∅; an empty initial stack is not representable,
            // so signal emptiness and let the caller materialise the finite
            // remainder.
            let eps_in = self.finals.contains(&target);
            if !eps_in {
                return (None, false);
            }
            // Single-state machine accepting exactly ε on a dummy stack.
            let dpda = Dpda::new(
                vec!["e".into()],
                vec!["Z".into()],
                0,
                vec![0],
                BTreeSet::from([0]),
                vec![],
            )
            .unwrap();
            return (Some(dpda), false);
        }
        let mut out = self.clone();
        out.initial_state = target;
        out.initial_stack = stack;
        (Some(out), false)
    }

    /// Machine for a·L.
    pub fn prefix_letter(&self, a: char) -> Dpda {
        let mut state_names = self.state_names.clone();
        let fresh = state_names.len();
        state_names.push("in°".into());
        let top = *self.initial_stack.last().expect("nonempty initial stack");
        let mut rules: Vec<(StateId, Option<char>, StackSym, StateId, StackAction)> = self
            .rules
            .iter()
            .map(|(&(s, l, t), (q, act))| (s, l, t, *q, act.clone()))
            .collect();
        rules.push((fresh, Some(a), top, self.initial_state, StackAction::Keep));
        Dpda::new(
            state_names,
            self.stack_names.clone(),
            fresh,
            self.initial_stack_top_first(),
            self.finals.clone(),
            rules,
        )
        .expect("fresh initial state preserves determinism")
    }

    /// Product with a complete DFA; ε-rules advance only the pushdown side.
    pub fn intersect_dfa(&self, dfa: &super::nfa::Dfa) -> Dpda {
        let dn = dfa.state_count();
        let pair = |q: StateId, s: usize| q * dn + s;
        let mut state_names = Vec::with_capacity(self.state_count() * dn);
        for q in 0..self.state_count() {
            for s in 0..dn {
                state_names.push(format!("{}*{s}", self.state_names[q]));
            }
        }
        let mut rules = Vec::new();
        for (&(state, letter, top), (target, action)) in &self.rules {
            match letter {
                None => {
                    for s in 0..dn {
                        rules.push((pair(state, s), None, top, pair(*target, s), action.clone()));
                    }
                }
                Some(c) => {
                    if let Some(idx) = dfa.letter_index(c) {
                        for s in 0..dn {
                            let s2 = dfa.table[s][idx];
                            rules.push((
                                pair(state, s),
                                Some(c),
                                top,
                                pair(*target, s2),
                                action.clone(),
                            ));
                        }
                    }
                }
            }
        }
        let mut finals = BTreeSet::new();
        for &f in &self.finals {
            for &sf in &dfa.finals {
                finals.insert(pair(f, sf));
            }
        }
        Dpda::new(
            state_names,
            self.stack_names.clone(),
            pair(self.initial_state, dfa.initial),
            self.initial_stack_top_first(),
            finals,
            rules,
        )
        .expect("product preserves determinism")
    }

    /// Push/pop normal form: the top of the stack is cached in the control
    /// state, so no rule ever changes the symbol it matched.  Already
    /// normalized machines are returned unchanged.
    pub fn normalize(&self) -> Dpda {
        if self.is_normalized() {
            return self.clone();
        }
        let q_count = self.state_count();
        let g_count = self.stack_sym_count();
        // carried top: 0..g_count = symbol, g_count = empty stack
        let carried = g_count + 1;
        let state_id = |q: StateId, t: usize| q * carried + t;
        let mut state_names = Vec::with_capacity(q_count * carried);
        for q in 0..q_count {
            for t in 0..carried {
                let tn = if t == g_count {
                    "_".to_string()
                } else {
                    self.stack_names[t].clone()
                };
                state_names.push(format!("{}@{tn}", self.state_names[q]));
            }
        }
        let mut stack_names = self.stack_names.clone();
        let bot = stack_names.len();
        stack_names.push("#".into());

        let mut rules = Vec::new();
        for (&(state, letter, top), (target, action)) in &self.rules {
            let alpha = Dpda::replacement_word(top, action); // top-first
            for y in 0..=g_count {
                let phys_top = if y == g_count { bot } else { y };
                if alpha.is_empty() {
                    // pop: the physical top becomes the carried top
                    let lifted = if y == g_count { g_count } else { y };
                    rules.push((
                        state_id(state, top),
                        letter,
                        phys_top,
                        state_id(*target, lifted),
                        StackAction::Pop,
                    ));
                } else {
                    let new_top = alpha[0];
                    let rest: Vec<StackSym> = alpha[1..].to_vec();
                    let act = if rest.is_empty() {
                        StackAction::Keep
                    } else {
                        StackAction::Push(rest)
                    };
                    rules.push((
                        state_id(state, top),
                        letter,
                        phys_top,
                        state_id(*target, new_top),
                        act,
                    ));
                }
            }
        }
        // pop of the marker leaves the machine stuck, matching the empty
        // original stack
        let initial_tf = self.initial_stack_top_first();
        let (init_state, init_stack_tf) = {
            let t = initial_tf[0];
            let mut phys: Vec<StackSym> = initial_tf[1..].to_vec();
            phys.push(bot);
            (state_id(self.initial_state, t), phys)
        };
        let mut finals = BTreeSet::new();
        for &f in &self.finals {
            for t in 0..carried {
                finals.insert(state_id(f, t));
            }
        }
        Dpda::new(
            state_names,
            stack_names,
            init_state,
            init_stack_tf,
            finals,
            rules,
        )
        .expect("normalization preserves determinism")
    }

    /// Triple construction.  The machine is first converted to empty-stack
    /// acceptance with a nondeterministic drain, which is fine for a
    /// grammar.  Requires push/pop normal form.
    pub fn to_cfg(&self) -> Result<Cfg, DpdaError> {
        if !self.is_normalized() {
            return Err(DpdaError::NotNormalized);
        }
        let q_count = self.state_count();
        let drain = q_count; // extra control state
        let states = q_count + 1;
        let g_count = self.stack_sym_count();
        let marker = g_count; // extra bottom symbol
        let syms = g_count + 1;
        // rules as (state, letter?, top, target, replacement top-first)
        let mut rules: Vec<(usize, Option<char>, usize, usize, Vec<usize>)> = self
            .rules
            .iter()
            .map(|(&(s, l, t), (q, act))| (s, l, t, *q, Dpda::replacement_word(t, act)))
            .collect();
        for &f in &self.finals {
            for g in 0..syms {
                rules.push((f, None, g, drain, vec![]));
            }
        }
        for g in 0..syms {
            rules.push((drain, None, g, drain, vec![]));
        }

        // nonterminal [p, g, q] => 1 + (p*syms + g)*states + q
        let triple = |p: usize, g: usize, q: usize| 1 + (p * syms + g) * states + q;
        let nt_count = 1 + states * syms * states;
        let mut nonterminals = vec!["S".to_string()];
        for p in 0..states {
            for g in 0..syms {
                for q in 0..states {
                    nonterminals.push(format!("[{p},{g},{q}]"));
                }
            }
        }
        let _ = nt_count;
        let mut productions: Vec<(usize, Vec<Sym>)> = Vec::new();
        for (p, letter, g, p2, alpha) in &rules {
            let head_letter: Vec<Sym> = letter.map(|c| vec![Sym::T(c)]).unwrap_or_default();
            if alpha.is_empty() {
                productions.push((triple(*p, *g, *p2), head_letter));
            } else {
                // choose intermediate states freely
                let k = alpha.len();
                let mut choices: Vec<Vec<usize>> = vec![vec![]];
                for _ in 0..k {
                    let mut next = Vec::new();
                    for c in &choices {
                        for s in 0..states {
                            let mut c2 = c.clone();
                            c2.push(s);
                            next.push(c2);
                        }
                    }
                    choices = next;
                }
                for c in &choices {
                    // c[i] = state after popping alpha[i]
                    let mut body = head_letter.clone();
                    let mut from = *p2;
                    for (i, &sym) in alpha.iter().enumerate() {
                        body.push(Sym::N(triple(from, sym, c[i])));
                        from = c[i];
                    }
                    productions.push((triple(*p, *g, c[k - 1]), body));
                }
            }
        }
        // start: pop the whole initial stack plus marker, ending anywhere
        let init_tf = {
            let mut v = self.initial_stack_top_first();
            v.push(marker);
            v
        };
        let k = init_tf.len();
        let mut choices: Vec<Vec<usize>> = vec![vec![]];
        for _ in 0..k {
            let mut next = Vec::new();
            for c in &choices {
                for s in 0..states {
                    let mut c2 = c.clone();
                    c2.push(s);
                    next.push(c2);
                }
            }
            choices = next;
        }
        for c in &choices {
            let mut body = Vec::new();
            let mut from = self.initial_state;
            for (i, &sym) in init_tf.iter().enumerate() {
                body.push(Sym::N(triple(from, sym, c[i])));
                from = c[i];
            }
            productions.push((0, body));
        }
        let terminals: BTreeSet<char> = self.input_letters.clone();
        Ok(Cfg::new(nonterminals, terminals, productions, 0))
    }

    /// Parse the sectioned text format.
    pub fn parse(text: &str) -> Result<Dpda, DpdaError> {
        let mut state_names: Vec<String> = Vec::new();
        let mut stack_names: Vec<String> = Vec::new();
        let mut initial: Option<(String, Vec<String>)> = None;
        let mut finals: Vec<String> = Vec::new();
        let mut raw_rules: Vec<(usize, String)> = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut tokens = line.split_whitespace();
            match tokens.next() {
                Some("states") => state_names.extend(tokens.map(|t| t.to_string())),
                Some("stack") => stack_names.extend(tokens.map(|t| t.to_string())),
                Some("initial") => {
                    let state = tokens
                        .next()
                        .ok_or_else(|| DpdaError::Parse {
                            line: line_no,
                            msg: "expected `initial STATE TOP [deeper…]`".into(),
                        })?
                        .to_string();
                    let stack: Vec<String> = tokens.map(|t| t.to_string()).collect();
                    if stack.is_empty() {
                        return Err(DpdaError::Parse {
                            line: line_no,
                            msg: "initial stack must name at least one symbol".into(),
                        });
                    }
                    initial = Some((state, stack));
                }
                Some("final") => finals.extend(tokens.map(|t| t.to_string())),
                Some(_) => raw_rules.push((line_no, line.to_string())),
                None => {}
            }
        }
        let state_id = |name: &str| -> Result<usize, DpdaError> {
            state_names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| DpdaError::UnknownName(name.to_string()))
        };
        let stack_id = |name: &str| -> Result<usize, DpdaError> {
            stack_names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| DpdaError::UnknownName(name.to_string()))
        };
        let (init_state_name, init_stack_names) = initial.ok_or(DpdaError::Parse {
            line: 0,
            msg: "missing `initial` line".into(),
        })?;
        let mut rules = Vec::new();
        for (line_no, line) in &raw_rules {
            // q, a, X -> q', PUSH g… | POP | KEEP
            let (lhs, rhs) = line.split_once("->").ok_or_else(|| DpdaError::Parse {
                line: *line_no,
                msg: "expected `STATE, LETTER, TOP -> STATE, ACTION`".into(),
            })?;
            let lhs_parts: Vec<&str> = lhs.split(',').map(|p| p.trim()).collect();
            if lhs_parts.len() != 3 {
                return Err(DpdaError::Parse {
                    line: *line_no,
                    msg: "rule left-hand side needs `STATE, LETTER, TOP`".into(),
                });
            }
            let state = state_id(lhs_parts[0])?;
            let letter = match lhs_parts[1] {
                "_" => None,
                s => {
                    let mut chars = s.chars();
                    let c = chars.next().ok_or_else(|| DpdaError::Parse {
                        line: *line_no,
                        msg: "empty letter".into(),
                    })?;
                    if chars.next().is_some() {
                        return Err(DpdaError::Parse {
                            line: *line_no,
                            msg: format!("input letters are single characters, got `{s}`"),
                        });
                    }
                    Some(c)
                }
            };
            let top = stack_id(lhs_parts[2])?;
            let rhs_parts: Vec<&str> = rhs.splitn(2, ',').map(|p| p.trim()).collect();
            if rhs_parts.len() != 2 {
                return Err(DpdaError::Parse {
                    line: *line_no,
                    msg: "rule right-hand side needs `STATE, ACTION`".into(),
                });
            }
            let target = state_id(rhs_parts[0])?;
            let mut action_tokens = rhs_parts[1].split_whitespace();
            let action = match action_tokens.next() {
                Some("POP") => StackAction::Pop,
                Some("KEEP") => StackAction::Keep,
                Some("PUSH") => {
                    let syms: Vec<StackSym> = action_tokens
                        .by_ref()
                        .map(|t| stack_id(t))
                        .collect::<Result<_, _>>()?;
                    if syms.is_empty() {
                        return Err(DpdaError::Parse {
                            line: *line_no,
                            msg: "PUSH needs at least one symbol".into(),
                        });
                    }
                    StackAction::Push(syms)
                }
                _ => {
                    return Err(DpdaError::Parse {
                        line: *line_no,
                        msg: "action must be PUSH …, POP or KEEP".into(),
                    })
                }
            };
            rules.push((state, letter, top, target, action));
        }
        let initial_state = state_id(&init_state_name)?;
        let initial_stack = init_stack_names
            .iter()
            .map(|n| stack_id(n))
            .collect::<Result<Vec<_>, _>>()?;
        let finals = finals
            .iter()
            .map(|n| state_id(n))
            .collect::<Result<BTreeSet<_>, _>>()?;
        Dpda::new(
            state_names,
            stack_names,
            initial_state,
            initial_stack,
            finals,
            rules,
        )
    }
}

impl fmt::Display for Dpda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "states {}", self.state_names.join(" "))?;
        writeln!(f, "stack {}", self.stack_names.join(" "))?;
        let init: Vec<&str> = self
            .initial_stack
            .iter()
            .rev()
            .map(|&s| self.stack_names[s].as_str())
            .collect();
        writeln!(
            f,
            "initial {} {}",
            self.state_names[self.initial_state],
            init.join(" ")
        )?;
        let finals: Vec<&str> = self
            .finals
            .iter()
            .map(|&s| self.state_names[s].as_str())
            .collect();
        writeln!(f, "final {}", finals.join(" "))?;
        for (&(state, letter, top), (target, action)) in &self.rules {
            let letter = letter.map(|c| c.to_string()).unwrap_or_else(|| "_".into());
            let action = match action {
                StackAction::Pop => "POP".to_string(),
                StackAction::Keep => "KEEP".to_string(),
                StackAction::Push(w) => {
                    let names: Vec<&str> =
                        w.iter().map(|&s| self.stack_names[s].as_str()).collect();
                    format!("PUSH {}", names.join(" "))
                }
                StackAction::Replace(w) => {
                    let names: Vec<&str> =
                        w.iter().map(|&s| self.stack_names[s].as_str()).collect();
                    format!("REPLACE {}", names.join(" "))
                }
            };
            writeln!(
                f,
                "{}, {}, {} -> {}, {}",
                self.state_names[state],
                letter,
                self.stack_names[top],
                self.state_names[*target],
                action
            )?;
        }
        Ok(())
    }
}

/// Indices whose stack is a prefix of every later stack in the trace.
pub fn stair_positions(trace: &RunTrace) -> Vec<usize> {
    let n = trace.steps.len();
    if n == 0 {
        return vec![];
    }
    let mut out = vec![n - 1];
    // common prefix of all stacks strictly after the current position
    let mut common: Vec<StackSym> = trace.steps[n - 1].stack.clone();
    for p in (0..n - 1).rev() {
        let stack = &trace.steps[p].stack;
        if stack.len() <= common.len() && common[..stack.len()] == stack[..] {
            out.push(p);
        }
        let mut keep = 0;
        while keep < common.len() && keep < stack.len() && common[keep] == stack[keep] {
            keep += 1;
        }
        common.truncate(keep);
    }
    out.reverse();
    out
}
