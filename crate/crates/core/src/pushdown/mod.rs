//! Pushdown systems, regular configuration sets and pre* saturation,
//! together with run traces, stair analysis and the pumping decomposition.
//!
//! Stack words are written top-first throughout this module.

mod pump;

pub use pump::{pump_decompose, verify_pump, PumpEvidence, PumpOptions, PumpingDecomposition};

use crate::lang::dpda::{Dpda, RunTrace, StackSym, StateId};
use std::collections::{BTreeSet, VecDeque};
use thiserror::Error;

pub use crate::lang::dpda::stair_positions;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PushdownError {
    #[error("pushdown system parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("target automaton has a transition into an initial state")]
    TransitionIntoInitial,
    #[error("pumping search exhausted: {0}")]
    PumpExhausted(String),
}

/// Rule (p, γ) → (q, w) with |w| ≤ 2 after construction.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PdsRule {
    pub from: StateId,
    pub top: StackSym,
    pub to: StateId,
    /// Replacement word, top-first, length at most two.
    pub push: Vec<StackSym>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PushdownSystem {
    state_names: Vec<String>,
    stack_names: Vec<String>,
    rules: Vec<PdsRule>,
}

impl PushdownSystem {
    /// Build a system; rules with replacement words longer than two are
    /// split through fresh intermediate control states.
    pub fn new(
        state_names: Vec<String>,
        stack_names: Vec<String>,
        rules: Vec<(StateId, StackSym, StateId, Vec<StackSym>)>,
    ) -> PushdownSystem {
        let mut names = state_names;
        let mut out = Vec::new();
        for (from, top, to, push) in rules {
            if push.len() <= 2 {
                out.push(PdsRule {
                    from,
                    top,
                    to,
                    push,
                });
                continue;
            }
            // (p,γ) → (q, w₁…w_k): build the word bottom-up through
            // auxiliary states.
            let k = push.len();
            let mut aux: Vec<StateId> = Vec::new();
            for i in 0..k - 2 {
                let id = names.len();
                names.push(format!("aux{}_{}", out.len(), i));
                aux.push(id);
            }
            // first step replaces γ with the bottom two symbols
            out.push(PdsRule {
                from,
                top,
                to: aux[0],
                push: vec![push[k - 2], push[k - 1]],
            });
            for i in 0..k - 2 {
                let target = if i + 1 < aux.len() { aux[i + 1] } else { to };
                out.push(PdsRule {
                    from: aux[i],
                    top: push[k - 2 - i],
                    to: target,
                    push: vec![push[k - 3 - i], push[k - 2 - i]],
                });
            }
        }
        PushdownSystem {
            state_names: names,
            stack_names,
            rules: out,
        }
    }

    /// The pushdown system induced by a DPDA with input letters erased.
    pub fn from_dpda(d: &Dpda) -> PushdownSystem {
        let rules = d
            .rules()
            .map(|(&(state, _letter, top), (target, action))| {
                (state, top, *target, Dpda::replacement_word(top, action))
            })
            .collect();
        PushdownSystem::new(
            (0..d.state_count()).map(|i| d.state_name(i).to_string()).collect(),
            (0..d.stack_sym_count()).map(|i| d.stack_name(i).to_string()).collect(),
            rules,
        )
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

    pub fn rules(&self) -> &[PdsRule] {
        &self.rules
    }

    /// Immediate successors of a configuration (stack top-first).
    pub fn successors(&self, state: StateId, stack: &[StackSym]) -> Vec<(StateId, Vec<StackSym>)> {
        let mut out = Vec::new();
        if let Some(&top) = stack.first() {
            for rule in &self.rules {
                if rule.from == state && rule.top == top {
                    let mut next: Vec<StackSym> = rule.push.clone();
                    next.extend_from_slice(&stack[1..]);
                    out.push((rule.to, next));
                }
            }
        }
        out
    }

    /// Parse the line format `states …` / `stack …` / rules
    /// `p, X -> q, G G'` with `_` for the empty replacement.
    pub fn parse(text: &str) -> Result<PushdownSystem, PushdownError> {
        let mut state_names: Vec<String> = Vec::new();
        let mut stack_names: Vec<String> = Vec::new();
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
                Some(_) => raw_rules.push((line_no, line.to_string())),
                None => {}
            }
        }
        let state_id = |name: &str| {
            state_names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| PushdownError::UnknownName(name.to_string()))
        };
        let stack_id = |name: &str| {
            stack_names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| PushdownError::UnknownName(name.to_string()))
        };
        let mut rules = Vec::new();
        for (line_no, line) in &raw_rules {
            let (lhs, rhs) = line.split_once("->").ok_or_else(|| PushdownError::Parse {
                line: *line_no,
                msg: "expected `STATE, TOP -> STATE, WORD`".into(),
            })?;
            let lhs_parts: Vec<&str> = lhs.split(',').map(|p| p.trim()).collect();
            let rhs_parts: Vec<&str> = rhs.splitn(2, ',').map(|p| p.trim()).collect();
            if lhs_parts.len() != 2 || rhs_parts.len() != 2 {
                return Err(PushdownError::Parse {
                    line: *line_no,
                    msg: "expected `STATE, TOP -> STATE, WORD`".into(),
                });
            }
            let from = state_id(lhs_parts[0])?;
            let top = stack_id(lhs_parts[1])?;
            let to = state_id(rhs_parts[0])?;
            let push = if rhs_parts[1] == "_" {
                vec![]
            } else {
                rhs_parts[1]
                    .split_whitespace()
                    .map(|t| stack_id(t))
                    .collect::<Result<Vec<_>, _>>()?
            };
            rules.push((from, top, to, push));
        }
        Ok(PushdownSystem::new(state_names, stack_names, rules))
    }
}

/// Finite automaton over stack symbols denoting a regular set of
/// configurations: `(p, γ₁…γₖ)` is accepted iff the word γ₁…γₖ (top
/// first) runs from initial state `p` to a final state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PAutomaton {
    /// States `0..control_count` are the pushdown control states.
    pub control_count: usize,
    pub total_states: usize,
    pub finals: BTreeSet<usize>,
    pub trans: BTreeSet<(usize, StackSym, usize)>,
}

impl PAutomaton {
    pub fn new(control_count: usize) -> PAutomaton {
        PAutomaton {
            control_count,
            total_states: control_count,
            finals: BTreeSet::new(),
            trans: BTreeSet::new(),
        }
    }

    pub fn add_state(&mut self) -> usize {
        self.total_states += 1;
        self.total_states - 1
    }

    /// Accepts every configuration `(f, w)` for final control states `f`.
    pub fn all_stacks(control_count: usize, finals: &BTreeSet<StateId>, sym_count: usize) -> PAutomaton {
        let mut a = PAutomaton::new(control_count);
        let sink = a.add_state();
        a.finals.insert(sink);
        for &f in finals {
            a.finals.insert(f);
            for g in 0..sym_count {
                a.trans.insert((f, g, sink));
            }
        }
        for g in 0..sym_count {
            a.trans.insert((sink, g, sink));
        }
        a
    }

    /// Accepts exactly the configurations listed (stacks top-first).
    pub fn from_configs(control_count: usize, configs: &[(StateId, Vec<StackSym>)]) -> PAutomaton {
        let mut a = PAutomaton::new(control_count);
        for (state, stack) in configs {
            if stack.is_empty() {
                a.finals.insert(*state);
                continue;
            }
            let mut from = *state;
            for (i, &g) in stack.iter().enumerate() {
                if i + 1 == stack.len() {
                    let last = a.add_state();
                    a.finals.insert(last);
                    a.trans.insert((from, g, last));
                } else {
                    let next = a.add_state();
                    a.trans.insert((from, g, next));
                    from = next;
                }
            }
        }
        a
    }

    pub fn accepts(&self, state: StateId, stack_top_first: &[StackSym]) -> bool {
        let mut set = BTreeSet::from([state]);
        for &g in stack_top_first {
            let mut next = BTreeSet::new();
            for &(from, sym, to) in &self.trans {
                if sym == g && set.contains(&from) {
                    next.insert(to);
                }
            }
            if next.is_empty() {
                return false;
            }
            set = next;
        }
        set.iter().any(|s| self.finals.contains(s))
    }

    /// All accepted configurations with stack height at most `max_height`.
    pub fn enumerate(&self, max_height: usize) -> BTreeSet<(StateId, Vec<StackSym>)> {
        let syms: BTreeSet<StackSym> = self.trans.iter().map(|&(_, g, _)| g).collect();
        let mut out = BTreeSet::new();
        for p in 0..self.control_count {
            let mut layer: Vec<(Vec<StackSym>, BTreeSet<usize>)> =
                vec![(vec![], BTreeSet::from([p]))];
            for height in 0..=max_height {
                for (stack, set) in &layer {
                    if set.iter().any(|s| self.finals.contains(s)) {
                        out.insert((p, stack.clone()));
                    }
                }
                if height == max_height {
                    break;
                }
                let mut next = Vec::new();
                for (stack, set) in &layer {
                    for &g in &syms {
                        let mut stepped = BTreeSet::new();
                        for &(from, sym, to) in &self.trans {
                            if sym == g && set.contains(&from) {
                                stepped.insert(to);
                            }
                        }
                        if !stepped.is_empty() {
                            let mut s2 = stack.clone();
                            s2.push(g);
                            next.push((s2, stepped));
                        }
                    }
                }
                layer = next;
            }
        }
        out
    }

    fn has_transition_into_initial(&self) -> bool {
        self.trans.iter().any(|&(_, _, to)| to < self.control_count)
    }

    /// Parse an automaton section against a pushdown system: `final NAME…`
    /// lines and `trans FROM SYM TO` lines.  Non-control state names are
    /// declared on first use.
    pub fn parse(text: &str, pds: &PushdownSystem) -> Result<PAutomaton, PushdownError> {
        let mut a = PAutomaton::new(pds.state_count());
        let mut extra: Vec<String> = Vec::new();
        let resolve = |name: &str, a: &mut PAutomaton, extra: &mut Vec<String>| {
            if let Some(id) = (0..pds.state_count()).find(|&i| pds.state_name(i) == name) {
                return id;
            }
            if let Some(pos) = extra.iter().position(|n| n == name) {
                return pds.state_count() + pos;
            }
            extra.push(name.to_string());
            a.add_state()
        };
        let mut pending_finals: Vec<String> = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut tokens = line.split_whitespace();
            match tokens.next() {
                Some("final") => pending_finals.extend(tokens.map(|t| t.to_string())),
                Some("trans") => {
                    let (from, sym, to) = match (tokens.next(), tokens.next(), tokens.next()) {
                        (Some(f), Some(s), Some(t)) => (f, s, t),
                        _ => {
                            return Err(PushdownError::Parse {
                                line: line_no,
                                msg: "expected `trans FROM SYM TO`".into(),
                            })
                        }
                    };
                    let sym_id = (0..pds.stack_sym_count())
                        .find(|&i| pds.stack_name(i) == sym)
                        .ok_or_else(|| PushdownError::UnknownName(sym.to_string()))?;
                    let from = resolve(from, &mut a, &mut extra);
                    let to = resolve(to, &mut a, &mut extra);
                    a.trans.insert((from, sym_id, to));
                }
                Some(other) => {
                    return Err(PushdownError::Parse {
                        line: line_no,
                        msg: format!("unknown directive `{other}`"),
                    })
                }
                None => {}
            }
        }
        for name in pending_finals {
            let id = resolve(&name, &mut a, &mut extra);
            a.finals.insert(id);
        }
        Ok(a)
    }

    /// Render transitions and finals with names resolved against the
    /// system; extra states print as `u0`, `u1`, ….
    pub fn display_with(&self, pds: &PushdownSystem) -> String {
        let name = |id: usize| {
            if id < pds.state_count() {
                pds.state_name(id).to_string()
            } else {
                format!("u{}", id - pds.state_count())
            }
        };
        let mut out = String::new();
        let finals: Vec<String> = self.finals.iter().map(|&f| name(f)).collect();
        out.push_str(&format!("final {}\n", finals.join(" ")));
        for &(from, sym, to) in &self.trans {
            out.push_str(&format!(
                "trans {} {} {}\n",
                name(from),
                pds.stack_name(sym),
                name(to)
            ));
        }
        out
    }
}

/// Worklist discipline for the saturation loop.  The resulting automaton
/// is a fixpoint and does not depend on the choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WorklistOrder {
    Fifo,
    Lifo,
}

/// pre* saturation: returns an automaton accepting exactly the
/// configurations from which some configuration accepted by `target` is
/// reachable.
pub fn prestar(
    pds: &PushdownSystem,
    target: &PAutomaton,
    order: WorklistOrder,
) -> Result<PAutomaton, PushdownError> {
    if target.has_transition_into_initial() {
        return Err(PushdownError::TransitionIntoInitial);
    }
    let mut result = target.clone();
    if result.control_count < pds.state_count() {
        result.control_count = pds.state_count();
        result.total_states = result.total_states.max(pds.state_count());
    }
    let mut rel: BTreeSet<(usize, StackSym, usize)> = BTreeSet::new();
    let mut pending: VecDeque<(usize, StackSym, usize)> = VecDeque::new();
    for &t in &result.trans {
        pending.push_back(t);
    }
    // pop rules contribute start transitions outright
    for rule in pds.rules() {
        if rule.push.is_empty() {
            pending.push_back((rule.from, rule.top, rule.to));
        }
    }
    while let Some(t) = match order {
        WorklistOrder::Fifo => pending.pop_front(),
        WorklistOrder::Lifo => pending.pop_back(),
    } {
        if !rel.insert(t) {
            continue;
        }
        let (q, g, s) = t;
        for rule in pds.rules() {
            match rule.push.len() {
                1 => {
                    if rule.to == q && rule.push[0] == g {
                        pending.push_back((rule.from, rule.top, s));
                    }
                }
                2 => {
                    // t as the first half: need (s, w₂, s₂) already in rel
                    if rule.to == q && rule.push[0] == g {
                        for &(x, g2, s2) in &rel {
                            if x == s && g2 == rule.push[1] {
                                pending.push_back((rule.from, rule.top, s2));
                            }
                        }
                    }
                    // t as the second half: need (rule.to, w₁, q) in rel
                    if rule.push[1] == g {
                        for &(x, g1, y) in &rel {
                            if x == rule.to && g1 == rule.push[0] && y == q {
                                pending.push_back((rule.from, rule.top, s));
                            }
                        }
                    }
                }
                _ => {}
            }
        }
    }
    result.trans = rel;
    Ok(result)
}

/// Reference oracle: backward breadth-first closure over explicit
/// configurations, all stacks bounded by `stack_cap`.
pub fn backward_reach_bounded(
    pds: &PushdownSystem,
    target: &PAutomaton,
    stack_cap: usize,
) -> BTreeSet<(StateId, Vec<StackSym>)> {
    let mut reached: BTreeSet<(StateId, Vec<StackSym>)> = target.enumerate(stack_cap);
    let mut queue: VecDeque<(StateId, Vec<StackSym>)> = reached.iter().cloned().collect();
    while let Some((state, stack)) = queue.pop_front() {
        for rule in pds.rules() {
            if rule.to != state {
                continue;
            }
            if stack.len() < rule.push.len() {
                continue;
            }
            if stack[..rule.push.len()] != rule.push[..] {
                continue;
            }
            let mut pred = vec![rule.top];
            pred.extend_from_slice(&stack[rule.push.len()..]);
            if pred.len() > stack_cap {
                continue;
            }
            let c = (rule.from, pred);
            if reached.insert(c.clone()) {
                queue.push_back(c);
            }
        }
    }
    reached
}

/// Configuration sets reachable by a DPDA that can still reach acceptance:
/// pre* of the final-state configurations over the letter-erased system.
pub fn acceptance_prestar(d: &Dpda) -> PAutomaton {
    let pds = PushdownSystem::from_dpda(d);
    let target = PAutomaton::all_stacks(pds.state_count(), d.finals(), pds.stack_sym_count());
    prestar(&pds, &target, WorklistOrder::Fifo).expect("all-stacks target is normalized")
}

/// Language-equivalent push/pop normal form (see [`Dpda::normalize`]).
pub fn normalize_dpda(d: &Dpda) -> Dpda {
    d.normalize()
}

/// The unique maximal run of `d` consuming a prefix of `w`.
pub fn dpda_run(d: &Dpda, w: &str) -> RunTrace {
    d.run(w)
}

/// Map (state, stack) pairs from a run trace to top-first stacks for
/// acceptance checks against a [`PAutomaton`].
pub fn trace_configs_top_first(trace: &RunTrace) -> Vec<(StateId, Vec<StackSym>)> {
    trace
        .steps
        .iter()
        .map(|s| {
            let mut stack = s.stack.clone();
            stack.reverse();
            (s.state, stack)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simple_pds() -> PushdownSystem {
        // (p, A) → (p, ε)
        PushdownSystem::new(
            vec!["p".into()],
            vec!["A".into()],
            vec![(0, 0, 0, vec![])],
        )
    }

    #[test]
    fn prestar_pops_all() {
        let pds = simple_pds();
        let target = PAutomaton::from_configs(1, &[(0, vec![])]);
        let result = prestar(&pds, &target, WorklistOrder::Fifo).unwrap();
        for n in 0..=6 {
            assert!(result.accepts(0, &vec![0; n]), "A^{n}");
        }
        // agreement with the explicit backward closure
        let reference = backward_reach_bounded(&pds, &target, 6);
        for n in 0..=6 {
            assert!(reference.contains(&(0, vec![0; n])));
        }
    }

    #[test]
    fn prestar_of_empty_rules_is_target() {
        let pds = PushdownSystem::new(vec!["p".into()], vec!["A".into()], vec![]);
        let target = PAutomaton::from_configs(1, &[(0, vec![0])]);
        let result = prestar(&pds, &target, WorklistOrder::Fifo).unwrap();
        assert_eq!(result.enumerate(4), target.enumerate(4));
    }

    #[test]
    fn prestar_single_hop() {
        // rules {(p,A)→(q,ε)}, target {(q,ε)} → accepts (p,A) and (q,ε)
        let pds = PushdownSystem::new(
            vec!["p".into(), "q".into()],
            vec!["A".into()],
            vec![(0, 0, 1, vec![])],
        );
        let target = PAutomaton::from_configs(2, &[(1, vec![])]);
        let result = prestar(&pds, &target, WorklistOrder::Fifo).unwrap();
        let configs = result.enumerate(3);
        assert_eq!(
            configs,
            BTreeSet::from([(0, vec![0]), (1, vec![])])
        );
    }

    #[test]
    fn worklist_orders_agree() {
        let pds = PushdownSystem::new(
            vec!["p".into(), "q".into()],
            vec!["A".into(), "B".into()],
            vec![
                (0, 0, 1, vec![1, 0]),
                (1, 1, 1, vec![]),
                (1, 0, 0, vec![0]),
                (0, 1, 1, vec![1]),
            ],
        );
        let target = PAutomaton::from_configs(2, &[(0, vec![0]), (1, vec![])]);
        let fifo = prestar(&pds, &target, WorklistOrder::Fifo).unwrap();
        let lifo = prestar(&pds, &target, WorklistOrder::Lifo).unwrap();
        assert_eq!(fifo.enumerate(5), lifo.enumerate(5));
    }

    #[test]
    fn long_push_words_are_split() {
        // (p, A) → (p, AAAA) then popped one by one
        let pds = PushdownSystem::new(
            vec!["p".into()],
            vec!["A".into()],
            vec![(0, 0, 0, vec![0, 0, 0, 0]), (0, 0, 0, vec![])],
        );
        let target = PAutomaton::from_configs(1, &[(0, vec![])]);
        let result = prestar(&pds, &target, WorklistOrder::Fifo).unwrap();
        let reference = backward_reach_bounded(&pds, &target, 6);
        for n in 0..=4 {
            let c = (0usize, vec![0usize; n]);
            assert_eq!(result.accepts(0, &c.1), reference.contains(&c), "A^{n}");
        }
    }

    #[test]
    fn acceptance_prestar_for_counter_machine() {
        let d = crate::lang::dpda::Dpda::parse(
            "states q0 qp qr qa\nstack Z A\ninitial q0 Z\nfinal qa\n\
             q0, c, Z -> qp, PUSH A\nqp, c, A -> qp, PUSH A\n\
             qp, r, A -> qr, POP\nqr, r, A -> qr, POP\nqr, _, Z -> qa, KEEP\n",
        )
        .unwrap();
        let pre = acceptance_prestar(&d);
        // From (qp, A Z) acceptance is reachable; from (qa, A Z) it is not
        // because qa has no outgoing rules and is already final.
        assert!(pre.accepts(1, &[1, 0]));
        assert!(pre.accepts(3, &[]));
        assert!(pre.accepts(3, &[1, 0]));
        // state qr with an empty stack cannot reach acceptance
        assert!(!pre.accepts(2, &[]));
    }
}
