//! Exact model checking over finite structures through language emptiness,
//! a naive path-enumeration oracle, and three-valued bounded validity by
//! countermodel search over canonical trees.
//!
//! Validity of formulas with pushdown or context-free annotations is
//! undecidable, so every searching judgment returns a three-valued
//! verdict: `Refuted` carries a re-checkable structure, `Valid` carries a
//! bound certificate and is exact only on the finite-language fragment at
//! sufficient bounds, and everything else is `Unknown`.

mod types;

pub use types::finite_fragment_satisfiable;

use crate::dnf::{OracleAnswer, ValidityOracle};
use crate::formula::{finite_annotation_depth, Formula};
use crate::lang::{Backend, LangEnv, LangError, LanguageHandle};
use crate::lts::trees::{
    stream_trees_dedup, EnumLimits, StreamEnd, TreeArena, TreeEnumError, TreeId, Walk,
};
use crate::lts::{Lts, Structure};
use serde::Serialize;
use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum McError {
    #[error(transparent)]
    Lang(#[from] LangError),
    #[error(transparent)]
    TreeEnum(#[from] TreeEnumError),
    #[error("path bound {bound} is insufficient on a cyclic structure")]
    BoundInsufficient { bound: usize },
    #[error("elimination needs at least one EF-term")]
    EmptyEfTerms,
}

/// Search bounds for tree enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Bounds {
    pub depth: usize,
    pub branching: usize,
}

impl Bounds {
    pub fn new(depth: usize, branching: usize) -> Bounds {
        Bounds { depth, branching }
    }

    /// The sufficiency bounds for the finite-language fragment: depth is
    /// the largest annotation-length path sum, branching one more than the
    /// number of EF occurrences.  `None` when some annotation is not a
    /// finite word set.
    pub fn derived(formulas: &[&Formula], env: &LangEnv) -> Result<Option<Bounds>, McError> {
        let mut depth = 0usize;
        for f in formulas {
            match finite_annotation_depth(f, env)? {
                Some(d) => depth = depth.max(d),
                None => return Ok(None),
            }
        }
        let branching = formulas.iter().map(|f| f.ef_count()).sum::<usize>() + 1;
        Ok(Some(Bounds { depth, branching }))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SearchLimits {
    /// Cap on materialized trees and labeled structures per search.
    pub max_structures: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_structures: 200_000,
        }
    }
}

/// Evidence attached to `Valid` and `Unknown` verdicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BoundCertificate {
    pub depth: usize,
    pub branching: usize,
    pub max_leaves: usize,
    pub structures_checked: usize,
    /// Whether the exhausted search is exact for the judged formulas
    /// (finite-language fragment at sufficient bounds).
    pub exact: bool,
}

#[derive(Debug, Clone)]
pub enum Verdict3 {
    Valid(BoundCertificate),
    Refuted(Box<Structure>),
    Unknown(BoundCertificate),
}

impl Verdict3 {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict3::Valid(_))
    }

    pub fn is_refuted(&self) -> bool {
        matches!(self, Verdict3::Refuted(_))
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict3::Unknown(_))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Verdict3::Valid(_) => "VALID",
            Verdict3::Refuted(_) => "REFUTED",
            Verdict3::Unknown(_) => "UNKNOWN",
        }
    }
}

/// Bottom-up satisfaction sets.  EF is decided through emptiness of the
/// annotation language intersected with the path language into the target
/// set; AG through emptiness against the complement target.
pub fn sat_states(lts: &Lts, f: &Formula, env: &LangEnv) -> Result<BTreeSet<usize>, McError> {
    let all: BTreeSet<usize> = (0..lts.state_count()).collect();
    Ok(match f {
        Formula::False => BTreeSet::new(),
        Formula::True => all,
        Formula::Lit { prop, negated } => (0..lts.state_count())
            .filter(|&s| lts.labels[s].contains(prop) != *negated)
            .collect(),
        Formula::Or(a, b) => {
            let sa = sat_states(lts, a, env)?;
            let sb = sat_states(lts, b, env)?;
            sa.union(&sb).copied().collect()
        }
        Formula::And(a, b) => {
            let sa = sat_states(lts, a, env)?;
            let sb = sat_states(lts, b, env)?;
            sa.intersection(&sb).copied().collect()
        }
        Formula::Ef(lang, body) => {
            let targets = sat_states(lts, body, env)?;
            ef_states(lts, env.get(lang)?, &targets)
        }
        Formula::Ag(lang, body) => {
            let sat_body = sat_states(lts, body, env)?;
            let complement: BTreeSet<usize> =
                all.difference(&sat_body).copied().collect();
            let bad = ef_states(lts, env.get(lang)?, &complement);
            all.difference(&bad).copied().collect()
        }
    })
}

/// States with an L-labeled path into `targets`.
fn ef_states(lts: &Lts, handle: &LanguageHandle, targets: &BTreeSet<usize>) -> BTreeSet<usize> {
    if targets.is_empty() {
        return BTreeSet::new();
    }
    match handle.backend() {
        Backend::Finite(words) => {
            let mut out = BTreeSet::new();
            for w in words {
                out.extend(pre_word(lts, w, targets));
            }
            out
        }
        Backend::Regular(nfa) => {
            let flat = nfa.eps_free();
            // Backward closure over the product graph.
            let mut reach: BTreeSet<(usize, usize)> = BTreeSet::new();
            let finals = flat.finals_set();
            for &t in targets {
                for &qf in &finals {
                    reach.insert((t, qf));
                }
            }
            loop {
                let mut grew = false;
                for &(s, c, s2) in &lts.edges {
                    for (q, q2) in flat.letter_moves(c) {
                        if reach.contains(&(s2, q2)) && reach.insert((s, q)) {
                            grew = true;
                        }
                    }
                }
                if !grew {
                    break;
                }
            }
            let initials = flat.initials_set();
            (0..lts.state_count())
                .filter(|&s| initials.iter().any(|&q| reach.contains(&(s, q))))
                .collect()
        }
        _ => {
            // grammar route: one triple-construction fixpoint for all pairs
            let g = handle.to_cfg_route();
            let pairs = g.nonempty_state_pairs(lts.state_count(), &lts.edges);
            (0..lts.state_count())
                .filter(|&s| targets.iter().any(|&t| pairs.contains(&(s, t))))
                .collect()
        }
    }
}

/// States from which reading exactly `w` can end in `targets`.
fn pre_word(lts: &Lts, w: &str, targets: &BTreeSet<usize>) -> BTreeSet<usize> {
    let mut set = targets.clone();
    for c in w.chars().rev() {
        let mut prev = BTreeSet::new();
        for &(s, ec, t) in &lts.edges {
            if ec == c && set.contains(&t) {
                prev.insert(s);
            }
        }
        set = prev;
        if set.is_empty() {
            break;
        }
    }
    set
}

/// Root membership in [`sat_states`].
pub fn check(m: &Structure, f: &Formula, env: &LangEnv) -> Result<bool, McError> {
    Ok(sat_states(&m.lts, f, env)?.contains(&m.root))
}

/// Independent oracle: semantics by explicit path enumeration up to
/// `path_len_bound`.  Exact on acyclic structures once the bound covers the
/// longest path; on cyclic structures inconclusive searches report a bound
/// error instead of guessing.
pub fn naive_check(
    m: &Structure,
    f: &Formula,
    env: &LangEnv,
    path_len_bound: usize,
) -> Result<bool, McError> {
    let complete_everywhere = m
        .lts
        .longest_path()
        .map(|lp| lp <= path_len_bound)
        .unwrap_or(false);
    naive_eval(m, m.root, f, env, path_len_bound, complete_everywhere)
}

fn naive_eval(
    m: &Structure,
    s: usize,
    f: &Formula,
    env: &LangEnv,
    bound: usize,
    complete: bool,
) -> Result<bool, McError> {
    Ok(match f {
        Formula::False => false,
        Formula::True => true,
        Formula::Lit { prop, negated } => m.lts.labels[s].contains(prop) != *negated,
        Formula::Or(a, b) => {
            naive_eval(m, s, a, env, bound, complete)?
                || naive_eval(m, s, b, env, bound, complete)?
        }
        Formula::And(a, b) => {
            naive_eval(m, s, a, env, bound, complete)?
                && naive_eval(m, s, b, env, bound, complete)?
        }
        Formula::Ef(lang, body) => {
            let handle = env.get(lang)?;
            let paths = enumerate_paths(&m.lts, s, bound);
            let mut deferred: Option<McError> = None;
            for (w, t) in &paths {
                if handle.member(w) {
                    match naive_eval(m, *t, body, env, bound, complete) {
                        Ok(true) => return Ok(true),
                        Ok(false) => {}
                        Err(e) => deferred = Some(e),
                    }
                }
            }
            if let Some(e) = deferred {
                return Err(e);
            }
            if complete || finite_words_covered(handle, bound) {
                false
            } else {
                return Err(McError::BoundInsufficient { bound });
            }
        }
        Formula::Ag(lang, body) => {
            let handle = env.get(lang)?;
            let paths = enumerate_paths(&m.lts, s, bound);
            let mut deferred: Option<McError> = None;
            for (w, t) in &paths {
                if handle.member(w) {
                    match naive_eval(m, *t, body, env, bound, complete) {
                        Ok(false) => return Ok(false),
                        Ok(true) => {}
                        Err(e) => deferred = Some(e),
                    }
                }
            }
            if let Some(e) = deferred {
                return Err(e);
            }
            if complete || finite_words_covered(handle, bound) {
                true
            } else {
                return Err(McError::BoundInsufficient { bound });
            }
        }
    })
}

fn finite_words_covered(handle: &LanguageHandle, bound: usize) -> bool {
    match handle.backend() {
        Backend::Finite(words) => words
            .iter()
            .map(|w| w.chars().count())
            .max()
            .unwrap_or(0)
            .le(&bound),
        _ => false,
    }
}

/// All (word, endpoint) pairs for paths from `s` of length ≤ `bound`,
/// including the empty path.
fn enumerate_paths(lts: &Lts, s: usize, bound: usize) -> Vec<(String, usize)> {
    let mut out = vec![(String::new(), s)];
    let mut frontier = vec![(String::new(), s)];
    for _ in 0..bound {
        let mut next = Vec::new();
        for (w, t) in &frontier {
            for (c, u) in lts.successors(*t) {
                let mut w2 = w.clone();
                w2.push(c);
                next.push((w2, u));
            }
        }
        out.extend(next.iter().cloned());
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    out
}

// ---------------------------------------------------------------------------
// countermodel search over canonical trees

#[derive(Debug, Clone, Copy)]
enum FNode {
    False,
    True,
    Lit { negated: bool },
    Or(usize, usize),
    And(usize, usize),
    Ef(usize, usize),
    Ag(usize, usize),
}

/// Interned-DAG evaluator for proposition-free formulas on canonical
/// trees.  Satisfaction is memoized per (subtree, subformula) pair and
/// membership per (language, word) pair.
struct TreeEval<'e> {
    env: &'e LangEnv,
    nodes: Vec<FNode>,
    node_index: HashMap<Formula, usize>,
    lang_names: Vec<String>,
    lang_index: HashMap<String, usize>,
    memo: HashMap<(TreeId, usize), bool>,
    member_memo: HashMap<(usize, String), bool>,
    descendants: HashMap<TreeId, Rc<Vec<(String, TreeId)>>>,
}

impl<'e> TreeEval<'e> {
    fn new(env: &'e LangEnv) -> TreeEval<'e> {
        TreeEval {
            env,
            nodes: Vec::new(),
            node_index: HashMap::new(),
            lang_names: Vec::new(),
            lang_index: HashMap::new(),
            memo: HashMap::new(),
            member_memo: HashMap::new(),
            descendants: HashMap::new(),
        }
    }

    fn add_lang(&mut self, name: &str) -> usize {
        if let Some(&id) = self.lang_index.get(name) {
            return id;
        }
        let id = self.lang_names.len();
        self.lang_names.push(name.to_string());
        self.lang_index.insert(name.to_string(), id);
        id
    }

    fn add_formula(&mut self, f: &Formula) -> usize {
        if let Some(&id) = self.node_index.get(f) {
            return id;
        }
        let node = match f {
            Formula::False => FNode::False,
            Formula::True => FNode::True,
            Formula::Lit { negated, .. } => FNode::Lit { negated: *negated },
            Formula::Or(a, b) => {
                let x = self.add_formula(a);
                let y = self.add_formula(b);
                FNode::Or(x, y)
            }
            Formula::And(a, b) => {
                let x = self.add_formula(a);
                let y = self.add_formula(b);
                FNode::And(x, y)
            }
            Formula::Ef(l, body) => {
                let lang = self.add_lang(l);
                let b = self.add_formula(body);
                FNode::Ef(lang, b)
            }
            Formula::Ag(l, body) => {
                let lang = self.add_lang(l);
                let b = self.add_formula(body);
                FNode::Ag(lang, b)
            }
        };
        let id = self.nodes.len();
        self.nodes.push(node);
        self.node_index.insert(f.clone(), id);
        id
    }

    fn member(&mut self, lang: usize, w: &str) -> Result<bool, McError> {
        if let Some(&v) = self.member_memo.get(&(lang, w.to_string())) {
            return Ok(v);
        }
        let handle = self.env.get(&self.lang_names[lang])?;
        let v = handle.member(w);
        self.member_memo.insert((lang, w.to_string()), v);
        Ok(v)
    }

    /// (word, subtree) pairs for every descendant, including (ε, self).
    fn descend(&mut self, arena: &TreeArena, t: TreeId) -> Rc<Vec<(String, TreeId)>> {
        if let Some(d) = self.descendants.get(&t) {
            return d.clone();
        }
        let mut out = vec![(String::new(), t)];
        for &(c, child) in arena.children(t) {
            let sub = self.descend(arena, child);
            for (w, u) in sub.iter() {
                out.push((format!("{c}{w}"), *u));
            }
        }
        let rc = Rc::new(out);
        self.descendants.insert(t, rc.clone());
        rc
    }

    fn eval(&mut self, arena: &TreeArena, t: TreeId, node: usize) -> Result<bool, McError> {
        if let Some(&v) = self.memo.get(&(t, node)) {
            return Ok(v);
        }
        let v = match self.nodes[node] {
            FNode::False => false,
            FNode::True => true,
            // trees carry the empty labeling
            FNode::Lit { negated } => negated,
            FNode::Or(a, b) => self.eval(arena, t, a)? || self.eval(arena, t, b)?,
            FNode::And(a, b) => self.eval(arena, t, a)? && self.eval(arena, t, b)?,
            FNode::Ef(lang, body) => {
                let desc = self.descend(arena, t);
                let mut found = false;
                for (w, u) in desc.iter() {
                    if self.member(lang, w)? && self.eval(arena, *u, body)? {
                        found = true;
                        break;
                    }
                }
                found
            }
            FNode::Ag(lang, body) => {
                let desc = self.descend(arena, t);
                let mut holds = true;
                for (w, u) in desc.iter() {
                    if self.member(lang, w)? && !self.eval(arena, *u, body)? {
                        holds = false;
                        break;
                    }
                }
                holds
            }
        };
        self.memo.insert((t, node), v);
        Ok(v)
    }
}

enum RawSearch {
    Found(Structure),
    Exhausted(usize),
    CapHit(usize),
}

/// The letters a countermodel search ranges over: the base alphabet plus
/// the marker when some referenced language uses it.
fn search_letters(env: &LangEnv, formulas: &[&Formula]) -> Result<Vec<char>, McError> {
    let mut letters: Vec<char> = env.alphabet().letters().collect();
    let mut dollar = false;
    for f in formulas {
        for name in f.lang_refs() {
            if env.get(name)?.uses_dollar() {
                dollar = true;
            }
        }
    }
    if dollar {
        letters.push(crate::alphabet::DOLLAR);
    }
    Ok(letters)
}

fn leaf_budget(formulas: &[&Formula]) -> usize {
    formulas
        .iter()
        .map(|f| f.ef_count() + f.ag_count())
        .sum::<usize>()
        + 1
}

/// Leaf budget for a directed search: a pruned countermodel keeps one
/// witness path per EF-evaluation on the satisfied side and one refutation
/// path per AG on the falsified side.
fn directed_leaf_budget(positive: &[&Formula], negative: &[&Formula]) -> usize {
    positive.iter().map(|f| f.ef_count()).sum::<usize>()
        + negative.iter().map(|f| f.ag_count()).sum::<usize>()
        + 1
}

/// Search for a structure on which `is_counter` holds of the formulas'
/// truth values.  Proposition-free formulas run on the interned tree DAG;
/// otherwise trees are decorated with every labeling over the mentioned
/// propositions, within the structure cap.
fn search_countermodel(
    env: &LangEnv,
    formulas: &[&Formula],
    is_counter: &dyn Fn(&[bool]) -> bool,
    bounds: Bounds,
    max_leaves: usize,
    limits: SearchLimits,
) -> Result<RawSearch, McError> {
    let letters = search_letters(env, formulas)?;
    let props: BTreeSet<String> = formulas
        .iter()
        .flat_map(|f| f.props().into_iter().map(|p| p.to_string()))
        .collect();
    // out-degree beyond the leaf budget is impossible
    let bounds = Bounds {
        depth: bounds.depth,
        branching: bounds.branching.min(max_leaves),
    };
    let mut arena = TreeArena::new();
    let enum_limits = EnumLimits {
        max_trees: limits.max_structures,
    };

    if props.is_empty() {
        let mut eval = TreeEval::new(env);
        let ids: Vec<usize> = formulas.iter().map(|f| eval.add_formula(f)).collect();
        let mut checked = 0usize;
        let mut found: Option<TreeId> = None;
        let end = stream_trees_dedup::<McError>(
            &mut arena,
            &letters,
            bounds.depth,
            bounds.branching,
            max_leaves,
            enum_limits,
            &mut |arena, t| {
                checked += 1;
                let mut vals = Vec::with_capacity(ids.len());
                for &id in &ids {
                    vals.push(eval.eval(&*arena, t, id)?);
                }
                if is_counter(&vals) {
                    found = Some(t);
                    return Ok(Walk::Stop);
                }
                Ok(Walk::Continue)
            },
        )?;
        Ok(match (found, end) {
            (Some(t), _) => RawSearch::Found(arena.to_structure(t)),
            (None, StreamEnd::Exhausted { .. }) => RawSearch::Exhausted(checked),
            (None, _) => RawSearch::CapHit(checked),
        })
    } else {
        let props: Vec<String> = props.into_iter().collect();
        let mut checked = 0usize;
        let mut found: Option<Structure> = None;
        let mut capped = false;
        let end = stream_trees_dedup::<McError>(
            &mut arena,
            &letters,
            bounds.depth,
            bounds.branching,
            max_leaves,
            enum_limits,
            &mut |arena, t| {
                let base = arena.to_structure(t);
                for labeling in labelings(base.state_count(), &props) {
                    if checked >= limits.max_structures {
                        capped = true;
                        return Ok(Walk::Stop);
                    }
                    checked += 1;
                    let mut m = base.clone();
                    m.lts.labels = labeling;
                    let mut vals = Vec::with_capacity(formulas.len());
                    for f in formulas {
                        vals.push(check(&m, f, env)?);
                    }
                    if is_counter(&vals) {
                        found = Some(m);
                        return Ok(Walk::Stop);
                    }
                }
                Ok(Walk::Continue)
            },
        )?;
        Ok(match (found, end) {
            (Some(m), _) => RawSearch::Found(m),
            (None, StreamEnd::Exhausted { .. }) if !capped => RawSearch::Exhausted(checked),
            _ => RawSearch::CapHit(checked),
        })
    }
}

/// Every assignment of proposition subsets to `n` states.
fn labelings(n: usize, props: &[String]) -> Vec<Vec<BTreeSet<String>>> {
    let subsets: Vec<BTreeSet<String>> = {
        let mut out = Vec::new();
        for mask in 0u32..(1 << props.len()) {
            out.push(
                props
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, p)| p.clone())
                    .collect(),
            );
        }
        out
    };
    let mut out: Vec<Vec<BTreeSet<String>>> = vec![vec![]];
    for _ in 0..n {
        let mut next = Vec::with_capacity(out.len() * subsets.len());
        for partial in &out {
            for sub in &subsets {
                let mut p = partial.clone();
                p.push(sub.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}

fn exactness(env: &LangEnv, formulas: &[&Formula], bounds: Bounds) -> Result<bool, McError> {
    match Bounds::derived(formulas, env)? {
        Some(needed) => {
            Ok(bounds.depth >= needed.depth && bounds.branching >= needed.branching)
        }
        None => Ok(false),
    }
}

fn certificate(
    bounds: Bounds,
    formulas: &[&Formula],
    checked: usize,
    exact: bool,
) -> BoundCertificate {
    BoundCertificate {
        depth: bounds.depth,
        branching: bounds.branching,
        max_leaves: leaf_budget(formulas),
        structures_checked: checked,
        exact,
    }
}

/// Outcome of a bounded model search.
#[derive(Debug, Clone)]
pub enum ModelSearch {
    Found(Box<Structure>),
    /// No model within the bounds; `exact` certifies genuine
    /// unsatisfiability on the finite-language fragment.
    NoneWithinBounds(BoundCertificate),
}

/// Search for a model of `f` within the bounds.
pub fn find_model(
    f: &Formula,
    env: &LangEnv,
    bounds: Bounds,
    limits: SearchLimits,
) -> Result<ModelSearch, McError> {
    let formulas = [f];
    if let Some(false) = finite_decision(env, &formulas, &[])? {
        // unsatisfiable everywhere: exact emptiness certificate
        return Ok(ModelSearch::NoneWithinBounds(BoundCertificate {
            depth: bounds.depth,
            branching: bounds.branching,
            max_leaves: 0,
            structures_checked: 0,
            exact: true,
        }));
    }
    let budget = directed_leaf_budget(&formulas, &[]);
    match search_countermodel(env, &formulas, &|vals| vals[0], bounds, budget, limits)? {
        RawSearch::Found(m) => Ok(ModelSearch::Found(Box::new(m))),
        RawSearch::Exhausted(checked) => {
            let exact = exactness(env, &formulas, bounds)?;
            Ok(ModelSearch::NoneWithinBounds(certificate(
                bounds, &formulas, checked, exact,
            )))
        }
        RawSearch::CapHit(checked) => Ok(ModelSearch::NoneWithinBounds(certificate(
            bounds, &formulas, checked, false,
        ))),
    }
}

/// Decide ⋀pos ∧ ⋀¬neg on the finite fragment; `Some(true)` =
/// countermodel exists, `Some(false)` = none exists anywhere (exact).
fn finite_decision(
    env: &LangEnv,
    positive: &[&Formula],
    negative: &[&Formula],
) -> Result<Option<bool>, McError> {
    Ok(types::finite_fragment_satisfiable(positive, negative, env)?)
}

/// Trivial certificate for judgments settled without a search.
fn structural_certificate(bounds: Bounds) -> BoundCertificate {
    BoundCertificate {
        depth: bounds.depth,
        branching: bounds.branching,
        max_leaves: 0,
        structures_checked: 0,
        exact: true,
    }
}

/// ⊨ f, decided by countermodel search within the bounds.  Formulas are
/// constant-folded first, so judgments over empty or {ε} annotations do
/// not pay for a search.
pub fn validity(
    f: &Formula,
    env: &LangEnv,
    bounds: Bounds,
    limits: SearchLimits,
) -> Result<Verdict3, McError> {
    let f = crate::formula::simplify(f, env)?;
    if f == Formula::True {
        return Ok(Verdict3::Valid(structural_certificate(bounds)));
    }
    let formulas = [&f];
    if let Some(counter_exists) = finite_decision(env, &[], &formulas)? {
        if !counter_exists {
            return Ok(Verdict3::Valid(structural_certificate(bounds)));
        }
        // a countermodel exists; the search below materializes it
    }
    let budget = directed_leaf_budget(&[], &formulas);
    match search_countermodel(env, &formulas, &|vals| !vals[0], bounds, budget, limits)? {
        RawSearch::Found(m) => Ok(Verdict3::Refuted(Box::new(m))),
        RawSearch::Exhausted(checked) => {
            let exact = exactness(env, &formulas, bounds)?;
            let cert = certificate(bounds, &formulas, checked, exact);
            Ok(if exact {
                Verdict3::Valid(cert)
            } else {
                Verdict3::Unknown(cert)
            })
        }
        RawSearch::CapHit(checked) => Ok(Verdict3::Unknown(certificate(
            bounds, &formulas, checked, false,
        ))),
    }
}

/// ⊨ (⋀ antecedents) → consequent.
pub fn implies_bounded(
    antecedents: &[Formula],
    consequent: &Formula,
    env: &LangEnv,
    bounds: Bounds,
    limits: SearchLimits,
) -> Result<Verdict3, McError> {
    let antecedents: Vec<Formula> = antecedents
        .iter()
        .map(|f| crate::formula::simplify(f, env))
        .collect::<Result<_, _>>()?;
    let consequent = crate::formula::simplify(consequent, env)?;
    if consequent == Formula::True
        || antecedents.contains(&Formula::False)
        || antecedents.contains(&consequent)
    {
        return Ok(Verdict3::Valid(structural_certificate(bounds)));
    }
    let mut formulas: Vec<&Formula> = antecedents.iter().collect();
    formulas.push(&consequent);
    let n = antecedents.len();
    let counter = move |vals: &[bool]| vals[..n].iter().all(|&v| v) && !vals[n];
    let positive: Vec<&Formula> = antecedents.iter().collect();
    if let Some(counter_exists) = finite_decision(env, &positive, &[&consequent])? {
        if !counter_exists {
            return Ok(Verdict3::Valid(structural_certificate(bounds)));
        }
    }
    let budget = directed_leaf_budget(&positive, &[&consequent]);
    match search_countermodel(env, &formulas, &counter, bounds, budget, limits)? {
        RawSearch::Found(m) => Ok(Verdict3::Refuted(Box::new(m))),
        RawSearch::Exhausted(checked) => {
            let exact = exactness(env, &formulas, bounds)?;
            let cert = certificate(bounds, &formulas, checked, exact);
            Ok(if exact {
                Verdict3::Valid(cert)
            } else {
                Verdict3::Unknown(cert)
            })
        }
        RawSearch::CapHit(checked) => Ok(Verdict3::Unknown(certificate(
            bounds, &formulas, checked, false,
        ))),
    }
}

/// f ↔ g at the bounds; `Refuted` carries the distinguishing structure.
pub fn equivalent_bounded(
    f: &Formula,
    g: &Formula,
    env: &LangEnv,
    bounds: Bounds,
    limits: SearchLimits,
) -> Result<Verdict3, McError> {
    let f = crate::formula::simplify(f, env)?;
    let g = crate::formula::simplify(g, env)?;
    if f == g {
        return Ok(Verdict3::Valid(structural_certificate(bounds)));
    }
    // one directed search per implication keeps the leaf budgets sharp;
    // the finite fragment is decided outright and only materializes
    // countermodels through the search
    let formulas = [&f, &g];
    let mut checked_total = 0usize;
    let mut capped = false;
    let mut decided_dirs = 0;
    for (pos, neg) in [(&f, &g), (&g, &f)] {
        if let Some(counter_exists) = finite_decision(env, &[pos], &[neg])? {
            if !counter_exists {
                decided_dirs += 1;
                continue;
            }
        }
        let pair = [pos, neg];
        let budget = directed_leaf_budget(&[pos], &[neg]);
        let counter = |vals: &[bool]| vals[0] && !vals[1];
        match search_countermodel(env, &pair, &counter, bounds, budget, limits)? {
            RawSearch::Found(m) => return Ok(Verdict3::Refuted(Box::new(m))),
            RawSearch::Exhausted(checked) => checked_total += checked,
            RawSearch::CapHit(checked) => {
                checked_total += checked;
                capped = true;
            }
        }
    }
    if decided_dirs == 2 {
        return Ok(Verdict3::Valid(structural_certificate(bounds)));
    }
    let exact = !capped && exactness(env, &formulas, bounds)?;
    let cert = certificate(bounds, &formulas, checked_total, exact);
    Ok(if exact {
        Verdict3::Valid(cert)
    } else {
        Verdict3::Unknown(cert)
    })
}

/// Verdict of the bounded structural-monotonicity probe.
#[derive(Debug, Clone)]
pub enum MonotonicityVerdict {
    /// No model/extension violation within the bounds (finite-language
    /// annotations only; the probe never claims exactness).
    MonotoneUpToBound(BoundCertificate),
    Unknown(BoundCertificate),
    Refuted {
        model: Box<Structure>,
        extension: Box<Structure>,
    },
}

impl MonotonicityVerdict {
    pub fn name(&self) -> &'static str {
        match self {
            MonotonicityVerdict::MonotoneUpToBound(_) => "MONOTONE",
            MonotonicityVerdict::Unknown(_) => "UNKNOWN",
            MonotonicityVerdict::Refuted { .. } => "REFUTED",
        }
    }
}

/// AG-free formulas in negation normal form are preserved under
/// extensions: EF is existential, the boolean connectives are monotone in
/// their parts, and extensions never relabel existing states.
pub fn syntactically_monotone(f: &Formula) -> bool {
    f.ag_count() == 0
}

/// Search for a model together with a one-edge extension that falsifies
/// `f`.  Extensions add one edge between existing states or to one fresh
/// state (labeled in every way over the mentioned propositions).
/// AG-free inputs are monotone outright and skip the search.
pub fn structurally_monotone_bounded(
    f: &Formula,
    env: &LangEnv,
    bounds: Bounds,
    limits: SearchLimits,
) -> Result<MonotonicityVerdict, McError> {
    // monotonicity is semantic: probe the folded equivalent
    let f = crate::formula::simplify(f, env)?;
    let f = &f;
    let formulas = [f];
    if syntactically_monotone(f) {
        return Ok(MonotonicityVerdict::MonotoneUpToBound(certificate(
            bounds, &formulas, 0, true,
        )));
    }
    let letters = search_letters(env, &formulas)?;
    let props: Vec<String> = f.props().into_iter().map(|p| p.to_string()).collect();
    let max_leaves = leaf_budget(&formulas);
    let mut arena = TreeArena::new();
    let label_choices = labelings(1, &props);
    let mut checked = 0usize;
    let mut capped = false;
    let mut refutation: Option<(Structure, Structure)> = None;
    let end = stream_trees_dedup::<McError>(
        &mut arena,
        &letters,
        bounds.depth,
        bounds.branching,
        max_leaves,
        EnumLimits {
            max_trees: limits.max_structures,
        },
        &mut |arena, t| {
            let base = arena.to_structure(t);
            let models: Vec<Structure> = if props.is_empty() {
                vec![base]
            } else {
                labelings(base.state_count(), &props)
                    .into_iter()
                    .map(|labels| {
                        let mut m = base.clone();
                        m.lts.labels = labels;
                        m
                    })
                    .collect()
            };
            for m in models {
                checked += 1;
                if checked > limits.max_structures {
                    capped = true;
                    return Ok(Walk::Stop);
                }
                if !check(&m, f, env)? {
                    continue;
                }
                // one-edge extensions
                let n = m.state_count();
                for from in 0..n {
                    for &c in &letters {
                        for to in 0..=n {
                            let fresh_labels: &[Vec<BTreeSet<String>>] = if to == n {
                                &label_choices
                            } else {
                                std::slice::from_ref(&label_choices[0])
                            };
                            for fresh_label in fresh_labels {
                                let mut e = m.clone();
                                if to == n {
                                    e.lts.state_names.push(format!("x{n}"));
                                    e.lts.labels.push(fresh_label[0].clone());
                                }
                                if !e.lts.edges.insert((from, c, to)) {
                                    continue;
                                }
                                if !check(&e, f, env)? {
                                    refutation = Some((m, e));
                                    return Ok(Walk::Stop);
                                }
                            }
                        }
                    }
                }
            }
            Ok(Walk::Continue)
        },
    )?;
    if let Some((model, extension)) = refutation {
        return Ok(MonotonicityVerdict::Refuted {
            model: Box::new(model),
            extension: Box::new(extension),
        });
    }
    if capped || !matches!(end, StreamEnd::Exhausted { .. }) {
        return Ok(MonotonicityVerdict::Unknown(certificate(
            bounds, &formulas, checked, false,
        )));
    }
    let finite = Bounds::derived(&formulas, env)?.is_some();
    let cert = certificate(bounds, &formulas, checked, false);
    Ok(if finite {
        MonotonicityVerdict::MonotoneUpToBound(cert)
    } else {
        MonotonicityVerdict::Unknown(cert)
    })
}

/// Outcome of the ⋀EF-elimination step.
#[derive(Debug, Clone)]
pub enum WedgeEfOutcome {
    /// The least index whose single-term equation is certified.
    Index(usize, BoundCertificate),
    /// Indices whose equations stayed undecided; no certified index found.
    Unknown(Vec<usize>),
    /// Every equation refuted and the hypothesis equation itself fails on
    /// the carried structure.
    HypothesisRefuted(Box<Structure>),
}

/// Given the hypothesis `target = delta ∨ ⋀ efTerms`, find the least `i`
/// with `target = delta ∨ efTerms[i]`.  Each equation is judged at the
/// bounds derived for its own (folded) formulas, never below the given
/// ones.
pub fn elim_wedge_ef(
    delta: &Formula,
    ef_terms: &[Formula],
    target: &Formula,
    env: &LangEnv,
    bounds: Bounds,
    limits: SearchLimits,
) -> Result<WedgeEfOutcome, McError> {
    if ef_terms.is_empty() {
        return Err(McError::EmptyEfTerms);
    }
    let equation_bounds = |candidate: &Formula| -> Result<Bounds, McError> {
        let t = crate::formula::simplify(target, env)?;
        let c = crate::formula::simplify(candidate, env)?;
        Ok(match Bounds::derived(&[&t, &c], env)? {
            Some(derived) => Bounds {
                depth: bounds.depth.max(derived.depth),
                branching: bounds.branching.max(derived.branching),
            },
            None => bounds,
        })
    };
    let mut unknowns = Vec::new();
    for (i, term) in ef_terms.iter().enumerate() {
        let candidate = Formula::or(delta.clone(), term.clone());
        let eq_bounds = equation_bounds(&candidate)?;
        match equivalent_bounded(target, &candidate, env, eq_bounds, limits)? {
            Verdict3::Valid(cert) => return Ok(WedgeEfOutcome::Index(i, cert)),
            Verdict3::Unknown(_) => unknowns.push(i),
            Verdict3::Refuted(_) => {}
        }
    }
    if !unknowns.is_empty() {
        return Ok(WedgeEfOutcome::Unknown(unknowns));
    }
    // all equations refuted: the hypothesis equation must fail
    let hypothesis = Formula::or(
        delta.clone(),
        Formula::and_all(ef_terms.to_vec()),
    );
    let eq_bounds = equation_bounds(&hypothesis)?;
    match equivalent_bounded(target, &hypothesis, env, eq_bounds, limits)? {
        Verdict3::Refuted(m) => Ok(WedgeEfOutcome::HypothesisRefuted(m)),
        _ => Ok(WedgeEfOutcome::Unknown((0..ef_terms.len()).collect())),
    }
}

/// [`ValidityOracle`] backed by the bounded countermodel search.
pub struct BoundedOracle<'e> {
    pub env: &'e LangEnv,
    pub bounds: Bounds,
    pub limits: SearchLimits,
    cache: HashMap<(Vec<Formula>, Formula), OracleAnswer>,
}

impl<'e> BoundedOracle<'e> {
    pub fn new(env: &'e LangEnv, bounds: Bounds, limits: SearchLimits) -> BoundedOracle<'e> {
        BoundedOracle {
            env,
            bounds,
            limits,
            cache: HashMap::new(),
        }
    }

    /// Derive per-query sufficiency bounds on the folded formulas, never
    /// below the configured ones.
    fn query_bounds(&self, antecedents: &[Formula], consequent: &Formula) -> Bounds {
        let folded: Result<Vec<Formula>, _> = antecedents
            .iter()
            .chain(std::iter::once(consequent))
            .map(|f| crate::formula::simplify(f, self.env))
            .collect();
        let folded = match folded {
            Ok(folded) => folded,
            Err(_) => return self.bounds,
        };
        let refs: Vec<&Formula> = folded.iter().collect();
        match Bounds::derived(&refs, self.env) {
            Ok(Some(derived)) => Bounds {
                depth: self.bounds.depth.max(derived.depth),
                branching: self.bounds.branching.max(derived.branching),
            },
            _ => self.bounds,
        }
    }
}

impl ValidityOracle for BoundedOracle<'_> {
    fn implication_valid(&mut self, antecedents: &[Formula], consequent: &Formula) -> OracleAnswer {
        let key = (antecedents.to_vec(), consequent.clone());
        if let Some(&v) = self.cache.get(&key) {
            return v;
        }
        let bounds = self.query_bounds(antecedents, consequent);
        let answer =
            match implies_bounded(antecedents, consequent, self.env, bounds, self.limits) {
                Ok(Verdict3::Valid(_)) => OracleAnswer::Valid,
                Ok(Verdict3::Refuted(_)) => OracleAnswer::Refuted,
                Ok(Verdict3::Unknown(_)) => OracleAnswer::Unknown,
                Err(_) => OracleAnswer::Unknown,
            };
        self.cache.insert(key, answer);
        answer
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Alphabet;
    use crate::lang::LanguageHandle;
    use crate::lts::{path_structure, path_structure_dollar};

    fn env() -> LangEnv {
        let mut env = LangEnv::new(Alphabet::new(['a', 'b']).unwrap());
        env.insert(LanguageHandle::finite("A", [String::from("a")]))
            .unwrap();
        env.insert(LanguageHandle::finite("B", [String::from("b")]))
            .unwrap();
        env.insert(LanguageHandle::finite("AB", [String::from("ab")]))
            .unwrap();
        env.insert(LanguageHandle::finite("ABD", [String::from("ab$")]))
            .unwrap();
        env.insert(LanguageHandle::finite("EMPTY", Vec::<String>::new()))
            .unwrap();
        env.insert(LanguageHandle::palindromes("PAL", ['a', 'b']))
            .unwrap();
        env
    }

    #[test]
    fn sat_states_on_paths() {
        let env = env();
        let m = path_structure("ab$");
        assert!(check(&m, &Formula::ef("ABD", Formula::True), &env).unwrap());
        assert!(!check(&m, &Formula::ef("AB", Formula::ef("AB", Formula::True)), &env).unwrap());
        // AG over the empty language holds everywhere
        let f = Formula::ag("EMPTY", Formula::False);
        assert_eq!(
            sat_states(&m.lts, &f, &env).unwrap().len(),
            m.state_count()
        );
        // chain a→b: AG[A] false fails at the root
        let m = path_structure("ab");
        assert!(!check(&m, &Formula::ag("A", Formula::False), &env).unwrap());
    }

    #[test]
    fn check_handles_cycles() {
        let env = env();
        let mut m = path_structure("a");
        m.lts.edges.insert((1, 'b', 0));
        // on the cycle, some path labeled ab ends at the root again
        let f = Formula::ef("AB", Formula::ef("A", Formula::True));
        assert!(check(&m, &f, &env).unwrap());
    }

    #[test]
    fn naive_check_agrees_and_reports_bounds() {
        let env = env();
        let m = path_structure("ab$");
        let f = Formula::ef("ABD", Formula::True);
        assert_eq!(
            naive_check(&m, &f, &env, 4).unwrap(),
            check(&m, &f, &env).unwrap()
        );
        // cyclic single state with an a-loop
        let mut cyc = Structure::single_state();
        cyc.lts.edges.insert((0, 'a', 0));
        let mut env2 = LangEnv::new(Alphabet::new(['a']).unwrap());
        env2.insert(LanguageHandle::finite("AA", [String::from("aa")]))
            .unwrap();
        env2.insert(LanguageHandle::finite("AAA", [String::from("aaa")]))
            .unwrap();
        assert!(naive_check(&cyc, &Formula::ef("AA", Formula::True), &env2, 2).unwrap());
        let err =
            naive_check(&cyc, &Formula::ag("PALX", Formula::True), &env2, 2).unwrap_err();
        assert!(matches!(err, McError::Lang(_)));
        // finite language longer than the bound, cyclic structure: the
        // verdict would be a guess, so it is an error
        let err = naive_check(&cyc, &Formula::ef("AAA", Formula::True), &env2, 2).unwrap_err();
        assert!(matches!(err, McError::BoundInsufficient { .. }));
    }

    #[test]
    fn validity_basic_verdicts() {
        let env = env();
        let limits = SearchLimits::default();
        // EF[A] false is refuted by the single-state tree
        let v = validity(
            &Formula::ef("A", Formula::False),
            &env,
            Bounds::new(1, 1),
            limits,
        )
        .unwrap();
        match v {
            Verdict3::Refuted(m) => assert_eq!(m.state_count(), 1),
            other => panic!("expected refutation, got {:?}", other.name()),
        }
        // AG[A] false over Σ={a,b} is refuted by π_a
        let v = validity(
            &Formula::ag("A", Formula::False),
            &env,
            Bounds::new(1, 1),
            limits,
        )
        .unwrap();
        assert!(v.is_refuted());
        // AG over the empty language is valid and exact at any bound
        let v = validity(
            &Formula::ag("EMPTY", Formula::False),
            &env,
            Bounds::new(1, 1),
            limits,
        )
        .unwrap();
        assert!(v.is_valid());
        // palindrome annotations never produce VALID
        let v = validity(
            &Formula::or(
                Formula::ef("PAL", Formula::True),
                Formula::ag("PAL", Formula::False),
            ),
            &env,
            Bounds::new(2, 2),
            limits,
        )
        .unwrap();
        assert!(!v.is_valid());
    }

    #[test]
    fn equivalence_verdicts() {
        let env = env();
        let limits = SearchLimits::default();
        let f = Formula::ef("A", Formula::True);
        let g = Formula::ef("B", Formula::True);
        let bounds = Bounds::derived(&[&f, &g], &env).unwrap().unwrap();
        let v = equivalent_bounded(&f, &g, &env, bounds, limits).unwrap();
        assert!(v.is_refuted());
        let v = equivalent_bounded(&f, &f, &env, bounds, limits).unwrap();
        assert!(v.is_valid());
        // EF[A] EF[B] true ↔ EF[AB] true
        let nested = Formula::ef("A", Formula::ef("B", Formula::True));
        let flat = Formula::ef("AB", Formula::True);
        let bounds = Bounds::derived(&[&nested, &flat], &env).unwrap().unwrap();
        let v = equivalent_bounded(&nested, &flat, &env, bounds, limits).unwrap();
        assert!(v.is_valid(), "{}", v.name());
    }

    #[test]
    fn monotonicity_probe() {
        let env = env();
        let limits = SearchLimits::default();
        let bounds = Bounds::new(2, 2);
        // EF[L] true is structurally monotone
        let v = structurally_monotone_bounded(
            &Formula::ef("A", Formula::True),
            &env,
            bounds,
            limits,
        )
        .unwrap();
        assert!(matches!(v, MonotonicityVerdict::MonotoneUpToBound(_)));
        // AG[A] false is refuted: the leaf satisfies it, adding an a-child
        // breaks it
        let v = structurally_monotone_bounded(
            &Formula::ag("A", Formula::False),
            &env,
            bounds,
            limits,
        )
        .unwrap();
        match v {
            MonotonicityVerdict::Refuted { model, extension } => {
                assert!(check(&model, &Formula::ag("A", Formula::False), &env).unwrap());
                assert!(!check(&extension, &Formula::ag("A", Formula::False), &env).unwrap());
                assert!(crate::lts::is_extension(&model, &extension));
            }
            other => panic!("expected refutation, got {}", other.name()),
        }
        // true is monotone
        let v = structurally_monotone_bounded(&Formula::True, &env, bounds, limits).unwrap();
        assert!(matches!(v, MonotonicityVerdict::MonotoneUpToBound(_)));
    }

    #[test]
    fn wedge_ef_selection() {
        let env = env();
        let limits = SearchLimits::default();
        let target = Formula::ef("A", Formula::True);
        let terms = vec![Formula::ef("A", Formula::True)];
        let out = elim_wedge_ef(
            &Formula::False,
            &terms,
            &target,
            &env,
            Bounds::new(2, 3),
            limits,
        )
        .unwrap();
        assert!(matches!(out, WedgeEfOutcome::Index(0, _)));
        assert!(matches!(
            elim_wedge_ef(&Formula::False, &[], &target, &env, Bounds::new(1, 1), limits),
            Err(McError::EmptyEfTerms)
        ));
    }

    #[test]
    fn reference_formula_on_dollar_paths() {
        let mut env = LangEnv::new(Alphabet::binary());
        env.insert(LanguageHandle::palindromes_dollar("PALD", &Alphabet::binary()))
            .unwrap();
        let f = Formula::ef("PALD", Formula::True);
        assert!(check(&path_structure_dollar("0110"), &f, &env).unwrap());
        assert!(!check(&path_structure_dollar("01"), &f, &env).unwrap());
        assert!(check(&path_structure_dollar(""), &f, &env).unwrap());
    }
}
