//! Exact satisfiability for the proposition-free finite-language fragment
//! by type elimination.
//!
//! Finite annotations unfold into single-letter steps, so a formula set
//! becomes a DAG over `false`, `true`, `∨`, `∧`, `⟨a⟩` and `[a]` nodes.
//! A node valuation is determined by the values of the step atoms, and a
//! leaf fixes them all (`⟨a⟩` false, `[a]` true).  The realizable root
//! valuations are computed as a fixpoint: children contribute per letter
//! only through the achievable (∃-or, ∀-and) profile pairs, which form a
//! small closure under pairwise combination.  Every tree realizes a type
//! by induction on its height, and every type is realized by a finite
//! tree, so the judgment is exact — no search bounds involved.

use crate::formula::Formula;
use crate::lang::{Backend, LangEnv, LangError};
use std::collections::{BTreeMap, BTreeSet, HashMap};

const MAX_ATOMS: usize = 128;
const MAX_PAIRS: usize = 20_000;
const MAX_COMBOS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum TNode {
    False,
    True,
    Or(usize, usize),
    And(usize, usize),
    Ef(char, usize),
    Ag(char, usize),
}

#[derive(Default)]
struct Dag {
    nodes: Vec<TNode>,
    index: HashMap<TNode, usize>,
    atoms: Vec<usize>,
}

impl Dag {
    fn intern(&mut self, node: TNode) -> usize {
        // idempotence and ordered children keep the DAG canonical; the
        // boolean-unit folding happens in or2/and2 before interning
        let node = match node {
            TNode::Or(a, b) | TNode::And(a, b) if a == b => return a,
            TNode::Or(a, b) => TNode::Or(a.min(b), a.max(b)),
            TNode::And(a, b) => TNode::And(a.min(b), a.max(b)),
            other => other,
        };
        if let Some(&id) = self.index.get(&node) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(node);
        self.index.insert(node, id);
        if matches!(node, TNode::Ef(_, _) | TNode::Ag(_, _)) {
            self.atoms.push(id);
        }
        id
    }
}

/// Translate; `None` when some annotation is not a finite word set.
fn translate(dag: &mut Dag, f: &Formula, env: &LangEnv) -> Result<Option<usize>, LangError> {
    Ok(Some(match f {
        Formula::False => dag.intern(TNode::False),
        Formula::True => dag.intern(TNode::True),
        Formula::Lit { .. } => return Ok(None),
        Formula::Or(a, b) => {
            let (x, y) = match (translate(dag, a, env)?, translate(dag, b, env)?) {
                (Some(x), Some(y)) => (x, y),
                _ => return Ok(None),
            };
            or2(dag, x, y)
        }
        Formula::And(a, b) => {
            let (x, y) = match (translate(dag, a, env)?, translate(dag, b, env)?) {
                (Some(x), Some(y)) => (x, y),
                _ => return Ok(None),
            };
            and2(dag, x, y)
        }
        Formula::Ef(lang, body) => {
            let words = match env.get(lang)?.backend() {
                Backend::Finite(words) => words.clone(),
                _ => return Ok(None),
            };
            let body = match translate(dag, body, env)? {
                Some(b) => b,
                None => return Ok(None),
            };
            let mut disjuncts = Vec::new();
            for w in &words {
                let mut cur = body;
                for a in w.chars().rev() {
                    cur = dag.intern(TNode::Ef(a, cur));
                }
                disjuncts.push(cur);
            }
            fold(dag, disjuncts, false)
        }
        Formula::Ag(lang, body) => {
            let words = match env.get(lang)?.backend() {
                Backend::Finite(words) => words.clone(),
                _ => return Ok(None),
            };
            let body = match translate(dag, body, env)? {
                Some(b) => b,
                None => return Ok(None),
            };
            let mut conjuncts = Vec::new();
            for w in &words {
                let mut cur = body;
                for a in w.chars().rev() {
                    cur = dag.intern(TNode::Ag(a, cur));
                }
                conjuncts.push(cur);
            }
            fold(dag, conjuncts, true)
        }
    }))
}

fn or2(dag: &mut Dag, a: usize, b: usize) -> usize {
    match (dag.nodes[a], dag.nodes[b]) {
        (TNode::True, _) | (_, TNode::True) => dag.intern(TNode::True),
        (TNode::False, _) => b,
        (_, TNode::False) => a,
        _ => dag.intern(TNode::Or(a, b)),
    }
}

fn and2(dag: &mut Dag, a: usize, b: usize) -> usize {
    match (dag.nodes[a], dag.nodes[b]) {
        (TNode::False, _) | (_, TNode::False) => dag.intern(TNode::False),
        (TNode::True, _) => b,
        (_, TNode::True) => a,
        _ => dag.intern(TNode::And(a, b)),
    }
}

fn fold(dag: &mut Dag, mut parts: Vec<usize>, conj: bool) -> usize {
    parts.sort_unstable();
    parts.dedup();
    let unit = dag.intern(if conj { TNode::True } else { TNode::False });
    let mut acc = unit;
    for p in parts {
        acc = if conj { and2(dag, acc, p) } else { or2(dag, acc, p) };
    }
    acc
}

/// Evaluate every node under an atom assignment (bit i of `atoms` is the
/// value of `dag.atoms[i]`).
fn node_values(dag: &Dag, atom_bits: u128) -> Vec<bool> {
    let atom_pos: HashMap<usize, usize> = dag
        .atoms
        .iter()
        .enumerate()
        .map(|(i, &n)| (n, i))
        .collect();
    let mut values = vec![false; dag.nodes.len()];
    for (id, node) in dag.nodes.iter().enumerate() {
        values[id] = match *node {
            TNode::False => false,
            TNode::True => true,
            TNode::Or(a, b) => values[a] || values[b],
            TNode::And(a, b) => values[a] && values[b],
            TNode::Ef(_, _) | TNode::Ag(_, _) => atom_bits & (1u128 << atom_pos[&id]) != 0,
        };
    }
    values
}

/// Satisfiability of ⋀ positive ∧ ⋀ ¬negative over the proposition-free
/// finite fragment.  `Ok(None)` when the fragment does not apply or the
/// closure caps are exceeded.
pub fn finite_fragment_satisfiable(
    positive: &[&Formula],
    negative: &[&Formula],
    env: &LangEnv,
) -> Result<Option<bool>, LangError> {
    let mut dag = Dag::default();
    let mut pos_roots = Vec::new();
    let mut neg_roots = Vec::new();
    for f in positive {
        match translate(&mut dag, f, env)? {
            Some(id) => pos_roots.push(id),
            None => return Ok(None),
        }
    }
    for f in negative {
        match translate(&mut dag, f, env)? {
            Some(id) => neg_roots.push(id),
            None => return Ok(None),
        }
    }
    let atom_count = dag.atoms.len();
    if atom_count > MAX_ATOMS {
        return Ok(None);
    }
    // letters and, per letter, the atom positions with their continuations
    let mut per_letter: BTreeMap<char, Vec<(usize, usize, bool)>> = BTreeMap::new();
    for (pos, &id) in dag.atoms.iter().enumerate() {
        match dag.nodes[id] {
            TNode::Ef(a, child) => per_letter.entry(a).or_default().push((pos, child, true)),
            TNode::Ag(a, child) => per_letter.entry(a).or_default().push((pos, child, false)),
            _ => unreachable!("atoms are steps"),
        }
    }

    // leaf type: every ⟨a⟩ false, every [a] true
    let leaf_bits: u128 = dag
        .atoms
        .iter()
        .enumerate()
        .filter(|(_, &id)| matches!(dag.nodes[id], TNode::Ag(_, _)))
        .fold(0u128, |acc, (i, _)| acc | (1u128 << i));
    let mut types: BTreeSet<u128> = BTreeSet::new();
    types.insert(leaf_bits);

    loop {
        // per-letter achievable (∃, ∀) continuation profiles
        let mut letter_pairs: Vec<(char, Vec<(u128, u128)>)> = Vec::new();
        let mut combo_count: usize = 1;
        for (&a, atoms) in &per_letter {
            let mask: u128 = atoms
                .iter()
                .fold(0u128, |acc, &(pos, _, _)| acc | (1u128 << pos));
            let mut profiles: BTreeSet<u128> = BTreeSet::new();
            for &t in &types {
                let values = node_values(&dag, t);
                let mut p = 0u128;
                for &(pos, child, _) in atoms {
                    if values[child] {
                        p |= 1u128 << pos;
                    }
                }
                profiles.insert(p);
            }
            // closure of (or, and) pairs under combination; the empty
            // child set gives (∅, everything)
            let mut pairs: BTreeSet<(u128, u128)> = BTreeSet::new();
            pairs.insert((0, mask));
            let mut frontier: Vec<(u128, u128)> =
                profiles.iter().map(|&p| (p, p)).collect();
            for &f in &frontier {
                pairs.insert(f);
            }
            while let Some((o, i)) = frontier.pop() {
                for &p in &profiles {
                    let combined = (o | p, i & p);
                    if pairs.insert(combined) {
                        frontier.push(combined);
                    }
                    if pairs.len() > MAX_PAIRS {
                        return Ok(None);
                    }
                }
            }
            combo_count = combo_count.saturating_mul(pairs.len());
            if combo_count > MAX_COMBOS {
                return Ok(None);
            }
            letter_pairs.push((a, pairs.into_iter().collect()));
        }

        // compose candidate atom assignments across letters
        let mut candidates: Vec<u128> = vec![0];
        for (a, pairs) in &letter_pairs {
            let letter_atoms = &per_letter[a];
            let mut next = Vec::with_capacity(candidates.len() * pairs.len());
            for &base in &candidates {
                for &(or_bits, and_bits) in pairs {
                    let mut bits = base;
                    for &(pos, _, is_ef) in letter_atoms {
                        let flag = if is_ef {
                            or_bits & (1u128 << pos) != 0
                        } else {
                            and_bits & (1u128 << pos) != 0
                        };
                        if flag {
                            bits |= 1u128 << pos;
                        }
                    }
                    next.push(bits);
                }
            }
            candidates = next;
        }

        let before = types.len();
        for bits in candidates {
            types.insert(bits);
        }
        if types.len() == before {
            break;
        }
    }

    for &t in &types {
        let values = node_values(&dag, t);
        if pos_roots.iter().all(|&r| values[r]) && neg_roots.iter().all(|&r| !values[r]) {
            return Ok(Some(true));
        }
    }
    Ok(Some(false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Alphabet;
    use crate::lang::LanguageHandle;

    fn env() -> LangEnv {
        let mut env = LangEnv::new(Alphabet::new(['a', 'b']).unwrap());
        let fin = |name: &str, words: &[&str]| {
            LanguageHandle::finite(name, words.iter().map(|w| w.to_string()))
        };
        env.insert(fin("A", &["a"])).unwrap();
        env.insert(fin("B", &["b"])).unwrap();
        env.insert(fin("AB", &["ab"])).unwrap();
        env.insert(fin("U", &["a", "b"])).unwrap();
        env.insert(fin("E", &[])).unwrap();
        env
    }

    fn sat(pos: &[&Formula], neg: &[&Formula]) -> bool {
        finite_fragment_satisfiable(pos, neg, &env())
            .unwrap()
            .expect("finite fragment")
    }

    #[test]
    fn basic_judgments() {
        let ef_a = Formula::ef("A", Formula::True);
        let ef_b = Formula::ef("B", Formula::True);
        let ef_u = Formula::ef("U", Formula::True);
        // EF[A] true is satisfiable and not valid
        assert!(sat(&[&ef_a], &[]));
        assert!(sat(&[], &[&ef_a]));
        // EF[A] ∧ ¬EF[A] is unsatisfiable
        assert!(!sat(&[&ef_a], &[&ef_a]));
        // the union annotation is implied by either branch
        assert!(!sat(&[&ef_a], &[&ef_u]));
        assert!(sat(&[&ef_u], &[&ef_a, &ef_b]) == false);
        // but EF[U] does not imply EF[A]
        assert!(sat(&[&ef_u], &[&ef_a]));
    }

    #[test]
    fn nesting_equals_concatenation() {
        let nested = Formula::ef("A", Formula::ef("B", Formula::True));
        let flat = Formula::ef("AB", Formula::True);
        assert!(!sat(&[&nested], &[&flat]));
        assert!(!sat(&[&flat], &[&nested]));
    }

    #[test]
    fn ag_reasoning() {
        // AG[E] false is valid (no words at all)
        let vac = Formula::ag("E", Formula::False);
        assert!(!sat(&[], &[&vac]));
        // AG[A] false is falsifiable (a path with an a-edge)
        let ag_a = Formula::ag("A", Formula::False);
        assert!(sat(&[], &[&ag_a]));
        // AG[A] false ∧ EF[A] true is unsatisfiable
        assert!(!sat(&[&ag_a, &Formula::ef("A", Formula::True)], &[]));
        // AG[U] false rules out both letters but the leaf remains
        assert!(sat(&[&Formula::ag("U", Formula::False)], &[]));
    }

    #[test]
    fn non_finite_backends_bail() {
        let mut e = env();
        e.insert(LanguageHandle::palindromes("PAL", ['a', 'b'])).unwrap();
        let f = Formula::ef("PAL", Formula::True);
        assert_eq!(finite_fragment_satisfiable(&[&f], &[], &e).unwrap(), None);
        let lit = Formula::lit("p");
        assert_eq!(finite_fragment_satisfiable(&[&lit], &[], &e).unwrap(), None);
    }
}
