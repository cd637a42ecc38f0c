//! Canonical enumeration of finite edge-labeled trees with empty labeling.
//!
//! Trees are interned in an arena: a node is the sorted multiset of its
//! (letter, subtree) children, so isomorphic trees (up to sibling order)
//! share one index and no tree is emitted twice.  Countermodel searches
//! walk the arena as a DAG, which lets satisfaction be memoized per
//! distinct subtree instead of per node occurrence.

use super::{Lts, Structure};
use std::collections::{BTreeSet, HashMap};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeEnumError {
    #[error("tree enumeration exceeds the cap of {cap} trees (got at least {got})")]
    CapExceeded { cap: usize, got: usize },
}

pub type TreeId = usize;

/// Arena of interned canonical trees.  Index 0 is the single leaf.
#[derive(Debug, Default)]
pub struct TreeArena {
    children: Vec<Vec<(char, TreeId)>>,
    leaves: Vec<usize>,
    depth: Vec<usize>,
    index: HashMap<Vec<(char, TreeId)>, TreeId>,
}

impl TreeArena {
    pub fn new() -> TreeArena {
        let mut arena = TreeArena {
            children: Vec::new(),
            leaves: Vec::new(),
            depth: Vec::new(),
            index: HashMap::new(),
        };
        arena.intern(vec![]);
        arena
    }

    pub fn leaf(&self) -> TreeId {
        0
    }

    /// Intern a node; the children multiset is canonicalized by sorting.
    pub fn intern(&mut self, mut children: Vec<(char, TreeId)>) -> TreeId {
        children.sort_unstable();
        if let Some(&id) = self.index.get(&children) {
            return id;
        }
        let id = self.children.len();
        let leaves = if children.is_empty() {
            1
        } else {
            children.iter().map(|&(_, c)| self.leaves[c]).sum()
        };
        let depth = children
            .iter()
            .map(|&(_, c)| self.depth[c] + 1)
            .max()
            .unwrap_or(0);
        self.children.push(children.clone());
        self.leaves.push(leaves);
        self.depth.push(depth);
        self.index.insert(children, id);
        id
    }

    pub fn children(&self, id: TreeId) -> &[(char, TreeId)] {
        &self.children[id]
    }

    pub fn leaf_count(&self, id: TreeId) -> usize {
        self.leaves[id]
    }

    pub fn depth(&self, id: TreeId) -> usize {
        self.depth[id]
    }

    pub fn node_count(&self, id: TreeId) -> usize {
        1 + self
            .children[id]
            .iter()
            .map(|&(_, c)| self.node_count(c))
            .sum::<usize>()
    }

    /// Materialize as a rooted structure with empty labeling.
    pub fn to_structure(&self, id: TreeId) -> Structure {
        let mut state_names = Vec::new();
        let mut edges = BTreeSet::new();
        self.build(id, &mut state_names, &mut edges);
        let labels = vec![BTreeSet::new(); state_names.len()];
        Structure {
            lts: Lts {
                state_names,
                edges,
                labels,
            },
            root: 0,
        }
    }

    fn build(
        &self,
        id: TreeId,
        names: &mut Vec<String>,
        edges: &mut BTreeSet<(usize, char, usize)>,
    ) -> usize {
        let me = names.len();
        names.push(format!("n{me}"));
        for &(letter, child) in &self.children[id] {
            let c = self.build(child, names, edges);
            edges.insert((me, letter, c));
        }
        me
    }
}

/// Enumeration limits: `max_trees` bounds the total number of distinct
/// trees materialized.
#[derive(Debug, Clone, Copy)]
pub struct EnumLimits {
    pub max_trees: usize,
}

impl Default for EnumLimits {
    fn default() -> Self {
        EnumLimits { max_trees: 500_000 }
    }
}

/// Visitor control for streamed enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Walk {
    Continue,
    Stop,
}

/// How a streamed enumeration ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamEnd {
    /// Every tree within the bounds was visited.
    Exhausted { visited: usize },
    /// The visitor stopped the walk.
    Stopped { visited: usize },
    /// The tree cap was reached before exhaustion.
    CapHit { visited: usize },
}

/// Every canonical tree of depth ≤ `depth` with out-degree ≤ `branching`,
/// exactly once, in a deterministic order (by level, then construction
/// order).  Children multisets may repeat a (letter, subtree) pair.
pub fn enum_trees(
    arena: &mut TreeArena,
    letters: &[char],
    depth: usize,
    branching: usize,
    limits: EnumLimits,
) -> Result<Vec<TreeId>, TreeEnumError> {
    enum_trees_leaf_bounded(arena, letters, depth, branching, usize::MAX, limits)
}

/// As [`enum_trees`] but only trees with at most `max_leaves` leaves.
pub fn enum_trees_leaf_bounded(
    arena: &mut TreeArena,
    letters: &[char],
    depth: usize,
    branching: usize,
    max_leaves: usize,
    limits: EnumLimits,
) -> Result<Vec<TreeId>, TreeEnumError> {
    let mut out = Vec::new();
    let end = stream_trees_leaf_bounded::<std::convert::Infallible>(
        arena,
        letters,
        depth,
        branching,
        max_leaves,
        limits,
        &mut |_, id| {
            out.push(id);
            Ok(Walk::Continue)
        },
    )
    .unwrap_or_else(|e| match e {});
    match end {
        StreamEnd::CapHit { visited } => Err(TreeEnumError::CapExceeded {
            cap: limits.max_trees,
            got: visited,
        }),
        _ => Ok(out),
    }
}

/// Streamed enumeration: the lower levels are materialized, the final
/// level is visited as it is generated, so a search can stop early
/// without paying for the full space.
pub fn stream_trees_leaf_bounded<E>(
    arena: &mut TreeArena,
    letters: &[char],
    depth: usize,
    branching: usize,
    max_leaves: usize,
    limits: EnumLimits,
    visit: &mut dyn FnMut(&mut TreeArena, TreeId) -> Result<Walk, E>,
) -> Result<StreamEnd, E> {
    stream_trees_impl(arena, letters, depth, branching, max_leaves, true, limits, visit)
}

/// As [`stream_trees_leaf_bounded`] but with set children: no node repeats
/// a (letter, subtree) pair.  Every tree is bisimilar to such a deduped
/// tree of no larger size, and the judged logic is closed under
/// bisimulation, so countermodel searches lose nothing by walking this far
/// smaller space.
pub fn stream_trees_dedup<E>(
    arena: &mut TreeArena,
    letters: &[char],
    depth: usize,
    branching: usize,
    max_leaves: usize,
    limits: EnumLimits,
    visit: &mut dyn FnMut(&mut TreeArena, TreeId) -> Result<Walk, E>,
) -> Result<StreamEnd, E> {
    stream_trees_impl(arena, letters, depth, branching, max_leaves, false, limits, visit)
}

#[allow(clippy::too_many_arguments)]
fn stream_trees_impl<E>(
    arena: &mut TreeArena,
    letters: &[char],
    depth: usize,
    branching: usize,
    max_leaves: usize,
    repeat_children: bool,
    limits: EnumLimits,
    visit: &mut dyn FnMut(&mut TreeArena, TreeId) -> Result<Walk, E>,
) -> Result<StreamEnd, E> {
    let mut letters: Vec<char> = letters.to_vec();
    letters.sort_unstable();
    letters.dedup();
    let mut visited = 0usize;
    if depth == 0 {
        let leaf = arena.leaf();
        visited += 1;
        return Ok(match visit(arena, leaf)? {
            Walk::Stop => StreamEnd::Stopped { visited },
            Walk::Continue => StreamEnd::Exhausted { visited },
        });
    }
    let mut current: Vec<TreeId> = vec![arena.leaf()];
    let mut generated = 0usize;
    let mut capped = false;
    for level in 0..depth {
        let is_last = level + 1 == depth;
        let mut items: Vec<(char, TreeId)> = Vec::with_capacity(letters.len() * current.len());
        for &c in &letters {
            for &t in &current {
                items.push((c, t));
            }
        }
        // weight-major order lets the enumeration stop scanning as soon as
        // the leaf budget is exhausted
        items.sort_unstable_by_key(|&(c, t)| (arena.leaf_count(t), c, t));
        let mut next: Vec<TreeId> = Vec::new();
        let mut seen: BTreeSet<TreeId> = BTreeSet::new();
        let mut stack: Vec<(char, TreeId)> = Vec::new();
        let mut stopped = false;
        enumerate_multisets(
            arena,
            &items,
            0,
            branching,
            max_leaves,
            repeat_children,
            &mut stack,
            &mut |arena, children| {
                let id = arena.intern(children.to_vec());
                if !seen.insert(id) {
                    return Ok(Walk::Continue);
                }
                generated += 1;
                if generated > limits.max_trees {
                    capped = true;
                    return Ok(Walk::Stop);
                }
                if is_last {
                    visited += 1;
                    match visit(arena, id)? {
                        Walk::Stop => {
                            stopped = true;
                            Ok(Walk::Stop)
                        }
                        Walk::Continue => Ok(Walk::Continue),
                    }
                } else {
                    next.push(id);
                    Ok(Walk::Continue)
                }
            },
        )?;
        if capped {
            return Ok(StreamEnd::CapHit { visited });
        }
        if stopped {
            return Ok(StreamEnd::Stopped { visited });
        }
        current = next;
    }
    Ok(StreamEnd::Exhausted { visited })
}

#[allow(clippy::too_many_arguments)]
fn enumerate_multisets<E>(
    arena: &mut TreeArena,
    items: &[(char, TreeId)],
    start: usize,
    slots_left: usize,
    leaves_left: usize,
    repeat: bool,
    stack: &mut Vec<(char, TreeId)>,
    emit: &mut impl FnMut(&mut TreeArena, &[(char, TreeId)]) -> Result<Walk, E>,
) -> Result<Walk, E> {
    if emit(arena, stack)? == Walk::Stop {
        return Ok(Walk::Stop);
    }
    if slots_left == 0 {
        return Ok(Walk::Continue);
    }
    for i in start..items.len() {
        let (c, t) = items[i];
        let weight = arena.leaf_count(t);
        if weight > leaves_left {
            // items are weight-sorted
            break;
        }
        stack.push((c, t));
        let walk = enumerate_multisets(
            arena,
            items,
            if repeat { i } else { i + 1 },
            slots_left - 1,
            leaves_left - weight,
            repeat,
            stack,
            emit,
        )?;
        stack.pop();
        if walk == Walk::Stop {
            return Ok(Walk::Stop);
        }
    }
    Ok(Walk::Continue)
}

/// Closed-form count: T(0) = 1, T(d+1) = Σ_{k ≤ b} multichoose(|Σ|·T(d), k).
pub fn tree_count(letters: usize, depth: usize, branching: usize) -> u128 {
    let mut t: u128 = 1;
    for _ in 0..depth {
        let items = letters as u128 * t;
        let mut total: u128 = 0;
        for k in 0..=branching {
            total += multichoose(items, k as u128);
        }
        t = total;
    }
    t
}

fn multichoose(n: u128, k: u128) -> u128 {
    if k == 0 {
        return 1;
    }
    if n == 0 {
        return 0;
    }
    // C(n + k - 1, k)
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..k {
        num *= n + k - 1 - i;
        den *= i + 1;
    }
    num / den
}
