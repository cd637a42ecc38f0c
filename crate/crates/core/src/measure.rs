//! The termination measure: finite sets of sequences over ω+1 with a
//! length-dominant lexicographic order on sequences and the induced
//! replacement order on sets.

use serde::Serialize;
use std::collections::BTreeSet;
use std::fmt;

/// An element of ω+1 = {0, 1, 2, …, ω}.
///
/// The derived order places `Omega` strictly above every `Fin(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OmegaPlusOne {
    Fin(u64),
    Omega,
}

impl fmt::Display for OmegaPlusOne {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OmegaPlusOne::Fin(n) => write!(f, "{n}"),
            OmegaPlusOne::Omega => write!(f, "\u{03c9}"),
        }
    }
}

impl Serialize for OmegaPlusOne {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// A finite sequence over ω+1.  The empty sequence is written `nil`.
pub type Seq = Vec<OmegaPlusOne>;

/// Length-dominant lexicographic order: `u > v` iff `|u| > |v|`, or the
/// lengths agree and `u` beats `v` at the first differing position.
pub fn lex_gt(u: &[OmegaPlusOne], v: &[OmegaPlusOne]) -> bool {
    if u.len() != v.len() {
        return u.len() > v.len();
    }
    for (a, b) in u.iter().zip(v.iter()) {
        if a != b {
            return a > b;
        }
    }
    false
}

pub fn lex_ge(u: &[OmegaPlusOne], v: &[OmegaPlusOne]) -> bool {
    u == v || lex_gt(u, v)
}

/// A finite, duplicate-free set of sequences over ω+1.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Measure {
    entries: BTreeSet<Seq>,
}

impl Measure {
    pub fn empty() -> Self {
        Measure::default()
    }

    /// The measure {nil} of a literal or a constant.
    pub fn nil_singleton() -> Self {
        let mut entries = BTreeSet::new();
        entries.insert(Vec::new());
        Measure { entries }
    }

    pub fn from_entries(entries: impl IntoIterator<Item = Seq>) -> Self {
        Measure {
            entries: entries.into_iter().collect(),
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = &Seq> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn union(&self, other: &Measure) -> Measure {
        Measure {
            entries: self.entries.union(&other.entries).cloned().collect(),
        }
    }

    /// Cons a value onto every entry.
    pub fn cons(&self, head: OmegaPlusOne) -> Measure {
        Measure {
            entries: self
                .entries
                .iter()
                .map(|seq| {
                    let mut e = Vec::with_capacity(seq.len() + 1);
                    e.push(head);
                    e.extend_from_slice(seq);
                    e
                })
                .collect(),
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, seq) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for (j, v) in seq.iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{v}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "}}")
    }
}

impl Serialize for Measure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(self.entries.len()))?;
        for entry in &self.entries {
            seq.serialize_element(entry)?;
        }
        seq.end()
    }
}

/// The replacement order on measures.
///
/// `M > N` iff a nonempty `X ⊆ M` can be removed and replaced by a set `Y`
/// of sequences each lex-dominated by some removed one, yielding `N`.
/// Decided through the set differences: `M ≠ N`, `M ∖ N ≠ ∅`, and every
/// `y ∈ N ∖ M` is dominated by some `x ∈ M ∖ N`.
pub fn measure_gt(m: &Measure, n: &Measure) -> bool {
    if m == n {
        return false;
    }
    let m_minus_n: Vec<&Seq> = m.entries.difference(&n.entries).collect();
    if m_minus_n.is_empty() {
        return false;
    }
    n.entries
        .difference(&m.entries)
        .all(|y| m_minus_n.iter().any(|x| lex_gt(x, y)))
}

pub fn measure_ge(m: &Measure, n: &Measure) -> bool {
    m == n || measure_gt(m, n)
}

/// Reference decision by exhaustive search over removal/replacement
/// witnesses `(X, Y)`, straight from the definition.  Exponential; only
/// meant for cross-validation on small measures.
pub fn measure_gt_by_definition(m: &Measure, n: &Measure) -> bool {
    let m_entries: Vec<&Seq> = m.entries.iter().collect();
    let n_entries: Vec<&Seq> = n.entries.iter().collect();
    // X ranges over nonempty subsets of M, Y over subsets of N.
    for x_mask in 1u64..(1 << m_entries.len()) {
        let x: BTreeSet<&Seq> = m_entries
            .iter()
            .enumerate()
            .filter(|(i, _)| x_mask & (1 << i) != 0)
            .map(|(_, s)| *s)
            .collect();
        let m_without_x: BTreeSet<&Seq> = m_entries
            .iter()
            .filter(|s| !x.contains(*s))
            .copied()
            .collect();
        for y_mask in 0u64..(1 << n_entries.len()) {
            let y: BTreeSet<&Seq> = n_entries
                .iter()
                .enumerate()
                .filter(|(i, _)| y_mask & (1 << i) != 0)
                .map(|(_, s)| *s)
                .collect();
            let rebuilt: BTreeSet<&Seq> = m_without_x.union(&y).copied().collect();
            let n_set: BTreeSet<&Seq> = n_entries.iter().copied().collect();
            if rebuilt != n_set {
                continue;
            }
            if y.iter().all(|yy| x.iter().any(|xx| lex_gt(xx, yy))) {
                return true;
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use OmegaPlusOne::{Fin, Omega};

    fn m(entries: &[&[OmegaPlusOne]]) -> Measure {
        Measure::from_entries(entries.iter().map(|s| s.to_vec()))
    }

    #[test]
    fn omega_tops_everything() {
        assert!(Omega > Fin(1_000_000));
        assert!(Fin(5) > Fin(4));
        assert!(lex_gt(&[Omega], &[Fin(5)]));
    }

    #[test]
    fn lex_is_length_dominant() {
        // A longer sequence beats a shorter one regardless of values.
        assert!(lex_gt(&[Fin(1), Fin(0)], &[Fin(5)]));
        assert!(!lex_gt(&[Fin(5)], &[Fin(1), Fin(0)]));
        assert!(!lex_gt(&[Fin(2)], &[Fin(2)]));
        assert!(lex_gt(&[Fin(2), Omega], &[Fin(2), Fin(7)]));
    }

    #[test]
    fn replacement_order_examples() {
        // {[ω]} > {[2],[3]}: X = {[ω]}, Y = {[2],[3]}.
        assert!(measure_gt(&m(&[&[Omega]]), &m(&[&[Fin(2)], &[Fin(3)]])));
        // {nil} > {}: X = {nil}, Y = ∅.
        assert!(measure_gt(&Measure::nil_singleton(), &Measure::empty()));
        // Strictness.
        let a = m(&[&[Fin(1)], &[Omega, Fin(0)]]);
        assert!(!measure_gt(&a, &a));
    }

    #[test]
    fn replacement_order_agrees_with_definition_on_samples() {
        let pool: Vec<Measure> = vec![
            Measure::empty(),
            Measure::nil_singleton(),
            m(&[&[Omega]]),
            m(&[&[Fin(2)], &[Fin(3)]]),
            m(&[&[Fin(2), Fin(1)]]),
            m(&[&[Fin(0)], &[Fin(1)], &[Fin(2)]]),
            m(&[&[Omega, Omega]]),
            m(&[&[Fin(3)], &[Omega]]),
        ];
        for a in &pool {
            for b in &pool {
                assert_eq!(
                    measure_gt(a, b),
                    measure_gt_by_definition(a, b),
                    "mismatch for {a} vs {b}"
                );
            }
        }
    }
}
