//! Disjunctive normal form over modal atoms, completion, and the
//! elimination of outermost AG-conjunctions.
//!
//! EF- and AG-formulas are treated as atoms; literals are carried as a
//! third conjunct kind so the module also works outside the
//! proposition-free mode the extraction pipeline runs in.  Terms and
//! conjunct sets are kept in a canonical order, which makes completion and
//! the measure well defined up to associativity and commutativity.

use crate::formula::Formula;
use std::collections::BTreeSet;
use std::fmt;

/// Three-valued oracle answer.  `Unknown` is data, not failure: the
/// callers record which judgments stayed undecided.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleAnswer {
    Valid,
    Refuted,
    Unknown,
}

/// Bounded validity judge used by completion and AG-elimination.
pub trait ValidityOracle {
    /// ⊨ (⋀ antecedents) → consequent
    fn implication_valid(&mut self, antecedents: &[Formula], consequent: &Formula) -> OracleAnswer;

    /// ⊨ f
    fn formula_valid(&mut self, f: &Formula) -> OracleAnswer {
        self.implication_valid(&[], f)
    }
}

/// One DNF term: a conjunction of literals, AG-atoms and EF-atoms.
/// The empty term denotes `true`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Term {
    pub lits: BTreeSet<(String, bool)>,
    pub ags: BTreeSet<Formula>,
    pub efs: BTreeSet<Formula>,
}

impl Term {
    pub fn is_empty(&self) -> bool {
        self.lits.is_empty() && self.ags.is_empty() && self.efs.is_empty()
    }

    fn merge(&self, other: &Term) -> Term {
        Term {
            lits: self.lits.union(&other.lits).cloned().collect(),
            ags: self.ags.union(&other.ags).cloned().collect(),
            efs: self.efs.union(&other.efs).cloned().collect(),
        }
    }

    pub fn conjuncts(&self) -> Vec<Formula> {
        let mut parts: Vec<Formula> = Vec::new();
        for (prop, negated) in &self.lits {
            parts.push(Formula::Lit {
                prop: prop.clone(),
                negated: *negated,
            });
        }
        parts.extend(self.ags.iter().cloned());
        parts.extend(self.efs.iter().cloned());
        parts
    }

    pub fn to_formula(&self) -> Formula {
        Formula::and_all(self.conjuncts())
    }

    /// The AG-part α of the term as one conjunction.
    pub fn ag_part(&self) -> Formula {
        Formula::and_all(self.ags.iter().cloned().collect())
    }

    /// The term with the AG-part dropped.
    pub fn without_ags(&self) -> Term {
        Term {
            lits: self.lits.clone(),
            ags: BTreeSet::new(),
            efs: self.efs.clone(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_formula())
    }
}

/// Canonical disjunction of terms; the empty disjunction denotes `false`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DnfFormula {
    pub terms: BTreeSet<Term>,
}

impl DnfFormula {
    pub fn to_formula(&self) -> Formula {
        Formula::or_all(self.terms.iter().map(|t| t.to_formula()).collect())
    }

    /// All distinct EF-conjuncts across the terms (the set Ψ used by
    /// completion).
    pub fn ef_conjuncts(&self) -> Vec<Formula> {
        let set: BTreeSet<Formula> = self
            .terms
            .iter()
            .flat_map(|t| t.efs.iter().cloned())
            .collect();
        set.into_iter().collect()
    }
}

impl fmt::Display for DnfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_formula())
    }
}

/// Distribute a formula over EF/AG atoms into DNF.  Terms containing a
/// `false` conjunct are dropped; `true` conjuncts vanish.  Requires an
/// ε-free input to produce an ε-free DNF (the caller checks, since
/// ε-freeness needs the language environment).
pub fn to_dnf(f: &Formula) -> DnfFormula {
    let mut terms = BTreeSet::new();
    for term in dnf_terms(f) {
        terms.extend(term);
    }
    DnfFormula { terms }
}

/// Returns `None` for a falsified branch, `Some(term)` otherwise.
fn dnf_terms(f: &Formula) -> Vec<Option<Term>> {
    match f {
        Formula::False => vec![None],
        Formula::True => vec![Some(Term::default())],
        Formula::Lit { prop, negated } => {
            let mut t = Term::default();
            t.lits.insert((prop.clone(), *negated));
            vec![Some(t)]
        }
        Formula::Ef(_, _) => {
            let mut t = Term::default();
            t.efs.insert(f.clone());
            vec![Some(t)]
        }
        Formula::Ag(_, _) => {
            let mut t = Term::default();
            t.ags.insert(f.clone());
            vec![Some(t)]
        }
        Formula::Or(a, b) => {
            let mut out = dnf_terms(a);
            out.extend(dnf_terms(b));
            out
        }
        Formula::And(a, b) => {
            let left = dnf_terms(a);
            let right = dnf_terms(b);
            let mut out = Vec::with_capacity(left.len() * right.len());
            for l in &left {
                for r in &right {
                    out.push(match (l, r) {
                        (Some(x), Some(y)) => Some(x.merge(y)),
                        _ => None,
                    });
                }
            }
            out
        }
    }
}

/// Result of completion: the completed DNF plus the subsets whose
/// implication judgment stayed undecided (omitted from the result).
#[derive(Debug, Clone)]
pub struct CompletionOutcome {
    pub dnf: DnfFormula,
    pub added: Vec<Term>,
    pub unknown_subsets: Vec<Vec<Formula>>,
}

/// Completion: for every nonempty subset Ψ' of the EF-conjuncts whose
/// implication `⋀Ψ' → ϑ` the oracle certifies, add ⋀Ψ' as a new AG-free
/// term.
///
/// Subsets covering the EF-part of some term without AG-conjuncts or
/// literals imply that term outright, so those skip the oracle.  The empty
/// subset is excluded: its conjunction is `true` with measure {nil}, which
/// the measure of the input need not subsume.
pub fn complete(d: &DnfFormula, oracle: &mut dyn ValidityOracle) -> CompletionOutcome {
    let psi = d.ef_conjuncts();
    let goal = d.to_formula();
    let mut out = d.clone();
    let mut added = Vec::new();
    let mut unknown_subsets = Vec::new();
    let pure_ef_terms: Vec<&Term> = d
        .terms
        .iter()
        .filter(|t| t.ags.is_empty() && t.lits.is_empty())
        .collect();
    for mask in 1u64..(1u64 << psi.len()) {
        let subset: Vec<Formula> = psi
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, f)| f.clone())
            .collect();
        let structurally_valid = pure_ef_terms
            .iter()
            .any(|t| t.efs.iter().all(|e| subset.contains(e)));
        let answer = if structurally_valid {
            OracleAnswer::Valid
        } else {
            oracle.implication_valid(&subset, &goal)
        };
        match answer {
            OracleAnswer::Valid => {
                let term = Term {
                    lits: BTreeSet::new(),
                    ags: BTreeSet::new(),
                    efs: subset.into_iter().collect(),
                };
                if out.terms.insert(term.clone()) {
                    added.push(term);
                }
            }
            OracleAnswer::Refuted => {}
            OracleAnswer::Unknown => unknown_subsets.push(subset),
        }
    }
    CompletionOutcome {
        dnf: out,
        added,
        unknown_subsets,
    }
}

/// Result of AG-elimination.  Terms whose AG-part stayed undecided are
/// dropped from the DNF but reported, making the result partial.
#[derive(Debug, Clone)]
pub struct ElimAgOutcome {
    pub dnf: DnfFormula,
    pub kept: usize,
    pub dropped: usize,
    /// Indices (in canonical term order of the input) whose AG-validity
    /// judgment was UNKNOWN.
    pub undecided: Vec<usize>,
}

impl ElimAgOutcome {
    pub fn is_partial(&self) -> bool {
        !self.undecided.is_empty()
    }
}

/// Keep exactly the terms whose AG-part is a certified tautology,
/// dropping the AG-part.  Requires a complete input DNF; the empty
/// AG-conjunction counts as valid.
pub fn elim_ag(d: &DnfFormula, oracle: &mut dyn ValidityOracle) -> ElimAgOutcome {
    let mut out = DnfFormula::default();
    let mut kept = 0;
    let mut dropped = 0;
    let mut undecided = Vec::new();
    for (idx, term) in d.terms.iter().enumerate() {
        if term.ags.is_empty() {
            out.terms.insert(term.clone());
            kept += 1;
            continue;
        }
        match oracle.formula_valid(&term.ag_part()) {
            OracleAnswer::Valid => {
                out.terms.insert(term.without_ags());
                kept += 1;
            }
            OracleAnswer::Refuted => {
                dropped += 1;
            }
            OracleAnswer::Unknown => {
                undecided.push(idx);
            }
        }
    }
    ElimAgOutcome {
        dnf: out,
        kept,
        dropped,
        undecided,
    }
}
