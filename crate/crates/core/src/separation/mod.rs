//! The palindrome separation laboratory: formula languages, the
//! $-elimination rewrite, extraction of formulas into good decompositions,
//! and the word-combinatorial machinery behind the palindrome refutations.

mod demo;
mod extract;

pub use demo::{
    pump_machine_report, separation_demo, CandidateReport, DemoConfig, DemoReport, DemoStream,
    PumpReport,
};
pub use extract::{
    extract, ExtractOptions, ExtractOutcome, ExtractOutput, ExtractionReport, StageRecord,
    StageReport,
};

use crate::alphabet::{is_palindrome, reverse_word, words_up_to};
use crate::formula::Formula;
use crate::lang::{LangEnv, LangError, LanguageHandle, ENUMERATE_CAP};
use crate::lts::path_structure_dollar;
use crate::mc::{check, find_model, Bounds, McError, ModelSearch, SearchLimits};
use crate::measure::{measure_gt, Measure};
use serde::Serialize;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SeparationError {
    #[error(transparent)]
    Lang(#[from] LangError),
    #[error(transparent)]
    Mc(#[from] McError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("measure failed to descend strictly at trail `{trail}`: {before} vs {after}")]
    MeasureNonDescent {
        trail: String,
        before: Measure,
        after: Measure,
    },
    #[error("catalog is empty")]
    EmptyCatalog,
}

/// Lang(φ) restricted to words of length at most `max_len`: the words `w`
/// over Σ whose marked path π_{w$} models φ.
pub fn lang_of_formula(
    f: &Formula,
    env: &LangEnv,
    max_len: usize,
) -> Result<Vec<String>, SeparationError> {
    if max_len > ENUMERATE_CAP {
        return Err(LangError::EnumerateCap(max_len).into());
    }
    let mut out = Vec::new();
    for w in env.alphabet().words_up_to(max_len) {
        if check(&path_structure_dollar(&w), f, env)? {
            out.push(w);
        }
    }
    Ok(out)
}

/// Result of the $-elimination rewrite on one outermost EF-formula.
#[derive(Debug, Clone)]
pub struct ElimDollarOutcome {
    /// δ ∨ EF[L₁] ψ ∨ EF[L₂] true
    pub formula: Formula,
    pub l1: String,
    pub l2: String,
    /// L₂ = ∅ (the new true-term is ⊥-equivalent; kept but flagged).
    pub l2_empty: bool,
    /// Model of ψ found by the bounded search, certifying the side
    /// condition; `None` flags a hypothesis violation.
    pub psi_model: Option<crate::lts::Structure>,
    /// ¬(μ(result) > μ(input)), the weak measure bound.
    pub measure_ok: bool,
}

/// Split the annotation of `EF[l0] ψ` against the marker: the rewrite
/// behind the last extraction stage.  The environment gains the derived
/// `…__s1`/`…__s2` languages.
pub fn elim_dollar(
    delta: &Formula,
    l0: &str,
    psi: &Formula,
    env: &mut LangEnv,
    bounds: Bounds,
    limits: SearchLimits,
) -> Result<ElimDollarOutcome, SeparationError> {
    let before = Formula::or(delta.clone(), Formula::ef(l0, psi.clone()));
    let measure_before = crate::formula::measure_of(&before, env)?;
    let (l1, l2) = env.split_of(l0)?;
    let formula = Formula::or(
        delta.clone(),
        Formula::or(
            Formula::ef(l1.clone(), psi.clone()),
            Formula::ef(l2.clone(), Formula::True),
        ),
    );
    let l2_empty = env.get(&l2)?.is_empty();
    let psi_model = match find_model(psi, env, bounds, limits)? {
        ModelSearch::Found(m) => Some(*m),
        ModelSearch::NoneWithinBounds(_) => None,
    };
    let measure_after = crate::formula::measure_of(&formula, env)?;
    let measure_ok = !measure_gt(&measure_after, &measure_before);
    Ok(ElimDollarOutcome {
        formula,
        l1,
        l2,
        l2_empty,
        psi_model,
        measure_ok,
    })
}

/// The strictly prefix-ordered witness family: w₀ = vᴿ and
/// w_{i+1} = wᵢ 1 0ⁱ 1 wᵢᴿ vᴿ.  Every v·wᵢ is a palindrome.
pub fn witness_family(v: &str, count: usize) -> Result<Vec<String>, SeparationError> {
    let mut out = Vec::with_capacity(count);
    let mut current = reverse_word(v);
    let v_rev = reverse_word(v);
    for i in 0..count {
        let probe = format!("{v}{current}");
        if !is_palindrome(&probe) {
            return Err(SeparationError::HypothesisViolated(format!(
                "witness w_{i} = {current} is not a palindrome after prefixing v"
            )));
        }
        if let Some(prev) = out.last() {
            let prev: &String = prev;
            if !current.starts_with(prev.as_str()) || current == *prev {
                return Err(SeparationError::HypothesisViolated(format!(
                    "witness family is not strictly prefix-ordered at index {i}"
                )));
            }
        }
        out.push(current.clone());
        let next = format!(
            "{current}1{zeros}1{rev}{v_rev}",
            zeros = "0".repeat(i),
            rev = reverse_word(&current)
        );
        current = next;
    }
    Ok(out)
}

/// Letter stream for the limit word of the witness family.
pub struct WitnessLimitStream {
    v: String,
    cache: String,
    next_index: usize,
}

impl WitnessLimitStream {
    pub fn new(v: &str) -> WitnessLimitStream {
        WitnessLimitStream {
            v: v.to_string(),
            cache: reverse_word(v),
            next_index: 0,
        }
    }

    pub fn letter(&mut self, i: usize) -> char {
        while self.cache.len() <= i {
            let rev = reverse_word(&self.cache);
            let v_rev = reverse_word(&self.v);
            self.cache = format!(
                "{}1{}1{rev}{v_rev}",
                self.cache,
                "0".repeat(self.next_index)
            );
            self.next_index += 1;
        }
        self.cache.as_bytes()[i] as char
    }
}

/// True iff the sample is linearly ordered by the prefix relation.
pub fn prefix_ordered(sample: &BTreeSet<String>) -> bool {
    let mut words: Vec<&String> = sample.iter().collect();
    words.sort_by_key(|w| w.len());
    words
        .windows(2)
        .all(|pair| pair[1].starts_with(pair[0].as_str()))
}

/// Decomposition of an infinite right factor against two prefix-ordered
/// left words: û = u₀∖u₁ and every sampled w splits as û^{N_w}·ŵ with a
/// residual bounded by |u₀| + |û|.
#[derive(Debug, Clone, Serialize)]
pub struct BoundRResult {
    pub uhat: String,
    /// The finite residual collection Û.
    pub residuals: BTreeSet<String>,
    /// (w, N_w, ŵ) per sampled word.
    pub per_word: Vec<(String, usize, String)>,
}

pub fn bound_r_decompose(
    u0: &str,
    u1: &str,
    r_sample: &BTreeSet<String>,
) -> Result<BoundRResult, SeparationError> {
    if !u1.starts_with(u0) || u1 == u0 {
        return Err(SeparationError::InvalidArgument(format!(
            "`{u0}` must be a proper prefix of `{u1}`"
        )));
    }
    for w in r_sample {
        for l in [u0, u1] {
            let probe = format!("{l}{w}");
            if !is_palindrome(&probe) {
                return Err(SeparationError::HypothesisViolated(format!(
                    "L·R ⊈ palindromes: {probe} fails"
                )));
            }
        }
    }
    let uhat = &u1[u0.len()..];
    let mut residuals = BTreeSet::new();
    let mut per_word = Vec::new();
    for w in r_sample {
        let n_w = if w.len() >= u0.len() {
            (w.len() - u0.len()) / uhat.len()
        } else {
            0
        };
        let split = n_w * uhat.len();
        let (head, residual) = w.split_at(split.min(w.len()));
        if !head.chars().eq(uhat.chars().cycle().take(head.len())) {
            return Err(SeparationError::HypothesisViolated(format!(
                "û^{n_w} is not a prefix of {w}"
            )));
        }
        let r_w = residual.len();
        if r_w > u0.len() + uhat.len() {
            return Err(SeparationError::HypothesisViolated(format!(
                "residual of {w} exceeds |u0| + |û|"
            )));
        }
        debug_assert_eq!(format!("{}{}", uhat.repeat(n_w), residual), *w);
        residuals.insert(residual.to_string());
        per_word.push((w.clone(), n_w, residual.to_string()));
    }
    Ok(BoundRResult {
        uhat: uhat.to_string(),
        residuals,
        per_word,
    })
}

/// A word that is no prefix of any word in ⋃ᵢ uᵢ₀ uᵢ₁* uᵢ₂* uᵢ₃, found by
/// the three-stage escape construction.
pub fn orthogonal_word(
    letters: &[char],
    quads: &[(String, String, String, String)],
) -> Result<String, SeparationError> {
    if letters.len() < 2 {
        return Err(SeparationError::InvalidArgument(
            "orthogonal words need an alphabet of size at least two".into(),
        ));
    }
    let mut letters: Vec<char> = letters.to_vec();
    letters.sort_unstable();
    letters.dedup();

    // stage 1: escape the paths u₀·u₁^ω
    let w0 = shortest_extension("", &letters, &mut |w| {
        quads
            .iter()
            .all(|(u0, u1, _, _)| !prefix_of_pump(w, u0, &[u1]))
    })?;
    // stage 2: escape u₀·u₁^j·u₂^ω
    let w1 = shortest_extension(&w0, &letters, &mut |w| {
        quads
            .iter()
            .all(|(u0, u1, u2, _)| !prefix_of_pump(w, u0, &[u1, u2]))
    })?;
    // stage 3: escape the finite words u₀·u₁^j·u₂^k·u₃
    let w = shortest_extension(&w1, &letters, &mut |w| {
        quads
            .iter()
            .all(|(u0, u1, u2, u3)| !prefix_of_quad(w, u0, u1, u2, u3))
    })?;
    Ok(w)
}

/// Shortest extension of `base` (in shortlex order, length ≥ 1) passing the
/// predicate.
fn shortest_extension(
    base: &str,
    letters: &[char],
    good: &mut dyn FnMut(&str) -> bool,
) -> Result<String, SeparationError> {
    if !base.is_empty() && good(base) {
        return Ok(base.to_string());
    }
    let mut layer = vec![base.to_string()];
    for _ in 0..64 {
        let mut next = Vec::with_capacity(layer.len() * letters.len());
        for w in &layer {
            for &c in letters {
                let mut e = w.clone();
                e.push(c);
                if good(&e) {
                    return Ok(e);
                }
                next.push(e);
            }
        }
        layer = next;
    }
    Err(SeparationError::InvalidArgument(
        "escape search exceeded depth 64".into(),
    ))
}

/// Is `w` a prefix of u₀ · p₁^{j₁} · … · pₖ^{jₖ} · (last component
/// repeated to ω) for some exponents?  The components are tried greedily:
/// each pᵢ may repeat any number of times before moving on.
fn prefix_of_pump(w: &str, u0: &str, pumps: &[&String]) -> bool {
    fn walk(w: &[u8], pumps: &[&String]) -> bool {
        if w.is_empty() {
            return true;
        }
        match pumps.split_first() {
            None => false,
            Some((p, rest)) => {
                if p.is_empty() {
                    return walk(w, rest);
                }
                // consume zero or more copies of p, trying to continue
                let pb = p.as_bytes();
                let mut offset = 0usize;
                loop {
                    let remaining = &w[offset..];
                    if rest.is_empty() {
                        // last component: w must align with p^ω
                        let ok = remaining
                            .iter()
                            .enumerate()
                            .all(|(i, &c)| c == pb[i % pb.len()]);
                        if ok {
                            return true;
                        }
                    } else if walk(&w[offset..], rest) {
                        return true;
                    }
                    // consume one more copy (or the prefix that fits)
                    let take = pb.len().min(w.len() - offset);
                    if w[offset..offset + take] != pb[..take] {
                        return false;
                    }
                    if take < pb.len() {
                        // w ends inside this copy: w is a prefix of the pump
                        return true;
                    }
                    offset += take;
                    if offset == w.len() {
                        return true;
                    }
                }
            }
        }
    }
    match w.as_bytes().strip_prefix(u0.as_bytes()) {
        Some(rest) => walk(rest, pumps),
        None => u0.as_bytes().starts_with(w.as_bytes()),
    }
}

fn prefix_of_quad(w: &str, u0: &str, u1: &str, u2: &str, u3: &str) -> bool {
    let max_j = if u1.is_empty() {
        0
    } else {
        w.len() / u1.len() + 1
    };
    for j in 0..=max_j {
        let head = format!("{u0}{}", u1.repeat(j));
        let max_k = if u2.is_empty() {
            0
        } else {
            (w.len().saturating_sub(head.len())) / u2.len() + 1
        };
        for k in 0..=max_k {
            let full = format!("{head}{}{u3}", u2.repeat(k));
            if full.as_bytes().starts_with(w.as_bytes()) {
                return true;
            }
        }
    }
    false
}

/// Brute-force validation: some word of the quad language with length up to
/// |w| + max|u₃| + slack has `w` as a prefix.  Returns the violating word.
pub fn validate_orthogonal(
    quads: &[(String, String, String, String)],
    w: &str,
    slack: usize,
) -> Option<String> {
    let max_u3 = quads.iter().map(|q| q.3.len()).max().unwrap_or(0);
    let bound = w.len() + max_u3 + slack;
    for (u0, u1, u2, u3) in quads {
        let max_j = if u1.is_empty() {
            0
        } else {
            bound.saturating_sub(u0.len() + u3.len()) / u1.len()
        };
        for j in 0..=max_j {
            let head = format!("{u0}{}", u1.repeat(j));
            if head.len() + u3.len() > bound {
                break;
            }
            let max_k = if u2.is_empty() {
                0
            } else {
                bound.saturating_sub(head.len() + u3.len()) / u2.len()
            };
            for k in 0..=max_k {
                let full = format!("{head}{}{u3}", u2.repeat(k));
                if full.len() > bound {
                    break;
                }
                if full.starts_with(w) {
                    return Some(full);
                }
            }
        }
    }
    None
}

/// The right factor of a good pair: a finite set or the language of a
/// recorded formula, enumerated on demand.
#[derive(Debug, Clone)]
pub enum RightPart {
    Finite(BTreeSet<String>),
    FormulaLang(Formula),
}

impl RightPart {
    pub fn describe(&self) -> String {
        match self {
            RightPart::Finite(words) => {
                let rendered: Vec<String> = words
                    .iter()
                    .map(|w| crate::alphabet::display_word(w).to_string())
                    .collect();
                format!("{{{}}}", rendered.join(", "))
            }
            RightPart::FormulaLang(f) => format!("Lang({f})"),
        }
    }

    pub fn enumerate(
        &self,
        env: &LangEnv,
        max_len: usize,
    ) -> Result<Vec<String>, SeparationError> {
        match self {
            RightPart::Finite(words) => Ok(words
                .iter()
                .filter(|w| w.chars().count() <= max_len)
                .cloned()
                .collect()),
            RightPart::FormulaLang(f) => lang_of_formula(f, env, max_len),
        }
    }
}

/// One pair (Lᵢ, Rᵢ) of a decomposition, with two distinct member words of
/// Lᵢ as cardinality evidence.  `singleton_flagged` marks the $-terminated
/// singleton contributions that the extraction reports instead of
/// recursing on.
#[derive(Debug, Clone)]
pub struct GoodPair {
    pub left: LanguageHandle,
    pub right: RightPart,
    pub evidence: Option<(String, String)>,
    pub singleton_flagged: bool,
}

/// A finite family {(Lᵢ, Rᵢ)} meant to witness ⋃ Lᵢ·Rᵢ = target.
#[derive(Debug, Clone, Default)]
pub struct GoodDecomposition {
    pub pairs: Vec<GoodPair>,
}

impl GoodDecomposition {
    /// ⋃ᵢ LᵢRᵢ restricted to words of length at most `max_len`.
    pub fn bounded_language(
        &self,
        env: &LangEnv,
        max_len: usize,
    ) -> Result<BTreeSet<String>, SeparationError> {
        let mut out = BTreeSet::new();
        for pair in &self.pairs {
            let lefts = pair.left.enumerate(max_len)?;
            let rights = pair.right.enumerate(env, max_len)?;
            for l in &lefts {
                for r in &rights {
                    if l.chars().count() + r.chars().count() <= max_len {
                        out.insert(format!("{l}{r}"));
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Verdict of the bounded goodness check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum GoodCheckOutcome {
    /// Union and target agree on all words up to the bound.
    EqualUpTo(usize),
    /// Structural defect: missing or broken cardinality evidence.
    StructuralIssue(String),
    /// First length-ordered disagreement word.
    Counterexample {
        word: String,
        in_union: bool,
        in_target: bool,
    },
}

/// Validate the structural invariants and test ⋃ LᵢRᵢ = target on all
/// words of length at most `max_len`.
pub fn good_check(
    g: &GoodDecomposition,
    target: &LanguageHandle,
    env: &LangEnv,
    max_len: usize,
) -> Result<GoodCheckOutcome, SeparationError> {
    for (idx, pair) in g.pairs.iter().enumerate() {
        if pair.singleton_flagged {
            continue;
        }
        match &pair.evidence {
            None => {
                return Ok(GoodCheckOutcome::StructuralIssue(format!(
                    "pair {idx} has no cardinality evidence"
                )))
            }
            Some((a, b)) => {
                if a == b {
                    return Ok(GoodCheckOutcome::StructuralIssue(format!(
                        "pair {idx} evidence words are equal"
                    )));
                }
                if !pair.left.member(a) || !pair.left.member(b) {
                    return Ok(GoodCheckOutcome::StructuralIssue(format!(
                        "pair {idx} evidence words are not members of the left language"
                    )));
                }
            }
        }
    }
    let union = g.bounded_language(env, max_len)?;
    let target_words: BTreeSet<String> = target.enumerate(max_len)?.into_iter().collect();
    let letters: BTreeSet<char> = union
        .iter()
        .chain(target_words.iter())
        .flat_map(|w| w.chars())
        .collect();
    let letters: Vec<char> = letters.into_iter().collect();
    for w in words_up_to(&letters, max_len) {
        let in_union = union.contains(&w);
        let in_target = target_words.contains(&w);
        if in_union != in_target {
            return Ok(GoodCheckOutcome::Counterexample {
                word: w,
                in_union,
                in_target,
            });
        }
    }
    Ok(GoodCheckOutcome::EqualUpTo(max_len))
}

/// The reference handle Pal·$ used by the demonstration driver.
pub fn reference_formula(env: &mut LangEnv) -> Result<Formula, SeparationError> {
    let name = "PAL_DOLLAR";
    if !env.contains(name) {
        let alphabet = env.alphabet().clone();
        env.insert(LanguageHandle::palindromes_dollar(name, &alphabet))?;
    }
    Ok(Formula::ef(name, Formula::True))
}
