//! The extraction pipeline: rewrite a formula assumed equivalent to
//! `EF[P·$] true` into a good decomposition of P, recursing on singleton
//! annotations by letter quotients under a strictly descending measure.

use super::{
    GoodDecomposition, GoodPair, RightPart, SeparationError,
};
use crate::dnf::{complete, elim_ag, to_dnf};
use crate::formula::{elim_ew, is_epsilon_free, measure_of, Formula};
use crate::lang::LangEnv;
use crate::mc::{
    elim_wedge_ef, find_model, structurally_monotone_bounded, BoundedOracle, Bounds,
    ModelSearch, MonotonicityVerdict, SearchLimits, WedgeEfOutcome,
};
use crate::measure::{measure_gt, Measure};
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy)]
pub struct ExtractOptions {
    pub bounds: Bounds,
    pub limits: SearchLimits,
    /// Longest words tried when hunting the two cardinality-evidence
    /// members of an infinite left part.
    pub evidence_len_cap: usize,
    /// Recursion guard; the measure argument keeps real runs far below it.
    pub max_depth: usize,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions {
            bounds: Bounds::new(3, 3),
            limits: SearchLimits::default(),
            evidence_len_cap: 8,
            max_depth: 24,
        }
    }
}

/// One pipeline stage on one recursion level.
#[derive(Debug, Clone, Serialize)]
pub struct StageRecord {
    pub stage: String,
    pub trail: String,
    pub formula_before: String,
    pub formula_after: String,
    pub measure_before: Measure,
    pub measure_after: Measure,
    pub notes: Vec<String>,
}

/// A soft abort: the stage, the judgment that stayed undecided (or the
/// hypothesis that failed), and the formula reached so far.
#[derive(Debug, Clone, Serialize)]
pub struct StageReport {
    pub stage: String,
    pub trail: String,
    pub judgment: String,
    pub partial_formula: String,
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct ExtractionReport {
    pub stages: Vec<StageRecord>,
}

#[derive(Debug)]
pub enum ExtractOutcome {
    Good(GoodDecomposition),
    Aborted(StageReport),
}

#[derive(Debug)]
pub struct ExtractOutput {
    pub outcome: ExtractOutcome,
    pub report: ExtractionReport,
}

/// Run the pipeline on `f`, which the caller asserts (or has
/// bounded-checked) to be equivalent to `EF[P·$] true` for the driving P.
pub fn extract(
    f: &Formula,
    env: &mut LangEnv,
    opts: &ExtractOptions,
) -> Result<ExtractOutput, SeparationError> {
    if !f.props().is_empty() {
        return Err(SeparationError::InvalidArgument(
            "extraction runs in the proposition-free mode".into(),
        ));
    }
    let mut report = ExtractionReport::default();
    let outcome = match extract_level(f, env, opts, "", &mut report, None, 0)? {
        Ok(good) => ExtractOutcome::Good(good),
        Err(stage) => ExtractOutcome::Aborted(stage),
    };
    Ok(ExtractOutput { outcome, report })
}

type LevelResult = Result<GoodDecomposition, StageReport>;

fn extract_level(
    f: &Formula,
    env: &mut LangEnv,
    opts: &ExtractOptions,
    trail: &str,
    report: &mut ExtractionReport,
    parent_measure: Option<&Measure>,
    depth: usize,
) -> Result<LevelResult, SeparationError> {
    if depth > opts.max_depth {
        return Err(SeparationError::InvalidArgument(format!(
            "extraction recursion exceeded the guard of {} levels",
            opts.max_depth
        )));
    }
    let measure_in = measure_of(f, env)?;
    if let Some(parent) = parent_measure {
        if !measure_gt(parent, &measure_in) {
            return Err(SeparationError::MeasureNonDescent {
                trail: trail.to_string(),
                before: parent.clone(),
                after: measure_in.clone(),
            });
        }
    }
    let record = |stage: &str,
                      before: &Formula,
                      after: &Formula,
                      m_before: Measure,
                      m_after: Measure,
                      notes: Vec<String>,
                      report: &mut ExtractionReport| {
        report.stages.push(StageRecord {
            stage: stage.to_string(),
            trail: trail.to_string(),
            formula_before: before.to_string(),
            formula_after: after.to_string(),
            measure_before: m_before,
            measure_after: m_after,
            notes,
        });
    };
    let abort = |stage: &str, judgment: String, partial: &Formula| StageReport {
        stage: stage.to_string(),
        trail: trail.to_string(),
        judgment,
        partial_formula: partial.to_string(),
    };

    // ε-freeness
    let f1 = elim_ew(f, env)?;
    debug_assert!(is_epsilon_free(&f1, env)?);
    let m1 = measure_of(&f1, env)?;
    record("elim_ew", f, &f1, measure_in.clone(), m1.clone(), vec![], report);

    // distribution over modal atoms
    let d = to_dnf(&f1);
    let d_formula = d.to_formula();
    let m2 = measure_of(&d_formula, env)?;
    record("dnf", &f1, &d_formula, m1, m2.clone(), vec![], report);

    // completion
    let (completed, completion_notes) = {
        let mut oracle = BoundedOracle::new(env, opts.bounds, opts.limits);
        let out = complete(&d, &mut oracle);
        if !out.unknown_subsets.is_empty() {
            let subset = &out.unknown_subsets[0];
            let rendered: Vec<String> = subset.iter().map(|f| f.to_string()).collect();
            return Ok(Err(abort(
                "complete",
                format!(
                    "implication of subset {{{}}} undecided within bounds",
                    rendered.join(", ")
                ),
                &d_formula,
            )));
        }
        let notes = vec![format!("{} completion terms added", out.added.len())];
        (out.dnf, notes)
    };
    let completed_formula = completed.to_formula();
    let m3 = measure_of(&completed_formula, env)?;
    record(
        "complete",
        &d_formula,
        &completed_formula,
        m2,
        m3.clone(),
        completion_notes,
        report,
    );

    // structural monotonicity is a hypothesis of the AG-elimination
    match structurally_monotone_bounded(&completed_formula, env, opts.bounds, opts.limits)? {
        MonotonicityVerdict::Refuted { model, .. } => {
            return Ok(Err(abort(
                "monotonicity",
                format!(
                    "completed formula is not structurally monotone (model with {} states extends to a non-model)",
                    model.state_count()
                ),
                &completed_formula,
            )));
        }
        MonotonicityVerdict::Unknown(_) => {
            return Ok(Err(abort(
                "monotonicity",
                "monotonicity probe undecided beyond the finite fragment".into(),
                &completed_formula,
            )));
        }
        MonotonicityVerdict::MonotoneUpToBound(_) => {}
    }

    // AG-elimination
    let ag_out = {
        let mut oracle = BoundedOracle::new(env, opts.bounds, opts.limits);
        elim_ag(&completed, &mut oracle)
    };
    if ag_out.is_partial() {
        return Ok(Err(abort(
            "elim_ag",
            format!(
                "AG-validity undecided for term indices {:?}",
                ag_out.undecided
            ),
            &completed_formula,
        )));
    }
    let ag_formula = ag_out.dnf.to_formula();
    let m4 = measure_of(&ag_formula, env)?;
    record(
        "elim_ag",
        &completed_formula,
        &ag_formula,
        m3,
        m4.clone(),
        vec![format!(
            "{} terms kept, {} dropped",
            ag_out.kept, ag_out.dropped
        )],
        report,
    );

    // per-term EF-conjunction elimination
    enum Slot {
        Pending(crate::dnf::Term),
        Chosen(Formula),
    }
    let mut slots: Vec<Slot> = ag_out.dnf.terms.iter().cloned().map(Slot::Pending).collect();
    let mut wedge_notes = Vec::new();
    for i in 0..slots.len() {
        let term = match &slots[i] {
            Slot::Pending(t) => t.clone(),
            Slot::Chosen(_) => continue,
        };
        if !term.lits.is_empty() {
            return Ok(Err(abort(
                "wedge_ef",
                "literal conjuncts cannot occur in proposition-free extraction".into(),
                &ag_formula,
            )));
        }
        let efs: Vec<Formula> = term.efs.iter().cloned().collect();
        if efs.is_empty() {
            return Ok(Err(abort(
                "wedge_ef",
                "a term reduced to the empty conjunction; the input cannot be EF-shaped".into(),
                &ag_formula,
            )));
        }
        let chosen = if efs.len() == 1 {
            efs[0].clone()
        } else {
            let delta = Formula::or_all(
                slots
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, slot)| match slot {
                        Slot::Pending(t) => t.to_formula(),
                        Slot::Chosen(f) => f.clone(),
                    })
                    .collect(),
            );
            match elim_wedge_ef(&delta, &efs, f, env, opts.bounds, opts.limits)? {
                WedgeEfOutcome::Index(k, _) => {
                    wedge_notes.push(format!("term {i}: kept EF-conjunct {k}"));
                    efs[k].clone()
                }
                WedgeEfOutcome::Unknown(indices) => {
                    return Ok(Err(abort(
                        "wedge_ef",
                        format!("single-term equations undecided for conjuncts {indices:?}"),
                        &ag_formula,
                    )));
                }
                WedgeEfOutcome::HypothesisRefuted(m) => {
                    return Ok(Err(abort(
                        "wedge_ef",
                        format!(
                            "hypothesis equation refuted on a structure with {} states",
                            m.state_count()
                        ),
                        &ag_formula,
                    )));
                }
            }
        };
        slots[i] = Slot::Chosen(chosen);
    }
    let chosen_terms: Vec<Formula> = slots
        .iter()
        .map(|s| match s {
            Slot::Chosen(f) => f.clone(),
            Slot::Pending(_) => unreachable!("every slot is processed"),
        })
        .collect();
    let wedge_formula = Formula::or_all(chosen_terms.clone());
    let m5 = measure_of(&wedge_formula, env)?;
    record(
        "wedge_ef",
        &ag_formula,
        &wedge_formula,
        m4,
        m5.clone(),
        wedge_notes,
        report,
    );

    // $-split of the outermost annotations, dropping empty ones
    let mut final_terms: Vec<(String, Formula)> = Vec::new();
    let mut dollar_notes: Vec<String> = Vec::new();
    for term in &chosen_terms {
        let (lang, psi) = match term {
            Formula::Ef(l, body) => (l.clone(), (**body).clone()),
            other => {
                return Ok(Err(abort(
                    "elim_dollar",
                    format!("expected an EF-formula, found {other}"),
                    &wedge_formula,
                )));
            }
        };
        // side condition of the rewrite: ψ is satisfiable; a model within
        // the annotation-depth bound exists whenever one exists at all
        let sat_bounds = match Bounds::derived(&[&psi], env)? {
            Some(derived) => Bounds {
                depth: opts.bounds.depth.max(derived.depth),
                branching: opts.bounds.branching.max(derived.branching),
            },
            None => opts.bounds,
        };
        match find_model(&psi, env, sat_bounds, opts.limits)? {
            ModelSearch::Found(_) => {}
            ModelSearch::NoneWithinBounds(_) => {
                return Ok(Err(abort(
                    "elim_dollar",
                    format!("no model of {psi} within bounds (side condition)"),
                    &wedge_formula,
                )));
            }
        }
        let split: Vec<(String, Formula)> = if env.get(&lang)?.uses_dollar() {
            let (l1, l2) = env.split_of(&lang)?;
            vec![(l1, psi.clone()), (l2, Formula::True)]
        } else {
            vec![(lang.clone(), psi.clone())]
        };
        for (l, body) in split {
            if env.get(&l)?.is_empty() {
                dollar_notes.push(format!("dropped empty annotation {l}"));
            } else {
                final_terms.push((l, body));
            }
        }
    }
    let phi_prime = Formula::or_all(
        final_terms
            .iter()
            .map(|(l, body)| Formula::ef(l.clone(), body.clone()))
            .collect(),
    );
    let measure_prime = measure_of(&phi_prime, env)?;
    if measure_gt(&measure_prime, &measure_in) {
        return Ok(Err(abort(
            "elim_dollar",
            "weak measure bound violated by the rewritten disjunction".into(),
            &phi_prime,
        )));
    }
    record(
        "elim_dollar",
        &wedge_formula,
        &phi_prime,
        m5,
        measure_prime.clone(),
        dollar_notes,
        report,
    );

    // classification of the annotations
    let mut pairs: Vec<GoodPair> = Vec::new();
    let mut singleton_letters: BTreeMap<char, Vec<usize>> = BTreeMap::new();
    let mut classify_notes: Vec<String> = Vec::new();
    for (idx, (lang, psi)) in final_terms.iter().enumerate() {
        let handle = env.get(lang)?.clone();
        match handle.norm() {
            crate::measure::OmegaPlusOne::Omega => {
                let (left_name, right) = if handle.uses_dollar() {
                    (env.strip_dollar_of(lang)?, RightPart::Finite([String::new()].into()))
                } else {
                    (lang.clone(), RightPart::FormulaLang(psi.clone()))
                };
                let left = env.get(&left_name)?.clone();
                let evidence = find_two_words(&left, opts.evidence_len_cap)?;
                match evidence {
                    Some(pair) => {
                        classify_notes
                            .push(format!("{left_name}: infinite part, evidence {pair:?}"));
                        pairs.push(GoodPair {
                            left,
                            right,
                            evidence: Some(pair),
                            singleton_flagged: false,
                        });
                    }
                    None => {
                        return Ok(Err(abort(
                            "classify",
                            format!(
                                "no two member words of {left_name} up to length {}",
                                opts.evidence_len_cap
                            ),
                            &phi_prime,
                        )));
                    }
                }
            }
            crate::measure::OmegaPlusOne::Fin(len) => {
                let len = len as usize;
                if len > opts.evidence_len_cap + 1 {
                    return Ok(Err(abort(
                        "classify",
                        format!("singleton word of {lang} exceeds the evidence cap"),
                        &phi_prime,
                    )));
                }
                let word = handle
                    .enumerate(len)?
                    .pop()
                    .expect("norm Fin guarantees the word");
                if word.ends_with(crate::alphabet::DOLLAR) {
                    // $-terminated singletons contribute directly, flagged,
                    // and are never quotient targets
                    let left_name = env.strip_dollar_of(lang)?;
                    let left = env.get(&left_name)?.clone();
                    classify_notes.push(format!(
                        "{lang}: $-terminated singleton {{{word}}} contributes directly (flagged)"
                    ));
                    pairs.push(GoodPair {
                        left,
                        right: RightPart::Finite([String::new()].into()),
                        evidence: None,
                        singleton_flagged: true,
                    });
                } else {
                    let first = word.chars().next().expect("ε-free singleton is nonempty");
                    classify_notes.push(format!("{lang}: singleton {{{word}}} → quotient by {first}"));
                    singleton_letters.entry(first).or_default().push(idx);
                }
            }
        }
    }
    record(
        "classify",
        &phi_prime,
        &phi_prime,
        measure_prime.clone(),
        measure_prime.clone(),
        classify_notes,
        report,
    );

    // recursion by quotient letters
    for (&letter, _) in &singleton_letters {
        let mut quotient_terms: Vec<Formula> = Vec::new();
        for (lang, psi) in &final_terms {
            let handle = env.get(lang)?;
            if handle.norm() != crate::measure::OmegaPlusOne::Omega {
                // singleton: only same-letter singletons survive the
                // quotient, and $-terminated ones are excluded by the
                // flagging decision
                let word = handle.enumerate(opts.evidence_len_cap + 1)?.pop();
                if let Some(w) = word {
                    if w.ends_with(crate::alphabet::DOLLAR) || !w.starts_with(letter) {
                        continue;
                    }
                }
            }
            let (q_name, diverged) = env.quotient_of(lang, letter)?;
            if diverged {
                // a divergent ε-chain makes the quotient empty; recorded on
                // the handle, nothing to add
                continue;
            }
            if env.get(&q_name)?.is_empty() {
                continue;
            }
            quotient_terms.push(Formula::ef(q_name, psi.clone()));
        }
        let phi_a = Formula::or_all(quotient_terms);
        let child = extract_level(
            &phi_a,
            env,
            opts,
            &format!("{trail}{letter}"),
            report,
            Some(&measure_prime),
            depth + 1,
        )?;
        match child {
            Err(stage) => return Ok(Err(stage)),
            Ok(sub) => {
                for pair in sub.pairs {
                    pairs.push(GoodPair {
                        left: pair.left.prefix_letter(letter),
                        right: pair.right,
                        evidence: pair
                            .evidence
                            .map(|(a, b)| (format!("{letter}{a}"), format!("{letter}{b}"))),
                        singleton_flagged: pair.singleton_flagged,
                    });
                }
            }
        }
    }

    Ok(Ok(GoodDecomposition { pairs }))
}

fn find_two_words(
    handle: &crate::lang::LanguageHandle,
    cap: usize,
) -> Result<Option<(String, String)>, SeparationError> {
    let words = handle.enumerate(cap)?;
    let mut iter = words.into_iter();
    match (iter.next(), iter.next()) {
        (Some(a), Some(b)) => Ok(Some((a, b))),
        _ => Ok(None),
    }
}
