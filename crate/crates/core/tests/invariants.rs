//! Cross-module invariants from the design contracts: backend agreement on
//! derived handles, EF/AG duality, bound-escalation soundness, shared-root
//! sums, and norm/enumerate coherence.

use pdl_core::alphabet::{words_up_to, Alphabet};
use pdl_core::catalog::{counter_machine, Gen};
use pdl_core::formula::Formula;
use pdl_core::lang::{LangEnv, LanguageHandle};
use pdl_core::lts::{oplus, path_structure, path_structure_dollar};
use pdl_core::mc::{check, sat_states, validity, Bounds, SearchLimits, Verdict3};
use pdl_core::measure::OmegaPlusOne;
use std::collections::BTreeSet;

fn fin(name: &str, words: &[&str]) -> LanguageHandle {
    LanguageHandle::finite(name, words.iter().map(|w| w.to_string()))
}

/// enumerate(derived, n) equals the set-theoretic definition applied to
/// enumerate(source, n + slack) across backends.
#[test]
fn derived_handles_agree_with_set_definitions() {
    let sources: Vec<LanguageHandle> = vec![
        fin("F", &["", "a", "ab", "ba", "aab"]),
        LanguageHandle::from_regex("R", "(a|b)*a").unwrap(),
        LanguageHandle::from_regex("R2", "a*|b a").unwrap(),
        LanguageHandle::palindromes("P", ['a', 'b']),
        LanguageHandle::dpda("D", counter_machine()),
    ];
    let n = 5;
    for src in &sources {
        let base: BTreeSet<String> = src.enumerate(n + 1).unwrap().into_iter().collect();
        // ε-removal
        let ne = src.remove_epsilon();
        let got: BTreeSet<String> = ne.enumerate(n).unwrap().into_iter().collect();
        let expect: BTreeSet<String> = base
            .iter()
            .filter(|w| !w.is_empty() && w.chars().count() <= n)
            .cloned()
            .collect();
        assert_eq!(got, expect, "ε-removal mismatch for {}", src.name());
        // left quotients by each letter
        for a in src.letters().iter().copied() {
            let (q, _) = src.left_quotient_letter(a);
            let got: BTreeSet<String> = q.enumerate(n).unwrap().into_iter().collect();
            let expect: BTreeSet<String> = base
                .iter()
                .filter_map(|w| w.strip_prefix(a))
                .filter(|v| v.chars().count() <= n)
                .map(|v| v.to_string())
                .collect();
            assert_eq!(got, expect, "quotient by {a} mismatch for {}", src.name());
        }
        // intersection with a regular language
        let pattern = pdl_core::lang::nfa::regex_to_nfa("a(a|b|c|r)*|_").unwrap();
        let inter = src.intersect_regular(&pattern);
        let got: BTreeSet<String> = inter.enumerate(n).unwrap().into_iter().collect();
        let expect: BTreeSet<String> = base
            .iter()
            .filter(|w| (w.is_empty() || w.starts_with('a')) && w.chars().count() <= n)
            .cloned()
            .collect();
        assert_eq!(got, expect, "intersection mismatch for {}", src.name());
    }
}

/// lang_norm = Fin(k) forces a singleton of length k; ω means never
/// exactly one word at any bound.
#[test]
fn norm_agrees_with_enumerate() {
    let handles = vec![
        fin("S", &["ab"]),
        fin("E", &[]),
        fin("M", &["a", "b"]),
        LanguageHandle::from_regex("R", "ab|ab").unwrap(),
        LanguageHandle::from_regex("I", "a b*").unwrap(),
        LanguageHandle::dpda("D", counter_machine()),
        LanguageHandle::palindromes("P", ['a', 'b']),
    ];
    for h in handles {
        match h.norm() {
            OmegaPlusOne::Fin(k) => {
                let words = h.enumerate(k as usize).unwrap();
                assert_eq!(words.len(), 1, "{}", h.name());
                assert_eq!(words[0].chars().count() as u64, k);
            }
            OmegaPlusOne::Omega => {
                for bound in 0..=8usize {
                    let count = h.enumerate(bound).unwrap().len();
                    assert!(count != 1 || h.enumerate(8).unwrap().len() >= 2, "{}", h.name());
                }
            }
        }
    }
}

/// NNF negation for closed proposition-free formulas (test-side oracle).
fn negate(f: &Formula) -> Formula {
    match f {
        Formula::False => Formula::True,
        Formula::True => Formula::False,
        Formula::Lit { .. } => unreachable!("closed corpus"),
        Formula::Or(a, b) => Formula::and(negate(a), negate(b)),
        Formula::And(a, b) => Formula::or(negate(a), negate(b)),
        Formula::Ef(l, body) => Formula::ag(l.clone(), negate(body)),
        Formula::Ag(l, body) => Formula::ef(l.clone(), negate(body)),
    }
}

/// s ⊨ AG[L]φ iff s ⊭ EF[L]¬φ on every sampled structure.
#[test]
fn ef_ag_duality() {
    let mut env = LangEnv::new(Alphabet::new(['a', 'b']).unwrap());
    env.insert(fin("A", &["a"])).unwrap();
    env.insert(fin("AB", &["ab", "b"])).unwrap();
    env.insert(fin("E", &[])).unwrap();
    let bodies = [
        Formula::True,
        Formula::False,
        Formula::ef("A", Formula::True),
        Formula::ag("AB", Formula::False),
    ];
    let mut gen = Gen::new(0xD0);
    for _ in 0..40 {
        let m = gen.cyclic_structure(6, &['a', 'b'], &[]);
        for lang in ["A", "AB", "E"] {
            for body in &bodies {
                let ag = Formula::ag(lang, body.clone());
                let ef_neg = Formula::ef(lang, negate(body));
                let sat_ag = sat_states(&m.lts, &ag, &env).unwrap();
                let sat_ef = sat_states(&m.lts, &ef_neg, &env).unwrap();
                for s in 0..m.lts.state_count() {
                    assert_eq!(
                        sat_ag.contains(&s),
                        !sat_ef.contains(&s),
                        "duality broken at state {s} for AG[{lang}]{body}"
                    );
                }
            }
        }
    }
}

/// Bound escalation never flips VALID verdicts to refuted, and the
/// finite-language verdicts are stable above the derived bounds.
#[test]
fn validity_is_stable_under_escalation() {
    let mut env = LangEnv::new(Alphabet::new(['a', 'b']).unwrap());
    env.insert(fin("A", &["a"])).unwrap();
    env.insert(fin("EA", &["", "a"])).unwrap();
    env.insert(fin("U", &["a", "b"])).unwrap();
    env.insert(fin("E", &[])).unwrap();
    let corpus = [
        Formula::ag("E", Formula::False),
        Formula::or(
            Formula::ag("A", Formula::False),
            Formula::ef("A", Formula::True),
        ),
        Formula::ef("EA", Formula::True),
        Formula::ag("U", Formula::True),
        Formula::ef("A", Formula::False),
        Formula::and(
            Formula::ag("A", Formula::True),
            Formula::or(Formula::ag("U", Formula::False), Formula::True),
        ),
    ];
    let limits = SearchLimits::default();
    for f in &corpus {
        let derived = Bounds::derived(&[f], &env).unwrap().expect("finite corpus");
        let base = validity(f, &env, derived, limits).unwrap();
        let escalated = validity(
            f,
            &env,
            Bounds::new(derived.depth + 1, derived.branching + 1),
            limits,
        )
        .unwrap();
        match (&base, &escalated) {
            (Verdict3::Valid(_), Verdict3::Valid(_)) => {}
            (Verdict3::Refuted(_), Verdict3::Refuted(_)) => {}
            (a, b) => panic!("verdict flipped for {f}: {} vs {}", a.name(), b.name()),
        }
    }
}

/// π_w ⊨ EF[{w}] true, and the shared-root sum preserves satisfaction of
/// ε-free EF-formulas from every summand.
#[test]
fn oplus_preserves_epsilon_free_ef() {
    let mut env = LangEnv::new(Alphabet::new(['a', 'b']).unwrap());
    env.insert(fin("W1", &["ab"])).unwrap();
    env.insert(fin("W2", &["ba"])).unwrap();
    env.insert(fin("W3", &["aab", "b"])).unwrap();
    let words = ["ab", "ba", "aab", "b"];
    for w in words {
        let handle_name = format!("SELF{w}");
        env.insert(fin(&handle_name, &[w])).unwrap();
        let m = path_structure(w);
        assert!(check(&m, &Formula::ef(handle_name, Formula::True), &env).unwrap());
    }
    let summands = [path_structure("ab"), path_structure("ba"), path_structure("aab")];
    let combined = oplus(&summands);
    for (lang, expected_holds) in [("W1", true), ("W2", true), ("W3", true)] {
        let f = Formula::ef(lang, Formula::True);
        for (i, m) in summands.iter().enumerate() {
            let holds = check(m, &f, &env).unwrap();
            if holds {
                assert!(
                    check(&combined, &f, &env).unwrap(),
                    "⊕ lost EF[{lang}] from summand {i}"
                );
            }
        }
        let _ = expected_holds;
    }
}

/// Formulas over marked paths: Lang(EF[L·$] true) membership matches the
/// checker on π_{w$} word by word.
#[test]
fn marked_paths_realize_membership() {
    let mut env = LangEnv::new(Alphabet::binary());
    env.insert(LanguageHandle::palindromes_dollar(
        "PALD",
        &Alphabet::binary(),
    ))
    .unwrap();
    let f = Formula::ef("PALD", Formula::True);
    for w in words_up_to(&['0', '1'], 5) {
        let holds = check(&path_structure_dollar(&w), &f, &env).unwrap();
        assert_eq!(holds, pdl_core::alphabet::is_palindrome(&w), "word {w}");
    }
}
