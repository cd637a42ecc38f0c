//! Builtin machines, demo candidates and seeded input generators used by
//! the demonstration driver, the test suites and the benchmarks.

use crate::alphabet::Alphabet;
use crate::formula::Formula;
use crate::lang::dpda::{Dpda, StackAction};
use crate::lang::{LangEnv, LanguageHandle};
use crate::lts::{Lts, Structure};
use crate::measure::{Measure, OmegaPlusOne, Seq};
use crate::pushdown::PushdownSystem;
use crate::separation::{DemoConfig, DemoStream, ExtractOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeSet, VecDeque};

fn dpda(spec: &str) -> Dpda {
    Dpda::parse(spec).expect("builtin machine specification is well formed")
}

/// {cⁿrⁿ | n ≥ 1} with final-state acceptance.
pub fn counter_machine() -> Dpda {
    dpda(
        "states q0 qp qr qa\n\
         stack Z A\n\
         initial q0 Z\n\
         final qa\n\
         q0, c, Z -> qp, PUSH A\n\
         qp, c, A -> qp, PUSH A\n\
         qp, r, A -> qr, POP\n\
         qr, r, A -> qr, POP\n\
         qr, _, Z -> qa, KEEP\n",
    )
}

/// {cⁿ$rⁿ | n ≥ 1}.
pub fn counter_machine_dollar() -> Dpda {
    dpda(
        "states q0 qp qm qr qa\n\
         stack Z A\n\
         initial q0 Z\n\
         final qa\n\
         q0, c, Z -> qp, PUSH A\n\
         qp, c, A -> qp, PUSH A\n\
         qp, $, A -> qm, KEEP\n\
         qm, r, A -> qr, POP\n\
         qr, r, A -> qr, POP\n\
         qr, _, Z -> qa, KEEP\n",
    )
}

/// The even-palindrome approximation {ε} ∪ {0ᵏ 1 1 0ᵏ}, marked: the
/// machine accepts w$ for w in that set.
pub fn pal_approx_dollar() -> Dpda {
    dpda(
        "states s0 s1 s2 acc fin\n\
         stack B Y Z\n\
         initial s0 B\n\
         final fin\n\
         s0, $, B -> fin, KEEP\n\
         s0, 0, B -> s0, PUSH Y\n\
         s0, 0, Y -> s0, PUSH Z\n\
         s0, 0, Z -> s0, PUSH Z\n\
         s0, 1, B -> s1, KEEP\n\
         s0, 1, Y -> s1, KEEP\n\
         s0, 1, Z -> s1, KEEP\n\
         s1, 1, B -> acc, KEEP\n\
         s1, 1, Y -> s2, KEEP\n\
         s1, 1, Z -> s2, KEEP\n\
         s2, 0, Z -> s2, POP\n\
         s2, 0, Y -> acc, POP\n\
         acc, $, B -> fin, KEEP\n",
    )
}

/// Accepts every word over {0,1}.
pub fn all_words_acceptor() -> Dpda {
    dpda(
        "states q\nstack Z\ninitial q Z\nfinal q\n\
         q, 0, Z -> q, KEEP\nq, 1, Z -> q, KEEP\n",
    )
}

/// Accepts the even-length words over {0,1}.
pub fn even_length_acceptor() -> Dpda {
    dpda(
        "states e o\nstack Z\ninitial e Z\nfinal e\n\
         e, 0, Z -> o, KEEP\ne, 1, Z -> o, KEEP\n\
         o, 0, Z -> e, KEEP\no, 1, Z -> e, KEEP\n",
    )
}

/// Accepts the words ending in 1.
pub fn ends_in_one_acceptor() -> Dpda {
    dpda(
        "states s z n\nstack Z\ninitial s Z\nfinal n\n\
         s, 0, Z -> z, KEEP\ns, 1, Z -> n, KEEP\n\
         z, 0, Z -> z, KEEP\nz, 1, Z -> n, KEEP\n\
         n, 0, Z -> z, KEEP\nn, 1, Z -> n, KEEP\n",
    )
}

/// Accepts words whose unmatched-zero counter is empty: pushes on 0, pops
/// on 1, final exactly at the stack bottom.
pub fn floor_counter() -> Dpda {
    dpda(
        "states q p\nstack B Y Z\ninitial q B\nfinal q\n\
         q, 0, B -> p, PUSH Y\n\
         q, 1, B -> q, KEEP\n\
         p, 0, Y -> p, PUSH Z\n\
         p, 0, Z -> p, PUSH Z\n\
         p, 1, Z -> p, POP\n\
         p, 1, Y -> q, POP\n",
    )
}

/// Accepts the prefixes of (cr)^ω with a final state after each r.
pub fn cr_cycle_acceptor() -> Dpda {
    dpda(
        "states q0 q1\nstack Z\ninitial q0 Z\nfinal q0\n\
         q0, c, Z -> q1, KEEP\nq1, r, Z -> q0, KEEP\n",
    )
}

/// Environment and configuration for the builtin palindrome demo.
pub fn builtin_demo(good_check_len: usize) -> (LangEnv, DemoConfig) {
    let mut env = LangEnv::new(Alphabet::binary());
    env.insert(LanguageHandle::from_regex("ALLW", "(0|1)*$").expect("builtin regex"))
        .expect("fresh name");
    env.insert(LanguageHandle::dpda("APPROX", pal_approx_dollar()))
        .expect("fresh name");
    env.insert(LanguageHandle::finite(
        "SMALLPAL",
        ["$", "0$", "1$", "00$", "11$"].iter().map(|s| s.to_string()),
    ))
    .expect("fresh name");
    let candidates = vec![
        (
            "all-words".to_string(),
            Formula::ef("ALLW", Formula::True),
        ),
        (
            "pal-approx".to_string(),
            Formula::ef("APPROX", Formula::True),
        ),
        (
            "short-palindromes".to_string(),
            Formula::ef("SMALLPAL", Formula::True),
        ),
    ];
    let limit = DemoStream::WitnessLimit { v: String::new() };
    let machines = vec![
        (
            "all-words".to_string(),
            all_words_acceptor(),
            limit.clone(),
            String::new(),
        ),
        (
            "even-length".to_string(),
            even_length_acceptor(),
            limit.clone(),
            String::new(),
        ),
        (
            "ends-in-1".to_string(),
            ends_in_one_acceptor(),
            limit.clone(),
            String::new(),
        ),
        (
            "floor-counter".to_string(),
            floor_counter(),
            limit,
            String::new(),
        ),
        (
            "cr-cycle".to_string(),
            cr_cycle_acceptor(),
            DemoStream::Periodic("cr".into()),
            String::new(),
        ),
    ];
    let config = DemoConfig {
        candidates,
        machines,
        good_check_len,
        extract_opts: ExtractOptions::default(),
        pump_samples: 5,
    };
    (env, config)
}

/// Deterministic input generator; everything is seeded.
pub struct Gen {
    rng: ChaCha8Rng,
}

impl Gen {
    pub fn new(seed: u64) -> Gen {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn usize_in(&mut self, lo: usize, hi: usize) -> usize {
        self.rng.gen_range(lo..=hi)
    }

    pub fn bool(&mut self) -> bool {
        self.rng.gen_bool(0.5)
    }

    pub fn word(&mut self, letters: &[char], max_len: usize) -> String {
        let len = self.rng.gen_range(0..=max_len);
        (0..len)
            .map(|_| letters[self.rng.gen_range(0..letters.len())])
            .collect()
    }

    pub fn nonempty_word(&mut self, letters: &[char], max_len: usize) -> String {
        let len = self.rng.gen_range(1..=max_len.max(1));
        (0..len)
            .map(|_| letters[self.rng.gen_range(0..letters.len())])
            .collect()
    }

    pub fn finite_language(
        &mut self,
        letters: &[char],
        max_word_len: usize,
        max_words: usize,
    ) -> BTreeSet<String> {
        let count = self.rng.gen_range(0..=max_words);
        (0..count).map(|_| self.word(letters, max_word_len)).collect()
    }

    /// A random proposition-free formula; annotation names are drawn from
    /// `langs`.
    pub fn formula(&mut self, langs: &[String], budget: usize) -> Formula {
        if budget == 0 || langs.is_empty() {
            return if self.bool() {
                Formula::True
            } else {
                Formula::False
            };
        }
        match self.rng.gen_range(0..10) {
            0 => Formula::True,
            1 => Formula::False,
            2 | 3 => Formula::or(
                self.formula(langs, budget / 2),
                self.formula(langs, budget / 2),
            ),
            4 | 5 => Formula::and(
                self.formula(langs, budget / 2),
                self.formula(langs, budget / 2),
            ),
            6 | 7 | 8 => {
                let lang = langs[self.rng.gen_range(0..langs.len())].clone();
                Formula::ef(lang, self.formula(langs, budget - 1))
            }
            _ => {
                let lang = langs[self.rng.gen_range(0..langs.len())].clone();
                Formula::ag(lang, self.formula(langs, budget - 1))
            }
        }
    }

    pub fn sequence(&mut self, max_len: usize, max_value: u64) -> Seq {
        let len = self.rng.gen_range(0..=max_len);
        (0..len)
            .map(|_| {
                if self.rng.gen_bool(0.2) {
                    OmegaPlusOne::Omega
                } else {
                    OmegaPlusOne::Fin(self.rng.gen_range(0..=max_value))
                }
            })
            .collect()
    }

    pub fn measure(&mut self, max_entries: usize, max_len: usize, max_value: u64) -> Measure {
        let count = self.rng.gen_range(0..=max_entries);
        Measure::from_entries((0..count).map(|_| self.sequence(max_len, max_value)))
    }

    /// A random connected acyclic structure rooted at state 0.
    pub fn acyclic_structure(
        &mut self,
        max_states: usize,
        letters: &[char],
        props: &[String],
    ) -> Structure {
        let n = self.rng.gen_range(1..=max_states.max(1));
        let state_names = (0..n).map(|i| format!("s{i}")).collect();
        let mut edges = BTreeSet::new();
        // spanning edges keep everything reachable from the root
        for j in 1..n {
            let i = self.rng.gen_range(0..j);
            let c = letters[self.rng.gen_range(0..letters.len())];
            edges.insert((i, c, j));
        }
        let extra = self.rng.gen_range(0..=n);
        for _ in 0..extra {
            let j = self.rng.gen_range(0..n);
            if j == 0 {
                continue;
            }
            let i = self.rng.gen_range(0..j);
            let c = letters[self.rng.gen_range(0..letters.len())];
            edges.insert((i, c, j));
        }
        let labels = (0..n)
            .map(|_| {
                props
                    .iter()
                    .filter(|_| self.rng.gen_bool(0.4))
                    .cloned()
                    .collect()
            })
            .collect();
        Structure {
            lts: Lts {
                state_names,
                edges,
                labels,
            },
            root: 0,
        }
    }

    /// A random structure with at least one cycle through the root part.
    pub fn cyclic_structure(
        &mut self,
        max_states: usize,
        letters: &[char],
        props: &[String],
    ) -> Structure {
        let mut m = self.acyclic_structure(max_states, letters, props);
        let n = m.lts.state_count();
        let from = self.rng.gen_range(0..n);
        let c = letters[self.rng.gen_range(0..letters.len())];
        let back = self.rng.gen_range(0..=from);
        m.lts.edges.insert((from, c, back));
        m
    }

    /// A random pushdown system with replacement words of length ≤ 2.
    pub fn pushdown_system(
        &mut self,
        states: usize,
        syms: usize,
        rules: usize,
    ) -> PushdownSystem {
        let state_names = (0..states).map(|i| format!("p{i}")).collect();
        let stack_names = (0..syms).map(|i| format!("G{i}")).collect();
        let mut rule_list = Vec::new();
        for _ in 0..rules {
            let from = self.rng.gen_range(0..states);
            let top = self.rng.gen_range(0..syms);
            let to = self.rng.gen_range(0..states);
            let len = self.rng.gen_range(0..=2);
            let push = (0..len).map(|_| self.rng.gen_range(0..syms)).collect();
            rule_list.push((from, top, to, push));
        }
        PushdownSystem::new(state_names, stack_names, rule_list)
    }

    pub fn quad_set(
        &mut self,
        letters: &[char],
        count: usize,
        max_word: usize,
    ) -> Vec<(String, String, String, String)> {
        (0..count)
            .map(|_| {
                (
                    self.word(letters, max_word),
                    self.word(letters, max_word),
                    self.word(letters, max_word),
                    self.word(letters, max_word),
                )
            })
            .collect()
    }

    /// A random DPDA over the given letters, built from a random stack
    /// discipline; always deterministic by construction.
    pub fn dpda(&mut self, letters: &[char], states: usize, syms: usize) -> Dpda {
        let states = states.max(1);
        let syms = syms.max(1);
        let state_names: Vec<String> = (0..states).map(|i| format!("q{i}")).collect();
        let stack_names: Vec<String> = (0..syms).map(|i| format!("S{i}")).collect();
        let mut rules = Vec::new();
        for q in 0..states {
            for g in 0..syms {
                if self.rng.gen_bool(0.15) {
                    // ε-rule, exclusive for this (state, top)
                    let to = self.rng.gen_range(0..states);
                    rules.push((q, None, g, to, self.random_action(syms)));
                    continue;
                }
                for &c in letters {
                    if self.rng.gen_bool(0.7) {
                        let to = self.rng.gen_range(0..states);
                        rules.push((q, Some(c), g, to, self.random_action(syms)));
                    }
                }
            }
        }
        let finals: BTreeSet<usize> = (0..states).filter(|_| self.rng.gen_bool(0.4)).collect();
        Dpda::new(state_names, stack_names, 0, vec![0], finals, rules)
            .expect("construction is deterministic by loop structure")
    }

    fn random_action(&mut self, syms: usize) -> StackAction {
        match self.rng.gen_range(0..4) {
            0 => StackAction::Pop,
            1 => StackAction::Keep,
            _ => {
                let len = self.rng.gen_range(1..=2);
                StackAction::Push((0..len).map(|_| self.rng.gen_range(0..syms)).collect())
            }
        }
    }
}

/// Breadth-first enumeration used as the reference for the tree-count
/// recurrence in tests.
pub fn bfs_words(letters: &[char], max_len: usize) -> Vec<String> {
    let mut out = Vec::new();
    let mut queue: VecDeque<String> = VecDeque::from([String::new()]);
    while let Some(w) = queue.pop_front() {
        out.push(w.clone());
        if w.chars().count() < max_len {
            for &c in letters {
                queue.push_back(format!("{w}{c}"));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_machines_do_what_they_say() {
        assert!(counter_machine().accepts("ccrr"));
        assert!(counter_machine_dollar().accepts("cc$rr"));
        let approx = pal_approx_dollar();
        assert!(approx.accepts("$"));
        assert!(approx.accepts("11$"));
        assert!(approx.accepts("0110$"));
        assert!(approx.accepts("0011000$") == false);
        assert!(!approx.accepts("0$"));
        assert!(floor_counter().accepts("0101"));
        assert!(floor_counter().accepts("11"));
        assert!(!floor_counter().accepts("00"));
        assert!(floor_counter().accepts(""));
        assert!(ends_in_one_acceptor().accepts("001"));
        assert!(!ends_in_one_acceptor().accepts("10"));
        assert!(even_length_acceptor().accepts("01"));
        assert!(!even_length_acceptor().accepts("0"));
    }

    #[test]
    fn generators_are_deterministic() {
        let mut a = Gen::new(7);
        let mut b = Gen::new(7);
        assert_eq!(a.word(&['0', '1'], 5), b.word(&['0', '1'], 5));
        assert_eq!(a.measure(4, 3, 5), b.measure(4, 3, 5));
        let langs = vec!["L".to_string()];
        assert_eq!(a.formula(&langs, 3), b.formula(&langs, 3));
    }

    #[test]
    fn random_structures_are_well_formed() {
        let mut g = Gen::new(11);
        for _ in 0..20 {
            let m = g.acyclic_structure(8, &['a', 'b'], &[]);
            assert!(m.lts.is_acyclic());
            let c = g.cyclic_structure(6, &['a', 'b'], &[]);
            assert_eq!(c.lts.labels.len(), c.lts.state_count());
        }
    }
}
