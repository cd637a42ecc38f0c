//! Benchmarks for the hot paths: pre* saturation, the measure order,
//! pushdown runs, CYK membership, tree enumeration and bounded
//! equivalence.

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use pdl_core::alphabet::Alphabet;
use pdl_core::catalog::{counter_machine, Gen};
use pdl_core::formula::Formula;
use pdl_core::lang::cfg::Cfg;
use pdl_core::lang::{LangEnv, LanguageHandle};
use pdl_core::lts::trees::{enum_trees, EnumLimits, TreeArena};
use pdl_core::mc::{equivalent_bounded, Bounds, SearchLimits};
use pdl_core::measure::measure_gt;
use pdl_core::pushdown::{prestar, PAutomaton, WorklistOrder};

fn bench_prestar(c: &mut Criterion) {
    let mut gen = Gen::new(42);
    let systems: Vec<_> = (0..8)
        .map(|_| {
            let pds = gen.pushdown_system(4, 3, 8);
            let target = PAutomaton::from_configs(pds.state_count(), &[(0, vec![0])]);
            (pds, target)
        })
        .collect();
    c.bench_function("prestar_saturation", |b| {
        b.iter(|| {
            for (pds, target) in &systems {
                black_box(prestar(pds, target, WorklistOrder::Fifo).unwrap());
            }
        })
    });
}

fn bench_measure(c: &mut Criterion) {
    let mut gen = Gen::new(7);
    let measures: Vec<_> = (0..64).map(|_| gen.measure(4, 4, 5)).collect();
    c.bench_function("measure_gt_batch", |b| {
        b.iter(|| {
            let mut hits = 0;
            for m in &measures {
                for n in &measures {
                    if measure_gt(m, n) {
                        hits += 1;
                    }
                }
            }
            black_box(hits)
        })
    });
}

fn bench_dpda_run(c: &mut Criterion) {
    let machine = counter_machine();
    let word = format!("{}{}", "c".repeat(256), "r".repeat(256));
    c.bench_function("dpda_member_512", |b| {
        b.iter(|| black_box(machine.accepts(&word)))
    });
}

fn bench_cyk(c: &mut Criterion) {
    let grammar = Cfg::palindromes(&['0', '1']);
    let word = "0110".repeat(8); // 32 letters, non-palindrome tail checks too
    c.bench_function("cyk_palindrome_32", |b| {
        b.iter(|| black_box(grammar.accepts(&word)))
    });
}

fn bench_tree_enumeration(c: &mut Criterion) {
    c.bench_function("enum_trees_d2_b3", |b| {
        b.iter(|| {
            let mut arena = TreeArena::new();
            let trees = enum_trees(
                &mut arena,
                &['a', 'b'],
                2,
                3,
                EnumLimits { max_trees: 1_000_000 },
            )
            .unwrap();
            black_box(trees.len())
        })
    });
}

fn bench_equivalence(c: &mut Criterion) {
    let mut env = LangEnv::new(Alphabet::new(['a', 'b']).unwrap());
    env.insert(LanguageHandle::finite("A", [String::from("a")]))
        .unwrap();
    env.insert(LanguageHandle::finite("B", [String::from("b")]))
        .unwrap();
    env.insert(LanguageHandle::finite("AB", [String::from("ab")]))
        .unwrap();
    let nested = Formula::ef("A", Formula::ef("B", Formula::True));
    let flat = Formula::ef("AB", Formula::True);
    let bounds = Bounds::derived(&[&nested, &flat], &env).unwrap().unwrap();
    c.bench_function("equivalence_nested_vs_flat", |b| {
        b.iter(|| {
            black_box(
                equivalent_bounded(&nested, &flat, &env, bounds, SearchLimits::default())
                    .unwrap()
                    .is_valid(),
            )
        })
    });
}

criterion_group!(
    benches,
    bench_prestar,
    bench_measure,
    bench_dpda_run,
    bench_cyk,
    bench_tree_enumeration,
    bench_equivalence
);
criterion_main!(benches);
