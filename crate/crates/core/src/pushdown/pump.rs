//! Pumping decompositions for deterministic pushdown automata read as
//! ω-automata with Büchi acceptance on the final states.
//!
//! A machine that accepts unboundedly many prefixes of a stream passes
//! through unboundedly many stair positions, and two stairs naming the same
//! control state and top symbol let the consumed segment between them be
//! removed without affecting the rest of the run.

use crate::lang::dpda::{stair_positions, Dpda, StackSym, StateId};
use super::PushdownError;

#[derive(Debug, Clone, Copy)]
pub struct PumpOptions {
    /// Letters consumed by the first materialized trace.
    pub initial_horizon: usize,
    /// Give up once a trace of this many letters yields no repetition.
    pub max_horizon: usize,
}

impl Default for PumpOptions {
    fn default() -> Self {
        PumpOptions {
            initial_horizon: 64,
            max_horizon: 1 << 14,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PumpEvidence {
    /// Trace indices of the chosen stair pair.
    pub first_stair: usize,
    pub second_stair: usize,
    pub state: StateId,
    pub state_name: String,
    pub top: Option<StackSym>,
    /// Stack height at the first stair.
    pub stack_level: usize,
    /// Whether both stairs sit at the same stack height (an exact
    /// configuration repeat).
    pub same_level: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PumpingDecomposition {
    pub u0: String,
    pub u1: String,
    pub evidence: PumpEvidence,
}

/// Find a pumping decomposition of the run of `d` on the stream.
///
/// Exact configuration repeats at stair positions are preferred; a pair of
/// stairs with equal state and top symbol at increasing heights is used as
/// a fallback.  The trace is extended until the chosen stairs survive a
/// margin of one third of the materialized run.
pub fn pump_decompose(
    d: &Dpda,
    stream: &mut dyn FnMut(usize) -> char,
    opts: PumpOptions,
) -> Result<PumpingDecomposition, PushdownError> {
    let mut horizon = opts.initial_horizon.max(4);
    loop {
        let trace = d.run_stream(stream, horizon);
        if trace.diverged {
            return Err(PushdownError::PumpExhausted(format!(
                "run diverged on an ε-chain after consuming {} letters",
                trace.consumed
            )));
        }
        if trace.consumed < horizon {
            return Err(PushdownError::PumpExhausted(format!(
                "machine blocked after consuming {} of {} letters",
                trace.consumed, horizon
            )));
        }
        let stairs = stair_positions(&trace);
        // Only stairs in the first two thirds: the final third is the
        // margin that makes the chosen stairs trustworthy.
        let margin = trace.steps.len() * 2 / 3;
        let eligible: Vec<usize> = stairs.into_iter().filter(|&p| p <= margin).collect();
        let key = |p: usize| {
            let step = &trace.steps[p];
            (step.state, step.stack.last().copied(), step.stack.len())
        };
        let mut best: Option<(usize, usize, bool)> = None;
        'outer: for (i, &p2) in eligible.iter().enumerate() {
            for &p1 in &eligible[..i] {
                let (s1, t1, h1) = key(p1);
                let (s2, t2, h2) = key(p2);
                if s1 != s2 || t1 != t2 {
                    continue;
                }
                if trace.steps[p2].input_index <= trace.steps[p1].input_index {
                    continue;
                }
                let same_level = h1 == h2;
                if same_level {
                    best = Some((p1, p2, true));
                    break 'outer;
                }
                if best.is_none() {
                    best = Some((p1, p2, false));
                }
            }
        }
        if let Some((p1, p2, same_level)) = best {
            let cut1 = trace.steps[p1].input_index;
            let cut2 = trace.steps[p2].input_index;
            let u0: String = (0..cut1).map(|i| stream(i)).collect();
            let u1: String = (cut1..cut2).map(|i| stream(i)).collect();
            let step = &trace.steps[p1];
            return Ok(PumpingDecomposition {
                u0,
                u1,
                evidence: PumpEvidence {
                    first_stair: p1,
                    second_stair: p2,
                    state: step.state,
                    state_name: d.state_name(step.state).to_string(),
                    top: step.stack.last().copied(),
                    stack_level: step.stack.len(),
                    same_level,
                },
            });
        }
        if horizon >= opts.max_horizon {
            return Err(PushdownError::PumpExhausted(format!(
                "no repeated stair pair within {horizon} consumed letters"
            )));
        }
        horizon = (horizon * 2).min(opts.max_horizon);
    }
}

/// Rerun check: sample accepted stream prefixes `u0·u1·x` beyond the cut
/// and verify that `u0·x` is accepted as a finite word.  Returns the
/// sampled prefix lengths.
pub fn verify_pump(
    d: &Dpda,
    stream: &mut dyn FnMut(usize) -> char,
    decomposition: &PumpingDecomposition,
    samples: usize,
) -> Result<Vec<usize>, PushdownError> {
    let cut = decomposition.u0.chars().count() + decomposition.u1.chars().count();
    let mut horizon = (cut + 16).max(64);
    let accepted: Vec<usize> = loop {
        let trace = d.run_stream(stream, horizon);
        let found: Vec<usize> = trace
            .accepted_prefix_lengths(d)
            .into_iter()
            .filter(|&k| k > cut && k <= trace.consumed)
            .take(samples)
            .collect();
        if found.len() >= samples {
            break found;
        }
        if trace.diverged || trace.consumed < horizon || horizon >= 1 << 16 {
            return Err(PushdownError::PumpExhausted(format!(
                "only {} accepted prefixes beyond the cut were found",
                found.len()
            )));
        }
        horizon *= 2;
    };
    for &k in &accepted {
        let mut word = decomposition.u0.clone();
        for i in cut..k {
            word.push(stream(i));
        }
        if !d.accepts(&word) {
            return Err(PushdownError::PumpExhausted(format!(
                "rerun check failed at prefix length {k}: removing u1 loses acceptance"
            )));
        }
    }
    Ok(accepted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn single_state_all_accepting() {
        // a* with a single always-final state: the repeat is immediate.
        let d = Dpda::new(
            vec!["q".into()],
            vec!["Z".into()],
            0,
            vec![0],
            BTreeSet::from([0]),
            vec![(0, Some('a'), 0, 0, crate::lang::dpda::StackAction::Keep)],
        )
        .unwrap();
        let mut stream = |_: usize| 'a';
        let p = pump_decompose(&d, &mut stream, PumpOptions::default()).unwrap();
        assert_eq!(p.u0, "");
        assert_eq!(p.u1, "a");
        let sampled = verify_pump(&d, &mut stream, &p, 5).unwrap();
        assert_eq!(sampled.len(), 5);
    }

    #[test]
    fn cr_cycle_machine() {
        // accepts prefixes of (cr)^ω with a Büchi visit after each r
        let d = Dpda::new(
            vec!["q0".into(), "q1".into()],
            vec!["Z".into()],
            0,
            vec![0],
            BTreeSet::from([0]),
            vec![
                (0, Some('c'), 0, 1, crate::lang::dpda::StackAction::Keep),
                (1, Some('r'), 0, 0, crate::lang::dpda::StackAction::Keep),
            ],
        )
        .unwrap();
        let mut stream = |i: usize| if i % 2 == 0 { 'c' } else { 'r' };
        let p = pump_decompose(&d, &mut stream, PumpOptions::default()).unwrap();
        assert!(!p.u1.is_empty());
        assert_eq!(p.u1.len() % 2, 0, "cut must respect the cr cycle");
        verify_pump(&d, &mut stream, &p, 5).unwrap();
    }

    #[test]
    fn blocked_machine_reports_exhaustion() {
        let d = Dpda::new(
            vec!["q".into()],
            vec!["Z".into()],
            0,
            vec![0],
            BTreeSet::from([0]),
            vec![],
        )
        .unwrap();
        let mut stream = |_: usize| 'a';
        let err = pump_decompose(&d, &mut stream, PumpOptions::default()).unwrap_err();
        assert!(matches!(err, PushdownError::PumpExhausted(_)));
    }
}
