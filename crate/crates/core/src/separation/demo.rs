//! End-to-end demonstration driver: extraction attempts on candidate
//! formulas, goodness refutations against the palindromes, and pumping
//! evidence on a catalog of ω-read pushdown machines.

use super::{
    extract, good_check, lang_of_formula, reference_formula, ExtractOptions, ExtractOutcome,
    GoodCheckOutcome, SeparationError, WitnessLimitStream,
};
use crate::alphabet::is_palindrome;
use crate::formula::Formula;
use crate::lang::dpda::Dpda;
use crate::lang::{LangEnv, LanguageHandle};
use crate::pushdown::{pump_decompose, verify_pump, PumpOptions};
use serde::Serialize;

/// Stream a catalog machine is run against.
#[derive(Debug, Clone)]
pub enum DemoStream {
    /// The limit word of the witness family over `v`.
    WitnessLimit { v: String },
    /// A periodic word.
    Periodic(String),
}

impl DemoStream {
    fn describe(&self) -> String {
        match self {
            DemoStream::WitnessLimit { v } => {
                format!("witness-limit(v = \"{v}\")")
            }
            DemoStream::Periodic(w) => format!("({w})^ω"),
        }
    }

    fn reader(&self) -> Box<dyn FnMut(usize) -> char> {
        match self {
            DemoStream::WitnessLimit { v } => {
                let mut stream = WitnessLimitStream::new(v);
                Box::new(move |i| stream.letter(i))
            }
            DemoStream::Periodic(w) => {
                let chars: Vec<char> = w.chars().collect();
                Box::new(move |i| chars[i % chars.len()])
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct DemoConfig {
    /// Candidate formulas put through extraction and goodness checking.
    pub candidates: Vec<(String, Formula)>,
    /// Machines put through the pumping lemma, with their streams and the
    /// quotient word `v` of the membership claim being refuted.
    pub machines: Vec<(String, Dpda, DemoStream, String)>,
    pub good_check_len: usize,
    pub extract_opts: ExtractOptions,
    pub pump_samples: usize,
}

#[derive(Debug, Serialize)]
pub struct CandidateReport {
    pub name: String,
    pub formula: String,
    /// Either "good decomposition with N pairs" or the aborting stage.
    pub extraction: String,
    pub bounded_language_sample: Vec<String>,
    pub good_check: Option<GoodCheckOutcome>,
}

#[derive(Debug, Serialize)]
pub struct PumpReport {
    pub name: String,
    pub stream: String,
    pub u0: String,
    pub u1: String,
    /// First completed block 1 0^κ 1 past the cut: (κ, end index ℓ).
    pub marker_block: Option<(usize, usize)>,
    /// Sampled accepted prefix lengths whose u₁-cut stays accepted.
    pub verified_prefixes: Vec<usize>,
    /// An accepted word u″ (a cut prefix) with the palindromicity of v·u″:
    /// acceptance of a non-palindrome refutes the v∖Pal membership claim.
    pub cut_word_accepted: Option<(String, bool)>,
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct DemoReport {
    pub reference: String,
    pub candidates: Vec<CandidateReport>,
    pub pumping: Vec<PumpReport>,
    pub disclaimer: String,
}

/// Run the demonstration: bounded evidence for the separation story, not a
/// proof.
pub fn separation_demo(
    env: &mut LangEnv,
    config: &DemoConfig,
) -> Result<DemoReport, SeparationError> {
    if config.candidates.is_empty() {
        return Err(SeparationError::EmptyCatalog);
    }
    let reference = reference_formula(env)?;
    let pal_letters: Vec<char> = env.alphabet().letters().collect();
    let palindromes = LanguageHandle::palindromes("PAL_TARGET", pal_letters);

    let mut candidates = Vec::new();
    for (name, formula) in &config.candidates {
        let output = extract(formula, env, &config.extract_opts)?;
        let (extraction, good) = match output.outcome {
            ExtractOutcome::Good(g) => {
                (format!("good decomposition with {} pairs", g.pairs.len()), Some(g))
            }
            ExtractOutcome::Aborted(stage) => (
                format!("aborted at {}: {}", stage.stage, stage.judgment),
                None,
            ),
        };
        let (sample, verdict) = match &good {
            Some(g) => {
                let sample: Vec<String> = g
                    .bounded_language(env, 4)?
                    .into_iter()
                    .take(12)
                    .collect();
                let verdict = good_check(g, &palindromes, env, config.good_check_len)?;
                (sample, Some(verdict))
            }
            None => {
                // fall back to the formula's own bounded language so the
                // report still shows what the candidate expresses
                (lang_of_formula(formula, env, 4)?, None)
            }
        };
        candidates.push(CandidateReport {
            name: name.clone(),
            formula: formula.to_string(),
            extraction,
            bounded_language_sample: sample,
            good_check: verdict,
        });
    }

    let mut pumping = Vec::new();
    for (name, machine, stream, v) in &config.machines {
        pumping.push(pump_machine_report(
            name,
            machine,
            stream,
            v,
            config.pump_samples,
        ));
    }

    Ok(DemoReport {
        reference: reference.to_string(),
        candidates,
        pumping,
        disclaimer: "All verdicts are bounded evidence from finite enumeration; none of them \
                     constitutes a proof of the underlying separation."
            .into(),
    })
}

/// Pumping report for one catalog machine; entries are independent, so
/// drivers may fan them out over workers.
pub fn pump_machine_report(
    name: &str,
    machine: &Dpda,
    stream: &DemoStream,
    v: &str,
    samples: usize,
) -> PumpReport {
    let mut report = PumpReport {
        name: name.to_string(),
        stream: stream.describe(),
        u0: String::new(),
        u1: String::new(),
        marker_block: None,
        verified_prefixes: Vec::new(),
        cut_word_accepted: None,
        error: None,
    };
    let mut reader = stream.reader();
    let decomposition = match pump_decompose(machine, &mut reader, PumpOptions::default()) {
        Ok(d) => d,
        Err(e) => {
            report.error = Some(e.to_string());
            return report;
        }
    };
    report.u0 = decomposition.u0.clone();
    report.u1 = decomposition.u1.clone();
    match verify_pump(machine, &mut reader, &decomposition, samples) {
        Ok(lengths) => report.verified_prefixes = lengths,
        Err(e) => {
            report.error = Some(e.to_string());
            return report;
        }
    }

    // first completed 1 0^κ 1 block past the cut
    let cut = decomposition.u0.len() + decomposition.u1.len();
    let horizon = (cut + 512).max(1024);
    let letters: Vec<char> = (0..horizon).map(|i| reader(i)).collect();
    'scan: for end in cut.max(2)..letters.len() {
        if letters[end] != '1' {
            continue;
        }
        let mut j = end;
        while j > 0 && letters[j - 1] == '0' {
            j -= 1;
        }
        if j > 0 && letters[j - 1] == '1' {
            report.marker_block = Some((end - j, end + 1));
            break 'scan;
        }
    }

    // exhibit a cut word: an accepted prefix beyond the block with u₁
    // removed, preferring one that is not a palindrome after prefixing v
    // (accepting such a word refutes the v∖Pal membership claim)
    for &n in &report.verified_prefixes {
        let mut cut_word = decomposition.u0.clone();
        for i in cut..n {
            cut_word.push(reader(i));
        }
        if !machine.accepts(&cut_word) {
            report.error = Some("cut word unexpectedly rejected".into());
            break;
        }
        let palindromic = is_palindrome(&format!("{v}{cut_word}"));
        report.cut_word_accepted = Some((cut_word, palindromic));
        if !palindromic {
            break;
        }
    }
    report
}
