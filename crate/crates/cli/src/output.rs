//! Report emission: line-oriented text or one JSON document with stable
//! key order.

use pdl_core::alphabet::display_word;
use pdl_core::lang::LangEnv;
use pdl_core::separation::{DemoReport, GoodPair, StageRecord};
use serde_json::{json, Map, Value};

pub struct Emit {
    json: bool,
    doc: Map<String, Value>,
    stages: Vec<Value>,
    pairs: Vec<Value>,
}

impl Emit {
    pub fn new(json: bool) -> Emit {
        Emit {
            json,
            doc: Map::new(),
            stages: Vec::new(),
            pairs: Vec::new(),
        }
    }

    pub fn kv(&mut self, key: &str, value: &str) {
        if self.json {
            self.doc.insert(key.to_string(), Value::String(value.to_string()));
        } else {
            println!("{key}: {value}");
        }
    }

    pub fn words(&mut self, key: &str, words: &[String]) {
        if self.json {
            self.doc.insert(
                key.to_string(),
                Value::Array(words.iter().map(|w| Value::String(w.clone())).collect()),
            );
        } else {
            let rendered: Vec<&str> = words.iter().map(|w| display_word(w)).collect();
            println!("{key}: {}", rendered.join(" "));
        }
    }

    pub fn block(&mut self, key: &str, content: &str) {
        if self.json {
            self.doc.insert(key.to_string(), Value::String(content.to_string()));
        } else {
            println!("{key}:");
            for line in content.lines() {
                println!("  {line}");
            }
        }
    }

    pub fn stage(&mut self, stage: &StageRecord) {
        if self.json {
            self.stages
                .push(serde_json::to_value(stage).expect("stage serializes"));
        } else {
            let trail = if stage.trail.is_empty() {
                "·".to_string()
            } else {
                stage.trail.clone()
            };
            println!(
                "stage[{trail}|{}]: {} => {}",
                stage.stage, stage.formula_before, stage.formula_after
            );
            println!(
                "  measure: {} => {}",
                stage.measure_before, stage.measure_after
            );
            for note in &stage.notes {
                println!("  note: {note}");
            }
        }
    }

    pub fn pair(&mut self, index: usize, pair: &GoodPair, env: &LangEnv, len: usize) {
        let left_sample = pair
            .left
            .enumerate(len.min(4))
            .unwrap_or_default();
        let right = pair.right.describe();
        let evidence = pair
            .evidence
            .as_ref()
            .map(|(a, b)| format!("{}, {}", display_word(a), display_word(b)));
        let right_sample = pair.right.enumerate(env, len.min(4)).unwrap_or_default();
        if self.json {
            self.pairs.push(json!({
                "left": pair.left.name(),
                "kind": pair.left.backend_kind(),
                "left_sample": left_sample,
                "right": right,
                "right_sample": right_sample,
                "evidence": evidence,
                "singleton_flagged": pair.singleton_flagged,
            }));
        } else {
            let flag = if pair.singleton_flagged {
                " [flagged singleton]"
            } else {
                ""
            };
            println!(
                "pair {index}: L = {} ({}){flag}",
                pair.left.name(),
                pair.left.backend_kind()
            );
            let rendered: Vec<&str> = left_sample.iter().map(|w| display_word(w)).collect();
            println!("  L sample: {}", rendered.join(" "));
            if let Some(e) = evidence {
                println!("  evidence: {e}");
            }
            println!("  R = {right}");
        }
    }

    pub fn demo(&mut self, report: &DemoReport) {
        if self.json {
            self.doc.insert(
                "demo".into(),
                serde_json::to_value(report).expect("report serializes"),
            );
            return;
        }
        println!("reference: {}", report.reference);
        println!();
        for c in &report.candidates {
            println!("candidate {}: {}", c.name, c.formula);
            println!("  extraction: {}", c.extraction);
            let rendered: Vec<&str> = c
                .bounded_language_sample
                .iter()
                .map(|w| display_word(w))
                .collect();
            println!("  language sample: {}", rendered.join(" "));
            match &c.good_check {
                None => println!("  goodness check: skipped"),
                Some(outcome) => println!("  goodness check: {outcome:?}"),
            }
            println!();
        }
        for p in &report.pumping {
            println!("machine {} on {}:", p.name, p.stream);
            match &p.error {
                Some(e) => println!("  error: {e}"),
                None => {
                    println!(
                        "  u0 = {}, u1 = {}",
                        display_word(&p.u0),
                        display_word(&p.u1)
                    );
                    if let Some((kappa, end)) = p.marker_block {
                        println!("  first 1 0^{kappa} 1 block past the cut ends at index {end}");
                    }
                    println!("  rerun-checked prefixes: {:?}", p.verified_prefixes);
                    if let Some((word, palindromic)) = &p.cut_word_accepted {
                        println!(
                            "  accepted cut word {} (palindrome after v-prefix: {palindromic})",
                            display_word(word)
                        );
                    }
                }
            }
            println!();
        }
        println!("{}", report.disclaimer);
    }

    pub fn flush(&mut self) {
        if !self.json {
            return;
        }
        if !self.stages.is_empty() {
            let stages = std::mem::take(&mut self.stages);
            self.doc.insert("stages".into(), Value::Array(stages));
        }
        if !self.pairs.is_empty() {
            let pairs = std::mem::take(&mut self.pairs);
            self.doc.insert("pairs".into(), Value::Array(pairs));
        }
        let doc = std::mem::take(&mut self.doc);
        println!(
            "{}",
            serde_json::to_string_pretty(&Value::Object(doc)).expect("document serializes")
        );
    }
}
