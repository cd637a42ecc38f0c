//! Command-line frontend: file loading, subcommand dispatch, report
//! emission.  Exit codes: 0 valid/true, 1 refuted/false, 2 unknown,
//! 64 usage error, 65 data error.

mod output;

use clap::{Args, Parser, Subcommand};
use output::Emit;
use pdl_core::alphabet::{display_word, Alphabet};
use pdl_core::catalog::builtin_demo;
use pdl_core::dnf::{complete, elim_ag, to_dnf};
use pdl_core::formula::{elim_ew, is_epsilon_free, measure_of, parse_formula, Formula};
use pdl_core::lang::dpda::Dpda;
use pdl_core::lang::LangEnv;
use pdl_core::lts::Structure;
use pdl_core::mc::{
    check, equivalent_bounded, structurally_monotone_bounded, validity, BoundedOracle, Bounds,
    MonotonicityVerdict, SearchLimits, Verdict3,
};
use pdl_core::measure::{measure_gt, Measure, OmegaPlusOne};
use pdl_core::pushdown::{
    prestar, pump_decompose, verify_pump, PAutomaton, PumpOptions, PushdownSystem, WorklistOrder,
};
use pdl_core::separation::{
    extract, good_check, orthogonal_word, prefix_ordered, separation_demo,
    validate_orthogonal, witness_family, ExtractOptions, ExtractOutcome, GoodCheckOutcome,
    GoodDecomposition, GoodPair, RightPart, WitnessLimitStream,
};
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_TRUE: u8 = 0;
const EXIT_FALSE: u8 = 1;
const EXIT_UNKNOWN: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;

#[derive(Parser)]
#[command(
    name = "pdl",
    about = "Toolkit for test-free PDL over language classes: formula rewrites with a termination measure, language backends, bounded model checking, and the palindrome separation experiments",
    disable_help_subcommand = true
)]
struct Cli {
    /// Emit a machine-readable JSON document instead of text.
    #[arg(long, global = true)]
    json: bool,

    /// Search bounds, e.g. `depth=3,branch=3,len=6`.
    #[arg(long, global = true, value_name = "SPEC")]
    bounds: Option<String>,

    /// Worker threads for independent catalog entries (pal-demo).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct EnvArg {
    /// Language environment file.
    #[arg(long, value_name = "FILE")]
    env: Option<PathBuf>,
}

#[derive(Args)]
struct FormulaArg {
    /// Formula text, e.g. `EF[L] true`.
    #[arg(long, value_name = "FORMULA")]
    formula: String,
}

#[derive(Subcommand)]
enum Command {
    /// Model-check a formula on the root of a transition system.
    Mc {
        #[command(flatten)]
        env: EnvArg,
        #[command(flatten)]
        formula: FormulaArg,
        /// Transition system file.
        #[arg(long, value_name = "FILE")]
        lts: PathBuf,
        /// Cross-check with the naive path-enumeration oracle.
        #[arg(long)]
        naive: bool,
    },
    /// Bounded equivalence of two formulas.
    Equiv {
        #[command(flatten)]
        env: EnvArg,
        #[command(flatten)]
        formula: FormulaArg,
        #[arg(long, value_name = "FORMULA")]
        formula2: String,
    },
    /// Bounded validity of a formula.
    Valid {
        #[command(flatten)]
        env: EnvArg,
        #[command(flatten)]
        formula: FormulaArg,
    },
    /// Bounded structural-monotonicity probe.
    Monotone {
        #[command(flatten)]
        env: EnvArg,
        #[command(flatten)]
        formula: FormulaArg,
    },
    /// Empty-word elimination rewrite.
    ElimEw {
        #[command(flatten)]
        env: EnvArg,
        #[command(flatten)]
        formula: FormulaArg,
    },
    /// Distribution into disjunctive normal form over modal atoms.
    Dnf {
        #[command(flatten)]
        formula: FormulaArg,
    },
    /// DNF completion under the bounded validity oracle.
    Complete {
        #[command(flatten)]
        env: EnvArg,
        #[command(flatten)]
        formula: FormulaArg,
    },
    /// Completion followed by AG-elimination.
    ElimAg {
        #[command(flatten)]
        env: EnvArg,
        #[command(flatten)]
        formula: FormulaArg,
    },
    /// The measure of a formula.
    Measure {
        #[command(flatten)]
        env: EnvArg,
        #[command(flatten)]
        formula: FormulaArg,
    },
    /// Compare two measure literals under the replacement order.
    MeasureCmp {
        /// Measure literal, e.g. `{[2, w], [1]}`.
        #[arg(long, value_name = "MEASURE")]
        measure: String,
        #[arg(long, value_name = "MEASURE")]
        measure2: String,
    },
    /// Left quotient of a named language by a letter.
    Quotient {
        #[command(flatten)]
        env: EnvArg,
        #[arg(long, value_name = "NAME")]
        lang: String,
        #[arg(long, value_name = "LETTER")]
        letter: char,
    },
    /// Split a named language against the `$` marker.
    SplitDollar {
        #[command(flatten)]
        env: EnvArg,
        #[arg(long, value_name = "NAME")]
        lang: String,
    },
    /// Saturate a configuration automaton to pre*.
    Prestar {
        /// Pushdown system file.
        #[arg(long, value_name = "FILE")]
        pds: PathBuf,
        /// Target configuration automaton file.
        #[arg(long, value_name = "FILE")]
        target: PathBuf,
        /// Process the worklist in LIFO order instead of FIFO.
        #[arg(long)]
        lifo: bool,
    },
    /// Pumping decomposition of a machine run on a stream.
    Pump {
        /// Deterministic pushdown automaton file.
        #[arg(long, value_name = "FILE")]
        dpda: PathBuf,
        /// Periodic stream, e.g. `cr`.
        #[arg(long, value_name = "WORD", conflicts_with = "witness_stream")]
        periodic: Option<String>,
        /// Witness-family limit stream over the given quotient word.
        #[arg(long, value_name = "V")]
        witness_stream: Option<String>,
        /// Accepted prefixes sampled by the rerun check.
        #[arg(long, default_value_t = 5)]
        samples: usize,
    },
    /// Language queries: membership, bounded enumeration, norm.
    Lang {
        #[command(subcommand)]
        query: LangQuery,
    },
    /// Run the extraction pipeline on a formula.
    Extract {
        #[command(flatten)]
        env: EnvArg,
        #[command(flatten)]
        formula: FormulaArg,
    },
    /// The strictly prefix-ordered palindrome witness family.
    WitnessFamily {
        #[arg(long, value_name = "WORD", default_value = "")]
        v: String,
        #[arg(long, default_value_t = 3)]
        count: usize,
    },
    /// A word that is no prefix of any word of a quad language.
    Orthogonal {
        /// Quads `u0,u1,u2,u3` separated by `;` (empty components allowed).
        #[arg(long, value_name = "QUADS", default_value = "")]
        quads: String,
        #[arg(long, value_name = "LETTERS", default_value = "01")]
        letters: String,
        /// Brute-force validation length slack.
        #[arg(long, default_value_t = 8)]
        slack: usize,
    },
    /// Check a candidate decomposition against a target language.
    GoodCheck {
        #[command(flatten)]
        env: EnvArg,
        /// Target language name.
        #[arg(long, value_name = "NAME")]
        target: String,
        /// Decomposition pairs `L:R` (language names), repeatable.
        #[arg(long = "pair", value_name = "L:R", required = true)]
        pairs: Vec<String>,
    },
    /// Builtin end-to-end palindrome separation demonstration.
    PalDemo {
        /// Bounded-equality length for the goodness checks.
        #[arg(long, default_value_t = 6)]
        len: usize,
    },
}

#[derive(Subcommand)]
enum LangQuery {
    /// Membership of a word (ε written `_`).
    Member {
        #[command(flatten)]
        env: EnvArg,
        #[arg(long, value_name = "NAME")]
        lang: String,
        #[arg(long, value_name = "WORD")]
        word: String,
    },
    /// Every member up to the length bound.
    Enumerate {
        #[command(flatten)]
        env: EnvArg,
        #[arg(long, value_name = "NAME")]
        lang: String,
    },
    /// ‖L‖: the singleton length or ω.
    Norm {
        #[command(flatten)]
        env: EnvArg,
        #[arg(long, value_name = "NAME")]
        lang: String,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) => m,
        }
    }
}

fn data_err(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

#[derive(Debug, Clone, Copy)]
struct Config {
    bounds: Bounds,
    len: usize,
    limits: SearchLimits,
    jobs: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders --help/--version through errors as well
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::from(EXIT_TRUE);
            }
            eprint!("{e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let config = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("pdl: {}", e.message());
            return ExitCode::from(e.code());
        }
    };
    let mut emit = Emit::new(cli.json);
    match run(cli.command, config, &mut emit) {
        Ok(code) => {
            emit.flush();
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("pdl: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn build_config(cli: &Cli) -> Result<Config, CliError> {
    let mut bounds = Bounds::new(3, 3);
    let mut len = 6usize;
    if let Some(spec) = &cli.bounds {
        for part in spec.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (key, value) = part.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("bounds must look like depth=3,branch=3,len=6, got `{part}`"))
            })?;
            let value: usize = value
                .parse()
                .map_err(|_| CliError::Usage(format!("bound `{part}` is not a number")))?;
            match key {
                "depth" => bounds.depth = value,
                "branch" => bounds.branching = value,
                "len" => len = value,
                other => {
                    return Err(CliError::Usage(format!("unknown bound `{other}`")));
                }
            }
        }
    }
    let mut limits = SearchLimits::default();
    if let Ok(cap) = std::env::var("PDL_TREE_CAP") {
        limits.max_structures = cap
            .parse()
            .map_err(|_| CliError::Usage("PDL_TREE_CAP must be a number".into()))?;
    }
    Ok(Config {
        bounds,
        len,
        limits,
        jobs: cli.jobs.unwrap_or(1).max(1),
    })
}

fn load_env(arg: &EnvArg) -> Result<LangEnv, CliError> {
    match &arg.env {
        None => Ok(LangEnv::new(Alphabet::binary())),
        Some(path) => {
            let text = read(path)?;
            LangEnv::parse(&text, path.parent()).map_err(data_err)
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read `{}`: {e}", path.display())))
}

fn formula(text: &str, env: &LangEnv) -> Result<Formula, CliError> {
    let f = parse_formula(text).map_err(data_err)?;
    f.validate_resolved(env).map_err(data_err)?;
    Ok(f)
}

fn derived_or(bounds: Bounds, formulas: &[&Formula], env: &LangEnv) -> Bounds {
    match Bounds::derived(formulas, env) {
        Ok(Some(derived)) => Bounds {
            depth: bounds.depth.max(derived.depth),
            branching: bounds.branching.max(derived.branching),
        },
        _ => bounds,
    }
}

fn verdict_exit(v: &Verdict3) -> u8 {
    match v {
        Verdict3::Valid(_) => EXIT_TRUE,
        Verdict3::Refuted(_) => EXIT_FALSE,
        Verdict3::Unknown(_) => EXIT_UNKNOWN,
    }
}

fn emit_verdict(emit: &mut Emit, kind: &str, v: &Verdict3) {
    emit.kv("command", kind);
    emit.kv("verdict", v.name());
    match v {
        Verdict3::Refuted(m) => emit.block("countermodel", &m.to_string()),
        Verdict3::Valid(cert) | Verdict3::Unknown(cert) => {
            emit.kv("exact", &cert.exact.to_string());
            emit.kv(
                "searched",
                &format!(
                    "depth={} branch={} leaves<={} structures={}",
                    cert.depth, cert.branching, cert.max_leaves, cert.structures_checked
                ),
            );
        }
    }
}

fn run(command: Command, config: Config, emit: &mut Emit) -> Result<u8, CliError> {
    match command {
        Command::Mc {
            env,
            formula: f,
            lts,
            naive,
        } => {
            let env = load_env(&env)?;
            let f = formula(&f.formula, &env)?;
            let m = Structure::parse(&read(&lts)?).map_err(data_err)?;
            let holds = check(&m, &f, &env).map_err(data_err)?;
            emit.kv("command", "mc");
            emit.kv("holds", &holds.to_string());
            if naive {
                let nv = pdl_core::mc::naive_check(&m, &f, &env, config.len.max(12))
                    .map_err(data_err)?;
                emit.kv("naive", &nv.to_string());
                if nv != holds {
                    return Err(CliError::Data(
                        "naive oracle disagrees with the checker".into(),
                    ));
                }
            }
            Ok(if holds { EXIT_TRUE } else { EXIT_FALSE })
        }
        Command::Equiv {
            env,
            formula: f,
            formula2,
        } => {
            let env = load_env(&env)?;
            let f = formula(&f.formula, &env)?;
            let g = formula(&formula2, &env)?;
            let bounds = derived_or(config.bounds, &[&f, &g], &env);
            let v = equivalent_bounded(&f, &g, &env, bounds, config.limits).map_err(data_err)?;
            emit_verdict(emit, "equiv", &v);
            Ok(verdict_exit(&v))
        }
        Command::Valid { env, formula: f } => {
            let env = load_env(&env)?;
            let f = formula(&f.formula, &env)?;
            let bounds = derived_or(config.bounds, &[&f], &env);
            let v = validity(&f, &env, bounds, config.limits).map_err(data_err)?;
            emit_verdict(emit, "valid", &v);
            Ok(verdict_exit(&v))
        }
        Command::Monotone { env, formula: f } => {
            let env = load_env(&env)?;
            let f = formula(&f.formula, &env)?;
            let v = structurally_monotone_bounded(&f, &env, config.bounds, config.limits)
                .map_err(data_err)?;
            emit.kv("command", "monotone");
            emit.kv("verdict", v.name());
            if let MonotonicityVerdict::Refuted { model, extension } = &v {
                emit.block("model", &model.to_string());
                emit.block("extension", &extension.to_string());
            }
            Ok(match v {
                MonotonicityVerdict::MonotoneUpToBound(_) => EXIT_TRUE,
                MonotonicityVerdict::Refuted { .. } => EXIT_FALSE,
                MonotonicityVerdict::Unknown(_) => EXIT_UNKNOWN,
            })
        }
        Command::ElimEw { env, formula: f } => {
            let mut env = load_env(&env)?;
            let f = formula(&f.formula, &env)?;
            let rewritten = elim_ew(&f, &mut env).map_err(data_err)?;
            emit.kv("command", "elim-ew");
            emit.kv("input", &f.to_string());
            emit.kv("output", &rewritten.to_string());
            emit.kv(
                "epsilon_free",
                &is_epsilon_free(&rewritten, &env).map_err(data_err)?.to_string(),
            );
            Ok(EXIT_TRUE)
        }
        Command::Dnf { formula: f } => {
            let f = parse_formula(&f.formula).map_err(data_err)?;
            let d = to_dnf(&f);
            emit.kv("command", "dnf");
            emit.kv("input", &f.to_string());
            emit.kv("output", &d.to_formula().to_string());
            emit.kv("terms", &d.terms.len().to_string());
            Ok(EXIT_TRUE)
        }
        Command::Complete { env, formula: f } => {
            let env = load_env(&env)?;
            let f = formula(&f.formula, &env)?;
            let d = to_dnf(&f);
            let mut oracle = BoundedOracle::new(&env, config.bounds, config.limits);
            let out = complete(&d, &mut oracle);
            emit.kv("command", "complete");
            emit.kv("input", &d.to_formula().to_string());
            emit.kv("output", &out.dnf.to_formula().to_string());
            emit.kv("added", &out.added.len().to_string());
            emit.kv("unknown_subsets", &out.unknown_subsets.len().to_string());
            Ok(if out.unknown_subsets.is_empty() {
                EXIT_TRUE
            } else {
                EXIT_UNKNOWN
            })
        }
        Command::ElimAg { env, formula: f } => {
            let env = load_env(&env)?;
            let f = formula(&f.formula, &env)?;
            let d = to_dnf(&f);
            let mut oracle = BoundedOracle::new(&env, config.bounds, config.limits);
            let completed = complete(&d, &mut oracle);
            let out = elim_ag(&completed.dnf, &mut oracle);
            emit.kv("command", "elim-ag");
            emit.kv("input", &completed.dnf.to_formula().to_string());
            emit.kv("output", &out.dnf.to_formula().to_string());
            emit.kv("kept", &out.kept.to_string());
            emit.kv("dropped", &out.dropped.to_string());
            emit.kv("undecided", &format!("{:?}", out.undecided));
            Ok(if out.is_partial() { EXIT_UNKNOWN } else { EXIT_TRUE })
        }
        Command::Measure { env, formula: f } => {
            let env = load_env(&env)?;
            let f = formula(&f.formula, &env)?;
            let m = measure_of(&f, &env).map_err(data_err)?;
            emit.kv("command", "measure");
            emit.kv("measure", &m.to_string());
            Ok(EXIT_TRUE)
        }
        Command::MeasureCmp { measure, measure2 } => {
            let a = parse_measure(&measure)?;
            let b = parse_measure(&measure2)?;
            let gt = measure_gt(&a, &b);
            let lt = measure_gt(&b, &a);
            emit.kv("command", "measure-cmp");
            emit.kv("left", &a.to_string());
            emit.kv("right", &b.to_string());
            let relation = if a == b {
                "equal"
            } else if gt {
                "greater"
            } else if lt {
                "less"
            } else {
                "incomparable"
            };
            emit.kv("relation", relation);
            Ok(if gt { EXIT_TRUE } else { EXIT_FALSE })
        }
        Command::Quotient { env, lang, letter } => {
            let mut env = load_env(&env)?;
            env.get(&lang).map_err(data_err)?;
            let (name, diverged) = env.quotient_of(&lang, letter).map_err(data_err)?;
            let words = env
                .get(&name)
                .map_err(data_err)?
                .enumerate(config.len)
                .map_err(data_err)?;
            emit.kv("command", "quotient");
            emit.kv("derived", &name);
            emit.kv("diverged", &diverged.to_string());
            emit.words("words", &words);
            Ok(EXIT_TRUE)
        }
        Command::SplitDollar { env, lang } => {
            let mut env = load_env(&env)?;
            env.get(&lang).map_err(data_err)?;
            let (l1, l2) = env.split_of(&lang).map_err(data_err)?;
            emit.kv("command", "split-dollar");
            emit.kv("l1", &l1);
            emit.words(
                "l1_words",
                &env.get(&l1).map_err(data_err)?.enumerate(config.len).map_err(data_err)?,
            );
            emit.kv("l2", &l2);
            emit.words(
                "l2_words",
                &env.get(&l2).map_err(data_err)?.enumerate(config.len).map_err(data_err)?,
            );
            Ok(EXIT_TRUE)
        }
        Command::Prestar { pds, target, lifo } => {
            let pds = PushdownSystem::parse(&read(&pds)?).map_err(data_err)?;
            let target = PAutomaton::parse(&read(&target)?, &pds).map_err(data_err)?;
            let order = if lifo {
                WorklistOrder::Lifo
            } else {
                WorklistOrder::Fifo
            };
            let result = prestar(&pds, &target, order).map_err(data_err)?;
            emit.kv("command", "prestar");
            emit.kv("transitions", &result.trans.len().to_string());
            emit.block("automaton", &result.display_with(&pds));
            Ok(EXIT_TRUE)
        }
        Command::Pump {
            dpda,
            periodic,
            witness_stream,
            samples,
        } => {
            let machine = Dpda::parse(&read(&dpda)?).map_err(data_err)?;
            let mut reader: Box<dyn FnMut(usize) -> char> = match (&periodic, &witness_stream) {
                (Some(w), None) => {
                    if w.is_empty() {
                        return Err(CliError::Usage("periodic stream must be nonempty".into()));
                    }
                    let chars: Vec<char> = w.chars().collect();
                    Box::new(move |i| chars[i % chars.len()])
                }
                (None, v) => {
                    let mut stream = WitnessLimitStream::new(v.as_deref().unwrap_or(""));
                    Box::new(move |i| stream.letter(i))
                }
                (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
            };
            let d = pump_decompose(&machine, &mut reader, PumpOptions::default())
                .map_err(data_err)?;
            let verified =
                verify_pump(&machine, &mut reader, &d, samples).map_err(data_err)?;
            emit.kv("command", "pump");
            emit.kv("u0", display_word(&d.u0));
            emit.kv("u1", display_word(&d.u1));
            emit.kv("state", &d.evidence.state_name);
            emit.kv("stack_level", &d.evidence.stack_level.to_string());
            emit.kv("same_level", &d.evidence.same_level.to_string());
            emit.kv("verified_prefixes", &format!("{verified:?}"));
            Ok(EXIT_TRUE)
        }
        Command::Lang { query } => match query {
            LangQuery::Member { env, lang, word } => {
                let env = load_env(&env)?;
                let handle = env.get(&lang).map_err(data_err)?;
                let w = if word == "_" { "" } else { word.as_str() };
                let out = handle.member_detailed(w);
                emit.kv("command", "lang member");
                emit.kv("member", &out.member.to_string());
                if out.diverged {
                    emit.kv("diverged", "true");
                }
                Ok(if out.member { EXIT_TRUE } else { EXIT_FALSE })
            }
            LangQuery::Enumerate { env, lang } => {
                let env = load_env(&env)?;
                let words = env
                    .get(&lang)
                    .map_err(data_err)?
                    .enumerate(config.len)
                    .map_err(data_err)?;
                emit.kv("command", "lang enumerate");
                emit.kv("count", &words.len().to_string());
                emit.words("words", &words);
                Ok(EXIT_TRUE)
            }
            LangQuery::Norm { env, lang } => {
                let env = load_env(&env)?;
                let norm = env.get(&lang).map_err(data_err)?.norm();
                emit.kv("command", "lang norm");
                emit.kv("norm", &norm.to_string());
                Ok(EXIT_TRUE)
            }
        },
        Command::Extract { env, formula: f } => {
            let mut env = load_env(&env)?;
            let f = formula(&f.formula, &env)?;
            let opts = ExtractOptions {
                bounds: config.bounds,
                limits: config.limits,
                ..ExtractOptions::default()
            };
            let out = extract(&f, &mut env, &opts).map_err(data_err)?;
            emit.kv("command", "extract");
            for stage in &out.report.stages {
                emit.stage(stage);
            }
            match &out.outcome {
                ExtractOutcome::Good(g) => {
                    emit.kv("outcome", "good");
                    emit.kv("pairs", &g.pairs.len().to_string());
                    for (i, pair) in g.pairs.iter().enumerate() {
                        emit.pair(i, pair, &env, config.len);
                    }
                    let words: Vec<String> = g
                        .bounded_language(&env, config.len)
                        .map_err(data_err)?
                        .into_iter()
                        .collect();
                    emit.words("bounded_language", &words);
                    Ok(EXIT_TRUE)
                }
                ExtractOutcome::Aborted(stage) => {
                    emit.kv("outcome", "aborted");
                    emit.kv("stage", &stage.stage);
                    emit.kv("trail", &stage.trail);
                    emit.kv("judgment", &stage.judgment);
                    Ok(EXIT_UNKNOWN)
                }
            }
        }
        Command::WitnessFamily { v, count } => {
            let words = witness_family(&v, count).map_err(data_err)?;
            emit.kv("command", "witness-family");
            emit.words("words", &words);
            let set: BTreeSet<String> = words.iter().cloned().collect();
            emit.kv("prefix_ordered", &prefix_ordered(&set).to_string());
            Ok(EXIT_TRUE)
        }
        Command::Orthogonal {
            quads,
            letters,
            slack,
        } => {
            let letters: Vec<char> = letters.chars().collect();
            let quads = parse_quads(&quads)?;
            let w = orthogonal_word(&letters, &quads).map_err(data_err)?;
            emit.kv("command", "orthogonal");
            emit.kv("word", &w);
            match validate_orthogonal(&quads, &w, slack) {
                None => {
                    emit.kv("validated", "true");
                    Ok(EXIT_TRUE)
                }
                Some(violating) => {
                    emit.kv("validated", "false");
                    emit.kv("violating_word", &violating);
                    Ok(EXIT_FALSE)
                }
            }
        }
        Command::GoodCheck { env, target, pairs } => {
            let env = load_env(&env)?;
            let target_handle = env.get(&target).map_err(data_err)?.clone();
            let mut decomposition = GoodDecomposition::default();
            for spec in &pairs {
                let (l, r) = spec.split_once(':').ok_or_else(|| {
                    CliError::Usage(format!("pair must look like LEFT:RIGHT, got `{spec}`"))
                })?;
                let left = env.get(l.trim()).map_err(data_err)?.clone();
                let right_words: BTreeSet<String> = env
                    .get(r.trim())
                    .map_err(data_err)?
                    .enumerate(config.len)
                    .map_err(data_err)?
                    .into_iter()
                    .collect();
                let mut members = left.enumerate(config.len).map_err(data_err)?.into_iter();
                let evidence = match (members.next(), members.next()) {
                    (Some(a), Some(b)) => Some((a, b)),
                    _ => None,
                };
                decomposition.pairs.push(GoodPair {
                    left,
                    right: RightPart::Finite(right_words),
                    evidence,
                    singleton_flagged: false,
                });
            }
            let outcome =
                good_check(&decomposition, &target_handle, &env, config.len).map_err(data_err)?;
            emit.kv("command", "good-check");
            match &outcome {
                GoodCheckOutcome::EqualUpTo(n) => {
                    emit.kv("verdict", &format!("equal up to length {n}"));
                    Ok(EXIT_TRUE)
                }
                GoodCheckOutcome::StructuralIssue(msg) => {
                    emit.kv("verdict", "structural issue");
                    emit.kv("detail", msg);
                    Ok(EXIT_FALSE)
                }
                GoodCheckOutcome::Counterexample {
                    word,
                    in_union,
                    in_target,
                } => {
                    emit.kv("verdict", "counterexample");
                    emit.kv("word", display_word(word));
                    emit.kv("in_union", &in_union.to_string());
                    emit.kv("in_target", &in_target.to_string());
                    Ok(EXIT_FALSE)
                }
            }
        }
        Command::PalDemo { len } => {
            let (mut env, mut config_demo) = builtin_demo(len);
            config_demo.extract_opts.bounds = config.bounds;
            config_demo.extract_opts.limits = config.limits;
            let report = run_demo(&mut env, config_demo, config.jobs).map_err(data_err)?;
            emit.demo(&report);
            Ok(EXIT_TRUE)
        }
    }
}

/// The demo's pumping entries are independent; split them over worker
/// threads while keeping the report in catalog order.
fn run_demo(
    env: &mut LangEnv,
    config: pdl_core::separation::DemoConfig,
    jobs: usize,
) -> Result<pdl_core::separation::DemoReport, pdl_core::separation::SeparationError> {
    if jobs <= 1 || config.machines.len() <= 1 {
        return separation_demo(env, &config);
    }
    let machines = config.machines.clone();
    let samples = config.pump_samples;
    let mut serial_config = config;
    serial_config.machines = Vec::new();
    let mut report = separation_demo(env, &serial_config)?;
    let chunk = machines.len().div_ceil(jobs).max(1);
    let results: Vec<pdl_core::separation::PumpReport> = std::thread::scope(|scope| {
        let handles: Vec<_> = machines
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    part.iter()
                        .map(|(name, machine, stream, v)| {
                            pdl_core::separation::pump_machine_report(
                                name, machine, stream, v, samples,
                            )
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("demo worker panicked"))
            .collect()
    });
    report.pumping = results;
    Ok(report)
}

fn parse_quads(spec: &str) -> Result<Vec<(String, String, String, String)>, CliError> {
    let mut out = Vec::new();
    for group in spec.split(';') {
        let group = group.trim();
        if group.is_empty() {
            continue;
        }
        let parts: Vec<&str> = group.split(',').map(|p| p.trim()).collect();
        if parts.len() != 4 {
            return Err(CliError::Usage(format!(
                "quad must have four comma-separated components, got `{group}`"
            )));
        }
        let clean = |s: &str| if s == "_" { String::new() } else { s.to_string() };
        out.push((
            clean(parts[0]),
            clean(parts[1]),
            clean(parts[2]),
            clean(parts[3]),
        ));
    }
    Ok(out)
}

/// Parse `{[2, w], [1], []}` into a measure.
fn parse_measure(text: &str) -> Result<Measure, CliError> {
    let trimmed = text.trim();
    let inner = trimmed
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .ok_or_else(|| CliError::Usage(format!("measure must be {{…}}, got `{text}`")))?;
    let mut entries: Vec<Vec<OmegaPlusOne>> = Vec::new();
    let mut rest = inner.trim();
    while !rest.is_empty() {
        let start = rest
            .find('[')
            .ok_or_else(|| CliError::Usage("expected `[` in measure".into()))?;
        let end = rest[start..]
            .find(']')
            .ok_or_else(|| CliError::Usage("unclosed `[` in measure".into()))?
            + start;
        let seq_text = &rest[start + 1..end];
        let mut seq = Vec::new();
        for tok in seq_text.split(',') {
            let tok = tok.trim();
            if tok.is_empty() {
                continue;
            }
            if tok == "w" || tok == "ω" {
                seq.push(OmegaPlusOne::Omega);
            } else {
                let n: u64 = tok.parse().map_err(|_| {
                    CliError::Usage(format!("measure entry `{tok}` is neither a number nor ω"))
                })?;
                seq.push(OmegaPlusOne::Fin(n));
            }
        }
        entries.push(seq);
        rest = rest[end + 1..].trim_start_matches([',', ' ']).trim();
    }
    Ok(Measure::from_entries(entries))
}
