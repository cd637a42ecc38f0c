//! Formula AST for the EF/AG fragment with language-annotated modalities,
//! in negation normal form.  Covers ε-freeness, the empty-word elimination
//! rewrite and the formula measure.

mod parse;

pub use parse::{parse_formula, FormulaParseError};

use crate::lang::{LangEnv, LangError};
use crate::measure::Measure;
use std::collections::BTreeSet;
use std::fmt;

/// Negation-normal-form formula; negation occurs only on propositions.
/// Modalities carry the name of a language in the ambient environment.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    False,
    True,
    Lit { prop: String, negated: bool },
    Or(Box<Formula>, Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Ef(String, Box<Formula>),
    Ag(String, Box<Formula>),
}

impl Formula {
    pub fn lit(prop: impl Into<String>) -> Formula {
        Formula::Lit {
            prop: prop.into(),
            negated: false,
        }
    }

    pub fn neg_lit(prop: impl Into<String>) -> Formula {
        Formula::Lit {
            prop: prop.into(),
            negated: true,
        }
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn ef(lang: impl Into<String>, body: Formula) -> Formula {
        Formula::Ef(lang.into(), Box::new(body))
    }

    pub fn ag(lang: impl Into<String>, body: Formula) -> Formula {
        Formula::Ag(lang.into(), Box::new(body))
    }

    /// Right-folded disjunction; `false` for the empty sequence.
    pub fn or_all(mut parts: Vec<Formula>) -> Formula {
        match parts.len() {
            0 => Formula::False,
            1 => parts.pop().unwrap(),
            _ => {
                let mut out = parts.pop().unwrap();
                while let Some(p) = parts.pop() {
                    out = Formula::or(p, out);
                }
                out
            }
        }
    }

    /// Right-folded conjunction; `true` for the empty sequence.
    pub fn and_all(mut parts: Vec<Formula>) -> Formula {
        match parts.len() {
            0 => Formula::True,
            1 => parts.pop().unwrap(),
            _ => {
                let mut out = parts.pop().unwrap();
                while let Some(p) = parts.pop() {
                    out = Formula::and(p, out);
                }
                out
            }
        }
    }

    pub fn lang_refs(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.walk(&mut |f| {
            if let Formula::Ef(l, _) | Formula::Ag(l, _) = f {
                out.insert(l.as_str());
            }
        });
        out
    }

    pub fn props(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.walk(&mut |f| {
            if let Formula::Lit { prop, .. } = f {
                out.insert(prop.as_str());
            }
        });
        out
    }

    pub fn ef_count(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |f| {
            if matches!(f, Formula::Ef(_, _)) {
                n += 1;
            }
        });
        n
    }

    pub fn ag_count(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |f| {
            if matches!(f, Formula::Ag(_, _)) {
                n += 1;
            }
        });
        n
    }

    fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a Formula)) {
        visit(self);
        match self {
            Formula::Or(a, b) | Formula::And(a, b) => {
                a.walk(visit);
                b.walk(visit);
            }
            Formula::Ef(_, body) | Formula::Ag(_, body) => body.walk(visit),
            _ => {}
        }
    }

    /// Every language reference resolves in `env`.
    pub fn validate_resolved(&self, env: &LangEnv) -> Result<(), LangError> {
        for name in self.lang_refs() {
            env.get(name)?;
        }
        Ok(())
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_inner(f)
    }
}

/// ε-freeness: every modality annotation excludes the empty word and bodies
/// are recursively ε-free.
pub fn is_epsilon_free(f: &Formula, env: &LangEnv) -> Result<bool, LangError> {
    Ok(match f {
        Formula::False | Formula::True | Formula::Lit { .. } => true,
        Formula::Or(a, b) | Formula::And(a, b) => {
            is_epsilon_free(a, env)? && is_epsilon_free(b, env)?
        }
        Formula::Ef(lang, body) | Formula::Ag(lang, body) => {
            !env.get(lang)?.contains_empty_word() && is_epsilon_free(body, env)?
        }
    })
}

/// Empty-word elimination.  Annotations containing ε are replaced by their
/// ε-free versions; an EF splits into a disjunction and an AG into a
/// conjunction with the body.  The environment gains the derived
/// `…__ne` languages.
///
/// When the stripped language is empty (the annotation was exactly {ε})
/// the vacuous modality is folded away: `EF[∅] φ` is false and `AG[∅] φ`
/// is true, and keeping them would cons ‖∅‖ = ω onto the body measure,
/// breaking the non-increase guarantee.
pub fn elim_ew(f: &Formula, env: &mut LangEnv) -> Result<Formula, LangError> {
    Ok(match f {
        Formula::False | Formula::True | Formula::Lit { .. } => f.clone(),
        Formula::Or(a, b) => Formula::or(elim_ew(a, env)?, elim_ew(b, env)?),
        Formula::And(a, b) => Formula::and(elim_ew(a, env)?, elim_ew(b, env)?),
        Formula::Ef(lang, body) => {
            let body = elim_ew(body, env)?;
            if env.get(lang)?.contains_empty_word() {
                let stripped = env.remove_epsilon_of(lang)?;
                if env.get(&stripped)?.is_empty() {
                    body
                } else {
                    Formula::or(body.clone(), Formula::ef(stripped, body))
                }
            } else {
                Formula::ef(lang.clone(), body)
            }
        }
        Formula::Ag(lang, body) => {
            let body = elim_ew(body, env)?;
            if env.get(lang)?.contains_empty_word() {
                let stripped = env.remove_epsilon_of(lang)?;
                if env.get(&stripped)?.is_empty() {
                    body
                } else {
                    Formula::and(body.clone(), Formula::ag(stripped, body))
                }
            } else {
                Formula::ag(lang.clone(), body)
            }
        }
    })
}

/// Equivalence-preserving constant folding: empty annotations collapse a
/// modality to its unit, {ε} annotations collapse it to the body, and the
/// boolean units fold away.  Searches run on the folded form; reports keep
/// the original.
pub fn simplify(f: &Formula, env: &LangEnv) -> Result<Formula, LangError> {
    Ok(match f {
        Formula::False | Formula::True | Formula::Lit { .. } => f.clone(),
        Formula::Or(a, b) => {
            let a = simplify(a, env)?;
            let b = simplify(b, env)?;
            match (a, b) {
                (Formula::True, _) | (_, Formula::True) => Formula::True,
                (Formula::False, x) | (x, Formula::False) => x,
                (a, b) => Formula::or(a, b),
            }
        }
        Formula::And(a, b) => {
            let a = simplify(a, env)?;
            let b = simplify(b, env)?;
            match (a, b) {
                (Formula::False, _) | (_, Formula::False) => Formula::False,
                (Formula::True, x) | (x, Formula::True) => x,
                (a, b) => Formula::and(a, b),
            }
        }
        Formula::Ef(lang, body) => {
            let body = simplify(body, env)?;
            let handle = env.get(lang)?;
            if handle.is_empty() {
                Formula::False
            } else if handle.norm() == crate::measure::OmegaPlusOne::Fin(0) {
                body
            } else {
                Formula::ef(lang.clone(), body)
            }
        }
        Formula::Ag(lang, body) => {
            let body = simplify(body, env)?;
            let handle = env.get(lang)?;
            if handle.is_empty() {
                Formula::True
            } else if handle.norm() == crate::measure::OmegaPlusOne::Fin(0) {
                body
            } else {
                Formula::ag(lang.clone(), body)
            }
        }
    })
}

/// μ: literals and constants give {nil}, boolean connectives take unions,
/// modalities cons ‖L‖ onto every entry of the body measure.
pub fn measure_of(f: &Formula, env: &LangEnv) -> Result<Measure, LangError> {
    Ok(match f {
        Formula::False | Formula::True | Formula::Lit { .. } => Measure::nil_singleton(),
        Formula::Or(a, b) | Formula::And(a, b) => {
            measure_of(a, env)?.union(&measure_of(b, env)?)
        }
        Formula::Ef(lang, body) | Formula::Ag(lang, body) => {
            let norm = env.get(lang)?.norm();
            measure_of(body, env)?.cons(norm)
        }
    })
}

/// The longest-annotation depth bound: the maximum over root-to-leaf AST
/// paths of the sum of longest annotation-word lengths.  `None` when some
/// annotation is not backed by a finite word set.
pub fn finite_annotation_depth(f: &Formula, env: &LangEnv) -> Result<Option<usize>, LangError> {
    Ok(match f {
        Formula::False | Formula::True | Formula::Lit { .. } => Some(0),
        Formula::Or(a, b) | Formula::And(a, b) => {
            match (finite_annotation_depth(a, env)?, finite_annotation_depth(b, env)?) {
                (Some(x), Some(y)) => Some(x.max(y)),
                _ => None,
            }
        }
        Formula::Ef(lang, body) | Formula::Ag(lang, body) => {
            let handle = env.get(lang)?;
            let longest = match handle.backend() {
                crate::lang::Backend::Finite(words) => {
                    Some(words.iter().map(|w| w.chars().count()).max().unwrap_or(0))
                }
                _ => None,
            };
            match (longest, finite_annotation_depth(body, env)?) {
                (Some(l), Some(d)) => Some(l + d),
                _ => None,
            }
        }
    })
}

impl Formula {
    fn fmt_inner(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::False => write!(f, "false"),
            Formula::True => write!(f, "true"),
            Formula::Lit { prop, negated } => {
                if *negated {
                    write!(f, "!{prop}")
                } else {
                    write!(f, "{prop}")
                }
            }
            Formula::Or(a, b) => {
                write!(f, "(")?;
                a.fmt_inner(f)?;
                write!(f, " | ")?;
                b.fmt_inner(f)?;
                write!(f, ")")
            }
            Formula::And(a, b) => {
                write!(f, "(")?;
                a.fmt_inner(f)?;
                write!(f, " & ")?;
                b.fmt_inner(f)?;
                write!(f, ")")
            }
            Formula::Ef(lang, body) => {
                write!(f, "EF[{lang}] ")?;
                body.fmt_inner(f)
            }
            Formula::Ag(lang, body) => {
                write!(f, "AG[{lang}] ")?;
                body.fmt_inner(f)
            }
        }
    }
}
