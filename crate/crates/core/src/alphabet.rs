//! Alphabets and word helpers.
//!
//! An [`Alphabet`] is the base letter set Σ.  The distinguished end marker
//! `$` is never a member of Σ; languages over Σ ∪ {$} declare the marker
//! explicitly on their own letter sets.

use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

/// The distinguished end-marker letter.  Never part of an [`Alphabet`].
pub const DOLLAR: char = '$';

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AlphabetError {
    #[error("the marker `$` cannot be a base letter")]
    DollarInAlphabet,
    #[error("alphabet must contain at least one letter")]
    Empty,
}

/// Base letter set Σ.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Alphabet {
    letters: BTreeSet<char>,
}

impl Alphabet {
    pub fn new(letters: impl IntoIterator<Item = char>) -> Result<Self, AlphabetError> {
        let letters: BTreeSet<char> = letters.into_iter().collect();
        if letters.contains(&DOLLAR) {
            return Err(AlphabetError::DollarInAlphabet);
        }
        if letters.is_empty() {
            return Err(AlphabetError::Empty);
        }
        Ok(Alphabet { letters })
    }

    /// The binary alphabet {0, 1} used by the palindrome machinery.
    pub fn binary() -> Self {
        Alphabet::new(['0', '1']).expect("binary alphabet is well formed")
    }

    pub fn letters(&self) -> impl Iterator<Item = char> + '_ {
        self.letters.iter().copied()
    }

    /// Σ ∪ {$}, sorted.
    pub fn letters_with_dollar(&self) -> Vec<char> {
        let mut v: Vec<char> = self.letters.iter().copied().collect();
        v.push(DOLLAR);
        v.sort_unstable();
        v
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn contains(&self, c: char) -> bool {
        self.letters.contains(&c)
    }

    pub fn contains_with_dollar(&self, c: char) -> bool {
        c == DOLLAR || self.contains(c)
    }

    /// True iff every letter of `w` is in Σ.
    pub fn word_over(&self, w: &str) -> bool {
        w.chars().all(|c| self.contains(c))
    }

    /// True iff every letter of `w` is in Σ ∪ {$}.
    pub fn word_over_dollar(&self, w: &str) -> bool {
        w.chars().all(|c| self.contains_with_dollar(c))
    }

    /// All words over Σ of length at most `max_len`, shortlex order.
    pub fn words_up_to(&self, max_len: usize) -> Vec<String> {
        words_up_to(&self.letters.iter().copied().collect::<Vec<_>>(), max_len)
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for c in &self.letters {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{c}")?;
            first = false;
        }
        Ok(())
    }
}

/// All words over `letters` of length at most `max_len`, shortlex order.
pub fn words_up_to(letters: &[char], max_len: usize) -> Vec<String> {
    let mut sorted: Vec<char> = letters.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut out = vec![String::new()];
    let mut layer = vec![String::new()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(layer.len() * sorted.len());
        for w in &layer {
            for &c in &sorted {
                let mut e = w.clone();
                e.push(c);
                next.push(e);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

pub fn reverse_word(w: &str) -> String {
    w.chars().rev().collect()
}

pub fn is_palindrome(w: &str) -> bool {
    let chars: Vec<char> = w.chars().collect();
    let n = chars.len();
    (0..n / 2).all(|i| chars[i] == chars[n - 1 - i])
}

/// Renders ε as `_` so empty words stay visible in reports.
pub fn display_word(w: &str) -> &str {
    if w.is_empty() {
        "_"
    } else {
        w
    }
}
