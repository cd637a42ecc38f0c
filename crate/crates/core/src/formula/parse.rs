//! Recursive-descent parser for the formula surface syntax:
//! `true`, `false`, ident, `!`ident, `(f | f)`, `(f & f)`,
//! `EF[name] f`, `AG[name] f`.

use super::Formula;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("formula syntax error at byte {pos}: {msg}")]
pub struct FormulaParseError {
    pub pos: usize,
    pub msg: String,
}

pub fn parse_formula(text: &str) -> Result<Formula, FormulaParseError> {
    let mut p = Parser {
        chars: text.char_indices().collect(),
        pos: 0,
    };
    let f = p.formula()?;
    p.skip_ws();
    if p.pos < p.chars.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(f)
}

struct Parser {
    chars: Vec<(usize, char)>,
    pos: usize,
}

impl Parser {
    fn error(&self, msg: &str) -> FormulaParseError {
        let pos = self
            .chars
            .get(self.pos)
            .map(|(b, _)| *b)
            .unwrap_or_else(|| self.chars.last().map(|(b, c)| b + c.len_utf8()).unwrap_or(0));
        FormulaParseError {
            pos,
            msg: msg.to_string(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|(_, c)| *c)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn expect(&mut self, c: char) -> Result<(), FormulaParseError> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected `{c}`")))
        }
    }

    fn ident(&mut self) -> Result<String, FormulaParseError> {
        self.skip_ws();
        let mut out = String::new();
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || c == '_' {
                out.push(c);
                self.pos += 1;
            } else {
                break;
            }
        }
        if out.is_empty() {
            return Err(self.error("expected an identifier"));
        }
        Ok(out)
    }

    fn formula(&mut self) -> Result<Formula, FormulaParseError> {
        self.skip_ws();
        match self.peek() {
            Some('(') => {
                self.bump();
                let left = self.formula()?;
                self.skip_ws();
                let op = self.bump().ok_or_else(|| self.error("expected `|` or `&`"))?;
                let combined = match op {
                    '|' => {
                        let right = self.formula()?;
                        Formula::or(left, right)
                    }
                    '&' => {
                        let right = self.formula()?;
                        Formula::and(left, right)
                    }
                    _ => return Err(self.error("expected `|` or `&`")),
                };
                self.expect(')')?;
                Ok(combined)
            }
            Some('!') => {
                self.bump();
                let prop = self.ident()?;
                Ok(Formula::neg_lit(prop))
            }
            Some(c) if c.is_alphanumeric() || c == '_' => {
                let word = self.ident()?;
                match word.as_str() {
                    "true" => Ok(Formula::True),
                    "false" => Ok(Formula::False),
                    "EF" | "AG" => {
                        self.expect('[')?;
                        let lang = self.ident()?;
                        self.expect(']')?;
                        let body = self.formula()?;
                        Ok(if word == "EF" {
                            Formula::ef(lang, body)
                        } else {
                            Formula::ag(lang, body)
                        })
                    }
                    _ => Ok(Formula::lit(word)),
                }
            }
            _ => Err(self.error("expected a formula")),
        }
    }
}
