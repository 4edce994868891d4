use std::fmt;

use crate::error::{Error, Result};

/// One letter of the alphabet `S = {0, .., #S − 1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(pub u8);

impl Symbol {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

const DIGITS: &[u8; 36] = b"0123456789abcdefghijklmnopqrstuvwxyz";

/// Finite word `w = w₁…w_m` addressing the cell `K_w = ψ_{w₁} ∘ … ∘ ψ_{w_m}(K)`.
///
/// Words print as digit strings (`0-9a-z`), the empty word as `∅`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_symbols(symbols: impl IntoIterator<Item = usize>) -> Self {
        Word(symbols.into_iter().map(|s| s as u8).collect())
    }

    pub fn level(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.0.iter().map(|&s| Symbol(s))
    }

    pub fn symbol(&self, k: usize) -> Symbol {
        Symbol(self.0[k])
    }

    /// `w · v`.
    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn child(&self, s: usize) -> Word {
        let mut v = self.0.clone();
        v.push(s as u8);
        Word(v)
    }

    pub fn prefix(&self, len: usize) -> Word {
        Word(self.0[..len].to_vec())
    }

    pub fn suffix_from(&self, start: usize) -> Word {
        Word(self.0[start..].to_vec())
    }

    pub fn starts_with(&self, prefix: &Word) -> bool {
        self.0.starts_with(&prefix.0)
    }

    /// Position of this word in the lexicographic enumeration of `W_m`.
    pub fn index(&self, n_symbols: usize) -> usize {
        self.0.iter().fold(0, |acc, &s| acc * n_symbols + s as usize)
    }

    pub fn from_index(mut index: usize, level: usize, n_symbols: usize) -> Word {
        let mut v = vec![0u8; level];
        for slot in v.iter_mut().rev() {
            *slot = (index % n_symbols) as u8;
            index /= n_symbols;
        }
        Word(v)
    }

    /// Parses a digit string; `""` and `"∅"` denote the empty word.
    pub fn parse(text: &str, n_symbols: usize) -> Result<Word> {
        let t = text.trim();
        if t.is_empty() || t == "∅" {
            return Ok(Word::empty());
        }
        t.chars()
            .map(|c| match c.to_digit(36) {
                Some(d) if (d as usize) < n_symbols => Ok(d as u8),
                _ => Err(Error::Parse(format!("symbol {c:?} not in alphabet of size {n_symbols}"))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(Word)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("∅");
        }
        for &s in &self.0 {
            write!(f, "{}", DIGITS[s as usize] as char)?;
        }
        Ok(())
    }
}

/// All `#S^m` words of level `m`, in lexicographic order.
pub fn words_at_level(n_symbols: usize, level: usize) -> Vec<Word> {
    let count = n_symbols.pow(level as u32);
    (0..count).map(|i| Word::from_index(i, level, n_symbols)).collect()
}
