//! Measurement outcomes as fixed-length bit strings.
//!
//! Qubit 0 is the leftmost character and the most significant bit of the
//! basis-state index, so `"100"` is basis index 4 on three qubits.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bitstring(Vec<bool>);

impl Bitstring {
    pub fn zeros(len: usize) -> Self {
        Self(vec![false; len])
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn from_index(index: usize, len: usize) -> Self {
        Self((0..len).map(|q| (index >> (len - 1 - q)) & 1 == 1).collect())
    }

    pub fn to_index(&self) -> usize {
        self.0.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, qubit: usize) -> bool {
        self.0[qubit]
    }

    pub fn set(&mut self, qubit: usize, value: bool) {
        self.0[qubit] = value;
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    /// Fails with `MalformedBitstring` unless the string has exactly `expected` bits.
    pub fn expect_len(&self, expected: usize) -> Result<()> {
        if self.len() == expected {
            Ok(())
        } else {
            Err(Error::MalformedBitstring { expected, got: self.to_string() })
        }
    }

    /// Parses and length-checks in one step.
    pub fn parse_with_len(text: &str, expected: usize) -> Result<Self> {
        let bits: Bitstring = text
            .parse()
            .map_err(|_| Error::MalformedBitstring { expected, got: text.to_string() })?;
        bits.expect_len(expected)?;
        Ok(bits)
    }
}

impl FromStr for Bitstring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::MalformedBitstring { expected: s.len(), got: s.to_string() }),
            })
            .collect::<Result<Vec<_>>>()
            .map(Bitstring)
    }
}

impl fmt::Display for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}
