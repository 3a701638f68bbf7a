// SPDX-License-Identifier: Apache-2.0

//! Fixed-width bit vectors. Position 0 is the least significant bit.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BitVector(Vec<bool>);

impl BitVector {
    pub fn zeros(width: usize) -> Self {
        BitVector(vec![false; width])
    }

    /// Low `width` bits of `value`. Bits above position 127 are zero.
    pub fn from_u128(value: u128, width: usize) -> Self {
        BitVector(
            (0..width)
                .map(|i| i < 128 && (value >> i) & 1 == 1)
                .collect(),
        )
    }

    /// Integer value of the vector; bits at positions ≥ 128 are ignored.
    pub fn to_u128(&self) -> u128 {
        self.0
            .iter()
            .take(128)
            .enumerate()
            .fold(0, |acc, (i, &b)| acc | (u128::from(b) << i))
    }

    pub fn width(&self) -> usize {
        self.0.len()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        self.0.get(i).copied()
    }

    pub fn hamming_weight(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    /// Number of differing positions; the shorter vector is zero-extended.
    pub fn hamming_distance(&self, other: &BitVector) -> usize {
        let n = self.width().max(other.width());
        (0..n)
            .filter(|&i| self.get(i).unwrap_or(false) != other.get(i).unwrap_or(false))
            .count()
    }

    pub fn concat(&self, other: &BitVector) -> BitVector {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        BitVector(v)
    }
}

impl From<Vec<bool>> for BitVector {
    fn from(v: Vec<bool>) -> Self {
        BitVector(v)
    }
}

impl From<&[bool]> for BitVector {
    fn from(v: &[bool]) -> Self {
        BitVector(v.to_vec())
    }
}

impl<const N: usize> From<[u8; N]> for BitVector {
    /// Tuple notation: element 0 is position 0. Any non-zero byte is a 1.
    fn from(v: [u8; N]) -> Self {
        BitVector(v.iter().map(|&b| b != 0).collect())
    }
}

impl From<BitVector> for Vec<bool> {
    fn from(v: BitVector) -> Self {
        v.0
    }
}

impl fmt::Display for BitVector {
    /// Tuple notation in position order, e.g. `(1,0,1)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, b) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(if *b { "1" } else { "0" })?;
        }
        f.write_str(")")
    }
}
