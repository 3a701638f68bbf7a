// SPDX-License-Identifier: Apache-2.0

//! Primitive reversible gates.
//!
//! Every gate is stored as an enumerated truth table generated from its
//! boolean equations when the gate is built. Inputs and outputs are packed
//! into integers with port `i` at bit `i`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::Serialize;

use crate::bits::BitVector;
use crate::error::{Error, Result};

/// Largest arity for which [`verify_gate`] will enumerate the truth table.
pub const EXHAUSTIVE_LIMIT: usize = 16;

/// Largest arity a table-backed gate may have at all.
pub const TABLE_LIMIT: usize = 24;

#[derive(Clone, PartialEq, Eq)]
pub struct GateKind {
    name: String,
    arity: usize,
    table: Vec<u32>,
    inverse: Option<Vec<u32>>,
    conservative: bool,
}

impl fmt::Debug for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GateKind")
            .field("name", &self.name)
            .field("arity", &self.arity)
            .field("bijective", &self.inverse.is_some())
            .field("conservative", &self.conservative)
            .finish()
    }
}

impl GateKind {
    /// Builds a gate by evaluating `f` on every input pattern.
    ///
    /// `f` receives the inputs in port order and must return exactly
    /// `arity` outputs.
    pub fn from_fn<F>(name: impl Into<String>, arity: usize, f: F) -> Result<Self>
    where
        F: Fn(&[bool]) -> Vec<bool>,
    {
        let name = name.into();
        check_table_arity(&name, arity)?;
        let mut table = Vec::with_capacity(1 << arity);
        let mut input = vec![false; arity];
        for x in 0..1u32 << arity {
            for (i, b) in input.iter_mut().enumerate() {
                *b = (x >> i) & 1 == 1;
            }
            let out = f(&input);
            if out.len() != arity {
                return Err(Error::WidthMismatch {
                    expected: arity,
                    actual: out.len(),
                });
            }
            table.push(pack(&out));
        }
        Self::from_table(name, arity, table)
    }

    pub fn from_table(name: impl Into<String>, arity: usize, table: Vec<u32>) -> Result<Self> {
        let name = name.into();
        check_table_arity(&name, arity)?;
        let size = 1usize << arity;
        if table.len() != size {
            return Err(Error::WidthMismatch {
                expected: size,
                actual: table.len(),
            });
        }
        if let Some(&bad) = table.iter().find(|&&y| (y as usize) >= size) {
            return Err(Error::WidthMismatch {
                expected: arity,
                actual: 32 - bad.leading_zeros() as usize,
            });
        }
        let mut inverse = vec![u32::MAX; size];
        let mut bijective = true;
        for (x, &y) in table.iter().enumerate() {
            if inverse[y as usize] != u32::MAX {
                bijective = false;
                break;
            }
            inverse[y as usize] = x as u32;
        }
        let conservative = table
            .iter()
            .enumerate()
            .all(|(x, &y)| (x as u32).count_ones() == y.count_ones());
        Ok(GateKind {
            name,
            arity,
            table,
            inverse: bijective.then_some(inverse),
            conservative,
        })
    }

    /// Feynman (controlled-NOT): `(a, b) -> (a, a ^ b)`.
    pub fn feynman() -> Arc<GateKind> {
        standard_library().get("FG").expect("FG is a standard gate")
    }

    /// Toffoli: `(a, b, c) -> (a, b, c ^ a·b)`.
    pub fn toffoli() -> Arc<GateKind> {
        standard_library().get("TG").expect("TG is a standard gate")
    }

    /// Fredkin (controlled swap, conservative).
    pub fn fredkin() -> Arc<GateKind> {
        standard_library().get("FRG").expect("FRG is a standard gate")
    }

    /// The 4x4 TSG gate.
    pub fn tsg() -> Arc<GateKind> {
        standard_library().get("TSG").expect("TSG is a standard gate")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_bijective(&self) -> bool {
        self.inverse.is_some()
    }

    pub fn is_conservative(&self) -> bool {
        self.conservative
    }

    /// Table lookup on a packed input. Panics if `x` has bits above `arity`.
    pub fn apply_packed(&self, x: u32) -> u32 {
        self.table[x as usize]
    }

    pub fn invert_packed(&self, y: u32) -> Option<u32> {
        self.inverse.as_ref().map(|inv| inv[y as usize])
    }

    pub fn apply(&self, input: &BitVector) -> Result<BitVector> {
        self.check_width(input)?;
        Ok(unpack(self.apply_packed(pack(input.bits())), self.arity))
    }

    pub fn invert(&self, output: &BitVector) -> Result<BitVector> {
        self.check_width(output)?;
        let x = self
            .invert_packed(pack(output.bits()))
            .ok_or_else(|| Error::NotBijective(self.name.clone()))?;
        Ok(unpack(x, self.arity))
    }

    fn check_width(&self, v: &BitVector) -> Result<()> {
        if v.width() != self.arity {
            return Err(Error::WidthMismatch {
                expected: self.arity,
                actual: v.width(),
            });
        }
        Ok(())
    }
}

fn check_table_arity(name: &str, arity: usize) -> Result<()> {
    if arity == 0 || arity > TABLE_LIMIT {
        return Err(Error::ArityTooLarge {
            gate: name.to_string(),
            arity,
            limit: TABLE_LIMIT,
        });
    }
    Ok(())
}

pub(crate) fn pack(bits: &[bool]) -> u32 {
    bits.iter()
        .enumerate()
        .fold(0, |acc, (i, &b)| acc | (u32::from(b) << i))
}

pub(crate) fn unpack(x: u32, width: usize) -> BitVector {
    (0..width).map(|i| (x >> i) & 1 == 1).collect::<Vec<_>>().into()
}

pub fn apply_gate(g: &GateKind, input: &BitVector) -> Result<BitVector> {
    g.apply(input)
}

pub fn invert_gate(g: &GateKind, output: &BitVector) -> Result<BitVector> {
    g.invert(output)
}

/// Full adder on a single TSG with the third port tied to 0.
///
/// Returns `(sum, carry)` read from the third and fourth outputs.
pub fn tsg_as_full_adder(a: bool, b: bool, cin: bool) -> (bool, bool) {
    let y = GateKind::tsg().apply_packed(pack(&[a, b, false, cin]));
    ((y >> 2) & 1 == 1, (y >> 3) & 1 == 1)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GateReport {
    pub gate: String,
    pub arity: usize,
    pub bijective: bool,
    pub conservative: bool,
    /// Input ports copied verbatim to some output port on every pattern.
    pub one_through_inputs: BTreeSet<usize>,
}

/// Checks a gate by exhaustive enumeration of its truth table.
pub fn verify_gate(g: &GateKind) -> Result<GateReport> {
    if g.arity > EXHAUSTIVE_LIMIT {
        return Err(Error::ArityTooLarge {
            gate: g.name.clone(),
            arity: g.arity,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let n = g.arity;
    let mut seen = vec![false; 1 << n];
    let mut bijective = true;
    let mut conservative = true;
    // through[i] holds the output ports that have matched input i so far.
    let mut through: Vec<u32> = vec![(1u32 << n) - 1; n];
    for x in 0..1u32 << n {
        let y = g.table[x as usize];
        if std::mem::replace(&mut seen[y as usize], true) {
            bijective = false;
        }
        if x.count_ones() != y.count_ones() {
            conservative = false;
        }
        for (i, mask) in through.iter_mut().enumerate() {
            let broadcast = if (x >> i) & 1 == 1 { u32::MAX } else { 0 };
            *mask &= !(y ^ broadcast);
        }
    }
    Ok(GateReport {
        gate: g.name.clone(),
        arity: n,
        bijective,
        conservative,
        one_through_inputs: through
            .iter()
            .enumerate()
            .filter(|(_, &m)| m != 0)
            .map(|(i, _)| i)
            .collect(),
    })
}

/// Gates addressable by name in netlist text.
#[derive(Clone, Debug, Default)]
pub struct GateLibrary {
    gates: BTreeMap<String, Arc<GateKind>>,
}

impl GateLibrary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, gate: GateKind) -> Arc<GateKind> {
        let gate = Arc::new(gate);
        self.gates.insert(gate.name.clone(), gate.clone());
        gate
    }

    pub fn get(&self, name: &str) -> Option<Arc<GateKind>> {
        self.gates.get(name).cloned()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.gates.keys().map(String::as_str)
    }
}

/// The library holding `FG`, `TG`, `FRG` and `TSG`.
pub fn standard_library() -> &'static GateLibrary {
    static LIB: OnceLock<GateLibrary> = OnceLock::new();
    LIB.get_or_init(|| {
        let mut lib = GateLibrary::new();
        for g in [feynman_gate(), toffoli_gate(), fredkin_gate(), tsg_gate()] {
            lib.insert(g);
        }
        lib
    })
}

fn feynman_gate() -> GateKind {
    GateKind::from_fn("FG", 2, |x| vec![x[0], x[0] ^ x[1]]).expect("valid arity")
}

fn toffoli_gate() -> GateKind {
    GateKind::from_fn("TG", 3, |x| vec![x[0], x[1], x[2] ^ (x[0] & x[1])]).expect("valid arity")
}

fn fredkin_gate() -> GateKind {
    GateKind::from_fn("FRG", 3, |x| {
        let (x1, x2, x3) = (x[0], x[1], x[2]);
        vec![x1, (!x1 & x2) | (x1 & x3), (x1 & x2) | (!x1 & x3)]
    })
    .expect("valid arity")
}

// P = A
// Q = A'C' ^ B'
// R = (A'C' ^ B') ^ D
// S = (A'C' ^ B')·D ^ (AB ^ C)
fn tsg_gate() -> GateKind {
    GateKind::from_fn("TSG", 4, |x| {
        let (a, b, c, d) = (x[0], x[1], x[2], x[3]);
        let q = (!a & !c) ^ !b;
        vec![a, q, q ^ d, (q & d) ^ ((a & b) ^ c)]
    })
    .expect("valid arity")
}
