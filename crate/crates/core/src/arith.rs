// SPDX-License-Identifier: Apache-2.0

//! Adder generators built from TSG full adders, plus a conventional
//! AND/XOR/OR ripple adder used as an irreversible baseline.
//!
//! Bus bit 0 is the least significant bit everywhere.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gatelib::GateKind;
use crate::netlist::{Netlist, NetlistBuilder};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AdderKind {
    Cpa,
    Csa42,
    Csa52,
    IrreversibleCpa,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AdderSpec {
    pub width: usize,
    pub kind: AdderKind,
}

pub enum Adder {
    Reversible(Netlist),
    Irreversible(IrreversibleNetlist),
}

impl AdderSpec {
    pub fn new(kind: AdderKind, width: usize) -> Result<Self> {
        check_width(width)?;
        Ok(AdderSpec { width, kind })
    }

    pub fn build(&self) -> Result<Adder> {
        Ok(match self.kind {
            AdderKind::Cpa => Adder::Reversible(build_cpa(self.width)?),
            AdderKind::Csa42 => Adder::Reversible(build_csa42(self.width)?),
            AdderKind::Csa52 => Adder::Reversible(build_csa52(self.width)?),
            AdderKind::IrreversibleCpa => Adder::Irreversible(build_irreversible_cpa(self.width)?),
        })
    }
}

fn check_width(width: usize) -> Result<()> {
    if width == 0 {
        return Err(Error::ZeroWidth);
    }
    Ok(())
}

/// Appends one TSG configured as a full adder: `(a, b, 0, cin)` gives
/// garbage on the first two outputs, then sum and carry.
pub(crate) fn push_full_adder(
    b: &mut NetlistBuilder,
    tag: &str,
    a: &str,
    bb: &str,
    cin: &str,
    sum: &str,
    carry: &str,
) {
    let zero = format!("{tag}_z");
    let (g0, g1) = (format!("{tag}_g0"), format!("{tag}_g1"));
    b.constant(zero.as_str(), false)
        .gate(GateKind::tsg(), [a, bb, zero.as_str(), cin], [g0.as_str(), g1.as_str(), sum, carry])
        .garbage(g0)
        .garbage(g1);
}

/// A single TSG full adder with ports `A`, `B`, `Cin` -> `Sum`, `Cout`.
pub fn build_full_adder() -> Netlist {
    let mut b = NetlistBuilder::new();
    b.input("A").input("B").input("Cin").constant("Z", false);
    b.gate(GateKind::tsg(), ["A", "B", "Z", "Cin"], ["P", "Q", "Sum", "Cout"]);
    b.output("Sum").output("Cout").garbage("P").garbage("Q");
    b.build()
}

/// Ripple-carry adder: `a[i]`, `b[i]`, `cin` -> `s[i]`, `cout`.
pub fn build_cpa(width: usize) -> Result<Netlist> {
    check_width(width)?;
    let mut b = NetlistBuilder::new();
    (0..width).for_each(|i| {
        b.input(format!("a{i}"));
    });
    (0..width).for_each(|i| {
        b.input(format!("b{i}"));
    });
    b.input("cin");
    for i in 0..width {
        let carry_in = if i == 0 { "cin".to_string() } else { format!("c{i}") };
        let carry_out = if i + 1 == width {
            "cout".to_string()
        } else {
            format!("c{}", i + 1)
        };
        push_full_adder(
            &mut b,
            &format!("fa{i}"),
            &format!("a{i}"),
            &format!("b{i}"),
            &carry_in,
            &format!("s{i}"),
            &carry_out,
        );
    }
    (0..width).for_each(|i| {
        b.output(format!("s{i}"));
    });
    b.output("cout");
    Ok(b.build())
}

/// A 3:2 carry-save row: independent full adders per bit, no carry chain.
/// Inputs `a[i]`, `b[i]`, `c[i]`; outputs `sum[i]` (weight 2^i) and
/// `carry[i]` (weight 2^(i+1)).
pub fn build_csa32(width: usize) -> Result<Netlist> {
    check_width(width)?;
    let mut b = NetlistBuilder::new();
    for bus in ["a", "b", "c"] {
        (0..width).for_each(|i| {
            b.input(format!("{bus}{i}"));
        });
    }
    for i in 0..width {
        push_full_adder(
            &mut b,
            &format!("fa{i}"),
            &format!("a{i}"),
            &format!("b{i}"),
            &format!("c{i}"),
            &format!("sum{i}"),
            &format!("carry{i}"),
        );
    }
    for bus in ["sum", "carry"] {
        (0..width).for_each(|i| {
            b.output(format!("{bus}{i}"));
        });
    }
    Ok(b.build())
}

/// Four-to-two compressor row. Per slice `i`:
/// `FA1(a, b, c) -> (t, cout[i])`, `FA2(t, d, cin[i]) -> (sum[i], carry[i])`,
/// with `cout[i]` feeding `cin[i+1]`. Ports: inputs `a..d[i]`, `cin`;
/// outputs `sum[i]`, `carry[i]`, `cout`.
pub fn build_csa42(width: usize) -> Result<Netlist> {
    check_width(width)?;
    let mut b = NetlistBuilder::new();
    for bus in ["a", "b", "c", "d"] {
        (0..width).for_each(|i| {
            b.input(format!("{bus}{i}"));
        });
    }
    b.input("cin");
    for i in 0..width {
        let cin = if i == 0 { "cin".to_string() } else { format!("k{i}") };
        let cout = if i + 1 == width {
            "cout".to_string()
        } else {
            format!("k{}", i + 1)
        };
        let t = format!("t{i}");
        push_full_adder(
            &mut b,
            &format!("fa{i}_1"),
            &format!("a{i}"),
            &format!("b{i}"),
            &format!("c{i}"),
            &t,
            &cout,
        );
        push_full_adder(
            &mut b,
            &format!("fa{i}_2"),
            &t,
            &format!("d{i}"),
            &cin,
            &format!("sum{i}"),
            &format!("carry{i}"),
        );
    }
    for bus in ["sum", "carry"] {
        (0..width).for_each(|i| {
            b.output(format!("{bus}{i}"));
        });
    }
    b.output("cout");
    Ok(b.build())
}

/// Five-to-two compressor row. Per slice `i`:
/// `FA1(a, b, c) -> (t, cout1[i])`, `FA2(t, d, e) -> (u, cout2[i])`,
/// `FA3(u, cin1[i], cin2[i]) -> (sum[i], carry[i])`, with both couts
/// feeding the next slice's cins. Ports: inputs `a..e[i]`, `cin1`, `cin2`;
/// outputs `sum[i]`, `carry[i]`, `cout1`, `cout2`.
pub fn build_csa52(width: usize) -> Result<Netlist> {
    check_width(width)?;
    let mut b = NetlistBuilder::new();
    for bus in ["a", "b", "c", "d", "e"] {
        (0..width).for_each(|i| {
            b.input(format!("{bus}{i}"));
        });
    }
    b.input("cin1").input("cin2");
    let chain = |name: &str, i: usize| -> (String, String) {
        let cin = if i == 0 { format!("cin{name}") } else { format!("k{name}_{i}") };
        let cout = if i + 1 == width {
            format!("cout{name}")
        } else {
            format!("k{name}_{}", i + 1)
        };
        (cin, cout)
    };
    for i in 0..width {
        let (cin1, cout1) = chain("1", i);
        let (cin2, cout2) = chain("2", i);
        let (t, u) = (format!("t{i}"), format!("u{i}"));
        push_full_adder(
            &mut b,
            &format!("fa{i}_1"),
            &format!("a{i}"),
            &format!("b{i}"),
            &format!("c{i}"),
            &t,
            &cout1,
        );
        push_full_adder(&mut b, &format!("fa{i}_2"), &t, &format!("d{i}"), &format!("e{i}"), &u, &cout2);
        push_full_adder(
            &mut b,
            &format!("fa{i}_3"),
            &u,
            &cin1,
            &cin2,
            &format!("sum{i}"),
            &format!("carry{i}"),
        );
    }
    for bus in ["sum", "carry"] {
        (0..width).for_each(|i| {
            b.output(format!("{bus}{i}"));
        });
    }
    b.output("cout1").output("cout2");
    Ok(b.build())
}

fn word_bits(words: &[u128], width: usize) -> Vec<bool> {
    words
        .iter()
        .flat_map(|&w| (0..width).map(move |i| i < 128 && (w >> i) & 1 == 1))
        .collect()
}

fn bits_word(bits: &[bool]) -> u128 {
    bits.iter()
        .take(128)
        .enumerate()
        .fold(0, |acc, (i, &b)| acc | (u128::from(b) << i))
}

/// Adds two words on a netlist from [`build_cpa`]. Returns `(sum, cout)`.
pub fn eval_cpa(n: &Netlist, width: usize, a: u128, b: u128, cin: bool) -> Result<(u128, bool)> {
    let mut inputs = word_bits(&[a, b], width);
    inputs.push(cin);
    let out = n.eval(&inputs)?;
    Ok((bits_word(&out[..width]), out[width]))
}

/// Sum and carry vectors of a compressor row. `carry` bit `i` has weight
/// `2^(i+1)`; `couts` are the final chain outputs, weight `2^width`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CarrySave {
    pub sum: u128,
    pub carry: u128,
    pub couts: Vec<bool>,
}

impl CarrySave {
    /// Integer value represented by the outputs.
    pub fn value(&self, width: usize) -> u128 {
        let chain: u128 = self.couts.iter().map(|&c| u128::from(c)).sum();
        self.sum + (self.carry << 1) + (chain << width)
    }
}

fn eval_compressor(n: &Netlist, width: usize, words: &[u128], cins: &[bool]) -> Result<CarrySave> {
    let mut inputs = word_bits(words, width);
    inputs.extend_from_slice(cins);
    let out = n.eval(&inputs)?;
    Ok(CarrySave {
        sum: bits_word(&out[..width]),
        carry: bits_word(&out[width..2 * width]),
        couts: out[2 * width..2 * width + cins.len()].to_vec(),
    })
}

pub fn eval_csa32(n: &Netlist, width: usize, words: [u128; 3]) -> Result<CarrySave> {
    eval_compressor(n, width, &words, &[])
}

pub fn eval_csa42(n: &Netlist, width: usize, words: [u128; 4], cin: bool) -> Result<CarrySave> {
    eval_compressor(n, width, &words, &[cin])
}

pub fn eval_csa52(n: &Netlist, width: usize, words: [u128; 5], cins: [bool; 2]) -> Result<CarrySave> {
    eval_compressor(n, width, &words, &cins)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LogicOp {
    And,
    Or,
    Xor,
    Not,
}

impl LogicOp {
    pub fn arity(self) -> usize {
        match self {
            LogicOp::Not => 1,
            _ => 2,
        }
    }

    pub fn eval(self, x: &[bool]) -> bool {
        match self {
            LogicOp::And => x[0] & x[1],
            LogicOp::Or => x[0] | x[1],
            LogicOp::Xor => x[0] ^ x[1],
            LogicOp::Not => !x[0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogicGate {
    pub op: LogicOp,
    pub inputs: Vec<String>,
    pub output: String,
}

/// Conventional many-to-one gate network. Fan-out is allowed; gates are
/// stored in evaluation order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IrreversibleNetlist {
    inputs: Vec<String>,
    gates: Vec<LogicGate>,
    outputs: Vec<String>,
}

impl IrreversibleNetlist {
    /// Gates must be listed in evaluation order.
    pub fn new(inputs: Vec<String>, gates: Vec<LogicGate>, outputs: Vec<String>) -> Self {
        IrreversibleNetlist { inputs, gates, outputs }
    }

    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    pub fn gates(&self) -> &[LogicGate] {
        &self.gates
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    pub fn eval(&self, inputs: &[bool]) -> Result<Vec<bool>> {
        if inputs.len() != self.inputs.len() {
            return Err(Error::WidthMismatch {
                expected: self.inputs.len(),
                actual: inputs.len(),
            });
        }
        let mut values: HashMap<&str, bool> =
            self.inputs.iter().map(String::as_str).zip(inputs.iter().copied()).collect();
        let mut buf = Vec::with_capacity(2);
        for g in &self.gates {
            buf.clear();
            for w in &g.inputs {
                buf.push(*values.get(w.as_str()).ok_or_else(|| Error::UnknownWire(w.clone()))?);
            }
            values.insert(&g.output, g.op.eval(&buf));
        }
        self.outputs
            .iter()
            .map(|w| values.get(w.as_str()).copied().ok_or_else(|| Error::UnknownWire(w.clone())))
            .collect()
    }
}

/// Ripple adder from XOR/AND/OR full adders, ports as in [`build_cpa`].
pub fn build_irreversible_cpa(width: usize) -> Result<IrreversibleNetlist> {
    check_width(width)?;
    let mut n = IrreversibleNetlist::default();
    n.inputs.extend((0..width).map(|i| format!("a{i}")));
    n.inputs.extend((0..width).map(|i| format!("b{i}")));
    n.inputs.push("cin".into());
    let mut gate = |op, inputs: [&String; 2], output: String| {
        n.gates.push(LogicGate {
            op,
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
            output,
        })
    };
    let mut carry = "cin".to_string();
    for i in 0..width {
        let (a, b) = (format!("a{i}"), format!("b{i}"));
        let (x, p, q) = (format!("x{i}"), format!("p{i}"), format!("q{i}"));
        let next = if i + 1 == width {
            "cout".to_string()
        } else {
            format!("c{}", i + 1)
        };
        gate(LogicOp::Xor, [&a, &b], x.clone());
        gate(LogicOp::Xor, [&x, &carry], format!("s{i}"));
        gate(LogicOp::And, [&a, &b], p.clone());
        gate(LogicOp::And, [&x, &carry], q.clone());
        gate(LogicOp::Or, [&p, &q], next.clone());
        carry = next;
    }
    n.outputs.extend((0..width).map(|i| format!("s{i}")));
    n.outputs.push("cout".into());
    Ok(n)
}

pub fn eval_irreversible_cpa(
    n: &IrreversibleNetlist,
    width: usize,
    a: u128,
    b: u128,
    cin: bool,
) -> Result<(u128, bool)> {
    let mut inputs = word_bits(&[a, b], width);
    inputs.push(cin);
    let out = n.eval(&inputs)?;
    Ok((bits_word(&out[..width]), out[width]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{CostReport, RoundTripMode};

    fn cost(gates: usize, garbage: usize, delay: usize) -> (usize, usize, usize) {
        (gates, garbage, delay)
    }

    fn triple(c: CostReport) -> (usize, usize, usize) {
        (c.gate_count, c.garbage_count, c.unit_delay)
    }

    #[test]
    fn full_adder_matches_table_row() {
        let fa = build_full_adder();
        assert_eq!(triple(fa.cost_report().unwrap()), cost(1, 2, 1));
        assert_eq!(fa.eval(&[true, true, false]).unwrap()[..2], [false, true]);
        for x in 0..8u8 {
            let bits = [x & 1 == 1, x & 2 == 2, x & 4 == 4];
            let total = x.count_ones();
            let out = fa.eval(&bits).unwrap();
            assert_eq!(u32::from(out[0]) + 2 * u32::from(out[1]), total);
        }
    }

    #[test]
    fn cpa_examples() {
        let n = build_cpa(3).unwrap();
        assert_eq!(eval_cpa(&n, 3, 5, 3, false).unwrap(), (0, true));
        let n = build_cpa(4).unwrap();
        assert_eq!(eval_cpa(&n, 4, 0, 0, false).unwrap(), (0, false));
        assert_eq!(triple(n.cost_report().unwrap()), cost(4, 8, 4));
    }

    #[test]
    fn zero_width_is_rejected() {
        assert!(matches!(build_cpa(0), Err(Error::ZeroWidth)));
        assert!(matches!(build_csa42(0), Err(Error::ZeroWidth)));
        assert!(matches!(AdderSpec::new(AdderKind::Csa52, 0), Err(Error::ZeroWidth)));
    }

    #[test]
    fn csa42_single_slice() {
        let n = build_csa42(1).unwrap();
        let out = eval_csa42(&n, 1, [1, 1, 1, 1], false).unwrap();
        assert_eq!((out.sum, out.carry, out.couts.clone()), (0, 1, vec![true]));
        assert_eq!(out.value(1), 4);
        let zero = eval_csa42(&n, 1, [0; 4], false).unwrap();
        assert_eq!((zero.sum, zero.carry, zero.couts), (0, 0, vec![false]));
    }

    #[test]
    fn csa52_single_slice() {
        let n = build_csa52(1).unwrap();
        let out = eval_csa52(&n, 1, [1; 5], [true, true]).unwrap();
        assert_eq!(out.sum, 1);
        let carries = out.carry as u32 + out.couts.iter().filter(|&&c| c).count() as u32;
        assert_eq!(carries, 3);
        assert_eq!(out.value(1), 7);
        assert_eq!(triple(n.cost_report().unwrap()), cost(3, 6, 3));
        let zero = eval_csa52(&n, 1, [0; 5], [false, false]).unwrap();
        assert_eq!(zero.value(1), 0);
    }

    #[test]
    fn structural_costs_scale_linearly() {
        for w in 1..=8 {
            assert_eq!(triple(build_cpa(w).unwrap().cost_report().unwrap()), cost(w, 2 * w, w));
            assert_eq!(triple(build_csa42(w).unwrap().cost_report().unwrap()), cost(2 * w, 4 * w, 2));
            assert_eq!(triple(build_csa52(w).unwrap().cost_report().unwrap()), cost(3 * w, 6 * w, 3));
            assert_eq!(triple(build_csa32(w).unwrap().cost_report().unwrap()), cost(w, 2 * w, 1));
        }
    }

    #[test]
    fn generated_netlists_are_valid_and_reversible() {
        let nets = [
            build_full_adder(),
            build_cpa(2).unwrap(),
            build_csa32(1).unwrap(),
            build_csa42(1).unwrap(),
            build_csa52(1).unwrap(),
        ];
        for n in &nets {
            assert!(n.validate().valid, "{}", n.validate());
            let r = n.verify_round_trip(RoundTripMode::auto(n, 200, 1)).unwrap();
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn irreversible_cpa() {
        let n = build_irreversible_cpa(4).unwrap();
        assert_eq!(eval_irreversible_cpa(&n, 4, 9, 6, false).unwrap(), (15, false));
        assert_eq!(eval_irreversible_cpa(&n, 4, 9, 7, false).unwrap(), (0, true));
        assert_eq!(n.gates().len(), 20);
    }
}
