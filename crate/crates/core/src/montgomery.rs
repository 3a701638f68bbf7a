// SPDX-License-Identifier: Apache-2.0

//! Montgomery multiplication, at word level and on a gate-level reversible
//! datapath, and left-to-right modular exponentiation on top of it.
//!
//! The product computed is `X·Y·2^(-n) mod M` for an odd modulus `M < 2^n`.
//! Each of the `n` iterations adds `x_i·Y`, then `s_0·M` where `s_0` is the
//! low bit of the running sum, then halves. Adding `s_0·M` makes the sum
//! even, so the halving is exact; the sum stays below `2M` throughout.

use serde::Serialize;

use crate::arith::{eval_cpa, build_cpa, push_full_adder};
use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::gatelib::GateKind;
use crate::netlist::{CostReport, Netlist, NetlistBuilder, ValidationReport};
use crate::sequential::{
    build_loadable_shift_register, build_register, word_inputs, ClockedCircuit,
};

pub const MAX_BITS: u32 = 63;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MontParams {
    modulus: u64,
    bits: u32,
}

impl MontParams {
    pub fn new(modulus: u64, bits: u32) -> Result<Self> {
        if bits == 0 || bits > MAX_BITS {
            return Err(Error::UnsupportedWidth(bits));
        }
        if modulus % 2 == 0 {
            return Err(Error::EvenModulus(modulus));
        }
        if u128::from(modulus) >= 1u128 << bits {
            return Err(Error::ModulusTooWide { modulus, bits });
        }
        Ok(MontParams { modulus, bits })
    }

    /// Smallest `n` with `M < 2^n`.
    pub fn minimal(modulus: u64) -> Result<Self> {
        let bits = (64 - modulus.leading_zeros()).max(1);
        Self::new(modulus, bits)
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// `R = 2^n`.
    pub fn r(&self) -> u128 {
        1u128 << self.bits
    }

    fn check_operand(&self, name: &'static str, value: u64) -> Result<()> {
        if value >= self.modulus {
            return Err(Error::OperandOutOfRange {
                name,
                value,
                bound: self.modulus,
            });
        }
        Ok(())
    }
}

/// One loop iteration of the word-level algorithm. Values are the running
/// sum `S + C`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct WordStep {
    pub iteration: usize,
    pub x_bit: bool,
    pub after_add_y: u128,
    pub s0: bool,
    pub after_add_m: u128,
    pub after_halve: u128,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WordTrace {
    pub steps: Vec<WordStep>,
    /// `P := S + C` before the final conditional subtraction.
    pub sum_before_reduction: u128,
    pub result: u64,
}

fn invariant(cycle: usize, message: impl Into<String>) -> Error {
    Error::Invariant {
        cycle,
        message: message.into(),
    }
}

/// Word-level Montgomery product with its per-iteration trace.
///
/// Every iteration checks that the sum is even before halving, that it
/// stays below `2M`, and that `sum·2^(i+1) ≡ (X mod 2^(i+1))·Y (mod M)`.
pub fn mont_mult_trace(x: u64, y: u64, p: &MontParams) -> Result<WordTrace> {
    p.check_operand("X", x)?;
    p.check_operand("Y", y)?;
    let m = u128::from(p.modulus);
    let y = u128::from(y);
    let mut t: u128 = 0;
    let mut steps = Vec::with_capacity(p.bits as usize);
    for i in 0..p.bits as usize {
        let x_bit = (x >> i) & 1 == 1;
        let after_add_y = t + if x_bit { y } else { 0 };
        let s0 = after_add_y & 1 == 1;
        let after_add_m = after_add_y + if s0 { m } else { 0 };
        if after_add_m & 1 != 0 {
            return Err(invariant(i, format!("odd sum {after_add_m} before halving")));
        }
        t = after_add_m >> 1;
        if t >= 2 * m {
            return Err(invariant(i, format!("sum {t} not below 2M = {}", 2 * m)));
        }
        let low = u128::from(x) & ((1u128 << (i + 1)) - 1);
        let lhs = (t % m) * ((1u128 << (i + 1)) % m) % m;
        if lhs != (low % m) * (y % m) % m {
            return Err(invariant(i, "loop congruence does not hold"));
        }
        steps.push(WordStep {
            iteration: i,
            x_bit,
            after_add_y,
            s0,
            after_add_m,
            after_halve: t,
        });
    }
    let result = if t >= m { t - m } else { t };
    Ok(WordTrace {
        steps,
        sum_before_reduction: t,
        result: result as u64,
    })
}

/// `X·Y·2^(-n) mod M`.
pub fn mont_mult_word(x: u64, y: u64, p: &MontParams) -> Result<u64> {
    Ok(mont_mult_trace(x, y, p)?.result)
}

/// `x·2^n mod M`.
pub fn to_mont(x: u64, p: &MontParams) -> Result<u64> {
    p.check_operand("x", x)?;
    Ok(((u128::from(x) << p.bits) % u128::from(p.modulus)) as u64)
}

pub fn from_mont(x: u64, p: &MontParams) -> Result<u64> {
    p.check_operand("x", x)?;
    // Y = 1 must be a valid operand; only M = 1 breaks that, where every
    // residue is 0.
    if p.modulus == 1 {
        return Ok(0);
    }
    mont_mult_word(x, 1, p)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ExpStats {
    pub value: u64,
    /// Squarings inside the exponent loop, one per exponent bit.
    pub squarings: u32,
    /// Multiplications by the base, one per set exponent bit.
    pub multiplications: u32,
    /// Montgomery products spent converting into and out of the domain.
    pub conversions: u32,
}

impl ExpStats {
    pub fn mont_mult_calls(&self) -> u32 {
        self.squarings + self.multiplications + self.conversions
    }
}

/// `a^b mod modulus` by left-to-right square-and-multiply over Montgomery
/// products.
pub fn mont_exp(a: u64, b: u64, modulus: u64) -> Result<u64> {
    Ok(mont_exp_stats(a, b, modulus)?.value)
}

pub fn mont_exp_stats(a: u64, b: u64, modulus: u64) -> Result<ExpStats> {
    if modulus % 2 == 0 {
        return Err(Error::EvenModulus(modulus));
    }
    if modulus < 3 {
        return Err(Error::ModulusTooSmall(modulus));
    }
    let p = MontParams::minimal(modulus)?;
    p.check_operand("a", a)?;
    let base = to_mont(a, &p)?;
    let mut acc = to_mont(1, &p)?;
    let mut stats = ExpStats {
        value: 0,
        squarings: 0,
        multiplications: 0,
        conversions: 1,
    };
    let top = 64 - b.leading_zeros();
    for j in (0..top).rev() {
        acc = mont_mult_word(acc, acc, &p)?;
        stats.squarings += 1;
        if (b >> j) & 1 == 1 {
            acc = mont_mult_word(acc, base, &p)?;
            stats.multiplications += 1;
        }
    }
    stats.value = from_mont(acc, &p)?;
    Ok(stats)
}

/// A sum/carry register pair, as integers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CarrySavePair {
    pub s: u128,
    pub c: u128,
}

impl CarrySavePair {
    pub fn total(&self) -> u128 {
        self.s + self.c
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CycleRecord {
    pub cycle: usize,
    pub x_bit: bool,
    /// Registers S and C after the first carry-save stage.
    pub after_stage1: CarrySavePair,
    pub s0: bool,
    /// Shift-register contents after loading the second stage's output.
    pub after_stage2: CarrySavePair,
    /// Bits shifted out of S and C by the halving.
    pub shifted_out: [bool; 2],
    pub after_shift: CarrySavePair,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DatapathRun {
    pub x: u64,
    pub y: u64,
    pub result: u64,
    pub sum_before_reduction: u128,
    pub cycles: Vec<CycleRecord>,
    /// Full latch state (registers S, C then shift registers S, C) before
    /// the first cycle and after each cycle.
    #[serde(skip)]
    pub snapshots: Vec<BitVector>,
    pub garbage_bits: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DatapathCost {
    pub stage1: CostReport,
    pub stage2: CostReport,
    pub registers: CostReport,
    pub shift_registers: CostReport,
    pub final_adder: CostReport,
    pub total: CostReport,
}

/// Gate-level Montgomery datapath.
///
/// Per cycle: stage 1 forms `x_i·Y` with a Toffoli chain and adds it to
/// `S + C` on a row of TSG full adders; the result is latched into
/// registers S and C. The low bit of register S steers a second Toffoli
/// chain forming `s_0·M`, which stage 2 adds in the same way. Its result is
/// parallel-loaded into two shift registers and shifted once, giving
/// `S div 2` and `C div 2` for the next cycle.
///
/// Registers are `n + 2` bits wide. The carry vector leaves each stage
/// shifted up one place with a constant 0 in bit 0, so bit 0 of register S
/// is the low bit of `S + C`.
#[derive(Clone, Debug)]
pub struct MontDatapath {
    params: MontParams,
    width: usize,
    stage1: Netlist,
    stage2: Netlist,
    reg_s: ClockedCircuit,
    reg_c: ClockedCircuit,
    shift_s: ClockedCircuit,
    shift_c: ClockedCircuit,
    final_adder: Netlist,
}

/// Stage netlist: a Toffoli chain ANDing `control` into `operand[j]`,
/// followed by a carry-save row adding the product to `s + c`.
///
/// Inputs: `s0..`, `c0..`, then (stage 1 only) `x`, then `{operand}0..`.
/// Outputs: `so0..`, `co0..`.
fn build_stage(width: usize, bits: usize, operand: &str, control: Option<&str>) -> Netlist {
    let mut b = NetlistBuilder::new();
    (0..width).for_each(|j| {
        b.input(format!("s{j}"));
    });
    (0..width).for_each(|j| {
        b.input(format!("c{j}"));
    });
    if let Some(ctrl) = control {
        b.input(ctrl);
    }
    (0..bits).for_each(|j| {
        b.input(format!("{operand}{j}"));
    });

    let mut ctrl = control.unwrap_or("s0").to_string();
    for j in 0..bits {
        let next = format!("ctl{}", j + 1);
        let target = format!("t{j}");
        let pass = format!("{operand}p{j}");
        b.constant(target.as_str(), false);
        b.gate(
            GateKind::toffoli(),
            [ctrl.as_str(), &format!("{operand}{j}"), target.as_str()],
            [next.as_str(), pass.as_str(), &format!("pp{j}")],
        );
        b.garbage(pass);
        ctrl = next;
    }
    for j in bits..width {
        b.constant(format!("pp{j}"), false);
    }
    // Stage 1's control is the x bit, which is not needed afterwards; in
    // stage 2 the control is s0, which continues into the adder row.
    let s_low = if control.is_some() {
        b.garbage(ctrl);
        "s0".to_string()
    } else {
        ctrl
    };

    b.constant("co0", false);
    for j in 0..width {
        let carry = if j + 1 < width {
            format!("co{}", j + 1)
        } else {
            "ctop".to_string()
        };
        let a = if j == 0 { s_low.clone() } else { format!("s{j}") };
        push_full_adder(
            &mut b,
            &format!("fa{j}"),
            &a,
            &format!("c{j}"),
            &format!("pp{j}"),
            &format!("so{j}"),
            &carry,
        );
    }
    b.garbage("ctop");
    (0..width).for_each(|j| {
        b.output(format!("so{j}"));
    });
    (0..width).for_each(|j| {
        b.output(format!("co{j}"));
    });
    b.build()
}

fn to_bits(v: u128, width: usize, out: &mut Vec<bool>) {
    out.extend((0..width).map(|i| (v >> i) & 1 == 1));
}

fn from_bits(bits: &[bool]) -> u128 {
    bits.iter()
        .enumerate()
        .fold(0, |acc, (i, &b)| acc | (u128::from(b) << i))
}

impl MontDatapath {
    pub fn params(&self) -> &MontParams {
        &self.params
    }

    /// Register width, `n + 2`.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn stage1(&self) -> &Netlist {
        &self.stage1
    }

    pub fn stage2(&self) -> &Netlist {
        &self.stage2
    }

    pub fn final_adder(&self) -> &Netlist {
        &self.final_adder
    }

    /// Validation of every combinational core, by name.
    pub fn validate(&self) -> Vec<(&'static str, ValidationReport)> {
        vec![
            ("stage1", self.stage1.validate()),
            ("stage2", self.stage2.validate()),
            ("latch_core", self.reg_s.latch_core().validate()),
            ("final_adder", self.final_adder.validate()),
        ]
    }

    pub fn cost_report(&self) -> Result<DatapathCost> {
        let stage1 = self.stage1.cost_report()?;
        let stage2 = self.stage2.cost_report()?;
        let registers = self.reg_s.cost_report()? + self.reg_c.cost_report()?;
        let shift_registers = self.shift_s.cost_report()? + self.shift_c.cost_report()?;
        let final_adder = self.final_adder.cost_report()?;
        Ok(DatapathCost {
            stage1,
            stage2,
            registers,
            shift_registers,
            final_adder,
            total: stage1 + stage2 + registers + shift_registers + final_adder,
        })
    }

    fn eval_stage(
        &self,
        stage: &Netlist,
        pair: CarrySavePair,
        x_bit: Option<bool>,
        operand: u64,
    ) -> Result<(CarrySavePair, usize)> {
        let w = self.width;
        let mut inputs = Vec::with_capacity(2 * w + 1 + self.params.bits as usize);
        to_bits(pair.s, w, &mut inputs);
        to_bits(pair.c, w, &mut inputs);
        inputs.extend(x_bit);
        to_bits(u128::from(operand), self.params.bits as usize, &mut inputs);
        let out = stage.eval(&inputs)?;
        Ok((
            CarrySavePair {
                s: from_bits(&out[..w]),
                c: from_bits(&out[w..2 * w]),
            },
            stage.garbage().len(),
        ))
    }

    fn snapshot(circuits: [&ClockedCircuit; 4]) -> BitVector {
        circuits
            .iter()
            .flat_map(|c| c.state().iter().copied())
            .collect::<Vec<_>>()
            .into()
    }

    /// Clocks the datapath for `n` cycles, adds S and C on the gate-level
    /// ripple adder and applies the final conditional subtraction.
    pub fn run(&self, x: u64, y: u64) -> Result<DatapathRun> {
        let p = &self.params;
        p.check_operand("X", x)?;
        p.check_operand("Y", y)?;
        let w = self.width;
        let m = u128::from(p.modulus);
        let mut reg_s = self.reg_s.clone();
        let mut reg_c = self.reg_c.clone();
        let mut shift_s = self.shift_s.clone();
        let mut shift_c = self.shift_c.clone();
        let mut snapshots = vec![Self::snapshot([&reg_s, &reg_c, &shift_s, &shift_c])];
        let mut cycles = Vec::with_capacity(p.bits as usize);
        let mut comb_garbage = 0u64;

        for i in 0..p.bits as usize {
            let x_bit = (x >> i) & 1 == 1;
            let before = CarrySavePair {
                s: shift_s.value(),
                c: shift_c.value(),
            };

            let (s1, g1) = self.eval_stage(&self.stage1, before, Some(x_bit), y)?;
            comb_garbage += g1 as u64;
            let expect = before.total() + if x_bit { u128::from(y) } else { 0 };
            if s1.total() != expect {
                return Err(invariant(i, "stage 1 overflowed the register width"));
            }
            for (reg, v) in [(&mut reg_s, s1.s), (&mut reg_c, s1.c)] {
                let mut load = word_inputs("D", w, v);
                load.insert("E".into(), true);
                reg.step(&load)?;
                load.insert("E".into(), false);
                reg.step(&load)?;
            }
            let after_stage1 = CarrySavePair {
                s: reg_s.value(),
                c: reg_c.value(),
            };
            let s0 = after_stage1.s & 1 == 1;

            let (s2, g2) = self.eval_stage(&self.stage2, after_stage1, None, p.modulus)?;
            comb_garbage += g2 as u64;
            if s2.total() != after_stage1.total() + if s0 { m } else { 0 } {
                return Err(invariant(i, "stage 2 overflowed the register width"));
            }
            if s2.total() & 1 != 0 {
                return Err(invariant(i, format!("odd sum {} before halving", s2.total())));
            }

            for (sr, v) in [(&mut shift_s, s2.s), (&mut shift_c, s2.c)] {
                let mut load = word_inputs("D", w, v);
                load.insert("LD".into(), true);
                load.insert("SI".into(), false);
                sr.pulse(&load)?;
            }
            let after_stage2 = CarrySavePair {
                s: shift_s.value(),
                c: shift_c.value(),
            };
            let shifted_out = [after_stage2.s & 1 == 1, after_stage2.c & 1 == 1];
            if shifted_out != [false, false] {
                return Err(invariant(i, "halving would drop a set bit"));
            }
            for sr in [&mut shift_s, &mut shift_c] {
                let mut shift = word_inputs("D", w, 0);
                shift.insert("LD".into(), false);
                shift.insert("SI".into(), false);
                sr.pulse(&shift)?;
            }
            let after_shift = CarrySavePair {
                s: shift_s.value(),
                c: shift_c.value(),
            };
            if after_shift.total() >= 2 * m {
                return Err(invariant(i, "sum not below 2M after halving"));
            }
            snapshots.push(Self::snapshot([&reg_s, &reg_c, &shift_s, &shift_c]));
            cycles.push(CycleRecord {
                cycle: i,
                x_bit,
                after_stage1,
                s0,
                after_stage2,
                shifted_out,
                after_shift,
            });
        }

        let last = CarrySavePair {
            s: shift_s.value(),
            c: shift_c.value(),
        };
        let (sum, cout) = eval_cpa(&self.final_adder, w, last.s, last.c, false)?;
        comb_garbage += self.final_adder.garbage().len() as u64;
        let total = sum + (u128::from(cout) << w);
        let result = if total >= m { total - m } else { total };
        let seq_garbage: u64 = [&reg_s, &reg_c, &shift_s, &shift_c]
            .iter()
            .map(|c| c.total_garbage_bits())
            .sum();
        Ok(DatapathRun {
            x,
            y,
            result: result as u64,
            sum_before_reduction: total,
            cycles,
            snapshots,
            garbage_bits: comb_garbage + seq_garbage,
        })
    }
}

pub fn build_mont_datapath(p: &MontParams) -> Result<MontDatapath> {
    let bits = p.bits as usize;
    let width = bits + 2;
    Ok(MontDatapath {
        params: *p,
        width,
        stage1: build_stage(width, bits, "y", Some("x")),
        stage2: build_stage(width, bits, "m", None),
        reg_s: build_register(width)?,
        reg_c: build_register(width)?,
        shift_s: build_loadable_shift_register(width)?,
        shift_c: build_loadable_shift_register(width)?,
        final_adder: build_cpa(width)?,
    })
}

pub fn run_mont_datapath(d: &MontDatapath, x: u64, y: u64) -> Result<u64> {
    Ok(d.run(x, y)?.result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::RoundTripMode;

    #[test]
    fn word_examples() {
        let p = MontParams::new(7, 3).unwrap();
        let t = mont_mult_trace(3, 5, &p).unwrap();
        assert_eq!(t.result, 1);
        let halves: Vec<_> = t
            .steps
            .iter()
            .map(|s| (s.after_add_y, s.after_add_m, s.after_halve))
            .collect();
        assert_eq!(halves, vec![(5, 12, 6), (11, 18, 9), (9, 16, 8)]);
        assert_eq!(t.sum_before_reduction, 8);

        assert_eq!(mont_mult_word(0, 6, &p).unwrap(), 0);
        assert_eq!(mont_mult_word(4, 6, &MontParams::new(9, 4).unwrap()).unwrap(), 6);
    }

    #[test]
    fn parameter_checks() {
        assert!(matches!(MontParams::new(8, 4), Err(Error::EvenModulus(8))));
        assert!(matches!(MontParams::new(9, 3), Err(Error::ModulusTooWide { .. })));
        assert!(matches!(MontParams::new(9, 0), Err(Error::UnsupportedWidth(0))));
        let p = MontParams::new(7, 3).unwrap();
        assert!(matches!(
            mont_mult_word(7, 1, &p),
            Err(Error::OperandOutOfRange { name: "X", value: 7, bound: 7 })
        ));
        assert_eq!(MontParams::minimal(7).unwrap().bits(), 3);
        assert_eq!(MontParams::minimal(9).unwrap().bits(), 4);
    }

    #[test]
    fn domain_conversion() {
        let p = MontParams::new(7, 3).unwrap();
        assert_eq!(to_mont(1, &p).unwrap(), 1);
        assert_eq!(to_mont(0, &p).unwrap(), 0);
        for x in 0..7 {
            assert_eq!(from_mont(to_mont(x, &p).unwrap(), &p).unwrap(), x);
        }
    }

    #[test]
    fn exponent_examples() {
        assert_eq!(mont_exp(5, 3, 7).unwrap(), 6);
        assert_eq!(mont_exp(5, 0, 7).unwrap(), 1);
        let s = mont_exp_stats(5, 0b1011, 7).unwrap();
        assert_eq!((s.squarings, s.multiplications), (4, 3));
        assert!(matches!(mont_exp(2, 3, 8), Err(Error::EvenModulus(8))));
        assert!(matches!(mont_exp(0, 3, 1), Err(Error::ModulusTooSmall(1))));
        assert!(matches!(mont_exp(9, 3, 7), Err(Error::OperandOutOfRange { .. })));
    }

    #[test]
    fn datapath_matches_word_trace() {
        let p = MontParams::new(7, 3).unwrap();
        let d = build_mont_datapath(&p).unwrap();
        for (name, r) in d.validate() {
            assert!(r.valid, "{name}: {r}");
        }
        let run = d.run(3, 5).unwrap();
        let word = mont_mult_trace(3, 5, &p).unwrap();
        assert_eq!(run.result, 1);
        assert_eq!(run.cycles.len(), 3);
        for (c, s) in run.cycles.iter().zip(&word.steps) {
            assert_eq!(c.after_stage1.total(), s.after_add_y);
            assert_eq!(c.s0, s.s0);
            assert_eq!(c.after_stage2.total(), s.after_add_m);
            assert_eq!(c.after_shift.total(), s.after_halve);
        }
        assert_eq!(run_mont_datapath(&d, 0, 4).unwrap(), 0);
        assert_eq!(run.snapshots.len(), 4);
    }

    #[test]
    fn stage_cores_round_trip() {
        let d = build_mont_datapath(&MontParams::new(5, 3).unwrap()).unwrap();
        for n in [d.stage1(), d.stage2()] {
            let r = n.verify_round_trip(RoundTripMode::Random { samples: 300, seed: 3 }).unwrap();
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn datapath_cost_is_additive() {
        let d = build_mont_datapath(&MontParams::new(11, 4).unwrap()).unwrap();
        let c = d.cost_report().unwrap();
        let parts = [c.stage1, c.stage2, c.registers, c.shift_registers, c.final_adder];
        assert_eq!(c.total.gate_count, parts.iter().map(|p| p.gate_count).sum::<usize>());
        assert_eq!(c.total.garbage_count, parts.iter().map(|p| p.garbage_count).sum::<usize>());
        // n Toffolis plus one TSG per register bit
        assert_eq!(c.stage1.gate_count, 4 + 6);
        assert_eq!(c.final_adder.gate_count, 6);
    }
}
