// SPDX-License-Identifier: Apache-2.0

//! Clocked reversible elements built from a Fredkin D latch.
//!
//! Each latch is one evaluation of an acyclic core netlist per time step;
//! the fed-back `Q` is held in simulator state rather than as a wire loop.
//! Control rails (enable, clock, load) are distributed by the simulator and
//! are not subject to the netlist fan-out rule; data wires are.
//!
//! All latches in a circuit evaluate simultaneously from the previous
//! state, so a master/slave pair on opposite clock phases behaves as a
//! negative-edge flip-flop when the clock is stepped `1` then `0`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gatelib::GateKind;
use crate::netlist::{serialize_rnl, CostReport, Netlist, NetlistBuilder};

/// Combinational core of the D latch.
///
/// `FRG(E, Q, D)` puts `Ē·Q + E·D` on its middle output; an `FG` against a
/// constant 0 copies it into the fed-back state (`Qn`) and the observable
/// output (`Qo`). The passed-through enable and the third Fredkin output
/// are garbage.
pub fn d_latch_core() -> Netlist {
    let mut b = NetlistBuilder::new();
    b.input("E").input("Q").input("D").constant("Z", false);
    b.gate(GateKind::fredkin(), ["E", "Q", "D"], ["Ep", "Qp", "G"]);
    b.gate(GateKind::feynman(), ["Qp", "Z"], ["Qn", "Qo"]);
    b.output("Qn").output("Qo").garbage("Ep").garbage("G");
    b.build()
}

/// Two-way multiplexer on one Fredkin gate: `Y = S̄·A + S·B`.
pub fn mux_core() -> Netlist {
    let mut b = NetlistBuilder::new();
    b.input("S").input("A").input("B");
    b.gate(GateKind::fredkin(), ["S", "A", "B"], ["Sp", "Y", "G"]);
    b.output("Y").garbage("Sp").garbage("G");
    b.build()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClockedKind {
    DLatch,
    MsDff,
    Register,
    ShiftRegister,
    LoadableShiftRegister,
}

impl fmt::Display for ClockedKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClockedKind::DLatch => "dlatch",
            ClockedKind::MsDff => "dff",
            ClockedKind::Register => "register",
            ClockedKind::ShiftRegister => "shiftreg",
            ClockedKind::LoadableShiftRegister => "loadable_shiftreg",
        })
    }
}

/// When a latch is transparent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Enable {
    High(String),
    Low(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DataSource {
    Input(String),
    /// Current (pre-step) state of another latch.
    Latch(usize),
    Const(bool),
    /// Fredkin multiplexer selected by a control rail.
    Mux {
        select: String,
        low: Box<DataSource>,
        high: Box<DataSource>,
    },
}

impl fmt::Display for DataSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataSource::Input(w) => f.write_str(w),
            DataSource::Latch(i) => write!(f, "latch:{i}"),
            DataSource::Const(v) => write!(f, "{}", u8::from(*v)),
            DataSource::Mux { select, low, high } => write!(f, "mux({select}, {low}, {high})"),
        }
    }
}

impl fmt::Display for Enable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Enable::High(r) => f.write_str(r),
            Enable::Low(r) => write!(f, "!{r}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatchSlot {
    pub name: String,
    pub enable: Enable,
    pub data: DataSource,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StepOutput {
    pub outputs: BTreeMap<String, bool>,
    /// Garbage bits produced by the latch and multiplexer cores this step.
    pub garbage_bits: usize,
}

#[derive(Clone, Debug)]
pub struct ClockedCircuit {
    kind: ClockedKind,
    width: usize,
    rails: Vec<String>,
    data_inputs: Vec<String>,
    outputs: Vec<(String, usize)>,
    slots: Vec<LatchSlot>,
    latch_core: Netlist,
    mux_core: Netlist,
    state: Vec<bool>,
    garbage_bits: u64,
    steps: u64,
}

impl ClockedCircuit {
    fn new(
        kind: ClockedKind,
        width: usize,
        rails: &[&str],
        data_inputs: Vec<String>,
        slots: Vec<LatchSlot>,
        outputs: Vec<(String, usize)>,
    ) -> Self {
        let n = slots.len();
        ClockedCircuit {
            kind,
            width,
            rails: rails.iter().map(|r| r.to_string()).collect(),
            data_inputs,
            outputs,
            slots,
            latch_core: d_latch_core(),
            mux_core: mux_core(),
            state: vec![false; n],
            garbage_bits: 0,
            steps: 0,
        }
    }

    pub fn build(kind: ClockedKind, width: usize) -> Result<Self> {
        match kind {
            ClockedKind::DLatch => Ok(build_d_latch()),
            ClockedKind::MsDff => Ok(build_ms_dff()),
            ClockedKind::Register => build_register(width),
            ClockedKind::ShiftRegister => build_shift_register(width),
            ClockedKind::LoadableShiftRegister => build_loadable_shift_register(width),
        }
    }

    pub fn kind(&self) -> ClockedKind {
        self.kind
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Control rails (`E`, `CP`, `LD`) followed by data inputs.
    pub fn input_names(&self) -> impl Iterator<Item = &str> {
        self.rails.iter().chain(&self.data_inputs).map(String::as_str)
    }

    pub fn output_names(&self) -> impl Iterator<Item = &str> {
        self.outputs.iter().map(|(n, _)| n.as_str())
    }

    pub fn slots(&self) -> &[LatchSlot] {
        &self.slots
    }

    pub fn latch_core(&self) -> &Netlist {
        &self.latch_core
    }

    /// Every latch bit, in slot order.
    pub fn state(&self) -> &[bool] {
        &self.state
    }

    pub fn set_state(&mut self, state: &[bool]) -> Result<()> {
        if state.len() != self.state.len() {
            return Err(Error::WidthMismatch {
                expected: self.state.len(),
                actual: state.len(),
            });
        }
        self.state.copy_from_slice(state);
        Ok(())
    }

    /// Observable outputs as an integer, first output at bit 0.
    pub fn value(&self) -> u128 {
        self.outputs
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &(_, slot))| acc | (u128::from(self.state[slot]) << i))
    }

    /// Sets the latches behind the observable outputs (and, for
    /// master/slave pairs, the masters) to `value`.
    pub fn set_value(&mut self, value: u128) {
        for (i, &(_, slot)) in self.outputs.iter().enumerate() {
            let bit = (value >> i) & 1 == 1;
            self.state[slot] = bit;
            if let DataSource::Latch(master) = self.slots[slot].data {
                self.state[master] = bit;
            }
        }
    }

    pub fn total_garbage_bits(&self) -> u64 {
        self.garbage_bits
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn mux_count(&self) -> usize {
        fn count(d: &DataSource) -> usize {
            match d {
                DataSource::Mux { low, high, .. } => 1 + count(low) + count(high),
                _ => 0,
            }
        }
        self.slots.iter().map(|s| count(&s.data)).sum()
    }

    /// Gate-level cost of one evaluation of every latch and multiplexer.
    pub fn cost_report(&self) -> Result<CostReport> {
        let latch = self.latch_core.cost_report()?;
        let mux = self.mux_core.cost_report()?;
        let scale = |c: CostReport, k: usize| CostReport {
            gate_count: c.gate_count * k,
            garbage_count: c.garbage_count * k,
            unit_delay: if k > 0 { c.unit_delay } else { 0 },
            constant_input_count: c.constant_input_count * k,
        };
        let muxes = self.mux_count();
        let mut total = scale(latch, self.slots.len());
        let m = scale(mux, muxes);
        total.gate_count += m.gate_count;
        total.garbage_count += m.garbage_count;
        total.constant_input_count += m.constant_input_count;
        total.unit_delay += m.unit_delay;
        Ok(total)
    }

    /// Advances one time step. Every control rail and data input must be
    /// assigned.
    pub fn step(&mut self, inputs: &BTreeMap<String, bool>) -> Result<StepOutput> {
        for name in self.input_names() {
            if !inputs.contains_key(name) {
                return Err(Error::MissingInput(name.to_string()));
            }
        }
        if let Some(extra) = inputs.keys().find(|k| !self.input_names().any(|n| n == k.as_str())) {
            return Err(Error::UnknownWire(extra.clone()));
        }
        let mut garbage = 0usize;
        let mut next = self.state.clone();
        for (i, slot) in self.slots.iter().enumerate() {
            let enable = match &slot.enable {
                Enable::High(r) => inputs[r],
                Enable::Low(r) => !inputs[r],
            };
            let d = self.resolve(&slot.data, inputs, &mut garbage)?;
            let out = self.latch_core.eval(&[enable, self.state[i], d])?;
            debug_assert_eq!(out[0], out[1]);
            garbage += self.latch_core.garbage().len();
            next[i] = out[0];
        }
        self.state = next;
        self.garbage_bits += garbage as u64;
        self.steps += 1;
        Ok(StepOutput {
            outputs: self
                .outputs
                .iter()
                .map(|(n, slot)| (n.clone(), self.state[*slot]))
                .collect(),
            garbage_bits: garbage,
        })
    }

    fn resolve(&self, d: &DataSource, inputs: &BTreeMap<String, bool>, garbage: &mut usize) -> Result<bool> {
        Ok(match d {
            DataSource::Input(w) => inputs[w],
            DataSource::Latch(i) => self.state[*i],
            DataSource::Const(v) => *v,
            DataSource::Mux { select, low, high } => {
                let a = self.resolve(low, inputs, garbage)?;
                let b = self.resolve(high, inputs, garbage)?;
                *garbage += self.mux_core.garbage().len();
                self.mux_core.eval(&[inputs[select], a, b])?[0]
            }
        })
    }

    /// One clock pulse: the clock rail is driven `1` for a step and then
    /// `0` for a step with the same data. Returns the outputs after the
    /// falling step.
    pub fn pulse(&mut self, inputs: &BTreeMap<String, bool>) -> Result<StepOutput> {
        let clock = self.rails[0].clone();
        let mut held = inputs.clone();
        held.insert(clock.clone(), true);
        let first = self.step(&held)?;
        held.insert(clock, false);
        let mut second = self.step(&held)?;
        second.garbage_bits += first.garbage_bits;
        Ok(second)
    }

    pub fn manifest(&self) -> Result<ClockedManifest> {
        Ok(ClockedManifest {
            kind: self.kind,
            width: self.width,
            control_rails: self.rails.clone(),
            data_inputs: self.data_inputs.clone(),
            outputs: self
                .outputs
                .iter()
                .map(|(n, slot)| (n.clone(), self.slots[*slot].name.clone()))
                .collect(),
            latches: self
                .slots
                .iter()
                .map(|s| LatchManifest {
                    name: s.name.clone(),
                    enable: s.enable.to_string(),
                    data: s.data.to_string(),
                })
                .collect(),
            latch_core: serialize_rnl(&self.latch_core),
            mux_core: serialize_rnl(&self.mux_core),
            cost: self.cost_report()?,
            garbage_bits_per_step: self.cost_report()?.garbage_count,
        })
    }
}

/// Serializable description of a clocked circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClockedManifest {
    pub kind: ClockedKind,
    pub width: usize,
    pub control_rails: Vec<String>,
    pub data_inputs: Vec<String>,
    /// Output name and the latch driving it.
    pub outputs: Vec<(String, String)>,
    pub latches: Vec<LatchManifest>,
    pub latch_core: String,
    pub mux_core: String,
    #[serde(skip_deserializing)]
    pub cost: CostReport,
    #[serde(default)]
    pub garbage_bits_per_step: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatchManifest {
    pub name: String,
    pub enable: String,
    pub data: String,
}

impl ClockedManifest {
    /// Rebuilds the circuit the manifest describes, in its reset state.
    pub fn instantiate(&self) -> Result<ClockedCircuit> {
        ClockedCircuit::build(self.kind, self.width)
    }
}

fn check_width(width: usize) -> Result<()> {
    if width == 0 {
        return Err(Error::ZeroWidth);
    }
    Ok(())
}

/// Level-sensitive D latch: inputs `E`, `D`; output `Q`.
pub fn build_d_latch() -> ClockedCircuit {
    ClockedCircuit::new(
        ClockedKind::DLatch,
        1,
        &["E"],
        vec!["D".into()],
        vec![LatchSlot {
            name: "q".into(),
            enable: Enable::High("E".into()),
            data: DataSource::Input("D".into()),
        }],
        vec![("Q".into(), 0)],
    )
}

/// Master/slave flip-flop: master transparent on `CP = 1`, slave on
/// `CP = 0`. Inputs `CP`, `D`; output `Q`.
pub fn build_ms_dff() -> ClockedCircuit {
    ClockedCircuit::new(
        ClockedKind::MsDff,
        1,
        &["CP"],
        vec!["D".into()],
        vec![
            LatchSlot {
                name: "master".into(),
                enable: Enable::High("CP".into()),
                data: DataSource::Input("D".into()),
            },
            LatchSlot {
                name: "slave".into(),
                enable: Enable::Low("CP".into()),
                data: DataSource::Latch(0),
            },
        ],
        vec![("Q".into(), 1)],
    )
}

/// Parallel-load register of `width` latches sharing `E`.
/// Inputs `E`, `D0..`; outputs `Q0..`.
pub fn build_register(width: usize) -> Result<ClockedCircuit> {
    check_width(width)?;
    let slots = (0..width)
        .map(|i| LatchSlot {
            name: format!("q{i}"),
            enable: Enable::High("E".into()),
            data: DataSource::Input(format!("D{i}")),
        })
        .collect();
    Ok(ClockedCircuit::new(
        ClockedKind::Register,
        width,
        &["E"],
        (0..width).map(|i| format!("D{i}")).collect(),
        slots,
        (0..width).map(|i| (format!("Q{i}"), i)).collect(),
    ))
}

fn dff_chain(width: usize, master_data: impl Fn(usize, DataSource) -> DataSource) -> Vec<LatchSlot> {
    let mut slots = Vec::with_capacity(2 * width);
    for i in 0..width {
        let shift_in = if i + 1 == width {
            DataSource::Input("SI".into())
        } else {
            DataSource::Latch(2 * (i + 1) + 1)
        };
        slots.push(LatchSlot {
            name: format!("m{i}"),
            enable: Enable::High("CP".into()),
            data: master_data(i, shift_in),
        });
        slots.push(LatchSlot {
            name: format!("s{i}"),
            enable: Enable::Low("CP".into()),
            data: DataSource::Latch(2 * i),
        });
    }
    slots
}

/// Right-shift register of master/slave flip-flops. Each pulse moves bit
/// `i+1` into bit `i`, serial input `SI` enters at the top, bit 0 falls
/// off. Inputs `CP`, `SI`; outputs `Q0..`.
pub fn build_shift_register(width: usize) -> Result<ClockedCircuit> {
    check_width(width)?;
    Ok(ClockedCircuit::new(
        ClockedKind::ShiftRegister,
        width,
        &["CP"],
        vec!["SI".into()],
        dff_chain(width, |_, shift_in| shift_in),
        (0..width).map(|i| (format!("Q{i}"), 2 * i + 1)).collect(),
    ))
}

/// Shift register whose masters take `D{i}` instead of the shifted bit
/// while `LD = 1`, through a Fredkin multiplexer per stage.
pub fn build_loadable_shift_register(width: usize) -> Result<ClockedCircuit> {
    check_width(width)?;
    let mut data_inputs = vec!["SI".to_string()];
    data_inputs.extend((0..width).map(|i| format!("D{i}")));
    Ok(ClockedCircuit::new(
        ClockedKind::LoadableShiftRegister,
        width,
        &["CP", "LD"],
        data_inputs,
        dff_chain(width, |i, shift_in| DataSource::Mux {
            select: "LD".into(),
            low: Box::new(shift_in),
            high: Box::new(DataSource::Input(format!("D{i}"))),
        }),
        (0..width).map(|i| (format!("Q{i}"), 2 * i + 1)).collect(),
    ))
}

/// Builds the input map for a word-wide port group `prefix0..`.
pub fn word_inputs(prefix: &str, width: usize, value: u128) -> BTreeMap<String, bool> {
    (0..width)
        .map(|i| (format!("{prefix}{i}"), (value >> i) & 1 == 1))
        .collect()
}
