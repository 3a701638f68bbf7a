// SPDX-License-Identifier: Apache-2.0

//! Information-erasure accounting, Landauer and signal energy, and a
//! Hamming-distance power-trace model with difference-of-means analysis.
//!
//! Erasure is the entropy drop across a gate under uniformly distributed
//! inputs: `inputs − H(outputs)` bits. A bijective gate loses nothing; a
//! 2-input AND loses `2 − H(¼, ¾) ≈ 1.189` bits, more than the one bit a
//! plain input-minus-output count suggests. Both figures are reported.
//! Garbage outputs of a reversible netlist are not erased inside the
//! circuit but have to be discarded eventually, so they are reported
//! separately as deferred erasure.
//!
//! These are model quantities. A zero erasure figure says the logic
//! discards no information; it does not show that a physical device leaks
//! no power.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::Serialize;

use crate::arith::IrreversibleNetlist;
use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::gatelib::EXHAUSTIVE_LIMIT;
use crate::montgomery::DatapathRun;
use crate::netlist::Netlist;

/// Boltzmann constant, J/K (exact SI value).
pub const BOLTZMANN: f64 = 1.380649e-23;
pub const DEFAULT_TEMPERATURE_K: f64 = 300.0;
pub const DEFAULT_CAPACITANCE_F: f64 = 1e-15;
pub const DEFAULT_VDD_V: f64 = 1.0;

pub const MODEL_NOTE: &str = "model estimate: zero internal erasure means no information is discarded by the logic; it is not a measurement of physical power or of DPA resistance";

/// Entropy lost by a function of `in_bits` uniform input bits whose output
/// for each input pattern is given by `outputs`.
pub fn entropy_loss(in_bits: usize, outputs: impl IntoIterator<Item = u64>) -> f64 {
    let mut hist: HashMap<u64, u64> = HashMap::new();
    let mut total = 0u64;
    for y in outputs {
        *hist.entry(y).or_default() += 1;
        total += 1;
    }
    let total = total as f64;
    let h: f64 = hist
        .values()
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum();
    // exact zero for bijections rather than rounding residue
    if hist.len() as f64 == total && total == (1u64 << in_bits) as f64 {
        return 0.0;
    }
    in_bits as f64 - h
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ErasureReport {
    /// Shannon bits lost inside the circuit's gates.
    pub internal_bits: f64,
    /// Sum over gates of `inputs − outputs`, floored at 0 per gate.
    pub naive_bits: u64,
    /// Garbage outputs that must eventually be discarded.
    pub deferred_bits: usize,
}

pub trait Erasure {
    fn erasure_bits(&self) -> Result<ErasureReport>;
}

impl Erasure for Netlist {
    fn erasure_bits(&self) -> Result<ErasureReport> {
        let mut cache: HashMap<&str, f64> = HashMap::new();
        let mut internal = 0.0;
        for g in self.gates() {
            let k = &g.kind;
            if k.arity() > EXHAUSTIVE_LIMIT {
                return Err(Error::ArityTooLarge {
                    gate: k.name().to_string(),
                    arity: k.arity(),
                    limit: EXHAUSTIVE_LIMIT,
                });
            }
            internal += *cache.entry(k.name()).or_insert_with(|| {
                entropy_loss(k.arity(), (0..1u32 << k.arity()).map(|x| u64::from(k.apply_packed(x))))
            });
        }
        Ok(ErasureReport {
            internal_bits: internal,
            naive_bits: 0,
            deferred_bits: self.garbage().len(),
        })
    }
}

impl Erasure for IrreversibleNetlist {
    fn erasure_bits(&self) -> Result<ErasureReport> {
        let mut internal = 0.0;
        let mut naive = 0u64;
        for g in self.gates() {
            let arity = g.op.arity();
            let mut x = vec![false; arity];
            internal += entropy_loss(
                arity,
                (0..1u64 << arity).map(|p| {
                    for (i, b) in x.iter_mut().enumerate() {
                        *b = (p >> i) & 1 == 1;
                    }
                    u64::from(g.op.eval(&x))
                }),
            );
            naive += arity.saturating_sub(1) as u64;
        }
        Ok(ErasureReport {
            internal_bits: internal,
            naive_bits: naive,
            deferred_bits: 0,
        })
    }
}

pub fn erasure_bits(circuit: &impl Erasure) -> Result<ErasureReport> {
    circuit.erasure_bits()
}

/// `bits · k_B · T · ln 2` joules.
pub fn landauer_energy(bits: f64, temperature_k: f64) -> Result<f64> {
    if !(temperature_k > 0.0) {
        return Err(Error::NonPositiveTemperature(temperature_k));
    }
    if bits < 0.0 {
        return Err(Error::Negative {
            name: "bits",
            value: bits,
        });
    }
    Ok(bits * BOLTZMANN * temperature_k * std::f64::consts::LN_2)
}

/// `½·C·V²` joules per signal transition.
pub fn esig_energy(capacitance_f: f64, voltage_v: f64) -> Result<f64> {
    if capacitance_f < 0.0 {
        return Err(Error::Negative {
            name: "capacitance",
            value: capacitance_f,
        });
    }
    if voltage_v < 0.0 {
        return Err(Error::Negative {
            name: "voltage",
            value: voltage_v,
        });
    }
    Ok(0.5 * capacitance_f * voltage_v * voltage_v)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhysicalParams {
    pub temperature_k: f64,
    pub capacitance_f: f64,
    pub vdd_v: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        PhysicalParams {
            temperature_k: DEFAULT_TEMPERATURE_K,
            capacitance_f: DEFAULT_CAPACITANCE_F,
            vdd_v: DEFAULT_VDD_V,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyReport {
    pub erased_bits: f64,
    pub naive_erased_bits: u64,
    pub deferred_erasure_bits: usize,
    #[serde(rename = "temperature_K")]
    pub temperature_k: f64,
    pub landauer_joules: f64,
    pub deferred_landauer_joules: f64,
    pub signal_transitions: u64,
    pub capacitance_f: f64,
    pub vdd_v: f64,
    pub esig_joules: f64,
    pub note: &'static str,
}

impl EnergyReport {
    pub fn new(erasure: &ErasureReport, signal_transitions: u64, params: &PhysicalParams) -> Result<Self> {
        let per_transition = esig_energy(params.capacitance_f, params.vdd_v)?;
        Ok(EnergyReport {
            erased_bits: erasure.internal_bits,
            naive_erased_bits: erasure.naive_bits,
            deferred_erasure_bits: erasure.deferred_bits,
            temperature_k: params.temperature_k,
            landauer_joules: landauer_energy(erasure.internal_bits, params.temperature_k)?,
            deferred_landauer_joules: landauer_energy(erasure.deferred_bits as f64, params.temperature_k)?,
            signal_transitions,
            capacitance_f: params.capacitance_f,
            vdd_v: params.vdd_v,
            esig_joules: signal_transitions as f64 * per_transition,
            note: MODEL_NOTE,
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PowerTrace {
    /// One sample per clock cycle.
    pub samples: Vec<u32>,
    pub metadata: BTreeMap<String, u64>,
}

impl PowerTrace {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.samples.iter().map(|&s| u64::from(s)).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("cycle,sample\n");
        for (i, s) in self.samples.iter().enumerate() {
            let _ = writeln!(out, "{i},{s}");
        }
        out
    }
}

/// Hamming distance between consecutive state snapshots.
pub fn switching_trace(snapshots: &[BitVector], metadata: BTreeMap<String, u64>) -> Result<PowerTrace> {
    if snapshots.len() < 2 {
        return Err(Error::EmptyRun);
    }
    Ok(PowerTrace {
        samples: snapshots
            .windows(2)
            .map(|w| w[0].hamming_distance(&w[1]) as u32)
            .collect(),
        metadata,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerModel {
    /// Every register bit flip costs one unit, as in static CMOS.
    HammingDistance,
    /// A data-independent cost per cycle.
    Constant(u32),
}

/// Power trace of a Montgomery datapath run, tagged with its operands.
pub fn datapath_trace(run: &DatapathRun, model: PowerModel) -> Result<PowerTrace> {
    let metadata = BTreeMap::from([("x".to_string(), run.x), ("y".to_string(), run.y)]);
    let mut trace = switching_trace(&run.snapshots, metadata)?;
    if let PowerModel::Constant(c) = model {
        trace.samples.iter_mut().for_each(|s| *s = c);
    }
    Ok(trace)
}

/// Per-cycle mean of the selected traces minus the mean of the rest.
pub fn dpa_diff_of_means<F>(traces: &[PowerTrace], selector: F) -> Result<Vec<f64>>
where
    F: Fn(&PowerTrace) -> bool,
{
    let expected = traces.first().map_or(0, PowerTrace::len);
    if let Some((index, t)) = traces.iter().enumerate().find(|(_, t)| t.len() != expected) {
        return Err(Error::RaggedTraces {
            index,
            len: t.len(),
            expected,
        });
    }
    let mut sums = [vec![0f64; expected], vec![0f64; expected]];
    let mut counts = [0usize; 2];
    for t in traces {
        let class = usize::from(selector(t));
        counts[class] += 1;
        for (acc, &s) in sums[class].iter_mut().zip(&t.samples) {
            *acc += f64::from(s);
        }
    }
    if counts[0] < 2 || counts[1] < 2 {
        return Err(Error::InsufficientClass {
            selected: counts[1],
            rejected: counts[0],
        });
    }
    Ok((0..expected)
        .map(|i| sums[1][i] / counts[1] as f64 - sums[0][i] / counts[0] as f64)
        .collect())
}

/// Index of the largest absolute differential, first on ties.
pub fn peak_index(differential: &[f64]) -> Option<usize> {
    differential
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, &v)| match best {
            Some((_, b)) if v.abs() <= b => best,
            _ => Some((i, v.abs())),
        })
        .map(|(i, _)| i)
}
