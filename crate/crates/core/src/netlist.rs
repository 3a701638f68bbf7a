// SPDX-License-Identifier: Apache-2.0

//! Acyclic reversible netlists: validation, forward and inverse simulation,
//! cost accounting and the `.rnl` text format.
//!
//! A wire has exactly one source (primary input, constant, or gate output)
//! and at most one sink (gate input, primary-output mark, or garbage mark).
//! Duplicating a signal takes an explicit Feynman gate.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::sync::{Arc, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gatelib::{pack, standard_library, GateKind, GateLibrary};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GateInstance {
    pub kind: Arc<GateKind>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

#[derive(Clone, Debug, Default)]
pub struct Netlist {
    inputs: Vec<String>,
    constants: Vec<(String, bool)>,
    gates: Vec<GateInstance>,
    outputs: Vec<String>,
    garbage: Vec<String>,
    plan: OnceLock<std::result::Result<Arc<Plan>, ValidationReport>>,
}

impl PartialEq for Netlist {
    fn eq(&self, other: &Self) -> bool {
        self.inputs == other.inputs
            && self.constants == other.constants
            && self.gates == other.gates
            && self.outputs == other.outputs
            && self.garbage == other.garbage
    }
}

impl Eq for Netlist {}

/// Incremental construction of a [`Netlist`]. Nothing is checked until the
/// netlist is validated or simulated.
#[derive(Debug, Default)]
pub struct NetlistBuilder {
    n: Netlist,
}

impl NetlistBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn input(&mut self, wire: impl Into<String>) -> &mut Self {
        self.n.inputs.push(wire.into());
        self
    }

    pub fn constant(&mut self, wire: impl Into<String>, value: bool) -> &mut Self {
        self.n.constants.push((wire.into(), value));
        self
    }

    pub fn gate<I, O>(&mut self, kind: Arc<GateKind>, inputs: I, outputs: O) -> &mut Self
    where
        I: IntoIterator,
        I::Item: Into<String>,
        O: IntoIterator,
        O::Item: Into<String>,
    {
        self.n.gates.push(GateInstance {
            kind,
            inputs: inputs.into_iter().map(Into::into).collect(),
            outputs: outputs.into_iter().map(Into::into).collect(),
        });
        self
    }

    pub fn output(&mut self, wire: impl Into<String>) -> &mut Self {
        self.n.outputs.push(wire.into());
        self
    }

    pub fn garbage(&mut self, wire: impl Into<String>) -> &mut Self {
        self.n.garbage.push(wire.into());
        self
    }

    pub fn build(self) -> Netlist {
        self.n
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    FanOut { wire: String, sinks: usize },
    Undriven { wire: String },
    MultiplyDriven { wire: String, drivers: usize },
    Cycle { gates: Vec<usize> },
    UnclassifiedOutput { wire: String, gate: usize },
    UnusedInput { wire: String },
    ArityMismatch {
        gate: usize,
        name: String,
        arity: usize,
        inputs: usize,
        outputs: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::FanOut { wire, sinks } => write!(f, "wire `{wire}` fans out to {sinks} sinks"),
            Violation::Undriven { wire } => write!(f, "wire `{wire}` has no driver"),
            Violation::MultiplyDriven { wire, drivers } => {
                write!(f, "wire `{wire}` has {drivers} drivers")
            }
            Violation::Cycle { gates } => write!(f, "gates {gates:?} form a cycle"),
            Violation::UnclassifiedOutput { wire, gate } => write!(
                f,
                "output `{wire}` of gate {gate} is neither consumed nor marked output/garbage"
            ),
            Violation::UnusedInput { wire } => write!(f, "input `{wire}` is never used"),
            Violation::ArityMismatch {
                gate,
                name,
                arity,
                inputs,
                outputs,
            } => write!(
                f,
                "gate {gate} ({name}) has arity {arity} but {inputs} inputs and {outputs} outputs"
            ),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("no violations");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Structural cost in the units of a gate-count comparison table.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CostReport {
    pub gate_count: usize,
    pub garbage_count: usize,
    /// Gates on the longest path from any input to a primary output.
    pub unit_delay: usize,
    pub constant_input_count: usize,
}

impl std::ops::Add for CostReport {
    type Output = CostReport;

    /// Serial composition: counts and delays add.
    fn add(self, rhs: CostReport) -> CostReport {
        CostReport {
            gate_count: self.gate_count + rhs.gate_count,
            garbage_count: self.garbage_count + rhs.garbage_count,
            unit_delay: self.unit_delay + rhs.unit_delay,
            constant_input_count: self.constant_input_count + rhs.constant_input_count,
        }
    }
}

impl std::iter::Sum for CostReport {
    fn sum<I: Iterator<Item = CostReport>>(iter: I) -> CostReport {
        iter.fold(CostReport::default(), |a, b| a + b)
    }
}

/// Index-resolved form of a valid netlist, gates in topological order.
#[derive(Debug)]
struct Plan {
    wire_count: usize,
    index: HashMap<String, usize>,
    gates: Vec<PlannedGate>,
    inputs: Vec<usize>,
    constants: Vec<usize>,
    outputs: Vec<usize>,
    garbage: Vec<usize>,
    unit_delay: usize,
}

#[derive(Debug)]
struct PlannedGate {
    kind: Arc<GateKind>,
    inputs: Vec<usize>,
    outputs: Vec<usize>,
}

/// Wire values produced by a forward simulation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Evaluation {
    pub values: BTreeMap<String, bool>,
    pub primary_outputs: Vec<(String, bool)>,
    pub garbage_outputs: Vec<(String, bool)>,
}

impl Evaluation {
    pub fn get(&self, wire: &str) -> Option<bool> {
        self.values.get(wire).copied()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RoundTripMode {
    /// Every assignment of primary and constant inputs, constants left free.
    Exhaustive,
    /// Random primary inputs with the declared constants.
    Random { samples: usize, seed: u64 },
}

/// Inputs at or below this many bits (primary + constant) are checked
/// exhaustively by [`RoundTripMode::auto`].
pub const EXHAUSTIVE_ROUND_TRIP_BITS: usize = 10;

impl RoundTripMode {
    pub fn auto(n: &Netlist, samples: usize, seed: u64) -> Self {
        if n.inputs.len() + n.constants.len() <= EXHAUSTIVE_ROUND_TRIP_BITS {
            RoundTripMode::Exhaustive
        } else {
            RoundTripMode::Random { samples, seed }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RoundTripReport {
    pub mode: &'static str,
    pub vectors_checked: u64,
    pub round_trip_failures: u64,
    /// Distinct input vectors mapped to the same output vector. Only
    /// computed in exhaustive mode.
    pub image_collisions: u64,
    pub passed: bool,
}

impl Netlist {
    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    pub fn constants(&self) -> &[(String, bool)] {
        &self.constants
    }

    pub fn gates(&self) -> &[GateInstance] {
        &self.gates
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    pub fn garbage(&self) -> &[String] {
        &self.garbage
    }

    pub fn validate(&self) -> ValidationReport {
        match self.plan() {
            Ok(_) => ValidationReport {
                valid: true,
                violations: Vec::new(),
            },
            Err(report) => report.clone(),
        }
    }

    fn plan(&self) -> &std::result::Result<Arc<Plan>, ValidationReport> {
        self.plan.get_or_init(|| build_plan(self).map(Arc::new))
    }

    fn checked_plan(&self) -> Result<&Plan> {
        self.plan()
            .as_ref()
            .map(|p| p.as_ref())
            .map_err(|r| Error::InvalidNetlist(r.clone()))
    }

    pub fn cost_report(&self) -> Result<CostReport> {
        let plan = self.checked_plan()?;
        Ok(CostReport {
            gate_count: self.gates.len(),
            garbage_count: self.garbage.len(),
            unit_delay: plan.unit_delay,
            constant_input_count: self.constants.len(),
        })
    }

    /// Forward simulation from named primary-input values.
    pub fn simulate(&self, inputs: &BTreeMap<String, bool>) -> Result<Evaluation> {
        let plan = self.checked_plan()?;
        let assigned = self
            .inputs
            .iter()
            .map(|w| {
                inputs
                    .get(w)
                    .copied()
                    .ok_or_else(|| Error::MissingInput(w.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(extra) = inputs.keys().find(|k| !self.inputs.contains(k)) {
            return Err(Error::UnknownWire(extra.clone()));
        }
        let constants: Vec<bool> = self.constants.iter().map(|(_, v)| *v).collect();
        let values = plan.forward(&assigned, &constants);
        let named = |wires: &[String]| -> Vec<(String, bool)> {
            wires
                .iter()
                .map(|w| (w.clone(), values[plan.index[w]]))
                .collect()
        };
        Ok(Evaluation {
            values: plan
                .index
                .iter()
                .map(|(w, &i)| (w.clone(), values[i]))
                .collect(),
            primary_outputs: named(&self.outputs),
            garbage_outputs: named(&self.garbage),
        })
    }

    /// Positional forward simulation: primary outputs followed by garbage
    /// outputs, in declaration order.
    pub fn eval(&self, inputs: &[bool]) -> Result<Vec<bool>> {
        let constants: Vec<bool> = self.constants.iter().map(|(_, v)| *v).collect();
        self.eval_free(inputs, &constants)
    }

    /// Like [`Netlist::eval`] with the constant inputs overridden.
    pub fn eval_free(&self, inputs: &[bool], constants: &[bool]) -> Result<Vec<bool>> {
        let plan = self.checked_plan()?;
        check_len(self.inputs.len(), inputs.len())?;
        check_len(self.constants.len(), constants.len())?;
        let values = plan.forward(inputs, constants);
        Ok(plan
            .outputs
            .iter()
            .chain(&plan.garbage)
            .map(|&i| values[i])
            .collect())
    }

    /// Positional inverse: takes primary outputs then garbage outputs and
    /// returns `(primary inputs, constant inputs)`.
    pub fn eval_inverse(&self, outputs: &[bool]) -> Result<(Vec<bool>, Vec<bool>)> {
        let plan = self.checked_plan()?;
        check_len(self.outputs.len() + self.garbage.len(), outputs.len())?;
        let values = plan.backward(outputs)?;
        Ok((
            plan.inputs.iter().map(|&i| values[i]).collect(),
            plan.constants.iter().map(|&i| values[i]).collect(),
        ))
    }

    /// Runs the circuit backwards from a full assignment of primary and
    /// garbage outputs. The result holds every primary and constant input,
    /// including the value each constant must have had.
    pub fn simulate_inverse(&self, outputs: &BTreeMap<String, bool>) -> Result<BTreeMap<String, bool>> {
        let assigned = self
            .outputs
            .iter()
            .chain(&self.garbage)
            .map(|w| {
                outputs
                    .get(w)
                    .copied()
                    .ok_or_else(|| Error::MissingOutput(w.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        let (inputs, constants) = self.eval_inverse(&assigned)?;
        Ok(self
            .inputs
            .iter()
            .cloned()
            .zip(inputs)
            .chain(self.constants.iter().map(|(w, _)| w.clone()).zip(constants))
            .collect())
    }

    /// Checks that the inverse simulation recovers every input vector and,
    /// in exhaustive mode, that no two input vectors share an image.
    pub fn verify_round_trip(&self, mode: RoundTripMode) -> Result<RoundTripReport> {
        self.checked_plan()?;
        let ni = self.inputs.len();
        let nc = self.constants.len();
        let declared: Vec<bool> = self.constants.iter().map(|(_, v)| *v).collect();
        let mut failures = 0u64;
        let mut collisions = 0u64;
        let mut checked = 0u64;
        let mut check = |inputs: &[bool], constants: &[bool]| -> Result<Vec<bool>> {
            let out = self.eval_free(inputs, constants)?;
            let (back_in, back_const) = self.eval_inverse(&out)?;
            if back_in != inputs || back_const != constants {
                failures += 1;
            }
            checked += 1;
            Ok(out)
        };
        let mode_name = match mode {
            RoundTripMode::Exhaustive => {
                let total = ni + nc;
                if total > 24 {
                    return Err(Error::ArityTooLarge {
                        gate: "netlist".into(),
                        arity: total,
                        limit: 24,
                    });
                }
                let mut seen = vec![false; 1 << total];
                for x in 0..1u64 << total {
                    let bits: Vec<bool> = (0..total).map(|i| (x >> i) & 1 == 1).collect();
                    let out = check(&bits[..ni], &bits[ni..])?;
                    // outputs and inputs have equal counts on a valid netlist
                    // made of square gates
                    let image = pack_u64(&out);
                    match seen.get_mut(image as usize) {
                        Some(slot) if !*slot => *slot = true,
                        _ => collisions += 1,
                    }
                }
                "exhaustive"
            }
            RoundTripMode::Random { samples, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut bits = vec![false; ni];
                for _ in 0..samples {
                    bits.iter_mut().for_each(|b| *b = rng.gen());
                    check(&bits, &declared)?;
                }
                "random"
            }
        };
        Ok(RoundTripReport {
            mode: mode_name,
            vectors_checked: checked,
            round_trip_failures: failures,
            image_collisions: collisions,
            passed: failures == 0 && collisions == 0,
        })
    }
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::WidthMismatch { expected, actual });
    }
    Ok(())
}

fn pack_u64(bits: &[bool]) -> u64 {
    bits.iter()
        .enumerate()
        .fold(0, |acc, (i, &b)| acc | (u64::from(b) << i))
}

impl Plan {
    fn forward(&self, inputs: &[bool], constants: &[bool]) -> Vec<bool> {
        let mut values = vec![false; self.wire_count];
        for (&w, &v) in self.inputs.iter().zip(inputs) {
            values[w] = v;
        }
        for (&w, &v) in self.constants.iter().zip(constants) {
            values[w] = v;
        }
        let mut buf = Vec::with_capacity(4);
        for g in &self.gates {
            buf.clear();
            buf.extend(g.inputs.iter().map(|&w| values[w]));
            let y = g.kind.apply_packed(pack(&buf));
            for (port, &w) in g.outputs.iter().enumerate() {
                values[w] = (y >> port) & 1 == 1;
            }
        }
        values
    }

    fn backward(&self, outputs: &[bool]) -> Result<Vec<bool>> {
        let mut values = vec![false; self.wire_count];
        for (&w, &v) in self.outputs.iter().chain(&self.garbage).zip(outputs) {
            values[w] = v;
        }
        let mut buf = Vec::with_capacity(4);
        for g in self.gates.iter().rev() {
            buf.clear();
            buf.extend(g.outputs.iter().map(|&w| values[w]));
            let x = g
                .kind
                .invert_packed(pack(&buf))
                .ok_or_else(|| Error::NotBijective(g.kind.name().to_string()))?;
            for (port, &w) in g.inputs.iter().enumerate() {
                values[w] = (x >> port) & 1 == 1;
            }
        }
        Ok(values)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Source {
    Input,
    Constant,
    Gate(usize),
}

fn build_plan(n: &Netlist) -> std::result::Result<Plan, ValidationReport> {
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut names: Vec<String> = Vec::new();
    let mut intern = |w: &str, index: &mut HashMap<String, usize>| -> usize {
        if let Some(&i) = index.get(w) {
            return i;
        }
        let i = names.len();
        names.push(w.to_string());
        index.insert(w.to_string(), i);
        i
    };

    let mut drivers: Vec<Vec<Source>> = Vec::new();
    let mut sinks: Vec<usize> = Vec::new();
    let grow = |i: usize, drivers: &mut Vec<Vec<Source>>, sinks: &mut Vec<usize>| {
        if drivers.len() <= i {
            drivers.resize(i + 1, Vec::new());
            sinks.resize(i + 1, 0);
        }
    };

    let mut violations = Vec::new();
    for w in &n.inputs {
        let i = intern(w, &mut index);
        grow(i, &mut drivers, &mut sinks);
        drivers[i].push(Source::Input);
    }
    for (w, _) in &n.constants {
        let i = intern(w, &mut index);
        grow(i, &mut drivers, &mut sinks);
        drivers[i].push(Source::Constant);
    }
    for (g, inst) in n.gates.iter().enumerate() {
        let arity = inst.kind.arity();
        if inst.inputs.len() != arity || inst.outputs.len() != arity {
            violations.push(Violation::ArityMismatch {
                gate: g,
                name: inst.kind.name().to_string(),
                arity,
                inputs: inst.inputs.len(),
                outputs: inst.outputs.len(),
            });
        }
        for w in &inst.outputs {
            let i = intern(w, &mut index);
            grow(i, &mut drivers, &mut sinks);
            drivers[i].push(Source::Gate(g));
        }
    }
    let mut consumers: Vec<Vec<usize>> = Vec::new();
    for (g, inst) in n.gates.iter().enumerate() {
        for w in &inst.inputs {
            let i = intern(w, &mut index);
            grow(i, &mut drivers, &mut sinks);
            sinks[i] += 1;
            if consumers.len() <= i {
                consumers.resize(i + 1, Vec::new());
            }
            consumers[i].push(g);
        }
    }
    for w in n.outputs.iter().chain(&n.garbage) {
        let i = intern(w, &mut index);
        grow(i, &mut drivers, &mut sinks);
        sinks[i] += 1;
    }
    consumers.resize(drivers.len(), Vec::new());

    for (i, name) in names.iter().enumerate() {
        let wire = name.clone();
        match drivers[i].len() {
            0 => violations.push(Violation::Undriven { wire: wire.clone() }),
            1 => {}
            d => violations.push(Violation::MultiplyDriven {
                wire: wire.clone(),
                drivers: d,
            }),
        }
        if sinks[i] > 1 {
            violations.push(Violation::FanOut {
                wire: wire.clone(),
                sinks: sinks[i],
            });
        }
        if sinks[i] == 0 {
            match drivers[i].first() {
                Some(Source::Gate(g)) => violations.push(Violation::UnclassifiedOutput { wire, gate: *g }),
                Some(_) => violations.push(Violation::UnusedInput { wire }),
                None => {}
            }
        }
    }

    // Kahn's algorithm over gate-to-gate edges.
    let gate_count = n.gates.len();
    let mut indegree = vec![0usize; gate_count];
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); gate_count];
    for (i, ds) in drivers.iter().enumerate() {
        if let Some(Source::Gate(g)) = ds.first() {
            for &h in &consumers[i] {
                succ[*g].push(h);
                indegree[h] += 1;
            }
        }
    }
    let mut queue: VecDeque<usize> = (0..gate_count).filter(|&g| indegree[g] == 0).collect();
    let mut order = Vec::with_capacity(gate_count);
    while let Some(g) = queue.pop_front() {
        order.push(g);
        for &h in &succ[g] {
            indegree[h] -= 1;
            if indegree[h] == 0 {
                queue.push_back(h);
            }
        }
    }
    if order.len() < gate_count {
        violations.push(Violation::Cycle {
            gates: (0..gate_count).filter(|&g| indegree[g] > 0).collect(),
        });
    }

    if !violations.is_empty() {
        return Err(ValidationReport {
            valid: false,
            violations,
        });
    }

    let lookup = |w: &String| index[w];
    let gates: Vec<PlannedGate> = order
        .iter()
        .map(|&g| {
            let inst = &n.gates[g];
            PlannedGate {
                kind: inst.kind.clone(),
                inputs: inst.inputs.iter().map(lookup).collect(),
                outputs: inst.outputs.iter().map(lookup).collect(),
            }
        })
        .collect();

    let mut depth = vec![0usize; names.len()];
    for g in &gates {
        let d = 1 + g.inputs.iter().map(|&w| depth[w]).max().unwrap_or(0);
        for &w in &g.outputs {
            depth[w] = d;
        }
    }
    let outputs: Vec<usize> = n.outputs.iter().map(lookup).collect();
    let unit_delay = outputs.iter().map(|&w| depth[w]).max().unwrap_or(0);

    Ok(Plan {
        wire_count: names.len(),
        gates,
        inputs: n.inputs.iter().map(lookup).collect(),
        constants: n.constants.iter().map(|(w, _)| lookup(w)).collect(),
        outputs,
        garbage: n.garbage.iter().map(lookup).collect(),
        unit_delay,
        index,
    })
}

pub fn validate(n: &Netlist) -> ValidationReport {
    n.validate()
}

pub fn simulate(n: &Netlist, inputs: &BTreeMap<String, bool>) -> Result<Evaluation> {
    n.simulate(inputs)
}

pub fn simulate_inverse(n: &Netlist, outputs: &BTreeMap<String, bool>) -> Result<BTreeMap<String, bool>> {
    n.simulate_inverse(outputs)
}

pub fn cost_report(n: &Netlist) -> Result<CostReport> {
    n.cost_report()
}

/// Parses `.rnl` text using the standard gate library.
pub fn parse_rnl(text: &str) -> Result<Netlist> {
    parse_rnl_with(text, standard_library())
}

pub fn parse_rnl_with(text: &str, lib: &GateLibrary) -> Result<Netlist> {
    let mut b = NetlistBuilder::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let tokens = tokenize(line);
        let Some(&(col, head)) = tokens.first() else {
            continue;
        };
        let err = |column: usize, message: String| Error::Parse {
            line: lineno + 1,
            column,
            message,
        };
        let rest = &tokens[1..];
        let idents = |toks: &[(usize, &str)]| -> Result<Vec<String>> {
            toks.iter()
                .map(|&(c, t)| {
                    if is_ident(t) {
                        Ok(t.to_string())
                    } else {
                        Err(err(c, format!("expected a wire name, found `{t}`")))
                    }
                })
                .collect()
        };
        match head {
            "input" => idents(rest)?.into_iter().for_each(|w| {
                b.input(w);
            }),
            "output" => idents(rest)?.into_iter().for_each(|w| {
                b.output(w);
            }),
            "garbage" => idents(rest)?.into_iter().for_each(|w| {
                b.garbage(w);
            }),
            "const" => {
                let eol = line.trim_end().len() + 1;
                match rest {
                    [(wc, w), (_, "="), (vc, v)] => {
                        idents(&[(*wc, w)])?;
                        let value = match *v {
                            "0" => false,
                            "1" => true,
                            _ => return Err(err(*vc, format!("constant must be 0 or 1, found `{v}`"))),
                        };
                        b.constant(*w, value);
                    }
                    [_, _, _, (c, extra), ..] => {
                        return Err(err(*c, format!("unexpected `{extra}` after constant")))
                    }
                    [_, (c, t), ..] => return Err(err(*c, format!("expected `=`, found `{t}`"))),
                    _ => return Err(err(eol, "expected `const <wire> = 0|1`".into())),
                }
            }
            "gate" => {
                let Some(&(nc, name)) = rest.first() else {
                    return Err(err(col + 4, "expected a gate name".into()));
                };
                let kind = lib.get(name).ok_or_else(|| Error::UnknownGate {
                    name: name.to_string(),
                    line: lineno + 1,
                    column: nc,
                })?;
                let ports = &rest[1..];
                let Some(arrow) = ports.iter().position(|&(_, t)| t == "->") else {
                    return Err(err(nc, format!("gate `{name}` is missing `->`")));
                };
                b.gate(kind, idents(&ports[..arrow])?, idents(&ports[arrow + 1..])?);
            }
            other => return Err(err(col, format!("unknown directive `{other}`"))),
        }
    }
    Ok(b.build())
}

/// Whitespace-separated tokens with 1-based columns.
fn tokenize(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s + 1, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

fn is_ident(t: &str) -> bool {
    let mut chars = t.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '[' | ']'))
}

/// Canonical `.rnl` text.
pub fn serialize_rnl(n: &Netlist) -> String {
    let mut out = String::new();
    let line = |out: &mut String, head: &str, wires: &[String]| {
        if !wires.is_empty() {
            out.push_str(head);
            for w in wires {
                out.push(' ');
                out.push_str(w);
            }
            out.push('\n');
        }
    };
    line(&mut out, "input", &n.inputs);
    for (w, v) in &n.constants {
        out.push_str(&format!("const {w} = {}\n", u8::from(*v)));
    }
    for g in &n.gates {
        out.push_str("gate ");
        out.push_str(g.kind.name());
        for w in &g.inputs {
            out.push(' ');
            out.push_str(w);
        }
        out.push_str(" ->");
        for w in &g.outputs {
            out.push(' ');
            out.push_str(w);
        }
        out.push('\n');
    }
    line(&mut out, "output", &n.outputs);
    line(&mut out, "garbage", &n.garbage);
    out
}
