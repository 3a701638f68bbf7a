// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use revalu::arith::{build_cpa, build_csa42, build_csa52, build_full_adder};
use revalu::energy::{
    datapath_trace, dpa_diff_of_means, erasure_bits, peak_index, EnergyReport, ErasureReport,
    PhysicalParams, PowerModel, PowerTrace, MODEL_NOTE,
};
use revalu::montgomery::{build_mont_datapath, mont_exp_stats, mont_mult_trace, MontParams};
use revalu::netlist::{parse_rnl, serialize_rnl, CostReport, Netlist, RoundTripMode};
use revalu::sequential::{ClockedCircuit, ClockedKind, ClockedManifest};

use crate::{BuildKind, Command, Format, Model, Physics, TraceFormat};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(String),
    /// Verification ran and found problems; the report is already printed.
    Unclean,
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) | CliError::Unclean => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Domain(m) => f.write_str(m),
            CliError::Unclean => f.write_str("verification failed"),
        }
    }
}

impl From<revalu::Error> for CliError {
    fn from(e: revalu::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

type CliResult<T = ()> = Result<T, CliError>;

/// Decimal or `0x`-prefixed hexadecimal.
pub fn parse_u64(s: &str) -> Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("`{s}` is not a non-negative integer: {e}"))
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Domain(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> CliResult {
    fs::write(path, text).map_err(|e| CliError::Domain(format!("cannot write {}: {e}", path.display())))
}

fn load_netlist(path: &Path) -> CliResult<Netlist> {
    parse_rnl(&read(path)?).map_err(|e| CliError::Domain(format!("{}:{e}", path.display())))
}

fn print_json<T: Serialize>(value: &T) -> CliResult {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Domain(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn print_cost(cost: &CostReport, format: Format) -> CliResult {
    match format {
        Format::Json => print_json(cost),
        Format::Text => {
            println!("gates: {}", cost.gate_count);
            println!("garbage: {}", cost.garbage_count);
            println!("unit_delay: {}", cost.unit_delay);
            println!("constant_inputs: {}", cost.constant_input_count);
            Ok(())
        }
    }
}

fn physical(p: &Physics) -> PhysicalParams {
    PhysicalParams {
        temperature_k: p.temp_k,
        capacitance_f: p.cap_f,
        vdd_v: p.vdd,
    }
}

fn bit(v: bool) -> u8 {
    u8::from(v)
}

pub fn run(command: Command) -> CliResult {
    match command {
        Command::Build {
            kind,
            width,
            m,
            n,
            out,
            format,
        } => cmd_build(kind, width as usize, m, n, out.as_deref(), format),
        Command::Verify { path, random, seed } => cmd_verify(&path, random, seed),
        Command::Sim {
            path,
            set,
            clocked,
            stimulus,
        } => {
            if clocked {
                let stimulus = stimulus
                    .ok_or_else(|| CliError::Usage("--clocked needs --stimulus <file.json>".into()))?;
                cmd_sim_clocked(&path, &stimulus)
            } else {
                cmd_sim(&path, &set)
            }
        }
        Command::Cost {
            path,
            energy,
            physics,
            format,
        } => cmd_cost(&path, energy, &physics, format),
        Command::Montmul {
            x,
            y,
            m,
            n,
            gate_level,
            trace,
        } => cmd_montmul(x, y, m, n, gate_level, trace),
        Command::Montexp { a, b, modulus, stats } => {
            let s = mont_exp_stats(a, b, modulus)?;
            println!("{}", s.value);
            if stats {
                print_json(&json!({
                    "value": s.value,
                    "squarings": s.squarings,
                    "multiplications": s.multiplications,
                    "conversions": s.conversions,
                    "mont_mult_calls": s.mont_mult_calls(),
                }))?;
            }
            Ok(())
        }
        Command::Trace {
            x,
            y,
            m,
            n,
            model,
            format,
            physics,
        } => cmd_trace(x, y, m, n, model, format, &physics),
        Command::Dpa {
            m,
            n,
            y,
            traces,
            bit,
            seed,
            model,
            format,
        } => cmd_dpa(m, n, y, traces, bit, seed, model, format),
    }
}

fn cmd_build(
    kind: BuildKind,
    width: usize,
    m: Option<u64>,
    n: Option<u32>,
    out: Option<&Path>,
    format: Format,
) -> CliResult {
    let clocked = |k: ClockedKind| -> CliResult {
        let c = ClockedCircuit::build(k, width)?;
        let manifest = c.manifest()?;
        if let Some(path) = out {
            let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Domain(e.to_string()))?;
            write(path, &text)?;
        }
        print_cost(&manifest.cost, format)
    };
    let netlist = match kind {
        BuildKind::Fa => build_full_adder(),
        BuildKind::Cpa => build_cpa(width)?,
        BuildKind::Csa42 => build_csa42(width)?,
        BuildKind::Csa52 => build_csa52(width)?,
        BuildKind::Dlatch => return clocked(ClockedKind::DLatch),
        BuildKind::Dff => return clocked(ClockedKind::MsDff),
        BuildKind::Register => return clocked(ClockedKind::Register),
        BuildKind::Shiftreg => return clocked(ClockedKind::ShiftRegister),
        BuildKind::Montgomery => {
            let (Some(m), Some(n)) = (m, n) else {
                return Err(CliError::Usage("build montgomery needs --m and --n".into()));
            };
            let d = build_mont_datapath(&MontParams::new(m, n)?)?;
            let cost = d.cost_report()?;
            if let Some(path) = out {
                let manifest = json!({
                    "modulus": m,
                    "bits": n,
                    "register_width": d.width(),
                    "stage1": serialize_rnl(d.stage1()),
                    "stage2": serialize_rnl(d.stage2()),
                    "final_adder": serialize_rnl(d.final_adder()),
                    "cost": cost,
                });
                write(path, &serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Domain(e.to_string()))?)?;
            }
            return match format {
                Format::Json => print_json(&cost),
                Format::Text => print_cost(&cost.total, format),
            };
        }
    };
    if let Some(path) = out {
        write(path, &serialize_rnl(&netlist))?;
    }
    print_cost(&netlist.cost_report()?, format)
}

fn cmd_verify(path: &Path, random: Option<usize>, seed: u64) -> CliResult {
    let n = load_netlist(path)?;
    let validation = n.validate();
    let round_trip = if validation.valid {
        let mode = match random {
            Some(samples) => RoundTripMode::Random { samples, seed },
            None => RoundTripMode::auto(&n, 1000, seed),
        };
        Some(n.verify_round_trip(mode)?)
    } else {
        None
    };
    let clean = validation.valid && round_trip.as_ref().is_some_and(|r| r.passed);
    print_json(&json!({
        "path": path.display().to_string(),
        "clean": clean,
        "validation": validation,
        "round_trip": round_trip,
    }))?;
    if clean {
        Ok(())
    } else {
        Err(CliError::Unclean)
    }
}

fn parse_assignment(s: &str) -> CliResult<(String, bool)> {
    let (wire, value) = s
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("expected WIRE=BIT, got `{s}`")))?;
    let value = match value.trim() {
        "0" => false,
        "1" => true,
        other => return Err(CliError::Usage(format!("bit must be 0 or 1, got `{other}`"))),
    };
    Ok((wire.trim().to_string(), value))
}

fn cmd_sim(path: &Path, set: &[String]) -> CliResult {
    let n = load_netlist(path)?;
    let inputs = set
        .iter()
        .map(|s| parse_assignment(s))
        .collect::<CliResult<BTreeMap<_, _>>>()?;
    let e = n.simulate(&inputs)?;
    let as_map = |pairs: &[(String, bool)]| -> BTreeMap<String, u8> {
        pairs.iter().map(|(w, v)| (w.clone(), bit(*v))).collect()
    };
    print_json(&json!({
        "outputs": as_map(&e.primary_outputs),
        "garbage": as_map(&e.garbage_outputs),
    }))
}

fn json_bit(v: &Value) -> Option<bool> {
    match v {
        Value::Bool(b) => Some(*b),
        Value::Number(n) => match n.as_u64() {
            Some(0) => Some(false),
            Some(1) => Some(true),
            _ => None,
        },
        _ => None,
    }
}

fn cmd_sim_clocked(path: &Path, stimulus: &Path) -> CliResult {
    let manifest: ClockedManifest = serde_json::from_str(&read(path)?)
        .map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))?;
    let steps: Vec<BTreeMap<String, Value>> = serde_json::from_str(&read(stimulus)?)
        .map_err(|e| CliError::Domain(format!("{}: {e}", stimulus.display())))?;
    let mut circuit = manifest.instantiate()?;
    let mut responses = Vec::with_capacity(steps.len());
    for (t, step) in steps.iter().enumerate() {
        let inputs = step
            .iter()
            .map(|(k, v)| {
                json_bit(v)
                    .map(|b| (k.clone(), b))
                    .ok_or_else(|| CliError::Domain(format!("step {t}: `{k}` must be 0, 1, true or false")))
            })
            .collect::<CliResult<BTreeMap<_, _>>>()?;
        let out = circuit
            .step(&inputs)
            .map_err(|e| CliError::Domain(format!("step {t}: {e}")))?;
        let mut row: BTreeMap<String, Value> = out
            .outputs
            .iter()
            .map(|(k, v)| (k.clone(), json!(bit(*v))))
            .collect();
        row.insert("garbage_bits".into(), json!(out.garbage_bits));
        responses.push(row);
    }
    print_json(&responses)
}

fn cmd_cost(path: &Path, energy: bool, physics: &Physics, format: Format) -> CliResult {
    let n = load_netlist(path)?;
    let cost = n.cost_report()?;
    if !energy {
        return print_cost(&cost, format);
    }
    let report = EnergyReport::new(&erasure_bits(&n)?, 0, &physical(physics))?;
    match format {
        Format::Json => print_json(&json!({ "cost": cost, "energy": report })),
        Format::Text => {
            print_cost(&cost, format)?;
            println!("erased_bits: {}", report.erased_bits);
            println!("deferred_erasure_bits: {}", report.deferred_erasure_bits);
            println!("landauer_joules: {:e}", report.landauer_joules);
            println!("deferred_landauer_joules: {:e}", report.deferred_landauer_joules);
            println!("note: {}", report.note);
            Ok(())
        }
    }
}

fn cmd_montmul(x: u64, y: u64, m: u64, n: u32, gate_level: bool, trace: bool) -> CliResult {
    let p = MontParams::new(m, n)?;
    if gate_level {
        let run = build_mont_datapath(&p)?.run(x, y)?;
        println!("{}", run.result);
        if trace {
            print_json(&run)?;
        }
    } else {
        let t = mont_mult_trace(x, y, &p)?;
        println!("{}", t.result);
        if trace {
            print_json(&t)?;
        }
    }
    Ok(())
}

fn model(m: Model) -> PowerModel {
    match m {
        Model::Hd => PowerModel::HammingDistance,
        Model::Constant => PowerModel::Constant(1),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_trace(x: u64, y: u64, m: u64, n: u32, mdl: Model, format: TraceFormat, physics: &Physics) -> CliResult {
    let d = build_mont_datapath(&MontParams::new(m, n)?)?;
    let run = d.run(x, y)?;
    let trace = datapath_trace(&run, model(mdl))?;
    match format {
        TraceFormat::Csv => {
            print!("{}", trace.to_csv());
            Ok(())
        }
        TraceFormat::Json => {
            let internal: f64 = [d.stage1(), d.stage2(), d.final_adder()]
                .into_iter()
                .map(|n| erasure_bits(n).map(|r| r.internal_bits))
                .sum::<revalu::Result<f64>>()?;
            let erasure = ErasureReport {
                internal_bits: internal,
                naive_bits: 0,
                deferred_bits: run.garbage_bits as usize,
            };
            let energy = EnergyReport::new(&erasure, trace.total(), &physical(physics))?;
            print_json(&json!({ "result": run.result, "trace": trace, "energy": energy }))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_dpa(
    m: u64,
    n: u32,
    y: Option<u64>,
    count: usize,
    selector_bit: u32,
    seed: u64,
    mdl: Model,
    format: TraceFormat,
) -> CliResult {
    if selector_bit >= n {
        return Err(CliError::Usage(format!("--bit {selector_bit} is outside the {n}-bit operand")));
    }
    let d = build_mont_datapath(&MontParams::new(m, n)?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y = match y {
        Some(y) => y,
        None => rng.gen_range(0..m),
    };
    let traces = (0..count)
        .map(|_| datapath_trace(&d.run(rng.gen_range(0..m), y)?, model(mdl)))
        .collect::<revalu::Result<Vec<PowerTrace>>>()?;
    let select = |t: &PowerTrace| (t.metadata["x"] >> selector_bit) & 1 == 1;
    let diff = dpa_diff_of_means(&traces, select)?;
    match format {
        TraceFormat::Csv => {
            println!("cycle,differential");
            for (i, v) in diff.iter().enumerate() {
                println!("{i},{v}");
            }
            Ok(())
        }
        TraceFormat::Json => {
            let selected = traces.iter().filter(|t| select(t)).count();
            print_json(&json!({
                "y": y,
                "selector_bit": selector_bit,
                "selected": selected,
                "rejected": traces.len() - selected,
                "differential": diff,
                "peak_cycle": peak_index(&diff),
                "note": MODEL_NOTE,
            }))
        }
    }
}
