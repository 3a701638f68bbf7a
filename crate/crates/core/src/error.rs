// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

use crate::netlist::ValidationReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("width mismatch: expected {expected} bits, got {actual}")]
    WidthMismatch { expected: usize, actual: usize },
    #[error("gate `{gate}` has arity {arity}, above the exhaustive limit of {limit}")]
    ArityTooLarge {
        gate: String,
        arity: usize,
        limit: usize,
    },
    #[error("gate `{0}` is not bijective and has no inverse")]
    NotBijective(String),
    #[error("{line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{line}:{column}: unknown gate `{name}`")]
    UnknownGate {
        name: String,
        line: usize,
        column: usize,
    },
    #[error("invalid netlist: {0}")]
    InvalidNetlist(ValidationReport),
    #[error("no value assigned to input `{0}`")]
    MissingInput(String),
    #[error("no value assigned to output `{0}`")]
    MissingOutput(String),
    #[error("`{0}` is not a wire of this circuit")]
    UnknownWire(String),
    #[error("width must be at least 1")]
    ZeroWidth,
    #[error("modulus {0} is even; Montgomery reduction needs an odd modulus")]
    EvenModulus(u64),
    #[error("modulus {modulus} does not fit in {bits} bits")]
    ModulusTooWide { modulus: u64, bits: u32 },
    #[error("operand width {0} is outside the supported range 1..=63")]
    UnsupportedWidth(u32),
    #[error("{name} = {value} is out of range, must be below {bound}")]
    OperandOutOfRange {
        name: &'static str,
        value: u64,
        bound: u64,
    },
    #[error("modulus must be at least 3, got {0}")]
    ModulusTooSmall(u64),
    #[error("temperature must be positive, got {0} K")]
    NonPositiveTemperature(f64),
    #[error("{name} must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("run recorded fewer than two state snapshots")]
    EmptyRun,
    #[error("selector class has {selected} selected and {rejected} rejected traces; need at least 2 of each")]
    InsufficientClass { selected: usize, rejected: usize },
    #[error("trace {index} has length {len}, expected {expected}")]
    RaggedTraces {
        index: usize,
        len: usize,
        expected: usize,
    },
    #[error("datapath invariant violated in cycle {cycle}: {message}")]
    Invariant { cycle: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
