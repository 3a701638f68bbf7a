// SPDX-License-Identifier: Apache-2.0

//! Reversible-logic building blocks for a cryptographic ALU.
//!
//! The crate covers the primitive gates ([`gatelib`]), acyclic reversible
//! netlists ([`netlist`]), adder generators ([`arith`]), clocked elements
//! built from Fredkin latches ([`sequential`]), Montgomery multiplication at
//! word and gate level ([`montgomery`]), and erasure/energy accounting with a
//! small power-trace harness ([`energy`]).

pub mod arith;
pub mod bits;
pub mod energy;
pub mod error;
pub mod gatelib;
pub mod montgomery;
pub mod netlist;
pub mod sequential;

pub use bits::BitVector;
pub use error::{Error, Result};
pub use gatelib::{GateKind, GateLibrary};
pub use netlist::{CostReport, Netlist, NetlistBuilder, ValidationReport};
