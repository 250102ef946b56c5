//! Simulation laboratory and bound calculators for unbalanced `d`-choice
//! balls-into-bins allocation.
//!
//! * [`engine`] runs UNIFORM, FAIR and GREEDY with reproducible, separated
//!   option and tie streams;
//! * [`rankstats`] computes order statistics of a load vector;
//! * [`fluid`] integrates the fluid-limit ODE for GREEDY load fractions;
//! * [`bounds`] evaluates the closed-form bounds;
//! * [`experiments`] runs couplings, paradox and swap trials and the
//!   replication harness.

// `!(x > 0.0)` style checks reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod fluid;
pub mod rankstats;

pub use engine::{
    run, AllocationState, OptionSet, PolicyKind, RunSpec, TieScript, TieWeight, Trace,
};
pub use error::{Error, Result};
