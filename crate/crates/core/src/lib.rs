//! Deterministic discrete-event model of three radio-access architectures:
//! a macro base station per cell, C-RAN (static remote radio heads on a
//! shared BBU pool) and UAV-assisted C-RAN, where flying radio heads are
//! dispatched from a standby platform when a cell runs hot.
//!
//! The crate is `no_std` + `alloc`. File formats, the command line and
//! parallel sweeps live in the `ucran` companion crate.

#![cfg_attr(not(any(feature = "std", test)), no_std)]
// `!(x > 0.0)` style checks are deliberate: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analytic;
pub mod channel;
pub mod controller;
pub mod engine;
pub mod error;
pub mod latency;
pub mod math;
pub mod metrics;
pub mod power;
pub mod topology;
pub mod trace;
pub mod traffic;

mod ids;

pub use crate::engine::config::{Architecture, ScenarioConfig, ScenarioKind};
pub use crate::engine::{run, run_sweep, RunOutput, SweepReport};
pub use crate::error::{Error, Result};
pub use crate::ids::{CellId, LinkId, NodeId, TaskId, UeId};
pub use crate::metrics::{MetricsReport, MetricsRow};
pub use crate::topology::Topology;
pub use crate::trace::{Trace, TraceRecord};
