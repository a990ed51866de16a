//! Memory-aware operation scheduling for high-level synthesis.
//!
//! The crate takes a Signal Flow Graph ([`sfg::SfgGraph`]) of a DSP kernel
//! together with an explicit memory mapping ([`memory::MemoryMap`]) and
//! produces a cycle-accurate [`scheduler::Schedule`]. Every data vertex is a
//! one-word memory access; the memory ports are modelled as tokens
//! ([`mcg::TokenPool`]) and a ready access is only issued when its resident
//! bank has an idle token.
//!
//! The crate is `no_std` and only needs `alloc`. Text formats, reports and
//! the command-line driver live in the `memsched` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod mcg;
pub mod memory;
pub mod scheduler;
pub mod sfg;

/// Clock cycle index (or duration in cycles).
pub type Cycle = u32;

pub use mcg::{build_mcg, ConflictEdge, Mcg, TokenError, TokenPool};
pub use memory::{
    CoverageReport, Location, MapError, MemoryBank, MemoryMap, Placement, Residence, StorageKind, TransferDirective,
};
pub use scheduler::{
    alap, asap, check_schedule, mobility, oracle_optimal, schedule, Constraint, DmaEntry, OracleOutcome, Resource,
    Schedule, ScheduleEntry, ScheduleError, SchedulerConfig, Verdict, Violation,
};
pub use sfg::{
    Access, IterationDependency, MemoryTableRow, OpClass, Precedence, SfgEdge, SfgError, SfgGraph, SfgVertex, VertexId,
    VertexKind,
};

pub(crate) fn join<T: core::fmt::Display>(items: &[T], sep: &str) -> alloc::string::String {
    use core::fmt::Write;
    let mut out = alloc::string::String::new();
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(sep);
        }
        let _ = write!(out, "{item}");
    }
    out
}
