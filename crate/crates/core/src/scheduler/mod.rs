//! Scheduling under memory constraints.
//!
//! [`schedule`] is a cycle-driven list scheduler: ready vertices are ordered
//! by mobility (deadline minus current cycle), and memory accesses whose bank
//! has no idle port are dropped from the ready list regardless of priority.
//! [`check_schedule`] re-derives every constraint from the inputs alone, and
//! [`oracle_optimal`] searches all start-time assignments of small graphs for
//! the minimum latency.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::join;
use crate::memory::{MemoryMap, Residence};
use crate::sfg::{VertexId, VertexKind};
use crate::Cycle;

mod check;
pub(crate) mod list;
mod oracle;
mod timing;

pub use check::{check_schedule, Constraint, Verdict, Violation};
pub use list::schedule;
pub use oracle::{oracle_optimal, OracleOutcome, ORACLE_MAX_VERTICES};
pub use timing::{alap, asap, mobility};

/// Latency constraint and operator library for one scheduling run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchedulerConfig {
    /// Cycle budget of one iteration; every entry must end by it.
    pub horizon: Cycle,
    /// Per operator latency; missing operators take one cycle.
    pub op_latency: BTreeMap<String, Cycle>,
    /// Per operator functional-unit count; missing operators are unconstrained.
    pub fu_limits: BTreeMap<String, u32>,
}

impl SchedulerConfig {
    pub fn new(horizon: Cycle) -> Self {
        SchedulerConfig {
            horizon,
            op_latency: BTreeMap::new(),
            fu_limits: BTreeMap::new(),
        }
    }

    pub fn with_latency(mut self, op: &str, cycles: Cycle) -> Self {
        self.op_latency.insert(op.into(), cycles);
        self
    }

    pub fn with_fu_limit(mut self, op: &str, count: u32) -> Self {
        self.fu_limits.insert(op.into(), count);
        self
    }

    pub fn latency_of(&self, op: &str) -> Cycle {
        self.op_latency.get(op).copied().unwrap_or(1)
    }

    pub fn validate(&self) -> Result<(), ScheduleError> {
        if self.horizon == 0 {
            return Err(ScheduleError::InvalidConfig("horizon must be at least 1".into()));
        }
        if let Some((op, _)) = self.op_latency.iter().find(|(_, &l)| l == 0) {
            return Err(ScheduleError::InvalidConfig(alloc::format!(
                "latency of '{op}' must be at least 1"
            )));
        }
        if let Some((op, _)) = self.fu_limits.iter().find(|(_, &n)| n == 0) {
            return Err(ScheduleError::InvalidConfig(alloc::format!(
                "unit count of '{op}' must be at least 1"
            )));
        }
        Ok(())
    }
}

/// What a scheduled vertex occupies.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Resource {
    /// A port of the named bank.
    Bank(String),
    /// A functional unit of the named operator class.
    Fu(String),
    Register,
}

impl fmt::Display for Resource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Resource::Bank(name) | Resource::Fu(name) => f.write_str(name),
            Resource::Register => f.write_str("register"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ScheduleEntry {
    pub vertex: VertexId,
    pub start: Cycle,
    /// Exclusive.
    pub end: Cycle,
    pub resource: Resource,
}

/// An executed transfer directive and the cycles it held ports.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct DmaEntry {
    pub symbol: String,
    pub from_bank: String,
    pub to_bank: String,
    pub start: Cycle,
    pub end: Cycle,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Schedule {
    entries: Vec<ScheduleEntry>,
    dma: Vec<DmaEntry>,
    achieved_latency: Cycle,
}

impl Schedule {
    /// Sorts entries by `(start, vertex)` and DMA entries by `(start, symbol)`.
    pub fn new(mut entries: Vec<ScheduleEntry>, mut dma: Vec<DmaEntry>) -> Self {
        entries.sort_by(|a, b| (a.start, &a.vertex).cmp(&(b.start, &b.vertex)));
        dma.sort_by(|a, b| (a.start, &a.symbol).cmp(&(b.start, &b.symbol)));
        let achieved_latency = entries.iter().map(|e| e.end).max().unwrap_or(0);
        Schedule {
            entries,
            dma,
            achieved_latency,
        }
    }

    pub fn entries(&self) -> &[ScheduleEntry] {
        &self.entries
    }

    pub fn entry(&self, vertex: &str) -> Option<&ScheduleEntry> {
        self.entries.iter().find(|e| e.vertex.as_str() == vertex)
    }

    pub fn dma(&self) -> &[DmaEntry] {
        &self.dma
    }

    /// Largest entry end, 0 for an empty schedule.
    pub fn achieved_latency(&self) -> Cycle {
        self.achieved_latency
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unmapped symbols: {}", join(.0, ", "))]
    Unmapped(Vec<String>),
    #[error("infeasible: critical path of {critical_path} cycles exceeds horizon {horizon} (path {})", join(.path, " -> "))]
    InfeasibleHorizon {
        critical_path: Cycle,
        horizon: Cycle,
        path: Vec<VertexId>,
    },
    #[error("infeasible: '{vertex}' is still waiting at cycle {cycle} past its deadline {deadline} (mobility {})", i64::from(*.deadline) - i64::from(*.cycle))]
    NegativeMobility {
        vertex: VertexId,
        cycle: Cycle,
        deadline: Cycle,
    },
    #[error("infeasible: horizon {horizon} reached with unscheduled vertices {}", join(.pending, ", "))]
    HorizonExceeded { horizon: Cycle, pending: Vec<VertexId> },
    #[error("transfer of '{symbol}' at cycle {cycle} finds no idle port on bank '{bank}'")]
    TransferPortClash { symbol: String, bank: String, cycle: Cycle },
    #[error("transfer of '{symbol}' ends at cycle {end}, beyond horizon {horizon}")]
    TransferBeyondHorizon { symbol: String, end: Cycle, horizon: Cycle },
    #[error("oracle limited to {limit} non-delay vertices, got {vertices}")]
    TooLarge { vertices: usize, limit: usize },
}

/// Resource and latency of a non-delay vertex started at `start`; `None`
/// for delays and for accesses to unplaced symbols.
pub(crate) fn vertex_cost(
    kind: &VertexKind,
    m: &MemoryMap,
    cfg: &SchedulerConfig,
    start: Cycle,
) -> Option<(Resource, Cycle)> {
    match kind {
        VertexKind::Op { name, .. } => Some((Resource::Fu(name.clone()), cfg.latency_of(name))),
        VertexKind::Data { symbol, access } => match m.residence(symbol, start)? {
            Residence::Register => Some((Resource::Register, 0)),
            Residence::Bank(b) => Some((Resource::Bank(b.name.clone()), b.latency(*access))),
        },
        VertexKind::Delay { .. } => None,
    }
}

pub(crate) fn ensure_covered(g: &crate::sfg::SfgGraph, m: &MemoryMap) -> Result<(), ScheduleError> {
    let report = m.coverage(g);
    if report.is_success() {
        Ok(())
    } else {
        Err(ScheduleError::Unmapped(report.unplaced))
    }
}

/// `[start, end)` windows per bank during which declared transfers hold a port.
pub(crate) fn transfer_windows(m: &MemoryMap) -> BTreeMap<&str, Vec<(Cycle, Cycle)>> {
    let mut out: BTreeMap<&str, Vec<(Cycle, Cycle)>> = BTreeMap::new();
    for t in m.transfers() {
        let w = m.transfer_window(t);
        out.entry(&t.from_bank).or_default().push(w);
        out.entry(&t.to_bank).or_default().push(w);
    }
    out
}

pub(crate) fn dma_entries(m: &MemoryMap) -> Vec<DmaEntry> {
    m.transfers()
        .iter()
        .map(|t| {
            let (start, end) = m.transfer_window(t);
            DmaEntry {
                symbol: t.symbol.clone(),
                from_bank: t.from_bank.clone(),
                to_bank: t.to_bank.clone(),
                start,
                end,
            }
        })
        .collect()
}

#[cfg(test)]
pub(crate) mod fixtures;
