//! Independent schedule verification.
//!
//! Everything is re-derived from the graph, the map and the configuration;
//! nothing here consults scheduler state. Constraints are checked in the
//! order of [`Constraint`] and the earliest violation of the first failing
//! constraint is reported.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use super::{dma_entries, vertex_cost, Resource, Schedule, SchedulerConfig};
use crate::join;
use crate::memory::MemoryMap;
use crate::sfg::{SfgGraph, VertexKind};
use crate::Cycle;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Constraint {
    /// Exactly one entry per non-delay vertex and nothing else.
    Coverage,
    /// Every accessed symbol is placed.
    Mapping,
    /// Resource matches the vertex kind and the symbol's residence at start.
    Resource,
    /// `end == start + latency`.
    Latency,
    Horizon,
    /// DMA entries match the declared transfers; no access overlaps its symbol's transfer.
    TransferWindow,
    Precedence,
    PortCapacity,
    FuCapacity,
}

impl Constraint {
    pub fn as_str(self) -> &'static str {
        match self {
            Constraint::Coverage => "coverage",
            Constraint::Mapping => "mapping",
            Constraint::Resource => "resource",
            Constraint::Latency => "latency",
            Constraint::Horizon => "horizon",
            Constraint::TransferWindow => "transfer-window",
            Constraint::Precedence => "precedence",
            Constraint::PortCapacity => "port-capacity",
            Constraint::FuCapacity => "fu-capacity",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub constraint: Constraint,
    pub cycle: Cycle,
    pub vertices: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail(Violation),
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

/// `OK` or `FAIL <constraint> cycle=<c> vertices=<ids>`.
impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass => f.write_str("OK"),
            Verdict::Fail(v) => write!(
                f,
                "FAIL {} cycle={} vertices={}",
                v.constraint.as_str(),
                v.cycle,
                join(&v.vertices, ",")
            ),
        }
    }
}

fn fail(constraint: Constraint, cycle: Cycle, vertices: Vec<String>) -> Verdict {
    Verdict::Fail(Violation {
        constraint,
        cycle,
        vertices,
    })
}

/// Verifies `s` against `g`, `m` and `cfg`. Adversarial input is fine.
pub fn check_schedule(g: &SfgGraph, m: &MemoryMap, cfg: &SchedulerConfig, s: &Schedule) -> Verdict {
    // Coverage.
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, e) in s.entries().iter().enumerate() {
        let id = e.vertex.as_str();
        let known = g.vertex(id).is_some_and(|v| !v.kind.is_delay());
        if !known || seen.insert(id, i).is_some() {
            return fail(Constraint::Coverage, e.start, vec![id.into()]);
        }
    }
    if let Some(missing) = g
        .vertices()
        .find(|v| !v.kind.is_delay() && !seen.contains_key(v.id.as_str()))
    {
        return fail(Constraint::Coverage, 0, vec![missing.id.as_str().into()]);
    }

    let entries = by_start(s);
    let kind = |id: &str| &g.vertex(id).expect("coverage checked").kind;

    let mut expected = Vec::with_capacity(entries.len());
    for e in &entries {
        match vertex_cost(kind(e.vertex.as_str()), m, cfg, e.start) {
            Some(cost) => expected.push(cost),
            None => return fail(Constraint::Mapping, e.start, vec![e.vertex.as_str().into()]),
        }
    }
    for (e, (resource, _)) in entries.iter().zip(&expected) {
        if e.resource != *resource {
            return fail(Constraint::Resource, e.start, vec![e.vertex.as_str().into()]);
        }
    }
    for (e, (_, latency)) in entries.iter().zip(&expected) {
        if e.end != e.start.saturating_add(*latency) || e.end < e.start {
            return fail(Constraint::Latency, e.start, vec![e.vertex.as_str().into()]);
        }
    }
    for e in &entries {
        if e.end > cfg.horizon {
            return fail(Constraint::Horizon, e.end, vec![e.vertex.as_str().into()]);
        }
    }

    // Transfers are constraints: the schedule must carry exactly the declared windows.
    let mut declared = dma_entries(m);
    declared.sort();
    let mut carried = s.dma().to_vec();
    carried.sort();
    if declared != carried {
        let diff = declared
            .iter()
            .filter(|d| !carried.contains(d))
            .chain(carried.iter().filter(|c| !declared.contains(c)))
            .min_by_key(|d| d.start)
            .expect("lists differ");
        return fail(
            Constraint::TransferWindow,
            diff.start,
            vec![alloc::format!("dma:{}", diff.symbol)],
        );
    }
    for d in &declared {
        if d.end > cfg.horizon {
            return fail(Constraint::Horizon, d.end, vec![alloc::format!("dma:{}", d.symbol)]);
        }
    }
    for e in &entries {
        if let VertexKind::Data { symbol, .. } = kind(e.vertex.as_str()) {
            let touching = declared
                .iter()
                .find(|d| d.symbol == *symbol && e.start < d.end && d.start < e.end.max(e.start + 1));
            if let Some(d) = touching {
                return fail(
                    Constraint::TransferWindow,
                    e.start.max(d.start),
                    vec![e.vertex.as_str().into(), alloc::format!("dma:{}", d.symbol)],
                );
            }
        }
    }

    // Precedence over direct edges between non-delay vertices.
    let entry = |id: &str| {
        entries
            .iter()
            .find(|e| e.vertex.as_str() == id)
            .expect("coverage checked")
    };
    let mut worst: Option<(Cycle, String, String)> = None;
    for edge in g.edges() {
        if kind(edge.src.as_str()).is_delay() || kind(edge.dst.as_str()).is_delay() {
            continue;
        }
        let (p, c) = (entry(edge.src.as_str()), entry(edge.dst.as_str()));
        if c.start < p.end {
            let cand = (c.start, p.vertex.as_str().into(), c.vertex.as_str().into());
            if worst.as_ref().is_none_or(|w| cand < *w) {
                worst = Some(cand);
            }
        }
    }
    if let Some((cycle, p, c)) = worst {
        return fail(Constraint::Precedence, cycle, vec![p, c]);
    }

    // Port capacity: accesses plus transfer windows, per bank per cycle.
    let last = entries
        .iter()
        .map(|e| e.end)
        .chain(declared.iter().map(|d| d.end))
        .max()
        .unwrap_or(0);
    for cycle in 0..last {
        for bank in m.banks() {
            let mut users: Vec<String> = entries
                .iter()
                .filter(|e| e.resource == Resource::Bank(bank.name.clone()) && e.start <= cycle && cycle < e.end)
                .map(|e| e.vertex.as_str().into())
                .collect();
            users.extend(
                declared
                    .iter()
                    .filter(|d| {
                        (d.from_bank == bank.name || d.to_bank == bank.name) && d.start <= cycle && cycle < d.end
                    })
                    .map(|d| alloc::format!("dma:{}", d.symbol)),
            );
            if users.len() as u32 > bank.ports {
                return fail(Constraint::PortCapacity, cycle, users);
            }
        }
    }

    // Functional units, only where limited.
    let classes: BTreeSet<&str> = cfg.fu_limits.keys().map(String::as_str).collect();
    for cycle in 0..last {
        for class in &classes {
            let users: Vec<String> = entries
                .iter()
                .filter(|e| e.resource == Resource::Fu((*class).into()) && e.start <= cycle && cycle < e.end)
                .map(|e| e.vertex.as_str().into())
                .collect();
            if users.len() as u32 > cfg.fu_limits[*class] {
                return fail(Constraint::FuCapacity, cycle, users);
            }
        }
    }

    Verdict::Pass
}

fn by_start(s: &Schedule) -> Vec<&super::ScheduleEntry> {
    let mut v: Vec<_> = s.entries().iter().collect();
    v.sort_by(|a, b| (a.start, &a.vertex).cmp(&(b.start, &b.vertex)));
    v
}
