//! Exhaustive minimum-latency search for small graphs.
//!
//! For each candidate latency `L`, from a critical-path lower bound up to the
//! horizon, a depth-first search assigns start times in topological order and
//! backtracks on any violated constraint. The first `L` admitting a complete
//! assignment is optimal. The constraint set is the one [`super::check_schedule`]
//! enforces.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::{
    dma_entries, ensure_covered, vertex_cost, Resource, Schedule, ScheduleEntry, ScheduleError, SchedulerConfig,
};
use crate::memory::MemoryMap;
use crate::sfg::{Precedence, SfgGraph, VertexKind};
use crate::Cycle;

/// Largest number of non-delay vertices the oracle accepts.
pub const ORACLE_MAX_VERTICES: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleOutcome {
    Optimal(Schedule),
    /// No schedule fits the horizon.
    Infeasible,
}

struct Search<'a> {
    g: &'a SfgGraph,
    m: &'a MemoryMap,
    cfg: &'a SchedulerConfig,
    prec: Precedence,
    order: Vec<usize>,
    /// Shortest possible remaining path from a vertex's start to the sink.
    tail: Vec<Cycle>,
    bank_load: BTreeMap<&'a str, Vec<u32>>,
    fu_load: BTreeMap<&'a str, Vec<u32>>,
    slot: Vec<Option<(Cycle, Cycle, Resource)>>,
}

impl Search<'_> {
    fn kind(&self, v: usize) -> &VertexKind {
        &self.g.vertex(self.prec.id(v).as_str()).expect("graph vertex").kind
    }

    fn dfs(&mut self, k: usize, limit: Cycle) -> bool {
        let Some(&v) = self.order.get(k) else {
            return true;
        };
        let est = self
            .prec
            .preds(v)
            .iter()
            .map(|&p| self.slot[p].as_ref().expect("topological order").1)
            .max()
            .unwrap_or(0);
        let mut start = est;
        while start + self.tail[v] <= limit {
            if let Some((resource, end)) = self.try_place(v, start, limit) {
                self.occupy(&resource, start, end, true);
                self.slot[v] = Some((start, end, resource));
                if self.dfs(k + 1, limit) {
                    return true;
                }
                let (s, e, r) = self.slot[v].take().unwrap();
                self.occupy(&r, s, e, false);
            }
            start += 1;
        }
        false
    }

    fn try_place(&self, v: usize, start: Cycle, limit: Cycle) -> Option<(Resource, Cycle)> {
        let kind = self.kind(v);
        let (resource, latency) = vertex_cost(kind, self.m, self.cfg, start)?;
        let end = start + latency;
        if end > limit {
            return None;
        }
        if let VertexKind::Data { symbol, .. } = kind {
            if self.m.overlaps_transfer(symbol, start, end) {
                return None;
            }
        }
        let fits = match &resource {
            Resource::Bank(b) => {
                let ports = self.m.bank(b)?.ports;
                let load = &self.bank_load[b.as_str()];
                (start..end).all(|t| load[t as usize] < ports)
            }
            Resource::Fu(op) => match (self.cfg.fu_limits.get(op), self.fu_load.get(op.as_str())) {
                (Some(&limit), Some(load)) => (start..end).all(|t| load[t as usize] < limit),
                _ => true,
            },
            Resource::Register => true,
        };
        fits.then_some((resource, end))
    }

    fn occupy(&mut self, resource: &Resource, start: Cycle, end: Cycle, take: bool) {
        let load = match resource {
            Resource::Bank(b) => self.bank_load.get_mut(b.as_str()),
            Resource::Fu(op) => self.fu_load.get_mut(op.as_str()),
            Resource::Register => None,
        };
        if let Some(load) = load {
            for t in start..end {
                if take {
                    load[t as usize] += 1;
                } else {
                    load[t as usize] -= 1;
                }
            }
        }
    }
}

/// Minimum-latency schedule of `g`, or a proof that none fits the horizon.
pub fn oracle_optimal(g: &SfgGraph, m: &MemoryMap, cfg: &SchedulerConfig) -> Result<OracleOutcome, ScheduleError> {
    cfg.validate()?;
    ensure_covered(g, m)?;
    let prec = g.precedence();
    let n = prec.len();
    if n > ORACLE_MAX_VERTICES {
        return Err(ScheduleError::TooLarge {
            vertices: n,
            limit: ORACLE_MAX_VERTICES,
        });
    }
    let horizon = cfg.horizon;
    let dma = dma_entries(m);
    if dma.iter().any(|d| d.end > horizon) {
        return Ok(OracleOutcome::Infeasible);
    }

    let slots = horizon as usize + 1;
    let mut bank_load: BTreeMap<&str, Vec<u32>> = m.banks().iter().map(|b| (b.name.as_str(), vec![0; slots])).collect();
    for d in &dma {
        for bank in [&d.from_bank, &d.to_bank] {
            let load = bank_load.get_mut(bank.as_str()).expect("validated bank");
            for t in d.start..d.end {
                load[t as usize] += 1;
            }
        }
    }
    let fu_load = cfg.fu_limits.keys().map(|op| (op.as_str(), vec![0; slots])).collect();

    // Cheapest latency over every cycle a vertex could start at.
    let min_latency: Vec<Cycle> = prec
        .ids()
        .iter()
        .map(|id| {
            let kind = &g.vertex(id.as_str()).expect("graph vertex").kind;
            (0..=horizon)
                .filter_map(|t| vertex_cost(kind, m, cfg, t).map(|(_, l)| l))
                .min()
                .unwrap_or(0)
        })
        .collect();
    let mut tail = vec![0; n];
    for &v in prec.topo().iter().rev() {
        tail[v] = min_latency[v] + prec.succs(v).iter().map(|&s| tail[s]).max().unwrap_or(0);
    }
    let lower = tail.iter().copied().max().unwrap_or(0);

    let mut search = Search {
        g,
        m,
        cfg,
        order: prec.topo().to_vec(),
        prec,
        tail,
        bank_load,
        fu_load,
        slot: vec![None; n],
    };
    for limit in lower..=horizon {
        if search.dfs(0, limit) {
            let entries = search
                .slot
                .iter_mut()
                .enumerate()
                .map(|(v, s)| {
                    let (start, end, resource) = s.take().expect("complete assignment");
                    ScheduleEntry {
                        vertex: search.prec.id(v).clone(),
                        start,
                        end,
                        resource,
                    }
                })
                .collect();
            return Ok(OracleOutcome::Optimal(Schedule::new(entries, dma)));
        }
    }
    Ok(OracleOutcome::Infeasible)
}
