//! ASAP / ALAP start times over the precedence DAG.
//!
//! Both ignore ports and functional units. Access latencies come from the
//! cycle-0 residence of each symbol.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::{ensure_covered, vertex_cost, ScheduleError, SchedulerConfig};
use crate::memory::MemoryMap;
use crate::sfg::{Precedence, SfgGraph, VertexId};
use crate::Cycle;

/// Precomputed timing frame shared by the list scheduler.
pub(crate) struct Timing {
    pub prec: Precedence,
    pub alap: Vec<Cycle>,
}

pub(crate) fn nominal_latencies(
    g: &SfgGraph,
    m: &MemoryMap,
    cfg: &SchedulerConfig,
) -> Result<(Precedence, Vec<Cycle>), ScheduleError> {
    cfg.validate()?;
    ensure_covered(g, m)?;
    let prec = g.precedence();
    let latency = prec
        .ids()
        .iter()
        .map(|id| {
            let kind = &g.vertex(id.as_str()).expect("precedence ids come from the graph").kind;
            vertex_cost(kind, m, cfg, 0).map_or(0, |(_, l)| l)
        })
        .collect();
    Ok((prec, latency))
}

/// Longest-path earliest starts plus, for each vertex, the predecessor that bounds it.
fn earliest(prec: &Precedence, latency: &[Cycle]) -> (Vec<Cycle>, Vec<Option<usize>>) {
    let n = prec.len();
    let mut start = vec![0; n];
    let mut via = vec![None; n];
    for &v in prec.topo() {
        for &p in prec.preds(v) {
            let ready = start[p] + latency[p];
            if via[v].is_none() || ready > start[v] {
                start[v] = ready;
                via[v] = Some(p);
            }
        }
    }
    (start, via)
}

pub(crate) fn timing(g: &SfgGraph, m: &MemoryMap, cfg: &SchedulerConfig) -> Result<Timing, ScheduleError> {
    let (prec, latency) = nominal_latencies(g, m, cfg)?;
    let (asap, via) = earliest(&prec, &latency);
    let finish = |v: usize| asap[v] + latency[v];
    let critical = (0..prec.len()).map(finish).max().unwrap_or(0);
    if critical > cfg.horizon {
        let mut v = (0..prec.len()).find(|&v| finish(v) == critical).unwrap();
        let mut path = vec![prec.id(v).clone()];
        while let Some(p) = via[v] {
            path.push(prec.id(p).clone());
            v = p;
        }
        path.reverse();
        return Err(ScheduleError::InfeasibleHorizon {
            critical_path: critical,
            horizon: cfg.horizon,
            path,
        });
    }
    let mut alap = vec![0; prec.len()];
    for &v in prec.topo().iter().rev() {
        let bound = prec.succs(v).iter().map(|&s| alap[s]).min().unwrap_or(cfg.horizon);
        alap[v] = bound - latency[v];
    }
    Ok(Timing { prec, alap })
}

fn by_id(prec: &Precedence, values: &[Cycle]) -> BTreeMap<VertexId, Cycle> {
    prec.ids().iter().cloned().zip(values.iter().copied()).collect()
}

/// Earliest start of every non-delay vertex, ignoring resource limits.
pub fn asap(g: &SfgGraph, m: &MemoryMap, cfg: &SchedulerConfig) -> Result<BTreeMap<VertexId, Cycle>, ScheduleError> {
    let (prec, latency) = nominal_latencies(g, m, cfg)?;
    let (start, _) = earliest(&prec, &latency);
    Ok(by_id(&prec, &start))
}

/// Latest start (the deadline) of every non-delay vertex such that all
/// successors still finish by the horizon. Fails when the critical path
/// exceeds the horizon.
pub fn alap(g: &SfgGraph, m: &MemoryMap, cfg: &SchedulerConfig) -> Result<BTreeMap<VertexId, Cycle>, ScheduleError> {
    let t = timing(g, m, cfg)?;
    Ok(by_id(&t.prec, &t.alap))
}

/// Deadline of `v` minus `cycle`; negative once the deadline has passed.
pub fn mobility(deadlines: &BTreeMap<VertexId, Cycle>, v: &str, cycle: Cycle) -> Option<i64> {
    deadlines.get(v).map(|&d| i64::from(d) - i64::from(cycle))
}
