//! Mobility-driven list scheduling with the memory accessibility criterion.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::timing::{timing, Timing};
use super::{
    dma_entries, transfer_windows, vertex_cost, Resource, Schedule, ScheduleEntry, ScheduleError, SchedulerConfig,
};
use crate::mcg::{build_mcg, TokenPool};
use crate::memory::MemoryMap;
use crate::sfg::{SfgGraph, VertexKind};
use crate::Cycle;

/// Schedules one iteration of `g` under the port limits of `m`.
///
/// Each cycle, starting at 0:
/// 1. completed accesses return their tokens;
/// 2. transfers declared for this cycle take a port on both banks;
/// 3. the ready list holds unscheduled vertices whose predecessors have completed;
///    any ready vertex past its deadline makes the run infeasible;
/// 4. accesses to an inaccessible bank, or to a symbol inside a transfer
///    window, are removed from the list;
/// 5. the rest is sorted by mobility, then by descending MCG conflict weight,
///    then by id, and issued greedily while tokens (and FU slots) last.
///
/// Zero-latency register accesses complete within their cycle, so steps 3-5
/// repeat until no new such vertex is issued.
pub fn schedule(g: &SfgGraph, m: &MemoryMap, cfg: &SchedulerConfig) -> Result<Schedule, ScheduleError> {
    schedule_observed(g, m, cfg, &mut |_, _| {})
}

/// [`schedule`] with a hook called at the end of every cycle with the token pools.
pub(crate) fn schedule_observed(
    g: &SfgGraph,
    m: &MemoryMap,
    cfg: &SchedulerConfig,
    observe: &mut dyn FnMut(Cycle, &BTreeMap<&str, TokenPool>),
) -> Result<Schedule, ScheduleError> {
    let Timing { prec, alap, .. } = timing(g, m, cfg)?;
    let n = prec.len();
    let horizon = cfg.horizon;

    let windows = transfer_windows(m);
    for t in m.transfers() {
        let (_, end) = m.transfer_window(t);
        if end > horizon {
            return Err(ScheduleError::TransferBeyondHorizon {
                symbol: t.symbol.clone(),
                end,
                horizon,
            });
        }
    }
    // Transfers among themselves must fit the ports; accesses are kept clear of them below.
    for (bank, list) in &windows {
        let ports = m.bank(bank).map_or(0, |b| b.ports);
        for &(start, _) in list {
            let load = list.iter().filter(|&&(s, e)| s <= start && start < e).count() as u32;
            if load > ports {
                let symbol = m
                    .transfers()
                    .iter()
                    .find(|t| m.transfer_window(t).0 == start && (t.from_bank == *bank || t.to_bank == *bank))
                    .map(|t| t.symbol.clone())
                    .unwrap_or_default();
                return Err(ScheduleError::TransferPortClash {
                    symbol,
                    bank: (*bank).into(),
                    cycle: start,
                });
            }
        }
    }

    let mut weight = vec![0u32; n];
    for mcg in build_mcg(g, m) {
        for (i, w) in weight.iter_mut().enumerate() {
            *w += mcg.weight_sum(prec.id(i).as_str());
        }
    }
    let kinds: Vec<&VertexKind> = prec
        .ids()
        .iter()
        .map(|id| &g.vertex(id.as_str()).expect("precedence ids come from the graph").kind)
        .collect();

    let mut pools: BTreeMap<&str, TokenPool> = m
        .banks()
        .iter()
        .map(|b| (b.name.as_str(), TokenPool::new(b.name.clone(), b.ports)))
        .collect();
    let mut fu_release: BTreeMap<alloc::string::String, Vec<Cycle>> = BTreeMap::new();
    let mut slot: Vec<Option<(Cycle, Cycle, Resource)>> = vec![None; n];
    let mut remaining = n;
    let mut cycle: Cycle = 0;

    // Ports held at `t` by transfers that have not been issued yet at `now`.
    let reserved = |bank: &str, now: Cycle, t: Cycle| -> u32 {
        windows.get(bank).map_or(0, |list| {
            list.iter().filter(|&&(s, e)| s > now && s <= t && t < e).count() as u32
        })
    };

    while remaining > 0 {
        if cycle > horizon {
            return Err(ScheduleError::HorizonExceeded {
                horizon,
                pending: (0..n)
                    .filter(|&i| slot[i].is_none())
                    .map(|i| prec.id(i).clone())
                    .collect(),
            });
        }
        for pool in pools.values_mut() {
            pool.retire(cycle);
        }
        for t in m.transfers().iter().filter(|t| t.at_cycle == cycle) {
            let latency = m.transfer_latency(t);
            for bank in [t.from_bank.as_str(), t.to_bank.as_str()] {
                let pool = pools.get_mut(bank).expect("transfer banks are validated");
                pool.take(&alloc::format!("dma:{}", t.symbol), cycle, latency)
                    .map_err(|_| ScheduleError::TransferPortClash {
                        symbol: t.symbol.clone(),
                        bank: bank.into(),
                        cycle,
                    })?;
            }
        }

        loop {
            let mut ready: Vec<(i64, usize)> = Vec::new();
            for v in 0..n {
                if slot[v].is_some() {
                    continue;
                }
                let preds_done = prec
                    .preds(v)
                    .iter()
                    .all(|&p| matches!(slot[p], Some((_, end, _)) if end <= cycle));
                if !preds_done {
                    continue;
                }
                let mobility = i64::from(alap[v]) - i64::from(cycle);
                if mobility < 0 {
                    return Err(ScheduleError::NegativeMobility {
                        vertex: prec.id(v).clone(),
                        cycle,
                        deadline: alap[v],
                    });
                }
                ready.push((mobility, v));
            }
            ready.retain(|&(_, v)| match kinds[v] {
                VertexKind::Data { symbol, .. } => {
                    let Some((resource, latency)) = vertex_cost(kinds[v], m, cfg, cycle) else {
                        return false;
                    };
                    if m.overlaps_transfer(symbol, cycle, cycle + latency) {
                        return false;
                    }
                    match resource {
                        Resource::Bank(bank) => pools.get_mut(bank.as_str()).is_some_and(|p| p.accessible(cycle)),
                        _ => true,
                    }
                }
                _ => true,
            });
            ready.sort_by(|&(ma, a), &(mb, b)| {
                ma.cmp(&mb)
                    .then(weight[b].cmp(&weight[a]))
                    .then(prec.id(a).cmp(prec.id(b)))
            });

            let mut issued_instant = false;
            for (_, v) in ready {
                let (resource, latency) = vertex_cost(kinds[v], m, cfg, cycle).expect("coverage checked");
                let end = cycle + latency;
                match &resource {
                    Resource::Bank(bank) => {
                        let ports = m.bank(bank).map_or(0, |b| b.ports);
                        let pool = pools.get_mut(bank.as_str()).expect("bank exists");
                        let fits = (cycle..end).all(|t| pool.busy_at(t) + reserved(bank, cycle, t) < ports);
                        if !fits {
                            continue;
                        }
                        pool.take(prec.id(v).as_str(), cycle, latency)
                            .expect("port availability checked above");
                    }
                    Resource::Fu(op) => {
                        if let Some(&limit) = cfg.fu_limits.get(op.as_str()) {
                            let busy = fu_release.entry(op.clone()).or_default();
                            busy.retain(|&r| r > cycle);
                            if busy.len() as u32 >= limit {
                                continue;
                            }
                            busy.push(end);
                        }
                    }
                    Resource::Register => {}
                }
                if end > horizon {
                    return Err(ScheduleError::HorizonExceeded {
                        horizon,
                        pending: vec![prec.id(v).clone()],
                    });
                }
                issued_instant |= latency == 0;
                slot[v] = Some((cycle, end, resource));
                remaining -= 1;
            }
            if !issued_instant {
                break;
            }
        }
        observe(cycle, &pools);
        cycle += 1;
    }

    let entries = slot
        .into_iter()
        .enumerate()
        .map(|(v, s)| {
            let (start, end, resource) = s.expect("all vertices scheduled");
            ScheduleEntry {
                vertex: prec.id(v).clone(),
                start,
                end,
                resource,
            }
        })
        .collect();
    Ok(Schedule::new(entries, dma_entries(m)))
}
