//! Memory Constraint Graphs and port tokens.
//!
//! One [`Mcg`] is built per populated bank. Its nodes are the data vertices
//! resident in the bank at cycle 0 and an edge joins two accesses that may
//! run concurrently (neither precedes the other). The edge weight is
//! `1 + number of operations consuming both`; weights only feed diagnostics
//! and the scheduler's last tie-break.
//!
//! The bank's ports are the tokens of a [`TokenPool`]. An access holds one
//! token for its whole latency; the bank is accessible while a token is idle.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::memory::{MemoryMap, Residence};
use crate::sfg::{SfgGraph, VertexId, VertexKind};
use crate::Cycle;

/// Undirected conflict edge, stored with `u < v`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConflictEdge {
    pub u: VertexId,
    pub v: VertexId,
    pub weight: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mcg {
    bank: String,
    nodes: BTreeSet<VertexId>,
    edges: BTreeSet<ConflictEdge>,
    token_capacity: u32,
}

impl Mcg {
    pub fn bank(&self) -> &str {
        &self.bank
    }

    pub fn nodes(&self) -> &BTreeSet<VertexId> {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeSet<ConflictEdge> {
        &self.edges
    }

    pub fn token_capacity(&self) -> u32 {
        self.token_capacity
    }

    /// Total weight of the conflict edges incident to `v`.
    pub fn weight_sum(&self, v: &str) -> u32 {
        self.edges
            .iter()
            .filter(|e| e.u.as_str() == v || e.v.as_str() == v)
            .map(|e| e.weight)
            .sum()
    }

    pub fn token_pool(&self) -> TokenPool {
        TokenPool::new(self.bank.clone(), self.token_capacity)
    }
}

/// Builds one MCG per bank that holds at least one data vertex at cycle 0,
/// in bank declaration order.
pub fn build_mcg(g: &SfgGraph, m: &MemoryMap) -> Vec<Mcg> {
    let prec = g.precedence();
    let mut by_bank: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, id) in prec.ids().iter().enumerate() {
        let Some(VertexKind::Data { symbol, .. }) = g.vertex(id.as_str()).map(|v| &v.kind) else {
            continue;
        };
        if let Some(Residence::Bank(bank)) = m.residence(symbol, 0) {
            by_bank.entry(&bank.name).or_default().push(i);
        }
    }
    let op_consumers = |i: usize| -> BTreeSet<usize> {
        prec.succs(i)
            .iter()
            .copied()
            .filter(|&s| {
                matches!(
                    g.vertex(prec.id(s).as_str()).map(|v| &v.kind),
                    Some(VertexKind::Op { .. })
                )
            })
            .collect()
    };
    m.banks()
        .iter()
        .filter_map(|bank| {
            let members = by_bank.get(bank.name.as_str())?;
            let mut edges = BTreeSet::new();
            for (k, &a) in members.iter().enumerate() {
                let ca = op_consumers(a);
                for &b in &members[k + 1..] {
                    if !prec.concurrent(a, b) {
                        continue;
                    }
                    let shared = ca.intersection(&op_consumers(b)).count() as u32;
                    let (u, v) = if prec.id(a) < prec.id(b) { (a, b) } else { (b, a) };
                    edges.insert(ConflictEdge {
                        u: prec.id(u).clone(),
                        v: prec.id(v).clone(),
                        weight: 1 + shared,
                    });
                }
            }
            Some(Mcg {
                bank: bank.name.clone(),
                nodes: members.iter().map(|&i| prec.id(i).clone()).collect(),
                edges,
                token_capacity: bank.ports,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TokenError {
    #[error("bank '{bank}' has no idle port at cycle {cycle}")]
    Exhausted { bank: String, cycle: Cycle },
    #[error("token for '{vertex}' must be held for at least one cycle")]
    ZeroLatency { vertex: String },
}

/// Port tokens of one bank for a single scheduling run.
#[derive(Clone, Debug)]
pub struct TokenPool {
    bank: String,
    capacity: u32,
    in_flight: Vec<(Cycle, String)>,
    taken: u64,
    released: u64,
}

impl TokenPool {
    pub fn new(bank: impl Into<String>, capacity: u32) -> Self {
        TokenPool {
            bank: bank.into(),
            capacity,
            in_flight: Vec::new(),
            taken: 0,
            released: 0,
        }
    }

    pub fn bank(&self) -> &str {
        &self.bank
    }

    pub fn capacity(&self) -> u32 {
        self.capacity
    }

    /// Releases every token whose access has completed by `cycle`.
    pub fn retire(&mut self, cycle: Cycle) -> usize {
        let before = self.in_flight.len();
        self.in_flight.retain(|(release, _)| *release > cycle);
        let n = before - self.in_flight.len();
        self.released += n as u64;
        n
    }

    /// Tokens still held at `cycle`.
    pub fn busy_at(&self, cycle: Cycle) -> u32 {
        self.in_flight.iter().filter(|(release, _)| *release > cycle).count() as u32
    }

    /// At least one idle port at `cycle` (after retiring completed accesses).
    pub fn accessible(&mut self, cycle: Cycle) -> bool {
        self.retire(cycle);
        self.busy_at(cycle) < self.capacity
    }

    /// Takes a token at `cycle` for `latency` cycles; returns the release cycle.
    pub fn take(&mut self, vertex: &str, cycle: Cycle, latency: Cycle) -> Result<Cycle, TokenError> {
        if latency == 0 {
            return Err(TokenError::ZeroLatency { vertex: vertex.into() });
        }
        if !self.accessible(cycle) {
            return Err(TokenError::Exhausted {
                bank: self.bank.clone(),
                cycle,
            });
        }
        let release = cycle + latency;
        self.in_flight.push((release, vertex.into()));
        self.taken += 1;
        Ok(release)
    }

    /// `(release_cycle, holder)` pairs.
    pub fn in_flight(&self) -> &[(Cycle, String)] {
        &self.in_flight
    }

    pub fn taken(&self) -> u64 {
        self.taken
    }

    pub fn released(&self) -> u64 {
        self.released
    }
}
