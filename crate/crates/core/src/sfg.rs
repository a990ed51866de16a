//! Signal Flow Graph intermediate representation.
//!
//! A graph holds operation, data and delay vertices. Data vertices are single
//! word memory accesses, delay vertices (`z^-1`) mark values produced by an
//! earlier iteration. Delays are the only vertices allowed to close a cycle:
//! deleting them must leave an acyclic graph, and every path through a delay
//! is severed from the intra-iteration precedence relation.

use alloc::borrow::ToOwned;
use alloc::collections::{BTreeMap, BTreeSet, BinaryHeap};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::borrow::Borrow;
use core::cmp::Reverse;
use core::fmt;

use thiserror::Error;

use crate::join;
use crate::memory::StorageKind;

/// Symbolic vertex name, unique within a graph.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(String);

impl VertexId {
    pub fn new(id: impl Into<String>) -> Self {
        VertexId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Borrow<str> for VertexId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl From<&str> for VertexId {
    fn from(s: &str) -> Self {
        VertexId(s.to_owned())
    }
}

impl From<String> for VertexId {
    fn from(s: String) -> Self {
        VertexId(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Access {
    Read,
    Write,
}

impl Access {
    pub fn as_str(self) -> &'static str {
        match self {
            Access::Read => "read",
            Access::Write => "write",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OpClass {
    Arithmetic,
    Logical,
}

const LOGICAL_OPS: &[&str] = &[
    "and", "or", "xor", "not", "nand", "nor", "xnor", "shl", "shr", "cmp", "eq", "ne", "lt", "le", "gt", "ge", "mux",
];

impl OpClass {
    /// Classifies an operator name; anything not a known logical operator is arithmetic.
    pub fn of(op_name: &str) -> OpClass {
        if LOGICAL_OPS.contains(&op_name) {
            OpClass::Logical
        } else {
            OpClass::Arithmetic
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VertexKind {
    /// Arithmetic or logical operation; `name` selects the latency and FU class.
    Op { class: OpClass, name: String },
    /// One-word access to `symbol`.
    Data { symbol: String, access: Access },
    /// `z^-depth`: the consumer sees the value from `depth` iterations back.
    Delay { depth: u32 },
}

impl VertexKind {
    pub fn op(name: impl Into<String>) -> Self {
        let name = name.into();
        VertexKind::Op {
            class: OpClass::of(&name),
            name,
        }
    }

    pub fn read(symbol: impl Into<String>) -> Self {
        VertexKind::Data {
            symbol: symbol.into(),
            access: Access::Read,
        }
    }

    pub fn write(symbol: impl Into<String>) -> Self {
        VertexKind::Data {
            symbol: symbol.into(),
            access: Access::Write,
        }
    }

    pub fn is_delay(&self) -> bool {
        matches!(self, VertexKind::Delay { .. })
    }

    pub fn is_data(&self) -> bool {
        matches!(self, VertexKind::Data { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SfgVertex {
    pub id: VertexId,
    pub kind: VertexKind,
}

impl SfgVertex {
    pub fn new(id: impl Into<VertexId>, kind: VertexKind) -> Self {
        SfgVertex { id: id.into(), kind }
    }
}

/// Dependence `src -> dst`: `dst` may only start once `src` has completed.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SfgEdge {
    pub src: VertexId,
    pub dst: VertexId,
}

impl SfgEdge {
    pub fn new(src: impl Into<VertexId>, dst: impl Into<VertexId>) -> Self {
        SfgEdge {
            src: src.into(),
            dst: dst.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SfgError {
    #[error("duplicate vertex id '{0}'")]
    DuplicateId(VertexId),
    #[error("edge {src} -> {dst} references unknown vertex '{missing}'")]
    DanglingEndpoint {
        src: VertexId,
        dst: VertexId,
        missing: VertexId,
    },
    #[error("self-loop on vertex '{0}'")]
    SelfLoop(VertexId),
    #[error("invalid vertex '{id}': {reason}")]
    InvalidVertex { id: VertexId, reason: &'static str },
    #[error("cycle without delay vertex: {}", join(.0, " -> "))]
    Cycle(Vec<VertexId>),
    #[error("cycle made only of delay vertices: {}", join(.0, " -> "))]
    DelayLoop(Vec<VertexId>),
    #[error("data-read vertex '{0}' has no consumer")]
    UnconsumedRead(VertexId),
    #[error("data-write vertex '{0}' has no producer")]
    UnproducedWrite(VertexId),
}

/// A validated Signal Flow Graph.
///
/// Vertices are kept ordered by id and edges are a set, so two graphs with the
/// same content compare equal regardless of construction order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SfgGraph {
    name: String,
    vertices: BTreeMap<VertexId, SfgVertex>,
    edges: BTreeSet<SfgEdge>,
}

/// One row of the memory table: a data symbol and how often it is accessed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MemoryTableRow {
    pub symbol: String,
    pub accesses: usize,
    /// Unset until the designer maps the symbol.
    pub suggested_kind: Option<StorageKind>,
}

/// `consumer` reads the value `producer` computed `depth` iterations earlier.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IterationDependency {
    pub producer: VertexId,
    pub consumer: VertexId,
    pub depth: u32,
}

impl SfgGraph {
    pub fn new(
        name: impl Into<String>,
        vertices: impl IntoIterator<Item = SfgVertex>,
        edges: impl IntoIterator<Item = SfgEdge>,
    ) -> Result<Self, SfgError> {
        let mut map = BTreeMap::new();
        for v in vertices {
            validate_vertex(&v)?;
            if map.contains_key(&v.id) {
                return Err(SfgError::DuplicateId(v.id));
            }
            map.insert(v.id.clone(), v);
        }
        let mut edge_set = BTreeSet::new();
        for e in edges {
            for end in [&e.src, &e.dst] {
                if !map.contains_key(end) {
                    return Err(SfgError::DanglingEndpoint {
                        missing: end.clone(),
                        src: e.src.clone(),
                        dst: e.dst.clone(),
                    });
                }
            }
            if e.src == e.dst {
                return Err(SfgError::SelfLoop(e.src));
            }
            edge_set.insert(e);
        }
        let graph = SfgGraph {
            name: name.into(),
            vertices: map,
            edges: edge_set,
        };
        graph.validate_structure()?;
        Ok(graph)
    }

    pub fn builder(name: impl Into<String>) -> SfgBuilder {
        SfgBuilder {
            name: name.into(),
            vertices: Vec::new(),
            edges: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Vertices in id order.
    pub fn vertices(&self) -> impl Iterator<Item = &SfgVertex> {
        self.vertices.values()
    }

    pub fn vertex(&self, id: &str) -> Option<&SfgVertex> {
        self.vertices.get(id)
    }

    /// Edges in `(src, dst)` order.
    pub fn edges(&self) -> impl Iterator<Item = &SfgEdge> {
        self.edges.iter()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Symbols referenced by data vertices, sorted.
    pub fn symbols(&self) -> BTreeSet<&str> {
        self.vertices
            .values()
            .filter_map(|v| match &v.kind {
                VertexKind::Data { symbol, .. } => Some(symbol.as_str()),
                _ => None,
            })
            .collect()
    }

    /// The memory table skeleton: one row per distinct symbol, sorted by symbol.
    pub fn memory_table(&self) -> Vec<MemoryTableRow> {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for v in self.vertices.values() {
            if let VertexKind::Data { symbol, .. } = &v.kind {
                *counts.entry(symbol).or_default() += 1;
            }
        }
        counts
            .into_iter()
            .map(|(symbol, accesses)| MemoryTableRow {
                symbol: symbol.to_owned(),
                accesses,
                suggested_kind: None,
            })
            .collect()
    }

    /// Every `(producer, consumer, depth)` reachable through one or more delay
    /// vertices. Depths add up along a path; distinct paths with different
    /// total depths yield distinct triples.
    pub fn iteration_dependencies(&self) -> BTreeSet<IterationDependency> {
        let succs = self.successor_lists();
        let mut out = BTreeSet::new();
        for v in self.vertices.values().filter(|v| !v.kind.is_delay()) {
            let mut stack: Vec<(&VertexId, u32)> = Vec::new();
            for next in &succs[&v.id] {
                if let VertexKind::Delay { depth } = self.vertices[*next].kind {
                    stack.push((next, depth));
                }
            }
            while let Some((delay, acc)) = stack.pop() {
                for next in &succs[delay] {
                    match self.vertices[*next].kind {
                        VertexKind::Delay { depth } => stack.push((next, acc + depth)),
                        _ => {
                            out.insert(IterationDependency {
                                producer: v.id.clone(),
                                consumer: (*next).clone(),
                                depth: acc,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    /// Intra-iteration precedence over the non-delay vertices.
    pub fn precedence(&self) -> Precedence {
        Precedence::build(self).expect("validated graph has an acyclic precedence relation")
    }

    fn successor_lists(&self) -> BTreeMap<&VertexId, Vec<&VertexId>> {
        let mut succs: BTreeMap<&VertexId, Vec<&VertexId>> = self.vertices.keys().map(|k| (k, Vec::new())).collect();
        for e in &self.edges {
            succs.get_mut(&e.src).unwrap().push(&e.dst);
        }
        succs
    }

    fn validate_structure(&self) -> Result<(), SfgError> {
        let mut out_deg: BTreeMap<&VertexId, usize> = BTreeMap::new();
        let mut in_deg: BTreeMap<&VertexId, usize> = BTreeMap::new();
        for e in &self.edges {
            *out_deg.entry(&e.src).or_default() += 1;
            *in_deg.entry(&e.dst).or_default() += 1;
        }
        for v in self.vertices.values() {
            if let VertexKind::Data { access, .. } = &v.kind {
                match access {
                    Access::Read if !out_deg.contains_key(&v.id) => return Err(SfgError::UnconsumedRead(v.id.clone())),
                    Access::Write if !in_deg.contains_key(&v.id) => {
                        return Err(SfgError::UnproducedWrite(v.id.clone()))
                    }
                    _ => {}
                }
            }
        }
        Precedence::build(self)?;
        // Paths are accumulated through chains of delays, so those chains must terminate.
        let delays: Vec<&VertexId> = self
            .vertices
            .values()
            .filter(|v| v.kind.is_delay())
            .map(|v| &v.id)
            .collect();
        let index: BTreeMap<&VertexId, usize> = delays.iter().enumerate().map(|(i, id)| (*id, i)).collect();
        let mut succs = vec![Vec::new(); delays.len()];
        for e in &self.edges {
            if let (Some(&s), Some(&d)) = (index.get(&e.src), index.get(&e.dst)) {
                succs[s].push(d);
            }
        }
        if let Err(cycle) = topo_order(&succs) {
            return Err(SfgError::DelayLoop(
                cycle.into_iter().map(|i| delays[i].clone()).collect(),
            ));
        }
        Ok(())
    }
}

fn validate_vertex(v: &SfgVertex) -> Result<(), SfgError> {
    let reason = match &v.kind {
        _ if v.id.as_str().is_empty() => Some("empty id"),
        VertexKind::Op { name, .. } if name.is_empty() => Some("empty operation name"),
        VertexKind::Data { symbol, .. } if symbol.is_empty() => Some("empty symbol"),
        VertexKind::Delay { depth: 0 } => Some("delay depth must be at least 1"),
        _ => None,
    };
    match reason {
        Some(reason) => Err(SfgError::InvalidVertex {
            id: v.id.clone(),
            reason,
        }),
        None => Ok(()),
    }
}

/// Kahn's algorithm, smallest index first. On failure returns one cycle.
fn topo_order(succs: &[Vec<usize>]) -> Result<Vec<usize>, Vec<usize>> {
    let n = succs.len();
    let mut indeg = vec![0usize; n];
    for list in succs {
        for &d in list {
            indeg[d] += 1;
        }
    }
    let mut heap: BinaryHeap<Reverse<usize>> = (0..n).filter(|&i| indeg[i] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(i)) = heap.pop() {
        order.push(i);
        for &d in &succs[i] {
            indeg[d] -= 1;
            if indeg[d] == 0 {
                heap.push(Reverse(d));
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }
    // Every leftover vertex has a leftover predecessor: walk backwards until a repeat.
    let mut preds = vec![Vec::new(); n];
    for (s, list) in succs.iter().enumerate() {
        for &d in list {
            if indeg[s] > 0 {
                preds[d].push(s);
            }
        }
    }
    let start = (0..n).find(|&i| indeg[i] > 0).unwrap();
    let mut seen = vec![usize::MAX; n];
    let mut walk = Vec::new();
    let mut cur = start;
    while seen[cur] == usize::MAX {
        seen[cur] = walk.len();
        walk.push(cur);
        cur = *preds[cur].iter().min().unwrap();
    }
    let mut cycle: Vec<usize> = walk[seen[cur]..].to_vec();
    cycle.reverse();
    let first = (0..cycle.len()).min_by_key(|&i| cycle[i]).unwrap();
    cycle.rotate_left(first);
    cycle.push(cycle[0]);
    Err(cycle)
}

/// The strict partial order "must complete before" over non-delay vertices.
///
/// Only edges whose endpoints are both non-delay vertices contribute; any
/// path through a delay refers to an earlier iteration and is dropped.
/// Vertices are indexed in id order.
#[derive(Clone, Debug)]
pub struct Precedence {
    ids: Vec<VertexId>,
    index: BTreeMap<VertexId, usize>,
    preds: Vec<Vec<usize>>,
    succs: Vec<Vec<usize>>,
    topo: Vec<usize>,
    reach: Vec<Vec<bool>>,
}

impl Precedence {
    fn build(g: &SfgGraph) -> Result<Self, SfgError> {
        let ids: Vec<VertexId> = g
            .vertices
            .values()
            .filter(|v| !v.kind.is_delay())
            .map(|v| v.id.clone())
            .collect();
        let index: BTreeMap<VertexId, usize> = ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
        let n = ids.len();
        let mut preds = vec![Vec::new(); n];
        let mut succs = vec![Vec::new(); n];
        for e in &g.edges {
            if let (Some(&s), Some(&d)) = (index.get(&e.src), index.get(&e.dst)) {
                succs[s].push(d);
                preds[d].push(s);
            }
        }
        let topo =
            topo_order(&succs).map_err(|cycle| SfgError::Cycle(cycle.into_iter().map(|i| ids[i].clone()).collect()))?;
        let mut reach = vec![vec![false; n]; n];
        for &v in topo.iter().rev() {
            let mut row = vec![false; n];
            for &s in &succs[v] {
                row[s] = true;
                for (dst, &r) in row.iter_mut().zip(reach[s].iter()) {
                    *dst |= r;
                }
            }
            reach[v] = row;
        }
        Ok(Precedence {
            ids,
            index,
            preds,
            succs,
            topo,
            reach,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn id(&self, i: usize) -> &VertexId {
        &self.ids[i]
    }

    pub fn ids(&self) -> &[VertexId] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn preds(&self, i: usize) -> &[usize] {
        &self.preds[i]
    }

    pub fn succs(&self, i: usize) -> &[usize] {
        &self.succs[i]
    }

    /// A topological order, smallest index first among ready vertices.
    pub fn topo(&self) -> &[usize] {
        &self.topo
    }

    /// `a` must complete before `b` starts (transitively).
    pub fn precedes(&self, a: usize, b: usize) -> bool {
        self.reach[a][b]
    }

    /// Neither vertex precedes the other.
    pub fn concurrent(&self, a: usize, b: usize) -> bool {
        a != b && !self.reach[a][b] && !self.reach[b][a]
    }
}

/// Incremental construction of an [`SfgGraph`], mostly for tests and generators.
#[derive(Clone, Debug)]
pub struct SfgBuilder {
    name: String,
    vertices: Vec<SfgVertex>,
    edges: Vec<SfgEdge>,
}

impl SfgBuilder {
    pub fn vertex(mut self, id: &str, kind: VertexKind) -> Self {
        self.vertices.push(SfgVertex::new(id, kind));
        self
    }

    pub fn op(self, id: &str, name: &str) -> Self {
        self.vertex(id, VertexKind::op(name))
    }

    pub fn read(self, id: &str, symbol: &str) -> Self {
        self.vertex(id, VertexKind::read(symbol))
    }

    pub fn write(self, id: &str, symbol: &str) -> Self {
        self.vertex(id, VertexKind::write(symbol))
    }

    pub fn delay(self, id: &str, depth: u32) -> Self {
        self.vertex(id, VertexKind::Delay { depth })
    }

    pub fn edge(mut self, src: &str, dst: &str) -> Self {
        self.edges.push(SfgEdge::new(src, dst));
        self
    }

    pub fn build(self) -> Result<SfgGraph, SfgError> {
        SfgGraph::new(self.name, self.vertices, self.edges)
    }
}
