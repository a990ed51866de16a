//! Test kernels and maps shared by the unit tests.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::memory::{MemoryBank, MemoryMap, Placement, TransferDirective};
use crate::scheduler::SchedulerConfig;
use crate::sfg::{Access, SfgGraph, VertexKind};
use crate::Cycle;

/// Unit-latency banks of capacity 64; a bank name of `"reg"` places the symbol in a register.
pub fn map(banks: &[(&str, u32)], places: &[(&str, &str)]) -> MemoryMap {
    let banks = banks
        .iter()
        .map(|&(name, ports)| MemoryBank::new(name, ports, 1, 1, 64))
        .collect();
    let placements = places
        .iter()
        .enumerate()
        .map(|(i, &(sym, bank))| {
            if bank == "reg" {
                Placement::register(sym)
            } else {
                Placement::memory(sym, bank, i as u32)
            }
        })
        .collect();
    MemoryMap::new(banks, placements, vec![]).unwrap()
}

/// `y = a + b`.
pub fn adder() -> SfgGraph {
    SfgGraph::builder("add")
        .read("a", "A")
        .read("b", "B")
        .op("add", "add")
        .write("y_w", "Y")
        .edge("a", "add")
        .edge("b", "add")
        .edge("add", "y_w")
        .build()
        .unwrap()
}

pub fn adder_map(ports: u32) -> MemoryMap {
    map(&[("B0", ports)], &[("A", "B0"), ("B", "B0"), ("Y", "B0")])
}

/// 4-tap FIR: `c_i * x_i` summed by an adder chain; `x_{i+1}` is `x_i` one iteration later.
pub fn fir4() -> SfgGraph {
    let mut b = SfgGraph::builder("fir4");
    for i in 0..4 {
        b = b
            .read(&format!("c{i}"), "C")
            .read(&format!("x{i}"), "X")
            .op(&format!("m{i}"), "mul")
            .edge(&format!("c{i}"), &format!("m{i}"))
            .edge(&format!("x{i}"), &format!("m{i}"));
    }
    for i in 1..4 {
        b = b
            .delay(&format!("d{i}"), 1)
            .edge(&format!("x{}", i - 1), &format!("d{i}"))
            .edge(&format!("d{i}"), &format!("x{i}"));
    }
    b.op("s0", "add")
        .op("s1", "add")
        .op("s2", "add")
        .write("y", "Y")
        .edge("m0", "s0")
        .edge("m1", "s0")
        .edge("s0", "s1")
        .edge("m2", "s1")
        .edge("s1", "s2")
        .edge("m3", "s2")
        .edge("s2", "y")
        .build()
        .unwrap()
}

/// One single-port bank holding everything, or coefficients and samples split over two.
pub fn fir4_map(banks: usize) -> MemoryMap {
    if banks == 1 {
        map(&[("B0", 1)], &[("C", "B0"), ("X", "B0"), ("Y", "B0")])
    } else {
        map(&[("B0", 1), ("B1", 1)], &[("C", "B0"), ("X", "B1"), ("Y", "B1")])
    }
}

/// `n` reads of symbol `S` feeding one reduction, result kept in a register.
pub fn star(n: usize) -> SfgGraph {
    let mut b = SfgGraph::builder("star")
        .op("sum", "add")
        .write("out", "R")
        .edge("sum", "out");
    for i in 0..n {
        let id = format!("r{i:02}");
        b = b.read(&id, "S").edge(&id, "sum");
    }
    b.build().unwrap()
}

pub fn star_map(ports: u32) -> MemoryMap {
    map(&[("B0", ports)], &[("S", "B0"), ("R", "reg")])
}

/// Reads `A` early and again after a four-op chain; `A` moves from B0 to B1 at `at_cycle`.
pub fn dynamic() -> SfgGraph {
    SfgGraph::builder("dyn")
        .read("a0", "A")
        .read("b0", "B")
        .op("s0", "add")
        .op("s1", "add")
        .op("s2", "add")
        .read("a1", "A")
        .op("s3", "add")
        .write("y", "Y")
        .edge("a0", "s0")
        .edge("b0", "s0")
        .edge("s0", "s1")
        .edge("s1", "s2")
        .edge("s2", "a1")
        .edge("a1", "s3")
        .edge("s2", "s3")
        .edge("s3", "y")
        .build()
        .unwrap()
}

pub fn dynamic_map(at_cycle: Cycle) -> MemoryMap {
    MemoryMap::new(
        vec![MemoryBank::new("B0", 1, 1, 1, 8), MemoryBank::new("B1", 1, 2, 1, 8)],
        vec![
            Placement::memory("A", "B0", 0),
            Placement::memory("B", "B0", 1),
            Placement::register("Y"),
        ],
        vec![TransferDirective::new("A", "B0", "B1", at_cycle)],
    )
    .unwrap()
}

/// Longest source-to-sink path by enumerating every path over the direct
/// non-delay edges, with cycle-0 latencies.
pub fn longest_path_by_enumeration(g: &SfgGraph, m: &MemoryMap, cfg: &SchedulerConfig) -> Cycle {
    let latency = |id: &str| -> Cycle {
        match &g.vertex(id).unwrap().kind {
            VertexKind::Op { name, .. } => cfg.op_latency.get(name).copied().unwrap_or(1),
            VertexKind::Data { symbol, access } => match &m.placement(symbol).unwrap().location {
                crate::memory::Location::Register => 0,
                crate::memory::Location::Memory { bank, .. } => {
                    let b = m.bank(bank).unwrap();
                    if *access == Access::Read {
                        b.read_latency
                    } else {
                        b.write_latency
                    }
                }
            },
            VertexKind::Delay { .. } => 0,
        }
    };
    let is_delay = |id: &str| g.vertex(id).unwrap().kind.is_delay();
    let succs = |id: &str| -> Vec<String> {
        g.edges()
            .filter(|e| e.src.as_str() == id && !is_delay(e.dst.as_str()))
            .map(|e| String::from(e.dst.as_str()))
            .collect()
    };
    fn walk(v: &str, acc: Cycle, best: &mut Cycle, lat: &dyn Fn(&str) -> Cycle, succ: &dyn Fn(&str) -> Vec<String>) {
        let here = acc + lat(v);
        let next = succ(v);
        if next.is_empty() {
            *best = (*best).max(here);
        }
        for n in next {
            walk(&n, here, best, lat, succ);
        }
    }
    let mut best = 0;
    for v in g.vertices().filter(|v| !v.kind.is_delay()) {
        walk(v.id.as_str(), 0, &mut best, &latency, &succs);
    }
    best
}
