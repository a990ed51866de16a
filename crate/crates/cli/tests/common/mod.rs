#![allow(dead_code)]

use std::fs;
use std::path::PathBuf;

use memsched::format::{parse_config, parse_memory_map, parse_sfg};
use memsched_core::{MemoryBank, MemoryMap, Placement, SchedulerConfig, SfgGraph, VertexKind};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn read_fixture(name: &str) -> String {
    fs::read_to_string(fixture(name)).unwrap()
}

/// `(sfg, map, config)` file stems of every fixture run.
pub const CORPUS: &[(&str, &str, &str)] = &[
    ("copy", "copy", "copy"),
    ("add", "add_1port", "add_h4"),
    ("add", "add_2port", "add_h3"),
    ("add", "add_reg", "add_h4"),
    ("fir4", "fir4_1bank", "fir4"),
    ("fir4", "fir4_2bank", "fir4"),
    ("fir16", "fir16_1bank", "fir16"),
    ("fir16", "fir16_2bank", "fir16"),
    ("iir_biquad", "iir_biquad_1bank", "iir_biquad"),
    ("iir_biquad", "iir_biquad_2bank", "iir_biquad"),
    ("mac4x4", "mac4x4_1bank", "mac4x4"),
    ("mac4x4", "mac4x4_2bank", "mac4x4"),
    ("dynamic", "dynamic", "dynamic"),
];

pub struct Instance {
    pub label: String,
    pub g: SfgGraph,
    pub m: MemoryMap,
    pub cfg: SchedulerConfig,
}

pub fn load(sfg: &str, map: &str, cfg: &str) -> Instance {
    Instance {
        label: format!("{sfg}/{map}"),
        g: parse_sfg(&read_fixture(&format!("{sfg}.sfg"))).unwrap(),
        m: parse_memory_map(&read_fixture(&format!("{map}.map"))).unwrap(),
        cfg: parse_config(&read_fixture(&format!("{cfg}.cfg")))
            .unwrap()
            .scheduler_config()
            .unwrap(),
    }
}

pub fn corpus() -> Vec<Instance> {
    CORPUS.iter().map(|&(s, m, c)| load(s, m, c)).collect()
}

pub struct Shape {
    /// Upper bound on reads + ops + writes.
    pub max_non_delay: usize,
    pub max_delays: usize,
}

/// A random acyclic kernel: reads feed a layered set of operations, the last
/// operations feed writes, and delay vertices carry values into later reads.
/// Symbols are spread over 1-3 banks with 1-2 ports; some live in registers.
pub fn random_instance<R: Rng>(rng: &mut R, shape: &Shape, tag: usize) -> Instance {
    let budget = shape.max_non_delay.max(3);
    let n_writes = rng.gen_range(1..=2.min(budget - 2));
    let n_reads = rng.gen_range(1..=(budget - n_writes - 1).min(8));
    let n_ops = rng.gen_range(1..=budget - n_writes - n_reads);
    let n_symbols = rng.gen_range(1..=4);
    let sym = |rng: &mut R| format!("S{}", rng.gen_range(0..n_symbols));
    let ops = ["add", "mul", "sub", "and"];

    let mut b = SfgGraph::builder(format!("rand{tag}"));
    let reads: Vec<String> = (0..n_reads).map(|i| format!("r{i}")).collect();
    let op_ids: Vec<String> = (0..n_ops).map(|i| format!("o{i}")).collect();
    for r in &reads {
        b = b.read(r, &sym(rng));
    }
    for o in &op_ids {
        b = b.op(o, ops.choose(rng).unwrap());
    }
    // Every read feeds some op; every op takes one or two earlier values.
    for r in &reads {
        b = b.edge(r, op_ids.choose(rng).unwrap());
    }
    for (i, o) in op_ids.iter().enumerate() {
        let earlier: Vec<&String> = reads.iter().chain(&op_ids[..i]).collect();
        for _ in 0..rng.gen_range(1..=2) {
            b = b.edge(earlier.choose(rng).unwrap(), o);
        }
    }
    for w in 0..n_writes {
        let id = format!("w{w}");
        b = b.write(&id, &sym(rng));
        let src = if w == 0 {
            op_ids.last().unwrap()
        } else {
            op_ids.choose(rng).unwrap()
        };
        b = b.edge(src, &id);
    }
    let producers: Vec<String> = reads
        .iter()
        .chain(&op_ids)
        .cloned()
        .chain((0..n_writes).map(|w| format!("w{w}")))
        .collect();
    for d in 0..rng.gen_range(0..=shape.max_delays) {
        let id = format!("d{d}");
        b = b
            .delay(&id, rng.gen_range(1..=2))
            .edge(producers.choose(rng).unwrap(), &id);
        let consumer = if rng.gen_bool(0.6) {
            reads.choose(rng)
        } else {
            op_ids.choose(rng)
        };
        b = b.edge(&id, consumer.unwrap());
    }
    let g = b.build().expect("generated graph is valid");

    let n_banks = rng.gen_range(1..=3);
    let banks: Vec<MemoryBank> = (0..n_banks)
        .map(|i| MemoryBank::new(format!("B{i}"), rng.gen_range(1..=2), rng.gen_range(1..=2), 1, 16))
        .collect();
    let placements = g
        .symbols()
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            if rng.gen_bool(0.15) {
                Placement::register(s)
            } else {
                Placement::memory(s, format!("B{}", rng.gen_range(0..n_banks)), i as u32)
            }
        })
        .collect();
    let m = MemoryMap::new(banks, placements, vec![]).unwrap();

    let mut cfg = SchedulerConfig::new(0).with_latency("mul", rng.gen_range(1..=2));
    if rng.gen_bool(0.3) {
        cfg = cfg.with_fu_limit("add", 1);
    }
    // Serial execution always fits; a tighter budget sometimes does.
    let serial: u32 = g
        .vertices()
        .map(|v| match &v.kind {
            VertexKind::Op { name, .. } => cfg.latency_of(name),
            VertexKind::Data { .. } => 2,
            VertexKind::Delay { .. } => 0,
        })
        .sum();
    cfg.horizon = if rng.gen_bool(0.8) {
        serial
    } else {
        rng.gen_range(1..=serial)
    };
    Instance {
        label: format!("rand{tag}"),
        g,
        m,
        cfg,
    }
}
