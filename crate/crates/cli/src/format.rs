//! Line-oriented text formats.
//!
//! All formats are UTF-8, one record per line, `#` starts a comment and
//! blank lines are ignored. Records are `keyword arg... key=value...`;
//! unknown keys are errors.
//!
//! ```text
//! # SFG
//! sfg <name>
//! node <id> kind=<op|data|delay> [symbol=<name> access=<read|write>] [depth=<int>]
//! edge <src> -> <dst>
//!
//! # memory map
//! bank <name> ports=<int> read_latency=<int> write_latency=<int> capacity=<int>
//! place <symbol> kind=<memory|register> [bank=<name> addr=<int>]
//! transfer <symbol> from=<bank> to=<bank> at_cycle=<int>
//!
//! # scheduler configuration
//! horizon=<int>
//! latency.<op>=<int>
//! fu.<op>=<int>
//!
//! # schedule dump
//! sched <vertex> start=<c> end=<c> res=<name>
//! dma <symbol> from=<bank> to=<bank> start=<c> end=<c>
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use memsched_core::{
    Cycle, DmaEntry, Location, MapError, Mcg, MemoryBank, MemoryMap, Placement, Resource, Schedule, ScheduleEntry,
    SchedulerConfig, SfgEdge, SfgError, SfgGraph, SfgVertex, TransferDirective, VertexKind,
};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("line {line}: {source}")]
    Graph { line: usize, source: SfgError },
    #[error("{0}")]
    Structure(SfgError),
    #[error("{0}")]
    Map(MapError),
    #[error("missing `{0}`")]
    Missing(&'static str),
}

fn syntax(line: usize, reason: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        reason: reason.into(),
    }
}

/// Non-empty lines with comments stripped, numbered from 1.
fn records(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

/// `key=value` arguments of one record, with duplicate and unknown-key checks.
struct Args<'a> {
    line: usize,
    values: BTreeMap<&'a str, &'a str>,
}

impl<'a> Args<'a> {
    fn parse(line: usize, tokens: &[&'a str], allowed: &[&str]) -> Result<Self, FormatError> {
        let mut values = BTreeMap::new();
        for tok in tokens {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| syntax(line, format!("expected key=value, got '{tok}'")))?;
            if !allowed.contains(&k) {
                return Err(syntax(line, format!("unknown key '{k}'")));
            }
            if v.is_empty() {
                return Err(syntax(line, format!("empty value for '{k}'")));
            }
            if values.insert(k, v).is_some() {
                return Err(syntax(line, format!("duplicate key '{k}'")));
            }
        }
        Ok(Args { line, values })
    }

    fn get(&self, key: &str) -> Option<&'a str> {
        self.values.get(key).copied()
    }

    fn require(&self, key: &str) -> Result<&'a str, FormatError> {
        self.get(key)
            .ok_or_else(|| syntax(self.line, format!("missing '{key}'")))
    }

    fn int(&self, key: &str) -> Result<Option<u32>, FormatError> {
        self.get(key)
            .map(|v| {
                v.parse::<u32>()
                    .map_err(|_| syntax(self.line, format!("'{key}' must be a non-negative integer, got '{v}'")))
            })
            .transpose()
    }

    fn require_int(&self, key: &str) -> Result<u32, FormatError> {
        self.int(key)?
            .ok_or_else(|| syntax(self.line, format!("missing '{key}'")))
    }

    fn forbid(&self, keys: &[&str], why: &str) -> Result<(), FormatError> {
        match keys.iter().find(|k| self.values.contains_key(*k)) {
            Some(k) => Err(syntax(self.line, format!("'{k}' not allowed {why}"))),
            None => Ok(()),
        }
    }
}

pub fn parse_sfg(text: &str) -> Result<SfgGraph, FormatError> {
    let mut lines = records(text);
    let (line, header) = lines.next().ok_or(FormatError::Missing("sfg <name>"))?;
    let name = match header.split_whitespace().collect::<Vec<_>>()[..] {
        ["sfg", name] => name,
        _ => return Err(syntax(line, "expected `sfg <name>`")),
    };
    let mut vertices = Vec::new();
    let mut defined: BTreeMap<&str, usize> = BTreeMap::new();
    let mut edges = Vec::new();
    for (line, rec) in lines {
        let tokens: Vec<&str> = rec.split_whitespace().collect();
        match tokens[0] {
            "node" => {
                let id = *tokens.get(1).ok_or_else(|| syntax(line, "missing node id"))?;
                if id.contains('=') {
                    return Err(syntax(line, "missing node id"));
                }
                let args = Args::parse(line, &tokens[2..], &["kind", "symbol", "access", "depth"])?;
                let kind = match args.require("kind")? {
                    "data" => {
                        args.forbid(&["depth"], "on a data vertex")?;
                        let symbol = args.require("symbol")?;
                        match args.require("access")? {
                            "read" => VertexKind::read(symbol),
                            "write" => VertexKind::write(symbol),
                            other => return Err(syntax(line, format!("access must be read or write, got '{other}'"))),
                        }
                    }
                    "delay" => {
                        args.forbid(&["symbol", "access"], "on a delay vertex")?;
                        VertexKind::Delay {
                            depth: args.int("depth")?.unwrap_or(1),
                        }
                    }
                    op => {
                        args.forbid(&["symbol", "access", "depth"], "on an operation vertex")?;
                        VertexKind::op(op)
                    }
                };
                if let Some(first) = defined.insert(id, line) {
                    let source = SfgError::DuplicateId(id.into());
                    return Err(syntax(line, format!("{source} (first defined on line {first})")));
                }
                vertices.push(SfgVertex::new(id, kind));
            }
            "edge" => match tokens[..] {
                ["edge", src, "->", dst] => edges.push((line, SfgEdge::new(src, dst))),
                _ => return Err(syntax(line, "expected `edge <src> -> <dst>`")),
            },
            other => return Err(syntax(line, format!("unknown record '{other}'"))),
        }
    }
    for (line, e) in &edges {
        for end in [&e.src, &e.dst] {
            if !defined.contains_key(end.as_str()) {
                return Err(FormatError::Graph {
                    line: *line,
                    source: SfgError::DanglingEndpoint {
                        src: e.src.clone(),
                        dst: e.dst.clone(),
                        missing: end.clone(),
                    },
                });
            }
        }
        if e.src == e.dst {
            return Err(FormatError::Graph {
                line: *line,
                source: SfgError::SelfLoop(e.src.clone()),
            });
        }
    }
    SfgGraph::new(name, vertices, edges.into_iter().map(|(_, e)| e)).map_err(|e| match &e {
        SfgError::InvalidVertex { id, .. } => FormatError::Graph {
            line: defined[id.as_str()],
            source: e,
        },
        _ => FormatError::Structure(e),
    })
}

/// Canonical text of a graph: vertices in id order, then edges.
pub fn write_sfg(g: &SfgGraph) -> String {
    let mut out = format!("sfg {}\n", g.name());
    for v in g.vertices() {
        let _ = match &v.kind {
            VertexKind::Op { name, .. } => writeln!(out, "node {} kind={}", v.id, name),
            VertexKind::Data { symbol, access } => writeln!(
                out,
                "node {} kind=data symbol={} access={}",
                v.id,
                symbol,
                access.as_str()
            ),
            VertexKind::Delay { depth } => writeln!(out, "node {} kind=delay depth={}", v.id, depth),
        };
    }
    for e in g.edges() {
        let _ = writeln!(out, "edge {} -> {}", e.src, e.dst);
    }
    out
}

pub fn parse_memory_map(text: &str) -> Result<MemoryMap, FormatError> {
    let mut banks = Vec::new();
    let mut placements = Vec::new();
    let mut transfers = Vec::new();
    for (line, rec) in records(text) {
        let tokens: Vec<&str> = rec.split_whitespace().collect();
        let name = tokens
            .get(1)
            .filter(|t| !t.contains('='))
            .ok_or_else(|| syntax(line, format!("missing name after '{}'", tokens[0])))?;
        let rest = &tokens[2..];
        match tokens[0] {
            "bank" => {
                let args = Args::parse(line, rest, &["ports", "read_latency", "write_latency", "capacity"])?;
                banks.push(MemoryBank::new(
                    *name,
                    args.require_int("ports")?,
                    args.require_int("read_latency")?,
                    args.require_int("write_latency")?,
                    args.require_int("capacity")?,
                ));
            }
            "place" => {
                let args = Args::parse(line, rest, &["kind", "bank", "addr"])?;
                let placement = match args.require("kind")? {
                    "memory" => Placement::memory(*name, args.require("bank")?, args.require_int("addr")?),
                    "register" => {
                        args.forbid(&["bank", "addr"], "on a register placement")?;
                        Placement::register(*name)
                    }
                    other => return Err(syntax(line, format!("kind must be memory or register, got '{other}'"))),
                };
                placements.push(placement);
            }
            "transfer" => {
                let args = Args::parse(line, rest, &["from", "to", "at_cycle"])?;
                transfers.push(TransferDirective::new(
                    *name,
                    args.require("from")?,
                    args.require("to")?,
                    args.require_int("at_cycle")?,
                ));
            }
            other => return Err(syntax(line, format!("unknown record '{other}'"))),
        }
    }
    MemoryMap::new(banks, placements, transfers).map_err(FormatError::Map)
}

pub fn write_memory_map(m: &MemoryMap) -> String {
    let mut out = String::new();
    for b in m.banks() {
        let _ = writeln!(
            out,
            "bank {} ports={} read_latency={} write_latency={} capacity={}",
            b.name, b.ports, b.read_latency, b.write_latency, b.capacity
        );
    }
    for p in m.placements() {
        let _ = match &p.location {
            Location::Register => writeln!(out, "place {} kind=register", p.symbol),
            Location::Memory { bank, address } => {
                writeln!(out, "place {} kind=memory bank={} addr={}", p.symbol, bank, address)
            }
        };
    }
    for t in m.transfers() {
        let _ = writeln!(
            out,
            "transfer {} from={} to={} at_cycle={}",
            t.symbol, t.from_bank, t.to_bank, t.at_cycle
        );
    }
    out
}

/// Scheduler configuration as read from a file; the horizon may be supplied elsewhere.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConfigFile {
    pub horizon: Option<Cycle>,
    pub op_latency: BTreeMap<String, Cycle>,
    pub fu_limits: BTreeMap<String, u32>,
}

impl ConfigFile {
    pub fn with_horizon(&self, horizon: Cycle) -> SchedulerConfig {
        SchedulerConfig {
            horizon,
            op_latency: self.op_latency.clone(),
            fu_limits: self.fu_limits.clone(),
        }
    }

    pub fn scheduler_config(&self) -> Result<SchedulerConfig, FormatError> {
        let horizon = self.horizon.ok_or(FormatError::Missing("horizon=<int>"))?;
        Ok(self.with_horizon(horizon))
    }
}

pub fn parse_config(text: &str) -> Result<ConfigFile, FormatError> {
    let mut cfg = ConfigFile::default();
    let mut seen = BTreeSet::new();
    for (line, rec) in records(text) {
        let (key, value) = rec
            .split_once('=')
            .ok_or_else(|| syntax(line, format!("expected key=value, got '{rec}'")))?;
        let (key, value) = (key.trim(), value.trim());
        let n: u32 = value
            .parse()
            .map_err(|_| syntax(line, format!("'{key}' must be a non-negative integer, got '{value}'")))?;
        if !seen.insert(key.to_owned()) {
            return Err(syntax(line, format!("duplicate key '{key}'")));
        }
        let positive = |what: &str| {
            if n == 0 {
                Err(syntax(line, format!("{what} must be at least 1")))
            } else {
                Ok(n)
            }
        };
        if key == "horizon" {
            cfg.horizon = Some(positive("horizon")?);
        } else if let Some(op) = key.strip_prefix("latency.").filter(|op| !op.is_empty()) {
            cfg.op_latency.insert(op.to_owned(), positive("latency")?);
        } else if let Some(op) = key.strip_prefix("fu.").filter(|op| !op.is_empty()) {
            cfg.fu_limits.insert(op.to_owned(), positive("unit count")?);
        } else {
            return Err(syntax(line, format!("unknown key '{key}'")));
        }
    }
    Ok(cfg)
}

/// `sched` lines sorted by `(start, vertex)`, then `dma` lines.
pub fn write_schedule(s: &Schedule) -> String {
    let mut out = String::new();
    for e in s.entries() {
        let _ = writeln!(
            out,
            "sched {} start={} end={} res={}",
            e.vertex, e.start, e.end, e.resource
        );
    }
    for d in s.dma() {
        let _ = writeln!(
            out,
            "dma {} from={} to={} start={} end={}",
            d.symbol, d.from_bank, d.to_bank, d.start, d.end
        );
    }
    out
}

/// Reads a schedule dump. The graph tells whether `res` names a bank or an
/// operator class; `res=register` on a data vertex is a register access.
pub fn parse_schedule(text: &str, g: &SfgGraph) -> Result<Schedule, FormatError> {
    let mut entries = Vec::new();
    let mut dma = Vec::new();
    for (line, rec) in records(text) {
        let tokens: Vec<&str> = rec.split_whitespace().collect();
        let name = tokens
            .get(1)
            .filter(|t| !t.contains('='))
            .ok_or_else(|| syntax(line, format!("missing name after '{}'", tokens[0])))?;
        match tokens[0] {
            "sched" => {
                let args = Args::parse(line, &tokens[2..], &["start", "end", "res"])?;
                let res = args.require("res")?;
                let resource = match g.vertex(name).map(|v| &v.kind) {
                    Some(VertexKind::Data { .. }) if res == "register" => Resource::Register,
                    Some(VertexKind::Data { .. }) => Resource::Bank(res.to_owned()),
                    _ => Resource::Fu(res.to_owned()),
                };
                entries.push(ScheduleEntry {
                    vertex: (*name).into(),
                    start: args.require_int("start")?,
                    end: args.require_int("end")?,
                    resource,
                });
            }
            "dma" => {
                let args = Args::parse(line, &tokens[2..], &["from", "to", "start", "end"])?;
                dma.push(DmaEntry {
                    symbol: (*name).to_owned(),
                    from_bank: args.require("from")?.to_owned(),
                    to_bank: args.require("to")?.to_owned(),
                    start: args.require_int("start")?,
                    end: args.require_int("end")?,
                });
            }
            other => return Err(syntax(line, format!("unknown record '{other}'"))),
        }
    }
    Ok(Schedule::new(entries, dma))
}

/// One line per conflict edge, `<bank>: <u> -- <v> w=<weight>`, sorted.
pub fn write_mcg(mcgs: &[Mcg]) -> String {
    let mut lines: Vec<String> = mcgs
        .iter()
        .flat_map(|m| {
            m.edges()
                .iter()
                .map(move |e| format!("{}: {} -- {} w={}", m.bank(), e.u, e.v, e.weight))
        })
        .collect();
    lines.sort();
    lines.into_iter().map(|l| l + "\n").collect()
}
