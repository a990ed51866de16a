//! Latency and area across candidate memory architectures.

use std::cmp::Ordering;
use std::fmt::Write as _;

use memsched_core::{schedule, Cycle, MemoryMap, SchedulerConfig, SfgGraph};
use rayon::prelude::*;

use crate::format::ConfigFile;

/// A candidate memory map, or the reason it could not be read.
pub struct Candidate {
    pub label: String,
    pub map: Result<MemoryMap, String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplorationRow {
    pub label: String,
    pub horizon: Cycle,
    pub banks: usize,
    pub ports: u32,
    /// Ports summed over banks, one unit per port.
    pub area: u32,
    /// `None` when no schedule fits.
    pub latency: Option<Cycle>,
    pub reason: Option<String>,
}

impl ExplorationRow {
    pub fn feasible(&self) -> bool {
        self.latency.is_some()
    }

    /// Feasible rows by `(latency, area)`, then infeasible rows; label and
    /// horizon break ties.
    fn order(&self, other: &Self) -> Ordering {
        let key = |r: &Self| (r.latency.is_none(), r.latency, r.area);
        key(self)
            .cmp(&key(other))
            .then_with(|| self.label.cmp(&other.label))
            .then_with(|| self.horizon.cmp(&other.horizon))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExplorationReport {
    pub rows: Vec<ExplorationRow>,
}

/// Schedules `g` for every `(candidate, horizon)` pair. Failures become
/// infeasible rows.
pub fn explore(g: &SfgGraph, candidates: &[Candidate], base: &ConfigFile, horizons: &[Cycle]) -> ExplorationReport {
    let pairs: Vec<(&Candidate, Cycle)> = candidates
        .iter()
        .flat_map(|c| horizons.iter().map(move |&h| (c, h)))
        .collect();
    let mut rows: Vec<ExplorationRow> = pairs
        .par_iter()
        .map(|&(c, horizon)| run(g, c, &base.with_horizon(horizon)))
        .collect();
    rows.sort_by(ExplorationRow::order);
    ExplorationReport { rows }
}

fn run(g: &SfgGraph, c: &Candidate, cfg: &SchedulerConfig) -> ExplorationRow {
    let mut row = ExplorationRow {
        label: c.label.clone(),
        horizon: cfg.horizon,
        banks: 0,
        ports: 0,
        area: 0,
        latency: None,
        reason: None,
    };
    match &c.map {
        Err(e) => row.reason = Some(e.clone()),
        Ok(m) => {
            row.banks = m.banks().len();
            row.ports = m.total_ports();
            row.area = row.ports;
            match schedule(g, m, cfg) {
                Ok(s) => row.latency = Some(s.achieved_latency()),
                Err(e) => row.reason = Some(e.to_string()),
            }
        }
    }
    row
}

impl ExplorationReport {
    pub fn render(&self) -> String {
        let header = [
            "label", "horizon", "banks", "ports", "latency", "area", "feasible", "reason",
        ];
        let cells: Vec<[String; 8]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.label.clone(),
                    r.horizon.to_string(),
                    r.banks.to_string(),
                    r.ports.to_string(),
                    r.latency.map_or("-".into(), |l| l.to_string()),
                    r.area.to_string(),
                    if r.feasible() { "yes" } else { "no" }.into(),
                    r.reason.clone().unwrap_or_default(),
                ]
            })
            .collect();
        let mut widths = header.map(str::len);
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.len());
            }
        }
        let mut out = String::new();
        let mut line = |fields: &[&str]| {
            let mut l = String::new();
            for (i, (f, w)) in fields.iter().zip(&widths).enumerate() {
                if i > 0 {
                    l.push_str("  ");
                }
                let _ = write!(l, "{f:<w$}");
            }
            out.push_str(l.trim_end());
            out.push('\n');
        };
        line(&header);
        for row in &cells {
            line(&row.each_ref().map(String::as_str));
        }
        out
    }
}
