//! Text Gantt chart of a schedule.
//!
//! One row per bank port (`B0.p0`, `B0.p1`, ...) and per functional-unit lane
//! of each operator (`add.0`, ...). Accesses and DMA transfers are assigned to
//! the lowest free lane of their resource in start order. Zero-length
//! register accesses occupy no row. Empty cells print as `.`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use memsched_core::{Cycle, MemoryMap, Resource, Schedule};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GanttRow {
    pub label: String,
    /// One cell per cycle, `None` when idle.
    pub cells: Vec<Option<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gantt {
    pub cycles: Cycle,
    pub rows: Vec<GanttRow>,
}

struct Lanes {
    prefix: String,
    min_lanes: usize,
    items: Vec<(Cycle, Cycle, String)>,
}

impl Lanes {
    fn rows(mut self, cycles: Cycle) -> Vec<GanttRow> {
        self.items.sort();
        let mut lanes: Vec<Vec<Option<String>>> = vec![vec![None; cycles as usize]; self.min_lanes];
        for (start, end, name) in self.items {
            let span = start as usize..end as usize;
            let free = lanes.iter().position(|l| l[span.clone()].iter().all(Option::is_none));
            let lane = match free {
                Some(i) => i,
                None => {
                    lanes.push(vec![None; cycles as usize]);
                    lanes.len() - 1
                }
            };
            for cell in &mut lanes[lane][span] {
                *cell = Some(name.clone());
            }
        }
        lanes
            .into_iter()
            .enumerate()
            .map(|(i, cells)| GanttRow {
                label: format!("{}{}", self.prefix, i),
                cells,
            })
            .collect()
    }
}

impl Gantt {
    pub fn new(s: &Schedule, m: &MemoryMap) -> Self {
        let cycles = s
            .entries()
            .iter()
            .map(|e| e.end)
            .chain(s.dma().iter().map(|d| d.end))
            .max()
            .unwrap_or(0);
        let mut banks: Vec<(&str, Lanes)> = m
            .banks()
            .iter()
            .map(|b| {
                let lanes = Lanes {
                    prefix: format!("{}.p", b.name),
                    min_lanes: b.ports as usize,
                    items: Vec::new(),
                };
                (b.name.as_str(), lanes)
            })
            .collect();
        let mut fus: BTreeMap<&str, Lanes> = BTreeMap::new();
        for e in s.entries().iter().filter(|e| e.end > e.start) {
            let item = (e.start, e.end, e.vertex.to_string());
            match &e.resource {
                Resource::Bank(b) => {
                    if let Some((_, lanes)) = banks.iter_mut().find(|(name, _)| name == b) {
                        lanes.items.push(item);
                    }
                }
                Resource::Fu(op) => fus
                    .entry(op)
                    .or_insert_with(|| Lanes {
                        prefix: format!("{op}."),
                        min_lanes: 0,
                        items: Vec::new(),
                    })
                    .items
                    .push(item),
                Resource::Register => {}
            }
        }
        for d in s.dma() {
            for bank in [&d.from_bank, &d.to_bank] {
                if let Some((_, lanes)) = banks.iter_mut().find(|(name, _)| name == bank) {
                    lanes.items.push((d.start, d.end, format!("dma:{}", d.symbol)));
                }
            }
        }
        let rows = banks
            .into_iter()
            .map(|(_, l)| l)
            .chain(fus.into_values())
            .flat_map(|l| l.rows(cycles))
            .collect();
        Gantt { cycles, rows }
    }

    pub fn render(&self) -> String {
        let label_w = self
            .rows
            .iter()
            .map(|r| r.label.len() + 1)
            .max()
            .unwrap_or(0)
            .max("cycle:".len());
        let widths: Vec<usize> = (0..self.cycles as usize)
            .map(|c| {
                self.rows
                    .iter()
                    .filter_map(|r| r.cells[c].as_ref().map(String::len))
                    .max()
                    .unwrap_or(1)
                    .max(c.to_string().len())
            })
            .collect();
        let mut out = String::new();
        let mut line = format!("{:<label_w$}", "cycle:");
        for (c, w) in widths.iter().enumerate() {
            let _ = write!(line, " {c:<w$}");
        }
        out.push_str(line.trim_end());
        out.push('\n');
        for row in &self.rows {
            let mut line = format!("{:<label_w$}", format!("{}:", row.label));
            for (cell, w) in row.cells.iter().zip(&widths) {
                let _ = write!(line, " {:<w$}", cell.as_deref().unwrap_or("."));
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }
}
