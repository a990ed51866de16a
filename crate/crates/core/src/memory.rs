//! Memory architecture and memory mapping.
//!
//! A [`MemoryMap`] lists the banks, where every data symbol lives (a bank
//! address or a register) and the inter-bank transfers (DMA directives) that
//! move a symbol at a declared cycle. A transfer of symbol `s` from bank `F`
//! to bank `T` at cycle `c` holds one port on both banks for
//! `max(read_latency(F), write_latency(T))` cycles; `s` resides in `F` until
//! the transfer completes and in `T` afterwards. The symbol keeps its word
//! address in the destination bank.

use alloc::borrow::ToOwned;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::sfg::{Access, SfgGraph};
use crate::Cycle;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MemoryBank {
    pub name: String,
    /// Simultaneous R/W accesses.
    pub ports: u32,
    pub read_latency: Cycle,
    pub write_latency: Cycle,
    /// Words.
    pub capacity: u32,
}

impl MemoryBank {
    pub fn new(name: impl Into<String>, ports: u32, read_latency: Cycle, write_latency: Cycle, capacity: u32) -> Self {
        MemoryBank {
            name: name.into(),
            ports,
            read_latency,
            write_latency,
            capacity,
        }
    }

    pub fn latency(&self, access: Access) -> Cycle {
        match access {
            Access::Read => self.read_latency,
            Access::Write => self.write_latency,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StorageKind {
    Memory,
    Register,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Location {
    Register,
    Memory { bank: String, address: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Placement {
    pub symbol: String,
    pub location: Location,
}

impl Placement {
    pub fn register(symbol: impl Into<String>) -> Self {
        Placement {
            symbol: symbol.into(),
            location: Location::Register,
        }
    }

    pub fn memory(symbol: impl Into<String>, bank: impl Into<String>, address: u32) -> Self {
        Placement {
            symbol: symbol.into(),
            location: Location::Memory {
                bank: bank.into(),
                address,
            },
        }
    }

    pub fn kind(&self) -> StorageKind {
        match self.location {
            Location::Register => StorageKind::Register,
            Location::Memory { .. } => StorageKind::Memory,
        }
    }
}

/// DMA directive: move `symbol` from `from_bank` to `to_bank` starting at `at_cycle`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransferDirective {
    pub symbol: String,
    pub from_bank: String,
    pub to_bank: String,
    pub at_cycle: Cycle,
}

impl TransferDirective {
    pub fn new(
        symbol: impl Into<String>,
        from_bank: impl Into<String>,
        to_bank: impl Into<String>,
        at_cycle: Cycle,
    ) -> Self {
        TransferDirective {
            symbol: symbol.into(),
            from_bank: from_bank.into(),
            to_bank: to_bank.into(),
            at_cycle,
        }
    }
}

/// Where a symbol lives at a given cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Residence<'a> {
    Register,
    Bank(&'a MemoryBank),
}

impl Residence<'_> {
    pub fn bank_name(&self) -> Option<&str> {
        match self {
            Residence::Register => None,
            Residence::Bank(b) => Some(&b.name),
        }
    }

    /// Access latency: zero for registers.
    pub fn latency(&self, access: Access) -> Cycle {
        match self {
            Residence::Register => 0,
            Residence::Bank(b) => b.latency(access),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("duplicate bank '{0}'")]
    DuplicateBank(String),
    #[error("bank '{bank}': {reason}")]
    InvalidBank { bank: String, reason: &'static str },
    #[error("duplicate placement of '{0}'")]
    DuplicatePlacement(String),
    #[error("'{symbol}' placed in unknown bank '{bank}'")]
    UnknownBank { symbol: String, bank: String },
    #[error("'{symbol}' at address {address} is out of capacity {capacity} of bank '{bank}'")]
    AddressOutOfRange {
        symbol: String,
        bank: String,
        address: u32,
        capacity: u32,
    },
    #[error("'{a}' and '{b}' overlap at address {address} of bank '{bank}'")]
    AddressOverlap {
        a: String,
        b: String,
        bank: String,
        address: u32,
    },
    #[error("transfer of unplaced symbol '{0}'")]
    UnplacedTransfer(String),
    #[error("transfer of register symbol '{0}'")]
    RegisterTransfer(String),
    #[error("transfer of '{0}' has identical source and destination bank")]
    SelfTransfer(String),
    #[error("transfer of '{symbol}' at cycle {at_cycle} starts from '{from}' but the symbol resides in '{resident}'")]
    TransferSourceMismatch {
        symbol: String,
        at_cycle: Cycle,
        from: String,
        resident: String,
    },
    #[error("transfers of '{symbol}' overlap at cycle {at_cycle}")]
    OverlappingTransfers { symbol: String, at_cycle: Cycle },
}

/// Result of matching a map against the symbols of a graph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CoverageReport {
    /// Graph symbols without placement (fatal).
    pub unplaced: Vec<String>,
    /// Placements for symbols the graph never accesses (warning).
    pub unused: Vec<String>,
}

impl CoverageReport {
    pub fn is_success(&self) -> bool {
        self.unplaced.is_empty()
    }
}

/// Occupancy of one `(bank, address)` word by a symbol over `[start, end)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment<'a> {
    pub bank: &'a str,
    pub address: u32,
    pub start: Cycle,
    /// `None` = until the end of time.
    pub end: Option<Cycle>,
}

impl Segment<'_> {
    fn overlaps(&self, other: &Segment<'_>) -> bool {
        let a_before_b = self.end.is_some_and(|e| e <= other.start);
        let b_before_a = other.end.is_some_and(|e| e <= self.start);
        !(a_before_b || b_before_a)
    }
}

/// A validated memory mapping.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MemoryMap {
    banks: Vec<MemoryBank>,
    bank_index: BTreeMap<String, usize>,
    placements: Vec<Placement>,
    placement_index: BTreeMap<String, usize>,
    transfers: Vec<TransferDirective>,
}

impl MemoryMap {
    pub fn new(
        banks: Vec<MemoryBank>,
        placements: Vec<Placement>,
        transfers: Vec<TransferDirective>,
    ) -> Result<Self, MapError> {
        let mut bank_index = BTreeMap::new();
        for (i, b) in banks.iter().enumerate() {
            let reason = if b.ports == 0 {
                Some("ports must be at least 1")
            } else if b.read_latency == 0 || b.write_latency == 0 {
                Some("latencies must be at least 1")
            } else if b.capacity == 0 {
                Some("capacity must be at least 1")
            } else {
                None
            };
            if let Some(reason) = reason {
                return Err(MapError::InvalidBank {
                    bank: b.name.clone(),
                    reason,
                });
            }
            if bank_index.insert(b.name.clone(), i).is_some() {
                return Err(MapError::DuplicateBank(b.name.clone()));
            }
        }
        let mut placement_index = BTreeMap::new();
        for (i, p) in placements.iter().enumerate() {
            if let Location::Memory { bank, address } = &p.location {
                let Some(&bi) = bank_index.get(bank) else {
                    return Err(MapError::UnknownBank {
                        symbol: p.symbol.clone(),
                        bank: bank.clone(),
                    });
                };
                check_address(&p.symbol, &banks[bi], *address)?;
            }
            if placement_index.insert(p.symbol.clone(), i).is_some() {
                return Err(MapError::DuplicatePlacement(p.symbol.clone()));
            }
        }
        let map = MemoryMap {
            banks,
            bank_index,
            placements,
            placement_index,
            transfers,
        };
        map.validate_transfers()?;
        map.validate_overlap()?;
        Ok(map)
    }

    fn validate_transfers(&self) -> Result<(), MapError> {
        for t in &self.transfers {
            let Some(p) = self.placement(&t.symbol) else {
                return Err(MapError::UnplacedTransfer(t.symbol.clone()));
            };
            let Location::Memory { address, .. } = p.location else {
                return Err(MapError::RegisterTransfer(t.symbol.clone()));
            };
            for bank in [&t.from_bank, &t.to_bank] {
                if !self.bank_index.contains_key(bank) {
                    return Err(MapError::UnknownBank {
                        symbol: t.symbol.clone(),
                        bank: bank.clone(),
                    });
                }
            }
            if t.from_bank == t.to_bank {
                return Err(MapError::SelfTransfer(t.symbol.clone()));
            }
            check_address(&t.symbol, self.bank(&t.to_bank).unwrap(), address)?;
        }
        for symbol in self.placement_index.keys() {
            let Some(Location::Memory { bank, .. }) = self.placement(symbol).map(|p| &p.location) else {
                continue;
            };
            let mut resident = bank.as_str();
            let mut free_from = 0;
            for t in self.transfers_of(symbol) {
                if t.at_cycle < free_from {
                    return Err(MapError::OverlappingTransfers {
                        symbol: symbol.clone(),
                        at_cycle: t.at_cycle,
                    });
                }
                if t.from_bank != resident {
                    return Err(MapError::TransferSourceMismatch {
                        symbol: symbol.clone(),
                        at_cycle: t.at_cycle,
                        from: t.from_bank.clone(),
                        resident: resident.to_owned(),
                    });
                }
                resident = &t.to_bank;
                free_from = t.at_cycle + self.transfer_latency(t);
            }
        }
        Ok(())
    }

    fn validate_overlap(&self) -> Result<(), MapError> {
        let mut by_word: BTreeMap<(&str, u32), Vec<(&str, Segment<'_>)>> = BTreeMap::new();
        for p in &self.placements {
            for seg in self.occupancy(&p.symbol) {
                by_word
                    .entry((seg.bank, seg.address))
                    .or_default()
                    .push((&p.symbol, seg));
            }
        }
        for ((bank, address), segs) in by_word {
            for (i, (a, sa)) in segs.iter().enumerate() {
                for (b, sb) in &segs[i + 1..] {
                    if a != b && sa.overlaps(sb) {
                        return Err(MapError::AddressOverlap {
                            a: (*a).to_owned(),
                            b: (*b).to_owned(),
                            bank: bank.to_owned(),
                            address,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn banks(&self) -> &[MemoryBank] {
        &self.banks
    }

    pub fn bank(&self, name: &str) -> Option<&MemoryBank> {
        self.bank_index.get(name).map(|&i| &self.banks[i])
    }

    pub fn placements(&self) -> &[Placement] {
        &self.placements
    }

    pub fn placement(&self, symbol: &str) -> Option<&Placement> {
        self.placement_index.get(symbol).map(|&i| &self.placements[i])
    }

    pub fn transfers(&self) -> &[TransferDirective] {
        &self.transfers
    }

    /// Transfers of one symbol, ordered by `at_cycle`.
    pub fn transfers_of<'a>(&'a self, symbol: &'a str) -> impl Iterator<Item = &'a TransferDirective> + 'a {
        let mut list: Vec<&TransferDirective> = self.transfers.iter().filter(|t| t.symbol == symbol).collect();
        list.sort_by_key(|t| t.at_cycle);
        list.into_iter()
    }

    /// A map without transfers.
    pub fn is_static(&self) -> bool {
        self.transfers.is_empty()
    }

    pub fn total_ports(&self) -> u32 {
        self.banks.iter().map(|b| b.ports).sum()
    }

    /// Cycles a transfer holds a port on each of its two banks.
    pub fn transfer_latency(&self, t: &TransferDirective) -> Cycle {
        let read = self.bank(&t.from_bank).map_or(1, |b| b.read_latency);
        let write = self.bank(&t.to_bank).map_or(1, |b| b.write_latency);
        read.max(write)
    }

    /// `[at_cycle, at_cycle + transfer_latency)`.
    pub fn transfer_window(&self, t: &TransferDirective) -> (Cycle, Cycle) {
        (t.at_cycle, t.at_cycle + self.transfer_latency(t))
    }

    /// Whether `[start, end)` intersects any transfer window of `symbol`.
    /// An empty interval `[c, c)` counts as touching cycle `c`.
    pub fn overlaps_transfer(&self, symbol: &str, start: Cycle, end: Cycle) -> bool {
        let end = end.max(start + 1);
        self.transfers_of(symbol).any(|t| {
            let (ws, we) = self.transfer_window(t);
            start < we && ws < end
        })
    }

    /// The bank (or register) holding `symbol` at `cycle`, `None` if unplaced.
    pub fn residence(&self, symbol: &str, cycle: Cycle) -> Option<Residence<'_>> {
        let placement = self.placement(symbol)?;
        let Location::Memory { bank, .. } = &placement.location else {
            return Some(Residence::Register);
        };
        let mut resident = bank.as_str();
        for t in self.transfers_of(symbol) {
            if cycle >= t.at_cycle + self.transfer_latency(t) {
                resident = &t.to_bank;
            }
        }
        self.bank(resident).map(Residence::Bank)
    }

    /// Cycles at which the residence of some symbol changes, sorted.
    pub fn residence_breakpoints(&self) -> Vec<Cycle> {
        let set: BTreeSet<Cycle> = self
            .transfers
            .iter()
            .map(|t| t.at_cycle + self.transfer_latency(t))
            .collect();
        set.into_iter().collect()
    }

    /// Words occupied by `symbol` over time. During a transfer the symbol
    /// occupies both the source and the destination word.
    pub fn occupancy<'a>(&'a self, symbol: &'a str) -> Vec<Segment<'a>> {
        let Some(Placement {
            location: Location::Memory { bank, address },
            ..
        }) = self.placement(symbol)
        else {
            return Vec::new();
        };
        let mut out = Vec::new();
        let mut current = bank.as_str();
        let mut since = 0;
        for t in self.transfers_of(symbol) {
            let (ws, we) = self.transfer_window(t);
            out.push(Segment {
                bank: current,
                address: *address,
                start: since,
                end: Some(we),
            });
            current = &t.to_bank;
            since = ws;
        }
        out.push(Segment {
            bank: current,
            address: *address,
            start: since,
            end: None,
        });
        out
    }

    /// Matches placements against the symbols accessed by `g`.
    pub fn coverage(&self, g: &SfgGraph) -> CoverageReport {
        let used = g.symbols();
        let placed: BTreeSet<&str> = self.placement_index.keys().map(String::as_str).collect();
        CoverageReport {
            unplaced: used.difference(&placed).map(|s| (*s).to_owned()).collect(),
            unused: placed.difference(&used).map(|s| (*s).to_owned()).collect(),
        }
    }
}

fn check_address(symbol: &str, bank: &MemoryBank, address: u32) -> Result<(), MapError> {
    if address >= bank.capacity {
        return Err(MapError::AddressOutOfRange {
            symbol: symbol.to_owned(),
            bank: bank.name.clone(),
            address,
            capacity: bank.capacity,
        });
    }
    Ok(())
}
