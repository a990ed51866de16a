//! File formats, reports and the command-line driver for `memsched-core`.

pub mod commands;
pub mod explore;
pub mod format;
pub mod gantt;
