//! The `schedule`, `verify` and `explore` commands.
//!
//! Each command returns its standard output and exit status instead of
//! printing, so runs can be compared byte for byte. Exit status is 0 on
//! success, 1 when no schedule fits or verification fails, and 2 for
//! unreadable or malformed inputs.

use std::fs;
use std::path::{Path, PathBuf};

use memsched_core::{build_mcg, check_schedule, schedule, Cycle};

use crate::explore::{explore, Candidate};
use crate::format::{
    parse_config, parse_memory_map, parse_schedule, parse_sfg, write_mcg, write_schedule, FormatError,
};
use crate::gantt::Gantt;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    /// Diagnostic printed to standard error.
    pub message: Option<String>,
    pub code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome {
            stdout,
            message: None,
            code: EXIT_OK,
        }
    }

    fn fail(code: i32, stdout: String, message: String) -> Self {
        Outcome {
            stdout,
            message: Some(message),
            code,
        }
    }

    fn input(message: String) -> Self {
        Outcome::fail(EXIT_INPUT, String::new(), message)
    }
}

/// `path:line: reason` for errors tied to a line, `path: reason` otherwise.
pub fn locate(path: &Path, err: &FormatError) -> String {
    let p = path.display();
    match err {
        FormatError::Syntax { line, reason } => format!("{p}:{line}: {reason}"),
        FormatError::Graph { line, source } => format!("{p}:{line}: {source}"),
        other => format!("{p}: {other}"),
    }
}

fn load<T>(path: &Path, parse: impl FnOnce(&str) -> Result<T, FormatError>) -> Result<T, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse(&text).map_err(|e| locate(path, &e))
}

fn write_out(dir: &Path, files: &[(&str, &str)]) -> Result<(), String> {
    fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    Ok(())
}

pub struct ScheduleArgs<'a> {
    pub sfg: &'a Path,
    pub map: &'a Path,
    pub config: &'a Path,
    pub out: Option<&'a Path>,
    pub gantt: bool,
}

/// Writes the schedule dump to stdout (followed by the Gantt chart with
/// `gantt`). With `out`, also writes `schedule.txt`, `gantt.txt` and `mcg.txt`.
pub fn cmd_schedule(args: &ScheduleArgs) -> Outcome {
    let inputs = (|| {
        let g = load(args.sfg, parse_sfg)?;
        let m = load(args.map, parse_memory_map)?;
        let cfg = load(args.config, |t| parse_config(t)?.scheduler_config())?;
        Ok::<_, String>((g, m, cfg))
    })();
    let (g, m, cfg) = match inputs {
        Ok(x) => x,
        Err(e) => return Outcome::input(e),
    };
    let s = match schedule(&g, &m, &cfg) {
        Ok(s) => s,
        Err(e) => return Outcome::fail(EXIT_INFEASIBLE, String::new(), e.to_string()),
    };
    let dump = write_schedule(&s);
    let chart = Gantt::new(&s, &m).render();
    if let Some(dir) = args.out {
        let mcg = write_mcg(&build_mcg(&g, &m));
        let files = [
            ("schedule.txt", dump.as_str()),
            ("gantt.txt", chart.as_str()),
            ("mcg.txt", mcg.as_str()),
        ];
        if let Err(e) = write_out(dir, &files) {
            return Outcome::input(e);
        }
    }
    let mut stdout = dump;
    if args.gantt {
        stdout.push('\n');
        stdout.push_str(&chart);
    }
    Outcome::ok(stdout)
}

/// Prints the verdict line of the independent checker.
pub fn cmd_verify(sfg: &Path, map: &Path, config: &Path, dump: &Path) -> Outcome {
    let inputs = (|| {
        let g = load(sfg, parse_sfg)?;
        let m = load(map, parse_memory_map)?;
        let cfg = load(config, |t| parse_config(t)?.scheduler_config())?;
        let s = load(dump, |t| parse_schedule(t, &g))?;
        Ok::<_, String>((g, m, cfg, s))
    })();
    let (g, m, cfg, s) = match inputs {
        Ok(x) => x,
        Err(e) => return Outcome::input(e),
    };
    if let Err(e) = cfg.validate() {
        return Outcome::input(format!("{}: {e}", config.display()));
    }
    let verdict = check_schedule(&g, &m, &cfg, &s);
    let line = format!("{verdict}\n");
    if verdict.is_pass() {
        Outcome::ok(line)
    } else {
        Outcome {
            stdout: line,
            message: None,
            code: EXIT_INFEASIBLE,
        }
    }
}

pub struct ExploreArgs<'a> {
    pub sfg: &'a Path,
    pub maps: &'a [PathBuf],
    pub horizons: &'a [Cycle],
    pub config: Option<&'a Path>,
    pub out: Option<&'a Path>,
}

/// Candidate label: the map's file stem, or its full path when stems collide.
fn labels(maps: &[PathBuf]) -> Vec<String> {
    let stem = |p: &PathBuf| {
        p.file_stem()
            .map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned())
    };
    let stems: Vec<String> = maps.iter().map(stem).collect();
    stems
        .iter()
        .zip(maps)
        .map(|(s, p)| {
            if stems.iter().filter(|t| *t == s).count() > 1 {
                p.display().to_string()
            } else {
                s.clone()
            }
        })
        .collect()
}

/// Prints the exploration table; `out` also receives `report.txt`.
pub fn cmd_explore(args: &ExploreArgs) -> Outcome {
    if args.maps.is_empty() {
        return Outcome::input("explore needs at least one candidate map".into());
    }
    if args.horizons.is_empty() || args.horizons.contains(&0) {
        return Outcome::input("horizons must be positive integers".into());
    }
    let g = match load(args.sfg, parse_sfg) {
        Ok(g) => g,
        Err(e) => return Outcome::input(e),
    };
    let base = match args.config.map(|c| load(c, parse_config)).transpose() {
        Ok(c) => c.unwrap_or_default(),
        Err(e) => return Outcome::input(e),
    };
    let candidates: Vec<Candidate> = labels(args.maps)
        .into_iter()
        .zip(args.maps)
        .map(|(label, path)| Candidate {
            label,
            map: load(path, parse_memory_map),
        })
        .collect();
    if candidates.iter().all(|c| c.map.is_err()) {
        let reasons: Vec<&str> = candidates
            .iter()
            .filter_map(|c| c.map.as_ref().err())
            .map(String::as_str)
            .collect();
        return Outcome::input(format!("no candidate map could be read:\n{}", reasons.join("\n")));
    }
    let report = explore(&g, &candidates, &base, args.horizons).render();
    if let Some(dir) = args.out {
        if let Err(e) = write_out(dir, &[("report.txt", &report)]) {
            return Outcome::input(e);
        }
    }
    Outcome::ok(report)
}
