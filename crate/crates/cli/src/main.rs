use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use memsched::commands::{cmd_explore, cmd_schedule, cmd_verify, ExploreArgs, Outcome, ScheduleArgs};

/// Memory-aware scheduling of signal flow graphs.
#[derive(Parser)]
#[command(name = "memsched", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Schedule a graph against a memory map and print the schedule dump.
    Schedule {
        sfg: PathBuf,
        map: PathBuf,
        #[arg(long)]
        config: PathBuf,
        /// Also write schedule.txt, gantt.txt and mcg.txt into DIR.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        /// Append a text Gantt chart.
        #[arg(long)]
        gantt: bool,
    },
    /// Check a schedule dump and print OK or the first violation.
    Verify {
        sfg: PathBuf,
        map: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        schedule: PathBuf,
    },
    /// Schedule one graph for every candidate map and horizon.
    Explore {
        sfg: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        maps: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',', required = true)]
        horizons: Vec<u32>,
        /// Operator latencies and unit counts; any horizon in it is ignored.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also write report.txt into DIR.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let outcome: Outcome = match Cli::parse().command {
        Command::Schedule {
            sfg,
            map,
            config,
            out,
            gantt,
        } => cmd_schedule(&ScheduleArgs {
            sfg: &sfg,
            map: &map,
            config: &config,
            out: out.as_deref(),
            gantt,
        }),
        Command::Verify {
            sfg,
            map,
            config,
            schedule,
        } => cmd_verify(&sfg, &map, &config, &schedule),
        Command::Explore {
            sfg,
            maps,
            horizons,
            config,
            out,
        } => cmd_explore(&ExploreArgs {
            sfg: &sfg,
            maps: &maps,
            horizons: &horizons,
            config: config.as_deref(),
            out: out.as_deref(),
        }),
    };
    print!("{}", outcome.stdout);
    if let Some(msg) = &outcome.message {
        eprintln!("memsched: {msg}");
    }
    ExitCode::from(outcome.code as u8)
}
