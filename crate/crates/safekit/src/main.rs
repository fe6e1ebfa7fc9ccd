//! Thin command-line shim over the library: argument parsing only, all work
//! happens in [`safekit::cli`].

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use safekit::cli::{
    cmd_analyze, cmd_monitor, cmd_simulate, cmd_verify, AnalyzeOptions, CheckSelection, CmdOutcome,
    MonitorOptions, SimulateOptions, VerifyOptions,
};

#[derive(Parser)]
#[command(
    name = "safekit",
    version,
    about = "Verification and runtime monitoring for a discrete-time robot safety controller"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check traces refinement, deadlock freedom and determinism of the
    /// controller model against a requirement file.
    Verify {
        /// Requirement file (.req).
        requirements: PathBuf,
        /// Which check to run: all, refinement, deadlock or determinism.
        #[arg(long, default_value = "all")]
        check: String,
        /// Consecutive idle ticks allowed before time is cut off.
        #[arg(long, default_value_t = 4)]
        max_idle: u32,
        /// Also cross-check the refinement verdict by exhaustive trace
        /// enumeration up to this depth.
        #[arg(long)]
        depth_oracle: Option<usize>,
        /// Apply a named controller mutant (e.g. drop-stop-red).
        #[arg(long)]
        mutate: Option<String>,
        /// Scheduling policy: ticks from queueing to discharge.
        #[arg(long, default_value_t = 1)]
        latency: u32,
        /// Resolve discharge order nondeterministically.
        #[arg(long)]
        nondet_discharge: bool,
        /// Nominal travel speed.
        #[arg(long, default_value_t = 30)]
        nominal_speed: u32,
        /// Slow-down speed commanded by the speed-reduction rows.
        #[arg(long, default_value_t = 10)]
        slow_speed: u32,
        /// Response deadline budget in ticks.
        #[arg(long, default_value_t = 2)]
        deadline_budget: u32,
        /// Include wall-clock timings in the report (non-reproducible).
        #[arg(long)]
        timings: bool,
    },
    /// Compute the exposure probability of a scenario, optionally mapping it
    /// to a SIL band.
    Analyze {
        /// Scenario file (.scenario).
        scenario: PathBuf,
        /// Bounded reachability within K ticks instead of the unbounded
        /// probability.
        #[arg(long, value_name = "K", conflicts_with = "unbounded")]
        bounded: Option<u32>,
        /// Unbounded reachability by value iteration (the default).
        #[arg(long)]
        unbounded: bool,
        /// Interpret the probability as PFD and print the SIL band.
        #[arg(long)]
        sil: bool,
        /// Include wall-clock timings in the report (non-reproducible).
        #[arg(long)]
        timings: bool,
    },
    /// Monte Carlo estimate of the bounded exposure probability, checked
    /// against the exact engine.
    Simulate {
        /// Scenario file (.scenario).
        scenario: PathBuf,
        /// Number of simulated episodes.
        #[arg(long, default_value_t = 100_000)]
        runs: u64,
        /// Episode length in ticks.
        #[arg(long, default_value_t = 100)]
        horizon: u32,
        /// Random seed; identical seeds give byte-identical reports.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads (default: SAFEKIT_JOBS or 1). Results do not
        /// depend on this value.
        #[arg(long)]
        jobs: Option<usize>,
        /// Include wall-clock timings in the report (non-reproducible).
        #[arg(long)]
        timings: bool,
    },
    /// Run requirement monitors over a recorded trace file or a stream on
    /// standard input.
    Monitor {
        /// Requirement file (.req).
        requirements: PathBuf,
        /// Trace file (.trace), or `-` for standard input.
        trace: String,
        /// Report near-miss and imminent-warning counts.
        #[arg(long)]
        near_miss: bool,
        /// Include wall-clock timings in the report (non-reproducible).
        #[arg(long)]
        timings: bool,
    },
}

fn default_jobs() -> usize {
    std::env::var("SAFEKIT_JOBS")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&n| n > 0)
        .unwrap_or(1)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome: CmdOutcome = match cli.command {
        Command::Verify {
            requirements,
            check,
            max_idle,
            depth_oracle,
            mutate,
            latency,
            nondet_discharge,
            nominal_speed,
            slow_speed,
            deadline_budget,
            timings,
        } => {
            let Some(check) = CheckSelection::parse(&check) else {
                eprintln!("error: unknown check `{check}`, expected all, refinement, deadlock or determinism");
                return ExitCode::from(2);
            };
            cmd_verify(&VerifyOptions {
                requirements_path: requirements,
                check,
                max_idle,
                depth_oracle,
                mutate,
                latency,
                nondet_discharge,
                nominal_speed,
                slow_speed,
                deadline_budget,
                timings,
            })
        }
        Command::Analyze {
            scenario,
            bounded,
            unbounded: _,
            sil,
            timings,
        } => cmd_analyze(&AnalyzeOptions {
            scenario_path: scenario,
            bounded,
            sil,
            timings,
        }),
        Command::Simulate {
            scenario,
            runs,
            horizon,
            seed,
            jobs,
            timings,
        } => cmd_simulate(&SimulateOptions {
            scenario_path: scenario,
            runs,
            horizon,
            seed,
            jobs: jobs.unwrap_or_else(default_jobs),
            timings,
        }),
        Command::Monitor {
            requirements,
            trace,
            near_miss,
            timings,
        } => cmd_monitor(&MonitorOptions {
            requirements_path: requirements,
            trace_path: trace,
            near_miss,
            timings,
        }),
    };

    print!("{}", outcome.stdout);
    eprint!("{}", outcome.stderr);
    ExitCode::from(outcome.code as u8)
}
