//! Runtime verification over recorded traces: synthesize one monitor per
//! requirement, replay a clean run and a fault-injected run, and show
//! verdicts, triggers and near-miss counts.
//!
//! ```bash
//! cargo run -p safekit --example live_monitoring
//! ```

use safekit::cli::parse_trace;
use safekit::domain::default_requirements;
use safekit::rv::{run_offline, synthesize_monitor, MonitorVerdict};

const CLEAN: &str = include_str!("../../../traces/clean.trace");
const FAULTY: &str = include_str!("../../../traces/r4_violation.trace");

fn main() {
    let reqs = default_requirements();

    for (name, source) in [("clean.trace", CLEAN), ("r4_violation.trace", FAULTY)] {
        let trace = parse_trace(source).expect("shipped traces parse");
        let monitors = reqs.iter().map(synthesize_monitor).collect();
        let report = run_offline(monitors, &trace);

        println!("{name} ({} events):", trace.len());
        for entry in &report.entries {
            match &entry.verdict {
                MonitorVerdict::Clean => println!(
                    "  {:<3} clean   near-misses={} imminent-warnings={}",
                    entry.requirement_id, entry.near_misses, entry.imminent_warnings
                ),
                MonitorVerdict::Violated { at_event, .. } => {
                    println!("  {:<3} VIOLATED at event {at_event}", entry.requirement_id)
                }
            }
        }
        match report.first_violation() {
            Some((at, id)) => println!("  => first violation: {id} at event {at}\n"),
            None => println!("  => all clean\n"),
        }
    }
}
