//! Run the full assertion suite in-process: build the controller graph,
//! compile the default requirements, and check traces refinement, deadlock
//! freedom and determinism.
//!
//! ```bash
//! cargo run -p safekit --example verify_safety
//! ```

use safekit::controller::{build_lts, ControllerConfig};
use safekit::domain::default_requirements;
use safekit::refinement::{
    check_deadlock_freedom, check_determinism, check_traces_refinement, Verdict,
};
use safekit::spec_lang::compile_spec_with_alphabet;

fn describe(name: &str, verdict: &Verdict) {
    match verdict {
        Verdict::Pass {
            states_explored,
            transitions,
        } => println!("{name}: pass ({states_explored} states, {transitions} transitions)"),
        Verdict::Fail(cex) => {
            println!("{name}: FAIL");
            for event in cex.trace.events() {
                println!("    {event}");
            }
            if let Some(e) = cex.failing_event {
                println!("    --> refused: {e}");
            }
        }
    }
}

fn main() {
    let cfg = ControllerConfig::default();
    let lts = build_lts(&cfg, 4).expect("default model is finite");
    println!(
        "controller graph: {} states, {} transitions",
        lts.state_count(),
        lts.transition_count()
    );

    let spec = compile_spec_with_alphabet(&default_requirements(), &cfg.action_alphabet())
        .expect("default requirements compile");
    println!(
        "specification automaton: {} states, {} transitions",
        spec.state_count(),
        spec.transition_count()
    );

    describe(
        "traces refinement ",
        &check_traces_refinement(&lts, &spec).expect("alphabets are compatible"),
    );
    describe("deadlock freedom  ", &check_deadlock_freedom(&lts));
    describe("determinism       ", &check_determinism(&lts));

    println!("\nfirst edges of the graph (source event target):");
    for line in lts.to_edge_list().lines().take(5) {
        println!("  {line}");
    }
}
