//! The brute-force side of the verifier: enumerate every controller trace up
//! to a depth bound, replay each through the specification, and compare the
//! outcome with the product-based refinement verdict.
//!
//! ```bash
//! cargo run -p safekit --example trace_oracle
//! ```

use safekit::controller::{build_lts, ControllerConfig};
use safekit::domain::default_requirements;
use safekit::refinement::{check_traces_refinement, oracle_refinement_check};
use safekit::spec_lang::compile_spec_with_alphabet;

fn main() {
    for latency in [1, 3] {
        let cfg = ControllerConfig {
            discharge_latency: latency,
            ..ControllerConfig::default()
        };
        let lts = build_lts(&cfg, 4).expect("model is finite");
        let spec = compile_spec_with_alphabet(&default_requirements(), &cfg.action_alphabet())
            .expect("requirements compile");

        let verdict = check_traces_refinement(&lts, &spec).expect("alphabets match");
        println!(
            "latency {latency}: product verdict = {}",
            if verdict.passed() { "pass" } else { "fail" }
        );

        for depth in [4, 6, 8] {
            let oracle = oracle_refinement_check(&lts, &spec, depth).expect("within budget");
            println!(
                "  depth {depth}: {} traces replayed, first rejection {}, agreement {}",
                oracle.traces_checked,
                match &oracle.first_rejected {
                    Some(t) => format!("after {} events", t.len()),
                    None => "none".to_string(),
                },
                if oracle.agrees_with(&verdict) {
                    "yes"
                } else {
                    "NO"
                }
            );
        }
    }
}
