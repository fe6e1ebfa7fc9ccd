//! Mutation testing of the verifier: drop one mitigation action per
//! requirement row and confirm that refinement checking catches every
//! mutant with a counterexample ending in a detection of the mutated row.
//!
//! ```bash
//! cargo run -p safekit --example mutation_hunt
//! ```

use safekit::cli::Mutant;
use safekit::controller::{build_lts, ControllerConfig};
use safekit::domain::{default_requirements, Event};
use safekit::refinement::{check_traces_refinement, Verdict};
use safekit::spec_lang::compile_spec_with_alphabet;

fn main() {
    let mut caught = 0;
    for mutant in Mutant::all() {
        let mut cfg = ControllerConfig::default();
        mutant.apply(&mut cfg);

        let lts = build_lts(&cfg, 4).expect("mutant model is finite");
        let spec = compile_spec_with_alphabet(&default_requirements(), &cfg.action_alphabet())
            .expect("requirements compile");

        match check_traces_refinement(&lts, &spec).expect("alphabets match") {
            Verdict::Pass { .. } => println!("{:<28} NOT caught", mutant.name),
            Verdict::Fail(cex) => {
                caught += 1;
                let last_detection = cex
                    .rejected_trace()
                    .events()
                    .iter()
                    .rev()
                    .find_map(|e| match e {
                        Event::DetectionIn(d) => Some(format!("{d}")),
                        _ => None,
                    })
                    .unwrap_or_else(|| "none".into());
                println!(
                    "{:<28} caught: {} events, final detection `{last_detection}`",
                    mutant.name,
                    cex.rejected_trace().len(),
                );
            }
        }
    }
    println!("\n{caught}/5 mutants caught");
}
