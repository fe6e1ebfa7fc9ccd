//! Cross-validate the exact probability engine by simulation: run seeded
//! Monte Carlo episodes of the example scenario and compare the estimate
//! with the exact bounded value.
//!
//! ```bash
//! cargo run -p safekit --example monte_carlo_validation
//! ```

use safekit::stochastic::{build_dtmc, monte_carlo, prob_bounded_reach, Scenario};

fn main() {
    let scenario = Scenario::example();
    let horizon = 100;
    let exact = prob_bounded_reach(&build_dtmc(&scenario).expect("valid"), horizon);
    println!("exact P(exposure within {horizon} ticks) = {exact:.6e}\n");

    for seed in [1, 2, 3] {
        let est = monte_carlo(&scenario, 100_000, horizon, seed).expect("valid run");
        let sigmas = if est.stderr > 0.0 {
            (est.estimate - exact).abs() / est.stderr
        } else {
            0.0
        };
        println!(
            "seed {seed}: estimate {:.6e} +/- {:.2e}  ({:} exposures in {} runs, {sigmas:.2} sigma off)",
            est.estimate, est.stderr, est.exposures, est.runs
        );
    }
}
