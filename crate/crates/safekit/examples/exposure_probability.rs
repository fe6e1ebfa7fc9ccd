//! Quantitative analysis of the example scenario: build the synchronized
//! chain, compute bounded and unbounded exposure probabilities by two
//! independent routes, and map the result to a SIL band.
//!
//! ```bash
//! cargo run -p safekit --example exposure_probability
//! ```

use safekit::stochastic::{
    build_dtmc, pfd_to_sil, prob_bounded_reach, prob_reach, prob_reach_direct, Scenario,
};

fn main() {
    let scenario = Scenario::example();
    println!("scenario: {scenario:#?}");

    let chain = build_dtmc(&scenario).expect("scenario is valid");
    println!(
        "chain: {} states, {} transitions",
        chain.state_count(),
        chain.transition_count()
    );

    for k in [10, 50, 100, 500] {
        println!(
            "P(exposure within {k:>3} ticks) = {:.6e}",
            prob_bounded_reach(&chain, k)
        );
    }

    let vi = prob_reach(&chain).expect("value iteration converges");
    let direct = prob_reach_direct(&chain).expect("chain is solvable");
    println!(
        "P(exposure, unbounded)      = {:.6e}  (value iteration, residual {:.1e}, {} iterations)",
        vi.probability, vi.residual, vi.iterations
    );
    println!("P(exposure, unbounded)      = {direct:.6e}  (direct linear solve)");

    let sil = pfd_to_sil(vi.probability).expect("probability in range");
    println!("interpreted as PFD: {sil}");
}
