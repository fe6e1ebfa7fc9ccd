//! Step the safety controller through a hazard episode by hand: a detection
//! queues its mitigations, the next tick discharges them, and a clear signal
//! restores nominal operation.
//!
//! ```bash
//! cargo run -p safekit --example controller_walkthrough
//! ```

use safekit::controller::{init, step, ControllerConfig};
use safekit::domain::{Classification, Detection, Event, Zone};

fn main() {
    let cfg = ControllerConfig::default();
    let mut state = init(&cfg).expect("default config is valid");
    println!("initial: {state}");

    let script = [
        Event::DetectionIn(Detection::new(Classification::Untrained, Zone::Yellow)),
        Event::Tock,
        Event::Tock,
        Event::Clear,
        Event::Tock,
        Event::DetectionIn(Detection::new(Classification::Trained, Zone::Green)),
        Event::Tock,
    ];

    for event in script {
        let (next, emitted) = step(&state, event, &cfg);
        print!("on {event}: ");
        if emitted.is_empty() {
            print!("(no emissions)");
        } else {
            let calls: Vec<String> = emitted.iter().map(|a| format!("{a}")).collect();
            print!("emits [{}]", calls.join(", "));
        }
        println!();
        println!("  -> {next}");
        state = next;
    }
}
