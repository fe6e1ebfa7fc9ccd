//! Parse a custom requirement file, compile it into a timed safety
//! automaton, and probe the automaton with accepted and rejected traces.
//!
//! ```bash
//! cargo run -p safekit --example requirements_language
//! ```

use safekit::domain::{Action, Classification, Detection, Event, TimedTrace, Zone};
use safekit::spec_lang::{compile_spec, parse_requirements, pretty_print, spec_accepts};

const SOURCE: &str = "\
# A stricter site policy: red-zone mitigation due within a single tick.
REQ strict : whenever detection(human=any, zone=red) then turn_uvc_off and stop_robot within 1 ticks
REQ greet : whenever detection(human=trained, zone=green) then activate_alert within 3 ticks
";

fn main() {
    let reqs = parse_requirements(SOURCE).expect("example source is well-formed");
    println!("parsed {} requirements:", reqs.len());
    print!("{}", pretty_print(&reqs));

    let spec = compile_spec(&reqs).expect("compiles");
    println!("\ncompiled: {spec}");

    let red = Event::DetectionIn(Detection::new(Classification::Untrained, Zone::Red));
    let quick = TimedTrace::new(vec![
        red,
        Event::ActionCall(Action::TurnUvc(false)),
        Event::ActionCall(Action::StopRobot),
        Event::Tock,
        Event::Tock,
    ]);
    let slow = TimedTrace::new(vec![red, Event::Tock, Event::Tock]);

    for (name, trace) in [("prompt mitigation", &quick), ("one tick too slow", &slow)] {
        let accepted = spec_accepts(&spec, trace).expect("trace within alphabet");
        println!("{name}: {}", if accepted { "accepted" } else { "rejected" });
    }
}
