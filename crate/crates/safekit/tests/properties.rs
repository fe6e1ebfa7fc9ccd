//! Property-based tests for the toolkit's cross-cutting invariants.

use proptest::prelude::*;
use proptest::sample::subsequence;

use safekit::cli::{format_trace, parse_trace};
use safekit::controller::{build_lts, ControllerConfig};
use safekit::domain::{
    default_requirements, Action, Classification, Detection, Event, Requirement, TimedTrace,
    Trigger, Zone,
};
use safekit::rv::{run_offline, synthesize_monitor};
use safekit::spec_lang::{compile_spec_with_alphabet, spec_accepts, SpecAutomaton};
use safekit::spec_lang::{parse_requirements, pretty_print};
use safekit::stochastic::{
    build_dtmc, pfd_to_sil, prob_bounded_reach, Scenario, ROW_SUM_TOLERANCE,
};

fn arb_zone() -> impl Strategy<Value = Zone> {
    prop_oneof![Just(Zone::Green), Just(Zone::Yellow), Just(Zone::Red)]
}

fn arb_classification() -> impl Strategy<Value = Classification> {
    prop_oneof![
        Just(Classification::Trained),
        Just(Classification::Untrained)
    ]
}

fn arb_action() -> impl Strategy<Value = Action> {
    prop_oneof![
        any::<bool>().prop_map(Action::ActivateAlert),
        any::<bool>().prop_map(Action::TurnUvc),
        Just(Action::StopRobot),
        (0u32..100).prop_map(Action::SetSpeed),
    ]
}

fn arb_event() -> impl Strategy<Value = Event> {
    prop_oneof![
        Just(Event::Tock),
        (arb_classification(), arb_zone())
            .prop_map(|(c, z)| Event::DetectionIn(Detection::new(c, z))),
        arb_action().prop_map(Event::ActionCall),
        Just(Event::Clear),
    ]
}

/// Events restricted to the default specification alphabet.
fn arb_alphabet_event() -> impl Strategy<Value = Event> {
    prop_oneof![
        Just(Event::Tock),
        Just(Event::Clear),
        (arb_classification(), arb_zone())
            .prop_map(|(c, z)| Event::DetectionIn(Detection::new(c, z))),
        prop_oneof![
            Just(Action::ActivateAlert(true)),
            Just(Action::SetSpeed(10)),
            Just(Action::TurnUvc(false)),
            Just(Action::StopRobot),
        ]
        .prop_map(Event::ActionCall),
    ]
}

fn default_spec() -> SpecAutomaton {
    let cfg = ControllerConfig::default();
    compile_spec_with_alphabet(&default_requirements(), &cfg.action_alphabet()).unwrap()
}

proptest! {
    /// A written trace file re-parses to the identical trace.
    #[test]
    fn trace_file_round_trip(events in prop::collection::vec(arb_event(), 0..40)) {
        let trace = TimedTrace::new(events);
        let text = format_trace(&trace);
        prop_assert_eq!(parse_trace(&text).unwrap(), trace);
    }

    /// Acceptance is prefix-closed: accepted traces have accepted prefixes,
    /// and the first refusal permanently rejects all extensions.
    #[test]
    fn spec_acceptance_is_prefix_closed(events in prop::collection::vec(arb_alphabet_event(), 0..24)) {
        let spec = default_spec();
        let trace = TimedTrace::new(events.clone());
        let accepted = spec_accepts(&spec, &trace).unwrap();
        if accepted {
            for k in 0..events.len() {
                let prefix = TimedTrace::new(events[..k].to_vec());
                prop_assert_eq!(spec_accepts(&spec, &prefix), Ok(true));
            }
        } else {
            // Find the refusal point, then check every extension of it is
            // rejected as well.
            let mut reject_at = events.len();
            for k in 0..=events.len() {
                if spec_accepts(&spec, &TimedTrace::new(events[..k].to_vec())) == Ok(false) {
                    reject_at = k;
                    break;
                }
            }
            for k in reject_at..=events.len() {
                let prefix = TimedTrace::new(events[..k].to_vec());
                prop_assert_eq!(spec_accepts(&spec, &prefix), Ok(false));
            }
        }
    }

    /// Monitors report a violation exactly when the specification rejects
    /// the trace, on arbitrary streams over the default alphabet.
    #[test]
    fn monitors_agree_with_spec_on_random_traces(events in prop::collection::vec(arb_alphabet_event(), 0..24)) {
        let spec = default_spec();
        let trace = TimedTrace::new(events);
        let monitors = default_requirements().iter().map(synthesize_monitor).collect();
        let report = run_offline(monitors, &trace);
        let accepted = spec_accepts(&spec, &trace).unwrap();
        prop_assert_eq!(accepted, report.all_clean());
    }

    /// Controller-generated traces stay spec-accepted when action calls are
    /// permuted within their instant (between consecutive ticks).
    #[test]
    fn response_order_freedom(walk in prop::collection::vec(0usize..64, 1..24), swap in 0usize..32) {
        let cfg = ControllerConfig::default();
        let lts = build_lts(&cfg, 4).unwrap();
        let spec = default_spec();

        // Deterministic pseudo-random walk through the graph.
        let mut state = lts.initial();
        let mut events = Vec::new();
        for pick in walk {
            let out = lts.outgoing(state);
            if out.is_empty() { break; }
            let (_, e, t) = out[pick % out.len()];
            events.push(e);
            state = t;
        }
        let trace = TimedTrace::new(events.clone());
        prop_assert_eq!(spec_accepts(&spec, &trace), Ok(true), "controller trace rejected");

        // Swap one adjacent pair of action calls (same instant, no tick
        // between them) and re-check.
        let mut permuted = events;
        let candidates: Vec<usize> = permuted
            .windows(2)
            .enumerate()
            .filter(|(_, w)| {
                matches!((w[0], w[1]), (Event::ActionCall(_), Event::ActionCall(_)))
            })
            .map(|(i, _)| i)
            .collect();
        if !candidates.is_empty() {
            let i = candidates[swap % candidates.len()];
            permuted.swap(i, i + 1);
            prop_assert_eq!(
                spec_accepts(&spec, &TimedTrace::new(permuted)),
                Ok(true),
                "permuted controller trace rejected"
            );
        }
    }

    /// Verdicts latch: whatever happens after a violation, the monitor never
    /// reports clean again.
    #[test]
    fn monitor_verdicts_latch(
        prefix in prop::collection::vec(arb_alphabet_event(), 0..16),
        suffix in prop::collection::vec(arb_alphabet_event(), 0..16),
    ) {
        for r in default_requirements() {
            let mut m = synthesize_monitor(&r);
            for &e in &prefix {
                m.step(e);
            }
            if m.verdict().is_clean() {
                continue;
            }
            let violated = m.verdict().clone();
            for &e in &suffix {
                m.step(e);
                prop_assert_eq!(m.verdict(), &violated);
            }
        }
    }

    /// All constructed chains are stochastic and shrink exposure
    /// monotonically as detection improves.
    #[test]
    fn random_scenarios_are_stochastic_and_monotone(
        p_intrusion in 0.0f64..=1.0,
        p_detect in 0.0f64..=0.9,
        p_trained in 0.0f64..=1.0,
        transition in 1u32..4,
        treatment in 1u32..6,
        latency in 0u32..3,
    ) {
        let sc = Scenario {
            p_intrusion,
            p_detect,
            p_trained,
            transition_ticks: transition,
            treatment_ticks: treatment,
            mitigation_latency: latency,
        };
        let chain = build_dtmc(&sc).unwrap();
        for sum in chain.row_sums() {
            prop_assert!((sum - 1.0).abs() <= ROW_SUM_TOLERANCE);
        }

        let better = Scenario { p_detect: p_detect + 0.1, ..sc.clone() };
        let horizon = 60;
        let base = prob_bounded_reach(&chain, horizon);
        let improved = prob_bounded_reach(&build_dtmc(&better).unwrap(), horizon);
        prop_assert!(improved <= base + 1e-12, "better detection raised exposure");

        // Bounded reachability is monotone in the horizon.
        let shorter = prob_bounded_reach(&chain, horizon / 2);
        prop_assert!(shorter <= base + 1e-15);
    }

    /// Smaller failure probabilities never map to a lower integrity level.
    #[test]
    fn sil_mapping_is_monotone(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let (low, high) = if a <= b { (a, b) } else { (b, a) };
        let low_level = pfd_to_sil(low).unwrap();
        let high_level = pfd_to_sil(high).unwrap();
        prop_assert!(low_level.rank() >= high_level.rank());
    }

    /// Printing requirements and parsing them back is the identity, for any
    /// well-formed requirement set.
    #[test]
    fn requirement_round_trip(reqs in arb_requirements()) {
        let printed = pretty_print(&reqs);
        let reparsed = parse_requirements(&printed).unwrap();
        prop_assert_eq!(reqs, reparsed);
    }
}

/// Requirement sets with distinct triggers, nonempty response sets and small
/// deadlines — the shape the compiler accepts.
fn arb_requirements() -> impl Strategy<Value = Vec<Requirement>> {
    let triggers: Vec<(Option<Classification>, Option<Zone>)> = {
        let mut v = Vec::new();
        for human in [
            None,
            Some(Classification::Trained),
            Some(Classification::Untrained),
        ] {
            for zone in [None, Some(Zone::Green), Some(Zone::Yellow), Some(Zone::Red)] {
                v.push((human, zone));
            }
        }
        v
    };
    let actions = [
        Action::ActivateAlert(true),
        Action::ActivateAlert(false),
        Action::TurnUvc(true),
        Action::TurnUvc(false),
        Action::StopRobot,
        Action::SetSpeed(10),
        Action::SetSpeed(42),
    ];
    subsequence(triggers, 1..=4).prop_flat_map(move |chosen| {
        let n = chosen.len();
        let responses = prop::collection::vec(subsequence(actions.to_vec(), 1..=3), n);
        let deadlines = prop::collection::vec(0u32..5, n);
        (Just(chosen), responses, deadlines).prop_map(|(chosen, responses, deadlines)| {
            chosen
                .into_iter()
                .zip(responses)
                .zip(deadlines)
                .enumerate()
                .map(|(i, (((human, zone), resp), deadline))| {
                    Requirement::new(format!("r{i}"), Trigger::new(human, zone), resp, deadline)
                })
                .collect()
        })
    })
}
