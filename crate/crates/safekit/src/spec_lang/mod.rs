//! Requirement language and the deterministic timed specification automaton
//! compiled from it.
//!
//! The automaton accepts exactly the timed traces in which every detection
//! matching a requirement trigger is followed by all of that requirement's
//! response calls, in any order, within the requirement's deadline (counted
//! in ticks). A deadline miss is represented as refusal: the violating trace
//! simply has no extension. All states are accepting, so acceptance is
//! prefix-closed, and action calls not demanded by any open obligation are
//! permitted — the specification is a safety envelope, not a full behavioural
//! description.

mod parser;

pub use parser::{parse_requirements, pretty_print, ParseError};

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::domain::{Action, Detection, Event, Requirement, TimedTrace};

/// Deadlines above this bound are rejected; every open deadline value is one
/// clock position, so large deadlines blow up the explicit state space.
pub const MAX_DEADLINE: u32 = 64;

/// Safety bound on the number of automaton states built during compilation.
const MAX_SPEC_STATES: usize = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CompileError {
    #[error("requirement `{id}` deadline {deadline} exceeds the clock bound {MAX_DEADLINE}")]
    DeadlineTooLarge { id: String, deadline: u32 },
    #[error("requirements `{first}` and `{second}` share a trigger but disagree on responses or deadline")]
    ConflictingTrigger { first: String, second: String },
    #[error("requirement `{id}` has an empty response list")]
    EmptyResponses { id: String },
    #[error("specification automaton exceeds {MAX_SPEC_STATES} states")]
    StateSpaceTooLarge,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpecError {
    #[error("event outside the specification alphabet: {0}")]
    EventOutsideAlphabet(Event),
}

/// Canonical specification state: for every response action some open
/// obligation still demands, the tightest remaining deadline.
///
/// Obligations from overlapping detections are tracked on independent
/// clocks, but one action call discharges every obligation demanding that
/// action, so each obligation is just a conjunction of per-action deadline
/// constraints and only the minimum per action is binding. Folding the
/// multiset of open obligations into these minima preserves the trace
/// language exactly while keeping the automaton small under arbitrary
/// detection interleavings.
type ObligationSet = BTreeMap<Action, u32>;

/// Deterministic timed safety acceptor over the event alphabet. Violation is
/// the absence of a transition; every state is accepting.
#[derive(Debug, Clone)]
pub struct SpecAutomaton {
    requirements: Vec<Requirement>,
    alphabet: BTreeSet<Event>,
    states: Vec<String>,
    initial: usize,
    transitions: HashMap<(usize, Event), usize>,
}

impl SpecAutomaton {
    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn alphabet(&self) -> &BTreeSet<Event> {
        &self.alphabet
    }

    pub fn requirements(&self) -> &[Requirement] {
        &self.requirements
    }

    pub fn state_label(&self, s: usize) -> &str {
        &self.states[s]
    }

    /// The unique successor of `state` on `event`, or `None` when the event
    /// is refused (a safety violation).
    pub fn next(&self, state: usize, event: Event) -> Option<usize> {
        self.transitions.get(&(state, event)).copied()
    }

    /// Events enabled in `state`, in canonical order.
    pub fn enabled(&self, state: usize) -> BTreeSet<Event> {
        self.alphabet
            .iter()
            .copied()
            .filter(|e| self.next(state, *e).is_some())
            .collect()
    }
}

fn obligation_label(obs: &ObligationSet) -> String {
    if obs.is_empty() {
        return "{}".to_string();
    }
    let parts: Vec<String> = obs
        .iter()
        .map(|(action, ticks)| format!("{action}@{ticks}"))
        .collect();
    format!("{{{}}}", parts.join(", "))
}

/// Successor obligation state for one event, or `None` when the event must
/// be refused.
fn obligations_after(
    obs: &ObligationSet,
    event: Event,
    reqs: &[Requirement],
) -> Option<ObligationSet> {
    match event {
        Event::Tock => {
            if obs.values().any(|&ticks| ticks == 0) {
                return None;
            }
            Some(obs.iter().map(|(&a, &t)| (a, t - 1)).collect())
        }
        Event::DetectionIn(d) => {
            let mut next = obs.clone();
            for r in reqs {
                if r.trigger.matches(d) {
                    for &action in &r.responses {
                        next.entry(action)
                            .and_modify(|t| *t = (*t).min(r.deadline))
                            .or_insert(r.deadline);
                    }
                }
            }
            Some(next)
        }
        Event::ActionCall(a) => {
            let mut next = obs.clone();
            next.remove(&a);
            Some(next)
        }
        Event::Clear => Some(ObligationSet::new()),
    }
}

/// Compile requirements into the specification automaton, adding
/// `extra_actions` to the alphabet as permitted-but-never-demanded events
/// (self loops). The implementation's whole action vocabulary must be in the
/// alphabet for refinement checking to be meaningful.
pub fn compile_spec_with_alphabet(
    reqs: &[Requirement],
    extra_actions: &BTreeSet<Action>,
) -> Result<SpecAutomaton, CompileError> {
    for r in reqs {
        if r.deadline > MAX_DEADLINE {
            return Err(CompileError::DeadlineTooLarge {
                id: r.id.clone(),
                deadline: r.deadline,
            });
        }
        if r.responses.is_empty() {
            return Err(CompileError::EmptyResponses { id: r.id.clone() });
        }
    }
    for (i, a) in reqs.iter().enumerate() {
        for b in &reqs[i + 1..] {
            if a.trigger == b.trigger && (a.responses != b.responses || a.deadline != b.deadline) {
                return Err(CompileError::ConflictingTrigger {
                    first: a.id.clone(),
                    second: b.id.clone(),
                });
            }
        }
    }

    let mut alphabet: BTreeSet<Event> = BTreeSet::from([Event::Tock, Event::Clear]);
    alphabet.extend(Detection::all().map(Event::DetectionIn));
    for r in reqs {
        alphabet.extend(r.responses.iter().map(|a| Event::ActionCall(*a)));
    }
    alphabet.extend(extra_actions.iter().map(|a| Event::ActionCall(*a)));

    let initial_obs = ObligationSet::new();
    let mut index: HashMap<ObligationSet, usize> = HashMap::new();
    let mut order: Vec<ObligationSet> = vec![initial_obs.clone()];
    let mut states = vec![obligation_label(&initial_obs)];
    index.insert(initial_obs, 0);
    let mut transitions = HashMap::new();

    let mut frontier = VecDeque::from([0usize]);
    while let Some(si) = frontier.pop_front() {
        let current = order[si].clone();
        for &event in &alphabet {
            let Some(succ) = obligations_after(&current, event, reqs) else {
                continue;
            };
            let ti = match index.get(&succ) {
                Some(&ti) => ti,
                None => {
                    let ti = states.len();
                    if ti >= MAX_SPEC_STATES {
                        return Err(CompileError::StateSpaceTooLarge);
                    }
                    states.push(obligation_label(&succ));
                    order.push(succ.clone());
                    index.insert(succ, ti);
                    frontier.push_back(ti);
                    ti
                }
            };
            transitions.insert((si, event), ti);
        }
    }

    Ok(SpecAutomaton {
        requirements: reqs.to_vec(),
        alphabet,
        states,
        initial: 0,
        transitions,
    })
}

/// Compile requirements into the specification automaton. The alphabet is
/// derived from the requirement responses alone; see
/// [`compile_spec_with_alphabet`] to widen it.
pub fn compile_spec(reqs: &[Requirement]) -> Result<SpecAutomaton, CompileError> {
    compile_spec_with_alphabet(reqs, &BTreeSet::new())
}

/// Trace membership in the specification language. Acceptance is
/// prefix-closed: `true` means every prefix of the trace is allowed.
pub fn spec_accepts(spec: &SpecAutomaton, trace: &TimedTrace) -> Result<bool, SpecError> {
    let mut state = spec.initial;
    for &event in trace.events() {
        if !spec.alphabet.contains(&event) {
            return Err(SpecError::EventOutsideAlphabet(event));
        }
        match spec.next(state, event) {
            Some(next) => state = next,
            None => return Ok(false),
        }
    }
    Ok(true)
}

/// Language equality of two deterministic safety automata over the same
/// alphabet, decided by a product walk comparing enabled-event sets.
pub fn same_language(a: &SpecAutomaton, b: &SpecAutomaton) -> bool {
    if a.alphabet != b.alphabet {
        return false;
    }
    let mut seen = BTreeSet::from([(a.initial, b.initial)]);
    let mut frontier = VecDeque::from([(a.initial, b.initial)]);
    while let Some((sa, sb)) = frontier.pop_front() {
        for &event in &a.alphabet {
            match (a.next(sa, event), b.next(sb, event)) {
                (Some(ta), Some(tb)) => {
                    if seen.insert((ta, tb)) {
                        frontier.push_back((ta, tb));
                    }
                }
                (None, None) => {}
                _ => return false,
            }
        }
    }
    true
}

impl fmt::Display for SpecAutomaton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "spec automaton: {} states, {} transitions, alphabet of {}",
            self.states.len(),
            self.transitions.len(),
            self.alphabet.len()
        )
    }
}
