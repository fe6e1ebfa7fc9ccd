//! Explicit-state verification of the controller LTS: timed traces
//! refinement against a specification automaton, deadlock freedom (including
//! timelock freedom) and determinism, each with counterexample extraction,
//! plus a brute-force trace enumeration oracle for cross-checking the
//! refinement verdict.

use std::collections::{BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::controller::Lts;
use crate::domain::{Event, TimedTrace};
use crate::spec_lang::{spec_accepts, SpecAutomaton, SpecError};

/// Default ceiling on the number of traces visited by enumeration-based
/// checks.
pub const TRACE_BUDGET: usize = 20_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RefinementError {
    #[error("implementation events missing from the specification alphabet: {}", format_events(.missing))]
    AlphabetMismatch { missing: Vec<Event> },
    #[error("trace enumeration budget exceeded after {reached} traces")]
    BudgetExceeded { reached: usize },
    #[error(transparent)]
    Spec(#[from] SpecError),
}

fn format_events(events: &[Event]) -> String {
    events
        .iter()
        .map(|e| e.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Why a check failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    /// The implementation can perform an event the specification refuses.
    RefusedEvent,
    /// A reachable state has no outgoing transition.
    Deadlock,
    /// A reachable state cannot reach a tick within `bound` non-tick steps.
    Timelock { bound: usize },
    /// Two distinct successors for the same event.
    Nondeterminism { first: usize, second: usize },
}

/// Counterexample evidence: a valid implementation trace leading to the
/// offending state, and (where applicable) the event that exposes the
/// violation there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub trace: TimedTrace,
    pub failing_event: Option<Event>,
    pub kind: ViolationKind,
}

impl Counterexample {
    /// The full rejected trace: the witness extended by the failing event.
    pub fn rejected_trace(&self) -> TimedTrace {
        let mut t = self.trace.clone();
        if let Some(e) = self.failing_event {
            t.push(e);
        }
        t
    }
}

/// Outcome of a verification check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pass {
        states_explored: usize,
        transitions: usize,
    },
    Fail(Box<Counterexample>),
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass { .. })
    }
}

/// Breadth-first parent chain reconstruction: events along the path from the
/// initial entry to `target`.
fn rebuild_trace(parents: &[Option<(usize, Event)>], mut target: usize) -> TimedTrace {
    let mut events = Vec::new();
    while let Some((p, e)) = parents[target] {
        events.push(e);
        target = p;
    }
    events.reverse();
    TimedTrace::new(events)
}

/// Timed traces refinement: `Pass` iff every trace of the implementation is
/// accepted by the specification, decided by breadth-first exploration of the
/// product of implementation and specification states. On failure the
/// returned counterexample is a shortest one, tie-broken by lexicographic
/// order on the rejected trace.
pub fn check_traces_refinement(
    implementation: &Lts,
    spec: &SpecAutomaton,
) -> Result<Verdict, RefinementError> {
    let missing: Vec<Event> = implementation
        .alphabet()
        .iter()
        .filter(|e| !spec.alphabet().contains(e))
        .copied()
        .collect();
    if !missing.is_empty() {
        return Err(RefinementError::AlphabetMismatch { missing });
    }

    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut parents: Vec<Option<(usize, Event)>> = vec![None];
    let mut pairs = vec![(implementation.initial(), spec.initial())];
    index.insert(pairs[0], 0);

    let mut transitions_explored = 0usize;
    let mut current_layer = vec![0usize];

    while !current_layer.is_empty() {
        let mut next_layer = Vec::new();
        // (product entry, refused event): all failures in this layer compete
        // for the lexicographically smallest rejected trace.
        let mut failures: Vec<(usize, Event)> = Vec::new();

        for &pi in &current_layer {
            let (is_, ss) = pairs[pi];
            for &(_, event, it) in implementation.outgoing(is_) {
                transitions_explored += 1;
                match spec.next(ss, event) {
                    Some(st) => {
                        if let std::collections::hash_map::Entry::Vacant(slot) =
                            index.entry((it, st))
                        {
                            let ni = pairs.len();
                            slot.insert(ni);
                            pairs.push((it, st));
                            parents.push(Some((pi, event)));
                            next_layer.push(ni);
                        }
                    }
                    None => failures.push((pi, event)),
                }
            }
        }

        if !failures.is_empty() {
            let best = failures
                .into_iter()
                .map(|(pi, event)| {
                    let trace = rebuild_trace(&parents, pi);
                    (trace, event)
                })
                .min_by(|a, b| {
                    let ra: Vec<Event> = a.0.events().iter().copied().chain([a.1]).collect();
                    let rb: Vec<Event> = b.0.events().iter().copied().chain([b.1]).collect();
                    ra.cmp(&rb)
                })
                .expect("nonempty failures");
            return Ok(Verdict::Fail(Box::new(Counterexample {
                trace: best.0,
                failing_event: Some(best.1),
                kind: ViolationKind::RefusedEvent,
            })));
        }

        current_layer = next_layer;
    }

    Ok(Verdict::Pass {
        states_explored: pairs.len(),
        transitions: transitions_explored,
    })
}

/// Shortest path (in events) from the initial state to each LTS state.
fn bfs_parents(lts: &Lts) -> Vec<Option<(usize, Event)>> {
    let mut parents: Vec<Option<(usize, Event)>> = vec![None; lts.state_count()];
    let mut seen = vec![false; lts.state_count()];
    seen[lts.initial()] = true;
    let mut queue = VecDeque::from([lts.initial()]);
    while let Some(s) = queue.pop_front() {
        for &(_, e, t) in lts.outgoing(s) {
            if !seen[t] {
                seen[t] = true;
                parents[t] = Some((s, e));
                queue.push_back(t);
            }
        }
    }
    parents
}

fn trace_to_state(lts: &Lts, parents: &[Option<(usize, Event)>], state: usize) -> TimedTrace {
    let mut events = Vec::new();
    let mut cur = state;
    while cur != lts.initial() {
        let (p, e) = parents[cur].expect("state reachable");
        events.push(e);
        cur = p;
    }
    events.reverse();
    TimedTrace::new(events)
}

/// Deadlock and timelock freedom: every reachable state has at least one
/// outgoing transition, and from every reachable state a tick is reachable
/// within `|states|` non-tick steps.
pub fn check_deadlock_freedom(lts: &Lts) -> Verdict {
    let parents = bfs_parents(lts);

    // Order candidate states by BFS distance so the reported state is a
    // nearest offender.
    let mut order: Vec<usize> = Vec::with_capacity(lts.state_count());
    {
        let mut queue = VecDeque::from([lts.initial()]);
        let mut seen = vec![false; lts.state_count()];
        seen[lts.initial()] = true;
        while let Some(s) = queue.pop_front() {
            order.push(s);
            for &(_, _, t) in lts.outgoing(s) {
                if !seen[t] {
                    seen[t] = true;
                    queue.push_back(t);
                }
            }
        }
    }

    for &s in &order {
        if lts.outgoing(s).is_empty() {
            return Verdict::Fail(Box::new(Counterexample {
                trace: trace_to_state(lts, &parents, s),
                failing_event: None,
                kind: ViolationKind::Deadlock,
            }));
        }
    }

    // Backward closure over non-tick edges from the states that can tick.
    let mut can_reach_tock = vec![false; lts.state_count()];
    let mut queue = VecDeque::new();
    for (s, reaches) in can_reach_tock.iter_mut().enumerate() {
        if lts.outgoing(s).iter().any(|&(_, e, _)| e == Event::Tock) {
            *reaches = true;
            queue.push_back(s);
        }
    }
    let mut reverse_non_tock: Vec<Vec<usize>> = vec![Vec::new(); lts.state_count()];
    for &(s, e, t) in lts.transitions() {
        if e != Event::Tock {
            reverse_non_tock[t].push(s);
        }
    }
    while let Some(s) = queue.pop_front() {
        for &p in &reverse_non_tock[s] {
            if !can_reach_tock[p] {
                can_reach_tock[p] = true;
                queue.push_back(p);
            }
        }
    }

    for &s in &order {
        if !can_reach_tock[s] {
            return Verdict::Fail(Box::new(Counterexample {
                trace: trace_to_state(lts, &parents, s),
                failing_event: None,
                kind: ViolationKind::Timelock {
                    bound: lts.state_count(),
                },
            }));
        }
    }

    Verdict::Pass {
        states_explored: lts.state_count(),
        transitions: lts.transition_count(),
    }
}

/// Transition-function determinism: at most one successor per (state, event)
/// pair. The controller LTS has no hidden events, so this coincides with the
/// usual failures-based notion on these models.
pub fn check_determinism(lts: &Lts) -> Verdict {
    let parents = bfs_parents(lts);
    let mut order: Vec<usize> = Vec::with_capacity(lts.state_count());
    {
        let mut queue = VecDeque::from([lts.initial()]);
        let mut seen = vec![false; lts.state_count()];
        seen[lts.initial()] = true;
        while let Some(s) = queue.pop_front() {
            order.push(s);
            for &(_, _, t) in lts.outgoing(s) {
                if !seen[t] {
                    seen[t] = true;
                    queue.push_back(t);
                }
            }
        }
    }

    for &s in &order {
        let out = lts.outgoing(s);
        for w in out.windows(2) {
            let (_, e1, t1) = w[0];
            let (_, e2, t2) = w[1];
            if e1 == e2 && t1 != t2 {
                return Verdict::Fail(Box::new(Counterexample {
                    trace: trace_to_state(lts, &parents, s),
                    failing_event: Some(e1),
                    kind: ViolationKind::Nondeterminism {
                        first: t1.min(t2),
                        second: t1.max(t2),
                    },
                }));
            }
        }
    }

    Verdict::Pass {
        states_explored: lts.state_count(),
        transitions: lts.transition_count(),
    }
}

/// Exactly all traces of the implementation of length at most `depth`,
/// including the empty trace. Fails once [`TRACE_BUDGET`] traces accumulate.
pub fn enumerate_traces(lts: &Lts, depth: usize) -> Result<BTreeSet<TimedTrace>, RefinementError> {
    enumerate_traces_bounded(lts, depth, TRACE_BUDGET)
}

/// [`enumerate_traces`] with an explicit trace budget.
pub fn enumerate_traces_bounded(
    lts: &Lts,
    depth: usize,
    budget: usize,
) -> Result<BTreeSet<TimedTrace>, RefinementError> {
    let mut out = BTreeSet::new();
    out.insert(TimedTrace::empty());
    let mut stack = vec![(lts.initial(), Vec::<Event>::new())];
    while let Some((state, prefix)) = stack.pop() {
        if prefix.len() == depth {
            continue;
        }
        for &(_, e, t) in lts.outgoing(state) {
            let mut next = prefix.clone();
            next.push(e);
            out.insert(TimedTrace::new(next.clone()));
            if out.len() > budget {
                return Err(RefinementError::BudgetExceeded { reached: out.len() });
            }
            stack.push((t, next));
        }
    }
    Ok(out)
}

/// Result of the brute-force refinement oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleCheck {
    /// Number of nonempty traces replayed through the specification.
    pub traces_checked: usize,
    /// First rejected trace met in depth-first canonical order, if any.
    pub first_rejected: Option<TimedTrace>,
}

impl OracleCheck {
    /// True iff the oracle outcome matches a refinement verdict.
    pub fn agrees_with(&self, verdict: &Verdict) -> bool {
        self.first_rejected.is_some() != verdict.passed()
    }
}

/// Brute-force oracle: walk every implementation trace up to `depth` and
/// replay each one through [`spec_accepts`] from scratch. Rejected traces are
/// not extended (acceptance is prefix-closed). Independent of the product
/// construction used by [`check_traces_refinement`].
pub fn oracle_refinement_check(
    lts: &Lts,
    spec: &SpecAutomaton,
    depth: usize,
) -> Result<OracleCheck, RefinementError> {
    let missing: Vec<Event> = lts
        .alphabet()
        .iter()
        .filter(|e| !spec.alphabet().contains(e))
        .copied()
        .collect();
    if !missing.is_empty() {
        return Err(RefinementError::AlphabetMismatch { missing });
    }

    let mut checked = 0usize;
    let mut first_rejected: Option<TimedTrace> = None;

    fn walk(
        lts: &Lts,
        spec: &SpecAutomaton,
        depth: usize,
        state: usize,
        prefix: &mut Vec<Event>,
        checked: &mut usize,
        first_rejected: &mut Option<TimedTrace>,
    ) -> Result<(), RefinementError> {
        if prefix.len() == depth {
            return Ok(());
        }
        for &(_, e, t) in lts.outgoing(state) {
            prefix.push(e);
            *checked += 1;
            if *checked > TRACE_BUDGET {
                return Err(RefinementError::BudgetExceeded { reached: *checked });
            }
            let trace = TimedTrace::new(prefix.clone());
            if spec_accepts(spec, &trace)? {
                walk(lts, spec, depth, t, prefix, checked, first_rejected)?;
            } else if first_rejected.is_none() {
                *first_rejected = Some(trace);
            }
            prefix.pop();
        }
        Ok(())
    }

    let mut prefix = Vec::new();
    walk(
        lts,
        spec,
        depth,
        lts.initial(),
        &mut prefix,
        &mut checked,
        &mut first_rejected,
    )?;

    Ok(OracleCheck {
        traces_checked: checked,
        first_rejected,
    })
}
