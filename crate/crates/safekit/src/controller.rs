//! Executable model of the safety controller: dispatcher plus UVC, speed and
//! sound machines collapsed into one composite state, with a pure step
//! function and explicit-state LTS generation under a constrained input
//! environment (detections separated by at least one tick).
//!
//! Dispatch latency is charged to the obligation budget: a detection queues
//! its mitigation set as pending obligations, and the scheduling policy
//! discharges them `discharge_latency` ticks later (default 1, within the
//! 2-tick budget). Emitted actions update the mode fields monotonically; only
//! `Clear` de-escalates.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::domain::{required_actions_with, row_of, Action, Detection, Event, TableRow};

/// Tuning knobs of the controller model.
///
/// `drop_action` removes one mitigation from one requirement-table row and
/// exists for mutation testing of the verifier. `discharge_latency` selects
/// the scheduling policy: obligations queued by a detection are emitted on
/// the `discharge_latency`-th tick after queueing (0 = in the same instant).
/// `nondeterministic_discharge` makes the discharging step order the emitted
/// batch arbitrarily instead of canonically, which the determinism check is
/// expected to flag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControllerConfig {
    pub nominal_speed: u32,
    pub slow_speed: u32,
    pub deadline_budget: u32,
    pub discharge_latency: u32,
    pub nondeterministic_discharge: bool,
    pub drop_action: Option<(TableRow, Action)>,
    pub state_budget: usize,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        ControllerConfig {
            nominal_speed: 30,
            slow_speed: crate::domain::DEFAULT_SLOW_SPEED,
            deadline_budget: crate::domain::DEFAULT_DEADLINE,
            discharge_latency: 1,
            nondeterministic_discharge: false,
            drop_action: None,
            state_budget: 1 << 20,
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<(), ControllerError> {
        if self.slow_speed >= self.nominal_speed {
            return Err(ControllerError::InvalidConfig(format!(
                "slow_speed ({}) must be below nominal_speed ({})",
                self.slow_speed, self.nominal_speed
            )));
        }
        if self.deadline_budget < 1 {
            return Err(ControllerError::InvalidConfig(
                "deadline_budget must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Every action this controller can ever emit, mutations included.
    /// Used to widen the specification alphabet before refinement checking.
    pub fn action_alphabet(&self) -> BTreeSet<Action> {
        let mut alphabet = BTreeSet::from([
            Action::ActivateAlert(true),
            Action::ActivateAlert(false),
            Action::TurnUvc(false),
            Action::TurnUvc(true),
            Action::StopRobot,
            Action::SetSpeed(self.slow_speed),
            Action::SetSpeed(self.nominal_speed),
        ]);
        if let Some((_, dropped)) = self.drop_action {
            // The dropped action is never emitted, but keeping it in the
            // alphabet is harmless.
            alphabet.insert(dropped);
        }
        alphabet
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ControllerError {
    #[error("invalid controller configuration: {0}")]
    InvalidConfig(String),
    #[error("state-space budget exceeded: {reached} states explored")]
    StateBudgetExceeded { reached: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UvcMode {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MotionMode {
    Nominal,
    Slowed,
    Stopped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AlertMode {
    Silent,
    Alerting,
}

/// One queued mitigation obligation. `age` counts the ticks elapsed since
/// the triggering detection; `rank` is the escalation rank of the detection's
/// table row and drives the replacement policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PendingObligation {
    pub action: Action,
    pub age: u32,
    pub rank: u8,
}

impl PendingObligation {
    /// Deadline budget still available, saturating at zero.
    pub fn ticks_remaining(&self, cfg: &ControllerConfig) -> u32 {
        cfg.deadline_budget.saturating_sub(self.age)
    }
}

/// Composite state of the safety controller: the three mode machines, the
/// queued obligations, and the outbox of actions due to be emitted in the
/// current instant.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ControllerState {
    pub uvc_mode: UvcMode,
    pub motion_mode: MotionMode,
    pub alert_mode: AlertMode,
    pending: Vec<PendingObligation>,
    outbox: VecDeque<Action>,
}

impl ControllerState {
    pub fn pending(&self) -> &[PendingObligation] {
        &self.pending
    }

    pub fn outbox(&self) -> impl Iterator<Item = &Action> {
        self.outbox.iter()
    }

    pub fn is_quiescent(&self) -> bool {
        self.pending.is_empty() && self.outbox.is_empty()
    }

    fn normalize_pending(&mut self) {
        self.pending.sort_unstable();
        self.pending.dedup();
    }
}

impl fmt::Display for ControllerState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let uvc = match self.uvc_mode {
            UvcMode::On => "on",
            UvcMode::Off => "off",
        };
        let motion = match self.motion_mode {
            MotionMode::Nominal => "nominal",
            MotionMode::Slowed => "slowed",
            MotionMode::Stopped => "stopped",
        };
        let alert = match self.alert_mode {
            AlertMode::Silent => "silent",
            AlertMode::Alerting => "alerting",
        };
        write!(f, "uvc={uvc} motion={motion} alert={alert} pending=[")?;
        for (i, p) in self.pending.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}@{}", p.action, p.age)?;
        }
        write!(f, "] outbox=[")?;
        for (i, a) in self.outbox.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "]")
    }
}

/// Initial controller state: UVC on, nominal speed, silent, nothing pending
/// (treatment in progress).
pub fn init(cfg: &ControllerConfig) -> Result<ControllerState, ControllerError> {
    cfg.validate()?;
    Ok(ControllerState {
        uvc_mode: UvcMode::On,
        motion_mode: MotionMode::Nominal,
        alert_mode: AlertMode::Silent,
        pending: Vec::new(),
        outbox: VecDeque::new(),
    })
}

/// Mitigation set the controller queues for a detection, after applying the
/// mutation (if any).
fn required_for(d: Detection, cfg: &ControllerConfig) -> BTreeSet<Action> {
    let mut actions = required_actions_with(d, cfg.slow_speed);
    if let Some((row, dropped)) = cfg.drop_action {
        if row_of(d) == row {
            actions.remove(&dropped);
        }
    }
    actions
}

/// Mode update applied when an action is emitted. Escalations latch: speed
/// reductions never override a stop, and only the restoring actions issued on
/// `Clear` de-escalate.
fn apply_emitted_action(state: &mut ControllerState, a: Action, cfg: &ControllerConfig) {
    match a {
        Action::ActivateAlert(true) => state.alert_mode = AlertMode::Alerting,
        Action::ActivateAlert(false) => state.alert_mode = AlertMode::Silent,
        Action::TurnUvc(false) => state.uvc_mode = UvcMode::Off,
        Action::TurnUvc(true) => state.uvc_mode = UvcMode::On,
        Action::StopRobot => state.motion_mode = MotionMode::Stopped,
        Action::SetSpeed(v) => {
            if v == cfg.nominal_speed {
                state.motion_mode = MotionMode::Nominal;
            } else if state.motion_mode == MotionMode::Nominal {
                state.motion_mode = MotionMode::Slowed;
            }
            // A slow-down while already slowed or stopped leaves the mode
            // unchanged: the platform latches the stronger mitigation.
        }
    }
}

/// Actions that undo the currently active mitigations, in canonical order.
fn restoring_actions(state: &ControllerState, cfg: &ControllerConfig) -> Vec<Action> {
    let mut out = Vec::new();
    if state.alert_mode == AlertMode::Alerting {
        out.push(Action::ActivateAlert(false));
    }
    if state.uvc_mode == UvcMode::Off {
        out.push(Action::TurnUvc(true));
    }
    if state.motion_mode != MotionMode::Nominal {
        out.push(Action::SetSpeed(cfg.nominal_speed));
    }
    out
}

/// Remove from `pending` every obligation due for discharge and return the
/// discharged action batch in canonical order. Emitting an action discharges
/// every queued obligation demanding it.
fn discharge_due(state: &mut ControllerState, cfg: &ControllerConfig) -> Vec<Action> {
    let due: BTreeSet<Action> = state
        .pending
        .iter()
        .filter(|p| p.age >= cfg.discharge_latency)
        .map(|p| p.action)
        .collect();
    if !due.is_empty() {
        state.pending.retain(|p| !due.contains(&p.action));
    }
    due.into_iter().collect()
}

/// Apply an input event (`Tock`, `DetectionIn` or `Clear`) and fill the
/// outbox with whatever the scheduling policy discharges in this instant.
/// `ActionCall` inputs are echoes of controller output (e.g. when replaying a
/// recorded trace) and leave the state unchanged.
fn apply_input(state: &ControllerState, e: Event, cfg: &ControllerConfig) -> ControllerState {
    let mut next = state.clone();
    debug_assert!(next.outbox.is_empty(), "input while outputs still pending");
    match e {
        Event::Tock => {
            for p in &mut next.pending {
                p.age = (p.age + 1).min(cfg.discharge_latency);
            }
            let batch = discharge_due(&mut next, cfg);
            next.outbox.extend(batch);
        }
        Event::DetectionIn(d) => {
            let rank = row_of(d).rank();
            // A detection of strictly higher rank replaces queued lower-rank
            // obligations; equal or higher ranked ones are kept and tracked
            // independently.
            next.pending.retain(|p| p.rank >= rank);
            for action in required_for(d, cfg) {
                next.pending.push(PendingObligation {
                    action,
                    age: 0,
                    rank,
                });
            }
            next.normalize_pending();
            if cfg.discharge_latency == 0 {
                let batch = discharge_due(&mut next, cfg);
                next.outbox.extend(batch);
            }
        }
        Event::Clear => {
            next.pending.clear();
            next.outbox.extend(restoring_actions(&next, cfg));
        }
        Event::ActionCall(_) => {}
    }
    next
}

/// Pure step function: process one input event and return the successor
/// state together with the actions emitted in the same instant, in canonical
/// order. Identical `(state, event, config)` triples yield identical results.
pub fn step(
    state: &ControllerState,
    e: Event,
    cfg: &ControllerConfig,
) -> (ControllerState, Vec<Action>) {
    let mut next = apply_input(state, e, cfg);
    let mut emitted = Vec::with_capacity(next.outbox.len());
    while let Some(a) = next.outbox.pop_front() {
        apply_emitted_action(&mut next, a, cfg);
        emitted.push(a);
    }
    (next, emitted)
}

/// Explicit-state labelled transition system over the event alphabet.
#[derive(Debug, Clone)]
pub struct Lts {
    states: Vec<String>,
    initial: usize,
    transitions: Vec<(usize, Event, usize)>,
    alphabet: BTreeSet<Event>,
    // transitions sorted by source; offsets[s]..offsets[s+1] is s's range
    offsets: Vec<usize>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LtsError {
    #[error("transition ({0}, {1}, {2}) references a state out of range")]
    StateOutOfRange(usize, Event, usize),
    #[error("initial state {0} out of range")]
    InitialOutOfRange(usize),
    #[error("transition event {0} not in the declared alphabet")]
    EventOutsideAlphabet(Event),
    #[error("state {0} is not reachable from the initial state")]
    UnreachableState(usize),
}

impl Lts {
    /// Build an LTS from parts, checking index ranges, alphabet membership
    /// and reachability of every state.
    pub fn new(
        states: Vec<String>,
        initial: usize,
        mut transitions: Vec<(usize, Event, usize)>,
        alphabet: BTreeSet<Event>,
    ) -> Result<Self, LtsError> {
        let n = states.len();
        if initial >= n {
            return Err(LtsError::InitialOutOfRange(initial));
        }
        for &(s, e, t) in &transitions {
            if s >= n || t >= n {
                return Err(LtsError::StateOutOfRange(s, e, t));
            }
            if !alphabet.contains(&e) {
                return Err(LtsError::EventOutsideAlphabet(e));
            }
        }
        transitions.sort_unstable();
        transitions.dedup();

        let mut offsets = vec![0usize; n + 1];
        for &(s, _, _) in &transitions {
            offsets[s + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }

        let lts = Lts {
            states,
            initial,
            transitions,
            alphabet,
            offsets,
        };

        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([initial]);
        seen[initial] = true;
        while let Some(s) = queue.pop_front() {
            for &(_, _, t) in lts.outgoing(s) {
                if !seen[t] {
                    seen[t] = true;
                    queue.push_back(t);
                }
            }
        }
        if let Some(unreached) = seen.iter().position(|r| !r) {
            return Err(LtsError::UnreachableState(unreached));
        }
        Ok(lts)
    }

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

    pub fn state_label(&self, s: usize) -> &str {
        &self.states[s]
    }

    /// Outgoing transitions of `s`, sorted by event.
    pub fn outgoing(&self, s: usize) -> &[(usize, Event, usize)] {
        &self.transitions[self.offsets[s]..self.offsets[s + 1]]
    }

    pub fn transitions(&self) -> &[(usize, Event, usize)] {
        &self.transitions
    }

    /// Plain-text edge list, one `source event target` line per transition.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for &(s, e, t) in &self.transitions {
            out.push_str(&format!("{s} {e} {t}\n"));
        }
        out
    }
}

/// State of the input environment composed with the controller: whether a
/// detection is currently permitted (at least one tick since the last one)
/// and how many consecutive idle ticks have elapsed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct ComposedState {
    controller: ControllerState,
    input_ready: bool,
    idle_tocks: u32,
}

impl ComposedState {
    fn label(&self) -> String {
        format!(
            "{} ready={} idle={}",
            self.controller,
            if self.input_ready { 1 } else { 0 },
            self.idle_tocks
        )
    }
}

/// Enumerate the successors of a composed state. Output actions are urgent:
/// while the outbox is nonempty nothing else can happen.
fn composed_successors(
    s: &ComposedState,
    cfg: &ControllerConfig,
    max_idle: u32,
) -> Vec<(Event, ComposedState)> {
    let mut out = Vec::new();

    if let Some(&head) = s.controller.outbox.front() {
        let mut controller = s.controller.clone();
        controller.outbox.pop_front();
        apply_emitted_action(&mut controller, head, cfg);
        out.push((
            Event::ActionCall(head),
            ComposedState {
                controller,
                input_ready: s.input_ready,
                idle_tocks: s.idle_tocks,
            },
        ));
        return out;
    }

    // Tock: disabled only once the configured idle bound is reached with no
    // obligation in flight, which keeps depth-bounded trace sets meaningful.
    let quiescent = s.controller.pending.is_empty();
    if !quiescent || s.idle_tocks < max_idle {
        let next = apply_input(&s.controller, Event::Tock, cfg);
        let idle_tocks = if quiescent { s.idle_tocks + 1 } else { 0 };
        for controller in discharge_variants(next, cfg) {
            out.push((
                Event::Tock,
                ComposedState {
                    controller,
                    input_ready: true,
                    idle_tocks,
                },
            ));
        }
    }

    if s.input_ready {
        for d in Detection::all() {
            let next = apply_input(&s.controller, Event::DetectionIn(d), cfg);
            for controller in discharge_variants(next, cfg) {
                out.push((
                    Event::DetectionIn(d),
                    ComposedState {
                        controller,
                        input_ready: false,
                        idle_tocks: 0,
                    },
                ));
            }
        }
    }

    let next = apply_input(&s.controller, Event::Clear, cfg);
    out.push((
        Event::Clear,
        ComposedState {
            controller: next,
            input_ready: s.input_ready,
            idle_tocks: 0,
        },
    ));

    out
}

/// In the deterministic policy the outbox keeps its canonical order. The
/// nondeterministic variant resolves the emission order at the discharging
/// step, yielding one successor per permutation of the batch.
fn discharge_variants(state: ControllerState, cfg: &ControllerConfig) -> Vec<ControllerState> {
    if !cfg.nondeterministic_discharge || state.outbox.len() < 2 {
        return vec![state];
    }
    let batch: Vec<Action> = state.outbox.iter().copied().collect();
    permutations(&batch)
        .into_iter()
        .map(|order| {
            let mut v = state.clone();
            v.outbox = order.into();
            v
        })
        .collect()
}

fn permutations(items: &[Action]) -> Vec<Vec<Action>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (i, &head) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(i);
        for tail in permutations(&rest) {
            let mut perm = Vec::with_capacity(items.len());
            perm.push(head);
            perm.extend(tail);
            out.push(perm);
        }
    }
    out
}

/// Explore the reachable graph of the controller composed with the
/// constrained input environment: detections are separated by at least one
/// tick, and consecutive idle ticks are capped at `max_consecutive_idle_tocks`
/// so depth-bounded enumeration stays informative.
pub fn build_lts(
    cfg: &ControllerConfig,
    max_consecutive_idle_tocks: u32,
) -> Result<Lts, ControllerError> {
    cfg.validate()?;
    if max_consecutive_idle_tocks < cfg.deadline_budget {
        return Err(ControllerError::InvalidConfig(format!(
            "idle bound ({max_consecutive_idle_tocks}) must be at least the deadline budget ({})",
            cfg.deadline_budget
        )));
    }

    let root = ComposedState {
        controller: init(cfg)?,
        input_ready: true,
        idle_tocks: 0,
    };

    let mut index: HashMap<ComposedState, usize> = HashMap::new();
    let mut states = vec![root.label()];
    let mut order = vec![root.clone()];
    index.insert(root, 0);
    let mut transitions = Vec::new();
    let mut alphabet: BTreeSet<Event> = BTreeSet::new();

    let mut frontier = VecDeque::from([0usize]);
    while let Some(si) = frontier.pop_front() {
        let current = order[si].clone();
        for (event, succ) in composed_successors(&current, cfg, max_consecutive_idle_tocks) {
            alphabet.insert(event);
            let ti = match index.get(&succ) {
                Some(&ti) => ti,
                None => {
                    let ti = states.len();
                    if ti >= cfg.state_budget {
                        return Err(ControllerError::StateBudgetExceeded { reached: ti });
                    }
                    states.push(succ.label());
                    order.push(succ.clone());
                    index.insert(succ, ti);
                    frontier.push_back(ti);
                    ti
                }
            };
            transitions.push((si, event, ti));
        }
    }

    Lts::new(states, 0, transitions, alphabet).map_err(|e| {
        ControllerError::InvalidConfig(format!("internal LTS construction error: {e}"))
    })
}
