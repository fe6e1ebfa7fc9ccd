//! Core vocabulary shared by every other module: proximity zones, human
//! classifications, detections, mitigation actions, timed events, and the
//! requirement table that maps each detection to the mitigations it demands.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// Proximity zone of a detected human, ordered by severity: `Green < Yellow < Red`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Zone {
    Green,
    Yellow,
    Red,
}

impl Zone {
    pub const ALL: [Zone; 3] = [Zone::Green, Zone::Yellow, Zone::Red];
}

impl fmt::Display for Zone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Zone::Green => write!(f, "green"),
            Zone::Yellow => write!(f, "yellow"),
            Zone::Red => write!(f, "red"),
        }
    }
}

/// Human classification, ordered by risk: a trained human triggers
/// equal-or-weaker mitigation than an untrained one in every zone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Classification {
    Trained,
    Untrained,
}

impl Classification {
    pub const ALL: [Classification; 2] = [Classification::Trained, Classification::Untrained];
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Classification::Trained => write!(f, "trained"),
            Classification::Untrained => write!(f, "untrained"),
        }
    }
}

/// A classified perception event: one classification paired with one zone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Detection {
    pub human: Classification,
    pub zone: Zone,
}

impl Detection {
    pub fn new(human: Classification, zone: Zone) -> Self {
        Detection { human, zone }
    }

    /// All six detection values, in canonical order.
    pub fn all() -> impl Iterator<Item = Detection> {
        Classification::ALL.into_iter().flat_map(|human| {
            Zone::ALL
                .into_iter()
                .map(move |zone| Detection { human, zone })
        })
    }
}

impl fmt::Display for Detection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.human, self.zone)
    }
}

/// A mitigation call. `SetSpeed(0)` is a speed command like any other;
/// `StopRobot` is the dedicated halt operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    ActivateAlert(bool),
    TurnUvc(bool),
    StopRobot,
    SetSpeed(u32),
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::ActivateAlert(true) => write!(f, "alert_on"),
            Action::ActivateAlert(false) => write!(f, "alert_off"),
            Action::TurnUvc(true) => write!(f, "uvc_on"),
            Action::TurnUvc(false) => write!(f, "uvc_off"),
            Action::StopRobot => write!(f, "stop"),
            Action::SetSpeed(v) => write!(f, "set_speed {v}"),
        }
    }
}

/// One event of a timed trace. `Tock` is the only time-advancing event; all
/// others are instantaneous. `Clear` signals that the hazard has passed and
/// lets the controller and monitors de-escalate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Event {
    Tock,
    DetectionIn(Detection),
    ActionCall(Action),
    Clear,
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Tock => write!(f, "tock"),
            Event::DetectionIn(d) => write!(f, "detection {d}"),
            Event::ActionCall(a) => write!(f, "action {a}"),
            Event::Clear => write!(f, "clear"),
        }
    }
}

/// An alternating sequence of visible events and tick events; the object of
/// refinement. The type itself is permissive: traces read from files or live
/// streams may violate the sensing-interval assumption, and monitors must
/// still process them. Use [`TimedTrace::respects_input_separation`] to check
/// the assumption where it matters.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimedTrace(pub Vec<Event>);

impl TimedTrace {
    pub fn new(events: Vec<Event>) -> Self {
        TimedTrace(events)
    }

    pub fn empty() -> Self {
        TimedTrace(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn events(&self) -> &[Event] {
        &self.0
    }

    pub fn push(&mut self, e: Event) {
        self.0.push(e);
    }

    /// True iff at least one `Tock` separates any two `DetectionIn` events
    /// (the sensing-interval assumption placed on the environment).
    pub fn respects_input_separation(&self) -> bool {
        let mut seen_detection = false;
        for e in &self.0 {
            match e {
                Event::Tock => seen_detection = false,
                Event::DetectionIn(_) => {
                    if seen_detection {
                        return false;
                    }
                    seen_detection = true;
                }
                _ => {}
            }
        }
        true
    }
}

impl fmt::Display for TimedTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl FromIterator<Event> for TimedTrace {
    fn from_iter<I: IntoIterator<Item = Event>>(iter: I) -> Self {
        TimedTrace(iter.into_iter().collect())
    }
}

/// Trigger predicate of a requirement: conjunction of an optional
/// classification equality and an optional zone equality. `None` matches any
/// value of that component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Trigger {
    pub human: Option<Classification>,
    pub zone: Option<Zone>,
}

impl Trigger {
    pub fn new(human: Option<Classification>, zone: Option<Zone>) -> Self {
        Trigger { human, zone }
    }

    pub fn matches(&self, d: Detection) -> bool {
        self.human.is_none_or(|h| h == d.human) && self.zone.is_none_or(|z| z == d.zone)
    }
}

/// A bounded-response safety requirement: when a detection matching `trigger`
/// occurs, every action in `responses` must follow within `deadline` ticks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Requirement {
    pub id: String,
    pub trigger: Trigger,
    pub responses: BTreeSet<Action>,
    pub deadline: u32,
}

impl Requirement {
    pub fn new(
        id: impl Into<String>,
        trigger: Trigger,
        responses: impl IntoIterator<Item = Action>,
        deadline: u32,
    ) -> Self {
        Requirement {
            id: id.into(),
            trigger,
            responses: responses.into_iter().collect(),
            deadline,
        }
    }
}

/// Identifies a row of the requirement table. Every detection value matches
/// exactly one row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TableRow {
    R1,
    R2,
    R3,
    R4,
    R5,
}

impl TableRow {
    pub const ALL: [TableRow; 5] = [
        TableRow::R1,
        TableRow::R2,
        TableRow::R3,
        TableRow::R4,
        TableRow::R5,
    ];

    pub fn id(self) -> &'static str {
        match self {
            TableRow::R1 => "R1",
            TableRow::R2 => "R2",
            TableRow::R3 => "R3",
            TableRow::R4 => "R4",
            TableRow::R5 => "R5",
        }
    }

    /// Escalation rank of the row's mitigation set: 0 = alert only,
    /// 1 = alert + slow down, 2 = UVC off + stop.
    pub fn rank(self) -> u8 {
        match self {
            TableRow::R1 => 0,
            TableRow::R2 | TableRow::R3 => 1,
            TableRow::R4 | TableRow::R5 => 2,
        }
    }
}

/// Default slow-down speed commanded by rows R2 and R3.
pub const DEFAULT_SLOW_SPEED: u32 = 10;

/// Default response deadline in ticks.
pub const DEFAULT_DEADLINE: u32 = 2;

/// The unique requirement-table row matching a detection.
pub fn row_of(d: Detection) -> TableRow {
    match (d.human, d.zone) {
        (Classification::Trained, Zone::Green) => TableRow::R1,
        (Classification::Untrained, Zone::Green) => TableRow::R2,
        (Classification::Trained, Zone::Yellow) => TableRow::R3,
        (Classification::Untrained, Zone::Yellow) => TableRow::R4,
        (_, Zone::Red) => TableRow::R5,
    }
}

/// Mitigation set of a table row, with a configurable slow-down speed.
pub fn row_actions(row: TableRow, slow_speed: u32) -> BTreeSet<Action> {
    match row {
        TableRow::R1 => BTreeSet::from([Action::ActivateAlert(true)]),
        TableRow::R2 | TableRow::R3 => {
            BTreeSet::from([Action::ActivateAlert(true), Action::SetSpeed(slow_speed)])
        }
        TableRow::R4 | TableRow::R5 => BTreeSet::from([Action::TurnUvc(false), Action::StopRobot]),
    }
}

/// The exact mitigation set demanded by a detection, using a configurable
/// slow-down speed.
pub fn required_actions_with(d: Detection, slow_speed: u32) -> BTreeSet<Action> {
    row_actions(row_of(d), slow_speed)
}

/// The exact mitigation set demanded by a detection. Total over all six
/// detection values; uses the default slow-down speed.
pub fn required_actions(d: Detection) -> BTreeSet<Action> {
    required_actions_with(d, DEFAULT_SLOW_SPEED)
}

/// The five requirements R1..R5 with a configurable slow-down speed. Their
/// triggers partition the six detection values.
pub fn default_requirements_with(slow_speed: u32) -> Vec<Requirement> {
    vec![
        Requirement::new(
            "R1",
            Trigger::new(Some(Classification::Trained), Some(Zone::Green)),
            row_actions(TableRow::R1, slow_speed),
            DEFAULT_DEADLINE,
        ),
        Requirement::new(
            "R2",
            Trigger::new(Some(Classification::Untrained), Some(Zone::Green)),
            row_actions(TableRow::R2, slow_speed),
            DEFAULT_DEADLINE,
        ),
        Requirement::new(
            "R3",
            Trigger::new(Some(Classification::Trained), Some(Zone::Yellow)),
            row_actions(TableRow::R3, slow_speed),
            DEFAULT_DEADLINE,
        ),
        Requirement::new(
            "R4",
            Trigger::new(Some(Classification::Untrained), Some(Zone::Yellow)),
            row_actions(TableRow::R4, slow_speed),
            DEFAULT_DEADLINE,
        ),
        Requirement::new(
            "R5",
            Trigger::new(None, Some(Zone::Red)),
            row_actions(TableRow::R5, slow_speed),
            DEFAULT_DEADLINE,
        ),
    ]
}

/// The five requirements R1..R5 with the default slow-down speed.
pub fn default_requirements() -> Vec<Requirement> {
    default_requirements_with(DEFAULT_SLOW_SPEED)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DomainError {
    #[error("unranked mitigation set: {{{}}}", format_action_set(.0))]
    UnrankedMitigationSet(BTreeSet<Action>),
}

fn format_action_set(actions: &BTreeSet<Action>) -> String {
    actions
        .iter()
        .map(|a| a.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Escalation rank of a mitigation set: 0 = alert only, 1 = alert + slow
/// down, 2 = UVC off + stop. Combinations outside the mitigation vocabulary
/// are rejected.
pub fn severity_rank(actions: &BTreeSet<Action>) -> Result<u8, DomainError> {
    let alert_on = actions.contains(&Action::ActivateAlert(true));
    let uvc_off = actions.contains(&Action::TurnUvc(false));
    let stop = actions.contains(&Action::StopRobot);
    let slow = actions.iter().any(|a| matches!(a, Action::SetSpeed(_)));

    match (alert_on, slow, uvc_off, stop, actions.len()) {
        (true, false, false, false, 1) => Ok(0),
        (true, true, false, false, 2) => Ok(1),
        (false, false, true, true, 2) => Ok(2),
        _ => Err(DomainError::UnrankedMitigationSet(actions.clone())),
    }
}
