//! Runtime verification: online monitors synthesized from requirements,
//! evaluating live or recorded event streams with latching verdicts and
//! mitigation trigger outputs.
//!
//! A monitor tracks one requirement. Matching detections open obligations,
//! action calls discharge them (one call discharges every obligation
//! demanding it), ticks drain their clocks. An obligation whose clock is
//! exhausted emits its unmet actions as triggers: as an imminent-violation
//! warning while the deadline instant lasts, and as a violation once another
//! tick passes. An obligation discharged with zero ticks to spare counts as a
//! near-miss.

use std::collections::BTreeSet;

use crate::domain::{Action, Event, Requirement, TimedTrace};

/// Latching verdict of a monitor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MonitorVerdict {
    Clean,
    Violated {
        /// Index (0-based) of the violating event in the observed stream.
        at_event: usize,
        requirement: String,
    },
}

impl MonitorVerdict {
    pub fn is_clean(&self) -> bool {
        matches!(self, MonitorVerdict::Clean)
    }
}

/// Output of one monitor step: the verdict after the event, plus any
/// mitigation actions recommended right now. `imminent` distinguishes an
/// expiring-deadline warning from an actual violation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonitorOutput {
    pub verdict: MonitorVerdict,
    pub triggers: BTreeSet<Action>,
    pub imminent: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct OpenObligation {
    remaining: BTreeSet<Action>,
    ticks_remaining: u32,
}

/// Online monitor for a single requirement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monitor {
    requirement: Requirement,
    open: Vec<OpenObligation>,
    verdict: MonitorVerdict,
    events_seen: usize,
    near_misses: usize,
    imminent_warnings: usize,
}

/// A fresh monitor for one requirement: no open obligations, verdict clean.
pub fn synthesize_monitor(r: &Requirement) -> Monitor {
    Monitor {
        requirement: r.clone(),
        open: Vec::new(),
        verdict: MonitorVerdict::Clean,
        events_seen: 0,
        near_misses: 0,
        imminent_warnings: 0,
    }
}

impl Monitor {
    pub fn requirement(&self) -> &Requirement {
        &self.requirement
    }

    pub fn verdict(&self) -> &MonitorVerdict {
        &self.verdict
    }

    pub fn near_misses(&self) -> usize {
        self.near_misses
    }

    pub fn imminent_warnings(&self) -> usize {
        self.imminent_warnings
    }

    pub fn open_obligations(&self) -> usize {
        self.open.len()
    }

    /// Process one event. Total over all events; a violated monitor keeps
    /// passing events through while its verdict stays latched.
    pub fn step(&mut self, event: Event) -> MonitorOutput {
        let index = self.events_seen;
        self.events_seen += 1;

        let mut triggers = BTreeSet::new();
        let mut violated_now = false;
        let mut imminent = false;

        match event {
            Event::DetectionIn(d) => {
                if self.requirement.trigger.matches(d) && !self.requirement.responses.is_empty() {
                    self.open.push(OpenObligation {
                        remaining: self.requirement.responses.clone(),
                        ticks_remaining: self.requirement.deadline,
                    });
                }
            }
            Event::ActionCall(a) => {
                let mut kept = Vec::with_capacity(self.open.len());
                for mut ob in self.open.drain(..) {
                    ob.remaining.remove(&a);
                    if ob.remaining.is_empty() {
                        if ob.ticks_remaining == 0 {
                            self.near_misses += 1;
                        }
                    } else {
                        kept.push(ob);
                    }
                }
                self.open = kept;
            }
            Event::Tock => {
                let mut kept = Vec::with_capacity(self.open.len());
                for mut ob in self.open.drain(..) {
                    if ob.ticks_remaining == 0 {
                        // The clock would go below zero: this is the
                        // violation instant.
                        violated_now = true;
                        triggers.extend(ob.remaining.iter().copied());
                    } else {
                        ob.ticks_remaining -= 1;
                        if ob.ticks_remaining == 0 {
                            imminent = true;
                            triggers.extend(ob.remaining.iter().copied());
                        }
                        kept.push(ob);
                    }
                }
                self.open = kept;
            }
            Event::Clear => {
                self.open.clear();
            }
        }

        if violated_now {
            if self.verdict.is_clean() {
                self.verdict = MonitorVerdict::Violated {
                    at_event: index,
                    requirement: self.requirement.id.clone(),
                };
            }
            imminent = false;
        } else if imminent {
            self.imminent_warnings += 1;
        }

        MonitorOutput {
            verdict: self.verdict.clone(),
            triggers,
            imminent,
        }
    }
}

/// Final per-requirement outcome of an offline run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OfflineEntry {
    pub requirement_id: String,
    pub verdict: MonitorVerdict,
    pub near_misses: usize,
    pub imminent_warnings: usize,
}

/// One emitted trigger record: a monitor recommended mitigation actions at
/// a specific event, either as an imminent-violation warning or on the
/// violation itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriggerRecord {
    pub event_index: usize,
    pub requirement_id: String,
    pub imminent: bool,
    pub triggers: BTreeSet<Action>,
}

/// Per-requirement verdicts of a recorded trace, in requirement order, plus
/// the trigger records emitted along the way (ordered by event index, then
/// requirement order).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OfflineReport {
    pub entries: Vec<OfflineEntry>,
    pub records: Vec<TriggerRecord>,
}

impl OfflineReport {
    pub fn all_clean(&self) -> bool {
        self.entries.iter().all(|e| e.verdict.is_clean())
    }

    /// Earliest violation across all requirements: event index and
    /// requirement id.
    pub fn first_violation(&self) -> Option<(usize, &str)> {
        self.entries
            .iter()
            .filter_map(|e| match &e.verdict {
                MonitorVerdict::Violated { at_event, .. } => {
                    Some((*at_event, e.requirement_id.as_str()))
                }
                MonitorVerdict::Clean => None,
            })
            .min()
    }

    pub fn total_near_misses(&self) -> usize {
        self.entries.iter().map(|e| e.near_misses).sum()
    }
}

/// Evaluate a finite trace against a set of monitors: the fold of
/// [`Monitor::step`] over the trace, with near-miss accounting and trigger
/// records.
pub fn run_offline(mut monitors: Vec<Monitor>, trace: &TimedTrace) -> OfflineReport {
    let mut records = Vec::new();
    for (index, &event) in trace.events().iter().enumerate() {
        for m in &mut monitors {
            let out = m.step(event);
            if !out.triggers.is_empty() {
                records.push(TriggerRecord {
                    event_index: index,
                    requirement_id: m.requirement.id.clone(),
                    imminent: out.imminent,
                    triggers: out.triggers,
                });
            }
        }
    }
    OfflineReport {
        entries: monitors
            .into_iter()
            .map(|m| OfflineEntry {
                requirement_id: m.requirement.id.clone(),
                verdict: m.verdict,
                near_misses: m.near_misses,
                imminent_warnings: m.imminent_warnings,
            })
            .collect(),
        records,
    }
}
