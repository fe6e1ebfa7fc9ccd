//! Line-delimited trace files in the canonical event text: `tock`,
//! `detection <trained|untrained> <green|yellow|red>`,
//! `action <alert_on|alert_off|uvc_on|uvc_off|stop|set_speed N>`, `clear`.
//! `#` starts a comment; blank lines are ignored.

use thiserror::Error;

use crate::domain::{Action, Classification, Detection, Event, TimedTrace, Zone};

pub const TRACE_HEADER: &str = "# safekit trace v1";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TraceFileError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

fn bad(line: usize, message: impl Into<String>) -> TraceFileError {
    TraceFileError::Malformed {
        line,
        message: message.into(),
    }
}

fn parse_classification(line: usize, word: &str) -> Result<Classification, TraceFileError> {
    match word {
        "trained" => Ok(Classification::Trained),
        "untrained" => Ok(Classification::Untrained),
        other => Err(bad(
            line,
            format!("unknown classification `{other}`, expected trained or untrained"),
        )),
    }
}

fn parse_zone(line: usize, word: &str) -> Result<Zone, TraceFileError> {
    match word {
        "green" => Ok(Zone::Green),
        "yellow" => Ok(Zone::Yellow),
        "red" => Ok(Zone::Red),
        other => Err(bad(
            line,
            format!("unknown zone `{other}`, expected green, yellow or red"),
        )),
    }
}

fn parse_action(line: usize, words: &[&str]) -> Result<Action, TraceFileError> {
    match words {
        ["alert_on"] => Ok(Action::ActivateAlert(true)),
        ["alert_off"] => Ok(Action::ActivateAlert(false)),
        ["uvc_on"] => Ok(Action::TurnUvc(true)),
        ["uvc_off"] => Ok(Action::TurnUvc(false)),
        ["stop"] => Ok(Action::StopRobot),
        ["set_speed", value] => value
            .parse::<u32>()
            .map(Action::SetSpeed)
            .map_err(|_| bad(line, format!("invalid speed value `{value}`"))),
        other => Err(bad(
            line,
            format!(
                "unknown action `{}`, expected alert_on, alert_off, uvc_on, uvc_off, stop or set_speed N",
                other.join(" ")
            ),
        )),
    }
}

/// Parse one event line (comments already stripped, known nonempty).
fn parse_event(line: usize, text: &str) -> Result<Event, TraceFileError> {
    let words: Vec<&str> = text.split_whitespace().collect();
    match words.as_slice() {
        ["tock"] => Ok(Event::Tock),
        ["clear"] => Ok(Event::Clear),
        ["detection", class, zone] => Ok(Event::DetectionIn(Detection::new(
            parse_classification(line, class)?,
            parse_zone(line, zone)?,
        ))),
        ["detection", ..] => Err(bad(
            line,
            "detection takes exactly a classification and a zone",
        )),
        ["action", rest @ ..] => Ok(Event::ActionCall(parse_action(line, rest)?)),
        other => Err(bad(line, format!("unknown event `{}`", other.join(" ")))),
    }
}

/// Parse a trace file. Line numbers are 1-based and preserved in
/// diagnostics.
pub fn parse_trace(src: &str) -> Result<TimedTrace, TraceFileError> {
    let mut events = Vec::new();
    for (idx, raw) in src.lines().enumerate() {
        let line = idx + 1;
        let text = raw.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        events.push(parse_event(line, text)?);
    }
    Ok(TimedTrace::new(events))
}

/// Render a trace in the canonical file format, headed by the version
/// comment. The output re-parses to the identical trace.
pub fn format_trace(t: &TimedTrace) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for e in t.events() {
        out.push_str(&e.to_string());
        out.push('\n');
    }
    out
}
