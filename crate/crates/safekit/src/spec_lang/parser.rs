//! Line-oriented parser for the textual requirement language.
//!
//! Grammar, one sentence per line (`#` starts a comment, blank lines are
//! ignored):
//!
//! ```text
//! REQ <id> : whenever detection ( human = <trained|untrained|any> ,
//!     zone = <green|yellow|red|any> ) then <action> [ and <action> ]*
//!     within <d> ticks
//! action := activate_alert | deactivate_alert | turn_uvc_on | turn_uvc_off
//!         | stop_robot | set_speed <n>
//! ```
//!
//! `zone = any` is accepted so that every in-memory requirement has a
//! printable form, even though the canonical requirement set always names a
//! concrete zone.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::domain::{Action, Classification, Requirement, Trigger, Zone};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}, column {column}: found `{found}`, expected {}", format_expected(.expected))]
    Syntax {
        line: usize,
        column: usize,
        found: String,
        expected: Vec<String>,
    },
    #[error("line {line}: duplicate requirement id `{id}`")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: requirement `{id}` has an empty response list")]
    EmptyResponses { line: usize, id: String },
}

fn format_expected(expected: &[String]) -> String {
    match expected {
        [] => "nothing".to_string(),
        [one] => format!("`{one}`"),
        many => format!(
            "one of {}",
            many.iter()
                .map(|t| format!("`{t}`"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Token {
    text: String,
    column: usize,
}

fn tokenize(line_no: usize, line: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let mut chars = line.char_indices().peekable();
    while let Some(&(pos, c)) = chars.peek() {
        match c {
            '#' => break,
            c if c.is_whitespace() => {
                chars.next();
            }
            '(' | ')' | ',' | ':' | '=' => {
                tokens.push(Token {
                    text: c.to_string(),
                    column: pos + 1,
                });
                chars.next();
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let start = pos;
                let mut text = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        text.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                tokens.push(Token {
                    text,
                    column: start + 1,
                });
            }
            other => {
                return Err(ParseError::Syntax {
                    line: line_no,
                    column: pos + 1,
                    found: other.to_string(),
                    expected: vec!["identifier".into(), "punctuation".into()],
                })
            }
        }
    }
    Ok(tokens)
}

struct LineParser {
    line: usize,
    tokens: Vec<Token>,
    pos: usize,
}

impl LineParser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let (found, column) = match self.peek() {
            Some(t) => (t.text.clone(), t.column),
            None => ("end of line".to_string(), self.end_column()),
        };
        ParseError::Syntax {
            line: self.line,
            column,
            found,
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn end_column(&self) -> usize {
        self.tokens
            .last()
            .map(|t| t.column + t.text.len())
            .unwrap_or(1)
    }

    fn expect(&mut self, keyword: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if t.text == keyword => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.error(&[keyword])),
        }
    }

    fn take_identifier(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(t)
                if t.text
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '_') =>
            {
                let text = t.text.clone();
                self.pos += 1;
                Ok(text)
            }
            _ => Err(self.error(&[what])),
        }
    }

    fn take_integer(&mut self, what: &str) -> Result<u32, ParseError> {
        match self.peek() {
            Some(t) => match t.text.parse::<u32>() {
                Ok(n) => {
                    self.pos += 1;
                    Ok(n)
                }
                Err(_) => Err(self.error(&[what])),
            },
            None => Err(self.error(&[what])),
        }
    }

    fn take_classification(&mut self) -> Result<Option<Classification>, ParseError> {
        let choice = match self.peek().map(|t| t.text.as_str()) {
            Some("trained") => Some(Classification::Trained),
            Some("untrained") => Some(Classification::Untrained),
            Some("any") => None,
            _ => return Err(self.error(&["trained", "untrained", "any"])),
        };
        self.pos += 1;
        Ok(choice)
    }

    fn take_zone(&mut self) -> Result<Option<Zone>, ParseError> {
        let choice = match self.peek().map(|t| t.text.as_str()) {
            Some("green") => Some(Zone::Green),
            Some("yellow") => Some(Zone::Yellow),
            Some("red") => Some(Zone::Red),
            Some("any") => None,
            _ => return Err(self.error(&["green", "yellow", "red", "any"])),
        };
        self.pos += 1;
        Ok(choice)
    }

    fn take_action(&mut self) -> Result<Action, ParseError> {
        const ACTIONS: [&str; 6] = [
            "activate_alert",
            "deactivate_alert",
            "turn_uvc_on",
            "turn_uvc_off",
            "stop_robot",
            "set_speed",
        ];
        let action = match self.peek().map(|t| t.text.as_str()) {
            Some("activate_alert") => Action::ActivateAlert(true),
            Some("deactivate_alert") => Action::ActivateAlert(false),
            Some("turn_uvc_on") => Action::TurnUvc(true),
            Some("turn_uvc_off") => Action::TurnUvc(false),
            Some("stop_robot") => Action::StopRobot,
            Some("set_speed") => {
                self.pos += 1;
                let value = self.take_integer("speed value")?;
                return Ok(Action::SetSpeed(value));
            }
            _ => return Err(self.error(&ACTIONS)),
        };
        self.pos += 1;
        Ok(action)
    }

    fn parse_requirement(&mut self) -> Result<Requirement, ParseError> {
        self.expect("REQ")?;
        let id = self.take_identifier("requirement id")?;
        self.expect(":")?;
        self.expect("whenever")?;
        self.expect("detection")?;
        self.expect("(")?;
        self.expect("human")?;
        self.expect("=")?;
        let human = self.take_classification()?;
        self.expect(",")?;
        self.expect("zone")?;
        self.expect("=")?;
        let zone = self.take_zone()?;
        self.expect(")")?;
        self.expect("then")?;

        let mut responses = BTreeSet::new();
        responses.insert(self.take_action()?);
        while self.peek().map(|t| t.text.as_str()) == Some("and") {
            self.pos += 1;
            responses.insert(self.take_action()?);
        }

        self.expect("within")?;
        let deadline = self.take_integer("tick count")?;
        self.expect("ticks")?;

        if let Some(extra) = self.peek() {
            return Err(ParseError::Syntax {
                line: self.line,
                column: extra.column,
                found: extra.text.clone(),
                expected: vec!["end of line".into()],
            });
        }

        Ok(Requirement {
            id,
            trigger: Trigger::new(human, zone),
            responses,
            deadline,
        })
    }
}

/// Parse a requirement file into requirements in source order. Ids must be
/// unique and every requirement must name at least one response.
pub fn parse_requirements(src: &str) -> Result<Vec<Requirement>, ParseError> {
    let mut reqs: Vec<Requirement> = Vec::new();
    for (idx, raw_line) in src.lines().enumerate() {
        let line_no = idx + 1;
        let tokens = tokenize(line_no, raw_line)?;
        if tokens.is_empty() {
            continue;
        }
        let mut parser = LineParser {
            line: line_no,
            tokens,
            pos: 0,
        };
        let req = parser.parse_requirement()?;
        if reqs.iter().any(|r| r.id == req.id) {
            return Err(ParseError::DuplicateId {
                line: line_no,
                id: req.id,
            });
        }
        if req.responses.is_empty() {
            return Err(ParseError::EmptyResponses {
                line: line_no,
                id: req.id,
            });
        }
        reqs.push(req);
    }
    Ok(reqs)
}

fn action_text(a: Action) -> String {
    match a {
        Action::ActivateAlert(true) => "activate_alert".into(),
        Action::ActivateAlert(false) => "deactivate_alert".into(),
        Action::TurnUvc(true) => "turn_uvc_on".into(),
        Action::TurnUvc(false) => "turn_uvc_off".into(),
        Action::StopRobot => "stop_robot".into(),
        Action::SetSpeed(v) => format!("set_speed {v}"),
    }
}

/// Render requirements back into the surface syntax accepted by
/// [`parse_requirements`].
pub fn pretty_print(reqs: &[Requirement]) -> String {
    let mut out = String::new();
    for r in reqs {
        let human = match r.trigger.human {
            Some(Classification::Trained) => "trained",
            Some(Classification::Untrained) => "untrained",
            None => "any",
        };
        let zone = match r.trigger.zone {
            Some(Zone::Green) => "green",
            Some(Zone::Yellow) => "yellow",
            Some(Zone::Red) => "red",
            None => "any",
        };
        let responses = r
            .responses
            .iter()
            .map(|a| action_text(*a))
            .collect::<Vec<_>>()
            .join(" and ");
        out.push_str(&format!(
            "REQ {} : whenever detection(human={human}, zone={zone}) then {responses} within {} ticks\n",
            r.id, r.deadline
        ));
    }
    out
}
