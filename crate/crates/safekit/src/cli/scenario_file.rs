//! Key-value scenario files: one `key = value` pair per line, `#` comments.
//! All six keys are required; unknown and duplicate keys are rejected.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::stochastic::Scenario;

pub const SCENARIO_HEADER: &str = "# safekit scenario v1";

const KEYS: [&str; 6] = [
    "p_intrusion",
    "p_detect",
    "p_trained",
    "transition_ticks",
    "treatment_ticks",
    "mitigation_latency",
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScenarioFileError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("missing key `{key}`")]
    MissingKey { key: String },
}

pub fn parse_scenario(src: &str) -> Result<Scenario, ScenarioFileError> {
    let mut values: BTreeMap<String, f64> = BTreeMap::new();
    for (idx, raw) in src.lines().enumerate() {
        let line = idx + 1;
        let text = raw.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let Some((key, value)) = text.split_once('=') else {
            return Err(ScenarioFileError::Malformed {
                line,
                message: format!("expected `key = value`, found `{text}`"),
            });
        };
        let key = key.trim();
        let value = value.trim();
        if !KEYS.contains(&key) {
            return Err(ScenarioFileError::Malformed {
                line,
                message: format!("unknown key `{key}`"),
            });
        }
        if values.contains_key(key) {
            return Err(ScenarioFileError::Malformed {
                line,
                message: format!("duplicate key `{key}`"),
            });
        }
        let number: f64 = value.parse().map_err(|_| ScenarioFileError::Malformed {
            line,
            message: format!("invalid number `{value}` for `{key}`"),
        })?;
        values.insert(key.to_string(), number);
    }

    for key in KEYS {
        if !values.contains_key(key) {
            return Err(ScenarioFileError::MissingKey { key: key.into() });
        }
    }

    let tick_count = |key: &str, line_hint: &str| -> Result<u32, ScenarioFileError> {
        let v = values[key];
        if v < 0.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
            return Err(ScenarioFileError::Malformed {
                line: 0,
                message: format!("{line_hint} `{key}` must be a nonnegative integer, got {v}"),
            });
        }
        Ok(v as u32)
    };

    Ok(Scenario {
        p_intrusion: values["p_intrusion"],
        p_detect: values["p_detect"],
        p_trained: values["p_trained"],
        transition_ticks: tick_count("transition_ticks", "duration")?,
        treatment_ticks: tick_count("treatment_ticks", "duration")?,
        mitigation_latency: tick_count("mitigation_latency", "latency")?,
    })
}

pub fn format_scenario(sc: &Scenario) -> String {
    format!(
        "{SCENARIO_HEADER}\n\
         p_intrusion = {}\n\
         p_detect = {}\n\
         p_trained = {}\n\
         transition_ticks = {}\n\
         treatment_ticks = {}\n\
         mitigation_latency = {}\n",
        sc.p_intrusion,
        sc.p_detect,
        sc.p_trained,
        sc.transition_ticks,
        sc.treatment_ticks,
        sc.mitigation_latency
    )
}
