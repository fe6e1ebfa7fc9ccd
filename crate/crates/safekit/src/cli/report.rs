//! Deterministic, diffable report records: a version header followed by
//! `key: value` lines in insertion order. Wall-clock timings are opt-in so
//! that default reports are byte-identical across runs.

use std::fmt::Display;

pub const REPORT_HEADER: &str = "# safekit-report v1";

#[derive(Debug, Clone)]
pub struct Report {
    lines: Vec<String>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        let mut report = Report { lines: Vec::new() };
        report.kv("tool", format!("safekit {}", env!("CARGO_PKG_VERSION")));
        report.kv("command", command);
        report
    }

    pub fn kv(&mut self, key: &str, value: impl Display) {
        self.lines.push(format!("{key}: {value}"));
    }

    /// A multi-line block, each line indented under its key.
    pub fn block(&mut self, key: &str, body: &str) {
        self.lines.push(format!("{key}:"));
        for line in body.lines() {
            self.lines.push(format!("  {line}"));
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::from(REPORT_HEADER);
        out.push('\n');
        for line in &self.lines {
            out.push_str(line);
            out.push('\n');
        }
        out
    }
}

/// FNV-1a 64-bit content digest, used to pin report inputs.
pub fn fnv1a_digest(bytes: &[u8]) -> String {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x100_0000_01b3;
    let mut hash = OFFSET;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(PRIME);
    }
    format!("fnv1a:{hash:016x}")
}
