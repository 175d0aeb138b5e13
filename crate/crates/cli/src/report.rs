//! Run reports: metric values, threshold verdicts, rendering.

use std::fmt::Write as _;
use std::time::Duration;

use crate::config::Mode;

/// Pass direction of a metric threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// Pass when value <= threshold.
    AtMost,
    /// Pass when value >= threshold.
    AtLeast,
}

#[derive(Clone, Debug)]
pub struct MetricResult {
    pub name: &'static str,
    pub value: f64,
    pub threshold: Option<f64>,
    pub direction: Direction,
    pub pass: Option<bool>,
}

impl MetricResult {
    pub fn new(name: &'static str, value: f64, direction: Direction, threshold: Option<f64>) -> Self {
        let pass = threshold.map(|limit| match direction {
            Direction::AtMost => value <= limit,
            Direction::AtLeast => value >= limit,
        });
        Self {
            name,
            value,
            threshold,
            direction,
            pass,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub mode: Mode,
    pub fingerprint: String,
    pub metrics: Vec<MetricResult>,
    /// Free-form context lines (grid resolution, orbit counts, ...).
    pub notes: Vec<String>,
    pub wall: Duration,
}

impl RunReport {
    pub fn all_pass(&self) -> bool {
        self.metrics.iter().all(|m| m.pass != Some(false))
    }

    pub fn failing(&self) -> impl Iterator<Item = &MetricResult> {
        self.metrics.iter().filter(|m| m.pass == Some(false))
    }

    pub fn metric(&self, name: &str) -> Option<&MetricResult> {
        self.metrics.iter().find(|m| m.name == name)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "run report");
        let _ = writeln!(out, "  mode:        {}", self.mode.as_str());
        let _ = writeln!(out, "  fingerprint: {}", self.fingerprint);
        let _ = writeln!(out, "  wall clock:  {:.3} s", self.wall.as_secs_f64());
        for note in &self.notes {
            let _ = writeln!(out, "  {note}");
        }
        let _ = writeln!(out, "  metrics:");
        for m in &self.metrics {
            let verdict = match m.pass {
                Some(true) => "PASS",
                Some(false) => "FAIL",
                None => "",
            };
            let bound = match (m.threshold, m.direction) {
                (Some(t), Direction::AtMost) => format!("<= {t:.3e}"),
                (Some(t), Direction::AtLeast) => format!(">= {t:.3e}"),
                (None, _) => String::new(),
            };
            let _ = writeln!(
                out,
                "    {:<28} {:>14.6e}  {:<12} {}",
                m.name, m.value, bound, verdict
            );
        }
        out
    }
}

/// FNV-1a of arbitrary bytes rendered as 16 hex digits.
pub fn fnv1a64_hex(bytes: &[u8]) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds_decide_pass_fail() {
        let below = MetricResult::new("a", 0.5, Direction::AtMost, Some(1.0));
        assert_eq!(below.pass, Some(true));
        let above = MetricResult::new("a", 2.0, Direction::AtMost, Some(1.0));
        assert_eq!(above.pass, Some(false));
        let floor = MetricResult::new("b", -1e-9, Direction::AtLeast, Some(-1e-8));
        assert_eq!(floor.pass, Some(true));
        let unchecked = MetricResult::new("c", 42.0, Direction::AtMost, None);
        assert_eq!(unchecked.pass, None);
    }

    #[test]
    fn fingerprint_is_stable() {
        assert_eq!(fnv1a64_hex(b""), "cbf29ce484222325");
        assert_eq!(fnv1a64_hex(b"mode"), fnv1a64_hex(b"mode"));
        assert_ne!(fnv1a64_hex(b"a"), fnv1a64_hex(b"b"));
    }
}
