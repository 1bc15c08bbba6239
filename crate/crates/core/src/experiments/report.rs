use std::fmt::Write as _;

use serde::Serialize;

/// How `observed` is compared with `expected`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `|observed - expected| <= tolerance`.
    Within,
    /// `observed <= expected + tolerance`.
    AtMost,
    /// `observed > expected + tolerance`.
    Exceeds,
    /// Recorded for reference, always passes.
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub comparison: Comparison,
    pub expected: f64,
    pub observed: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, comparison: Comparison, expected: f64, observed: f64, tolerance: f64) -> Self {
        let pass = match comparison {
            Comparison::Within => (observed - expected).abs() <= tolerance,
            Comparison::AtMost => observed <= expected + tolerance,
            Comparison::Exceeds => observed > expected + tolerance,
            Comparison::Info => true,
        };
        Self { name: name.into(), comparison, expected, observed, tolerance, pass }
    }

    pub fn within(name: impl Into<String>, expected: f64, observed: f64, tolerance: f64) -> Self {
        Self::new(name, Comparison::Within, expected, observed, tolerance)
    }

    pub fn at_most(name: impl Into<String>, bound: f64, observed: f64, tolerance: f64) -> Self {
        Self::new(name, Comparison::AtMost, bound, observed, tolerance)
    }

    pub fn exceeds(name: impl Into<String>, bound: f64, observed: f64, tolerance: f64) -> Self {
        Self::new(name, Comparison::Exceeds, bound, observed, tolerance)
    }

    pub fn info(name: impl Into<String>, observed: f64) -> Self {
        Self::new(name, Comparison::Info, f64::NAN, observed, 0.0)
    }
}

/// Ordered list of checks from one verification suite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(suite: impl Into<String>, seed: u64) -> Self {
        Self { suite: suite.into(), seed, checks: Vec::new() }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        // NaN is not JSON; serde_json writes it as null
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned columns: status, name, comparison, expected, observed, tolerance.
    pub fn to_text(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(4).max(4);
        let mut out = String::new();
        let _ = writeln!(out, "suite {} (seed {})", self.suite, self.seed);
        let _ = writeln!(
            out,
            "{:<4}  {:<width$}  {:<7}  {:>14}  {:>14}  {:>11}",
            "ok", "name", "test", "expected", "observed", "tolerance"
        );
        for c in &self.checks {
            let kind = match c.comparison {
                Comparison::Within => "within",
                Comparison::AtMost => "at_most",
                Comparison::Exceeds => "exceeds",
                Comparison::Info => "info",
            };
            let _ = writeln!(
                out,
                "{:<4}  {:<width$}  {:<7}  {:>14.7e}  {:>14.7e}  {:>11.3e}",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                kind,
                c.expected,
                c.observed,
                c.tolerance
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparisons() {
        assert!(Check::within("a", 1.0, 1.05, 0.1).pass);
        assert!(!Check::within("a", 1.0, 1.2, 0.1).pass);
        assert!(Check::at_most("b", 1.0, 1.05, 0.1).pass);
        assert!(Check::at_most("b", 1.0, -5.0, 0.0).pass);
        assert!(!Check::exceeds("c", 0.3, 0.2, 0.0).pass);
        assert!(Check::info("d", 3.0).pass);
    }

    #[test]
    fn renders() {
        let mut r = Report::new("demo", 7);
        r.push(Check::within("slope", -1.0 / 3.0, -0.334, 0.02));
        r.push(Check::info("prefactor", 0.9));
        assert!(r.passed());
        let text = r.to_text();
        assert_eq!(text.lines().count(), 4);
        assert!(text.lines().nth(2).unwrap().starts_with("PASS  slope"));
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json["checks"][1]["expected"], serde_json::Value::Null);
    }
}
