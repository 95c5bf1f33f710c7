//! Verification reports.
//!
//! Each check records the target value next to the observed one, so a
//! report doubles as a self-documenting verification table.

use serde::{Deserialize, Serialize};

/// A single named check against a target value.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// Expected value of the checked quantity.
    pub target: f64,
    /// Worst observed value across all instances of the check.
    pub observed: f64,
    /// Maximum deviation from the target.
    pub deviation: f64,
    pub pass: bool,
}

/// A list of checks run at a common tolerance.
///
/// The report passes iff every deviation is within the tolerance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub tolerance: f64,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn new(tolerance: f64) -> Self {
        VerificationReport {
            tolerance,
            checks: Vec::new(),
        }
    }

    /// Record a check whose deviation is `|observed - target|`, judged
    /// against the report tolerance.
    pub fn check(&mut self, name: impl Into<String>, target: f64, observed: f64) {
        let deviation = (observed - target).abs();
        self.checks.push(Check {
            name: name.into(),
            target,
            observed,
            deviation,
            pass: deviation <= self.tolerance,
        });
    }

    /// Record a check with an explicit deviation and pass threshold,
    /// for one-sided criteria such as positivity slack.
    pub fn check_with(
        &mut self,
        name: impl Into<String>,
        target: f64,
        observed: f64,
        deviation: f64,
        threshold: f64,
    ) {
        self.checks.push(Check {
            name: name.into(),
            target,
            observed,
            deviation,
            pass: deviation <= threshold,
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Largest deviation over all checks.
    pub fn worst_deviation(&self) -> f64 {
        self.checks.iter().map(|c| c.deviation).fold(0.0, f64::max)
    }

    pub fn find(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn merge(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
    }

    /// Render as a fixed-order CSV table (name, target, observed,
    /// deviation, pass).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,target,observed,deviation,pass\n");
        for c in &self.checks {
            out.push_str(&format!(
                "{},{:.17e},{:.17e},{:.17e},{}\n",
                c.name, c.target, c.observed, c.deviation, c.pass
            ));
        }
        out
    }

    /// Render as a Markdown table for human consumption.
    pub fn to_markdown(&self) -> String {
        let mut out = String::from("| check | target | observed | deviation | pass |\n");
        out.push_str("|---|---|---|---|---|\n");
        for c in &self.checks {
            out.push_str(&format!(
                "| {} | {:.12} | {:.12} | {:.3e} | {} |\n",
                c.name,
                c.target,
                c.observed,
                c.deviation,
                if c.pass { "yes" } else { "NO" }
            ));
        }
        out.push_str(&format!(
            "\ntolerance {:.3e}; overall: {}\n",
            self.tolerance,
            if self.passed() { "PASS" } else { "FAIL" }
        ));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_iff_all_deviations_within_tolerance() {
        let mut r = VerificationReport::new(1e-9);
        r.check("a", 1.0, 1.0 + 5e-10);
        assert!(r.passed());
        r.check("b", 0.5, 0.5 + 2e-9);
        assert!(!r.passed());
        assert_eq!(r.checks.len(), 2);
        assert!(r.worst_deviation() >= 2e-9 - 1e-15);
    }

    #[test]
    fn one_sided_check_uses_explicit_threshold() {
        let mut r = VerificationReport::new(1e-9);
        let min_eig = -5e-11;
        r.check_with("positivity", 0.0, min_eig, (-min_eig).max(0.0), 1e-10);
        assert!(r.passed());
    }
}
