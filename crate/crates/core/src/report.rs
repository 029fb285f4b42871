//! Structured pass/fail records.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Check {
    pub name: String,
    pub max_abs_err: f64,
    pub rel_err: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `max_abs_err <= tol`.
    pub fn absolute(name: impl Into<String>, max_abs_err: f64, scale: f64, tol: f64) -> Self {
        let rel_err = relative(max_abs_err, scale);
        Self { name: name.into(), max_abs_err, rel_err, tol, pass: max_abs_err <= tol }
    }

    /// Passes when `max_abs_err / scale <= tol`.
    pub fn relative(name: impl Into<String>, max_abs_err: f64, scale: f64, tol: f64) -> Self {
        let rel_err = relative(max_abs_err, scale);
        Self { name: name.into(), max_abs_err, rel_err, tol, pass: rel_err <= tol }
    }

    /// A qualitative condition; errors are recorded as 0 or 1.
    pub fn condition(name: impl Into<String>, ok: bool) -> Self {
        let e = if ok { 0.0 } else { 1.0 };
        Self { name: name.into(), max_abs_err: e, rel_err: e, tol: 0.0, pass: ok }
    }

    /// Passes when `value >= threshold`; the shortfall is recorded as the error.
    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        let short = (threshold - value).max(0.0);
        Self {
            name: name.into(),
            max_abs_err: short,
            rel_err: relative(short, threshold.abs()),
            tol: threshold,
            pass: value >= threshold,
        }
    }
}

fn relative(err: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        err / scale
    } else if err == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationReport {
    pub suite: String,
    pub checks: Vec<Check>,
    #[serde(default)]
    pub config_echo: serde_json::Value,
    /// Omitted unless timing was requested, so reports stay byte-stable.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
}

impl VerificationReport {
    pub fn new(suite: impl Into<String>) -> Self {
        Self { suite: suite.into(), checks: Vec::new(), config_echo: serde_json::Value::Null, wall_time: None }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_tracks_tolerance() {
        assert!(Check::absolute("a", 1e-13, 1.0, 1e-12).pass);
        assert!(!Check::absolute("a", 1e-11, 1.0, 1e-12).pass);
        assert!(Check::relative("r", 1e-3, 1e4, 1e-6).pass);
        assert!(!Check::relative("r", 1e-3, 0.0, 1e-6).pass);
        assert!(Check::at_least("o", 1.9, 1.8).pass);
        assert!(!Check::at_least("o", 1.7, 1.8).pass);
    }

    #[test]
    fn json_round_trip_and_strictness() {
        let mut r = VerificationReport::new("structure");
        r.push(Check::absolute("skew", 0.0, 1.0, 1e-12));
        let s = serde_json::to_string(&r).unwrap();
        assert!(!s.contains("wall_time"));
        let back: VerificationReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
        let bad = s.replacen("\"suite\"", "\"extra\":1,\"suite\"", 1);
        assert!(serde_json::from_str::<VerificationReport>(&bad).is_err());
    }
}
