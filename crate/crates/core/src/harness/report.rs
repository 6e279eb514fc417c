//! Machine-readable verification reports.

use std::path::Path;

use serde::Serialize;

use super::fit::DecayReport;
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// Passes when the value is at most the threshold.
    Upper,
    /// Passes when the value is at least the threshold.
    Lower,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub suite: String,
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub bound: Bound,
    pub pass: bool,
    pub note: Option<String>,
}

impl Check {
    pub fn upper(suite: &str, name: &str, value: f64, threshold: f64) -> Check {
        Check {
            suite: suite.into(),
            name: name.into(),
            value,
            threshold,
            bound: Bound::Upper,
            pass: value <= threshold,
            note: None,
        }
    }

    pub fn lower(suite: &str, name: &str, value: f64, threshold: f64) -> Check {
        Check {
            suite: suite.into(),
            name: name.into(),
            value,
            threshold,
            bound: Bound::Lower,
            pass: value >= threshold,
            note: None,
        }
    }

    /// A check that could not be evaluated; always failing.
    pub fn errored(suite: &str, name: &str, err: &dyn std::fmt::Display) -> Check {
        Check {
            suite: suite.into(),
            name: name.into(),
            value: f64::NAN,
            threshold: f64::NAN,
            bound: Bound::Upper,
            pass: false,
            note: Some(err.to_string()),
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Report {
    pub checks: Vec<Check>,
    pub decay: Vec<DecayReport>,
}

impl Report {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass) && self.decay.iter().all(|d| d.pass)
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
        self.decay.extend(other.decay);
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            pass: bool,
            checks: &'a [Check],
            decay: &'a [DecayReport],
        }
        serde_json::to_string_pretty(&Doc { pass: self.pass(), checks: &self.checks, decay: &self.decay })
            .expect("report serializes")
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    /// One line per entry.
    pub fn lines(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .checks
            .iter()
            .map(|c| {
                let op = if c.bound == Bound::Upper { "<=" } else { ">=" };
                format!(
                    "{} {}/{}: {:.3e} {op} {:.3e}{}",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.suite,
                    c.name,
                    c.value,
                    c.threshold,
                    c.note.as_ref().map(|n| format!(" ({n})")).unwrap_or_default()
                )
            })
            .collect();
        out.extend(self.decay.iter().map(|d| {
            format!(
                "{} decay/{}: fitted {:.4}, expected {:.4}, rel error {:.3} (tol {:.2})",
                if d.pass { "PASS" } else { "FAIL" },
                d.norm,
                d.fitted,
                d.expected,
                d.rel_error,
                d.tolerance
            )
        }));
        out
    }
}
