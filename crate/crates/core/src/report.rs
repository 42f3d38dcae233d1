use std::fmt;

use serde::Serialize;

/// Upper bound on failures kept verbatim; the total is still counted.
const KEPT_FAILURES: usize = 32;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub location: String,
    pub message: String,
}

/// Outcome of one verification suite over a finite window.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    pub suite: String,
    pub checked: usize,
    pub failure_count: usize,
    pub failures: Vec<Failure>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(suite: impl Into<String>) -> Self {
        Report {
            suite: suite.into(),
            checked: 0,
            failure_count: 0,
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failure_count == 0
    }

    /// Records one check; `ok == false` files a failure.
    pub fn check(&mut self, ok: bool, location: impl fmt::Display, message: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.fail(location, message());
        }
    }

    pub fn fail(&mut self, location: impl fmt::Display, message: impl Into<String>) {
        self.failure_count += 1;
        if self.failures.len() < KEPT_FAILURES {
            self.failures.push(Failure {
                location: location.to_string(),
                message: message.into(),
            });
        }
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn merge(&mut self, other: Report) {
        self.checked += other.checked;
        self.failure_count += other.failure_count;
        for f in other.failures {
            if self.failures.len() < KEPT_FAILURES {
                self.failures.push(f);
            }
        }
        self.notes.extend(other.notes);
    }

    pub fn has_failure_matching(&self, needle: &str) -> bool {
        self.failures.iter().any(|f| f.message.contains(needle))
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        write!(
            f,
            "{verdict} {} ({} checks, {} failures)",
            self.suite, self.checked, self.failure_count
        )?;
        for fl in &self.failures {
            write!(f, "\n  at {}: {}", fl.location, fl.message)?;
        }
        for n in &self.notes {
            write!(f, "\n  note: {n}")?;
        }
        Ok(())
    }
}
