//! Reporting helpers for the acceptance harness: each criterion collects
//! named checks and prints one PASS/FAIL line.

use std::fmt::Write as _;
use std::time::Instant;

#[derive(Debug, Clone)]
pub struct Check {
    pub label: String,
    pub ok: bool,
    pub detail: String,
}

#[derive(Debug)]
pub struct Criterion {
    pub id: u32,
    pub title: &'static str,
    pub checks: Vec<Check>,
    started: Instant,
}

impl Criterion {
    pub fn new(id: u32, title: &'static str) -> Self {
        Self {
            id,
            title,
            checks: Vec::new(),
            started: Instant::now(),
        }
    }

    pub fn check(&mut self, label: impl Into<String>, ok: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            label: label.into(),
            ok,
            detail: detail.into(),
        });
    }

    /// Records `value <= bound`.
    pub fn at_most(&mut self, label: impl Into<String>, value: f64, bound: f64) {
        self.check(label, value <= bound, format!("{value:.3e} <= {bound:.0e}"));
    }

    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.ok)
    }

    pub fn elapsed(&self) -> f64 {
        self.started.elapsed().as_secs_f64()
    }

    /// `PASS criterion N: title [label: detail; ...] (t s)`, failing checks first.
    pub fn line(&self) -> String {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let mut out = format!("{verdict} criterion {}: {}", self.id, self.title);
        let mut ordered: Vec<&Check> = self.checks.iter().filter(|c| !c.ok).collect();
        ordered.extend(self.checks.iter().filter(|c| c.ok));
        let parts: Vec<String> = ordered
            .iter()
            .map(|c| {
                let mark = if c.ok { "" } else { "FAILED " };
                format!("{mark}{}: {}", c.label, c.detail)
            })
            .collect();
        let _ = write!(out, " [{}] ({:.1} s)", parts.join("; "), self.elapsed());
        out
    }
}
