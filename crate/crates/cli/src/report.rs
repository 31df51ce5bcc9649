use serde::Serialize;
use serde_json::Value;

use crate::plan::Format;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
    /// Only unasserted checks failed.
    #[serde(rename = "REPORTED")]
    Reported,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Reported => "REPORTED",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub asserted: bool,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct TaskOutcome {
    pub checks: Vec<Check>,
    pub certificates: Vec<Value>,
    pub witnesses: Vec<Value>,
    pub data: Value,
}

impl TaskOutcome {
    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.push(name, true, passed, detail);
    }

    pub fn note(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.push(name, false, passed, detail);
    }

    fn push(&mut self, name: impl Into<String>, asserted: bool, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            asserted,
            passed,
            detail: detail.into(),
        });
    }

    pub fn status(&self) -> Status {
        if self.checks.iter().any(|c| c.asserted && !c.passed) {
            Status::Fail
        } else if self.checks.iter().any(|c| !c.passed) {
            Status::Reported
        } else {
            Status::Pass
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TaskReport {
    pub index: usize,
    pub kind: String,
    pub params: Value,
    pub status: Status,
    pub checks: Vec<Check>,
    pub certificates: Vec<Value>,
    pub witnesses: Vec<Value>,
    pub data: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub passed: bool,
    pub asserted_failures: usize,
    pub tasks: Vec<TaskReport>,
}

impl Report {
    pub fn new(tasks: Vec<TaskReport>) -> Report {
        let asserted_failures = tasks
            .iter()
            .flat_map(|t| &t.checks)
            .filter(|c| c.asserted && !c.passed)
            .count();
        Report {
            passed: asserted_failures == 0,
            asserted_failures,
            tasks,
        }
    }

    pub fn exit_code(&self) -> i32 {
        i32::from(!self.passed)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One row per check.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["task", "kind", "status", "check", "asserted", "passed", "detail"])
            .expect("in-memory write");
        for t in &self.tasks {
            for c in &t.checks {
                w.write_record([
                    t.index.to_string(),
                    t.kind.clone(),
                    t.status.label().to_string(),
                    c.name.clone(),
                    c.asserted.to_string(),
                    c.passed.to_string(),
                    c.detail.clone(),
                ])
                .expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let width = self
            .tasks
            .iter()
            .flat_map(|t| &t.checks)
            .map(|c| c.name.chars().count())
            .max()
            .unwrap_or(0);
        for t in &self.tasks {
            out.push_str(&format!("[{}] {} {}", t.index, t.kind, t.status.label()));
            if let Some(ms) = t.elapsed_ms {
                out.push_str(&format!(" ({ms} ms)"));
            }
            out.push('\n');
            for c in &t.checks {
                let mark = match (c.passed, c.asserted) {
                    (true, _) => "ok  ",
                    (false, true) => "FAIL",
                    (false, false) => "info",
                };
                let pad = width - c.name.chars().count();
                out.push_str(&format!("  {mark} {}{} {}\n", c.name, " ".repeat(pad), c.detail));
            }
        }
        out.push_str(&format!(
            "{} tasks, {} asserted failures: {}\n",
            self.tasks.len(),
            self.asserted_failures,
            if self.passed { "PASS" } else { "FAIL" }
        ));
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
            Format::Text => self.to_text(),
        }
    }
}
