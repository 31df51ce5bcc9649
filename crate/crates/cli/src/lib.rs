//! Batch driver for the logtwist checks: run plans in, JSON reports out.

pub mod plan;
pub mod report;
pub mod tasks;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

pub use plan::{Format, OutputSpec, RunPlan, TaskKind, TaskSpec};
pub use report::{Check, Report, Status, TaskOutcome, TaskReport};
pub use tasks::RunOptions;

/// Runs every task in plan order. Task errors, including failed
/// stabilization, become failing checks rather than aborting the run.
pub fn run(plan: &RunPlan, opts: &RunOptions) -> Report {
    let tasks = plan
        .tasks
        .iter()
        .enumerate()
        .map(|(index, t)| {
            let start = Instant::now();
            let result = catch_unwind(AssertUnwindSafe(|| tasks::run_task(t.kind, &t.params, plan.seed, opts)));
            let outcome = match result {
                Ok(Ok(o)) => o,
                Ok(Err(e)) => failed(format!("{e:#}")),
                Err(panic) => {
                    let msg = panic
                        .downcast_ref::<String>()
                        .cloned()
                        .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                        .unwrap_or_else(|| "panic".into());
                    failed(format!("internal error: {msg}"))
                }
            };
            TaskReport {
                index,
                kind: t.kind.name().to_string(),
                params: t.params.clone(),
                status: outcome.status(),
                checks: outcome.checks,
                certificates: outcome.certificates,
                witnesses: outcome.witnesses,
                data: outcome.data,
                elapsed_ms: opts.timing.then(|| start.elapsed().as_millis() as u64),
            }
        })
        .collect();
    Report::new(tasks)
}

fn failed(msg: String) -> TaskOutcome {
    let mut o = TaskOutcome::default();
    o.check("task", false, msg.clone());
    o.witnesses.push(serde_json::json!({ "error": msg }));
    o
}
