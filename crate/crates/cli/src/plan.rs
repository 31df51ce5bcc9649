use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    LocalVerify,
    P1Hodge,
    P1Degeneration,
    P1Uv,
    CharpCartier,
    CharpSplitting,
    FiltcxFuzz,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::LocalVerify => "local-verify",
            TaskKind::P1Hodge => "p1-hodge",
            TaskKind::P1Degeneration => "p1-degeneration",
            TaskKind::P1Uv => "p1-uv",
            TaskKind::CharpCartier => "charp-cartier",
            TaskKind::CharpSplitting => "charp-splitting",
            TaskKind::FiltcxFuzz => "filtcx-fuzz",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
    Text,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    pub kind: TaskKind,
    #[serde(default = "empty_object")]
    pub params: Value,
}

fn empty_object() -> Value {
    Value::Object(Default::default())
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunPlan {
    #[serde(default)]
    pub tasks: Vec<TaskSpec>,
    #[serde(default)]
    pub output: OutputSpec,
    /// Seed for tasks that do not set their own.
    #[serde(default)]
    pub seed: Option<u64>,
}

impl RunPlan {
    pub fn from_json(s: &str) -> Result<RunPlan> {
        serde_json::from_str(s).context("plan does not match the schema")
    }

    pub fn from_toml(s: &str) -> Result<RunPlan> {
        toml::from_str(s).context("plan does not match the schema")
    }

    /// Reads JSON, or TOML when the extension is `.toml`.
    pub fn load(path: &Path) -> Result<RunPlan> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        if path.extension().is_some_and(|e| e == "toml") {
            RunPlan::from_toml(&text)
        } else {
            RunPlan::from_json(&text)
        }
    }

    pub fn single(kind: TaskKind, params: Value) -> RunPlan {
        RunPlan {
            tasks: vec![TaskSpec { kind, params }],
            ..RunPlan::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, t) in self.tasks.iter().enumerate() {
            if !t.params.is_object() {
                bail!("task {i} ({}): params must be an object", t.kind.name());
            }
            crate::tasks::parse_params(t.kind, &t.params).with_context(|| format!("task {i} ({})", t.kind.name()))?;
        }
        Ok(())
    }
}
