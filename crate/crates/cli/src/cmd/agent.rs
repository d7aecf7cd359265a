//! `htmlforge agent`: run task instructions end to end over a fixture site
//! with the scripted ports, print the score table, and export episode logs
//! and demonstration records.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use htmlforge_core::agent::task::{run_task, TaskRun};
use htmlforge_core::agent::{
    export_demonstrations, Episode, EpisodeStatus, FilterDecision, TaskDefinition,
};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::run::{finish, parse_config, require_input, resolved_json, Failure, RunManifest};

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentCliConfig {
    /// Instructions sampled from the task templates when no instruction file
    /// is given.
    pub sample: usize,
}

impl Default for AgentCliConfig {
    fn default() -> Self {
        AgentCliConfig { sample: 10 }
    }
}

pub struct AgentArgs<'a> {
    pub input: &'a str,
    pub instructions: Option<&'a str>,
    pub sample: Option<usize>,
    pub output: Option<&'a PathBuf>,
    pub seed: u64,
    pub config: Option<&'a str>,
}

fn read_instruction_file(path: &str) -> Result<Vec<String>, Failure> {
    require_input(path)?;
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::domain("input-invalid", format!("read {path}: {e}")))?;
    let lines: Vec<String> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect();
    if lines.is_empty() {
        return Err(Failure::domain("input-invalid", format!("{path}: no instructions")));
    }
    Ok(lines)
}

fn status_label(status: &EpisodeStatus) -> String {
    match status {
        EpisodeStatus::Success => "success".to_string(),
        EpisodeStatus::Scored(score) => format!("scored({score})"),
        EpisodeStatus::Filtered(reason) => reason.clone(),
        EpisodeStatus::MaxSteps => "max-steps".to_string(),
    }
}

fn decision_label(decision: &FilterDecision) -> String {
    match decision {
        FilterDecision::Keep => "keep".to_string(),
        FilterDecision::Drop(reason) => format!("drop({reason})"),
    }
}

fn score_table(runs: &[TaskRun]) -> String {
    let mut table = String::new();
    let _ = writeln!(table, "{:>5}  {:<18}  {:<12}  instruction", "score", "decision", "status");
    for run in runs {
        let score = match &run.report {
            Some(report) => report.score.to_string(),
            None => "-".to_string(),
        };
        let _ = writeln!(
            table,
            "{:>5}  {:<18}  {:<12}  {}",
            score,
            decision_label(&run.decision),
            status_label(&run.episode.status),
            run.instruction
        );
    }
    table
}

fn run_summary_line(run: &TaskRun) -> String {
    json!({
        "instruction": run.instruction,
        "score": run.report.as_ref().map(|r| r.score),
        "success": run.report.as_ref().map(|r| r.success).unwrap_or(false),
        "decision": decision_label(&run.decision),
        "status": status_label(&run.episode.status),
        "steps": run.episode.steps.len(),
    })
    .to_string()
}

fn episodes_jsonl(episodes: &[&Episode]) -> String {
    let mut out = String::new();
    for episode in episodes {
        let text = episode.to_jsonl();
        out.push_str(&text);
        if !text.ends_with('\n') {
            out.push('\n');
        }
    }
    out
}

pub fn run(args: AgentArgs<'_>) -> Result<(), Failure> {
    let cli_config: AgentCliConfig = parse_config(args.config)?;
    let sample = args.sample.unwrap_or(cli_config.sample);
    let resolved = resolved_json(&AgentCliConfig { sample });
    let mut manifest = RunManifest::new("agent", &resolved, args.seed);
    manifest.inputs.push(args.input.to_string());

    require_input(args.input)?;
    let loaded = TaskDefinition::load(Path::new(args.input))
        .map_err(|e| Failure::domain("task-error", e.to_string()))?;

    let instructions = match args.instructions {
        Some(path) => {
            manifest.inputs.push(path.to_string());
            read_instruction_file(path)?
        }
        None => {
            if sample == 0 {
                return Err(Failure::config_invalid(
                    "sample: must be positive when no --instructions file is given",
                ));
            }
            let mut rng = ChaCha20Rng::seed_from_u64(args.seed);
            loaded
                .task
                .sample_instructions(sample, &mut rng)
                .map_err(|e| Failure::domain("task-error", e.to_string()))?
        }
    };

    let runs = run_task(&loaded, &instructions)
        .map_err(|e| Failure::domain("task-error", e.to_string()))?;

    let kept: Vec<&Episode> = runs
        .iter()
        .filter(|r| r.decision.is_keep())
        .map(|r| &r.episode)
        .collect();
    let kept_owned: Vec<Episode> = kept.iter().map(|e| (*e).clone()).collect();
    let demos = export_demonstrations(&kept_owned);
    let perfect = runs
        .iter()
        .filter(|r| r.report.as_ref().map(|rep| rep.score == 100).unwrap_or(false))
        .count();

    manifest.count("episodes", runs.len() as u64);
    manifest.count("kept", kept.len() as u64);
    manifest.count("dropped", (runs.len() - kept.len()) as u64);
    manifest.count("perfect", perfect as u64);
    manifest.count("demo-records", demos.len() as u64);

    print!("{}", score_table(&runs));

    let mut runs_jsonl = String::new();
    for run in &runs {
        runs_jsonl.push_str(&run_summary_line(run));
        runs_jsonl.push('\n');
    }
    let episodes = episodes_jsonl(&kept);
    let mut demos_jsonl = String::new();
    for demo in &demos {
        demos_jsonl.push_str(&demo.to_jsonl_line());
        demos_jsonl.push('\n');
    }

    match args.output {
        Some(dir) => finish(
            Some(dir),
            manifest,
            &[
                ("runs.jsonl", &runs_jsonl),
                ("episodes.jsonl", &episodes),
                ("demos.jsonl", &demos_jsonl),
            ],
        ),
        None => finish(None, manifest, &[]),
    }
}
