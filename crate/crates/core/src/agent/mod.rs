//! Self-experience agent harness: instruction templating, rule-based scripted
//! planning, the plan→summarize→program→execute episode loop over fixture
//! sites, environment-feedback episode filtering, attribute-coverage scoring,
//! and demonstration export.
//!
//! The harness drives four pluggable ports ([`PlannerPort`], [`SummarizerPort`],
//! [`ProgrammerPort`], [`ExecutorPort`]). Bundled scripted implementations are
//! deterministic end to end; replay ports reproduce recorded transcripts
//! byte-identically.

pub mod ports;
pub mod program;
pub mod rules;
pub mod site;
pub mod task;
pub mod template;

use std::collections::BTreeMap;

use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::dom::serialize;
use crate::snippet::Snippet;

pub use ports::{
    BadUrlPlanner, ExecutorPort, Fault, FaultyProgrammer, FaultySummarizer, PlannerPort,
    ProgrammerPort, ReplayPlanner, ReplayProgrammer, ReplaySummarizer, ScriptedPlanner,
    ScriptedProgrammer, ScriptedSummarizer, SummarizerPort, Transcript,
};
pub use program::{parse_action, parse_program, Action, Command};
pub use rules::{scripted_plan, Extractor, PlanStep, Rule, RuleSet, ScriptedPlan, DEFAULT_END_MARKER};
pub use site::{FixtureExecutor, FixtureSite};
pub use task::TaskDefinition;
pub use template::{sample_instruction, slug, InstructionTemplate};

/// Agent-harness configuration and domain errors.
#[derive(Debug, Error)]
pub enum AgentError {
    #[error("unknown placeholder <{0}> (no candidate values)")]
    UnknownPlaceholder(String),
    #[error("no rule matches instruction")]
    NoRuleMatch,
    #[error("rule {rule}: required attribute {attr} not found in instruction")]
    MissingRequiredAttr { rule: String, attr: String },
    #[error("invalid extractor pattern {pattern:?}: {message}")]
    InvalidPattern { pattern: String, message: String },
    #[error("no fulfillment predicate for attribute {0}")]
    MissingPredicate(String),
    #[error("required attribute list must be non-empty")]
    EmptyRequiredAttrs,
    #[error("fixture site: {0}")]
    Site(String),
    #[error("task definition: {0}")]
    Task(String),
}

/// A port-level failure, recorded on the failing step's exec status.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum PortError {
    #[error("plan error: {0}")]
    Plan(String),
    #[error("retriever error: {0}")]
    Retrieve(String),
    #[error("program error: {0}")]
    Program(String),
}

/// One step of a decomposed plan. `terminal` is true exactly when `text` is
/// the designated end-of-episode marker.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubInstruction {
    pub text: String,
    /// `data-ref` anchors of the elements this step touches.
    pub refs: Vec<u32>,
    pub terminal: bool,
}

impl SubInstruction {
    pub fn step(text: impl Into<String>) -> Self {
        Self { text: text.into(), refs: Vec::new(), terminal: false }
    }

    pub fn terminal(text: impl Into<String>) -> Self {
        Self { text: text.into(), refs: Vec::new(), terminal: true }
    }
}

/// Execution outcome of one step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExecStatus {
    Ok,
    ProgramError(String),
    RetrieverError(String),
    /// Navigation outside every allowed URL prefix; carries the offending URL.
    BadUrl(String),
}

impl ExecStatus {
    pub fn label(&self) -> &'static str {
        match self {
            ExecStatus::Ok => "ok",
            ExecStatus::ProgramError(_) => "program_error",
            ExecStatus::RetrieverError(_) => "retriever_error",
            ExecStatus::BadUrl(_) => "bad_url",
        }
    }

    pub fn detail(&self) -> Option<&str> {
        match self {
            ExecStatus::Ok => None,
            ExecStatus::ProgramError(d)
            | ExecStatus::RetrieverError(d)
            | ExecStatus::BadUrl(d) => Some(d),
        }
    }

    pub fn is_ok(&self) -> bool {
        matches!(self, ExecStatus::Ok)
    }
}

/// One executed (or failed) step of an episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeStep {
    pub sub_instruction: SubInstruction,
    /// Snippets retrieved for the step. Incomplete (empty) when
    /// `exec_status` is a retriever error.
    pub snippets: Vec<Snippet>,
    /// Program text in the selector-command dialect; empty for terminal steps
    /// and for steps that failed before synthesis.
    pub program: String,
    pub exec_status: ExecStatus,
    /// Serialized document the planner saw before this step ("" before the
    /// first navigation).
    pub doc_html: String,
}

impl EpisodeStep {
    pub fn to_json_value(&self) -> serde_json::Value {
        json!({
            "text": self.sub_instruction.text,
            "refs": self.sub_instruction.refs,
            "terminal": self.sub_instruction.terminal,
            "snippets": self.snippets.iter().map(Snippet::to_json).collect::<Vec<_>>(),
            "program": self.program,
            "exec_status": self.exec_status.label(),
            "exec_detail": self.exec_status.detail(),
            "doc": self.doc_html,
        })
    }
}

/// Terminal status of an episode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EpisodeStatus {
    /// Terminal sub-instruction reached with no aborting failure.
    Success,
    /// Attribute-coverage score attached after the fact.
    Scored(u8),
    /// Aborted (or rejected) with a filter reason such as `plan-error`.
    Filtered(String),
    /// Step bound reached before the terminal sub-instruction.
    MaxSteps,
}

impl EpisodeStatus {
    pub fn to_json_value(&self) -> serde_json::Value {
        match self {
            EpisodeStatus::Success => json!("success"),
            EpisodeStatus::Scored(s) => json!({ "scored": s }),
            EpisodeStatus::Filtered(r) => json!({ "filtered": r }),
            EpisodeStatus::MaxSteps => json!("max_steps"),
        }
    }
}

/// A full plan→summarize→program→execute trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub instruction: String,
    pub steps: Vec<EpisodeStep>,
    pub status: EpisodeStatus,
    /// Every URL navigation attempted during the episode, in order.
    pub visited_urls: Vec<String>,
}

impl Episode {
    /// Episode log: one JSON line per step, each carrying the instruction,
    /// step index, and episode status.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for (index, step) in self.steps.iter().enumerate() {
            let mut value = step.to_json_value();
            let object = value.as_object_mut().expect("step json is an object");
            object.insert("instruction".to_string(), json!(self.instruction));
            object.insert("step".to_string(), json!(index));
            object.insert("status".to_string(), self.status.to_json_value());
            object.insert("visited_urls".to_string(), json!(self.visited_urls));
            out.push_str(&serde_json::to_string(&value).expect("episode step serializes"));
            out.push('\n');
        }
        out
    }
}

/// Abort policy for port failures inside the episode loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpisodePolicy {
    /// Abort on program execution errors (the default treats them as
    /// critical failures).
    pub abort_on_program_error: bool,
    /// Abort on retriever errors (default: record and continue; the episode
    /// is dropped by the filter regardless).
    pub abort_on_retriever_error: bool,
    /// Abort on navigation outside the allowed prefixes.
    pub abort_on_bad_url: bool,
}

impl Default for EpisodePolicy {
    fn default() -> Self {
        Self {
            abort_on_program_error: true,
            abort_on_retriever_error: false,
            abort_on_bad_url: true,
        }
    }
}

/// Runs the plan→summarize→program→execute loop until the terminal
/// sub-instruction, an aborting failure, or `max_steps` iterations
/// (unconditional upper bound).
///
/// Per iteration: the planner proposes the next [`SubInstruction`] from the
/// instruction, history, and current document; the summarizer retrieves
/// snippets for its refs; the programmer synthesizes the selector-command
/// program; the executor applies it. Failures are recorded in the step's
/// [`ExecStatus`]; whether the loop continues is governed by `policy`.
pub fn run_episode(
    instruction: &str,
    planner: &dyn PlannerPort,
    summarizer: &dyn SummarizerPort,
    programmer: &dyn ProgrammerPort,
    executor: &mut dyn ExecutorPort,
    max_steps: usize,
    policy: EpisodePolicy,
) -> Episode {
    executor.reset();
    let mut steps: Vec<EpisodeStep> = Vec::new();
    let mut history: Vec<String> = Vec::new();
    let mut status: Option<EpisodeStatus> = None;

    for _ in 0..max_steps {
        let doc_html = executor.current_doc().map(serialize).unwrap_or_default();
        let sub = match planner.plan(instruction, &history, executor.current_doc()) {
            Ok(sub) => sub,
            Err(_) => {
                status = Some(EpisodeStatus::Filtered("plan-error".to_string()));
                break;
            }
        };

        if sub.terminal {
            steps.push(EpisodeStep {
                sub_instruction: sub,
                snippets: Vec::new(),
                program: String::new(),
                exec_status: ExecStatus::Ok,
                doc_html,
            });
            status = Some(EpisodeStatus::Success);
            break;
        }

        let (snippets, exec_status, program) =
            match summarizer.summarize(&sub, executor.current_doc()) {
                Err(e) => (Vec::new(), Some(ExecStatus::RetrieverError(e.to_string())), String::new()),
                Ok(snippets) => match programmer.program(&sub, &snippets) {
                    Err(e) => (snippets, Some(ExecStatus::ProgramError(e.to_string())), String::new()),
                    Ok(program) => (snippets, None, program),
                },
            };
        let exec_status = match exec_status {
            Some(failed) => failed,
            None => executor.execute(&program),
        };

        let abort = match &exec_status {
            ExecStatus::Ok => false,
            ExecStatus::ProgramError(_) => policy.abort_on_program_error,
            ExecStatus::RetrieverError(_) => policy.abort_on_retriever_error,
            ExecStatus::BadUrl(_) => policy.abort_on_bad_url,
        };
        let abort_reason = match &exec_status {
            ExecStatus::ProgramError(_) => "program-error",
            ExecStatus::RetrieverError(_) => "retriever-error",
            ExecStatus::BadUrl(_) => "bad-url",
            ExecStatus::Ok => "",
        };

        history.push(sub.text.clone());
        steps.push(EpisodeStep {
            sub_instruction: sub,
            snippets,
            program,
            exec_status,
            doc_html,
        });

        if abort {
            status = Some(EpisodeStatus::Filtered(abort_reason.to_string()));
            break;
        }
    }

    Episode {
        instruction: instruction.to_string(),
        steps,
        status: status.unwrap_or(EpisodeStatus::MaxSteps),
        visited_urls: executor.visited_urls().to_vec(),
    }
}

/// Attribute-coverage report: which required attributes the episode
/// fulfilled, the integer score, and the success flag.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreReport {
    /// Required attributes as `"name=value"` strings.
    pub required_attrs: Vec<String>,
    /// The fulfilled subset, in `required_attrs` order.
    pub covered: Vec<String>,
    /// `round(100 · covered / required)`, half away from zero.
    pub score: u8,
    /// `score == 100`.
    pub success: bool,
}

impl ScoreReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("score report serializes")
    }
}

/// Scores an episode by attribute coverage: each required `(name, value)`
/// pair is covered when its fulfillment predicate — the task-supplied regex
/// template for `name`, with `{value}` replaced by the escaped value —
/// matches the sub-instruction text of at least one successfully executed
/// (`ok`) step. Score is `round(100 · covered / required)`; success holds
/// exactly when the score is 100.
pub fn score_episode(
    episode: &Episode,
    required_attrs: &[(String, String)],
    predicates: &BTreeMap<String, String>,
) -> Result<ScoreReport, AgentError> {
    if required_attrs.is_empty() {
        return Err(AgentError::EmptyRequiredAttrs);
    }
    let ok_texts: Vec<&str> = episode
        .steps
        .iter()
        .filter(|s| s.exec_status.is_ok())
        .map(|s| s.sub_instruction.text.as_str())
        .collect();
    let mut covered = Vec::new();
    for (name, value) in required_attrs {
        let template = predicates
            .get(name)
            .ok_or_else(|| AgentError::MissingPredicate(name.clone()))?;
        let pattern = template.replace("{value}", &regex::escape(value));
        let re = Regex::new(&pattern).map_err(|e| AgentError::InvalidPattern {
            pattern: pattern.clone(),
            message: e.to_string(),
        })?;
        if ok_texts.iter().any(|t| re.is_match(t)) {
            covered.push(format!("{name}={value}"));
        }
    }
    let required: Vec<String> = required_attrs
        .iter()
        .map(|(n, v)| format!("{n}={v}"))
        .collect();
    let score = (100.0 * covered.len() as f64 / required.len() as f64).round() as u8;
    Ok(ScoreReport { required_attrs: required, covered, score, success: score == 100 })
}

/// Environment-feedback filter decision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FilterDecision {
    Keep,
    Drop(String),
}

impl FilterDecision {
    pub fn is_keep(&self) -> bool {
        matches!(self, FilterDecision::Keep)
    }
}

/// Drops episodes with program execution errors, retriever errors, or any
/// visited URL outside the allowed prefixes; episodes already rejected (e.g.
/// `plan-error`) keep their reason. Everything else is kept — including
/// `max_steps` episodes, whose recorded steps all executed cleanly.
pub fn filter_episode(episode: &Episode, url_allow_prefixes: &[String]) -> FilterDecision {
    if let EpisodeStatus::Filtered(reason) = &episode.status {
        return FilterDecision::Drop(reason.clone());
    }
    for step in &episode.steps {
        match &step.exec_status {
            ExecStatus::Ok => {}
            ExecStatus::ProgramError(_) => {
                return FilterDecision::Drop("program-error".to_string())
            }
            ExecStatus::RetrieverError(_) => {
                return FilterDecision::Drop("retriever-error".to_string())
            }
            ExecStatus::BadUrl(_) => return FilterDecision::Drop("bad-url".to_string()),
        }
    }
    for url in &episode.visited_urls {
        if !url_allow_prefixes.iter().any(|p| url.starts_with(p.as_str())) {
            return FilterDecision::Drop("bad-url".to_string());
        }
    }
    FilterDecision::Keep
}

/// One finetuning record: the step's context and its prediction targets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemoRecord {
    pub instruction: String,
    /// Texts of the sub-instructions before this step.
    pub history: Vec<String>,
    /// Serialized document visible when the step was planned.
    pub doc: String,
    /// The step's sub-instruction text (prediction target).
    pub target: String,
    /// The step's data-refs (prediction target).
    pub target_refs: Vec<u32>,
}

impl DemoRecord {
    pub fn to_jsonl_line(&self) -> String {
        serde_json::to_string(self).expect("demo record serializes")
    }
}

/// Exports one finetuning record per step of each episode: the instruction,
/// the history of prior sub-instructions, the document snapshot, and the
/// step's sub-instruction text and refs as prediction targets. Callers pass
/// episodes already kept by [`filter_episode`].
pub fn export_demonstrations(episodes: &[Episode]) -> Vec<DemoRecord> {
    let mut records = Vec::new();
    for episode in episodes {
        let mut history: Vec<String> = Vec::new();
        for step in &episode.steps {
            records.push(DemoRecord {
                instruction: episode.instruction.clone(),
                history: history.clone(),
                doc: step.doc_html.clone(),
                target: step.sub_instruction.text.clone(),
                target_refs: step.sub_instruction.refs.clone(),
            });
            history.push(step.sub_instruction.text.clone());
        }
    }
    records
}
