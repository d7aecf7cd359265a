//! Task definitions: the JSON interface bundling instruction templates, the
//! decomposition rules, fulfillment predicates, URL allow-prefixes, and the
//! fixture site, plus a convenience runner that drives scripted episodes and
//! scores them.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ports::{ScriptedPlanner, ScriptedProgrammer, ScriptedSummarizer};
use super::rules::{RuleSet, DEFAULT_END_MARKER};
use super::site::{FixtureExecutor, FixtureSite};
use super::template::InstructionTemplate;
use super::{
    filter_episode, run_episode, sample_instruction, score_episode, AgentError, Episode,
    EpisodePolicy, FilterDecision, ScoreReport,
};

fn default_end_marker() -> String {
    DEFAULT_END_MARKER.to_string()
}

fn default_snippet_budget() -> usize {
    64
}

/// A self-experience task: everything needed to sample instructions, run
/// scripted episodes against the fixture site, filter them, and score them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskDefinition {
    pub name: String,
    /// Instruction templates with `<placeholder>` slots.
    pub templates: Vec<String>,
    /// Candidate values per placeholder, shared by all templates.
    pub slot_values: BTreeMap<String, Vec<String>>,
    /// Decomposition rules for the scripted planner.
    pub rules: RuleSet,
    /// Fulfillment predicate template per attribute name; `{value}` is
    /// replaced by the escaped attribute value and the result matched as a
    /// regex against each successfully executed step's sub-instruction text.
    pub required_attr_predicates: BTreeMap<String, String>,
    pub url_allow_prefixes: Vec<String>,
    /// Path to the fixture site's `site.json`, relative to the task file.
    pub fixture_site_path: String,
    pub max_steps: usize,
    #[serde(default = "default_end_marker")]
    pub end_marker: String,
    /// Token budget per retrieved snippet.
    #[serde(default = "default_snippet_budget")]
    pub snippet_budget: usize,
}

/// A task definition together with its loaded fixture site.
#[derive(Debug, Clone)]
pub struct LoadedTask {
    pub task: TaskDefinition,
    pub site: FixtureSite,
}

impl TaskDefinition {
    pub fn from_json_str(text: &str) -> Result<Self, AgentError> {
        serde_json::from_str(text).map_err(|e| AgentError::Task(e.to_string()))
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("task definition serializes")
    }

    /// Loads a task file and its fixture site (site path resolved relative to
    /// the task file's directory).
    pub fn load(path: &Path) -> Result<LoadedTask, AgentError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AgentError::Task(format!("{}: {e}", path.display())))?;
        let task = Self::from_json_str(&text)
            .map_err(|e| AgentError::Task(format!("{}: {e}", path.display())))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        let site = FixtureSite::load(&dir.join(&task.fixture_site_path))?;
        Ok(LoadedTask { task, site })
    }

    /// The templates paired with the task's slot values.
    pub fn instruction_templates(&self) -> Vec<InstructionTemplate> {
        self.templates
            .iter()
            .map(|t| InstructionTemplate::new(t.clone(), self.slot_values.clone()))
            .collect()
    }

    /// Samples `n` instructions, cycling templates round-robin.
    pub fn sample_instructions<R: Rng + ?Sized>(
        &self,
        n: usize,
        rng: &mut R,
    ) -> Result<Vec<String>, AgentError> {
        let templates = self.instruction_templates();
        if templates.is_empty() {
            return Err(AgentError::Task("task has no templates".to_string()));
        }
        (0..n)
            .map(|i| sample_instruction(&templates[i % templates.len()], rng))
            .collect()
    }
}

/// Outcome of driving one instruction end to end with scripted ports.
#[derive(Debug, Clone)]
pub struct TaskRun {
    pub instruction: String,
    pub episode: Episode,
    /// Absent when planning failed (no attributes to score against).
    pub report: Option<ScoreReport>,
    pub decision: FilterDecision,
}

/// Runs one instruction end to end: scripted plan → episode over the fixture
/// site → filter decision → attribute-coverage score (required attributes are
/// the rule's extracted slots).
pub fn run_task_instruction(
    loaded: &LoadedTask,
    instruction: &str,
) -> Result<TaskRun, AgentError> {
    let task = &loaded.task;
    let planner = ScriptedPlanner::new(&task.rules, loaded.site.start_url.clone())?
        .with_end_marker(task.end_marker.clone());
    let summarizer = ScriptedSummarizer {
        budget: task.snippet_budget,
        end_marker: task.end_marker.clone(),
    };
    let programmer = ScriptedProgrammer { end_marker: task.end_marker.clone() };
    let mut executor = FixtureExecutor::new(&loaded.site, &task.url_allow_prefixes);

    let attrs = planner.full_plan(instruction).map(|p| p.attrs);
    let episode = run_episode(
        instruction,
        &planner,
        &summarizer,
        &programmer,
        &mut executor,
        task.max_steps,
        EpisodePolicy::default(),
    );
    let decision = filter_episode(&episode, &task.url_allow_prefixes);
    let report = match attrs {
        Ok(attrs) if !attrs.is_empty() => {
            Some(score_episode(&episode, &attrs, &task.required_attr_predicates)?)
        }
        _ => None,
    };
    Ok(TaskRun { instruction: instruction.to_string(), episode, report, decision })
}

/// Runs a batch of instructions sequentially (episodes are independent; the
/// fixture site is shared immutably).
pub fn run_task(loaded: &LoadedTask, instructions: &[String]) -> Result<Vec<TaskRun>, AgentError> {
    instructions
        .iter()
        .map(|i| run_task_instruction(loaded, i))
        .collect()
}

/// The bundled fulfillment predicates for a builtin rule-set domain
/// (`real-estate`, `social-media`, or `map`). Task definition files embed the
/// same data.
pub fn builtin_predicates(domain: &str) -> BTreeMap<String, String> {
    let pairs: &[(&str, &str)] = match domain {
        "real-estate" => &[
            ("location", "^type in {value} into search$"),
            ("bedroom", "^click on {value} bedroom$"),
            ("bathroom", "^click on {value} bathroom$"),
            ("htype", "^click on the {value}$"),
            ("category", "^click on {value}$"),
            ("feature", "^click on {value}$"),
            ("price_max", "^type in {value} into max rent$"),
            ("price_min", "^type in {value} into min rent$"),
        ],
        "social-media" => &[
            ("community", "^click on {value}$"),
            ("flair", "^click on the {value} flair$"),
            ("sort", "^click on {value}$"),
            ("ordinal", "^click on the {value} thread$"),
        ],
        "map" => &[
            ("start", "^type in {value} into starting point$"),
            ("goal", "^type in {value} into destination$"),
            ("transportation", "^click on {value}$"),
            ("ordinal", "^click on the {value} route$"),
            ("poi", "^type in {value} into search along route$"),
        ],
        _ => &[],
    };
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}
