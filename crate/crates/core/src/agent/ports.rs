//! Model ports: the planner/summarizer/programmer/executor roles behind the
//! episode loop. Bundled implementations are scripted (rule-based, fully
//! deterministic); recorded-replay ports replay a transcript; fault-injection
//! wrappers seed failures for filter tests.

use crate::dom::{Document, HtmlTokenizer};
use crate::snippet::{expand_to_budget, Snippet};

use super::program::{emit_program, parse_action, Action};
use super::rules::{CompiledRuleSet, RuleSet, DEFAULT_END_MARKER};
use super::template::slug;
use super::{AgentError, PortError, SubInstruction};

/// Decides the next sub-instruction from the instruction, the history of
/// prior sub-instruction texts, and the current document (absent before the
/// first navigation). Implementations must be deterministic for recorded
/// transcripts (replay mode) and safe for concurrent calls across episodes.
pub trait PlannerPort: Sync {
    fn plan(
        &self,
        instruction: &str,
        history: &[String],
        doc: Option<&Document>,
    ) -> Result<SubInstruction, PortError>;
}

/// Produces HTML snippets for a sub-instruction's data-refs.
pub trait SummarizerPort: Sync {
    fn summarize(
        &self,
        sub_instruction: &SubInstruction,
        doc: Option<&Document>,
    ) -> Result<Vec<Snippet>, PortError>;
}

/// Synthesizes program text from a sub-instruction and its snippets.
pub trait ProgrammerPort: Sync {
    fn program(
        &self,
        sub_instruction: &SubInstruction,
        snippets: &[Snippet],
    ) -> Result<String, PortError>;
}

/// Applies program text to the environment. Stateful per episode.
pub trait ExecutorPort {
    fn execute(&mut self, program: &str) -> super::ExecStatus;
    fn current_doc(&self) -> Option<&Document>;
    fn visited_urls(&self) -> &[String];
    fn reset(&mut self);
}

impl ExecutorPort for super::site::FixtureExecutor<'_> {
    fn execute(&mut self, program: &str) -> super::ExecStatus {
        super::site::FixtureExecutor::execute(self, program)
    }
    fn current_doc(&self) -> Option<&Document> {
        super::site::FixtureExecutor::current_doc(self)
    }
    fn visited_urls(&self) -> &[String] {
        super::site::FixtureExecutor::visited_urls(self)
    }
    fn reset(&mut self) {
        super::site::FixtureExecutor::reset(self)
    }
}

/// Rule-based planner: decomposes the instruction once per call via the
/// compiled rule set, indexes the plan by `history.len()`, and grounds the
/// step by resolving the target element's id (slug convention) to a data-ref
/// on the current document. An unresolvable target yields an empty ref list,
/// which the summarizer reports as a retriever error.
pub struct ScriptedPlanner {
    rules: CompiledRuleSet,
    start_url: String,
    end_marker: String,
}

impl ScriptedPlanner {
    pub fn new(rules: &RuleSet, start_url: impl Into<String>) -> Result<Self, AgentError> {
        Ok(Self {
            rules: rules.compile()?,
            start_url: start_url.into(),
            end_marker: DEFAULT_END_MARKER.to_string(),
        })
    }

    pub fn with_end_marker(mut self, end_marker: impl Into<String>) -> Self {
        self.end_marker = end_marker.into();
        self
    }

    pub fn end_marker(&self) -> &str {
        &self.end_marker
    }

    /// The full plan for an instruction (refs unresolved).
    pub fn full_plan(&self, instruction: &str) -> Result<super::rules::ScriptedPlan, AgentError> {
        self.rules.plan(instruction, &self.start_url, &self.end_marker)
    }
}

impl PlannerPort for ScriptedPlanner {
    fn plan(
        &self,
        instruction: &str,
        history: &[String],
        doc: Option<&Document>,
    ) -> Result<SubInstruction, PortError> {
        let plan = self
            .full_plan(instruction)
            .map_err(|e| PortError::Plan(e.to_string()))?;
        let index = history.len().min(plan.sub_instructions.len() - 1);
        let mut sub = plan.sub_instructions[index].clone();
        if let Some(action) = parse_action(&sub.text, &self.end_marker) {
            if action.needs_element() {
                if let (Some(name), Some(doc)) = (action.target_name(), doc) {
                    let id = slug(name);
                    if let Some(data_ref) =
                        doc.find_by_id(&id).and_then(|el| el.data_ref)
                    {
                        sub.refs = vec![data_ref];
                    }
                }
            }
        }
        Ok(sub)
    }
}

/// Snippet-extractor-backed summarizer: expands each of the step's data-refs
/// to a budgeted snippet. Element-targeting steps with no resolvable refs are
/// retriever errors.
pub struct ScriptedSummarizer {
    pub budget: usize,
    pub end_marker: String,
}

impl ScriptedSummarizer {
    pub fn new(budget: usize) -> Self {
        Self { budget, end_marker: DEFAULT_END_MARKER.to_string() }
    }
}

impl SummarizerPort for ScriptedSummarizer {
    fn summarize(
        &self,
        sub_instruction: &SubInstruction,
        doc: Option<&Document>,
    ) -> Result<Vec<Snippet>, PortError> {
        let needs_element = parse_action(&sub_instruction.text, &self.end_marker)
            .is_some_and(|a| a.needs_element());
        if !needs_element {
            return Ok(Vec::new());
        }
        let Some(doc) = doc else {
            return Err(PortError::Retrieve("no document loaded".to_string()));
        };
        if sub_instruction.refs.is_empty() {
            return Err(PortError::Retrieve(format!(
                "no data-ref resolved for: {}",
                sub_instruction.text
            )));
        }
        let tokenizer = HtmlTokenizer;
        let mut snippets = Vec::with_capacity(sub_instruction.refs.len());
        for &data_ref in &sub_instruction.refs {
            let snippet = expand_to_budget(doc, data_ref, self.budget, &tokenizer)
                .map_err(|e| PortError::Retrieve(e.to_string()))?;
            snippets.push(snippet);
        }
        Ok(snippets)
    }
}

/// Emits the selector-command dialect for the step, grounding element actions
/// in the step's first data-ref and scroll actions in the slug of the spoken
/// target name.
pub struct ScriptedProgrammer {
    pub end_marker: String,
}

impl ScriptedProgrammer {
    pub fn new() -> Self {
        Self { end_marker: DEFAULT_END_MARKER.to_string() }
    }
}

impl Default for ScriptedProgrammer {
    fn default() -> Self {
        Self::new()
    }
}

impl ProgrammerPort for ScriptedProgrammer {
    fn program(
        &self,
        sub_instruction: &SubInstruction,
        _snippets: &[Snippet],
    ) -> Result<String, PortError> {
        let Some(action) = parse_action(&sub_instruction.text, &self.end_marker) else {
            return Err(PortError::Program(format!(
                "sub-instruction outside the dialect: {}",
                sub_instruction.text
            )));
        };
        let data_ref = match &action {
            Action::Type { .. } | Action::Submit { .. } | Action::Click { .. } => {
                match sub_instruction.refs.first() {
                    Some(&n) => Some(n),
                    None => {
                        return Err(PortError::Program(format!(
                            "no data-ref for: {}",
                            sub_instruction.text
                        )))
                    }
                }
            }
            _ => None,
        };
        let scroll_id = action.target_name().map(slug).unwrap_or_default();
        Ok(emit_program(&action, &sub_instruction.text, data_ref, &scroll_id))
    }
}

/// A recorded transcript: per-step planner responses, snippets, and programs,
/// keyed by the number of prior steps. Replaying the same transcript twice
/// produces byte-identical episodes.
#[derive(Debug, Clone, Default)]
pub struct Transcript {
    pub sub_instructions: Vec<SubInstruction>,
    pub snippets: Vec<Vec<Snippet>>,
    pub programs: Vec<String>,
}

impl Transcript {
    /// Records the port responses embedded in a completed episode.
    pub fn from_episode(episode: &super::Episode) -> Self {
        Self {
            sub_instructions: episode
                .steps
                .iter()
                .map(|s| s.sub_instruction.clone())
                .collect(),
            snippets: episode.steps.iter().map(|s| s.snippets.clone()).collect(),
            programs: episode.steps.iter().map(|s| s.program.clone()).collect(),
        }
    }
}

/// Replays recorded planner responses keyed by history length.
pub struct ReplayPlanner {
    pub transcript: Transcript,
}

impl PlannerPort for ReplayPlanner {
    fn plan(
        &self,
        _instruction: &str,
        history: &[String],
        _doc: Option<&Document>,
    ) -> Result<SubInstruction, PortError> {
        self.transcript
            .sub_instructions
            .get(history.len())
            .cloned()
            .ok_or_else(|| PortError::Plan(format!("no recorded step {}", history.len())))
    }
}

/// Replays recorded snippets by matching the step's position in the transcript.
pub struct ReplaySummarizer {
    pub transcript: Transcript,
}

impl SummarizerPort for ReplaySummarizer {
    fn summarize(
        &self,
        sub_instruction: &SubInstruction,
        _doc: Option<&Document>,
    ) -> Result<Vec<Snippet>, PortError> {
        let index = self
            .transcript
            .sub_instructions
            .iter()
            .position(|s| s == sub_instruction)
            .ok_or_else(|| {
                PortError::Retrieve(format!("unrecorded step: {}", sub_instruction.text))
            })?;
        Ok(self.transcript.snippets[index].clone())
    }
}

/// Replays recorded programs by matching the step's position in the transcript.
pub struct ReplayProgrammer {
    pub transcript: Transcript,
}

impl ProgrammerPort for ReplayProgrammer {
    fn program(
        &self,
        sub_instruction: &SubInstruction,
        _snippets: &[Snippet],
    ) -> Result<String, PortError> {
        let index = self
            .transcript
            .sub_instructions
            .iter()
            .position(|s| s == sub_instruction)
            .ok_or_else(|| {
                PortError::Program(format!("unrecorded step: {}", sub_instruction.text))
            })?;
        Ok(self.transcript.programs[index].clone())
    }
}

/// The failure kinds a fault wrapper can seed into an episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Programmer emits an unparseable line at the chosen step.
    Program,
    /// Summarizer fails at the chosen step.
    Retriever,
    /// Planner rewrites the chosen step into a navigation outside any allowed
    /// prefix.
    BadUrl,
}

/// Wraps a planner, injecting a disallowed navigation at step `at_step`.
pub struct BadUrlPlanner<P> {
    pub inner: P,
    pub at_step: usize,
    pub url: String,
}

impl<P: PlannerPort> PlannerPort for BadUrlPlanner<P> {
    fn plan(
        &self,
        instruction: &str,
        history: &[String],
        doc: Option<&Document>,
    ) -> Result<SubInstruction, PortError> {
        if history.len() == self.at_step {
            return Ok(SubInstruction::step(format!("go to {}", self.url)));
        }
        self.inner.plan(instruction, history, doc)
    }
}

/// Wraps a summarizer, failing at step `at_step` (counted over all steps).
pub struct FaultySummarizer<S> {
    pub inner: S,
    pub at_step: usize,
    calls: std::sync::atomic::AtomicUsize,
}

impl<S> FaultySummarizer<S> {
    pub fn new(inner: S, at_step: usize) -> Self {
        Self { inner, at_step, calls: std::sync::atomic::AtomicUsize::new(0) }
    }
}

impl<S: SummarizerPort> SummarizerPort for FaultySummarizer<S> {
    fn summarize(
        &self,
        sub_instruction: &SubInstruction,
        doc: Option<&Document>,
    ) -> Result<Vec<Snippet>, PortError> {
        let call = self.calls.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
        if call == self.at_step {
            return Err(PortError::Retrieve("seeded retriever fault".to_string()));
        }
        self.inner.summarize(sub_instruction, doc)
    }
}

/// Wraps a programmer, emitting an unparseable program at step `at_step`.
pub struct FaultyProgrammer<P> {
    pub inner: P,
    pub at_step: usize,
    calls: std::sync::atomic::AtomicUsize,
}

impl<P> FaultyProgrammer<P> {
    pub fn new(inner: P, at_step: usize) -> Self {
        Self { inner, at_step, calls: std::sync::atomic::AtomicUsize::new(0) }
    }
}

impl<P: ProgrammerPort> ProgrammerPort for FaultyProgrammer<P> {
    fn program(
        &self,
        sub_instruction: &SubInstruction,
        snippets: &[Snippet],
    ) -> Result<String, PortError> {
        let call = self.calls.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
        if call == self.at_step {
            return Ok("this is not a valid selector command".to_string());
        }
        self.inner.program(sub_instruction, snippets)
    }
}
