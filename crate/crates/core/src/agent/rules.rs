//! Rule-based instruction decomposition: regex attribute extraction plus a
//! declarative plan table that expands into an ordered sub-instruction list.

use std::collections::BTreeMap;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::template::slug;
use super::{AgentError, SubInstruction};

/// Default end-of-episode marker. Configurable per task definition.
pub const DEFAULT_END_MARKER: &str = "END";

/// One attribute extractor: a regex whose capture groups map, in order, onto
/// attribute names. Captured values may be normalized (e.g. `most` → `1st`)
/// and optionally split on a separator into repeated values of one attribute.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extractor {
    /// Regex with one capture group per entry of `attrs`.
    pub pattern: String,
    /// Attribute name for each capture group, in group order.
    pub attrs: Vec<String>,
    /// Value rewrites applied to every captured value (exact match).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub normalize: BTreeMap<String, String>,
    /// When set, each captured value is split on this separator and emitted as
    /// repeated values of the (single) attribute.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<String>,
}

/// One row of the plan table. `emit` may reference extracted attributes as
/// `{name}` and the fixture site entry point as `{url}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanStep {
    /// Sub-instruction text template.
    pub emit: String,
    /// Emit only when one of these `|`-separated attributes was extracted.
    /// Absent means emit unconditionally.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub when: Option<String>,
    /// Emit one step per value of the (multi-valued) gating attribute.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub each: bool,
}

/// A decomposition rule: an anchor phrase that selects the rule, extractors
/// that pull attribute values out of the instruction, the attributes that must
/// be present for the rule to apply, and the plan table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    pub name: String,
    /// Substring that selects this rule (e.g. `"real estate website"`). An
    /// instruction lacking the anchor can still match if all required
    /// attributes extract, so paraphrases remain parseable.
    pub anchor: String,
    /// Attributes that must be extracted for the rule to produce a plan.
    pub required: Vec<String>,
    pub extractors: Vec<Extractor>,
    pub plan: Vec<PlanStep>,
}

/// An ordered list of rules tried first-match-wins.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RuleSet {
    pub rules: Vec<Rule>,
}

/// A rule set with all extractor regexes compiled once.
#[derive(Debug, Clone)]
pub struct CompiledRuleSet {
    rules: Vec<CompiledRule>,
}

#[derive(Debug, Clone)]
struct CompiledRule {
    name: String,
    anchor: String,
    required: Vec<String>,
    extractors: Vec<(Regex, Extractor)>,
    plan: Vec<PlanStep>,
}

/// Output of [`scripted_plan`]: the ordered sub-instruction list (last element
/// terminal) plus the extracted attributes that drive coverage scoring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptedPlan {
    pub rule_name: String,
    pub sub_instructions: Vec<SubInstruction>,
    /// `(attribute, value)` pairs in extraction order. Multi-valued attributes
    /// (e.g. `feature`) repeat the name with distinct values.
    pub attrs: Vec<(String, String)>,
}

impl RuleSet {
    pub fn compile(&self) -> Result<CompiledRuleSet, AgentError> {
        let mut rules = Vec::with_capacity(self.rules.len());
        for rule in &self.rules {
            let mut extractors = Vec::with_capacity(rule.extractors.len());
            for ex in &rule.extractors {
                let re = Regex::new(&ex.pattern).map_err(|e| AgentError::InvalidPattern {
                    pattern: ex.pattern.clone(),
                    message: e.to_string(),
                })?;
                if re.captures_len() != ex.attrs.len() + 1 {
                    return Err(AgentError::InvalidPattern {
                        pattern: ex.pattern.clone(),
                        message: format!(
                            "{} capture groups but {} attribute names",
                            re.captures_len() - 1,
                            ex.attrs.len()
                        ),
                    });
                }
                extractors.push((re, ex.clone()));
            }
            rules.push(CompiledRule {
                name: rule.name.clone(),
                anchor: rule.anchor.clone(),
                required: rule.required.clone(),
                extractors,
                plan: rule.plan.clone(),
            });
        }
        Ok(CompiledRuleSet { rules })
    }
}

impl CompiledRule {
    /// Runs all extractors over the instruction. First match wins per
    /// attribute; `split` extractors may emit several values of one attribute.
    fn extract(&self, instruction: &str) -> Vec<(String, String)> {
        let mut attrs: Vec<(String, String)> = Vec::new();
        for (re, ex) in &self.extractors {
            let Some(caps) = re.captures(instruction) else { continue };
            for (gi, name) in ex.attrs.iter().enumerate() {
                let Some(m) = caps.get(gi + 1) else { continue };
                let raw = m.as_str();
                let mut push = |value: &str| {
                    let value = ex.normalize.get(value).map(String::as_str).unwrap_or(value);
                    let multi = ex.split.is_some();
                    let taken = attrs.iter().any(|(n, v)| {
                        n == name && if multi { v == value } else { true }
                    });
                    if !taken {
                        attrs.push((name.clone(), value.to_string()));
                    }
                };
                match &ex.split {
                    Some(sep) => {
                        for part in raw.split(sep.as_str()) {
                            let part = part.trim();
                            if !part.is_empty() {
                                push(part);
                            }
                        }
                    }
                    None => push(raw),
                }
            }
        }
        attrs
    }

    fn has_all_required(&self, attrs: &[(String, String)]) -> bool {
        self.required
            .iter()
            .all(|req| attrs.iter().any(|(n, _)| n == req))
    }
}

fn substitute(template: &str, url: &str, attrs: &[(String, String)], each_value: Option<(&str, &str)>) -> String {
    let mut out = template.replace("{url}", url);
    if let Some((name, value)) = each_value {
        out = out.replace(&format!("{{{name}}}"), value);
    }
    for (name, value) in attrs {
        out = out.replace(&format!("{{{name}}}"), value);
    }
    out
}

impl CompiledRuleSet {
    /// Selects the first applicable rule and returns its extracted attributes
    /// together with the expanded plan. The plan always starts with a
    /// `go to {url}` navigation row (by rule construction) and always ends
    /// with the terminal end marker, which is appended here.
    pub fn plan(
        &self,
        instruction: &str,
        url: &str,
        end_marker: &str,
    ) -> Result<ScriptedPlan, AgentError> {
        for rule in &self.rules {
            let anchored = !rule.anchor.is_empty() && instruction.contains(&rule.anchor);
            let attrs = rule.extract(instruction);
            let complete = rule.has_all_required(&attrs);
            if anchored && !complete {
                let missing = rule
                    .required
                    .iter()
                    .find(|req| !attrs.iter().any(|(n, _)| n == *req))
                    .expect("incomplete rule has a missing attribute");
                return Err(AgentError::MissingRequiredAttr {
                    rule: rule.name.clone(),
                    attr: missing.clone(),
                });
            }
            if !anchored && !complete {
                continue;
            }
            let mut subs = Vec::new();
            for step in &rule.plan {
                let gate_attrs: Vec<&str> = match &step.when {
                    None => Vec::new(),
                    Some(gate) => gate.split('|').collect(),
                };
                let gated_on = if gate_attrs.is_empty() {
                    None
                } else {
                    gate_attrs
                        .iter()
                        .find(|g| attrs.iter().any(|(n, _)| n == *g))
                        .copied()
                };
                if !gate_attrs.is_empty() && gated_on.is_none() {
                    continue;
                }
                if step.each {
                    let name = gated_on.expect("`each` steps must carry a `when` attribute");
                    for (n, v) in &attrs {
                        if n == name {
                            subs.push(SubInstruction::step(substitute(
                                &step.emit,
                                url,
                                &attrs,
                                Some((name, v)),
                            )));
                        }
                    }
                } else {
                    subs.push(SubInstruction::step(substitute(&step.emit, url, &attrs, None)));
                }
            }
            subs.push(SubInstruction::terminal(end_marker));
            return Ok(ScriptedPlan {
                rule_name: rule.name.clone(),
                sub_instructions: subs,
                attrs,
            });
        }
        Err(AgentError::NoRuleMatch)
    }
}

/// Decomposes an instruction into an ordered sub-instruction list using the
/// first matching rule of `rules`. The returned plan's last element is the
/// terminal end-of-episode marker; extracted attribute slots populate
/// downstream scoring's required attributes.
pub fn scripted_plan(
    instruction: &str,
    rules: &RuleSet,
    url: &str,
    end_marker: &str,
) -> Result<ScriptedPlan, AgentError> {
    rules.compile()?.plan(instruction, url, end_marker)
}

fn ex(pattern: &str, attrs: &[&str]) -> Extractor {
    Extractor {
        pattern: pattern.to_string(),
        attrs: attrs.iter().map(|s| s.to_string()).collect(),
        normalize: BTreeMap::new(),
        split: None,
    }
}

fn step(emit: &str) -> PlanStep {
    PlanStep { emit: emit.to_string(), when: None, each: false }
}

fn step_when(emit: &str, when: &str) -> PlanStep {
    PlanStep { emit: emit.to_string(), when: Some(when.to_string()), each: false }
}

impl RuleSet {
    /// The bundled rule sets for the three fixture domains: real-estate,
    /// social-media, and map. Task definition files embed the same data.
    pub fn builtin() -> Self {
        let real_estate = Rule {
            name: "real-estate".to_string(),
            anchor: "real estate website".to_string(),
            required: vec!["location".to_string()],
            extractors: vec![
                ex(r"\bin ([a-z][a-z .-]*?), [a-z]{2}\b", &["location"]),
                ex(r"\b(studio|\d+) bedroom\b", &["bedroom"]),
                ex(r"\b(\d+\+|any) bathroom\b", &["bathroom"]),
                ex(r"\b(houses|townhomes|condos|apartments)\b", &["htype"]),
                ex(r"\bfor (corporate housing|senior housing|student)\b", &["category"]),
                Extractor {
                    split: Some(", ".to_string()),
                    ..ex(r"\bthat ha(?:ve|s) (.+?) (?:and price\b|on real estate)", &["feature"])
                },
                ex(r"\bprice between (\d+) and (\d+)\b", &["price_min", "price_max"]),
                ex(r"\bless than \$?(\d+)\b", &["price_max"]),
                ex(r"\bmax price of \$?(\d+)\b", &["price_max"]),
                ex(r"\bmore than \$?(\d+)\b", &["price_min"]),
                ex(r"\bmin price (?:of )?\$?(\d+)\b", &["price_min"]),
            ],
            plan: vec![
                step("go to {url}"),
                step_when("type in {location} into search", "location"),
                step_when("submit the search", "location"),
                step_when("click on {bedroom} bedroom", "bedroom"),
                step_when("click on {bathroom} bathroom", "bathroom"),
                step_when("scroll down housing type by 200px", "htype"),
                step_when("click on the {htype}", "htype"),
                step_when("click on {category}", "category"),
                PlanStep {
                    emit: "click on {feature}".to_string(),
                    when: Some("feature".to_string()),
                    each: true,
                },
                step_when("click on price", "price_max|price_min"),
                step_when("click on max rent", "price_max"),
                step_when("type in {price_max} into max rent", "price_max"),
                step_when("click on min rent", "price_min"),
                step_when("type in {price_min} into min rent", "price_min"),
            ],
        };

        let social_media = Rule {
            name: "social-media".to_string(),
            anchor: "social media website".to_string(),
            required: vec!["community".to_string(), "sort".to_string(), "ordinal".to_string()],
            extractors: vec![
                ex(r"\bthread (?:in|of|from) (r/[A-Za-z0-9_]+|Taiwan)\b", &["community"]),
                ex(r"\b(hot|new|top) thread\b", &["sort"]),
                Extractor {
                    normalize: [("most", "1st"), ("first", "1st")]
                        .into_iter()
                        .map(|(k, v)| (k.to_string(), v.to_string()))
                        .collect(),
                    ..ex(r"\b(most|first|1st|2nd|3rd)\b", &["ordinal"])
                },
                ex(
                    r"\b(?:filtered by|tagged as) (.+?)(?: flair)? (?:at|on) social media website",
                    &["flair"],
                ),
            ],
            plan: vec![
                step("go to {url}"),
                step_when("click on {community}", "community"),
                step_when("click on the {flair} flair", "flair"),
                step_when("click on {sort}", "sort"),
                step_when("click on the {ordinal} thread", "ordinal"),
            ],
        };

        let map = Rule {
            name: "map".to_string(),
            anchor: "map website".to_string(),
            required: vec![
                "start".to_string(),
                "goal".to_string(),
                "transportation".to_string(),
            ],
            extractors: vec![
                ex(r"\b(?:way|path) from (.+?) to (.+?) (?:by|with)\b", &["start", "goal"]),
                ex(r"\bmove (.+?) from (.+?) (?:by|with)\b", &["goal", "start"]),
                ex(r"\bgo to (.+?) from (.+?) (?:by|with)\b", &["goal", "start"]),
                ex(r"\b(Cycling|Transit|Walking|Driving|Best)\b", &["transportation"]),
                ex(r"\b(1st|2nd|3rd)\b", &["ordinal"]),
                ex(r"\b(Parking Lots|Gas stations|Hotels) along the way\b", &["poi"]),
            ],
            plan: vec![
                step("go to {url}"),
                step_when("type in {start} into starting point", "start"),
                step_when("type in {goal} into destination", "goal"),
                step_when("click on route search", "start"),
                step_when("click on {transportation}", "transportation"),
                step_when("click on the {ordinal} route", "ordinal"),
                step_when("type in {poi} into search along route", "poi"),
            ],
        };

        RuleSet { rules: vec![real_estate, social_media, map] }
    }
}

/// The element id (by the [`slug`] convention) a sub-instruction targets, if
/// it targets one. Navigation and terminal steps target none.
pub fn target_slug(text: &str, end_marker: &str) -> Option<String> {
    super::program::parse_action(text, end_marker)
        .and_then(|a| a.target_name().map(slug))
}
