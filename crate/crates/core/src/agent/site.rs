//! Deterministic fixture sites: a set of HTML pages plus a transition table
//! `(page, action) → next page`, executed by a WebDriver-style interpreter
//! over the selector-command dialect.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::dom::{annotate_refs, clean, parse, CleaningConfig, Document, Element, Node};

use super::program::{parse_program, Command};
use super::{AgentError, ExecStatus};

/// On-disk shape of `site.json`.
#[derive(Debug, Deserialize)]
struct SiteManifest {
    start_url: String,
    /// URL → HTML file path relative to the manifest.
    pages: BTreeMap<String, String>,
    /// `"{url}|{action}"` → next URL, where action is `click:{id}` or
    /// `submit:{id}`.
    #[serde(default)]
    transitions: BTreeMap<String, String>,
}

/// A loaded fixture site. Pages are parsed, cleaned, and annotated once;
/// executors clone per-episode working copies.
#[derive(Debug, Clone)]
pub struct FixtureSite {
    pub start_url: String,
    pages: BTreeMap<String, Document>,
    transitions: BTreeMap<(String, String), String>,
}

impl FixtureSite {
    /// Builds a site from in-memory HTML. Each page is cleaned with the
    /// default configuration and `data-ref`-annotated.
    pub fn from_pages(
        start_url: impl Into<String>,
        pages: BTreeMap<String, String>,
        transitions: BTreeMap<(String, String), String>,
    ) -> Result<Self, AgentError> {
        let start_url = start_url.into();
        if !pages.contains_key(&start_url) {
            return Err(AgentError::Site(format!("start_url {start_url} has no page")));
        }
        let cfg = CleaningConfig::default();
        let pages = pages
            .into_iter()
            .map(|(url, html)| (url, annotate_refs(&clean(&parse(&html), &cfg))))
            .collect();
        Ok(Self { start_url, pages, transitions })
    }

    /// Loads a site from a `site.json` manifest; page paths resolve relative
    /// to the manifest's directory.
    pub fn load(manifest_path: &Path) -> Result<Self, AgentError> {
        let text = std::fs::read_to_string(manifest_path)
            .map_err(|e| AgentError::Site(format!("{}: {e}", manifest_path.display())))?;
        let manifest: SiteManifest = serde_json::from_str(&text)
            .map_err(|e| AgentError::Site(format!("{}: {e}", manifest_path.display())))?;
        let dir = manifest_path.parent().unwrap_or(Path::new("."));
        let mut pages = BTreeMap::new();
        for (url, rel) in manifest.pages {
            let path = dir.join(&rel);
            let html = std::fs::read_to_string(&path)
                .map_err(|e| AgentError::Site(format!("{}: {e}", path.display())))?;
            pages.insert(url, html);
        }
        let mut transitions = BTreeMap::new();
        for (key, next) in manifest.transitions {
            let Some((url, action)) = key.split_once('|') else {
                return Err(AgentError::Site(format!(
                    "transition key {key:?} is not \"url|action\""
                )));
            };
            transitions.insert((url.to_string(), action.to_string()), next);
        }
        Self::from_pages(manifest.start_url, pages, transitions)
    }

    pub fn page(&self, url: &str) -> Option<&Document> {
        self.pages.get(url)
    }

    pub fn urls(&self) -> impl Iterator<Item = &str> {
        self.pages.keys().map(String::as_str)
    }

    fn transition(&self, url: &str, action: &str) -> Option<&str> {
        self.transitions
            .get(&(url.to_string(), action.to_string()))
            .map(String::as_str)
    }
}

/// Mutable pre-order lookup of an element by `data-ref`.
fn find_by_ref_mut(doc: &mut Document, data_ref: u32) -> Option<&mut Element> {
    fn walk(nodes: &mut [Node], data_ref: u32) -> Option<&mut Element> {
        for node in nodes {
            if let Node::Element(el) = node {
                if el.data_ref == Some(data_ref) {
                    return Some(el);
                }
                if let Some(found) = walk(&mut el.children, data_ref) {
                    return Some(found);
                }
            }
        }
        None
    }
    walk(&mut doc.children, data_ref)
}

/// WebDriver-style interpreter over a [`FixtureSite`]. Holds the per-episode
/// browsing state: the current page (a mutable working copy, so typed values
/// persist in the DOM) and the list of visited URLs.
#[derive(Debug, Clone)]
pub struct FixtureExecutor<'a> {
    site: &'a FixtureSite,
    url_allow_prefixes: Vec<String>,
    current: Option<(String, Document)>,
    visited: Vec<String>,
}

impl<'a> FixtureExecutor<'a> {
    pub fn new(site: &'a FixtureSite, url_allow_prefixes: &[String]) -> Self {
        Self {
            site,
            url_allow_prefixes: url_allow_prefixes.to_vec(),
            current: None,
            visited: Vec::new(),
        }
    }

    pub fn current_url(&self) -> Option<&str> {
        self.current.as_ref().map(|(url, _)| url.as_str())
    }

    pub fn current_doc(&self) -> Option<&Document> {
        self.current.as_ref().map(|(_, doc)| doc)
    }

    pub fn visited_urls(&self) -> &[String] {
        &self.visited
    }

    pub fn reset(&mut self) {
        self.current = None;
        self.visited.clear();
    }

    fn url_allowed(&self, url: &str) -> bool {
        self.url_allow_prefixes.iter().any(|p| url.starts_with(p.as_str()))
    }

    /// Navigates to a URL: the attempt is always recorded in `visited`, then
    /// checked against the allow prefixes and the page table.
    fn navigate(&mut self, url: &str) -> ExecStatus {
        self.visited.push(url.to_string());
        if !self.url_allowed(url) {
            return ExecStatus::BadUrl(url.to_string());
        }
        match self.site.page(url) {
            Some(doc) => {
                self.current = Some((url.to_string(), doc.clone()));
                ExecStatus::Ok
            }
            None => ExecStatus::ProgramError(format!("no such page: {url}")),
        }
    }

    fn apply(&mut self, command: &Command) -> ExecStatus {
        match command {
            Command::Get { url } => self.navigate(url),
            Command::Click { data_ref } => self.interact(*data_ref, "click", |_| ExecStatus::Ok),
            Command::Submit { data_ref } => self.interact(*data_ref, "submit", |_| ExecStatus::Ok),
            Command::Clear { data_ref } => self.interact(*data_ref, "", |el| {
                el.set_attr("value", "");
                ExecStatus::Ok
            }),
            Command::SendKeys { data_ref, text } => {
                let text = text.clone();
                self.interact(*data_ref, "", move |el| {
                    let value = format!("{}{}", el.attr("value").unwrap_or(""), text);
                    el.set_attr("value", &value);
                    ExecStatus::Ok
                })
            }
            Command::Scroll { id, .. } => {
                let Some((_, doc)) = &self.current else {
                    return ExecStatus::ProgramError("no page loaded".to_string());
                };
                let found = doc.elements().any(|el| el.attr("id") == Some(id.as_str()));
                if found {
                    ExecStatus::Ok
                } else {
                    ExecStatus::ProgramError(format!("no element with id #{id}"))
                }
            }
        }
    }

    /// Resolves a data-ref on the current page, applies `act` to the element,
    /// and follows a `{verb}:{id}` transition when the element has an id and
    /// the table defines one. Elements without a transition are no-ops
    /// (checkbox-style controls).
    fn interact(
        &mut self,
        data_ref: u32,
        verb: &str,
        act: impl FnOnce(&mut Element) -> ExecStatus,
    ) -> ExecStatus {
        let Some((url, doc)) = &mut self.current else {
            return ExecStatus::ProgramError("no page loaded".to_string());
        };
        let url = url.clone();
        let Some(el) = find_by_ref_mut(doc, data_ref) else {
            return ExecStatus::ProgramError(format!("no element with data-ref {data_ref}"));
        };
        let id = el.attr("id").map(str::to_string);
        let status = act(el);
        if !matches!(status, ExecStatus::Ok) {
            return status;
        }
        if !verb.is_empty() {
            if let Some(id) = id {
                let action = format!("{verb}:{id}");
                if let Some(next) = self.site.transition(&url, &action) {
                    let next = next.to_string();
                    return self.navigate(&next);
                }
            }
        }
        ExecStatus::Ok
    }

    /// Parses and runs a program. Commands run in order; the first failing
    /// command stops execution and its status is returned. An empty program
    /// (terminal step) is a successful no-op.
    pub fn execute(&mut self, program: &str) -> ExecStatus {
        let commands = match parse_program(program) {
            Ok(commands) => commands,
            Err(message) => return ExecStatus::ProgramError(message),
        };
        for command in &commands {
            let status = self.apply(command);
            if !matches!(status, ExecStatus::Ok) {
                return status;
            }
        }
        ExecStatus::Ok
    }
}

#[cfg(test)]
pub(crate) mod test_site {
    use super::*;

    /// A miniature two-page site used across agent unit tests: a home page
    /// with a search box and a results page with filter controls.
    pub fn mini_site() -> FixtureSite {
        let home = r#"<html><body>
            <h1>Miniature Realty</h1>
            <form><input id="search" type="text" value=""/></form>
        </body></html>"#;
        let results = r#"<html><body>
            <ul><li id="1-bedroom">1 bed</li><li id="2-bedroom">2 beds</li></ul>
            <div id="housing-type">
              <span id="houses">Houses</span><span id="apartments">Apartments</span>
            </div>
            <div id="price">Price</div>
            <div id="max-rent-panel"><label for="max-rent">Max rent!</label>
              <input id="max-rent" type="text" value=""/></div>
        </body></html>"#;
        let pages: BTreeMap<String, String> = [
            ("https://mini.example/".to_string(), home.to_string()),
            ("https://mini.example/results".to_string(), results.to_string()),
        ]
        .into();
        let transitions: BTreeMap<(String, String), String> = [(
            ("https://mini.example/".to_string(), "submit:search".to_string()),
            "https://mini.example/results".to_string(),
        )]
        .into();
        FixtureSite::from_pages("https://mini.example/", pages, transitions).unwrap()
    }

    pub fn ref_of(doc: &Document, id: &str) -> u32 {
        doc.elements()
            .find(|el| el.attr("id") == Some(id))
            .and_then(|el| el.data_ref)
            .unwrap_or_else(|| panic!("no element with id {id}"))
    }
}
