//! The selector-command program dialect: sub-instruction texts are parsed
//! into [`Action`]s, actions are emitted as WebDriver-style Python lines
//! (`driver.find_element(By.CSS_SELECTOR, '[data-ref="N"]')…`), and the
//! fixture executor parses exactly those lines back into [`Command`]s.

use std::sync::OnceLock;

use regex::Regex;

/// The semantic action behind a sub-instruction text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    /// `go to {url}`
    Goto { url: String },
    /// `type in {text} into {field}`
    Type { text: String, field: String },
    /// `submit the {field}`
    Submit { field: String },
    /// `click on {target}` / `click on the {target}`
    Click { target: String },
    /// `scroll down {target} by {px}px` (or `scroll up`, negative pixels)
    Scroll { target: String, px: i64 },
    /// The designated end-of-episode marker.
    End,
}

impl Action {
    /// The spoken name of the element this action touches, if any.
    /// Navigation and terminal actions touch none.
    pub fn target_name(&self) -> Option<&str> {
        match self {
            Action::Goto { .. } | Action::End => None,
            Action::Type { field, .. } | Action::Submit { field } => Some(field),
            Action::Click { target } | Action::Scroll { target, .. } => Some(target),
        }
    }

    /// Whether the action requires a resolved element (and hence a data-ref).
    pub fn needs_element(&self) -> bool {
        self.target_name().is_some()
    }
}

fn scroll_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^scroll (down|up) (.+) by (\d+)px$").expect("static regex"))
}

/// Parses a sub-instruction text into an [`Action`]. Returns `None` for text
/// outside the dialect (the scripted programmer then fails, which surfaces as
/// a program error on the step).
pub fn parse_action(text: &str, end_marker: &str) -> Option<Action> {
    let text = text.trim();
    if text == end_marker {
        return Some(Action::End);
    }
    if let Some(url) = text.strip_prefix("go to ") {
        return Some(Action::Goto { url: url.trim().to_string() });
    }
    if let Some(rest) = text.strip_prefix("type in ") {
        // Split on the *last* " into " so typed text may itself contain the word.
        let idx = rest.rfind(" into ")?;
        let (typed, field) = rest.split_at(idx);
        return Some(Action::Type {
            text: typed.to_string(),
            field: field["into ".len() + 1..].trim().to_string(),
        });
    }
    if let Some(field) = text.strip_prefix("submit the ") {
        return Some(Action::Submit { field: field.trim().to_string() });
    }
    if let Some(target) = text.strip_prefix("click on ") {
        let target = target.strip_prefix("the ").unwrap_or(target);
        return Some(Action::Click { target: target.trim().to_string() });
    }
    if let Some(caps) = scroll_re().captures(text) {
        let magnitude: i64 = caps[3].parse().ok()?;
        let px = if &caps[1] == "up" { -magnitude } else { magnitude };
        return Some(Action::Scroll { target: caps[2].to_string(), px });
    }
    None
}

fn selector_line(data_ref: u32, call: &str) -> String {
    format!("driver.find_element(By.CSS_SELECTOR, '[data-ref=\"{data_ref}\"]').{call}")
}

fn capitalize_first(text: &str) -> String {
    let mut chars = text.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Emits the program text for one sub-instruction: a `# Comment` line holding
/// the (capitalized) sub-instruction followed by the selector-command lines.
/// `data_ref` grounds element actions; `scroll_id` grounds scroll targets
/// (scrolling addresses elements by id, not data-ref). Terminal actions emit
/// an empty program.
pub fn emit_program(action: &Action, text: &str, data_ref: Option<u32>, scroll_id: &str) -> String {
    let mut lines: Vec<String> = Vec::new();
    match action {
        Action::End => return String::new(),
        Action::Goto { url } => {
            lines.push(format!("# {}", capitalize_first(text)));
            lines.push(format!("driver.get(\"{url}\")"));
        }
        Action::Type { text: typed, .. } => {
            let n = data_ref.expect("type action requires a data-ref");
            lines.push(format!("# {}", capitalize_first(text)));
            lines.push(selector_line(n, "clear()"));
            lines.push(selector_line(n, &format!("send_keys(\"{typed}\")")));
        }
        Action::Submit { .. } => {
            let n = data_ref.expect("submit action requires a data-ref");
            lines.push(format!("# {}", capitalize_first(text)));
            lines.push(selector_line(n, "submit()"));
        }
        Action::Click { .. } => {
            let n = data_ref.expect("click action requires a data-ref");
            lines.push(format!("# {}", capitalize_first(text)));
            lines.push(selector_line(n, "click()"));
        }
        Action::Scroll { px, .. } => {
            lines.push(format!("# {}", capitalize_first(text)));
            lines.push(format!(
                "driver.execute_script('getScrollParent(document.querySelector(\"#{scroll_id}\")).scrollBy({{top: {px}}})')"
            ));
        }
    }
    lines.join("\n")
}

/// One executable command parsed from program text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Get { url: String },
    Click { data_ref: u32 },
    Clear { data_ref: u32 },
    SendKeys { data_ref: u32, text: String },
    Submit { data_ref: u32 },
    Scroll { id: String, px: i64 },
}

fn get_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r#"^driver\.get\("([^"]*)"\)$"#).expect("static regex"))
}

fn find_element_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r#"^driver\.find_element\(By\.CSS_SELECTOR, '\[data-ref="([0-9]+)"\]'\)\.(click\(\)|clear\(\)|submit\(\)|send_keys\("(.*)"\))$"#,
        )
        .expect("static regex")
    })
}

fn execute_script_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r##"^driver\.execute_script\('getScrollParent\(document\.querySelector\("#([^"]+)"\)\)\.scrollBy\(\{top: (-?[0-9]+)\}\)'\)$"##,
        )
        .expect("static regex")
    })
}

/// Parses program text into commands. Comment (`#`) and blank lines are
/// skipped. Any other unrecognized line is an error carrying that line.
pub fn parse_program(program: &str) -> Result<Vec<Command>, String> {
    let mut commands = Vec::new();
    for raw in program.lines() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(caps) = get_re().captures(line) {
            commands.push(Command::Get { url: caps[1].to_string() });
            continue;
        }
        if let Some(caps) = find_element_re().captures(line) {
            let data_ref: u32 = caps[1].parse().map_err(|_| format!("data-ref overflow: {line}"))?;
            let command = match &caps[2] {
                "click()" => Command::Click { data_ref },
                "clear()" => Command::Clear { data_ref },
                "submit()" => Command::Submit { data_ref },
                _ => Command::SendKeys { data_ref, text: caps[3].to_string() },
            };
            commands.push(command);
            continue;
        }
        if let Some(caps) = execute_script_re().captures(line) {
            let px: i64 = caps[2].parse().map_err(|_| format!("scroll offset overflow: {line}"))?;
            commands.push(Command::Scroll { id: caps[1].to_string(), px });
            continue;
        }
        return Err(format!("unrecognized program line: {line}"));
    }
    Ok(commands)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_action_covers_the_dialect() {
        assert_eq!(
            parse_action("go to https://a.example/", "END"),
            Some(Action::Goto { url: "https://a.example/".into() })
        );
        assert_eq!(
            parse_action("type in walnut creek, ca into search", "END"),
            Some(Action::Type { text: "walnut creek, ca".into(), field: "search".into() })
        );
        assert_eq!(
            parse_action("type in 7500 into max rent", "END"),
            Some(Action::Type { text: "7500".into(), field: "max rent".into() })
        );
        assert_eq!(
            parse_action("submit the search", "END"),
            Some(Action::Submit { field: "search".into() })
        );
        assert_eq!(
            parse_action("click on the apartments", "END"),
            Some(Action::Click { target: "apartments".into() })
        );
        assert_eq!(
            parse_action("click on 2+ bathroom", "END"),
            Some(Action::Click { target: "2+ bathroom".into() })
        );
        assert_eq!(
            parse_action("scroll down housing type by 200px", "END"),
            Some(Action::Scroll { target: "housing type".into(), px: 200 })
        );
        assert_eq!(
            parse_action("scroll up sidebar by 50px", "END"),
            Some(Action::Scroll { target: "sidebar".into(), px: -50 })
        );
        assert_eq!(parse_action("END", "END"), Some(Action::End));
        assert_eq!(parse_action("dance", "END"), None);
    }

    #[test]
    fn type_splits_on_last_into() {
        // Typed text containing " into " still routes to the right field.
        assert_eq!(
            parse_action("type in turn into a pumpkin into search", "END"),
            Some(Action::Type { text: "turn into a pumpkin".into(), field: "search".into() })
        );
    }

    #[test]
    fn emitted_type_program_matches_the_dialect() {
        let action = parse_action("type in walnut creek, ca into search", "END").unwrap();
        let program = emit_program(&action, "type in walnut creek, ca into search", Some(175), "");
        assert_eq!(
            program,
            "# Type in walnut creek, ca into search\n\
             driver.find_element(By.CSS_SELECTOR, '[data-ref=\"175\"]').clear()\n\
             driver.find_element(By.CSS_SELECTOR, '[data-ref=\"175\"]').send_keys(\"walnut creek, ca\")"
        );
    }

    #[test]
    fn emitted_submit_click_and_scroll_match_the_dialect() {
        let submit = parse_action("submit the search", "END").unwrap();
        assert_eq!(
            emit_program(&submit, "submit the search", Some(175), ""),
            "# Submit the search\n\
             driver.find_element(By.CSS_SELECTOR, '[data-ref=\"175\"]').submit()"
        );
        let click = parse_action("click on the apartments", "END").unwrap();
        assert_eq!(
            emit_program(&click, "click on the apartments", Some(572), ""),
            "# Click on the apartments\n\
             driver.find_element(By.CSS_SELECTOR, '[data-ref=\"572\"]').click()"
        );
        let scroll = parse_action("scroll down housing type by 200px", "END").unwrap();
        assert_eq!(
            emit_program(&scroll, "scroll down housing type by 200px", None, "housing-type"),
            "# Scroll down housing type by 200px\n\
             driver.execute_script('getScrollParent(document.querySelector(\"#housing-type\")).scrollBy({top: 200})')"
        );
    }

    #[test]
    fn terminal_action_emits_empty_program() {
        assert_eq!(emit_program(&Action::End, "END", None, ""), "");
    }

    #[test]
    fn parse_program_round_trips_emitted_text() {
        let action = parse_action("type in 7500 into max rent", "END").unwrap();
        let program = emit_program(&action, "type in 7500 into max rent", Some(9), "");
        let commands = parse_program(&program).unwrap();
        assert_eq!(
            commands,
            vec![
                Command::Clear { data_ref: 9 },
                Command::SendKeys { data_ref: 9, text: "7500".into() },
            ]
        );
    }

    #[test]
    fn parse_program_handles_every_command_form() {
        let text = r##"# Comment line

driver.get("https://site.example/")
driver.find_element(By.CSS_SELECTOR, '[data-ref="3"]').click()
driver.find_element(By.CSS_SELECTOR, '[data-ref="4"]').clear()
driver.find_element(By.CSS_SELECTOR, '[data-ref="4"]').send_keys("hello world")
driver.find_element(By.CSS_SELECTOR, '[data-ref="4"]').submit()
driver.execute_script('getScrollParent(document.querySelector("#list")).scrollBy({top: -40})')"##;
        let commands = parse_program(text).unwrap();
        assert_eq!(
            commands,
            vec![
                Command::Get { url: "https://site.example/".into() },
                Command::Click { data_ref: 3 },
                Command::Clear { data_ref: 4 },
                Command::SendKeys { data_ref: 4, text: "hello world".into() },
                Command::Submit { data_ref: 4 },
                Command::Scroll { id: "list".into(), px: -40 },
            ]
        );
    }

    #[test]
    fn unknown_line_is_an_error() {
        let err = parse_program("driver.quit()").unwrap_err();
        assert!(err.contains("driver.quit()"), "{err}");
    }

    #[test]
    fn empty_program_parses_to_no_commands() {
        assert_eq!(parse_program("").unwrap(), vec![]);
    }

    #[test]
    fn send_keys_with_apostrophe_round_trips() {
        let action = parse_action("type in Children's Fairyland into starting point", "END").unwrap();
        let program = emit_program(&action, "type in Children's Fairyland into starting point", Some(2), "");
        let commands = parse_program(&program).unwrap();
        assert!(commands.contains(&Command::SendKeys { data_ref: 2, text: "Children's Fairyland".into() }));
    }
}
