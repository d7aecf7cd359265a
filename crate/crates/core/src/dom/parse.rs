//! Forgiving HTML parser.
//!
//! The parser is total over strings: malformed markup never fails, it just
//! degrades. Recovery rules are the pragmatic subset needed for real pages:
//! unmatched close tags are dropped, open elements are closed at end of
//! input, a small table of auto-close rules handles `<p>`, list items and
//! table cells, and `script`/`style` bodies are read as raw text. Whitespace
//! in text and attribute values is collapsed at parse time so that a
//! parse/serialize round trip is stable.

use super::{is_void, normalize_ws, Document, DomError, Element, Node};

/// Parse a document from UTF-8 text. Total: never fails.
pub fn parse(input: &str) -> Document {
    Parser::new(input).run()
}

/// Parse a document from raw bytes, rejecting invalid UTF-8.
pub fn parse_bytes(input: &[u8]) -> Result<Document, DomError> {
    Ok(parse(std::str::from_utf8(input)?))
}

/// Opening one of these closes an open `<p>` first.
const P_CLOSERS: &[&str] = &[
    "address",
    "article",
    "aside",
    "blockquote",
    "details",
    "div",
    "dl",
    "fieldset",
    "figcaption",
    "figure",
    "footer",
    "form",
    "h1",
    "h2",
    "h3",
    "h4",
    "h5",
    "h6",
    "header",
    "hr",
    "main",
    "menu",
    "nav",
    "ol",
    "p",
    "pre",
    "section",
    "table",
    "ul",
];

/// Tags whose content is taken verbatim up to the matching close tag.
const RAW_TEXT: &[&str] = &["script", "style"];

/// Tags the newly opened `tag` implicitly closes when found on top of the
/// open-element stack.
fn auto_closes(tag: &str) -> &'static [&'static str] {
    match tag {
        "li" => &["li"],
        "dt" | "dd" => &["dt", "dd"],
        "tr" => &["tr", "td", "th"],
        "td" | "th" => &["td", "th"],
        "option" => &["option"],
        _ => {
            if P_CLOSERS.contains(&tag) {
                &["p"]
            } else {
                &[]
            }
        }
    }
}

struct Parser<'a> {
    input: &'a str,
    pos: usize,
    stack: Vec<Element>,
    roots: Vec<Node>,
    /// Raw text accumulated across skipped comments and directives, flushed
    /// (normalized) when a real tag boundary is reached.
    pending_text: String,
}

impl<'a> Parser<'a> {
    fn new(input: &'a str) -> Self {
        Parser {
            input,
            pos: 0,
            stack: Vec::new(),
            roots: Vec::new(),
            pending_text: String::new(),
        }
    }

    fn run(mut self) -> Document {
        while self.pos < self.input.len() {
            match self.rest().find('<') {
                None => {
                    self.pending_text.push_str(self.rest());
                    self.pos = self.input.len();
                }
                Some(off) => {
                    self.pending_text.push_str(&self.rest()[..off]);
                    self.pos += off;
                    self.dispatch_tag();
                }
            }
        }
        self.flush_text();
        while let Some(e) = self.stack.pop() {
            self.attach(Node::Element(e));
        }
        Document {
            children: self.roots,
        }
    }

    fn rest(&self) -> &'a str {
        &self.input[self.pos..]
    }

    fn peek_at(&self, off: usize) -> Option<char> {
        self.rest()[off..].chars().next()
    }

    /// Attach a completed node to the innermost open element, or the root.
    fn attach(&mut self, node: Node) {
        match self.stack.last_mut() {
            Some(parent) => parent.children.push(node),
            None => self.roots.push(node),
        }
    }

    fn flush_text(&mut self) {
        if self.pending_text.is_empty() {
            return;
        }
        let text = normalize_ws(&decode_entities(&self.pending_text));
        self.pending_text.clear();
        if !text.is_empty() {
            self.attach(Node::Text(text));
        }
    }

    /// `pos` sits on `<`. Decide what construct follows and consume it.
    fn dispatch_tag(&mut self) {
        match self.peek_at(1) {
            Some('/') => {
                self.flush_text();
                self.close_tag();
            }
            Some('!') | Some('?') => {
                // Comments and directives vanish without breaking the
                // surrounding text run.
                self.skip_markup_declaration();
            }
            Some(c) if c.is_ascii_alphabetic() => {
                self.flush_text();
                self.open_tag();
            }
            _ => {
                // Stray `<`: literal text.
                self.pending_text.push('<');
                self.pos += 1;
            }
        }
    }

    fn skip_markup_declaration(&mut self) {
        if self.rest().starts_with("<!--") {
            match self.rest().find("-->") {
                Some(end) => self.pos += end + 3,
                None => self.pos = self.input.len(),
            }
        } else {
            match self.rest().find('>') {
                Some(end) => self.pos += end + 1,
                None => self.pos = self.input.len(),
            }
        }
    }

    fn close_tag(&mut self) {
        self.pos += 2; // "</"
        let name = self.read_name();
        match self.rest().find('>') {
            Some(end) => self.pos += end + 1,
            None => self.pos = self.input.len(),
        }
        if name.is_empty() {
            return;
        }
        let Some(depth) = self.stack.iter().rposition(|e| e.tag == name) else {
            return; // unmatched close tag: ignore
        };
        while self.stack.len() > depth {
            let e = self.stack.pop().unwrap();
            self.attach(Node::Element(e));
        }
    }

    fn open_tag(&mut self) {
        self.pos += 1; // "<"
        let name = self.read_name();
        let mut element = Element::new(name.clone());
        let mut self_closing = false;

        loop {
            self.skip_ws();
            match self.peek_at(0) {
                None => break,
                Some('>') => {
                    self.pos += 1;
                    break;
                }
                Some('/') => {
                    if self.peek_at(1) == Some('>') {
                        self.pos += 2;
                        self_closing = true;
                        break;
                    }
                    self.pos += 1; // stray slash inside a tag
                }
                Some(_) => self.read_attr(&mut element),
            }
        }

        let closable = auto_closes(&name);
        while self
            .stack
            .last()
            .is_some_and(|e| closable.contains(&e.tag.as_str()))
        {
            let e = self.stack.pop().unwrap();
            self.attach(Node::Element(e));
        }

        if is_void(&name) || self_closing {
            self.attach(Node::Element(element));
        } else if RAW_TEXT.contains(&name.as_str()) {
            self.read_raw_text(&mut element);
            self.attach(Node::Element(element));
        } else {
            self.stack.push(element);
        }
    }

    /// Consume verbatim content up to `</tag`, attach it as a text child.
    fn read_raw_text(&mut self, element: &mut Element) {
        let close = format!("</{}", element.tag);
        let lower = self.rest().to_ascii_lowercase();
        let (content, after) = match lower.find(&close) {
            Some(off) => {
                let content = &self.rest()[..off];
                let tail = &self.rest()[off..];
                let skip = tail.find('>').map(|i| i + 1).unwrap_or(tail.len());
                (content, off + skip)
            }
            None => (self.rest(), self.rest().len()),
        };
        let text = normalize_ws(content);
        if !text.is_empty() {
            element.children.push(Node::Text(text));
        }
        self.pos += after;
    }

    fn read_name(&mut self) -> String {
        let rest = self.rest();
        let end = rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == ':'))
            .unwrap_or(rest.len());
        let name = rest[..end].to_ascii_lowercase();
        self.pos += end;
        name
    }

    fn skip_ws(&mut self) {
        let rest = self.rest();
        let end = rest
            .find(|c: char| !c.is_whitespace())
            .unwrap_or(rest.len());
        self.pos += end;
    }

    fn read_attr(&mut self, element: &mut Element) {
        let rest = self.rest();
        let end = rest
            .find(|c: char| c.is_whitespace() || c == '=' || c == '>' || c == '/')
            .unwrap_or(rest.len());
        let name = rest[..end].to_ascii_lowercase();
        self.pos += end;
        if name.is_empty() {
            // Defensive: skip one char so the attr loop always advances.
            self.pos += self.peek_at(0).map(char::len_utf8).unwrap_or(0);
            return;
        }
        self.skip_ws();
        let value = if self.peek_at(0) == Some('=') {
            self.pos += 1;
            self.skip_ws();
            self.read_attr_value()
        } else {
            String::new()
        };

        if name == "data-ref" {
            if let Ok(n) = value.parse::<u32>() {
                if element.data_ref.is_none() {
                    element.data_ref = Some(n);
                }
                return;
            }
        }
        // First occurrence of a duplicated attribute wins.
        if element.attr(&name).is_none() {
            element.attrs.push((name, value));
        }
    }

    fn read_attr_value(&mut self) -> String {
        let raw = match self.peek_at(0) {
            Some(q @ ('"' | '\'')) => {
                self.pos += 1;
                let rest = self.rest();
                match rest.find(q) {
                    Some(end) => {
                        let v = &rest[..end];
                        self.pos += end + 1;
                        v
                    }
                    None => {
                        let v = rest;
                        self.pos = self.input.len();
                        v
                    }
                }
            }
            _ => {
                let rest = self.rest();
                let end = rest
                    .find(|c: char| c.is_whitespace() || c == '>')
                    .unwrap_or(rest.len());
                let v = &rest[..end];
                self.pos += end;
                v
            }
        };
        normalize_ws(&decode_entities(raw))
    }
}

/// Decode the five named entities plus decimal and hex character references.
/// Anything unrecognized stays literal.
fn decode_entities(s: &str) -> String {
    if !s.contains('&') {
        return s.to_string();
    }
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(amp) = rest.find('&') {
        out.push_str(&rest[..amp]);
        rest = &rest[amp..];
        match decode_one_entity(rest) {
            Some((ch, len)) => {
                out.push(ch);
                rest = &rest[len..];
            }
            None => {
                out.push('&');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

/// Try to decode an entity at the start of `s` (which begins with `&`).
/// Returns the decoded char and the byte length consumed.
fn decode_one_entity(s: &str) -> Option<(char, usize)> {
    const NAMED: &[(&str, char)] = &[
        ("&amp;", '&'),
        ("&lt;", '<'),
        ("&gt;", '>'),
        ("&quot;", '"'),
        ("&apos;", '\''),
    ];
    for (name, ch) in NAMED {
        if s.starts_with(name) {
            return Some((*ch, name.len()));
        }
    }
    let body = s.strip_prefix("&#")?;
    let (digits, radix) = match body.strip_prefix(['x', 'X']) {
        Some(hex) => (hex, 16),
        None => (body, 10),
    };
    let end = digits
        .find(|c: char| !c.is_ascii_hexdigit())
        .unwrap_or(digits.len());
    if end == 0 || !digits[..end].starts_with(|c: char| c.is_digit(radix)) {
        return None;
    }
    if !digits[end..].starts_with(';') {
        return None;
    }
    let code = u32::from_str_radix(&digits[..end], radix).ok()?;
    let ch = char::from_u32(code)?;
    // consumed: "&#" + optional x + digits + ";"
    let prefix = s.len() - body.len();
    let x = if radix == 16 { 1 } else { 0 };
    Some((ch, prefix + x + end + 1))
}
