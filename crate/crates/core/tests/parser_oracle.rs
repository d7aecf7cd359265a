//! Cross-checks the bundled forgiving parser against a full HTML5 parser
//! (the `scraper` crate) on recovery-rule snippets and the fixture pages.
//!
//! The comparison is over pre-order tag sequences under `<body>`, with two
//! normalizations for known divergences of the simplified parser: the HTML5
//! tree builder inserts `tbody` between `table` and `tr` (ours does not), and
//! with scripting enabled it treats `noscript` content as raw text (ours
//! parses it as markup; cleaning removes it entirely either way). `tbody`
//! elements are dropped from the oracle sequence and `noscript` subtrees are
//! skipped on both sides.

use std::path::{Path, PathBuf};

use htmlforge_core::dom::{parse, Document, Element, Node};
use scraper::{ElementRef, Html};

/// Pre-order tags under the first `<body>` of our parse, skipping `noscript`
/// subtrees. `None` when the document has no explicit body element.
fn our_body_tags(doc: &Document) -> Option<Vec<String>> {
    fn find_body<'a>(nodes: &'a [Node]) -> Option<&'a Element> {
        for node in nodes {
            if let Node::Element(e) = node {
                if e.tag == "body" {
                    return Some(e);
                }
                if let Some(found) = find_body(&e.children) {
                    return Some(found);
                }
            }
        }
        None
    }
    fn collect(nodes: &[Node], out: &mut Vec<String>) {
        for node in nodes {
            if let Node::Element(e) = node {
                if e.tag == "noscript" {
                    continue;
                }
                out.push(e.tag.clone());
                collect(&e.children, out);
            }
        }
    }
    let body = find_body(&doc.children)?;
    let mut out = Vec::new();
    collect(&body.children, &mut out);
    Some(out)
}

/// Pre-order tags under `<body>` per the HTML5 reference parser, skipping
/// `noscript` subtrees and dropping inserted `tbody` wrappers.
fn oracle_body_tags(html: &str) -> Vec<String> {
    fn collect(element: ElementRef<'_>, out: &mut Vec<String>) {
        for child in element.children() {
            if let Some(child_el) = ElementRef::wrap(child) {
                let name = child_el.value().name().to_string();
                if name == "noscript" {
                    continue;
                }
                if name != "tbody" {
                    out.push(name);
                }
                collect(child_el, out);
            }
        }
    }
    let doc = Html::parse_document(html);
    let selector = scraper::Selector::parse("body").unwrap();
    let mut out = Vec::new();
    if let Some(body) = doc.select(&selector).next() {
        collect(body, &mut out);
    }
    out
}

#[test]
fn recovery_rules_agree_with_the_reference_parser() {
    let snippets = [
        // Sibling recovery for unclosed paragraphs.
        "<p>a<p>b",
        "<p>one<div>two</div>",
        // List items and definition lists auto-close.
        "<ul><li>a<li>b<li>c</ul>",
        "<dl><dt>t<dd>d<dt>t2<dd>d2</dl>",
        // Table rows and cells auto-close.
        "<table><tr><td>a<td>b<tr><td>c</table>",
        // Unmatched close tags vanish.
        "<div>a</span>b</div>",
        // Unclosed elements close at end of input.
        "<div><section><b>x",
        // Void elements take no children.
        "<div><br>tail<img src=\"i\">more</div>",
        // Stray angle bracket is text.
        "<p>1 < 2</p>",
        // Raw-text elements swallow markup-like content.
        "<div><b>k</b></div>",
        "<option>a<option>b",
    ];
    for snippet in snippets {
        let page = format!("<html><head></head><body>{snippet}</body></html>");
        let ours = our_body_tags(&parse(&page)).expect("body present");
        let oracle = oracle_body_tags(&page);
        assert_eq!(ours, oracle, "tag sequences diverge for {snippet:?}");
    }
}

#[test]
fn fixture_pages_agree_with_the_reference_parser() {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let mut files: Vec<PathBuf> = vec![fixtures.join("corpus/f1.html")];
    for dir in [
        fixtures.join("corpus/pages"),
        fixtures.join("sites/real-estate"),
        fixtures.join("sites/social-media"),
        fixtures.join("sites/map"),
    ] {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.extension().is_some_and(|e| e == "html") {
                files.push(path);
            }
        }
    }
    files.sort();

    let mut compared = 0usize;
    for file in &files {
        // Skip the deliberately non-UTF-8 fixture.
        let Ok(html) = std::fs::read_to_string(file) else {
            continue;
        };
        let Some(ours) = our_body_tags(&parse(&html)) else {
            continue;
        };
        let oracle = oracle_body_tags(&html);
        assert_eq!(ours, oracle, "tag sequences diverge for {}", file.display());
        compared += 1;
    }
    assert!(compared >= 20, "only {compared} fixture pages compared");
}
