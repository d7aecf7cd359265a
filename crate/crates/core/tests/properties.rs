//! Property tests over randomly generated DOM trees: serialization round
//! trips, cleaning idempotence, anchor density, tokenizer identity, and a
//! brute-force oracle for label-subtree extraction.

use std::collections::BTreeSet;

use htmlforge_core::corpus::extract_label_subtrees;
use htmlforge_core::dom::{
    annotate_refs, clean, parse, serialize, CleaningConfig, Document, Element, HtmlTokenizer,
    Node, Tokenizer,
};
use proptest::prelude::*;

/// Tags that trigger none of the parser's auto-close rules, so arbitrary
/// nesting over them survives a parse/serialize round trip.
const SAFE_TAGS: &[&str] = &[
    "div", "span", "section", "article", "aside", "b", "i", "em", "label", "header", "footer",
    "main", "nav", "h1", "h2", "ul", "form",
];
const VOID_TAGS: &[&str] = &["br", "input", "img", "hr"];
/// Tags the default cleaning config removes.
const DIRTY_TAGS: &[&str] = &["script", "style", "meta", "noscript", "link"];
const KEPT_ATTRS: &[&str] = &["id", "class", "type", "value", "for"];

fn word() -> impl Strategy<Value = String> {
    // Includes characters the serializer must escape.
    prop_oneof![
        "[a-z]{1,7}",
        Just("a&b".to_string()),
        Just("1<2".to_string()),
        Just("x>y".to_string()),
        Just("q\"q".to_string()),
    ]
}

fn text_run() -> impl Strategy<Value = String> {
    proptest::collection::vec(word(), 1..4).prop_map(|ws| ws.join(" "))
}

fn attrs(pool: &'static [&'static str]) -> impl Strategy<Value = Vec<(String, String)>> {
    proptest::collection::vec(
        (proptest::sample::select(pool), prop_oneof![word(), Just(String::new())]),
        0..3,
    )
    .prop_map(|pairs| {
        let mut seen = BTreeSet::new();
        pairs
            .into_iter()
            .filter(|(name, _)| seen.insert(name.to_string()))
            .map(|(name, value)| (name.to_string(), value))
            .collect()
    })
}

fn element_of(tag: String, attrs: Vec<(String, String)>, children: Vec<Node>) -> Node {
    let mut e = Element::new(tag);
    e.attrs = attrs;
    e.children = children;
    Node::Element(e)
}

/// Merge adjacent text runs the way the parser would, so generated trees are
/// already in canonical form.
fn canonicalize(children: Vec<Node>) -> Vec<Node> {
    let mut out: Vec<Node> = Vec::new();
    for node in children {
        match (&node, out.last_mut()) {
            (Node::Text(t), Some(Node::Text(prev))) => {
                prev.push(' ');
                prev.push_str(t);
            }
            _ => out.push(node),
        }
    }
    out
}

fn node(dirty: bool) -> impl Strategy<Value = Node> {
    let attr_pool: &'static [&'static str] = if dirty {
        // Both kept and junk attributes; the slice is picked per element.
        &["id", "class", "type", "value", "for", "onclick", "style", "href", "aria-label", "data-x"]
    } else {
        KEPT_ATTRS
    };
    let leaf = prop_oneof![
        text_run().prop_map(Node::Text),
        (proptest::sample::select(VOID_TAGS), attrs(attr_pool))
            .prop_map(|(tag, attrs)| element_of(tag.to_string(), attrs, Vec::new())),
    ];
    leaf.prop_recursive(4, 48, 5, move |inner| {
        let tag_pool: &'static [&'static str] = if dirty {
            &[
                "div", "span", "section", "article", "aside", "b", "i", "em", "label", "header",
                "footer", "main", "nav", "h1", "h2", "ul", "form", "script", "style", "meta",
                "noscript", "link",
            ]
        } else {
            SAFE_TAGS
        };
        (
            proptest::sample::select(tag_pool),
            attrs(attr_pool),
            proptest::collection::vec(inner, 0..5),
        )
            .prop_map(|(tag, attrs, children)| {
                if DIRTY_TAGS.contains(&tag) || VOID_TAGS.contains(&tag) {
                    // Removable tags carry only text so the tree stays
                    // representable; void tags carry nothing.
                    let children = children
                        .into_iter()
                        .filter(|n| matches!(n, Node::Text(_)))
                        .take(1)
                        .collect();
                    element_of(tag.to_string(), attrs, children)
                } else {
                    element_of(tag.to_string(), attrs, canonicalize(children))
                }
            })
    })
}

fn doc(dirty: bool) -> impl Strategy<Value = Document> {
    proptest::collection::vec(node(dirty), 0..5)
        .prop_map(|children| Document { children: canonicalize(children) })
}

fn count_elements(nodes: &[Node]) -> usize {
    nodes
        .iter()
        .map(|n| match n {
            Node::Text(_) => 0,
            Node::Element(e) => 1 + count_elements(&e.children),
        })
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(192))]

    #[test]
    fn serialization_round_trips_canonical_trees(d in doc(false)) {
        let text = serialize(&d);
        prop_assert_eq!(parse(&text), d);
    }

    #[test]
    fn cleaning_is_idempotent(d in doc(true)) {
        let cfg = CleaningConfig::default();
        let once = clean(&d, &cfg);
        prop_assert_eq!(clean(&once, &cfg), once);
    }

    #[test]
    fn cleaning_removes_denied_tags_and_restricts_attrs(d in doc(true)) {
        let cfg = CleaningConfig::default();
        let cleaned = clean(&d, &cfg);
        for e in cleaned.elements() {
            prop_assert!(!cfg.remove_tags.contains(&e.tag), "tag {} survived", e.tag);
            for (name, _) in &e.attrs {
                prop_assert!(cfg.keep_attrs.contains(name), "attr {} survived", name);
            }
        }
        prop_assert!(cleaned.element_count() <= d.element_count());
    }

    #[test]
    fn cleaned_annotated_trees_round_trip(d in doc(true)) {
        let annotated = annotate_refs(&clean(&d, &CleaningConfig::default()));
        prop_assert_eq!(parse(&serialize(&annotated)), annotated);
    }

    #[test]
    fn annotation_is_dense_preorder_and_stable(d in doc(true)) {
        let annotated = annotate_refs(&d);
        let refs: Vec<u32> = annotated.elements().map(|e| e.data_ref.unwrap()).collect();
        let expected: Vec<u32> = (0..count_elements(&annotated.children) as u32).collect();
        prop_assert_eq!(refs, expected);
        prop_assert_eq!(annotate_refs(&annotated), annotated);
    }

    #[test]
    fn tokenizer_identity_on_serialized_documents(d in doc(true)) {
        let text = serialize(&annotate_refs(&clean(&d, &CleaningConfig::default())));
        let tok = HtmlTokenizer;
        prop_assert_eq!(tok.detokenize(&tok.tokenize(&text)), text);
    }

    #[test]
    fn label_subtree_count_matches_brute_force(d in doc(true)) {
        // Oracle: count (label, for=t) pairs where exactly one element in the
        // whole document has id=t, via flat walks independent of extraction.
        let mut fors: Vec<String> = Vec::new();
        let mut ids: Vec<String> = Vec::new();
        for e in d.elements() {
            if e.tag == "label" {
                if let Some(t) = e.attr("for") {
                    if !t.is_empty() {
                        fors.push(t.to_string());
                    }
                }
            }
            if let Some(id) = e.attr("id") {
                if !id.is_empty() {
                    ids.push(id.to_string());
                }
            }
        }
        let expected = fors
            .iter()
            .filter(|t| ids.iter().filter(|i| i == t).count() == 1)
            .count();
        let subtrees = extract_label_subtrees(&d);
        prop_assert_eq!(subtrees.len(), expected);
        // Soundness: each subtree contains a matching label/target pair.
        for subtree in &subtrees {
            let found = subtree.elements().any(|label| {
                label.tag == "label"
                    && label.attr("for").is_some_and(|t| {
                        subtree.elements().any(|e| e.attr("id") == Some(t))
                    })
            });
            prop_assert!(found, "subtree lacks a resolvable label");
        }
    }
}
