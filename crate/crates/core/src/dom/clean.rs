//! Structure-preserving cleaning and anchor annotation.
//!
//! [`clean`] drops whole subtrees rooted at unwanted tags and restricts each
//! surviving element to an allow-list of attributes. [`annotate_refs`] then
//! numbers every element with a `data-ref` anchor in pre-order, which later
//! stages use to point back into the document. Both are pure tree-to-tree
//! functions.

use std::collections::BTreeSet;

use super::{Document, Element, Node};

/// Tag deny-list and attribute allow-list applied by [`clean`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CleaningConfig {
    /// Elements with these tags are removed together with their subtrees.
    pub remove_tags: BTreeSet<String>,
    /// Attributes kept on surviving elements; everything else is dropped.
    pub keep_attrs: BTreeSet<String>,
}

impl Default for CleaningConfig {
    fn default() -> Self {
        let remove_tags = ["script", "meta", "style", "noscript", "link"];
        let keep_attrs = ["id", "type", "value", "class", "for", "data-ref"];
        CleaningConfig {
            remove_tags: remove_tags.iter().map(|s| s.to_string()).collect(),
            keep_attrs: keep_attrs.iter().map(|s| s.to_string()).collect(),
        }
    }
}

/// Remove denied subtrees and disallowed attributes. Keeps element order,
/// text runs and the relative order of surviving attributes. Adjacent text
/// runs exposed by a removal are merged so the result reparses to the same
/// tree it serializes from.
pub fn clean(doc: &Document, config: &CleaningConfig) -> Document {
    Document {
        children: clean_children(&doc.children, config),
    }
}

fn clean_children(children: &[Node], config: &CleaningConfig) -> Vec<Node> {
    let mut out: Vec<Node> = Vec::with_capacity(children.len());
    for node in children {
        match node {
            Node::Text(t) => match out.last_mut() {
                Some(Node::Text(prev)) => {
                    prev.push(' ');
                    prev.push_str(t);
                }
                _ => out.push(Node::Text(t.clone())),
            },
            Node::Element(e) => {
                if config.remove_tags.contains(&e.tag) {
                    continue;
                }
                out.push(Node::Element(Element {
                    tag: e.tag.clone(),
                    attrs: e
                        .attrs
                        .iter()
                        .filter(|(k, _)| config.keep_attrs.contains(k))
                        .cloned()
                        .collect(),
                    children: clean_children(&e.children, config),
                    data_ref: e.data_ref,
                }));
            }
        }
    }
    out
}

/// Assign `data-ref` anchors 0, 1, 2, ... over elements in pre-order.
/// Existing anchors are overwritten, so re-annotation is stable.
pub fn annotate_refs(doc: &Document) -> Document {
    let mut next = 0u32;
    Document {
        children: doc
            .children
            .iter()
            .map(|n| annotate_node(n, &mut next))
            .collect(),
    }
}

fn annotate_node(node: &Node, next: &mut u32) -> Node {
    match node {
        Node::Text(t) => Node::Text(t.clone()),
        Node::Element(e) => {
            let data_ref = Some(*next);
            *next += 1;
            Node::Element(Element {
                tag: e.tag.clone(),
                attrs: e.attrs.clone(),
                children: e.children.iter().map(|c| annotate_node(c, next)).collect(),
                data_ref,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dom::parse;

    #[test]
    fn removes_denied_subtrees() {
        let doc = parse("<div><script>var x = 1;</script><p>keep</p></div>");
        let cleaned = clean(&doc, &CleaningConfig::default());
        let tags: Vec<&str> = cleaned.elements().map(|e| e.tag.as_str()).collect();
        assert_eq!(tags, ["div", "p"]);
    }

    #[test]
    fn removal_is_recursive() {
        let doc = parse("<div><section><style>a{}</style><meta charset=\"u\"><b>x</b></section></div>");
        let cleaned = clean(&doc, &CleaningConfig::default());
        let tags: Vec<&str> = cleaned.elements().map(|e| e.tag.as_str()).collect();
        assert_eq!(tags, ["div", "section", "b"]);
    }

    #[test]
    fn restricts_attributes_preserving_order() {
        let doc = parse("<input id=\"q\" style=\"x\" type=\"text\" onclick=\"f()\" value=\"v\">");
        let cleaned = clean(&doc, &CleaningConfig::default());
        let input = cleaned.elements().next().unwrap();
        let names: Vec<&str> = input.attrs.iter().map(|(k, _)| k.as_str()).collect();
        assert_eq!(names, ["id", "type", "value"]);
    }

    #[test]
    fn keeps_text_and_element_order() {
        let doc = parse("<div>a<link href=\"x\">b<span>c</span></div>");
        let cleaned = clean(&doc, &CleaningConfig::default());
        let Node::Element(div) = &cleaned.children[0] else {
            panic!("expected div");
        };
        assert_eq!(div.children.len(), 2);
        assert!(matches!(&div.children[0], Node::Text(t) if t == "a b"));
    }

    #[test]
    fn clean_is_idempotent() {
        let doc = parse(
            "<div id=\"r\"><script>x</script><p class=\"c\" style=\"s\">a<noscript>n</noscript>b</p></div>",
        );
        let config = CleaningConfig::default();
        let once = clean(&doc, &config);
        let twice = clean(&once, &config);
        assert_eq!(once, twice);
    }

    #[test]
    fn annotate_numbers_elements_in_preorder() {
        let doc = parse("<div><p>a</p><span><b>c</b></span></div><ul><li>d</li></ul>");
        let annotated = annotate_refs(&doc);
        let refs: Vec<Option<u32>> = annotated.elements().map(|e| e.data_ref).collect();
        assert_eq!(
            refs,
            [Some(0), Some(1), Some(2), Some(3), Some(4), Some(5)]
        );
        let tags: Vec<&str> = annotated.elements().map(|e| e.tag.as_str()).collect();
        assert_eq!(tags, ["div", "p", "span", "b", "ul", "li"]);
    }

    #[test]
    fn annotate_overwrites_existing_anchors() {
        let doc = parse("<div data-ref=\"9\"><p data-ref=\"9\">a</p></div>");
        let annotated = annotate_refs(&doc);
        let refs: Vec<Option<u32>> = annotated.elements().map(|e| e.data_ref).collect();
        assert_eq!(refs, [Some(0), Some(1)]);
        assert_eq!(annotated, annotate_refs(&annotated));
    }

    #[test]
    fn anchors_are_unique_and_dense() {
        let doc = parse("<div><p>a</p><p>b<span>c</span></p><input></div>");
        let annotated = annotate_refs(&doc);
        let n = annotated.element_count() as u32;
        for i in 0..n {
            assert!(annotated.find_by_ref(i).is_some(), "missing anchor {i}");
        }
        assert!(annotated.find_by_ref(n).is_none());
    }
}
