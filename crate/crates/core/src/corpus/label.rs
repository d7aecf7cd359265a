//! Label-subtree extraction.
//!
//! For every `<label for=X>` whose X names exactly one element with that
//! id anywhere in the document, emit the subtree rooted at the minimal
//! common ancestor of the label and its target. Labels with zero or several
//! candidate targets emit nothing. Each emitted subtree is returned as its
//! own document (normally a single element; the full node list when the
//! pair only meets at the document root).

use std::collections::BTreeMap;

use crate::dom::{Document, Node};

/// Extract one subtree per resolvable label, in document order.
pub fn extract_label_subtrees(doc: &Document) -> Vec<Document> {
    let mut labels: Vec<(Vec<usize>, String)> = Vec::new();
    let mut ids: BTreeMap<String, Vec<Vec<usize>>> = BTreeMap::new();
    index_nodes(&doc.children, &mut Vec::new(), &mut labels, &mut ids);

    let mut out = Vec::new();
    for (label_path, target_id) in &labels {
        let Some(targets) = ids.get(target_id) else {
            continue;
        };
        if targets.len() != 1 {
            continue;
        }
        let ancestor: Vec<usize> = label_path
            .iter()
            .zip(&targets[0])
            .take_while(|(a, b)| a == b)
            .map(|(a, _)| *a)
            .collect();
        out.push(subtree_at(doc, &ancestor));
    }
    out
}

/// Record label positions and an id index, paths being child-index chains.
fn index_nodes(
    children: &[Node],
    path: &mut Vec<usize>,
    labels: &mut Vec<(Vec<usize>, String)>,
    ids: &mut BTreeMap<String, Vec<Vec<usize>>>,
) {
    for (i, node) in children.iter().enumerate() {
        let Node::Element(element) = node else {
            continue;
        };
        path.push(i);
        if element.tag == "label" {
            if let Some(target) = element.attr("for") {
                if !target.is_empty() {
                    labels.push((path.clone(), target.to_string()));
                }
            }
        }
        if let Some(id) = element.attr("id") {
            if !id.is_empty() {
                ids.entry(id.to_string()).or_default().push(path.clone());
            }
        }
        index_nodes(&element.children, path, labels, ids);
        path.pop();
    }
}

fn subtree_at(doc: &Document, path: &[usize]) -> Document {
    if path.is_empty() {
        return doc.clone();
    }
    let mut node = &doc.children[path[0]];
    for &i in &path[1..] {
        let Node::Element(element) = node else {
            unreachable!("paths only traverse elements");
        };
        node = &element.children[i];
    }
    Document {
        children: vec![node.clone()],
    }
}
