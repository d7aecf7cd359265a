//! Tokenization boundary.
//!
//! Downstream stages only ever see token sequences, so the tokenizer is a
//! swappable trait. The bundled [`HtmlTokenizer`] splits markup into tag
//! delimiters, names and text words, and its `detokenize` rebuilds exactly
//! the canonical text produced by [`super::serialize`]: for serialized
//! documents the pair is a lossless round trip.

use serde::{Deserialize, Serialize};

/// Text-to-tokens boundary used by corpus export, denoising and retrieval.
pub trait Tokenizer: Send + Sync {
    fn tokenize(&self, text: &str) -> Vec<String>;
    fn detokenize(&self, tokens: &[String]) -> String;
}

/// Markup-aware whitespace tokenizer. Inside tags the characters
/// `< > = " /` become single-character tokens; inside quoted attribute
/// values and in text, only whitespace splits.
#[derive(Debug, Clone, Copy, Default)]
pub struct HtmlTokenizer;

#[derive(Clone, Copy, PartialEq)]
enum Mode {
    Text,
    Tag,
    Quoted,
}

impl Tokenizer for HtmlTokenizer {
    fn tokenize(&self, text: &str) -> Vec<String> {
        let mut tokens = Vec::new();
        let mut cur = String::new();
        let mut mode = Mode::Text;
        let flush = |cur: &mut String, tokens: &mut Vec<String>| {
            if !cur.is_empty() {
                tokens.push(std::mem::take(cur));
            }
        };
        for ch in text.chars() {
            match mode {
                Mode::Text => match ch {
                    '<' => {
                        flush(&mut cur, &mut tokens);
                        tokens.push("<".to_string());
                        mode = Mode::Tag;
                    }
                    c if c.is_whitespace() => flush(&mut cur, &mut tokens),
                    c => cur.push(c),
                },
                Mode::Tag => match ch {
                    '>' | '<' | '=' | '/' | '"' => {
                        flush(&mut cur, &mut tokens);
                        tokens.push(ch.to_string());
                        match ch {
                            '>' => mode = Mode::Text,
                            '"' => mode = Mode::Quoted,
                            _ => {}
                        }
                    }
                    c if c.is_whitespace() => flush(&mut cur, &mut tokens),
                    c => cur.push(c),
                },
                Mode::Quoted => match ch {
                    '"' => {
                        flush(&mut cur, &mut tokens);
                        tokens.push("\"".to_string());
                        mode = Mode::Tag;
                    }
                    c if c.is_whitespace() => flush(&mut cur, &mut tokens),
                    c => cur.push(c),
                },
            }
        }
        flush(&mut cur, &mut tokens);
        tokens
    }

    fn detokenize(&self, tokens: &[String]) -> String {
        let mut out = String::new();
        let mut in_tag = false;
        let mut in_quote = false;
        let mut prev: Option<&str> = None;
        for token in tokens {
            let t = token.as_str();
            let glue = match prev {
                None => false,
                Some(p) => {
                    if in_quote {
                        // Only words and quote marks occur here; words are
                        // space-separated, quotes attach directly.
                        !(t == "\"" || p == "\"")
                    } else if in_tag {
                        !(p == "<" || p == "/" || p == "=")
                            && !matches!(t, ">" | "<" | "=" | "/" | "\"")
                    } else {
                        p != ">" && t != "<"
                    }
                }
            };
            if glue {
                out.push(' ');
            }
            out.push_str(t);
            match t {
                "\"" if in_tag => in_quote = !in_quote,
                "<" if !in_quote => in_tag = true,
                ">" if in_tag && !in_quote => in_tag = false,
                _ => {}
            }
            prev = Some(t);
        }
        out
    }
}

/// A tokenized document, the unit written to token-stream JSONL output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSeq {
    pub doc_id: String,
    pub tokens: Vec<String>,
}

impl TokenSeq {
    pub fn to_jsonl_line(&self) -> String {
        serde_json::to_string(self).expect("token sequence serializes")
    }
}

/// Tokenize `text` under `tokenizer`, tagging the result with `doc_id`.
pub fn tokenize(doc_id: &str, text: &str, tokenizer: &dyn Tokenizer) -> TokenSeq {
    TokenSeq {
        doc_id: doc_id.to_string(),
        tokens: tokenizer.tokenize(text),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dom::{annotate_refs, clean, parse, serialize, CleaningConfig};

    fn toks(text: &str) -> Vec<String> {
        HtmlTokenizer.tokenize(text)
    }

    #[test]
    fn splits_tag_into_delimiters_names_and_values() {
        assert_eq!(
            toks("<p id=\"a\">"),
            ["<", "p", "id", "=", "\"", "a", "\"", ">"]
        );
    }

    #[test]
    fn text_splits_on_whitespace_only() {
        assert_eq!(toks("a / b c=d"), ["a", "/", "b", "c=d"]);
    }

    #[test]
    fn quoted_values_keep_special_characters() {
        assert_eq!(
            toks("<a class=\"x/y = z\">"),
            ["<", "a", "class", "=", "\"", "x/y", "=", "z", "\"", ">"]
        );
    }

    #[test]
    fn close_tag_and_void_forms() {
        assert_eq!(toks("</div>"), ["<", "/", "div", ">"]);
        assert_eq!(toks("<br/>"), ["<", "br", "/", ">"]);
    }

    #[test]
    fn empty_input_gives_no_tokens() {
        assert!(toks("").is_empty());
        assert!(toks("   ").is_empty());
    }

    #[test]
    fn detokenize_restores_canonical_text() {
        let cases = [
            "<div id=\"a\" class=\"b c\" data-ref=\"0\">x y</div>",
            "<ul><li>one</li><li>two two</li></ul>",
            "<form><label for=\"q\">Query here</label><input id=\"q\" type=\"text\"/></form>",
            "<p>1 &lt; 2 a / b</p>",
            "<div id=\"\"></div>",
            "plain text only",
            "",
        ];
        let tok = HtmlTokenizer;
        for case in cases {
            let tokens = tok.tokenize(case);
            assert_eq!(tok.detokenize(&tokens), case, "identity failed for {case}");
        }
    }

    #[test]
    fn round_trip_holds_for_cleaned_annotated_documents() {
        let raw = "<html><head><script>x()</script></head><body>\n\
                   <div id=\"main\" style=\"color: red\">\n\
                   <label for=\"q\">Search term</label>\n\
                   <input id=\"q\" type=\"text\" value=\"a &amp; b\">\n\
                   <p>Results: 1 &lt; 2, 3 &gt; 2.</p></div></body></html>";
        let doc = annotate_refs(&clean(&parse(raw), &CleaningConfig::default()));
        let text = serialize(&doc);
        let tok = HtmlTokenizer;
        assert_eq!(tok.detokenize(&tok.tokenize(&text)), text);
    }

    #[test]
    fn token_seq_jsonl_shape() {
        let seq = tokenize("doc-1", "<p>hi</p>", &HtmlTokenizer);
        let line = seq.to_jsonl_line();
        let value: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(value["doc_id"], "doc-1");
        assert_eq!(value["tokens"][0], "<");
        assert!(!line.contains('\n'));
    }
}
