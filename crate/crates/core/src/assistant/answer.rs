use std::collections::BTreeSet;

use serde::Serialize;

use crate::catalog::Category;

use super::AssistError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AssistantAnswer {
    pub rationale: String,
    pub blocks: Vec<String>,
    pub raw: String,
}

fn skip_ws(bytes: &[u8], mut i: usize) -> usize {
    while i < bytes.len() && bytes[i].is_ascii_whitespace() {
        i += 1;
    }
    i
}

/// Parses `["...", "..."]` starting at `open`. An element ends at a quote
/// followed by `,` or `]`, so quotes inside an element need no escaping.
/// Returns the byte ranges of the elements and the index after `]`.
fn array_at(raw: &str, open: usize) -> Option<(Vec<(usize, usize)>, usize)> {
    let bytes = raw.as_bytes();
    let mut items = Vec::new();
    let mut i = open + 1;
    loop {
        i = skip_ws(bytes, i);
        if bytes.get(i) != Some(&b'"') {
            return None;
        }
        let start = i + 1;
        let mut j = start;
        let end = loop {
            let q = j + raw[j..].find('"')?;
            let after = skip_ws(bytes, q + 1);
            if matches!(bytes.get(after), Some(b',') | Some(b']')) {
                break q;
            }
            j = q + 1;
        };
        items.push((start, end));
        i = skip_ws(bytes, end + 1);
        match bytes[i] {
            b',' => i += 1,
            _ => return Some((items, i + 1)),
        }
    }
}

/// Extracts the first block array and the rationale before it.
pub fn parse_answer(raw: &str) -> Result<AssistantAnswer, AssistError> {
    let bytes = raw.as_bytes();
    let mut saw_empty = false;
    for (open, _) in raw.match_indices('[') {
        let next = skip_ws(bytes, open + 1);
        match bytes.get(next) {
            Some(b'"') => {}
            Some(b']') => {
                saw_empty = true;
                continue;
            }
            _ => continue,
        }
        let Some((items, _)) = array_at(raw, open) else { continue };
        let head = &raw[..open];
        let from = head.to_lowercase().find("first,").unwrap_or(0);
        return Ok(AssistantAnswer {
            rationale: head[from..].trim().to_string(),
            blocks: items.into_iter().map(|(s, e)| raw[s..e].to_string()).collect(),
            raw: raw.to_string(),
        });
    }
    Err(if saw_empty { AssistError::EmptyBlockArray } else { AssistError::NoBlockArray { attempts: 1 } })
}

/// Category names mentioned as whole, capitalized words.
pub fn categories_in(text: &str) -> BTreeSet<Category> {
    let words: BTreeSet<&str> = text.split(|c: char| !c.is_alphanumeric()).collect();
    Category::ALL.iter().copied().filter(|c| words.contains(c.name())).collect()
}
