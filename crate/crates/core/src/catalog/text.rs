//! Text normalization and edit distance used to match block descriptions.

/// Marker that stands in for any bracketed argument.
pub const HOLE: &str = "⟨⟩";

fn closer(open: char) -> Option<char> {
    match open {
        '[' => Some(']'),
        '(' => Some(')'),
        '⟨' => Some('⟩'),
        _ => None,
    }
}

fn is_closer(c: char) -> bool {
    matches!(c, ']' | ')' | '⟩')
}

/// Index (into `chars`) of the bracket that balances the opener at `start`,
/// tracking all bracket kinds. `None` if the group is unbalanced or crossed.
pub(crate) fn matching_close(chars: &[char], start: usize) -> Option<usize> {
    let mut stack = vec![closer(chars[start])?];
    for (i, &c) in chars.iter().enumerate().skip(start + 1) {
        if let Some(close) = closer(c) {
            stack.push(close);
        } else if is_closer(c) {
            if stack.pop() != Some(c) {
                return None;
            }
            if stack.is_empty() {
                return Some(i);
            }
        }
    }
    None
}

/// Lowercases, replaces each balanced `[...]`, `(...)` or `⟨...⟩` group with
/// [`HOLE`], collapses whitespace and trims. Idempotent.
pub fn normalize_text(text: &str) -> String {
    let chars: Vec<char> = text.to_lowercase().chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < chars.len() {
        if closer(chars[i]).is_some() {
            if let Some(end) = matching_close(&chars, i) {
                out.push_str(HOLE);
                i = end + 1;
                continue;
            }
        }
        out.push(chars[i]);
        i += 1;
    }
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Minimum number of single-character insertions, deletions and
/// substitutions turning `a` into `b`, counted over Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}
