//! Block-description list to [`BlockPlan`].

use regex::Regex;

use crate::catalog::{matching_close, Catalog, CatalogEntry, MatchError, SlotKind, HOLE};

use super::{Argument, BlockPlan, CodegenError, PlannedBlock};

const DEFAULT_HAT: &str = "event_whenflagclicked";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Delim {
    Bracket,
    Paren,
    Quote,
    Angle,
}

#[derive(Debug, Clone)]
struct RawArg {
    delim: Delim,
    text: String,
}

/// A description split into its shape (arguments replaced by holes) and the
/// argument texts in source order.
#[derive(Debug)]
struct Segmented {
    outer: String,
    /// Same as `outer` but holes carry their argument index, for alignment.
    indexed: String,
    args: Vec<RawArg>,
}

fn placeholder(i: usize) -> String {
    format!("\u{E000}{i}\u{E001}")
}

/// `<` opens a group unless followed by whitespace; `>` closes one unless
/// preceded by whitespace. This keeps `(a) > (b)` usable inside `<...>`.
fn matching_angle(chars: &[char], start: usize) -> Option<usize> {
    if chars.get(start + 1).is_none_or(|c| c.is_whitespace()) {
        return None;
    }
    let mut depth = 0usize;
    for i in start..chars.len() {
        match chars[i] {
            '<' if !chars.get(i + 1).is_none_or(|c| c.is_whitespace()) => depth += 1,
            '>' if i > 0 && !chars[i - 1].is_whitespace() => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

fn segment(text: &str) -> Segmented {
    let cleaned = text.replace("\\\"", "\"");
    let chars: Vec<char> = cleaned.chars().collect();
    let mut outer = String::new();
    let mut indexed = String::new();
    let mut args = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let group = match c {
            '[' | '(' => matching_close(&chars, i).map(|end| (end, if c == '[' { Delim::Bracket } else { Delim::Paren })),
            '"' => chars[i + 1..].iter().position(|&d| d == '"').map(|off| (i + 1 + off, Delim::Quote)),
            '“' => chars[i + 1..].iter().position(|&d| d == '”').map(|off| (i + 1 + off, Delim::Quote)),
            '<' => matching_angle(&chars, i).map(|end| (end, Delim::Angle)),
            _ => None,
        };
        match group {
            Some((end, delim)) => {
                let inner: String = chars[i + 1..end].iter().collect();
                outer.push_str(HOLE);
                indexed.push_str(&placeholder(args.len()));
                args.push(RawArg { delim, text: inner.trim().to_string() });
                i = end + 1;
            }
            None => {
                outer.push(c);
                indexed.push(c);
                i += 1;
            }
        }
    }
    Segmented { outer, indexed, args }
}

/// Regex over a display text: literal words must match (case-insensitively,
/// any run of whitespace), each hole captures its argument.
fn alignment_regex(entry: &CatalogEntry) -> Option<Regex> {
    let mut pattern = String::from("(?i)^\\s*");
    let mut rest = entry.display_text.as_str();
    loop {
        let (literal, tail) = match rest.find('⟨') {
            Some(start) => (&rest[..start], Some(&rest[start..])),
            None => (rest, None),
        };
        let words: Vec<String> = literal.split_whitespace().map(regex::escape).collect();
        if !words.is_empty() {
            if !pattern.ends_with("\\s*") {
                pattern.push_str("\\s*");
            }
            pattern.push_str(&words.join("\\s+"));
            pattern.push_str("\\s*");
        }
        let Some(tail) = tail else { break };
        let close = tail.find('⟩')?;
        pattern.push_str("(.+?)\\s*");
        rest = &tail[close + '⟩'.len_utf8()..];
    }
    pattern.push('$');
    Regex::new(&pattern).ok()
}

/// Pairs each argument slot of `entry` with its raw text.
fn assign_args(
    entry: &CatalogEntry,
    seg: &Segmented,
    index: usize,
) -> Result<Vec<(String, RawArg)>, CodegenError> {
    let slots: Vec<&str> = entry.argument_slots().map(|s| s.name.as_str()).collect();
    if seg.args.len() == slots.len() {
        return Ok(slots.iter().map(|s| s.to_string()).zip(seg.args.iter().cloned()).collect());
    }
    let mismatch = || CodegenError::ArityMismatch {
        index,
        opcode: entry.opcode.clone(),
        expected: slots.len(),
        found: seg.args.len(),
    };
    // Arguments written without brackets, e.g. "when space key pressed".
    let caps = alignment_regex(entry).and_then(|re| re.captures(&seg.indexed)).ok_or_else(mismatch)?;
    let mut used = vec![false; seg.args.len()];
    let mut out = Vec::with_capacity(slots.len());
    for (slot, cap) in slots.iter().zip(caps.iter().skip(1)) {
        let text = cap.map_or("", |m| m.as_str()).trim();
        let arg = match seg.args.iter().enumerate().find(|(i, _)| text == placeholder(*i)) {
            Some((i, arg)) => {
                used[i] = true;
                arg.clone()
            }
            None if text.contains('\u{E000}') => return Err(mismatch()),
            None => RawArg { delim: Delim::Bracket, text: text.to_string() },
        };
        out.push((slot.to_string(), arg));
    }
    if used.iter().all(|&u| u) {
        Ok(out)
    } else {
        Err(mismatch())
    }
}

fn is_numeric(text: &str) -> bool {
    text.parse::<f64>().is_ok_and(f64::is_finite)
}

fn menu_value(text: &str, has_shadow: bool) -> String {
    if !has_shadow {
        return text.to_string();
    }
    match text.to_lowercase().as_str() {
        "mouse-pointer" | "mouse pointer" => "_mouse_".into(),
        "edge" => "_edge_".into(),
        "random position" => "_random_".into(),
        "myself" => "_myself_".into(),
        _ => text.to_string(),
    }
}

pub(super) struct Parser<'a> {
    pub catalog: &'a Catalog,
    pub threshold: f64,
}

impl<'a> Parser<'a> {
    fn resolve(
        &self,
        text: &str,
        index: usize,
        expression: bool,
    ) -> Result<(&'a CatalogEntry, Segmented, f64), CodegenError> {
        let seg = segment(text);
        let found = self
            .catalog
            .match_where(&seg.outer, self.threshold, |e| e.is_expression() == expression)
            .map_err(|e| match e {
                MatchError::EmptyCatalog => CodegenError::EmptyCatalog,
                MatchError::NoMatch { best_candidate, normalized_distance, .. } => CodegenError::NoMatch {
                    index,
                    text: text.to_string(),
                    best_candidate,
                    normalized_distance,
                },
            })?;
        let entry = self.catalog.get(&found.opcode).expect("matched opcode is in catalog");
        Ok((entry, seg, found.normalized_distance))
    }

    fn build(&self, entry: &CatalogEntry, seg: &Segmented, index: usize) -> Result<PlannedBlock, CodegenError> {
        let mut args = Vec::new();
        for (slot_name, raw) in assign_args(entry, seg, index)? {
            let slot = entry.slots.iter().find(|s| s.name == slot_name).expect("slot from entry");
            let arg = match slot.kind {
                SlotKind::Condition => {
                    Argument::Expression(Box::new(self.expression(&raw.text, index)?))
                }
                SlotKind::Menu => Argument::Menu(menu_value(&raw.text, slot.shadow.is_some())),
                SlotKind::Number | SlotKind::String => {
                    let try_reporter = !is_numeric(&raw.text)
                        && !raw.text.is_empty()
                        && (slot.kind == SlotKind::Number || matches!(raw.delim, Delim::Paren | Delim::Angle));
                    match try_reporter.then(|| self.expression(&raw.text, index)).and_then(Result::ok) {
                        Some(block) => Argument::Expression(Box::new(block)),
                        None => Argument::Literal(raw.text.clone()),
                    }
                }
                SlotKind::Substack => continue,
            };
            args.push((slot_name, arg));
        }
        let substacks = entry.substack_slots().map(|_| Vec::new()).collect();
        Ok(PlannedBlock { entry: entry.clone(), args, substacks, source_index: Some(index) })
    }

    fn expression(&self, text: &str, index: usize) -> Result<PlannedBlock, CodegenError> {
        let (entry, seg, _) = self.resolve(text, index, true)?;
        self.build(entry, &seg, index)
    }

    fn statement(&self, text: &str, index: usize) -> Result<PlannedBlock, CodegenError> {
        let (entry, seg, _) = self.resolve(text, index, false)?;
        self.build(entry, &seg, index)
    }

    pub fn parse(&self, texts: &[impl AsRef<str>]) -> Result<BlockPlan, CodegenError> {
        if texts.is_empty() {
            return Err(CodegenError::EmptyPlan);
        }
        // Innermost open c-block last; each frame appends to `substacks[active]`.
        struct Frame {
            block: PlannedBlock,
            active: usize,
        }
        let mut script: Vec<PlannedBlock> = Vec::new();
        let mut open: Vec<Frame> = Vec::new();

        fn append(list: &mut Vec<PlannedBlock>, block: PlannedBlock, index: usize) -> Result<(), CodegenError> {
            if let Some(last) = list.last() {
                if last.entry.ends_stack() {
                    return Err(CodegenError::BlockAfterEnd { index, after: last.entry.opcode.clone() });
                }
            }
            list.push(block);
            Ok(())
        }
        fn close(script: &mut Vec<PlannedBlock>, open: &mut Vec<Frame>, index: usize) -> Result<(), CodegenError> {
            let frame = open.pop().expect("caller checked");
            match open.last_mut() {
                Some(parent) => {
                    let active = parent.active;
                    append(&mut parent.block.substacks[active], frame.block, index)
                }
                None => append(script, frame.block, index),
            }
        }

        for (index, text) in texts.iter().enumerate() {
            let text = text.as_ref().trim();
            let lowered = text.to_lowercase();
            if lowered == "end" {
                if open.is_empty() {
                    return Err(CodegenError::DanglingEnd { index });
                }
                close(&mut script, &mut open, index)?;
                continue;
            }
            if lowered == "else" {
                let frame = open
                    .last_mut()
                    .filter(|f| matches!(f.block.entry.opcode.as_str(), "control_if" | "control_if_else") && f.active == 0)
                    .ok_or(CodegenError::DanglingElse { index })?;
                if frame.block.entry.opcode == "control_if" {
                    let if_else = self.catalog.get("control_if_else").ok_or(CodegenError::DanglingElse { index })?;
                    frame.block.entry = if_else.clone();
                    frame.block.substacks.push(Vec::new());
                }
                frame.active = 1;
                continue;
            }

            let block = self.statement(text, index)?;
            let at_start = script.is_empty() && open.is_empty();
            if block.entry.is_hat() && !at_start {
                return Err(CodegenError::MisplacedHat { index });
            }
            if at_start && !block.entry.is_hat() {
                let hat = self.catalog.get(DEFAULT_HAT).ok_or(CodegenError::EmptyCatalog)?;
                script.push(PlannedBlock { entry: hat.clone(), args: vec![], substacks: vec![], source_index: None });
            }
            if block.substacks.is_empty() {
                match open.last_mut() {
                    Some(frame) => {
                        let active = frame.active;
                        append(&mut frame.block.substacks[active], block, index)?
                    }
                    None => append(&mut script, block, index)?,
                }
            } else {
                let target = match open.last() {
                    Some(frame) => &frame.block.substacks[frame.active],
                    None => &script,
                };
                if let Some(last) = target.last() {
                    if last.entry.ends_stack() {
                        return Err(CodegenError::BlockAfterEnd { index, after: last.entry.opcode.clone() });
                    }
                }
                open.push(Frame { block, active: 0 });
            }
        }
        let end = texts.len();
        while !open.is_empty() {
            close(&mut script, &mut open, end)?;
        }
        Ok(BlockPlan { script })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segments_quoted_condition() {
        let seg = segment("if \"touching [car]\" then");
        assert_eq!(seg.outer, "if ⟨⟩ then");
        assert_eq!(seg.args.len(), 1);
        assert_eq!(seg.args[0].text, "touching [car]");
        assert_eq!(seg.args[0].delim, Delim::Quote);
    }

    #[test]
    fn segments_angle_groups() {
        let seg = segment("if <(x position) > (100)> then");
        assert_eq!(seg.outer, "if ⟨⟩ then");
        assert_eq!(seg.args[0].text, "(x position) > (100)");
        let seg = segment("<mouse down?> and <touching [edge]?>");
        assert_eq!(seg.outer, "⟨⟩ and ⟨⟩");
    }

    #[test]
    fn escaped_quotes_are_unescaped() {
        let seg = segment("if \\\"touching [car]\\\" then");
        assert_eq!(seg.outer, "if ⟨⟩ then");
        assert_eq!(seg.args[0].text, "touching [car]");
    }

    #[test]
    fn alignment_recovers_bare_arguments() {
        let catalog = Catalog::builtin();
        let entry = catalog.get("event_whenkeypressed").unwrap();
        let seg = segment("when space key pressed");
        let args = assign_args(entry, &seg, 0).unwrap();
        assert_eq!(args[0].0, "KEY_OPTION");
        assert_eq!(args[0].1.text, "space");

        let entry = catalog.get("motion_gotoxy").unwrap();
        let seg = segment("go to x: (0) y: 10");
        let args = assign_args(entry, &seg, 0).unwrap();
        assert_eq!(args.iter().map(|(_, a)| a.text.as_str()).collect::<Vec<_>>(), ["0", "10"]);
    }
}
