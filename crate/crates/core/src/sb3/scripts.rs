use std::cmp::Ordering;
use std::collections::HashSet;

use serde::Serialize;

use super::Target;

/// A top-level stack of blocks and everything nested in it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Script {
    pub root: String,
    /// Non-shadow block IDs in depth-first order: a block, then the blocks in
    /// its inputs (by slot name), then its `next`.
    pub body: Vec<String>,
}

/// Decomposes a target into scripts ordered by (y, x, root ID).
pub fn scripts_of(target: &Target) -> Vec<Script> {
    let mut roots: Vec<(&String, (f64, f64))> = target
        .blocks
        .iter()
        .filter(|(_, b)| b.top_level && !b.shadow)
        .map(|(id, b)| (id, b.coords()))
        .collect();
    roots.sort_by(|(ia, (xa, ya)), (ib, (xb, yb))| {
        ya.partial_cmp(yb)
            .unwrap_or(Ordering::Equal)
            .then(xa.partial_cmp(xb).unwrap_or(Ordering::Equal))
            .then_with(|| ia.cmp(ib))
    });

    let mut seen = HashSet::new();
    roots
        .into_iter()
        .map(|(root, _)| {
            let mut body = Vec::new();
            let mut stack = vec![root.as_str()];
            while let Some(id) = stack.pop() {
                let Some(block) = target.blocks.get(id) else { continue };
                if block.shadow || !seen.insert(id) {
                    continue;
                }
                body.push(id.to_string());
                if let Some(next) = block.next.as_deref() {
                    stack.push(next);
                }
                let nested: Vec<&str> = block.inputs.values().flat_map(|i| i.block_refs()).collect();
                stack.extend(nested.into_iter().rev());
            }
            Script { root: root.clone(), body }
        })
        .collect()
}
