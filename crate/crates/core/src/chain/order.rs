use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap};

use super::tree::BlockTree;
use super::types::BlockId;
use crate::error::{Error, Result};

/// Universal order π over a block set: parents before children, smallest id
/// first among the blocks that are ready. Parents outside the set count as
/// already placed.
pub fn canonical_block_order<'a, I>(blocks: I, tree: &BlockTree) -> Result<Vec<BlockId>>
where
    I: IntoIterator<Item = &'a BlockId>,
{
    let set: BTreeSet<BlockId> = blocks.into_iter().copied().collect();
    let mut waiting: HashMap<BlockId, Vec<BlockId>> = HashMap::new();
    let mut ready = BinaryHeap::new();
    for id in &set {
        let block = tree.block(id)?;
        if !block.is_genesis() && set.contains(&block.parent) {
            waiting.entry(block.parent).or_default().push(*id);
        } else {
            ready.push(Reverse(*id));
        }
    }
    let mut out = Vec::with_capacity(set.len());
    while let Some(Reverse(id)) = ready.pop() {
        out.push(id);
        if let Some(kids) = waiting.remove(&id) {
            ready.extend(kids.into_iter().map(Reverse));
        }
    }
    if out.len() != set.len() {
        return Err(Error::CyclicInput);
    }
    Ok(out)
}
