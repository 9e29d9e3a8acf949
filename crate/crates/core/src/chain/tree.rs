use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use super::types::{Block, BlockId};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
struct Node {
    block: Arc<Block>,
    depth: u64,
    /// Ancestor used for logarithmic ancestor lookups.
    skip: BlockId,
    /// Deepest leaf below this node, smallest id on ties.
    best: (u64, BlockId),
}

/// Append-only block tree with leaf set, depths and per-node deepest-leaf
/// cache.
#[derive(Clone, Debug)]
pub struct BlockTree {
    nodes: HashMap<BlockId, Node>,
    children: HashMap<BlockId, BTreeSet<BlockId>>,
    leaves: BTreeSet<BlockId>,
    genesis: BlockId,
}

fn clear_lowest_bit(n: u64) -> u64 {
    n & n.wrapping_sub(1)
}

/// Depth of the skip ancestor of a node at `depth`.
fn skip_depth(depth: u64) -> u64 {
    if depth < 2 {
        0
    } else if depth & 1 == 1 {
        clear_lowest_bit(clear_lowest_bit(depth - 1)) + 1
    } else {
        clear_lowest_bit(depth)
    }
}

fn better(a: (u64, BlockId), b: (u64, BlockId)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 < b.1)
}

impl BlockTree {
    pub fn new(genesis: Block) -> Self {
        let id = genesis.id;
        let mut nodes = HashMap::new();
        nodes.insert(
            id,
            Node {
                block: Arc::new(genesis),
                depth: 0,
                skip: id,
                best: (0, id),
            },
        );
        BlockTree {
            nodes,
            children: HashMap::new(),
            leaves: BTreeSet::from([id]),
            genesis: id,
        }
    }

    pub fn genesis(&self) -> BlockId {
        self.genesis
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, id: &BlockId) -> bool {
        self.nodes.contains_key(id)
    }

    pub fn insert(&mut self, block: Block) -> Result<()> {
        self.insert_arc(Arc::new(block))
    }

    pub fn insert_arc(&mut self, block: Arc<Block>) -> Result<()> {
        let id = block.id;
        if self.nodes.contains_key(&id) {
            return Err(Error::DuplicateBlock(id));
        }
        let parent = self.nodes.get(&block.parent).ok_or(Error::UnknownParent {
            block: id,
            parent: block.parent,
        })?;
        let depth = parent.depth + 1;
        let skip = self.ancestor_from(block.parent, depth - 1, skip_depth(depth));
        self.nodes.insert(
            id,
            Node {
                block: Arc::clone(&block),
                depth,
                skip,
                best: (depth, id),
            },
        );
        self.children.entry(block.parent).or_default().insert(id);
        self.leaves.remove(&block.parent);
        self.leaves.insert(id);

        let candidate = (depth, id);
        let mut cursor = block.parent;
        loop {
            let node = self.nodes.get_mut(&cursor).expect("ancestors are present");
            if !better(candidate, node.best) {
                break;
            }
            node.best = candidate;
            if cursor == self.genesis {
                break;
            }
            cursor = node.block.parent;
        }
        Ok(())
    }

    pub fn get(&self, id: &BlockId) -> Option<&Block> {
        self.nodes.get(id).map(|n| n.block.as_ref())
    }

    pub fn get_arc(&self, id: &BlockId) -> Option<&Arc<Block>> {
        self.nodes.get(id).map(|n| &n.block)
    }

    pub fn block(&self, id: &BlockId) -> Result<&Block> {
        self.get(id).ok_or(Error::UnknownBlock(*id))
    }

    pub fn depth(&self, id: &BlockId) -> Option<u64> {
        self.nodes.get(id).map(|n| n.depth)
    }

    pub fn parent(&self, id: &BlockId) -> Option<BlockId> {
        self.nodes
            .get(id)
            .filter(|_| *id != self.genesis)
            .map(|n| n.block.parent)
    }

    pub fn children(&self, id: &BlockId) -> impl Iterator<Item = &BlockId> {
        self.children.get(id).into_iter().flatten()
    }

    pub fn leaves(&self) -> &BTreeSet<BlockId> {
        &self.leaves
    }

    /// All block ids, ascending.
    pub fn ids(&self) -> BTreeSet<BlockId> {
        self.nodes.keys().copied().collect()
    }

    pub fn blocks(&self) -> impl Iterator<Item = &Block> {
        self.nodes.values().map(|n| n.block.as_ref())
    }

    fn ancestor_from(&self, mut id: BlockId, mut depth: u64, target: u64) -> BlockId {
        while depth > target {
            let node = &self.nodes[&id];
            let skip_at = skip_depth(depth);
            if skip_at >= target && id != node.skip {
                id = node.skip;
                depth = skip_at;
            } else {
                id = node.block.parent;
                depth -= 1;
            }
        }
        id
    }

    /// Ancestor of `id` at `depth`, or `None` when `depth` exceeds its depth.
    pub fn ancestor_at_depth(&self, id: &BlockId, depth: u64) -> Option<BlockId> {
        let own = self.depth(id)?;
        (depth <= own).then(|| self.ancestor_from(*id, own, depth))
    }

    /// True when `ancestor` lies on the path from genesis to `id` (inclusive).
    pub fn is_ancestor(&self, ancestor: &BlockId, id: &BlockId) -> bool {
        match self.depth(ancestor) {
            Some(d) => self.ancestor_at_depth(id, d) == Some(*ancestor),
            None => false,
        }
    }

    /// Path genesis → `id`.
    pub fn path_to(&self, id: &BlockId) -> Result<Vec<BlockId>> {
        let mut node = self.nodes.get(id).ok_or(Error::UnknownBlock(*id))?;
        let mut path = Vec::with_capacity(node.depth as usize + 1);
        let mut cursor = *id;
        loop {
            path.push(cursor);
            if cursor == self.genesis {
                break;
            }
            cursor = node.block.parent;
            node = &self.nodes[&cursor];
        }
        path.reverse();
        Ok(path)
    }

    /// Path from `from` (exclusive) down to `to` (inclusive); `from` must be
    /// an ancestor of `to`.
    pub fn segment(&self, from: &BlockId, to: &BlockId) -> Result<Vec<BlockId>> {
        if !self.is_ancestor(from, to) {
            return Err(Error::UnknownBlock(*from));
        }
        let mut out = Vec::new();
        let mut cursor = *to;
        while cursor != *from {
            out.push(cursor);
            cursor = self.nodes[&cursor].block.parent;
        }
        out.reverse();
        Ok(out)
    }

    /// Deepest leaf below `root`, smallest id on ties.
    pub fn deepest_leaf(&self, root: &BlockId) -> Result<(u64, BlockId)> {
        self.nodes
            .get(root)
            .map(|n| n.best)
            .ok_or(Error::UnknownBlock(*root))
    }

    pub fn subtree_leaves(&self, root: &BlockId) -> Result<BTreeSet<BlockId>> {
        if !self.contains(root) {
            return Err(Error::UnknownBlock(*root));
        }
        let mut out = BTreeSet::new();
        let mut stack = vec![*root];
        while let Some(id) = stack.pop() {
            match self.children.get(&id) {
                Some(kids) if !kids.is_empty() => stack.extend(kids.iter().copied()),
                _ => {
                    out.insert(id);
                }
            }
        }
        Ok(out)
    }

    /// Every block below `root` (exclusive) with depth at most `max_depth`,
    /// in breadth-first order with ascending ids per level.
    pub fn descendants_within(&self, root: &BlockId, max_depth: u64) -> Vec<BlockId> {
        let mut out = Vec::new();
        let Some(start) = self.depth(root) else {
            return out;
        };
        let mut frontier = vec![*root];
        let mut depth = start;
        while depth < max_depth && !frontier.is_empty() {
            let mut next: Vec<BlockId> = frontier
                .iter()
                .flat_map(|id| self.children(id).copied())
                .collect();
            next.sort_unstable();
            out.extend_from_slice(&next);
            frontier = next;
            depth += 1;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{NewBlock, Origin};
    use proptest::prelude::*;

    fn child(tree: &mut BlockTree, parent: BlockId, nonce: u64) -> BlockId {
        let b = NewBlock::child_of(parent, Origin::Honest, nonce, nonce).seal();
        let id = b.id;
        tree.insert(b).unwrap();
        id
    }

    #[test]
    fn insert_updates_leaves_and_depth() {
        let mut t = BlockTree::new(Block::genesis(0));
        let g = t.genesis();
        assert_eq!(t.leaves(), &BTreeSet::from([g]));
        assert_eq!(t.depth(&g), Some(0));
        let c1 = child(&mut t, g, 1);
        assert_eq!(t.leaves(), &BTreeSet::from([c1]));
        assert_eq!(t.depth(&c1), Some(1));
        let c2 = child(&mut t, g, 2);
        assert_eq!(t.leaves(), &BTreeSet::from([c1, c2]));
    }

    #[test]
    fn rejects_duplicates_and_orphans() {
        let mut t = BlockTree::new(Block::genesis(0));
        let b = NewBlock::child_of(t.genesis(), Origin::Honest, 1, 1).seal();
        t.insert(b.clone()).unwrap();
        assert!(matches!(t.insert(b), Err(Error::DuplicateBlock(_))));
        let orphan = NewBlock::child_of(BlockId::ZERO, Origin::Honest, 1, 5).seal();
        assert!(matches!(t.insert(orphan), Err(Error::UnknownParent { .. })));
    }

    #[test]
    fn subtree_leaf_examples() {
        let mut t = BlockTree::new(Block::genesis(0));
        let g = t.genesis();
        let a = child(&mut t, g, 1);
        let b = child(&mut t, a, 2);
        assert_eq!(t.subtree_leaves(&a).unwrap(), BTreeSet::from([b]));

        let mut t = BlockTree::new(Block::genesis(0));
        let a = child(&mut t, g, 1);
        let b = child(&mut t, g, 2);
        assert_eq!(t.subtree_leaves(&g).unwrap(), BTreeSet::from([a, b]));
        let c = child(&mut t, a, 3);
        assert_eq!(t.subtree_leaves(&a).unwrap(), BTreeSet::from([c]));
        assert!(t.subtree_leaves(&BlockId::ZERO).is_err());
    }

    /// Builds a random tree from parent choices: block k hangs below one of
    /// the first k nodes.
    fn build(parents: &[usize]) -> (BlockTree, Vec<BlockId>, Vec<Option<usize>>) {
        let mut t = BlockTree::new(Block::genesis(0));
        let mut ids = vec![t.genesis()];
        let mut parent_of = vec![None];
        for (k, p) in parents.iter().enumerate() {
            let p = p % ids.len();
            let id = child(&mut t, ids[p], k as u64 + 1);
            ids.push(id);
            parent_of.push(Some(p));
        }
        (t, ids, parent_of)
    }

    fn oracle_ancestor(parent_of: &[Option<usize>], a: usize, mut b: usize) -> bool {
        loop {
            if a == b {
                return true;
            }
            match parent_of[b] {
                Some(p) => b = p,
                None => return false,
            }
        }
    }

    fn oracle_depth(parent_of: &[Option<usize>], mut b: usize) -> u64 {
        let mut d = 0;
        while let Some(p) = parent_of[b] {
            d += 1;
            b = p;
        }
        d
    }

    proptest! {
        #[test]
        fn ancestry_matches_parent_walk(parents in prop::collection::vec(0usize..64, 1..60)) {
            let (t, ids, parent_of) = build(&parents);
            for a in 0..ids.len() {
                for b in 0..ids.len() {
                    prop_assert_eq!(
                        t.is_ancestor(&ids[a], &ids[b]),
                        oracle_ancestor(&parent_of, a, b)
                    );
                }
                prop_assert_eq!(t.depth(&ids[a]), Some(oracle_depth(&parent_of, a)));
                prop_assert_eq!(t.path_to(&ids[a]).unwrap().len() as u64, oracle_depth(&parent_of, a) + 1);
            }
        }

        #[test]
        fn subtree_leaves_match_dfs_oracle(parents in prop::collection::vec(0usize..32, 1..30)) {
            let (t, ids, parent_of) = build(&parents);
            let is_leaf = |i: usize| !parent_of.contains(&Some(i));
            for root in 0..ids.len() {
                let expected: BTreeSet<BlockId> = (0..ids.len())
                    .filter(|&i| is_leaf(i) && oracle_ancestor(&parent_of, root, i))
                    .map(|i| ids[i])
                    .collect();
                prop_assert_eq!(t.subtree_leaves(&ids[root]).unwrap(), expected.clone());
                let best = expected
                    .iter()
                    .map(|id| (t.depth(id).unwrap(), *id))
                    .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)))
                    .unwrap();
                prop_assert_eq!(t.deepest_leaf(&ids[root]).unwrap(), best);
            }
        }

        #[test]
        fn depth_is_parent_plus_one(parents in prop::collection::vec(0usize..16, 1..40)) {
            let (t, ids, _) = build(&parents);
            for id in &ids[1..] {
                let p = t.parent(id).unwrap();
                prop_assert_eq!(t.depth(id).unwrap(), t.depth(&p).unwrap() + 1);
            }
            prop_assert_eq!(t.parent(&ids[0]), None);
        }
    }
}
