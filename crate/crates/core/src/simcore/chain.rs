use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::Seconds;

pub type BlockId = usize;
pub type NodeId = usize;
pub type TxId = usize;

pub const GENESIS: BlockId = 0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Block {
    pub id: BlockId,
    /// `None` only for genesis.
    pub parent: Option<BlockId>,
    /// `None` only for genesis.
    pub miner: Option<NodeId>,
    /// Coordinate time at which the block was found.
    pub time: Seconds,
    pub height: u64,
    pub txs: Vec<TxId>,
}

/// Append-only arena of every block mined in a run. Ids are indices.
#[derive(Debug, Clone)]
pub struct BlockStore {
    blocks: Vec<Block>,
}

impl BlockStore {
    pub fn new() -> Self {
        Self {
            blocks: vec![Block {
                id: GENESIS,
                parent: None,
                miner: None,
                time: 0.0,
                height: 0,
                txs: Vec::new(),
            }],
        }
    }

    pub fn push(&mut self, parent: BlockId, miner: NodeId, time: Seconds, txs: Vec<TxId>) -> BlockId {
        let id = self.blocks.len();
        let height = self.blocks[parent].height + 1;
        self.blocks.push(Block { id, parent: Some(parent), miner: Some(miner), time, height, txs });
        id
    }

    pub fn get(&self, id: BlockId) -> &Block {
        &self.blocks[id]
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Block> {
        self.blocks.iter()
    }

    /// Mined blocks, i.e. everything except genesis.
    pub fn mined(&self) -> &[Block] {
        &self.blocks[1..]
    }
}

impl Default for BlockStore {
    fn default() -> Self {
        Self::new()
    }
}

/// What a node did with an incoming block.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Arrival {
    /// Peers to relay the block to; empty for duplicates.
    pub forward: Vec<NodeId>,
    pub first_arrival: bool,
    pub tip_changed: bool,
    /// Whether the tip switch abandoned the previous tip.
    pub reorg: bool,
}

/// One node's view of the block tree.
///
/// Blocks whose parent has not arrived are buffered and connected as soon as
/// the parent shows up. The best tip is the highest connected block; between
/// equal heights the one that arrived first locally wins.
#[derive(Debug, Clone)]
pub struct NodeChainState {
    neighbors: Vec<NodeId>,
    arrival: Vec<Option<Seconds>>,
    connected: Vec<bool>,
    waiting: BTreeMap<BlockId, Vec<BlockId>>,
    tip: BlockId,
    /// Best-chain block at each height.
    chain: Vec<BlockId>,
    /// Transactions this node has heard of.
    known_txs: BTreeSet<TxId>,
    reorgs: u64,
}

impl NodeChainState {
    pub fn new(neighbors: Vec<NodeId>) -> Self {
        Self {
            neighbors,
            arrival: vec![Some(0.0)],
            connected: vec![true],
            waiting: BTreeMap::new(),
            tip: GENESIS,
            chain: vec![GENESIS],
            known_txs: BTreeSet::new(),
            reorgs: 0,
        }
    }

    pub fn tip(&self) -> BlockId {
        self.tip
    }

    pub fn height(&self) -> u64 {
        (self.chain.len() - 1) as u64
    }

    pub fn neighbors(&self) -> &[NodeId] {
        &self.neighbors
    }

    pub fn arrival_time(&self, block: BlockId) -> Option<Seconds> {
        self.arrival.get(block).copied().flatten()
    }

    pub fn knows(&self, block: BlockId) -> bool {
        self.arrival_time(block).is_some()
    }

    pub fn is_connected(&self, block: BlockId) -> bool {
        self.connected.get(block).copied().unwrap_or(false)
    }

    /// Blocks held back because their parent is still missing.
    pub fn buffered(&self) -> usize {
        self.waiting.values().map(Vec::len).sum()
    }

    pub fn reorgs(&self) -> u64 {
        self.reorgs
    }

    /// True if `block` is on this node's best chain.
    pub fn on_best_chain(&self, blocks: &BlockStore, block: BlockId) -> bool {
        let h = blocks.get(block).height as usize;
        self.chain.get(h) == Some(&block)
    }

    /// Records a transaction; returns false if it was already known.
    pub fn learn_tx(&mut self, tx: TxId) -> bool {
        self.known_txs.insert(tx)
    }

    pub fn known_txs(&self) -> impl Iterator<Item = TxId> + '_ {
        self.known_txs.iter().copied()
    }

    /// Handles delivery of `block` from `sender` (`None` when self-mined).
    pub fn on_block_arrival(
        &mut self,
        blocks: &BlockStore,
        block: BlockId,
        sender: Option<NodeId>,
        now: Seconds,
    ) -> Arrival {
        if self.knows(block) {
            return Arrival::default();
        }
        if self.arrival.len() <= block {
            self.arrival.resize(block + 1, None);
            self.connected.resize(block + 1, false);
        }
        self.arrival[block] = Some(now);

        let parent = blocks.get(block).parent.expect("genesis is never delivered");
        let old_tip = self.tip;
        if self.is_connected(parent) {
            let mut ready = vec![block];
            while let Some(b) = ready.pop() {
                self.connected[b] = true;
                self.consider_tip(blocks, b);
                if let Some(children) = self.waiting.remove(&b) {
                    ready.extend(children);
                }
            }
        } else {
            self.waiting.entry(parent).or_default().push(block);
        }

        let tip_changed = self.tip != old_tip;
        let reorg = tip_changed && !self.on_best_chain(blocks, old_tip);
        if reorg {
            self.reorgs += 1;
        }
        let forward = self
            .neighbors
            .iter()
            .copied()
            .filter(|&n| Some(n) != sender)
            .collect();
        Arrival { forward, first_arrival: true, tip_changed, reorg }
    }

    fn consider_tip(&mut self, blocks: &BlockStore, candidate: BlockId) {
        let cand = blocks.get(candidate);
        let best = blocks.get(self.tip);
        let better = cand.height > best.height
            || (cand.height == best.height && self.arrival[candidate] < self.arrival[self.tip]);
        if better {
            self.set_tip(blocks, candidate);
        }
    }

    fn set_tip(&mut self, blocks: &BlockStore, tip: BlockId) {
        let height = blocks.get(tip).height as usize;
        self.chain.truncate(height + 1);
        self.chain.resize(height + 1, GENESIS);
        let mut cursor = tip;
        loop {
            let b = blocks.get(cursor);
            let h = b.height as usize;
            if self.chain[h] == cursor && h < height {
                break;
            }
            self.chain[h] = cursor;
            match b.parent {
                Some(p) => cursor = p,
                None => break,
            }
        }
        self.tip = tip;
    }
}
