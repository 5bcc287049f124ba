use serde::Serialize;

use super::chain::{BlockId, NodeId, GENESIS};
use super::engine::Simulation;
use crate::Seconds;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeStats {
    pub id: String,
    pub mined: u64,
    pub main_chain: u64,
    /// Own blocks that ended up off the main chain.
    pub stale: u64,
    pub reorgs: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockRecord {
    pub id: BlockId,
    /// Zero is genesis.
    pub parent: BlockId,
    pub miner: NodeId,
    pub time: Seconds,
    pub height: u64,
    pub on_main_chain: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TxRecord {
    pub id: usize,
    pub origin: NodeId,
    pub destination: NodeId,
    pub created: Seconds,
    /// When a block including the transaction first reached its origin.
    pub confirmed: Option<Seconds>,
    pub latency: Option<Seconds>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct LatencySummary {
    pub confirmed: u64,
    pub unconfirmed: u64,
    pub mean: Option<Seconds>,
    pub median: Option<Seconds>,
    pub max: Option<Seconds>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct PropagationSummary {
    /// Block and transaction messages delivered.
    pub deliveries: u64,
    /// Blocks that reached every node before the run ended.
    pub fully_propagated: u64,
    /// Mean time from mining until the last node received the block.
    pub mean_full_propagation: Option<Seconds>,
    pub max_full_propagation: Option<Seconds>,
}

/// Measurements from one run.
///
/// The main chain is the highest block mined during the run; ties go to the
/// earliest mined.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub seed: u64,
    pub blocktime: Seconds,
    pub duration: Seconds,
    pub nodes: Vec<NodeStats>,
    pub total_mined: u64,
    pub final_height: u64,
    /// Fraction of mined blocks not on the main chain.
    pub orphan_rate: f64,
    /// Blocks mined on a parent that already had a child.
    pub fork_count: u64,
    pub blocks: Vec<BlockRecord>,
    pub transactions: Vec<TxRecord>,
    pub confirmation: LatencySummary,
    pub propagation: PropagationSummary,
}

impl SimReport {
    pub(crate) fn from_simulation(sim: &Simulation) -> Self {
        let scenario = sim.scenario();
        let store = sim.blocks();
        let mined = store.mined();

        let tip = mined
            .iter()
            .min_by(|a, b| {
                b.height
                    .cmp(&a.height)
                    .then(a.time.total_cmp(&b.time))
                    .then(a.id.cmp(&b.id))
            })
            .map_or(GENESIS, |b| b.id);
        let mut on_main = vec![false; store.len()];
        let mut cursor = Some(tip);
        while let Some(b) = cursor {
            on_main[b] = true;
            cursor = store.get(b).parent;
        }

        let mut nodes: Vec<NodeStats> = scenario
            .graph
            .nodes()
            .iter()
            .enumerate()
            .map(|(i, n)| NodeStats {
                id: n.id.clone(),
                mined: 0,
                main_chain: 0,
                stale: 0,
                reorgs: sim.node_state(i).reorgs(),
            })
            .collect();
        let mut children = vec![0u32; store.len()];
        let mut fork_count = 0;
        let mut blocks = Vec::with_capacity(mined.len());
        for b in mined {
            let miner = b.miner.expect("mined block has a miner");
            let parent = b.parent.expect("mined block has a parent");
            let stats = &mut nodes[miner];
            stats.mined += 1;
            if on_main[b.id] {
                stats.main_chain += 1;
            } else {
                stats.stale += 1;
            }
            children[parent] += 1;
            if children[parent] > 1 {
                fork_count += 1;
            }
            blocks.push(BlockRecord {
                id: b.id,
                parent,
                miner,
                time: b.time,
                height: b.height,
                on_main_chain: on_main[b.id],
            });
        }

        let total_mined = mined.len() as u64;
        let final_height = store.get(tip).height;
        let orphan_rate = if total_mined == 0 {
            0.0
        } else {
            (total_mined - final_height) as f64 / total_mined as f64
        };

        let transactions: Vec<TxRecord> = sim
            .txs
            .iter()
            .enumerate()
            .map(|(id, t)| TxRecord {
                id,
                origin: t.spec.origin,
                destination: t.spec.destination,
                created: t.spec.created,
                confirmed: t.confirmed,
                latency: t.confirmed.map(|c| c - t.spec.created),
            })
            .collect();

        let mut latencies: Vec<f64> = transactions.iter().filter_map(|t| t.latency).collect();
        latencies.sort_by(f64::total_cmp);
        let confirmation = LatencySummary {
            confirmed: latencies.len() as u64,
            unconfirmed: (transactions.len() - latencies.len()) as u64,
            mean: mean(&latencies),
            median: median(&latencies),
            max: latencies.last().copied(),
        };

        let n = scenario.graph.len();
        let full: Vec<f64> = mined
            .iter()
            .filter_map(|b| {
                (0..n)
                    .map(|node| sim.arrival_time(node, b.id).map(|t| t - b.time))
                    .try_fold(0.0f64, |acc, d| d.map(|d| acc.max(d)))
            })
            .collect();
        let propagation = PropagationSummary {
            deliveries: sim.deliveries,
            fully_propagated: full.len() as u64,
            mean_full_propagation: mean(&full),
            max_full_propagation: full.iter().copied().reduce(f64::max),
        };

        SimReport {
            seed: scenario.seed,
            blocktime: scenario.blocktime,
            duration: scenario.duration,
            nodes,
            total_mined,
            final_height,
            orphan_rate,
            fork_count,
            blocks,
            transactions,
            confirmation,
            propagation,
        }
    }

    pub fn node_index(&self, id: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.id == id)
    }
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

fn median(sorted: &[f64]) -> Option<f64> {
    let n = sorted.len();
    match n {
        0 => None,
        _ if n % 2 == 1 => Some(sorted[n / 2]),
        _ => Some((sorted[n / 2 - 1] + sorted[n / 2]) / 2.0),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dominance {
    pub node: String,
    /// Fraction of main-chain blocks mined by this node.
    pub main_chain_share: f64,
    /// Fraction of this node's own blocks that were orphaned.
    pub stale_fraction: f64,
}

/// Per-node main-chain share and stale fraction. An empty chain yields zeros.
pub fn dominance_stats(report: &SimReport) -> Vec<Dominance> {
    report
        .nodes
        .iter()
        .map(|n| Dominance {
            node: n.id.clone(),
            main_chain_share: if report.final_height == 0 {
                0.0
            } else {
                n.main_chain as f64 / report.final_height as f64
            },
            stale_fraction: if n.mined == 0 { 0.0 } else { n.stale as f64 / n.mined as f64 },
        })
        .collect()
}
