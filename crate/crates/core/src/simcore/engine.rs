use std::collections::BTreeSet;

use rand_chacha::ChaCha8Rng;

use super::chain::{BlockId, BlockStore, NodeChainState, NodeId, TxId};
use super::mining::{next_grind_event, next_mining_event, node_rng, MiningModel};
use super::queue::EventQueue;
use super::report::SimReport;
use super::SimError;
use crate::relkin::Velocity;
use crate::topo::LatencyGraph;
use crate::Seconds;

/// A transaction in the workload.
#[derive(Debug, Clone, PartialEq)]
pub struct TxSpec {
    pub created: Seconds,
    pub origin: NodeId,
    pub destination: NodeId,
}

/// Everything a run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub graph: LatencyGraph,
    /// Network-wide mean time between blocks.
    pub blocktime: Seconds,
    pub duration: Seconds,
    pub seed: u64,
    /// Per-node speed for time dilation, m/s. Empty means all at rest.
    pub node_velocities: Vec<f64>,
    pub tx_workload: Vec<TxSpec>,
    /// Per-node region labels whose transactions the node will not include.
    /// Empty means nobody censors.
    pub censorship: Vec<BTreeSet<String>>,
    pub mining: MiningModel,
}

impl Scenario {
    pub fn new(graph: LatencyGraph, blocktime: Seconds, duration: Seconds, seed: u64) -> Self {
        Self {
            graph,
            blocktime,
            duration,
            seed,
            node_velocities: Vec::new(),
            tx_workload: Vec::new(),
            censorship: Vec::new(),
            mining: MiningModel::Poisson,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_velocities(mut self, velocities: Vec<f64>) -> Self {
        self.node_velocities = velocities;
        self
    }

    pub fn with_transaction(mut self, tx: TxSpec) -> Self {
        self.tx_workload.push(tx);
        self
    }

    /// Makes `node` refuse transactions to or from `region`.
    pub fn with_censor(mut self, node: NodeId, region: impl Into<String>) -> Self {
        if self.censorship.len() < self.graph.len() {
            self.censorship.resize(self.graph.len(), BTreeSet::new());
        }
        self.censorship[node].insert(region.into());
        self
    }

    pub fn with_mining(mut self, mining: MiningModel) -> Self {
        self.mining = mining;
        self
    }

    pub fn velocity(&self, node: NodeId) -> f64 {
        self.node_velocities.get(node).copied().unwrap_or(0.0)
    }

    pub fn censors(&self, node: NodeId) -> Option<&BTreeSet<String>> {
        self.censorship.get(node)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let n = self.graph.len();
        if !(self.blocktime > 0.0 && self.blocktime.is_finite()) {
            return Err(SimError::InvalidBlocktime(self.blocktime));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(SimError::InvalidDuration(self.duration));
        }
        if !self.graph.nodes().iter().any(|node| node.hashpower > 0.0) {
            return Err(SimError::NoHashpower);
        }
        if !self.node_velocities.is_empty() && self.node_velocities.len() != n {
            return Err(SimError::LengthMismatch("node_velocities", self.node_velocities.len(), n));
        }
        if !self.censorship.is_empty() && self.censorship.len() != n {
            return Err(SimError::LengthMismatch("censorship", self.censorship.len(), n));
        }
        let c = self.graph.speed_of_light();
        for (i, &v) in self.node_velocities.iter().enumerate() {
            Velocity(v)
                .validate(c)
                .map_err(|e| SimError::Velocity(self.graph.node(i).id.clone(), e))?;
        }
        for (i, tx) in self.tx_workload.iter().enumerate() {
            if tx.origin >= n || tx.destination >= n || !(tx.created >= 0.0 && tx.created.is_finite()) {
                return Err(SimError::InvalidTransaction(i));
            }
        }
        if let MiningModel::HashGrind { difficulty_bits } = self.mining {
            if !(1..=MiningModel::MAX_GRIND_BITS).contains(&difficulty_bits) {
                return Err(SimError::GrindDifficulty(difficulty_bits));
            }
        }
        self.graph.check_connected()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Event {
    Mine { node: NodeId },
    DeliverBlock { to: NodeId, from: NodeId, block: BlockId },
    CreateTx { tx: TxId },
    DeliverTx { to: NodeId, from: NodeId, tx: TxId },
}

struct Miner {
    rng: ChaCha8Rng,
    hashshare: f64,
    velocity: Velocity,
    censored: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct TxState {
    pub spec: TxSpec,
    pub confirmed: Option<Seconds>,
    /// Every block that has included this transaction.
    pub included_in: Vec<BlockId>,
}

/// Single deterministic run of the event loop.
pub struct Simulation {
    scenario: Scenario,
    queue: EventQueue<Event>,
    pub(crate) blocks: BlockStore,
    pub(crate) nodes: Vec<NodeChainState>,
    miners: Vec<Miner>,
    pub(crate) txs: Vec<TxState>,
    pub(crate) deliveries: u64,
    mining_enabled: bool,
    now: Seconds,
}

impl Simulation {
    pub fn new(scenario: Scenario) -> Result<Self, SimError> {
        scenario.validate()?;
        Ok(Self::build(scenario, true))
    }

    fn build(scenario: Scenario, mining_enabled: bool) -> Self {
        let g = &scenario.graph;
        let total: f64 = g.nodes().iter().map(|n| n.hashpower).sum();
        let nodes = (0..g.len())
            .map(|i| NodeChainState::new(g.neighbors(i).iter().map(|&(v, _)| v).collect()))
            .collect();
        let miners = (0..g.len())
            .map(|i| Miner {
                rng: node_rng(scenario.seed, i),
                hashshare: if total > 0.0 { g.node(i).hashpower / total } else { 0.0 },
                velocity: Velocity(scenario.velocity(i)),
                censored: scenario.censors(i).cloned().unwrap_or_default(),
            })
            .collect();
        let txs = scenario
            .tx_workload
            .iter()
            .map(|spec| TxState { spec: spec.clone(), confirmed: None, included_in: Vec::new() })
            .collect();
        let mut sim = Self {
            queue: EventQueue::new(),
            blocks: BlockStore::new(),
            nodes,
            miners,
            txs,
            deliveries: 0,
            mining_enabled,
            now: 0.0,
            scenario,
        };
        if mining_enabled {
            for node in 0..sim.nodes.len() {
                sim.schedule_mining(node, 0.0);
            }
        }
        for tx in 0..sim.txs.len() {
            sim.queue.push(sim.txs[tx].spec.created, Event::CreateTx { tx });
        }
        sim
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn blocks(&self) -> &BlockStore {
        &self.blocks
    }

    pub fn node_state(&self, node: NodeId) -> &NodeChainState {
        &self.nodes[node]
    }

    /// Local arrival time of `block` at `node`, if it got there.
    pub fn arrival_time(&self, node: NodeId, block: BlockId) -> Option<Seconds> {
        self.nodes[node].arrival_time(block)
    }

    pub fn now(&self) -> Seconds {
        self.now
    }

    fn schedule_mining(&mut self, node: NodeId, from: Seconds) {
        let c = self.scenario.graph.speed_of_light();
        let b = self.scenario.blocktime;
        let miner = &mut self.miners[node];
        let wait = match self.scenario.mining {
            MiningModel::Poisson => next_mining_event(&mut miner.rng, b, miner.hashshare, miner.velocity, c),
            MiningModel::HashGrind { difficulty_bits } => {
                next_grind_event(&mut miner.rng, b, miner.hashshare, miner.velocity, c, difficulty_bits)
            }
        }
        .expect("velocities validated");
        if let Some(wait) = wait {
            self.queue.push(from + wait, Event::Mine { node });
        }
    }

    /// Creates a block at `node` on top of its current tip at time `at`,
    /// regardless of its hashpower. Returns the new block id.
    pub fn inject_block(&mut self, node: NodeId, at: Seconds) -> BlockId {
        let parent = self.nodes[node].tip();
        let txs = self.eligible_txs(node);
        let block = self.blocks.push(parent, node, at, txs);
        for &tx in &self.blocks.get(block).txs {
            self.txs[tx].included_in.push(block);
        }
        self.receive_block(node, None, block, at);
        block
    }

    fn eligible_txs(&self, node: NodeId) -> Vec<TxId> {
        let state = &self.nodes[node];
        let censored = &self.miners[node].censored;
        let region = |n: NodeId| self.scenario.graph.node(n).region.as_str();
        state
            .known_txs()
            .filter(|&tx| {
                let spec = &self.txs[tx].spec;
                !censored.contains(region(spec.origin)) && !censored.contains(region(spec.destination))
            })
            .filter(|&tx| {
                !self.txs[tx]
                    .included_in
                    .iter()
                    .any(|&b| state.on_best_chain(&self.blocks, b))
            })
            .collect()
    }

    fn receive_block(&mut self, node: NodeId, sender: Option<NodeId>, block: BlockId, now: Seconds) {
        let arrival = self.nodes[node].on_block_arrival(&self.blocks, block, sender, now);
        if !arrival.first_arrival {
            return;
        }
        for &tx in &self.blocks.get(block).txs {
            let state = &mut self.txs[tx];
            if state.spec.origin == node && state.confirmed.is_none() {
                state.confirmed = Some(now);
            }
        }
        self.relay(node, arrival.forward, now, |to, from| Event::DeliverBlock { to, from, block });
    }

    fn relay(&mut self, node: NodeId, targets: Vec<NodeId>, now: Seconds, event: impl Fn(NodeId, NodeId) -> Event) {
        let g = &self.scenario.graph;
        for &(neighbor, edge) in g.neighbors(node) {
            if targets.contains(&neighbor) {
                self.queue.push(now + g.edge_delay(edge, now), event(neighbor, node));
            }
        }
    }

    fn receive_tx(&mut self, node: NodeId, sender: Option<NodeId>, tx: TxId, now: Seconds) {
        if !self.nodes[node].learn_tx(tx) {
            return;
        }
        let targets = self.nodes[node]
            .neighbors()
            .iter()
            .copied()
            .filter(|&n| Some(n) != sender)
            .collect();
        self.relay(node, targets, now, |to, from| Event::DeliverTx { to, from, tx });
    }

    /// Processes the next event if it is due no later than `until`.
    pub fn step(&mut self, until: Seconds) -> bool {
        match self.queue.peek_time() {
            Some(t) if t <= until => {}
            _ => return false,
        }
        let (now, event) = self.queue.pop().expect("peeked");
        self.now = now;
        match event {
            Event::Mine { node } => {
                self.inject_block(node, now);
                if self.mining_enabled {
                    self.schedule_mining(node, now);
                }
            }
            Event::DeliverBlock { to, from, block } => {
                self.deliveries += 1;
                self.receive_block(to, Some(from), block, now);
            }
            Event::CreateTx { tx } => {
                let origin = self.txs[tx].spec.origin;
                self.receive_tx(origin, None, tx, now);
            }
            Event::DeliverTx { to, from, tx } => {
                self.deliveries += 1;
                self.receive_tx(to, Some(from), tx, now);
            }
        }
        true
    }

    /// Runs until the scenario duration.
    pub fn run_to_end(&mut self) {
        let end = self.scenario.duration;
        while self.step(end) {}
        self.now = end;
    }

    pub fn report(&self) -> SimReport {
        SimReport::from_simulation(self)
    }
}

/// Runs a scenario to completion.
pub fn run(scenario: &Scenario) -> Result<SimReport, SimError> {
    let mut sim = Simulation::new(scenario.clone())?;
    sim.run_to_end();
    Ok(sim.report())
}

/// Floods one block from `source` at `t0` through the same relay path the
/// simulator uses, with mining switched off. Returns each node's arrival
/// time.
pub fn flood_arrivals(graph: &LatencyGraph, source: NodeId, t0: Seconds) -> Result<Vec<Seconds>, SimError> {
    graph.check_connected()?;
    if source >= graph.len() {
        return Err(SimError::UnknownNode(source));
    }
    let scenario = Scenario::new(graph.clone(), 1.0, f64::MAX, 0);
    let mut sim = Simulation::build(scenario, false);
    let block = sim.inject_block(source, t0);
    while sim.step(f64::INFINITY) {}
    Ok((0..graph.len())
        .map(|n| sim.arrival_time(n, block).unwrap_or(f64::INFINITY))
        .collect())
}
