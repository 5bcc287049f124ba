//! Deterministic discrete-event simulation of a proof-of-work network with
//! light-speed links.
//!
//! Mining is a Poisson process per node whose rate is the node's hashpower
//! share of `1/blocktime`, dilated by its Lorentz factor. Blocks and
//! transactions flood the latency graph; each node keeps its own block tree
//! and follows the highest chain, breaking ties by local arrival order.
//!
//! Events are ordered by `(time, insertion sequence)` and every node draws
//! from its own seed-derived stream, so a scenario and seed always produce
//! the same report.

mod chain;
mod engine;
mod mining;
mod queue;
mod report;

use rayon::prelude::*;
use thiserror::Error;

pub use chain::{Arrival, Block, BlockId, BlockStore, NodeChainState, NodeId, TxId, GENESIS};
pub use engine::{flood_arrivals, run, Scenario, Simulation, TxSpec};
pub use mining::{mining_rate, next_grind_event, next_mining_event, node_rng, MiningModel};
pub use queue::EventQueue;
pub use report::{
    dominance_stats, BlockRecord, Dominance, LatencySummary, NodeStats, PropagationSummary,
    SimReport, TxRecord,
};

use crate::relkin::RelError;
use crate::topo::{diameter, LatencyGraph, TopoError};
use crate::Seconds;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Graph(#[from] TopoError),
    #[error("blocktime must be positive, got {0}")]
    InvalidBlocktime(f64),
    #[error("duration must be positive, got {0}")]
    InvalidDuration(f64),
    #[error("no node has positive hashpower")]
    NoHashpower,
    #[error("{0} has {1} entries for {2} nodes")]
    LengthMismatch(&'static str, usize, usize),
    #[error("node `{0}`: {1}")]
    Velocity(String, RelError),
    #[error("transaction {0} references an unknown node or has an invalid creation time")]
    InvalidTransaction(usize),
    #[error("hash-grind difficulty must be 1..=24 bits, got {0}")]
    GrindDifficulty(u32),
    #[error("unknown node index {0}")]
    UnknownNode(usize),
    #[error("could not start worker pool: {0}")]
    Workers(String),
}

/// Round trip along the longest shortest path at `t = 0`.
pub fn worst_case_confirmation(g: &LatencyGraph) -> Result<Seconds, TopoError> {
    worst_case_confirmation_at(g, 0.0)
}

pub fn worst_case_confirmation_at(g: &LatencyGraph, t: Seconds) -> Result<Seconds, TopoError> {
    Ok(2.0 * diameter(g, t)?)
}

/// Runs `scenario` once per seed on `workers` threads. The output is in seed
/// order and does not depend on the worker count.
pub fn run_sweep(scenario: &Scenario, seeds: &[u64], workers: usize) -> Result<Vec<SimReport>, SimError> {
    scenario.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| SimError::Workers(e.to_string()))?;
    pool.install(|| {
        seeds
            .par_iter()
            .map(|&seed| run(&scenario.clone().with_seed(seed)))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relkin::SPEED_OF_LIGHT;
    use crate::topo::{build_lattice, triangle, two_node, LatencyGraph, MotionSpec, NodeSpec};

    fn single() -> LatencyGraph {
        LatencyGraph::explicit(vec![NodeSpec::new("solo", MotionSpec::at_origin())], []).unwrap()
    }

    #[test]
    fn single_node_mines_at_blocktime() {
        let r = run(&Scenario::new(single(), 600.0, 6e5, 1)).unwrap();
        assert!((900..=1100).contains(&r.total_mined), "{}", r.total_mined);
        assert_eq!(r.orphan_rate, 0.0);
        assert_eq!(r.final_height, r.total_mined);
        assert_eq!(dominance_stats(&r)[0].main_chain_share, 1.0);
    }

    #[test]
    fn colocated_pair_never_orphans() {
        let g = two_node("a", "b", 0.0).unwrap().map_nodes(|n| {
            if n.id == "b" {
                n.hashpower = 3.0
            }
        });
        let r = run(&Scenario::new(g.unwrap(), 60.0, 60.0 * 3000.0, 5)).unwrap();
        assert!(r.total_mined > 2500);
        assert_eq!(r.orphan_rate, 0.0);
        assert_eq!(r.fork_count, 0);
    }

    #[test]
    fn conservation_and_determinism() {
        let g = triangle(100.0, 200.0, 400.0).unwrap();
        let s = Scenario::new(g, 150.0, 150.0 * 500.0, 42);
        let a = run(&s).unwrap();
        let b = run(&s).unwrap();
        assert_eq!(a, b);
        let main: u64 = a.nodes.iter().map(|n| n.main_chain).sum();
        assert_eq!(main, a.final_height);
        for n in &a.nodes {
            assert_eq!(n.main_chain + n.stale, n.mined);
        }
        assert_eq!(a.blocks.len() as u64, a.total_mined);
        assert!((0.0..=1.0).contains(&a.orphan_rate));
        assert_ne!(a, run(&s.clone().with_seed(43)).unwrap());
    }

    #[test]
    fn rejects_invalid_scenarios() {
        let nodes = vec![
            NodeSpec::new("a", MotionSpec::at_origin()),
            NodeSpec::new("b", MotionSpec::at_origin()),
        ];
        let disconnected = LatencyGraph::explicit(nodes, []).unwrap();
        assert!(matches!(
            run(&Scenario::new(disconnected, 1.0, 1.0, 0)),
            Err(SimError::Graph(TopoError::Disconnected(..)))
        ));
        let g = single();
        assert!(run(&Scenario::new(g.clone(), 0.0, 1.0, 0)).is_err());
        assert!(run(&Scenario::new(g.clone(), 1.0, -1.0, 0)).is_err());
        let idle = g.clone().map_nodes(|n| n.hashpower = 0.0).unwrap();
        assert_eq!(run(&Scenario::new(idle, 1.0, 1.0, 0)), Err(SimError::NoHashpower));
        let fast = Scenario::new(g.clone(), 1.0, 1.0, 0).with_velocities(vec![SPEED_OF_LIGHT]);
        assert!(matches!(run(&fast), Err(SimError::Velocity(..))));
        let bad_tx = Scenario::new(g, 1.0, 1.0, 0).with_transaction(TxSpec { created: 0.0, origin: 3, destination: 0 });
        assert_eq!(run(&bad_tx), Err(SimError::InvalidTransaction(0)));
    }

    #[test]
    fn arrivals_respect_light_delay() {
        let g = triangle(30.0, 50.0, 120.0).unwrap();
        let mut sim = Simulation::new(Scenario::new(g.clone(), 40.0, 40.0 * 400.0, 9)).unwrap();
        sim.run_to_end();
        let dist: Vec<Vec<f64>> = (0..g.len()).map(|s| g.shortest_delays_from(s, 0.0)).collect();
        let mut checked = 0;
        for b in sim.blocks().mined() {
            let miner = b.miner.unwrap();
            for (node, d) in dist[miner].iter().enumerate() {
                if let Some(t) = sim.arrival_time(node, b.id) {
                    assert!(t >= b.time + d - 1e-9);
                    assert!((t - (b.time + d)).abs() < 1e-9);
                    checked += 1;
                }
            }
        }
        assert!(checked > 1000);
    }

    #[test]
    fn flood_reaches_lattice_corner() {
        let g = build_lattice(3, 2, 2, 2.5).unwrap();
        let arrivals = flood_arrivals(&g, 0, 0.0).unwrap();
        assert_eq!(arrivals[0], 0.0);
        assert_eq!(arrivals[g.len() - 1], 2.5 * 4.0);
    }

    #[test]
    fn worst_case_examples() {
        assert_eq!(worst_case_confirmation(&triangle(1.0, 2.0, 4.0).unwrap()).unwrap(), 6.0);
        assert_eq!(worst_case_confirmation(&single()).unwrap(), 0.0);
        assert_eq!(worst_case_confirmation(&two_node("e", "m", 451.98).unwrap()).unwrap(), 903.96);
    }

    #[test]
    fn sweep_is_independent_of_workers() {
        let s = Scenario::new(two_node("e", "m", 30.0).unwrap(), 60.0, 60.0 * 300.0, 0);
        let seeds: Vec<u64> = (0..6).collect();
        let serial = run_sweep(&s, &seeds, 1).unwrap();
        let parallel = run_sweep(&s, &seeds, 4).unwrap();
        assert_eq!(serial, parallel);
        assert_eq!(serial[3], run(&s.clone().with_seed(3)).unwrap());
    }

    #[test]
    fn transactions_confirm_at_origin() {
        let g = two_node("earth", "mars", 100.0).unwrap();
        let s = Scenario::new(g, 200.0, 200.0 * 200.0, 3)
            .with_transaction(TxSpec { created: 10.0, origin: 1, destination: 0 })
            .with_transaction(TxSpec { created: 20.0, origin: 0, destination: 1 });
        let r = run(&s).unwrap();
        assert_eq!(r.confirmation.confirmed, 2);
        for t in &r.transactions {
            let latency = t.latency.unwrap();
            assert!(latency > 0.0);
            assert_eq!(t.confirmed.unwrap() - t.created, latency);
        }
    }

    #[test]
    fn transaction_is_included_once_per_chain() {
        let g = triangle(50.0, 80.0, 200.0).unwrap();
        let s = Scenario::new(g, 60.0, 60.0 * 400.0, 8)
            .with_transaction(TxSpec { created: 5.0, origin: 2, destination: 1 });
        let mut sim = Simulation::new(s).unwrap();
        sim.run_to_end();
        for node in 0..3 {
            let state = sim.node_state(node);
            let mut cursor = Some(state.tip());
            let mut inclusions = 0;
            while let Some(b) = cursor {
                let block = sim.blocks().get(b);
                inclusions += block.txs.iter().filter(|&&t| t == 0).count();
                cursor = block.parent;
            }
            assert_eq!(inclusions, 1, "node {node}");
        }
    }

    #[test]
    fn hash_grind_mode_tracks_blocktime() {
        let s = Scenario::new(single(), 600.0, 600.0 * 1500.0, 4)
            .with_mining(MiningModel::HashGrind { difficulty_bits: 8 });
        let r = run(&s).unwrap();
        assert!((1350..=1650).contains(&r.total_mined), "{}", r.total_mined);
    }
}
