//! Fixtures shared by the benchmarks.

use relaysim_core::topo::{build_lattice, concentric, two_node};
use relaysim_core::{LatencyGraph, Scenario, SPEED_OF_LIGHT};

/// Earth and Mars 7.533 light-minutes apart, 90/10 hashpower, running for
/// roughly `blocks` blocks at a ten-minute blocktime.
pub fn earth_mars(blocks: u32) -> Scenario {
    let g = two_node("earth", "mars", 7.533 * 60.0)
        .and_then(|g| g.map_nodes(|n| n.hashpower = if n.id == "earth" { 0.9 } else { 0.1 }))
        .expect("valid fixture");
    Scenario::new(g, 600.0, 600.0 * f64::from(blocks), 1)
}

pub fn lattice(side: u32) -> LatencyGraph {
    build_lattice(side, side, side, 100.0).expect("valid fixture")
}

/// Earth-like and Mars-like orbits with a 1:2 period ratio.
pub fn orbits() -> LatencyGraph {
    concentric(&[499.0, 760.0], &[3.15e7, 6.3e7], SPEED_OF_LIGHT).expect("valid fixture")
}
