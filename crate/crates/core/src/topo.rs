//! Network geometry: node motion, light-delay edges and graph metrics.
//!
//! Delays on geometric edges are evaluated at emission time; the receiver's
//! motion during flight is ignored, an error of order `v_orbital / c`.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashSet};
use std::f64::consts::TAU;

use nalgebra::Vector3;
use thiserror::Error;

use crate::relkin::SPEED_OF_LIGHT;
use crate::Seconds;

pub type Point3 = Vector3<f64>;

/// Standard gravitational parameter of the Sun, m³/s².
pub const GM_SUN: f64 = 1.327_124_400_18e20;
/// Standard gravitational parameter of the Earth, m³/s².
pub const GM_EARTH: f64 = 3.986_004_418e14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TopoError {
    #[error("duplicate node id `{0}`")]
    DuplicateNode(String),
    #[error("edge references node index {0}, graph has {1} nodes")]
    UnknownNode(usize, usize),
    #[error("self-loop on node `{0}`")]
    SelfLoop(String),
    #[error("duplicate edge between `{0}` and `{1}`")]
    DuplicateEdge(String, String),
    #[error("edge `{0}`-`{1}` has invalid delay {2}")]
    InvalidDelay(String, String, f64),
    #[error("node `{0}` has invalid hashpower {1}")]
    InvalidHashpower(String, f64),
    #[error("orbit of node `{id}` moves at {speed} m/s, not below c")]
    SuperluminalOrbit { id: String, speed: f64 },
    #[error("invalid orbit: {0}")]
    InvalidOrbit(&'static str),
    #[error("lattice dimensions must all be at least 1, got {0}x{1}x{2}")]
    ZeroDimension(u32, u32, u32),
    #[error("edge delay must be positive, got {0}")]
    NonPositiveDelay(f64),
    #[error("node `{0}` has no geometric position")]
    NoPosition(String),
    #[error("graph is disconnected: `{0}` cannot reach `{1}`")]
    Disconnected(String, String),
    #[error("graph has no nodes")]
    Empty,
}

/// Orthonormal basis of an orbital plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitalPlane {
    u: Point3,
    v: Point3,
}

impl OrbitalPlane {
    pub fn xy() -> Self {
        Self { u: Point3::x(), v: Point3::y() }
    }

    /// The xy plane tilted about the x axis by `inclination` radians.
    pub fn inclined(inclination: f64) -> Self {
        Self {
            u: Point3::x(),
            v: Point3::new(0.0, inclination.cos(), inclination.sin()),
        }
    }

    /// Builds a plane from two spanning vectors; `v` is re-orthogonalised
    /// against `u`.
    pub fn new(u: Point3, v: Point3) -> Result<Self, TopoError> {
        let u = u.try_normalize(1e-12).ok_or(TopoError::InvalidOrbit("degenerate plane"))?;
        let v = (v - u * u.dot(&v))
            .try_normalize(1e-12)
            .ok_or(TopoError::InvalidOrbit("degenerate plane"))?;
        Ok(Self { u, v })
    }

    pub fn inclination(&self) -> f64 {
        self.v.z.atan2(self.v.y)
    }

    pub fn basis(&self) -> (Point3, Point3) {
        (self.u, self.v)
    }
}

impl Default for OrbitalPlane {
    fn default() -> Self {
        Self::xy()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircularOrbit {
    pub center: Point3,
    /// Meters.
    pub radius: f64,
    /// Radians per second; the sign gives the direction of travel.
    pub angular_velocity: f64,
    /// Angle at t = 0, radians.
    pub phase: f64,
    pub plane: OrbitalPlane,
}

impl CircularOrbit {
    pub fn new(
        center: Point3,
        radius: f64,
        angular_velocity: f64,
        phase: f64,
        plane: OrbitalPlane,
    ) -> Result<Self, TopoError> {
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(TopoError::InvalidOrbit("radius must be finite and nonnegative"));
        }
        if !angular_velocity.is_finite() || !phase.is_finite() {
            return Err(TopoError::InvalidOrbit("angular velocity and phase must be finite"));
        }
        if !center.iter().all(|x| x.is_finite()) {
            return Err(TopoError::InvalidOrbit("center must be finite"));
        }
        Ok(Self { center, radius, angular_velocity, phase, plane })
    }

    /// An orbit with the given period instead of angular velocity.
    pub fn with_period(
        center: Point3,
        radius: f64,
        period: f64,
        phase: f64,
        plane: OrbitalPlane,
    ) -> Result<Self, TopoError> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(TopoError::InvalidOrbit("period must be positive"));
        }
        Self::new(center, radius, TAU / period, phase, plane)
    }

    pub fn tangential_speed(&self) -> f64 {
        (self.angular_velocity * self.radius).abs()
    }

    /// `None` for a stationary orbit.
    pub fn period(&self) -> Option<f64> {
        (self.angular_velocity != 0.0).then(|| TAU / self.angular_velocity.abs())
    }

    pub fn position(&self, t: f64) -> Point3 {
        let angle = self.angular_velocity * t + self.phase;
        let (u, v) = self.plane.basis();
        self.center + (u * angle.cos() + v * angle.sin()) * self.radius
    }
}

/// Circular-orbit period about a central body, seconds.
pub fn kepler_period(radius: f64, gm: f64) -> f64 {
    TAU * (radius.powi(3) / gm).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MotionSpec {
    StaticPoint(Point3),
    CircularOrbit(CircularOrbit),
    /// Grid indices; lattice graphs carry their spacing in edge delays.
    LatticeSite { i: u32, j: u32, k: u32 },
}

impl MotionSpec {
    pub fn at_origin() -> Self {
        MotionSpec::StaticPoint(Point3::zeros())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeSpec {
    pub id: String,
    pub motion: MotionSpec,
    /// Relative weight; normalised over the network.
    pub hashpower: f64,
    /// Origin label used by censorship policies.
    pub region: String,
}

impl NodeSpec {
    pub fn new(id: impl Into<String>, motion: MotionSpec) -> Self {
        let id = id.into();
        Self { region: id.clone(), id, motion, hashpower: 1.0 }
    }

    pub fn with_hashpower(mut self, hashpower: f64) -> Self {
        self.hashpower = hashpower;
        self
    }

    pub fn with_region(mut self, region: impl Into<String>) -> Self {
        self.region = region.into();
        self
    }
}

/// Node position at time `t`. Lattice sites report their grid indices.
pub fn position(node: &NodeSpec, t: f64) -> Point3 {
    match &node.motion {
        MotionSpec::StaticPoint(p) => *p,
        MotionSpec::CircularOrbit(o) => o.position(t),
        MotionSpec::LatticeSite { i, j, k } => Point3::new(*i as f64, *j as f64, *k as f64),
    }
}

/// Light-travel time between two nodes at time `t`.
pub fn light_delay(a: &NodeSpec, b: &NodeSpec, t: f64, c: f64) -> Seconds {
    (position(a, t) - position(b, t)).norm() / c
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    /// Fixed delay for explicit graphs; `None` when derived from geometry.
    pub delay: Option<Seconds>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    Explicit,
    Geometric,
}

/// Simple undirected graph whose edge weights are light-travel times.
///
/// Explicit and geometric edges are never mixed within one graph.
#[derive(Debug, Clone, PartialEq)]
pub struct LatencyGraph {
    nodes: Vec<NodeSpec>,
    kind: EdgeKind,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, usize)>>,
    c: f64,
}

impl LatencyGraph {
    /// Graph with fixed delays, `(a, b, seconds)` per edge.
    pub fn explicit(
        nodes: Vec<NodeSpec>,
        edges: impl IntoIterator<Item = (usize, usize, Seconds)>,
    ) -> Result<Self, TopoError> {
        let edges = edges
            .into_iter()
            .map(|(a, b, d)| Edge { a, b, delay: Some(d) })
            .collect();
        Self::build(nodes, EdgeKind::Explicit, edges, SPEED_OF_LIGHT)
    }

    /// Graph whose delays follow node positions.
    pub fn geometric(
        nodes: Vec<NodeSpec>,
        pairs: impl IntoIterator<Item = (usize, usize)>,
        c: f64,
    ) -> Result<Self, TopoError> {
        let edges = pairs.into_iter().map(|(a, b)| Edge { a, b, delay: None }).collect();
        Self::build(nodes, EdgeKind::Geometric, edges, c)
    }

    /// Geometric graph with every pair of nodes connected.
    pub fn geometric_complete(nodes: Vec<NodeSpec>, c: f64) -> Result<Self, TopoError> {
        let n = nodes.len();
        let pairs: Vec<_> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        Self::geometric(nodes, pairs, c)
    }

    fn build(nodes: Vec<NodeSpec>, kind: EdgeKind, edges: Vec<Edge>, c: f64) -> Result<Self, TopoError> {
        if nodes.is_empty() {
            return Err(TopoError::Empty);
        }
        let mut ids = HashSet::new();
        for node in &nodes {
            if !ids.insert(node.id.as_str()) {
                return Err(TopoError::DuplicateNode(node.id.clone()));
            }
            if !(node.hashpower >= 0.0 && node.hashpower.is_finite()) {
                return Err(TopoError::InvalidHashpower(node.id.clone(), node.hashpower));
            }
            match &node.motion {
                MotionSpec::CircularOrbit(o) if o.tangential_speed() >= c => {
                    return Err(TopoError::SuperluminalOrbit {
                        id: node.id.clone(),
                        speed: o.tangential_speed(),
                    });
                }
                MotionSpec::LatticeSite { .. } if kind == EdgeKind::Geometric => {
                    return Err(TopoError::NoPosition(node.id.clone()));
                }
                _ => {}
            }
        }

        let n = nodes.len();
        let mut adjacency = vec![Vec::new(); n];
        let mut seen = HashSet::new();
        for (index, edge) in edges.iter().enumerate() {
            for end in [edge.a, edge.b] {
                if end >= n {
                    return Err(TopoError::UnknownNode(end, n));
                }
            }
            if edge.a == edge.b {
                return Err(TopoError::SelfLoop(nodes[edge.a].id.clone()));
            }
            if !seen.insert((edge.a.min(edge.b), edge.a.max(edge.b))) {
                return Err(TopoError::DuplicateEdge(
                    nodes[edge.a].id.clone(),
                    nodes[edge.b].id.clone(),
                ));
            }
            if let Some(d) = edge.delay {
                if !(d >= 0.0 && d.is_finite()) {
                    return Err(TopoError::InvalidDelay(
                        nodes[edge.a].id.clone(),
                        nodes[edge.b].id.clone(),
                        d,
                    ));
                }
            }
            adjacency[edge.a].push((edge.b, index));
            adjacency[edge.b].push((edge.a, index));
        }
        Ok(Self { nodes, kind, edges, adjacency, c })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[NodeSpec] {
        &self.nodes
    }

    pub fn node(&self, index: usize) -> &NodeSpec {
        &self.nodes[index]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn kind(&self) -> EdgeKind {
        self.kind
    }

    pub fn speed_of_light(&self) -> f64 {
        self.c
    }

    /// `(neighbor, edge index)` pairs in insertion order.
    pub fn neighbors(&self, node: usize) -> &[(usize, usize)] {
        &self.adjacency[node]
    }

    pub fn edge_delay(&self, edge: usize, t: f64) -> Seconds {
        let e = &self.edges[edge];
        match e.delay {
            Some(d) => d,
            None => light_delay(&self.nodes[e.a], &self.nodes[e.b], t, self.c),
        }
    }

    pub fn is_time_varying(&self) -> bool {
        self.kind == EdgeKind::Geometric
            && self.nodes.iter().any(|n| {
                matches!(&n.motion, MotionSpec::CircularOrbit(o) if o.angular_velocity != 0.0 && o.radius > 0.0)
            })
    }

    /// Periods of every moving orbit in the graph.
    pub fn orbital_periods(&self) -> Vec<f64> {
        self.nodes
            .iter()
            .filter_map(|n| match &n.motion {
                MotionSpec::CircularOrbit(o) if o.radius > 0.0 => o.period(),
                _ => None,
            })
            .collect()
    }

    /// Applies `f` to every node and re-validates.
    pub fn map_nodes(self, mut f: impl FnMut(&mut NodeSpec)) -> Result<Self, TopoError> {
        let Self { mut nodes, kind, edges, c, .. } = self;
        nodes.iter_mut().for_each(&mut f);
        Self::build(nodes, kind, edges, c)
    }

    /// Single-source shortest delays with edges frozen at time `t`.
    /// Unreachable nodes get `f64::INFINITY`.
    pub fn shortest_delays_from(&self, source: usize, t: f64) -> Vec<Seconds> {
        let mut dist = vec![f64::INFINITY; self.len()];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(Reverse((TotalF64(0.0), source)));
        while let Some(Reverse((TotalF64(d), u))) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &(v, edge) in &self.adjacency[u] {
                let nd = d + self.edge_delay(edge, t);
                if nd < dist[v] {
                    dist[v] = nd;
                    heap.push(Reverse((TotalF64(nd), v)));
                }
            }
        }
        dist
    }

    /// Fails with the first unreachable pair (by node order).
    pub fn check_connected(&self) -> Result<(), TopoError> {
        let mut reached = BTreeSet::from([0usize]);
        let mut stack = vec![0usize];
        while let Some(u) = stack.pop() {
            for &(v, _) in &self.adjacency[u] {
                if reached.insert(v) {
                    stack.push(v);
                }
            }
        }
        match (0..self.len()).find(|i| !reached.contains(i)) {
            Some(missing) => Err(TopoError::Disconnected(
                self.nodes[0].id.clone(),
                self.nodes[missing].id.clone(),
            )),
            None => Ok(()),
        }
    }
}

/// `f64` ordered by `total_cmp`, for heaps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct TotalF64(pub f64);

impl Eq for TotalF64 {}

impl PartialOrd for TotalF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TotalF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Longest shortest-path delay over all node pairs, edges evaluated at `t`.
pub fn diameter(g: &LatencyGraph, t: f64) -> Result<Seconds, TopoError> {
    let mut worst: f64 = 0.0;
    for source in 0..g.len() {
        let dist = g.shortest_delays_from(source, t);
        for (target, d) in dist.iter().enumerate() {
            if d.is_infinite() {
                return Err(TopoError::Disconnected(
                    g.node(source).id.clone(),
                    g.node(target).id.clone(),
                ));
            }
            worst = worst.max(*d);
        }
    }
    Ok(worst)
}

/// Index of lattice site `(i, j, k)` in a graph from [`build_lattice`].
pub fn lattice_index(l: u32, w: u32, i: u32, j: u32, k: u32) -> usize {
    (i + l * (j + w * k)) as usize
}

/// `l × w × h` grid of nodes joined to axis neighbours by edges of delay `alpha`.
pub fn build_lattice(l: u32, w: u32, h: u32, alpha: Seconds) -> Result<LatencyGraph, TopoError> {
    if l == 0 || w == 0 || h == 0 {
        return Err(TopoError::ZeroDimension(l, w, h));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(TopoError::NonPositiveDelay(alpha));
    }
    let mut nodes = Vec::with_capacity((l * w * h) as usize);
    for k in 0..h {
        for j in 0..w {
            for i in 0..l {
                nodes.push(NodeSpec::new(
                    format!("n{i}_{j}_{k}"),
                    MotionSpec::LatticeSite { i, j, k },
                ));
            }
        }
    }
    let mut edges = Vec::new();
    for k in 0..h {
        for j in 0..w {
            for i in 0..l {
                let here = lattice_index(l, w, i, j, k);
                if i + 1 < l {
                    edges.push((here, lattice_index(l, w, i + 1, j, k), alpha));
                }
                if j + 1 < w {
                    edges.push((here, lattice_index(l, w, i, j + 1, k), alpha));
                }
                if k + 1 < h {
                    edges.push((here, lattice_index(l, w, i, j, k + 1), alpha));
                }
            }
        }
    }
    LatencyGraph::explicit(nodes, edges)
}

/// Two nodes joined by a single fixed-delay edge.
pub fn two_node(a: &str, b: &str, delay: Seconds) -> Result<LatencyGraph, TopoError> {
    LatencyGraph::explicit(
        vec![NodeSpec::new(a, MotionSpec::at_origin()), NodeSpec::new(b, MotionSpec::at_origin())],
        [(0, 1, delay)],
    )
}

/// Earth, Mars and Venus with Earth-Mars `alpha`, Earth-Venus `beta` and
/// Mars-Venus `delta`.
pub fn triangle(alpha: Seconds, beta: Seconds, delta: Seconds) -> Result<LatencyGraph, TopoError> {
    let nodes = ["earth", "mars", "venus"]
        .into_iter()
        .map(|id| NodeSpec::new(id, MotionSpec::at_origin()))
        .collect();
    LatencyGraph::explicit(nodes, [(0, 1, alpha), (0, 2, beta), (1, 2, delta)])
}

/// Static planet at the origin and a satellite orbiting at `r1` light-seconds.
pub fn satellite(r1: Seconds, period: f64, c: f64) -> Result<LatencyGraph, TopoError> {
    let orbit = CircularOrbit::with_period(Point3::zeros(), r1 * c, period, 0.0, OrbitalPlane::xy())?;
    LatencyGraph::geometric_complete(
        vec![
            NodeSpec::new("planet", MotionSpec::at_origin()),
            NodeSpec::new("satellite", MotionSpec::CircularOrbit(orbit)),
        ],
        c,
    )
}

/// Planets `p1..pn` on coplanar circular orbits about the origin, radii in
/// light-seconds, all starting at phase zero.
pub fn concentric(radii: &[Seconds], periods: &[f64], c: f64) -> Result<LatencyGraph, TopoError> {
    if radii.len() != periods.len() {
        return Err(TopoError::InvalidOrbit("one period per radius required"));
    }
    let nodes = radii
        .iter()
        .zip(periods)
        .enumerate()
        .map(|(i, (&r, &p))| {
            let orbit = CircularOrbit::with_period(Point3::zeros(), r * c, p, 0.0, OrbitalPlane::xy())?;
            Ok(NodeSpec::new(format!("p{}", i + 1), MotionSpec::CircularOrbit(orbit)))
        })
        .collect::<Result<Vec<_>, TopoError>>()?;
    LatencyGraph::geometric_complete(nodes, c)
}

/// One planet in each of two systems whose centers are `alpha`
/// light-seconds apart.
pub fn separate_systems(
    r1: Seconds,
    alpha: Seconds,
    r2: Seconds,
    periods: (f64, f64),
    c: f64,
) -> Result<LatencyGraph, TopoError> {
    let first = CircularOrbit::with_period(Point3::zeros(), r1 * c, periods.0, 0.0, OrbitalPlane::xy())?;
    let second = CircularOrbit::with_period(
        Point3::new(alpha * c, 0.0, 0.0),
        r2 * c,
        periods.1,
        0.0,
        OrbitalPlane::xy(),
    )?;
    LatencyGraph::geometric_complete(
        vec![
            NodeSpec::new("p1", MotionSpec::CircularOrbit(first)),
            NodeSpec::new("p2", MotionSpec::CircularOrbit(second)),
        ],
        c,
    )
}
