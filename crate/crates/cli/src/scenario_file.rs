//! TOML scenario files.
//!
//! A file names one topology and optionally a simulation, a transaction
//! workload, censorship policies and planner settings:
//!
//! ```toml
//! name = "earth-mars"
//!
//! [topology]
//! kind = "explicit-graph"
//! edges = [{ a = "earth", b = "mars", delay = "7.533 min" }]
//!
//! [[nodes]]
//! id = "earth"
//! hashpower = 0.9
//!
//! [[nodes]]
//! id = "mars"
//! hashpower = 0.1
//!
//! [simulation]
//! blocktime = "10 min"
//! duration = "30 d"
//! seed = 1
//! ```
//!
//! Every dimensioned value carries a unit (see [`Quantity`]). Unknown keys
//! are rejected.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use relaysim_core::planner::{least_common_period, DEFAULT_SAMPLES};
use relaysim_core::topo::{
    build_lattice, concentric, kepler_period, satellite, separate_systems, CircularOrbit, OrbitalPlane,
    Point3, GM_EARTH, GM_SUN,
};
use relaysim_core::{
    LatencyGraph, MiningModel, MotionSpec, NodeSpec, Sampling, Scenario, Seconds, TxSpec, SPEED_OF_LIGHT,
};

use crate::error::CliError;
use crate::quantity::{Quantity, Speed};

const C: f64 = SPEED_OF_LIGHT;

/// Threshold for the feasibility verdict when neither the planner stanza
/// nor a blocktime gives one.
pub const DEFAULT_MAX_CONFIRMATION: Seconds = 3600.0;
/// Confirmations a user is assumed to wait for when only a blocktime is known.
pub const DEFAULT_CONFIRMATIONS: f64 = 6.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub topology: Topology,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub nodes: Vec<NodeEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationStanza>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub workload: Vec<WorkloadEntry>,
    /// Node id to the regions it refuses to include.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub censorship: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planner: Option<PlannerStanza>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Topology {
    ExplicitGraph(ExplicitGraph),
    Satellite(SatelliteTopology),
    Concentric(ConcentricTopology),
    SeparateSystems(SeparateTopology),
    Lattice(LatticeTopology),
}

/// Nodes come from `[[nodes]]`. With `geometric = true` delays follow node
/// positions and an empty edge list means every pair is linked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitGraph {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edges: Vec<EdgeEntry>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub geometric: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub a: String,
    pub b: String,
    /// A duration, or a distance converted at light speed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay: Option<Quantity>,
}

/// Nodes `planet` (static, at the origin) and `satellite`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SatelliteTopology {
    pub r1: Quantity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<Quantity>,
}

/// Nodes `p1..pn` about a common center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConcentricTopology {
    pub radii: Vec<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periods: Option<Vec<Quantity>>,
}

/// Nodes `p1` and `p2`, one per system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparateTopology {
    pub r1: Quantity,
    pub alpha: Quantity,
    pub r2: Quantity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periods: Option<[Quantity; 2]>,
}

/// Nodes `n{i}_{j}_{k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeTopology {
    pub dims: [u32; 3],
    pub alpha: Quantity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeEntry {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hashpower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity: Option<Speed>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<[Quantity; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orbit: Option<OrbitEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<[Quantity; 3]>,
    pub radius: Quantity,
    /// Defaults to the Keplerian period about the Sun.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<Quantity>,
    /// Radians.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<f64>,
    /// Radians, tilting the plane about the x axis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inclination: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationStanza {
    pub blocktime: Quantity,
    pub duration: Quantity,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mining: Option<MiningKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub difficulty_bits: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MiningKind {
    Poisson,
    HashGrind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkloadEntry {
    pub created: Quantity,
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannerStanza {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_confirmation: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<Quantity>,
}

/// Command-line values that replace those in `[simulation]`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SimOverrides {
    pub seed: Option<u64>,
    pub duration: Option<Seconds>,
    pub blocktime: Option<Seconds>,
}

/// Which closed-form rule the topology admits, with its inputs in light-seconds.
#[derive(Debug, Clone, PartialEq)]
pub enum RuleInputs {
    Satellite { r1: Seconds },
    Concentric { radii: Vec<Seconds> },
    SeparateSystems { r1: Seconds, alpha: Seconds, r2: Seconds },
    Lattice { dims: [u32; 3], alpha: Seconds },
    Graph,
}

/// A scenario file turned into core types.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub name: Option<String>,
    pub graph: LatencyGraph,
    pub rule: RuleInputs,
    /// Present when a blocktime and duration are known.
    pub scenario: Option<Scenario>,
    pub max_confirmation: Seconds,
    pub sampling: Sampling,
}

impl ScenarioFile {
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse { path: origin.to_string(), message: e.to_string() })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario files always serialize")
    }

    pub fn resolve(&self) -> Result<Resolved, CliError> {
        self.resolve_with(SimOverrides::default())
    }

    pub fn resolve_with(&self, overrides: SimOverrides) -> Result<Resolved, CliError> {
        let (graph, rule) = self.build_graph()?;
        let ids: BTreeMap<&str, usize> =
            graph.nodes().iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect();
        let lookup = |field: String, id: &str| {
            ids.get(id).copied().ok_or_else(|| CliError::invalid(field, format!("unknown node `{id}`")))
        };

        let mut velocities = vec![0.0; graph.len()];
        for (k, entry) in self.nodes.iter().enumerate() {
            if let Some(v) = &entry.velocity {
                velocities[lookup(format!("nodes[{k}].id"), &entry.id)?] = v.meters_per_second(C);
            }
        }

        let mut workload = Vec::with_capacity(self.workload.len());
        for (k, tx) in self.workload.iter().enumerate() {
            workload.push(TxSpec {
                created: seconds(&tx.created, &format!("workload[{k}].created"))?,
                origin: lookup(format!("workload[{k}].from"), &tx.from)?,
                destination: lookup(format!("workload[{k}].to"), &tx.to)?,
            });
        }

        let mut censorship = Vec::new();
        for (node, regions) in &self.censorship {
            let index = lookup(format!("censorship.{node}"), node)?;
            if censorship.is_empty() {
                censorship = vec![BTreeSet::new(); graph.len()];
            }
            censorship[index].extend(regions.iter().cloned());
        }

        let sim = self.simulation.as_ref();
        let blocktime = match (overrides.blocktime, sim) {
            (Some(b), _) => Some(b),
            (None, Some(s)) => Some(seconds(&s.blocktime, "simulation.blocktime")?),
            (None, None) => None,
        };
        let duration = match (overrides.duration, sim) {
            (Some(d), _) => Some(d),
            (None, Some(s)) => Some(seconds(&s.duration, "simulation.duration")?),
            (None, None) => None,
        };
        let mining = match sim.and_then(|s| s.mining) {
            None | Some(MiningKind::Poisson) => {
                if sim.and_then(|s| s.difficulty_bits).is_some() {
                    return Err(CliError::invalid(
                        "simulation.difficulty_bits",
                        "only meaningful with mining = \"hash-grind\"",
                    ));
                }
                MiningModel::Poisson
            }
            Some(MiningKind::HashGrind) => MiningModel::HashGrind {
                difficulty_bits: sim.and_then(|s| s.difficulty_bits).ok_or_else(|| {
                    CliError::invalid("simulation.difficulty_bits", "required with mining = \"hash-grind\"")
                })?,
            },
        };

        let scenario = match (blocktime, duration) {
            (Some(blocktime), Some(duration)) => {
                let seed = overrides.seed.or(sim.map(|s| s.seed)).unwrap_or(0);
                let mut s = Scenario::new(graph.clone(), blocktime, duration, seed)
                    .with_velocities(velocities)
                    .with_mining(mining);
                s.tx_workload = workload;
                s.censorship = censorship;
                Some(s)
            }
            _ => None,
        };

        let planner = self.planner.as_ref();
        let max_confirmation = match planner.and_then(|p| p.max_confirmation.as_ref()) {
            Some(q) => seconds(q, "planner.max_confirmation")?,
            None => blocktime.map_or(DEFAULT_MAX_CONFIRMATION, |b| DEFAULT_CONFIRMATIONS * b),
        };
        let sampling = match planner {
            Some(p) if graph.is_time_varying() && (p.samples.is_some() || p.window.is_some()) => {
                let window = match &p.window {
                    Some(q) => seconds(q, "planner.window")?,
                    None => least_common_period(&graph.orbital_periods()),
                };
                Sampling::Window { start: 0.0, window, samples: p.samples.unwrap_or(DEFAULT_SAMPLES) }
            }
            _ => Sampling::Auto,
        };

        Ok(Resolved { name: self.name.clone(), graph, rule, scenario, max_confirmation, sampling })
    }

    fn build_graph(&self) -> Result<(LatencyGraph, RuleInputs), CliError> {
        match &self.topology {
            Topology::ExplicitGraph(t) => Ok((self.explicit_graph(t)?, RuleInputs::Graph)),
            Topology::Satellite(t) => {
                let r1 = light_time(&t.r1, "topology.r1")?;
                let period = period_or_kepler(t.period.as_ref(), r1, GM_EARTH, "topology.period")?;
                let g = satellite(r1, period, C)?;
                Ok((self.apply_overrides(g)?, RuleInputs::Satellite { r1 }))
            }
            Topology::Concentric(t) => {
                let radii = t
                    .radii
                    .iter()
                    .enumerate()
                    .map(|(k, r)| light_time(r, &format!("topology.radii[{k}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                let periods = match &t.periods {
                    Some(ps) if ps.len() != radii.len() => {
                        return Err(CliError::invalid(
                            "topology.periods",
                            format!("{} periods for {} radii", ps.len(), radii.len()),
                        ))
                    }
                    Some(ps) => ps
                        .iter()
                        .enumerate()
                        .map(|(k, p)| period_or_kepler(Some(p), 0.0, GM_SUN, &format!("topology.periods[{k}]")))
                        .collect::<Result<Vec<_>, _>>()?,
                    None => radii
                        .iter()
                        .map(|&r| period_or_kepler(None, r, GM_SUN, "topology.periods"))
                        .collect::<Result<Vec<_>, _>>()?,
                };
                let g = concentric(&radii, &periods, C)?;
                Ok((self.apply_overrides(g)?, RuleInputs::Concentric { radii }))
            }
            Topology::SeparateSystems(t) => {
                let r1 = light_time(&t.r1, "topology.r1")?;
                let alpha = light_time(&t.alpha, "topology.alpha")?;
                let r2 = light_time(&t.r2, "topology.r2")?;
                let (p1, p2) = match &t.periods {
                    Some([a, b]) => (
                        period_or_kepler(Some(a), r1, GM_SUN, "topology.periods[0]")?,
                        period_or_kepler(Some(b), r2, GM_SUN, "topology.periods[1]")?,
                    ),
                    None => (
                        period_or_kepler(None, r1, GM_SUN, "topology.periods")?,
                        period_or_kepler(None, r2, GM_SUN, "topology.periods")?,
                    ),
                };
                let g = separate_systems(r1, alpha, r2, (p1, p2), C)?;
                Ok((self.apply_overrides(g)?, RuleInputs::SeparateSystems { r1, alpha, r2 }))
            }
            Topology::Lattice(t) => {
                let alpha = light_time(&t.alpha, "topology.alpha")?;
                let [l, w, h] = t.dims;
                let g = build_lattice(l, w, h, alpha)?;
                Ok((self.apply_overrides(g)?, RuleInputs::Lattice { dims: t.dims, alpha }))
            }
        }
    }

    fn explicit_graph(&self, t: &ExplicitGraph) -> Result<LatencyGraph, CliError> {
        if self.nodes.is_empty() {
            return Err(CliError::invalid("nodes", "explicit-graph topologies need at least one [[nodes]] entry"));
        }
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for (k, entry) in self.nodes.iter().enumerate() {
            let field = format!("nodes[{k}]");
            let motion = match (&entry.position, &entry.orbit) {
                (Some(_), Some(_)) => {
                    return Err(CliError::invalid(field, "give either position or orbit, not both"));
                }
                (Some(p), None) => MotionSpec::StaticPoint(point(p, &format!("{field}.position"))?),
                (None, Some(o)) => MotionSpec::CircularOrbit(orbit(o, &format!("{field}.orbit"))?),
                (None, None) => MotionSpec::at_origin(),
            };
            nodes.push(node_spec(entry, motion));
        }
        let index = |field: String, id: &str| {
            nodes
                .iter()
                .position(|n| n.id == id)
                .ok_or_else(|| CliError::invalid(field, format!("unknown node `{id}`")))
        };
        if t.geometric {
            if t.edges.is_empty() {
                return Ok(LatencyGraph::geometric_complete(nodes, C)?);
            }
            let mut pairs = Vec::with_capacity(t.edges.len());
            for (k, e) in t.edges.iter().enumerate() {
                if e.delay.is_some() {
                    return Err(CliError::invalid(
                        format!("topology.edges[{k}].delay"),
                        "geometric edges take their delay from node positions",
                    ));
                }
                pairs.push((index(format!("topology.edges[{k}].a"), &e.a)?, index(format!("topology.edges[{k}].b"), &e.b)?));
            }
            return Ok(LatencyGraph::geometric(nodes, pairs, C)?);
        }
        let mut edges = Vec::with_capacity(t.edges.len());
        for (k, e) in t.edges.iter().enumerate() {
            let field = format!("topology.edges[{k}]");
            let delay = e
                .delay
                .as_ref()
                .ok_or_else(|| CliError::invalid(format!("{field}.delay"), "required unless geometric = true"))?;
            edges.push((
                index(format!("{field}.a"), &e.a)?,
                index(format!("{field}.b"), &e.b)?,
                light_time(delay, &format!("{field}.delay"))?,
            ));
        }
        Ok(LatencyGraph::explicit(nodes, edges)?)
    }

    /// Applies `[[nodes]]` hashpower and region to the nodes of a generated
    /// topology, whose motion is fixed by the topology itself.
    fn apply_overrides(&self, g: LatencyGraph) -> Result<LatencyGraph, CliError> {
        let mut entries: BTreeMap<&str, &NodeEntry> = BTreeMap::new();
        for (k, entry) in self.nodes.iter().enumerate() {
            let field = format!("nodes[{k}]");
            if g.index_of(&entry.id).is_none() {
                return Err(CliError::invalid(
                    format!("{field}.id"),
                    format!("`{}` is not a node of this topology", entry.id),
                ));
            }
            if entry.position.is_some() || entry.orbit.is_some() {
                return Err(CliError::invalid(field, "node motion is fixed by the topology"));
            }
            if entries.insert(entry.id.as_str(), entry).is_some() {
                return Err(CliError::invalid(field, format!("node `{}` listed twice", entry.id)));
            }
        }
        Ok(g.map_nodes(|n| {
            if let Some(entry) = entries.get(n.id.as_str()) {
                *n = node_spec(entry, n.motion);
            }
        })?)
    }
}

fn node_spec(entry: &NodeEntry, motion: MotionSpec) -> NodeSpec {
    let mut n = NodeSpec::new(entry.id.clone(), motion);
    if let Some(h) = entry.hashpower {
        n.hashpower = h;
    }
    if let Some(r) = &entry.region {
        n.region = r.clone();
    }
    n
}

fn seconds(q: &Quantity, field: &str) -> Result<Seconds, CliError> {
    let s = q.as_seconds().map_err(|e| CliError::invalid(field, e))?;
    Ok(s)
}

fn light_time(q: &Quantity, field: &str) -> Result<Seconds, CliError> {
    let t = q.as_light_time(C);
    if t.is_nan() || t < 0.0 {
        return Err(CliError::domain(field, format!("must be nonnegative, got {q}")));
    }
    Ok(t)
}

fn meters(q: &Quantity, field: &str) -> Result<f64, CliError> {
    q.as_meters(C).map_err(|e| CliError::invalid(field, e))
}

fn point(p: &[Quantity; 3], field: &str) -> Result<Point3, CliError> {
    Ok(Point3::new(
        meters(&p[0], &format!("{field}[0]"))?,
        meters(&p[1], &format!("{field}[1]"))?,
        meters(&p[2], &format!("{field}[2]"))?,
    ))
}

/// An explicit period, or the circular Keplerian one at `radius` light-seconds.
/// A body at the center never moves, so any positive period serves.
fn period_or_kepler(period: Option<&Quantity>, radius: Seconds, gm: f64, field: &str) -> Result<f64, CliError> {
    match period {
        Some(q) => {
            let p = seconds(q, field)?;
            if p.is_nan() || p <= 0.0 {
                return Err(CliError::domain(field, format!("period must be positive, got {q}")));
            }
            Ok(p)
        }
        None if radius > 0.0 => Ok(kepler_period(radius * C, gm)),
        None => Ok(1.0),
    }
}

fn orbit(o: &OrbitEntry, field: &str) -> Result<CircularOrbit, CliError> {
    let center = match &o.center {
        Some(c) => point(c, &format!("{field}.center"))?,
        None => Point3::zeros(),
    };
    let radius = meters(&o.radius, &format!("{field}.radius"))?;
    let period = period_or_kepler(o.period.as_ref(), radius / C, GM_SUN, &format!("{field}.period"))?;
    let plane = match o.inclination {
        Some(i) => OrbitalPlane::inclined(i),
        None => OrbitalPlane::xy(),
    };
    CircularOrbit::with_period(center, radius, period, o.phase.unwrap_or(0.0), plane)
        .map_err(|e| CliError::domain(field, e))
}
