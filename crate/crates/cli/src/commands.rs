use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use relaysim_core::planner::{bound_concentric, bound_diameter, bound_satellite, bound_separate, feasibility};
use relaysim_core::pow::decode_compact;
use relaysim_core::relkin::{boost, classify, gamma};
use relaysim_core::simcore::{dominance_stats, flood_arrivals, run, run_sweep};
use relaysim_core::topo::lattice_index;
use relaysim_core::{BlocktimeBound, CompactBits, SimReport, SpacetimeEvent, Velocity, SPEED_OF_LIGHT};

use crate::error::CliError;
use crate::output::{blocks_csv, dominance_table, transactions_csv, write_file, Table};
use crate::quantity::{Dimension, Quantity, Speed};
use crate::scenario_file::{Resolved, RuleInputs, ScenarioFile, SimOverrides};

const C: f64 = SPEED_OF_LIGHT;

/// JSON number, or a string for infinities and NaN.
fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else {
        Value::from(x.to_string())
    }
}

fn bare_or_quantity(text: &str, field: &str, dimension: Dimension) -> Result<f64, CliError> {
    if let Ok(x) = text.trim().parse::<f64>() {
        return Ok(x);
    }
    let q: Quantity = text.parse().map_err(|e| CliError::invalid(field, e))?;
    match dimension {
        Dimension::Time => q.as_seconds(),
        Dimension::Length => q.as_meters(C),
    }
    .map_err(|e| CliError::invalid(field, e))
}

/// Separation `(dt, dx)` seen from a frame moving at `v`.
pub fn causality(dt: &str, dx: &str, v: &str) -> Result<Vec<Table>, CliError> {
    let dt = bare_or_quantity(dt, "dt", Dimension::Time)?;
    let dx = bare_or_quantity(dx, "dx", Dimension::Length)?;
    if !dt.is_finite() || !dx.is_finite() {
        return Err(CliError::domain("dt/dx", "must be finite"));
    }
    let speed: Speed = v.parse().map_err(|e: String| CliError::invalid("v", e))?;
    let velocity = Velocity(speed.meters_per_second(C));
    let g = gamma(velocity, C)?;
    let moved = boost(SpacetimeEvent::new(dt, dx), velocity, C)?;
    let c = classify(dt, dx, C);

    let mut t = Table::key_value("causality");
    t.kv("dt_s", num(dt))
        .kv("dx_m", num(dx))
        .kv("v_m_per_s", num(velocity.0))
        .kv("gamma", num(g))
        .kv("dt_prime_s", num(moved.t))
        .kv("dx_prime_m", num(moved.x))
        .kv("v_info_m_per_s", num(c.v_info))
        .kv("class", c.class.to_string());
    Ok(vec![t])
}

/// Expands 8 hex digits of compact bits to the full target.
pub fn difficulty(bits: &str) -> Result<Vec<Table>, CliError> {
    let digits = bits.trim();
    let digits = digits.strip_prefix("0x").or_else(|| digits.strip_prefix("0X")).unwrap_or(digits);
    if digits.len() != 8 || !digits.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(CliError::invalid("bits", format!("`{bits}` is not 8 hex digits")));
    }
    let bits = CompactBits(u32::from_str_radix(digits, 16).expect("checked hex"));
    let target = decode_compact(bits)?;
    let mut t = Table::key_value("difficulty");
    t.kv("bits", format!("{:#010x}", bits.0))
        .kv("exponent", bits.exponent())
        .kv("coefficient", format!("{:#08x}", bits.coefficient()))
        .kv("target", target.to_string())
        .kv("target_hex", format!("{target:#x}"))
        .kv("target_approx", format!("{:.3e}", target.to_f64()));
    Ok(vec![t])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeCheck {
    /// Time a block from the first corner takes to reach the opposite one.
    pub corner_arrival: f64,
    /// Hop count between opposite corners times the spacing.
    pub shortest_path: f64,
    /// `alpha · l · w · h`, for comparison.
    pub alpha_lwh: f64,
}

/// What `plan` computes, also embedded in simulation summaries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanDocument {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub nodes: usize,
    pub rule: String,
    pub b_min: f64,
    pub rule_inputs: Vec<f64>,
    /// Half the largest sampled diameter, whatever the topology.
    pub diameter_b_min: f64,
    pub max_diameter: f64,
    pub governing_latency: f64,
    pub threshold: f64,
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blocktime: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blocktime_admitted: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeCheck>,
}

pub fn plan_document(r: &Resolved) -> Result<PlanDocument, CliError> {
    r.graph.check_connected()?;
    let diameter = bound_diameter(&r.graph, r.sampling)?;
    let bound: BlocktimeBound = match &r.rule {
        RuleInputs::Satellite { r1 } => bound_satellite(*r1)?,
        RuleInputs::Concentric { radii } => bound_concentric(radii)?,
        RuleInputs::SeparateSystems { r1, alpha, r2 } => bound_separate(*r1, *alpha, *r2)?,
        RuleInputs::Lattice { .. } | RuleInputs::Graph => diameter.clone(),
    };
    let verdict = feasibility(&r.graph, r.max_confirmation, r.sampling)?;
    let lattice = match r.rule {
        RuleInputs::Lattice { dims: [l, w, h], alpha } => {
            let arrivals = flood_arrivals(&r.graph, 0, 0.0)?;
            Some(LatticeCheck {
                corner_arrival: arrivals[lattice_index(l, w, l - 1, w - 1, h - 1)],
                shortest_path: alpha * f64::from(l + w + h - 3),
                alpha_lwh: alpha * f64::from(l) * f64::from(w) * f64::from(h),
            })
        }
        _ => None,
    };
    let blocktime = r.scenario.as_ref().map(|s| s.blocktime);
    Ok(PlanDocument {
        name: r.name.clone(),
        nodes: r.graph.len(),
        rule: bound.rule.to_string(),
        b_min: bound.b_min,
        rule_inputs: bound.inputs.clone(),
        diameter_b_min: diameter.b_min,
        max_diameter: diameter.inputs[0],
        governing_latency: verdict.governing_latency,
        threshold: verdict.threshold,
        verdict: verdict.verdict.to_string(),
        blocktime,
        blocktime_admitted: blocktime.map(|b| bound.admits(b)),
        lattice,
    })
}

fn plan_table(doc: &PlanDocument) -> Table {
    let mut t = Table::key_value("plan");
    if let Some(name) = &doc.name {
        t.kv("scenario", name.clone());
    }
    t.kv("nodes", doc.nodes)
        .kv("rule", doc.rule.clone())
        .kv("b_min_s", num(doc.b_min))
        .kv("diameter_b_min_s", num(doc.diameter_b_min))
        .kv("max_diameter_s", num(doc.max_diameter))
        .kv("governing_latency_s", num(doc.governing_latency))
        .kv("threshold_s", num(doc.threshold))
        .kv("verdict", doc.verdict.clone());
    if let (Some(b), Some(ok)) = (doc.blocktime, doc.blocktime_admitted) {
        t.kv("blocktime_s", num(b)).kv("blocktime_admitted", ok);
    }
    if let Some(l) = &doc.lattice {
        t.kv("corner_arrival_s", num(l.corner_arrival))
            .kv("shortest_path_s", num(l.shortest_path))
            .kv("alpha_lwh_s", num(l.alpha_lwh));
    }
    t
}

/// Blocktime bound and verdict; writes `plan.toml` into `output_dir`.
pub fn plan(file: &Path, overrides: SimOverrides, output_dir: &Path) -> Result<Vec<Table>, CliError> {
    let resolved = ScenarioFile::load(file)?.resolve_with(overrides)?;
    let doc = plan_document(&resolved)?;
    write_file(&output_dir.join("plan.toml"), toml::to_string(&doc).expect("plan serializes").as_bytes())?;
    Ok(vec![plan_table(&doc)])
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimulateOptions {
    pub overrides: SimOverrides,
    pub output_dir: PathBuf,
    /// Run this many consecutive seeds instead of one.
    pub seeds: Option<u64>,
    pub workers: Option<usize>,
}

#[derive(Serialize)]
struct NodeSummary<'a> {
    id: &'a str,
    mined: u64,
    main_chain: u64,
    stale: u64,
    reorgs: u64,
    main_chain_share: f64,
    stale_fraction: f64,
}

#[derive(Serialize)]
struct Summary<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<&'a str>,
    seed: u64,
    blocktime: f64,
    duration: f64,
    total_mined: u64,
    final_height: u64,
    orphan_rate: f64,
    fork_count: u64,
    confirmation: &'a relaysim_core::simcore::LatencySummary,
    propagation: &'a relaysim_core::simcore::PropagationSummary,
    planner: &'a PlanDocument,
    node: Vec<NodeSummary<'a>>,
}

fn summary_toml(name: Option<&str>, report: &SimReport, plan: &PlanDocument) -> String {
    let node = report
        .nodes
        .iter()
        .zip(dominance_stats(report))
        .map(|(n, d)| NodeSummary {
            id: &n.id,
            mined: n.mined,
            main_chain: n.main_chain,
            stale: n.stale,
            reorgs: n.reorgs,
            main_chain_share: d.main_chain_share,
            stale_fraction: d.stale_fraction,
        })
        .collect();
    let summary = Summary {
        name,
        seed: report.seed,
        blocktime: report.blocktime,
        duration: report.duration,
        total_mined: report.total_mined,
        final_height: report.final_height,
        orphan_rate: report.orphan_rate,
        fork_count: report.fork_count,
        confirmation: &report.confirmation,
        propagation: &report.propagation,
        planner: plan,
        node,
    };
    toml::to_string(&summary).expect("summary serializes")
}

fn write_run(dir: &Path, name: Option<&str>, report: &SimReport, plan: &PlanDocument) -> Result<(), CliError> {
    write_file(&dir.join("summary.toml"), summary_toml(name, report, plan).as_bytes())?;
    write_file(&dir.join("blocks.csv"), &blocks_csv(report))?;
    write_file(&dir.join("transactions.csv"), &transactions_csv(report))
}

fn run_table(report: &SimReport, plan: &PlanDocument) -> Table {
    let mut t = Table::key_value("simulation");
    t.kv("seed", report.seed)
        .kv("total_mined", report.total_mined)
        .kv("final_height", report.final_height)
        .kv("orphan_rate", num(report.orphan_rate))
        .kv("fork_count", report.fork_count)
        .kv("tx_confirmed", report.confirmation.confirmed)
        .kv("tx_unconfirmed", report.confirmation.unconfirmed)
        .kv("tx_mean_latency_s", report.confirmation.mean.map_or(Value::Null, num))
        .kv("b_min_s", num(plan.b_min))
        .kv("verdict", plan.verdict.clone());
    t
}

/// Runs the scenario and writes `summary.toml`, `blocks.csv` and
/// `transactions.csv`, one directory per seed for sweeps.
pub fn simulate(file: &Path, opts: &SimulateOptions) -> Result<Vec<Table>, CliError> {
    let resolved = ScenarioFile::load(file)?.resolve_with(opts.overrides)?;
    let scenario = resolved.scenario.clone().ok_or_else(|| {
        CliError::invalid("simulation", "missing; add a [simulation] stanza or pass --blocktime and --duration")
    })?;
    scenario.validate()?;
    let plan = plan_document(&resolved)?;
    let name = resolved.name.as_deref();

    let Some(count) = opts.seeds else {
        let report = run(&scenario)?;
        write_run(&opts.output_dir, name, &report, &plan)?;
        return Ok(vec![run_table(&report, &plan), dominance_table(&report)]);
    };

    if count == 0 {
        return Err(CliError::domain("--seeds", "must be at least 1"));
    }
    let seeds: Vec<u64> = (0..count).map(|k| scenario.seed.wrapping_add(k)).collect();
    let workers = opts
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let reports = run_sweep(&scenario, &seeds, workers)?;

    let mut table = Table::new("sweep", &["seed", "total_mined", "final_height", "orphan_rate", "fork_count"]);
    let mut sweep_csv = csv::Writer::from_writer(Vec::new());
    sweep_csv
        .write_record(["seed", "total_mined", "final_height", "orphan_rate", "fork_count"])
        .expect("in-memory write");
    for report in &reports {
        write_run(&opts.output_dir.join(format!("seed-{}", report.seed)), name, report, &plan)?;
        table.row(vec![
            report.seed.into(),
            report.total_mined.into(),
            report.final_height.into(),
            num(report.orphan_rate),
            report.fork_count.into(),
        ]);
        sweep_csv
            .write_record([
                report.seed.to_string(),
                report.total_mined.to_string(),
                report.final_height.to_string(),
                report.orphan_rate.to_string(),
                report.fork_count.to_string(),
            ])
            .expect("in-memory write");
    }
    write_file(&opts.output_dir.join("sweep.csv"), &sweep_csv.into_inner().expect("in-memory flush"))?;

    let mean_orphan = reports.iter().map(|r| r.orphan_rate).sum::<f64>() / reports.len() as f64;
    let mut summary = Table::key_value("sweep summary");
    summary
        .kv("runs", reports.len())
        .kv("mean_orphan_rate", num(mean_orphan))
        .kv("b_min_s", num(plan.b_min))
        .kv("verdict", plan.verdict.clone());
    Ok(vec![table, summary])
}
