//! Blocktime lower bounds and the single-currency feasibility verdict.
//!
//! Radii and separations are light-travel times in seconds. Each bound is
//! half the largest light-time separation the geometry can reach, and a
//! blocktime must exceed it strictly.

use serde::Serialize;
use thiserror::Error;

use crate::simcore::worst_case_confirmation_at;
use crate::topo::{diameter, LatencyGraph, TopoError};
use crate::Seconds;

/// Epochs sampled when maximising a time-varying diameter.
pub const DEFAULT_SAMPLES: usize = 1024;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("{0} must be finite and nonnegative, got {1}")]
    Negative(&'static str, f64),
    #[error("concentric bound needs at least two radii, got {0}")]
    TooFewRadii(usize),
    #[error("maximum confirmation time must be positive, got {0}")]
    InvalidThreshold(f64),
    #[error("sampling window must be positive with at least one sample")]
    InvalidWindow,
    #[error(transparent)]
    Graph(#[from] TopoError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundRule {
    Satellite,
    Concentric,
    SeparateSystems,
    Diameter,
}

impl std::fmt::Display for BoundRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BoundRule::Satellite => "satellite",
            BoundRule::Concentric => "concentric",
            BoundRule::SeparateSystems => "separate-systems",
            BoundRule::Diameter => "diameter",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlocktimeBound {
    /// Strict lower bound on the blocktime, seconds.
    pub b_min: Seconds,
    pub rule: BoundRule,
    /// The inputs the bound was computed from, in argument order.
    pub inputs: Vec<f64>,
}

impl BlocktimeBound {
    /// Whether `blocktime` satisfies `blocktime > b_min`.
    pub fn admits(&self, blocktime: Seconds) -> bool {
        blocktime > self.b_min
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    SingleCurrency,
    SeparateCurrencies,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::SingleCurrency => "single-currency",
            Verdict::SeparateCurrencies => "separate-currencies",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityVerdict {
    pub verdict: Verdict,
    /// Worst-case confirmation time of the network.
    pub governing_latency: Seconds,
    pub threshold: Seconds,
}

/// Meters to light-travel seconds.
pub fn light_seconds(meters: f64, c: f64) -> Seconds {
    meters / c
}

fn nonnegative(name: &'static str, x: f64) -> Result<f64, PlanError> {
    if x >= 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(PlanError::Negative(name, x))
    }
}

/// Satellite at light-time `r1` from its planet: `b > r1/2`.
pub fn bound_satellite(r1: Seconds) -> Result<BlocktimeBound, PlanError> {
    nonnegative("r1", r1)?;
    Ok(BlocktimeBound { b_min: r1 / 2.0, rule: BoundRule::Satellite, inputs: vec![r1] })
}

/// Planets on concentric orbits: `b > (r_min + r_max)/2`.
pub fn bound_concentric(radii: &[Seconds]) -> Result<BlocktimeBound, PlanError> {
    if radii.len() < 2 {
        return Err(PlanError::TooFewRadii(radii.len()));
    }
    for &r in radii {
        nonnegative("radius", r)?;
    }
    let min = radii.iter().copied().fold(f64::INFINITY, f64::min);
    let max = radii.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(BlocktimeBound { b_min: (min + max) / 2.0, rule: BoundRule::Concentric, inputs: radii.to_vec() })
}

/// Planets in two systems whose centers are `alpha` apart:
/// `b > (r1 + alpha + r2)/2`.
pub fn bound_separate(r1: Seconds, alpha: Seconds, r2: Seconds) -> Result<BlocktimeBound, PlanError> {
    nonnegative("r1", r1)?;
    nonnegative("alpha", alpha)?;
    nonnegative("r2", r2)?;
    Ok(BlocktimeBound {
        b_min: (r1 + alpha + r2) / 2.0,
        rule: BoundRule::SeparateSystems,
        inputs: vec![r1, alpha, r2],
    })
}

/// Where to look for the largest diameter of a moving graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sampling {
    /// [`DEFAULT_SAMPLES`] epochs over the least common orbital period.
    Auto,
    /// `samples` evenly spaced epochs in `[start, start + window)`.
    Window { start: Seconds, window: Seconds, samples: usize },
}

impl Sampling {
    /// Sample times for `g`. Static graphs need only `t = 0`.
    pub fn epochs(&self, g: &LatencyGraph) -> Result<Vec<Seconds>, PlanError> {
        let (start, window, samples) = match *self {
            Sampling::Window { start, window, samples } => {
                if !(window > 0.0 && window.is_finite() && start.is_finite()) || samples == 0 {
                    return Err(PlanError::InvalidWindow);
                }
                (start, window, samples)
            }
            Sampling::Auto => {
                if !g.is_time_varying() {
                    return Ok(vec![0.0]);
                }
                (0.0, least_common_period(&g.orbital_periods()), DEFAULT_SAMPLES)
            }
        };
        Ok((0..samples).map(|k| start + window * k as f64 / samples as f64).collect())
    }
}

/// Smallest common multiple of the periods when their ratios are rational
/// with denominators up to 1000; otherwise the largest pairwise synodic
/// period, which covers every relative phase of two coplanar orbits.
pub fn least_common_period(periods: &[f64]) -> f64 {
    let Some(&first) = periods.first() else {
        return 0.0;
    };
    let lcm = periods.iter().skip(1).try_fold(first, |acc, &p| {
        // acc/p = num/den  =>  den·acc = num·p is a common multiple
        let (_, den) = rational_ratio(acc / p, 1000)?;
        Some(acc * den as f64)
    });
    if let Some(lcm) = lcm {
        return lcm;
    }
    let mut longest = periods.iter().copied().fold(0.0, f64::max);
    for (i, &a) in periods.iter().enumerate() {
        for &b in &periods[i + 1..] {
            if (a - b).abs() > 0.0 {
                longest = longest.max(a * b / (a - b).abs());
            }
        }
    }
    longest
}

/// Continued-fraction approximation `x ≈ num/den` with `den <= max_den`,
/// accepted only within 1e-9 relative error.
fn rational_ratio(x: f64, max_den: u64) -> Option<(u64, u64)> {
    let (mut h0, mut h1) = (0u64, 1u64);
    let (mut k0, mut k1) = (1u64, 0u64);
    let mut rest = x;
    for _ in 0..64 {
        let a = rest.floor();
        let a_int = a as u64;
        let h2 = a_int.checked_mul(h1)?.checked_add(h0)?;
        let k2 = a_int.checked_mul(k1)?.checked_add(k0)?;
        if k2 > max_den {
            return None;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if ((h1 as f64 / k1 as f64) / x - 1.0).abs() < 1e-9 {
            return Some((h1, k1));
        }
        let frac = rest - a;
        if frac <= 0.0 {
            return None;
        }
        rest = 1.0 / frac;
    }
    None
}

fn max_diameter(g: &LatencyGraph, sampling: Sampling) -> Result<Seconds, PlanError> {
    let mut worst: f64 = 0.0;
    for t in sampling.epochs(g)? {
        worst = worst.max(diameter(g, t)?);
    }
    Ok(worst)
}

/// Half the largest diameter found over the sampled epochs.
pub fn bound_diameter(g: &LatencyGraph, sampling: Sampling) -> Result<BlocktimeBound, PlanError> {
    let d = max_diameter(g, sampling)?;
    Ok(BlocktimeBound { b_min: d / 2.0, rule: BoundRule::Diameter, inputs: vec![d] })
}

/// Separate currencies are recommended when the worst-case confirmation
/// time exceeds `max_confirmation`.
pub fn feasibility(
    g: &LatencyGraph,
    max_confirmation: Seconds,
    sampling: Sampling,
) -> Result<FeasibilityVerdict, PlanError> {
    if max_confirmation.is_nan() || max_confirmation <= 0.0 {
        return Err(PlanError::InvalidThreshold(max_confirmation));
    }
    let mut governing: f64 = 0.0;
    for t in sampling.epochs(g)? {
        governing = governing.max(worst_case_confirmation_at(g, t)?);
    }
    let verdict = if governing > max_confirmation {
        Verdict::SeparateCurrencies
    } else {
        Verdict::SingleCurrency
    };
    Ok(FeasibilityVerdict { verdict, governing_latency: governing, threshold: max_confirmation })
}
