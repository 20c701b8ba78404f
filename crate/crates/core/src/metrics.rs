//! Cost measures: weighted cut, RMS imbalance, RMS utilization-ratio
//! deviation, and feasibility against per-resource margins.
//!
//! The slice-level helpers (`*_of`) operate on raw partition totals so that
//! move and remap evaluation can score hypothetical states without building
//! them.

use serde::{Deserialize, Serialize};

use crate::constraints::ConstraintSet;
use crate::error::{Error, Result};
use crate::graph::Hypergraph;
use crate::state::PartitionState;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub cut: i64,
    pub imbalance_score: f64,
    pub rur_score_per_partition: [f64; 2],
    pub rur_deviation: f64,
    pub feasible: bool,
    /// `|delta_r| / T_r`, zero for resources with no weight.
    pub per_resource_imbalance: Vec<f64>,
    pub violating_resources: Vec<usize>,
}

/// Weighted cut by a direct scan of every edge's pins.
pub fn cut_size(graph: &Hypergraph, state: &PartitionState) -> i64 {
    (0..graph.edge_count())
        .filter(|&e| {
            let pins = graph.pins(e);
            let first = state.side(pins[0] as usize);
            pins.iter().any(|&p| state.side(p as usize) != first)
        })
        .map(|e| graph.edge_weight(e))
        .sum()
}

/// RMS of per-resource fractional imbalance; `None` if every total is zero.
pub fn imbalance_of(t0: &[i64], t1: &[i64]) -> Option<f64> {
    let mut sum = 0.0;
    let mut used = 0usize;
    for (&a, &b) in t0.iter().zip(t1) {
        let t = a + b;
        if t == 0 {
            continue;
        }
        let f = (a - b).abs() as f64 / t as f64;
        sum += f * f;
        used += 1;
    }
    (used > 0).then(|| (sum / used as f64).sqrt())
}

pub fn imbalance_score(graph: &Hypergraph, state: &PartitionState) -> Result<f64> {
    let _ = graph;
    imbalance_of(state.totals(0), state.totals(1)).ok_or(Error::WeightlessGraph)
}

/// Accumulates squared relative deviations of one partition's normalized
/// utilization from its mean. Returns `(sum_sq, count)`; an empty
/// partition contributes nothing.
#[inline]
fn rur_terms(totals: &[i64], constraints: &ConstraintSet, used: &[bool]) -> (f64, usize) {
    let mut norm = [0.0f64; crate::graph::MAX_RESOURCES];
    let mut count = 0usize;
    let mut mean = 0.0;
    for r in 0..totals.len() {
        if !used[r] {
            continue;
        }
        let n = totals[r] as f64 / constraints.capacities[r] / constraints.target_rur[r];
        norm[r] = n;
        mean += n;
        count += 1;
    }
    if count == 0 {
        return (0.0, 0);
    }
    mean /= count as f64;
    if mean <= 0.0 {
        return (0.0, 0);
    }
    let mut sum = 0.0;
    for r in 0..totals.len() {
        if used[r] {
            let d = (norm[r] - mean) / mean;
            sum += d * d;
        }
    }
    (sum, count)
}

/// RMS relative deviation of normalized utilization over the resources in
/// `used`.
pub fn rur_score_masked(totals: &[i64], constraints: &ConstraintSet, used: &[bool]) -> f64 {
    let (sum, count) = rur_terms(totals, constraints, used);
    if count == 0 {
        0.0
    } else {
        (sum / count as f64).sqrt()
    }
}

/// Utilization-ratio score of one partition, treating every resource as used.
pub fn rur_score(totals: &[i64], constraints: &ConstraintSet) -> f64 {
    let used = [true; crate::graph::MAX_RESOURCES];
    rur_score_masked(totals, constraints, &used[..totals.len()])
}

/// RMS deviation aggregated over both partitions' used resources.
pub fn rur_pair_of(t0: &[i64], t1: &[i64], constraints: &ConstraintSet, used: &[bool]) -> f64 {
    let (s0, c0) = rur_terms(t0, constraints, used);
    let (s1, c1) = rur_terms(t1, constraints, used);
    if c0 + c1 == 0 {
        0.0
    } else {
        ((s0 + s1) / (c0 + c1) as f64).sqrt()
    }
}

/// Utilization-ratio deviation of a state. Resources count as used when any
/// personality in the graph can consume them, so a resource left idle by the
/// current mapping still registers as under-utilized.
pub fn rur_deviation(graph: &Hypergraph, state: &PartitionState, constraints: &ConstraintSet) -> f64 {
    rur_pair_of(
        state.totals(0),
        state.totals(1),
        constraints,
        graph.capable_resources(),
    )
}

/// Sum over resources of the fractional imbalance in excess of its margin.
/// Zero exactly when the totals satisfy every margin.
#[inline]
pub fn violation_of(t0: &[i64], t1: &[i64], margins: &[f64]) -> f64 {
    let mut v = 0.0;
    for r in 0..t0.len() {
        let t = t0[r] + t1[r];
        if t == 0 {
            continue;
        }
        let d = (t0[r] - t1[r]).abs() as f64;
        let allowed = margins[r] * t as f64;
        if d > allowed {
            v += (d - allowed) / t as f64;
        }
    }
    v
}

pub fn check_feasible(
    graph: &Hypergraph,
    state: &PartitionState,
    constraints: &ConstraintSet,
    effective_margins: &[f64],
) -> ScoreReport {
    let (t0, t1) = (state.totals(0), state.totals(1));
    let mut per_resource = Vec::with_capacity(t0.len());
    let mut violating = Vec::new();
    for r in 0..t0.len() {
        let t = t0[r] + t1[r];
        let d = (t0[r] - t1[r]).abs();
        let f = if t == 0 { 0.0 } else { d as f64 / t as f64 };
        per_resource.push(f);
        if t > 0 && d as f64 > effective_margins[r] * t as f64 {
            violating.push(r);
        }
    }
    let used = graph.capable_resources();
    ScoreReport {
        cut: state.cut(),
        imbalance_score: imbalance_of(t0, t1).unwrap_or(0.0),
        rur_score_per_partition: [
            rur_score_masked(t0, constraints, used),
            rur_score_masked(t1, constraints, used),
        ],
        rur_deviation: rur_pair_of(t0, t1, constraints, used),
        feasible: violating.is_empty(),
        per_resource_imbalance: per_resource,
        violating_resources: violating,
    }
}
