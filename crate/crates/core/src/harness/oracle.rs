//! Exhaustive reference solver for tiny instances.

use crate::constraints::ConstraintSet;
use crate::error::{Error, Result};
use crate::graph::Hypergraph;
use crate::metrics::{rur_pair_of, violation_of};
use crate::state::PartitionState;

/// Refuse graphs with more than this many (side, personality) assignments.
pub const ORACLE_LIMIT: f64 = 1e7;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleSolution {
    pub cut: i64,
    pub rur_deviation: f64,
    pub state: PartitionState,
}

/// Minimum cut over every bisection and personality combination that meets
/// `constraints.margins`. Node 0 stays on side 0 (label symmetry). Ties go
/// to the lower ratio deviation, then the lexicographically first
/// assignment. `Ok(None)` when nothing is feasible.
pub fn oracle_partition(graph: &Hypergraph, constraints: &ConstraintSet) -> Result<Option<OracleSolution>> {
    let n = graph.node_count();
    let combos = graph.combination_count() * 2f64.powi(n.saturating_sub(1) as i32);
    if combos > ORACLE_LIMIT {
        return Err(Error::TooLargeForOracle { combinations: combos, limit: ORACLE_LIMIT });
    }
    if n == 0 {
        return Ok(None);
    }
    let r = graph.resource_count();
    let used = graph.capable_resources();
    let choices: Vec<usize> = (0..n).map(|v| graph.selectable_count(v)).collect();
    let mut best: Option<(i64, f64, Vec<u8>, Vec<u32>)> = None;
    let mut side = vec![0u8; n];
    for mask in 0u64..1 << (n - 1) {
        // node 1 is the most significant bit so masks run in lexicographic order
        for v in 1..n {
            side[v] = ((mask >> (n - 1 - v)) & 1) as u8;
        }
        let cut: i64 = (0..graph.edge_count())
            .filter(|&e| {
                let pins = graph.pins(e);
                let s0 = side[pins[0] as usize];
                pins.iter().any(|&p| side[p as usize] != s0)
            })
            .map(|e| graph.edge_weight(e))
            .sum();
        if best.as_ref().is_some_and(|b| cut > b.0) {
            continue;
        }
        let mut sel = vec![0usize; n];
        loop {
            let mut t = vec![0i64; 2 * r];
            for v in 0..n {
                let base = side[v] as usize * r;
                for (x, w) in t[base..base + r].iter_mut().zip(graph.weights(v, sel[v])) {
                    *x += *w;
                }
            }
            let (t0, t1) = t.split_at(r);
            if violation_of(t0, t1, &constraints.margins) == 0.0 {
                let dev = rur_pair_of(t0, t1, constraints, used);
                let better = match &best {
                    None => true,
                    Some(b) => cut < b.0 || (cut == b.0 && dev < b.1),
                };
                if better {
                    best = Some((cut, dev, side.clone(), sel.iter().map(|&p| p as u32).collect()));
                }
            }
            // odometer, last node fastest
            let mut v = n;
            let done = loop {
                if v == 0 {
                    break true;
                }
                v -= 1;
                sel[v] += 1;
                if sel[v] < choices[v] {
                    break false;
                }
                sel[v] = 0;
            };
            if done {
                break;
            }
        }
    }
    Ok(best.map(|(cut, rur_deviation, side, sel)| OracleSolution {
        cut,
        rur_deviation,
        state: PartitionState::recompute(graph, side, sel).expect("enumerated assignment is valid"),
    }))
}
