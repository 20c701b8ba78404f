//! Multi-personality hypergraph model.
//!
//! Every node carries one or more *personalities*, alternative implementations
//! each described by a weight vector over `R` resource classes. The graph is
//! immutable once built and stores nodes, personalities and pins in flat
//! CSR-style arrays.

use std::collections::HashSet;
use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on `R`; scoring code keeps per-resource scratch on the stack.
pub const MAX_RESOURCES: usize = 16;

/// Non-negative integer weights, one entry per resource class.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResourceVector(pub Vec<i64>);

impl ResourceVector {
    pub fn zeros(r: usize) -> Self {
        ResourceVector(vec![0; r])
    }

    pub fn total(&self) -> i64 {
        self.0.iter().sum()
    }

    pub fn add_assign(&mut self, other: &[i64]) {
        for (a, b) in self.0.iter_mut().zip(other) {
            *a += *b;
        }
    }
}

impl From<Vec<i64>> for ResourceVector {
    fn from(v: Vec<i64>) -> Self {
        ResourceVector(v)
    }
}

impl Deref for ResourceVector {
    type Target = [i64];
    fn deref(&self) -> &[i64] {
        &self.0
    }
}

impl DerefMut for ResourceVector {
    fn deref_mut(&mut self) -> &mut [i64] {
        &mut self.0
    }
}

/// One implementation choice of a node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Personality<'a> {
    pub id: usize,
    pub weights: &'a [i64],
}

/// Input description of a node.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub personalities: Vec<ResourceVector>,
    /// A locked node always uses personality 0.
    pub locked: bool,
}

impl Node {
    pub fn new(personalities: Vec<Vec<i64>>) -> Self {
        Node {
            personalities: personalities.into_iter().map(ResourceVector).collect(),
            locked: false,
        }
    }

    pub fn locked(personalities: Vec<Vec<i64>>) -> Self {
        Node {
            locked: true,
            ..Node::new(personalities)
        }
    }
}

/// Input description of a hyperedge (net).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hyperedge {
    pub weight: i64,
    pub pins: Vec<usize>,
}

impl Hyperedge {
    pub fn new(weight: i64, pins: Vec<usize>) -> Self {
        Hyperedge { weight, pins }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypergraph {
    resource_count: usize,
    pers_start: Vec<u32>,
    pers_weights: Vec<i64>,
    locked: Vec<bool>,
    edge_weight: Vec<i64>,
    pin_start: Vec<u32>,
    pins: Vec<u32>,
    inc_start: Vec<u32>,
    incidence: Vec<u32>,
    capable: Vec<bool>,
}

impl Hypergraph {
    /// Validates the input and builds incidence lists.
    pub fn build(resource_count: usize, nodes: Vec<Node>, edges: Vec<Hyperedge>) -> Result<Self> {
        if resource_count == 0 || resource_count > MAX_RESOURCES {
            return Err(Error::ResourceCount {
                got: resource_count,
                max: MAX_RESOURCES,
            });
        }
        let n = nodes.len();
        let mut pers_start = Vec::with_capacity(n + 1);
        let mut pers_weights = Vec::new();
        let mut locked = Vec::with_capacity(n);
        pers_start.push(0u32);
        let mut seen: HashSet<&[i64]> = HashSet::new();
        for (v, node) in nodes.iter().enumerate() {
            if node.personalities.is_empty() {
                return Err(Error::EmptyPersonalities { node: v });
            }
            seen.clear();
            for (p, w) in node.personalities.iter().enumerate() {
                if w.len() != resource_count {
                    return Err(Error::ResourceMismatch {
                        node: v,
                        personality: p,
                        got: w.len(),
                        expected: resource_count,
                    });
                }
                if w.iter().any(|&x| x < 0) {
                    return Err(Error::NegativeWeight { node: v, personality: p });
                }
                if w.iter().all(|&x| x == 0) {
                    return Err(Error::ZeroWeightPersonality { node: v, personality: p });
                }
                if !seen.insert(&w.0) {
                    return Err(Error::DuplicatePersonality { node: v, personality: p });
                }
                pers_weights.extend_from_slice(w);
            }
            pers_start.push((pers_weights.len() / resource_count) as u32);
            locked.push(node.locked);
        }

        let mut edge_weight = Vec::with_capacity(edges.len());
        let mut pin_start = Vec::with_capacity(edges.len() + 1);
        let mut pins = Vec::new();
        let mut degree = vec![0u32; n];
        pin_start.push(0u32);
        let mut mark = vec![usize::MAX; n];
        for (e, edge) in edges.iter().enumerate() {
            if edge.weight <= 0 {
                return Err(Error::NonPositiveEdgeWeight { edge: e });
            }
            if edge.pins.len() < 2 {
                return Err(Error::TooFewPins { edge: e });
            }
            for &p in &edge.pins {
                if p >= n {
                    return Err(Error::PinOutOfRange { edge: e, pin: p });
                }
                if mark[p] == e {
                    return Err(Error::DuplicatePin { edge: e, pin: p });
                }
                mark[p] = e;
                degree[p] += 1;
                pins.push(p as u32);
            }
            edge_weight.push(edge.weight);
            pin_start.push(pins.len() as u32);
        }

        let mut inc_start = Vec::with_capacity(n + 1);
        inc_start.push(0u32);
        for d in &degree {
            let last = *inc_start.last().unwrap();
            inc_start.push(last + d);
        }
        let mut fill: Vec<u32> = inc_start[..n].to_vec();
        let mut incidence = vec![0u32; pins.len()];
        for e in 0..edge_weight.len() {
            for &p in &pins[pin_start[e] as usize..pin_start[e + 1] as usize] {
                incidence[fill[p as usize] as usize] = e as u32;
                fill[p as usize] += 1;
            }
        }

        let mut capable = vec![false; resource_count];
        for chunk in pers_weights.chunks(resource_count) {
            for (c, &w) in capable.iter_mut().zip(chunk) {
                *c |= w > 0;
            }
        }

        Ok(Hypergraph {
            resource_count,
            pers_start,
            pers_weights,
            locked,
            edge_weight,
            pin_start,
            pins,
            inc_start,
            incidence,
            capable,
        })
    }

    #[inline]
    pub fn resource_count(&self) -> usize {
        self.resource_count
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.locked.len()
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edge_weight.len()
    }

    pub fn pin_count(&self) -> usize {
        self.pins.len()
    }

    #[inline]
    pub fn is_locked(&self, v: usize) -> bool {
        self.locked[v]
    }

    #[inline]
    pub fn personality_count(&self, v: usize) -> usize {
        (self.pers_start[v + 1] - self.pers_start[v]) as usize
    }

    /// Weight vector of personality `p` of node `v`.
    #[inline]
    pub fn weights(&self, v: usize, p: usize) -> &[i64] {
        let r = self.resource_count;
        let i = (self.pers_start[v] as usize + p) * r;
        &self.pers_weights[i..i + r]
    }

    pub fn personalities(&self, v: usize) -> impl Iterator<Item = Personality<'_>> + '_ {
        (0..self.personality_count(v)).map(move |p| Personality {
            id: p,
            weights: self.weights(v, p),
        })
    }

    /// Personalities a remap or move may pick for `v`: only 0 when locked.
    #[inline]
    pub fn selectable_count(&self, v: usize) -> usize {
        if self.locked[v] {
            1
        } else {
            self.personality_count(v)
        }
    }

    #[inline]
    pub fn edge_weight(&self, e: usize) -> i64 {
        self.edge_weight[e]
    }

    #[inline]
    pub fn pins(&self, e: usize) -> &[u32] {
        &self.pins[self.pin_start[e] as usize..self.pin_start[e + 1] as usize]
    }

    #[inline]
    pub fn incident_edges(&self, v: usize) -> &[u32] {
        &self.incidence[self.inc_start[v] as usize..self.inc_start[v + 1] as usize]
    }

    pub fn weighted_degree(&self, v: usize) -> i64 {
        self.incident_edges(v)
            .iter()
            .map(|&e| self.edge_weight[e as usize])
            .sum()
    }

    /// Resources that at least one personality of some node uses.
    pub fn capable_resources(&self) -> &[bool] {
        &self.capable
    }

    /// Number of personality combinations, `prod |P_v|`, as a float since
    /// it overflows integers quickly.
    pub fn combination_count(&self) -> f64 {
        (0..self.node_count())
            .map(|v| self.personality_count(v) as f64)
            .product()
    }

    /// Rebuilds the input description (used by the file writer and tests).
    pub fn to_parts(&self) -> (Vec<Node>, Vec<Hyperedge>) {
        let nodes = (0..self.node_count())
            .map(|v| Node {
                personalities: self
                    .personalities(v)
                    .map(|p| ResourceVector(p.weights.to_vec()))
                    .collect(),
                locked: self.locked[v],
            })
            .collect();
        let edges = (0..self.edge_count())
            .map(|e| Hyperedge {
                weight: self.edge_weight[e],
                pins: self.pins(e).iter().map(|&p| p as usize).collect(),
            })
            .collect();
        (nodes, edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(r: usize, i: usize, w: i64) -> Vec<i64> {
        let mut v = vec![0; r];
        v[i] = w;
        v
    }

    #[test]
    fn minimal_graph() {
        let g = Hypergraph::build(
            1,
            vec![Node::new(vec![vec![1]]), Node::new(vec![vec![1]])],
            vec![Hyperedge::new(1, vec![0, 1])],
        )
        .unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.combination_count(), 1.0);
        assert_eq!(g.incident_edges(0), &[0]);
        assert_eq!(g.incident_edges(1), &[0]);
    }

    #[test]
    fn duplicate_personality_rejected() {
        let err = Hypergraph::build(
            2,
            vec![Node::new(vec![vec![3, 0], vec![3, 0]]), Node::new(vec![vec![1, 0]])],
            vec![],
        )
        .unwrap_err();
        assert_eq!(err, Error::DuplicatePersonality { node: 0, personality: 1 });
        assert!(err.to_string().contains("duplicate personality"));
    }

    #[test]
    fn combination_count_is_product() {
        let nodes = vec![
            Node::new(vec![unit(3, 0, 1), unit(3, 1, 1)]),
            Node::new(vec![unit(3, 0, 2), unit(3, 2, 1)]),
            Node::new(vec![unit(3, 0, 1)]),
            Node::new(vec![unit(3, 0, 1), unit(3, 1, 1), unit(3, 2, 1)]),
        ];
        let g = Hypergraph::build(3, nodes, vec![Hyperedge::new(1, vec![0, 3])]).unwrap();
        assert_eq!(g.combination_count(), 12.0);
    }

    #[test]
    fn validation_errors() {
        let one = || Node::new(vec![vec![1]]);
        assert_eq!(
            Hypergraph::build(1, vec![one(), one()], vec![Hyperedge::new(1, vec![0, 0])]),
            Err(Error::DuplicatePin { edge: 0, pin: 0 })
        );
        assert_eq!(
            Hypergraph::build(1, vec![one(), one()], vec![Hyperedge::new(1, vec![0, 2])]),
            Err(Error::PinOutOfRange { edge: 0, pin: 2 })
        );
        assert_eq!(
            Hypergraph::build(1, vec![Node::new(vec![])], vec![]),
            Err(Error::EmptyPersonalities { node: 0 })
        );
        assert_eq!(
            Hypergraph::build(2, vec![Node::new(vec![vec![0, 0]])], vec![]),
            Err(Error::ZeroWeightPersonality { node: 0, personality: 0 })
        );
        assert_eq!(
            Hypergraph::build(2, vec![Node::new(vec![vec![1]])], vec![]),
            Err(Error::ResourceMismatch {
                node: 0,
                personality: 0,
                got: 1,
                expected: 2
            })
        );
        assert!(matches!(
            Hypergraph::build(1, vec![one(), one()], vec![Hyperedge::new(1, vec![0])]),
            Err(Error::TooFewPins { .. })
        ));
    }

    #[test]
    fn incidence_is_transpose_of_pins() {
        let nodes = (0..5).map(|_| Node::new(vec![vec![1]])).collect();
        let edges = vec![
            Hyperedge::new(1, vec![0, 1, 2]),
            Hyperedge::new(2, vec![2, 3]),
            Hyperedge::new(3, vec![4, 0]),
        ];
        let g = Hypergraph::build(1, nodes, edges).unwrap();
        for v in 0..g.node_count() {
            for &e in g.incident_edges(v) {
                assert!(g.pins(e as usize).contains(&(v as u32)));
            }
        }
        let total: usize = (0..5).map(|v| g.incident_edges(v).len()).sum();
        assert_eq!(total, g.pin_count());
    }
}
