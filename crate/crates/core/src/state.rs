//! Two-way partition state with incrementally maintained totals and cut.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Hypergraph;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionState {
    side: Vec<u8>,
    selected: Vec<u32>,
    /// `totals[s * R + r]`
    totals: Vec<i64>,
    resource_count: usize,
    cut: i64,
    /// Pins of each edge on side 0 and side 1.
    pin_counts: Vec<[u32; 2]>,
}

impl PartitionState {
    /// Builds the state from scratch. This is also the oracle for the
    /// incremental bookkeeping in [`PartitionState::apply_move`].
    pub fn recompute(graph: &Hypergraph, side: Vec<u8>, selected: Vec<u32>) -> Result<Self> {
        let n = graph.node_count();
        if side.len() != n {
            return Err(Error::StateLength { got: side.len(), expected: n });
        }
        if selected.len() != n {
            return Err(Error::StateLength { got: selected.len(), expected: n });
        }
        let r = graph.resource_count();
        let mut totals = vec![0i64; 2 * r];
        for v in 0..n {
            let s = side[v];
            if s > 1 {
                return Err(Error::InvalidSide { node: v, side: s });
            }
            let p = selected[v] as usize;
            if p >= graph.personality_count(v) {
                return Err(Error::PersonalityOutOfRange { node: v, personality: p });
            }
            if graph.is_locked(v) && p != 0 {
                return Err(Error::LockedPersonality { node: v });
            }
            let base = s as usize * r;
            for (t, &w) in totals[base..base + r].iter_mut().zip(graph.weights(v, p)) {
                *t += w;
            }
        }
        let mut pin_counts = vec![[0u32; 2]; graph.edge_count()];
        let mut cut = 0;
        for (e, pc) in pin_counts.iter_mut().enumerate() {
            for &p in graph.pins(e) {
                pc[side[p as usize] as usize] += 1;
            }
            if pc[0] > 0 && pc[1] > 0 {
                cut += graph.edge_weight(e);
            }
        }
        Ok(PartitionState {
            side,
            selected,
            totals,
            resource_count: r,
            cut,
            pin_counts,
        })
    }

    /// All nodes on side 0 with personality 0.
    pub fn all_on_one_side(graph: &Hypergraph) -> Self {
        let n = graph.node_count();
        Self::recompute(graph, vec![0; n], vec![0; n]).expect("default state is valid")
    }

    #[inline]
    pub fn side(&self, v: usize) -> u8 {
        self.side[v]
    }

    pub fn sides(&self) -> &[u8] {
        &self.side
    }

    #[inline]
    pub fn selected(&self, v: usize) -> usize {
        self.selected[v] as usize
    }

    pub fn selections(&self) -> &[u32] {
        &self.selected
    }

    #[inline]
    pub fn cut(&self) -> i64 {
        self.cut
    }

    #[inline]
    pub fn totals(&self, s: u8) -> &[i64] {
        let r = self.resource_count;
        &self.totals[s as usize * r..(s as usize + 1) * r]
    }

    #[inline]
    pub fn pin_counts(&self, e: usize) -> [u32; 2] {
        self.pin_counts[e]
    }

    pub fn resource_count(&self) -> usize {
        self.resource_count
    }

    /// Cut reduction if `v` moved to the other side (personality-independent).
    pub fn gain(&self, graph: &Hypergraph, v: usize) -> i64 {
        let from = self.side[v] as usize;
        let to = 1 - from;
        let mut g = 0;
        for &e in graph.incident_edges(v) {
            let c = self.pin_counts[e as usize];
            let w = graph.edge_weight(e as usize);
            if c[to] == 0 {
                g -= w;
            } else if c[from] == 1 {
                g += w;
            }
        }
        g
    }

    /// Moves `v` to `to_side` using `personality`; returns the realized gain
    /// (`cut_before - cut_after`).
    pub fn apply_move(
        &mut self,
        graph: &Hypergraph,
        v: usize,
        to_side: u8,
        personality: usize,
    ) -> Result<i64> {
        if to_side > 1 {
            return Err(Error::InvalidSide { node: v, side: to_side });
        }
        let from = self.side[v];
        if from == to_side {
            return Err(Error::AlreadyOnSide { node: v, side: to_side });
        }
        self.check_personality(graph, v, personality)?;
        let r = self.resource_count;
        let old = graph.weights(v, self.selected[v] as usize);
        let new = graph.weights(v, personality);
        let (fb, tb) = (from as usize * r, to_side as usize * r);
        for i in 0..r {
            self.totals[fb + i] -= old[i];
            self.totals[tb + i] += new[i];
        }
        let before = self.cut;
        let (f, t) = (from as usize, to_side as usize);
        for &e in graph.incident_edges(v) {
            let c = &mut self.pin_counts[e as usize];
            let w = graph.edge_weight(e as usize);
            let was_cut = c[0] > 0 && c[1] > 0;
            c[f] -= 1;
            c[t] += 1;
            let is_cut = c[0] > 0 && c[1] > 0;
            if was_cut && !is_cut {
                self.cut -= w;
            } else if !was_cut && is_cut {
                self.cut += w;
            }
        }
        self.side[v] = to_side;
        self.selected[v] = personality as u32;
        Ok(before - self.cut)
    }

    /// Changes the personality of `v` without moving it.
    pub fn set_personality(&mut self, graph: &Hypergraph, v: usize, personality: usize) -> Result<()> {
        self.check_personality(graph, v, personality)?;
        let r = self.resource_count;
        let base = self.side[v] as usize * r;
        let old = graph.weights(v, self.selected[v] as usize);
        let new = graph.weights(v, personality);
        for i in 0..r {
            self.totals[base + i] += new[i] - old[i];
        }
        self.selected[v] = personality as u32;
        Ok(())
    }

    fn check_personality(&self, graph: &Hypergraph, v: usize, p: usize) -> Result<()> {
        if p >= graph.personality_count(v) {
            return Err(Error::PersonalityOutOfRange { node: v, personality: p });
        }
        if graph.is_locked(v) && p != 0 {
            return Err(Error::LockedPersonality { node: v });
        }
        Ok(())
    }
}
