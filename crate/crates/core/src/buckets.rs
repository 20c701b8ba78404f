//! Gain buckets with personality-aware move selection.
//!
//! [`GainBuckets`] is the classic FM structure: an array of LIFO lists
//! indexed by gain with a max-gain cursor. [`MoveBuckets`] layers the three
//! selection schemes on top of it:
//!
//! * multi-personality: highest-gain node that has a legal personality,
//! * resource-affinity: per-resource, per-side queues scanned in order of
//!   the worst resource,
//! * hybrid: both, keeping the better candidate.

use serde::{Deserialize, Serialize};

use crate::graph::Hypergraph;
use crate::metrics::violation_of;
use crate::objective::{scratch, Policy, Scorer};
use crate::state::PartitionState;

const NIL: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BucketKind {
    MultiPersonality,
    ResourceAffinity,
    Hybrid,
}

#[derive(Clone, Debug)]
pub struct GainBuckets {
    offset: i64,
    heads: Vec<u32>,
    next: Vec<u32>,
    prev: Vec<u32>,
    present: Vec<bool>,
    top: usize,
    len: usize,
}

impl GainBuckets {
    /// Buckets for node ids `< n` and gains in `[-max_gain, max_gain]`.
    pub fn new(n: usize, max_gain: i64) -> Self {
        GainBuckets {
            offset: max_gain,
            heads: vec![NIL; (2 * max_gain + 1) as usize],
            next: vec![NIL; n],
            prev: vec![NIL; n],
            present: vec![false; n],
            top: 0,
            len: 0,
        }
    }

    #[inline]
    fn index(&self, gain: i64) -> usize {
        debug_assert!(gain.abs() <= self.offset, "gain {gain} out of range");
        (gain + self.offset) as usize
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn contains(&self, v: usize) -> bool {
        self.present[v]
    }

    /// Pushes `v` at the head of its gain list (LIFO).
    pub fn insert(&mut self, v: usize, gain: i64) {
        debug_assert!(!self.present[v]);
        let b = self.index(gain);
        let h = self.heads[b];
        self.next[v] = h;
        self.prev[v] = NIL;
        if h != NIL {
            self.prev[h as usize] = v as u32;
        }
        self.heads[b] = v as u32;
        self.present[v] = true;
        self.len += 1;
        if b > self.top {
            self.top = b;
        }
    }

    pub fn remove(&mut self, v: usize, gain: i64) {
        debug_assert!(self.present[v]);
        let (p, n) = (self.prev[v], self.next[v]);
        if p != NIL {
            self.next[p as usize] = n;
        } else {
            let b = self.index(gain);
            self.heads[b] = n;
        }
        if n != NIL {
            self.prev[n as usize] = p;
        }
        self.present[v] = false;
        self.len -= 1;
    }

    /// Moves the cursor down to the highest non-empty bucket.
    fn settle(&mut self) {
        while self.top > 0 && self.heads[self.top] == NIL {
            self.top -= 1;
        }
    }

    /// Nodes from highest to lowest gain, most recently inserted first
    /// within a gain.
    pub fn iter_desc(&mut self) -> impl Iterator<Item = usize> + '_ {
        self.settle();
        let this = &*self;
        let mut b = this.top as isize;
        let mut cur = if this.len == 0 { NIL } else { this.heads[this.top] };
        std::iter::from_fn(move || {
            if this.len == 0 {
                return None;
            }
            while cur == NIL {
                b -= 1;
                if b < 0 {
                    return None;
                }
                cur = this.heads[b as usize];
            }
            let v = cur;
            cur = this.next[v as usize];
            Some(v as usize)
        })
    }
}

/// A selected move.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MoveChoice {
    pub node: usize,
    pub to_side: u8,
    pub personality: usize,
    pub gain: i64,
    pub imbalance_score_after: f64,
    pub rur_score_after: f64,
    /// Policy score of the chosen personality.
    pub score_after: f64,
}

/// Everything move evaluation reads.
#[derive(Clone, Copy)]
pub struct SelectContext<'a> {
    pub graph: &'a Hypergraph,
    pub scorer: Scorer<'a>,
    pub policy: Policy,
    pub margins: &'a [f64],
    /// When false, a node keeps its current personality when it moves.
    pub dynamic: bool,
}

impl SelectContext<'_> {
    /// Best legal personality for moving `v`, or `None` if every option
    /// breaks the margins. In an infeasible state a move is also legal if it
    /// strictly reduces the total violation.
    pub fn evaluate(&self, state: &PartitionState, v: usize, gain: i64, viol_before: f64) -> Option<MoveChoice> {
        let g = self.graph;
        let r = g.resource_count();
        let from = state.side(v);
        let to = 1 - from;
        let cur = state.selected(v);
        let mut t_from = scratch(state.totals(from));
        let base_to = scratch(state.totals(to));
        for (t, w) in t_from[..r].iter_mut().zip(g.weights(v, cur)) {
            *t -= *w;
        }
        let candidates: &mut dyn Iterator<Item = usize> = if self.dynamic {
            &mut (0..g.selectable_count(v))
        } else {
            &mut std::iter::once(cur)
        };
        let mut best: Option<(f64, usize)> = None;
        for p in candidates {
            let mut t_to = base_to;
            for (t, w) in t_to[..r].iter_mut().zip(g.weights(v, p)) {
                *t += *w;
            }
            let (t0, t1) = order(from, &t_from[..r], &t_to[..r]);
            let after = violation_of(t0, t1, self.margins);
            let legal = after == 0.0 || (viol_before > 0.0 && after < viol_before);
            if !legal {
                continue;
            }
            let s = self.scorer.score(self.policy, t0, t1);
            if best.is_none_or(|(bs, _)| s < bs) {
                best = Some((s, p));
            }
        }
        let (score, p) = best?;
        let mut t_to = base_to;
        for (t, w) in t_to[..r].iter_mut().zip(g.weights(v, p)) {
            *t += *w;
        }
        let (t0, t1) = order(from, &t_from[..r], &t_to[..r]);
        Some(MoveChoice {
            node: v,
            to_side: to,
            personality: p,
            gain,
            imbalance_score_after: self.scorer.imbalance(t0, t1),
            rur_score_after: self.scorer.rur(t0, t1),
            score_after: score,
        })
    }
}

#[inline]
fn order<'a>(from: u8, t_from: &'a [i64], t_to: &'a [i64]) -> (&'a [i64], &'a [i64]) {
    if from == 0 {
        (t_from, t_to)
    } else {
        (t_to, t_from)
    }
}

/// Per-pass move structures.
#[derive(Clone, Debug)]
pub struct MoveBuckets {
    kind: BucketKind,
    gains: Vec<i64>,
    frozen: Vec<bool>,
    all: GainBuckets,
    /// Resource-affinity queues, indexed `r * 2 + side`.
    queues: Vec<GainBuckets>,
    membership: Vec<u16>,
    resource_count: usize,
}

impl MoveBuckets {
    /// Computes every node's gain and fills the structures. Queue membership
    /// is fixed for the pass: a node joins queue `r` when one of its
    /// candidate personalities has its largest capacity share in `r`.
    pub fn new(graph: &Hypergraph, state: &PartitionState, kind: BucketKind, capacities: &[f64], dynamic: bool) -> Self {
        let n = graph.node_count();
        let r = graph.resource_count();
        let max_gain = (0..n).map(|v| graph.weighted_degree(v)).max().unwrap_or(0);
        let mut all = GainBuckets::new(n, max_gain);
        let gains: Vec<i64> = (0..n).map(|v| state.gain(graph, v)).collect();
        let mut queues = Vec::new();
        let mut membership = vec![0u16; n];
        if kind != BucketKind::MultiPersonality {
            queues = (0..2 * r).map(|_| GainBuckets::new(n, max_gain)).collect();
            for (v, m) in membership.iter_mut().enumerate() {
                let mut add = |p: usize| {
                    let w = graph.weights(v, p);
                    let share = |i: usize| w[i] as f64 / capacities[i];
                    let best = (0..r).map(share).fold(0.0f64, f64::max);
                    for i in 0..r {
                        if w[i] > 0 && share(i) == best {
                            *m |= 1 << i;
                        }
                    }
                };
                if dynamic {
                    (0..graph.selectable_count(v)).for_each(&mut add);
                } else {
                    add(state.selected(v));
                }
            }
        }
        for v in 0..n {
            all.insert(v, gains[v]);
            let s = state.side(v) as usize;
            for q in queue_ids(membership[v], r) {
                queues[q * 2 + s].insert(v, gains[v]);
            }
        }
        MoveBuckets {
            kind,
            gains,
            frozen: vec![false; n],
            all,
            queues,
            membership,
            resource_count: r,
        }
    }

    pub fn kind(&self) -> BucketKind {
        self.kind
    }

    #[inline]
    pub fn gain(&self, v: usize) -> i64 {
        self.gains[v]
    }

    #[inline]
    pub fn is_frozen(&self, v: usize) -> bool {
        self.frozen[v]
    }

    pub fn in_queue(&self, v: usize, r: usize) -> bool {
        self.membership[v] & (1 << r) != 0
    }

    pub fn select(&mut self, state: &PartitionState, ctx: &SelectContext<'_>) -> Option<MoveChoice> {
        match self.kind {
            BucketKind::MultiPersonality => self.mp_select(state, ctx),
            BucketKind::ResourceAffinity => self.ra_select(state, ctx),
            BucketKind::Hybrid => self.hybrid_select(state, ctx),
        }
    }

    /// Tournament selection: scan from the highest gain; the first node with
    /// a legal personality wins.
    pub fn mp_select(&mut self, state: &PartitionState, ctx: &SelectContext<'_>) -> Option<MoveChoice> {
        let before = violation_of(state.totals(0), state.totals(1), ctx.margins);
        let gains = &self.gains;
        self.all
            .iter_desc()
            .find_map(|v| ctx.evaluate(state, v, gains[v], before))
    }

    /// Resources ordered by how badly they miss the policy's goal, each
    /// paired with the side a node should leave to help.
    pub fn resource_targets(state: &PartitionState, ctx: &SelectContext<'_>) -> Vec<(usize, u8)> {
        let (t0, t1) = (state.totals(0), state.totals(1));
        let r = t0.len();
        let cons = ctx.scorer.constraints;
        let used = ctx.scorer.used;

        let imb: Vec<(f64, u8)> = (0..r)
            .map(|i| {
                let t = t0[i] + t1[i];
                if t == 0 {
                    (0.0, 0)
                } else {
                    ((t0[i] - t1[i]).abs() as f64 / t as f64, if t0[i] >= t1[i] { 0 } else { 1 })
                }
            })
            .collect();
        let mut rur = vec![(0.0f64, 0u8); r];
        for s in 0..2u8 {
            let t = if s == 0 { t0 } else { t1 };
            let norm: Vec<f64> = (0..r)
                .map(|i| t[i] as f64 / cons.capacities[i] / cons.target_rur[i])
                .collect();
            let count = used.iter().filter(|&&u| u).count();
            if count == 0 {
                continue;
            }
            let mean = (0..r).filter(|&i| used[i]).map(|i| norm[i]).sum::<f64>() / count as f64;
            if mean <= 0.0 {
                continue;
            }
            for i in (0..r).filter(|&i| used[i]) {
                let d = (norm[i] - mean) / mean;
                if d.abs() > rur[i].0 {
                    // over-utilized on s: move out of s; under-utilized: move into s
                    rur[i] = (d.abs(), if d > 0.0 { s } else { 1 - s });
                }
            }
        }
        let mut targets: Vec<(f64, usize, u8)> = (0..r)
            .map(|i| match ctx.policy {
                Policy::Imbalance => (imb[i].0, i, imb[i].1),
                Policy::Rur => (rur[i].0, i, rur[i].1),
                Policy::Weighted(a) => {
                    let (x, y) = (a * imb[i].0, (1.0 - a) * rur[i].0);
                    (x + y, i, if x >= y { imb[i].1 } else { rur[i].1 })
                }
            })
            .filter(|t| t.0 > 0.0)
            .collect();
        targets.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        targets.into_iter().map(|(_, i, s)| (i, s)).collect()
    }

    /// Pulls from the queue of the worst resource on the side whose move
    /// reduces its excess, falling back to the next-worst resource and
    /// finally to the highest-gain node overall.
    pub fn ra_select(&mut self, state: &PartitionState, ctx: &SelectContext<'_>) -> Option<MoveChoice> {
        let before = violation_of(state.totals(0), state.totals(1), ctx.margins);
        if !self.queues.is_empty() {
            for (r, side) in Self::resource_targets(state, ctx) {
                let gains = &self.gains;
                let found = self.queues[r * 2 + side as usize]
                    .iter_desc()
                    .find_map(|v| ctx.evaluate(state, v, gains[v], before));
                if found.is_some() {
                    return found;
                }
            }
        }
        let gains = &self.gains;
        self.all
            .iter_desc()
            .find_map(|v| ctx.evaluate(state, v, gains[v], before))
    }

    /// Better of the two candidates: higher gain, then lower policy score.
    pub fn hybrid_select(&mut self, state: &PartitionState, ctx: &SelectContext<'_>) -> Option<MoveChoice> {
        let mp = self.mp_select(state, ctx);
        let ra = self.ra_select(state, ctx);
        match (mp, ra) {
            (None, x) | (x, None) => x,
            (Some(a), Some(b)) => {
                if b.gain > a.gain || (b.gain == a.gain && b.score_after < a.score_after) {
                    Some(b)
                } else {
                    Some(a)
                }
            }
        }
    }

    /// Applies `choice` to `state`, freezes the moved node and updates the
    /// gains of nodes sharing a net with it. Returns the realized gain.
    pub fn apply(&mut self, graph: &Hypergraph, state: &mut PartitionState, choice: &MoveChoice) -> i64 {
        let v = choice.node;
        let from = state.side(v);
        let realized = state
            .apply_move(graph, v, choice.to_side, choice.personality)
            .expect("selected move is legal");
        debug_assert_eq!(realized, self.gains[v]);
        self.freeze(v, from);
        self.gains[v] = -realized;

        let (f, t) = (from as usize, choice.to_side as usize);
        for &e in graph.incident_edges(v) {
            let e = e as usize;
            let c = state.pin_counts(e);
            let fb = c[f] + 1;
            let tb = c[t] - 1;
            if !(fb <= 2 || tb <= 1) {
                continue;
            }
            let w = graph.edge_weight(e);
            let d_from = w * ((fb == 2) as i64 + (tb == 0) as i64);
            let d_to = w * ((tb == 0 && fb >= 2) as i64 - (fb == 1) as i64 - (tb == 1) as i64);
            for &u in graph.pins(e) {
                let u = u as usize;
                if u == v {
                    continue;
                }
                let d = if state.side(u) as usize == f { d_from } else { d_to };
                if d != 0 {
                    self.shift(u, state.side(u), d);
                }
            }
        }
        realized
    }

    fn freeze(&mut self, v: usize, side: u8) {
        if self.frozen[v] {
            return;
        }
        self.frozen[v] = true;
        let g = self.gains[v];
        self.all.remove(v, g);
        for q in queue_ids(self.membership[v], self.resource_count) {
            self.queues[q * 2 + side as usize].remove(v, g);
        }
    }

    fn shift(&mut self, u: usize, side: u8, delta: i64) {
        let old = self.gains[u];
        let new = old + delta;
        self.gains[u] = new;
        if self.frozen[u] {
            return;
        }
        self.all.remove(u, old);
        self.all.insert(u, new);
        for q in queue_ids(self.membership[u], self.resource_count) {
            let b = &mut self.queues[q * 2 + side as usize];
            b.remove(u, old);
            b.insert(u, new);
        }
    }
}

fn queue_ids(mask: u16, r: usize) -> impl Iterator<Item = usize> {
    (0..r).filter(move |&i| mask & (1 << i) != 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::ConstraintSet;
    use crate::graph::{Hyperedge, Node};
    use crate::test_util::random_graph;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ctx<'a>(g: &'a Hypergraph, c: &'a ConstraintSet, m: &'a [f64], policy: Policy) -> SelectContext<'a> {
        SelectContext {
            graph: g,
            scorer: Scorer::new(c, g.capable_resources()),
            policy,
            margins: m,
            dynamic: true,
        }
    }

    #[test]
    fn gain_buckets_lifo_and_order() {
        let mut b = GainBuckets::new(5, 3);
        b.insert(0, 1);
        b.insert(1, 3);
        b.insert(2, 1);
        b.insert(3, -3);
        assert_eq!(b.iter_desc().collect::<Vec<_>>(), vec![1, 2, 0, 3]);
        b.remove(2, 1);
        b.remove(1, 3);
        assert_eq!(b.iter_desc().collect::<Vec<_>>(), vec![0, 3]);
        assert_eq!(b.len(), 2);
    }

    #[test]
    fn single_node_move() {
        let g = Hypergraph::build(
            1,
            vec![Node::new(vec![vec![1]]), Node::new(vec![vec![1]])],
            vec![Hyperedge::new(1, vec![0, 1])],
        )
        .unwrap();
        let c = ConstraintSet::uniform(1, 1.0);
        let m = [1.0];
        let s = PartitionState::recompute(&g, vec![0, 0], vec![0, 0]).unwrap();
        let mut b = MoveBuckets::new(&g, &s, BucketKind::MultiPersonality, &c.capacities, true);
        let choice = b.mp_select(&s, &ctx(&g, &c, &m, Policy::Imbalance)).unwrap();
        assert_eq!(choice.to_side, 1);
        assert_eq!(choice.gain, -1);
    }

    #[test]
    fn tournament_skips_infeasible_high_gain_node() {
        // A (node 0) has gain 5 but both personalities break the margin;
        // B (node 3) has gain 3 and moves legally.
        let nodes = vec![
            Node::new(vec![vec![10], vec![8]]),
            Node::new(vec![vec![10]]),
            Node::new(vec![vec![1]]),
            Node::new(vec![vec![1]]),
        ];
        let edges = vec![Hyperedge::new(5, vec![0, 1]), Hyperedge::new(3, vec![3, 2])];
        let g = Hypergraph::build(1, nodes, edges).unwrap();
        let s = PartitionState::recompute(&g, vec![0, 1, 1, 0], vec![0; 4]).unwrap();
        let c = ConstraintSet::uniform(1, 0.1);
        let m = [0.1];
        let mut b = MoveBuckets::new(&g, &s, BucketKind::MultiPersonality, &c.capacities, true);
        assert_eq!(b.gain(0), 5);
        assert_eq!(b.gain(3), 3);
        let choice = b.mp_select(&s, &ctx(&g, &c, &m, Policy::Imbalance)).unwrap();
        assert_eq!(choice.node, 3);
        assert_eq!(choice.gain, 3);
    }

    #[test]
    fn personality_chosen_by_imbalance_score() {
        let nodes = vec![
            Node::new(vec![vec![6, 0], vec![0, 3]]),
            Node::new(vec![vec![4, 0]]),
            Node::new(vec![vec![4, 0]]),
            Node::new(vec![vec![0, 6]]),
            Node::new(vec![vec![0, 3]]),
        ];
        let g = Hypergraph::build(2, nodes, vec![Hyperedge::new(1, vec![0, 2, 4])]).unwrap();
        let s = PartitionState::recompute(&g, vec![0, 0, 1, 0, 1], vec![0; 5]).unwrap();
        let c = ConstraintSet::uniform(2, 1.0);
        let m = [1.0, 1.0];
        let cx = ctx(&g, &c, &m, Policy::Imbalance);
        let mut b = MoveBuckets::new(&g, &s, BucketKind::MultiPersonality, &c.capacities, true);
        let choice = b.mp_select(&s, &cx).unwrap();
        assert_eq!(choice.node, 0);
        let score = |p: usize| {
            let mut t = s.clone();
            t.apply_move(&g, 0, 1, p).unwrap();
            crate::metrics::imbalance_of(t.totals(0), t.totals(1)).unwrap()
        };
        let (s0, s1) = (score(0), score(1));
        assert!(s1 < s0, "{s1} vs {s0}");
        assert_eq!(choice.personality, 1);
        assert!((choice.imbalance_score_after - s1).abs() < 1e-12);
    }

    #[test]
    fn ra_prefers_worst_resource_queue() {
        // resource 1 heavy on side 0; node 1 is DSP-dominant on side 0 with low gain
        let nodes = vec![
            Node::new(vec![vec![10, 0]]),
            Node::new(vec![vec![1, 4]]),
            Node::new(vec![vec![10, 0]]),
            Node::new(vec![vec![1, 0]]),
            Node::new(vec![vec![0, 2]]),
        ];
        let edges = vec![Hyperedge::new(4, vec![3, 2]), Hyperedge::new(1, vec![1, 0])];
        let g = Hypergraph::build(2, nodes, edges).unwrap();
        let s = PartitionState::recompute(&g, vec![0, 0, 1, 0, 1], vec![0; 5]).unwrap();
        let c = ConstraintSet {
            capacities: vec![100.0, 10.0],
            ..ConstraintSet::uniform(2, 1.0)
        };
        let m = [1.0, 1.0];
        let cx = ctx(&g, &c, &m, Policy::Imbalance);
        let mut b = MoveBuckets::new(&g, &s, BucketKind::ResourceAffinity, &c.capacities, true);
        assert!(b.in_queue(1, 1));
        let targets = MoveBuckets::resource_targets(&s, &cx);
        assert_eq!(targets[0], (1, 0));
        let ra = b.ra_select(&s, &cx).unwrap();
        assert_eq!(ra.node, 1);
        let mp = b.mp_select(&s, &cx).unwrap();
        assert_eq!(mp.node, 3);
    }

    #[test]
    fn ra_falls_back_to_second_worst_resource() {
        // resource 1 worst but its queue on the heavy side is empty
        let nodes = vec![
            Node::locked(vec![vec![0, 9]]),
            Node::new(vec![vec![6, 0]]),
            Node::new(vec![vec![3, 0]]),
            Node::new(vec![vec![0, 3]]),
        ];
        let g = Hypergraph::build(2, nodes, vec![Hyperedge::new(1, vec![1, 2])]).unwrap();
        let s = PartitionState::recompute(&g, vec![0, 0, 1, 1], vec![0; 4]).unwrap();
        let c = ConstraintSet {
            capacities: vec![1.0, 1.0],
            ..ConstraintSet::uniform(2, 1.0)
        };
        let m = [1.0, 1.0];
        let cx = ctx(&g, &c, &m, Policy::Imbalance);
        let mut b = MoveBuckets::new(&g, &s, BucketKind::ResourceAffinity, &c.capacities, true);
        let targets = MoveBuckets::resource_targets(&s, &cx);
        assert_eq!(targets, vec![(1, 0), (0, 0)]);
        // freeze node 0 (the only resource-1 node on side 0) by moving it
        let first = b.ra_select(&s, &cx).unwrap();
        assert_eq!(first.node, 0);
        let mut s2 = s.clone();
        b.apply(&g, &mut s2, &first);
        let s2 = PartitionState::recompute(&g, vec![0, 0, 1, 1], vec![0; 4]).unwrap();
        let next = b.ra_select(&s2, &cx).unwrap();
        assert_eq!(next.node, 1);
    }

    #[test]
    fn balanced_state_ra_equals_mp() {
        for seed in 0..30 {
            let g = random_graph(seed, 10, 14, 2, 2);
            let n = g.node_count();
            // mirror every node so both sides carry equal totals
            let mut nodes = g.to_parts().0;
            nodes.extend(nodes.clone());
            let mut edges = g.to_parts().1;
            let mirrored: Vec<Hyperedge> = edges
                .iter()
                .map(|e| Hyperedge::new(e.weight, e.pins.iter().map(|p| p + n).collect()))
                .collect();
            edges.extend(mirrored);
            edges.push(Hyperedge::new(1, vec![0, n + 1]));
            let g2 = Hypergraph::build(2, nodes, edges).unwrap();
            let side: Vec<u8> = (0..2 * n).map(|v| (v >= n) as u8).collect();
            let s = PartitionState::recompute(&g2, side, vec![0; 2 * n]).unwrap();
            assert_eq!(s.totals(0), s.totals(1));
            let c = ConstraintSet::uniform(2, 0.3);
            let m = [0.3, 0.3];
            let cx = ctx(&g2, &c, &m, Policy::Imbalance);
            let mut b = MoveBuckets::new(&g2, &s, BucketKind::ResourceAffinity, &c.capacities, true);
            assert_eq!(b.ra_select(&s, &cx), b.mp_select(&s, &cx));
        }
    }

    #[test]
    fn hybrid_tie_rule_and_fallbacks() {
        let nodes = vec![
            Node::new(vec![vec![5, 0]]),
            Node::new(vec![vec![5, 0]]),
            Node::new(vec![vec![0, 5]]),
            Node::new(vec![vec![0, 5]]),
        ];
        let g = Hypergraph::build(2, nodes, vec![]).unwrap();
        let s = PartitionState::recompute(&g, vec![0, 0, 0, 1], vec![0; 4]).unwrap();
        let c = ConstraintSet::uniform(2, 1.0);
        let m = [1.0, 1.0];
        let cx = ctx(&g, &c, &m, Policy::Imbalance);
        let mut b = MoveBuckets::new(&g, &s, BucketKind::Hybrid, &c.capacities, true);
        let mp = b.mp_select(&s, &cx).unwrap();
        let ra = b.ra_select(&s, &cx).unwrap();
        let hy = b.hybrid_select(&s, &cx).unwrap();
        assert_eq!(mp.gain, ra.gain);
        let want = if ra.score_after < mp.score_after { ra } else { mp };
        assert_eq!(hy, want);
        assert!(hy.score_after <= mp.score_after && hy.score_after <= ra.score_after);
    }

    #[test]
    fn hybrid_gain_dominates_over_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for seed in 0..60 {
            let g = random_graph(seed, 10, 16, 3, 2);
            let side: Vec<u8> = (0..10).map(|_| rng.random_range(0..2)).collect();
            let sel: Vec<u32> = (0..10).map(|v| rng.random_range(0..g.selectable_count(v)) as u32).collect();
            let s = PartitionState::recompute(&g, side, sel).unwrap();
            let c = ConstraintSet::uniform(3, 0.4);
            let m = [0.4; 3];
            for policy in [Policy::Imbalance, Policy::Rur, Policy::Weighted(0.5)] {
                let cx = ctx(&g, &c, &m, policy);
                let mut b = MoveBuckets::new(&g, &s, BucketKind::Hybrid, &c.capacities, true);
                let mp = b.mp_select(&s, &cx).map(|x| x.gain);
                let ra = b.ra_select(&s, &cx).map(|x| x.gain);
                let hy = b.hybrid_select(&s, &cx).map(|x| x.gain);
                let best = mp.into_iter().chain(ra).max();
                assert_eq!(hy.is_some(), best.is_some());
                if let (Some(h), Some(b)) = (hy, best) {
                    assert!(h >= b);
                }
            }
        }
    }

    #[test]
    fn stored_gains_track_moves() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for seed in 0..40 {
            let g = random_graph(seed, 12, 20, 2, 2);
            let side: Vec<u8> = (0..12).map(|_| rng.random_range(0..2)).collect();
            let mut s = PartitionState::recompute(&g, side, vec![0; 12]).unwrap();
            let c = ConstraintSet::uniform(2, 1.0);
            let m = [1.0, 1.0];
            let cx = ctx(&g, &c, &m, Policy::Imbalance);
            let mut b = MoveBuckets::new(&g, &s, BucketKind::ResourceAffinity, &c.capacities, true);
            while let Some(choice) = b.select(&s, &cx) {
                assert!(!b.is_frozen(choice.node));
                let realized = b.apply(&g, &mut s, &choice);
                assert_eq!(realized, choice.gain);
                for v in 0..g.node_count() {
                    assert_eq!(b.gain(v), s.gain(&g, v), "node {v}");
                }
            }
            assert!((0..12).all(|v| b.is_frozen(v)));
        }
    }

    #[test]
    fn isolated_move_changes_no_other_gain_and_pair_flips() {
        let g = Hypergraph::build(
            1,
            vec![Node::new(vec![vec![1]]), Node::new(vec![vec![1]]), Node::new(vec![vec![1]])],
            vec![Hyperedge::new(2, vec![0, 1])],
        )
        .unwrap();
        let c = ConstraintSet::uniform(1, 1.0);
        let m = [1.0];
        let mut s = PartitionState::all_on_one_side(&g);
        let mut b = MoveBuckets::new(&g, &s, BucketKind::MultiPersonality, &c.capacities, true);
        let before: Vec<i64> = (0..3).map(|v| b.gain(v)).collect();
        let cx = ctx(&g, &c, &m, Policy::Imbalance);
        let iso = cx.evaluate(&s, 2, b.gain(2), 0.0).unwrap();
        b.apply(&g, &mut s, &iso);
        assert_eq!(b.gain(0), before[0]);
        assert_eq!(b.gain(1), before[1]);
        assert_eq!(b.gain(1), -2);
        let mv = cx.evaluate(&s, 0, b.gain(0), 0.0).unwrap();
        b.apply(&g, &mut s, &mv);
        assert_eq!(b.gain(1), 2);
    }
}
