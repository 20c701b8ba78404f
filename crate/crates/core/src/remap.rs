//! Global personality remapping with sides held fixed.
//!
//! Two remappers: a multi-phase greedy random walk over all nodes and a
//! fractured exact solver that splits the nodes into small fragments and
//! enumerates (or branch-and-bounds) each one against the live totals.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::constraints::ConstraintSet;
use crate::graph::{Hypergraph, MAX_RESOURCES};
use crate::objective::{scratch, ObjectiveKey, Policy, Scorer};
use crate::state::PartitionState;

pub const DEFAULT_FRAGMENT_SIZE: usize = 16;
pub const DEFAULT_COMBINATION_BUDGET: f64 = 4096.0;
pub const DEFAULT_ROUNDS: usize = 3;
pub const DEFAULT_GREEDY_PHASES: usize = 4;

/// What a remap minimizes: margin violation first (when margins are given),
/// then the policy score.
#[derive(Clone, Copy)]
pub struct RemapObjective<'a> {
    pub policy: Policy,
    pub margins: Option<&'a [f64]>,
    pub scorer: Scorer<'a>,
}

impl<'a> RemapObjective<'a> {
    pub fn new(policy: Policy, margins: Option<&'a [f64]>, constraints: &'a ConstraintSet, used: &'a [bool]) -> Self {
        RemapObjective {
            policy,
            margins,
            scorer: Scorer::new(constraints, used),
        }
    }

    pub fn with_policy(&self, policy: Policy) -> Self {
        RemapObjective { policy, ..*self }
    }

    #[inline]
    pub fn key_of(&self, t0: &[i64], t1: &[i64]) -> ObjectiveKey {
        self.scorer.key(self.policy, self.margins, t0, t1)
    }

    pub fn key(&self, state: &PartitionState) -> ObjectiveKey {
        self.key_of(state.totals(0), state.totals(1))
    }
}

/// Nodes whose personality a remap may change.
pub fn eligible_nodes(graph: &Hypergraph) -> Vec<u32> {
    (0..graph.node_count())
        .filter(|&v| graph.selectable_count(v) > 1)
        .map(|v| v as u32)
        .collect()
}

fn phase_policies(policy: Policy, phases: usize) -> Vec<Policy> {
    let lead: &[Policy] = match policy {
        Policy::Imbalance => &[],
        Policy::Rur => &[Policy::Imbalance],
        Policy::Weighted(_) => &[Policy::Imbalance, Policy::Rur],
    };
    let mut out = lead.to_vec();
    while out.len() < phases.max(lead.len() + 1) {
        out.push(policy);
    }
    out
}

/// Random-walk remap. Each phase visits every eligible node in a fresh
/// order and keeps the personality with the best phase objective. Phases
/// lead with balance, then utilization ratio, then the requested policy;
/// the walk stops once a phase of the requested policy changes nothing.
/// If the requested objective ends worse than it started, the original
/// selections are restored. Returns the number of personality changes.
pub fn greedy_remap(
    graph: &Hypergraph,
    state: &mut PartitionState,
    objective: &RemapObjective<'_>,
    seed: u64,
    phases: usize,
) -> usize {
    greedy_remap_nodes(graph, state, objective, seed, phases, eligible_nodes(graph))
}

/// [`greedy_remap`] restricted to `nodes`, which must be eligible.
pub fn greedy_remap_nodes(
    graph: &Hypergraph,
    state: &mut PartitionState,
    objective: &RemapObjective<'_>,
    seed: u64,
    phases: usize,
    nodes: Vec<u32>,
) -> usize {
    let mut order = nodes;
    if order.is_empty() {
        return 0;
    }
    let start_key = objective.key(state);
    let start_sel = state.selections().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut changed = 0;
    for policy in phase_policies(objective.policy, phases) {
        let phase = objective.with_policy(policy);
        order.shuffle(&mut rng);
        let mut phase_changes = 0;
        for &v in &order {
            let v = v as usize;
            if let Some(p) = best_personality(graph, state, v, &phase) {
                state.set_personality(graph, v, p).expect("eligible node");
                phase_changes += 1;
            }
        }
        changed += phase_changes;
        if phase_changes == 0 && policy == objective.policy {
            break;
        }
    }
    if objective.key(state).cmp(&start_key).is_gt() {
        restore(graph, state, &start_sel);
        return 0;
    }
    changed
}

fn restore(graph: &Hypergraph, state: &mut PartitionState, selections: &[u32]) {
    for (v, &p) in selections.iter().enumerate() {
        if state.selected(v) != p as usize {
            state.set_personality(graph, v, p as usize).expect("previous selection");
        }
    }
}

/// Strictly better personality for `v` with its side fixed, or `None`.
/// Ties keep the lowest id.
pub fn best_personality(graph: &Hypergraph, state: &PartitionState, v: usize, objective: &RemapObjective<'_>) -> Option<usize> {
    let r = graph.resource_count();
    let s = state.side(v);
    let cur = state.selected(v);
    let mut own = scratch(state.totals(s));
    for (t, w) in own[..r].iter_mut().zip(graph.weights(v, cur)) {
        *t -= *w;
    }
    let other = state.totals(1 - s);
    let eval = |p: usize| {
        let mut t = own;
        for (t, w) in t[..r].iter_mut().zip(graph.weights(v, p)) {
            *t += *w;
        }
        if s == 0 {
            objective.key_of(&t[..r], other)
        } else {
            objective.key_of(other, &t[..r])
        }
    };
    let mut best = eval(cur);
    let mut pick = None;
    for p in 0..graph.selectable_count(v) {
        if p == cur {
            continue;
        }
        let k = eval(p);
        if k.lt(&best) {
            best = k;
            pick = Some(p);
        }
    }
    pick
}

/// Splits the eligible nodes into fragments of at most `f_max`. Nodes are
/// sorted by the resource their personalities disagree on most (relative
/// to capacity), in a seeded random order within each resource, and the
/// sorted sequence is chunked.
pub fn fracture(graph: &Hypergraph, constraints: &ConstraintSet, f_max: usize, seed: u64) -> Vec<Vec<u32>> {
    fracture_nodes(graph, constraints, eligible_nodes(graph), f_max, seed)
}

/// [`fracture`] over a given node set.
pub fn fracture_nodes(graph: &Hypergraph, constraints: &ConstraintSet, nodes: Vec<u32>, f_max: usize, seed: u64) -> Vec<Vec<u32>> {
    let f_max = f_max.max(1);
    let mut nodes = nodes;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    nodes.shuffle(&mut rng);
    let r = graph.resource_count();
    let dominant = |v: usize| -> usize {
        let spread = |i: usize| {
            let (lo, hi) = (0..graph.selectable_count(v))
                .map(|p| graph.weights(v, p)[i])
                .fold((i64::MAX, i64::MIN), |(lo, hi), w| (lo.min(w), hi.max(w)));
            (hi - lo) as f64 / constraints.capacities[i]
        };
        (0..r).max_by(|&a, &b| spread(a).total_cmp(&spread(b)).then(b.cmp(&a))).unwrap_or(0)
    };
    nodes.sort_by_key(|&v| dominant(v as usize));
    nodes.chunks(f_max).map(|c| c.to_vec()).collect()
}

/// Further splits a fragment so each piece has at most `budget` combinations.
pub fn split_by_budget(graph: &Hypergraph, fragment: &[u32], budget: f64) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    let mut combos = 1.0;
    for &v in fragment {
        let k = graph.selectable_count(v as usize) as f64;
        if !cur.is_empty() && combos * k > budget {
            out.push(std::mem::take(&mut cur));
            combos = 1.0;
        }
        cur.push(v);
        combos *= k;
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

struct FragmentProblem<'a> {
    r: usize,
    sides: Vec<u8>,
    options: Vec<Vec<&'a [i64]>>,
    /// Totals with the fragment's contribution removed.
    base: [[i64; MAX_RESOURCES]; 2],
}

impl<'a> FragmentProblem<'a> {
    fn new(graph: &'a Hypergraph, state: &PartitionState, fragment: &[u32]) -> Self {
        let r = graph.resource_count();
        let mut base = [scratch(state.totals(0)), scratch(state.totals(1))];
        let mut sides = Vec::with_capacity(fragment.len());
        let mut options = Vec::with_capacity(fragment.len());
        for &v in fragment {
            let v = v as usize;
            let s = state.side(v);
            for (t, w) in base[s as usize][..r].iter_mut().zip(graph.weights(v, state.selected(v))) {
                *t -= *w;
            }
            sides.push(s);
            options.push((0..graph.selectable_count(v)).map(|p| graph.weights(v, p)).collect());
        }
        FragmentProblem { r, sides, options, base }
    }

    fn add(&self, t: &mut [[i64; MAX_RESOURCES]; 2], i: usize, p: usize, sign: i64) {
        let s = self.sides[i] as usize;
        for (x, w) in t[s][..self.r].iter_mut().zip(self.options[i][p]) {
            *x += sign * *w;
        }
    }

    fn key(&self, obj: &RemapObjective<'_>, t: &[[i64; MAX_RESOURCES]; 2]) -> ObjectiveKey {
        obj.key_of(&t[0][..self.r], &t[1][..self.r])
    }

    fn totals_of(&self, choice: &[usize]) -> [[i64; MAX_RESOURCES]; 2] {
        let mut t = self.base;
        for (i, &p) in choice.iter().enumerate() {
            self.add(&mut t, i, p, 1);
        }
        t
    }
}

/// Exact minimization of the objective over every personality combination
/// of `fragment`, other nodes fixed. Enumerates when the combination count
/// is at most 4096, otherwise branch-and-bound. The incoming selection is
/// kept unless something strictly better exists. Returns one personality
/// per fragment node.
pub fn solve_fragment(
    graph: &Hypergraph,
    state: &PartitionState,
    fragment: &[u32],
    objective: &RemapObjective<'_>,
) -> Vec<u32> {
    let prob = FragmentProblem::new(graph, state, fragment);
    let current: Vec<usize> = fragment.iter().map(|&v| state.selected(v as usize)).collect();
    let combos: f64 = prob.options.iter().map(|o| o.len() as f64).product();
    let best = if combos <= DEFAULT_COMBINATION_BUDGET {
        enumerate(&prob, objective, &current)
    } else {
        branch_and_bound(&prob, objective, &current)
    };
    best.into_iter().map(|p| p as u32).collect()
}

fn enumerate(prob: &FragmentProblem<'_>, obj: &RemapObjective<'_>, current: &[usize]) -> Vec<usize> {
    let n = current.len();
    let mut best = current.to_vec();
    let mut best_key = prob.key(obj, &prob.totals_of(current));
    let mut choice = vec![0usize; n];
    let mut t = prob.totals_of(&choice);
    loop {
        let k = prob.key(obj, &t);
        if k.lt(&best_key) {
            best_key = k;
            best.copy_from_slice(&choice);
        }
        // odometer step
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            prob.add(&mut t, i, choice[i], -1);
            choice[i] += 1;
            if choice[i] < prob.options[i].len() {
                prob.add(&mut t, i, choice[i], 1);
                break;
            }
            choice[i] = 0;
            prob.add(&mut t, i, 0, 1);
            i += 1;
        }
    }
}

struct Bounds {
    /// Per depth, side and resource: sum of min / max weights of nodes `depth..`.
    lo: Vec<[[i64; MAX_RESOURCES]; 2]>,
    hi: Vec<[[i64; MAX_RESOURCES]; 2]>,
}

impl Bounds {
    fn new(prob: &FragmentProblem<'_>) -> Self {
        let n = prob.options.len();
        let mut lo = vec![[[0i64; MAX_RESOURCES]; 2]; n + 1];
        let mut hi = lo.clone();
        for i in (0..n).rev() {
            lo[i] = lo[i + 1];
            hi[i] = hi[i + 1];
            let s = prob.sides[i] as usize;
            for r in 0..prob.r {
                let ws = prob.options[i].iter().map(|w| w[r]);
                lo[i][s][r] += ws.clone().min().unwrap();
                hi[i][s][r] += ws.max().unwrap();
            }
        }
        Bounds { lo, hi }
    }

    /// Lower bound on the objective of any completion from `depth` with
    /// partial totals `t`. Violation and imbalance are bounded per resource
    /// by the smallest reachable difference over the largest reachable
    /// total; the ratio term is bounded by zero.
    fn key(&self, prob: &FragmentProblem<'_>, obj: &RemapObjective<'_>, t: &[[i64; MAX_RESOURCES]; 2], depth: usize) -> ObjectiveKey {
        let (lo, hi) = (&self.lo[depth], &self.hi[depth]);
        let mut violation = 0.0;
        let mut sq = 0.0;
        let mut count_max = 0usize;
        for r in 0..prob.r {
            let (a0, a1) = (t[0][r], t[1][r]);
            let d_min = a0 + lo[0][r] - a1 - hi[1][r];
            let d_max = a0 + hi[0][r] - a1 - lo[1][r];
            let abs_min = if d_min > 0 {
                d_min
            } else if d_max < 0 {
                -d_max
            } else {
                0
            } as f64;
            let t_min = (a0 + a1 + lo[0][r] + lo[1][r]) as f64;
            let t_max = (a0 + a1 + hi[0][r] + hi[1][r]) as f64;
            if t_max > 0.0 {
                count_max += 1;
            }
            if t_min > 0.0 {
                let x = abs_min / t_max;
                sq += x * x;
                if let Some(m) = obj.margins {
                    if abs_min > m[r] * t_max {
                        violation += (abs_min - m[r] * t_max) / t_max;
                    }
                }
            }
        }
        let imb = if count_max == 0 { 0.0 } else { (sq / count_max as f64).sqrt() };
        let score = match obj.policy {
            Policy::Imbalance => imb,
            Policy::Rur => 0.0,
            Policy::Weighted(a) => a * imb,
        };
        // guard against rounding making the bound exceed an attainable value
        let shave = |x: f64| (x * (1.0 - 1e-9) - 1e-12).max(0.0);
        ObjectiveKey {
            violation: shave(violation),
            score: shave(score),
        }
    }
}

fn branch_and_bound(prob: &FragmentProblem<'_>, obj: &RemapObjective<'_>, current: &[usize]) -> Vec<usize> {
    let n = current.len();
    let bounds = Bounds::new(prob);
    let mut best = current.to_vec();
    let mut best_key = prob.key(obj, &prob.totals_of(current));
    let mut choice = vec![0usize; n];
    let mut t = prob.base;

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        depth: usize,
        prob: &FragmentProblem<'_>,
        obj: &RemapObjective<'_>,
        bounds: &Bounds,
        t: &mut [[i64; MAX_RESOURCES]; 2],
        choice: &mut Vec<usize>,
        best: &mut Vec<usize>,
        best_key: &mut ObjectiveKey,
    ) {
        if depth == choice.len() {
            let k = prob.key(obj, t);
            if k.lt(best_key) {
                *best_key = k;
                best.copy_from_slice(choice);
            }
            return;
        }
        if !bounds.key(prob, obj, t, depth).lt(best_key) {
            return;
        }
        for p in 0..prob.options[depth].len() {
            prob.add(t, depth, p, 1);
            choice[depth] = p;
            dfs(depth + 1, prob, obj, bounds, t, choice, best, best_key);
            prob.add(t, depth, p, -1);
        }
    }

    if n > 0 {
        dfs(0, prob, obj, &bounds, &mut t, &mut choice, &mut best, &mut best_key);
    }
    best
}

/// Repeated fracture-and-solve. Each round uses a fresh fracture seed and
/// solves fragments one after another against the live state; stops early
/// when a round changes nothing. Returns the number of personality changes.
pub fn fractured_ilp_remap(
    graph: &Hypergraph,
    state: &mut PartitionState,
    objective: &RemapObjective<'_>,
    f_max: usize,
    rounds: usize,
    seed: u64,
) -> usize {
    fractured_ilp_remap_nodes(graph, state, objective, f_max, rounds, seed, &eligible_nodes(graph))
}

/// [`fractured_ilp_remap`] restricted to `nodes`, which must be eligible.
pub fn fractured_ilp_remap_nodes(
    graph: &Hypergraph,
    state: &mut PartitionState,
    objective: &RemapObjective<'_>,
    f_max: usize,
    rounds: usize,
    seed: u64,
    nodes: &[u32],
) -> usize {
    let mut changed = 0;
    for round in 0..rounds {
        let mut round_changes = 0;
        let seed = seed ^ (round as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        for fragment in fracture_nodes(graph, objective.scorer.constraints, nodes.to_vec(), f_max, seed) {
            for piece in split_by_budget(graph, &fragment, DEFAULT_COMBINATION_BUDGET) {
                let pick = solve_fragment(graph, state, &piece, objective);
                for (&v, &p) in piece.iter().zip(&pick) {
                    if state.selected(v as usize) != p as usize {
                        state.set_personality(graph, v as usize, p as usize).expect("eligible node");
                        round_changes += 1;
                    }
                }
            }
        }
        changed += round_changes;
        if round_changes == 0 {
            break;
        }
    }
    changed
}

/// Selections that put every unlocked node on a personality using only the
/// `common` resource where one exists (smallest total weight, then lowest
/// id); other nodes get personality 0.
pub fn remap_to_common_resource(graph: &Hypergraph, common: usize) -> Vec<u32> {
    (0..graph.node_count())
        .map(|v| {
            (0..graph.selectable_count(v))
                .filter(|&p| {
                    let w = graph.weights(v, p);
                    w.iter().enumerate().all(|(i, &x)| i == common || x == 0)
                })
                .min_by_key(|&p| (graph.weights(v, p).iter().sum::<i64>(), p))
                .unwrap_or(0) as u32
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Node;
    use crate::test_util::random_graph;
    use proptest::prelude::*;
    use rand::Rng;

    fn random_state(g: &Hypergraph, seed: u64) -> PartitionState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = g.node_count();
        let side = (0..n).map(|_| rng.random_range(0..2)).collect();
        let sel = (0..n).map(|v| rng.random_range(0..g.selectable_count(v)) as u32).collect();
        PartitionState::recompute(g, side, sel).unwrap()
    }

    fn policies() -> [Policy; 3] {
        [Policy::Imbalance, Policy::Rur, Policy::Weighted(0.5)]
    }

    /// Brute-force optimum over all combinations of `fragment`.
    fn exhaustive(g: &Hypergraph, s: &PartitionState, fragment: &[u32], obj: &RemapObjective<'_>) -> ObjectiveKey {
        let mut best: Option<ObjectiveKey> = None;
        let mut choice = vec![0usize; fragment.len()];
        loop {
            let mut t = s.clone();
            for (&v, &p) in fragment.iter().zip(&choice) {
                t.set_personality(g, v as usize, p).unwrap();
            }
            let k = obj.key(&t);
            if best.is_none_or(|b| k.lt(&b)) {
                best = Some(k);
            }
            let mut i = 0;
            loop {
                if i == choice.len() {
                    return best.unwrap();
                }
                choice[i] += 1;
                if choice[i] < g.selectable_count(fragment[i] as usize) {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
        }
    }

    fn applied(g: &Hypergraph, s: &PartitionState, fragment: &[u32], pick: &[u32]) -> PartitionState {
        let mut t = s.clone();
        for (&v, &p) in fragment.iter().zip(pick) {
            t.set_personality(g, v as usize, p as usize).unwrap();
        }
        t
    }

    #[test]
    fn single_personality_graph_is_untouched() {
        let g = random_graph(4, 10, 12, 2, 1);
        let mut s = random_state(&g, 1);
        let before = s.clone();
        let c = ConstraintSet::uniform(2, 0.1);
        let obj = RemapObjective::new(Policy::Rur, None, &c, g.capable_resources());
        assert_eq!(greedy_remap(&g, &mut s, &obj, 1, 4), 0);
        assert_eq!(fractured_ilp_remap(&g, &mut s, &obj, 16, 3, 1), 0);
        assert_eq!(s, before);
    }

    #[test]
    fn greedy_switches_to_short_resource() {
        // resource 0 balanced, resource 1 short on side 0
        let nodes = vec![
            Node::new(vec![vec![6, 0], vec![0, 3]]),
            Node::new(vec![vec![10, 0]]),
            Node::new(vec![vec![16, 0]]),
            Node::new(vec![vec![0, 3]]),
        ];
        let g = Hypergraph::build(2, nodes, vec![]).unwrap();
        let mut s = PartitionState::recompute(&g, vec![0, 0, 1, 1], vec![0; 4]).unwrap();
        let c = ConstraintSet::uniform(2, 1.0);
        let obj = RemapObjective::new(Policy::Imbalance, None, &c, g.capable_resources());
        let score = |p: usize| {
            let mut t = s.clone();
            t.set_personality(&g, 0, p).unwrap();
            obj.key(&t).score
        };
        assert!(score(1) < score(0));
        assert_eq!(greedy_remap(&g, &mut s, &obj, 0, 4), 1);
        assert_eq!(s.selected(0), 1);
    }

    #[test]
    fn fracture_shapes() {
        let g = random_graph(2, 5, 6, 2, 2);
        let c = ConstraintSet::uniform(2, 0.1);
        let e = eligible_nodes(&g).len();
        let f = fracture(&g, &c, 20, 0);
        assert_eq!(f.iter().map(Vec::len).sum::<usize>(), e);
        assert!(f.len() <= 1);

        let nodes: Vec<Node> = (0..45).map(|i| Node::new(vec![vec![1 + i % 3, 0], vec![0, 2]])).collect();
        let g = Hypergraph::build(2, nodes, vec![]).unwrap();
        let f = fracture(&g, &c, 20, 9);
        assert_eq!(f.len(), 3);
        let mut all: Vec<u32> = f.concat();
        all.sort();
        assert_eq!(all, (0..45).collect::<Vec<_>>());
        assert!(f.iter().all(|x| x.len() <= 20));
        assert_eq!(fracture(&g, &c, 20, 9), f);
    }

    #[test]
    fn fragment_count_bound() {
        for seed in 0..40 {
            let g = random_graph(seed, 30, 20, 3, 3);
            let c = ConstraintSet::uniform(3, 0.1);
            let e = eligible_nodes(&g).len();
            let f_max = 1 + seed as usize % 7;
            let f = fracture(&g, &c, f_max, seed);
            assert!(f.len() <= e.div_ceil(f_max) + 3);
        }
    }

    #[test]
    fn single_node_fragment_matches_greedy() {
        for seed in 0..30 {
            let g = random_graph(seed, 8, 10, 3, 3);
            let s = random_state(&g, seed);
            let c = ConstraintSet::uniform(3, 0.2);
            for policy in policies() {
                let obj = RemapObjective::new(policy, Some(&c.margins), &c, g.capable_resources());
                for v in eligible_nodes(&g) {
                    let pick = solve_fragment(&g, &s, &[v], &obj)[0] as usize;
                    let greedy = best_personality(&g, &s, v as usize, &obj).unwrap_or(s.selected(v as usize));
                    assert_eq!(pick, greedy);
                }
            }
        }
    }

    #[test]
    fn small_fragment_equals_enumeration() {
        let nodes = vec![
            Node::new(vec![vec![4, 0], vec![0, 2]]),
            Node::new(vec![vec![3, 1], vec![1, 3]]),
            Node::new(vec![vec![5, 0], vec![2, 2]]),
            Node::new(vec![vec![7, 1]]),
        ];
        let g = Hypergraph::build(2, nodes, vec![]).unwrap();
        let s = PartitionState::recompute(&g, vec![0, 1, 0, 1], vec![0; 4]).unwrap();
        let c = ConstraintSet::uniform(2, 0.05);
        for policy in policies() {
            let obj = RemapObjective::new(policy, Some(&c.margins), &c, g.capable_resources());
            let frag = [0, 1, 2];
            let pick = solve_fragment(&g, &s, &frag, &obj);
            assert_eq!(obj.key(&applied(&g, &s, &frag, &pick)), exhaustive(&g, &s, &frag, &obj));
        }
    }

    #[test]
    fn branch_and_bound_equals_enumeration() {
        for seed in 0..12 {
            let g = random_graph(seed, 14, 10, 3, 3);
            let s = random_state(&g, seed + 100);
            let frag = eligible_nodes(&g);
            let current: Vec<usize> = frag.iter().map(|&v| s.selected(v as usize)).collect();
            let prob = FragmentProblem::new(&g, &s, &frag);
            let c = ConstraintSet::uniform(3, 0.1);
            for policy in policies() {
                for margins in [None, Some(&c.margins[..])] {
                    let obj = RemapObjective::new(policy, margins, &c, g.capable_resources());
                    let pick: Vec<u32> = branch_and_bound(&prob, &obj, &current).into_iter().map(|p| p as u32).collect();
                    let got = obj.key(&applied(&g, &s, &frag, &pick));
                    let want = exhaustive(&g, &s, &frag, &obj);
                    assert_eq!(got, want, "seed {seed} {policy:?}");
                    let enumerated: Vec<u32> = enumerate(&prob, &obj, &current).into_iter().map(|p| p as u32).collect();
                    assert_eq!(obj.key(&applied(&g, &s, &frag, &enumerated)), want);
                }
            }
        }
    }

    #[test]
    fn one_round_reaches_global_optimum() {
        for seed in 0..15 {
            let g = random_graph(seed, 12, 10, 2, 2);
            let mut s = random_state(&g, seed);
            let c = ConstraintSet::uniform(2, 0.1);
            let obj = RemapObjective::new(Policy::Weighted(0.5), Some(&c.margins), &c, g.capable_resources());
            let frag = eligible_nodes(&g);
            let want = exhaustive(&g, &s, &frag, &obj);
            fractured_ilp_remap(&g, &mut s, &obj, 16, 1, seed);
            assert_eq!(obj.key(&s), want);
        }
    }

    #[test]
    fn remap_to_common_examples() {
        let nodes = vec![
            Node::new(vec![vec![0, 2], vec![5, 0]]),
            Node::new(vec![vec![3, 1], vec![0, 2]]),
            Node::locked(vec![vec![0, 2], vec![4, 0]]),
            Node::new(vec![vec![0, 1], vec![9, 0], vec![6, 0]]),
        ];
        let g = Hypergraph::build(2, nodes, vec![]).unwrap();
        assert_eq!(remap_to_common_resource(&g, 0), vec![1, 0, 0, 2]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn remaps_never_worsen_and_keep_cut(seed in 0u64..10_000, policy_ix in 0usize..3, with_margins: bool) {
            let g = random_graph(seed, 12, 16, 3, 3);
            let s0 = random_state(&g, seed ^ 7);
            let c = ConstraintSet::uniform(3, 0.15);
            let policy = policies()[policy_ix];
            let margins = with_margins.then_some(&c.margins[..]);
            let obj = RemapObjective::new(policy, margins, &c, g.capable_resources());

            // greedy: every individual change is an improvement in its phase
            let mut s = s0.clone();
            let before = obj.key(&s);
            greedy_remap(&g, &mut s, &obj, seed, 4);
            prop_assert!(!obj.key(&s).cmp(&before).is_gt());
            prop_assert_eq!(s.cut(), s0.cut());
            prop_assert_eq!(s.sides(), s0.sides());
            for v in 0..g.node_count() {
                if g.is_locked(v) {
                    prop_assert_eq!(s.selected(v), 0);
                }
            }

            let mut s = s0.clone();
            let mut prev = obj.key(&s);
            for round in 0..3 {
                fractured_ilp_remap(&g, &mut s, &obj, 5, 1, seed + round);
                let k = obj.key(&s);
                prop_assert!(!k.cmp(&prev).is_gt());
                prev = k;
            }
            prop_assert_eq!(s.cut(), s0.cut());
        }

        #[test]
        fn greedy_single_change_is_improving(seed in 0u64..10_000) {
            let g = random_graph(seed, 10, 12, 3, 3);
            let s = random_state(&g, seed);
            let c = ConstraintSet::uniform(3, 0.15);
            let obj = RemapObjective::new(Policy::Weighted(0.5), Some(&c.margins), &c, g.capable_resources());
            for v in 0..g.node_count() {
                if let Some(p) = best_personality(&g, &s, v, &obj) {
                    let mut t = s.clone();
                    t.set_personality(&g, v, p).unwrap();
                    prop_assert!(obj.key(&t).lt(&obj.key(&s)));
                }
            }
        }
    }

    #[test]
    fn common_fraction_on_generated_profile() {
        use crate::harness::generate::{generate, BenchmarkProfile};
        let mut p = BenchmarkProfile::preset("raygen").unwrap();
        p.node_count = 2000;
        let g = generate(&p).unwrap();
        let sel = remap_to_common_resource(&g, 0);
        let pure = |v: usize, p: usize| g.weights(v, p).iter().skip(1).all(|&x| x == 0);
        let capable = (0..g.node_count())
            .filter(|&v| (0..g.selectable_count(v)).any(|p| pure(v, p)))
            .count();
        let selecting = (0..g.node_count()).filter(|&v| pure(v, sel[v] as usize)).count();
        assert!(selecting >= capable);
    }
}
