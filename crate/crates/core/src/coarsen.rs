//! Multilevel hierarchy: heavy-edge matching, supernode personality bases,
//! and projection of coarse solutions back to the finer level.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::constraints::ConstraintSet;
use crate::error::{Error, Result};
use crate::graph::{Hyperedge, Hypergraph, Node, ResourceVector};
use crate::metrics::rur_score_masked;
use crate::state::PartitionState;

/// Above this many combinations the RUR-nearest basis entry is found by
/// coordinate descent instead of enumeration.
const BASIS_ENUMERATION_LIMIT: f64 = 4096.0;
const NONE: u32 = u32::MAX;

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CoarsenParams {
    pub coarsest_size: usize,
    /// Defaults to `2R + 3` when `None`.
    pub k_max: Option<usize>,
    /// Nets with more pins are ignored when scoring matches.
    pub max_matching_edge_size: usize,
    pub seed: u64,
}

impl Default for CoarsenParams {
    fn default() -> Self {
        CoarsenParams {
            coarsest_size: 60,
            k_max: None,
            max_matching_edge_size: 64,
            seed: 0,
        }
    }
}

/// One retained implementation of a supernode: the personality each
/// component uses (in `map_down` order) and the summed weight vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisEntry {
    pub assignment: Vec<u32>,
    pub aggregate: ResourceVector,
}

#[derive(Clone, Debug)]
pub struct Level {
    pub graph: Hypergraph,
    /// Finer-level node ids of each coarse node.
    pub map_down: Vec<Vec<u32>>,
    /// Indexed like the coarse node's personalities.
    pub personality_basis: Vec<Vec<BasisEntry>>,
}

/// Level 0 is the input graph (identity map); `levels[i - 1]` holds level `i`.
#[derive(Clone, Debug)]
pub struct Hierarchy<'g> {
    finest: &'g Hypergraph,
    levels: Vec<Level>,
}

impl<'g> Hierarchy<'g> {
    pub fn num_levels(&self) -> usize {
        self.levels.len() + 1
    }

    pub fn graph(&self, level: usize) -> &Hypergraph {
        if level == 0 {
            self.finest
        } else {
            &self.levels[level - 1].graph
        }
    }

    /// Coarse level `level >= 1`.
    pub fn level(&self, level: usize) -> &Level {
        &self.levels[level - 1]
    }

    pub fn coarsest(&self) -> &Hypergraph {
        self.graph(self.num_levels() - 1)
    }
}

/// A component's candidate implementations: (personality id, weights).
pub type Candidates<'a> = Vec<(u32, &'a [i64])>;

/// Picks the implementations a supernode exposes: per-resource minimum and
/// maximum combinations first, then the combinations closest to the target
/// utilization ratio, deduplicated and truncated to `k_max`.
pub fn select_personality_basis(
    components: &[Candidates<'_>],
    constraints: &ConstraintSet,
    used: &[bool],
    k_max: usize,
) -> Vec<BasisEntry> {
    let r = constraints.resource_count();
    let make = |choice: &[usize]| -> BasisEntry {
        let mut agg = ResourceVector::zeros(r);
        let mut assignment = Vec::with_capacity(choice.len());
        for (comp, &c) in components.iter().zip(choice) {
            agg.add_assign(comp[c].1);
            assignment.push(comp[c].0);
        }
        BasisEntry { assignment, aggregate: agg }
    };

    if components.len() == 1 && components[0].len() <= k_max {
        return (0..components[0].len()).map(|c| make(&[c])).collect();
    }

    let mut ordered: Vec<BasisEntry> = Vec::new();
    for res in 0..r {
        let pick = |maximize: bool| -> Vec<usize> {
            components
                .iter()
                .map(|comp| {
                    let key = |i: usize| {
                        let w = comp[i].1;
                        let primary = if maximize { -w[res] } else { w[res] };
                        (primary, w.iter().sum::<i64>(), i)
                    };
                    (0..comp.len()).min_by_key(|&i| key(i)).unwrap()
                })
                .collect()
        };
        ordered.push(make(&pick(false)));
        ordered.push(make(&pick(true)));
    }

    let combos: f64 = components.iter().map(|c| c.len() as f64).product();
    let score = |choice: &[usize]| rur_score_masked(&make(choice).aggregate, constraints, used);
    if combos <= BASIS_ENUMERATION_LIMIT {
        let mut all: Vec<(f64, Vec<usize>)> = Vec::with_capacity(combos as usize);
        let mut choice = vec![0usize; components.len()];
        loop {
            all.push((score(&choice), choice.clone()));
            if !advance(&mut choice, components) {
                break;
            }
        }
        all.sort_by(|a, b| a.0.total_cmp(&b.0));
        ordered.extend(all.into_iter().map(|(_, c)| make(&c)));
    } else {
        let mut choice = vec![0usize; components.len()];
        let mut best = score(&choice);
        loop {
            let mut improved = false;
            for i in 0..components.len() {
                for c in 0..components[i].len() {
                    let old = choice[i];
                    choice[i] = c;
                    let s = score(&choice);
                    if s < best {
                        best = s;
                        improved = true;
                    } else {
                        choice[i] = old;
                    }
                }
            }
            if !improved {
                break;
            }
        }
        ordered.push(make(&choice));
    }

    let mut out: Vec<BasisEntry> = Vec::with_capacity(k_max);
    for e in ordered {
        if out.len() == k_max {
            break;
        }
        if !out.iter().any(|o| o.aggregate == e.aggregate) {
            out.push(e);
        }
    }
    out
}

fn advance(choice: &mut [usize], components: &[Candidates<'_>]) -> bool {
    for i in 0..choice.len() {
        choice[i] += 1;
        if choice[i] < components[i].len() {
            return true;
        }
        choice[i] = 0;
    }
    false
}

/// Builds the hierarchy. With `fixed` set, level-0 nodes expose only their
/// fixed personality, so every supernode has a single implementation.
pub fn coarsen<'g>(
    graph: &'g Hypergraph,
    constraints: &ConstraintSet,
    params: &CoarsenParams,
    fixed: Option<&[u32]>,
) -> Hierarchy<'g> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let k_max = params.k_max.unwrap_or(2 * graph.resource_count() + 3);
    let n0 = graph.node_count();
    let cluster_cap = ((2 * n0).div_ceil(params.coarsest_size.max(1))).max(2) as u32;
    let used = graph.capable_resources().to_vec();

    let mut levels: Vec<Level> = Vec::new();
    let mut fine_count: Vec<u32> = vec![1; n0];
    while levels.len() < 64 {
        let current = levels.last().map_or(graph, |l| &l.graph);
        let n = current.node_count();
        if n <= params.coarsest_size {
            break;
        }
        let mate = heavy_edge_matching(current, params, &fine_count, cluster_cap, &mut rng);
        let mut map_down: Vec<Vec<u32>> = Vec::new();
        let mut coarse_of = vec![NONE; n];
        for v in 0..n {
            if coarse_of[v] != NONE {
                continue;
            }
            let id = map_down.len() as u32;
            coarse_of[v] = id;
            let m = mate[v];
            if m != NONE {
                coarse_of[m as usize] = id;
                map_down.push(vec![v as u32, m]);
            } else {
                map_down.push(vec![v as u32]);
            }
        }
        let nc = map_down.len();
        if (n as f64) / (nc as f64) < 1.05 {
            break;
        }

        let fixed_here = if levels.is_empty() { fixed } else { None };
        let mut nodes = Vec::with_capacity(nc);
        let mut basis_all = Vec::with_capacity(nc);
        for members in &map_down {
            let locked = members.iter().all(|&v| current.is_locked(v as usize));
            let components: Vec<Candidates<'_>> = members
                .iter()
                .map(|&v| {
                    let v = v as usize;
                    match fixed_here {
                        Some(f) => vec![(f[v], current.weights(v, f[v] as usize))],
                        None => (0..current.selectable_count(v))
                            .map(|p| (p as u32, current.weights(v, p)))
                            .collect(),
                    }
                })
                .collect();
            let basis = select_personality_basis(&components, constraints, &used, k_max);
            nodes.push(Node {
                personalities: basis.iter().map(|b| b.aggregate.clone()).collect(),
                locked,
            });
            basis_all.push(basis);
        }
        let edges = contract_edges(current, &coarse_of);
        let coarse = Hypergraph::build(current.resource_count(), nodes, edges)
            .expect("contraction preserves graph invariants");
        fine_count = map_down
            .iter()
            .map(|m| m.iter().map(|&v| fine_count[v as usize]).sum())
            .collect();
        levels.push(Level {
            graph: coarse,
            map_down,
            personality_basis: basis_all,
        });
    }
    Hierarchy { finest: graph, levels }
}

fn heavy_edge_matching(
    g: &Hypergraph,
    params: &CoarsenParams,
    fine_count: &[u32],
    cap: u32,
    rng: &mut ChaCha8Rng,
) -> Vec<u32> {
    let n = g.node_count();
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.shuffle(rng);
    let mut mate = vec![NONE; n];
    let mut matched = vec![false; n];
    let mut acc = vec![0.0f64; n];
    let mut touched: Vec<u32> = Vec::new();
    let mut isolated: Option<u32> = None;

    for &u in &order {
        let u = u as usize;
        if matched[u] {
            continue;
        }
        if g.incident_edges(u).is_empty() && !g.is_locked(u) {
            match isolated.take() {
                Some(o) => {
                    mate[u] = o;
                    mate[o as usize] = u as u32;
                    matched[u] = true;
                    matched[o as usize] = true;
                }
                None => isolated = Some(u as u32),
            }
            continue;
        }
        let lock_u = g.is_locked(u);
        for &e in g.incident_edges(u) {
            let pins = g.pins(e as usize);
            if pins.len() > params.max_matching_edge_size {
                continue;
            }
            let s = g.edge_weight(e as usize) as f64 / (pins.len() - 1) as f64;
            for &v in pins {
                let vu = v as usize;
                if vu == u
                    || matched[vu]
                    || g.is_locked(vu) != lock_u
                    || fine_count[u] + fine_count[vu] > cap
                {
                    continue;
                }
                if acc[vu] == 0.0 {
                    touched.push(v);
                }
                acc[vu] += s;
            }
        }
        let mut best: Option<(f64, u32)> = None;
        for &v in &touched {
            let a = acc[v as usize];
            let better = match best {
                None => true,
                Some((ba, bv)) => a > ba || (a == ba && v < bv),
            };
            if better {
                best = Some((a, v));
            }
        }
        for &v in &touched {
            acc[v as usize] = 0.0;
        }
        touched.clear();
        if let Some((_, v)) = best {
            mate[u] = v;
            mate[v as usize] = u as u32;
            matched[u] = true;
            matched[v as usize] = true;
        }
    }
    mate
}

/// Maps pins to coarse ids, drops nets that collapse to one node and merges
/// parallel nets by summing their weights.
fn contract_edges(g: &Hypergraph, coarse_of: &[u32]) -> Vec<Hyperedge> {
    let mut index: HashMap<Vec<u32>, usize> = HashMap::with_capacity(g.edge_count());
    let mut out: Vec<Hyperedge> = Vec::new();
    let mut buf: Vec<u32> = Vec::new();
    for e in 0..g.edge_count() {
        buf.clear();
        buf.extend(g.pins(e).iter().map(|&p| coarse_of[p as usize]));
        buf.sort_unstable();
        buf.dedup();
        if buf.len() < 2 {
            continue;
        }
        let w = g.edge_weight(e);
        match index.get(buf.as_slice()) {
            Some(&i) => out[i].weight += w,
            None => {
                index.insert(buf.clone(), out.len());
                out.push(Hyperedge::new(w, buf.iter().map(|&p| p as usize).collect()));
            }
        }
    }
    out
}

/// Projects a coarse-level state onto the next finer level: children
/// inherit the side and take personalities from the chosen basis entry.
pub fn project(level: &Level, finer: &Hypergraph, coarse_state: &PartitionState) -> Result<PartitionState> {
    let n = finer.node_count();
    let mut side = vec![0u8; n];
    let mut selected = vec![0u32; n];
    for (c, members) in level.map_down.iter().enumerate() {
        let entry = coarse_state.selected(c);
        let basis = level
            .personality_basis
            .get(c)
            .and_then(|b| b.get(entry))
            .ok_or(Error::BasisEntryLost { node: c, entry })?;
        for (&v, &p) in members.iter().zip(&basis.assignment) {
            side[v as usize] = coarse_state.side(c);
            selected[v as usize] = p;
        }
    }
    PartitionState::recompute(finer, side, selected)
}
