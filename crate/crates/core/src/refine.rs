//! KLFM passes, per-level refinement, and the multilevel driver.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::buckets::{BucketKind, MoveBuckets, MoveChoice, SelectContext};
use crate::coarsen::{coarsen, project, CoarsenParams};
use crate::constraints::{ConstraintSet, RelaxationSchedule, RelaxationShape};
use crate::graph::Hypergraph;
use crate::metrics::violation_of;
use crate::objective::{scratch, Policy, Scorer};
use crate::remap::{fractured_ilp_remap, greedy_remap, RemapObjective, DEFAULT_FRAGMENT_SIZE, DEFAULT_GREEDY_PHASES};
use crate::state::PartitionState;

/// Per-resource margins at `level` (0 = finest). The schedule's margin at
/// the level scales the base margins, so the finest level gets exactly
/// `base_margins` when they equal the schedule's final margin.
pub fn effective_margins(level: usize, num_levels: usize, schedule: &RelaxationSchedule, base_margins: &[f64]) -> Vec<f64> {
    let (lo, hi) = (schedule.final_margin, schedule.coarse_margin);
    let m = if num_levels <= 1 {
        lo
    } else {
        let x = level as f64 / (num_levels - 1) as f64;
        match schedule.shape {
            RelaxationShape::Linear => lo + (hi - lo) * x,
            RelaxationShape::Geometric => lo * (hi / lo).powf(x),
        }
    };
    base_margins.iter().map(|b| (b * m / lo).min(1.0)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct PassRecord {
    /// Applied moves with the personality each node had before moving.
    pub moves: Vec<(MoveChoice, usize)>,
    pub best_prefix: usize,
    pub cut_before: i64,
    pub violation_before: f64,
    pub best_cut: i64,
    pub best_violation: f64,
}

impl PassRecord {
    pub fn improvement(&self) -> i64 {
        self.cut_before - self.best_cut
    }

    /// True when the kept prefix is strictly better than the start.
    pub fn progressed(&self) -> bool {
        self.best_prefix > 0
    }
}

/// Selection settings shared by every pass of a level.
#[derive(Clone, Copy)]
pub struct PassSettings<'a> {
    pub bucket_kind: BucketKind,
    pub policy: Policy,
    pub dynamic: bool,
    pub margins: &'a [f64],
    pub constraints: &'a ConstraintSet,
}

/// One KLFM pass: move until no legal move remains, then roll back to the
/// prefix with the least margin violation, then the least cut, earliest
/// first. When the start state satisfies the margins the kept prefix is the
/// feasible one with minimum cut.
pub fn run_pass(graph: &Hypergraph, state: &mut PartitionState, settings: &PassSettings<'_>) -> PassRecord {
    let ctx = SelectContext {
        graph,
        scorer: Scorer::new(settings.constraints, graph.capable_resources()),
        policy: settings.policy,
        margins: settings.margins,
        dynamic: settings.dynamic,
    };
    let mut buckets = MoveBuckets::new(graph, state, settings.bucket_kind, &settings.constraints.capacities, settings.dynamic);
    let violation = |s: &PartitionState| violation_of(s.totals(0), s.totals(1), settings.margins);
    let cut_before = state.cut();
    let violation_before = violation(state);
    let (mut best_prefix, mut best_cut, mut best_violation) = (0, cut_before, violation_before);
    let mut moves = Vec::new();
    while let Some(choice) = buckets.select(state, &ctx) {
        let old = state.selected(choice.node);
        buckets.apply(graph, state, &choice);
        moves.push((choice, old));
        let (v, c) = (violation(state), state.cut());
        if v < best_violation || (v == best_violation && c < best_cut) {
            best_prefix = moves.len();
            best_cut = c;
            best_violation = v;
        }
    }
    for (choice, old) in moves[best_prefix..].iter().rev() {
        let back = 1 - choice.to_side;
        state.apply_move(graph, choice.node, back, *old).expect("undo of an applied move");
    }
    PassRecord {
        moves,
        best_prefix,
        cut_before,
        violation_before,
        best_cut,
        best_violation,
    }
}

/// Personality remap run between passes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PassRemap {
    pub policy: Policy,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RefineConfig {
    pub bucket_kind: BucketKind,
    pub policy: Policy,
    /// Personalities may change during moves and remaps.
    pub dynamic: bool,
    pub pass_remap: Option<PassRemap>,
    pub max_passes: usize,
    /// Use the constraint set's relaxation schedule across levels.
    pub relax: bool,
    /// Balance-only remap after the finest level if it ends infeasible.
    pub repair: bool,
    pub coarsen: CoarsenParams,
}

impl Default for RefineConfig {
    fn default() -> Self {
        RefineConfig {
            bucket_kind: BucketKind::MultiPersonality,
            policy: Policy::Imbalance,
            dynamic: true,
            pass_remap: None,
            max_passes: 16,
            relax: false,
            repair: true,
            coarsen: CoarsenParams::default(),
        }
    }
}

/// Passes (with the optional remap between them) until neither changes
/// anything or `max_passes` is reached. Returns the number of passes run.
pub fn refine_level(
    graph: &Hypergraph,
    state: &mut PartitionState,
    config: &RefineConfig,
    constraints: &ConstraintSet,
    margins: &[f64],
    seed: u64,
) -> usize {
    let settings = PassSettings {
        bucket_kind: config.bucket_kind,
        policy: config.policy,
        dynamic: config.dynamic,
        margins,
        constraints,
    };
    let mut passes = 0;
    while passes < config.max_passes {
        let record = run_pass(graph, state, &settings);
        passes += 1;
        let mut remapped = 0;
        if let (Some(pr), true) = (config.pass_remap, config.dynamic) {
            let obj = RemapObjective::new(pr.policy, Some(margins), constraints, graph.capable_resources());
            remapped = greedy_remap(graph, state, &obj, seed.wrapping_add(passes as u64), DEFAULT_GREEDY_PHASES);
        }
        if !record.progressed() && remapped == 0 {
            break;
        }
    }
    passes
}

/// Greedy initial bisection: nodes in seeded random order each go to the
/// side (and, when `dynamic`, the personality) that keeps the placed totals
/// best balanced. Returns the state and whether it meets `margins`.
pub fn initial_partition(
    graph: &Hypergraph,
    constraints: &ConstraintSet,
    margins: &[f64],
    policy: Policy,
    dynamic: bool,
    selections: Option<&[u32]>,
    seed: u64,
) -> (PartitionState, bool) {
    let n = graph.node_count();
    let r = graph.resource_count();
    let scorer = Scorer::new(constraints, graph.capable_resources());
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut side = vec![0u8; n];
    let mut sel: Vec<u32> = selections.map_or_else(|| vec![0; n], <[u32]>::to_vec);
    let mut t = [scratch(&[]), scratch(&[])];
    for v in order {
        let candidates = if dynamic { 0..graph.selectable_count(v) } else { sel[v] as usize..sel[v] as usize + 1 };
        let mut best: Option<(f64, u8, usize)> = None;
        for s in 0..2u8 {
            for p in candidates.clone() {
                let mut tt = t;
                for (x, w) in tt[s as usize][..r].iter_mut().zip(graph.weights(v, p)) {
                    *x += *w;
                }
                let (a, b) = (&tt[0][..r], &tt[1][..r]);
                let mut score = scorer.imbalance(a, b);
                if policy != Policy::Imbalance {
                    score += scorer.score(policy, a, b);
                }
                if best.is_none_or(|(bs, _, _)| score < bs) {
                    best = Some((score, s, p));
                }
            }
        }
        let (_, s, p) = best.expect("every node has a personality");
        for (x, w) in t[s as usize][..r].iter_mut().zip(graph.weights(v, p)) {
            *x += *w;
        }
        side[v] = s;
        sel[v] = p as u32;
    }
    let state = PartitionState::recompute(graph, side, sel).expect("valid assignment");
    let feasible = violation_of(state.totals(0), state.totals(1), margins) == 0.0;
    (state, feasible)
}

#[derive(Clone, Debug)]
pub struct PartitionOutcome {
    pub state: PartitionState,
    pub feasible: bool,
    pub violating_resources: Vec<usize>,
    pub levels: usize,
    /// Cut after refining the coarsest level, per level from coarsest to finest.
    pub level_cuts: Vec<i64>,
}

/// Coarsen, bisect the coarsest graph, then refine and project level by
/// level. `fixed` pins every node to the given personality for the whole
/// run; a non-dynamic config without it pins personality 0.
pub fn multilevel_partition(
    graph: &Hypergraph,
    constraints: &ConstraintSet,
    config: &RefineConfig,
    fixed: Option<&[u32]>,
    seed: u64,
) -> PartitionOutcome {
    let zeros;
    let fixed = match fixed {
        None if !config.dynamic => {
            zeros = vec![0u32; graph.node_count()];
            Some(&zeros[..])
        }
        f => f,
    };
    let params = CoarsenParams { seed, ..config.coarsen.clone() };
    let hierarchy = coarsen(graph, constraints, &params, fixed);
    let levels = hierarchy.num_levels();
    let schedule = if config.relax {
        constraints.relaxation
    } else {
        let m = constraints.relaxation.final_margin;
        RelaxationSchedule::none(m)
    };
    let margins_at = |l: usize| effective_margins(l, levels, &schedule, &constraints.margins);

    let top = levels - 1;
    // coarse supernodes always choose from their basis; with `fixed` that
    // basis holds a single entry
    let dynamic_at = |l: usize| l > 0 || (config.dynamic && fixed.is_none());
    let (mut state, _) = initial_partition(
        hierarchy.graph(top),
        constraints,
        &margins_at(top),
        config.policy,
        dynamic_at(top),
        if top == 0 { fixed } else { None },
        seed,
    );
    let mut level_cuts = Vec::with_capacity(levels);
    for l in (0..levels).rev() {
        let g = hierarchy.graph(l);
        let cfg = RefineConfig { dynamic: dynamic_at(l), ..config.clone() };
        refine_level(g, &mut state, &cfg, constraints, &margins_at(l), seed.wrapping_add(l as u64 * 7919));
        level_cuts.push(state.cut());
        if l > 0 {
            state = project(hierarchy.level(l), hierarchy.graph(l - 1), &state).expect("projection of a valid state");
        }
    }

    let base = &constraints.margins;
    let violation = |s: &PartitionState| violation_of(s.totals(0), s.totals(1), base);
    if violation(&state) > 0.0 && config.repair && dynamic_at(0) {
        let obj = RemapObjective::new(Policy::Imbalance, Some(base), constraints, graph.capable_resources());
        greedy_remap(graph, &mut state, &obj, seed ^ 0xA5A5, DEFAULT_GREEDY_PHASES);
        fractured_ilp_remap(graph, &mut state, &obj, DEFAULT_FRAGMENT_SIZE, 1, seed ^ 0x5A5A);
    }
    let report = crate::metrics::check_feasible(graph, &state, constraints, base);
    PartitionOutcome {
        feasible: report.feasible,
        violating_resources: report.violating_resources,
        state,
        levels,
        level_cuts,
    }
}
