//! The six partitioning strategies and the best-of-N driver.

use std::fmt;
use std::str::FromStr;
use web_time::Instant;

use serde::{Deserialize, Serialize};

use crate::buckets::BucketKind;
use crate::coarsen::CoarsenParams;
use crate::constraints::{ConstraintSet, RelaxationSchedule};
use crate::error::{Error, Result};
use crate::graph::Hypergraph;
use crate::metrics::{check_feasible, violation_of};
use crate::objective::Policy;
use crate::refine::{multilevel_partition, PassRemap, RefineConfig};
use crate::remap::{
    eligible_nodes, fractured_ilp_remap, fractured_ilp_remap_nodes, greedy_remap, greedy_remap_nodes, remap_to_common_resource,
    RemapObjective, DEFAULT_FRAGMENT_SIZE, DEFAULT_GREEDY_PHASES, DEFAULT_ROUNDS,
};
use crate::state::PartitionState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StrategyKind {
    #[serde(rename = "SM")]
    Sm,
    #[serde(rename = "SP")]
    Sp,
    #[serde(rename = "DMP")]
    Dmp,
    #[serde(rename = "ADMP")]
    Admp,
    #[serde(rename = "DMP-FR")]
    DmpFr,
    #[serde(rename = "ADMP-FR")]
    AdmpFr,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 6] = [Self::Sm, Self::Sp, Self::Dmp, Self::Admp, Self::DmpFr, Self::AdmpFr];

    pub fn name(self) -> &'static str {
        match self {
            Self::Sm => "SM",
            Self::Sp => "SP",
            Self::Dmp => "DMP",
            Self::Admp => "ADMP",
            Self::DmpFr => "DMP-FR",
            Self::AdmpFr => "ADMP-FR",
        }
    }

    fn advanced(self) -> bool {
        matches!(self, Self::Admp | Self::AdmpFr)
    }

    fn fine_ratio(self) -> bool {
        matches!(self, Self::DmpFr | Self::AdmpFr)
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let k = s.to_ascii_lowercase().replace('_', "-");
        Ok(match k.as_str() {
            "sm" => Self::Sm,
            "sp" => Self::Sp,
            "dmp" => Self::Dmp,
            "admp" => Self::Admp,
            "dmp-fr" => Self::DmpFr,
            "admp-fr" => Self::AdmpFr,
            _ => return Err(Error::Usage(format!("unknown strategy '{s}'"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyConfig {
    pub kind: StrategyKind,
    pub runs: usize,
    pub constraints: ConstraintSet,
    pub seed: u64,
    pub max_passes: usize,
    pub coarsest_size: usize,
    /// Weight of the imbalance term in the fine-ratio variants.
    pub fr_alpha: f64,
    pub fragment_size: usize,
    pub remap_rounds: usize,
    /// Run the independent runs on the rayon pool.
    pub parallel: bool,
}

impl StrategyConfig {
    /// 50 runs, 1% margins, equal utilization target, default capacities.
    pub fn new(kind: StrategyKind, resource_count: usize) -> Self {
        let mut constraints = ConstraintSet::uniform(resource_count, 0.01);
        constraints.relaxation = RelaxationSchedule::default();
        StrategyConfig {
            kind,
            runs: 50,
            constraints,
            seed: 0,
            max_passes: 16,
            coarsest_size: CoarsenParams::default().coarsest_size,
            fr_alpha: 0.5,
            fragment_size: DEFAULT_FRAGMENT_SIZE,
            remap_rounds: DEFAULT_ROUNDS,
            parallel: true,
        }
    }

    /// Sets every final margin to `margin`; the coarse end of the relaxation
    /// schedule never drops below it.
    pub fn with_margin(mut self, margin: f64) -> Self {
        let c = &mut self.constraints;
        c.margins = vec![margin; c.margins.len()];
        c.relaxation.final_margin = margin;
        c.relaxation.coarse_margin = c.relaxation.coarse_margin.max(margin);
        self
    }

    pub fn validate(&self, resource_count: usize) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::Usage("runs must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.fr_alpha) {
            return Err(Error::Usage("alpha must lie in [0, 1]".into()));
        }
        self.constraints.validate(resource_count)
    }

    fn move_policy(&self) -> Policy {
        if self.kind.fine_ratio() {
            Policy::Weighted(self.fr_alpha)
        } else {
            Policy::Imbalance
        }
    }

    /// Refinement wiring for the strategy.
    pub fn refine_config(&self) -> RefineConfig {
        let base = RefineConfig {
            max_passes: self.max_passes,
            coarsen: CoarsenParams { coarsest_size: self.coarsest_size, ..CoarsenParams::default() },
            ..RefineConfig::default()
        };
        match self.kind {
            StrategyKind::Sm => RefineConfig {
                bucket_kind: BucketKind::ResourceAffinity,
                dynamic: false,
                repair: false,
                ..base
            },
            StrategyKind::Sp => RefineConfig {
                bucket_kind: BucketKind::MultiPersonality,
                dynamic: false,
                repair: false,
                ..base
            },
            k => RefineConfig {
                bucket_kind: if k.advanced() { BucketKind::Hybrid } else { BucketKind::ResourceAffinity },
                policy: self.move_policy(),
                dynamic: true,
                pass_remap: Some(PassRemap { policy: self.move_policy() }),
                relax: k.advanced(),
                repair: true,
                ..base
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub cut: i64,
    pub feasible: bool,
    pub violation: f64,
    pub violating_resources: Vec<usize>,
    pub per_resource_imbalance: Vec<f64>,
    pub imbalance_score: f64,
    pub rur_deviation: f64,
    pub totals: [Vec<i64>; 2],
    pub levels: usize,
    pub wall_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BestState {
    pub sides: Vec<u8>,
    pub selections: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultReport {
    pub benchmark: String,
    pub strategy: StrategyKind,
    pub config: StrategyConfig,
    pub node_count: usize,
    pub edge_count: usize,
    pub runs: Vec<RunRecord>,
    pub best_run_index: usize,
    /// No run met the final margins; the best run is the least violating.
    pub all_infeasible: bool,
    pub best_state: BestState,
    /// Shared setup time (the pre-partition remap of SM).
    pub setup_ms: f64,
    pub total_ms: f64,
}

impl ResultReport {
    pub fn best(&self) -> &RunRecord {
        &self.runs[self.best_run_index]
    }

    /// Average wall time of one run including its share of the setup.
    pub fn time_per_run_ms(&self) -> f64 {
        self.total_ms / self.runs.len() as f64
    }
}

/// Selections SM partitions with: the whole-graph remap toward the target
/// utilization ratio.
pub fn static_mapping(graph: &Hypergraph, config: &StrategyConfig) -> Vec<u32> {
    let c = &config.constraints;
    let mut s = PartitionState::all_on_one_side(graph);
    let obj = RemapObjective::new(Policy::Rur, None, c, graph.capable_resources());
    greedy_remap(graph, &mut s, &obj, config.seed, DEFAULT_GREEDY_PHASES);
    fractured_ilp_remap(graph, &mut s, &obj, config.fragment_size, config.remap_rounds, config.seed);
    s.selections().to_vec()
}

fn post_remap(graph: &Hypergraph, state: &mut PartitionState, config: &StrategyConfig, seed: u64) {
    let c = &config.constraints;
    let used = graph.capable_resources();
    match config.kind {
        StrategyKind::Sm => {}
        StrategyKind::Sp => {
            // each partition in turn, the other one held fixed
            let obj = RemapObjective::new(Policy::Weighted(0.5), Some(&c.margins), c, used);
            for side in 0..2u8 {
                let nodes: Vec<u32> = eligible_nodes(graph).into_iter().filter(|&v| state.side(v as usize) == side).collect();
                let s = seed.wrapping_add(side as u64);
                greedy_remap_nodes(graph, state, &obj, s, DEFAULT_GREEDY_PHASES, nodes.clone());
                fractured_ilp_remap_nodes(graph, state, &obj, config.fragment_size, config.remap_rounds, s, &nodes);
            }
        }
        _ => {
            let obj = RemapObjective::new(Policy::Rur, Some(&c.margins), c, used);
            fractured_ilp_remap(graph, state, &obj, config.fragment_size, config.remap_rounds, seed);
        }
    }
}

fn run_once(graph: &Hypergraph, config: &StrategyConfig, refine: &RefineConfig, fixed: Option<&[u32]>, seed: u64) -> (RunRecord, PartitionState) {
    let start = Instant::now();
    let c = &config.constraints;
    let out = multilevel_partition(graph, c, refine, fixed, seed);
    let mut state = out.state;
    post_remap(graph, &mut state, config, seed);
    let report = check_feasible(graph, &state, c, &c.margins);
    let record = RunRecord {
        seed,
        cut: report.cut,
        feasible: report.feasible,
        violation: violation_of(state.totals(0), state.totals(1), &c.margins),
        violating_resources: report.violating_resources,
        per_resource_imbalance: report.per_resource_imbalance,
        imbalance_score: report.imbalance_score,
        rur_deviation: report.rur_deviation,
        totals: [state.totals(0).to_vec(), state.totals(1).to_vec()],
        levels: out.levels,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    (record, state)
}

/// Index of the accepted run: least cut among feasible runs (then lower
/// ratio deviation, then earlier), or the least violating run when none is
/// feasible.
pub fn best_run(runs: &[RunRecord]) -> (usize, bool) {
    let any_feasible = runs.iter().any(|r| r.feasible);
    let key = |r: &RunRecord| {
        if any_feasible {
            (if r.feasible { 0.0 } else { f64::INFINITY }, r.cut, r.rur_deviation)
        } else {
            (r.violation, r.cut, r.rur_deviation)
        }
    };
    let best = (0..runs.len())
        .min_by(|&a, &b| {
            let (ka, kb) = (key(&runs[a]), key(&runs[b]));
            ka.0.total_cmp(&kb.0).then(ka.1.cmp(&kb.1)).then(ka.2.total_cmp(&kb.2)).then(a.cmp(&b))
        })
        .expect("at least one run");
    (best, !any_feasible)
}

/// `config.runs` independent seeded runs; seeds are `config.seed + i`.
pub fn run_strategy(graph: &Hypergraph, benchmark: &str, config: &StrategyConfig) -> Result<ResultReport> {
    config.validate(graph.resource_count())?;
    let start = Instant::now();
    let fixed = match config.kind {
        StrategyKind::Sm => Some(static_mapping(graph, config)),
        StrategyKind::Sp => Some(remap_to_common_resource(graph, 0)),
        _ => None,
    };
    let setup_ms = start.elapsed().as_secs_f64() * 1e3;
    let refine = config.refine_config();
    let seeds: Vec<u64> = (0..config.runs as u64).map(|i| config.seed.wrapping_add(i)).collect();
    let one = |&seed: &u64| run_once(graph, config, &refine, fixed.as_deref(), seed);

    #[cfg(feature = "parallel")]
    let results: Vec<(RunRecord, PartitionState)> = if config.parallel {
        use rayon::prelude::*;
        seeds.par_iter().map(one).collect()
    } else {
        seeds.iter().map(one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<(RunRecord, PartitionState)> = seeds.iter().map(one).collect();

    let runs: Vec<RunRecord> = results.iter().map(|(r, _)| r.clone()).collect();
    let (best_run_index, all_infeasible) = best_run(&runs);
    let best = &results[best_run_index].1;
    Ok(ResultReport {
        benchmark: benchmark.to_string(),
        strategy: config.kind,
        config: config.clone(),
        node_count: graph.node_count(),
        edge_count: graph.edge_count(),
        best_state: BestState {
            sides: best.sides().to_vec(),
            selections: best.selections().to_vec(),
        },
        runs,
        best_run_index,
        all_infeasible,
        setup_ms,
        total_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// One benchmark × strategy line of a suite summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteRow {
    pub benchmark: String,
    pub strategy: StrategyKind,
    pub cut: i64,
    pub norm_cut_vs_sm: f64,
    pub rur_dev: f64,
    pub time_norm: f64,
    pub feasible: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategySummary {
    pub strategy: StrategyKind,
    pub norm_cut: f64,
    pub rur_deviation: f64,
    pub norm_time: f64,
    pub benchmarks: usize,
    pub infeasible: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub rows: Vec<SuiteRow>,
    pub strategies: Vec<StrategySummary>,
}

/// Smallest deviation entering a geometric mean.
pub const RUR_FLOOR: f64 = 1e-6;

pub fn geometric_mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = xs.into_iter().fold((0.0, 0usize), |(s, n), x| (s + x.ln(), n + 1));
    if n == 0 {
        f64::NAN
    } else {
        (sum / n as f64).exp()
    }
}

/// Cut ratio to the SM baseline; zero cuts compare as equal.
pub fn normalized_cut(cut: i64, sm_cut: i64) -> f64 {
    match (cut, sm_cut) {
        (0, 0) => 1.0,
        (c, 0) => (c + 1) as f64,
        (c, s) => c as f64 / s as f64,
    }
}

/// Per-strategy geometric means of SM-normalized cut and ratio deviation,
/// plus mean SM-normalized run time.
pub fn aggregate(reports: &[ResultReport]) -> Result<SuiteSummary> {
    let mut benchmarks: Vec<&str> = reports.iter().map(|r| r.benchmark.as_str()).collect();
    benchmarks.sort_unstable();
    benchmarks.dedup();
    let mut rows = Vec::new();
    for b in &benchmarks {
        let sm = reports
            .iter()
            .find(|r| r.benchmark == *b && r.strategy == StrategyKind::Sm)
            .ok_or_else(|| Error::MissingBaseline(b.to_string()))?;
        for r in reports.iter().filter(|r| r.benchmark == *b) {
            rows.push(SuiteRow {
                benchmark: b.to_string(),
                strategy: r.strategy,
                cut: r.best().cut,
                norm_cut_vs_sm: normalized_cut(r.best().cut, sm.best().cut),
                rur_dev: r.best().rur_deviation,
                time_norm: r.time_per_run_ms() / sm.time_per_run_ms().max(1e-9),
                feasible: !r.all_infeasible,
            });
        }
    }
    rows.sort_by(|a, b| a.benchmark.cmp(&b.benchmark).then(a.strategy.cmp(&b.strategy)));
    let strategies = StrategyKind::ALL
        .iter()
        .filter_map(|&k| {
            let mine: Vec<&SuiteRow> = rows.iter().filter(|r| r.strategy == k).collect();
            (!mine.is_empty()).then(|| StrategySummary {
                strategy: k,
                norm_cut: geometric_mean(mine.iter().map(|r| r.norm_cut_vs_sm)),
                rur_deviation: geometric_mean(mine.iter().map(|r| r.rur_dev.max(RUR_FLOOR))),
                norm_time: mine.iter().map(|r| r.time_norm).sum::<f64>() / mine.len() as f64,
                benchmarks: mine.len(),
                infeasible: mine.iter().filter(|r| !r.feasible).count(),
            })
        })
        .collect();
    Ok(SuiteSummary { rows, strategies })
}

impl SuiteSummary {
    pub fn strategy(&self, kind: StrategyKind) -> Option<&StrategySummary> {
        self.strategies.iter().find(|s| s.strategy == kind)
    }

    /// Strategies as columns, metrics as rows.
    pub fn table(&self) -> String {
        let mut out = format!("{:<16}", "");
        for s in &self.strategies {
            out += &format!("{:>9}", s.strategy.name());
        }
        out.push('\n');
        let mut line = |label: &str, f: &dyn Fn(&StrategySummary) -> String| {
            out += &format!("{label:<16}");
            for s in &self.strategies {
                out += &format!("{:>9}", f(s));
            }
            out.push('\n');
        };
        line("Norm. Cut Size", &|s| format!("{:.2}", s.norm_cut));
        line("RUR Deviation", &|s| format!("{:.1}%", s.rur_deviation * 100.0));
        line("Norm. Run Time", &|s| format!("{:.1}", s.norm_time));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::generate::{generate, BenchmarkProfile};
    use crate::test_util::random_graph;

    fn small(kind: StrategyKind, r: usize, runs: usize) -> StrategyConfig {
        StrategyConfig { runs, parallel: false, ..StrategyConfig::new(kind, r) }
    }

    #[test]
    fn names_round_trip() {
        for k in StrategyKind::ALL {
            assert_eq!(k.name().parse::<StrategyKind>().unwrap(), k);
            let json = serde_json::to_string(&k).unwrap();
            assert_eq!(json, format!("\"{}\"", k.name()));
        }
        assert_eq!("admp_fr".parse::<StrategyKind>().unwrap(), StrategyKind::AdmpFr);
        assert!("xyz".parse::<StrategyKind>().is_err());
    }

    #[test]
    fn single_run_is_deterministic() {
        let mut p = BenchmarkProfile::preset("sha").unwrap();
        p.node_count = 600;
        let g = generate(&p).unwrap();
        for k in StrategyKind::ALL {
            let c = StrategyConfig { seed: 3, ..small(k, 3, 1) };
            let a = run_strategy(&g, "sha", &c).unwrap();
            let b = run_strategy(&g, "sha", &c).unwrap();
            assert_eq!(a.runs.len(), 1);
            assert_eq!(a.best_state, b.best_state);
            assert_eq!(a.best().cut, b.best().cut);
        }
    }

    #[test]
    fn static_strategies_keep_selections() {
        let mut p = BenchmarkProfile::preset("cti").unwrap();
        p.node_count = 800;
        let g = generate(&p).unwrap();
        let c = small(StrategyKind::Sm, 3, 2);
        let fixed = static_mapping(&g, &c);
        let rep = run_strategy(&g, "cti", &c).unwrap();
        assert_eq!(rep.best_state.selections, fixed);

        let c = small(StrategyKind::Sp, 3, 1);
        let common = remap_to_common_resource(&g, 0);
        let out = multilevel_partition(&g, &c.constraints, &c.refine_config(), Some(&common), 0);
        assert_eq!(out.state.selections(), &common[..]);
    }

    #[test]
    fn sm_on_single_personality_graph_is_plain_klfm() {
        let g = random_graph(9, 40, 60, 2, 1);
        let mut c = small(StrategyKind::Sm, 2, 1);
        c.constraints = ConstraintSet::uniform(2, 0.3);
        let rep = run_strategy(&g, "x", &c).unwrap();
        let zeros = vec![0u32; g.node_count()];
        assert_eq!(rep.best_state.selections, zeros);
        let plain = multilevel_partition(&g, &c.constraints, &c.refine_config(), Some(&zeros), c.seed);
        assert_eq!(rep.best().cut, plain.state.cut());
    }

    #[test]
    fn best_run_rules() {
        let rec = |cut, feasible, dev, violation| RunRecord {
            seed: 0,
            cut,
            feasible,
            violation,
            violating_resources: vec![],
            per_resource_imbalance: vec![],
            imbalance_score: 0.0,
            rur_deviation: dev,
            totals: [vec![], vec![]],
            levels: 1,
            wall_ms: 0.0,
        };
        let runs = vec![rec(5, true, 0.3, 0.0), rec(3, false, 0.0, 0.1), rec(5, true, 0.1, 0.0)];
        assert_eq!(best_run(&runs), (2, false));
        let runs = vec![rec(5, false, 0.3, 0.2), rec(9, false, 0.0, 0.1)];
        assert_eq!(best_run(&runs), (1, true));
    }

    #[test]
    fn aggregation_examples() {
        assert!((geometric_mean([0.5, 2.0]) - 1.0).abs() < 1e-12);
        assert_eq!(normalized_cut(78, 100), 0.78);
        assert_eq!(normalized_cut(0, 0), 1.0);

        let g = random_graph(1, 10, 12, 2, 2);
        let mut c = small(StrategyKind::Sm, 2, 1);
        c.constraints = ConstraintSet::uniform(2, 0.4);
        let sm = run_strategy(&g, "b", &c).unwrap();
        let mut dmp = run_strategy(&g, "b", &StrategyConfig { kind: StrategyKind::Dmp, ..c.clone() }).unwrap();
        let idx = dmp.best_run_index;
        dmp.runs[idx].cut = 78;
        let mut sm100 = sm.clone();
        let i = sm100.best_run_index;
        sm100.runs[i].cut = 100;
        let s = aggregate(&[sm100.clone(), dmp.clone()]).unwrap();
        assert!((s.strategy(StrategyKind::Dmp).unwrap().norm_cut - 0.78).abs() < 1e-12);
        assert_eq!(s.strategy(StrategyKind::Sm).unwrap().norm_cut, 1.0);
        assert!(matches!(aggregate(&[dmp]), Err(Error::MissingBaseline(_))));
        assert!(s.table().contains("Norm. Cut Size"));
    }
}
