//! Synthetic multi-personality netlists.
//!
//! Nodes sit on a square grid in id order and nets connect a driver to a
//! power-law number of nearby sinks, so the graphs have the locality of
//! placed netlists. Resource 0 is the common logic resource; every other
//! resource is a hard block that a node may alternatively implement in
//! common logic at a per-unit cost.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Binomial;
use serde::{Deserialize, Serialize};

use crate::constraints::DEFAULT_CAPACITIES;
use crate::error::{Error, Result};
use crate::graph::{Hyperedge, Hypergraph, Node, MAX_RESOURCES};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Clustering {
    Uniform,
    Clustered,
}

/// `min + Binomial(span, p)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightRange {
    pub min: i64,
    pub span: u64,
}

impl WeightRange {
    pub const fn new(min: i64, span: u64) -> Self {
        WeightRange { min, span }
    }

    fn draw(&self, p: f64, rng: &mut ChaCha8Rng) -> i64 {
        if self.span == 0 || p == 0.0 {
            return self.min;
        }
        self.min + Binomial::new(self.span, p).expect("validated p").sample(rng) as i64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkProfile {
    pub name: String,
    pub node_count: usize,
    /// Fraction of nodes with some personality using each resource.
    pub resource_fractions: Vec<f64>,
    pub clustering: Clustering,
    /// Chance that a hard-block node gets a second, lighter hard-block variant.
    pub second_variant_prob: f64,
    /// Fraction of hard-block nodes whose personality is fixed.
    pub locked_fraction: f64,
    /// Native weight of each resource (resource 0: logic-only nodes).
    pub native_weights: Vec<WeightRange>,
    /// Logic cost per hard-block unit when implemented in resource 0.
    pub logic_equivalent: Vec<WeightRange>,
    /// Logic glue around a hard block.
    pub glue: WeightRange,
    pub binomial_p: f64,
    /// When set, native unit counts of each hard resource are resized so
    /// that mapping every capable node onto it yields this multiple of the
    /// capacity-normalized logic demand. `None` keeps `native_weights`.
    pub supply_headroom: Option<f64>,
    pub nets_per_node: f64,
    pub max_fanout: usize,
    /// Share of nets whose sinks are drawn from the whole graph.
    pub global_net_fraction: f64,
    pub seed: u64,
}

/// (name, total nodes, % logic, % DSP, % BRAM, clustered)
const TABLE: [(&str, usize, f64, f64, f64, bool); 21] = [
    ("144", 144_649, 94.0, 20.0, 1.0, false),
    ("598a", 110_971, 98.0, 18.0, 0.5, false),
    ("blob", 11_842, 100.0, 24.0, 0.0, true),
    ("boundtop", 29_582, 100.0, 0.5, 14.0, true),
    ("brack2", 62_631, 99.0, 1.0, 8.0, false),
    ("cti", 16_840, 97.0, 14.0, 2.0, false),
    ("diffeq1", 4_292, 100.0, 38.0, 0.0, true),
    ("fe_ocean", 143_437, 97.0, 3.0, 3.0, false),
    ("fe_rotor", 99_617, 99.0, 2.5, 1.5, false),
    ("fe_tooth", 78_136, 98.0, 4.0, 4.0, false),
    ("fft128", 91_590, 100.0, 9.5, 0.5, true),
    ("isolation", 187_766, 100.0, 1.0, 0.0, true),
    ("jet", 189_579, 100.0, 32.0, 0.0, true),
    ("m14b", 214_765, 98.0, 3.0, 2.0, false),
    ("mcml", 346_248, 100.0, 15.0, 0.1, true),
    ("memplus", 17_758, 98.0, 2.0, 40.0, false),
    ("raygen", 11_457, 100.0, 25.0, 0.1, true),
    ("rct", 241_349, 100.0, 31.0, 12.0, true),
    ("sha", 3_669, 100.0, 15.0, 0.0, true),
    ("wave", 156_317, 98.0, 6.0, 5.0, false),
    ("wing", 62_032, 99.0, 4.0, 2.5, false),
];

pub fn preset_names() -> Vec<&'static str> {
    TABLE.iter().map(|t| t.0).collect()
}

impl BenchmarkProfile {
    /// A profile for one of the 21 reference circuits, with the default
    /// weight model and seed 0.
    pub fn preset(name: &str) -> Option<Self> {
        let &(name, n, clb, dsp, bram, clustered) = TABLE.iter().find(|t| t.0 == name)?;
        Some(BenchmarkProfile {
            name: name.to_string(),
            node_count: n,
            resource_fractions: vec![clb / 100.0, dsp / 100.0, bram / 100.0],
            clustering: if clustered { Clustering::Clustered } else { Clustering::Uniform },
            ..Self::default()
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidProfile(m));
        let r = self.resource_fractions.len();
        if r == 0 || r > MAX_RESOURCES {
            return bad(format!("resource count {r} outside 1..={MAX_RESOURCES}"));
        }
        if self.node_count < 2 {
            return bad("need at least two nodes".into());
        }
        if let Some(f) = self.resource_fractions.iter().find(|f| !(0.0..=1.0).contains(*f)) {
            return bad(format!("fraction {f} outside [0, 1]"));
        }
        if self.native_weights.len() < r || self.logic_equivalent.len() < r {
            return bad("weight ranges must cover every resource".into());
        }
        if self.native_weights.iter().chain(&self.logic_equivalent).chain([&self.glue]).any(|w| w.min < 0) {
            return bad("weight minimums must be non-negative".into());
        }
        if self.native_weights[..r].iter().any(|w| w.min < 1) {
            return bad("native weights need a minimum of at least 1".into());
        }
        for (what, x) in [
            ("binomial p", self.binomial_p),
            ("second variant probability", self.second_variant_prob),
            ("locked fraction", self.locked_fraction),
            ("global net fraction", self.global_net_fraction),
        ] {
            if !(0.0..=1.0).contains(&x) {
                return bad(format!("{what} {x} outside [0, 1]"));
            }
        }
        if self.supply_headroom.is_some_and(|h| !(h > 0.0)) {
            return bad("supply headroom must be positive".into());
        }
        if !(self.nets_per_node > 0.0) || self.max_fanout == 0 {
            return bad("need positive net density and fanout".into());
        }
        let specialized: usize = (1..r).map(|i| self.count(i)).sum();
        if self.node_count - self.count(0) > specialized {
            return bad("nodes without the common resource must use another resource".into());
        }
        Ok(())
    }

    fn count(&self, r: usize) -> usize {
        (self.resource_fractions[r] * self.node_count as f64).round() as usize
    }
}

impl Default for BenchmarkProfile {
    fn default() -> Self {
        BenchmarkProfile {
            name: "custom".into(),
            node_count: 10_000,
            resource_fractions: vec![1.0, 0.1, 0.02],
            clustering: Clustering::Uniform,
            second_variant_prob: 0.3,
            locked_fraction: 0.1,
            native_weights: vec![WeightRange::new(4, 60), WeightRange::new(1, 3), WeightRange::new(1, 3)],
            logic_equivalent: vec![WeightRange::new(0, 0), WeightRange::new(120, 160), WeightRange::new(150, 300)],
            glue: WeightRange::new(0, 8),
            binomial_p: 0.35,
            supply_headroom: Some(1.5),
            nets_per_node: 1.0,
            max_fanout: 64,
            global_net_fraction: 0.03,
            seed: 0,
        }
    }
}

struct Grid {
    width: usize,
    n: usize,
}

impl Grid {
    fn pos(&self, v: usize) -> (i64, i64) {
        ((v % self.width) as i64, (v / self.width) as i64)
    }

    fn at(&self, x: i64, y: i64) -> Option<usize> {
        if x < 0 || y < 0 || x >= self.width as i64 {
            return None;
        }
        let v = y as usize * self.width + x as usize;
        (v < self.n).then_some(v)
    }
}

fn pick_set(grid: &Grid, count: usize, mode: Clustering, rng: &mut ChaCha8Rng) -> Vec<bool> {
    let n = grid.n;
    let mut chosen = vec![false; n];
    if count >= n {
        return vec![true; n];
    }
    match mode {
        Clustering::Uniform => {
            for v in rand::seq::index::sample(rng, n, count) {
                chosen[v] = true;
            }
        }
        Clustering::Clustered => {
            let cluster = (count / 12).clamp(8, 2000);
            let mut got = 0;
            while got < count {
                let size = cluster.min(count - got);
                let (cx, cy) = grid.pos(rng.random_range(0..n));
                let mut rad = ((size as f64).sqrt() / 2.0).ceil() as i64;
                loop {
                    let mut cells: Vec<(i64, usize)> = Vec::new();
                    for dy in -rad..=rad {
                        for dx in -rad..=rad {
                            if let Some(v) = grid.at(cx + dx, cy + dy) {
                                if !chosen[v] {
                                    cells.push((dx.abs() + dy.abs(), v));
                                }
                            }
                        }
                    }
                    if cells.len() >= size || rad as usize > grid.width + n / grid.width {
                        cells.sort_unstable();
                        for &(_, v) in cells.iter().take(size) {
                            chosen[v] = true;
                            got += 1;
                        }
                        break;
                    }
                    rad += 1;
                }
            }
        }
    }
    chosen
}

/// Builds the graph described by `profile`. Deterministic under its seed.
pub fn generate(profile: &BenchmarkProfile) -> Result<Hypergraph> {
    profile.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(profile.seed);
    let n = profile.node_count;
    let r = profile.resource_fractions.len();
    let p = profile.binomial_p;
    let grid = Grid { width: (n as f64).sqrt().ceil() as usize, n };

    let sets: Vec<Vec<bool>> = (1..r)
        .map(|i| pick_set(&grid, profile.count(i), profile.clustering, &mut rng))
        .collect();
    let hard: Vec<usize> = (0..n).filter(|&v| sets.iter().any(|s| s[v])).collect();
    let no_logic = n - profile.count(0);
    if no_logic > hard.len() {
        return Err(Error::InvalidProfile("too few hard-block nodes for the logic fraction".into()));
    }
    let mut logic_free = vec![false; n];
    for i in rand::seq::index::sample(&mut rng, hard.len(), no_logic) {
        logic_free[hard[i]] = true;
    }

    let native = native_ranges(profile, &sets, &logic_free);
    let mut nodes = Vec::with_capacity(n);
    for v in 0..n {
        let blocks: Vec<usize> = (1..r).filter(|&i| sets[i - 1][v]).collect();
        if blocks.is_empty() {
            let mut w = vec![0; r];
            w[0] = profile.native_weights[0].draw(p, &mut rng);
            nodes.push(Node::new(vec![w]));
            continue;
        }
        let free = logic_free[v];
        let mut pers: Vec<Vec<i64>> = Vec::new();
        let mut logic_cost = 0;
        for &i in &blocks {
            let units = native[i].draw(p, &mut rng);
            let per_unit = profile.logic_equivalent[i].draw(p, &mut rng);
            logic_cost += units * per_unit;
            let glue = if free { 0 } else { profile.glue.draw(p, &mut rng) };
            let mut w = vec![0; r];
            w[i] = units;
            w[0] = glue;
            pers.push(w.clone());
            if !free && blocks.len() == 1 && units >= 2 && rng.random_bool(profile.second_variant_prob) {
                let half = units / 2;
                w[0] = glue + (units - half) * per_unit;
                w[i] = half;
                pers.push(w);
            }
        }
        if !free {
            let mut w = vec![0; r];
            w[0] = logic_cost.max(1) + profile.glue.draw(p, &mut rng);
            pers.push(w);
        }
        let mut unique: Vec<Vec<i64>> = Vec::with_capacity(pers.len());
        for w in pers {
            if !unique.contains(&w) {
                unique.push(w);
            }
        }
        let locked = unique.len() > 1 && rng.random_bool(profile.locked_fraction);
        nodes.push(if locked { Node::locked(unique) } else { Node::new(unique) });
    }

    let edges = nets(profile, &grid, &mut rng);
    Hypergraph::build(r, nodes, edges)
}

/// Native weight ranges, resized to the supply headroom when one is set.
///
/// Estimates the normalized utilization `x` at which every resource sits on
/// the target ratio: scarce resources get `headroom * x * cap` units in
/// total, resources whose one-unit minimum already exceeds that stay at one
/// unit per node, and the surplus of both is charged to logic at its logic
/// equivalent.
fn native_ranges(profile: &BenchmarkProfile, sets: &[Vec<bool>], logic_free: &[bool]) -> Vec<WeightRange> {
    let mut out = profile.native_weights.clone();
    let Some(headroom) = profile.supply_headroom else {
        return out;
    };
    let p = profile.binomial_p;
    let mean = |w: &WeightRange| w.min as f64 + w.span as f64 * p;
    let n = logic_free.len();
    let plain = (0..n).filter(|&v| sets.iter().all(|s| !s[v])).count();
    let glued = (0..n).filter(|&v| !logic_free[v] && sets.iter().any(|s| s[v])).count();
    let logic = plain as f64 * mean(&profile.native_weights[0]) + glued as f64 * mean(&profile.glue);
    let cap = |r: usize| DEFAULT_CAPACITIES.get(r).copied().unwrap_or(1.0);
    let counts: Vec<f64> = sets.iter().map(|s| s.iter().filter(|&&b| b).count() as f64).collect();
    let equiv: Vec<f64> = (1..=sets.len()).map(|r| mean(&profile.logic_equivalent[r])).collect();

    let mut surplus = vec![false; sets.len()];
    let mut x = 0.0;
    for _ in 0..=sets.len() {
        let (mut num, mut den) = (logic, cap(0));
        for i in 0..sets.len() {
            let (c, e) = (cap(i + 1), equiv[i]);
            if surplus[i] {
                num += counts[i] * e;
                den += c * e;
            } else {
                den -= (headroom - 1.0) * c * e;
            }
        }
        if den <= 0.0 || num <= 0.0 {
            return out;
        }
        x = num / den;
        let next: Vec<bool> = (0..sets.len()).map(|i| counts[i] >= headroom * x * cap(i + 1)).collect();
        if next == surplus {
            break;
        }
        surplus = next;
    }
    for i in 0..sets.len() {
        if counts[i] == 0.0 {
            continue;
        }
        let units = headroom * x * cap(i + 1) / counts[i];
        let min = ((units / 2.0).round() as i64).max(1);
        let span = if p > 0.0 { ((units - min as f64) / p).round().max(0.0) as u64 } else { 0 };
        out[i + 1] = WeightRange::new(min, span);
    }
    out
}

fn nets(profile: &BenchmarkProfile, grid: &Grid, rng: &mut ChaCha8Rng) -> Vec<Hyperedge> {
    let n = grid.n;
    let kmax = profile.max_fanout.min(n - 1);
    let fanout = WeightedIndex::new((1..=kmax).map(|k| (k as f64).powf(-2.2))).expect("non-empty weights");
    let m = (profile.nets_per_node * n as f64).round() as usize;
    let mut edges = Vec::with_capacity(m);
    let mut pins = Vec::new();
    for i in 0..m {
        let driver = if i < n { i } else { rng.random_range(0..n) };
        let k = fanout.sample(rng) + 1;
        pins.clear();
        pins.push(driver);
        if rng.random_bool(profile.global_net_fraction) {
            while pins.len() <= k {
                let v = rng.random_range(0..n);
                if !pins.contains(&v) {
                    pins.push(v);
                }
            }
        } else {
            let (x, y) = grid.pos(driver);
            let mut rad = 1 + (k as f64).sqrt() as i64;
            let max_rad = (grid.width + n / grid.width + 1) as i64;
            let mut misses = 0u32;
            while pins.len() <= k {
                let v = grid.at(x + rng.random_range(-rad..=rad), y + rng.random_range(-rad..=rad));
                match v {
                    Some(v) if !pins.contains(&v) => pins.push(v),
                    _ => {
                        misses += 1;
                        if misses.is_multiple_of(8) && rad < max_rad {
                            rad += 1;
                        }
                    }
                }
            }
        }
        pins.sort_unstable();
        let weight = 1 + Binomial::new(3, 0.1).unwrap().sample(rng) as i64;
        edges.push(Hyperedge::new(weight, pins.clone()));
    }
    edges
}

/// Small random graph for tests: `n` nodes with 1..=`max_personalities`
/// distinct personalities (weights 0..=5), a few locked nodes, and `m`
/// nets of 2 to 4 pins with weights 1..=3.
pub fn random_small_graph(seed: u64, n: usize, m: usize, r: usize, max_personalities: usize) -> Hypergraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes = (0..n)
        .map(|_| {
            let k = rng.random_range(1..=max_personalities.max(1));
            let mut pers: Vec<Vec<i64>> = Vec::with_capacity(k);
            while pers.len() < k {
                let w: Vec<i64> = (0..r).map(|_| rng.random_range(0..=5)).collect();
                if w.iter().any(|&x| x > 0) && !pers.contains(&w) {
                    pers.push(w);
                }
            }
            if rng.random_bool(0.15) {
                Node::locked(pers)
            } else {
                Node::new(pers)
            }
        })
        .collect();
    let mut ids: Vec<usize> = (0..n).collect();
    let edges = if n < 2 {
        Vec::new()
    } else {
        (0..m)
            .map(|_| {
                let size = rng.random_range(2..=4.min(n));
                ids.shuffle(&mut rng);
                Hyperedge::new(rng.random_range(1..=3), ids[..size].to_vec())
            })
            .collect()
    };
    Hypergraph::build(r, nodes, edges).expect("random graph is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn touch_fractions(g: &Hypergraph) -> Vec<f64> {
        let r = g.resource_count();
        (0..r)
            .map(|i| {
                let c = (0..g.node_count())
                    .filter(|&v| (0..g.personality_count(v)).any(|p| g.weights(v, p)[i] > 0))
                    .count();
                c as f64 / g.node_count() as f64
            })
            .collect()
    }

    #[test]
    fn presets_cover_the_table() {
        assert_eq!(preset_names().len(), 21);
        for name in preset_names() {
            let p = BenchmarkProfile::preset(name).unwrap();
            p.validate().unwrap();
        }
        assert!(BenchmarkProfile::preset("nope").is_none());
    }

    #[test]
    fn jet_like_fractions_within_tolerance() {
        let mut p = BenchmarkProfile::preset("jet").unwrap();
        p.node_count = 20_000;
        let g = generate(&p).unwrap();
        assert_eq!(g.node_count(), 20_000);
        let f = touch_fractions(&g);
        for (got, want) in f.iter().zip(&p.resource_fractions) {
            assert!((got - want).abs() <= 0.02, "{f:?}");
        }
    }

    #[test]
    fn all_presets_scaled_down_hit_fractions() {
        for name in preset_names() {
            let mut p = BenchmarkProfile::preset(name).unwrap();
            p.node_count = 3000;
            p.seed = 5;
            let g = generate(&p).unwrap();
            let f = touch_fractions(&g);
            for (got, want) in f.iter().zip(&p.resource_fractions) {
                assert!((got - want).abs() <= 0.02, "{name}: {f:?}");
            }
            // two-pin nets dominate
            let two = (0..g.edge_count()).filter(|&e| g.pins(e).len() == 2).count();
            assert!(two * 2 > g.edge_count(), "{name}");
        }
    }

    #[test]
    fn zero_p_gives_minimum_weights() {
        let p = BenchmarkProfile { node_count: 500, binomial_p: 0.0, ..BenchmarkProfile::preset("cti").unwrap() };
        let g = generate(&p).unwrap();
        for v in 0..g.node_count() {
            for q in 0..g.personality_count(v) {
                let w = g.weights(v, q);
                let hard: Vec<usize> = (1..3).filter(|&i| w[i] > 0).collect();
                if hard.is_empty() && g.personality_count(v) == 1 {
                    assert_eq!(w[0], p.native_weights[0].min);
                }
                for i in hard {
                    assert_eq!(w[i], p.native_weights[i].min);
                }
            }
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let p = BenchmarkProfile { node_count: 800, seed: 3, ..BenchmarkProfile::preset("memplus").unwrap() };
        assert_eq!(generate(&p).unwrap(), generate(&p).unwrap());
        let q = BenchmarkProfile { seed: 4, ..p.clone() };
        assert_ne!(generate(&p).unwrap(), generate(&q).unwrap());
    }

    #[test]
    fn impossible_profiles_rejected() {
        let p = BenchmarkProfile { resource_fractions: vec![1.0, 1.2, 0.0], ..Default::default() };
        assert!(matches!(generate(&p), Err(Error::InvalidProfile(_))));
        let p = BenchmarkProfile { resource_fractions: vec![0.5, 0.1, 0.0], ..Default::default() };
        assert!(matches!(generate(&p), Err(Error::InvalidProfile(_))));
    }

    #[test]
    fn personality_shapes() {
        let mut p = BenchmarkProfile::preset("blob").unwrap();
        p.node_count = 2000;
        let g = generate(&p).unwrap();
        for v in 0..g.node_count() {
            let k = g.personality_count(v);
            assert!((1..=3).contains(&k));
            if k > 1 {
                // last personality is logic-only
                let w = g.weights(v, k - 1);
                assert!(w[0] > 0 && w[1..].iter().all(|&x| x == 0));
            }
        }
    }
}
