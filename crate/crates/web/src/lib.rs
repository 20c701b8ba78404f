//! Browser bindings. Each export takes plain values and returns a JSON
//! string; the `*_json` functions hold the logic so they can be tested
//! natively.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use mpart::harness::generate::{generate, BenchmarkProfile, Clustering};
use mpart::harness::mph::{parse_mph, to_mph_string};
use mpart::refine::effective_margins;
use mpart::strategy::aggregate;
use mpart::{run_strategy, Hypergraph, RelaxationSchedule, RelaxationShape, StrategyConfig, StrategyKind};

/// Largest graph the page will partition; keeps the tab responsive.
const MAX_NODES: usize = 20_000;

fn err(e: impl ToString) -> String {
    e.to_string()
}

fn small_profile(nodes: usize, dsp: f64, bram: f64, clustered: bool, seed: u64) -> Result<BenchmarkProfile, String> {
    if nodes > MAX_NODES {
        return Err(format!("at most {MAX_NODES} nodes in the browser"));
    }
    let profile = BenchmarkProfile {
        name: "demo".into(),
        node_count: nodes,
        resource_fractions: vec![1.0, dsp, bram],
        clustering: if clustered { Clustering::Clustered } else { Clustering::Uniform },
        seed,
        ..BenchmarkProfile::default()
    };
    profile.validate().map_err(err)?;
    Ok(profile)
}

pub fn generate_json(nodes: usize, dsp: f64, bram: f64, clustered: bool, seed: u64) -> Result<String, String> {
    let g = generate(&small_profile(nodes, dsp, bram, clustered, seed)?).map_err(err)?;
    Ok(to_mph_string(&g))
}

#[derive(Serialize)]
struct PartitionView {
    strategy: &'static str,
    cut: i64,
    feasible: bool,
    imbalance: Vec<f64>,
    rur_deviation: f64,
    totals: [Vec<i64>; 2],
    /// Nodes per side, and how many use a non-default personality.
    side_sizes: [usize; 2],
    remapped: usize,
    ms: f64,
}

fn config(kind: StrategyKind, g: &Hypergraph, runs: usize, imbalance: f64, seed: u64) -> Result<StrategyConfig, String> {
    let c = StrategyConfig { runs, seed, parallel: false, ..StrategyConfig::new(kind, g.resource_count()) }.with_margin(imbalance);
    c.validate(g.resource_count()).map_err(err)?;
    Ok(c)
}

pub fn partition_json(mph: &str, strategy: &str, runs: usize, imbalance: f64, seed: u64) -> Result<String, String> {
    let g = parse_mph(mph).map_err(err)?;
    if g.node_count() > MAX_NODES {
        return Err(format!("at most {MAX_NODES} nodes in the browser"));
    }
    let kind: StrategyKind = strategy.parse().map_err(err)?;
    let report = run_strategy(&g, "input", &config(kind, &g, runs, imbalance, seed)?).map_err(err)?;
    let best = report.best();
    let sides = &report.best_state.sides;
    let ones = sides.iter().filter(|&&s| s == 1).count();
    let view = PartitionView {
        strategy: kind.name(),
        cut: best.cut,
        feasible: best.feasible,
        imbalance: best.per_resource_imbalance.clone(),
        rur_deviation: best.rur_deviation,
        totals: best.totals.clone(),
        side_sizes: [sides.len() - ones, ones],
        remapped: report.best_state.selections.iter().filter(|&&p| p != 0).count(),
        ms: report.total_ms,
    };
    serde_json::to_string(&view).map_err(err)
}

pub fn compare_json(mph: &str, runs: usize, imbalance: f64, seed: u64) -> Result<String, String> {
    let g = parse_mph(mph).map_err(err)?;
    if g.node_count() > MAX_NODES {
        return Err(format!("at most {MAX_NODES} nodes in the browser"));
    }
    let reports = StrategyKind::ALL
        .iter()
        .map(|&k| run_strategy(&g, "input", &config(k, &g, runs, imbalance, seed)?).map_err(err))
        .collect::<Result<Vec<_>, _>>()?;
    serde_json::to_string(&aggregate(&reports).map_err(err)?).map_err(err)
}

#[derive(Serialize)]
struct CurvePoint {
    level: usize,
    margin: f64,
}

/// Effective margin per level for a relaxation schedule (level 0 finest).
pub fn relaxation_json(levels: usize, coarse: f64, fine: f64, geometric: bool) -> Result<String, String> {
    let schedule = RelaxationSchedule {
        coarse_margin: coarse,
        final_margin: fine,
        shape: if geometric { RelaxationShape::Geometric } else { RelaxationShape::Linear },
    };
    schedule.validate().map_err(err)?;
    let points: Vec<CurvePoint> = (0..levels.max(1))
        .map(|l| CurvePoint { level: l, margin: effective_margins(l, levels.max(1), &schedule, &[fine])[0] })
        .collect();
    serde_json::to_string(&points).map_err(err)
}

#[wasm_bindgen]
pub fn generate_graph(nodes: usize, dsp: f64, bram: f64, clustered: bool, seed: u32) -> Result<String, JsValue> {
    generate_json(nodes, dsp, bram, clustered, seed as u64).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn partition(mph: &str, strategy: &str, runs: usize, imbalance: f64, seed: u32) -> Result<String, JsValue> {
    partition_json(mph, strategy, runs, imbalance, seed as u64).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn compare_strategies(mph: &str, runs: usize, imbalance: f64, seed: u32) -> Result<String, JsValue> {
    compare_json(mph, runs, imbalance, seed as u64).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn relaxation_curve(levels: usize, coarse: f64, fine: f64, geometric: bool) -> Result<String, JsValue> {
    relaxation_json(levels, coarse, fine, geometric).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn generated_graph_partitions() {
        let mph = generate_json(400, 0.2, 0.05, false, 3).unwrap();
        let v: Value = serde_json::from_str(&partition_json(&mph, "dmp", 2, 0.05, 1).unwrap()).unwrap();
        assert_eq!(v["strategy"], "DMP");
        assert!(v["cut"].as_i64().unwrap() > 0);
        let sizes = v["side_sizes"].as_array().unwrap();
        assert_eq!(sizes[0].as_u64().unwrap() + sizes[1].as_u64().unwrap(), 400);
    }

    #[test]
    fn comparison_has_every_strategy() {
        let mph = generate_json(300, 0.2, 0.0, true, 5).unwrap();
        let v: Value = serde_json::from_str(&compare_json(&mph, 1, 0.05, 0).unwrap()).unwrap();
        let names: Vec<&str> = v["strategies"].as_array().unwrap().iter().map(|s| s["strategy"].as_str().unwrap()).collect();
        assert_eq!(names, ["SM", "SP", "DMP", "ADMP", "DMP-FR", "ADMP-FR"]);
    }

    #[test]
    fn relaxation_runs_from_fine_to_coarse() {
        let v: Value = serde_json::from_str(&relaxation_json(5, 0.2, 0.01, false).unwrap()).unwrap();
        let m: Vec<f64> = v.as_array().unwrap().iter().map(|p| p["margin"].as_f64().unwrap()).collect();
        assert!((m[0] - 0.01).abs() < 1e-12);
        assert!((m[4] - 0.2).abs() < 1e-12);
        assert!(m.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn errors_are_messages() {
        assert!(partition_json("not a graph", "dmp", 1, 0.01, 0).is_err());
        let mph = generate_json(50, 0.2, 0.0, false, 0).unwrap();
        assert!(partition_json(&mph, "xyz", 1, 0.01, 0).unwrap_err().contains("unknown strategy"));
        assert!(partition_json(&mph, "sm", 1, 0.0, 0).is_err());
        assert!(generate_json(MAX_NODES + 1, 0.1, 0.0, false, 0).is_err());
    }
}
