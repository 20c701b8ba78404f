use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelaxationShape {
    Linear,
    Geometric,
}

/// How balance margins loosen with coarseness.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelaxationSchedule {
    pub coarse_margin: f64,
    pub final_margin: f64,
    pub shape: RelaxationShape,
}

impl Default for RelaxationSchedule {
    fn default() -> Self {
        RelaxationSchedule {
            coarse_margin: 0.20,
            final_margin: 0.01,
            shape: RelaxationShape::Linear,
        }
    }
}

impl RelaxationSchedule {
    /// A schedule that keeps `margin` at every level.
    pub fn none(margin: f64) -> Self {
        RelaxationSchedule {
            coarse_margin: margin,
            final_margin: margin,
            shape: RelaxationShape::Linear,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.final_margin > 0.0 && self.coarse_margin >= self.final_margin) {
            return Err(Error::InvalidConstraints(format!(
                "relaxation needs coarse_margin >= final_margin > 0, got {} / {}",
                self.coarse_margin, self.final_margin
            )));
        }
        Ok(())
    }
}

/// Balance margins, utilization-ratio target and device capacities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet {
    /// Per-resource imbalance limit as a fraction of the resource's total.
    pub margins: Vec<f64>,
    pub target_rur: Vec<f64>,
    pub capacities: Vec<f64>,
    pub relaxation: RelaxationSchedule,
}

/// Capacity ratio of a large heterogeneous device (LUTs, DSP slices,
/// 36Kb block RAMs of a Virtex-7 2000T class part).
pub const DEFAULT_CAPACITIES: [f64; 3] = [1_221_600.0, 2_160.0, 1_292.0];

impl ConstraintSet {
    /// 1% margins, equal utilization target, and the default device
    /// capacities (padded with 1.0 beyond three resources).
    pub fn uniform(resource_count: usize, margin: f64) -> Self {
        let capacities = (0..resource_count)
            .map(|r| DEFAULT_CAPACITIES.get(r).copied().unwrap_or(1.0))
            .collect();
        ConstraintSet {
            margins: vec![margin; resource_count],
            target_rur: vec![1.0; resource_count],
            capacities,
            relaxation: RelaxationSchedule::none(margin),
        }
    }

    pub fn resource_count(&self) -> usize {
        self.margins.len()
    }

    pub fn validate(&self, resource_count: usize) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidConstraints(what.to_string()));
        if self.margins.len() != resource_count
            || self.target_rur.len() != resource_count
            || self.capacities.len() != resource_count
        {
            return bad("vector lengths must equal the resource count");
        }
        if self.margins.iter().any(|&m| !(m > 0.0 && m <= 1.0)) {
            return bad("margins must lie in (0, 1]");
        }
        if self.target_rur.iter().any(|&t| !(t > 0.0)) {
            return bad("target ratio entries must be positive");
        }
        if self.capacities.iter().any(|&c| !(c > 0.0)) {
            return bad("capacities must be positive");
        }
        self.relaxation.validate()
    }
}
