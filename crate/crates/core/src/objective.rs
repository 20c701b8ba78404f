//! Scoring policies shared by move selection and remapping.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::constraints::ConstraintSet;
use crate::metrics::{imbalance_of, rur_pair_of, violation_of};

/// What a personality choice optimizes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    /// RMS fractional imbalance.
    Imbalance,
    /// RMS deviation from the target utilization ratio.
    Rur,
    /// `alpha * imbalance + (1 - alpha) * rur`.
    Weighted(f64),
}

/// Scores hypothetical partition totals.
#[derive(Clone, Copy, Debug)]
pub struct Scorer<'a> {
    pub constraints: &'a ConstraintSet,
    /// Resources that count towards the ratio score.
    pub used: &'a [bool],
}

impl<'a> Scorer<'a> {
    pub fn new(constraints: &'a ConstraintSet, used: &'a [bool]) -> Self {
        Scorer { constraints, used }
    }

    #[inline]
    pub fn imbalance(&self, t0: &[i64], t1: &[i64]) -> f64 {
        imbalance_of(t0, t1).unwrap_or(0.0)
    }

    #[inline]
    pub fn rur(&self, t0: &[i64], t1: &[i64]) -> f64 {
        rur_pair_of(t0, t1, self.constraints, self.used)
    }

    #[inline]
    pub fn score(&self, policy: Policy, t0: &[i64], t1: &[i64]) -> f64 {
        match policy {
            Policy::Imbalance => self.imbalance(t0, t1),
            Policy::Rur => self.rur(t0, t1),
            Policy::Weighted(a) => a * self.imbalance(t0, t1) + (1.0 - a) * self.rur(t0, t1),
        }
    }

    /// Lexicographic (margin violation, policy score). With `margins` unset
    /// only the score counts.
    #[inline]
    pub fn key(&self, policy: Policy, margins: Option<&[f64]>, t0: &[i64], t1: &[i64]) -> ObjectiveKey {
        ObjectiveKey {
            violation: margins.map_or(0.0, |m| violation_of(t0, t1, m)),
            score: self.score(policy, t0, t1),
        }
    }
}

/// Ordered first by balance violation, then by score.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveKey {
    pub violation: f64,
    pub score: f64,
}

impl ObjectiveKey {
    pub fn cmp(&self, other: &Self) -> Ordering {
        self.violation
            .total_cmp(&other.violation)
            .then(self.score.total_cmp(&other.score))
    }

    #[inline]
    pub fn lt(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Less
    }
}

/// Copies `t` into a stack buffer so callers can mutate hypothetical totals.
#[inline]
pub(crate) fn scratch(t: &[i64]) -> [i64; crate::graph::MAX_RESOURCES] {
    let mut buf = [0i64; crate::graph::MAX_RESOURCES];
    buf[..t.len()].copy_from_slice(t);
    buf
}
