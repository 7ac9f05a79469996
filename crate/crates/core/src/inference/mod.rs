//! Hidden-object discovery on trajectory data.
//!
//! Each hidden object is an affine motion law fitted to the points it
//! explains. Objects are found by hard-EM annealing (reassign every point
//! to its best-fitting law, refit, repeat), grown one at a time by seeding
//! a new law on the worst-explained points, merged when a single law
//! explains two objects equally well, and scored with the object/affordance
//! entropy sum.

mod anneal;
mod bellman;
mod cie;
mod dataset;
mod fit;
mod grow;
mod structure;

pub use anneal::{
    anneal_split, initial_random_split, seed_new_object, transition_counts, AnnealDriver,
    AnnealOutcome, AnnealStep, StopReason, SystemModel,
};
pub use bellman::{bellman_update, bellman_value, BellmanDecision, BellmanStep, CandidateMove};
pub use cie::{cie_of_model, AffordanceEntropy, CieReport, Coefficients, ObjectWeighting};
pub use dataset::{estimate_a_mag, featurize, DataPoint, Dataset, Features, Target};
pub use fit::{fit_object, ObjectModel, RIDGE_LAMBDA};
pub use grow::{
    grow, growth_coefficients, pareto_check, relative_improvement, try_unify, GrowthOutcome, GrowthStep, MergeRecord, ParetoCheck,
};
pub use structure::{
    activation_timeline, affordance_edges, evaluate_against_truth, structure_learning_loop, AffordanceEdge,
    LedgerEntry, ModelDocument, ObjectSummary, RecoveryReport, StructureOutcome,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Losses at or below this are treated as an exact fit; relative
/// improvements measured from such a loss are zero.
pub const LOSS_FLOOR: f64 = 1e-18;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InferenceError {
    #[error("dataset has no usable samples")]
    EmptyDataset,
    #[error("sample t={t} has zero velocity and no heading")]
    ZeroVelocity { t: u64 },
    #[error("need at least {need} points, got {got}")]
    TooFewPoints { got: usize, need: usize },
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("invalid config field `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },
    #[error("model invariant violated: {0}")]
    Invariant(String),
}

/// How a proposed extra object is judged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GrowthCriterion {
    /// Relative decrease of the mean squared residual.
    #[default]
    Loss,
    /// Decrease of the total object/affordance entropy.
    Cie,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InferenceConfig {
    /// Relative improvement needed to accept an extra object.
    pub min_improvement: f64,
    pub max_objects: usize,
    pub max_anneal_iters: usize,
    /// Fraction of worst-explained points that seed a new object.
    pub seed_fraction: f64,
    /// Initial Metropolis temperature; zero gives deterministic hard EM.
    pub temperature0: f64,
    pub cooling_alpha: f64,
    /// Relative loss increase tolerated when merging two objects.
    pub unify_tolerance: f64,
    pub gamma: f64,
    pub seed: u64,
    pub min_fit_size: usize,
    pub velocity_guard: f64,
    pub criterion: GrowthCriterion,
    pub driver: AnnealDriver,
    /// Levels of grow-inside-an-object recursion.
    pub recursion_depth: usize,
    pub max_passes: usize,
    pub coefficients: Coefficients,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        Self {
            min_improvement: 0.05,
            max_objects: 8,
            max_anneal_iters: 100,
            seed_fraction: 0.2,
            temperature0: 0.0,
            cooling_alpha: 0.9,
            unify_tolerance: 0.01,
            gamma: 1.1,
            seed: 42,
            min_fit_size: 6,
            velocity_guard: 1e-8,
            criterion: GrowthCriterion::Loss,
            driver: AnnealDriver::HardEm,
            recursion_depth: 1,
            max_passes: 4,
            coefficients: Coefficients::default(),
        }
    }
}

impl InferenceConfig {
    pub fn validate(&self) -> Result<(), InferenceError> {
        let unit = |field: &'static str, v: f64, closed: bool| {
            let ok = v > 0.0 && (v < 1.0 || (closed && v == 1.0));
            if ok {
                Ok(())
            } else {
                Err(InferenceError::InvalidConfig {
                    field,
                    reason: format!("{v} outside (0, 1{}", if closed { "]" } else { ")" }),
                })
            }
        };
        unit("min_improvement", self.min_improvement, false)?;
        unit("seed_fraction", self.seed_fraction, true)?;
        unit("unify_tolerance", self.unify_tolerance, false)?;
        unit("cooling_alpha", self.cooling_alpha, true)?;
        if !(self.gamma > 0.0) {
            return Err(InferenceError::InvalidConfig {
                field: "gamma",
                reason: format!("{} must be positive", self.gamma),
            });
        }
        if !(self.temperature0 >= 0.0) {
            return Err(InferenceError::InvalidConfig {
                field: "temperature0",
                reason: format!("{} must be non-negative", self.temperature0),
            });
        }
        if self.max_objects == 0 {
            return Err(InferenceError::InvalidConfig {
                field: "max_objects",
                reason: "must be at least 1".into(),
            });
        }
        if self.min_fit_size == 0 {
            return Err(InferenceError::InvalidConfig {
                field: "min_fit_size",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}
