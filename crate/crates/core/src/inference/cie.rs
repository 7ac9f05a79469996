use super::anneal::SystemModel;
use super::bellman::BellmanStep;
use super::dataset::{Dataset, Target};
use super::fit::residual_sigma;
use crate::entropy::{
    cie_total, extended_real, floored_gaussian_entropy_nats, CieTerms, DifferentialEntropy, Unit,
};
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

/// How object coefficients are spread across objects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectWeighting {
    /// Every object gets `object`.
    #[default]
    Uniform,
    /// Object `i` gets `object * n_i / n`.
    Occupancy,
}

/// Weighting coefficients for object and affordance terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Coefficients {
    pub object: f64,
    pub affordance: f64,
    pub weighting: ObjectWeighting,
}

impl Default for Coefficients {
    fn default() -> Self {
        Self {
            object: 1.0,
            affordance: 1.0,
            weighting: ObjectWeighting::Uniform,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffordanceEntropy {
    pub pair: (usize, usize),
    pub bits: f64,
}

/// Entropy breakdown of a fitted model.
///
/// Object entropies are Gaussian differential entropies of each object's
/// residuals in nats. Affordance entropies are the share, in bits, of the
/// transition distribution's Shannon entropy carried by the transitions
/// between two distinct objects. Totals are in nats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CieReport {
    pub per_object_h: Vec<DifferentialEntropy>,
    pub affordance_h: Vec<AffordanceEntropy>,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    /// Weighted sum; the degenerate sentinel propagates as negative infinity.
    #[serde(with = "extended_real")]
    pub total: f64,
    /// Weighted sum with every residual spread floored at the degenerate
    /// threshold, so exact fits still compare finitely.
    pub total_resolved: f64,
    #[serde(default)]
    pub bellman_trace: Vec<BellmanStep>,
}

impl CieReport {
    pub fn terms(&self) -> CieTerms {
        CieTerms {
            object_entropies: self
                .per_object_h
                .iter()
                .enumerate()
                .map(|(i, h)| (format!("A{i}"), h.nats))
                .collect(),
            coupling_entropies: self
                .affordance_h
                .iter()
                .map(|a| (format!("B{}{}", a.pair.0, a.pair.1), a.bits * LN_2))
                .collect(),
            c: self.c.clone(),
            d: self.d.clone(),
            unit: Unit::Nats,
        }
    }
}

pub fn cie_of_model(ds: &Dataset, model: &SystemModel, coeffs: &Coefficients) -> CieReport {
    let mut residuals: Vec<Vec<Target>> = vec![Vec::new(); model.k()];
    for (p, &a) in ds.points().iter().zip(&model.assignment) {
        residuals[a].push(model.objects[a].residual(p));
    }
    let sigmas: Vec<[f64; 2]> = residuals.iter().map(|r| residual_sigma(r)).collect();
    let per_object_h: Vec<DifferentialEntropy> =
        sigmas.iter().map(|s| DifferentialEntropy::from_sigmas(s)).collect();

    let total_transitions: u64 = model.transition_counts.iter().flatten().sum();
    let mut affordance_h = Vec::new();
    if total_transitions > 0 {
        let n = total_transitions as f64;
        let plogp = |count: u64| {
            let p = count as f64 / n;
            if p > 0.0 {
                -p * p.log2()
            } else {
                0.0
            }
        };
        for i in 0..model.k() {
            for j in (i + 1)..model.k() {
                let (ij, ji) = (model.transition_counts[i][j], model.transition_counts[j][i]);
                if ij + ji > 0 {
                    affordance_h.push(AffordanceEntropy {
                        pair: (i, j),
                        bits: plogp(ij) + plogp(ji),
                    });
                }
            }
        }
    }
    let c = match coeffs.weighting {
        ObjectWeighting::Uniform => vec![coeffs.object; per_object_h.len()],
        ObjectWeighting::Occupancy => residuals
            .iter()
            .map(|r| coeffs.object * r.len() as f64 / ds.len() as f64)
            .collect(),
    };
    let d = vec![coeffs.affordance; affordance_h.len()];
    let mut report = CieReport {
        per_object_h,
        affordance_h,
        c,
        d,
        total: 0.0,
        total_resolved: 0.0,
        bellman_trace: Vec::new(),
    };
    report.total = cie_total(&report.terms()).expect("coefficients align with terms");
    let mut resolved = report.terms();
    for (term, s) in resolved.object_entropies.iter_mut().zip(&sigmas) {
        term.1 = floored_gaussian_entropy_nats(s);
    }
    report.total_resolved = cie_total(&resolved).expect("coefficients align with terms");
    report
}
