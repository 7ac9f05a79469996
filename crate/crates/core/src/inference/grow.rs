use super::anneal::{anneal_split, AnnealOutcome, initial_random_split, seed_new_object, AnnealStep, SystemModel};
use super::bellman::BellmanStep;
use super::cie::{cie_of_model, Coefficients, ObjectWeighting};
use super::dataset::Dataset;
use super::fit::fit_object;
use super::{GrowthCriterion, InferenceConfig, InferenceError, LOSS_FLOOR};
use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

/// `(from - to) / from`, or zero once `from` is already an exact fit.
pub fn relative_improvement(from: f64, to: f64) -> f64 {
    if from <= LOSS_FLOOR {
        0.0
    } else {
        (from - to) / from
    }
}

/// Entropy totals can be negative or near zero, so the decrease is scaled by
/// `max(|from|, 1)`.
fn cie_improvement(from: f64, to: f64) -> f64 {
    (from - to) / from.abs().max(1.0)
}

/// One proposal to add an object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthStep {
    pub k_from: usize,
    pub k_proposed: usize,
    /// Objects left after annealing the proposal (empty ones are dropped).
    pub k_result: usize,
    pub loss_before: f64,
    pub loss_after: f64,
    pub cie_before: f64,
    pub cie_after: f64,
    pub improvement: f64,
    pub criterion: GrowthCriterion,
    pub accepted: bool,
    /// The proposal lost its extra object but still improved enough, so it
    /// replaced the current model at the same object count.
    pub refined: bool,
    /// Merges applied to the annealed proposal before it was scored.
    pub merged: usize,
    pub anneal_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthOutcome {
    pub model: SystemModel,
    pub baseline_loss: f64,
    pub steps: Vec<GrowthStep>,
    /// Annealing traces of every proposal, in order.
    pub anneal_traces: Vec<Vec<AnnealStep>>,
    /// Value trace of the last accepted proposal.
    pub bellman_trace: Vec<BellmanStep>,
}

/// Grows from a single object. Extra objects are seeded on the
/// worst-explained points; the first one also tries a random two-way split
/// and keeps whichever anneals to the lower loss. Annealed proposals are
/// unified before scoring. Each
/// proposal is annealed and kept only if it adds an object and improves the
/// growth criterion by at least `min_improvement`. A proposal that collapses
/// back to the current count but improves as much replaces the current model
/// and growth continues.
pub fn grow(ds: &Dataset, cfg: &InferenceConfig) -> Result<GrowthOutcome, InferenceError> {
    cfg.validate()?;
    let mut rng = SplitMix64::seed_from_u64(cfg.seed);
    let baseline = SystemModel::baseline(ds)?;
    grow_from(ds, baseline, cfg, &mut rng)
}

/// Coefficients used to score growth candidates. Under the entropy
/// criterion object terms are weighted by occupancy, so splitting an exactly
/// fitted object never lowers the score.
pub fn growth_coefficients(cfg: &InferenceConfig) -> Coefficients {
    match cfg.criterion {
        GrowthCriterion::Loss => cfg.coefficients,
        GrowthCriterion::Cie => Coefficients {
            weighting: ObjectWeighting::Occupancy,
            ..cfg.coefficients
        },
    }
}

pub(crate) fn grow_from<R: Rng>(
    ds: &Dataset,
    start: SystemModel,
    cfg: &InferenceConfig,
    rng: &mut R,
) -> Result<GrowthOutcome, InferenceError> {
    let coeffs = growth_coefficients(cfg);
    let baseline_loss = start.loss;
    let mut current = start;
    let mut steps = Vec::new();
    let mut anneal_traces = Vec::new();
    let mut bellman_trace = Vec::new();
    while current.k() < cfg.max_objects {
        let seeded = seed_new_object(ds, &current, cfg)?;
        let out = if current.k() == 1 {
            let split = initial_random_split(ds.len(), 2, rng);
            let random = SystemModel::from_assignment(ds, split)?.0;
            let random = anneal_split(ds, random, cfg, rng)?;
            let seeded = anneal_split(ds, seeded, cfg, rng)?;
            if seeded.model.loss < random.model.loss {
                seeded
            } else {
                random
            }
        } else {
            anneal_split(ds, seeded, cfg, rng)?
        };
        let k_proposed = current.k() + 1;
        let (unified, merges) = try_unify(ds, out.model.clone(), cfg, rng)?;
        let out = AnnealOutcome { model: unified, ..out };
        let cie_before = cie_of_model(ds, &current, &coeffs).total_resolved;
        let cie_after = cie_of_model(ds, &out.model, &coeffs).total_resolved;
        let improvement = match cfg.criterion {
            GrowthCriterion::Loss => relative_improvement(current.loss, out.model.loss),
            GrowthCriterion::Cie => cie_improvement(cie_before, cie_after),
        };
        let improves = improvement >= cfg.min_improvement;
        let accepted = out.model.k() > current.k() && improves;
        let refined = out.model.k() == current.k() && improves;
        steps.push(GrowthStep {
            k_from: current.k(),
            k_proposed,
            k_result: out.model.k(),
            loss_before: current.loss,
            loss_after: out.model.loss,
            cie_before,
            cie_after,
            improvement,
            criterion: cfg.criterion,
            accepted,
            refined,
            merged: merges.len(),
            anneal_iterations: out.trace.last().map_or(0, |s| s.iteration),
        });
        anneal_traces.push(out.trace);
        if !(accepted || refined) {
            break;
        }
        current = out.model;
        bellman_trace = out.bellman_trace;
    }
    Ok(GrowthOutcome {
        model: current,
        baseline_loss,
        steps,
        anneal_traces,
        bellman_trace,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeRecord {
    pub pair: (usize, usize),
    pub loss_before: f64,
    pub loss_merged: f64,
}

/// Merges object pairs whose union is explained by one law with at most
/// `unify_tolerance` relative loss increase, best pair first, re-annealing
/// after each merge.
pub fn try_unify<R: Rng>(
    ds: &Dataset,
    model: SystemModel,
    cfg: &InferenceConfig,
    rng: &mut R,
) -> Result<(SystemModel, Vec<MergeRecord>), InferenceError> {
    let mut model = model;
    let mut merges = Vec::new();
    while model.k() >= 2 {
        let n = ds.len() as f64;
        let sse = model.sse();
        let allowed = model.loss * (1.0 + cfg.unify_tolerance) + LOSS_FLOOR;
        let members: Vec<Vec<usize>> = (0..model.k()).map(|i| model.members(i)).collect();
        let mut best: Option<((usize, usize), f64)> = None;
        for i in 0..model.k() {
            for j in (i + 1)..model.k() {
                let union: Vec<usize> = members[i].iter().chain(&members[j]).copied().collect();
                let fit = fit_object(ds.points(), &union)?;
                let merged = (sse - model.objects[i].sse - model.objects[j].sse + fit.sse).max(0.0) / n;
                if merged <= allowed && best.is_none_or(|(_, b)| merged < b) {
                    best = Some(((i, j), merged));
                }
            }
        }
        let Some(((i, j), merged)) = best else { break };
        merges.push(MergeRecord {
            pair: (i, j),
            loss_before: model.loss,
            loss_merged: merged,
        });
        let assignment = model.assignment.iter().map(|&a| if a == j { i } else { a }).collect();
        let (joined, _) = SystemModel::from_assignment(ds, assignment)?;
        model = anneal_split(ds, joined, cfg, rng)?.model;
    }
    Ok((model, merges))
}

/// Outcome of removing one object and re-annealing without it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoCheck {
    pub object: usize,
    pub loss_with: f64,
    pub loss_without: f64,
    /// Relative improvement the object brings over the model without it.
    pub worsening: f64,
    pub necessary: bool,
}

/// Removes each object in turn, hands its points to their best remaining
/// object, re-anneals, and measures how much worse the model gets. Returns
/// the checks together with the reduced models.
pub fn pareto_check<R: Rng>(
    ds: &Dataset,
    model: &SystemModel,
    cfg: &InferenceConfig,
    rng: &mut R,
) -> Result<Vec<(ParetoCheck, SystemModel)>, InferenceError> {
    if model.k() < 2 {
        return Ok(Vec::new());
    }
    let mut out = Vec::with_capacity(model.k());
    for removed in 0..model.k() {
        let assignment = ds
            .points()
            .iter()
            .zip(&model.assignment)
            .map(|(p, &a)| {
                if a != removed {
                    return a;
                }
                (0..model.k())
                    .filter(|&j| j != removed)
                    .min_by(|&x, &y| model.objects[x].sq_error(p).total_cmp(&model.objects[y].sq_error(p)))
                    .expect("k >= 2")
            })
            .collect();
        let (reduced, _) = SystemModel::from_assignment(ds, assignment)?;
        let reduced = anneal_split(ds, reduced, cfg, rng)?.model;
        let worsening = relative_improvement(reduced.loss, model.loss);
        out.push((
            ParetoCheck {
                object: removed,
                loss_with: model.loss,
                loss_without: reduced.loss,
                worsening,
                necessary: worsening > cfg.min_improvement,
            },
            reduced,
        ));
    }
    Ok(out)
}
