use super::bellman::{bellman_update, bellman_value, BellmanStep, CandidateMove};
use super::cie::{cie_of_model, Coefficients};
use super::dataset::Dataset;
use super::fit::{fit_object, ObjectModel};
use super::{InferenceConfig, InferenceError};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Relative sse change below which annealing is considered converged.
const CONVERGENCE_TOLERANCE: f64 = 1e-9;

/// A set of hidden objects together with the point assignment and the
/// empirical transition counts between consecutive active objects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemModel {
    pub objects: Vec<ObjectModel>,
    /// Object index per dataset point.
    pub assignment: Vec<usize>,
    /// `transition_counts[i][j]`: consecutive samples going from object `i`
    /// to object `j`.
    pub transition_counts: Vec<Vec<u64>>,
    pub a_mag_hat: f64,
    /// Mean squared residual over all points.
    pub loss: f64,
}

impl SystemModel {
    /// Fits one object per label. Labels that own no point are dropped and
    /// the remaining ones compacted in order; the number dropped is returned.
    pub fn from_assignment(ds: &Dataset, assignment: Vec<usize>) -> Result<(Self, usize), InferenceError> {
        if assignment.len() != ds.len() {
            return Err(InferenceError::Invariant(format!(
                "assignment has {} entries for {} points",
                assignment.len(),
                ds.len()
            )));
        }
        let labels = assignment.iter().max().map_or(0, |m| m + 1);
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); labels];
        for (i, &a) in assignment.iter().enumerate() {
            members[a].push(i);
        }
        let mut relabel = vec![usize::MAX; labels];
        let mut objects = Vec::new();
        for (label, idx) in members.iter().enumerate() {
            if idx.is_empty() {
                continue;
            }
            relabel[label] = objects.len();
            objects.push(fit_object(ds.points(), idx)?);
        }
        let dropped = labels - objects.len();
        let assignment: Vec<usize> = assignment.iter().map(|&a| relabel[a]).collect();
        let transition_counts = transition_counts(ds, &assignment, objects.len());
        let loss = objects.iter().map(|o| o.sse).sum::<f64>() / ds.len() as f64;
        Ok((
            Self {
                objects,
                assignment,
                transition_counts,
                a_mag_hat: ds.a_mag_hat(),
                loss,
            },
            dropped,
        ))
    }

    /// Single object fitted to every point.
    pub fn baseline(ds: &Dataset) -> Result<Self, InferenceError> {
        Ok(Self::from_assignment(ds, vec![0; ds.len()])?.0)
    }

    pub fn k(&self) -> usize {
        self.objects.len()
    }

    pub fn sse(&self) -> f64 {
        self.objects.iter().map(|o| o.sse).sum()
    }

    pub fn members(&self, object: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] == object)
            .collect()
    }

    pub fn occupancy(&self) -> Vec<usize> {
        let mut occ = vec![0; self.k()];
        for &a in &self.assignment {
            occ[a] += 1;
        }
        occ
    }

    /// Squared error of every point under its assigned object.
    pub fn point_errors(&self, ds: &Dataset) -> Vec<f64> {
        ds.points()
            .iter()
            .zip(&self.assignment)
            .map(|(p, &a)| self.objects[a].sq_error(p))
            .collect()
    }

    /// Index of the best-fitting object for every point; ties keep the
    /// current assignment, then the lowest index.
    pub fn best_fit(&self, ds: &Dataset) -> Vec<usize> {
        ds.points()
            .iter()
            .zip(&self.assignment)
            .map(|(p, &cur)| {
                let mut best = cur;
                let mut best_err = self.objects[cur].sq_error(p);
                for (j, o) in self.objects.iter().enumerate() {
                    let e = o.sq_error(p);
                    if e < best_err {
                        best = j;
                        best_err = e;
                    }
                }
                best
            })
            .collect()
    }

    /// Checks the structural invariants: totality of the assignment and
    /// agreement between transition counts and occupancy.
    pub fn check_invariants(&self, ds: &Dataset) -> Result<(), InferenceError> {
        if self.objects.is_empty() {
            return Err(InferenceError::Invariant("model has no objects".into()));
        }
        if self.assignment.len() != ds.len() || self.assignment.iter().any(|&a| a >= self.k()) {
            return Err(InferenceError::Invariant("assignment is not total".into()));
        }
        let mut has_successor = vec![false; ds.len()];
        for r in ds.successors() {
            has_successor[r] = true;
        }
        for (i, row) in self.transition_counts.iter().enumerate() {
            let expected = self
                .assignment
                .iter()
                .zip(&has_successor)
                .filter(|(&a, &s)| a == i && s)
                .count() as u64;
            if row.iter().sum::<u64>() != expected {
                return Err(InferenceError::Invariant(format!(
                    "transition row {i} does not match occupancy"
                )));
            }
        }
        if self.objects.iter().flat_map(|o| o.weights.iter().flatten()).any(|w| !w.is_finite()) {
            return Err(InferenceError::Invariant("non-finite weights".into()));
        }
        Ok(())
    }
}

/// Counts object-to-object transitions between time-consecutive points.
/// Unordered datasets yield an all-zero matrix.
pub fn transition_counts(ds: &Dataset, assignment: &[usize], k: usize) -> Vec<Vec<u64>> {
    let mut counts = vec![vec![0u64; k]; k];
    for r in ds.successors() {
        counts[assignment[r]][assignment[r + 1]] += 1;
    }
    counts
}

/// Which procedure moves points between objects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnnealDriver {
    /// Reassign every point to its best-fitting object, then refit.
    #[default]
    HardEm,
    /// Evaluate one batch move per receiving object and take the one with
    /// the lowest entropy value, stopping when none improves it.
    Bellman,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    /// No point changed object.
    Stable,
    /// Relative sse change fell below tolerance.
    LossConverged,
    MaxIterations,
    /// Bellman driver found no improving move.
    NoImprovingMove,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealStep {
    pub iteration: usize,
    pub sse: f64,
    pub objects: usize,
    pub moved: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event: Option<String>,
}

impl AnnealStep {
    /// Steps that changed the model class (dropping an undersized object)
    /// rather than performing a reassign/refit pair.
    pub fn is_pruning(&self) -> bool {
        self.event.as_deref().is_some_and(|e| e.starts_with("pruned"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealOutcome {
    pub model: SystemModel,
    pub trace: Vec<AnnealStep>,
    pub bellman_trace: Vec<BellmanStep>,
    pub stop: StopReason,
}

/// Uniformly random labels in `0..k`.
pub fn initial_random_split<R: Rng>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..k)).collect()
}

/// Hands the `seed_fraction` worst-explained points to a new object.
pub fn seed_new_object(ds: &Dataset, model: &SystemModel, cfg: &InferenceConfig) -> Result<SystemModel, InferenceError> {
    let errors = model.point_errors(ds);
    let mut order: Vec<usize> = (0..errors.len()).collect();
    order.sort_by(|&a, &b| errors[b].total_cmp(&errors[a]).then(a.cmp(&b)));
    let take = ((cfg.seed_fraction * ds.len() as f64).ceil() as usize).clamp(1, ds.len());
    let mut assignment = model.assignment.clone();
    let new_label = model.k();
    for &i in &order[..take] {
        assignment[i] = new_label;
    }
    Ok(SystemModel::from_assignment(ds, assignment)?.0)
}

fn reassign<R: Rng>(ds: &Dataset, model: &SystemModel, temperature: f64, rng: &mut R) -> Vec<usize> {
    let best = model.best_fit(ds);
    if temperature <= 0.0 || model.k() < 2 {
        return best;
    }
    ds.points()
        .iter()
        .zip(best)
        .map(|(p, b)| {
            let mut other = rng.random_range(0..model.k() - 1);
            if other >= b {
                other += 1;
            }
            let delta = model.objects[other].sq_error(p) - model.objects[b].sq_error(p);
            if rng.random::<f64>() < (-delta / temperature).exp() {
                other
            } else {
                b
            }
        })
        .collect()
}

/// Drops every object with fewer than `min_fit_size` points (keeping at
/// least one) and hands its points to their best remaining object.
fn prune_undersized(ds: &Dataset, model: &SystemModel, min_fit_size: usize) -> Result<Option<SystemModel>, InferenceError> {
    let occ = model.occupancy();
    let mut keep: Vec<bool> = occ.iter().map(|&c| c >= min_fit_size).collect();
    if keep.iter().all(|&k| k) {
        return Ok(None);
    }
    if !keep.iter().any(|&k| k) {
        let largest = (0..occ.len()).max_by_key(|&i| (occ[i], usize::MAX - i)).unwrap_or(0);
        keep[largest] = true;
        if occ.len() == 1 {
            return Ok(None);
        }
    }
    let assignment = ds
        .points()
        .iter()
        .zip(&model.assignment)
        .map(|(p, &a)| {
            if keep[a] {
                a
            } else {
                (0..model.k())
                    .filter(|&j| keep[j])
                    .min_by(|&x, &y| model.objects[x].sq_error(p).total_cmp(&model.objects[y].sq_error(p)))
                    .expect("at least one object kept")
            }
        })
        .collect();
    Ok(Some(SystemModel::from_assignment(ds, assignment)?.0))
}

/// Anneals from an initial model until no point moves, the loss settles or
/// the iteration budget runs out.
pub fn anneal_split<R: Rng>(
    ds: &Dataset,
    initial: SystemModel,
    cfg: &InferenceConfig,
    rng: &mut R,
) -> Result<AnnealOutcome, InferenceError> {
    match cfg.driver {
        AnnealDriver::HardEm => anneal_hard_em(ds, initial, cfg, rng),
        AnnealDriver::Bellman => anneal_bellman(ds, initial, cfg),
    }
}

fn anneal_hard_em<R: Rng>(
    ds: &Dataset,
    initial: SystemModel,
    cfg: &InferenceConfig,
    rng: &mut R,
) -> Result<AnnealOutcome, InferenceError> {
    let coeffs = cfg.coefficients;
    let mut model = initial;
    let mut trace = vec![AnnealStep {
        iteration: 0,
        sse: model.sse(),
        objects: model.k(),
        moved: 0,
        event: None,
    }];
    let mut c_prev = cie_of_model(ds, &model, &coeffs).total_resolved;
    let mut estimate = c_prev;
    let mut bellman_trace = vec![BellmanStep::start(estimate)];
    let mut iteration = 0;
    let mut stop = StopReason::MaxIterations;
    while iteration < cfg.max_anneal_iters {
        iteration += 1;
        let temperature = cfg.temperature0 * cfg.cooling_alpha.powi(iteration as i32 - 1);
        let proposal = reassign(ds, &model, temperature, rng);
        let moved = proposal.iter().zip(&model.assignment).filter(|(a, b)| a != b).count();
        if moved == 0 {
            match prune_undersized(ds, &model, cfg.min_fit_size)? {
                None => {
                    stop = StopReason::Stable;
                    break;
                }
                Some(pruned) => {
                    let removed = model.k() - pruned.k();
                    model = pruned;
                    trace.push(AnnealStep {
                        iteration,
                        sse: model.sse(),
                        objects: model.k(),
                        moved: 0,
                        event: Some(format!("pruned {removed} undersized object(s)")),
                    });
                    continue;
                }
            }
        }
        let prev_sse = model.sse();
        let (next, dropped) = SystemModel::from_assignment(ds, proposal)?;
        model = next;
        trace.push(AnnealStep {
            iteration,
            sse: model.sse(),
            objects: model.k(),
            moved,
            event: (dropped > 0).then(|| format!("dropped {dropped} empty object(s)")),
        });
        let c_now = cie_of_model(ds, &model, &coeffs).total_resolved;
        estimate = bellman_value(c_now - c_prev, cfg.gamma, estimate);
        bellman_trace.push(BellmanStep {
            iteration,
            c_value: estimate,
            c_model: c_now,
            accepted_move: format!("reassign {moved} point(s) to their best object"),
        });
        c_prev = c_now;
        let scale = prev_sse.max(f64::MIN_POSITIVE);
        if (prev_sse - model.sse()).abs() / scale < CONVERGENCE_TOLERANCE {
            if let Some(pruned) = prune_undersized(ds, &model, cfg.min_fit_size)? {
                let removed = model.k() - pruned.k();
                model = pruned;
                trace.push(AnnealStep {
                    iteration,
                    sse: model.sse(),
                    objects: model.k(),
                    moved: 0,
                    event: Some(format!("pruned {removed} undersized object(s)")),
                });
                continue;
            }
            stop = StopReason::LossConverged;
            break;
        }
    }
    if stop == StopReason::MaxIterations {
        if let Some(pruned) = prune_undersized(ds, &model, cfg.min_fit_size)? {
            let removed = model.k() - pruned.k();
            model = pruned;
            trace.push(AnnealStep {
                iteration,
                sse: model.sse(),
                objects: model.k(),
                moved: 0,
                event: Some(format!("pruned {removed} undersized object(s)")),
            });
        }
    }
    Ok(AnnealOutcome {
        model,
        trace,
        bellman_trace,
        stop,
    })
}

/// Candidate moves are batches: for each object, the points whose best fit
/// it is but which are currently elsewhere, plus the full reassignment.
fn anneal_bellman(ds: &Dataset, initial: SystemModel, cfg: &InferenceConfig) -> Result<AnnealOutcome, InferenceError> {
    let coeffs: Coefficients = cfg.coefficients;
    let mut model = initial;
    let mut c_model = cie_of_model(ds, &model, &coeffs).total_resolved;
    let mut estimate = c_model;
    let mut trace = vec![AnnealStep {
        iteration: 0,
        sse: model.sse(),
        objects: model.k(),
        moved: 0,
        event: None,
    }];
    let mut bellman_trace = vec![BellmanStep::start(estimate)];
    let mut stop = StopReason::MaxIterations;
    for iteration in 1..=cfg.max_anneal_iters {
        let best = model.best_fit(ds);
        let mut batches: Vec<(String, Vec<usize>, usize)> = Vec::new();
        for j in 0..model.k() {
            let mut assignment = model.assignment.clone();
            let mut moved = 0;
            for (i, &b) in best.iter().enumerate() {
                if b == j && assignment[i] != j {
                    assignment[i] = j;
                    moved += 1;
                }
            }
            if moved > 0 {
                batches.push((format!("move {moved} point(s) into object {j}"), assignment, moved));
            }
        }
        let all_moved = best.iter().zip(&model.assignment).filter(|(a, b)| a != b).count();
        if all_moved > 0 && batches.len() > 1 {
            batches.push((format!("reassign {all_moved} point(s) to their best object"), best.clone(), all_moved));
        }
        if batches.is_empty() {
            stop = StopReason::Stable;
            break;
        }
        let mut models = Vec::with_capacity(batches.len());
        let mut candidates = Vec::with_capacity(batches.len());
        for (description, assignment, _) in &batches {
            let (m, _) = SystemModel::from_assignment(ds, assignment.clone())?;
            candidates.push(CandidateMove {
                description: description.clone(),
                c_next: cie_of_model(ds, &m, &coeffs).total_resolved,
            });
            models.push(m);
        }
        let decision = bellman_update(estimate, c_model, &candidates, cfg.gamma);
        match decision.chosen {
            None => {
                bellman_trace.push(BellmanStep {
                    iteration,
                    c_value: decision.c_next,
                    c_model,
                    accepted_move: "stay".into(),
                });
                stop = StopReason::NoImprovingMove;
                break;
            }
            Some(i) => {
                let moved = batches[i].2;
                model = models.swap_remove(i);
                c_model = candidates[i].c_next;
                estimate = decision.c_next;
                bellman_trace.push(BellmanStep {
                    iteration,
                    c_value: estimate,
                    c_model,
                    accepted_move: candidates[i].description.clone(),
                });
                trace.push(AnnealStep {
                    iteration,
                    sse: model.sse(),
                    objects: model.k(),
                    moved,
                    event: None,
                });
            }
        }
    }
    if let Some(pruned) = prune_undersized(ds, &model, cfg.min_fit_size)? {
        let removed = model.k() - pruned.k();
        model = pruned;
        trace.push(AnnealStep {
            iteration: trace.last().map_or(0, |s| s.iteration),
            sse: model.sse(),
            objects: model.k(),
            moved: 0,
            event: Some(format!("pruned {removed} undersized object(s)")),
        });
    }
    Ok(AnnealOutcome {
        model,
        trace,
        bellman_trace,
        stop,
    })
}
