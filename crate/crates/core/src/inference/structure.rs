use super::anneal::{anneal_split, SystemModel};
use super::cie::{cie_of_model, CieReport};
use super::dataset::Dataset;
use super::grow::{grow_from, growth_coefficients, pareto_check, try_unify, GrowthStep, MergeRecord, ParetoCheck};
use super::{InferenceConfig, InferenceError};
use crate::world::Region;
use crate::SPEC_VERSION;
use rand::SeedableRng;
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

/// One decision made during structure learning, accepted or not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub pass: usize,
    pub stage: String,
    /// Object count of the candidate.
    pub k: usize,
    pub loss: f64,
    pub cie: f64,
    pub accepted: bool,
    pub note: String,
}

/// A nonzero transition count between two objects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffordanceEdge {
    pub from: usize,
    pub to: usize,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureOutcome {
    pub model: SystemModel,
    pub cie: CieReport,
    pub baseline_loss: f64,
    pub growth: Vec<GrowthStep>,
    pub pareto: Vec<ParetoCheck>,
    pub merges: Vec<MergeRecord>,
    pub ledger: Vec<LedgerEntry>,
    pub affordances: Vec<AffordanceEdge>,
    pub passes: usize,
    pub warnings: Vec<String>,
}

fn entry(ds: &Dataset, cfg: &InferenceConfig, pass: usize, stage: &str, m: &SystemModel, accepted: bool, note: String) -> LedgerEntry {
    LedgerEntry {
        pass,
        stage: stage.into(),
        k: m.k(),
        loss: m.loss,
        cie: cie_of_model(ds, m, &growth_coefficients(cfg)).total_resolved,
        accepted,
        note,
    }
}

fn growth_entry(pass: usize, stage: &str, s: &GrowthStep) -> LedgerEntry {
    LedgerEntry {
        pass,
        stage: stage.into(),
        k: s.k_proposed,
        loss: s.loss_after,
        cie: s.cie_after,
        accepted: s.accepted || s.refined,
        note: format!(
            "{} -> {} objects proposed, {} after annealing, improvement {:.6}{}",
            s.k_from,
            s.k_proposed,
            s.k_result,
            s.improvement,
            if s.refined { ", kept as refinement" } else { "" }
        ),
    }
}

/// Splits an object by growing inside its own points. Returns the new
/// assignment if the object divides.
fn recurse_into<R: rand::Rng>(
    ds: &Dataset,
    model: &SystemModel,
    object: usize,
    cfg: &InferenceConfig,
    rng: &mut R,
) -> Result<Option<(Vec<usize>, Vec<GrowthStep>)>, InferenceError> {
    let members = model.members(object);
    let room = cfg.max_objects.saturating_sub(model.k()) + 1;
    if members.len() < 2 * cfg.min_fit_size || room < 2 {
        return Ok(None);
    }
    let sub = ds.subset(&members)?;
    let sub_cfg = InferenceConfig {
        max_objects: room,
        ..cfg.clone()
    };
    let grown = grow_from(&sub, SystemModel::baseline(&sub)?, &sub_cfg, rng)?;
    if grown.model.k() < 2 {
        return Ok(None);
    }
    let mut assignment = model.assignment.clone();
    for (&row, &label) in members.iter().zip(&grown.model.assignment) {
        if label > 0 {
            assignment[row] = model.k() + label - 1;
        }
    }
    Ok(Some((assignment, grown.steps)))
}

/// Grows, verifies, unifies, recurses and builds the affordance graph,
/// repeating until a whole pass leaves the model unchanged.
pub fn structure_learning_loop(ds: &Dataset, cfg: &InferenceConfig) -> Result<StructureOutcome, InferenceError> {
    cfg.validate()?;
    let mut rng = SplitMix64::seed_from_u64(cfg.seed);
    let baseline = SystemModel::baseline(ds)?;
    let baseline_loss = baseline.loss;
    let mut model = baseline;
    let mut growth = Vec::new();
    let mut pareto = Vec::new();
    let mut merges = Vec::new();
    let mut ledger = vec![entry(ds, cfg, 0, "baseline", &model, true, "single object".into())];
    let mut warnings = Vec::new();
    let mut grown_from: Option<SystemModel> = None;
    let mut passes = 0;

    while passes < cfg.max_passes {
        passes += 1;
        let start = model.clone();

        if grown_from.as_ref() != Some(&model) {
            let out = grow_from(ds, model.clone(), cfg, &mut rng)?;
            for s in &out.steps {
                ledger.push(growth_entry(passes, "grow", s));
            }
            growth.extend(out.steps);
            model = out.model;
            grown_from = Some(model.clone());
        }

        let checks = pareto_check(ds, &model, cfg, &mut rng)?;
        pareto = checks.iter().map(|(c, _)| c.clone()).collect();
        let weakest = checks
            .into_iter()
            .filter(|(c, _)| !c.necessary)
            .min_by(|(a, _), (b, _)| a.worsening.total_cmp(&b.worsening));
        if let Some((check, reduced)) = weakest {
            ledger.push(entry(
                ds,
                cfg,
                passes,
                "pareto",
                &reduced,
                true,
                format!("object {} removed, worsening {:.6}", check.object, check.worsening),
            ));
            model = reduced;
        }

        let (unified, merged) = try_unify(ds, model, cfg, &mut rng)?;
        model = unified;
        for m in &merged {
            ledger.push(entry(
                ds,
                cfg,
                passes,
                "unify",
                &model,
                true,
                format!("objects {} and {} merged, loss {:.3e} -> {:.3e}", m.pair.0, m.pair.1, m.loss_before, m.loss_merged),
            ));
        }
        merges.extend(merged);

        if cfg.recursion_depth > 0 {
            let mut object = 0;
            while object < model.k() {
                if let Some((assignment, steps)) = recurse_into(ds, &model, object, cfg, &mut rng)? {
                    for s in &steps {
                        ledger.push(growth_entry(passes, "recursion", s));
                    }
                    let (split, _) = SystemModel::from_assignment(ds, assignment)?;
                    model = anneal_split(ds, split, cfg, &mut rng)?.model;
                    ledger.push(entry(ds, cfg, passes, "recursion", &model, true, format!("object {object} divided")));
                }
                object += 1;
            }
        }

        if model == start {
            break;
        }
    }

    model.check_invariants(ds)?;
    let affordances = if ds.is_ordered() {
        affordance_edges(&model)
    } else {
        warnings.push("samples are not in time order; affordance graph left empty".into());
        Vec::new()
    };
    let mut cie = cie_of_model(ds, &model, &cfg.coefficients);
    cie.bellman_trace = anneal_split(ds, model.clone(), cfg, &mut rng)?.bellman_trace;
    Ok(StructureOutcome {
        model,
        cie,
        baseline_loss,
        growth,
        pareto,
        merges,
        ledger,
        affordances,
        passes,
        warnings,
    })
}

/// Nonzero transitions of the model, row-major; zero counts are pruned.
pub fn affordance_edges(model: &SystemModel) -> Vec<AffordanceEdge> {
    let mut edges = Vec::new();
    for (from, row) in model.transition_counts.iter().enumerate() {
        for (to, &count) in row.iter().enumerate() {
            if count > 0 {
                edges.push(AffordanceEdge { from, to, count });
            }
        }
    }
    edges
}

/// One-hot activation row per sample, by assignment.
pub fn activation_timeline(model: &SystemModel) -> Vec<Vec<u8>> {
    model
        .assignment
        .iter()
        .map(|&a| (0..model.k()).map(|j| u8::from(j == a)).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    /// Fraction of samples whose object maps to their true region under the
    /// best one-to-one relabeling.
    pub agreement: f64,
    /// Region matched to each object, if any.
    pub mapping: Vec<Option<Region>>,
    /// Mean cosine similarity between predicted and true acceleration.
    pub mean_cosine: f64,
    pub one_hot: bool,
}

fn best_mapping(confusion: &[[usize; 4]]) -> (usize, Vec<Option<usize>>) {
    fn go(obj: usize, used: [bool; 4], confusion: &[[usize; 4]], cur: &mut Vec<Option<usize>>, best: &mut (usize, Vec<Option<usize>>), score: usize) {
        if obj == confusion.len() {
            if score > best.0 || best.1.is_empty() {
                *best = (score, cur.clone());
            }
            return;
        }
        cur.push(None);
        go(obj + 1, used, confusion, cur, best, score);
        cur.pop();
        for r in 0..4 {
            if !used[r] {
                let mut u = used;
                u[r] = true;
                cur.push(Some(r));
                go(obj + 1, u, confusion, cur, best, score + confusion[obj][r]);
                cur.pop();
            }
        }
    }
    let mut best = (0, Vec::new());
    go(0, [false; 4], confusion, &mut Vec::new(), &mut best, 0);
    best
}

/// Scores a model against the ground-truth regions carried by the data.
pub fn evaluate_against_truth(ds: &Dataset, model: &SystemModel) -> RecoveryReport {
    let mut confusion = vec![[0usize; 4]; model.k()];
    for (p, &a) in ds.points().iter().zip(&model.assignment) {
        confusion[a][p.region_true.index()] += 1;
    }
    let (matched, mapping) = best_mapping(&confusion);
    let mut cos_sum = 0.0;
    for (p, &a) in ds.points().iter().zip(&model.assignment) {
        let y = model.objects[a].predict(&p.features);
        let t = p.target;
        let denom = (y[0].hypot(y[1])) * (t[0].hypot(t[1]));
        cos_sum += if denom > 0.0 { (y[0] * t[0] + y[1] * t[1]) / denom } else { 0.0 };
    }
    let one_hot = activation_timeline(model).iter().all(|row| row.iter().map(|&v| v as usize).sum::<usize>() == 1);
    RecoveryReport {
        agreement: matched as f64 / ds.len() as f64,
        mapping: mapping.into_iter().map(|m| m.map(|r| Region::ALL[r])).collect(),
        mean_cosine: cos_sum / ds.len() as f64,
        one_hot,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSummary {
    pub weights: [[f64; 3]; 2],
    pub n_points: usize,
    pub sigma: [f64; 2],
    pub sse: f64,
    pub ridge: bool,
}

/// Serialized inference result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub spec_version: String,
    pub config: InferenceConfig,
    pub a_mag_hat: f64,
    pub loss: f64,
    pub baseline_loss: f64,
    pub objects: Vec<ObjectSummary>,
    pub assignment: Vec<usize>,
    pub transitions: Vec<Vec<u64>>,
    pub affordances: Vec<AffordanceEdge>,
    pub cie: CieReport,
    pub trace: Vec<GrowthStep>,
    pub pareto: Vec<ParetoCheck>,
    pub ledger: Vec<LedgerEntry>,
    pub excluded: Vec<u64>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub recovery: Option<RecoveryReport>,
}

impl ModelDocument {
    pub fn new(ds: &Dataset, cfg: &InferenceConfig, out: &StructureOutcome, recovery: Option<RecoveryReport>) -> Self {
        Self {
            spec_version: SPEC_VERSION.into(),
            config: cfg.clone(),
            a_mag_hat: out.model.a_mag_hat,
            loss: out.model.loss,
            baseline_loss: out.baseline_loss,
            objects: out
                .model
                .objects
                .iter()
                .map(|o| ObjectSummary {
                    weights: o.weights,
                    n_points: o.n_points,
                    sigma: o.residual_sigma,
                    sse: o.sse,
                    ridge: o.ridge,
                })
                .collect(),
            assignment: out.model.assignment.clone(),
            transitions: out.model.transition_counts.clone(),
            affordances: out.affordances.clone(),
            cie: out.cie.clone(),
            trace: out.growth.clone(),
            pareto: out.pareto.clone(),
            ledger: out.ledger.clone(),
            excluded: ds.excluded().to_vec(),
            warnings: out.warnings.clone(),
            recovery,
        }
    }
}
