use cie_core::inference::{
    activation_timeline, anneal_split, cie_of_model, evaluate_against_truth, grow, pareto_check,
    relative_improvement, seed_new_object, structure_learning_loop, try_unify, Coefficients, DataPoint, Dataset,
    GrowthCriterion, InferenceConfig, SystemModel,
};
use cie_core::world::{simulate, Region, WorldConfig};
use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

/// Points with random headings whose target is a fixed vector chosen by `field`.
fn constant_fields(n: usize, seed: u64, field: impl Fn(usize) -> [f64; 2]) -> Dataset {
    let mut rng = SplitMix64::seed_from_u64(seed);
    let points = (0..n)
        .map(|i| {
            let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            DataPoint {
                features: [1.0, theta.cos(), theta.sin()],
                target: field(i),
                t: i as u64,
                pos: [i as f64 / n as f64, 0.5],
                region_true: if field(i)[1] > 0.0 { Region::Bottom } else { Region::Center },
            }
        })
        .collect();
    Dataset::from_points(points, 1.0).unwrap()
}

fn default_dataset(n_steps: usize) -> Dataset {
    let traj = simulate(&WorldConfig { n_steps, ..Default::default() }).unwrap();
    Dataset::from_samples(&traj.samples, 1e-8).unwrap()
}

fn truth_model(ds: &Dataset) -> SystemModel {
    let assignment = ds.points().iter().map(|p| p.region_true.index()).collect();
    SystemModel::from_assignment(ds, assignment).unwrap().0
}

#[test]
fn single_constant_field_stays_one_object() {
    let ds = constant_fields(400, 1, |_| [0.0, 1.0]);
    let out = grow(&ds, &InferenceConfig::default()).unwrap();
    assert_eq!(out.model.k(), 1);
    assert!(out.steps.iter().all(|s| !s.accepted));
}

#[test]
fn two_spatial_fields_give_two_objects() {
    let ds = constant_fields(600, 2, |i| if i < 300 { [0.0, 1.0] } else { [0.0, -1.0] });
    let out = grow(&ds, &InferenceConfig::default()).unwrap();
    assert_eq!(out.model.k(), 2);
    let mut consts: Vec<f64> = out.model.objects.iter().map(|o| o.weights[1][0]).collect();
    consts.sort_by(f64::total_cmp);
    assert!((consts[0] + 1.0).abs() < 1e-9 && (consts[1] - 1.0).abs() < 1e-9);
    for o in &out.model.objects {
        assert!(o.weights[0].iter().all(|w| w.abs() < 1e-9));
        assert!(o.weights[1][1].abs() < 1e-9 && o.weights[1][2].abs() < 1e-9);
    }
}

#[test]
fn growth_never_exceeds_baseline_loss() {
    let ds = default_dataset(4_000);
    let out = grow(&ds, &InferenceConfig::default()).unwrap();
    assert!(out.model.loss <= out.baseline_loss);
}

#[test]
fn force_split_region_two_is_unified() {
    let ds = default_dataset(4_000);
    let mut flip = false;
    let assignment = ds
        .points()
        .iter()
        .map(|p| {
            let r = p.region_true.index();
            if p.region_true == Region::Bottom {
                flip = !flip;
                if flip {
                    return 4;
                }
            }
            r
        })
        .collect();
    let (split, _) = SystemModel::from_assignment(&ds, assignment).unwrap();
    assert_eq!(split.k(), 5);
    let mut rng = SplitMix64::seed_from_u64(0);
    let (merged, records) = try_unify(&ds, split, &InferenceConfig::default(), &mut rng).unwrap();
    assert_eq!(merged.k(), 4);
    assert_eq!(records.len(), 1);
    assert_eq!(evaluate_against_truth(&ds, &merged).agreement, 1.0);
}

#[test]
fn ground_truth_model_has_no_merges_and_every_object_is_needed() {
    let ds = default_dataset(4_000);
    let truth = truth_model(&ds);
    let cfg = InferenceConfig::default();
    let mut rng = SplitMix64::seed_from_u64(0);
    let (same, records) = try_unify(&ds, truth.clone(), &cfg, &mut rng).unwrap();
    assert!(records.is_empty());
    assert_eq!(same, truth);
    let checks = pareto_check(&ds, &truth, &cfg, &mut rng).unwrap();
    assert_eq!(checks.len(), 4);
    for (c, reduced) in &checks {
        assert_eq!(reduced.k(), 3);
        assert!(c.necessary, "{c:?}");
    }
}

#[test]
fn unify_leaves_single_object_alone() {
    let ds = default_dataset(500);
    let base = SystemModel::baseline(&ds).unwrap();
    let mut rng = SplitMix64::seed_from_u64(0);
    let (same, records) = try_unify(&ds, base.clone(), &InferenceConfig::default(), &mut rng).unwrap();
    assert_eq!(same, base);
    assert!(records.is_empty());
}

#[test]
fn single_object_anneal_matches_plain_fit() {
    let ds = default_dataset(1_000);
    let base = SystemModel::baseline(&ds).unwrap();
    let mut rng = SplitMix64::seed_from_u64(0);
    let out = anneal_split(&ds, base.clone(), &InferenceConfig::default(), &mut rng).unwrap();
    assert_eq!(out.model, base);
}

#[test]
fn seeding_an_exact_model_is_rejected() {
    let ds = default_dataset(4_000);
    let truth = truth_model(&ds);
    let cfg = InferenceConfig::default();
    let seeded = seed_new_object(&ds, &truth, &cfg).unwrap();
    assert_eq!(seeded.k(), 5);
    let mut rng = SplitMix64::seed_from_u64(0);
    let out = anneal_split(&ds, seeded, &cfg, &mut rng).unwrap();
    assert!(relative_improvement(truth.loss, out.model.loss) < cfg.min_improvement);
}

#[test]
fn seeds_of_a_two_object_model_sit_near_the_center() {
    let ds = default_dataset(20_000);
    let cfg = InferenceConfig::default();
    let mut rng = SplitMix64::seed_from_u64(cfg.seed);
    let split = cie_core::inference::initial_random_split(ds.len(), 2, &mut rng);
    let (two, _) = SystemModel::from_assignment(&ds, split).unwrap();
    let two = anneal_split(&ds, two, &cfg, &mut rng).unwrap().model;
    let seeded = seed_new_object(&ds, &two, &cfg).unwrap();
    let new = seeded.k() - 1;
    let members = seeded.members(new);
    let in_center = members
        .iter()
        .filter(|&&i| ds.points()[i].region_true == Region::Center)
        .count();
    let share_center = in_center as f64 / members.len() as f64;
    let base_rate = ds.points().iter().filter(|p| p.region_true == Region::Center).count() as f64 / ds.len() as f64;
    assert!(share_center > base_rate, "{share_center} vs {base_rate}");
}

#[test]
fn structure_loop_on_single_law_gives_one_self_transition() {
    let ds = constant_fields(300, 3, |_| [0.0, 1.0]);
    let out = structure_learning_loop(&ds, &InferenceConfig::default()).unwrap();
    assert_eq!(out.model.k(), 1);
    assert_eq!(out.affordances.len(), 1);
    assert_eq!(out.affordances[0].count, 299);
    assert!(out.warnings.is_empty());
}

#[test]
fn structure_loop_default_trajectory() {
    let ds = default_dataset(20_000);
    let out = structure_learning_loop(&ds, &InferenceConfig::default()).unwrap();
    assert_eq!(out.model.k(), 4);
    let rec = evaluate_against_truth(&ds, &out.model);
    assert!(rec.agreement >= 0.95 && rec.mean_cosine > 0.99 && rec.one_hot);
    for i in 0..4 {
        let row = &out.model.transition_counts[i];
        let off: u64 = row.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, c)| c).sum();
        assert!(row[i] > off, "row {i}: {row:?}");
    }
    assert!(out.ledger.iter().any(|e| e.stage == "grow" && e.k == 5 && !e.accepted));
}

#[test]
fn shuffled_samples_get_empty_affordance_graph() {
    let ds = default_dataset(2_000);
    let mut points = ds.points().to_vec();
    points.reverse();
    let shuffled = Dataset::from_points(points, ds.a_mag_hat()).unwrap();
    assert!(!shuffled.is_ordered());
    let out = structure_learning_loop(&shuffled, &InferenceConfig::default()).unwrap();
    assert!(out.affordances.is_empty());
    assert_eq!(out.warnings.len(), 1);
}

#[test]
fn entropy_criterion_also_finds_four() {
    let ds = default_dataset(20_000);
    let cfg = InferenceConfig { criterion: GrowthCriterion::Cie, ..Default::default() };
    let out = grow(&ds, &cfg).unwrap();
    assert_eq!(out.model.k(), 4);
}

#[test]
fn activation_timeline_is_one_hot() {
    let ds = default_dataset(1_000);
    let truth = truth_model(&ds);
    let rows = activation_timeline(&truth);
    assert_eq!(rows.len(), ds.len());
    assert!(rows.iter().all(|r| r.len() == 4 && r.iter().map(|&v| v as u32).sum::<u32>() == 1));
}

#[test]
fn resolved_entropy_prefers_truth_over_baseline() {
    let ds = default_dataset(4_000);
    let coeffs = Coefficients::default();
    let truth = cie_of_model(&ds, &truth_model(&ds), &coeffs);
    let base = cie_of_model(&ds, &SystemModel::baseline(&ds).unwrap(), &coeffs);
    assert!(base.total_resolved > truth.total_resolved);
}
