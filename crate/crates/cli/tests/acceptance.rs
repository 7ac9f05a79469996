//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

use cie_core::entropy::{differential_entropy_gaussian_fit, gaussian_entropy_nats, SampleSet};
use cie_core::graph::{
    best_bipartition, bipartition_assignment, block_entropies, graph_entropy, mean_cross_slot_entropy,
    EdgeProbabilityGraph, NodePartition,
};
use cie_core::inference::{
    activation_timeline, anneal_split, cie_of_model, evaluate_against_truth, grow, initial_random_split, Coefficients,
    Dataset, InferenceConfig, SystemModel,
};
use cie_core::multiscale::{extract_objects, life_step, patterns, run, LifeGrid, ObjectKind, Topology};
use cie_core::world::{simulate, WorldConfig};
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal};
use rand_xoshiro::SplitMix64;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Verdict) -> Verdict {
    let start = Instant::now();
    let v = f();
    let took = start.elapsed();
    match limit {
        Some(limit) if took > limit => verdict(false, format!("{}; took {took:.2?}, limit {limit:?}", v.detail)),
        Some(limit) => verdict(v.pass, format!("{}; {took:.2?} (limit {limit:?})", v.detail)),
        None => verdict(v.pass, format!("{}; {took:.2?}", v.detail)),
    }
}

fn graph_example() -> Verdict {
    let g = EdgeProbabilityGraph::uniform(8, 0.5).unwrap();
    let part = NodePartition::new(vec![0, 0, 0, 0, 1, 1, 1, 1]).unwrap();
    let r = block_entropies(&g, &part).unwrap();
    let got = [r.within(0).unwrap(), r.within(1).unwrap(), r.cross_total(), r.total];
    let want = [10.0, 10.0, 16.0, 36.0];
    let exact = got.iter().zip(want).all(|(g, w)| (g - w).abs() <= 1e-9);
    let conserved = (graph_entropy(&g) - 36.0).abs() <= 1e-9;
    verdict(
        exact && conserved,
        format!("H(A1)={} H(A2)={} H(B)={} total={}", got[0], got[1], got[2], got[3]),
    )
}

fn conservation() -> Verdict {
    let mut rng = SplitMix64::seed_from_u64(2);
    let mut worst = 0.0f64;
    let mut failures = 0;
    for _ in 0..500 {
        let n = rng.random_range(4..=12);
        let mut p = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i..n {
                let v = rng.random::<f64>();
                p[i][j] = v;
                p[j][i] = v;
            }
        }
        let g = EdgeProbabilityGraph::new(p).unwrap();
        let k = rng.random_range(2..=4usize);
        let mut labels: Vec<usize> = (0..n).map(|i| if i < k { i } else { rng.random_range(0..k) }).collect();
        for i in (1..n).rev() {
            labels.swap(i, rng.random_range(0..=i));
        }
        let part = NodePartition::new(labels).unwrap();
        let err = (block_entropies(&g, &part).unwrap().total - graph_entropy(&g)).abs();
        worst = worst.max(err);
        if err > 1e-9 {
            failures += 1;
        }
    }
    verdict(failures == 0, format!("500 graphs, {failures} violations, worst |diff| {worst:.2e} bits"))
}

fn planted_recovery() -> Verdict {
    let n = 10;
    let mut recovered = 0;
    let mut enumeration_agrees = 0;
    for seed in 0..50u64 {
        let mut rng = SplitMix64::seed_from_u64(seed);
        let first = rng.random_range(2..=n - 2);
        let mut order: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        let mut side = vec![0usize; n];
        for &v in &order[first..] {
            side[v] = 1;
        }
        let p: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if side[i] == side[j] { 0.95 } else { 0.02 }).collect())
            .collect();
        let g = EdgeProbabilityGraph::new(p).unwrap();
        let (best, report) = best_bipartition(&g, 16).unwrap();
        let found = best.block_of().iter().zip(&side).all(|(a, b)| a == b)
            || best.block_of().iter().zip(&side).all(|(a, b)| a != b);
        if found {
            recovered += 1;
        }
        let best_score = mean_cross_slot_entropy(&report, &best);
        let minimum = (1..(1u64 << (n - 1)))
            .map(|mask| {
                let part = NodePartition::new(bipartition_assignment(n, mask)).unwrap();
                mean_cross_slot_entropy(&block_entropies(&g, &part).unwrap(), &part)
            })
            .fold(f64::INFINITY, f64::min);
        if (best_score - minimum).abs() <= 1e-12 {
            enumeration_agrees += 1;
        }
    }
    verdict(
        recovered == 50 && enumeration_agrees == 50,
        format!("planted split recovered {recovered}/50, optimum confirmed by enumeration {enumeration_agrees}/50"),
    )
}

fn default_dataset() -> Dataset {
    let traj = simulate(&WorldConfig::default()).unwrap();
    Dataset::from_samples(&traj.samples, 1e-8).unwrap()
}

fn experiment(ds: &Dataset) -> (Verdict, SystemModel) {
    let cfg = InferenceConfig::default();
    let out = grow(ds, &cfg).unwrap();
    let k = out.model.k();
    let fifth_rejected = out.steps.iter().any(|s| s.k_from == 4 && s.k_proposed == 5 && !s.accepted);
    let rec = evaluate_against_truth(ds, &out.model);
    let one_hot = activation_timeline(&out.model).iter().all(|row| row.iter().sum::<u8>() == 1);
    let pass = k == 4 && fifth_rejected && rec.agreement >= 0.95 && rec.mean_cosine > 0.99 && one_hot;
    let v = verdict(
        pass,
        format!(
            "k={k}, fifth proposal rejected={fifth_rejected}, agreement={:.4}, mean cosine={:.6}, one-hot={one_hot}",
            rec.agreement, rec.mean_cosine
        ),
    );
    (v, out.model)
}

fn underfit_ordering(ds: &Dataset, four: &SystemModel) -> Verdict {
    let coeffs = Coefficients::default();
    let one = SystemModel::baseline(ds).unwrap();
    let c1 = cie_of_model(ds, &one, &coeffs);
    let c4 = cie_of_model(ds, four, &coeffs);
    verdict(
        c1.total > c4.total && c1.total_resolved > c4.total_resolved,
        format!(
            "C(1 object)={:.3} > C(4 objects)={:.3} nats (resolved {:.3} > {:.3})",
            c1.total, c4.total, c1.total_resolved, c4.total_resolved
        ),
    )
}

fn anneal_monotonicity() -> Verdict {
    let traj = simulate(&WorldConfig {
        n_steps: 3000,
        ..Default::default()
    })
    .unwrap();
    let ds = Dataset::from_samples(&traj.samples, 1e-8).unwrap();
    let mut violations = 0;
    let mut steps = 0;
    let mut pruning = 0;
    let mut largest_raw_increase = 0.0f64;
    for seed in 0..100u64 {
        let cfg = InferenceConfig {
            seed,
            temperature0: 0.0,
            ..Default::default()
        };
        let mut rng = SplitMix64::seed_from_u64(seed);
        let k = rng.random_range(2..=6);
        let (start, _) = SystemModel::from_assignment(&ds, initial_random_split(ds.len(), k, &mut rng)).unwrap();
        let out = anneal_split(&ds, start, &cfg, &mut rng).unwrap();
        let tolerance = 1e-12 * out.trace[0].sse;
        for pair in out.trace.windows(2) {
            if pair[1].is_pruning() {
                pruning += 1;
                continue;
            }
            steps += 1;
            largest_raw_increase = largest_raw_increase.max(pair[1].sse - pair[0].sse);
            if pair[1].sse > pair[0].sse + tolerance {
                violations += 1;
            }
        }
    }
    verdict(
        violations == 0,
        format!(
            "100 runs, {steps} reassign/refit iterations, {violations} sse increases beyond round-off (1e-12 of the starting sse; largest raw increase {largest_raw_increase:.1e}), {pruning} pruning steps excluded"
        ),
    )
}

fn life_invariants() -> Verdict {
    let glider = LifeGrid::parse_plaintext(patterns::GLIDER, Topology::Torus).unwrap();
    let board = LifeGrid::embed(&glider, 16, 16, 1, 1, Topology::Torus).unwrap();
    let frames = run(&board, 40);
    let shifts = (0..=36).all(|t| frames[t + 4] == frames[t].translate(1, 1));
    let objects = extract_objects(&frames, 4).unwrap();
    let mover = objects.len() == 1
        && objects[0].kind == ObjectKind::Mover
        && objects[0].period == 4
        && objects[0].displacement == (1, 1);

    let classify = |text: &str| {
        let p = LifeGrid::parse_plaintext(text, Topology::Torus).unwrap();
        let g = LifeGrid::embed(&p, 16, 16, 6, 6, Topology::Torus).unwrap();
        let objs = extract_objects(&run(&g, 20), 4).unwrap();
        (objs.len(), objs.first().map(|o| (o.kind, o.period)))
    };
    let block = classify(patterns::BLOCK) == (1, Some((ObjectKind::StillLife, 1)));
    let blinker = classify(patterns::BLINKER) == (1, Some((ObjectKind::Oscillator, 2)));

    let mut rng = SplitMix64::seed_from_u64(7);
    let mut commute = 0;
    for _ in 0..100 {
        let mut g = LifeGrid::new(16, 16, Topology::Torus).unwrap();
        for y in 0..16 {
            for x in 0..16 {
                g.set(x, y, rng.random_bool(0.35));
            }
        }
        let (dx, dy) = (rng.random_range(-16..=16), rng.random_range(-16..=16));
        if life_step(&g.translate(dx, dy)) == life_step(&g).translate(dx, dy) {
            commute += 1;
        }
    }
    verdict(
        shifts && mover && block && blinker && commute == 100,
        format!(
            "glider frame t+4 = frame t shifted (1,1) over 40 generations: {shifts}, mover period 4: {mover}, block: {block}, blinker: {blinker}, translation commutes {commute}/100"
        ),
    )
}

fn entropy_sanity() -> Verdict {
    let mut lines = Vec::new();
    let mut pass = true;
    for (i, sigma) in [0.5, 1.0, 2.0].into_iter().enumerate() {
        let mut rng = SplitMix64::seed_from_u64(100 + i as u64);
        let normal = Normal::new(0.0, sigma).unwrap();
        let xs: Vec<f64> = (0..10_000).map(|_| normal.sample(&mut rng)).collect();
        let est = differential_entropy_gaussian_fit(&SampleSet::scalar(&xs).unwrap()).unwrap().nats;
        let exact = gaussian_entropy_nats(&[sigma]);
        let err = (est - exact).abs();
        pass &= err < 0.05;
        lines.push(format!("sigma {sigma}: {est:.4} vs {exact:.4} (err {err:.4})"));
    }
    verdict(pass, lines.join(", "))
}

fn cie(args: &[&str], out: &Path) -> Result<(), String> {
    let o = Command::new(env!("CARGO_BIN_EXE_cie"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?;
    if o.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?}: {}", String::from_utf8_lossy(&o.stderr).trim()))
    }
}

fn determinism() -> Verdict {
    let dir = tempfile::TempDir::new().unwrap();
    let attempt = |tag: &str| -> Result<Vec<Vec<u8>>, String> {
        let root = dir.path().join(tag);
        let read = |p: std::path::PathBuf| std::fs::read(&p).map_err(|e| format!("{}: {e}", p.display()));
        cie(&["graph-demo", "--paper-example", "--blocks", "1-4,5-8", "--format", "json"], &root.join("graph"))?;
        cie(&["simulate", "--seed", "42", "--format", "csv"], &root.join("world"))?;
        let input = root.join("world").join("trajectory.csv");
        cie(&["infer", "--input", input.to_str().unwrap(), "--seed", "42", "--format", "json"], &root.join("infer"))?;
        cie(&["life", "--builtin", "glider", "--generations", "40", "--zizo", "--format", "json"], &root.join("life"))?;
        Ok(vec![
            read(root.join("graph/graph_report.json"))?,
            read(input)?,
            read(root.join("infer/model.json"))?,
            read(root.join("life/life_report.json"))?,
        ])
    };
    match (attempt("a"), attempt("b")) {
        (Ok(a), Ok(b)) => {
            let names = ["graph_report.json", "trajectory.csv", "model.json", "life_report.json"];
            let differing: Vec<&str> = names.iter().zip(a.iter().zip(&b)).filter(|(_, (x, y))| x != y).map(|(n, _)| *n).collect();
            let sizes: usize = a.iter().map(Vec::len).sum();
            if differing.is_empty() {
                verdict(true, format!("two CLI runs of criteria 1, 4, 7 byte-identical ({sizes} bytes compared)"))
            } else {
                verdict(false, format!("outputs differ: {}", differing.join(", ")))
            }
        }
        (Err(e), _) | (_, Err(e)) => verdict(false, e),
    }
}

fn main() {
    let mut verdicts = Vec::new();
    verdicts.push((1, "graph example exactness", timed(Some(Duration::from_secs(1)), graph_example)));
    verdicts.push((2, "conservation over random graphs", timed(Some(Duration::from_secs(10)), conservation)));
    verdicts.push((3, "planted-partition recovery", timed(Some(Duration::from_secs(30)), planted_recovery)));
    let mut four = None;
    let ds = default_dataset();
    let v4 = timed(Some(Duration::from_secs(60)), || {
        let (v, model) = experiment(&default_dataset());
        four = Some(model);
        v
    });
    verdicts.push((4, "hidden-object experiment", v4));
    let four = four.unwrap();
    verdicts.push((5, "underfit ordering", timed(None, || underfit_ordering(&ds, &four))));
    verdicts.push((6, "hard-EM monotonicity", timed(None, anneal_monotonicity)));
    verdicts.push((7, "Life invariants", timed(Some(Duration::from_secs(5)), life_invariants)));
    verdicts.push((8, "Gaussian entropy estimator", timed(None, entropy_sanity)));
    verdicts.push((9, "determinism", timed(None, determinism)));

    let mut failed = 0;
    for (n, name, v) in &verdicts {
        println!("{} criterion {n} ({name}): {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        if !v.pass {
            failed += 1;
        }
    }
    println!("{} passed, {failed} failed", verdicts.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
