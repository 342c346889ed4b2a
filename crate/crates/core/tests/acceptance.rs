//! Acceptance suite: one check per criterion, each printing a PASS/FAIL line.
//!
//! Run with `cargo test --release --test acceptance`.
//! Set `WORMCOV_ACCEPTANCE=3,5` to run a subset of criteria.

use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use statrs::distribution::{Beta, ContinuousCDF};

use wormcov::fpras::{estimate_covariance, Budget};
use wormcov::gadget::reduction::{recover_partition, ExactSignOracle, TiePolicy};
use wormcov::gadget::build_gadget;
use wormcov::learner::{audit_weighting, learn_weights, LearnConfig};
use wormcov::model::catalog::{connected_graphs, random_connected_graph};
use wormcov::model::{lambda_of_beta, IsingInstance, SubsetWeighting, VertexPair, WeightedGraph};
use wormcov::oracle::{van_der_waerden_factor, Oracle};
use wormcov::rational::{pow, ratio, to_f64};
use wormcov::seed::chain_rng;
use wormcov::worm::exact::ExactChain;
use wormcov::worm::{mixing_budget_raw, ratio_plan, EstimatorConfig, WormKernel};

struct Outcome {
    pass: bool,
    detail: String,
}

fn beta3(n: usize, edges: &[(usize, usize)]) -> IsingInstance {
    let e: Vec<_> = edges.iter().map(|&(u, v)| (u, v, 2i64, 1i64)).collect();
    IsingInstance::ferromagnetic(n, &e).unwrap()
}

fn exact_weights(oracle: &Oracle, inst: &IsingInstance) -> SubsetWeighting {
    let lam = lambda_of_beta(inst).unwrap();
    let z = oracle.even_partitions(inst.graph(), lam.values(), 2).unwrap();
    let z0 = z.get_mask(0);
    let mut w = SubsetWeighting::ones(inst.n());
    for p in VertexPair::all(inst.n()) {
        let zs = z.get_mask((1 << p.u()) | (1 << p.v()));
        w.set(p, to_f64(&(&z0 / zs))).unwrap();
    }
    w
}

fn uniform_weights(rng: &mut impl Rng, n: usize) -> SubsetWeighting {
    let mut w = SubsetWeighting::ones(n);
    for p in VertexPair::all(n) {
        w.set(p, 2f64.powf(rng.gen_range(-2.0..2.0))).unwrap();
    }
    w
}

/// One-sided Clopper–Pearson lower bound at confidence `1 − alpha` for `k` successes in `n`.
fn clopper_pearson_lower(k: u64, n: u64, alpha: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    Beta::new(k as f64, (n - k + 1) as f64).unwrap().inverse_cdf(alpha)
}

/// Exact identities on all connected graphs with n ≤ 6 and 100 random graphs with n ≤ 8, m ≤ 14.
fn criterion_1(oracle: &Oracle) -> Outcome {
    let mut graphs: Vec<(usize, Vec<(usize, usize)>)> = Vec::new();
    for n in 1..=6 {
        graphs.extend(connected_graphs(n, 15).into_iter().map(|e| (n, e)));
    }
    let catalog = graphs.len();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(11);
    for _ in 0..100 {
        let n = rng.gen_range(2..=8usize);
        let m = rng.gen_range(n - 1..=(n * (n - 1) / 2).min(14));
        graphs.push((n, random_connected_graph(&mut rng, n, m)));
    }
    let mut failures = Vec::new();
    let mut sets_checked = 0usize;
    for (n, edges) in &graphs {
        let inst = beta3(*n, edges);
        let g = inst.graph();
        let bad = oracle.worm_identity_failures(&inst, 4).unwrap();
        sets_checked += (1u64..(1 << n)).filter(|m| m.count_ones() % 2 == 0 && m.count_ones() <= 4).count();
        let lam = lambda_of_beta(&inst).unwrap();
        let z0 = oracle.even_partitions(g, lam.values(), 0).unwrap().get_mask(0);
        let vdw = oracle.ising_partition(g).unwrap() == van_der_waerden_factor(g) * z0;
        let es = oracle.edwards_sokal_spin_distribution(&inst).unwrap() == oracle.gibbs_distribution(g).unwrap();
        if !bad.is_empty() || !vdw || !es {
            failures.push(format!("n={n} edges={edges:?} worm={bad:?} vdw={vdw} es={es}"));
        }
    }
    Outcome {
        pass: failures.is_empty(),
        detail: format!(
            "{} graphs ({catalog} catalog + 100 random), {sets_checked} even sets; failures: {failures:?}",
            graphs.len()
        ),
    }
}

/// Detailed balance, irreducibility and laziness of the explicit transition matrix.
fn criterion_2(oracle: &Oracle) -> Outcome {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(12);
    let mut checked = 0usize;
    let mut worst_gap: f64 = 0.0;
    let mut min_loop: f64 = 1.0;
    let mut failures = Vec::new();
    for n in 2..=6 {
        for edges in connected_graphs(n, 12) {
            let inst = beta3(n, &edges);
            let lam = lambda_of_beta(&inst).unwrap();
            for (label, w) in [
                ("ones", SubsetWeighting::ones(n)),
                ("exact", exact_weights(oracle, &inst)),
                ("random", uniform_weights(&mut rng, n)),
            ] {
                let k = WormKernel::new(inst.graph(), &lam, &w).unwrap();
                let chain = ExactChain::build(&k).unwrap();
                let gap = chain.detailed_balance_gap();
                let lazy = chain.min_self_loop();
                worst_gap = worst_gap.max(gap);
                min_loop = min_loop.min(lazy);
                checked += 1;
                if gap > 1e-12 || !chain.is_irreducible() || lazy < 0.5 || !chain.is_stochastic(1e-12) {
                    failures.push(format!("n={n} edges={edges:?} weights={label} gap={gap:e} loop={lazy}"));
                }
            }
        }
    }
    Outcome {
        pass: failures.is_empty(),
        detail: format!(
            "{checked} chains, worst balance gap {worst_gap:.3e}, smallest self-loop {min_loop}; failures: {failures:?}"
        ),
    }
}

fn calibration_instances() -> Vec<(&'static str, IsingInstance, usize, usize)> {
    vec![
        ("edge", beta3(2, &[(0, 1)]), 0, 1),
        ("triangle", beta3(3, &[(0, 1), (1, 2), (0, 2)]), 0, 1),
        ("path-3", beta3(4, &[(0, 1), (1, 2), (2, 3)]), 0, 3),
        ("cycle-4", beta3(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]), 0, 2),
    ]
}

/// Calibration of the covariance estimator at ε = 0.2, δ = 0.25.
fn criterion_3(oracle: &Oracle) -> Outcome {
    let (eps, delta) = (0.2, 0.25);
    let runs = 200u64;
    let budget = Budget::desk();
    let mut pass = true;
    let mut lines = Vec::new();
    for (name, inst, s, t) in calibration_instances() {
        let exact = to_f64(&oracle.ising_covariance_exact(inst.graph(), s, t).unwrap());
        let mut hits = 0u64;
        let mut failed_runs = 0u64;
        for seed in 0..runs {
            match estimate_covariance(&inst, s, t, eps, delta, &budget, 1000 + seed) {
                Ok(r) if (r.estimate / exact).ln().abs() <= eps => hits += 1,
                Ok(_) => {}
                Err(_) => failed_runs += 1,
            }
        }
        let lower = clopper_pearson_lower(hits, runs, 0.01);
        pass &= lower >= 0.75;
        lines.push(format!("{name}: {hits}/{runs} within, 99% lower bound {lower:.3}, {failed_runs} errors"));
    }
    // The full budget on the single edge.
    let (_, edge, s, t) = calibration_instances().remove(0);
    let exact = to_f64(&oracle.ising_covariance_exact(edge.graph(), s, t).unwrap());
    let full_runs = 20u64;
    let started = Instant::now();
    let mut full_hits = 0u64;
    let mut steps = 0u64;
    for seed in 0..full_runs {
        if let Ok(r) = estimate_covariance(&edge, s, t, eps, delta, &Budget::default(), 5000 + seed) {
            steps = r.total_steps;
            if (r.estimate / exact).ln().abs() <= eps {
                full_hits += 1;
            }
        }
    }
    pass &= full_hits * 4 >= full_runs * 3;
    lines.push(format!(
        "edge at full budget: {full_hits}/{full_runs} within ({steps} steps per run, {:.0}s total)",
        started.elapsed().as_secs_f64()
    ));
    Outcome {
        pass,
        detail: lines.join("; "),
    }
}

/// Weight learning on random graphs with every stage audited exactly.
fn criterion_4(oracle: &Oracle) -> Outcome {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(14);
    let graphs = 50;
    let mut final_valid = 0;
    let mut all_stages_valid = 0;
    let mut errors = 0;
    let mut worst = (f64::INFINITY, 0.0f64);
    for g in 0..graphs {
        let n = rng.gen_range(3..=7usize);
        let m = rng.gen_range(n - 1..=(n * (n - 1) / 2).min(14));
        let edges = random_connected_graph(&mut rng, n, m);
        let inst = beta3(n, &edges);
        let lam = lambda_of_beta(&inst).unwrap();
        // Chain length about 100 m at λ = 1/2; exact mixing checks show far fewer steps suffice.
        let raw = mixing_budget_raw(n, m, 0.5, 0.125 / (32.0 * (n * n) as f64), 1.0).unwrap();
        let cfg = LearnConfig {
            c_mix: (100 * m) as f64 / raw as f64,
            sample_scale: 1e-4,
            share_stage_chains: true,
            seed: 4000 + g,
        };
        let learned = match learn_weights(inst.graph(), &lam, 0.1, &cfg) {
            Ok(l) => l,
            Err(_) => {
                errors += 1;
                continue;
            }
        };
        let mut every_stage = true;
        for rec in &learned.stages {
            let audit = audit_weighting(oracle, inst.graph(), learned.schedule.stage(rec.stage + 1), &rec.weights_after)
                .unwrap();
            every_stage &= audit.valid;
            worst = (worst.0.min(audit.min_ratio), worst.1.max(audit.max_ratio));
        }
        let fin = audit_weighting(oracle, inst.graph(), &lam, &learned.weighting).unwrap();
        if fin.valid {
            final_valid += 1;
        }
        if every_stage {
            all_stages_valid += 1;
        }
    }
    let pass = final_valid * 10 >= graphs * 9 && all_stages_valid * 10 >= graphs * 9;
    Outcome {
        pass,
        detail: format!(
            "{final_valid}/{graphs} final weightings valid, {all_stages_valid}/{graphs} runs valid at every stage, \
             {errors} errors, audited ratio range [{:.3}, {:.3}]",
            worst.0, worst.1
        ),
    }
}

/// Gadget accuracy, size bounds and exact realization.
fn criterion_5(oracle: &Oracle) -> Outcome {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(15);
    let acc = ratio(1, 1_000_000);
    let mut failures = Vec::new();
    let mut built = 0;
    let mut largest = 0;
    for b in [ratio(1, 2), ratio(1, 3)] {
        for n in [3usize, 5] {
            let lo = pow(&b, n as u64);
            let hi = lo.recip();
            for _ in 0..50 {
                let k: i64 = rng.gen_range(0..=1_000_000);
                let target = &lo + (&hi - &lo) * ratio(k, 1_000_000);
                let spec = build_gadget(n, &target, &acc, &b).unwrap();
                let close = (&spec.beta_hat - &target) <= acc && (&target - &spec.beta_hat) <= acc;
                let bounds = spec.check_bounds().is_ok();
                let fc = oracle.four_corner_reduced(&spec.realize(), 0, 1).unwrap();
                let realized = &fc.pp / &fc.pm == spec.beta_hat;
                largest = largest.max(spec.edge_count());
                built += 1;
                if !(close && bounds && realized) {
                    failures.push(format!("b={b} n={n} target={target}: close={close} bounds={bounds} realized={realized}"));
                }
            }
        }
    }
    Outcome {
        pass: failures.is_empty(),
        detail: format!("{built} gadgets, largest {largest} edges; failures: {failures:?}"),
    }
}

/// Exact recovery of Z from covariance signs on every connected graph with m ≤ 6.
fn criterion_6(oracle: &Oracle) -> Outcome {
    let mut graphs = Vec::new();
    for n in 1..=7 {
        graphs.extend(connected_graphs(n, 6).into_iter().map(|e| (n, e)));
    }
    let mut failures = Vec::new();
    let mut runs = 0;
    let mut queries = 0;
    let mut ties = 0;
    for b in [ratio(1, 2), ratio(1, 3)] {
        for (i, (n, edges)) in graphs.iter().enumerate() {
            let g = WeightedGraph::uniform(*n, edges.clone(), b.clone()).unwrap();
            let mut sign = ExactSignOracle::new(*oracle, TiePolicy::Random(chain_rng(600 + i as u64)));
            let outcome = recover_partition(&g, &b, &mut sign, None);
            queries += sign.queries;
            ties += sign.ties_seen;
            runs += 1;
            let exact = oracle.ising_partition(&g).unwrap();
            match outcome {
                Ok(r) if r.z == exact => {}
                Ok(r) => failures.push(format!("b={b} edges={edges:?}: got {} want {exact}", r.z)),
                Err(e) => failures.push(format!("b={b} edges={edges:?}: {e}")),
            }
        }
    }
    Outcome {
        pass: failures.is_empty(),
        detail: format!(
            "{} graphs x 2 weights = {runs} runs, {queries} sign queries, {ties} zero-covariance ties answered at random; \
             failures: {failures:?}",
            graphs.len()
        ),
    }
}

/// Asymptotic claims are covered by criteria 2 and 6; this records measured mixing instead.
///
/// For each calibration instance the desk chain length must bring the exact chain within
/// the estimator's total-variation target from the empty state, for every weighting at a
/// corner of the band `[w/2, 2w]` around the exact weights `w`.
fn criterion_7(oracle: &Oracle, structural: bool) -> Outcome {
    let budget = Budget::desk();
    let mut lines = Vec::new();
    let mut pass = structural;
    for (name, inst, _, _) in calibration_instances() {
        let lam = lambda_of_beta(&inst).unwrap();
        let cfg = EstimatorConfig {
            c_mix: budget.c_mix,
            sample_scale: budget.estimate_sample_scale,
            seed: 0,
        };
        let plan = ratio_plan(inst.n(), inst.m(), to_f64(lam.min()), 0.2, 0.125, &cfg).unwrap();
        let exact = exact_weights(oracle, &inst);
        let pairs: Vec<VertexPair> = VertexPair::all(inst.n()).collect();
        let mut worst: f64 = 0.0;
        for corner in 0u64..(1 << pairs.len()) {
            let mut w = exact.clone();
            for (i, &p) in pairs.iter().enumerate() {
                let f = if corner >> i & 1 == 1 { 2.0 } else { 0.5 };
                w.set(p, f * exact.get(p)).unwrap();
            }
            let k = WormKernel::new(inst.graph(), &lam, &w).unwrap();
            let chain = ExactChain::build(&k).unwrap();
            worst = worst.max(*chain.tv_profile(plan.chain_len).last().unwrap_or(&1.0));
        }
        pass &= worst <= plan.delta_tv;
        lines.push(format!(
            "{name}: worst TV {worst:.1e} after {} steps (target {:.1e})",
            plan.chain_len, plan.delta_tv
        ));
    }
    Outcome {
        pass,
        detail: format!(
            "criteria 2 and 6 {}; desk chain lengths: {}",
            if structural { "passed" } else { "did not pass" },
            lines.join(", ")
        ),
    }
}

fn selected(criterion: u32) -> bool {
    match std::env::var("WORMCOV_ACCEPTANCE") {
        Ok(list) => list.split(',').any(|s| s.trim() == criterion.to_string()),
        Err(_) => true,
    }
}

#[test]
fn acceptance_criteria() {
    let oracle = Oracle::default();
    let mut results: Vec<(u32, Outcome)> = Vec::new();
    let run = |id: u32, f: &dyn Fn() -> Outcome, results: &mut Vec<(u32, Outcome)>| {
        if selected(id) {
            let started = Instant::now();
            let out = f();
            // Written to the stderr handle directly so the line survives output capture.
            let _ = writeln!(
                std::io::stderr(),
                "criterion {id}: {} ({:.1}s) {}",
                if out.pass { "PASS" } else { "FAIL" },
                started.elapsed().as_secs_f64(),
                out.detail
            );
            results.push((id, out));
        }
    };
    run(1, &|| criterion_1(&oracle), &mut results);
    run(2, &|| criterion_2(&oracle), &mut results);
    run(3, &|| criterion_3(&oracle), &mut results);
    run(4, &|| criterion_4(&oracle), &mut results);
    run(5, &|| criterion_5(&oracle), &mut results);
    run(6, &|| criterion_6(&oracle), &mut results);
    let structural = results.iter().filter(|(id, _)| *id == 2 || *id == 6).all(|(_, o)| o.pass);
    run(7, &|| criterion_7(&oracle, structural), &mut results);
    let failed: Vec<u32> = results.iter().filter(|(_, o)| !o.pass).map(|(id, _)| *id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn clopper_pearson_reference_values() {
    // 200/200 successes: lower bound is 0.01^(1/200).
    assert!((clopper_pearson_lower(200, 200, 0.01) - 0.01f64.powf(1.0 / 200.0)).abs() < 1e-9);
    assert_eq!(clopper_pearson_lower(0, 200, 0.01), 0.0);
    let mid = clopper_pearson_lower(170, 200, 0.01);
    assert!(mid > 0.78 && mid < 0.85, "{mid}");
}
