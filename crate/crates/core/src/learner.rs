//! Learning a subset weighting by annealing `λ` down from 1.
//!
//! Stage `i` uses `λ^[i](e) = max((1 + 1/2m)^{−i}, λ(e))`. Starting from
//! `w^[0] ≡ 1`, each stage estimates `Ẑ_∅/Ẑ_S` under `(λ^[i], w^[i])` for every
//! pair `S` and multiplies it into `w_S` to get `w^[i+1]`.

use num_bigint::BigInt;
use num_traits::One;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{EdgeLambda, SubsetWeighting, VertexPair, WeightedGraph};
use crate::oracle::Oracle;
use crate::rational::{to_f64, Rational};
use crate::seed::{derive_seed, LEARN};
use crate::worm::{class_counts, estimate_ratio_with_plan, ratio_plan, EstimatorConfig, RatioEstimate, WormKernel};

/// Accuracy of every learning estimate.
pub const LEARN_EPSILON: f64 = 0.125;

/// The annealing sequence `λ^[0], …, λ^[t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    m: usize,
    t: usize,
    stages: Vec<EdgeLambda>,
}

impl Schedule {
    /// Number of stages `t`; `stage(t)` is the target `λ`.
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn stage(&self, i: usize) -> &EdgeLambda {
        &self.stages[i]
    }

    pub fn stages(&self) -> &[EdgeLambda] {
        &self.stages
    }
}

/// Smallest `t ≥ 0` with `(1 + 1/2m)^t ≥ 1/λ`, i.e. `⌈ln(1/λ)/ln(1 + 1/2m)⌉`, exactly.
fn stages_for(lambda: &Rational, growth: &Rational) -> usize {
    let guess = (to_f64(&lambda.recip()).ln() / to_f64(growth).ln()).floor() as i64 - 2;
    let mut t = guess.max(0) as usize;
    let mut acc = lambda * crate::rational::pow(growth, t as u64);
    while acc < Rational::one() {
        acc *= growth;
        t += 1;
    }
    t
}

pub fn build_schedule(graph: &WeightedGraph, lambda: &EdgeLambda) -> Result<Schedule> {
    let m = graph.m();
    if m == 0 {
        return Err(Error::Argument("the graph has no edges; there are no weights to learn".into()));
    }
    if lambda.len() != m {
        return Err(Error::Argument(format!("{} λ values for {m} edges", lambda.len())));
    }
    let growth = Rational::new(BigInt::from(2 * m + 1), BigInt::from(2 * m));
    let t = lambda
        .values()
        .iter()
        .map(|l| stages_for(l, &growth))
        .max()
        .unwrap_or(0);
    let mut stages = Vec::with_capacity(t + 1);
    let mut cap = Rational::one();
    for _ in 0..=t {
        let values = lambda.values().iter().map(|l| l.max(&cap).clone()).collect();
        stages.push(EdgeLambda::from_values(values)?);
        cap /= &growth;
    }
    Ok(Schedule { m, t, stages })
}

/// `w^[0]`: every pair weight equal to one.
pub fn initial_weights(n: usize) -> SubsetWeighting {
    SubsetWeighting::ones(n)
}

/// Sampling knobs for learning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LearnConfig {
    pub c_mix: f64,
    pub sample_scale: f64,
    /// One set of `2T` chains per stage serves every pair. Each pair's estimate
    /// keeps its own accuracy guarantee and the union bound over pairs still
    /// applies, so only the cost changes.
    pub share_stage_chains: bool,
    pub seed: u64,
}

impl Default for LearnConfig {
    fn default() -> Self {
        LearnConfig {
            c_mix: 1.0,
            sample_scale: 1.0,
            share_stage_chains: false,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PairEstimate {
    pub u: usize,
    pub v: usize,
    #[serde(flatten)]
    pub estimate: RatioEstimate,
}

/// Diagnostics of one learning stage.
#[derive(Debug, Clone, Serialize)]
pub struct StageRecord {
    pub stage: usize,
    pub lambda_min: f64,
    pub samples: u64,
    pub chain_len: u64,
    pub steps: u64,
    pub estimates: Vec<PairEstimate>,
    /// `w^[stage+1]`.
    #[serde(skip)]
    pub weights_after: SubsetWeighting,
}

#[derive(Debug, Clone)]
pub struct LearnedWeights {
    pub schedule: Schedule,
    pub weighting: SubsetWeighting,
    pub stages: Vec<StageRecord>,
    pub total_steps: u64,
}

/// Runs the annealing sequence and returns `w^[t]`.
///
/// The graph must be connected with at least one edge. Each estimate uses
/// `ε = 1/8` and `δ* = δ/(n² t)`.
pub fn learn_weights(
    graph: &WeightedGraph,
    lambda: &EdgeLambda,
    delta: f64,
    cfg: &LearnConfig,
) -> Result<LearnedWeights> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Argument(format!("δ = {delta} must lie in (0, 1)")));
    }
    if !graph.is_connected() {
        return Err(Error::Argument("weight learning needs a connected graph".into()));
    }
    let schedule = build_schedule(graph, lambda)?;
    let n = graph.n();
    let t = schedule.t();
    let mut w = initial_weights(n);
    let mut stages = Vec::with_capacity(t);
    let mut total_steps = 0u64;
    if t == 0 {
        return Ok(LearnedWeights {
            schedule,
            weighting: w,
            stages,
            total_steps,
        });
    }
    let delta_star = delta / ((n * n) as f64 * t as f64);
    let pairs: Vec<VertexPair> = VertexPair::all(n).collect();
    for i in 0..t {
        let lam_i = schedule.stage(i);
        let est_cfg = EstimatorConfig {
            c_mix: cfg.c_mix,
            sample_scale: cfg.sample_scale,
            seed: 0,
        };
        let plan = ratio_plan(n, graph.m(), to_f64(lam_i.min()), LEARN_EPSILON, delta_star, &est_cfg)?;
        let kernel = WormKernel::new(graph, lam_i, &w)?;
        let mut estimates = Vec::with_capacity(pairs.len());
        let mut steps = 0u64;
        if cfg.share_stage_chains {
            let seed = derive_seed(cfg.seed, &[LEARN, i as u64]);
            let first = class_counts(&kernel, plan.chain_len, plan.samples, seed, crate::worm::PHASE_EMPTY);
            let second = class_counts(&kernel, plan.chain_len, plan.samples, seed, crate::worm::PHASE_PAIR);
            steps = 2 * plan.samples * plan.chain_len;
            let x = first[0];
            for &p in &pairs {
                let y = second[1 + p.index(n)];
                if x == 0 || y == 0 {
                    return Err(stage_error(
                        i,
                        p,
                        Error::InsufficientSamples {
                            empty_hits: x,
                            pair_hits: y,
                            samples: plan.samples,
                        },
                    ));
                }
                estimates.push(PairEstimate {
                    u: p.u(),
                    v: p.v(),
                    estimate: RatioEstimate {
                        ratio: x as f64 / y as f64,
                        empty_hits: x,
                        pair_hits: y,
                        samples: plan.samples,
                        chain_len: plan.chain_len,
                        total_steps: 0,
                    },
                });
            }
        } else {
            for (j, &p) in pairs.iter().enumerate() {
                let seed = derive_seed(cfg.seed, &[LEARN, i as u64, j as u64]);
                let est = estimate_ratio_with_plan(&kernel, p, &plan, seed).map_err(|e| stage_error(i, p, e))?;
                steps += est.total_steps;
                estimates.push(PairEstimate {
                    u: p.u(),
                    v: p.v(),
                    estimate: est,
                });
            }
        }
        let mut next = w.clone();
        for pe in &estimates {
            let p = VertexPair::new(pe.u, pe.v).unwrap();
            next.set(p, w.get(p) * pe.estimate.ratio)
                .map_err(|e| stage_error(i, p, e))?;
        }
        w = next;
        total_steps += steps;
        stages.push(StageRecord {
            stage: i,
            lambda_min: to_f64(lam_i.min()),
            samples: plan.samples,
            chain_len: plan.chain_len,
            steps,
            estimates,
            weights_after: w.clone(),
        });
    }
    Ok(LearnedWeights {
        schedule,
        weighting: w,
        stages,
        total_steps,
    })
}

fn stage_error(stage: usize, p: VertexPair, source: Error) -> Error {
    Error::Stage {
        stage,
        u: p.u(),
        v: p.v(),
        source: Box::new(source),
    }
}

/// Exact check of `1/2 ≤ Ẑ_S/Ẑ_∅ ≤ 2` for every pair, with `Ẑ_S = w_S Z_S`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightAudit {
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub valid: bool,
}

pub fn audit_weighting(
    oracle: &Oracle,
    graph: &WeightedGraph,
    lambda: &EdgeLambda,
    w: &SubsetWeighting,
) -> Result<WeightAudit> {
    let z = oracle.even_partitions(graph, lambda.values(), 2)?;
    let z0 = z.get_mask(0);
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio: f64 = 0.0;
    let mut valid = true;
    for (p, wp) in w.iter() {
        let exact = z.get_mask((1 << p.u()) | (1 << p.v())) / &z0;
        let weight = crate::rational::from_f64(wp)?;
        let r = &exact * &weight;
        let half = Rational::new(BigInt::one(), BigInt::from(2));
        let two = Rational::from_integer(BigInt::from(2));
        valid &= r >= half && r <= two;
        let rf = to_f64(&r);
        min_ratio = min_ratio.min(rf);
        max_ratio = max_ratio.max(rf);
    }
    Ok(WeightAudit {
        min_ratio,
        max_ratio,
        valid,
    })
}
