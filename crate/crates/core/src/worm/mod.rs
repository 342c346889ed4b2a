//! The weighted worm process and the two-phase ratio estimator.
//!
//! The chain lives on edge subsets `A` whose odd-degree set `S(A)` has at most
//! two vertices, with stationary weight `Λ(A) = λ(A) · w_{S(A)}`. One step is
//! lazy with probability 1/2; otherwise a uniform edge is flipped when the
//! result stays in the state space and accepted with probability
//! `min(1, Λ(A')/Λ(A))`.

pub mod exact;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{EdgeLambda, OddSet, SubsetWeighting, Vertex, VertexPair, WeightedGraph};
use crate::seed::{chain_rng, derive_seed};

/// Steps between from-scratch recomputations of the cached `λ(A)`.
pub const REFRESH_INTERVAL: u32 = 1 << 16;

/// Phase tags for the two halves of a ratio estimate.
pub const PHASE_EMPTY: u64 = 0;
pub const PHASE_PAIR: u64 = 1;

/// Immutable per-run data shared by all chains: endpoints, `λ` and `w` as floats.
#[derive(Debug, Clone)]
pub struct WormKernel {
    n: usize,
    ends: Vec<(Vertex, Vertex)>,
    lam: Vec<f64>,
    inv_lam: Vec<f64>,
    /// `w_{u,v}` at `u * n + v` and `v * n + u`.
    wmat: Vec<f64>,
}

impl WormKernel {
    pub fn new(graph: &WeightedGraph, lambda: &EdgeLambda, w: &SubsetWeighting) -> Result<Self> {
        if lambda.len() != graph.m() {
            return Err(Error::Argument(format!(
                "{} λ values for {} edges",
                lambda.len(),
                graph.m()
            )));
        }
        if w.n() != graph.n() {
            return Err(Error::Argument(format!(
                "weighting is for {} vertices, graph has {}",
                w.n(),
                graph.n()
            )));
        }
        let n = graph.n();
        let lam = lambda.to_f64();
        if lam.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::Argument("λ underflows to zero in floating point".into()));
        }
        let mut wmat = vec![0.0; n * n];
        for (p, x) in w.iter() {
            wmat[p.u() * n + p.v()] = x;
            wmat[p.v() * n + p.u()] = x;
        }
        Ok(WormKernel {
            n,
            ends: graph.edges().to_vec(),
            inv_lam: lam.iter().map(|l| 1.0 / l).collect(),
            lam,
            wmat,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.ends.len()
    }

    #[inline]
    pub fn weight(&self, set: OddSet) -> f64 {
        match set {
            OddSet::Empty => 1.0,
            OddSet::Pair(p) => self.wmat[p.u() * self.n + p.v()],
        }
    }

    /// `λ(A)` recomputed from scratch.
    pub fn lambda_of(&self, in_a: &[bool]) -> f64 {
        in_a.iter()
            .zip(&self.lam)
            .filter(|(x, _)| **x)
            .map(|(_, l)| l)
            .product()
    }
}

/// A proposed flip that stays inside the state space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Proposal {
    pub odd: OddSet,
    /// `Λ(A ⊕ {e}) / Λ(A)`.
    pub ratio: f64,
}

/// Current configuration with incremental parity and weight bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct WormState {
    in_a: Vec<bool>,
    parity: Vec<bool>,
    odd: OddSet,
    lambda_a: f64,
    big_lambda: f64,
    since_refresh: u32,
}

fn odd_set_of(n: usize, ends: &[(Vertex, Vertex)], in_a: &[bool]) -> (Vec<bool>, Vec<Vertex>) {
    let mut parity = vec![false; n];
    for (&(u, v), &x) in ends.iter().zip(in_a) {
        if x {
            parity[u] ^= true;
            parity[v] ^= true;
        }
    }
    let odd = (0..n).filter(|&v| parity[v]).collect();
    (parity, odd)
}

impl WormState {
    /// The empty configuration.
    pub fn empty(kernel: &WormKernel) -> Self {
        WormState {
            in_a: vec![false; kernel.m()],
            parity: vec![false; kernel.n],
            odd: OddSet::Empty,
            lambda_a: 1.0,
            big_lambda: 1.0,
            since_refresh: 0,
        }
    }

    /// A configuration from edge membership flags; fails outside the state space.
    pub fn from_edges(kernel: &WormKernel, in_a: Vec<bool>) -> Result<Self> {
        if in_a.len() != kernel.m() {
            return Err(Error::Argument("edge flag count does not match the graph".into()));
        }
        let (parity, odd) = odd_set_of(kernel.n, &kernel.ends, &in_a);
        let odd = match odd.as_slice() {
            [] => OddSet::Empty,
            [a, b] => OddSet::Pair(VertexPair::new(*a, *b).unwrap()),
            _ => {
                return Err(Error::Argument(format!(
                    "{} odd vertices; the state space allows at most two",
                    odd.len()
                )))
            }
        };
        let lambda_a = kernel.lambda_of(&in_a);
        Ok(WormState {
            big_lambda: lambda_a * kernel.weight(odd),
            in_a,
            parity,
            odd,
            lambda_a,
            since_refresh: 0,
        })
    }

    /// Returns to the empty configuration without reallocating.
    pub fn reset(&mut self) {
        self.in_a.iter_mut().for_each(|x| *x = false);
        self.parity.iter_mut().for_each(|x| *x = false);
        self.odd = OddSet::Empty;
        self.lambda_a = 1.0;
        self.big_lambda = 1.0;
        self.since_refresh = 0;
    }

    pub fn odd_set(&self) -> OddSet {
        self.odd
    }

    pub fn edges(&self) -> &[bool] {
        &self.in_a
    }

    /// Cached `λ(A)`.
    pub fn lambda_a(&self) -> f64 {
        self.lambda_a
    }

    /// Cached `Λ(A)`.
    pub fn big_lambda(&self) -> f64 {
        self.big_lambda
    }

    /// The flip of edge `e`, or `None` if it would leave four odd vertices.
    #[inline]
    pub fn proposal(&self, kernel: &WormKernel, e: usize) -> Option<Proposal> {
        let (u, v) = kernel.ends[e];
        let odd = self.odd.toggle(u, v)?;
        let lam = if self.in_a[e] {
            kernel.inv_lam[e]
        } else {
            kernel.lam[e]
        };
        Some(Proposal {
            odd,
            ratio: lam * kernel.weight(odd) / kernel.weight(self.odd),
        })
    }

    #[inline]
    fn apply(&mut self, kernel: &WormKernel, e: usize, odd: OddSet) {
        let (u, v) = kernel.ends[e];
        self.lambda_a *= if self.in_a[e] {
            kernel.inv_lam[e]
        } else {
            kernel.lam[e]
        };
        self.in_a[e] ^= true;
        self.parity[u] ^= true;
        self.parity[v] ^= true;
        self.odd = odd;
        self.big_lambda = self.lambda_a * kernel.weight(odd);
    }

    #[inline]
    fn attempt<R: Rng + ?Sized>(&mut self, kernel: &WormKernel, e: usize, rng: &mut R) -> bool {
        match self.proposal(kernel, e) {
            Some(p) if p.ratio >= 1.0 || rng.gen::<f64>() < p.ratio => {
                self.apply(kernel, e, p.odd);
                true
            }
            _ => false,
        }
    }

    #[inline]
    fn tick(&mut self, kernel: &WormKernel) {
        self.since_refresh += 1;
        if self.since_refresh >= REFRESH_INTERVAL {
            self.refresh(kernel);
        }
    }

    /// Recomputes the cached weights from the edge flags.
    pub fn refresh(&mut self, kernel: &WormKernel) {
        self.lambda_a = kernel.lambda_of(&self.in_a);
        self.big_lambda = self.lambda_a * kernel.weight(self.odd);
        self.since_refresh = 0;
    }

    /// One transition. Returns whether the configuration changed.
    pub fn step<R: Rng + ?Sized>(&mut self, kernel: &WormKernel, rng: &mut R) -> bool {
        let moved = if rng.gen::<bool>() || kernel.m() == 0 {
            false
        } else {
            let e = rng.gen_range(0..kernel.m());
            self.attempt(kernel, e, rng)
        };
        self.tick(kernel);
        moved
    }

    /// `steps` transitions; lazy coins are drawn 64 at a time.
    pub fn run<R: Rng + ?Sized>(&mut self, kernel: &WormKernel, steps: u64, rng: &mut R) {
        let m = kernel.m() as u32;
        if m == 0 {
            return;
        }
        let mut bits = 0u64;
        let mut left = 0u32;
        for _ in 0..steps {
            if left == 0 {
                bits = rng.next_u64();
                left = 64;
            }
            let lazy = bits & 1 == 1;
            bits >>= 1;
            left -= 1;
            if !lazy {
                let e = rng.gen_range(0..m) as usize;
                self.attempt(kernel, e, rng);
            }
            self.tick(kernel);
        }
    }

    /// Recomputes parity, `S(A)` and `λ(A)` from scratch and compares with the cache.
    pub fn check_consistency(&self, kernel: &WormKernel) -> Result<()> {
        let (parity, odd) = odd_set_of(kernel.n, &kernel.ends, &self.in_a);
        if parity != self.parity {
            return Err(Error::Internal("cached parity disagrees with the edge set".into()));
        }
        if odd != self.odd.vertices() {
            return Err(Error::Internal(format!(
                "cached odd set {:?} disagrees with recomputed {:?}",
                self.odd, odd
            )));
        }
        let fresh = kernel.lambda_of(&self.in_a);
        if ((self.lambda_a - fresh) / fresh).abs() > 1e-9 {
            return Err(Error::Internal(format!(
                "cached λ(A) = {} drifted from {}",
                self.lambda_a, fresh
            )));
        }
        Ok(())
    }
}

/// `⌈c_mix · λ_min^{−2} · n⁴ · m² · (m + ln(1/δ))⌉`.
pub fn mixing_budget_raw(n: usize, m: usize, lambda_min: f64, delta: f64, c_mix: f64) -> Result<u64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Argument(format!("δ = {delta} must lie in (0, 1)")));
    }
    if !(c_mix > 0.0 && c_mix.is_finite()) {
        return Err(Error::Argument(format!("c_mix = {c_mix} must be positive")));
    }
    if !(lambda_min > 0.0 && lambda_min <= 1.0) {
        return Err(Error::Argument(format!("λ_min = {lambda_min} must lie in (0, 1]")));
    }
    let (n, m) = (n as f64, m as f64);
    let raw = c_mix * n.powi(4) * m * m * (m + (1.0 / delta).ln()) / (lambda_min * lambda_min);
    // Absorb rounding noise so exact products such as 11664 do not round up to 11665.
    let steps = (raw * (1.0 - 4.0 * f64::EPSILON)).ceil();
    if steps >= u64::MAX as f64 {
        return Err(Error::Argument(format!("mixing budget {raw:e} overflows")));
    }
    Ok(steps.max(1.0) as u64)
}

/// Mixing budget for a graph with edge weights `λ`.
pub fn mixing_budget(graph: &WeightedGraph, lambda: &EdgeLambda, delta: f64, c_mix: f64) -> Result<u64> {
    mixing_budget_raw(
        graph.n(),
        graph.m(),
        crate::rational::to_f64(lambda.min()),
        delta,
        c_mix,
    )
}

/// Runs one chain for `steps` steps from the empty configuration and reports `S(A)`.
pub fn run_chain_from_empty(kernel: &WormKernel, steps: u64, seed: u64) -> OddSet {
    let mut rng = chain_rng(seed);
    let mut state = WormState::empty(kernel);
    state.run(kernel, steps, &mut rng);
    state.odd_set()
}

/// Knobs for a ratio estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimatorConfig {
    /// Multiplier on the mixing budget.
    pub c_mix: f64,
    /// Multiplier on the per-phase sample count `T`.
    pub sample_scale: f64,
    /// Chain `i` of phase `φ` uses `derive_seed(seed, &[φ, i])`.
    pub seed: u64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            c_mix: 1.0,
            sample_scale: 1.0,
            seed: 0,
        }
    }
}

/// Constants of a ratio estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioPlan {
    pub theta: f64,
    /// Target total-variation distance of each chain.
    pub delta_tv: f64,
    /// Chains per phase.
    pub samples: u64,
    /// Steps per chain.
    pub chain_len: u64,
}

/// `θ = ε/8`, `δ = ε/(32n²)`, `T = ⌈ln(6/δ*) e^{8n²δ} 12n²/θ²⌉` (times `sample_scale`),
/// chain length from the mixing budget at `δ`.
pub fn ratio_plan(
    n: usize,
    m: usize,
    lambda_min: f64,
    epsilon: f64,
    delta_star: f64,
    cfg: &EstimatorConfig,
) -> Result<RatioPlan> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Argument(format!("ε = {epsilon} must lie in (0, 1)")));
    }
    if !(delta_star > 0.0 && delta_star < 1.0) {
        return Err(Error::Argument(format!("δ* = {delta_star} must lie in (0, 1)")));
    }
    if !(cfg.sample_scale > 0.0 && cfg.sample_scale.is_finite()) {
        return Err(Error::Argument(format!(
            "sample scale {} must be positive",
            cfg.sample_scale
        )));
    }
    let nf = n as f64;
    let theta = epsilon / 8.0;
    let delta_tv = epsilon / (32.0 * nf * nf);
    let t = (6.0 / delta_star).ln() * (8.0 * nf * nf * delta_tv).exp() * 12.0 * nf * nf / (theta * theta);
    let samples = (t * cfg.sample_scale).ceil().max(1.0);
    if samples >= u64::MAX as f64 {
        return Err(Error::Argument(format!("sample count {samples:e} overflows")));
    }
    Ok(RatioPlan {
        theta,
        delta_tv,
        samples: samples as u64,
        chain_len: mixing_budget_raw(n, m, lambda_min, delta_tv, cfg.c_mix)?,
    })
}

/// Outcome of one ratio estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioEstimate {
    /// `R̂ = x/y`, an estimate of `Ẑ_∅/Ẑ_S`.
    pub ratio: f64,
    /// `x`: chains of the first phase ending in `Ω_∅`.
    pub empty_hits: u64,
    /// `y`: chains of the second phase ending in `Ω_S`.
    pub pair_hits: u64,
    pub samples: u64,
    pub chain_len: u64,
    pub total_steps: u64,
}

/// Counts the chains of one phase that end in `target`.
pub fn count_hits(kernel: &WormKernel, steps: u64, samples: u64, seed: u64, phase: u64, target: OddSet) -> u64 {
    (0..samples)
        .into_par_iter()
        .map_init(
            || WormState::empty(kernel),
            |state, i| {
                state.reset();
                let mut rng = chain_rng(derive_seed(seed, &[phase, i]));
                state.run(kernel, steps, &mut rng);
                u64::from(state.odd_set() == target)
            },
        )
        .sum()
}

/// Final-state class counts of one phase: slot 0 is `∅`, pair `S` is slot `1 + S.index(n)`.
pub fn class_counts(kernel: &WormKernel, steps: u64, samples: u64, seed: u64, phase: u64) -> Vec<u64> {
    let n = kernel.n();
    let slots = 1 + n * n.saturating_sub(1) / 2;
    (0..samples)
        .into_par_iter()
        .fold(
            || (WormState::empty(kernel), vec![0u64; slots]),
            |(mut state, mut counts), i| {
                state.reset();
                let mut rng = chain_rng(derive_seed(seed, &[phase, i]));
                state.run(kernel, steps, &mut rng);
                match state.odd_set() {
                    OddSet::Empty => counts[0] += 1,
                    OddSet::Pair(p) => counts[1 + p.index(n)] += 1,
                }
                (state, counts)
            },
        )
        .map(|(_, counts)| counts)
        .reduce(
            || vec![0u64; slots],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        )
}

/// Estimates `Ẑ_∅/Ẑ_S` for `S = pair` from `2T` independent chains started at `∅`.
///
/// The graph must be connected. Fails with [`Error::InsufficientSamples`] when
/// either phase records no hit.
pub fn estimate_ratio(
    graph: &WeightedGraph,
    lambda: &EdgeLambda,
    w: &SubsetWeighting,
    pair: VertexPair,
    epsilon: f64,
    delta_star: f64,
    cfg: &EstimatorConfig,
) -> Result<RatioEstimate> {
    graph.check_vertex(pair.v())?;
    if !graph.is_connected() {
        return Err(Error::Argument(
            "the worm estimator needs a connected graph (otherwise some Ω_S is empty)".into(),
        ));
    }
    let plan = ratio_plan(
        graph.n(),
        graph.m(),
        crate::rational::to_f64(lambda.min()),
        epsilon,
        delta_star,
        cfg,
    )?;
    let kernel = WormKernel::new(graph, lambda, w)?;
    estimate_ratio_with_plan(&kernel, pair, &plan, cfg.seed)
}

pub fn estimate_ratio_with_plan(
    kernel: &WormKernel,
    pair: VertexPair,
    plan: &RatioPlan,
    seed: u64,
) -> Result<RatioEstimate> {
    let x = count_hits(kernel, plan.chain_len, plan.samples, seed, PHASE_EMPTY, OddSet::Empty);
    let y = count_hits(kernel, plan.chain_len, plan.samples, seed, PHASE_PAIR, OddSet::Pair(pair));
    if x == 0 || y == 0 {
        return Err(Error::InsufficientSamples {
            empty_hits: x,
            pair_hits: y,
            samples: plan.samples,
        });
    }
    Ok(RatioEstimate {
        ratio: x as f64 / y as f64,
        empty_hits: x,
        pair_hits: y,
        samples: plan.samples,
        chain_len: plan.chain_len,
        total_steps: 2 * plan.samples * plan.chain_len,
    })
}

/// Final states of `chains` independent runs, for diagnostics.
pub fn sample_final_states(kernel: &WormKernel, steps: u64, chains: u64, seed: u64) -> Vec<OddSet> {
    (0..chains)
        .into_par_iter()
        .map_init(
            || WormState::empty(kernel),
            |state, i| {
                state.reset();
                let mut rng = chain_rng(derive_seed(seed, &[i]));
                state.run(kernel, steps, &mut rng);
                state.odd_set()
            },
        )
        .collect()
}
