//! The worm transition matrix written out explicitly for small graphs.
//!
//! Rows are built from [`WormState::proposal`], so the matrix follows exactly
//! the same proposal and acceptance rules as the sampler.

use std::collections::{HashMap, VecDeque};

use super::{WormKernel, WormState};
use crate::error::{Error, Result};
use crate::model::OddSet;

/// Largest edge count for which the state space is enumerated.
pub const MAX_EXACT_EDGES: usize = 20;

#[derive(Debug, Clone)]
pub struct ExactChain {
    /// Edge masks of the states; index 0 is the empty configuration.
    pub states: Vec<u64>,
    pub odd: Vec<OddSet>,
    /// `Λ(A)` per state.
    pub weights: Vec<f64>,
    /// Off-diagonal transitions `(target, probability)`.
    pub rows: Vec<Vec<(usize, f64)>>,
    pub self_loop: Vec<f64>,
}

impl ExactChain {
    pub fn build(kernel: &WormKernel) -> Result<Self> {
        let (n, m) = (kernel.n(), kernel.m());
        if m > MAX_EXACT_EDGES {
            return Err(Error::TooLarge {
                what: "edge count",
                size: m,
                cap: MAX_EXACT_EDGES,
            });
        }
        if n > 64 {
            return Err(Error::TooLarge {
                what: "vertex count",
                size: n,
                cap: 64,
            });
        }
        let vmask: Vec<u64> = kernel.ends.iter().map(|&(u, v)| (1u64 << u) | (1u64 << v)).collect();
        let mut states = Vec::new();
        for a in 0u64..(1u64 << m) {
            let odd = (0..m).filter(|&e| a >> e & 1 == 1).fold(0u64, |acc, e| acc ^ vmask[e]);
            if odd.count_ones() <= 2 {
                states.push(a);
            }
        }
        let index: HashMap<u64, usize> = states.iter().enumerate().map(|(i, &a)| (a, i)).collect();
        let mut odd = Vec::with_capacity(states.len());
        let mut weights = Vec::with_capacity(states.len());
        let mut rows = Vec::with_capacity(states.len());
        let mut self_loop = Vec::with_capacity(states.len());
        let move_prob = if m == 0 { 0.0 } else { 0.5 / m as f64 };
        for &a in &states {
            let flags: Vec<bool> = (0..m).map(|e| a >> e & 1 == 1).collect();
            let state = WormState::from_edges(kernel, flags)?;
            odd.push(state.odd_set());
            weights.push(state.big_lambda());
            let mut row = Vec::new();
            // Holding mass: the lazy half plus every refused or rejected move.
            // Summed this way it cannot round below 1/2.
            let mut refused = 0.0;
            for e in 0..m {
                match state.proposal(kernel, e) {
                    Some(p) => {
                        let accept = p.ratio.min(1.0);
                        row.push((index[&(a ^ 1 << e)], move_prob * accept));
                        refused += 1.0 - accept;
                    }
                    None => refused += 1.0,
                }
            }
            rows.push(row);
            self_loop.push(if m == 0 { 1.0 } else { 0.5 + move_prob * refused });
        }
        Ok(ExactChain {
            states,
            odd,
            weights,
            rows,
            self_loop,
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// `π ∝ Λ`, normalised.
    pub fn stationary(&self) -> Vec<f64> {
        let total: f64 = self.weights.iter().sum();
        self.weights.iter().map(|w| w / total).collect()
    }

    /// `max |π(A)P(A,B) − π(B)P(B,A)|` over all pairs of states.
    pub fn detailed_balance_gap(&self) -> f64 {
        let pi = self.stationary();
        let mut gap: f64 = 0.0;
        for (a, row) in self.rows.iter().enumerate() {
            for &(b, p) in row {
                let back = self.rows[b]
                    .iter()
                    .find(|&&(c, _)| c == a)
                    .map(|&(_, q)| q)
                    .unwrap_or(0.0);
                gap = gap.max((pi[a] * p - pi[b] * back).abs());
            }
        }
        gap
    }

    pub fn min_self_loop(&self) -> f64 {
        self.self_loop.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Rows sum to one and every probability is in `[0, 1]`.
    pub fn is_stochastic(&self, tol: f64) -> bool {
        self.rows.iter().zip(&self.self_loop).all(|(row, &stay)| {
            let sum: f64 = row.iter().map(|&(_, p)| p).sum::<f64>() + stay;
            (sum - 1.0).abs() <= tol && stay >= -tol && row.iter().all(|&(_, p)| (0.0..=1.0).contains(&p))
        })
    }

    /// Every state reaches every other through positive-probability moves.
    pub fn is_irreducible(&self) -> bool {
        let reach = |forward: bool| {
            let mut adj: Vec<Vec<usize>> = vec![Vec::new(); self.len()];
            for (a, row) in self.rows.iter().enumerate() {
                for &(b, p) in row {
                    if p > 0.0 {
                        if forward {
                            adj[a].push(b);
                        } else {
                            adj[b].push(a);
                        }
                    }
                }
            }
            let mut seen = vec![false; self.len()];
            let mut queue = VecDeque::from([0usize]);
            seen[0] = true;
            while let Some(x) = queue.pop_front() {
                for &y in &adj[x] {
                    if !seen[y] {
                        seen[y] = true;
                        queue.push_back(y);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reach(true) && reach(false)
    }

    /// One application of the transition matrix to a row distribution.
    pub fn advance(&self, dist: &[f64]) -> Vec<f64> {
        let mut next: Vec<f64> = dist.iter().zip(&self.self_loop).map(|(d, s)| d * s).collect();
        for (a, row) in self.rows.iter().enumerate() {
            if dist[a] == 0.0 {
                continue;
            }
            for &(b, p) in row {
                next[b] += dist[a] * p;
            }
        }
        next
    }

    /// Law of the state after `steps` steps from the empty configuration.
    pub fn distribution_after(&self, steps: u64) -> Vec<f64> {
        let mut dist = vec![0.0; self.len()];
        dist[0] = 1.0;
        for _ in 0..steps {
            dist = self.advance(&dist);
        }
        dist
    }

    /// Total-variation distance to `π` after each of `1..=steps` steps from `∅`.
    pub fn tv_profile(&self, steps: u64) -> Vec<f64> {
        let pi = self.stationary();
        let mut dist = vec![0.0; self.len()];
        dist[0] = 1.0;
        (0..steps)
            .map(|_| {
                dist = self.advance(&dist);
                0.5 * dist.iter().zip(&pi).map(|(d, p)| (d - p).abs()).sum::<f64>()
            })
            .collect()
    }

    /// Total probability of the states whose odd set is `target`.
    pub fn class_mass(&self, dist: &[f64], target: OddSet) -> f64 {
        dist.iter()
            .zip(&self.odd)
            .filter(|(_, o)| **o == target)
            .map(|(d, _)| d)
            .sum()
    }
}
