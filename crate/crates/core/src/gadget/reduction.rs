//! Exact recovery of `Z^Ising` for uniform weight `b < 1` from covariance signs.
//!
//! With `G_j` the graph on the first `j` edges and `e_j = {s_j, t_j}`,
//! `Z(G_j) = α_j Z(G_{j−1})` where `α_j = (b + ν_j)/(1 + ν_j)` and
//! `ν_j = Z_{s+,t−}(G_{j−1}) / Z_{s+,t+}(G_{j−1})`. Each `ν_j` is located by
//! binary search: a gadget implementing a point `β̂` of the current interval
//! is glued between `s_j` and `t_j`, and the sign of the covariance at
//! `(s_j, t_j)` says on which side of `β̂` the value `ν_j` lies.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::Serialize;

use super::{attach_gadget, build_gadget, split_b, GadgetSpec};
use crate::error::{Error, Result};
use crate::model::{Vertex, WeightedGraph};
use crate::oracle::Oracle;
use crate::rational::{pow, to_f64, Rational, RationalJson};
use crate::seed::ChainRng;

/// An answer of the sign oracle. At zero covariance both statements are true.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sign {
    NonNegative,
    NonPositive,
}

/// Answers "is `E[σ(s)σ(t)]` at least 0 or at most 0?" for uniform antiferromagnetic graphs.
pub trait SignOracle {
    fn sign(&mut self, graph: &WeightedGraph, s: Vertex, t: Vertex) -> Result<Sign>;
}

/// How the exact oracle answers at exactly zero covariance.
#[derive(Debug, Clone)]
pub enum TiePolicy {
    NonNegative,
    NonPositive,
    Random(ChainRng),
}

/// Sign oracle backed by exact enumeration after series-parallel elimination.
#[derive(Debug, Clone)]
pub struct ExactSignOracle {
    pub oracle: Oracle,
    pub ties: TiePolicy,
    pub queries: u64,
    pub ties_seen: u64,
}

impl ExactSignOracle {
    pub fn new(oracle: Oracle, ties: TiePolicy) -> Self {
        ExactSignOracle {
            oracle,
            ties,
            queries: 0,
            ties_seen: 0,
        }
    }
}

impl SignOracle for ExactSignOracle {
    fn sign(&mut self, graph: &WeightedGraph, s: Vertex, t: Vertex) -> Result<Sign> {
        self.queries += 1;
        let cov = self.oracle.covariance_reduced(graph, s, t)?;
        Ok(if cov.is_positive() {
            Sign::NonNegative
        } else if cov.is_negative() {
            Sign::NonPositive
        } else {
            self.ties_seen += 1;
            match &mut self.ties {
                TiePolicy::NonNegative => Sign::NonNegative,
                TiePolicy::NonPositive => Sign::NonPositive,
                TiePolicy::Random(rng) => {
                    if rng.gen::<bool>() {
                        Sign::NonNegative
                    } else {
                        Sign::NonPositive
                    }
                }
            }
        })
    }
}

/// Result of one binary search.
#[derive(Debug, Clone)]
pub struct NuSearch {
    pub nu_hat: Rational,
    pub lo: Rational,
    pub hi: Rational,
    pub queries: u32,
    /// Largest gadget used, in edges.
    pub max_gadget_edges: usize,
}

/// Upper limit on oracle calls per search, far above what any valid input needs.
const MAX_QUERIES: u32 = 100_000;

/// Locates `ν = Z_{s+,t−}/Z_{s+,t+}` of `graph` (all weights `b`) to within `δ′`.
///
/// If `exact_nu` is given, the invariant `lo ≤ ν ≤ hi` is checked after every query.
pub fn binary_search_nu(
    graph: &WeightedGraph,
    s: Vertex,
    t: Vertex,
    b: &Rational,
    delta_prime: &Rational,
    oracle: &mut dyn SignOracle,
    exact_nu: Option<&Rational>,
) -> Result<NuSearch> {
    if !delta_prime.is_positive() {
        return Err(Error::Argument(format!("δ′ = {delta_prime} must be positive")));
    }
    let n = graph.n();
    let mut lo = pow(b, n as u64);
    let mut hi = lo.recip();
    let acc = delta_prime / Rational::from_integer(BigInt::from(6));
    let two = Rational::from_integer(BigInt::from(2));
    let mut queries = 0;
    let mut max_gadget_edges = 0;
    while &hi - &lo > *delta_prime {
        if queries >= MAX_QUERIES {
            return Err(Error::Internal("binary search did not converge".into()));
        }
        let mid = (&lo + &hi) / &two;
        let spec: GadgetSpec = build_gadget(n, &mid, &acc, b)?;
        max_gadget_edges = max_gadget_edges.max(spec.edge_count());
        let spliced = attach_gadget(graph, s, t, &spec)?;
        match oracle.sign(&spliced, s, t)? {
            Sign::NonNegative => hi = spec.beta_hat,
            Sign::NonPositive => lo = spec.beta_hat,
        }
        queries += 1;
        if let Some(nu) = exact_nu {
            if *nu < lo || *nu > hi {
                return Err(Error::Internal(format!(
                    "ν = {nu} left the search interval [{lo}, {hi}]"
                )));
            }
        }
    }
    Ok(NuSearch {
        nu_hat: (&lo + &hi) / &two,
        lo,
        hi,
        queries,
        max_gadget_edges,
    })
}

/// Per-edge record of a reduction run.
#[derive(Debug, Clone, Serialize)]
pub struct EdgeStep {
    pub index: usize,
    pub s: Vertex,
    pub t: Vertex,
    pub nu_hat: RationalJson,
    pub alpha_hat: RationalJson,
    pub nu_hat_f64: f64,
    pub alpha_hat_f64: f64,
    pub queries: u32,
    pub max_gadget_edges: usize,
    /// Audit mode only: exact `ν_j` and whether `|ν̂ − ν| ≤ δ′` and `|ln(α̂/α)| ≤ δ/m`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu_exact: Option<RationalJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu_within_delta_prime: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_within_bound: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct Recovery {
    pub z: Rational,
    pub z_hat: Rational,
    pub m_prime: u64,
    pub delta: Rational,
    pub delta_prime: Rational,
    pub steps: Vec<EdgeStep>,
    /// Audit mode only: the independently computed partition function.
    pub z_exact: Option<Rational>,
}

/// Smallest `m′ ≥ 0` with `b^{m′} ≤ q^{−m}` for `b = p/q` in lowest terms.
pub fn m_prime(b: &Rational, m: usize) -> u64 {
    let (p, q) = split_b(b);
    let target = pow(&Rational::from_integer(q.clone()), m as u64).recip();
    let bq = Rational::new(p, q);
    let mut k = 0u64;
    let mut power = Rational::one();
    while power > target {
        power *= &bq;
        k += 1;
    }
    k
}

/// Recovers `Z^Ising` of the graph with every edge weight replaced by `b`.
///
/// Passing `audit` checks every search interval and the final value against
/// exact computation; the reduction itself never looks at them.
pub fn recover_partition(
    graph: &WeightedGraph,
    b: &Rational,
    oracle: &mut dyn SignOracle,
    audit: Option<&Oracle>,
) -> Result<Recovery> {
    if !b.is_positive() || *b >= Rational::one() {
        return Err(Error::Argument(format!("b = {b} must lie in (0, 1)")));
    }
    let n = graph.n();
    let m = graph.m();
    let g = WeightedGraph::uniform(n, graph.edges().to_vec(), b.clone())?;
    let two_n = pow(&Rational::from_integer(BigInt::from(2)), n as u64);
    let (_, q) = split_b(b);
    let mp = m_prime(b, m);
    let b_mp = pow(b, mp);
    let delta = &b_mp / pow(&Rational::from_integer(BigInt::from(2)), n as u64 + 3);
    if m == 0 {
        return Ok(Recovery {
            z: two_n.clone(),
            z_hat: two_n,
            m_prime: mp,
            delta,
            delta_prime: Rational::zero(),
            steps: Vec::new(),
            z_exact: None,
        });
    }
    let delta_prime = b * &delta / Rational::from_integer(BigInt::from(5 * m));
    let mut z_hat = two_n;
    let mut steps = Vec::with_capacity(m);
    for j in 0..m {
        let prev = g.edge_prefix(j);
        let (s, t) = g.edges()[j];
        let exact_nu = match audit {
            Some(o) => {
                let fc = o.four_corner_reduced(&prev, s, t)?;
                Some(fc.pm / fc.pp)
            }
            None => None,
        };
        let search = binary_search_nu(&prev, s, t, b, &delta_prime, oracle, exact_nu.as_ref())?;
        let one = Rational::one();
        let alpha_hat = (b + &search.nu_hat) / (&one + &search.nu_hat);
        z_hat *= &alpha_hat;
        let (nu_ok, alpha_ok) = match &exact_nu {
            Some(nu) => {
                let alpha = (b + nu) / (&one + nu);
                let log_err = (to_f64(&(&alpha_hat / &alpha))).ln().abs();
                (
                    Some((&search.nu_hat - nu).abs() <= delta_prime),
                    Some(log_err <= to_f64(&delta) / m as f64),
                )
            }
            None => (None, None),
        };
        steps.push(EdgeStep {
            index: j,
            s,
            t,
            nu_hat_f64: to_f64(&search.nu_hat),
            alpha_hat_f64: to_f64(&alpha_hat),
            nu_hat: (&search.nu_hat).into(),
            alpha_hat: (&alpha_hat).into(),
            queries: search.queries,
            max_gadget_edges: search.max_gadget_edges,
            nu_exact: exact_nu.as_ref().map(Into::into),
            nu_within_delta_prime: nu_ok,
            alpha_within_bound: alpha_ok,
        });
    }
    // Z is an integer combination of b^j, hence a multiple of q^{−m}; the estimate
    // is within b^{m′}/4 ≤ q^{−m}/4 of it, so the nearest multiple is Z.
    let scale = Rational::from_integer(q.pow(m as u32));
    let scaled = &z_hat * &scale;
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    let nearest = (scaled + half).floor().to_integer();
    let z = Rational::new(nearest, q.pow(m as u32));
    let window = &b_mp / Rational::from_integer(BigInt::from(4));
    if (&z_hat - &z).abs() > window {
        return Err(Error::Internal(format!(
            "no representable value within b^m′/4 of the estimate {}",
            to_f64(&z_hat)
        )));
    }
    let z_exact = match audit {
        Some(o) => Some(o.ising_partition_reduced(&g)?),
        None => None,
    };
    if let Some(exact) = &z_exact {
        if *exact != z {
            return Err(Error::Internal(format!("recovered Z = {z} but enumeration gives {exact}")));
        }
    }
    Ok(Recovery {
        z,
        z_hat,
        m_prime: mp,
        delta,
        delta_prime,
        steps,
        z_exact,
    })
}
