//! Path gadgets that implement a target edge weight with uniform weight `b < 1`.
//!
//! An `ℓ`-edge path between `s` and `t` has corner ratio
//! `ζ_ℓ = Z_{s+,t+}/Z_{s+,t−} = 1 + 2/(c^ℓ − 1)` with `c = (b+1)/(b−1) < −1`.
//! Paths glued in parallel at their endpoints multiply their ratios, so a
//! greedy choice of multiplicities `d_j` over lengths `2..=2L+1` approaches
//! any target in `[b^n, b^{−n}]`.

pub mod reduction;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{IsingInstance, Mode, Vertex, WeightedGraph};
use crate::rational::{pow, Rational, RationalJson};

fn check_b(b: &Rational) -> Result<()> {
    if !b.is_positive() || *b >= Rational::one() {
        return Err(Error::Argument(format!("b = {b} must lie in (0, 1)")));
    }
    Ok(())
}

/// `c = (b + 1)/(b − 1)`.
pub fn c_of(b: &Rational) -> Rational {
    (b + Rational::one()) / (b - Rational::one())
}

/// `ζ_ℓ = f_ℓ/a_ℓ = 1 + 2/(c^ℓ − 1)`.
pub fn zeta(ell: u32, b: &Rational) -> Result<Rational> {
    check_b(b)?;
    if ell == 0 {
        return Err(Error::Argument("paths need at least one edge".into()));
    }
    let c = c_of(b);
    Ok(Rational::one() + Rational::from_integer(BigInt::from(2)) / (pow(&c, ell as u64) - Rational::one()))
}

/// Smallest integer `≥ x`.
fn ceil(x: &Rational) -> BigInt {
    x.ceil().to_integer()
}

/// `d = ⌈c⁴/(c² − 1)⌉`, the bound on `d_j` for `j ≥ 4`.
pub fn d_bound(b: &Rational) -> BigInt {
    let c2 = pow(&c_of(b), 2);
    ceil(&(&c2 * &c2 / (&c2 - Rational::one())))
}

/// Smallest `L ≥ 1` with `c^{2L} ≥ 2/(b^n · acc) + 1`.
pub fn path_limit(n: usize, acc: &Rational, b: &Rational) -> u32 {
    let target = Rational::from_integer(BigInt::from(2)) / (pow(b, n as u64) * acc) + Rational::one();
    let c2 = pow(&c_of(b), 2);
    let mut l = 1u32;
    let mut power = c2.clone();
    while power < target {
        power *= &c2;
        l += 1;
    }
    l
}

/// Output of the gadget construction.
#[derive(Debug, Clone, PartialEq)]
pub struct GadgetSpec {
    pub b: Rational,
    pub n: usize,
    pub target: Rational,
    pub acc: Rational,
    /// Zero when the target is 1 (the empty gadget).
    pub l: u32,
    /// Non-zero multiplicities `d_j` of `j`-edge paths.
    pub d: BTreeMap<u32, u64>,
    /// `β̂ = Π_j ζ_j^{d_j}`.
    pub beta_hat: Rational,
}

impl GadgetSpec {
    pub fn vertex_count(&self) -> usize {
        2 + self.d.iter().map(|(&j, &k)| (j as usize - 1) * k as usize).sum::<usize>()
    }

    pub fn edge_count(&self) -> usize {
        self.d.iter().map(|(&j, &k)| j as usize * k as usize).sum()
    }

    pub fn d_j(&self, j: u32) -> u64 {
        self.d.get(&j).copied().unwrap_or(0)
    }

    /// The graph `J` with terminals `s = 0` and `t = 1`; internal vertices follow.
    pub fn realize(&self) -> WeightedGraph {
        let mut edges = Vec::with_capacity(self.edge_count());
        attach_paths(&mut edges, 0, 1, 2, &self.d);
        let n = self.vertex_count();
        WeightedGraph::uniform(n, edges, self.b.clone()).expect("gadget paths are simple")
    }

    /// Checks the greedy size bounds:
    /// `ζ_2^{d_2} ≤ β′`, `ζ_3^{d_3} ≥ β′` and `d_j ≤ ⌈c⁴/(c²−1)⌉` for `j ≥ 4`.
    pub fn check_bounds(&self) -> Result<()> {
        let one = Rational::one();
        if self.target > one {
            let z2 = zeta(2, &self.b)?;
            if pow(&z2, self.d_j(2)) > self.target {
                return Err(Error::Internal(format!("d_2 = {} exceeds log_ζ2 β′", self.d_j(2))));
            }
        }
        if self.target < one {
            let z3 = zeta(3, &self.b)?;
            if pow(&z3, self.d_j(3)) < self.target {
                return Err(Error::Internal(format!("d_3 = {} exceeds log_(1/ζ3)(1/β′)", self.d_j(3))));
            }
        }
        let d = d_bound(&self.b);
        for (&j, &k) in &self.d {
            if j >= 4 && BigInt::from(k) > d {
                return Err(Error::Internal(format!("d_{j} = {k} exceeds d = {d}")));
            }
        }
        let odd = self.d.keys().any(|j| j % 2 == 1);
        let even = self.d.keys().any(|j| j % 2 == 0);
        if odd && even {
            return Err(Error::Internal("gadget mixes odd and even path lengths".into()));
        }
        Ok(())
    }
}

/// Appends `k` copies of a `j`-edge path between `s` and `t` for every `(j, k)`,
/// numbering internal vertices from `next`. Returns the next free vertex.
fn attach_paths(
    edges: &mut Vec<(Vertex, Vertex)>,
    s: Vertex,
    t: Vertex,
    mut next: Vertex,
    d: &BTreeMap<u32, u64>,
) -> Vertex {
    for (&j, &k) in d {
        for _ in 0..k {
            let mut prev = s;
            for _ in 1..j {
                edges.push((prev, next));
                prev = next;
                next += 1;
            }
            edges.push((prev, t));
        }
    }
    next
}

/// Builds a gadget that `b`-implements some `β̂` with `|β̂ − β′| ≤ acc`.
pub fn build_gadget(n: usize, target: &Rational, acc: &Rational, b: &Rational) -> Result<GadgetSpec> {
    check_b(b)?;
    if !acc.is_positive() || *acc >= Rational::one() {
        return Err(Error::Argument(format!("accuracy {acc} must lie in (0, 1)")));
    }
    let lo = pow(b, n as u64);
    let hi = lo.recip();
    if *target < lo || *target > hi {
        return Err(Error::Argument(format!(
            "target {target} is outside [b^n, b^-n] = [{lo}, {hi}]"
        )));
    }
    let one = Rational::one();
    let mut spec = GadgetSpec {
        b: b.clone(),
        n,
        target: target.clone(),
        acc: acc.clone(),
        l: 0,
        d: BTreeMap::new(),
        beta_hat: one.clone(),
    };
    if *target == one {
        return Ok(spec);
    }
    spec.l = path_limit(n, acc, b);
    let above = *target > one;
    let mut rest = target.clone();
    let first = if above { 2 } else { 3 };
    for j in (first..=2 * spec.l + 1).step_by(2) {
        let z = zeta(j, b)?;
        // Even j: largest d with ζ^d ≤ rest (ζ > 1). Odd j: largest d with ζ^d ≥ rest (ζ < 1).
        let fits = |x: &Rational, r: &Rational| if above { x <= r } else { x >= r };
        let mut k = 0u64;
        let mut power = z.clone();
        while fits(&power, &rest) {
            k += 1;
            power *= &z;
        }
        if k > 0 {
            rest /= pow(&z, k);
            spec.d.insert(j, k);
        }
    }
    spec.beta_hat = target / rest;
    Ok(spec)
}

/// `G` with `J` glued on: terminal `s` of `J` becomes `u`, terminal `t` becomes `v`,
/// internal vertices are appended after the existing ones with weight `b`.
pub fn attach_gadget(graph: &WeightedGraph, u: Vertex, v: Vertex, spec: &GadgetSpec) -> Result<WeightedGraph> {
    graph.check_vertex(u)?;
    graph.check_vertex(v)?;
    if u == v {
        return Err(Error::Argument("gadget terminals must be distinct".into()));
    }
    let mut edges = graph.edges().to_vec();
    let mut beta = graph.beta().to_vec();
    let before = edges.len();
    let n = attach_paths(&mut edges, u, v, graph.n(), &spec.d);
    beta.extend(std::iter::repeat_n(spec.b.clone(), edges.len() - before));
    WeightedGraph::new(n, edges, beta)
}

/// Replaces edge `edge` of the instance by the gadget.
pub fn splice_gadget(instance: &IsingInstance, edge: usize, spec: &GadgetSpec) -> Result<IsingInstance> {
    if instance.mode() != Mode::Antiferromagnetic {
        return Err(Error::Mode("gadgets are spliced into antiferromagnetic instances".into()));
    }
    let &(u, v) = instance
        .edges()
        .get(edge)
        .ok_or_else(|| Error::Argument(format!("edge index {edge} out of range")))?;
    let graph = attach_gadget(&instance.graph().without_edge(edge)?, u, v, spec)?;
    IsingInstance::from_graph(graph, Mode::Antiferromagnetic)
}

/// JSON view of a gadget.
#[derive(Debug, Clone, Serialize)]
pub struct GadgetSummary {
    pub b: RationalJson,
    pub n: usize,
    pub target: RationalJson,
    pub acc: RationalJson,
    pub l: u32,
    pub d: BTreeMap<u32, u64>,
    pub beta_hat: RationalJson,
    pub error: RationalJson,
    pub vertices: usize,
    pub edges: usize,
}

impl From<&GadgetSpec> for GadgetSummary {
    fn from(spec: &GadgetSpec) -> Self {
        GadgetSummary {
            b: (&spec.b).into(),
            n: spec.n,
            target: (&spec.target).into(),
            acc: (&spec.acc).into(),
            l: spec.l,
            d: spec.d.clone(),
            beta_hat: (&spec.beta_hat).into(),
            error: (&(&spec.beta_hat - &spec.target).abs()).into(),
            vertices: spec.vertex_count(),
            edges: spec.edge_count(),
        }
    }
}

/// Denominator and numerator of `b` in lowest terms.
pub(crate) fn split_b(b: &Rational) -> (BigInt, BigInt) {
    let g = b.numer().gcd(b.denom());
    (b.numer() / &g, b.denom() / &g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::Oracle;
    use crate::rational::{int, ratio};

    #[test]
    fn zeta_examples() {
        let b = ratio(1, 2);
        assert_eq!(zeta(2, &b).unwrap(), ratio(5, 4));
        assert_eq!(zeta(3, &b).unwrap(), ratio(13, 14));
        assert_eq!(zeta(1, &b).unwrap(), b);
        // ζ_2 = (b² + 1)/(2b) and 1/ζ_3 = (1 + 3b²)/(b(3 + b²)).
        for b in [ratio(1, 3), ratio(2, 5), ratio(9, 10)] {
            let one = int(1);
            assert_eq!(zeta(2, &b).unwrap(), (&b * &b + &one) / (int(2) * &b));
            assert_eq!(
                zeta(3, &b).unwrap().recip(),
                (&one + int(3) * &b * &b) / (&b * (int(3) + &b * &b))
            );
        }
    }

    #[test]
    fn zeta_matches_path_corners() {
        let o = Oracle::default();
        let b = ratio(1, 2);
        for ell in 1..=6u32 {
            let edges: Vec<_> = (0..ell as usize).map(|i| (i, i + 1)).collect();
            let g = WeightedGraph::uniform(ell as usize + 1, edges, b.clone()).unwrap();
            let fc = o.four_corner(&g, 0, ell as usize).unwrap();
            assert_eq!(fc.pp / fc.pm, zeta(ell, &b).unwrap(), "ℓ = {ell}");
        }
    }

    #[test]
    fn zeta_ordering() {
        for b in [ratio(1, 2), ratio(1, 3), ratio(3, 4)] {
            let z: Vec<Rational> = (1..=6).map(|l| zeta(l, &b).unwrap()).collect();
            let one = int(1);
            assert!(z[0] < z[2] && z[2] < z[4] && z[4] < one);
            assert!(one < z[5] && z[5] < z[3] && z[3] < z[1]);
        }
    }

    #[test]
    fn empty_gadget_for_one() {
        let spec = build_gadget(3, &int(1), &ratio(1, 100), &ratio(1, 2)).unwrap();
        assert!(spec.d.is_empty());
        assert_eq!(spec.beta_hat, int(1));
        let j = spec.realize();
        assert_eq!((j.n(), j.m()), (2, 0));
    }

    #[test]
    fn five_quarters_uses_one_p2() {
        let b = ratio(1, 2);
        let acc = ratio(1, 1_000_000_000);
        let spec = build_gadget(3, &ratio(5, 4), &acc, &b).unwrap();
        assert_eq!(spec.d_j(2), 1);
        assert_eq!(spec.beta_hat, ratio(5, 4));
        assert_eq!(spec.d.len(), 1);
        spec.check_bounds().unwrap();
    }

    #[test]
    fn gadget_accuracy_and_realization() {
        let o = Oracle::default();
        let b = ratio(1, 2);
        let acc = ratio(1, 1000);
        for target in [ratio(7, 3), ratio(1, 5), ratio(3, 4), ratio(15, 2), ratio(1, 8)] {
            let spec = build_gadget(3, &target, &acc, &b).unwrap();
            assert!((&spec.beta_hat - &target).abs() <= acc);
            spec.check_bounds().unwrap();
            let fc = o.four_corner_reduced(&spec.realize(), 0, 1).unwrap();
            assert_eq!(fc.pp / fc.pm, spec.beta_hat);
        }
        assert!(build_gadget(3, &int(9), &acc, &b).is_err());
        assert!(build_gadget(3, &ratio(1, 9), &acc, &b).is_err());
    }

    #[test]
    fn path_limit_is_smallest() {
        let b = ratio(1, 2);
        let acc = ratio(1, 1000);
        let l = path_limit(3, &acc, &b);
        let target = int(2) / (pow(&b, 3) * &acc) + int(1);
        let c2 = pow(&c_of(&b), 2);
        assert!(pow(&c2, l as u64) >= target);
        assert!(pow(&c2, l as u64 - 1) < target);
        assert_eq!(l, 5);
    }

    #[test]
    fn splice_counts() {
        let b = ratio(1, 2);
        let tri = IsingInstance::antiferromagnetic(3, vec![(0, 1), (1, 2), (0, 2)], vec![b.clone(); 3]).unwrap();
        let p2 = build_gadget(3, &ratio(5, 4), &ratio(1, 100), &b).unwrap();
        let g = splice_gadget(&tri, 2, &p2).unwrap();
        assert_eq!((g.n(), g.m()), (4, 4));
        let empty = build_gadget(3, &int(1), &ratio(1, 100), &b).unwrap();
        let edge = IsingInstance::antiferromagnetic(2, vec![(0, 1)], vec![b.clone()]).unwrap();
        let g = splice_gadget(&edge, 0, &empty).unwrap();
        assert_eq!((g.n(), g.m()), (2, 0));
    }
}
