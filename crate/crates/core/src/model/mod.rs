//! Graphs, Ising edge weights and the parameter transforms between them.
//!
//! Weights are exact rationals throughout this module. `β` is the Ising edge
//! weight, `λ = (β − 1)/(β + 1)` the even-subgraph weight and `p = 1 − 1/β`
//! the random-cluster edge probability.

pub mod catalog;
pub mod io;

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

pub type Vertex = usize;

/// An unordered pair of distinct vertices, stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexPair {
    u: Vertex,
    v: Vertex,
}

impl VertexPair {
    /// Returns `None` when `a == b`.
    pub fn new(a: Vertex, b: Vertex) -> Option<Self> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Some(VertexPair { u: a, v: b }),
            std::cmp::Ordering::Greater => Some(VertexPair { u: b, v: a }),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn u(&self) -> Vertex {
        self.u
    }

    pub fn v(&self) -> Vertex {
        self.v
    }

    pub fn contains(&self, x: Vertex) -> bool {
        self.u == x || self.v == x
    }

    /// Dense index among all pairs of an `n`-vertex graph, ordered lexicographically.
    pub fn index(&self, n: usize) -> usize {
        self.u * n - self.u * (self.u + 1) / 2 + (self.v - self.u - 1)
    }

    /// All pairs of `0..n` in `index` order.
    pub fn all(n: usize) -> impl Iterator<Item = VertexPair> {
        (0..n).flat_map(move |u| ((u + 1)..n).map(move |v| VertexPair { u, v }))
    }
}

impl fmt::Display for VertexPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}, {}}}", self.u, self.v)
    }
}

/// The set of odd-degree vertices of a worm configuration: empty or a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OddSet {
    Empty,
    Pair(VertexPair),
}

impl OddSet {
    /// `self ⊕ {u, v}`, or `None` when the result would have four elements.
    ///
    /// Panics if `u == v`.
    #[inline]
    pub fn toggle(self, u: Vertex, v: Vertex) -> Option<OddSet> {
        assert_ne!(u, v, "toggle needs two distinct endpoints");
        match self {
            OddSet::Empty => Some(OddSet::Pair(VertexPair::new(u, v).unwrap())),
            OddSet::Pair(p) => {
                let (a, b) = (p.u, p.v);
                let rest = match (a == u || a == v, b == u || b == v) {
                    (true, true) => return Some(OddSet::Empty),
                    (true, false) => (b, if a == u { v } else { u }),
                    (false, true) => (a, if b == u { v } else { u }),
                    (false, false) => return None,
                };
                Some(OddSet::Pair(VertexPair::new(rest.0, rest.1).unwrap()))
            }
        }
    }

    pub fn len(&self) -> usize {
        match self {
            OddSet::Empty => 0,
            OddSet::Pair(_) => 2,
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, OddSet::Empty)
    }

    pub fn vertices(&self) -> Vec<Vertex> {
        match self {
            OddSet::Empty => vec![],
            OddSet::Pair(p) => vec![p.u, p.v],
        }
    }
}

/// `toggle_odd_set` as a free function.
pub fn toggle_odd_set(set: OddSet, u: Vertex, v: Vertex) -> Option<OddSet> {
    set.toggle(u, v)
}

/// A simple undirected graph with a positive rational weight `β(e)` on every edge.
///
/// No sign restriction is placed on `β − 1`; the exact oracle evaluates any
/// positive weighting. [`IsingInstance`] adds the ferromagnetic/antiferromagnetic
/// mode check on top.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<(Vertex, Vertex)>,
    beta: Vec<Rational>,
}

impl WeightedGraph {
    pub fn new(n: usize, edges: Vec<(Vertex, Vertex)>, beta: Vec<Rational>) -> Result<Self> {
        if edges.len() != beta.len() {
            return Err(Error::InvalidGraph(format!(
                "{} edges but {} weights",
                edges.len(),
                beta.len()
            )));
        }
        let mut seen = HashSet::with_capacity(edges.len());
        for (i, &(u, v)) in edges.iter().enumerate() {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge {i} = ({u}, {v}) has an endpoint outside 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("edge {i} is a self-loop at {u}")));
            }
            if !seen.insert(VertexPair::new(u, v).unwrap()) {
                return Err(Error::InvalidGraph(format!(
                    "edge {i} = ({u}, {v}) duplicates an earlier edge"
                )));
            }
            if !beta[i].is_positive() {
                return Err(Error::InvalidGraph(format!(
                    "edge {i} has non-positive weight {}",
                    beta[i]
                )));
            }
        }
        Ok(WeightedGraph { n, edges, beta })
    }

    /// Every edge gets the same weight.
    pub fn uniform(n: usize, edges: Vec<(Vertex, Vertex)>, beta: Rational) -> Result<Self> {
        let weights = vec![beta; edges.len()];
        Self::new(n, edges, weights)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    pub fn beta(&self) -> &[Rational] {
        &self.beta
    }

    pub fn adjacency(&self) -> Vec<Vec<Vertex>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    }

    /// Component label for every vertex, numbered in order of first appearance.
    pub fn component_labels(&self) -> Vec<usize> {
        let adj = self.adjacency();
        let mut label = vec![usize::MAX; self.n];
        let mut next = 0;
        for start in 0..self.n {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = next;
            let mut stack = vec![start];
            while let Some(x) = stack.pop() {
                for &y in &adj[x] {
                    if label[y] == usize::MAX {
                        label[y] = next;
                        stack.push(y);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.component_labels().iter().all(|&c| c == 0)
    }

    /// Subgraph induced on `vertices` (relabelled `0..k` in the given order).
    pub fn induced(&self, vertices: &[Vertex]) -> Result<WeightedGraph> {
        let mut map = vec![usize::MAX; self.n];
        for (new, &old) in vertices.iter().enumerate() {
            if old >= self.n {
                return Err(Error::Argument(format!("vertex {old} out of range")));
            }
            map[old] = new;
        }
        let mut edges = Vec::new();
        let mut beta = Vec::new();
        for (i, &(u, v)) in self.edges.iter().enumerate() {
            if map[u] != usize::MAX && map[v] != usize::MAX {
                edges.push((map[u], map[v]));
                beta.push(self.beta[i].clone());
            }
        }
        WeightedGraph::new(vertices.len(), edges, beta)
    }

    /// Same vertex set, keeping only the first `k` edges.
    pub fn edge_prefix(&self, k: usize) -> WeightedGraph {
        let k = k.min(self.m());
        WeightedGraph {
            n: self.n,
            edges: self.edges[..k].to_vec(),
            beta: self.beta[..k].to_vec(),
        }
    }

    /// Same vertex set with edge `index` removed.
    pub fn without_edge(&self, index: usize) -> Result<WeightedGraph> {
        if index >= self.m() {
            return Err(Error::Argument(format!("edge index {index} out of range")));
        }
        let mut g = self.clone();
        g.edges.remove(index);
        g.beta.remove(index);
        Ok(g)
    }

    pub fn check_vertex(&self, v: Vertex) -> Result<()> {
        if v >= self.n {
            return Err(Error::Argument(format!(
                "vertex {v} out of range for a graph on {} vertices",
                self.n
            )));
        }
        Ok(())
    }
}

/// Sign regime of an Ising instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Every `β(e) > 1`.
    Ferromagnetic,
    /// Every `0 < β(e) < 1`.
    Antiferromagnetic,
}

/// An Ising model on a simple graph with a validated sign regime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsingInstance {
    graph: WeightedGraph,
    mode: Mode,
}

impl IsingInstance {
    /// Ferromagnetic instance from edges `(u, v, P, Q)` with `β = 1 + P/Q`.
    ///
    /// `P` and `Q` are ordinary integers; running times downstream are
    /// polynomial in their magnitudes, not in their bit lengths.
    pub fn ferromagnetic<P: Into<BigInt> + Clone>(
        n: usize,
        edges: &[(Vertex, Vertex, P, P)],
    ) -> Result<Self> {
        let mut pairs = Vec::with_capacity(edges.len());
        let mut beta = Vec::with_capacity(edges.len());
        for (i, (u, v, p, q)) in edges.iter().enumerate() {
            let p: BigInt = p.clone().into();
            let q: BigInt = q.clone().into();
            if !p.is_positive() || !q.is_positive() {
                return Err(Error::Mode(format!(
                    "edge {i}: P and Q must be positive integers, got P={p}, Q={q}"
                )));
            }
            pairs.push((*u, *v));
            beta.push(Rational::one() + Rational::new(p, q));
        }
        Self::from_graph(WeightedGraph::new(n, pairs, beta)?, Mode::Ferromagnetic)
    }

    /// Antiferromagnetic instance from edges with explicit weights in `(0, 1)`.
    pub fn antiferromagnetic(n: usize, edges: Vec<(Vertex, Vertex)>, beta: Vec<Rational>) -> Result<Self> {
        Self::from_graph(WeightedGraph::new(n, edges, beta)?, Mode::Antiferromagnetic)
    }

    /// Wraps a weighted graph after checking every weight against `mode`.
    pub fn from_graph(graph: WeightedGraph, mode: Mode) -> Result<Self> {
        let one = Rational::one();
        for (i, b) in graph.beta().iter().enumerate() {
            let ok = match mode {
                Mode::Ferromagnetic => *b > one,
                Mode::Antiferromagnetic => b.is_positive() && *b < one,
            };
            if !ok {
                return Err(Error::Mode(format!(
                    "edge {i} has β = {b}, which is not allowed in {mode:?} mode"
                )));
            }
        }
        Ok(IsingInstance { graph, mode })
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn n(&self) -> usize {
        self.graph.n
    }

    pub fn m(&self) -> usize {
        self.graph.m()
    }

    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        self.graph.edges()
    }

    pub fn beta(&self) -> &[Rational] {
        self.graph.beta()
    }

    /// Restriction to the vertices in `vertices`, keeping the mode.
    pub fn induced(&self, vertices: &[Vertex]) -> Result<IsingInstance> {
        Ok(IsingInstance {
            graph: self.graph.induced(vertices)?,
            mode: self.mode,
        })
    }
}

/// Per-edge even-subgraph weights `λ(e)` and their minimum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeLambda {
    values: Vec<Rational>,
    min: Rational,
}

impl EdgeLambda {
    /// Accepts weights in `(0, 1]`; the upper end is reached by the first
    /// annealing stage, never by a ferromagnetic `λ`.
    pub fn from_values(values: Vec<Rational>) -> Result<Self> {
        let one = Rational::one();
        if let Some((i, bad)) = values
            .iter()
            .enumerate()
            .find(|(_, l)| !l.is_positive() || **l > one)
        {
            return Err(Error::Argument(format!("λ({i}) = {bad} is outside (0, 1]")));
        }
        let min = values.iter().min().cloned().unwrap_or_else(Rational::one);
        Ok(EdgeLambda { values, min })
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn min(&self) -> &Rational {
        &self.min
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(crate::rational::to_f64).collect()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn require_ferromagnetic(instance: &IsingInstance) -> Result<()> {
    if instance.mode() != Mode::Ferromagnetic {
        return Err(Error::Mode(
            "a ferromagnetic instance (every β > 1) is required".into(),
        ));
    }
    Ok(())
}

/// `λ(e) = (β(e) − 1)/(β(e) + 1)` for every edge.
pub fn lambda_of_beta(instance: &IsingInstance) -> Result<EdgeLambda> {
    require_ferromagnetic(instance)?;
    let one = Rational::one();
    let values = instance
        .beta()
        .iter()
        .map(|b| (b - &one) / (b + &one))
        .collect();
    EdgeLambda::from_values(values)
}

/// Inverse transform `β = (1 + λ)/(1 − λ)`.
pub fn beta_of_lambda(lambda: &Rational) -> Result<Rational> {
    let one = Rational::one();
    if *lambda >= one {
        return Err(Error::Argument(format!("λ = {lambda} must be below 1")));
    }
    Ok((&one + lambda) / (&one - lambda))
}

/// `p(e) = 1 − 1/β(e)` for every edge.
pub fn p_of_beta(instance: &IsingInstance) -> Result<Vec<Rational>> {
    require_ferromagnetic(instance)?;
    Ok(instance
        .beta()
        .iter()
        .map(|b| Rational::one() - b.recip())
        .collect())
}

/// The vertices of the component containing `s`, in increasing order.
pub fn connected_component(graph: &WeightedGraph, s: Vertex) -> Result<Vec<Vertex>> {
    graph.check_vertex(s)?;
    let labels = graph.component_labels();
    Ok((0..graph.n()).filter(|&v| labels[v] == labels[s]).collect())
}

/// Artificial weights `w_S` for the weighted worm process.
///
/// `w_∅ = 1` is implicit; every pair carries a positive weight. Singletons
/// never appear (their weight is conceptually zero).
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetWeighting {
    n: usize,
    pairs: Vec<f64>,
}

impl SubsetWeighting {
    /// All pair weights equal to one.
    pub fn ones(n: usize) -> Self {
        SubsetWeighting {
            n,
            pairs: vec![1.0; n * n.saturating_sub(1) / 2],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn empty_weight(&self) -> f64 {
        1.0
    }

    pub fn get(&self, pair: VertexPair) -> f64 {
        self.pairs[pair.index(self.n)]
    }

    /// Weight of an odd set: 1 for the empty set, `w_S` for a pair.
    pub fn of(&self, set: OddSet) -> f64 {
        match set {
            OddSet::Empty => 1.0,
            OddSet::Pair(p) => self.get(p),
        }
    }

    pub fn set(&mut self, pair: VertexPair, w: f64) -> Result<()> {
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::Argument(format!(
                "subset weight for {pair} must be positive and finite, got {w}"
            )));
        }
        if pair.v() >= self.n {
            return Err(Error::Argument(format!("pair {pair} out of range")));
        }
        let idx = pair.index(self.n);
        self.pairs[idx] = w;
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (VertexPair, f64)> + '_ {
        VertexPair::all(self.n).zip(self.pairs.iter().copied())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn ferro(n: usize, edges: &[(usize, usize)], p: i64, q: i64) -> IsingInstance {
        let e: Vec<_> = edges.iter().map(|&(u, v)| (u, v, p, q)).collect();
        IsingInstance::ferromagnetic(n, &e).unwrap()
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(lambda_of_beta(&ferro(2, &[(0, 1)], 2, 1)).unwrap().values()[0], ratio(1, 2));
        assert_eq!(lambda_of_beta(&ferro(2, &[(0, 1)], 1, 1)).unwrap().values()[0], ratio(1, 3));
        // (10/9 − 1)/(10/9 + 1) = (1/9)/(19/9)
        assert_eq!(lambda_of_beta(&ferro(2, &[(0, 1)], 1, 9)).unwrap().values()[0], ratio(1, 19));
    }

    #[test]
    fn lambda_min_is_tracked() {
        let inst = IsingInstance::ferromagnetic(3, &[(0, 1, 2, 1), (1, 2, 1, 9)]).unwrap();
        assert_eq!(*lambda_of_beta(&inst).unwrap().min(), ratio(1, 19));
    }

    #[test]
    fn p_examples() {
        assert_eq!(p_of_beta(&ferro(2, &[(0, 1)], 2, 1)).unwrap()[0], ratio(2, 3));
        assert_eq!(p_of_beta(&ferro(2, &[(0, 1)], 1, 1)).unwrap()[0], ratio(1, 2));
        assert_eq!(p_of_beta(&ferro(2, &[(0, 1)], 1, 9)).unwrap()[0], ratio(1, 10));
    }

    #[test]
    fn transforms_reject_antiferromagnetic() {
        let inst = IsingInstance::antiferromagnetic(2, vec![(0, 1)], vec![ratio(1, 2)]).unwrap();
        assert!(matches!(lambda_of_beta(&inst), Err(Error::Mode(_))));
        assert!(matches!(p_of_beta(&inst), Err(Error::Mode(_))));
    }

    #[test]
    fn mode_invariants_enforced() {
        assert!(IsingInstance::antiferromagnetic(2, vec![(0, 1)], vec![int(2)]).is_err());
        assert!(IsingInstance::antiferromagnetic(2, vec![(0, 1)], vec![int(1)]).is_err());
        let g = WeightedGraph::uniform(2, vec![(0, 1)], int(1)).unwrap();
        assert!(IsingInstance::from_graph(g, Mode::Ferromagnetic).is_err());
        assert!(IsingInstance::ferromagnetic(2, &[(0, 1, 0, 1)]).is_err());
        assert!(IsingInstance::ferromagnetic(2, &[(0, 1, 1, -2)]).is_err());
    }

    #[test]
    fn graph_invariants_enforced() {
        assert!(WeightedGraph::uniform(2, vec![(0, 0)], int(2)).is_err());
        assert!(WeightedGraph::uniform(2, vec![(0, 1), (1, 0)], int(2)).is_err());
        assert!(WeightedGraph::uniform(2, vec![(0, 2)], int(2)).is_err());
        assert!(WeightedGraph::new(2, vec![(0, 1)], vec![int(0)]).is_err());
    }

    #[test]
    fn toggle_examples() {
        let p = |a, b| OddSet::Pair(VertexPair::new(a, b).unwrap());
        assert_eq!(OddSet::Empty.toggle(3, 1), Some(p(1, 3)));
        assert_eq!(p(1, 3).toggle(3, 1), Some(OddSet::Empty));
        assert_eq!(p(0, 1).toggle(2, 3), None);
        assert_eq!(p(0, 1).toggle(1, 2), Some(p(0, 2)));
        assert_eq!(p(0, 1).toggle(2, 0), Some(p(1, 2)));
    }

    #[test]
    fn component_examples() {
        let path = WeightedGraph::uniform(3, vec![(0, 1), (1, 2)], int(2)).unwrap();
        assert_eq!(connected_component(&path, 0).unwrap(), vec![0, 1, 2]);
        let iso = WeightedGraph::uniform(2, vec![], int(2)).unwrap();
        assert_eq!(connected_component(&iso, 0).unwrap(), vec![0]);
        let tri = WeightedGraph::uniform(4, vec![(0, 1), (1, 2), (0, 2)], int(2)).unwrap();
        assert_eq!(connected_component(&tri, 1).unwrap(), vec![0, 1, 2]);
        assert!(connected_component(&tri, 4).is_err());
    }

    #[test]
    fn pair_index_is_dense() {
        for n in 0..7 {
            for (i, p) in VertexPair::all(n).enumerate() {
                assert_eq!(p.index(n), i);
            }
        }
    }

    #[test]
    fn subset_weighting_rejects_bad_weights() {
        let mut w = SubsetWeighting::ones(3);
        let p = VertexPair::new(0, 2).unwrap();
        assert!(w.set(p, 0.0).is_err());
        assert!(w.set(p, f64::NAN).is_err());
        w.set(p, 2.5).unwrap();
        assert_eq!(w.get(p), 2.5);
        assert_eq!(w.of(OddSet::Empty), 1.0);
    }
}
