//! Exact brute-force ground truth for small instances.
//!
//! Spin sums enumerate all `2^n` assignments, even-subgraph and random-cluster
//! sums enumerate all `2^m` edge subsets. Arithmetic is exact: per-edge weights
//! are split into integer numerators and denominators, sums are accumulated
//! as big integers and divided once at the end.
//!
//! Spin assignments are encoded as bit masks: bit `v` set means `σ(v) = −1`.

pub mod reduce;

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::model::{lambda_of_beta, p_of_beta, IsingInstance, Vertex, WeightedGraph};
use crate::rational::{int, Rational};

pub use reduce::{series_parallel_reduce, series_parallel_reduce_unscaled, Reduction};

/// Enumeration limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    /// Largest `n` for `2^n` spin enumeration.
    pub max_spin_vertices: usize,
    /// Largest `m` for `2^m` edge-subset enumeration.
    pub max_subset_edges: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_spin_vertices: 20,
            max_subset_edges: 24,
        }
    }
}

/// Partition sums restricted by the spins at `s` and `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FourCorner {
    pub pp: Rational,
    pub pm: Rational,
    pub mp: Rational,
    pub mm: Rational,
}

impl FourCorner {
    pub fn total(&self) -> Rational {
        &self.pp + &self.pm + &self.mp + &self.mm
    }

    /// `E[σ(s)σ(t)]`.
    pub fn covariance(&self) -> Rational {
        (&self.pp - &self.pm - &self.mp + &self.mm) / self.total()
    }

    fn scaled(self, factor: &Rational) -> FourCorner {
        FourCorner {
            pp: self.pp * factor,
            pm: self.pm * factor,
            mp: self.mp * factor,
            mm: self.mm * factor,
        }
    }
}

/// A monotonically increasing event on edge subsets, stored as generators:
/// `A` is in the event iff `A ⊇ g` for some generator `g`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotoneEvent {
    generators: Vec<u64>,
}

impl MonotoneEvent {
    /// The whole space (generated by the empty set).
    pub fn always() -> Self {
        MonotoneEvent { generators: vec![0] }
    }

    pub fn never() -> Self {
        MonotoneEvent { generators: vec![] }
    }

    pub fn edge_present(edge: usize) -> Self {
        MonotoneEvent {
            generators: vec![1u64 << edge],
        }
    }

    /// Upward closure of the given edge masks.
    pub fn upward_closure(generators: Vec<u64>) -> Self {
        MonotoneEvent { generators }
    }

    /// Event given as an explicit family of edge masks over `m` edges.
    ///
    /// Fails if the family is not closed under adding edges.
    pub fn from_family(m: usize, family: &[u64]) -> Result<Self> {
        if m > 63 {
            return Err(Error::Argument("explicit families need m ≤ 63".into()));
        }
        let full = (1u64 << m) - 1;
        let members: std::collections::HashSet<u64> = family.iter().copied().collect();
        for &a in &members {
            if a & !full != 0 {
                return Err(Error::Argument(format!("set {a:#b} uses an edge ≥ {m}")));
            }
            for e in 0..m {
                if a >> e & 1 == 0 && !members.contains(&(a | 1 << e)) {
                    return Err(Error::Argument(format!(
                        "family is not monotone: {a:#b} is present but {:#b} is not",
                        a | 1 << e
                    )));
                }
            }
        }
        let generators = members
            .iter()
            .copied()
            .filter(|&a| (0..m).all(|e| a >> e & 1 == 0 || !members.contains(&(a & !(1 << e)))))
            .collect();
        Ok(MonotoneEvent { generators })
    }

    /// "`u` and `v` lie in one component of `(V, A)`", generated by the simple `u`–`v` paths.
    pub fn connects(graph: &WeightedGraph, u: Vertex, v: Vertex) -> Result<Self> {
        graph.check_vertex(u)?;
        graph.check_vertex(v)?;
        if graph.m() > 64 {
            return Err(Error::Argument("path events need m ≤ 64".into()));
        }
        if u == v {
            return Ok(Self::always());
        }
        let mut incident: Vec<Vec<(Vertex, usize)>> = vec![Vec::new(); graph.n()];
        for (i, &(a, b)) in graph.edges().iter().enumerate() {
            incident[a].push((b, i));
            incident[b].push((a, i));
        }
        let mut generators = Vec::new();
        let mut on_path = vec![false; graph.n()];
        fn dfs(
            x: Vertex,
            target: Vertex,
            mask: u64,
            incident: &[Vec<(Vertex, usize)>],
            on_path: &mut [bool],
            out: &mut Vec<u64>,
        ) {
            if x == target {
                out.push(mask);
                return;
            }
            on_path[x] = true;
            for &(y, e) in &incident[x] {
                if !on_path[y] {
                    dfs(y, target, mask | 1 << e, incident, on_path, out);
                }
            }
            on_path[x] = false;
        }
        dfs(u, v, 0, &incident, &mut on_path, &mut generators);
        Ok(MonotoneEvent { generators })
    }

    pub fn contains(&self, edges: u64) -> bool {
        self.generators.iter().any(|&g| g & !edges == 0)
    }

    fn check(&self, m: usize) -> Result<()> {
        let full = if m >= 64 { u64::MAX } else { (1u64 << m) - 1 };
        if self.generators.iter().any(|&g| g & !full != 0) {
            return Err(Error::Argument(format!("event refers to an edge ≥ {m}")));
        }
        Ok(())
    }
}

/// `2^n Π_e (β(e) + 1)/2`, the factor with `Z^Ising = factor · Z_∅`.
pub fn van_der_waerden_factor(graph: &WeightedGraph) -> Rational {
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    graph
        .beta()
        .iter()
        .fold(crate::rational::pow(&int(2), graph.n() as u64), |acc, b| {
            acc * (b + Rational::one()) * &half
        })
}

fn mask_of(n: usize, set: &[Vertex]) -> Result<u64> {
    let mut mask = 0u64;
    for &v in set {
        if v >= n {
            return Err(Error::Argument(format!("vertex {v} out of range")));
        }
        if mask >> v & 1 == 1 {
            return Err(Error::Argument(format!("vertex {v} repeated in set")));
        }
        mask |= 1 << v;
    }
    Ok(mask)
}

/// Unnormalised spin weights scaled to integers.
struct SpinTable {
    weights: Vec<BigInt>,
    denom: BigInt,
}

impl SpinTable {
    fn partition(&self) -> BigInt {
        self.weights.iter().sum()
    }

    fn rational(&self, x: BigInt) -> Rational {
        Rational::new(x, self.denom.clone())
    }
}

/// Even-subgraph partition functions `Z_S` for every odd set `S` up to a size bound.
#[derive(Debug, Clone)]
pub struct EvenPartitions {
    n: usize,
    by_mask: HashMap<u64, Rational>,
}

impl EvenPartitions {
    /// `Z_S`; zero when no edge subset has odd set `S`.
    pub fn get(&self, set: &[Vertex]) -> Result<Rational> {
        let mask = mask_of(self.n, set)?;
        Ok(self.by_mask.get(&mask).cloned().unwrap_or_else(Rational::zero))
    }

    pub fn get_mask(&self, mask: u64) -> Rational {
        self.by_mask.get(&mask).cloned().unwrap_or_else(Rational::zero)
    }
}

/// Brute-force evaluator with configurable caps.
#[derive(Debug, Clone, Copy, Default)]
pub struct Oracle {
    pub caps: Caps,
}

impl Oracle {
    pub fn new(caps: Caps) -> Self {
        Oracle { caps }
    }

    fn check_spins(&self, n: usize) -> Result<()> {
        if n > self.caps.max_spin_vertices || n > 63 {
            return Err(Error::TooLarge {
                what: "vertex count",
                size: n,
                cap: self.caps.max_spin_vertices.min(63),
            });
        }
        Ok(())
    }

    fn check_subsets(&self, m: usize) -> Result<()> {
        if m > self.caps.max_subset_edges || m > 63 {
            return Err(Error::TooLarge {
                what: "edge count",
                size: m,
                cap: self.caps.max_subset_edges.min(63),
            });
        }
        Ok(())
    }

    fn spin_table(&self, graph: &WeightedGraph) -> Result<SpinTable> {
        let n = graph.n();
        self.check_spins(n)?;
        let numer: Vec<&BigInt> = graph.beta().iter().map(|b| b.numer()).collect();
        let denom: Vec<&BigInt> = graph.beta().iter().map(|b| b.denom()).collect();
        let total_denom = denom.iter().fold(BigInt::one(), |acc, d| acc * *d);
        let weights = (0..1u64 << n)
            .map(|sigma| {
                graph
                    .edges()
                    .iter()
                    .enumerate()
                    .fold(BigInt::one(), |acc, (i, &(u, v))| {
                        if (sigma >> u ^ sigma >> v) & 1 == 0 {
                            acc * numer[i]
                        } else {
                            acc * denom[i]
                        }
                    })
            })
            .collect();
        Ok(SpinTable {
            weights,
            denom: total_denom,
        })
    }

    /// `Z^Ising = Σ_σ Π_{e: σ(u)=σ(v)} β(e)`.
    pub fn ising_partition(&self, graph: &WeightedGraph) -> Result<Rational> {
        let table = self.spin_table(graph)?;
        Ok(table.rational(table.partition()))
    }

    /// The exact Gibbs distribution indexed by spin mask.
    pub fn gibbs_distribution(&self, graph: &WeightedGraph) -> Result<Vec<Rational>> {
        let table = self.spin_table(graph)?;
        let z = table.partition();
        Ok(table
            .weights
            .into_iter()
            .map(|w| Rational::new(w, z.clone()))
            .collect())
    }

    pub fn four_corner(&self, graph: &WeightedGraph, s: Vertex, t: Vertex) -> Result<FourCorner> {
        distinct(graph, s, t)?;
        let table = self.spin_table(graph)?;
        let mut corner = [BigInt::zero(), BigInt::zero(), BigInt::zero(), BigInt::zero()];
        for (sigma, w) in table.weights.iter().enumerate() {
            let idx = ((sigma >> s & 1) << 1) | (sigma >> t & 1);
            corner[idx] += w;
        }
        let [pp, pm, mp, mm] = corner;
        Ok(FourCorner {
            pp: table.rational(pp),
            pm: table.rational(pm),
            mp: table.rational(mp),
            mm: table.rational(mm),
        })
    }

    /// `E[σ(s)σ(t)]` under the Gibbs distribution.
    pub fn ising_covariance_exact(&self, graph: &WeightedGraph, s: Vertex, t: Vertex) -> Result<Rational> {
        Ok(self.four_corner(graph, s, t)?.covariance())
    }

    /// `E[Π_{v ∈ set} σ(v)]` under the Gibbs distribution.
    pub fn spin_moment(&self, graph: &WeightedGraph, set: &[Vertex]) -> Result<Rational> {
        let mask = mask_of(graph.n(), set)?;
        let table = self.spin_table(graph)?;
        let mut signed = BigInt::zero();
        for (sigma, w) in table.weights.iter().enumerate() {
            if (sigma as u64 & mask).count_ones().is_multiple_of(2) {
                signed += w;
            } else {
                signed -= w;
            }
        }
        Ok(Rational::new(signed, table.partition()))
    }

    /// Moments `E[Π_{v∈S} σ(v)]` for many sets at once, keyed by vertex mask.
    pub fn spin_moments(&self, graph: &WeightedGraph, masks: &[u64]) -> Result<Vec<Rational>> {
        let table = self.spin_table(graph)?;
        let z = table.partition();
        let mut acc = vec![BigInt::zero(); masks.len()];
        for (sigma, w) in table.weights.iter().enumerate() {
            for (slot, &mask) in acc.iter_mut().zip(masks) {
                if (sigma as u64 & mask).count_ones().is_multiple_of(2) {
                    *slot += w;
                } else {
                    *slot -= w;
                }
            }
        }
        Ok(acc.into_iter().map(|x| Rational::new(x, z.clone())).collect())
    }

    /// Visits every edge subset in Gray-code order with the product
    /// `Π_{e∈A} num_in(e) · Π_{e∉A} num_out(e)` maintained by exact division.
    fn for_each_subset(
        &self,
        graph: &WeightedGraph,
        num_in: &[BigInt],
        num_out: &[BigInt],
        mut visit: impl FnMut(u64, u64, &BigInt),
    ) -> Result<()> {
        let m = graph.m();
        self.check_subsets(m)?;
        let edge_mask: Vec<u64> = graph
            .edges()
            .iter()
            .map(|&(u, v)| (1u64 << u) | (1u64 << v))
            .collect();
        let mut term = num_out.iter().fold(BigInt::one(), |acc, x| acc * x);
        let mut subset = 0u64;
        let mut odd = 0u64;
        visit(subset, odd, &term);
        for i in 1u64..(1u64 << m) {
            let e = i.trailing_zeros() as usize;
            if subset >> e & 1 == 1 {
                term = term / &num_in[e] * &num_out[e];
            } else {
                term = term / &num_out[e] * &num_in[e];
            }
            subset ^= 1 << e;
            odd ^= edge_mask[e];
            visit(subset, odd, &term);
        }
        Ok(())
    }

    /// All `Z_S = Σ_{A ∈ Ω_S} λ(A)` with `|S| ≤ max_size`, in one pass over `2^m` subsets.
    ///
    /// `lambda` is indexed by edge; the graph's own `β` values are not used.
    pub fn even_partitions(
        &self,
        graph: &WeightedGraph,
        lambda: &[Rational],
        max_size: usize,
    ) -> Result<EvenPartitions> {
        if lambda.len() != graph.m() {
            return Err(Error::Argument(format!(
                "{} λ values for {} edges",
                lambda.len(),
                graph.m()
            )));
        }
        self.check_spins(graph.n())?;
        let num_in: Vec<BigInt> = lambda.iter().map(|l| l.numer().clone()).collect();
        let num_out: Vec<BigInt> = lambda.iter().map(|l| l.denom().clone()).collect();
        if num_in.iter().any(|x| x.is_zero()) {
            return Err(Error::Argument("λ(e) = 0 is not allowed".into()));
        }
        let denom = num_out.iter().fold(BigInt::one(), |acc, x| acc * x);
        let mut sums: HashMap<u64, BigInt> = HashMap::new();
        self.for_each_subset(graph, &num_in, &num_out, |_, odd, term| {
            if odd.count_ones() as usize <= max_size {
                *sums.entry(odd).or_insert_with(BigInt::zero) += term;
            }
        })?;
        Ok(EvenPartitions {
            n: graph.n(),
            by_mask: sums
                .into_iter()
                .map(|(k, v)| (k, Rational::new(v, denom.clone())))
                .collect(),
        })
    }

    /// `Z_S` for one even-size set `S`.
    pub fn even_partition(&self, graph: &WeightedGraph, lambda: &[Rational], set: &[Vertex]) -> Result<Rational> {
        if set.len() % 2 == 1 {
            return Err(Error::Argument(format!(
                "odd set size {} (Z_S vanishes by parity)",
                set.len()
            )));
        }
        let mask = mask_of(graph.n(), set)?;
        Ok(self.even_partitions(graph, lambda, set.len())?.get_mask(mask))
    }

    /// Checks `E[Π_{v∈S} σ(v)] = Z_S / Z_∅` exactly.
    pub fn check_worm_identity(&self, instance: &IsingInstance, set: &[Vertex]) -> Result<bool> {
        if set.len() % 2 == 1 {
            return Err(Error::Argument("the identity is checked for even sets".into()));
        }
        let lambda = lambda_of_beta(instance)?;
        let z = self.even_partitions(instance.graph(), lambda.values(), set.len())?;
        let lhs = self.spin_moment(instance.graph(), set)?;
        Ok(lhs == z.get(set)? / z.get(&[])?)
    }

    /// [`Self::check_worm_identity`] for every even set of size `2..=max_size` at once.
    /// Returns the vertex masks for which the identity fails.
    pub fn worm_identity_failures(&self, instance: &IsingInstance, max_size: usize) -> Result<Vec<u64>> {
        let n = instance.n();
        let lambda = lambda_of_beta(instance)?;
        let z = self.even_partitions(instance.graph(), lambda.values(), max_size)?;
        let masks: Vec<u64> = (1u64..(1u64 << n))
            .filter(|m| m.count_ones() % 2 == 0 && m.count_ones() as usize <= max_size)
            .collect();
        let moments = self.spin_moments(instance.graph(), &masks)?;
        let z0 = z.get_mask(0);
        Ok(masks
            .into_iter()
            .zip(moments)
            .filter(|(mask, lhs)| *lhs != z.get_mask(*mask) / &z0)
            .map(|(mask, _)| mask)
            .collect())
    }

    /// Random-cluster weights scaled to integers: numerator per edge in/out of `A`
    /// and the common denominator `Π_e a(e)` for `β = a/b`.
    fn rc_weights(instance: &IsingInstance) -> Result<(Vec<BigInt>, Vec<BigInt>)> {
        let p = p_of_beta(instance)?;
        // p = (a − b)/a and 1 − p = b/a share the denominator a.
        let num_in = p.iter().zip(instance.beta()).map(|(pe, b)| pe * b.numer()).collect::<Vec<_>>();
        let num_in: Vec<BigInt> = num_in.into_iter().map(|x| x.to_integer()).collect();
        let num_out: Vec<BigInt> = instance.beta().iter().map(|b| b.denom().clone()).collect();
        Ok((num_in, num_out))
    }

    fn components(n: usize, edges: &[(Vertex, Vertex)], subset: u64) -> Vec<u64> {
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while parent[r] != r {
                r = parent[r];
            }
            let mut y = x;
            while parent[y] != r {
                let next = parent[y];
                parent[y] = r;
                y = next;
            }
            r
        }
        for (i, &(u, v)) in edges.iter().enumerate() {
            if subset >> i & 1 == 1 {
                let (a, b) = (find(&mut parent, u), find(&mut parent, v));
                if a != b {
                    parent[a] = b;
                }
            }
        }
        let mut by_root: HashMap<usize, u64> = HashMap::new();
        for v in 0..n {
            let r = find(&mut parent, v);
            *by_root.entry(r).or_insert(0) |= 1 << v;
        }
        let mut comps: Vec<u64> = by_root.into_values().collect();
        comps.sort_unstable();
        comps
    }

    /// Sums the random-cluster weight over all `A`, and over those `A` for which `accept(A)` holds.
    fn rc_sum(&self, instance: &IsingInstance, mut accept: impl FnMut(u64, &[u64]) -> bool) -> Result<(BigInt, BigInt)> {
        let graph = instance.graph();
        self.check_spins(graph.n())?;
        let (num_in, num_out) = Self::rc_weights(instance)?;
        let mut total = BigInt::zero();
        let mut hit = BigInt::zero();
        self.for_each_subset(graph, &num_in, &num_out, |subset, _, term| {
            let comps = Self::components(graph.n(), graph.edges(), subset);
            let w = term << comps.len();
            if accept(subset, &comps) {
                hit += &w;
            }
            total += w;
        })?;
        Ok((hit, total))
    }

    /// Probability under the random-cluster measure that `set` lies in one component of `(V, A)`.
    pub fn rc_connected_probability(&self, instance: &IsingInstance, set: &[Vertex]) -> Result<Rational> {
        let mask = mask_of(instance.n(), set)?;
        let (hit, total) = self.rc_sum(instance, |_, comps| {
            mask == 0 || comps.iter().any(|&c| c & mask == mask)
        })?;
        Ok(Rational::new(hit, total))
    }

    /// Probability under the random-cluster measure that every component of `(V, A)`
    /// contains an even number of vertices of `set`.
    ///
    /// This equals `E[Π_{v ∈ set} σ(v)]`; for `|set| = 2` it is the connection probability.
    pub fn rc_even_clusters_probability(&self, instance: &IsingInstance, set: &[Vertex]) -> Result<Rational> {
        let mask = mask_of(instance.n(), set)?;
        let (hit, total) = self.rc_sum(instance, |_, comps| {
            comps.iter().all(|&c| (c & mask).count_ones() % 2 == 0)
        })?;
        Ok(Rational::new(hit, total))
    }

    /// Probability of a monotone event under the random-cluster measure.
    pub fn rc_event_probability(&self, instance: &IsingInstance, event: &MonotoneEvent) -> Result<Rational> {
        event.check(instance.m())?;
        let (hit, total) = self.rc_sum(instance, |a, _| event.contains(a))?;
        Ok(Rational::new(hit, total))
    }

    /// Law of `σ` when `(A, σ)` is drawn from the Edwards–Sokal distribution:
    /// `A` from the random-cluster measure, then one uniform spin per component.
    pub fn edwards_sokal_spin_distribution(&self, instance: &IsingInstance) -> Result<Vec<Rational>> {
        let graph = instance.graph();
        let n = graph.n();
        self.check_spins(n)?;
        let (num_in, num_out) = Self::rc_weights(instance)?;
        let mut mass = vec![BigInt::zero(); 1 << n];
        // Pr(A, σ) ∝ wt_RC(A) · 2^{−κ(A)} = term(A) for each σ constant on components.
        self.for_each_subset(graph, &num_in, &num_out, |subset, _, term| {
            let comps = Self::components(n, graph.edges(), subset);
            for choice in 0u64..(1 << comps.len()) {
                let sigma = comps
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| choice >> j & 1 == 1)
                    .fold(0u64, |acc, (_, &c)| acc | c);
                mass[sigma as usize] += term;
            }
        })?;
        let total: BigInt = mass.iter().sum();
        Ok(mass.into_iter().map(|x| Rational::new(x, total.clone())).collect())
    }

    /// `Pr(E1 ∧ E2) ≥ Pr(E1) Pr(E2)` under the random-cluster measure, exactly.
    pub fn check_fkg(&self, instance: &IsingInstance, e1: &MonotoneEvent, e2: &MonotoneEvent) -> Result<bool> {
        e1.check(instance.m())?;
        e2.check(instance.m())?;
        let (mut h1, mut h2, mut h12) = (BigInt::zero(), BigInt::zero(), BigInt::zero());
        let (_, total) = self.rc_sum(instance, |_, _| false)?;
        let graph = instance.graph();
        let (num_in, num_out) = Self::rc_weights(instance)?;
        self.for_each_subset(graph, &num_in, &num_out, |subset, _, term| {
            let in1 = e1.contains(subset);
            let in2 = e2.contains(subset);
            if !(in1 || in2) {
                return;
            }
            let w = term << Self::components(graph.n(), graph.edges(), subset).len();
            if in1 {
                h1 += &w;
            }
            if in2 {
                h2 += &w;
            }
            if in1 && in2 {
                h12 += &w;
            }
        })?;
        // Pr(E1∧E2) ≥ Pr(E1)Pr(E2)  ⇔  h12 · total ≥ h1 · h2.
        Ok(h12 * total >= h1 * h2)
    }

    /// `Z_∅/Z_S ≤ (Z_∅/Z_{S'}) · (Z_∅/Z_{S⊕S'})`, checked in the cross-multiplied form
    /// `Z_{S'} Z_{S⊕S'} ≤ Z_∅ Z_S` so vanishing sums need no special case.
    pub fn check_weight_compare(
        &self,
        graph: &WeightedGraph,
        lambda: &[Rational],
        set: &[Vertex],
        other: &[Vertex],
    ) -> Result<bool> {
        let s = mask_of(graph.n(), set)?;
        let s2 = mask_of(graph.n(), other)?;
        if s.count_ones() % 2 == 1 || s2.count_ones() % 2 == 1 {
            return Err(Error::Argument("both sets must have even size".into()));
        }
        if s2 != 0 && s2 != s && s2 & !s == 0 {
            return Err(Error::Argument(
                "the comparison needs S' not to be a proper non-empty subset of S".into(),
            ));
        }
        let x = s ^ s2;
        let max = [s, s2, x].iter().map(|m| m.count_ones() as usize).max().unwrap();
        let z = self.even_partitions(graph, lambda, max)?;
        Ok(z.get_mask(s2) * z.get_mask(x) <= z.get_mask(0) * z.get_mask(s))
    }

    /// `Z^Ising` after exact series-parallel elimination of all vertices.
    pub fn ising_partition_reduced(&self, graph: &WeightedGraph) -> Result<Rational> {
        let r = series_parallel_reduce(graph, &[])?;
        Ok(self.ising_partition(&r.graph)? * r.scale)
    }

    /// [`Oracle::four_corner`] after exact series-parallel elimination of every
    /// vertex other than `s` and `t`; the cap applies to the reduced graph.
    pub fn four_corner_reduced(&self, graph: &WeightedGraph, s: Vertex, t: Vertex) -> Result<FourCorner> {
        distinct(graph, s, t)?;
        let r = series_parallel_reduce(graph, &[s, t])?;
        Ok(self.four_corner(&r.graph, 0, 1)?.scaled(&r.scale))
    }

    /// `E[σ(s)σ(t)]` after series-parallel elimination (the common scale cancels).
    pub fn covariance_reduced(&self, graph: &WeightedGraph, s: Vertex, t: Vertex) -> Result<Rational> {
        distinct(graph, s, t)?;
        let reduced = series_parallel_reduce_unscaled(graph, &[s, t])?;
        self.ising_covariance_exact(&reduced, 0, 1)
    }
}

fn distinct(graph: &WeightedGraph, s: Vertex, t: Vertex) -> Result<()> {
    graph.check_vertex(s)?;
    graph.check_vertex(t)?;
    if s == t {
        return Err(Error::Argument(
            "s and t must be distinct vertices (E[σ(s)²] = 1 is not a covariance query)".into(),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn beta3(n: usize, edges: &[(usize, usize)]) -> IsingInstance {
        let e: Vec<_> = edges.iter().map(|&(u, v)| (u, v, 2i64, 1i64)).collect();
        IsingInstance::ferromagnetic(n, &e).unwrap()
    }

    fn triangle() -> IsingInstance {
        beta3(3, &[(0, 1), (1, 2), (0, 2)])
    }

    fn half(m: usize) -> Vec<Rational> {
        vec![ratio(1, 2); m]
    }

    #[test]
    fn partition_examples() {
        let o = Oracle::default();
        assert_eq!(o.ising_partition(beta3(2, &[(0, 1)]).graph()).unwrap(), int(8));
        assert_eq!(o.ising_partition(triangle().graph()).unwrap(), int(72));
        assert_eq!(o.ising_partition(beta3(5, &[]).graph()).unwrap(), int(32));
    }

    #[test]
    fn four_corner_examples() {
        let o = Oracle::default();
        let fc = o.four_corner(beta3(2, &[(0, 1)]).graph(), 0, 1).unwrap();
        assert_eq!((fc.pp, fc.pm, fc.mp, fc.mm), (int(3), int(1), int(1), int(3)));
        let fc = o.four_corner(beta3(2, &[]).graph(), 0, 1).unwrap();
        assert_eq!((fc.pp, fc.pm, fc.mp, fc.mm), (int(1), int(1), int(1), int(1)));
        let fc = o.four_corner(triangle().graph(), 0, 1).unwrap();
        assert_eq!(fc.pp, int(30));
        assert_eq!(fc.pm, int(6));
        assert_eq!(fc.total(), int(72));
        assert!(matches!(o.four_corner(triangle().graph(), 1, 1), Err(Error::Argument(_))));
    }

    #[test]
    fn covariance_examples() {
        let o = Oracle::default();
        assert_eq!(o.ising_covariance_exact(beta3(2, &[(0, 1)]).graph(), 0, 1).unwrap(), ratio(1, 2));
        for (s, t) in [(0, 1), (1, 2), (0, 2)] {
            assert_eq!(o.ising_covariance_exact(triangle().graph(), s, t).unwrap(), ratio(2, 3));
        }
        let split = beta3(4, &[(0, 1), (2, 3)]);
        assert_eq!(o.ising_covariance_exact(split.graph(), 0, 3).unwrap(), int(0));
    }

    #[test]
    fn even_partition_examples() {
        let o = Oracle::default();
        let edge = beta3(2, &[(0, 1)]);
        assert_eq!(o.even_partition(edge.graph(), &half(1), &[]).unwrap(), int(1));
        assert_eq!(o.even_partition(edge.graph(), &half(1), &[0, 1]).unwrap(), ratio(1, 2));
        let tri = triangle();
        assert_eq!(o.even_partition(tri.graph(), &half(3), &[0, 1]).unwrap(), ratio(3, 4));
        assert_eq!(o.even_partition(tri.graph(), &half(3), &[]).unwrap(), ratio(9, 8));
        assert!(matches!(
            o.even_partition(tri.graph(), &half(3), &[0]),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn worm_identity_examples() {
        let o = Oracle::default();
        assert!(o.check_worm_identity(&beta3(2, &[(0, 1)]), &[0, 1]).unwrap());
        assert!(o.check_worm_identity(&triangle(), &[0, 1]).unwrap());
        assert!(o.check_worm_identity(&triangle(), &[]).unwrap());
        let k4 = beta3(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        assert!(o.check_worm_identity(&k4, &[0, 1, 2, 3]).unwrap());
    }

    #[test]
    fn rc_connection_examples() {
        let o = Oracle::default();
        let edge = beta3(2, &[(0, 1)]);
        assert_eq!(o.rc_connected_probability(&edge, &[0, 1]).unwrap(), ratio(1, 2));
        assert_eq!(o.rc_connected_probability(&triangle(), &[2]).unwrap(), int(1));
        let split = beta3(4, &[(0, 1), (2, 3)]);
        assert_eq!(o.rc_connected_probability(&split, &[1, 2]).unwrap(), int(0));
    }

    #[test]
    fn edwards_sokal_examples() {
        let o = Oracle::default();
        let d = o.edwards_sokal_spin_distribution(&beta3(2, &[(0, 1)])).unwrap();
        assert_eq!(d, vec![ratio(3, 8), ratio(1, 8), ratio(1, 8), ratio(3, 8)]);
        let d = o.edwards_sokal_spin_distribution(&beta3(3, &[])).unwrap();
        assert!(d.iter().all(|x| *x == ratio(1, 8)));
        let d = o.edwards_sokal_spin_distribution(&triangle()).unwrap();
        assert_eq!(d[0], ratio(27, 72));
        assert_eq!(d[7], ratio(27, 72));
        assert_eq!(d, o.gibbs_distribution(triangle().graph()).unwrap());
    }

    #[test]
    fn fkg_examples() {
        let o = Oracle::default();
        let tri = triangle();
        assert!(o.check_fkg(&tri, &MonotoneEvent::always(), &MonotoneEvent::always()).unwrap());
        assert!(o
            .check_fkg(&tri, &MonotoneEvent::edge_present(0), &MonotoneEvent::edge_present(1))
            .unwrap());
        let st = MonotoneEvent::connects(tri.graph(), 0, 1).unwrap();
        let uv = MonotoneEvent::connects(tri.graph(), 1, 2).unwrap();
        assert!(o.check_fkg(&tri, &st, &uv).unwrap());
        assert!(o.check_fkg(&tri, &MonotoneEvent::edge_present(5), &st).is_err());
    }

    #[test]
    fn monotone_family_validation() {
        // Over two edges: {{0}, {0,1}} is monotone, {{0}} is not.
        let ok = MonotoneEvent::from_family(2, &[0b01, 0b11]).unwrap();
        assert_eq!(ok, MonotoneEvent::upward_closure(vec![0b01]));
        assert!(matches!(MonotoneEvent::from_family(2, &[0b01]), Err(Error::Argument(_))));
    }

    #[test]
    fn weight_compare_examples() {
        let o = Oracle::default();
        let tri = triangle();
        let lam = lambda_of_beta(&tri).unwrap();
        assert!(o.check_weight_compare(tri.graph(), lam.values(), &[0, 1], &[0, 1]).unwrap());
        assert!(o.check_weight_compare(tri.graph(), lam.values(), &[0, 1], &[1, 2]).unwrap());
        let k4 = beta3(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]);
        let lam4 = lambda_of_beta(&k4).unwrap();
        assert!(matches!(
            o.check_weight_compare(k4.graph(), lam4.values(), &[0, 1, 2, 3], &[0, 1]),
            Err(Error::Argument(_))
        ));
        assert!(o.check_weight_compare(k4.graph(), lam4.values(), &[0, 1, 2, 3], &[0, 1, 2, 3]).unwrap());
    }

    #[test]
    fn four_corner_symmetry_and_vdw() {
        let o = Oracle::default();
        let g = beta3(4, &[(0, 1), (1, 2), (2, 3), (0, 2)]);
        let fc = o.four_corner(g.graph(), 0, 3).unwrap();
        assert_eq!(fc.pp, fc.mm);
        assert_eq!(fc.pm, fc.mp);
        let lam = lambda_of_beta(&g).unwrap();
        let z0 = o.even_partition(g.graph(), lam.values(), &[]).unwrap();
        assert_eq!(o.ising_partition(g.graph()).unwrap(), van_der_waerden_factor(g.graph()) * z0);
    }

    #[test]
    fn caps_are_enforced() {
        let o = Oracle::new(Caps {
            max_spin_vertices: 3,
            max_subset_edges: 2,
        });
        let g = beta3(4, &[(0, 1)]);
        assert!(matches!(o.ising_partition(g.graph()), Err(Error::TooLarge { .. })));
        let tri = triangle();
        assert!(matches!(
            o.even_partition(tri.graph(), &half(3), &[]),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn reduction_preserves_corner_sums() {
        let o = Oracle::default();
        // A 4-cycle with a pendant path, mixed weights.
        let g = WeightedGraph::new(
            6,
            vec![(0, 1), (1, 2), (2, 3), (3, 0), (2, 4), (4, 5)],
            vec![ratio(1, 2), int(3), ratio(2, 3), ratio(5, 4), ratio(1, 3), int(7)],
        )
        .unwrap();
        for (s, t) in [(0, 2), (1, 5), (3, 4)] {
            assert_eq!(o.four_corner_reduced(&g, s, t).unwrap(), o.four_corner(&g, s, t).unwrap());
        }
        assert_eq!(o.ising_partition_reduced(&g).unwrap(), o.ising_partition(&g).unwrap());
        for (s, t) in [(0, 2), (1, 5), (3, 4)] {
            assert_eq!(
                o.covariance_reduced(&g, s, t).unwrap(),
                o.ising_covariance_exact(&g, s, t).unwrap()
            );
        }
    }
}
