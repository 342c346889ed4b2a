//! Small-graph catalogues: every graph up to isomorphism, and random connected graphs.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{Vertex, VertexPair};

type EdgeList = Vec<(Vertex, Vertex)>;

fn pair_bit(n: usize, u: Vertex, v: Vertex) -> u128 {
    1u128 << VertexPair::new(u, v).unwrap().index(n)
}

/// Canonical edge mask of a graph on `n ≤ 16` vertices.
///
/// Vertices are first split into classes by (degree, sorted neighbour
/// degrees); the minimum mask is taken over all relabellings that keep the
/// class order, which is a complete isomorphism invariant.
pub fn canonical_mask(n: usize, edges: &[(Vertex, Vertex)]) -> u128 {
    assert!(n <= 16, "canonical forms are limited to 16 vertices");
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let invariant = |v: usize| {
        let mut nd: Vec<usize> = adj[v].iter().map(|&w| adj[w].len()).collect();
        nd.sort_unstable();
        (adj[v].len(), nd)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| invariant(v));
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for &v in &order {
        match classes.last_mut() {
            Some(c) if invariant(c[0]) == invariant(v) => c.push(v),
            _ => classes.push(vec![v]),
        }
    }

    let slot_class: Vec<usize> = classes
        .iter()
        .enumerate()
        .flat_map(|(ci, c)| std::iter::repeat_n(ci, c.len()))
        .collect();

    struct Search<'a> {
        n: usize,
        edges: &'a [(Vertex, Vertex)],
        classes: &'a [Vec<usize>],
        slot_class: &'a [usize],
        used: Vec<bool>,
        label: Vec<usize>,
        best: u128,
    }

    impl Search<'_> {
        fn run(&mut self, pos: usize) {
            if pos == self.n {
                let label = &self.label;
                let n = self.n;
                let mask = self
                    .edges
                    .iter()
                    .fold(0u128, |acc, &(u, v)| acc | pair_bit(n, label[u], label[v]));
                self.best = self.best.min(mask);
                return;
            }
            let class = &self.classes[self.slot_class[pos]];
            for &v in class {
                if !self.used[v] {
                    self.used[v] = true;
                    self.label[v] = pos;
                    self.run(pos + 1);
                    self.used[v] = false;
                }
            }
        }
    }

    let mut search = Search {
        n,
        edges,
        classes: &classes,
        slot_class: &slot_class,
        used: vec![false; n],
        label: vec![0; n],
        best: u128::MAX,
    };
    search.run(0);
    if edges.is_empty() {
        0
    } else {
        search.best
    }
}

fn edges_of_mask(n: usize, mask: u128) -> EdgeList {
    VertexPair::all(n)
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, p)| (p.u(), p.v()))
        .collect()
}

/// Every graph on `n` vertices with at most `max_edges` edges, one per isomorphism class.
///
/// Graphs are listed by edge count, then by canonical mask.
pub fn nonisomorphic_graphs(n: usize, max_edges: usize) -> Vec<EdgeList> {
    let all_pairs: Vec<VertexPair> = VertexPair::all(n).collect();
    let mut level: Vec<u128> = vec![0];
    let mut out: Vec<EdgeList> = vec![Vec::new()];
    for _ in 0..max_edges.min(all_pairs.len()) {
        let mut next: HashSet<u128> = HashSet::new();
        for &mask in &level {
            for (i, p) in all_pairs.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    continue;
                }
                let mut edges = edges_of_mask(n, mask);
                edges.push((p.u(), p.v()));
                next.insert(canonical_mask(n, &edges));
            }
        }
        let mut sorted: Vec<u128> = next.into_iter().collect();
        sorted.sort_unstable();
        out.extend(sorted.iter().map(|&m| edges_of_mask(n, m)));
        level = sorted;
    }
    out
}

fn is_connected(n: usize, edges: &[(Vertex, Vertex)]) -> bool {
    if n <= 1 {
        return true;
    }
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(x) = stack.pop() {
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    seen.into_iter().all(|b| b)
}

/// Connected graphs on exactly `n` vertices with at most `max_edges` edges, up to isomorphism.
pub fn connected_graphs(n: usize, max_edges: usize) -> Vec<EdgeList> {
    nonisomorphic_graphs(n, max_edges)
        .into_iter()
        .filter(|e| is_connected(n, e))
        .collect()
}

/// A connected graph with `n` vertices and `m` edges: a random recursive tree
/// plus `m − (n − 1)` extra edges drawn uniformly from the remaining pairs.
///
/// Panics if `m` is outside `[n − 1, n(n − 1)/2]`.
pub fn random_connected_graph<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize) -> EdgeList {
    let max = n * n.saturating_sub(1) / 2;
    assert!(n >= 1 && m + 1 >= n && m <= max, "no connected graph with n={n}, m={m}");
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut present: HashSet<VertexPair> = HashSet::new();
    let mut edges = Vec::with_capacity(m);
    for i in 1..n {
        let j = rng.gen_range(0..i);
        let (u, v) = (perm[i], perm[j]);
        present.insert(VertexPair::new(u, v).unwrap());
        edges.push((u.min(v), u.max(v)));
    }
    let mut rest: Vec<VertexPair> = VertexPair::all(n).filter(|p| !present.contains(p)).collect();
    rest.shuffle(rng);
    edges.extend(rest.into_iter().take(m + 1 - n).map(|p| (p.u(), p.v())));
    edges
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_xoshiro::Xoshiro256PlusPlus;

    #[test]
    fn known_graph_counts() {
        // OEIS A000088 (all graphs) and A001349 (connected graphs).
        let all = [1, 1, 2, 4, 11, 34, 156];
        let conn = [1, 1, 1, 2, 6, 21, 112];
        for n in 0usize..=6 {
            let max = n * n.saturating_sub(1) / 2;
            assert_eq!(nonisomorphic_graphs(n, max).len(), all[n], "n={n}");
            assert_eq!(connected_graphs(n, max).len(), conn[n], "n={n}");
        }
    }

    #[test]
    fn connected_graphs_with_few_edges() {
        // Connected graphs with exactly m edges: 1, 1, 3, 5, 12, 30 for m = 1..6
        // (A002905); n ranges over 2..=m+1.
        let mut by_m = [0usize; 7];
        for n in 2..=7 {
            for g in connected_graphs(n, 6) {
                by_m[g.len()] += 1;
            }
        }
        assert_eq!(&by_m[1..], &[1, 1, 3, 5, 12, 30]);
    }

    #[test]
    fn canonical_mask_is_relabelling_invariant() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(11);
        for _ in 0..50 {
            let n: usize = rng.gen_range(2..8);
            let max = n * (n - 1) / 2;
            let m = rng.gen_range(n - 1..=max);
            let g = random_connected_graph(&mut rng, n, m);
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            let h: Vec<_> = g.iter().map(|&(u, v)| (perm[u], perm[v])).collect();
            assert_eq!(canonical_mask(n, &g), canonical_mask(n, &h));
        }
    }

    #[test]
    fn random_graphs_are_connected_and_simple() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(5);
        for _ in 0..100 {
            let n: usize = rng.gen_range(1..9);
            let max = n * n.saturating_sub(1) / 2;
            let m = rng.gen_range(n.saturating_sub(1)..=max);
            let g = random_connected_graph(&mut rng, n, m);
            assert_eq!(g.len(), m);
            assert!(is_connected(n, &g));
            let set: HashSet<_> = g.iter().map(|&(u, v)| VertexPair::new(u, v).unwrap()).collect();
            assert_eq!(set.len(), m);
        }
    }
}
