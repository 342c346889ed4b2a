//! Exact series-parallel elimination for two-terminal (or k-terminal) queries.
//!
//! Removing a non-terminal vertex of degree 0, 1 or 2 and merging parallel
//! edges changes every restricted partition sum on the kept vertices by the
//! same rational factor. That lets the brute-force oracle evaluate graphs
//! that are mostly long paths (such as gadget splices) exactly.

use std::collections::{BTreeSet, HashMap};

use num_traits::One;

use crate::error::{Error, Result};
use crate::model::{Vertex, VertexPair, WeightedGraph};
use crate::rational::{int, Rational};

/// A smaller graph plus the factor relating its partition sums to the original.
///
/// For every spin assignment `τ` of the kept vertices,
/// `Σ_{σ ⊇ τ} wt_original(σ) = scale · Σ_{σ' ⊇ τ} wt_reduced(σ')`.
#[derive(Debug, Clone)]
pub struct Reduction {
    /// Kept vertices are `0..keep.len()` in the order given; survivors follow.
    pub graph: WeightedGraph,
    pub scale: Rational,
}

pub fn series_parallel_reduce(graph: &WeightedGraph, keep: &[Vertex]) -> Result<Reduction> {
    reduce(graph, keep, true)
}

/// Like [`series_parallel_reduce`] but leaves `scale` at one. Ratios of
/// restricted sums (covariances, corner ratios) do not need it, and skipping
/// it avoids multiplying a very large integer on every elimination.
pub fn series_parallel_reduce_unscaled(graph: &WeightedGraph, keep: &[Vertex]) -> Result<WeightedGraph> {
    Ok(reduce(graph, keep, false)?.graph)
}

fn reduce(graph: &WeightedGraph, keep: &[Vertex], track_scale: bool) -> Result<Reduction> {
    let n = graph.n();
    let mut kept = vec![false; n];
    for &k in keep {
        graph.check_vertex(k)?;
        if kept[k] {
            return Err(Error::Argument(format!("vertex {k} listed twice")));
        }
        kept[k] = true;
    }

    let mut weight: HashMap<VertexPair, Rational> = HashMap::with_capacity(graph.m());
    let mut adj: Vec<BTreeSet<Vertex>> = vec![BTreeSet::new(); n];
    for (&(u, v), b) in graph.edges().iter().zip(graph.beta()) {
        weight.insert(VertexPair::new(u, v).unwrap(), b.clone());
        adj[u].insert(v);
        adj[v].insert(u);
    }
    let mut alive = vec![true; n];
    let mut scale = Rational::one();
    let mut work: Vec<Vertex> = (0..n).rev().filter(|&v| !kept[v]).collect();

    while let Some(v) = work.pop() {
        if !alive[v] || kept[v] {
            continue;
        }
        match adj[v].len() {
            0 => {
                if track_scale {
                    scale *= int(2);
                }
                alive[v] = false;
            }
            1 => {
                let x = *adj[v].iter().next().unwrap();
                let b = weight.remove(&VertexPair::new(v, x).unwrap()).unwrap();
                if track_scale {
                    scale *= b + Rational::one();
                }
                adj[x].remove(&v);
                adj[v].clear();
                alive[v] = false;
                work.push(x);
            }
            2 => {
                let mut it = adj[v].iter();
                let x = *it.next().unwrap();
                let y = *it.next().unwrap();
                let b1 = weight.remove(&VertexPair::new(v, x).unwrap()).unwrap();
                let b2 = weight.remove(&VertexPair::new(v, y).unwrap()).unwrap();
                let sum = &b1 + &b2;
                let effective = (&b1 * &b2 + Rational::one()) / &sum;
                if track_scale {
                    scale *= sum;
                }
                adj[x].remove(&v);
                adj[y].remove(&v);
                adj[v].clear();
                alive[v] = false;
                let xy = VertexPair::new(x, y).unwrap();
                match weight.get_mut(&xy) {
                    Some(existing) => *existing *= effective,
                    None => {
                        weight.insert(xy, effective);
                        adj[x].insert(y);
                        adj[y].insert(x);
                    }
                }
                work.push(x);
                work.push(y);
            }
            _ => {}
        }
    }

    let mut relabel = vec![usize::MAX; n];
    let mut next = 0;
    for &k in keep {
        relabel[k] = next;
        next += 1;
    }
    for v in 0..n {
        if alive[v] && !kept[v] {
            relabel[v] = next;
            next += 1;
        }
    }
    let mut pairs: Vec<(VertexPair, Rational)> = weight.into_iter().collect();
    pairs.sort_by_key(|(p, _)| (relabel[p.u()].min(relabel[p.v()]), relabel[p.u()].max(relabel[p.v()])));
    let (edges, beta): (Vec<_>, Vec<_>) = pairs
        .into_iter()
        .map(|(p, b)| ((relabel[p.u()], relabel[p.v()]), b))
        .unzip();
    Ok(Reduction {
        graph: WeightedGraph::new(next, edges, beta)?,
        scale,
    })
}
