//! Classical reference solvers used to check the network's emergent answers:
//! Dijkstra shortest paths, exact subset-DP traveling salesman, and a dense
//! Gaussian-elimination circuit solve.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::circuit::{SolveResult, SourceSpec};
use crate::error::{Error, Result};
use crate::topology::{Edge, EdgeId, Network, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    HopCount,
    GeometricLength,
}

impl Metric {
    pub fn weight(self, e: &Edge) -> f64 {
        match self {
            Metric::HopCount => 1.0,
            Metric::GeometricLength => e.length,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OraclePath {
    pub nodes: Vec<NodeId>,
    pub edges: Vec<EdgeId>,
    pub weight: f64,
}

#[derive(Copy, Clone, PartialEq)]
struct Entry {
    dist: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, then on node id
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Distances from `src` to every node (`inf` when unreachable).
pub fn distances_from(net: &Network, src: NodeId, metric: Metric) -> Result<Vec<f64>> {
    net.check_node(src)?;
    let mut dist = vec![f64::INFINITY; net.node_count()];
    let mut heap = BinaryHeap::new();
    dist[src.0] = 0.0;
    heap.push(Entry { dist: 0.0, node: src.0 });
    while let Some(Entry { dist: d, node: u }) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &k in net.incident(NodeId(u)) {
            let e = &net.edges()[k];
            let v = e.other(NodeId(u)).0;
            let nd = d + metric.weight(e);
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Entry { dist: nd, node: v });
            }
        }
    }
    Ok(dist)
}

fn tight(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Minimum-weight path. Among equal-weight continuations the smallest next
/// node id is taken.
pub fn dijkstra(net: &Network, src: NodeId, dst: NodeId, metric: Metric) -> Result<OraclePath> {
    net.check_node(src)?;
    let to_dst = distances_from(net, dst, metric)?;
    if !to_dst[src.0].is_finite() {
        return Err(Error::Disconnected(src, dst));
    }
    let mut nodes = vec![src];
    let mut edges = Vec::new();
    let mut u = src;
    while u != dst {
        let (e, v) = net
            .incident(u)
            .iter()
            .map(|&k| &net.edges()[k])
            .map(|e| (e, e.other(u)))
            .filter(|(e, v)| tight(to_dst[u.0], metric.weight(e) + to_dst[v.0]))
            .min_by_key(|(e, v)| (*v, e.id))
            .expect("a tight edge always exists on a shortest-path tree");
        edges.push(e.id);
        nodes.push(v);
        u = v;
    }
    Ok(OraclePath {
        nodes,
        edges,
        weight: to_dst[src.0],
    })
}

/// Every minimum-weight path up to `cap`. The flag is true when the cap cut
/// the enumeration short.
pub fn all_shortest_paths(
    net: &Network,
    src: NodeId,
    dst: NodeId,
    metric: Metric,
    cap: usize,
) -> Result<(Vec<OraclePath>, bool)> {
    net.check_node(src)?;
    let to_dst = distances_from(net, dst, metric)?;
    if !to_dst[src.0].is_finite() {
        return Err(Error::Disconnected(src, dst));
    }
    let mut out = Vec::new();
    let mut hit = false;
    let mut nodes = vec![src];
    let mut edges = Vec::new();
    walk_tight(net, metric, &to_dst, dst, cap, &mut nodes, &mut edges, &mut out, &mut hit);
    Ok((out, hit))
}

#[allow(clippy::too_many_arguments)]
fn walk_tight(
    net: &Network,
    metric: Metric,
    to_dst: &[f64],
    dst: NodeId,
    cap: usize,
    nodes: &mut Vec<NodeId>,
    edges: &mut Vec<EdgeId>,
    out: &mut Vec<OraclePath>,
    hit: &mut bool,
) {
    let u = *nodes.last().expect("non-empty");
    if u == dst {
        if out.len() >= cap {
            *hit = true;
            return;
        }
        out.push(OraclePath {
            nodes: nodes.clone(),
            edges: edges.clone(),
            weight: to_dst[nodes[0].0],
        });
        return;
    }
    let mut next: Vec<(NodeId, EdgeId)> = net
        .incident(u)
        .iter()
        .map(|&k| &net.edges()[k])
        .filter(|e| {
            let v = e.other(u);
            tight(to_dst[u.0], metric.weight(e) + to_dst[v.0]) && to_dst[v.0] < to_dst[u.0]
        })
        .map(|e| (e.other(u), e.id))
        .collect();
    next.sort_unstable();
    for (v, id) in next {
        if *hit {
            return;
        }
        nodes.push(v);
        edges.push(id);
        walk_tight(net, metric, to_dst, dst, cap, nodes, edges, out, hit);
        nodes.pop();
        edges.pop();
    }
}

/// Pairwise graph shortest-path distances between `cities`.
pub fn city_distances(net: &Network, cities: &[NodeId], metric: Metric) -> Result<Vec<Vec<f64>>> {
    cities
        .iter()
        .map(|&a| {
            let d = distances_from(net, a, metric)?;
            cities
                .iter()
                .map(|&b| {
                    let v = d[b.0];
                    if v.is_finite() {
                        Ok(v)
                    } else {
                        Err(Error::Disconnected(a, b))
                    }
                })
                .collect()
        })
        .collect()
}

/// Exact minimum closed tour over a symmetric distance matrix by dynamic
/// programming over subsets. The tour starts and ends at index 0 and is
/// returned without repeating the start.
pub fn brute_force_tsp(distances: &[Vec<f64>]) -> Result<(Vec<usize>, f64)> {
    let n = distances.len();
    if !(3..=15).contains(&n) {
        return Err(Error::TspSizeOutOfRange(n));
    }
    if distances.iter().flatten().any(|d| !d.is_finite()) {
        return Err(Error::InvalidConfig("distance matrix has non-finite entries".into()));
    }
    // best[mask][j]: shortest path from 0 through the cities in `mask`
    // (bit i-1 for city i), ending at j.
    let m = n - 1;
    let full = (1usize << m) - 1;
    let mut best = vec![vec![f64::INFINITY; n]; 1 << m];
    let mut parent = vec![vec![usize::MAX; n]; 1 << m];
    for j in 1..n {
        best[1 << (j - 1)][j] = distances[0][j];
        parent[1 << (j - 1)][j] = 0;
    }
    for mask in 1..=full {
        for j in 1..n {
            let bit = 1 << (j - 1);
            if mask & bit == 0 || !best[mask][j].is_finite() {
                continue;
            }
            for k in 1..n {
                let kb = 1 << (k - 1);
                if mask & kb != 0 {
                    continue;
                }
                let cand = best[mask][j] + distances[j][k];
                if cand < best[mask | kb][k] {
                    best[mask | kb][k] = cand;
                    parent[mask | kb][k] = j;
                }
            }
        }
    }
    let (last, length) = (1..n)
        .map(|j| (j, best[full][j] + distances[j][0]))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .expect("n >= 3");
    let mut tour = Vec::with_capacity(n);
    let (mut mask, mut j) = (full, last);
    while j != 0 {
        tour.push(j);
        let p = parent[mask][j];
        mask &= !(1 << (j - 1));
        j = p;
    }
    tour.push(0);
    tour.reverse();
    Ok((tour, length))
}

/// Largest network accepted by [`dense_solve`].
pub const DENSE_LIMIT: usize = 500;

/// Full-matrix circuit solve with partial-pivot Gaussian elimination.
pub fn dense_solve(net: &Network, src: &SourceSpec) -> Result<SolveResult> {
    let n = net.node_count();
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge(n));
    }
    for &f in src.fixed().keys() {
        net.check_node(f)?;
    }
    let free: Vec<usize> = (0..n).filter(|&i| src.potential(NodeId(i)).is_none()).collect();
    let mut index = vec![usize::MAX; n];
    for (r, &i) in free.iter().enumerate() {
        index[i] = r;
    }
    let m = free.len();
    let mut a = vec![vec![0.0; m + 1]; m];
    for e in net.edges() {
        let g = e.unit.conductance();
        if !g.is_finite() {
            return Err(Error::NonFiniteConductance(e.id));
        }
        let (u, v) = (e.from.0, e.to.0);
        for (p, q) in [(u, v), (v, u)] {
            if index[p] == usize::MAX {
                continue;
            }
            let r = index[p];
            a[r][r] += g;
            match src.potential(NodeId(q)) {
                Some(vq) => a[r][m] += g * vq,
                None => a[r][index[q]] -= g,
            }
        }
    }
    let diag_scale = (0..m).fold(0.0f64, |s, r| s.max(a[r][r].abs())).max(f64::MIN_POSITIVE);
    for c in 0..m {
        let p = (c..m)
            .max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()))
            .expect("non-empty range");
        if a[p][c].abs() <= 1e-12 * diag_scale {
            return Err(Error::FloatingNode(NodeId(free[c])));
        }
        a.swap(c, p);
        let pivot = a[c].clone();
        for row in a.iter_mut().skip(c + 1) {
            let f = row[c] / pivot[c];
            if f != 0.0 {
                for k in c..=m {
                    row[k] -= f * pivot[k];
                }
            }
        }
    }
    let mut x = vec![0.0; m];
    for r in (0..m).rev() {
        let s: f64 = (r + 1..m).map(|k| a[r][k] * x[k]).sum();
        x[r] = (a[r][m] - s) / a[r][r];
    }
    let potentials: Vec<f64> = (0..n)
        .map(|i| src.potential(NodeId(i)).unwrap_or_else(|| x[index[i]]))
        .collect();
    let edge_currents: Vec<f64> = net
        .edges()
        .iter()
        .map(|e| (potentials[e.from.0] - potentials[e.to.0]) * e.unit.conductance())
        .collect();
    let mut imbalance = vec![0.0; n];
    for (e, &i) in net.edges().iter().zip(&edge_currents) {
        imbalance[e.from.0] += i;
        imbalance[e.to.0] -= i;
    }
    let kcl_residual = free.iter().fold(0.0f64, |s, &i| s.max(imbalance[i].abs()));
    Ok(SolveResult {
        potentials,
        edge_ids: net.edges().iter().map(|e| e.id).collect(),
        edge_currents,
        source_current: imbalance[src.input().0],
        kcl_residual,
    })
}
