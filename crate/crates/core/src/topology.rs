//! Network graphs of basic units: regular grids, random planar networks,
//! damage and reduced-network extraction.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::device::{BasicUnit, DeviceParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub position: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub id: EdgeId,
    /// Reference direction runs `from -> to`.
    pub from: NodeId,
    pub to: NodeId,
    pub unit: BasicUnit,
    pub length: f64,
}

impl Edge {
    pub fn other(&self, n: NodeId) -> NodeId {
        if n == self.from {
            self.to
        } else {
            self.from
        }
    }

    pub fn touches(&self, n: NodeId) -> bool {
        self.from == n || self.to == n
    }
}

/// Row/column layout of a network built by [`Network::grid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridShape {
    pub rows: usize,
    pub cols: usize,
}

impl GridShape {
    pub fn node(&self, row: usize, col: usize) -> NodeId {
        NodeId(row * self.cols + col)
    }

    pub fn row_col(&self, n: NodeId) -> (usize, usize) {
        (n.0 / self.cols, n.0 % self.cols)
    }
}

/// Nodes and basic-unit edges.
///
/// Edges are kept sorted by id. Node and edge ids survive
/// [`Network::remove_edges`] unchanged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    #[serde(skip)]
    adjacency: Vec<Vec<usize>>,
    grid: Option<GridShape>,
}

impl Network {
    /// Builds a network from positions and endpoint pairs. Edge ids follow
    /// the order of `links`; all units start OFF.
    pub fn from_links(
        positions: Vec<Point>,
        links: &[(NodeId, NodeId)],
        params: DeviceParams,
    ) -> Result<Self> {
        params.validate()?;
        let nodes: Vec<Node> = positions
            .into_iter()
            .enumerate()
            .map(|(i, position)| Node {
                id: NodeId(i),
                position,
            })
            .collect();
        let mut seen = BTreeSet::new();
        let mut edges = Vec::with_capacity(links.len());
        for (k, &(a, b)) in links.iter().enumerate() {
            for n in [a, b] {
                if n.0 >= nodes.len() {
                    return Err(Error::UnknownNode(n));
                }
            }
            let length = nodes[a.0].position.distance(&nodes[b.0].position);
            if a == b || !(length > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "edge {k} joins {a} and {b}, which coincide"
                )));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::InvalidParams(format!("duplicate edge between {a} and {b}")));
            }
            edges.push(Edge {
                id: EdgeId(k),
                from: a,
                to: b,
                unit: BasicUnit::off(params),
                length,
            });
        }
        Ok(Self::assemble(nodes, edges, None))
    }

    fn assemble(nodes: Vec<Node>, edges: Vec<Edge>, grid: Option<GridShape>) -> Self {
        let mut net = Self {
            nodes,
            edges,
            adjacency: Vec::new(),
            grid,
        };
        net.rebuild_adjacency();
        net
    }

    fn rebuild_adjacency(&mut self) {
        let mut adjacency = vec![Vec::new(); self.nodes.len()];
        for (k, e) in self.edges.iter().enumerate() {
            adjacency[e.from.0].push(k);
            adjacency[e.to.0].push(k);
        }
        self.adjacency = adjacency;
    }

    /// Restores derived indices after deserialization.
    pub fn reindex(&mut self) {
        self.rebuild_adjacency();
    }

    /// `rows x cols` lattice with unit spacing; row 0 is at `y = 0`.
    ///
    /// Horizontal edges get ids first (row by row), then vertical edges.
    pub fn grid(rows: usize, cols: usize, params: DeviceParams) -> Result<Self> {
        if rows < 2 || cols < 2 {
            return Err(Error::InvalidDimensions { rows, cols });
        }
        let shape = GridShape { rows, cols };
        let positions = (0..rows)
            .flat_map(|r| (0..cols).map(move |c| Point::new(c as f64, r as f64)))
            .collect();
        let mut links = Vec::with_capacity(rows * (cols - 1) + cols * (rows - 1));
        for r in 0..rows {
            for c in 0..cols - 1 {
                links.push((shape.node(r, c), shape.node(r, c + 1)));
            }
        }
        for r in 0..rows - 1 {
            for c in 0..cols {
                links.push((shape.node(r, c), shape.node(r + 1, c)));
            }
        }
        let mut net = Self::from_links(positions, &links, params)?;
        net.grid = Some(shape);
        Ok(net)
    }

    /// Random planar network in an `n_scale x n_scale` square (unit length
    /// `a = 1`) with default spacing rules and node count.
    pub fn random(n_scale: usize, seed: u64, params: DeviceParams) -> Result<Self> {
        Self::random_with(&RandomSpec::new(n_scale), seed, params)
    }

    pub fn random_with(spec: &RandomSpec, seed: u64, params: DeviceParams) -> Result<Self> {
        if spec.n_scale < 2 {
            return Err(Error::InvalidParams(format!(
                "n_scale must be at least 2, got {}",
                spec.n_scale
            )));
        }
        if !(spec.min_dist > 0.0 && spec.connect_radius > 0.0) {
            return Err(Error::InvalidParams("distances must be positive".into()));
        }
        let side = spec.n_scale as f64;
        let target = spec.node_count();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut positions: Vec<Point> = Vec::with_capacity(target);
        // Bucket grid with cell size >= min_dist, so only the 3x3
        // neighborhood needs checking.
        let cell = spec.min_dist.max(spec.connect_radius);
        let cells = ((side / cell).ceil() as usize).max(1);
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); cells * cells];
        let bucket_of = |p: &Point| {
            let cx = ((p.x / cell) as usize).min(cells - 1);
            let cy = ((p.y / cell) as usize).min(cells - 1);
            (cx, cy)
        };
        let mut rejections = 0;
        while positions.len() < target {
            let p = Point::new(rng.gen::<f64>() * side, rng.gen::<f64>() * side);
            let (cx, cy) = bucket_of(&p);
            let too_close = neighborhood(cx, cy, cells)
                .flat_map(|b| buckets[b].iter())
                .any(|&k| positions[k].distance(&p) < spec.min_dist);
            if too_close {
                rejections += 1;
                if rejections >= spec.max_rejections {
                    return Err(Error::SamplingFailed {
                        placed: positions.len(),
                        target,
                        rejections,
                    });
                }
                continue;
            }
            rejections = 0;
            buckets[cy * cells + cx].push(positions.len());
            positions.push(p);
        }

        let mut links = Vec::new();
        for (i, p) in positions.iter().enumerate() {
            let (cx, cy) = bucket_of(p);
            let mut near: Vec<usize> = neighborhood(cx, cy, cells)
                .flat_map(|b| buckets[b].iter().copied())
                .filter(|&j| j > i && positions[j].distance(p) < spec.connect_radius)
                .collect();
            near.sort_unstable();
            links.extend(near.into_iter().map(|j| (NodeId(i), NodeId(j))));
        }
        Self::from_links(positions, &links, params)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edges_mut(&mut self) -> &mut [Edge] {
        &mut self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn grid_shape(&self) -> Option<GridShape> {
        self.grid
    }

    pub fn position(&self, n: NodeId) -> Result<Point> {
        self.nodes
            .get(n.0)
            .map(|node| node.position)
            .ok_or(Error::UnknownNode(n))
    }

    pub fn check_node(&self, n: NodeId) -> Result<()> {
        if n.0 < self.nodes.len() {
            Ok(())
        } else {
            Err(Error::UnknownNode(n))
        }
    }

    /// Index of an edge in [`Network::edges`].
    pub fn edge_index(&self, id: EdgeId) -> Result<usize> {
        self.edges
            .binary_search_by_key(&id, |e| e.id)
            .map_err(|_| Error::UnknownEdge(id))
    }

    pub fn edge(&self, id: EdgeId) -> Result<&Edge> {
        self.edge_index(id).map(|k| &self.edges[k])
    }

    pub fn edge_mut(&mut self, id: EdgeId) -> Result<&mut Edge> {
        let k = self.edge_index(id)?;
        Ok(&mut self.edges[k])
    }

    /// Edges incident to `n`, as positions into [`Network::edges`].
    pub fn incident(&self, n: NodeId) -> &[usize] {
        &self.adjacency[n.0]
    }

    pub fn incident_ids(&self, n: NodeId) -> impl Iterator<Item = EdgeId> + '_ {
        self.adjacency[n.0].iter().map(move |&k| self.edges[k].id)
    }

    pub fn degree(&self, n: NodeId) -> usize {
        self.adjacency[n.0].len()
    }

    pub fn edge_between(&self, a: NodeId, b: NodeId) -> Option<EdgeId> {
        self.adjacency
            .get(a.0)?
            .iter()
            .map(|&k| &self.edges[k])
            .find(|e| e.other(a) == b && e.touches(b))
            .map(|e| e.id)
    }

    /// Node closest to `p`; ties go to the smaller id.
    pub fn nearest_node(&self, p: Point) -> Option<NodeId> {
        self.nodes
            .iter()
            .min_by(|a, b| {
                a.position
                    .distance(&p)
                    .total_cmp(&b.position.distance(&p))
                    .then(a.id.cmp(&b.id))
            })
            .map(|n| n.id)
    }

    /// Node of the largest connected component closest to `p` (largest
    /// component ties go to the one with the smaller label).
    pub fn nearest_connected_node(&self, p: Point) -> Option<NodeId> {
        let labels = self.component_labels();
        let mut sizes = vec![0usize; labels.iter().max().map_or(0, |m| m + 1)];
        for &l in &labels {
            sizes[l] += 1;
        }
        let giant = (0..sizes.len()).max_by(|a, b| sizes[*a].cmp(&sizes[*b]).then(b.cmp(a)))?;
        self.nodes
            .iter()
            .filter(|n| labels[n.id.0] == giant)
            .min_by(|a, b| {
                a.position
                    .distance(&p)
                    .total_cmp(&b.position.distance(&p))
                    .then(a.id.cmp(&b.id))
            })
            .map(|n| n.id)
    }

    /// Returns every unit to both-OFF.
    pub fn reset_states(&mut self) {
        for e in &mut self.edges {
            e.unit.reset();
        }
    }

    pub fn unit_resistances(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.unit.resistance()).collect()
    }

    /// Copy without the given edges. Node ids and the remaining edge ids and
    /// states are kept.
    pub fn remove_edges(&self, ids: &[EdgeId]) -> Result<Self> {
        let mut drop = BTreeSet::new();
        for &id in ids {
            self.edge_index(id)?;
            if !drop.insert(id) {
                return Err(Error::DuplicateEdge(id));
            }
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| !drop.contains(&e.id))
            .cloned()
            .collect();
        Ok(Self::assemble(self.nodes.clone(), edges, self.grid))
    }

    /// True iff some path of edges joins `a` and `b`.
    pub fn connected(&self, a: NodeId, b: NodeId) -> Result<bool> {
        self.check_node(a)?;
        self.check_node(b)?;
        let labels = self.component_labels();
        Ok(labels[a.0] == labels[b.0])
    }

    /// Connected-component label per node (labels are dense, in order of the
    /// smallest node id of each component).
    pub fn component_labels(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.nodes.len()];
        let mut next = 0;
        let mut queue = VecDeque::new();
        for start in 0..self.nodes.len() {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = next;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for &k in &self.adjacency[u] {
                    let v = self.edges[k].other(NodeId(u)).0;
                    if label[v] == usize::MAX {
                        label[v] = next;
                        queue.push_back(v);
                    }
                }
            }
            next += 1;
        }
        label
    }

    /// Subnetwork made of `on_edges` and their endpoints, with all units
    /// reset to OFF. Nodes are renumbered densely in increasing original id
    /// order; edges keep the order of their original ids.
    pub fn reduced(&self, on_edges: &[EdgeId]) -> Result<Reduced> {
        if on_edges.is_empty() {
            return Err(Error::EmptyEdgeSet);
        }
        let mut keep = BTreeSet::new();
        for &id in on_edges {
            self.edge_index(id)?;
            keep.insert(id);
        }
        let mut used = BTreeSet::new();
        for &id in &keep {
            let e = self.edge(id)?;
            used.insert(e.from);
            used.insert(e.to);
        }
        let original_nodes: Vec<NodeId> = used.into_iter().collect();
        let mut local = vec![None; self.nodes.len()];
        for (i, n) in original_nodes.iter().enumerate() {
            local[n.0] = Some(NodeId(i));
        }
        let nodes = original_nodes
            .iter()
            .enumerate()
            .map(|(i, n)| Node {
                id: NodeId(i),
                position: self.nodes[n.0].position,
            })
            .collect();
        let original_edges: Vec<EdgeId> = keep.into_iter().collect();
        let edges = original_edges
            .iter()
            .enumerate()
            .map(|(k, id)| {
                let e = &self.edges[self.edge_index(*id).expect("checked above")];
                let mut unit = e.unit;
                unit.reset();
                Edge {
                    id: EdgeId(k),
                    from: local[e.from.0].expect("endpoint kept"),
                    to: local[e.to.0].expect("endpoint kept"),
                    unit,
                    length: e.length,
                }
            })
            .collect();
        Ok(Reduced {
            network: Self::assemble(nodes, edges, None),
            original_nodes,
            original_edges,
            local_of: local,
        })
    }
}

/// A reduced network plus the id maps back to its parent.
#[derive(Debug, Clone)]
pub struct Reduced {
    pub network: Network,
    /// Parent id of each reduced node, indexed by reduced id.
    pub original_nodes: Vec<NodeId>,
    /// Parent id of each reduced edge, indexed by reduced id.
    pub original_edges: Vec<EdgeId>,
    local_of: Vec<Option<NodeId>>,
}

impl Reduced {
    /// Reduced id of a parent node, if the node survived.
    pub fn local_node(&self, original: NodeId) -> Option<NodeId> {
        self.local_of.get(original.0).copied().flatten()
    }

    pub fn original_edge(&self, local: EdgeId) -> EdgeId {
        self.original_edges[local.0]
    }
}

/// Parameters for [`Network::random_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RandomSpec {
    pub n_scale: usize,
    /// Node count; `None` means `round(0.7 * n_scale^2)`.
    pub nodes: Option<usize>,
    pub min_dist: f64,
    pub connect_radius: f64,
    pub max_rejections: usize,
}

impl Default for RandomSpec {
    fn default() -> Self {
        Self::new(20)
    }
}

impl RandomSpec {
    pub fn new(n_scale: usize) -> Self {
        Self {
            n_scale,
            nodes: None,
            min_dist: 0.9,
            connect_radius: 1.5,
            max_rejections: 10_000,
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes
            .unwrap_or_else(|| (0.7 * (self.n_scale * self.n_scale) as f64).round() as usize)
    }
}

fn neighborhood(cx: usize, cy: usize, cells: usize) -> impl Iterator<Item = usize> {
    let xs = cx.saturating_sub(1)..=(cx + 1).min(cells - 1);
    xs.flat_map(move |x| {
        let ys = cy.saturating_sub(1)..=(cy + 1).min(cells - 1);
        ys.map(move |y| y * cells + x)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> DeviceParams {
        DeviceParams::default()
    }

    #[test]
    fn grid_counts() {
        for (r, c) in [(2, 2), (11, 11), (3, 2), (5, 7)] {
            let g = Network::grid(r, c, p()).unwrap();
            assert_eq!(g.node_count(), r * c);
            assert_eq!(g.edge_count(), r * (c - 1) + c * (r - 1));
        }
        assert_eq!(Network::grid(11, 11, p()).unwrap().edge_count(), 220);
        assert_eq!(Network::grid(3, 2, p()).unwrap().edge_count(), 7);
        assert!(matches!(
            Network::grid(1, 5, p()),
            Err(Error::InvalidDimensions { .. })
        ));
    }

    #[test]
    fn grid_starts_off_with_unit_lengths() {
        let g = Network::grid(4, 4, p()).unwrap();
        for e in g.edges() {
            assert_eq!(e.unit.resistance(), 100.0);
            assert_eq!(e.length, 1.0);
        }
    }

    #[test]
    fn random_is_deterministic() {
        let a = Network::random(20, 7, p()).unwrap();
        let b = Network::random(20, 7, p()).unwrap();
        assert_eq!(a, b);
        let c = Network::random(20, 8, p()).unwrap();
        assert_ne!(a.nodes(), c.nodes());
    }

    #[test]
    fn random_respects_distance_rules() {
        for seed in 0..5 {
            let net = Network::random(12, seed, p()).unwrap();
            let nodes = net.nodes();
            for i in 0..nodes.len() {
                for j in i + 1..nodes.len() {
                    let d = nodes[i].position.distance(&nodes[j].position);
                    assert!(d >= 0.9, "seed {seed}: nodes {i},{j} at {d}");
                    let linked = net.edge_between(NodeId(i), NodeId(j)).is_some();
                    assert_eq!(linked, d < 1.5, "seed {seed}: pair {i},{j} at {d}");
                }
            }
        }
    }

    #[test]
    fn impossible_density_reports_failure() {
        let mut spec = RandomSpec::new(3);
        spec.nodes = Some(100);
        spec.max_rejections = 500;
        assert!(matches!(
            Network::random_with(&spec, 1, p()),
            Err(Error::SamplingFailed { .. })
        ));
    }

    #[test]
    fn remove_edges_cases() {
        let g = Network::grid(11, 11, p()).unwrap();
        assert_eq!(g.remove_edges(&[]).unwrap(), g);
        let damaged = g.remove_edges(&[EdgeId(54), EdgeId(55), EdgeId(64)]).unwrap();
        assert_eq!(damaged.edge_count(), 217);
        assert_eq!(damaged.node_count(), 121);
        assert!(damaged.edge(EdgeId(54)).is_err());
        assert_eq!(damaged.edge(EdgeId(56)).unwrap(), g.edge(EdgeId(56)).unwrap());
        assert_eq!(
            g.remove_edges(&[EdgeId(3), EdgeId(3)]),
            Err(Error::DuplicateEdge(EdgeId(3)))
        );
        assert_eq!(g.remove_edges(&[EdgeId(999)]), Err(Error::UnknownEdge(EdgeId(999))));
    }

    #[test]
    fn reduced_cases() {
        let mut g = Network::grid(3, 3, p()).unwrap();
        g.edges_mut()[0].unit.device_b.x = 10.0;
        let all: Vec<EdgeId> = g.edges().iter().map(|e| e.id).collect();
        let r = g.reduced(&all).unwrap();
        assert_eq!(r.network.node_count(), 9);
        assert_eq!(r.network.edge_count(), 12);
        assert!(r.network.edges().iter().all(|e| e.unit.resistance() == 100.0));

        // path 0-1-2 along the bottom row
        let path = [EdgeId(0), EdgeId(1)];
        let r = g.reduced(&path).unwrap();
        assert_eq!(r.network.node_count(), 3);
        assert_eq!(r.network.edge_count(), 2);
        assert_eq!(r.original_edge(EdgeId(1)), EdgeId(1));
        assert_eq!(r.local_node(NodeId(2)), Some(NodeId(2)));
        assert_eq!(r.local_node(NodeId(4)), None);

        assert!(matches!(g.reduced(&[]), Err(Error::EmptyEdgeSet)));
    }

    #[test]
    fn reduced_is_idempotent_on_topology() {
        let g = Network::grid(4, 4, p()).unwrap();
        let ids = [EdgeId(0), EdgeId(1), EdgeId(13), EdgeId(20)];
        let once = g.reduced(&ids).unwrap().network;
        let all: Vec<EdgeId> = once.edges().iter().map(|e| e.id).collect();
        let twice = once.reduced(&all).unwrap().network;
        assert_eq!(once, twice);
    }

    #[test]
    fn connectivity() {
        let g = Network::grid(11, 11, p()).unwrap();
        assert!(g.connected(NodeId(5), NodeId(5)).unwrap());
        assert!(g.connected(NodeId(0), NodeId(120)).unwrap());
        let isolated = Network::from_links(
            vec![Point::new(0.0, 0.0), Point::new(5.0, 0.0)],
            &[],
            p(),
        )
        .unwrap();
        assert!(!isolated.connected(NodeId(0), NodeId(1)).unwrap());
        assert!(isolated.connected(NodeId(0), NodeId(7)).is_err());
    }
}
