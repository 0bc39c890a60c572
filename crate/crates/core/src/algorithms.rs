//! Shortest path, healing, post-processing and the random-pulse traveling
//! salesman procedure, plus reading results out of the ON units.
//!
//! Every computation follows the same three stages: initialize the devices
//! (or keep them, for healing), apply pulses, then read which units ended up
//! ON.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{unit_conductances, CircuitSolver, FloatingPolicy, SourceSpec};
use crate::dynamics::{
    apply_pulse, random_pulse_schedule, run_pulse_sequence, PulseDuration, PulseSpec, SimConfig, Trajectory,
};
use crate::device::DynamicsMode;
use crate::error::{Error, Result};
use crate::oracle::{self, Metric};
use crate::topology::{EdgeId, Network, NodeId, Point};

/// Default limit on enumerated ON paths.
pub const PATH_CAP: usize = 16;

// Expansion budget for the ON-path search, so large ON blobs stay cheap.
const SEARCH_BUDGET: usize = 200_000;

/// Edges whose unit resistance is at or below the unit's reading cutoff.
pub fn classify_on(net: &Network) -> Vec<EdgeId> {
    net.edges()
        .iter()
        .filter(|e| e.unit.resistance() <= e.unit.params().on_threshold())
        .map(|e| e.id)
        .collect()
}

/// Simple paths and structural defects of an ON edge set.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PathExtraction {
    /// Node sequences from input to output, at most `cap`.
    pub paths: Vec<Vec<NodeId>>,
    /// Edge sequences matching `paths`.
    pub path_edges: Vec<Vec<EdgeId>>,
    /// The cap (or the search budget) stopped the enumeration.
    pub cap_hit: bool,
    /// ON nodes of degree one that are not terminals.
    pub dead_ends: Vec<NodeId>,
    /// ON components that touch neither terminal.
    pub stray_segments: usize,
}

/// Enumerates simple `input -> output` paths over `on_edges` and reports
/// dead ends and detached ON segments.
pub fn extract_paths(
    net: &Network,
    on_edges: &[EdgeId],
    input: NodeId,
    output: NodeId,
    cap: usize,
) -> Result<PathExtraction> {
    net.check_node(input)?;
    net.check_node(output)?;
    let sub = OnGraph::new(net, on_edges)?;
    let terminals = [input, output];
    let dead_ends = sub
        .degrees()
        .filter(|(n, d)| *d == 1 && !terminals.contains(n))
        .map(|(n, _)| n)
        .collect();
    let components = sub.components();
    let touching: BTreeSet<usize> = terminals.iter().filter_map(|n| components.get(n).copied()).collect();
    let all: BTreeSet<usize> = components.values().copied().collect();
    let stray_segments = all.difference(&touching).count();

    let mut out = PathExtraction {
        dead_ends,
        stray_segments,
        ..Default::default()
    };
    if input == output || !components.contains_key(&input) || components.get(&input) != components.get(&output) {
        return Ok(out);
    }
    let mut visited = BTreeSet::from([input]);
    let mut nodes = vec![input];
    let mut edges = Vec::new();
    let mut budget = SEARCH_BUDGET;
    sub.enumerate(output, cap, &mut visited, &mut nodes, &mut edges, &mut out, &mut budget);
    Ok(out)
}

/// Adjacency view of a set of edges.
struct OnGraph {
    adj: BTreeMap<NodeId, Vec<(NodeId, EdgeId)>>,
}

impl OnGraph {
    fn new(net: &Network, edges: &[EdgeId]) -> Result<Self> {
        let mut adj: BTreeMap<NodeId, Vec<(NodeId, EdgeId)>> = BTreeMap::new();
        for &id in edges {
            let e = net.edge(id)?;
            adj.entry(e.from).or_default().push((e.to, id));
            adj.entry(e.to).or_default().push((e.from, id));
        }
        for list in adj.values_mut() {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self { adj })
    }

    fn degree(&self, n: NodeId) -> usize {
        self.adj.get(&n).map_or(0, Vec::len)
    }

    fn degrees(&self) -> impl Iterator<Item = (NodeId, usize)> + '_ {
        self.adj.iter().map(|(n, l)| (*n, l.len()))
    }

    fn components(&self) -> BTreeMap<NodeId, usize> {
        let mut label = BTreeMap::new();
        let mut next = 0;
        for &start in self.adj.keys() {
            if label.contains_key(&start) {
                continue;
            }
            label.insert(start, next);
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &(v, _) in &self.adj[&u] {
                    if let std::collections::btree_map::Entry::Vacant(slot) = label.entry(v) {
                        slot.insert(next);
                        queue.push_back(v);
                    }
                }
            }
            next += 1;
        }
        label
    }

    #[allow(clippy::too_many_arguments)]
    fn enumerate(
        &self,
        target: NodeId,
        cap: usize,
        visited: &mut BTreeSet<NodeId>,
        nodes: &mut Vec<NodeId>,
        edges: &mut Vec<EdgeId>,
        out: &mut PathExtraction,
        budget: &mut usize,
    ) {
        let u = *nodes.last().expect("non-empty");
        if u == target {
            if out.paths.len() >= cap {
                out.cap_hit = true;
            } else {
                out.paths.push(nodes.clone());
                out.path_edges.push(edges.clone());
            }
            return;
        }
        for &(v, id) in &self.adj[&u] {
            if out.cap_hit {
                return;
            }
            if *budget == 0 {
                out.cap_hit = true;
                return;
            }
            *budget -= 1;
            if !visited.insert(v) {
                continue;
            }
            nodes.push(v);
            edges.push(id);
            self.enumerate(target, cap, visited, nodes, edges, out, budget);
            nodes.pop();
            edges.pop();
            visited.remove(&v);
        }
    }
}

/// Result of reading a shortest-path computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathResult {
    pub input: NodeId,
    pub output: NodeId,
    pub on_edges: Vec<EdgeId>,
    pub paths: Vec<Vec<NodeId>>,
    pub path_edges: Vec<Vec<EdgeId>>,
    /// Two or more edge-disjoint ON paths were found.
    pub degenerate: bool,
    /// Edge count of each path.
    pub hop_counts: Vec<usize>,
    /// Summed edge length of each path.
    pub path_lengths: Vec<f64>,
    pub dead_ends: Vec<NodeId>,
    pub stray_segments: usize,
    pub cap_hit: bool,
}

impl PathResult {
    /// Reads the ON units of `net`.
    pub fn read(net: &Network, input: NodeId, output: NodeId) -> Result<Self> {
        Self::from_on_edges(net, classify_on(net), input, output)
    }

    /// Path reading of an explicit ON set.
    pub fn from_on_edges(net: &Network, on_edges: Vec<EdgeId>, input: NodeId, output: NodeId) -> Result<Self> {
        let ex = extract_paths(net, &on_edges, input, output, PATH_CAP)?;
        let lengths = ex
            .path_edges
            .iter()
            .map(|p| p.iter().map(|&id| net.edge(id).map(|e| e.length)).sum::<Result<f64>>())
            .collect::<Result<Vec<_>>>()?;
        let degenerate = ex.path_edges.iter().enumerate().any(|(i, a)| {
            let a: BTreeSet<_> = a.iter().collect();
            ex.path_edges[i + 1..].iter().any(|b| b.iter().all(|e| !a.contains(e)))
        });
        Ok(Self {
            input,
            output,
            hop_counts: ex.path_edges.iter().map(Vec::len).collect(),
            path_lengths: lengths,
            on_edges,
            paths: ex.paths,
            path_edges: ex.path_edges,
            degenerate,
            dead_ends: ex.dead_ends,
            stray_segments: ex.stray_segments,
            cap_hit: ex.cap_hit,
        })
    }

    pub fn has_path(&self) -> bool {
        !self.paths.is_empty()
    }

    /// Length of the longest extracted path.
    pub fn geometric_length(&self) -> Option<f64> {
        self.path_lengths.iter().copied().reduce(f64::max)
    }
}

/// A solved network reading together with the pulse that produced it.
#[derive(Debug, Clone)]
pub struct PathRun {
    pub result: PathResult,
    pub trajectory: Trajectory,
    pub amplitude: f64,
}

/// How the pulse amplitude of a shortest-path run is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeRule {
    /// A fixed amplitude (V).
    Fixed(f64),
    /// Start where the largest initial unit current equals the threshold
    /// and multiply by `factor` until an ON path joins the terminals.
    Ladder { factor: f64, max_attempts: usize },
}

impl AmplitudeRule {
    pub const DEFAULT_LADDER: Self = Self::Ladder {
        factor: 1.05,
        max_attempts: 40,
    };

    fn validate(&self) -> Result<()> {
        match *self {
            Self::Fixed(v) if v.is_finite() => Ok(()),
            Self::Ladder { factor, max_attempts } if factor > 1.0 && factor.is_finite() && max_attempts > 0 => Ok(()),
            _ => Err(Error::InvalidConfig(format!("invalid amplitude rule {self:?}"))),
        }
    }
}

/// Amplitude at which the largest unit current of the all-OFF network
/// reaches the switching threshold.
pub fn threshold_amplitude(net: &Network, input: NodeId, output: NodeId) -> Result<f64> {
    let mut off = net.clone();
    off.reset_states();
    let src = SourceSpec::pair(input, output, 1.0)?;
    let res = CircuitSolver::new(&off, &src, FloatingPolicy::Ignore)?.solve(&off, &unit_conductances(&off)?)?;
    let (peak, params) = off
        .edges()
        .iter()
        .zip(&res.edge_currents)
        .map(|(e, i)| (i.abs(), e.unit.params()))
        .fold((0.0, None), |(m, p), (i, q)| if i > m { (i, Some(q)) } else { (m, p) });
    match params {
        Some(p) => Ok(p.i_threshold / peak),
        None => Err(Error::NoCurrent),
    }
}

fn require_path(net: &Network, input: NodeId, output: NodeId) -> Result<PathResult> {
    let result = PathResult::read(net, input, output)?;
    if !result.has_path() {
        return Err(Error::NoOnPath {
            input,
            output,
            on_edges: result.on_edges,
        });
    }
    Ok(result)
}

/// Resets every device OFF, applies one pulse to steady state and reads the
/// ON paths. `net` is left in the final state.
pub fn solve_shortest_path(
    net: &mut Network,
    input: NodeId,
    output: NodeId,
    amplitude: f64,
    cfg: &SimConfig,
) -> Result<PathRun> {
    if !net.connected(input, output)? {
        return Err(Error::Disconnected(input, output));
    }
    net.reset_states();
    let cfg = SimConfig {
        mode: DynamicsMode::Bipolar,
        ..*cfg
    };
    let trajectory = apply_pulse(net, &PulseSpec::steady(input, output, amplitude), &cfg)?;
    let result = require_path(net, input, output)?;
    Ok(PathRun {
        result,
        trajectory,
        amplitude,
    })
}

/// [`solve_shortest_path`] with the amplitude picked by `rule`. With a
/// ladder, the last attempt's error is returned when every attempt fails.
pub fn solve_shortest_path_with(
    net: &mut Network,
    input: NodeId,
    output: NodeId,
    rule: &AmplitudeRule,
    cfg: &SimConfig,
) -> Result<PathRun> {
    rule.validate()?;
    match *rule {
        AmplitudeRule::Fixed(v) => solve_shortest_path(net, input, output, v, cfg),
        AmplitudeRule::Ladder { factor, max_attempts } => {
            if !net.connected(input, output)? {
                return Err(Error::Disconnected(input, output));
            }
            let mut v = threshold_amplitude(net, input, output)?;
            let mut attempt = 1;
            loop {
                v *= factor;
                match solve_shortest_path(net, input, output, v, cfg) {
                    Err(Error::NoOnPath { .. }) if attempt < max_attempts => attempt += 1,
                    r => return r,
                }
            }
        }
    }
}

/// Applies one pulse to a damaged, previously solved network without
/// re-initializing it.
pub fn heal(net: &mut Network, input: NodeId, output: NodeId, amplitude: f64, cfg: &SimConfig) -> Result<PathRun> {
    if !net.connected(input, output)? {
        return Err(Error::Disconnected(input, output));
    }
    let cfg = SimConfig {
        mode: DynamicsMode::Bipolar,
        ..*cfg
    };
    let trajectory = apply_pulse(net, &PulseSpec::steady(input, output, amplitude), &cfg)?;
    let result = require_path(net, input, output)?;
    Ok(PathRun {
        result,
        trajectory,
        amplitude,
    })
}

/// What a post-processing pass reruns on the reduced network.
#[derive(Debug, Clone, PartialEq)]
pub enum Rerun {
    /// The shortest-path algorithm between two terminals.
    Pair { input: NodeId, output: NodeId },
    /// The TSP calculation stage with this schedule configuration.
    Cities { cities: Vec<NodeId>, schedule: TspSchedule },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostProcessOutcome {
    /// Final ON set, in the parent network's edge ids.
    pub on_edges: Vec<EdgeId>,
    /// ON-set size after each pass.
    pub pass_sizes: Vec<usize>,
    /// Reduced network of the last pass in its final state (local ids).
    pub final_network: Network,
    /// Terminals or cities of the last pass, in local ids.
    pub final_terminals: Vec<NodeId>,
}

/// Repeatedly rebuilds the network from the ON edges and reruns the same
/// computation on it, up to `passes` times (stopping early at a fixed
/// point). Returned ids refer to `net`.
pub fn post_process(
    net: &Network,
    on_edges: &[EdgeId],
    rerun: &Rerun,
    amplitude: &AmplitudeRule,
    cfg: &SimConfig,
    passes: usize,
) -> Result<PostProcessOutcome> {
    if on_edges.is_empty() {
        return Err(Error::EmptyEdgeSet);
    }
    let mut current: Vec<EdgeId> = on_edges.to_vec();
    current.sort_unstable();
    let mut pass_sizes = Vec::new();
    let mut last = None;
    for _ in 0..passes {
        let reduced = net.reduced(&current)?;
        let mut sub = reduced.network.clone();
        let (local_on, terminals) = match rerun {
            Rerun::Pair { input, output } => {
                let (Some(a), Some(b)) = (reduced.local_node(*input), reduced.local_node(*output)) else {
                    return Err(Error::NoOnPath {
                        input: *input,
                        output: *output,
                        on_edges: current,
                    });
                };
                if !sub.connected(a, b)? {
                    return Err(Error::NoOnPath {
                        input: *input,
                        output: *output,
                        on_edges: current,
                    });
                }
                solve_shortest_path_with(&mut sub, a, b, amplitude, cfg)?;
                (classify_on(&sub), vec![a, b])
            }
            Rerun::Cities { cities, schedule } => {
                let local: Vec<NodeId> = cities
                    .iter()
                    .map(|c| reduced.local_node(*c).ok_or(Error::Disconnected(*c, cities[0])))
                    .collect::<Result<_>>()?;
                let v = cities_amplitude(&sub, &local, amplitude)?;
                tsp_calculation(&mut sub, &local, schedule, v, cfg)?;
                (classify_on(&sub), local)
            }
        };
        if local_on.is_empty() {
            return Err(Error::EmptyEdgeSet);
        }
        let mut next: Vec<EdgeId> = local_on.iter().map(|&id| reduced.original_edge(id)).collect();
        next.sort_unstable();
        pass_sizes.push(next.len());
        let fixed_point = next == current;
        current = next;
        last = Some((sub, terminals));
        if fixed_point {
            break;
        }
    }
    let (final_network, final_terminals) = last.ok_or_else(|| Error::InvalidConfig("post-processing needs at least one pass".into()))?;
    Ok(PostProcessOutcome {
        on_edges: current,
        pass_sizes,
        final_network,
        final_terminals,
    })
}

/// Random-pulse schedule used by the TSP procedure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TspSchedule {
    pub n_pulses: usize,
    pub seed: u64,
    /// Pulse width in seconds; `None` derives it from the network (see
    /// [`default_pulse_width`]).
    pub pulse_width: Option<f64>,
    /// Fraction of the reference time-to-steady used when `pulse_width` is
    /// `None`.
    pub width_fraction: f64,
}

impl Default for TspSchedule {
    fn default() -> Self {
        Self {
            n_pulses: 60,
            seed: 0,
            pulse_width: None,
            width_fraction: 0.1,
        }
    }
}

/// `fraction` of the time one unipolar pulse needs to reach steady state
/// between the two cities farthest apart, measured on an OFF copy of `net`.
pub fn default_pulse_width(
    net: &Network,
    cities: &[NodeId],
    amplitude: f64,
    cfg: &SimConfig,
    fraction: f64,
) -> Result<f64> {
    let far = farthest_pair(net, cities)?;
    let mut probe = net.clone();
    probe.reset_states();
    let cfg = SimConfig {
        mode: DynamicsMode::Unipolar,
        record_stride: 0,
        ..*cfg
    };
    let t = apply_pulse(&mut probe, &PulseSpec::steady(far.0, far.1, amplitude), &cfg)?;
    Ok((fraction * t.steps_taken as f64 * cfg.dt).max(cfg.dt))
}

/// The two cities farthest apart in the plane (first such pair in input
/// order).
pub fn farthest_pair(net: &Network, cities: &[NodeId]) -> Result<(NodeId, NodeId)> {
    let mut far = (cities[0], cities[0], -1.0);
    for (i, &a) in cities.iter().enumerate() {
        for &b in &cities[i + 1..] {
            let d = net.position(a)?.distance(&net.position(b)?);
            if d > far.2 {
                far = (a, b, d);
            }
        }
    }
    Ok((far.0, far.1))
}

/// Pulse amplitude for a city set: fixed, or the farthest pair's threshold
/// amplitude times the ladder factor.
pub fn cities_amplitude(net: &Network, cities: &[NodeId], rule: &AmplitudeRule) -> Result<f64> {
    rule.validate()?;
    match *rule {
        AmplitudeRule::Fixed(v) => Ok(v),
        AmplitudeRule::Ladder { factor, .. } => {
            let (a, b) = farthest_pair(net, cities)?;
            Ok(threshold_amplitude(net, a, b)? * factor)
        }
    }
}

/// Initialization and calculation stages of the TSP procedure: all devices
/// OFF, then the random schedule in unipolar mode.
fn tsp_calculation(
    net: &mut Network,
    cities: &[NodeId],
    schedule: &TspSchedule,
    amplitude: f64,
    cfg: &SimConfig,
) -> Result<(f64, f64)> {
    net.reset_states();
    let width = match schedule.pulse_width {
        Some(w) => w,
        None => default_pulse_width(net, cities, amplitude, cfg, schedule.width_fraction)?,
    };
    let pulses = random_pulse_schedule(
        cities,
        schedule.n_pulses,
        amplitude,
        PulseDuration::Fixed(width),
        schedule.seed,
    )?;
    let cfg = SimConfig {
        mode: DynamicsMode::Unipolar,
        ..*cfg
    };
    let summary = run_pulse_sequence(net, &pulses, &cfg)?;
    Ok((width, summary.max_relative_residual()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TourResult {
    pub cities: Vec<NodeId>,
    /// ON set right after the calculation stage.
    pub initial_on_edges: Vec<EdgeId>,
    /// ON set after post-processing.
    pub on_edges: Vec<EdgeId>,
    /// Cities in visiting order (closed: the first city follows the last).
    pub tour: Option<Vec<NodeId>>,
    /// Node sequence of the closed tour over the network.
    pub route: Option<Vec<NodeId>>,
    pub valid: bool,
    /// Summed edge length of the tour; `None` when invalid.
    pub tour_length: Option<f64>,
    pub post_process_passes: usize,
    pub pulse_width: f64,
    /// Main-stage amplitude (V).
    pub amplitude: f64,
    /// Largest relative KCL residual of the main stage.
    pub max_relative_residual: f64,
    /// Reduced network of the last post-processing pass (local ids).
    #[serde(skip)]
    pub post_processed: Option<Network>,
}

/// City order, closed node route and summed edge length of a tour.
pub type Tour = (Vec<NodeId>, Vec<NodeId>, f64);

/// Reads a closed tour from an ON set: the ON component holding the cities
/// must be a single simple cycle through all of them. Detached ON segments
/// that touch no city are ignored.
pub fn extract_tour(net: &Network, on_edges: &[EdgeId], cities: &[NodeId]) -> Result<Option<Tour>> {
    let sub = OnGraph::new(net, on_edges)?;
    let comps = sub.components();
    let Some(&label) = comps.get(&cities[0]) else {
        return Ok(None);
    };
    if cities.iter().any(|c| comps.get(c) != Some(&label)) {
        return Ok(None);
    }
    let members: Vec<NodeId> = comps.iter().filter(|(_, l)| **l == label).map(|(n, _)| *n).collect();
    if members.iter().any(|&n| sub.degree(n) != 2) {
        return Ok(None);
    }
    let start = cities[0];
    let mut route = vec![start];
    let mut length = 0.0;
    let mut prev_edge = None;
    let mut u = start;
    loop {
        let &(v, id) = sub.adj[&u]
            .iter()
            .find(|(_, id)| Some(*id) != prev_edge)
            .expect("degree two");
        length += net.edge(id)?.length;
        prev_edge = Some(id);
        if v == start {
            break;
        }
        route.push(v);
        u = v;
    }
    if route.len() != members.len() {
        return Ok(None);
    }
    let city_set: BTreeSet<NodeId> = cities.iter().copied().collect();
    let order = route.iter().copied().filter(|n| city_set.contains(n)).collect();
    Ok(Some((order, route, length)))
}

/// Full TSP procedure: calculation stage on the whole network, then up to
/// `passes` reruns on the reduced network, then tour extraction.
pub fn solve_tsp(
    net: &mut Network,
    cities: &[NodeId],
    schedule: &TspSchedule,
    amplitude: &AmplitudeRule,
    cfg: &SimConfig,
    passes: usize,
) -> Result<TourResult> {
    if cities.len() < 3 {
        return Err(Error::TooFewCities {
            needed: 3,
            got: cities.len(),
        });
    }
    let distinct: BTreeSet<_> = cities.iter().collect();
    if distinct.len() != cities.len() {
        return Err(Error::InvalidConfig("cities must be distinct".into()));
    }
    for &c in &cities[1..] {
        if !net.connected(cities[0], c)? {
            return Err(Error::Disconnected(cities[0], c));
        }
    }
    let v = cities_amplitude(net, cities, amplitude)?;
    let (pulse_width, max_relative_residual) = tsp_calculation(net, cities, schedule, v, cfg)?;
    let initial_on_edges = classify_on(net);

    let mut on_edges = initial_on_edges.clone();
    let mut post_process_passes = 0;
    let mut post_processed = None;
    if passes > 0 && !on_edges.is_empty() {
        let rerun = Rerun::Cities {
            cities: cities.to_vec(),
            schedule: TspSchedule {
                pulse_width: Some(pulse_width),
                ..*schedule
            },
        };
        match post_process(net, &on_edges, &rerun, amplitude, cfg, passes) {
            Ok(out) => {
                post_process_passes = out.pass_sizes.len();
                on_edges = out.on_edges;
                post_processed = Some(out.final_network);
            }
            // Cities dropped out of the ON set: no tour can be read.
            Err(Error::Disconnected(..)) | Err(Error::EmptyEdgeSet) => {}
            Err(e) => return Err(e),
        }
    }
    let tour = extract_tour(net, &on_edges, cities)?;
    let valid = tour.is_some();
    let (tour, route, tour_length) = match tour {
        Some((t, r, l)) => (Some(t), Some(r), Some(l)),
        None => (None, None, None),
    };
    Ok(TourResult {
        cities: cities.to_vec(),
        initial_on_edges,
        on_edges,
        tour,
        route,
        valid,
        tour_length,
        post_process_passes,
        pulse_width,
        amplitude: v,
        max_relative_residual,
        post_processed,
    })
}

/// `count` distinct cities: uniform points inside the node bounding box
/// shrunk by `margin`, at least `min_separation` apart, each snapped to the
/// nearest node of the largest component.
pub fn random_cities(net: &Network, count: usize, min_separation: f64, margin: f64, seed: u64) -> Result<Vec<NodeId>> {
    const MAX_REJECTIONS: usize = 10_000;
    if net.node_count() == 0 {
        return Err(Error::InvalidConfig("network is empty".into()));
    }
    let xs = net.nodes().iter().map(|n| n.position.x);
    let ys = net.nodes().iter().map(|n| n.position.y);
    let (x0, x1) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    let (y0, y1) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
    if !(x1 - x0 > 2.0 * margin && y1 - y0 > 2.0 * margin) {
        return Err(Error::InvalidConfig(format!("city margin {margin} leaves no room")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<Point> = Vec::new();
    let mut cities = Vec::new();
    let mut rejections = 0;
    while cities.len() < count {
        let p = Point::new(
            rng.gen_range(x0 + margin..x1 - margin),
            rng.gen_range(y0 + margin..y1 - margin),
        );
        let node = net.nearest_connected_node(p).expect("non-empty");
        if points.iter().all(|q| q.distance(&p) >= min_separation) && !cities.contains(&node) {
            points.push(p);
            cities.push(node);
            rejections = 0;
        } else {
            rejections += 1;
            if rejections >= MAX_REJECTIONS {
                return Err(Error::SamplingFailed {
                    placed: cities.len(),
                    target: count,
                    rejections,
                });
            }
        }
    }
    Ok(cities)
}

/// Optimal tour length over graph shortest-path distances between cities.
pub fn optimal_tour_length(net: &Network, cities: &[NodeId]) -> Result<f64> {
    let d = oracle::city_distances(net, cities, Metric::GeometricLength)?;
    Ok(oracle::brute_force_tsp(&d)?.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::DeviceParams;

    fn p() -> DeviceParams {
        DeviceParams::default()
    }

    fn set_on(net: &mut Network, ids: &[EdgeId]) {
        for &id in ids {
            net.edge_mut(id).unwrap().unit.device_b.x = 10.0;
        }
    }

    #[test]
    fn classify_examples() {
        let mut net = Network::grid(2, 3, p()).unwrap();
        net.edges_mut()[1].unit.device_b.x = 10.0; // 9.524 ohm
        net.edges_mut()[2].unit.device_a.x = 42.857142857142854; // 30 ohm with b at 200... set below
        net.edges_mut()[2].unit.device_b.x = 200.0;
        let r30 = 1.0 / (1.0 / 30.0 - 1.0 / 200.0);
        net.edges_mut()[2].unit.device_a.x = r30;
        let r32 = 1.0 / (1.0 / 32.0 - 1.0 / 200.0);
        net.edges_mut()[3].unit.device_a.x = r32;
        assert!((net.edges()[2].unit.resistance() - 30.0).abs() < 1e-9);
        assert!((net.edges()[3].unit.resistance() - 32.0).abs() < 1e-9);
        assert_eq!(classify_on(&net), vec![EdgeId(1), EdgeId(2)]);
    }

    #[test]
    fn extraction_single_and_double() {
        let g = Network::grid(3, 3, p()).unwrap();
        let s = g.grid_shape().unwrap();
        // bottom row 0-1-2
        let one = extract_paths(&g, &[EdgeId(0), EdgeId(1)], s.node(0, 0), s.node(0, 2), PATH_CAP).unwrap();
        assert_eq!(one.paths, vec![vec![NodeId(0), NodeId(1), NodeId(2)]]);
        assert!(one.dead_ends.is_empty());
        // two L paths from (0,0) to (1,1)
        let l1 = [EdgeId(0), g.edge_between(s.node(0, 1), s.node(1, 1)).unwrap()];
        let l2 = [
            g.edge_between(s.node(0, 0), s.node(1, 0)).unwrap(),
            g.edge_between(s.node(1, 0), s.node(1, 1)).unwrap(),
        ];
        let mut both = l1.to_vec();
        both.extend(l2);
        let mut net = g.clone();
        set_on(&mut net, &both);
        let r = PathResult::read(&net, s.node(0, 0), s.node(1, 1)).unwrap();
        assert_eq!(r.paths.len(), 2);
        assert!(r.degenerate);
        assert_eq!(r.hop_counts, vec![2, 2]);
    }

    #[test]
    fn extraction_reports_defects() {
        let g = Network::grid(3, 4, p()).unwrap();
        let s = g.grid_shape().unwrap();
        let path = [EdgeId(0), EdgeId(1), EdgeId(2)];
        let spur = g.edge_between(s.node(0, 1), s.node(1, 1)).unwrap();
        let stray = g.edge_between(s.node(2, 2), s.node(2, 3)).unwrap();
        let mut on = path.to_vec();
        on.extend([spur, stray]);
        let ex = extract_paths(&g, &on, s.node(0, 0), s.node(0, 3), PATH_CAP).unwrap();
        assert_eq!(ex.paths.len(), 1);
        assert_eq!(ex.dead_ends, vec![s.node(1, 1), s.node(2, 2), s.node(2, 3)]);
        assert_eq!(ex.stray_segments, 1);
        let none = extract_paths(&g, &[], s.node(0, 0), s.node(0, 3), PATH_CAP).unwrap();
        assert!(none.paths.is_empty());
    }

    #[test]
    fn extraction_cap() {
        let g = Network::grid(5, 5, p()).unwrap();
        let all: Vec<EdgeId> = g.edges().iter().map(|e| e.id).collect();
        let ex = extract_paths(&g, &all, NodeId(0), NodeId(24), PATH_CAP).unwrap();
        assert!(ex.cap_hit);
        assert_eq!(ex.paths.len(), PATH_CAP);
    }

    #[test]
    fn shortest_path_on_line_and_no_path() {
        let pos = (0..4).map(|i| Point::new(i as f64, 0.0)).collect();
        let links = [(NodeId(0), NodeId(1)), (NodeId(1), NodeId(2)), (NodeId(2), NodeId(3))];
        let mut net = Network::from_links(pos, &links, p()).unwrap();
        let cfg = SimConfig {
            dt: 1e-5,
            ..SimConfig::default()
        };
        let run = solve_shortest_path(&mut net, NodeId(0), NodeId(3), 6.0, &cfg).unwrap();
        assert_eq!(run.result.hop_counts, vec![3]);
        assert!(!run.result.degenerate);

        let err = solve_shortest_path(&mut net, NodeId(0), NodeId(3), 1.0, &cfg).unwrap_err();
        assert!(matches!(err, Error::NoOnPath { .. }));
    }

    #[test]
    fn post_process_fixed_point_and_dead_end() {
        // 5-node path along x plus one spur at the middle node.
        let pos = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(3.0, 0.0),
            Point::new(4.0, 0.0),
            Point::new(2.0, 1.0),
        ];
        let links = [
            (NodeId(0), NodeId(1)),
            (NodeId(1), NodeId(2)),
            (NodeId(2), NodeId(3)),
            (NodeId(3), NodeId(4)),
            (NodeId(2), NodeId(5)),
        ];
        let net = Network::from_links(pos, &links, p()).unwrap();
        let cfg = SimConfig {
            dt: 1e-5,
            ..SimConfig::default()
        };
        let rerun = Rerun::Pair {
            input: NodeId(0),
            output: NodeId(4),
        };
        let path: Vec<EdgeId> = (0..4).map(EdgeId).collect();
        let out = post_process(&net, &path, &rerun, &AmplitudeRule::Fixed(6.0), &cfg, 2).unwrap();
        assert_eq!(out.on_edges, path);
        assert_eq!(out.pass_sizes, vec![4]);

        let with_spur: Vec<EdgeId> = (0..5).map(EdgeId).collect();
        let out = post_process(&net, &with_spur, &rerun, &AmplitudeRule::Fixed(6.0), &cfg, 1).unwrap();
        assert_eq!(out.on_edges, path);
        assert!(matches!(post_process(&net, &[], &rerun, &AmplitudeRule::Fixed(6.0), &cfg, 1), Err(Error::EmptyEdgeSet)));
    }

    #[test]
    fn post_process_prefers_shorter_branch() {
        // Two parallel branches between A and B: a 2-hop branch and a
        // 4-hop branch.
        let pos = vec![
            Point::new(0.0, 0.0), // 0 input
            Point::new(1.0, 0.0), // 1 A
            Point::new(2.0, 0.5), // 2 short middle
            Point::new(3.0, 0.0), // 3 B
            Point::new(4.0, 0.0), // 4 output
            Point::new(1.0, -1.0),
            Point::new(2.0, -1.5),
            Point::new(3.0, -1.0),
        ];
        let links = [
            (NodeId(0), NodeId(1)),
            (NodeId(1), NodeId(2)),
            (NodeId(2), NodeId(3)),
            (NodeId(3), NodeId(4)),
            (NodeId(1), NodeId(5)),
            (NodeId(5), NodeId(6)),
            (NodeId(6), NodeId(7)),
            (NodeId(7), NodeId(3)),
        ];
        let net = Network::from_links(pos, &links, p()).unwrap();
        let all: Vec<EdgeId> = (0..8).map(EdgeId).collect();
        let cfg = SimConfig {
            dt: 1e-5,
            ..SimConfig::default()
        };
        let rerun = Rerun::Pair {
            input: NodeId(0),
            output: NodeId(4),
        };
        let out = post_process(&net, &all, &rerun, &AmplitudeRule::Fixed(6.0), &cfg, 2).unwrap();
        assert_eq!(out.on_edges, vec![EdgeId(0), EdgeId(1), EdgeId(2), EdgeId(3)]);
    }

    #[test]
    fn tour_extraction() {
        let g = Network::grid(3, 3, p()).unwrap();
        let s = g.grid_shape().unwrap();
        let ring: Vec<EdgeId> = [
            (s.node(0, 0), s.node(0, 1)),
            (s.node(0, 1), s.node(0, 2)),
            (s.node(0, 2), s.node(1, 2)),
            (s.node(1, 2), s.node(2, 2)),
            (s.node(2, 2), s.node(2, 1)),
            (s.node(2, 1), s.node(2, 0)),
            (s.node(2, 0), s.node(1, 0)),
            (s.node(1, 0), s.node(0, 0)),
        ]
        .iter()
        .map(|&(a, b)| g.edge_between(a, b).unwrap())
        .collect();
        let cities = [s.node(0, 0), s.node(2, 2), s.node(0, 2)];
        let (order, route, len) = extract_tour(&g, &ring, &cities).unwrap().unwrap();
        assert_eq!(route.len(), 8);
        assert_eq!(len, 8.0);
        assert_eq!(order.len(), 3);
        // a spur makes a junction of degree three
        let mut spur = ring.clone();
        spur.push(g.edge_between(s.node(0, 1), s.node(1, 1)).unwrap());
        assert!(extract_tour(&g, &spur, &cities).unwrap().is_none());
        // an open chain is not a tour
        assert!(extract_tour(&g, &ring[..7], &cities).unwrap().is_none());
    }

    #[test]
    fn tsp_rejects_two_cities() {
        let mut g = Network::grid(3, 3, p()).unwrap();
        let r = solve_tsp(
            &mut g,
            &[NodeId(0), NodeId(8)],
            &TspSchedule::default(),
            &AmplitudeRule::Fixed(6.0),
            &SimConfig::default(),
            2,
        );
        assert_eq!(r, Err(Error::TooFewCities { needed: 3, got: 2 }));
    }
}
