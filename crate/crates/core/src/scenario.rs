//! Scenario files and artifact export.
//!
//! A scenario is one TOML document naming a network, device parameters, an
//! algorithm with its terminals or cities, and simulation settings. Running
//! it writes a state snapshot, traces, a summary, an oracle report and SVG
//! renderings into one directory. Every random choice is seeded from the
//! file, so identical files give byte-identical artifacts.
//!
//! ```toml
//! name = "grid"
//!
//! [network]
//! kind = "grid"
//! rows = 11
//! cols = 11
//!
//! [algorithm]
//! kind = "shortest_path"
//! input = { row = 5, col = 0 }
//! output = { row = 5, col = 10 }
//! amplitude = 6.0
//! section_column = 6
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::algorithms::{
    heal, optimal_tour_length, post_process, random_cities, solve_shortest_path, solve_shortest_path_with, solve_tsp,
    AmplitudeRule, PathResult, PathRun, Rerun, TspSchedule,
};
use crate::analysis::{entropy_trace, grid_cross_section, states, switching_rate_trace, EntropyVariant};
use crate::circuit::{solve_dc, SourceSpec};
use crate::device::DeviceParams;
use crate::dynamics::{SimConfig, Trajectory};
use crate::error::{Error, Result};
use crate::oracle::{all_shortest_paths, dijkstra, Metric};
use crate::render::{render_currents, render_network};
use crate::topology::{EdgeId, Network, NodeId, Point, RandomSpec};

pub const SNAPSHOT_FILE: &str = "snapshot.json";
pub const SUMMARY_JSON: &str = "summary.json";
pub const SUMMARY_TEXT: &str = "summary.txt";
pub const ORACLE_FILE: &str = "oracle.json";
pub const TRACE_FILE: &str = "trace.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub network: NetworkSpec,
    #[serde(default)]
    pub device: DeviceSpec,
    pub algorithm: AlgorithmSpec,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NetworkSpec {
    Grid {
        rows: usize,
        cols: usize,
    },
    Random {
        n_scale: usize,
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        nodes: Option<usize>,
        #[serde(default)]
        min_dist: Option<f64>,
        #[serde(default)]
        connect_radius: Option<f64>,
    },
}

/// Device parameters; omitted fields take the defaults of
/// [`DeviceParams::default`]. `memory_ratio` sets `r_on = r_off / ratio`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceSpec {
    pub memory_ratio: Option<f64>,
    pub r_on: Option<f64>,
    pub r_off: Option<f64>,
    pub gamma: Option<f64>,
    pub i_threshold: Option<f64>,
}

impl DeviceSpec {
    pub fn params(&self) -> Result<DeviceParams> {
        let d = DeviceParams::default();
        let r_off = self.r_off.unwrap_or(d.r_off);
        let r_on = match (self.memory_ratio, self.r_on) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidConfig(
                    "device: set either memory_ratio or r_on, not both".into(),
                ))
            }
            (Some(m), None) => r_off / m,
            (None, Some(r)) => r,
            (None, None) => d.r_on,
        };
        DeviceParams::new(
            r_on,
            r_off,
            self.gamma.unwrap_or(d.gamma),
            self.i_threshold.unwrap_or(d.i_threshold),
        )
    }
}

/// A node by id, by grid cell, or as the node of the largest component
/// nearest to a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeRef {
    Id(usize),
    Cell { row: usize, col: usize },
    Near { x: f64, y: f64 },
}

impl NodeRef {
    pub fn resolve(&self, net: &Network) -> Result<NodeId> {
        match *self {
            Self::Id(k) => {
                net.check_node(NodeId(k))?;
                Ok(NodeId(k))
            }
            Self::Cell { row, col } => {
                let g = net.grid_shape().ok_or(Error::NotAGrid)?;
                if row >= g.rows || col >= g.cols {
                    return Err(Error::InvalidConfig(format!(
                        "cell ({row}, {col}) outside the {}x{} grid",
                        g.rows, g.cols
                    )));
                }
                Ok(g.node(row, col))
            }
            Self::Near { x, y } => net
                .nearest_connected_node(Point::new(x, y))
                .ok_or_else(|| Error::InvalidConfig("network is empty".into())),
        }
    }
}

/// An edge by id or by its two endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EdgeRef {
    Id(usize),
    Between { from: NodeRef, to: NodeRef },
}

impl EdgeRef {
    pub fn resolve(&self, net: &Network) -> Result<EdgeId> {
        match *self {
            Self::Id(k) => net.edge(EdgeId(k)).map(|e| e.id),
            Self::Between { from, to } => {
                let (a, b) = (from.resolve(net)?, to.resolve(net)?);
                net.edge_between(a, b)
                    .ok_or_else(|| Error::InvalidConfig(format!("no edge between {a} and {b}")))
            }
        }
    }
}

/// `amplitude = 6.0` for a fixed amplitude; a table (possibly empty) for
/// the threshold ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AmplitudeSpec {
    Volts(f64),
    Ladder {
        #[serde(default = "default_factor")]
        factor: f64,
        #[serde(default = "default_attempts")]
        max_attempts: usize,
    },
}

fn default_factor() -> f64 {
    1.05
}

fn default_attempts() -> usize {
    40
}

impl AmplitudeSpec {
    pub fn rule(&self) -> AmplitudeRule {
        match *self {
            Self::Volts(v) => AmplitudeRule::Fixed(v),
            Self::Ladder { factor, max_attempts } => AmplitudeRule::Ladder { factor, max_attempts },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CitySpec {
    Nodes(Vec<NodeRef>),
    Random {
        count: usize,
        min_separation: f64,
        margin: f64,
        #[serde(default)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropyRun {
    pub memory_ratio: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlgorithmSpec {
    ShortestPath {
        input: NodeRef,
        output: NodeRef,
        amplitude: AmplitudeSpec,
        #[serde(default)]
        post_process_passes: usize,
        /// Grid column of the entropy cross-section; whole-network entropy
        /// when absent.
        #[serde(default)]
        section_column: Option<usize>,
    },
    /// Solve, remove `damage`, then apply one more pulse without resetting.
    Heal {
        input: NodeRef,
        output: NodeRef,
        amplitude: f64,
        damage: Vec<EdgeRef>,
        #[serde(default)]
        heal_amplitude: Option<f64>,
    },
    Tsp {
        cities: CitySpec,
        amplitude: AmplitudeSpec,
        #[serde(default)]
        schedule: TspSchedule,
        #[serde(default = "default_passes")]
        passes: usize,
    },
    /// One shortest-path run per memory ratio on a grid, with the
    /// cross-section entropy of each.
    EntropyStudy {
        input: NodeRef,
        output: NodeRef,
        column: usize,
        runs: Vec<EntropyRun>,
    },
}

fn default_passes() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    /// Defaults to `out/<name>`.
    pub dir: Option<PathBuf>,
    pub render: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: None, render: true }
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::InvalidConfig(m) => Error::InvalidConfig(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        self.device.params()?;
        if let AlgorithmSpec::Tsp { schedule, .. } = &self.algorithm {
            if !(schedule.width_fraction > 0.0) {
                return Err(Error::InvalidConfig("schedule.width_fraction must be positive".into()));
            }
        }
        Ok(())
    }

    /// Replaces every seed in the file (network, cities, pulse schedule).
    pub fn with_seed(mut self, seed: u64) -> Self {
        if let NetworkSpec::Random { seed: s, .. } = &mut self.network {
            *s = seed;
        }
        if let AlgorithmSpec::Tsp { cities, schedule, .. } = &mut self.algorithm {
            schedule.seed = seed;
            if let CitySpec::Random { seed: s, .. } = cities {
                *s = seed;
            }
        }
        self
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output
            .dir
            .clone()
            .unwrap_or_else(|| Path::new("out").join(&self.name))
    }

    pub fn build_network(&self) -> Result<Network> {
        self.build_network_with(self.device.params()?)
    }

    fn build_network_with(&self, params: DeviceParams) -> Result<Network> {
        match &self.network {
            NetworkSpec::Grid { rows, cols } => Network::grid(*rows, *cols, params),
            NetworkSpec::Random {
                n_scale,
                seed,
                nodes,
                min_dist,
                connect_radius,
            } => {
                let mut spec = RandomSpec::new(*n_scale);
                spec.nodes = *nodes;
                if let Some(d) = min_dist {
                    spec.min_dist = *d;
                }
                if let Some(r) = connect_radius {
                    spec.connect_radius = *r;
                }
                Network::random_with(&spec, *seed, params)
            }
        }
    }
}

/// Exit status for an error: 2 configuration, 3 non-convergence,
/// 4 disconnected terminals, 1 anything else.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidConfig(_)
        | Error::InvalidParams(_)
        | Error::InvalidDimensions { .. }
        | Error::UnknownNode(_)
        | Error::UnknownEdge(_)
        | Error::DuplicateEdge(_)
        | Error::NotAGrid
        | Error::InvalidColumn { .. }
        | Error::TooFewCities { .. }
        | Error::SamplingFailed { .. } => 2,
        Error::NotConverged { .. } => 3,
        Error::Disconnected(..) => 4,
        _ => 1,
    }
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Pulse applied to a snapshot's network, for current maps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnapshotSource {
    pub input: NodeId,
    pub output: NodeId,
    pub amplitude: f64,
}

/// Network state with positions, edges and both device memristances per
/// edge, plus the nodes to highlight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub network: Network,
    pub highlight: Vec<NodeId>,
    #[serde(default)]
    pub source: Option<SnapshotSource>,
}

impl Snapshot {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map(|s| s + "\n")
            .map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut s: Self = serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        s.network.reindex();
        for &h in &s.highlight {
            s.network.check_node(h)?;
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        Self::from_json(&text)
    }

    /// SVG of the state, or of the DC current map under `source`.
    pub fn render(&self, currents: bool) -> Result<String> {
        if !currents {
            return Ok(render_network(&self.network, &self.highlight));
        }
        let src = self
            .source
            .ok_or_else(|| Error::InvalidConfig("snapshot has no source for a current map".into()))?;
        let res = solve_dc(&self.network, &SourceSpec::pair(src.input, src.output, src.amplitude)?)?;
        render_currents(&self.network, &res.edge_currents, &self.highlight)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scenario: String,
    pub algorithm: String,
    pub headline: String,
    pub values: Map<String, Value>,
    pub files: Vec<String>,
}

impl Summary {
    pub fn to_text(&self) -> String {
        let mut s = format!("{} ({})\n{}\n", self.scenario, self.algorithm, self.headline);
        for (k, v) in &self.values {
            let _ = writeln!(s, "  {k}: {v}");
        }
        for f in &self.files {
            let _ = writeln!(s, "  wrote {f}");
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes") + "\n"
    }
}

struct Artifacts {
    dir: PathBuf,
    files: Vec<String>,
}

impl Artifacts {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| io_error(&path, e))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn json(&mut self, name: &str, value: &Value) -> Result<()> {
        let text = serde_json::to_string_pretty(value).expect("json value serializes") + "\n";
        self.write(name, &text)
    }
}

/// CSV with one row per recorded state: time, source current, entropy,
/// then the resistance of each tracked edge.
pub fn trace_csv(traj: &Trajectory, variant: &EntropyVariant, tracked: &[EdgeId]) -> Result<String> {
    let entropy = entropy_trace(traj, variant)?;
    let positions = tracked
        .iter()
        .map(|&id| traj.edge_position(id))
        .collect::<Result<Vec<_>>>()?;
    let mut s = String::from("time,source_current,entropy");
    for id in tracked {
        let _ = write!(s, ",r_e{}", id.0);
    }
    s.push('\n');
    for (st, h) in states(traj).into_iter().zip(&entropy.values) {
        let _ = write!(s, "{},{},{}", st.time, st.source_current, h);
        for &k in &positions {
            let _ = write!(s, ",{}", st.resistances[k]);
        }
        s.push('\n');
    }
    Ok(s)
}

fn switching_csv(traj: &Trajectory, tracked: &[EdgeId]) -> Result<String> {
    let rates = switching_rate_trace(traj, tracked)?;
    let mut s = String::from("time");
    for id in tracked {
        let _ = write!(s, ",drdt_e{}", id.0);
    }
    s.push('\n');
    for (t, row) in rates.times.iter().zip(&rates.rates) {
        let _ = write!(s, "{t}");
        for r in row {
            let _ = write!(s, ",{r}");
        }
        s.push('\n');
    }
    Ok(s)
}

fn ids(edges: &[EdgeId]) -> Value {
    json!(edges.iter().map(|e| e.0).collect::<Vec<_>>())
}

fn nodes(ns: &[NodeId]) -> Value {
    json!(ns.iter().map(|n| n.0).collect::<Vec<_>>())
}

/// True when every path is hop-optimal and the ON set holds nothing but
/// those paths.
fn clean_and_optimal(r: &PathResult, hops: usize) -> bool {
    let mut used: Vec<EdgeId> = r.path_edges.iter().flatten().copied().collect();
    used.sort_unstable();
    used.dedup();
    r.has_path() && !r.cap_hit && r.hop_counts.iter().all(|&h| h == hops) && used == r.on_edges
}

fn write_renders(
    art: &mut Artifacts,
    cfg: &ScenarioConfig,
    net: &Network,
    highlight: &[NodeId],
    traj: Option<&Trajectory>,
) -> Result<()> {
    if !cfg.output.render {
        return Ok(());
    }
    art.write("network.svg", &render_network(net, highlight))?;
    if let Some(t) = traj {
        art.write(
            "currents_initial.svg",
            &render_currents(net, &t.samples[0].currents, highlight)?,
        )?;
        art.write("currents.svg", &render_currents(net, &t.last.currents, highlight)?)?;
    }
    Ok(())
}

fn entropy_variant(net: &Network, column: Option<usize>, i: NodeId, o: NodeId) -> Result<EntropyVariant> {
    Ok(match column {
        Some(c) => EntropyVariant::CrossSection(grid_cross_section(net, c, i, o)?),
        None => EntropyVariant::FullNetwork,
    })
}

fn snapshot(art: &mut Artifacts, net: &Network, highlight: Vec<NodeId>, source: Option<SnapshotSource>) -> Result<()> {
    let snap = Snapshot {
        network: net.clone(),
        highlight,
        source,
    };
    art.write(SNAPSHOT_FILE, &snap.to_json()?)
}

fn path_values(v: &mut Map<String, Value>, prefix: &str, r: &PathResult) {
    v.insert(format!("{prefix}on_units"), json!(r.on_edges.len()));
    v.insert(format!("{prefix}paths"), json!(r.paths.len()));
    v.insert(format!("{prefix}hop_counts"), json!(r.hop_counts));
    v.insert(format!("{prefix}path_lengths"), json!(r.path_lengths));
    v.insert(format!("{prefix}degenerate"), json!(r.degenerate));
    v.insert(format!("{prefix}dead_ends"), json!(r.dead_ends.len()));
    v.insert(format!("{prefix}stray_segments"), json!(r.stray_segments));
}

fn run_values(v: &mut Map<String, Value>, run: &PathRun) {
    v.insert("amplitude".into(), json!(run.amplitude));
    v.insert("steps".into(), json!(run.trajectory.steps_taken));
    v.insert("reached_steady".into(), json!(run.trajectory.reached_steady));
    v.insert(
        "max_relative_kcl_residual".into(),
        json!(run.trajectory.max_relative_residual),
    );
}

fn hops_text(r: &PathResult) -> String {
    let mut h = r.hop_counts.clone();
    h.sort_unstable();
    h.dedup();
    h.iter().map(usize::to_string).collect::<Vec<_>>().join("/")
}

/// Runs a scenario and writes its artifacts into `out`.
pub fn run_scenario(cfg: &ScenarioConfig, out: &Path) -> Result<Summary> {
    cfg.validate()?;
    let mut art = Artifacts::new(out)?;
    let mut values = Map::new();
    let mut oracle = Map::new();
    let (algorithm, headline) = match &cfg.algorithm {
        AlgorithmSpec::ShortestPath {
            input,
            output,
            amplitude,
            post_process_passes,
            section_column,
        } => {
            let mut net = cfg.build_network()?;
            let (i, o) = (input.resolve(&net)?, output.resolve(&net)?);
            if !net.connected(i, o)? {
                return Err(Error::Disconnected(i, o));
            }
            let rule = amplitude.rule();
            let run = solve_shortest_path_with(&mut net, i, o, &rule, &cfg.sim)?;
            let hop = dijkstra(&net, i, o, Metric::HopCount)?;
            let geo = dijkstra(&net, i, o, Metric::GeometricLength)?;
            let (optimal, cap_hit) = all_shortest_paths(&net, i, o, Metric::HopCount, 64)?;
            oracle.insert("input".into(), json!(i.0));
            oracle.insert("output".into(), json!(o.0));
            oracle.insert("dijkstra_hops".into(), json!(hop.edges.len()));
            oracle.insert("dijkstra_geometric_length".into(), json!(geo.weight));
            oracle.insert("dijkstra_hop_path".into(), nodes(&hop.nodes));
            oracle.insert("hop_optimal_paths".into(), json!(optimal.len()));
            oracle.insert("hop_optimal_cap_hit".into(), json!(cap_hit));

            run_values(&mut values, &run);
            path_values(&mut values, "", &run.result);
            let mut final_result = run.result.clone();
            if *post_process_passes > 0 {
                let pp = post_process(
                    &net,
                    &run.result.on_edges,
                    &Rerun::Pair { input: i, output: o },
                    &rule,
                    &cfg.sim,
                    *post_process_passes,
                )?;
                final_result = PathResult::from_on_edges(&net, pp.on_edges.clone(), i, o)?;
                values.insert("post_process_pass_sizes".into(), json!(pp.pass_sizes));
                path_values(&mut values, "post_processed_", &final_result);
                values.insert("post_processed_edges".into(), ids(&pp.on_edges));
                if cfg.output.render {
                    art.write(
                        "post_processed.svg",
                        &render_network(&pp.final_network, &pp.final_terminals),
                    )?;
                }
            }
            let matches = clean_and_optimal(&final_result, hop.edges.len());
            let geo_ratio = final_result.geometric_length().map(|l| l / geo.weight);
            values.insert("on_edges".into(), ids(&run.result.on_edges));
            values.insert("matches_oracle".into(), json!(matches));
            values.insert("geometric_ratio".into(), json!(geo_ratio));
            oracle.insert("matches_oracle".into(), json!(matches));
            oracle.insert("geometric_ratio".into(), json!(geo_ratio));

            let variant = entropy_variant(&net, *section_column, i, o)?;
            art.write(TRACE_FILE, &trace_csv(&run.trajectory, &variant, &run.result.on_edges)?)?;
            art.write("switching.csv", &switching_csv(&run.trajectory, &run.result.on_edges)?)?;
            snapshot(
                &mut art,
                &net,
                vec![i, o],
                Some(SnapshotSource {
                    input: i,
                    output: o,
                    amplitude: run.amplitude,
                }),
            )?;
            write_renders(&mut art, cfg, &net, &[i, o], Some(&run.trajectory))?;
            (
                "shortest_path",
                format!("path hops = {}, matches oracle: {matches}", hops_text(&final_result)),
            )
        }

        AlgorithmSpec::Heal {
            input,
            output,
            amplitude,
            damage,
            heal_amplitude,
        } => {
            let mut net = cfg.build_network()?;
            let (i, o) = (input.resolve(&net)?, output.resolve(&net)?);
            let first = solve_shortest_path(&mut net, i, o, *amplitude, &cfg.sim)?;
            path_values(&mut values, "initial_", &first.result);
            let removed = damage.iter().map(|d| d.resolve(&net)).collect::<Result<Vec<_>>>()?;
            let mut damaged = net.remove_edges(&removed)?;
            if cfg.output.render {
                art.write("damaged.svg", &render_network(&damaged, &[i, o]))?;
            }
            if !damaged.connected(i, o)? {
                return Err(Error::Disconnected(i, o));
            }
            let v = heal_amplitude.unwrap_or(*amplitude);
            let run = heal(&mut damaged, i, o, v, &cfg.sim)?;
            let hop = dijkstra(&damaged, i, o, Metric::HopCount)?;
            oracle.insert("damaged_dijkstra_hops".into(), json!(hop.edges.len()));
            oracle.insert("damaged_dijkstra_path".into(), nodes(&hop.nodes));
            let valid = run.result.has_path()
                && run
                    .result
                    .path_edges
                    .iter()
                    .flatten()
                    .all(|&e| damaged.edge(e).is_ok() && !removed.contains(&e));
            let optimal = valid && run.result.hop_counts.iter().all(|&h| h == hop.edges.len());
            run_values(&mut values, &run);
            path_values(&mut values, "", &run.result);
            values.insert("removed_edges".into(), ids(&removed));
            values.insert("healed_valid".into(), json!(valid));
            values.insert("healed_optimal".into(), json!(optimal));
            oracle.insert("healed_hops".into(), json!(run.result.hop_counts));
            oracle.insert("matches_oracle".into(), json!(optimal));

            art.write(
                TRACE_FILE,
                &trace_csv(&run.trajectory, &EntropyVariant::FullNetwork, &run.result.on_edges)?,
            )?;
            snapshot(
                &mut art,
                &damaged,
                vec![i, o],
                Some(SnapshotSource {
                    input: i,
                    output: o,
                    amplitude: v,
                }),
            )?;
            write_renders(&mut art, cfg, &damaged, &[i, o], Some(&run.trajectory))?;
            (
                "heal",
                format!(
                    "healed path valid in damaged graph: {valid}, hops = {}, oracle hops = {}",
                    hops_text(&run.result),
                    hop.edges.len()
                ),
            )
        }

        AlgorithmSpec::Tsp {
            cities,
            amplitude,
            schedule,
            passes,
        } => {
            let mut net = cfg.build_network()?;
            let cities = match cities {
                CitySpec::Nodes(refs) => refs.iter().map(|r| r.resolve(&net)).collect::<Result<Vec<_>>>()?,
                CitySpec::Random {
                    count,
                    min_separation,
                    margin,
                    seed,
                } => random_cities(&net, *count, *min_separation, *margin, *seed)?,
            };
            let tour = solve_tsp(&mut net, &cities, schedule, &amplitude.rule(), &cfg.sim, *passes)?;
            let optimum = match optimal_tour_length(&net, &cities) {
                Ok(l) => Some(l),
                Err(Error::TspSizeOutOfRange(_)) => None,
                Err(e) => return Err(e),
            };
            let ratio = tour.tour_length.zip(optimum).map(|(l, opt)| l / opt);
            values.insert("cities".into(), nodes(&cities));
            values.insert("amplitude".into(), json!(tour.amplitude));
            values.insert("pulse_width".into(), json!(tour.pulse_width));
            values.insert("initial_on_units".into(), json!(tour.initial_on_edges.len()));
            values.insert("on_units".into(), json!(tour.on_edges.len()));
            values.insert("post_process_passes".into(), json!(tour.post_process_passes));
            values.insert("valid".into(), json!(tour.valid));
            values.insert("max_relative_kcl_residual".into(), json!(tour.max_relative_residual));
            values.insert("tour".into(), json!(tour.tour.as_deref().map(nodes)));
            values.insert("tour_length".into(), json!(tour.tour_length));
            values.insert("on_edges".into(), ids(&tour.on_edges));
            oracle.insert("optimal_tour_length".into(), json!(optimum));
            oracle.insert("length_ratio".into(), json!(ratio));
            snapshot(&mut art, &net, cities.clone(), None)?;
            write_renders(&mut art, cfg, &net, &cities, None)?;
            if let (true, Some(pp)) = (cfg.output.render, &tour.post_processed) {
                art.write("post_processed.svg", &render_network(pp, &[]))?;
            }
            let length = match (tour.tour_length, optimum) {
                (Some(l), Some(opt)) => format!(", length = {l:.3}, optimum = {opt:.3}"),
                (None, Some(opt)) => format!(", optimum = {opt:.3}"),
                _ => String::new(),
            };
            ("tsp", format!("tour valid: {}{length}", tour.valid))
        }

        AlgorithmSpec::EntropyStudy {
            input,
            output,
            column,
            runs,
        } => {
            if runs.is_empty() {
                return Err(Error::InvalidConfig("entropy study needs at least one run".into()));
            }
            let mut finals = Vec::new();
            let mut last_net = None;
            for run in runs {
                let params = DeviceSpec {
                    memory_ratio: Some(run.memory_ratio),
                    r_on: None,
                    ..cfg.device
                }
                .params()?;
                let mut net = cfg.build_network_with(params)?;
                let (i, o) = (input.resolve(&net)?, output.resolve(&net)?);
                let section = grid_cross_section(&net, *column, i, o)?;
                let path = solve_shortest_path(&mut net, i, o, run.amplitude, &cfg.sim)?;
                let variant = EntropyVariant::CrossSection(section);
                let trace = entropy_trace(&path.trajectory, &variant)?;
                let h = trace.last().unwrap_or(f64::NAN);
                let n = trace.values.len();
                let tail_rise = trace.values[n / 2..]
                    .windows(2)
                    .map(|w| w[1] - w[0])
                    .fold(0.0f64, f64::max);
                let key = format!("ratio_{}", run.memory_ratio);
                values.insert(
                    key.clone(),
                    json!({
                        "amplitude": run.amplitude,
                        "final_entropy": h,
                        "initial_entropy": trace.values[0],
                        "max_tail_rise": tail_rise,
                        "steps": path.trajectory.steps_taken,
                        "on_units": path.result.on_edges.len(),
                    }),
                );
                art.write(
                    &format!("entropy_{key}.csv"),
                    &trace_csv(&path.trajectory, &variant, &path.result.on_edges)?,
                )?;
                finals.push((run.memory_ratio, h));
                last_net = Some((net, i, o));
            }
            let mut sorted = finals.clone();
            sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
            let ordered = sorted.windows(2).all(|w| w[1].1 > w[0].1);
            values.insert("entropy_increases_as_ratio_decreases".into(), json!(ordered));
            if let Some((net, i, o)) = last_net {
                snapshot(&mut art, &net, vec![i, o], None)?;
                write_renders(&mut art, cfg, &net, &[i, o], None)?;
            }
            let list = sorted
                .iter()
                .map(|(r, h)| format!("{r} -> {h:.4}"))
                .collect::<Vec<_>>()
                .join(", ");
            (
                "entropy_study",
                format!("final entropies (ratio -> nats): {list}; ordering holds: {ordered}"),
            )
        }
    };
    art.json(ORACLE_FILE, &Value::Object(oracle))?;
    let mut files = art.files.clone();
    files.extend([SUMMARY_JSON.to_string(), SUMMARY_TEXT.to_string()]);
    let summary = Summary {
        scenario: cfg.name.clone(),
        algorithm: algorithm.to_string(),
        headline,
        values,
        files,
    };
    art.write(SUMMARY_JSON, &summary.to_json())?;
    art.write(SUMMARY_TEXT, &summary.to_text())?;
    Ok(summary)
}

/// Builds the configured network and writes its snapshot and rendering.
pub fn generate(cfg: &ScenarioConfig, out: &Path) -> Result<Vec<String>> {
    cfg.validate()?;
    let net = cfg.build_network()?;
    let mut art = Artifacts::new(out)?;
    snapshot(&mut art, &net, Vec::new(), None)?;
    if cfg.output.render {
        art.write("network.svg", &render_network(&net, &[]))?;
    }
    Ok(art.files)
}

#[cfg(test)]
mod tests {
    use super::*;

    const GRID: &str = r#"
name = "t"
[network]
kind = "grid"
rows = 11
cols = 11
[algorithm]
kind = "shortest_path"
input = { row = 5, col = 0 }
output = { row = 5, col = 10 }
amplitude = 6.0
section_column = 6
[sim]
record_stride = 50
"#;

    #[test]
    fn parse_defaults() {
        let cfg = ScenarioConfig::from_toml(GRID).unwrap();
        assert_eq!(
            cfg.sim,
            SimConfig {
                record_stride: 50,
                ..SimConfig::default()
            }
        );
        assert_eq!(cfg.device.params().unwrap(), DeviceParams::default());
        assert_eq!(cfg.output_dir(), Path::new("out").join("t"));
        let AlgorithmSpec::ShortestPath { input, amplitude, .. } = cfg.algorithm else {
            panic!()
        };
        assert_eq!(input, NodeRef::Cell { row: 5, col: 0 });
        assert_eq!(amplitude, AmplitudeSpec::Volts(6.0));
    }

    #[test]
    fn parse_errors_name_the_field() {
        let bad = GRID.replace("rows = 11", "rowz = 11");
        let e = ScenarioConfig::from_toml(&bad).unwrap_err();
        assert!(e.to_string().contains("rowz"), "{e}");
        assert_eq!(exit_code(&e), 2);
        let bad = GRID.replace("[network]", "[network]\n[sim]\ndt = -1.0\n[network2]");
        assert!(ScenarioConfig::from_toml(&bad).is_err());
        let both = format!("{GRID}\n[device]\nmemory_ratio = 10.0\nr_on = 5.0\n");
        assert!(matches!(ScenarioConfig::from_toml(&both), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn amplitude_forms() {
        let ladder = GRID.replace("amplitude = 6.0", "amplitude = {}");
        let cfg = ScenarioConfig::from_toml(&ladder).unwrap();
        let AlgorithmSpec::ShortestPath { amplitude, .. } = cfg.algorithm else {
            panic!()
        };
        assert_eq!(amplitude.rule(), AmplitudeRule::DEFAULT_LADDER);
    }

    #[test]
    fn run_writes_deterministic_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ScenarioConfig::from_toml(GRID).unwrap();
        let s1 = run_scenario(&cfg, &dir.path().join("a")).unwrap();
        let s2 = run_scenario(&cfg, &dir.path().join("b")).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(s1.headline, "path hops = 10, matches oracle: true");
        for f in &s1.files {
            let a = fs::read(dir.path().join("a").join(f)).unwrap();
            let b = fs::read(dir.path().join("b").join(f)).unwrap();
            assert_eq!(a, b, "{f}");
        }
        let snap = Snapshot::load(&dir.path().join("a").join(SNAPSHOT_FILE)).unwrap();
        assert_eq!(snap.highlight.len(), 2);
        assert!(snap.render(true).unwrap().contains("<svg"));
        let trace = fs::read_to_string(dir.path().join("a").join(TRACE_FILE)).unwrap();
        assert!(trace.starts_with("time,source_current,entropy,r_e"));
    }

    #[test]
    fn error_classes() {
        assert_eq!(exit_code(&Error::NotConverged { steps: 1 }), 3);
        assert_eq!(exit_code(&Error::Disconnected(NodeId(0), NodeId(1))), 4);
        assert_eq!(exit_code(&Error::NoCurrent), 1);
    }

    #[test]
    fn seed_override() {
        let text = r#"
name = "r"
[network]
kind = "random"
n_scale = 8
seed = 1
[algorithm]
kind = "tsp"
cities = { count = 3, min_separation = 2.0, margin = 1.0, seed = 1 }
amplitude = {}
"#;
        let cfg = ScenarioConfig::from_toml(text).unwrap().with_seed(9);
        let NetworkSpec::Random { seed, .. } = cfg.network else { panic!() };
        assert_eq!(seed, 9);
        let AlgorithmSpec::Tsp { cities, schedule, passes, .. } = cfg.algorithm else {
            panic!()
        };
        assert_eq!(schedule.seed, 9);
        assert_eq!(passes, 2);
        assert!(matches!(cities, CitySpec::Random { seed: 9, .. }));
    }
}
