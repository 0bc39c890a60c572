//! Shortest path on a random network, cleaned up by one post-processing pass.

use memnet::algorithms::{post_process, solve_shortest_path_with, AmplitudeRule, PathResult, Rerun};
use memnet::device::DeviceParams;
use memnet::dynamics::SimConfig;
use memnet::oracle::{dijkstra, Metric};
use memnet::topology::{Network, Point};

fn main() -> memnet::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let mut net = Network::random(20, seed, DeviceParams::with_memory_ratio(100.0)?)?;
    let i = net.nearest_connected_node(Point::new(1.0, 10.0)).expect("nodes");
    let o = net.nearest_connected_node(Point::new(19.0, 10.0)).expect("nodes");
    println!("{} nodes, {} edges, terminals {i} -> {o}", net.node_count(), net.edge_count());

    let cfg = SimConfig { record_stride: 0, ..SimConfig::default() };
    let rule = AmplitudeRule::DEFAULT_LADDER;
    let run = solve_shortest_path_with(&mut net, i, o, &rule, &cfg)?;
    let opt = dijkstra(&net, i, o, Metric::GeometricLength)?.weight;
    let r = &run.result;
    println!(
        "amplitude {:.2} V: {} ON units, {} dead ends, longest path {:.2} (optimum {opt:.2})",
        run.amplitude,
        r.on_edges.len(),
        r.dead_ends.len(),
        r.geometric_length().unwrap_or(f64::NAN)
    );

    let pp = post_process(&net, &r.on_edges, &Rerun::Pair { input: i, output: o }, &rule, &cfg, 1)?;
    let after = PathResult::from_on_edges(&net, pp.on_edges, i, o)?;
    println!(
        "after post-processing: {} ON units, {} dead ends, longest path {:.2}",
        after.on_edges.len(),
        after.dead_ends.len(),
        after.geometric_length().unwrap_or(f64::NAN)
    );
    Ok(())
}
