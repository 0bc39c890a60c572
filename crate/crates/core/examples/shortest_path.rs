//! Shortest path on an 11x11 grid between the ends of the middle row.

use memnet::algorithms::solve_shortest_path;
use memnet::device::DeviceParams;
use memnet::dynamics::SimConfig;
use memnet::oracle::{dijkstra, Metric};
use memnet::render::render_network;
use memnet::topology::Network;

fn main() -> memnet::Result<()> {
    let mut net = Network::grid(11, 11, DeviceParams::default())?;
    let g = net.grid_shape().expect("grid");
    let (i, o) = (g.node(5, 0), g.node(5, 10));
    let run = solve_shortest_path(&mut net, i, o, 6.0, &SimConfig::default())?;
    let best = dijkstra(&net, i, o, Metric::HopCount)?;
    println!("steps: {}", run.trajectory.steps_taken);
    println!("ON units: {}", run.result.on_edges.len());
    println!("path hops: {:?}, optimum: {}", run.result.hop_counts, best.edges.len());
    let mut found = run.result.on_edges.clone();
    let mut expected = best.edges.clone();
    found.sort();
    expected.sort();
    println!("ON set equals the optimal path: {}", found == expected);

    // order in which the path units switched
    for id in &best.edges {
        let t = run.trajectory.first_on_time(*id)?;
        println!("  {id}: first ON at {:?}", t);
    }
    std::fs::write("shortest_path.svg", render_network(&net, &[i, o])).ok();
    Ok(())
}
