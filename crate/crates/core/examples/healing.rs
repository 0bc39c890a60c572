//! Damage a solved grid and let one more pulse reroute the path.

use memnet::algorithms::{heal, solve_shortest_path};
use memnet::device::DeviceParams;
use memnet::dynamics::SimConfig;
use memnet::oracle::{dijkstra, Metric};
use memnet::render::render_network;
use memnet::topology::Network;

fn main() -> memnet::Result<()> {
    let mut net = Network::grid(11, 11, DeviceParams::default())?;
    let g = net.grid_shape().expect("grid");
    let (i, o) = (g.node(5, 0), g.node(5, 10));
    let cfg = SimConfig::default();
    solve_shortest_path(&mut net, i, o, 6.0, &cfg)?;

    let cut: Vec<_> = [5, 6, 7]
        .iter()
        .map(|&r| net.edge_between(g.node(r, 5), g.node(r, 6)).expect("edge"))
        .collect();
    let mut damaged = net.remove_edges(&cut)?;
    let run = heal(&mut damaged, i, o, 6.0, &cfg)?;
    let opt = dijkstra(&damaged, i, o, Metric::HopCount)?.edges.len();
    println!("healed hops: {:?}, optimum in damaged graph: {opt}", run.result.hop_counts);
    std::fs::write("healed.svg", render_network(&damaged, &[i, o])).ok();
    Ok(())
}
