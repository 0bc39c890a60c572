//! Off-axis terminals produce two equally short, edge-disjoint routes.

use memnet::algorithms::solve_shortest_path;
use memnet::device::DeviceParams;
use memnet::dynamics::SimConfig;
use memnet::oracle::{dijkstra, Metric};
use memnet::topology::Network;

fn main() -> memnet::Result<()> {
    let mut net = Network::grid(11, 11, DeviceParams::with_memory_ratio(10.0)?)?;
    let g = net.grid_shape().expect("grid");
    let (i, o) = (g.node(5, 2), g.node(7, 8));
    let run = solve_shortest_path(&mut net, i, o, 6.0, &SimConfig::default())?;
    let opt = dijkstra(&net, i, o, Metric::HopCount)?.edges.len();
    println!("optimal hops: {opt}");
    for p in &run.result.paths {
        let cells: Vec<_> = p.iter().map(|&n| g.row_col(n)).collect();
        println!("  {} hops: {:?}", p.len() - 1, cells);
    }
    println!("degenerate: {}", run.result.degenerate);
    Ok(())
}
