//! Low memory content (r_on = 160 ohm): the ON set is wider than the path.

use memnet::algorithms::solve_shortest_path;
use memnet::device::DeviceParams;
use memnet::dynamics::SimConfig;
use memnet::topology::Network;

fn main() -> memnet::Result<()> {
    for (r_on, v) in [(10.0, 6.0), (160.0, 15.25)] {
        let p = DeviceParams { r_on, ..DeviceParams::default() };
        let mut net = Network::grid(11, 11, p)?;
        let g = net.grid_shape().expect("grid");
        let run = solve_shortest_path(&mut net, g.node(5, 0), g.node(5, 10), v, &SimConfig::default())?;
        let r = &run.result;
        println!(
            "r_on {r_on:>5}: {} ON units, {} paths, {} dead ends, cap hit {}",
            r.on_edges.len(),
            r.paths.len(),
            r.dead_ends.len(),
            r.cap_hit
        );
    }
    Ok(())
}
