//! Resistance switching rates along the solution path: the path grows in
//! from both terminals.

use memnet::algorithms::solve_shortest_path;
use memnet::analysis::{peak_switching_times, switching_rate_trace};
use memnet::device::DeviceParams;
use memnet::dynamics::SimConfig;
use memnet::topology::Network;

fn main() -> memnet::Result<()> {
    let mut net = Network::grid(11, 11, DeviceParams::default())?;
    let g = net.grid_shape().expect("grid");
    let path: Vec<_> = (0..10)
        .map(|c| net.edge_between(g.node(5, c), g.node(5, c + 1)).expect("edge"))
        .collect();
    let cfg = SimConfig { record_stride: 5, ..SimConfig::default() };
    let run = solve_shortest_path(&mut net, g.node(5, 0), g.node(5, 10), 6.0, &cfg)?;
    let rates = switching_rate_trace(&run.trajectory, &path)?;
    for (c, t) in peak_switching_times(&rates).iter().enumerate() {
        println!("column {c}-{}: fastest switching at {:.4} s", c + 1, t.unwrap_or(f64::NAN));
    }
    Ok(())
}
