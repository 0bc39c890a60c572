//! Cross-section entropy over time for several memory ratios.

use memnet::algorithms::solve_shortest_path;
use memnet::analysis::{entropy_trace, grid_cross_section, EntropyVariant};
use memnet::device::DeviceParams;
use memnet::dynamics::SimConfig;
use memnet::topology::Network;

fn main() -> memnet::Result<()> {
    let cfg = SimConfig { record_stride: 20, ..SimConfig::default() };
    for (ratio, v) in [(20.0, 6.0), (10.0, 6.75), (4.0, 10.0), (1.25, 15.25)] {
        let mut net = Network::grid(11, 11, DeviceParams::with_memory_ratio(ratio)?)?;
        let g = net.grid_shape().expect("grid");
        let (i, o) = (g.node(5, 0), g.node(5, 10));
        let section = grid_cross_section(&net, 6, i, o)?;
        let run = solve_shortest_path(&mut net, i, o, v, &cfg)?;
        let tr = entropy_trace(&run.trajectory, &EntropyVariant::CrossSection(section))?;
        let n = tr.values.len();
        let picks: Vec<String> = (0..6).map(|k| format!("{:.3}", tr.values[k * (n - 1) / 5])).collect();
        println!("ratio {ratio:>5}: {}", picks.join(" -> "));
    }
    Ok(())
}
