//! Travelling salesman attempt with unipolar random pulses between cities.

use memnet::algorithms::{optimal_tour_length, random_cities, solve_tsp, AmplitudeRule, TspSchedule};
use memnet::device::DeviceParams;
use memnet::dynamics::SimConfig;
use memnet::topology::Network;

fn main() -> memnet::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let mut net = Network::random(40, seed, DeviceParams::with_memory_ratio(100.0)?)?;
    let cities = random_cities(&net, 6, 8.0, 4.0, seed)?;
    let opt = optimal_tour_length(&net, &cities)?;
    let schedule = TspSchedule { seed, ..TspSchedule::default() };
    let rule = AmplitudeRule::Ladder { factor: 1.5, max_attempts: 1 };
    let cfg = SimConfig { record_stride: 0, ..SimConfig::default() };
    let r = solve_tsp(&mut net, &cities, &schedule, &rule, &cfg, 2)?;
    println!("cities: {:?}", r.cities);
    println!(
        "amplitude {:.2} V, pulse width {:.4} s, ON units {} -> {} after {} passes",
        r.amplitude,
        r.pulse_width,
        r.initial_on_edges.len(),
        r.on_edges.len(),
        r.post_process_passes
    );
    match (&r.tour, r.tour_length) {
        (Some(t), Some(len)) => println!("tour {t:?}, length {len:.2}, optimum {opt:.2}"),
        _ => println!("no closed tour formed (optimum {opt:.2})"),
    }
    Ok(())
}
