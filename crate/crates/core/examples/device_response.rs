//! A single threshold device and a basic unit under constant current.

use memnet::device::{BasicUnit, DeviceParams, DynamicsMode, MemristiveDevice, Orientation, UnitDrive};

fn main() {
    let p = DeviceParams::default();
    let mut d = MemristiveDevice::off(Orientation::Forward, p);
    let dt = 1e-5;
    println!("t (ms)   R (ohm) at -30 mA");
    for k in 0..=10 {
        println!("{:6.1}   {:8.3}", k as f64, d.resistance());
        for _ in 0..100 {
            d = d.step(-0.03, dt, DynamicsMode::Bipolar);
        }
    }

    println!("\nunit OFF {:.3} ohm, ON cutoff {:.3} ohm, ON {:.3} ohm", BasicUnit::off(p).resistance(), p.on_threshold(), p.unit_on_resistance());
    for drive in [UnitDrive::Whole, UnitDrive::Divided] {
        let mut u = BasicUnit::off(p);
        for _ in 0..2000 {
            u = u.step_with(0.03, dt, DynamicsMode::Bipolar, drive);
        }
        println!("{drive:?} drive, 20 ms at +30 mA: {:.3} ohm", u.resistance());
    }
}
