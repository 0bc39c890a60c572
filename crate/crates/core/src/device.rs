//! Threshold-type bipolar memristive devices and the anti-parallel basic unit.
//!
//! A device is current controlled: its memristance `x` is both the state
//! variable and the resistance, and it only moves while the current magnitude
//! is at or above the threshold. The rate is linear in the overdrive
//! `|i| - i_threshold`, and `x` is hard-clamped to `[r_on, r_off]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Material parameters of a single device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceParams {
    /// Low-resistance limit (ohm).
    pub r_on: f64,
    /// High-resistance limit (ohm).
    pub r_off: f64,
    /// Switching rate per ampere of overdrive (ohm / (s * A)).
    pub gamma: f64,
    /// Threshold current (A).
    pub i_threshold: f64,
}

impl Default for DeviceParams {
    fn default() -> Self {
        Self {
            r_on: 10.0,
            r_off: 200.0,
            gamma: 1e6,
            i_threshold: 10e-3,
        }
    }
}

impl DeviceParams {
    pub fn new(r_on: f64, r_off: f64, gamma: f64, i_threshold: f64) -> Result<Self> {
        let p = Self {
            r_on,
            r_off,
            gamma,
            i_threshold,
        };
        p.validate()?;
        Ok(p)
    }

    /// Default parameters with `r_on = r_off / ratio`.
    pub fn with_memory_ratio(ratio: f64) -> Result<Self> {
        let base = Self::default();
        Self::new(base.r_off / ratio, base.r_off, base.gamma, base.i_threshold)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.r_on, self.r_off, self.gamma, self.i_threshold]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParams("all parameters must be finite".into()));
        }
        if !(self.r_on > 0.0 && self.r_on < self.r_off) {
            return Err(Error::InvalidParams(format!(
                "need 0 < r_on < r_off, got r_on = {}, r_off = {}",
                self.r_on, self.r_off
            )));
        }
        if self.gamma <= 0.0 {
            return Err(Error::InvalidParams(format!("gamma must be positive, got {}", self.gamma)));
        }
        if self.i_threshold < 0.0 {
            return Err(Error::InvalidParams(format!(
                "i_threshold must be non-negative, got {}",
                self.i_threshold
            )));
        }
        Ok(())
    }

    /// `r_off / r_on`, the memory content.
    pub fn memory_ratio(&self) -> f64 {
        self.r_off / self.r_on
    }

    /// Unit resistance with one device ON and the other OFF.
    pub fn unit_on_resistance(&self) -> f64 {
        self.r_on * self.r_off / (self.r_on + self.r_off)
    }

    /// Unit resistance with both devices OFF.
    pub fn unit_off_resistance(&self) -> f64 {
        self.r_off / 2.0
    }

    /// Reading cutoff for a unit: geometric mean of its ON and OFF values.
    pub fn on_threshold(&self) -> f64 {
        (self.unit_on_resistance() * self.unit_off_resistance()).sqrt()
    }
}

/// Polarity of a device relative to its edge's reference direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    Forward,
    Reverse,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Forward => 1.0,
            Orientation::Reverse => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Orientation::Forward => Orientation::Reverse,
            Orientation::Reverse => Orientation::Forward,
        }
    }
}

/// How the state equation reads the device current.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DynamicsMode {
    /// Sign of the current selects the switching direction.
    #[default]
    Bipolar,
    /// Only the current magnitude matters; switching always goes toward `r_on`.
    Unipolar,
}

/// Which current drives each device of a basic unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitDrive {
    /// Each device sees the whole edge current (the unit acts as one
    /// higher-order device).
    #[default]
    Whole,
    /// The edge current is split between the two devices by their
    /// conductances.
    Divided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemristiveDevice {
    /// Memristance, which is also the resistance (ohm).
    pub x: f64,
    pub orientation: Orientation,
    pub params: DeviceParams,
}

impl MemristiveDevice {
    /// A device in its OFF state.
    pub fn off(orientation: Orientation, params: DeviceParams) -> Self {
        Self {
            x: params.r_off,
            orientation,
            params,
        }
    }

    /// A device at state `x`, clamped into the allowed window.
    pub fn with_state(x: f64, orientation: Orientation, params: DeviceParams) -> Self {
        Self {
            x: x.clamp(params.r_on, params.r_off),
            orientation,
            params,
        }
    }

    pub fn resistance(&self) -> f64 {
        self.x
    }

    pub fn conductance(&self) -> f64 {
        1.0 / self.x
    }

    /// Unclamped `dx/dt` for a current `i` already expressed in the device's
    /// own orientation frame.
    pub fn derivative(&self, i: f64, mode: DynamicsMode) -> f64 {
        let p = &self.params;
        let magnitude = i.abs();
        if magnitude < p.i_threshold {
            return 0.0;
        }
        let rate = p.gamma * (magnitude - p.i_threshold);
        match mode {
            DynamicsMode::Bipolar => i.signum() * rate,
            DynamicsMode::Unipolar => -rate,
        }
    }

    /// One explicit Euler step of length `dt`, clamped to `[r_on, r_off]`.
    pub fn step(&self, i: f64, dt: f64, mode: DynamicsMode) -> Self {
        let p = &self.params;
        let x = (self.x + self.derivative(i, mode) * dt).clamp(p.r_on, p.r_off);
        Self { x, ..*self }
    }

    /// True when a step with current `i` would leave `x` unchanged, either
    /// because the current is below threshold or because the device is
    /// already saturated in the driven direction.
    pub fn is_frozen(&self, i: f64, mode: DynamicsMode) -> bool {
        let rate = self.derivative(i, mode);
        rate == 0.0
            || (rate < 0.0 && self.x <= self.params.r_on)
            || (rate > 0.0 && self.x >= self.params.r_off)
    }
}

/// One network edge: two devices in parallel with opposite orientation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasicUnit {
    pub device_a: MemristiveDevice,
    pub device_b: MemristiveDevice,
}

impl BasicUnit {
    /// Both devices OFF.
    pub fn off(params: DeviceParams) -> Self {
        Self {
            device_a: MemristiveDevice::off(Orientation::Forward, params),
            device_b: MemristiveDevice::off(Orientation::Reverse, params),
        }
    }

    pub fn with_states(x_a: f64, x_b: f64, params: DeviceParams) -> Self {
        Self {
            device_a: MemristiveDevice::with_state(x_a, Orientation::Forward, params),
            device_b: MemristiveDevice::with_state(x_b, Orientation::Reverse, params),
        }
    }

    pub fn params(&self) -> DeviceParams {
        self.device_a.params
    }

    pub fn conductance(&self) -> f64 {
        self.device_a.conductance() + self.device_b.conductance()
    }

    pub fn resistance(&self) -> f64 {
        let (a, b) = (self.device_a.x, self.device_b.x);
        a * b / (a + b)
    }

    /// Device currents, each in its own orientation frame, for an edge
    /// current `i_unit` in the edge's reference direction.
    pub fn device_currents(&self, i_unit: f64, drive: UnitDrive) -> (f64, f64) {
        let (i_a, i_b) = match drive {
            UnitDrive::Whole => (i_unit, i_unit),
            UnitDrive::Divided => {
                let (g_a, g_b) = (self.device_a.conductance(), self.device_b.conductance());
                let g = g_a + g_b;
                (i_unit * g_a / g, i_unit * g_b / g)
            }
        };
        (
            i_a * self.device_a.orientation.sign(),
            i_b * self.device_b.orientation.sign(),
        )
    }

    /// Steps both devices from their pre-step state, splitting the edge
    /// current with the conductance divider.
    pub fn step(&self, i_unit: f64, dt: f64, mode: DynamicsMode) -> Self {
        self.step_with(i_unit, dt, mode, UnitDrive::Divided)
    }

    pub fn step_with(&self, i_unit: f64, dt: f64, mode: DynamicsMode, drive: UnitDrive) -> Self {
        let (i_a, i_b) = self.device_currents(i_unit, drive);
        Self {
            device_a: self.device_a.step(i_a, dt, mode),
            device_b: self.device_b.step(i_b, dt, mode),
        }
    }

    pub fn is_frozen(&self, i_unit: f64, mode: DynamicsMode, drive: UnitDrive) -> bool {
        let (i_a, i_b) = self.device_currents(i_unit, drive);
        self.device_a.is_frozen(i_a, mode) && self.device_b.is_frozen(i_b, mode)
    }

    /// Largest `|dx/dt|` over the two devices.
    pub fn max_rate(&self, i_unit: f64, mode: DynamicsMode, drive: UnitDrive) -> f64 {
        let (i_a, i_b) = self.device_currents(i_unit, drive);
        self.device_a
            .derivative(i_a, mode)
            .abs()
            .max(self.device_b.derivative(i_b, mode).abs())
    }

    /// Returns both devices to OFF.
    pub fn reset(&mut self) {
        let p = self.params();
        self.device_a.x = p.r_off;
        self.device_b.x = p.r_off;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn defaults() -> DeviceParams {
        DeviceParams::default()
    }

    fn dev(x: f64) -> MemristiveDevice {
        MemristiveDevice::with_state(x, Orientation::Forward, defaults())
    }

    #[test]
    fn resistance_is_state() {
        for x in [200.0, 10.0, 105.0] {
            assert_eq!(dev(x).resistance(), x);
        }
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(dev(200.0).derivative(5e-3, DynamicsMode::Bipolar), 0.0);
        let r = dev(200.0).derivative(-30e-3, DynamicsMode::Bipolar);
        assert!((r + 2.0e4).abs() < 1e-9, "{r}");
        let r = dev(200.0).derivative(30e-3, DynamicsMode::Unipolar);
        assert!((r + 2.0e4).abs() < 1e-9, "{r}");
    }

    #[test]
    fn derivative_at_threshold_switches() {
        // |i| = i_t is the first switching current, with zero overdrive.
        assert_eq!(dev(100.0).derivative(10e-3, DynamicsMode::Bipolar), 0.0);
        assert!(!dev(100.0).is_frozen(10.5e-3, DynamicsMode::Bipolar));
    }

    #[test]
    fn step_examples() {
        assert_eq!(dev(200.0).step(5e-3, 1e-3, DynamicsMode::Bipolar).x, 200.0);
        let x = dev(200.0).step(-30e-3, 1e-3, DynamicsMode::Bipolar).x;
        assert!((x - 180.0).abs() < 1e-9);
        assert_eq!(dev(12.0).step(-30e-3, 1e-3, DynamicsMode::Bipolar).x, 10.0);
    }

    #[test]
    fn unit_conductance_examples() {
        let p = defaults();
        let both_off = BasicUnit::with_states(200.0, 200.0, p);
        assert!((both_off.conductance() - 0.01).abs() < 1e-15);
        assert!((both_off.resistance() - p.unit_off_resistance()).abs() < 1e-12);
        let on = BasicUnit::with_states(200.0, 10.0, p);
        assert!((on.conductance() - 0.105).abs() < 1e-15);
        assert!((on.resistance() - 200.0 / 21.0).abs() < 1e-12);
    }

    #[test]
    fn divided_step_examples() {
        let p = defaults();
        let dt = 1e-4;
        let u = BasicUnit::off(p).step(60e-3, dt, DynamicsMode::Bipolar);
        assert_eq!(u.device_a.x, 200.0);
        assert!((u.device_b.x - (200.0 - 2e4 * dt)).abs() < 1e-9);

        let still = BasicUnit::off(p).step(0.0, dt, DynamicsMode::Bipolar);
        assert_eq!(still, BasicUnit::off(p));

        let m = BasicUnit::off(p).step(-60e-3, dt, DynamicsMode::Bipolar);
        assert!((m.device_a.x - (200.0 - 2e4 * dt)).abs() < 1e-9);
        assert_eq!(m.device_b.x, 200.0);
    }

    #[test]
    fn whole_drive_sees_edge_current() {
        let p = defaults();
        let (i_a, i_b) = BasicUnit::off(p).device_currents(60e-3, UnitDrive::Whole);
        assert_eq!((i_a, i_b), (60e-3, -60e-3));
        let u = BasicUnit::off(p).step_with(60e-3, 1e-4, DynamicsMode::Bipolar, UnitDrive::Whole);
        assert!((u.device_b.x - (200.0 - 5e4 * 1e-4)).abs() < 1e-9);
    }

    #[test]
    fn on_threshold_is_log_midpoint() {
        let t = defaults().on_threshold();
        assert!((t - (200.0f64 / 21.0 * 100.0).sqrt()).abs() < 1e-12);
        assert!(30.0 < t && t < 32.0);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(DeviceParams::new(200.0, 10.0, 1e6, 0.01).is_err());
        assert!(DeviceParams::new(0.0, 10.0, 1e6, 0.01).is_err());
        assert!(DeviceParams::new(1.0, 10.0, -1.0, 0.01).is_err());
        assert!(DeviceParams::new(1.0, 10.0, 1.0, -0.01).is_err());
        assert!(DeviceParams::new(1.0, f64::NAN, 1.0, 0.01).is_err());
    }

    #[test]
    fn constant_current_closed_form() {
        // x(t) = clamp(x0 + sgn(i) * gamma * (|i| - i_t) * t)
        let p = defaults();
        let i = -30e-3;
        let t_end = 5e-3;
        for steps in [10usize, 100, 1000] {
            let dt = t_end / steps as f64;
            let mut d = dev(200.0);
            for _ in 0..steps {
                d = d.step(i, dt, DynamicsMode::Bipolar);
            }
            let exact = (200.0 - p.gamma * (0.03 - p.i_threshold) * t_end).clamp(p.r_on, p.r_off);
            assert!((d.x - exact).abs() < 1e-9 * exact, "{steps}: {} vs {exact}", d.x);
        }
    }

    proptest! {
        #[test]
        fn clamped_after_any_sequence(
            x0 in 10.0f64..=200.0,
            currents in prop::collection::vec(-0.5f64..0.5, 1..50),
            dt in 1e-6f64..1e-2,
        ) {
            let mut d = dev(x0);
            for i in currents {
                d = d.step(i, dt, DynamicsMode::Bipolar);
                prop_assert!(d.x >= 10.0 && d.x <= 200.0);
            }
        }

        #[test]
        fn deadband_is_identity(x0 in 10.0f64..=200.0, i in -0.00999f64..0.00999, dt in 1e-6f64..1.0) {
            prop_assert_eq!(dev(x0).step(i, dt, DynamicsMode::Bipolar).x, x0);
        }

        #[test]
        fn unit_polarity_symmetry(x in 10.0f64..=200.0, i in 0.0f64..0.3, dt in 1e-6f64..1e-3) {
            let u = BasicUnit::with_states(x, x, defaults());
            for drive in [UnitDrive::Whole, UnitDrive::Divided] {
                let plus = u.step_with(i, dt, DynamicsMode::Bipolar, drive);
                let minus = u.step_with(-i, dt, DynamicsMode::Bipolar, drive);
                prop_assert_eq!(plus.device_a.x, minus.device_b.x);
                prop_assert_eq!(plus.device_b.x, minus.device_a.x);
            }
        }

        #[test]
        fn unipolar_never_increases(
            x0 in 10.0f64..=200.0,
            currents in prop::collection::vec(-0.5f64..0.5, 1..50),
        ) {
            let mut u = BasicUnit::with_states(x0, x0, defaults());
            for i in currents {
                let next = u.step_with(i, 1e-4, DynamicsMode::Unipolar, UnitDrive::Whole);
                prop_assert!(next.device_a.x <= u.device_a.x);
                prop_assert!(next.device_b.x <= u.device_b.x);
                u = next;
            }
        }

        #[test]
        fn unit_resistance_window(x_a in 10.0f64..=200.0, x_b in 10.0f64..=200.0) {
            let p = defaults();
            let r = BasicUnit::with_states(x_a, x_b, p).resistance();
            prop_assert!(r >= p.r_on / 2.0 - 1e-12 && r <= p.unit_off_resistance() + 1e-12);
        }
    }
}
