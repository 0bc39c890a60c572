//! Time integration of a network under applied voltage pulses.
//!
//! Each step solves the circuit for the current device states, then moves
//! every device with explicit Euler using those currents (synchronous
//! update). A pulse ends after its duration, or once no device can move any
//! more: every device is either below threshold or saturated in the driven
//! direction, so the next solve would return the same currents forever.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{unit_conductances, CircuitSolver, FloatingPolicy, SolveResult, SourceSpec};
use crate::device::{DynamicsMode, UnitDrive};
use crate::error::{Error, Result};
use crate::topology::{EdgeId, Network, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseDuration {
    /// Fixed width in seconds.
    Fixed(f64),
    /// Run until no device changes (bounded by `max_steps`).
    SteadyState,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub input: NodeId,
    pub output: NodeId,
    /// Potential of `input` relative to the grounded `output` (V).
    pub amplitude: f64,
    pub duration: PulseDuration,
}

impl PulseSpec {
    pub fn steady(input: NodeId, output: NodeId, amplitude: f64) -> Self {
        Self {
            input,
            output,
            amplitude,
            duration: PulseDuration::SteadyState,
        }
    }

    pub fn sources(&self) -> Result<SourceSpec> {
        if !self.amplitude.is_finite() {
            return Err(Error::InvalidConfig("pulse amplitude must be finite".into()));
        }
        SourceSpec::pair(self.input, self.output, self.amplitude)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Euler step (s).
    pub dt: f64,
    pub max_steps: usize,
    /// Keep every `record_stride`-th state; 0 keeps only the first and last.
    pub record_stride: usize,
    pub mode: DynamicsMode,
    pub drive: UnitDrive,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 1e-4,
            max_steps: 1_000_000,
            record_stride: 1,
            mode: DynamicsMode::Bipolar,
            drive: UnitDrive::Whole,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidConfig("max_steps must be at least 1".into()));
        }
        Ok(())
    }

    /// Step size for which the fastest device moves `fraction` of its range
    /// in the first step of `pulse` on `net`. `None` when nothing switches
    /// at the initial state.
    pub fn initial_dt(&self, net: &Network, pulse: &PulseSpec, fraction: f64) -> Result<Option<f64>> {
        let src = pulse.sources()?;
        let mut solver = CircuitSolver::new(net, &src, FloatingPolicy::Ignore)?;
        let res = solver.solve(net, &unit_conductances(net)?)?;
        let mut best: Option<f64> = None;
        for (e, &i) in net.edges().iter().zip(&res.edge_currents) {
            let rate = e.unit.max_rate(i, self.mode, self.drive);
            if rate > 0.0 {
                let p = e.unit.params();
                let dt = fraction * (p.r_off - p.r_on) / rate;
                best = Some(best.map_or(dt, |b: f64| b.min(dt)));
            }
        }
        Ok(best)
    }
}

/// Recorded network state at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub step: usize,
    pub time: f64,
    /// Unit resistance per edge (network edge order).
    pub resistances: Vec<f64>,
    /// Edge current per edge for this state (A).
    pub currents: Vec<f64>,
    pub source_current: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub edge_ids: Vec<EdgeId>,
    pub dt: f64,
    /// Strided samples; the first is the initial state.
    pub samples: Vec<Sample>,
    /// State when the pulse ended.
    pub last: Sample,
    /// First step after which each unit read ON, per edge.
    pub first_on_step: Vec<Option<usize>>,
    pub reached_steady: bool,
    pub steps_taken: usize,
    /// Largest KCL residual over all solves, relative to the source current.
    pub max_relative_residual: f64,
}

impl Trajectory {
    pub fn edge_position(&self, id: EdgeId) -> Result<usize> {
        self.edge_ids.binary_search(&id).map_err(|_| Error::UnknownEdge(id))
    }

    /// Time of the first ON reading of an edge.
    pub fn first_on_time(&self, id: EdgeId) -> Result<Option<f64>> {
        let k = self.edge_position(id)?;
        Ok(self.first_on_step[k].map(|s| s as f64 * self.dt))
    }
}

fn sample(net: &Network, res: &SolveResult, step: usize, dt: f64) -> Sample {
    Sample {
        step,
        time: step as f64 * dt,
        resistances: net.unit_resistances(),
        currents: res.edge_currents.clone(),
        source_current: res.source_current,
    }
}

/// Applies one pulse, evolving `net` in place.
///
/// With [`PulseDuration::SteadyState`], running out of `max_steps` is an
/// error; `net` then holds the partial state.
pub fn apply_pulse(net: &mut Network, pulse: &PulseSpec, cfg: &SimConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if net.node_count() == 0 {
        return Err(Error::InvalidConfig("network is empty".into()));
    }
    let src = pulse.sources()?;
    if !net.connected(pulse.input, pulse.output)? {
        return Err(Error::Disconnected(pulse.input, pulse.output));
    }
    let limit = match pulse.duration {
        PulseDuration::Fixed(t) => {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::InvalidConfig(format!("pulse duration must be non-negative, got {t}")));
            }
            ((t / cfg.dt - 1e-9).ceil().max(0.0) as usize).min(cfg.max_steps)
        }
        PulseDuration::SteadyState => cfg.max_steps,
    };

    let mut solver = CircuitSolver::new(net, &src, FloatingPolicy::Ignore)?;
    let mut res = solver.solve(net, &unit_conductances(net)?)?;
    let mut max_residual = res.relative_residual();
    let thresholds: Vec<f64> = net.edges().iter().map(|e| e.unit.params().on_threshold()).collect();
    let mut first_on: Vec<Option<usize>> = net
        .edges()
        .iter()
        .zip(&thresholds)
        .map(|(e, &t)| (e.unit.resistance() <= t).then_some(0))
        .collect();
    let mut samples = vec![sample(net, &res, 0, cfg.dt)];
    let mut steps = 0;
    let mut steady = false;

    loop {
        let frozen = net
            .edges()
            .iter()
            .zip(&res.edge_currents)
            .all(|(e, &i)| e.unit.is_frozen(i, cfg.mode, cfg.drive));
        if frozen {
            steady = true;
            break;
        }
        if steps >= limit {
            break;
        }
        for (e, &i) in net.edges_mut().iter_mut().zip(&res.edge_currents) {
            e.unit = e.unit.step_with(i, cfg.dt, cfg.mode, cfg.drive);
        }
        steps += 1;
        for ((e, t), first) in net.edges().iter().zip(&thresholds).zip(first_on.iter_mut()) {
            if first.is_none() && e.unit.resistance() <= *t {
                *first = Some(steps);
            }
        }
        res = solver.solve(net, &unit_conductances(net)?)?;
        max_residual = max_residual.max(res.relative_residual());
        if cfg.record_stride > 0 && steps % cfg.record_stride == 0 {
            samples.push(sample(net, &res, steps, cfg.dt));
        }
    }

    if !steady && pulse.duration == PulseDuration::SteadyState {
        return Err(Error::NotConverged { steps });
    }
    Ok(Trajectory {
        edge_ids: net.edges().iter().map(|e| e.id).collect(),
        dt: cfg.dt,
        samples,
        last: sample(net, &res, steps, cfg.dt),
        first_on_step: first_on,
        reached_steady: steady,
        steps_taken: steps,
        max_relative_residual: max_residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSummary {
    pub input: NodeId,
    pub output: NodeId,
    pub amplitude: f64,
    pub steps: usize,
    pub reached_steady: bool,
    pub max_relative_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SequenceSummary {
    pub pulses: Vec<PulseSummary>,
}

impl SequenceSummary {
    pub fn total_steps(&self) -> usize {
        self.pulses.iter().map(|p| p.steps).sum()
    }

    pub fn max_relative_residual(&self) -> f64 {
        self.pulses.iter().fold(0.0, |m, p| m.max(p.max_relative_residual))
    }
}

/// Applies pulses in order, carrying device states from one to the next.
/// Per-pulse trajectories are not retained.
pub fn run_pulse_sequence(net: &mut Network, pulses: &[PulseSpec], cfg: &SimConfig) -> Result<SequenceSummary> {
    let quiet = SimConfig {
        record_stride: 0,
        ..*cfg
    };
    let mut summary = SequenceSummary::default();
    for pulse in pulses {
        let traj = apply_pulse(net, pulse, &quiet)?;
        summary.pulses.push(PulseSummary {
            input: pulse.input,
            output: pulse.output,
            amplitude: pulse.amplitude,
            steps: traj.steps_taken,
            reached_steady: traj.reached_steady,
            max_relative_residual: traj.max_relative_residual,
        });
    }
    Ok(summary)
}

/// `n_pulses` pulses between uniformly chosen distinct city pairs with
/// uniformly random polarity.
pub fn random_pulse_schedule(
    cities: &[NodeId],
    n_pulses: usize,
    amplitude: f64,
    duration: PulseDuration,
    seed: u64,
) -> Result<Vec<PulseSpec>> {
    if cities.len() < 2 {
        return Err(Error::TooFewCities {
            needed: 2,
            got: cities.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pulses = (0..n_pulses)
        .map(|_| {
            let mut pair = cities.choose_multiple(&mut rng, 2);
            let input = *pair.next().expect("two cities");
            let output = *pair.next().expect("two cities");
            let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            PulseSpec {
                input,
                output,
                amplitude: sign * amplitude,
                duration,
            }
        })
        .collect();
    Ok(pulses)
}
