//! Current-distribution entropy and switching-rate traces.

use serde::{Deserialize, Serialize};

use crate::circuit::SolveResult;
use crate::dynamics::{Sample, Trajectory};
use crate::error::{Error, Result};
use crate::topology::{EdgeId, Network, NodeId};

/// A set of edges forming a cut between two terminals, with the sign that
/// turns each edge's stored current into current flowing from the input
/// side to the output side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSection {
    pub edges: Vec<EdgeId>,
    pub orientation: Vec<f64>,
}

/// The horizontal edges of a grid joining node columns `column - 1` and
/// `column`. The column must lie in `(min terminal column, max terminal
/// column]`.
pub fn grid_cross_section(net: &Network, column: usize, input: NodeId, output: NodeId) -> Result<CrossSection> {
    let shape = net.grid_shape().ok_or(Error::NotAGrid)?;
    net.check_node(input)?;
    net.check_node(output)?;
    let (_, ci) = shape.row_col(input);
    let (_, co) = shape.row_col(output);
    let (lo, hi) = (ci.min(co), ci.max(co));
    if column <= lo || column > hi {
        return Err(Error::InvalidColumn { column });
    }
    let mut edges = Vec::with_capacity(shape.rows);
    let mut orientation = Vec::with_capacity(shape.rows);
    for r in 0..shape.rows {
        let id = net
            .edge_between(shape.node(r, column - 1), shape.node(r, column))
            .ok_or(Error::NotAGrid)?;
        let e = net.edge(id)?;
        let from_col = shape.row_col(e.from).1;
        let forward = (from_col == column - 1) == (ci < co);
        edges.push(id);
        orientation.push(if forward { 1.0 } else { -1.0 });
    }
    let cut = net.remove_edges(&edges)?;
    if cut.connected(input, output)? {
        return Err(Error::CutDoesNotSeparate(input, output));
    }
    Ok(CrossSection { edges, orientation })
}

/// Shannon entropy (nats) of the distribution `|I_j| / sum |I|`.
/// Zero entries contribute nothing.
pub fn entropy_of(currents: impl IntoIterator<Item = f64>) -> Result<f64> {
    let mags: Vec<f64> = currents.into_iter().map(f64::abs).collect();
    let total: f64 = mags.iter().sum();
    if !(total > 0.0) {
        return Err(Error::NoCurrent);
    }
    Ok(mags
        .iter()
        .filter(|&&m| m > 0.0)
        .map(|&m| {
            let p = m / total;
            -p * p.ln()
        })
        .sum::<f64>()
        .max(0.0))
}

/// Entropy of the current distribution over a cross-section.
pub fn cross_section_entropy(result: &SolveResult, section: &CrossSection) -> Result<f64> {
    let currents = section
        .edges
        .iter()
        .map(|&id| result.current(id))
        .collect::<Result<Vec<_>>>()?;
    entropy_of(currents)
}

/// Entropy of the current distribution over every edge.
pub fn full_network_entropy(result: &SolveResult) -> Result<f64> {
    entropy_of(result.edge_currents.iter().copied())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EntropyVariant {
    CrossSection(CrossSection),
    FullNetwork,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyTrace {
    pub times: Vec<f64>,
    /// NaN where no current flows.
    pub values: Vec<f64>,
}

impl EntropyTrace {
    pub fn last(&self) -> Option<f64> {
        self.values.last().copied()
    }
}

/// Recorded samples followed by the final state (when it was not already
/// the last sample).
pub fn states(traj: &Trajectory) -> Vec<&Sample> {
    let mut out: Vec<&Sample> = traj.samples.iter().collect();
    if out.last().map(|s| s.step) != Some(traj.last.step) {
        out.push(&traj.last);
    }
    out
}

/// Entropy at every recorded state of a trajectory.
pub fn entropy_trace(traj: &Trajectory, variant: &EntropyVariant) -> Result<EntropyTrace> {
    let positions = match variant {
        EntropyVariant::CrossSection(s) => Some(
            s.edges
                .iter()
                .map(|&id| traj.edge_position(id))
                .collect::<Result<Vec<_>>>()?,
        ),
        EntropyVariant::FullNetwork => None,
    };
    let mut times = Vec::new();
    let mut values = Vec::new();
    for s in states(traj) {
        let h = match &positions {
            Some(p) => entropy_of(p.iter().map(|&k| s.currents[k])),
            None => entropy_of(s.currents.iter().copied()),
        };
        times.push(s.time);
        values.push(h.unwrap_or(f64::NAN));
    }
    Ok(EntropyTrace { times, values })
}

/// Finite-difference `dR/dt` of each requested edge between consecutive
/// recorded states. Row `k` is the rate over the interval ending at state
/// `k + 1`.
pub fn switching_rate_trace(traj: &Trajectory, edges: &[EdgeId]) -> Result<SwitchingRates> {
    let positions = edges
        .iter()
        .map(|&id| traj.edge_position(id))
        .collect::<Result<Vec<_>>>()?;
    let st = states(traj);
    let mut times = Vec::new();
    let mut rates = Vec::new();
    for w in st.windows(2) {
        let dt = w[1].time - w[0].time;
        times.push(w[1].time);
        rates.push(
            positions
                .iter()
                .map(|&k| (w[1].resistances[k] - w[0].resistances[k]) / dt)
                .collect(),
        );
    }
    Ok(SwitchingRates {
        edges: edges.to_vec(),
        times,
        rates,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchingRates {
    pub edges: Vec<EdgeId>,
    pub times: Vec<f64>,
    /// `rates[k][j]`: rate of `edges[j]` at `times[k]` (ohm/s).
    pub rates: Vec<Vec<f64>>,
}

/// Time of the steepest resistance drop of each edge, `None` when it never
/// decreases.
pub fn peak_switching_times(rates: &SwitchingRates) -> Vec<Option<f64>> {
    (0..rates.edges.len())
        .map(|j| {
            let mut best: Option<(f64, f64)> = None;
            for (t, row) in rates.times.iter().zip(&rates.rates) {
                let r = row[j];
                if r < 0.0 && best.is_none_or(|(b, _)| r < b) {
                    best = Some((r, *t));
                }
            }
            best.map(|(_, t)| t)
        })
        .collect()
}
