//! Kirchhoff current-law solve of a network with fixed-potential nodes.
//!
//! Fixed nodes are eliminated (Dirichlet conditions), which leaves a
//! symmetric positive definite weighted Laplacian over the free nodes. It is
//! solved with Jacobi-preconditioned conjugate gradients, warm-started from
//! the previous solution when the same [`CircuitSolver`] is reused across
//! time steps.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::topology::{EdgeId, Network, NodeId};

/// Relative KCL residual the solver must reach, measured against
/// `max(|source_current|, MIN_CURRENT_SCALE)`.
pub const KCL_TOLERANCE: f64 = 1e-9;

/// Current scale floor (A) used in residual checks.
pub const MIN_CURRENT_SCALE: f64 = 1e-6;

// Internal stopping target, tighter than the contract.
const CG_TOLERANCE: f64 = 1e-12;

/// Ideal voltage sources: a set of nodes held at fixed potentials.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec {
    fixed: BTreeMap<NodeId, f64>,
}

impl SourceSpec {
    pub fn new(fixed: impl IntoIterator<Item = (NodeId, f64)>) -> Result<Self> {
        let fixed: BTreeMap<NodeId, f64> = fixed.into_iter().collect();
        if fixed.is_empty() {
            return Err(Error::TooFewSources { needed: 1, got: 0 });
        }
        if fixed.values().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("source potentials must be finite".into()));
        }
        Ok(Self { fixed })
    }

    /// `input` at `amplitude` volts, `output` grounded.
    pub fn pair(input: NodeId, output: NodeId, amplitude: f64) -> Result<Self> {
        if input == output {
            return Err(Error::InvalidConfig("input and output must differ".into()));
        }
        Self::new([(input, amplitude), (output, 0.0)])
    }

    pub fn fixed(&self) -> &BTreeMap<NodeId, f64> {
        &self.fixed
    }

    pub fn potential(&self, n: NodeId) -> Option<f64> {
        self.fixed.get(&n).copied()
    }

    /// Fixed node with the highest potential (smallest id on ties).
    pub fn input(&self) -> NodeId {
        let mut best = None;
        for (&n, &v) in &self.fixed {
            match best {
                Some((_, bv)) if bv >= v => {}
                _ => best = Some((n, v)),
            }
        }
        best.expect("at least one fixed node").0
    }
}

/// Node potentials and edge currents of one DC solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    /// Potential per node, indexed by node id. Nodes in components without a
    /// fixed node (allowed only by a lenient solver) read 0.
    pub potentials: Vec<f64>,
    /// Edge ids in network order.
    pub edge_ids: Vec<EdgeId>,
    /// Signed current per edge in its `from -> to` direction (A).
    pub edge_currents: Vec<f64>,
    /// Current delivered into the network at [`SourceSpec::input`] (A).
    pub source_current: f64,
    /// Largest KCL imbalance over free nodes (A).
    pub kcl_residual: f64,
}

impl SolveResult {
    pub fn current(&self, id: EdgeId) -> Result<f64> {
        self.edge_ids
            .binary_search(&id)
            .map(|k| self.edge_currents[k])
            .map_err(|_| Error::UnknownEdge(id))
    }

    /// Residual relative to the larger of the source current and 1 uA.
    pub fn relative_residual(&self) -> f64 {
        self.kcl_residual / self.source_current.abs().max(MIN_CURRENT_SCALE)
    }
}

/// Solves the network once, requiring every free node to be tied to a
/// fixed node.
pub fn solve_dc(net: &Network, src: &SourceSpec) -> Result<SolveResult> {
    let mut solver = CircuitSolver::new(net, src, FloatingPolicy::Reject)?;
    let conductances = unit_conductances(net)?;
    solver.solve(net, &conductances)
}

pub fn unit_conductances(net: &Network) -> Result<Vec<f64>> {
    net.edges()
        .iter()
        .map(|e| {
            let g = e.unit.conductance();
            if g.is_finite() && g > 0.0 {
                Ok(g)
            } else {
                Err(Error::NonFiniteConductance(e.id))
            }
        })
        .collect()
}

/// Signed currents through `section`, oriented so that positive means
/// flowing from the `input` side to the `output` side of the cut.
///
/// The side of each endpoint is read from the cut itself: with the section
/// edges removed, an endpoint is on the input side when it is still
/// connected to `input`.
pub fn cross_section_currents(
    net: &Network,
    result: &SolveResult,
    section: &[EdgeId],
    input: NodeId,
) -> Result<Vec<(EdgeId, f64)>> {
    let cut = net.remove_edges(section)?;
    let labels = cut.component_labels();
    section
        .iter()
        .map(|&id| {
            let e = net.edge(id)?;
            let i = result.current(id)?;
            let sign = if labels[e.from.0] == labels[input.0] { 1.0 } else { -1.0 };
            Ok((id, sign * i))
        })
        .collect()
}

/// What to do with nodes that share no component with a fixed node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FloatingPolicy {
    /// Report a singular system.
    Reject,
    /// Drop them from the solve; they carry no current.
    Ignore,
}

#[derive(Debug, Clone, Copy)]
enum Slot {
    Fixed(f64),
    Free(usize),
    Floating,
}

/// Reusable solver for a fixed topology and source set. Conductances may
/// change between calls.
#[derive(Debug, Clone)]
pub struct CircuitSolver {
    slots: Vec<Slot>,
    input: NodeId,
    n_free: usize,
    // CSR pattern of the free-node Laplacian.
    row_ptr: Vec<usize>,
    col: Vec<usize>,
    values: Vec<f64>,
    // Per edge: positions to stamp into `values`.
    stamps: Vec<EdgeStamp>,
    rhs: Vec<f64>,
    guess: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default)]
struct EdgeStamp {
    diag_from: Option<usize>,
    diag_to: Option<usize>,
    off_ft: Option<usize>,
    off_tf: Option<usize>,
}

impl CircuitSolver {
    pub fn new(net: &Network, src: &SourceSpec, policy: FloatingPolicy) -> Result<Self> {
        for &n in src.fixed().keys() {
            net.check_node(n)?;
        }
        let labels = net.component_labels();
        let mut anchored = vec![false; net.node_count()];
        for &n in src.fixed().keys() {
            anchored[labels[n.0]] = true;
        }
        let mut slots = Vec::with_capacity(net.node_count());
        let mut n_free = 0;
        for node in net.nodes() {
            let slot = if let Some(v) = src.potential(node.id) {
                Slot::Fixed(v)
            } else if anchored[labels[node.id.0]] {
                n_free += 1;
                Slot::Free(n_free - 1)
            } else if policy == FloatingPolicy::Ignore {
                Slot::Floating
            } else {
                return Err(Error::FloatingNode(node.id));
            };
            slots.push(slot);
        }

        // Sorted column lists per free row.
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n_free];
        for (u, slot) in slots.iter().enumerate() {
            if let Slot::Free(r) = *slot {
                rows[r].push(r);
                for &k in net.incident(NodeId(u)) {
                    if let Slot::Free(c) = slots[net.edges()[k].other(NodeId(u)).0] {
                        rows[r].push(c);
                    }
                }
            }
        }
        let mut row_ptr = Vec::with_capacity(n_free + 1);
        let mut col = Vec::new();
        row_ptr.push(0);
        for r in &mut rows {
            r.sort_unstable();
            r.dedup();
            col.extend_from_slice(r);
            row_ptr.push(col.len());
        }
        let find = |r: usize, c: usize| -> usize {
            let span = &col[row_ptr[r]..row_ptr[r + 1]];
            row_ptr[r] + span.binary_search(&c).expect("pattern contains entry")
        };
        let stamps = net
            .edges()
            .iter()
            .map(|e| {
                let (sf, st) = (slots[e.from.0], slots[e.to.0]);
                let mut s = EdgeStamp::default();
                if let Slot::Free(a) = sf {
                    s.diag_from = Some(find(a, a));
                }
                if let Slot::Free(b) = st {
                    s.diag_to = Some(find(b, b));
                }
                if let (Slot::Free(a), Slot::Free(b)) = (sf, st) {
                    s.off_ft = Some(find(a, b));
                    s.off_tf = Some(find(b, a));
                }
                s
            })
            .collect();
        let nnz = col.len();
        Ok(Self {
            slots,
            input: src.input(),
            n_free,
            row_ptr,
            col,
            values: vec![0.0; nnz],
            stamps,
            rhs: vec![0.0; n_free],
            guess: vec![0.0; n_free],
        })
    }

    pub fn free_count(&self) -> usize {
        self.n_free
    }

    /// Solves for the given per-edge conductances (network edge order).
    /// `net` must be the network the solver was built for.
    pub fn solve(&mut self, net: &Network, conductances: &[f64]) -> Result<SolveResult> {
        debug_assert_eq!(conductances.len(), net.edge_count());
        self.values.iter_mut().for_each(|v| *v = 0.0);
        self.rhs.iter_mut().for_each(|v| *v = 0.0);
        for ((e, s), &g) in net.edges().iter().zip(&self.stamps).zip(conductances) {
            if let Some(p) = s.diag_from {
                self.values[p] += g;
            }
            if let Some(p) = s.diag_to {
                self.values[p] += g;
            }
            if let Some(p) = s.off_ft {
                self.values[p] -= g;
            }
            if let Some(p) = s.off_tf {
                self.values[p] -= g;
            }
            match (self.slots[e.from.0], self.slots[e.to.0]) {
                (Slot::Free(a), Slot::Fixed(v)) => self.rhs[a] += g * v,
                (Slot::Fixed(v), Slot::Free(b)) => self.rhs[b] += g * v,
                _ => {}
            }
        }

        let scale = self.rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let target = CG_TOLERANCE * scale.max(MIN_CURRENT_SCALE);
        let x = self.pcg(target)?;
        self.guess.copy_from_slice(&x);

        let potentials: Vec<f64> = self
            .slots
            .iter()
            .map(|s| match *s {
                Slot::Fixed(v) => v,
                Slot::Free(r) => x[r],
                Slot::Floating => 0.0,
            })
            .collect();
        let edge_currents: Vec<f64> = net
            .edges()
            .iter()
            .zip(conductances)
            .map(|(e, &g)| match (self.slots[e.from.0], self.slots[e.to.0]) {
                (Slot::Floating, _) | (_, Slot::Floating) => 0.0,
                _ => (potentials[e.from.0] - potentials[e.to.0]) * g,
            })
            .collect();

        let mut imbalance = vec![0.0; net.node_count()];
        for (e, &i) in net.edges().iter().zip(&edge_currents) {
            imbalance[e.from.0] += i;
            imbalance[e.to.0] -= i;
        }
        let kcl_residual = self
            .slots
            .iter()
            .zip(&imbalance)
            .filter(|(s, _)| matches!(s, Slot::Free(_)))
            .fold(0.0f64, |m, (_, r)| m.max(r.abs()));
        Ok(SolveResult {
            potentials,
            edge_ids: net.edges().iter().map(|e| e.id).collect(),
            edge_currents,
            source_current: imbalance[self.input.0],
            kcl_residual,
        })
    }

    fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[p] * x[self.col[p]];
            }
            *out = acc;
        }
    }

    fn pcg(&self, target: f64) -> Result<Vec<f64>> {
        let n = self.n_free;
        let mut x = self.guess.clone();
        if n == 0 {
            return Ok(x);
        }
        let inv_diag: Vec<f64> = (0..n)
            .map(|r| {
                let span = self.row_ptr[r]..self.row_ptr[r + 1];
                let p = span
                    .clone()
                    .find(|&p| self.col[p] == r)
                    .expect("diagonal present");
                1.0 / self.values[p]
            })
            .collect();
        let mut ax = vec![0.0; n];
        self.matvec(&x, &mut ax);
        let mut r: Vec<f64> = self.rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let inf_norm = |v: &[f64]| v.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        if inf_norm(&r) <= target {
            return Ok(x);
        }
        let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, d)| a * d).collect();
        let mut p = z.clone();
        let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let mut ap = vec![0.0; n];
        let max_iter = 20 * n + 200;
        for it in 0..max_iter {
            self.matvec(&p, &mut ap);
            let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
            if pap <= 0.0 {
                return Err(Error::SolverStalled {
                    iterations: it,
                    residual: inf_norm(&r),
                });
            }
            let alpha = rz / pap;
            for k in 0..n {
                x[k] += alpha * p[k];
                r[k] -= alpha * ap[k];
            }
            // Refresh the recursive residual now and then to limit drift.
            if it % 50 == 49 {
                self.matvec(&x, &mut ax);
                for k in 0..n {
                    r[k] = self.rhs[k] - ax[k];
                }
            }
            if inf_norm(&r) <= target {
                self.matvec(&x, &mut ax);
                let true_res = self.rhs.iter().zip(&ax).fold(0.0f64, |m, (b, a)| m.max((b - a).abs()));
                if true_res <= target * 10.0 {
                    return Ok(x);
                }
                for k in 0..n {
                    r[k] = self.rhs[k] - ax[k];
                }
            }
            for k in 0..n {
                z[k] = r[k] * inv_diag[k];
            }
            let rz_next: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
            let beta = rz_next / rz;
            rz = rz_next;
            for k in 0..n {
                p[k] = z[k] + beta * p[k];
            }
        }
        Err(Error::SolverStalled {
            iterations: max_iter,
            residual: inf_norm(&r),
        })
    }
}
