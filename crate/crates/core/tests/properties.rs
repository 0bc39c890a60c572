use memnet::algorithms::{classify_on, solve_shortest_path, PathResult};
use memnet::analysis::entropy_of;
use memnet::circuit::{solve_dc, SourceSpec};
use memnet::device::DeviceParams;
use memnet::dynamics::{apply_pulse, PulseSpec, SimConfig};
use memnet::oracle::{all_shortest_paths, brute_force_tsp, dense_solve, dijkstra, Metric};
use memnet::topology::{EdgeId, Network, NodeId};
use proptest::prelude::*;

fn grid_with_states(rows: usize, cols: usize, states: &[(f64, f64)]) -> Network {
    let mut net = Network::grid(rows, cols, DeviceParams::default()).unwrap();
    for (e, &(a, b)) in net.edges_mut().iter_mut().zip(states.iter().cycle()) {
        e.unit.device_a.x = a;
        e.unit.device_b.x = b;
    }
    net
}

fn damaged_grid(rows: usize, cols: usize, holes: &[usize]) -> Network {
    let net = Network::grid(rows, cols, DeviceParams::default()).unwrap();
    let mut ids: Vec<EdgeId> = holes.iter().map(|&h| EdgeId(h % net.edge_count())).collect();
    ids.sort();
    ids.dedup();
    net.remove_edges(&ids).unwrap()
}

fn walk_weight(net: &Network, path: &[NodeId], metric: Metric) -> f64 {
    path.windows(2)
        .map(|w| metric.weight(net.edge(net.edge_between(w[0], w[1]).unwrap()).unwrap()))
        .sum()
}

/// Depth-first simple path from `a` to `b` that prefers the neighbour with
/// the largest id.
fn some_path(net: &Network, a: NodeId, b: NodeId) -> Option<Vec<NodeId>> {
    let mut seen = vec![false; net.node_count()];
    let mut stack = vec![vec![a]];
    while let Some(path) = stack.pop() {
        let u = *path.last().unwrap();
        if u == b {
            return Some(path);
        }
        if seen[u.0] {
            continue;
        }
        seen[u.0] = true;
        let mut next: Vec<NodeId> = net.incident_ids(u).map(|id| net.edge(id).unwrap().other(u)).collect();
        next.sort();
        for v in next {
            if !seen[v.0] {
                let mut p = path.clone();
                p.push(v);
                stack.push(p);
            }
        }
    }
    None
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn entropy_is_scale_invariant(
        v in prop::collection::vec(-1.0f64..1.0, 1..60),
        k in 1e-6f64..1e6,
    ) {
        prop_assume!(v.iter().any(|x| *x != 0.0));
        let a = entropy_of(v.iter().copied()).unwrap();
        let b = entropy_of(v.iter().map(|x| x * k)).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
        prop_assert!(a >= 0.0 && a <= (v.len() as f64).ln() + 1e-12);
    }

    #[test]
    fn sparse_matches_dense(
        rows in 2usize..8,
        cols in 2usize..8,
        states in prop::collection::vec((10.0f64..=200.0, 10.0f64..=200.0), 1..40),
        a in 0usize..64,
        b in 0usize..64,
        v in 0.1f64..20.0,
    ) {
        let net = grid_with_states(rows, cols, &states);
        let n = net.node_count();
        let (a, b) = (NodeId(a % n), NodeId(b % n));
        prop_assume!(a != b);
        let src = SourceSpec::pair(a, b, v).unwrap();
        let s = solve_dc(&net, &src).unwrap();
        let d = dense_solve(&net, &src).unwrap();
        let scale = d.source_current.abs();
        for (x, y) in s.edge_currents.iter().zip(&d.edge_currents) {
            prop_assert!((x - y).abs() <= 1e-9 * scale);
        }
        prop_assert!(s.relative_residual() <= 1e-9);
        // swapping the terminals reverses every current
        let r = solve_dc(&net, &SourceSpec::pair(b, a, v).unwrap()).unwrap();
        for (x, y) in s.edge_currents.iter().zip(&r.edge_currents) {
            prop_assert!((x + y).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn dijkstra_is_a_lower_bound(
        rows in 2usize..9,
        cols in 2usize..9,
        holes in prop::collection::vec(0usize..200, 0..12),
        a in 0usize..81,
        b in 0usize..81,
    ) {
        let net = damaged_grid(rows, cols, &holes);
        let n = net.node_count();
        let (a, b) = (NodeId(a % n), NodeId(b % n));
        prop_assume!(a != b && net.connected(a, b).unwrap());
        for metric in [Metric::HopCount, Metric::GeometricLength] {
            let best = dijkstra(&net, a, b, metric).unwrap();
            let other = some_path(&net, a, b).unwrap();
            prop_assert!(best.weight <= walk_weight(&net, &other, metric) + 1e-9);
            let (all, _) = all_shortest_paths(&net, a, b, metric, 16).unwrap();
            for p in all {
                prop_assert!((p.weight - best.weight).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn exact_tour_beats_identity_order(
        points in prop::collection::vec((0.0f64..10.0, 0.0f64..10.0), 3..9),
    ) {
        let d: Vec<Vec<f64>> = points
            .iter()
            .map(|p| points.iter().map(|q| ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt()).collect())
            .collect();
        let (order, len) = brute_force_tsp(&d).unwrap();
        let n = d.len();
        let identity: f64 = (0..n).map(|k| d[k][(k + 1) % n]).sum();
        prop_assert!(len <= identity + 1e-9);
        let mut sorted = order.clone();
        sorted.sort();
        prop_assert_eq!(sorted, (0..n).collect::<Vec<_>>());
        let walked: f64 = (0..n).map(|k| d[order[k]][order[(k + 1) % n]]).sum();
        prop_assert!((walked - len).abs() <= 1e-9);
    }

    #[test]
    fn random_networks_are_reproducible(seed in 0u64..1000) {
        let a = Network::random(6, seed, DeviceParams::default()).unwrap();
        let b = Network::random(6, seed, DeviceParams::default()).unwrap();
        prop_assert_eq!(a.node_count(), b.node_count());
        prop_assert_eq!(a.edges().len(), b.edges().len());
        for (x, y) in a.nodes().iter().zip(b.nodes()) {
            prop_assert_eq!(x.position, y.position);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn states_stay_in_bounds_and_on_set_is_a_superset_of_paths(
        rows in 3usize..7,
        cols in 3usize..7,
        v in 2.0f64..12.0,
        a in 0usize..49,
        b in 0usize..49,
    ) {
        let mut net = Network::grid(rows, cols, DeviceParams::default()).unwrap();
        let n = net.node_count();
        let (a, b) = (NodeId(a % n), NodeId(b % n));
        prop_assume!(a != b);
        let cfg = SimConfig { record_stride: 0, max_steps: 20_000, ..SimConfig::default() };
        let t = apply_pulse(&mut net, &PulseSpec::steady(a, b, v), &cfg).unwrap();
        prop_assert!(t.max_relative_residual <= 1e-9);
        let p = DeviceParams::default();
        for e in net.edges() {
            for d in [e.unit.device_a, e.unit.device_b] {
                prop_assert!(d.x >= p.r_on && d.x <= p.r_off);
            }
        }
        let r = PathResult::read(&net, a, b).unwrap();
        let on = classify_on(&net);
        for id in r.path_edges.iter().flatten() {
            prop_assert!(on.contains(id));
        }
        let hop = dijkstra(&net, a, b, Metric::HopCount).unwrap().edges.len();
        for &h in &r.hop_counts {
            prop_assert!(h >= hop);
        }
    }
}

#[test]
fn halving_dt_barely_moves_the_grid_path_state() {
    let run = |dt: f64| {
        let mut net = Network::grid(11, 11, DeviceParams::default()).unwrap();
        let g = net.grid_shape().unwrap();
        let cfg = SimConfig { dt, record_stride: 0, ..SimConfig::default() };
        solve_shortest_path(&mut net, g.node(5, 0), g.node(5, 10), 6.0, &cfg).unwrap();
        net.unit_resistances()
    };
    let p = DeviceParams::default();
    let range = p.r_off - p.r_on;
    let (coarse, fine) = (run(1e-4), run(5e-5));
    let worst = coarse
        .iter()
        .zip(&fine)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0f64, f64::max);
    assert!(worst < 0.01 * range, "max change {worst}");
}
