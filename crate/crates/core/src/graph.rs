//! Viewpoint candidate generation and optimal sequencing over a layered DAG.
//!
//! Candidates live on per-step view spheres around the predicted target
//! positions. Consecutive layers are wired when the step distance fits
//! within `r_max`, edge weights combine travel distance with the
//! detectability cost of the head vertex, and unreachable vertices are
//! pruned layer by layer. Because every edge goes from layer i to layer
//! i+1, cumulative layer sizes give a topological order in closed form, so
//! the single-source shortest path needs only one relaxation sweep.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geom::Vec3;
use crate::{Error, Result};

/// Candidate viewpoints for one prediction step.
#[derive(Debug, Clone)]
pub struct ViewLayer {
    pub step: usize,
    pub target_position: Vec3,
    pub candidates: Vec<Vec3>,
    /// Detectability cost per candidate; `None` marks an occluded view.
    pub costs: Vec<Option<f64>>,
}

/// Points on the sphere of radius `r_d` around `target_pos`: one azimuth
/// ring at the given elevation angle, `a_k = 2*pi*k / azimuth_count`.
pub fn view_sphere(target_pos: Vec3, r_d: f64, azimuth_count: usize, elevation: f64) -> Vec<Vec3> {
    assert!(azimuth_count >= 1 && r_d > 0.0);
    assert!((0.0..std::f64::consts::FRAC_PI_2).contains(&elevation));
    let (sin_e, cos_e) = elevation.sin_cos();
    (0..azimuth_count)
        .map(|k| {
            let a = 2.0 * std::f64::consts::PI * k as f64 / azimuth_count as f64;
            target_pos + r_d * Vec3::new(cos_e * a.cos(), cos_e * a.sin(), sin_e)
        })
        .collect()
}

/// Layered DAG over reachable, unoccluded candidates.
///
/// Vertices are stored flat in layer-major order, which is exactly the
/// analytic topological order; `layer_sizes` are the post-pruning counts.
#[derive(Debug, Clone)]
pub struct LayeredDag {
    pub layer_sizes: Vec<usize>,
    /// Flat vertex positions, root first.
    pub positions: Vec<Vec3>,
    /// Detectability cost per flat vertex (0 for the root).
    pub detect_costs: Vec<f64>,
    /// Index of each vertex in its original candidate list (0 for the root).
    pub source_indices: Vec<usize>,
    /// Outgoing edges per flat vertex: (flat head index, weight).
    pub out_edges: Vec<Vec<(usize, f64)>>,
    pub edge_count: usize,
    pub r_max: f64,
    pub lambda: f64,
}

impl LayeredDag {
    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    fn layer_offset(&self, layer: usize) -> usize {
        self.layer_sizes[..layer].iter().sum()
    }
}

/// Wires consecutive layers under the step-distance limit and prunes
/// vertices unreachable from the root in a forward sweep.
///
/// Occluded candidates are dropped before wiring, which is equivalent to
/// giving their edges infinite weight. Edge weight is
/// `distance + lambda * detect_cost(head)`.
pub fn build_dag(root: Vec3, layers: &[ViewLayer], r_max: f64, lambda: f64) -> Result<LayeredDag> {
    assert!(!layers.is_empty() && r_max > 0.0 && lambda >= 0.0);
    let mut dag = LayeredDag {
        layer_sizes: vec![1],
        positions: vec![root],
        detect_costs: vec![0.0],
        source_indices: vec![0],
        out_edges: vec![Vec::new()],
        edge_count: 0,
        r_max,
        lambda,
    };

    // flat indices of the previous (already pruned) layer
    let mut prev: Vec<usize> = vec![0];
    for (li, layer) in layers.iter().enumerate() {
        let mut current = Vec::new();
        for (ci, (&pos, &cost)) in layer.candidates.iter().zip(&layer.costs).enumerate() {
            let Some(cost) = cost else { continue };
            let mut reachable = false;
            for &p in &prev {
                if (dag.positions[p] - pos).norm() <= r_max {
                    reachable = true;
                    break;
                }
            }
            if !reachable {
                continue;
            }
            let flat = dag.positions.len();
            dag.positions.push(pos);
            dag.detect_costs.push(cost);
            dag.source_indices.push(ci);
            dag.out_edges.push(Vec::new());
            for &p in &prev {
                let dist = (dag.positions[p] - pos).norm();
                if dist <= r_max {
                    dag.out_edges[p].push((flat, dist + lambda * cost));
                    dag.edge_count += 1;
                }
            }
            current.push(flat);
        }
        if current.is_empty() {
            return Err(Error::Infeasible { layer: li + 1 });
        }
        dag.layer_sizes.push(current.len());
        prev = current;
    }
    Ok(dag)
}

/// Closed-form topological index of vertex `j` of layer `i` (1-based `j`):
/// 1 for the root layer, otherwise the cumulative size of earlier layers
/// plus `j`. Bijective onto `{1, ..., |V|}` for a single-root DAG.
pub fn topological_index(layer_sizes: &[usize], layer: usize, j: usize) -> Result<usize> {
    if layer >= layer_sizes.len() || j < 1 || j > layer_sizes[layer] {
        return Err(Error::VertexOutOfRange { layer, index: j });
    }
    if layer == 0 {
        Ok(1)
    } else {
        Ok(layer_sizes[..layer].iter().sum::<usize>() + j)
    }
}

/// Optimal viewpoint sequence from the root through every layer.
#[derive(Debug, Clone)]
pub struct ViewpointPath {
    /// One viewpoint per step, root excluded.
    pub points: Vec<Vec3>,
    /// Original candidate index per step (into `ViewLayer::candidates`).
    pub candidate_indices: Vec<usize>,
    pub total_cost: f64,
    pub distance_sum: f64,
    pub detect_cost_sum: f64,
}

/// Single relaxation sweep in flat (= topological) vertex order, then
/// backtracks from the cheapest final-layer vertex.
///
/// Comparison is strictly-less, so ties keep the earliest-indexed
/// predecessor and the result is deterministic.
pub fn shortest_viewpoint_path(dag: &LayeredDag) -> ViewpointPath {
    let n = dag.vertex_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![usize::MAX; n];
    dist[0] = 0.0;
    for u in 0..n {
        if !dist[u].is_finite() {
            continue;
        }
        for &(v, w) in &dag.out_edges[u] {
            let cand = dist[u] + w;
            if cand < dist[v] {
                dist[v] = cand;
                pred[v] = u;
            }
        }
    }

    let last_layer = dag.layer_sizes.len() - 1;
    let first = dag.layer_offset(last_layer);
    let dest = (first..first + dag.layer_sizes[last_layer])
        .min_by(|&a, &b| dist[a].partial_cmp(&dist[b]).unwrap())
        .expect("final layer is nonempty by construction");

    let mut flat_path = Vec::new();
    let mut v = dest;
    while v != 0 {
        flat_path.push(v);
        v = pred[v];
    }
    flat_path.reverse();

    let mut distance_sum = 0.0;
    let mut detect_cost_sum = 0.0;
    let mut prev_pos = dag.positions[0];
    for &v in &flat_path {
        distance_sum += (dag.positions[v] - prev_pos).norm();
        detect_cost_sum += dag.detect_costs[v];
        prev_pos = dag.positions[v];
    }

    ViewpointPath {
        points: flat_path.iter().map(|&v| dag.positions[v]).collect(),
        candidate_indices: flat_path.iter().map(|&v| dag.source_indices[v]).collect(),
        total_cost: dist[dest],
        distance_sum,
        detect_cost_sum,
    }
}

// ---------------------------------------------------------------------------
// SSSP benchmark: analytic order vs generic DFS-based topological sort.

/// Fully wired layered DAG with uniform random weights, for benchmarking.
pub fn random_layered_graph(layer_count: usize, layer_width: usize, rng: &mut impl Rng) -> LayeredDag {
    assert!(layer_count >= 1 && layer_width >= 1);
    let mut dag = LayeredDag {
        layer_sizes: vec![1],
        positions: vec![Vec3::zeros()],
        detect_costs: vec![0.0],
        source_indices: vec![0],
        out_edges: vec![Vec::new()],
        edge_count: 0,
        r_max: f64::INFINITY,
        lambda: 0.0,
    };
    let mut prev: Vec<usize> = vec![0];
    for _ in 0..layer_count {
        let mut current = Vec::with_capacity(layer_width);
        for j in 0..layer_width {
            let flat = dag.positions.len();
            dag.positions.push(Vec3::zeros());
            dag.detect_costs.push(0.0);
            dag.source_indices.push(j);
            dag.out_edges.push(Vec::new());
            for &p in &prev {
                dag.out_edges[p].push((flat, rng.random_range(0.01..1.0)));
                dag.edge_count += 1;
            }
            current.push(flat);
        }
        prev = current;
    }
    dag
}

fn relax_in_order<'a>(
    out_edges: &[Vec<(usize, f64)>],
    order: impl Iterator<Item = &'a usize>,
) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; out_edges.len()];
    dist[0] = 0.0;
    for &u in order {
        if !dist[u].is_finite() {
            continue;
        }
        for &(v, w) in &out_edges[u] {
            let cand = dist[u] + w;
            if cand < dist[v] {
                dist[v] = cand;
            }
        }
    }
    dist
}

/// Distances via the analytic order: the flat vertex layout already is a
/// topological order, so relaxation runs straight over `0..n`.
pub fn sssp_analytic(dag: &LayeredDag) -> Vec<f64> {
    let n = dag.vertex_count();
    let mut dist = vec![f64::INFINITY; n];
    dist[0] = 0.0;
    for u in 0..n {
        if !dist[u].is_finite() {
            continue;
        }
        for &(v, w) in &dag.out_edges[u] {
            let cand = dist[u] + w;
            if cand < dist[v] {
                dist[v] = cand;
            }
        }
    }
    dist
}

/// Distances via a generic DFS-based topological sort followed by the
/// identical relaxation sweep.
pub fn sssp_dfs_sorted(dag: &LayeredDag) -> Vec<f64> {
    let order = dfs_topological_order(&dag.out_edges);
    relax_in_order(&dag.out_edges, order.iter())
}

/// Reverse-postorder DFS over all vertices, with an explicit stack.
fn dfs_topological_order(out_edges: &[Vec<(usize, f64)>]) -> Vec<usize> {
    let n = out_edges.len();
    let mut visited = vec![false; n];
    let mut postorder = Vec::with_capacity(n);
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for start in 0..n {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        stack.push((start, 0));
        while let Some(&(v, next_child)) = stack.last() {
            if next_child < out_edges[v].len() {
                stack.last_mut().unwrap().1 += 1;
                let child = out_edges[v][next_child].0;
                if !visited[child] {
                    visited[child] = true;
                    stack.push((child, 0));
                }
            } else {
                postorder.push(v);
                stack.pop();
            }
        }
    }
    postorder.reverse();
    postorder
}

/// One benchmark measurement.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub edges: usize,
    pub backend: &'static str,
    pub seconds: f64,
}

pub const BACKEND_ANALYTIC: &str = "analytic";
pub const BACKEND_DFS: &str = "dfs";

/// Times both SSSP backends on freshly generated random layered graphs and
/// checks they agree on every distance. Each trial reports the average
/// seconds per solve over enough repetitions to swamp timer noise.
pub fn bench_sssp(
    layer_count: usize,
    layer_width: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<BenchRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(trials * 2);
    for _ in 0..trials {
        let dag = random_layered_graph(layer_count, layer_width, &mut rng);
        let reps = (400_000 / (dag.edge_count + 1)).max(1);

        let start = Instant::now();
        let mut dist_a = Vec::new();
        for _ in 0..reps {
            dist_a = sssp_analytic(&dag);
        }
        let analytic_s = start.elapsed().as_secs_f64() / reps as f64;

        let start = Instant::now();
        let mut dist_b = Vec::new();
        for _ in 0..reps {
            dist_b = sssp_dfs_sorted(&dag);
        }
        let dfs_s = start.elapsed().as_secs_f64() / reps as f64;

        let mismatches = dist_a.iter().zip(&dist_b).filter(|(a, b)| a != b).count();
        if mismatches > 0 {
            return Err(Error::BackendMismatch(mismatches, dist_a.len()));
        }
        rows.push(BenchRow {
            edges: dag.edge_count,
            backend: BACKEND_ANALYTIC,
            seconds: analytic_s,
        });
        rows.push(BenchRow {
            edges: dag.edge_count,
            backend: BACKEND_DFS,
            seconds: dfs_s,
        });
    }
    Ok(rows)
}


#[cfg(test)]
mod tests {
    use super::test_support::*;
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn sphere_points_at_distance() {
        let target = Vec3::new(3.0, -2.0, 1.0);
        let pts = view_sphere(target, 5.0, 8, 0.35);
        assert_eq!(pts.len(), 8);
        for p in &pts {
            assert_relative_eq!((p - target).norm(), 5.0, epsilon = 1e-9);
            assert!(p.z > target.z);
        }
    }

    #[test]
    fn sphere_unit_azimuth_point() {
        let pts = view_sphere(Vec3::zeros(), 1.0, 6, 0.0);
        assert_relative_eq!(pts[0], Vec3::new(1.0, 0.0, 0.0), epsilon = 1e-12);
    }

    fn uniform_layers(targets: &[Vec3], r_d: f64, width: usize, cost: f64) -> Vec<ViewLayer> {
        targets
            .iter()
            .enumerate()
            .map(|(i, &t)| ViewLayer {
                step: i + 1,
                target_position: t,
                candidates: view_sphere(t, r_d, width, 0.0),
                costs: vec![Some(cost); width],
            })
            .collect()
    }

    #[test]
    fn unlimited_r_max_wires_completely() {
        let layers = uniform_layers(&[Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0)], 1.0, 4, 1.0);
        let dag = build_dag(Vec3::new(0.0, 0.0, 5.0), &layers, 1e9, 0.5).unwrap();
        assert_eq!(dag.layer_sizes, vec![1, 4, 4]);
        assert_eq!(dag.edge_count, 4 + 16);
    }

    #[test]
    fn prunes_unreachable_candidates() {
        // root inside the ring, offset so exactly two of six first-layer
        // candidates sit beyond r_max
        let layers = uniform_layers(&[Vec3::zeros(), Vec3::zeros()], 1.0, 6, 1.0);
        let root = Vec3::new(1.2, 0.5, 0.0);
        let dag = build_dag(root, &layers, 2.0, 0.0).unwrap();
        assert_eq!(dag.layer_sizes[1], 4);
        // second layer sees the surviving four within 2.0 of at least one
        assert_eq!(dag.layer_sizes[2], 6);
    }

    #[test]
    fn lambda_zero_weights_are_distances() {
        let layers = uniform_layers(&[Vec3::new(1.0, 0.0, 0.0)], 1.0, 3, 7.0);
        let root = Vec3::zeros();
        let dag = build_dag(root, &layers, 100.0, 0.0).unwrap();
        for (u, edges) in dag.out_edges.iter().enumerate() {
            for &(v, w) in edges {
                assert_relative_eq!(w, (dag.positions[v] - dag.positions[u]).norm(), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn occluded_candidates_are_dropped() {
        let mut layers = uniform_layers(&[Vec3::zeros()], 1.0, 4, 1.0);
        layers[0].costs[1] = None;
        layers[0].costs[3] = None;
        let dag = build_dag(Vec3::new(0.0, 0.0, 2.0), &layers, 1e9, 1.0).unwrap();
        assert_eq!(dag.layer_sizes[1], 2);
        assert_eq!(&dag.source_indices[1..], &[0, 2]);
    }

    #[test]
    fn infeasible_when_layer_empties() {
        let layers = uniform_layers(&[Vec3::zeros(), Vec3::new(50.0, 0.0, 0.0)], 1.0, 4, 1.0);
        match build_dag(Vec3::new(1.5, 0.0, 0.0), &layers, 2.0, 1.0) {
            Err(Error::Infeasible { layer }) => assert_eq!(layer, 2),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn topo_index_matches_closed_form() {
        let sizes = [1, 4, 6, 6];
        assert_eq!(topological_index(&sizes, 0, 1).unwrap(), 1);
        assert_eq!(topological_index(&sizes, 2, 1).unwrap(), 6);
        let total: usize = sizes.iter().sum();
        assert_eq!(topological_index(&sizes, 3, 6).unwrap(), total);
        assert!(topological_index(&sizes, 1, 5).is_err());
        assert!(topological_index(&sizes, 4, 1).is_err());
        assert!(topological_index(&sizes, 1, 0).is_err());
    }

    #[test]
    fn forced_single_path() {
        let layers = uniform_layers(
            &[Vec3::new(1.0, 0.0, 0.0), Vec3::new(2.0, 0.0, 0.0)],
            1.0,
            1,
            3.0,
        );
        let dag = build_dag(Vec3::zeros(), &layers, 1e9, 2.0).unwrap();
        let path = shortest_viewpoint_path(&dag);
        assert_eq!(path.points.len(), 2);
        assert_eq!(path.candidate_indices, vec![0, 0]);
        assert_relative_eq!(
            path.total_cost,
            path.distance_sum + 2.0 * path.detect_cost_sum,
            epsilon = 1e-12
        );
    }

    /// Handcrafted 2x2 instance with weights {root->a:1, root->b:5,
    /// a->c:1, a->d:10, b->c:1, b->d:1}; best is root,a,c with cost 2.
    #[test]
    fn two_by_two_hand_example() {
        let dag = LayeredDag {
            layer_sizes: vec![1, 2, 2],
            positions: vec![Vec3::zeros(); 5],
            detect_costs: vec![0.0; 5],
            source_indices: vec![0, 0, 1, 0, 1],
            out_edges: vec![
                vec![(1, 1.0), (2, 5.0)],
                vec![(3, 1.0), (4, 10.0)],
                vec![(3, 1.0), (4, 1.0)],
                vec![],
                vec![],
            ],
            edge_count: 6,
            r_max: f64::INFINITY,
            lambda: 0.0,
        };
        let path = shortest_viewpoint_path(&dag);
        assert_eq!(path.total_cost, 2.0);
        assert_eq!(path.candidate_indices, vec![0, 0]);
    }

    #[test]
    fn matches_brute_force_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..60 {
            let (root, layers, r_max) = random_instance(&mut rng, 6, 8);
            let Ok(dag) = build_dag(root, &layers, r_max, 1.0) else {
                continue;
            };
            let path = shortest_viewpoint_path(&dag);
            assert_eq!(path.total_cost, brute_force_best_cost(&dag));
        }
    }

    #[test]
    fn raising_lambda_never_raises_detect_cost() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let (root, layers, r_max) = random_instance(&mut rng, 5, 6);
            let mut last = f64::INFINITY;
            for lambda in [0.0, 0.5, 2.0, 10.0, 100.0] {
                let Ok(dag) = build_dag(root, &layers, r_max, lambda) else {
                    break;
                };
                let path = shortest_viewpoint_path(&dag);
                assert!(path.detect_cost_sum <= last + 1e-9);
                last = path.detect_cost_sum;
            }
        }
    }

    #[test]
    fn path_satisfies_both_constraints() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..20 {
            let (root, layers, r_max) = random_instance(&mut rng, 6, 8);
            let Ok(dag) = build_dag(root, &layers, r_max, 1.0) else {
                continue;
            };
            let path = shortest_viewpoint_path(&dag);
            let mut prev = root;
            for (point, layer) in path.points.iter().zip(&layers) {
                let r_d = (layers[0].candidates[0] - layers[0].target_position).norm();
                assert_relative_eq!((point - layer.target_position).norm(), r_d, epsilon = 1e-9);
                assert!((point - prev).norm() <= r_max + 1e-9);
                prev = *point;
            }
        }
    }

    #[test]
    fn sssp_backends_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (layers, width) in [(4, 3), (10, 8), (50, 5)] {
            let dag = random_layered_graph(layers, width, &mut rng);
            assert_eq!(sssp_analytic(&dag), sssp_dfs_sorted(&dag));
        }
        let rows = bench_sssp(10, 4, 2, 11).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.seconds > 0.0));
        assert_eq!(rows[0].edges, 4 + 9 * 16);
    }

    proptest! {
        /// Every generated edge goes from a lower to a higher analytic index.
        #[test]
        fn prop_analytic_order_is_topological(seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (root, layers, r_max) = random_instance(&mut rng, 6, 8);
            if let Ok(dag) = build_dag(root, &layers, r_max, 1.0) {
                // recover (layer, j) per flat vertex and compare indices
                let mut flat = 0usize;
                let mut index_of = vec![0usize; dag.vertex_count()];
                for (layer, &size) in dag.layer_sizes.iter().enumerate() {
                    for j in 1..=size {
                        index_of[flat] = topological_index(&dag.layer_sizes, layer, j).unwrap();
                        flat += 1;
                    }
                }
                for (u, edges) in dag.out_edges.iter().enumerate() {
                    for &(v, _) in edges {
                        prop_assert!(index_of[u] < index_of[v]);
                    }
                }
                // bijectivity onto 1..=|V|
                let mut seen = index_of.clone();
                seen.sort_unstable();
                prop_assert_eq!(seen, (1..=dag.vertex_count()).collect::<Vec<_>>());
            }
        }
    }
}
