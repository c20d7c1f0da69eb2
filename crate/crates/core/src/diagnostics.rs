//! Rollout-cost entropy, sampling-distribution entropies, and empirical path
//! coverage of random multipartite graphs.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use ndarray::{Array2, ArrayView2};
use rand::Rng;

use crate::error::{Error, Result};
use crate::tensor::{sample_waypoint_tensor, PathIndexBatch, WaypointTensor};
use crate::types::ControlLimits;

/// Shannon entropy (nats) of `P_j = exp(J_j) / sum_l exp(J_l)`.
///
/// The costs enter with a positive sign. Infinite costs are dropped before
/// normalizing; an empty or all-infinite vector has entropy 0.
pub fn cost_entropy(costs: &[f64]) -> f64 {
    let finite: Vec<f64> = costs.iter().copied().filter(|c| c.is_finite()).collect();
    let Some(max) = finite.iter().copied().reduce(f64::max) else {
        return 0.0;
    };
    let e: Vec<f64> = finite.iter().map(|&j| (j - max).exp()).collect();
    let z: f64 = e.iter().sum();
    let h = -e
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| {
            let p = v / z;
            p * p.ln()
        })
        .sum::<f64>();
    h.clamp(0.0, (finite.len() as f64).ln())
}

/// Entropy of the uniform distribution over the `N^M` graph paths.
pub fn tensor_entropy(layers: usize, nodes: usize) -> f64 {
    layers as f64 * (nodes as f64).ln()
}

/// Differential entropy of a diagonal Gaussian over a whole `T x n` sequence.
pub fn gaussian_path_entropy(std: ArrayView2<'_, f64>) -> Result<f64> {
    if std.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
        return Err(Error::Config("gaussian entropy needs positive finite std".into()));
    }
    let dim = std.len() as f64;
    Ok(0.5 * dim * (1.0 + (2.0 * PI).ln()) + std.iter().map(|s| s.ln()).sum::<f64>())
}

/// Plug-in entropy of the observed index sequences with the Miller-Madow
/// bias correction `(K - 1) / 2n`, `K` being the number of distinct sequences.
pub fn path_index_entropy(paths: &PathIndexBatch) -> f64 {
    let n = paths.indices.nrows();
    if n == 0 {
        return 0.0;
    }
    let mut counts: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for row in paths.indices.rows() {
        *counts.entry(row.to_vec()).or_default() += 1;
    }
    let total = n as f64;
    let plug_in = -counts
        .values()
        .map(|&c| {
            let p = c as f64 / total;
            p * p.ln()
        })
        .sum::<f64>();
    plug_in + (counts.len() as f64 - 1.0) / (2.0 * total)
}

/// Largest per-draw path count that is enumerated exhaustively.
pub const EXHAUSTIVE_PATH_CAP: usize = 4096;

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn check_target(tensor: &WaypointTensor, target: ArrayView2<'_, f64>) -> Result<()> {
    if target.dim() != (tensor.layers(), tensor.dim()) {
        return Err(Error::Shape(format!(
            "target {:?} vs graph layers {} and dim {}",
            target.dim(),
            tensor.layers(),
            tensor.dim()
        )));
    }
    Ok(())
}

fn node(tensor: &WaypointTensor, i: usize, j: usize) -> Vec<f64> {
    tensor.values.slice(ndarray::s![i, j, ..]).to_vec()
}

/// `min` over every graph path of `max` over layers of the L-inf distance to
/// `target` (one row per layer), by enumerating all `N^M` paths.
pub fn coverage_distance_exhaustive(tensor: &WaypointTensor, target: ArrayView2<'_, f64>) -> Result<f64> {
    check_target(tensor, target)?;
    let (m, n) = (tensor.layers(), tensor.nodes());
    let dist: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let g = target.row(i).to_vec();
            (0..n).map(|j| linf(&node(tensor, i, j), &g)).collect()
        })
        .collect();
    let mut path = vec![0usize; m];
    let mut best = f64::INFINITY;
    loop {
        let d = path.iter().enumerate().map(|(i, &j)| dist[i][j]).fold(0.0, f64::max);
        best = best.min(d);
        // odometer increment
        let mut i = m;
        loop {
            if i == 0 {
                return Ok(best);
            }
            i -= 1;
            path[i] += 1;
            if path[i] < n {
                break;
            }
            path[i] = 0;
        }
    }
}

/// Same quantity as [`coverage_distance_exhaustive`], using the nearest node in
/// each layer independently.
pub fn coverage_distance_layerwise(tensor: &WaypointTensor, target: ArrayView2<'_, f64>) -> Result<f64> {
    check_target(tensor, target)?;
    Ok((0..tensor.layers())
        .map(|i| {
            let g = target.row(i).to_vec();
            (0..tensor.nodes())
                .map(|j| linf(&node(tensor, i, j), &g))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max))
}

/// Samples a continuous target at the `M` uniform layer times `i / (M - 1)`.
pub fn target_at_layers(layers: usize, f: impl Fn(f64) -> Vec<f64>) -> Result<Array2<f64>> {
    if layers < 2 {
        return Err(Error::TooFew {
            kind: "graph layers",
            need: "at least 2".into(),
            got: layers,
        });
    }
    let rows: Vec<Vec<f64>> = (0..layers).map(|i| f(i as f64 / (layers - 1) as f64)).collect();
    let dim = rows[0].len();
    if rows.iter().any(|r| r.len() != dim) {
        return Err(Error::Shape("target dimension varies with time".into()));
    }
    Array2::from_shape_vec((layers, dim), rows.concat()).map_err(|e| Error::Shape(e.to_string()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub target: String,
    pub layers: usize,
    pub nodes: usize,
    /// Min distance for each graph draw, in draw order.
    pub distances: Vec<f64>,
    pub median: f64,
    pub min: f64,
    /// Whether every draw was computed by full path enumeration.
    pub exhaustive: bool,
}

impl CoverageReport {
    pub const CSV_HEADER: &'static str = "target,layers,nodes,draws,median,min,exhaustive";

    pub fn draws(&self) -> usize {
        self.distances.len()
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.target,
            self.layers,
            self.nodes,
            self.draws(),
            self.median,
            self.min,
            self.exhaustive
        )
    }
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    if v.len() % 2 == 1 {
        v[k]
    } else {
        0.5 * (v[k - 1] + v[k])
    }
}

/// Draws `draws` fresh graphs and records how closely the best path in each
/// tracks `target` at the layer times.
pub fn empirical_coverage<R: Rng + ?Sized>(
    description: &str,
    target: ArrayView2<'_, f64>,
    nodes: usize,
    draws: usize,
    limits: &ControlLimits,
    rng: &mut R,
) -> Result<CoverageReport> {
    let layers = target.nrows();
    if draws == 0 {
        return Err(Error::Config("coverage needs at least one graph draw".into()));
    }
    let exhaustive = (nodes as f64).powi(layers as i32) <= EXHAUSTIVE_PATH_CAP as f64;
    let mut distances = Vec::with_capacity(draws);
    for _ in 0..draws {
        let tensor = sample_waypoint_tensor(layers, nodes, limits, rng)?;
        distances.push(if exhaustive {
            coverage_distance_exhaustive(&tensor, target)?
        } else {
            coverage_distance_layerwise(&tensor, target)?
        });
    }
    Ok(CoverageReport {
        target: description.to_string(),
        layers,
        nodes,
        median: median(&distances),
        min: distances.iter().copied().fold(f64::INFINITY, f64::min),
        distances,
        exhaustive,
    })
}

/// Per-step cost entropy with a fingerprint of the cost vector it came from.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EntropyTrace {
    pub entries: Vec<EntropyEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyEntry {
    pub step: usize,
    pub entropy: f64,
    pub cost_hash: u64,
}

impl EntropyTrace {
    pub const CSV_HEADER: &'static str = "step,entropy,cost_hash";

    pub fn record(&mut self, step: usize, costs: &[f64]) {
        self.entries.push(EntropyEntry {
            step,
            entropy: cost_entropy(costs),
            cost_hash: hash_costs(costs),
        });
    }

    pub fn mean(&self) -> f64 {
        if self.entries.is_empty() {
            return 0.0;
        }
        self.entries.iter().map(|e| e.entropy).sum::<f64>() / self.entries.len() as f64
    }

    pub fn csv_rows(&self) -> impl Iterator<Item = String> + '_ {
        self.entries
            .iter()
            .map(|e| format!("{},{},{:016x}", e.step, e.entropy, e.cost_hash))
    }
}

/// FNV-1a over the IEEE bit patterns; stable across platforms and releases.
pub fn hash_costs(costs: &[f64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for c in costs {
        for byte in c.to_bits().to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::sample_path_indices;
    use crate::PlannerRng;
    use approx::assert_abs_diff_eq;
    use ndarray::{array, Array3};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn uniform_costs_have_max_entropy() {
        assert_abs_diff_eq!(cost_entropy(&[3.5; 64]), 64f64.ln(), epsilon = 1e-9);
    }

    #[test]
    fn dominant_cost_gives_delta() {
        assert!(cost_entropy(&[0.0, 0.0, 100.0]) < 1e-10);
    }

    #[test]
    fn two_cost_entropy_is_analytic() {
        let h = cost_entropy(&[0.0, 3f64.ln()]);
        assert_abs_diff_eq!(h, 4f64.ln() - 0.75 * 3f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(h, 0.5623351446188083, epsilon = 1e-12);
    }

    #[test]
    fn infinite_costs_are_dropped() {
        assert_eq!(cost_entropy(&[1.0, f64::INFINITY, 1.0]), cost_entropy(&[1.0, 1.0]));
        assert_eq!(cost_entropy(&[f64::INFINITY]), 0.0);
    }

    #[test]
    fn tensor_entropy_values() {
        assert_eq!(tensor_entropy(7, 1), 0.0);
        assert_abs_diff_eq!(tensor_entropy(2, 3), 2.1972245773362196, epsilon = 1e-12);
    }

    #[test]
    fn unit_gaussian_entropy() {
        let (t, n) = (4, 3);
        let h = gaussian_path_entropy(Array2::ones((t, n)).view()).unwrap();
        assert_abs_diff_eq!(h, 6.0 * (1.0 + (2.0 * PI).ln()), epsilon = 1e-12);
        let h2 = gaussian_path_entropy(Array2::from_elem((t, n), 2.0).view()).unwrap();
        assert_abs_diff_eq!(h2 - h, 12.0 * 2f64.ln(), epsilon = 1e-12);
        assert!(gaussian_path_entropy(array![[0.0]].view()).is_err());
    }

    #[test]
    fn gaussian_entropy_matches_monte_carlo() {
        // -E[ln p(x)] over 1e6 samples of a T=2, n=1 diagonal Gaussian.
        let std = array![[0.3], [1.7]];
        let mut rng = PlannerRng::seed_from_u64(13);
        let norm = Normal::new(0.0, 1.0).unwrap();
        let samples = 1_000_000;
        let mut acc = 0.0;
        for _ in 0..samples {
            let mut lp = 0.0;
            for s in std.iter() {
                let x: f64 = s * norm.sample(&mut rng);
                lp += -0.5 * (x / s).powi(2) - s.ln() - 0.5 * (2.0 * PI).ln();
            }
            acc -= lp;
        }
        let mc = acc / samples as f64;
        let closed = gaussian_path_entropy(std.view()).unwrap();
        assert!((mc - closed).abs() < 0.01 * closed.abs(), "mc={mc} closed={closed}");
    }

    #[test]
    fn index_entropy_close_to_m_ln_n() {
        let idx = sample_path_indices(100_000, 2, 4, &mut PlannerRng::seed_from_u64(21));
        let h = path_index_entropy(&idx);
        let expected = 2.0 * 4f64.ln();
        assert!((h - expected).abs() < 0.02 * expected, "h={h}");
    }

    fn tensor_from(values: Array3<f64>) -> WaypointTensor {
        let dim = values.dim().2;
        WaypointTensor {
            values,
            limits: ControlLimits::symmetric(dim, 1.0).unwrap(),
        }
    }

    #[test]
    fn planted_target_has_zero_distance() {
        let limits = ControlLimits::symmetric(2, 1.0).unwrap();
        let z = sample_waypoint_tensor(4, 3, &limits, &mut PlannerRng::seed_from_u64(1)).unwrap();
        let picks = [2usize, 0, 1, 1];
        let target = Array2::from_shape_fn((4, 2), |(i, k)| z.values[[i, picks[i], k]]);
        assert_eq!(coverage_distance_exhaustive(&z, target.view()).unwrap(), 0.0);
        assert_eq!(coverage_distance_layerwise(&z, target.view()).unwrap(), 0.0);
    }

    #[test]
    fn single_node_distance_is_worst_layer() {
        let z = tensor_from(array![[[0.5, -0.5]], [[0.1, 0.2]]]);
        let target = array![[0.2, 0.2], [0.2, 0.2]];
        // layer 0: max(0.3, 0.7) = 0.7; layer 1: max(0.1, 0.0) = 0.1
        assert_abs_diff_eq!(
            coverage_distance_exhaustive(&z, target.view()).unwrap(),
            0.7,
            epsilon = 1e-15
        );
    }

    #[test]
    fn coverage_report_flags_enumeration() {
        let limits = ControlLimits::symmetric(2, 1.0).unwrap();
        let f = |t: f64| vec![0.5 * (2.0 * PI * t).sin(), 0.5 * (2.0 * PI * t).cos()];
        let small = target_at_layers(3, f).unwrap();
        let r = empirical_coverage("circle", small.view(), 4, 5, &limits, &mut PlannerRng::seed_from_u64(0)).unwrap();
        assert!(r.exhaustive);
        assert_eq!(r.draws(), 5);
        assert!(r.min <= r.median);
        let big = target_at_layers(9, f).unwrap();
        let r = empirical_coverage("circle", big.view(), 64, 2, &limits, &mut PlannerRng::seed_from_u64(0)).unwrap();
        assert!(!r.exhaustive);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn entropy_trace_hash_is_stable() {
        let mut t = EntropyTrace::default();
        t.record(0, &[1.0, 2.0]);
        t.record(1, &[1.0, 2.0]);
        assert_eq!(t.entries[0].cost_hash, t.entries[1].cost_hash);
        assert_ne!(hash_costs(&[1.0, 2.0]), hash_costs(&[2.0, 1.0]));
        assert_eq!(t.csv_rows().count(), 2);
    }

    proptest! {
        #[test]
        fn cost_entropy_bounded(costs in proptest::collection::vec(-1e300f64..1e300, 1..128)) {
            let h = cost_entropy(&costs);
            prop_assert!(h >= 0.0 && h <= (costs.len() as f64).ln() + 1e-12);
        }

        #[test]
        fn tensor_entropy_additive(m1 in 1usize..20, m2 in 1usize..20, n in 1usize..100) {
            let lhs = tensor_entropy(m1 + m2, n);
            let rhs = tensor_entropy(m1, n) + tensor_entropy(m2, n);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        }

        #[test]
        fn layerwise_equals_exhaustive(seed in 0u64..1000, m in 2usize..5, n in 1usize..5) {
            let limits = ControlLimits::symmetric(2, 1.0).unwrap();
            let mut rng = PlannerRng::seed_from_u64(seed);
            let z = sample_waypoint_tensor(m, n, &limits, &mut rng).unwrap();
            let t = sample_waypoint_tensor(m, 1, &limits, &mut rng).unwrap();
            let target = t.values.index_axis(ndarray::Axis(1), 0).to_owned();
            prop_assert_eq!(
                coverage_distance_exhaustive(&z, target.view()).unwrap(),
                coverage_distance_layerwise(&z, target.view()).unwrap()
            );
        }
    }
}
