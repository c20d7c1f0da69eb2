//! Random multipartite graph discretization of the control space and
//! with-replacement path sampling.

use ndarray::{Array2, Array3, ArrayView3};
use rand::distr::{Distribution, Uniform};
use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::spline::{self, Interpolation};
use crate::types::{ControlLimits, ControlTrajectoryBatch};
use crate::PlannerRng;

/// `M` layers of `N` control waypoints drawn uniformly from the control box.
#[derive(Debug, Clone, PartialEq)]
pub struct WaypointTensor {
    /// Shaped `(layers, nodes, dim)`.
    pub values: Array3<f64>,
    pub limits: ControlLimits,
}

impl WaypointTensor {
    pub fn layers(&self) -> usize {
        self.values.dim().0
    }

    pub fn nodes(&self) -> usize {
        self.values.dim().1
    }

    pub fn dim(&self) -> usize {
        self.values.dim().2
    }
}

/// Layer-local node indices of sampled paths, shaped `(paths, layers)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathIndexBatch {
    pub indices: Array2<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledWaypointBatch {
    /// Shaped `(paths, layers, dim)`.
    pub values: Array3<f64>,
    pub indices: PathIndexBatch,
}

pub fn sample_waypoint_tensor<R: Rng + ?Sized>(
    layers: usize,
    nodes: usize,
    limits: &ControlLimits,
    rng: &mut R,
) -> Result<WaypointTensor> {
    if layers < 2 {
        return Err(Error::TooFew {
            kind: "graph layers",
            need: "at least 2".into(),
            got: layers,
        });
    }
    if nodes < 1 {
        return Err(Error::TooFew {
            kind: "graph nodes per layer",
            need: "at least 1".into(),
            got: nodes,
        });
    }
    let dim = limits.dim();
    let dists: Vec<Uniform<f64>> = limits
        .lo()
        .iter()
        .zip(limits.hi())
        .enumerate()
        .map(|(d, (&lo, &hi))| Uniform::new(lo, hi).map_err(|_| Error::InvalidLimits { dim: d, lo, hi }))
        .collect::<Result<_>>()?;
    let mut values = Array3::zeros((layers, nodes, dim));
    for i in 0..layers {
        for j in 0..nodes {
            for (k, dist) in dists.iter().enumerate() {
                values[[i, j, k]] = dist.sample(rng);
            }
        }
    }
    Ok(WaypointTensor {
        values,
        limits: limits.clone(),
    })
}

/// Draws `paths` index rows uniformly with replacement.
///
/// One key is taken from `rng`; row `b` is then generated from its own ChaCha
/// stream `b` under that key, so the result does not depend on the order in
/// which rows are produced.
pub fn sample_path_indices<R: Rng + ?Sized>(paths: usize, layers: usize, nodes: usize, rng: &mut R) -> PathIndexBatch {
    let key = rng.next_u64();
    let mut indices = Array2::zeros((paths, layers));
    for (b, mut row) in indices.rows_mut().into_iter().enumerate() {
        let mut stream = PlannerRng::seed_from_u64(key);
        stream.set_stream(b as u64);
        for idx in row.iter_mut() {
            *idx = stream.random_range(0..nodes);
        }
    }
    PathIndexBatch { indices }
}

/// Gathers `Z[i, I[b, i], :]` into a `(paths, layers, dim)` batch.
pub fn gather_paths(tensor: &WaypointTensor, indices: PathIndexBatch) -> SampledWaypointBatch {
    let (paths, layers) = indices.indices.dim();
    let dim = tensor.dim();
    let mut values = Array3::zeros((paths, layers, dim));
    for b in 0..paths {
        for i in 0..layers {
            let j = indices.indices[[b, i]];
            for k in 0..dim {
                values[[b, i, k]] = tensor.values[[i, j, k]];
            }
        }
    }
    SampledWaypointBatch { values, indices }
}

pub fn sample_paths<R: Rng + ?Sized>(tensor: &WaypointTensor, paths: usize, rng: &mut R) -> SampledWaypointBatch {
    let indices = sample_path_indices(paths, tensor.layers(), tensor.nodes(), rng);
    gather_paths(tensor, indices)
}

/// Interpolates sampled waypoints into `(paths, horizon, dim)` controls and
/// clamps them to `limits`.
pub fn interpolate_controls(
    waypoints: ArrayView3<'_, f64>,
    method: Interpolation,
    horizon: usize,
    limits: &ControlLimits,
) -> Result<ControlTrajectoryBatch> {
    if waypoints.dim().2 != limits.dim() {
        return Err(Error::Shape(format!(
            "waypoints have dim {}, limits have {}",
            waypoints.dim().2,
            limits.dim()
        )));
    }
    if waypoints.dim().0 == 0 {
        return Ok(Array3::zeros((0, horizon, limits.dim())));
    }
    let mut out = spline::interpolate(waypoints, method, horizon)?;
    limits.clamp_batch(&mut out);
    Ok(out)
}

/// Graph draw, path sampling, and interpolation in one call.
pub fn tensor_sample<R: Rng + ?Sized>(
    layers: usize,
    nodes: usize,
    paths: usize,
    method: Interpolation,
    horizon: usize,
    limits: &ControlLimits,
    rng: &mut R,
) -> Result<ControlTrajectoryBatch> {
    let tensor = sample_waypoint_tensor(layers, nodes, limits, rng)?;
    let sampled = sample_paths(&tensor, paths, rng);
    interpolate_controls(sampled.values.view(), method, horizon, limits)
}
