//! Batched control interpolation kernels.
//!
//! All kernels map a batch of waypoints shaped `(batch, layers, dim)` to control
//! trajectories shaped `(batch, horizon, dim)`, evaluated at times `t_j = j / T`
//! for `j in 0..T` on the normalized interval `[0, 1)`.

use ndarray::{Array2, Array3, Array4, ArrayView3, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Interpolation applied to sampled graph paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Interpolation {
    Linear,
    #[serde(rename = "bspline")]
    BSpline {
        degree: usize,
    },
    Akima,
}

impl Interpolation {
    /// Checks the layer and horizon requirements of this kernel.
    pub fn validate(&self, layers: usize, horizon: usize) -> Result<()> {
        if layers < 2 {
            return Err(Error::TooFew {
                kind: "interpolation layers",
                need: "at least 2".into(),
                got: layers,
            });
        }
        match *self {
            Interpolation::Linear if horizon < layers => Err(Error::TooFew {
                kind: "linear interpolation horizon",
                need: format!("at least the layer count {layers}"),
                got: horizon,
            }),
            Interpolation::BSpline { degree } if layers <= degree => Err(Error::TooFew {
                kind: "B-spline layers",
                need: format!("more than the degree {degree}"),
                got: layers,
            }),
            _ if horizon < 2 && matches!(self, Interpolation::BSpline { .. }) => Err(Error::TooFew {
                kind: "B-spline horizon",
                need: "at least 2".into(),
                got: horizon,
            }),
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Interpolation::Linear => "linear".into(),
            Interpolation::BSpline { degree } => format!("bspline{degree}"),
            Interpolation::Akima => "akima".into(),
        }
    }
}

/// Non-decreasing knot times on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotSequence {
    knots: Vec<f64>,
}

impl KnotSequence {
    /// Unclamped uniform knots for `layers` B-spline basis functions of `degree`:
    /// `layers + degree + 1` knots `t_i = i / (layers + degree)`.
    pub fn bspline(layers: usize, degree: usize) -> Result<Self> {
        if layers <= degree {
            return Err(Error::TooFew {
                kind: "B-spline layers",
                need: format!("more than the degree {degree}"),
                got: layers,
            });
        }
        let last = (layers + degree) as f64;
        Ok(Self {
            knots: (0..=layers + degree).map(|i| i as f64 / last).collect(),
        })
    }

    /// One knot per layer, `t_i = i / (layers - 1)`.
    pub fn uniform(layers: usize) -> Result<Self> {
        if layers < 2 {
            return Err(Error::TooFew {
                kind: "knot layers",
                need: "at least 2".into(),
                got: layers,
            });
        }
        let last = (layers - 1) as f64;
        Ok(Self {
            knots: (0..layers).map(|i| i as f64 / last).collect(),
        })
    }

    pub fn from_vec(knots: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 || knots.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::Config(
                "knots must contain at least two non-decreasing values".into(),
            ));
        }
        Ok(Self { knots })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.knots
    }

    pub fn len(&self) -> usize {
        self.knots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.knots.is_empty()
    }
}

/// Evaluation times `j / T` for `j in 0..T`.
pub fn eval_times(horizon: usize) -> Vec<f64> {
    (0..horizon).map(|j| j as f64 / horizon as f64).collect()
}

/// B-spline basis values `B_{i,p}(t_j)` for `i in 0..M`, `j in 0..T`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineBasisMatrix {
    pub values: Array2<f64>,
    pub degree: usize,
    pub knots: KnotSequence,
    pub eval_times: Vec<f64>,
}

impl SplineBasisMatrix {
    pub fn layers(&self) -> usize {
        self.values.nrows()
    }

    pub fn horizon(&self) -> usize {
        self.values.ncols()
    }

    /// Half-open span `[t_p, t_M)` on which the `M` basis functions sum to one.
    pub fn interior_span(&self) -> (f64, f64) {
        let k = self.knots.as_slice();
        (k[self.degree], k[self.layers()])
    }

    pub fn is_interior(&self, t: f64) -> bool {
        let (lo, hi) = self.interior_span();
        t >= lo && t < hi
    }
}

/// Builds the `M x T` basis matrix with the Cox–de Boor recursion on the
/// unclamped uniform knot vector. Degree-0 functions are half-open indicators
/// `[t_i, t_{i+1})`.
pub fn bspline_basis_matrix(layers: usize, degree: usize, horizon: usize) -> Result<SplineBasisMatrix> {
    if horizon < 2 {
        return Err(Error::TooFew {
            kind: "B-spline horizon",
            need: "at least 2".into(),
            got: horizon,
        });
    }
    let knots = KnotSequence::bspline(layers, degree)?;
    let times = eval_times(horizon);
    let k = knots.as_slice();
    let mut values = Array2::zeros((layers, horizon));
    // Scratch holds the M + p degree-0 values, shrinking by one per degree.
    let mut scratch = vec![0.0; layers + degree];
    for (j, &t) in times.iter().enumerate() {
        for (i, b) in scratch.iter_mut().enumerate() {
            *b = if k[i] <= t && t < k[i + 1] { 1.0 } else { 0.0 };
        }
        for p in 1..=degree {
            for i in 0..(layers + degree - p) {
                let left = (t - k[i]) / (k[i + p] - k[i]) * scratch[i];
                let right = (k[i + p + 1] - t) / (k[i + p + 1] - k[i + 1]) * scratch[i + 1];
                scratch[i] = left + right;
            }
        }
        for i in 0..layers {
            values[[i, j]] = scratch[i];
        }
    }
    Ok(SplineBasisMatrix {
        values,
        degree,
        knots,
        eval_times: times,
    })
}

/// `U[b, t, :] = sum_i basis[i, t] * waypoints[b, i, :]`.
pub fn bspline_interpolate(basis: &SplineBasisMatrix, waypoints: ArrayView3<'_, f64>) -> Result<Array3<f64>> {
    let (batch, layers, dim) = waypoints.dim();
    if basis.layers() != layers {
        return Err(Error::Shape(format!(
            "basis has {} rows but waypoints have {} layers",
            basis.layers(),
            layers
        )));
    }
    let horizon = basis.horizon();
    let mut out = Array3::zeros((batch, horizon, dim));
    for b in 0..batch {
        for t in 0..horizon {
            for i in 0..layers {
                let w = basis.values[[i, t]];
                if w == 0.0 {
                    continue;
                }
                for k in 0..dim {
                    out[[b, t, k]] += w * waypoints[[b, i, k]];
                }
            }
        }
    }
    Ok(out)
}

fn segment_slopes(values: &[f64], knots: &[f64]) -> Vec<f64> {
    values
        .windows(2)
        .zip(knots.windows(2))
        .map(|(v, t)| (v[1] - v[0]) / (t[1] - t[0]))
        .collect()
}

/// Akima slopes for one scalar sequence. `m` holds the `M - 1` segment slopes.
fn akima_point_slopes(m: &[f64]) -> Vec<f64> {
    let points = m.len() + 1;
    let mut s = vec![0.0; points];
    if points == 2 {
        s[0] = m[0];
        s[1] = m[0];
        return s;
    }
    // Boundary rules (0-indexed): first two and last two points.
    s[0] = m[0];
    s[1] = 0.5 * (m[0] + m[1]);
    s[points - 2] = 0.5 * (m[points - 3] + m[points - 2]);
    s[points - 1] = m[points - 2];
    for i in 2..points.saturating_sub(2) {
        let w_left = (m[i + 1] - m[i]).abs();
        let w_right = (m[i - 1] - m[i - 2]).abs();
        let denom = w_left + w_right;
        s[i] = if denom > 0.0 {
            (w_left * m[i - 1] + w_right * m[i]) / denom
        } else {
            0.5 * (m[i - 1] + m[i])
        };
    }
    s
}

fn check_akima_inputs(waypoints: &ArrayView3<'_, f64>, knots: &KnotSequence) -> Result<()> {
    let layers = waypoints.dim().1;
    if layers < 2 {
        return Err(Error::TooFew {
            kind: "Akima layers",
            need: "at least 2".into(),
            got: layers,
        });
    }
    if knots.len() != layers {
        return Err(Error::Shape(format!("{} knots for {} layers", knots.len(), layers)));
    }
    if knots.as_slice().windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config("Akima knots need strictly positive widths".into()));
    }
    Ok(())
}

/// Per-waypoint Akima slopes, shaped like `waypoints`.
pub fn akima_slopes(waypoints: ArrayView3<'_, f64>, knots: &KnotSequence) -> Result<Array3<f64>> {
    check_akima_inputs(&waypoints, knots)?;
    let (batch, layers, dim) = waypoints.dim();
    let mut out = Array3::zeros((batch, layers, dim));
    let mut column = vec![0.0; layers];
    for b in 0..batch {
        for k in 0..dim {
            for i in 0..layers {
                column[i] = waypoints[[b, i, k]];
            }
            let m = segment_slopes(&column, knots.as_slice());
            for (i, s) in akima_point_slopes(&m).into_iter().enumerate() {
                out[[b, i, k]] = s;
            }
        }
    }
    Ok(out)
}

/// Piecewise cubic coefficients `(a, b, c, d)` per segment, shaped `(batch, M - 1, 4, dim)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AkimaCoefficients {
    pub coeffs: Array4<f64>,
    pub knots: KnotSequence,
}

impl AkimaCoefficients {
    pub fn segments(&self) -> usize {
        self.coeffs.dim().1
    }

    /// Value of segment `seg` of row `b`, coordinate `k`, at absolute time `t`.
    pub fn eval_segment(&self, b: usize, seg: usize, k: usize, t: f64) -> f64 {
        let dt = t - self.knots.as_slice()[seg];
        let c = &self.coeffs;
        ((c[[b, seg, 3, k]] * dt + c[[b, seg, 2, k]]) * dt + c[[b, seg, 1, k]]) * dt + c[[b, seg, 0, k]]
    }

    /// Index of the segment whose half-open interval contains `t`; times past
    /// the last knot use the final segment.
    pub fn segment_of(&self, t: f64) -> usize {
        let knots = self.knots.as_slice();
        let last = self.segments() - 1;
        knots[1..].iter().position(|&edge| t < edge).unwrap_or(last).min(last)
    }
}

pub fn akima_coefficients(
    waypoints: ArrayView3<'_, f64>,
    slopes: ArrayView3<'_, f64>,
    knots: &KnotSequence,
) -> Result<AkimaCoefficients> {
    check_akima_inputs(&waypoints, knots)?;
    if slopes.dim() != waypoints.dim() {
        return Err(Error::Shape(format!(
            "slopes {:?} vs waypoints {:?}",
            slopes.dim(),
            waypoints.dim()
        )));
    }
    let (batch, layers, dim) = waypoints.dim();
    let t = knots.as_slice();
    let mut coeffs = Array4::zeros((batch, layers - 1, 4, dim));
    for b in 0..batch {
        for i in 0..layers - 1 {
            let h = t[i + 1] - t[i];
            for k in 0..dim {
                let m = (waypoints[[b, i + 1, k]] - waypoints[[b, i, k]]) / h;
                let s0 = slopes[[b, i, k]];
                let s1 = slopes[[b, i + 1, k]];
                coeffs[[b, i, 0, k]] = waypoints[[b, i, k]];
                coeffs[[b, i, 1, k]] = s0;
                coeffs[[b, i, 2, k]] = (3.0 * m - 2.0 * s0 - s1) / h;
                coeffs[[b, i, 3, k]] = (s0 + s1 - 2.0 * m) / (h * h);
            }
        }
    }
    Ok(AkimaCoefficients {
        coeffs,
        knots: knots.clone(),
    })
}

pub fn akima_evaluate(coeffs: &AkimaCoefficients, horizon: usize) -> Array3<f64> {
    let (batch, _, _, dim) = coeffs.coeffs.dim();
    let times = eval_times(horizon);
    let segs: Vec<usize> = times.iter().map(|&t| coeffs.segment_of(t)).collect();
    let mut out = Array3::zeros((batch, horizon, dim));
    for b in 0..batch {
        for (j, (&t, &seg)) in times.iter().zip(&segs).enumerate() {
            for k in 0..dim {
                out[[b, j, k]] = coeffs.eval_segment(b, seg, k, t);
            }
        }
    }
    out
}

/// Convenience wrapper: uniform knots, slopes, coefficients, evaluation.
pub fn akima_interpolate(waypoints: ArrayView3<'_, f64>, horizon: usize) -> Result<Array3<f64>> {
    let knots = KnotSequence::uniform(waypoints.dim().1)?;
    let slopes = akima_slopes(waypoints, &knots)?;
    let coeffs = akima_coefficients(waypoints, slopes.view(), &knots)?;
    Ok(akima_evaluate(&coeffs, horizon))
}

/// Straight segments with `H = floor(T / M)` points each, taken at `k / H` along
/// every segment; the `T - H (M - 1)` remaining steps hold the final waypoint.
pub fn linear_interpolate(waypoints: ArrayView3<'_, f64>, horizon: usize) -> Result<Array3<f64>> {
    let (batch, layers, dim) = waypoints.dim();
    if layers < 2 {
        return Err(Error::TooFew {
            kind: "linear interpolation layers",
            need: "at least 2".into(),
            got: layers,
        });
    }
    if horizon < layers {
        return Err(Error::TooFew {
            kind: "linear interpolation horizon",
            need: format!("at least the layer count {layers}"),
            got: horizon,
        });
    }
    let per_segment = horizon / layers;
    let mut out = Array3::zeros((batch, horizon, dim));
    for b in 0..batch {
        let mut t = 0;
        for i in 0..layers - 1 {
            for step in 0..per_segment {
                let frac = step as f64 / per_segment as f64;
                for k in 0..dim {
                    let a = waypoints[[b, i, k]];
                    out[[b, t, k]] = a + frac * (waypoints[[b, i + 1, k]] - a);
                }
                t += 1;
            }
        }
        let last = waypoints.index_axis(Axis(1), layers - 1);
        for t in t..horizon {
            for k in 0..dim {
                out[[b, t, k]] = last[[b, k]];
            }
        }
    }
    Ok(out)
}

/// Dispatches to the kernel selected by `method`. No clipping is applied here.
pub fn interpolate(waypoints: ArrayView3<'_, f64>, method: Interpolation, horizon: usize) -> Result<Array3<f64>> {
    method.validate(waypoints.dim().1, horizon)?;
    match method {
        Interpolation::Linear => linear_interpolate(waypoints, horizon),
        Interpolation::BSpline { degree } => {
            let basis = bspline_basis_matrix(waypoints.dim().1, degree, horizon)?;
            bspline_interpolate(&basis, waypoints)
        }
        Interpolation::Akima => akima_interpolate(waypoints, horizon),
    }
}
