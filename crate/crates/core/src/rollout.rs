//! Batched rollouts over `R` model instances and `B` candidate control sequences.

use std::io::{self, Write};

use ndarray::{Array1, Array3, Array4, ArrayView2, ArrayView3, ArrayViewMut1, ArrayViewMut2, Axis};
use rayon::prelude::*;

use crate::env::Environment;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RolloutResult {
    /// `(R, B, T + 1, d)`; index 0 along time is `x0`.
    pub states: Array4<f64>,
    /// `(R, B, T)`; the terminal cost is folded into the last column.
    pub per_step_costs: Array3<f64>,
    /// Per-candidate cost summed over time and averaged over models.
    pub summed: Array1<f64>,
}

impl RolloutResult {
    /// Per-step costs averaged over models, `(B, T)`.
    pub fn mean_cost_matrix(&self) -> ndarray::Array2<f64> {
        let (r, _, _) = self.per_step_costs.dim();
        let mut acc = self.per_step_costs.index_axis(Axis(0), 0).to_owned();
        for k in 1..r {
            acc += &self.per_step_costs.index_axis(Axis(0), k);
        }
        acc / r as f64
    }
}

/// Rolls one control sequence through one model.
///
/// Costs accumulate in time order. If the dynamics or a cost turn non-finite
/// at step `t`, costs from `t` on are `+inf` and the remaining states are NaN.
pub fn rollout_single<E: Environment + ?Sized>(
    model: &E,
    x0: &[f64],
    controls: ArrayView2<'_, f64>,
    mut states: ArrayViewMut2<'_, f64>,
    mut costs: ArrayViewMut1<'_, f64>,
) {
    let horizon = controls.nrows();
    let mut x = x0.to_vec();
    let mut next = vec![0.0; x0.len()];
    let mut u = vec![0.0; controls.ncols()];
    states.row_mut(0).iter_mut().zip(&x).for_each(|(s, v)| *s = *v);
    for t in 0..horizon {
        u.iter_mut().zip(controls.row(t)).for_each(|(a, b)| *a = *b);
        let c = model.running_cost(&x, &u);
        model.step(&x, &u, &mut next);
        if !c.is_finite() || next.iter().any(|v| !v.is_finite()) {
            costs.slice_mut(ndarray::s![t..]).fill(f64::INFINITY);
            states.slice_mut(ndarray::s![t + 1.., ..]).fill(f64::NAN);
            return;
        }
        costs[t] = c;
        states.row_mut(t + 1).iter_mut().zip(&next).for_each(|(s, v)| *s = *v);
        std::mem::swap(&mut x, &mut next);
    }
    if horizon > 0 {
        let total = costs[horizon - 1] + model.terminal_cost(&x);
        costs[horizon - 1] = if total.is_finite() { total } else { f64::INFINITY };
    }
}

/// Rolls every candidate in `controls` (`B x T x n`) through every model.
pub fn batch_rollout<E: Environment>(models: &[E], x0: &[f64], controls: ArrayView3<'_, f64>) -> Result<RolloutResult> {
    let first = models
        .first()
        .ok_or_else(|| Error::Config("rollout needs at least one model".into()))?;
    let (batch, horizon, dim) = controls.dim();
    let d = first.state_dim();
    for m in models {
        if m.state_dim() != d || m.control_dim() != dim {
            return Err(Error::Shape(format!(
                "model dims (d={}, n={}) vs controls n={dim}, x0 d={}",
                m.state_dim(),
                m.control_dim(),
                x0.len()
            )));
        }
    }
    if x0.len() != d {
        return Err(Error::Shape(format!(
            "x0 has {} entries, model state has {d}",
            x0.len()
        )));
    }
    if horizon == 0 {
        return Err(Error::TooFew {
            kind: "rollout horizon",
            need: "at least 1".into(),
            got: 0,
        });
    }
    let r = models.len();
    let mut states = Array4::zeros((r, batch, horizon + 1, d));
    let mut per_step = Array3::zeros((r, batch, horizon));
    states
        .axis_iter_mut(Axis(0))
        .into_par_iter()
        .zip(per_step.axis_iter_mut(Axis(0)).into_par_iter())
        .zip(models.par_iter())
        .for_each(|((mut st_r, mut c_r), model)| {
            st_r.axis_iter_mut(Axis(0))
                .into_par_iter()
                .zip(c_r.axis_iter_mut(Axis(0)).into_par_iter())
                .zip(controls.axis_iter(Axis(0)).into_par_iter())
                .for_each(|((st, c), u)| rollout_single(model, x0, u, st, c));
        });
    let summed = cumulative_cost(per_step.view());
    Ok(RolloutResult {
        states,
        per_step_costs: per_step,
        summed,
    })
}

/// Sum over time (in order), then mean over models. `+inf` entries dominate.
pub fn cumulative_cost(per_step: ArrayView3<'_, f64>) -> Array1<f64> {
    let (r, batch, _) = per_step.dim();
    let mut out = Array1::zeros(batch);
    for b in 0..batch {
        let mut acc = 0.0;
        for k in 0..r {
            let lane = per_step.slice(ndarray::s![k, b, ..]);
            acc += lane.iter().fold(0.0, |s, &c| s + c);
        }
        out[b] = acc / r as f64;
    }
    out
}

/// Writes one row per `(r, b, t)` with columns `r,b,t,x0..,u0..,cost`. The
/// final state of each rollout appears with `t = T` and empty control/cost cells.
pub fn write_trajectory_csv<W: Write>(
    mut w: W,
    result: &RolloutResult,
    controls: ArrayView3<'_, f64>,
) -> io::Result<()> {
    let (r, batch, steps, d) = result.states.dim();
    let n = controls.dim().2;
    let mut header = vec!["r".to_string(), "b".into(), "t".into()];
    header.extend((0..d).map(|k| format!("x{k}")));
    header.extend((0..n).map(|k| format!("u{k}")));
    header.push("cost".into());
    writeln!(w, "{}", header.join(","))?;
    for k in 0..r {
        for b in 0..batch {
            for t in 0..steps {
                let mut row = vec![k.to_string(), b.to_string(), t.to_string()];
                row.extend((0..d).map(|i| result.states[[k, b, t, i]].to_string()));
                if t + 1 < steps {
                    row.extend((0..n).map(|i| controls[[b, t, i]].to_string()));
                    row.push(result.per_step_costs[[k, b, t]].to_string());
                } else {
                    row.extend(std::iter::repeat_n(String::new(), n + 1));
                }
                writeln!(w, "{}", row.join(","))?;
            }
        }
    }
    Ok(())
}
