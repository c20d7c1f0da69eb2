use approx::assert_abs_diff_eq;
use mtp_core::spline::{akima_coefficients, akima_slopes, bspline_basis_matrix, eval_times, interpolate, KnotSequence};
use mtp_core::Interpolation;
use ndarray::Array3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_waypoints(rng: &mut ChaCha8Rng, batch: usize, layers: usize, dim: usize) -> Array3<f64> {
    Array3::from_shape_fn((batch, layers, dim), |_| rng.random_range(-1.0..1.0))
}

#[test]
fn bspline_partition_of_unity_on_interior() {
    for (m, p) in [(4, 2), (6, 3), (8, 5)] {
        let basis = bspline_basis_matrix(m, p, 64).unwrap();
        let mut interior = 0;
        for (j, &t) in basis.eval_times.iter().enumerate() {
            let col = basis.values.column(j);
            assert!(col.iter().all(|&b| b >= 0.0));
            if basis.is_interior(t) {
                interior += 1;
                assert_abs_diff_eq!(col.sum(), 1.0, epsilon = 1e-9);
            }
        }
        assert!(interior > 0, "(M={m}, p={p}) has no interior evaluation times");
    }
}

#[test]
fn degree_zero_basis_is_an_indicator() {
    let (m, horizon) = (5, 40);
    let basis = bspline_basis_matrix(m, 0, horizon).unwrap();
    for (j, &t) in eval_times(horizon).iter().enumerate() {
        let owner = (t * m as f64).floor() as usize;
        for i in 0..m {
            assert_eq!(basis.values[[i, j]], if i == owner { 1.0 } else { 0.0 });
        }
    }
}

#[test]
fn akima_passes_through_knots() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let w = random_waypoints(&mut rng, 8, 6, 3);
    let knots = KnotSequence::uniform(6).unwrap();
    let slopes = akima_slopes(w.view(), &knots).unwrap();
    let c = akima_coefficients(w.view(), slopes.view(), &knots).unwrap();
    for b in 0..8 {
        for k in 0..3 {
            for (i, &t) in knots.as_slice().iter().enumerate() {
                let seg = c.segment_of(t);
                assert_abs_diff_eq!(c.eval_segment(b, seg, k, t), w[[b, i, k]], epsilon = 1e-9);
            }
        }
    }
}

#[test]
fn akima_is_c1_across_interior_knots() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let w = random_waypoints(&mut rng, 16, 7, 2);
    let knots = KnotSequence::uniform(7).unwrap();
    let slopes = akima_slopes(w.view(), &knots).unwrap();
    let c = akima_coefficients(w.view(), slopes.view(), &knots).unwrap();
    let h = 1e-4;
    for b in 0..16 {
        for k in 0..2 {
            for i in 1..6 {
                let t = knots.as_slice()[i];
                // Second-order one-sided differences on each polynomial piece.
                let f = |seg: usize, x: f64| c.eval_segment(b, seg, k, x);
                let left = (3.0 * f(i - 1, t) - 4.0 * f(i - 1, t - h) + f(i - 1, t - 2.0 * h)) / (2.0 * h);
                let right = (-3.0 * f(i, t) + 4.0 * f(i, t + h) - f(i, t + 2.0 * h)) / (2.0 * h);
                let scale = left.abs().max(right.abs()).max(1.0);
                assert!(
                    (left - right).abs() / scale < 1e-4,
                    "kink at knot {i}: {left} vs {right}"
                );
                assert!((left - slopes[[b, i, k]]).abs() / scale < 1e-4);
            }
        }
    }
}

#[test]
fn collinear_waypoints_stay_on_their_line() {
    let (m, horizon) = (6, 30);
    let a = [0.3, -0.2];
    let d = [0.5, 0.25];
    let w = Array3::from_shape_fn((1, m, 2), |(_, i, k)| a[k] + d[k] * i as f64 / (m - 1) as f64);
    for method in [
        Interpolation::Linear,
        Interpolation::BSpline { degree: 2 },
        Interpolation::BSpline { degree: 3 },
        Interpolation::Akima,
    ] {
        let u = interpolate(w.view(), method, horizon).unwrap();
        // Unclamped B-splines are convex combinations only on the interior span.
        let interior = match method {
            Interpolation::BSpline { degree } => Some(bspline_basis_matrix(m, degree, horizon).unwrap()),
            _ => None,
        };
        for (t, &time) in eval_times(horizon).iter().enumerate() {
            if interior.as_ref().is_some_and(|b| !b.is_interior(time)) {
                continue;
            }
            // Parameter along the line recovered from the first coordinate.
            let s = (u[[0, t, 0]] - a[0]) / d[0];
            assert_abs_diff_eq!(u[[0, t, 1]], a[1] + d[1] * s, epsilon = 1e-12);
        }
    }
    let akima = interpolate(w.view(), Interpolation::Akima, horizon).unwrap();
    for (j, &t) in eval_times(horizon).iter().enumerate() {
        for k in 0..2 {
            assert_abs_diff_eq!(akima[[0, j, k]], a[k] + d[k] * t, epsilon = 1e-12);
        }
    }
}

#[test]
fn interpolated_controls_respect_waypoint_box() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let w = random_waypoints(&mut rng, 32, 5, 2);
    for degree in 0..=4 {
        let u = interpolate(w.view(), Interpolation::BSpline { degree }, 20).unwrap();
        assert!(u.iter().all(|v| v.abs() <= 1.0 + 1e-12));
    }
    let u = interpolate(w.view(), Interpolation::Linear, 20).unwrap();
    assert!(u.iter().all(|v| v.abs() <= 1.0 + 1e-12));
}
