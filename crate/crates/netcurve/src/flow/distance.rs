//! Parametrization-free comparison of networks as sets: symmetric Hausdorff
//! distance over dense resamplings with point-to-segment metrics.

use crate::geom::{point_polyline_dist, resample_by_arclength, Vec2};
use crate::net::Network;

/// Symmetric Hausdorff distance between the two networks as subsets of the
/// plane. Each curve is resampled to `samples` points; distances are taken
/// to polylines, so the resolution error is quadratic in the spacing.
pub fn geometric_distance(a: &Network, b: &Network, samples: usize) -> f64 {
    let polys_a = dense_polylines(a, samples);
    let polys_b = dense_polylines(b, samples);
    one_sided(&polys_a, &polys_b).max(one_sided(&polys_b, &polys_a))
}

fn dense_polylines(net: &Network, samples: usize) -> Vec<Vec<Vec2>> {
    net.curves
        .iter()
        .map(|c| resample_by_arclength(&c.points, samples.max(c.points.len())))
        .collect()
}

fn one_sided(from: &[Vec<Vec2>], to: &[Vec<Vec2>]) -> f64 {
    let mut worst = 0.0f64;
    for poly in from {
        for p in poly {
            let d = to
                .iter()
                .map(|q| point_polyline_dist(*p, q))
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(d);
        }
    }
    worst
}
