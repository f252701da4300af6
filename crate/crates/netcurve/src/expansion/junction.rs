//! The junction chart: a local diffeomorphism taking the Cauchy data of
//! three arcs at a vertex (positions and tangent vectors) to constraint
//! coordinates (position gaps, tangent balance) plus complementary free
//! coordinates (vertex position, tangent speeds, phase). Its zero set in the
//! constraint block is exactly the Herring condition; the complementary
//! block parametrizes admissible boundary data paths.

use crate::geom::Vec2;
use crate::numeric::{det_dense, solve_dense};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum JunctionChartError {
    #[error("tangent {0} has zero length")]
    ZeroTangent(usize),
    #[error("inversion did not converge: residual {0:.3e}")]
    InversionFailure(f64),
}

/// Cauchy data of three arcs at a common parameter value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JunctionData {
    pub positions: [Vec2; 3],
    pub tangents: [Vec2; 3],
}

/// Image coordinates of the chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JunctionImage {
    /// v1 - v2
    pub gap12: Vec2,
    /// v2 - v3
    pub gap23: Vec2,
    /// sum of unit tangents
    pub balance: Vec2,
    /// v1
    pub vertex: Vec2,
    /// |w1|, |w2|, |w3|
    pub speeds: [f64; 3],
    /// phase of w1 (local branch of the angle with e1)
    pub phase: f64,
}

impl JunctionImage {
    pub fn to_vec(&self) -> [f64; 12] {
        [
            self.gap12.x,
            self.gap12.y,
            self.gap23.x,
            self.gap23.y,
            self.balance.x,
            self.balance.y,
            self.vertex.x,
            self.vertex.y,
            self.speeds[0],
            self.speeds[1],
            self.speeds[2],
            self.phase,
        ]
    }
}

impl JunctionData {
    pub fn to_vec(&self) -> [f64; 12] {
        [
            self.positions[0].x,
            self.positions[0].y,
            self.positions[1].x,
            self.positions[1].y,
            self.positions[2].x,
            self.positions[2].y,
            self.tangents[0].x,
            self.tangents[0].y,
            self.tangents[1].x,
            self.tangents[1].y,
            self.tangents[2].x,
            self.tangents[2].y,
        ]
    }

    pub fn from_vec(v: &[f64; 12]) -> Self {
        JunctionData {
            positions: [
                Vec2::new(v[0], v[1]),
                Vec2::new(v[2], v[3]),
                Vec2::new(v[4], v[5]),
            ],
            tangents: [
                Vec2::new(v[6], v[7]),
                Vec2::new(v[8], v[9]),
                Vec2::new(v[10], v[11]),
            ],
        }
    }
}

/// Forward chart evaluation.
pub fn junction_chart_eval(data: &JunctionData) -> Result<JunctionImage, JunctionChartError> {
    for (i, w) in data.tangents.iter().enumerate() {
        if w.norm() == 0.0 {
            return Err(JunctionChartError::ZeroTangent(i));
        }
    }
    let balance = data
        .tangents
        .iter()
        .fold(Vec2::default(), |acc, w| acc + w.normalized());
    Ok(JunctionImage {
        gap12: data.positions[0] - data.positions[1],
        gap23: data.positions[1] - data.positions[2],
        balance,
        vertex: data.positions[0],
        speeds: [
            data.tangents[0].norm(),
            data.tangents[1].norm(),
            data.tangents[2].norm(),
        ],
        phase: data.tangents[0].angle(),
    })
}

fn image_residual(data: &JunctionData, target: &[f64; 12]) -> Result<[f64; 12], JunctionChartError> {
    let img = junction_chart_eval(data)?.to_vec();
    let mut out = [0.0; 12];
    for i in 0..12 {
        out[i] = img[i] - target[i];
        // the phase is an angle: compare modulo 2 pi
        if i == 11 {
            let tau = 2.0 * std::f64::consts::PI;
            out[i] = (out[i] + std::f64::consts::PI).rem_euclid(tau) - std::f64::consts::PI;
        }
    }
    Ok(out)
}

/// Numeric Jacobian determinant of the chart at a point (the local
/// diffeomorphism diagnostic).
pub fn junction_chart_jacobian_det(data: &JunctionData) -> Result<f64, JunctionChartError> {
    let base = data.to_vec();
    let f0 = junction_chart_eval(data)?.to_vec();
    let mut jac = vec![0.0; 144];
    for col in 0..12 {
        let mut pert = base;
        let h = 1e-7 * (1.0 + base[col].abs());
        pert[col] += h;
        let f1 = junction_chart_eval(&JunctionData::from_vec(&pert))?.to_vec();
        for row in 0..12 {
            let mut d = f1[row] - f0[row];
            if row == 11 {
                let tau = 2.0 * std::f64::consts::PI;
                d = (d + std::f64::consts::PI).rem_euclid(tau) - std::f64::consts::PI;
            }
            jac[row * 12 + col] = d / h;
        }
    }
    Ok(det_dense(&mut jac, 12))
}

/// Newton inversion of the chart from a seed. Returns the Cauchy data
/// realizing the target image.
pub fn junction_chart_invert(
    target: &JunctionImage,
    seed: &JunctionData,
) -> Result<JunctionData, JunctionChartError> {
    let tvec = target.to_vec();
    let mut x = seed.to_vec();
    for _ in 0..60 {
        let data = JunctionData::from_vec(&x);
        let r = image_residual(&data, &tvec)?;
        let rn = r.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        if rn < 1e-12 {
            return Ok(data);
        }
        // finite-difference Jacobian
        let mut jac = vec![0.0; 144];
        for col in 0..12 {
            let mut pert = x;
            let h = 1e-7 * (1.0 + x[col].abs());
            pert[col] += h;
            let rp = image_residual(&JunctionData::from_vec(&pert), &tvec)?;
            for row in 0..12 {
                jac[row * 12 + col] = (rp[row] - r[row]) / h;
            }
        }
        let mut step: Vec<f64> = r.iter().map(|v| -v).collect();
        if !solve_dense(&mut jac, &mut step, 12) {
            return Err(JunctionChartError::InversionFailure(rn));
        }
        // damped update
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let mut cand = x;
            for i in 0..12 {
                cand[i] += lambda * step[i];
            }
            if let Ok(rc) = image_residual(&JunctionData::from_vec(&cand), &tvec) {
                let rcn = rc.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
                if rcn < rn {
                    x = cand;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(JunctionChartError::InversionFailure(rn));
        }
    }
    let r = image_residual(&JunctionData::from_vec(&x), &tvec)?;
    Err(JunctionChartError::InversionFailure(
        r.iter().fold(0.0f64, |m, &v| m.max(v.abs())),
    ))
}

/// The image of a regular unit triod: vanishing constraint block, unit
/// speeds, the given vertex and phase.
pub fn regular_triod_image(vertex: Vec2, phase: f64) -> JunctionImage {
    JunctionImage {
        gap12: Vec2::default(),
        gap23: Vec2::default(),
        balance: Vec2::default(),
        vertex,
        speeds: [1.0, 1.0, 1.0],
        phase,
    }
}

/// Cauchy data of a regular unit triod (exact Herring configuration).
pub fn regular_triod_data(vertex: Vec2, phase: f64) -> JunctionData {
    let third = 2.0 * std::f64::consts::PI / 3.0;
    JunctionData {
        positions: [vertex; 3],
        tangents: [
            Vec2::from_angle(phase),
            Vec2::from_angle(phase + third),
            Vec2::from_angle(phase + 2.0 * third),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn regular_triod_maps_to_the_constraint_zero_set() {
        let data = regular_triod_data(Vec2::new(0.3, -0.2), 0.8);
        let img = junction_chart_eval(&data).unwrap();
        assert!(img.gap12.norm() < 1e-15);
        assert!(img.gap23.norm() < 1e-15);
        assert!(img.balance.norm() < 1e-15);
        assert!(img.vertex.dist(Vec2::new(0.3, -0.2)) < 1e-15);
        for s in img.speeds {
            assert!((s - 1.0).abs() < 1e-15);
        }
        assert!((img.phase - 0.8).abs() < 1e-12);
    }

    #[test]
    fn round_trip_on_random_admissible_data() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for trial in 0..40 {
            let data = JunctionData {
                positions: [
                    Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                    Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                    Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                ],
                tangents: [
                    Vec2::from_angle(rng.gen_range(0.0..6.28)) * rng.gen_range(0.5..2.0),
                    Vec2::from_angle(rng.gen_range(0.0..6.28)) * rng.gen_range(0.5..2.0),
                    Vec2::from_angle(rng.gen_range(0.0..6.28)) * rng.gen_range(0.5..2.0),
                ],
            };
            let img = junction_chart_eval(&data).unwrap();
            // seed near the truth
            let mut seedv = data.to_vec();
            for v in seedv.iter_mut() {
                *v += rng.gen_range(-0.05..0.05);
            }
            let seed = JunctionData::from_vec(&seedv);
            let back = junction_chart_invert(&img, &seed).unwrap();
            let fwd = junction_chart_eval(&back).unwrap().to_vec();
            let tgt = img.to_vec();
            for i in 0..12 {
                assert!(
                    (fwd[i] - tgt[i]).abs() < 1e-10,
                    "trial {trial} coord {i}: {} vs {}",
                    fwd[i],
                    tgt[i]
                );
            }
        }
    }

    #[test]
    fn jacobian_nonsingular_on_admissible_samples() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let mut min_abs = f64::INFINITY;
        for _ in 0..1000 {
            let data = JunctionData {
                positions: [
                    Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                    Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                    Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                ],
                tangents: [
                    Vec2::from_angle(rng.gen_range(0.0..6.28)) * rng.gen_range(0.3..2.5),
                    Vec2::from_angle(rng.gen_range(0.0..6.28)) * rng.gen_range(0.3..2.5),
                    Vec2::from_angle(rng.gen_range(0.0..6.28)) * rng.gen_range(0.3..2.5),
                ],
            };
            let det = junction_chart_jacobian_det(&data).unwrap();
            min_abs = min_abs.min(det.abs());
        }
        assert!(min_abs > 1e-6, "near-singular Jacobian found: {min_abs}");
    }

    #[test]
    fn zero_tangent_is_rejected() {
        let mut data = regular_triod_data(Vec2::default(), 0.0);
        data.tangents[1] = Vec2::default();
        assert!(matches!(
            junction_chart_eval(&data),
            Err(JunctionChartError::ZeroTangent(1))
        ));
    }
}
