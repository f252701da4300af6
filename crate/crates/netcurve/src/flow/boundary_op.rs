//! The linearized junction boundary operator: the 2x2 matrix
//! P = sum_j c_j P^(j), with c_j the inverse parametrization speeds at the
//! vertex and P^(j) the orthogonal projection onto the unit normal of arc j.
//! Its invertibility is the Lopatinski-Shapiro condition for the linearized
//! Herring problem; for nontangential arcs it is symmetric positive
//! definite, since <P b, b> = sum c_j |P^(j) b|^2.

use super::{FlowError, FlowState};
use crate::geom::Vec2;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryOperator {
    pub tangents: Vec<Vec2>,
    pub speeds: Vec<f64>,
    /// row-major [a, b; c, d]
    pub matrix: [f64; 4],
    /// ordered eigenvalues (min, max)
    pub eigenvalues: (f64, f64),
}

impl BoundaryOperator {
    pub fn is_positive_definite(&self) -> bool {
        self.eigenvalues.0 > 0.0
    }

    pub fn symmetry_defect(&self) -> f64 {
        (self.matrix[1] - self.matrix[2]).abs()
    }
}

/// Assemble the operator from junction tangents (any nonzero lengths; the
/// speeds are their norms unless `speeds` overrides them).
pub fn boundary_operator(
    tangents: &[Vec2],
    speeds: Option<&[f64]>,
) -> Result<BoundaryOperator, FlowError> {
    let mut m = [0.0f64; 4];
    let mut sp = Vec::with_capacity(tangents.len());
    for (i, t) in tangents.iter().enumerate() {
        let speed = match speeds {
            Some(s) => s[i],
            None => t.norm(),
        };
        if speed <= 0.0 || t.norm() == 0.0 {
            return Err(FlowError::ZeroSpeed(i));
        }
        sp.push(speed);
        let nu = t.normalized().rot90();
        let c = 1.0 / speed;
        m[0] += c * nu.x * nu.x;
        m[1] += c * nu.x * nu.y;
        m[2] += c * nu.y * nu.x;
        m[3] += c * nu.y * nu.y;
    }
    let mean = 0.5 * (m[0] + m[3]);
    let disc = (0.25 * (m[0] - m[3]).powi(2) + m[1] * m[2]).max(0.0).sqrt();
    Ok(BoundaryOperator {
        tangents: tangents.to_vec(),
        speeds: sp,
        matrix: m,
        eigenvalues: (mean - disc, mean + disc),
    })
}

/// Operator at an interior vertex of a flow state, with tangents and speeds
/// read from the incident curve ends.
pub fn junction_boundary_operator(
    state: &FlowState,
    vertex: usize,
) -> Result<BoundaryOperator, FlowError> {
    let v = &state.net.vertices[vertex];
    let mut tangents = Vec::new();
    for &(ci, end) in &v.incident {
        tangents.push(state.net.curves[ci].inward_tangent(end)?);
    }
    boundary_operator(&tangents, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn triod_tangents(phase: f64) -> Vec<Vec2> {
        let third = 2.0 * std::f64::consts::PI / 3.0;
        (0..3).map(|k| Vec2::from_angle(phase + k as f64 * third)).collect()
    }

    #[test]
    fn unit_speed_regular_triod_gives_three_halves_identity() {
        // sum of three line projections at mutual 120 degrees is (3/2) I
        for phase in [0.0, 0.4, 1.9] {
            let op = boundary_operator(&triod_tangents(phase), None).unwrap();
            assert!((op.matrix[0] - 1.5).abs() < 1e-12, "{:?}", op.matrix);
            assert!((op.matrix[3] - 1.5).abs() < 1e-12);
            assert!(op.matrix[1].abs() < 1e-12 && op.matrix[2].abs() < 1e-12);
            assert!((op.eigenvalues.0 - 1.5).abs() < 1e-12);
        }
    }

    #[test]
    fn random_nondegenerate_triods_are_spd() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            // three distinct directions, not all parallel
            let a0 = rng.gen_range(0.0..6.28);
            let a1 = a0 + rng.gen_range(0.3..2.6);
            let a2 = a1 + rng.gen_range(0.3..2.6);
            let tangents = vec![
                Vec2::from_angle(a0) * rng.gen_range(0.2..3.0),
                Vec2::from_angle(a1) * rng.gen_range(0.2..3.0),
                Vec2::from_angle(a2) * rng.gen_range(0.2..3.0),
            ];
            let op = boundary_operator(&tangents, None).unwrap();
            assert!(op.symmetry_defect() < 1e-14);
            assert!(op.is_positive_definite(), "min eig {}", op.eigenvalues.0);
        }
    }

    #[test]
    fn collinear_fan_degenerates() {
        // two parallel normals and a third tending parallel: min eigenvalue
        // goes to zero with the angle
        let mut prev = f64::INFINITY;
        for &eps in &[0.3, 0.1, 0.03, 0.01] {
            let tangents = vec![
                Vec2::from_angle(0.0),
                Vec2::from_angle(std::f64::consts::PI),
                Vec2::from_angle(eps),
            ];
            let op = boundary_operator(&tangents, None).unwrap();
            let min_eig = op.eigenvalues.0;
            assert!(min_eig < prev);
            prev = min_eig;
        }
        assert!(prev < 1e-3, "min eigenvalue did not degenerate: {prev}");
    }

    #[test]
    fn zero_speed_is_rejected() {
        let mut t = triod_tangents(0.0);
        t[1] = Vec2::default();
        assert!(matches!(
            boundary_operator(&t, None),
            Err(FlowError::ZeroSpeed(1))
        ));
    }
}
