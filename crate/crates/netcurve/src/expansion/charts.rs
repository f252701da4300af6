//! Coordinate charts on the parabolic blowup of a space-time corner and the
//! lifted flow operators written in them.
//!
//! Charts: physical (t, x); projective (tau, s) = (sqrt(2t), x/sqrt(2t)),
//! valid near the front face away from the bottom; corner (T, y) =
//! (t/x^2, x), valid near the front-bottom corner; parabolic polar
//! (rho, omega) with t = rho^2 sin(omega), x = rho cos(omega).

use crate::geom::Vec2;
use crate::numeric::interior_stencil;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChartError {
    #[error("point ({0}, {1}) outside the chart domain")]
    OutOfDomain(f64, f64),
    #[error("degenerate |d_s eta| = {0:.3e} at grid node ({1}, {2})")]
    DegenerateSpeed(f64, usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chart {
    Physical,
    Projective,
    Corner,
    Polar,
}

/// Map chart coordinates to physical (t, x).
pub fn to_physical(chart: Chart, a: f64, b: f64) -> Result<(f64, f64), ChartError> {
    match chart {
        Chart::Physical => Ok((a, b)),
        Chart::Projective => {
            // (tau, s): t = tau^2/2, x = s tau
            if a < 0.0 {
                return Err(ChartError::OutOfDomain(a, b));
            }
            Ok((0.5 * a * a, a * b))
        }
        Chart::Corner => {
            // (T, y): t = T y^2, x = y
            if b <= 0.0 || a < 0.0 {
                return Err(ChartError::OutOfDomain(a, b));
            }
            Ok((a * b * b, b))
        }
        Chart::Polar => {
            // (rho, omega): t = rho^2 sin w, x = rho cos w
            if a < 0.0 || !(0.0..=std::f64::consts::FRAC_PI_2).contains(&b) {
                return Err(ChartError::OutOfDomain(a, b));
            }
            Ok((a * a * b.sin(), a * b.cos()))
        }
    }
}

/// Map physical (t, x) into a chart.
pub fn from_physical(chart: Chart, t: f64, x: f64) -> Result<(f64, f64), ChartError> {
    if t < 0.0 || x < 0.0 {
        return Err(ChartError::OutOfDomain(t, x));
    }
    match chart {
        Chart::Physical => Ok((t, x)),
        Chart::Projective => {
            let tau = (2.0 * t).sqrt();
            if tau == 0.0 {
                return Err(ChartError::OutOfDomain(t, x));
            }
            Ok((tau, x / tau))
        }
        Chart::Corner => {
            if x == 0.0 {
                return Err(ChartError::OutOfDomain(t, x));
            }
            Ok((t / (x * x), x))
        }
        Chart::Polar => {
            // exact inverse of x = rho cos w, t = rho^2 sin w:
            // rho^2 solves rho^4 - x^2 rho^2 - t^2 = 0
            let rho2 = 0.5 * (x * x + (x.powi(4) + 4.0 * t * t).sqrt());
            if rho2 == 0.0 {
                return Err(ChartError::OutOfDomain(t, x));
            }
            let rho = rho2.sqrt();
            Ok((rho, (t / rho2).clamp(-1.0, 1.0).asin()))
        }
    }
}

/// Resample a scalar field given in one chart onto points of another.
pub fn lift_field<F: Fn(f64, f64) -> f64>(
    from: Chart,
    to: Chart,
    field: F,
    points: &[(f64, f64)],
) -> Result<Vec<f64>, ChartError> {
    points
        .iter()
        .map(|&(a, b)| {
            let (t, x) = to_physical(to, a, b)?;
            let (fa, fb) = from_physical(from, t, x)?;
            Ok(field(fa, fb))
        })
        .collect()
}

/// Apply the lifted heat operator tau d_tau - s d_s - d_s^2 to samples on a
/// tensor (tau, s) grid by centered differences, returning interior values.
/// The physical heat operator is tau^{-2} times this.
pub fn lifted_heat_apply(
    taus: &[f64],
    ss: &[f64],
    u: &[Vec<f64>],
) -> Vec<Vec<f64>> {
    let nt = taus.len();
    let ns = ss.len();
    let mut out = vec![vec![0.0; ns]; nt];
    for i in 1..nt - 1 {
        let (wt, _) = interior_stencil(taus[i] - taus[i - 1], taus[i + 1] - taus[i]);
        for k in 1..ns - 1 {
            let (ws, wss) = interior_stencil(ss[k] - ss[k - 1], ss[k + 1] - ss[k]);
            let du_dtau = wt[0] * u[i - 1][k] + wt[1] * u[i][k] + wt[2] * u[i + 1][k];
            let du_ds = ws[0] * u[i][k - 1] + ws[1] * u[i][k] + ws[2] * u[i][k + 1];
            let ddu_ds = wss[0] * u[i][k - 1] + wss[1] * u[i][k] + wss[2] * u[i][k + 1];
            out[i][k] = taus[i] * du_dtau - ss[k] * du_ds - ddu_ds;
        }
    }
    out
}

/// Max-norm residual of the lifted flow equation
/// (tau d_tau + 1 - s d_s) eta = eta_ss / |eta_s|^2
/// over interior nodes of a tensor (tau, s) grid of plane-valued samples.
pub fn lifted_flow_residual(
    taus: &[f64],
    ss: &[f64],
    eta: &[Vec<Vec2>],
    speed_floor: f64,
) -> Result<f64, ChartError> {
    let nt = taus.len();
    let ns = ss.len();
    let mut worst = 0.0f64;
    for i in 1..nt - 1 {
        let (wt, _) = interior_stencil(taus[i] - taus[i - 1], taus[i + 1] - taus[i]);
        for k in 1..ns - 1 {
            let (ws, wss) = interior_stencil(ss[k] - ss[k - 1], ss[k + 1] - ss[k]);
            let deta_dtau = eta[i - 1][k] * wt[0] + eta[i][k] * wt[1] + eta[i + 1][k] * wt[2];
            let deta_ds = eta[i][k - 1] * ws[0] + eta[i][k] * ws[1] + eta[i][k + 1] * ws[2];
            let ddeta_ds = eta[i][k - 1] * wss[0] + eta[i][k] * wss[1] + eta[i][k + 1] * wss[2];
            let speed2 = deta_ds.norm_sq();
            if speed2 < speed_floor * speed_floor {
                return Err(ChartError::DegenerateSpeed(speed2.sqrt(), i, k));
            }
            let lhs = deta_dtau * taus[i] + eta[i][k] - deta_ds * ss[k];
            let rhs = ddeta_ds / speed2;
            let r = lhs - rhs;
            worst = worst.max(r.x.abs()).max(r.y.abs());
        }
    }
    Ok(worst)
}

/// Per-tau-slice sup of the lifted flow residual (for order studies).
pub fn lifted_flow_residual_per_slice(
    taus: &[f64],
    ss: &[f64],
    eta: &[Vec<Vec2>],
    speed_floor: f64,
) -> Result<Vec<(f64, f64)>, ChartError> {
    let nt = taus.len();
    let ns = ss.len();
    let mut out = Vec::new();
    for i in 1..nt - 1 {
        let (wt, _) = interior_stencil(taus[i] - taus[i - 1], taus[i + 1] - taus[i]);
        let mut sup = 0.0f64;
        for k in 1..ns - 1 {
            let (ws, wss) = interior_stencil(ss[k] - ss[k - 1], ss[k + 1] - ss[k]);
            let deta_dtau = eta[i - 1][k] * wt[0] + eta[i][k] * wt[1] + eta[i + 1][k] * wt[2];
            let deta_ds = eta[i][k - 1] * ws[0] + eta[i][k] * ws[1] + eta[i][k + 1] * ws[2];
            let ddeta_ds = eta[i][k - 1] * wss[0] + eta[i][k] * wss[1] + eta[i][k + 1] * wss[2];
            let speed2 = deta_ds.norm_sq();
            if speed2 < speed_floor * speed_floor {
                return Err(ChartError::DegenerateSpeed(speed2.sqrt(), i, k));
            }
            let lhs = deta_dtau * taus[i] + eta[i][k] - deta_ds * ss[k];
            let rhs = ddeta_ds / speed2;
            let r = lhs - rhs;
            sup = sup.max(r.norm());
        }
        out.push((taus[i], sup));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::uniform_grid;

    #[test]
    fn round_trips_are_identities() {
        let pts = [
            (0.03, 0.4),
            (0.2, 1.7),
            (1.0, 0.01),
            (0.004, 2.2),
        ];
        for chart in [Chart::Projective, Chart::Corner, Chart::Polar] {
            for &(t, x) in &pts {
                let (a, b) = from_physical(chart, t, x).unwrap();
                let (t2, x2) = to_physical(chart, a, b).unwrap();
                assert!(
                    (t - t2).abs() < 1e-12 * (1.0 + t) && (x - x2).abs() < 1e-12 * (1.0 + x),
                    "{chart:?}: ({t},{x}) -> ({a},{b}) -> ({t2},{x2})"
                );
            }
        }
    }

    #[test]
    fn chart_relations_t_equals_half_inverse_s_squared() {
        // T = 1/(2 s^2) and y = s tau tie the projective and corner charts
        let (t, x) = (0.08, 0.9);
        let (tau, s) = from_physical(Chart::Projective, t, x).unwrap();
        let (tt, y) = from_physical(Chart::Corner, t, x).unwrap();
        assert!((tt - 1.0 / (2.0 * s * s)).abs() < 1e-12);
        assert!((y - s * tau).abs() < 1e-12);
    }

    #[test]
    fn faces_are_rejected() {
        assert!(from_physical(Chart::Projective, 0.0, 0.5).is_err());
        assert!(from_physical(Chart::Corner, 0.1, 0.0).is_err());
        assert!(from_physical(Chart::Polar, 0.0, 0.0).is_err());
    }

    #[test]
    fn constant_field_lifts_to_constant() {
        let pts: Vec<(f64, f64)> = vec![(0.1, 0.3), (0.5, 1.0), (0.9, 2.0)];
        let vals =
            lift_field(Chart::Physical, Chart::Projective, |_t, _x| 3.5, &pts).unwrap();
        assert!(vals.iter().all(|&v| v == 3.5));
    }

    #[test]
    fn linear_field_lifts_to_s_tau() {
        // u = x in (t, x) reads s*tau in the projective chart
        let pts: Vec<(f64, f64)> = vec![(0.3, 0.2), (0.8, 1.4), (0.05, 3.0)];
        let vals = lift_field(Chart::Physical, Chart::Projective, |_t, x| x, &pts).unwrap();
        for (&(tau, s), &v) in pts.iter().zip(&vals) {
            assert!((v - s * tau).abs() < 1e-14);
        }
    }

    #[test]
    fn lifted_heat_operator_annihilates_a_caloric_function() {
        // u(t,x) = e^{-t} sin x satisfies u_t = u_xx; its lift must satisfy
        // (tau d_tau - s d_s - d_s^2) u = 0 to discretization order
        let taus = uniform_grid(0.2, 0.6, 60);
        let ss = uniform_grid(0.1, 2.0, 120);
        let mut u = vec![vec![0.0; ss.len()]; taus.len()];
        for (i, &tau) in taus.iter().enumerate() {
            for (k, &s) in ss.iter().enumerate() {
                let (t, x) = to_physical(Chart::Projective, tau, s).unwrap();
                u[i][k] = (-t).exp() * x.sin();
            }
        }
        let r = lifted_heat_apply(&taus, &ss, &u);
        let sup = r
            .iter()
            .flat_map(|row| row.iter())
            .fold(0.0f64, |m, &v| m.max(v.abs()));
        assert!(sup < 5e-4, "lifted heat residual {sup}");
    }

    #[test]
    fn straight_soliton_has_zero_flow_residual() {
        let taus = uniform_grid(0.1, 0.5, 24);
        let ss = uniform_grid(0.0, 3.0, 80);
        let dir = Vec2::from_angle(1.1);
        let eta: Vec<Vec<Vec2>> = taus
            .iter()
            .map(|_| ss.iter().map(|&s| dir * s).collect())
            .collect();
        let r = lifted_flow_residual(&taus, &ss, &eta, 1e-8).unwrap();
        assert!(r < 1e-11, "residual {r}");
    }

    #[test]
    fn perturbation_scales_linearly_in_the_residual() {
        let taus = uniform_grid(0.1, 0.5, 24);
        let ss = uniform_grid(0.0, 3.0, 80);
        let dir = Vec2::from_angle(0.4);
        let field = |eps: f64| -> Vec<Vec<Vec2>> {
            taus.iter()
                .map(|&tau| {
                    ss.iter()
                        .map(|&s| dir * s + Vec2::new(0.0, eps * tau * (s * 0.9).sin()))
                        .collect()
                })
                .collect()
        };
        let r1 = lifted_flow_residual(&taus, &ss, &field(1e-4), 1e-8).unwrap();
        let r2 = lifted_flow_residual(&taus, &ss, &field(2e-4), 1e-8).unwrap();
        assert!((r2 / r1 - 2.0).abs() < 0.05, "ratio {}", r2 / r1);
    }

    #[test]
    fn degenerate_speed_is_reported() {
        let taus = uniform_grid(0.1, 0.3, 8);
        let ss = uniform_grid(0.0, 1.0, 8);
        let eta: Vec<Vec<Vec2>> = taus
            .iter()
            .map(|_| ss.iter().map(|_| Vec2::new(1.0, 1.0)).collect())
            .collect();
        assert!(matches!(
            lifted_flow_residual(&taus, &ss, &eta, 1e-8),
            Err(ChartError::DegenerateSpeed(..))
        ));
    }
}
