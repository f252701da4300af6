//! One semi-implicit step: the second difference is implicit, the diffusion
//! coefficient 1/|d_x gamma|^2 is frozen at the old state, junction
//! positions solve the Herring balance by a per-step Newton iteration over
//! all interior vertices jointly (each curve is condensed onto its endpoint
//! values, which the linear scheme makes exact).

use super::{FlowError, FlowState};
use crate::geom::Vec2;
use crate::net::{CurveEnd, VertexKind};
use crate::numeric::{
    interior_stencil, onesided_stencil, solve_cyclic_tridiagonal, solve_dense, solve_tridiagonal,
};

/// Prescribed motion of exterior vertices (vertex id, time) -> position.
/// `None` keeps them pinned to their current values bit-exactly.
pub type BoundaryMotion<'a> = Option<&'a dyn Fn(usize, f64) -> Vec2>;

#[derive(Clone, Copy)]
pub struct StepOptions<'a> {
    pub junction_tol: f64,
    pub max_newton: usize,
    /// floor on |d_x gamma| relative to curve length before the step fails
    pub speed_floor: f64,
    pub boundary_motion: BoundaryMotion<'a>,
}

impl Default for StepOptions<'_> {
    fn default() -> Self {
        StepOptions {
            junction_tol: 1e-12,
            max_newton: 60,
            speed_floor: 1e-6,
            boundary_motion: None,
        }
    }
}

/// Per-curve condensed solve data for one step: the new interior values are
/// affine in the (possibly unknown) endpoint values,
/// node_i = base_i + alpha_i * p_start + beta_i * p_end (componentwise).
struct CondensedCurve {
    base: Vec<Vec2>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

fn speeds_squared(params: &[f64], pts: &[Vec2], closed: bool) -> Vec<f64> {
    let n = pts.len();
    let mut out = vec![0.0; n];
    if closed {
        // wrap-around centered differences; the param period is 1
        for i in 0..n - 1 {
            let im = if i == 0 { n - 2 } else { i - 1 };
            let ip = i + 1;
            let hm = if i == 0 {
                params[n - 1] - params[n - 2]
            } else {
                params[i] - params[i - 1]
            };
            let hp = params[ip] - params[i];
            let d = (pts[ip] - pts[im]) / (hm + hp);
            out[i] = d.norm_sq();
        }
        out[n - 1] = out[0];
    } else {
        for i in 1..n - 1 {
            let (w, _) = interior_stencil(params[i] - params[i - 1], params[i + 1] - params[i]);
            let d = pts[i - 1] * w[0] + pts[i] * w[1] + pts[i + 1] * w[2];
            out[i] = d.norm_sq();
        }
        out[0] = out[1];
        out[n - 1] = out[n - 2];
    }
    out
}

fn condense_open_curve(
    params: &[f64],
    pts: &[Vec2],
    dt: f64,
) -> CondensedCurve {
    let n = pts.len();
    let m = n - 2;
    let sp2 = speeds_squared(params, pts, false);
    let mut lower = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut upper = vec![0.0; m];
    for i in 1..n - 1 {
        let (_, w2) = interior_stencil(params[i] - params[i - 1], params[i + 1] - params[i]);
        let a = dt / sp2[i];
        let row = i - 1;
        lower[row] = -a * w2[0];
        diag[row] = 1.0 - a * w2[1];
        upper[row] = -a * w2[2];
    }
    // base: rhs with zero endpoint values
    let mut bx: Vec<f64> = (1..n - 1).map(|i| pts[i].x).collect();
    let mut by: Vec<f64> = (1..n - 1).map(|i| pts[i].y).collect();
    solve_tridiagonal(&lower, &diag, &upper, &mut bx);
    solve_tridiagonal(&lower, &diag, &upper, &mut by);
    // responses to unit endpoint values (same for both components)
    let mut ra = vec![0.0; m];
    ra[0] = -lower[0];
    solve_tridiagonal(&lower, &diag, &upper, &mut ra);
    let mut rb = vec![0.0; m];
    rb[m - 1] = -upper[m - 1];
    solve_tridiagonal(&lower, &diag, &upper, &mut rb);
    CondensedCurve {
        base: bx.into_iter().zip(by).map(|(x, y)| Vec2::new(x, y)).collect(),
        alpha: ra,
        beta: rb,
    }
}

fn step_closed_curve(params: &[f64], pts: &[Vec2], dt: f64) -> Vec<Vec2> {
    // nodes 0..n-2 are independent; node n-1 duplicates node 0
    let n = pts.len() - 1;
    let sp2 = speeds_squared(params, pts, true);
    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    for i in 0..n {
        let hm = if i == 0 {
            params[pts.len() - 1] - params[pts.len() - 2]
        } else {
            params[i] - params[i - 1]
        };
        let hp = params[i + 1] - params[i];
        let (_, w2) = interior_stencil(hm, hp);
        let a = dt / sp2[i];
        lower[i] = -a * w2[0];
        diag[i] = 1.0 - a * w2[1];
        upper[i] = -a * w2[2];
    }
    let mut bx: Vec<f64> = (0..n).map(|i| pts[i].x).collect();
    let mut by: Vec<f64> = (0..n).map(|i| pts[i].y).collect();
    solve_cyclic_tridiagonal(&lower, &diag, &upper, &mut bx);
    solve_cyclic_tridiagonal(&lower, &diag, &upper, &mut by);
    let mut out: Vec<Vec2> = bx.into_iter().zip(by).map(|(x, y)| Vec2::new(x, y)).collect();
    out.push(out[0]);
    out
}

/// Largest explicit-scheme-like time step: min over nodes of the squared
/// physical spacing. The implicit scheme is stable beyond this, but the
/// junction iteration and the length audit stay well behaved at this scale.
pub fn stable_dt(state: &FlowState) -> f64 {
    let mut best = f64::INFINITY;
    for c in &state.net.curves {
        for w in c.points.windows(2) {
            best = best.min(w[0].dist(w[1]).powi(2));
        }
    }
    best
}

pub fn step(state: &FlowState, dt: f64, opts: &StepOptions) -> Result<FlowState, FlowError> {
    let net = &state.net;
    // speed floor check
    for (ci, c) in net.curves.iter().enumerate() {
        let len = c.euclidean_length();
        let min_seg = c
            .points
            .windows(2)
            .zip(c.params.windows(2))
            .map(|(pw, tw)| pw[0].dist(pw[1]) / (tw[1] - tw[0]))
            .fold(f64::INFINITY, f64::min);
        if min_seg < opts.speed_floor * len {
            return Err(FlowError::DegenerateParametrization { curve: ci, speed: min_seg });
        }
    }

    let t_new = state.time + dt;
    // exterior endpoint targets
    let end_target = |vi: usize| -> Vec2 {
        match opts.boundary_motion {
            Some(f) => f(vi, t_new),
            None => net.vertices[vi].position,
        }
    };
    // map curve ends -> vertex ids
    let mut end_vertex = vec![[usize::MAX; 2]; net.curves.len()];
    for (vi, v) in net.vertices.iter().enumerate() {
        for &(ci, end) in &v.incident {
            end_vertex[ci][match end {
                CurveEnd::Start => 0,
                CurveEnd::End => 1,
            }] = vi;
        }
    }
    let interior: Vec<usize> = state.interior_vertices();
    let vslot: std::collections::HashMap<usize, usize> =
        interior.iter().enumerate().map(|(k, &v)| (v, k)).collect();

    // condense all open curves; step closed curves outright
    let mut condensed: Vec<Option<CondensedCurve>> = Vec::with_capacity(net.curves.len());
    let mut closed_new: Vec<Option<Vec<Vec2>>> = Vec::with_capacity(net.curves.len());
    for c in &net.curves {
        if c.closed {
            condensed.push(None);
            closed_new.push(Some(step_closed_curve(&c.params, &c.points, dt)));
        } else {
            condensed.push(Some(condense_open_curve(&c.params, &c.points, dt)));
            closed_new.push(None);
        }
    }

    // junction unknowns: current positions as the initial guess
    let mut p: Vec<Vec2> = interior.iter().map(|&vi| net.vertices[vi].position).collect();
    let nq = 2 * p.len();

    // endpoint value of a curve end given the junction vector
    let endpoint_value = |ci: usize, which: usize, p: &[Vec2]| -> Vec2 {
        let vi = end_vertex[ci][which];
        match net.vertices[vi].kind {
            VertexKind::Interior => p[vslot[&vi]],
            VertexKind::Exterior => end_target(vi),
        }
    };

    // new nodes of an open curve from its condensed form
    let curve_nodes = |ci: usize, p: &[Vec2]| -> Vec<Vec2> {
        let c = &net.curves[ci];
        let cd = condensed[ci].as_ref().unwrap();
        let pstart = endpoint_value(ci, 0, p);
        let pend = endpoint_value(ci, 1, p);
        let mut pts = Vec::with_capacity(c.points.len());
        pts.push(pstart);
        for i in 0..cd.base.len() {
            pts.push(cd.base[i] + pstart * cd.alpha[i] + pend * cd.beta[i]);
        }
        pts.push(pend);
        pts
    };

    // Herring residual at the interior vertices
    let balance = |p: &[Vec2]| -> Vec<Vec2> {
        interior
            .iter()
            .map(|&vi| {
                let mut sum = Vec2::default();
                for &(ci, end) in &net.vertices[vi].incident {
                    let pts = curve_nodes(ci, p);
                    let c = &net.curves[ci];
                    let n = pts.len();
                    let t = match end {
                        CurveEnd::Start => {
                            let w = onesided_stencil(
                                c.params[1] - c.params[0],
                                c.params[2] - c.params[1],
                            );
                            pts[0] * w[0] + pts[1] * w[1] + pts[2] * w[2]
                        }
                        CurveEnd::End => {
                            let w = onesided_stencil(
                                c.params[n - 1] - c.params[n - 2],
                                c.params[n - 2] - c.params[n - 3],
                            );
                            pts[n - 1] * w[0] + pts[n - 2] * w[1] + pts[n - 3] * w[2]
                        }
                    };
                    sum += t.normalized();
                }
                sum
            })
            .collect()
    };

    if !interior.is_empty() {
        let mut worst;
        let mut it = 0;
        loop {
            let res = balance(&p);
            worst = res.iter().fold(0.0f64, |m, r| m.max(r.norm()));
            if worst <= opts.junction_tol || it >= opts.max_newton {
                break;
            }
            // analytic Jacobian through the condensed affine structure
            let mut jac = vec![0.0; nq * nq];
            for (row_v, &vi) in interior.iter().enumerate() {
                for &(ci, end) in &net.vertices[vi].incident {
                    let c = &net.curves[ci];
                    let cd = condensed[ci].as_ref().unwrap();
                    let pts = curve_nodes(ci, &p);
                    let n = pts.len();
                    // tangent stencil nodes and weights
                    let (w, idx) = match end {
                        CurveEnd::Start => (
                            onesided_stencil(c.params[1] - c.params[0], c.params[2] - c.params[1]),
                            [0usize, 1, 2],
                        ),
                        CurveEnd::End => (
                            onesided_stencil(
                                c.params[n - 1] - c.params[n - 2],
                                c.params[n - 2] - c.params[n - 3],
                            ),
                            [n - 1, n - 2, n - 3],
                        ),
                    };
                    let tvec = pts[idx[0]] * w[0] + pts[idx[1]] * w[1] + pts[idx[2]] * w[2];
                    let tn = tvec.norm();
                    let u = tvec / tn;
                    // node sensitivity to each endpoint variable
                    let sens = |id: usize, which: usize| -> f64 {
                        if id == 0 {
                            if which == 0 { 1.0 } else { 0.0 }
                        } else if id == n - 1 {
                            if which == 1 { 1.0 } else { 0.0 }
                        } else if which == 0 {
                            cd.alpha[id - 1]
                        } else {
                            cd.beta[id - 1]
                        }
                    };
                    for which in 0..2 {
                        let vj = end_vertex[ci][which];
                        if !matches!(net.vertices[vj].kind, VertexKind::Interior) {
                            continue;
                        }
                        let col_v = vslot[&vj];
                        let dt_dp: f64 =
                            (0..3).map(|k| w[k] * sens(idx[k], which)).sum();
                        // d(unit)/dp = (I - u u^T)/|T| * dT/dp, dT/dp scalar * I
                        let f = dt_dp / tn;
                        let m = [
                            f * (1.0 - u.x * u.x),
                            f * (-u.x * u.y),
                            f * (-u.x * u.y),
                            f * (1.0 - u.y * u.y),
                        ];
                        jac[(2 * row_v) * nq + 2 * col_v] += m[0];
                        jac[(2 * row_v) * nq + 2 * col_v + 1] += m[1];
                        jac[(2 * row_v + 1) * nq + 2 * col_v] += m[2];
                        jac[(2 * row_v + 1) * nq + 2 * col_v + 1] += m[3];
                    }
                }
            }
            let mut rhs = vec![0.0; nq];
            for (k, r) in res.iter().enumerate() {
                rhs[2 * k] = -r.x;
                rhs[2 * k + 1] = -r.y;
            }
            if !solve_dense(&mut jac, &mut rhs, nq) {
                return Err(FlowError::StepFailure { vertex: interior[0], residual: worst });
            }
            // damped update
            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let cand: Vec<Vec2> = p
                    .iter()
                    .enumerate()
                    .map(|(k, q)| *q + Vec2::new(rhs[2 * k], rhs[2 * k + 1]) * lambda)
                    .collect();
                let rc = balance(&cand);
                let wc = rc.iter().fold(0.0f64, |m, r| m.max(r.norm()));
                if wc < worst {
                    p = cand;
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
            if !accepted {
                break;
            }
            it += 1;
        }
        if worst > opts.junction_tol.max(1e-9) {
            // identify the worst vertex for the report
            let res = balance(&p);
            let (k, r) = res
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
                .unwrap();
            return Err(FlowError::StepFailure { vertex: interior[k], residual: r.norm() });
        }
    }

    // assemble the new state
    let mut net_new = net.clone();
    for (ci, c) in net_new.curves.iter_mut().enumerate() {
        if c.closed {
            c.points = closed_new[ci].take().unwrap();
        } else {
            c.points = curve_nodes(ci, &p);
        }
    }
    for (k, &vi) in interior.iter().enumerate() {
        net_new.vertices[vi].position = p[k];
    }
    if opts.boundary_motion.is_some() {
        for (vi, v) in net_new.vertices.iter_mut().enumerate() {
            if matches!(v.kind, VertexKind::Exterior) {
                v.position = end_target(vi);
            }
        }
    }
    Ok(FlowState { time: t_new, net: net_new })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::fixtures;

    #[test]
    fn straight_segment_is_stationary_to_machine_precision() {
        let net = fixtures::symmetric_triod(1.0, 32);
        // single segment network: take one curve with two exterior ends
        let seg = crate::net::Network {
            curves: vec![net.curves[0].clone()],
            vertices: vec![
                crate::net::Vertex {
                    kind: VertexKind::Exterior,
                    position: net.curves[0].points[0],
                    incident: vec![(0, CurveEnd::Start)],
                },
                crate::net::Vertex {
                    kind: VertexKind::Exterior,
                    position: *net.curves[0].points.last().unwrap(),
                    incident: vec![(0, CurveEnd::End)],
                },
            ],
        };
        let mut state = FlowState::new(0.0, seg);
        let before = state.net.curves[0].points.clone();
        for _ in 0..10 {
            state = step(&state, 1e-3, &StepOptions::default()).unwrap();
        }
        for (a, b) in before.iter().zip(&state.net.curves[0].points) {
            assert!(a.dist(*b) < 1e-14);
        }
    }

    #[test]
    fn circle_shrinks_by_the_exact_law() {
        let net = crate::net::Network {
            curves: vec![crate::net::PolyCurve::circle(Vec2::default(), 1.0, 256)],
            vertices: vec![],
        };
        let mut state = FlowState::new(0.0, net);
        let dt = 1e-4;
        let steps = 3000; // to t = 0.3
        for _ in 0..steps {
            state = step(&state, dt, &StepOptions::default()).unwrap();
        }
        let want = (1.0f64 - 2.0 * 0.3).sqrt();
        let mut worst = 0.0f64;
        for pt in &state.net.curves[0].points {
            worst = worst.max((pt.norm() - want).abs());
        }
        assert!(worst < 1e-3, "radius error {worst}");
    }

    #[test]
    fn symmetric_triod_is_stationary() {
        let net = fixtures::symmetric_triod(1.0, 48);
        let mut state = FlowState::new(0.0, net);
        let p0 = state.net.vertices[0].position;
        let snapshot = state.net.curves[0].points.clone();
        for _ in 0..1000 {
            state = step(&state, 1e-3, &StepOptions::default()).unwrap();
        }
        // one unit of time elapsed
        assert!((state.time - 1.0).abs() < 1e-12);
        assert!(state.net.vertices[0].position.dist(p0) < 1e-10);
        let mut worst = 0.0f64;
        for (a, b) in snapshot.iter().zip(&state.net.curves[0].points) {
            worst = worst.max(a.dist(*b));
        }
        assert!(worst < 1e-10, "triod drifted by {worst}");
        assert!(state.junction_balance() < 1e-11);
    }

    #[test]
    fn exterior_vertices_stay_bit_exact() {
        let net = fixtures::triod_with_angles(&[80.0, 200.0, 320.0], 1.0, 24);
        let before: Vec<Vec2> = net
            .vertices
            .iter()
            .filter(|v| matches!(v.kind, VertexKind::Exterior))
            .map(|v| v.position)
            .collect();
        let mut state = FlowState::new(0.0, net);
        for _ in 0..50 {
            state = step(&state, 2e-4, &StepOptions::default()).unwrap();
        }
        let after: Vec<Vec2> = state
            .net
            .vertices
            .iter()
            .filter(|v| matches!(v.kind, VertexKind::Exterior))
            .map(|v| v.position)
            .collect();
        for (a, b) in before.iter().zip(&after) {
            assert!(a.x == b.x && a.y == b.y, "exterior vertex moved");
        }
        // endpoints of curves equal the vertex positions exactly
        assert!(state.junction_coincidence() < 1e-12);
    }

    #[test]
    fn irregular_triod_snaps_to_herring_and_shortens() {
        let net = fixtures::triod_with_angles(&[0.0, 90.0, 225.0], 1.0, 40);
        let mut state = FlowState::new(0.0, net);
        let l0 = state.net.total_length();
        let mut prev = l0;
        for _ in 0..200 {
            state = step(&state, 5e-5, &StepOptions::default()).unwrap();
            let l = state.net.total_length();
            assert!(l <= prev + 1e-10, "length grew: {prev} -> {l}");
            prev = l;
        }
        assert!(state.junction_balance() < 1e-11);
        assert!(state.net.total_length() < l0);
    }
}
