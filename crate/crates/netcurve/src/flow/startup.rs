//! Startup from irregular data: excise a ball around each irregular vertex,
//! insert the sqrt(2 t0)-scaled truncated soliton for the chosen resolution
//! topology, and join it to the surviving curves with a C^1 Hermite blend
//! over the annulus [blend_fraction * r, r].

use super::{FlowError, FlowState};
use crate::expander::{solve_soliton, truncate_and_scale, PatchEnd, SolveOptions};
use crate::expansion::{build_expansion, ArcSeeds};
use crate::geom::{resample_by_arclength, Vec2};
use crate::net::{
    check_regular, predicted_counts, CurveEnd, Fan, Network, PolyCurve, TopologyDescriptor,
    Vertex, VertexKind,
};

#[derive(Debug, Clone)]
pub struct StartupOptions {
    pub excision_radius: f64,
    pub solve: SolveOptions,
    pub nodes_per_curve: usize,
    pub nodes_internal: usize,
    /// inner handoff at this fraction of the excision radius
    pub blend_fraction: f64,
    /// largest tolerated angle between the soliton exit direction and the
    /// surviving curve direction at the excision radius, radians
    pub tangent_cap: f64,
    /// corner-expansion order applied to the inserted patch (0 = bare
    /// soliton slice; 1 folds the incoming curvature jets in)
    pub expansion_order: usize,
    /// Herring tolerance used to classify vertices
    pub regular_tol: f64,
}

impl Default for StartupOptions {
    fn default() -> Self {
        StartupOptions {
            excision_radius: 0.25,
            solve: SolveOptions::default(),
            nodes_per_curve: 64,
            nodes_internal: 32,
            blend_fraction: 0.6,
            tangent_cap: 0.7,
            expansion_order: 0,
            regular_tol: 1e-7,
        }
    }
}

#[derive(Clone)]
enum Attach {
    Old(usize),
    Junction(usize),
}

fn radius_crossing(points: &[Vec2], center: Vec2, r: f64) -> Option<(usize, Vec2)> {
    for i in 0..points.len() - 1 {
        let (a, b) = (points[i].dist(center), points[i + 1].dist(center));
        if a <= r && b > r {
            let t = (r - a) / (b - a);
            return Some((i, points[i].lerp(points[i + 1], t)));
        }
    }
    None
}

fn hermite(p0: Vec2, m0: Vec2, p1: Vec2, m1: Vec2, samples: usize) -> Vec<Vec2> {
    (0..=samples)
        .map(|k| {
            let t = k as f64 / samples as f64;
            let t2 = t * t;
            let t3 = t2 * t;
            p0 * (2.0 * t3 - 3.0 * t2 + 1.0)
                + m0 * (t3 - 2.0 * t2 + t)
                + p1 * (-2.0 * t3 + 3.0 * t2)
                + m1 * (t3 - t2)
        })
        .collect()
}

/// Direction of a polyline at index `i` looking forward.
fn forward_dir(points: &[Vec2], i: usize) -> Vec2 {
    let j = (i + 1).min(points.len() - 1);
    (points[j] - points[i.min(j.saturating_sub(1))]).normalized()
}

/// Resolve the chosen irregular vertices of `net0` by soliton insertion at
/// time `t0`, producing a regular network whose curve count matches the
/// resolution combinatorics.
pub fn start_from_irregular(
    net0: &Network,
    choices: &[(usize, TopologyDescriptor)],
    t0: f64,
    opts: &StartupOptions,
) -> Result<FlowState, FlowError> {
    net0.validate()?;
    let report = check_regular(net0, opts.regular_tol)?;
    let irregular: Vec<usize> = report.irregular_vertices();
    let active: Vec<&(usize, TopologyDescriptor)> = choices
        .iter()
        .filter(|(v, _)| irregular.contains(v))
        .collect();
    if active.is_empty() {
        return Ok(FlowState::new(t0, net0.clone()));
    }
    // fans per interior vertex id
    let mut fans: Vec<(usize, Fan)> = Vec::new();
    {
        let all = crate::net::extract_fans(net0)?;
        let mut it = all.into_iter();
        for (vi, v) in net0.vertices.iter().enumerate() {
            if matches!(v.kind, VertexKind::Interior) {
                fans.push((vi, it.next().expect("fan per interior vertex")));
            }
        }
    }
    let scale = (2.0 * t0).sqrt();
    let r = opts.excision_radius;

    // curves touched by some resolution; forbid double-resolution curves
    let mut touched = vec![false; net0.curves.len()];
    for (vi, _) in active.iter() {
        for &(ci, _) in &net0.vertices[*vi].incident {
            if touched[ci] {
                return Err(FlowError::Startup(format!(
                    "curve {ci} joins two resolved vertices"
                )));
            }
            touched[ci] = true;
        }
    }

    let mut new_curves: Vec<PolyCurve> = Vec::new();
    let mut new_ends: Vec<(Attach, Attach)> = Vec::new();
    let mut junction_positions: Vec<Vec2> = Vec::new();

    // untouched curves pass through unchanged
    let mut end_vertex = vec![[usize::MAX; 2]; net0.curves.len()];
    for (vi, v) in net0.vertices.iter().enumerate() {
        for &(ci, end) in &v.incident {
            end_vertex[ci][match end {
                CurveEnd::Start => 0,
                CurveEnd::End => 1,
            }] = vi;
        }
    }
    for (ci, c) in net0.curves.iter().enumerate() {
        if touched[ci] {
            continue;
        }
        new_curves.push(c.clone());
        new_ends.push((
            if c.closed { Attach::Old(usize::MAX) } else { Attach::Old(end_vertex[ci][0]) },
            if c.closed { Attach::Old(usize::MAX) } else { Attach::Old(end_vertex[ci][1]) },
        ));
    }

    for (vi, topo) in active.iter() {
        let center = net0.vertices[*vi].position;
        let fan = &fans.iter().find(|(v, _)| v == vi).unwrap().1;
        let fan0 = Fan {
            center: Vec2::default(),
            directions: fan.directions.clone(),
            incident: fan.incident.clone(),
        };
        let mut sol = solve_soliton(&fan0, topo, &opts.solve)?;
        if opts.expansion_order > 0 {
            // fold the incoming curvature jets into the patch
            let mut seeds = Vec::with_capacity(sol.ray_arcs.len());
            for ray in 0..sol.ray_arcs.len() {
                let (ci, end) = fan.incident[ray];
                let c = &net0.curves[ci];
                let pts = match end {
                    CurveEnd::Start => c.points.clone(),
                    CurveEnd::End => c.points.iter().rev().copied().collect(),
                };
                // Menger curvature vector near the vertex, arclength scaled
                let (p0, p1, p2) = (pts[0], pts[1], pts[2]);
                let (a, b, cc) = (p1.dist(p0), p2.dist(p1), p2.dist(p0));
                let cross = (p1 - p0).cross(p2 - p0);
                let kappa = if a * b * cc > 0.0 { 2.0 * cross / (a * b * cc) } else { 0.0 };
                let tang = (p1 - p0).normalized();
                let kvec = tang.rot90() * kappa;
                let mut seed = ArcSeeds::zeros(opts.expansion_order);
                seed.leading[0] = kvec * 0.5;
                seeds.push(seed);
            }
            let exp = build_expansion(&sol, &seeds, opts.expansion_order)?;
            let tau0 = scale;
            for ax in &exp.arcs {
                let arc = &mut sol.arcs[ax.arc];
                // expansion grids run junction -> out; arcs in tree blocks
                // share that orientation
                for (k, s) in ax.grid.s.iter().enumerate() {
                    arc.points[k] = ax.eval(tau0, *s, exp.chi.0, exp.chi.1);
                }
            }
        }
        let patch = truncate_and_scale(&sol, t0, r)?;
        let joff = junction_positions.len();
        junction_positions.extend(patch.junction_positions.iter().map(|&p| p + center));

        for (pc, ends) in patch.curves.iter().zip(&patch.ends) {
            let abs_points: Vec<Vec2> = pc.points.iter().map(|&p| p + center).collect();
            match ends {
                (PatchEnd::Junction(a), PatchEnd::Junction(b)) => {
                    let pts = resample_by_arclength(&abs_points, opts.nodes_internal);
                    let params = uniform_params(pts.len());
                    new_curves.push(PolyCurve { params, points: pts, closed: false });
                    new_ends.push((Attach::Junction(joff + a), Attach::Junction(joff + b)));
                }
                (PatchEnd::Junction(j), PatchEnd::Ray(ray))
                | (PatchEnd::Ray(ray), PatchEnd::Junction(j)) => {
                    let piece: Vec<Vec2> = if matches!(ends.0, PatchEnd::Junction(_)) {
                        abs_points.clone()
                    } else {
                        abs_points.iter().rev().copied().collect()
                    };
                    let (ci, end) = fan.incident[*ray];
                    let (joined, far_vertex) =
                        join_piece(net0, ci, end, &end_vertex, center, r, opts, &piece)?;
                    let pts = resample_by_arclength(&joined, opts.nodes_per_curve);
                    let params = uniform_params(pts.len());
                    new_curves.push(PolyCurve { params, points: pts, closed: false });
                    new_ends.push((Attach::Junction(joff + j), Attach::Old(far_vertex)));
                }
                (PatchEnd::Ray(ra), PatchEnd::Ray(rb)) => {
                    // a bare geodesic fusing two original curves
                    let (ca, ea) = fan.incident[*ra];
                    let (cb, eb) = fan.incident[*rb];
                    let (half_b, far_b) =
                        join_piece(net0, cb, eb, &end_vertex, center, r, opts, &abs_points)?;
                    let rev: Vec<Vec2> = abs_points.iter().rev().copied().collect();
                    let (half_a, far_a) =
                        join_piece(net0, ca, ea, &end_vertex, center, r, opts, &rev)?;
                    // half_a runs patch->far_a; reverse it and append half_b
                    let mut pts: Vec<Vec2> = half_a.iter().rev().copied().collect();
                    // drop the duplicated patch samples: half_b starts with the
                    // full patch again, so skip its patch prefix
                    pts.extend(half_b.iter().skip(abs_points.len()).copied());
                    let pts = resample_by_arclength(&pts, 2 * opts.nodes_per_curve);
                    let params = uniform_params(pts.len());
                    new_curves.push(PolyCurve { params, points: pts, closed: false });
                    new_ends.push((Attach::Old(far_a), Attach::Old(far_b)));
                }
            }
        }
    }

    // assemble vertices: old ones that survive, then the new junctions
    let resolved: Vec<usize> = active.iter().map(|(v, _)| *v).collect();
    let mut old_map = vec![usize::MAX; net0.vertices.len()];
    let mut vertices: Vec<Vertex> = Vec::new();
    for (vi, v) in net0.vertices.iter().enumerate() {
        if resolved.contains(&vi) {
            continue;
        }
        old_map[vi] = vertices.len();
        vertices.push(Vertex { kind: v.kind, position: v.position, incident: vec![] });
    }
    let junction_base = vertices.len();
    for &p in &junction_positions {
        vertices.push(Vertex { kind: VertexKind::Interior, position: p, incident: vec![] });
    }
    for (ci, ends) in new_ends.iter().enumerate() {
        if new_curves[ci].closed {
            continue;
        }
        for (which, attach) in [(CurveEnd::Start, &ends.0), (CurveEnd::End, &ends.1)] {
            let vid = match attach {
                Attach::Old(v) => old_map[*v],
                Attach::Junction(j) => junction_base + j,
            };
            vertices[vid].incident.push((ci, which));
            // snap the curve endpoint onto the vertex position exactly
            let pos = vertices[vid].position;
            match which {
                CurveEnd::Start => new_curves[ci].points[0] = pos,
                CurveEnd::End => {
                    let n = new_curves[ci].points.len();
                    new_curves[ci].points[n - 1] = pos;
                }
            }
        }
    }

    let net = Network { curves: new_curves, vertices };
    net.validate()?;
    // accounting must match the resolution combinatorics
    let choice_refs: Vec<&TopologyDescriptor> = active.iter().map(|(_, t)| t).collect();
    let counts = predicted_counts(net0.curves.len(), &choice_refs);
    if counts.curves != net.curves.len() {
        return Err(FlowError::Startup(format!(
            "curve count {} does not match the predicted {}",
            net.curves.len(),
            counts.curves
        )));
    }
    Ok(FlowState::new(t0, net))
}

fn uniform_params(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

/// Join a soliton piece (running junction -> outward, absolute coordinates)
/// to the surviving tail of original curve `ci` outside the excision ball:
/// clip the piece at the inner handoff radius, Hermite-blend across the
/// annulus, and append the tail. Returns the joined polyline (junction
/// first) and the far vertex id.
#[allow(clippy::too_many_arguments)]
fn join_piece(
    net0: &Network,
    ci: usize,
    end: CurveEnd,
    end_vertex: &[[usize; 2]],
    center: Vec2,
    r: f64,
    opts: &StartupOptions,
    piece: &[Vec2],
) -> Result<(Vec<Vec2>, usize), FlowError> {
    let c = &net0.curves[ci];
    let (oriented, far_vertex) = match end {
        CurveEnd::Start => (c.points.clone(), end_vertex[ci][1]),
        CurveEnd::End => (
            c.points.iter().rev().copied().collect::<Vec<_>>(),
            end_vertex[ci][0],
        ),
    };
    // survive outside radius r
    let Some((cut_idx, p_outer)) = radius_crossing(&oriented, center, r) else {
        return Err(FlowError::Startup(format!(
            "curve {ci} lies entirely inside the excision ball (radius {r})"
        )));
    };
    let t_outer = forward_dir(&oriented, cut_idx);
    // clip the soliton piece at the handoff radius
    let rin = opts.blend_fraction * r;
    let Some((pin_idx, p_inner)) = radius_crossing(piece, center, rin) else {
        return Err(FlowError::Startup(
            "soliton piece does not reach the handoff radius".into(),
        ));
    };
    let t_inner = forward_dir(piece, pin_idx);
    let angle = t_inner.dot(t_outer).clamp(-1.0, 1.0).acos();
    if angle > opts.tangent_cap {
        return Err(FlowError::Startup(format!(
            "tangent mismatch {angle:.3} rad at the blend exceeds the cap {:.3}",
            opts.tangent_cap
        )));
    }
    let chord = p_inner.dist(p_outer);
    let blend = hermite(p_inner, t_inner * chord, p_outer, t_outer * chord, 12);
    let mut joined: Vec<Vec2> = piece[..=pin_idx].to_vec();
    joined.push(p_inner);
    joined.extend(blend.iter().skip(1).copied());
    joined.extend(oriented[cut_idx + 1..].iter().copied());
    Ok((joined, far_vertex))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{enumerate_resolutions, fixtures};

    #[test]
    fn regular_network_passes_through_unchanged() {
        let net = fixtures::symmetric_triod(1.0, 24);
        let topo = enumerate_resolutions(3, false).unwrap()[0].clone();
        let state = start_from_irregular(&net, &[(0, topo)], 0.01, &StartupOptions::default())
            .unwrap();
        assert_eq!(state.net.curves.len(), 3);
        for (a, b) in net.curves.iter().zip(&state.net.curves) {
            for (p, q) in a.points.iter().zip(&b.points) {
                assert!(p.dist(*q) == 0.0);
            }
        }
    }

    #[test]
    fn cross_resolves_to_five_curves_with_regular_junctions() {
        let net = fixtures::orthogonal_cross(1.0, 48);
        let topos = enumerate_resolutions(4, false).unwrap();
        let t0 = 0.005;
        let state =
            start_from_irregular(&net, &[(0, topos[0].clone())], t0, &StartupOptions::default())
                .unwrap();
        assert_eq!(state.net.curves.len(), 5);
        let rep = check_regular(&state.net, 0.05).unwrap();
        assert!(rep.all_regular(), "junctions not regular: {:?}", rep.vertices);
        // the new internal edge scales like the soliton's
        let internal: Vec<&PolyCurve> = state
            .net
            .curves
            .iter()
            .filter(|c| c.points.len() == StartupOptions::default().nodes_internal)
            .collect();
        assert_eq!(internal.len(), 1);
        let len = internal[0].euclidean_length();
        let expect = (2.0 * t0).sqrt() * 0.545;
        assert!(
            (len - expect).abs() < 0.25 * expect,
            "internal edge length {len}, expected about {expect}"
        );
    }

    #[test]
    fn the_two_cross_resolutions_differ() {
        let net = fixtures::orthogonal_cross(1.0, 48);
        let topos = enumerate_resolutions(4, false).unwrap();
        let a = start_from_irregular(&net, &[(0, topos[0].clone())], 0.005, &StartupOptions::default())
            .unwrap();
        let b = start_from_irregular(&net, &[(0, topos[1].clone())], 0.005, &StartupOptions::default())
            .unwrap();
        let d = crate::flow::geometric_distance(&a.net, &b.net, 150);
        let mesh = 1.0 / 48.0;
        assert!(d > 10.0 * mesh * 0.1, "resolutions too close: {d}");
        assert!(d > 0.02, "absolute separation too small: {d}");
    }

    #[test]
    fn disconnected_pairing_fuses_curves() {
        let net = fixtures::orthogonal_cross(1.0, 48);
        let all = enumerate_resolutions(4, true).unwrap();
        let disc = all.iter().find(|t| !t.is_connected()).unwrap();
        let state =
            start_from_irregular(&net, &[(0, disc.clone())], 0.005, &StartupOptions::default())
                .unwrap();
        // 4 curves fuse pairwise into 2
        assert_eq!(state.net.curves.len(), 2);
        assert!(state
            .net
            .vertices
            .iter()
            .all(|v| matches!(v.kind, VertexKind::Exterior)));
    }
}
