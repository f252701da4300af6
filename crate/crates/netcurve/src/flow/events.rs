//! Standard transitions: an internal edge shrinking to zero length with
//! bounded curvature. The limit network contracts the edge to a 4-valent
//! vertex; restarting resolves that vertex with a fresh soliton insertion.

use super::startup::{start_from_irregular, StartupOptions};
use super::{FlowError, FlowState};
use crate::geom::Vec2;
use crate::net::{CurveEnd, Network, TopologyDescriptor, VertexKind};
use crate::numeric::interior_stencil;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct TransitionEvent {
    pub time: f64,
    /// the contracted (now irregular) vertex in the limit network
    pub vertex: usize,
    /// curve id of the vanished edge in the pre-event network
    pub vanished_edge: usize,
    pub edge_length: f64,
    pub max_curvature: f64,
    /// consecutive ray angles at the limit vertex, radians
    pub angles: Vec<f64>,
    pub limit: Network,
}

fn max_curvature(curve: &crate::net::PolyCurve) -> f64 {
    let mut worst = 0.0f64;
    for i in 1..curve.points.len() - 1 {
        let (w1, w2) = interior_stencil(
            curve.params[i] - curve.params[i - 1],
            curve.params[i + 1] - curve.params[i],
        );
        let d1 = curve.points[i - 1] * w1[0] + curve.points[i] * w1[1] + curve.points[i + 1] * w1[2];
        let d2 = curve.points[i - 1] * w2[0] + curve.points[i] * w2[1] + curve.points[i + 1] * w2[2];
        let sp = d1.norm();
        if sp > 0.0 {
            worst = worst.max((d1.cross(d2)).abs() / sp.powi(3));
        }
    }
    worst
}

/// Detect a standard transition: an internal edge shorter than `eps_edge`
/// with curvature bounded by `kappa_cap` on the surrounding cluster. Returns
/// the limit network with the edge contracted to a single vertex.
pub fn detect_transition(
    state: &FlowState,
    eps_edge: f64,
    kappa_cap: f64,
) -> Result<Option<TransitionEvent>, FlowError> {
    if eps_edge <= 0.0 {
        return Ok(None);
    }
    let net = &state.net;
    // locate vertices by curve end
    let mut end_vertex = vec![[usize::MAX; 2]; net.curves.len()];
    for (vi, v) in net.vertices.iter().enumerate() {
        for &(ci, end) in &v.incident {
            end_vertex[ci][match end {
                CurveEnd::Start => 0,
                CurveEnd::End => 1,
            }] = vi;
        }
    }
    for (ci, c) in net.curves.iter().enumerate() {
        if c.closed {
            continue;
        }
        let (v0, v1) = (end_vertex[ci][0], end_vertex[ci][1]);
        let internal = matches!(net.vertices[v0].kind, VertexKind::Interior)
            && matches!(net.vertices[v1].kind, VertexKind::Interior);
        if !internal {
            continue;
        }
        let len = c.euclidean_length();
        if len >= eps_edge {
            continue;
        }
        // curvature over the cluster: the short edge and its incident curves
        let mut kappa = max_curvature(c);
        for v in [v0, v1] {
            for &(cj, _) in &net.vertices[v].incident {
                if cj != ci {
                    kappa = kappa.max(max_curvature(&net.curves[cj]));
                }
            }
        }
        if kappa > kappa_cap {
            return Err(FlowError::UnsupportedSingularity { kappa, cap: kappa_cap });
        }
        // contract: new vertex at the edge midpoint
        let mid = (net.vertices[v0].position + net.vertices[v1].position) * 0.5;
        let mut limit = net.clone();
        // reattach all other arms of v0, v1 to the midpoint
        let mut incident = Vec::new();
        for v in [v0, v1] {
            for &(cj, end) in &net.vertices[v].incident {
                if cj == ci {
                    continue;
                }
                incident.push((cj, end));
                // snap the endpoint onto the new vertex
                let curve = &mut limit.curves[cj];
                match end {
                    CurveEnd::Start => curve.points[0] = mid,
                    CurveEnd::End => {
                        let n = curve.points.len();
                        curve.points[n - 1] = mid;
                    }
                }
            }
        }
        // remove the collapsed curve and the two old vertices; remap ids
        limit.curves.remove(ci);
        for (_, _) in &incident {}
        let fix_id = |cj: usize| if cj > ci { cj - 1 } else { cj };
        let mut new_vertices = Vec::new();
        for (vi, v) in limit.vertices.iter().enumerate() {
            if vi == v0 || vi == v1 {
                continue;
            }
            let mut nv = v.clone();
            nv.incident = nv
                .incident
                .iter()
                .map(|&(cj, end)| (fix_id(cj), end))
                .collect();
            new_vertices.push(nv);
        }
        let vertex_id = new_vertices.len();
        new_vertices.push(crate::net::Vertex {
            kind: VertexKind::Interior,
            position: mid,
            incident: incident.iter().map(|&(cj, end)| (fix_id(cj), end)).collect(),
        });
        limit.vertices = new_vertices;
        limit.validate()?;
        // angles between consecutive rays at the contracted vertex
        let fans = crate::net::extract_fans(&limit)?;
        let fan = fans
            .iter()
            .find(|f| f.center.dist(mid) < 1e-12)
            .expect("contracted vertex must carry a fan");
        let k = fan.directions.len();
        let angles: Vec<f64> = (0..k)
            .map(|i| {
                let mut d = fan.directions[(i + 1) % k].angle() - fan.directions[i].angle();
                if d <= 0.0 {
                    d += 2.0 * std::f64::consts::PI;
                }
                d
            })
            .collect();
        return Ok(Some(TransitionEvent {
            time: state.time,
            vertex: vertex_id,
            vanished_edge: ci,
            edge_length: len,
            max_curvature: kappa,
            angles,
            limit,
        }));
    }
    Ok(None)
}

/// Restart the flow through a standard transition: resolve the contracted
/// vertex with the chosen topology at a fresh startup offset.
pub fn restart(
    event: &TransitionEvent,
    choice: &TopologyDescriptor,
    t_offset: f64,
    opts: &StartupOptions,
) -> Result<FlowState, FlowError> {
    let state = start_from_irregular(
        &event.limit,
        &[(event.vertex, choice.clone())],
        t_offset,
        opts,
    )?;
    Ok(FlowState { time: event.time + t_offset, net: state.net })
}

/// Positions helper for tests: midpoint of the contracted edge.
pub fn contracted_position(event: &TransitionEvent) -> Vec2 {
    event.limit.vertices[event.vertex].position
}
