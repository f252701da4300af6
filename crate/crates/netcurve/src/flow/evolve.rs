//! Trajectory driver: repeated semi-implicit steps with an adaptive step
//! bound, snapshot recording, the per-step length audit, optional arclength
//! resampling, and the rescaled self-similarity diagnostic for soliton
//! slices.

use super::events::{detect_transition, TransitionEvent};
use super::step::{stable_dt, step, StepOptions};
use super::{FlowError, FlowState};
use crate::expander::{truncate_and_scale, SolitonNetwork};
use crate::geom::{point_polyline_dist, resample_by_arclength, Vec2};
use crate::net::VertexKind;

#[derive(Clone)]
pub struct EvolveOptions<'a> {
    pub dt_max: f64,
    /// multiple of the squared-spacing bound used for the adaptive step
    pub cfl: f64,
    pub step: StepOptions<'a>,
    /// resample curves to uniform arclength every k steps (0 = never)
    pub resample_every: usize,
    /// tolerated per-step length increase before a step is retried
    pub length_tol: f64,
    /// detect standard transitions with (edge threshold, curvature cap)
    pub transition: Option<(f64, f64)>,
}

impl Default for EvolveOptions<'_> {
    fn default() -> Self {
        EvolveOptions {
            dt_max: 1e-3,
            cfl: 0.5,
            step: StepOptions::default(),
            resample_every: 0,
            length_tol: 1e-10,
            transition: None,
        }
    }
}

pub struct Trajectory {
    pub snapshots: Vec<FlowState>,
    /// (time, total length) per accepted step
    pub lengths: Vec<(f64, f64)>,
    pub event: Option<TransitionEvent>,
    pub final_state: FlowState,
}

impl Trajectory {
    pub fn length_monotone(&self, tol: f64) -> bool {
        self.lengths.windows(2).all(|w| w[1].1 <= w[0].1 + tol)
    }
}

/// Evolve to `t_end`, recording snapshots at the requested times. Stops
/// early with an event when transition detection is enabled and fires.
pub fn evolve(
    state0: FlowState,
    t_end: f64,
    snapshots: &[f64],
    opts: &EvolveOptions,
) -> Result<Trajectory, FlowError> {
    let mut state = state0;
    let mut out_snaps = Vec::new();
    let mut lengths = vec![(state.time, state.net.total_length())];
    let mut snap_idx = 0usize;
    let record =
        |state: &FlowState, snap_idx: &mut usize, out: &mut Vec<FlowState>| {
            while *snap_idx < snapshots.len() && snapshots[*snap_idx] <= state.time + 1e-12 {
                out.push(state.clone());
                *snap_idx += 1;
            }
        };
    record(&state, &mut snap_idx, &mut out_snaps);
    let mut steps_since_resample = 0usize;
    while state.time < t_end - 1e-13 {
        let mut dt = opts
            .dt_max
            .min(opts.cfl * stable_dt(&state))
            .min(t_end - state.time);
        if let Some(next_snap) = snapshots.get(snap_idx) {
            if *next_snap > state.time {
                dt = dt.min(next_snap - state.time);
            }
        }
        let prev_len = lengths.last().unwrap().1;
        let mut accepted = None;
        let mut try_dt = dt;
        for _ in 0..6 {
            let cand = step(&state, try_dt, &opts.step)?;
            let len = cand.net.total_length();
            if len <= prev_len + opts.length_tol {
                accepted = Some((cand, len));
                break;
            }
            try_dt *= 0.5;
        }
        let (next, len) = match accepted {
            Some(v) => v,
            None => {
                let cand = step(&state, try_dt, &opts.step)?;
                let len = cand.net.total_length();
                if len > prev_len + opts.length_tol {
                    return Err(FlowError::LengthGrew(len - prev_len));
                }
                (cand, len)
            }
        };
        state = next;
        lengths.push((state.time, len));
        record(&state, &mut snap_idx, &mut out_snaps);
        if let Some((eps_edge, kappa_cap)) = opts.transition {
            if let Some(event) = detect_transition(&state, eps_edge, kappa_cap)? {
                return Ok(Trajectory {
                    snapshots: out_snaps,
                    lengths,
                    event: Some(event),
                    final_state: state,
                });
            }
        }
        steps_since_resample += 1;
        if opts.resample_every > 0 && steps_since_resample >= opts.resample_every {
            state = resample_state(&state);
            steps_since_resample = 0;
        }
    }
    Ok(Trajectory { snapshots: out_snaps, lengths, event: None, final_state: state })
}

/// Arclength resampling of every curve (same node counts, uniform
/// parameters); a geometric no-op used to keep parametrizations healthy.
pub fn resample_state(state: &FlowState) -> FlowState {
    let mut net = state.net.clone();
    for c in &mut net.curves {
        let n = c.points.len();
        c.points = resample_by_arclength(&c.points, n);
        c.params = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    }
    FlowState { time: state.time, net }
}

/// Evolve the exact truncated slice of a soliton from t0 to t1, moving the
/// exterior pins along their exact self-similar trajectories, and return the
/// largest rescaled Hausdorff deviation from the soliton over the sampled
/// times.
pub fn self_similarity_check(
    sol: &SolitonNetwork,
    t0: f64,
    t1: f64,
    nodes_per_arc: usize,
    dt_max: f64,
    checks: usize,
) -> Result<f64, FlowError> {
    let scale0 = (2.0 * t0).sqrt();
    let r = 0.98 * scale0 * sol.radius;
    let patch = truncate_and_scale(sol, t0, r)?;
    // build the network, remembering each exterior pin's eta-point
    let mut curves = Vec::new();
    let mut vertices: Vec<crate::net::Vertex> = patch
        .junction_positions
        .iter()
        .map(|&p| crate::net::Vertex {
            kind: VertexKind::Interior,
            position: p,
            incident: vec![],
        })
        .collect();
    let mut pin_eta: Vec<(usize, Vec2)> = Vec::new(); // vertex id -> eta point
    for (ci, (curve, ends)) in patch.curves.iter().zip(&patch.ends).enumerate() {
        let pts = resample_by_arclength(&curve.points, nodes_per_arc);
        let params: Vec<f64> = (0..pts.len())
            .map(|i| i as f64 / (pts.len() - 1) as f64)
            .collect();
        curves.push(crate::net::PolyCurve { params, points: pts.clone(), closed: false });
        for (which, end) in [(crate::net::CurveEnd::Start, ends.0), (crate::net::CurveEnd::End, ends.1)] {
            match end {
                crate::expander::PatchEnd::Junction(j) => {
                    vertices[j].incident.push((ci, which));
                }
                crate::expander::PatchEnd::Ray(_) => {
                    let pos = match which {
                        crate::net::CurveEnd::Start => pts[0],
                        crate::net::CurveEnd::End => *pts.last().unwrap(),
                    };
                    let vid = vertices.len();
                    vertices.push(crate::net::Vertex {
                        kind: VertexKind::Exterior,
                        position: pos,
                        incident: vec![(ci, which)],
                    });
                    pin_eta.push((vid, pos / scale0));
                }
            }
        }
    }
    let net = crate::net::Network { curves, vertices };
    net.validate()?;
    let motion = move |vid: usize, t: f64| -> Vec2 {
        let scale = (2.0 * t).sqrt();
        for &(v, eta) in &pin_eta {
            if v == vid {
                return eta * scale;
            }
        }
        unreachable!("unknown exterior vertex {vid}")
    };
    let step_opts = StepOptions { boundary_motion: Some(&motion), ..Default::default() };
    // the network expands as its pins move outward, so the gradient-flow
    // length audit does not apply here
    let opts = EvolveOptions {
        dt_max,
        step: step_opts,
        length_tol: f64::INFINITY,
        ..Default::default()
    };
    let mut state = FlowState::new(t0, net);
    // reference point sets of the soliton, clipped to the rescaled window
    let r_eta = 0.92 * r / scale0;
    let ref_polys: Vec<Vec<Vec2>> = sol
        .arcs
        .iter()
        .map(|a| a.points.iter().copied().filter(|p| p.norm() <= r_eta).collect::<Vec<_>>())
        .filter(|v: &Vec<Vec2>| v.len() >= 2)
        .collect();
    let mut worst = 0.0f64;
    for k in 1..=checks {
        let t_target = t0 + (t1 - t0) * k as f64 / checks as f64;
        let traj = evolve(state, t_target, &[], &opts)?;
        state = traj.final_state;
        let scale = (2.0 * state.time).sqrt();
        // one-sided distances both ways over the comparison window
        let computed: Vec<Vec<Vec2>> = state
            .net
            .curves
            .iter()
            .map(|c| {
                c.points
                    .iter()
                    .map(|&p| p / scale)
                    .filter(|p| p.norm() <= r_eta)
                    .collect::<Vec<_>>()
            })
            .filter(|v: &Vec<Vec2>| v.len() >= 2)
            .collect();
        let mut dev = 0.0f64;
        for poly in &computed {
            for p in poly {
                let d = ref_polys
                    .iter()
                    .map(|q| point_polyline_dist(*p, q))
                    .fold(f64::INFINITY, f64::min);
                dev = dev.max(d);
            }
        }
        for poly in &ref_polys {
            for p in poly {
                if p.norm() > 0.9 * r_eta {
                    continue; // window edges differ by O(mesh), skip the rim
                }
                let d = computed
                    .iter()
                    .map(|q| point_polyline_dist(*p, q))
                    .fold(f64::INFINITY, f64::min);
                dev = dev.max(d);
            }
        }
        worst = worst.max(dev);
    }
    Ok(worst)
}
