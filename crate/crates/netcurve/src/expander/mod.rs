//! Expanding self-similar solitons: geodesic Steiner networks in the
//! expander metric g = e^{|x|^2} |dx|^2, the self-similar parametrization
//! eta(s) with eta''/|eta'|^2 + s eta' - eta = 0, junction balance, far-field
//! asymptotics eta(s) = a s + O(e^{-C s^2}), and the truncated physical
//! slices sqrt(2t) eta(x / sqrt(2t)) used to resolve irregular vertices.

mod solve;

pub use solve::{geodesic_bvp, solve_soliton, SolveOptions};

use crate::geom::Vec2;
use crate::net::{Fan, PolyCurve, TopologyDescriptor};
use crate::numeric::{interior_stencil, linear_fit, onesided_stencil};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExpanderError {
    #[error("solver failed to converge: residual {residual:.3e} after {iters} iterations")]
    SolverFailure { residual: f64, iters: usize },
    #[error("topology degenerated during solve: internal edge {edge} collapsed")]
    TopologyDegenerate { edge: usize },
    #[error("need at least 3 samples, got {0}")]
    InsufficientData(usize),
    #[error("asymptotic fit failed: {0}")]
    FitFailure(String),
    #[error("arc has no asymptotic end")]
    NotExternal,
    #[error("far-end grid reaches only s = {reach:.2}, need {need:.2}")]
    GridTooShort { reach: f64, need: f64 },
    #[error("excision radius {r} exceeds truncated slice radius {max}")]
    RadiusTooLarge { r: f64, max: f64 },
    #[error("angles coincide modulo 2 pi")]
    CoincidentAngles,
}

/// One arc of a soliton network in the self-similar parameter s.
#[derive(Debug, Clone, Serialize)]
pub struct ExpanderArc {
    pub s: Vec<f64>,
    pub points: Vec<Vec2>,
    /// asymptotic ray direction, present on unbounded (external) ends
    pub asymptotic: Option<Vec2>,
}

/// Which end of an arc.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ArcEnd {
    Lo,
    Hi,
}

/// Interior vertex of the soliton network.
#[derive(Debug, Clone, Serialize)]
pub struct SolitonJunction {
    pub position: Vec2,
    pub arms: Vec<(usize, ArcEnd)>,
}

/// A solved soliton network for one fan and one resolution choice.
#[derive(Debug, Clone)]
pub struct SolitonNetwork {
    pub arcs: Vec<ExpanderArc>,
    pub junctions: Vec<SolitonJunction>,
    pub topology: TopologyDescriptor,
    pub fan: Fan,
    /// ball radius the solve was truncated to
    pub radius: f64,
    /// arc index carrying each fan ray, in fan order
    pub ray_arcs: Vec<(usize, ArcEnd)>,
    /// converged max residual
    pub residual: f64,
}

impl ExpanderArc {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Derivative samples at an interior node.
    pub fn derivatives(&self, i: usize) -> (Vec2, Vec2) {
        let h0 = self.s[i] - self.s[i - 1];
        let h1 = self.s[i + 1] - self.s[i];
        let (d1, d2) = interior_stencil(h0, h1);
        let dp = self.points[i - 1] * d1[0] + self.points[i] * d1[1] + self.points[i + 1] * d1[2];
        let ddp = self.points[i - 1] * d2[0] + self.points[i] * d2[1] + self.points[i + 1] * d2[2];
        (dp, ddp)
    }

    /// Unit tangent pointing into the arc from the given end.
    pub fn inward_tangent(&self, end: ArcEnd) -> Vec2 {
        let n = self.len();
        match end {
            ArcEnd::Lo => {
                let w = onesided_stencil(self.s[1] - self.s[0], self.s[2] - self.s[1]);
                (self.points[0] * w[0] + self.points[1] * w[1] + self.points[2] * w[2])
                    .normalized()
            }
            ArcEnd::Hi => {
                let w = onesided_stencil(
                    self.s[n - 1] - self.s[n - 2],
                    self.s[n - 2] - self.s[n - 3],
                );
                (self.points[n - 1] * w[0] + self.points[n - 2] * w[1]
                    + self.points[n - 3] * w[2])
                    .normalized()
            }
        }
    }

    /// |d_s eta| at the far (Hi) node by a one-sided stencil.
    pub fn speed_at_far_end(&self) -> f64 {
        let n = self.len();
        let w = onesided_stencil(self.s[n - 1] - self.s[n - 2], self.s[n - 2] - self.s[n - 3]);
        (self.points[n - 1] * w[0] + self.points[n - 2] * w[1] + self.points[n - 3] * w[2]).norm()
    }

    /// mu = s eta' - eta at interior nodes; decays like e^{-C s^2} on true
    /// soliton arcs.
    pub fn mu_samples(&self) -> Vec<(f64, f64)> {
        (1..self.len() - 1)
            .map(|i| {
                let (dp, _) = self.derivatives(i);
                (self.s[i], (self.points[i] - dp * self.s[i]).norm())
            })
            .collect()
    }
}

/// Max-norm residual of the normal (geometric) expander equation
/// kappa - <eta, nu> over interior nodes, with nu the left rotation of the
/// unit tangent and discrete derivatives matching the solver stencils.
pub fn soliton_residual(arc: &ExpanderArc) -> Result<f64, ExpanderError> {
    if arc.len() < 3 {
        return Err(ExpanderError::InsufficientData(arc.len()));
    }
    let mut worst = 0.0f64;
    for i in 1..arc.len() - 1 {
        let (dp, ddp) = arc.derivatives(i);
        let speed2 = dp.norm_sq();
        let nu = dp.rot90() / speed2.sqrt();
        let kappa = ddp.dot(nu) / speed2;
        worst = worst.max((kappa - arc.points[i].dot(nu)).abs());
    }
    Ok(worst)
}

/// Result of fitting the far-field ray of an external arc.
#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticFit {
    pub direction: Vec2,
    /// slope of log |mu| against s^2 over the fit window, when mu is above
    /// the numerical floor
    pub decay_slope: Option<f64>,
    pub mu_max_in_window: f64,
}

/// Fit eta(s) ~ a s at the far end and measure the decay of
/// mu = s eta' - eta against s^2 on the window [2, 4] (or what the grid
/// reaches). Errors when the decay is non-monotone beyond noise.
pub fn asymptotic_fit(arc: &ExpanderArc) -> Result<AsymptoticFit, ExpanderError> {
    if arc.asymptotic.is_none() {
        return Err(ExpanderError::NotExternal);
    }
    let smax = *arc.s.last().unwrap();
    if smax < 3.0 {
        return Err(ExpanderError::GridTooShort { reach: smax, need: 3.0 });
    }
    // weighted limit of eta(s)/s over the last decade of the grid
    let lo = smax / 3.16227766;
    let mut acc = Vec2::default();
    let mut wsum = 0.0;
    for (i, &s) in arc.s.iter().enumerate() {
        if s >= lo && s > 0.0 {
            let w = s * s;
            acc += arc.points[i] / s * w;
            wsum += w;
        }
    }
    let direction = (acc / wsum).normalized();

    let window = (2.0, smax.min(4.0));
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut mu_max = 0.0f64;
    let floor = 1e-13;
    for (s, mu) in arc.mu_samples() {
        if s >= window.0 && s <= window.1 {
            mu_max = mu_max.max(mu);
            if mu > floor {
                xs.push(s * s);
                ys.push(mu.ln());
            }
        }
    }
    if xs.len() < 4 {
        // mu at the numerical floor: straight-ray case, decay is exact
        return Ok(AsymptoticFit { direction, decay_slope: None, mu_max_in_window: mu_max });
    }
    let (slope, intercept) = linear_fit(&xs, &ys);
    // flag grossly non-monotone decay: fit residual comparable to the spread
    let spread = ys.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
        - ys.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    let mut ss_res = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        let p = slope * x + intercept;
        ss_res += (y - p) * (y - p);
    }
    let rms = (ss_res / xs.len() as f64).sqrt();
    if slope >= 0.0 && spread > 2.0 {
        return Err(ExpanderError::FitFailure(format!(
            "mu grows along the window (slope {slope:.3e}, rms {rms:.3e})"
        )));
    }
    Ok(AsymptoticFit { direction, decay_slope: Some(slope), mu_max_in_window: mu_max })
}

/// Weighted length in the expander metric: integral of e^{|x|^2/2} along the
/// polyline (endpoint-averaged weights per segment).
pub fn g_length(points: &[Vec2]) -> f64 {
    points
        .windows(2)
        .map(|w| {
            let wa = (0.5 * w[0].norm_sq()).exp();
            let wb = (0.5 * w[1].norm_sq()).exp();
            0.5 * (wa + wb) * w[0].dist(w[1])
        })
        .sum()
}

impl SolitonNetwork {
    pub fn total_g_length(&self) -> f64 {
        self.arcs.iter().map(|a| g_length(&a.points)).sum()
    }

    /// Worst junction-balance norm |sum of unit tangents|.
    pub fn junction_balance(&self) -> f64 {
        self.junctions
            .iter()
            .map(|j| {
                j.arms
                    .iter()
                    .fold(Vec2::default(), |acc, &(a, end)| {
                        acc + self.arcs[a].inward_tangent(end)
                    })
                    .norm()
            })
            .fold(0.0, f64::max)
    }

    /// Max residual over all arcs.
    pub fn max_residual(&self) -> f64 {
        self.arcs
            .iter()
            .map(|a| soliton_residual(a).unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max)
    }

    /// Hausdorff distance to another network over the sampled points.
    pub fn hausdorff_to(&self, other: &SolitonNetwork) -> f64 {
        let polys_a: Vec<&[Vec2]> = self.arcs.iter().map(|a| a.points.as_slice()).collect();
        let polys_b: Vec<&[Vec2]> = other.arcs.iter().map(|a| a.points.as_slice()).collect();
        let one_sided = |from: &[&[Vec2]], to: &[&[Vec2]]| {
            let mut worst = 0.0f64;
            for poly in from {
                for p in poly.iter() {
                    let d = to
                        .iter()
                        .map(|q| crate::geom::point_polyline_dist(*p, q))
                        .fold(f64::INFINITY, f64::min);
                    worst = worst.max(d);
                }
            }
            worst
        };
        one_sided(&polys_a, &polys_b).max(one_sided(&polys_b, &polys_a))
    }

    pub fn rotated(&self, phi: f64) -> SolitonNetwork {
        let mut out = self.clone();
        for a in &mut out.arcs {
            for p in &mut a.points {
                *p = p.rotated(phi);
            }
            if let Some(d) = a.asymptotic {
                a.asymptotic = Some(d.rotated(phi));
            }
        }
        for j in &mut out.junctions {
            j.position = j.position.rotated(phi);
        }
        out.fan = self.fan.rotated(phi);
        out
    }
}

/// The physical-coordinates slice of a truncated soliton.
#[derive(Debug, Clone)]
pub struct SolitonPatch {
    pub curves: Vec<PolyCurve>,
    /// per curve: what each end attaches to
    pub ends: Vec<(PatchEnd, PatchEnd)>,
    pub junction_positions: Vec<Vec2>,
    pub scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PatchEnd {
    Junction(usize),
    /// exits the excision ball along the given fan ray index
    Ray(usize),
}

/// Scale the soliton to its physical slice at time `t0` (factor sqrt(2 t0))
/// and clip to the ball of radius `r`. Junction structure is preserved;
/// curve parameters are reset to arclength fractions of [0, 1].
pub fn truncate_and_scale(
    sol: &SolitonNetwork,
    t0: f64,
    r: f64,
) -> Result<SolitonPatch, ExpanderError> {
    let scale = (2.0 * t0).sqrt();
    let max_r = scale * sol.radius;
    if r > max_r * (1.0 - 1e-9) {
        return Err(ExpanderError::RadiusTooLarge { r, max: max_r });
    }
    let mut curves = Vec::new();
    let mut ends = Vec::new();
    for (ai, arc) in sol.arcs.iter().enumerate() {
        let phys: Vec<Vec2> = arc.points.iter().map(|&p| p * scale).collect();
        // classify this arc's ends
        let end_of = |end: ArcEnd| -> PatchEnd {
            for (ji, j) in sol.junctions.iter().enumerate() {
                if j.arms.contains(&(ai, end)) {
                    return PatchEnd::Junction(ji);
                }
            }
            let ray = sol
                .ray_arcs
                .iter()
                .position(|&(a, e)| a == ai && e == end)
                .expect("non-junction arc end must carry a fan ray");
            PatchEnd::Ray(ray)
        };
        let lo = end_of(ArcEnd::Lo);
        let hi = end_of(ArcEnd::Hi);
        // clip external ends to the ball of radius r
        let clipped = clip_to_ball(&phys, r, matches!(lo, PatchEnd::Ray(_)), matches!(hi, PatchEnd::Ray(_)));
        let pts = clipped;
        if pts.len() < 2 {
            return Err(ExpanderError::RadiusTooLarge { r, max: max_r });
        }
        let mut params = vec![0.0];
        let mut acc = 0.0;
        for w in pts.windows(2) {
            acc += w[0].dist(w[1]);
            params.push(acc);
        }
        for p in &mut params {
            *p /= acc;
        }
        curves.push(PolyCurve { params, points: pts, closed: false });
        ends.push((lo, hi));
    }
    Ok(SolitonPatch {
        curves,
        ends,
        junction_positions: sol.junctions.iter().map(|j| j.position * scale).collect(),
        scale,
    })
}

fn clip_to_ball(pts: &[Vec2], r: f64, clip_lo: bool, clip_hi: bool) -> Vec<Vec2> {
    let inside = |p: &Vec2| p.norm() <= r;
    let mut out: Vec<Vec2> = pts.to_vec();
    if clip_hi {
        let mut cut = None;
        for i in 0..out.len() - 1 {
            if inside(&out[i]) && !inside(&out[i + 1]) {
                let t = ball_crossing(out[i], out[i + 1], r);
                cut = Some((i, out[i].lerp(out[i + 1], t)));
                break;
            }
        }
        if let Some((i, p)) = cut {
            out.truncate(i + 1);
            out.push(p);
        }
    }
    if clip_lo {
        let mut cut = None;
        for i in (1..out.len()).rev() {
            if inside(&out[i]) && !inside(&out[i - 1]) {
                let t = ball_crossing(out[i], out[i - 1], r);
                cut = Some((i, out[i].lerp(out[i - 1], t)));
                break;
            }
        }
        if let Some((i, p)) = cut {
            out.drain(..i);
            out.insert(0, p);
        }
    }
    out
}

fn ball_crossing(a: Vec2, b: Vec2, r: f64) -> f64 {
    // |a + t (b-a)| = r, t in (0, 1]
    let d = b - a;
    let aa = d.norm_sq();
    let bb = 2.0 * a.dot(d);
    let cc = a.norm_sq() - r * r;
    let disc = (bb * bb - 4.0 * aa * cc).max(0.0).sqrt();
    ((-bb + disc) / (2.0 * aa)).clamp(0.0, 1.0)
}

/// g-length of the bare fan inside the ball of radius `radius`.
pub fn fan_g_length(fan: &Fan, radius: f64) -> f64 {
    // per ray: int_0^R e^{r^2/2} dr by fine trapezoid
    let n = 4000;
    let mut per_ray = 0.0;
    let h = radius / n as f64;
    for i in 0..n {
        let a = i as f64 * h;
        let b = a + h;
        per_ray += 0.5 * h * ((0.5 * a * a).exp() + (0.5 * b * b).exp());
    }
    per_ray * fan.valence() as f64
}

/// Straight-triod soliton for a balanced 3-fan: arcs eta = a_j s exactly.
/// Used as the closed-form reference in tests.
pub fn straight_star(fan: &Fan, radius: f64, nodes: usize) -> SolitonNetwork {
    let mut arcs = Vec::new();
    let mut arms = Vec::new();
    let mut ray_arcs = Vec::new();
    for (i, dir) in fan.directions.iter().enumerate() {
        let s: Vec<f64> = crate::numeric::graded_grid(radius, nodes, 1.5);
        let points: Vec<Vec2> = s.iter().map(|&v| *dir * v).collect();
        arcs.push(ExpanderArc { s, points, asymptotic: Some(*dir) });
        arms.push((i, ArcEnd::Lo));
        ray_arcs.push((i, ArcEnd::Hi));
    }
    let k = fan.valence();
    SolitonNetwork {
        arcs,
        junctions: vec![SolitonJunction { position: Vec2::default(), arms }],
        topology: crate::net::enumerate_resolutions(k, false).unwrap()[0].clone(),
        fan: fan.clone(),
        radius,
        ray_arcs,
        residual: 0.0,
    }
}

/// Catalog export: per-arc CSV (s, x, y, residual) and a JSON manifest.
pub fn catalog_csv(sol: &SolitonNetwork) -> Vec<String> {
    sol.arcs
        .iter()
        .map(|arc| {
            let mut out = String::from("s,x,y,residual\n");
            for i in 0..arc.len() {
                let res = if i > 0 && i + 1 < arc.len() {
                    let (dp, ddp) = arc.derivatives(i);
                    let speed2 = dp.norm_sq();
                    let nu = dp.rot90() / speed2.sqrt();
                    (ddp.dot(nu) / speed2 - arc.points[i].dot(nu)).abs()
                } else {
                    0.0
                };
                out.push_str(&format!(
                    "{},{},{},{:e}\n",
                    arc.s[i], arc.points[i].x, arc.points[i].y, res
                ));
            }
            out
        })
        .collect()
}

pub fn catalog_manifest(sol: &SolitonNetwork) -> serde_json::Value {
    let fits: Vec<_> = sol
        .ray_arcs
        .iter()
        .map(|&(a, _)| {
            asymptotic_fit(&sol.arcs[a])
                .map(|f| serde_json::json!({
                    "direction": [f.direction.x, f.direction.y],
                    "decay_slope": f.decay_slope,
                }))
                .unwrap_or(serde_json::Value::Null)
        })
        .collect();
    serde_json::json!({
        "fan_angles": sol.fan.directions.iter().map(|d| d.angle()).collect::<Vec<_>>(),
        "topology": sol.topology.display_string(),
        "junctions": sol
            .junctions
            .iter()
            .map(|j| [j.position.x, j.position.y])
            .collect::<Vec<_>>(),
        "radius": sol.radius,
        "residual": sol.residual,
        "asymptotic_fits": fits,
    })
}
