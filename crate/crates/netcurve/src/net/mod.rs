//! Discrete planar-network data model: sampled curves, vertices with
//! incidence, regularity checking, and fan extraction.
//!
//! A network is a finite union of embedded regular curves meeting in groups
//! of at least three at interior vertices. A vertex is regular when exactly
//! three curve ends meet with unit tangents summing to zero (equal 2*pi/3
//! angles); anything else is irregular and is later resolved by soliton
//! insertion.

mod topology;
pub mod io;

pub use topology::{
    enumerate_resolutions, predicted_counts, BlockTree, ResolutionCounts, TopologyDescriptor,
};

use crate::geom::{polyline_length, segments_cross, Vec2};
use crate::numeric::onesided_stencil;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("curve {curve}: {what}")]
    InvalidCurve { curve: usize, what: String },
    #[error("vertex {vertex}: {what}")]
    InvalidVertex { vertex: usize, what: String },
    #[error("incidence inconsistent: {0}")]
    Incidence(String),
    #[error("curves {a} and {b} intersect away from vertices")]
    Embeddedness { a: usize, b: usize },
    #[error("vertex {vertex}: valence {valence} unsupported (need k >= 3)")]
    UnsupportedValence { vertex: usize, valence: usize },
}

/// Which end of a curve participates in an incidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveEnd {
    Start,
    End,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexKind {
    Interior,
    Exterior,
}

/// A sampled parametrized arc: positions over an ordered grid on [0, 1].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolyCurve {
    pub params: Vec<f64>,
    pub points: Vec<Vec2>,
    #[serde(default)]
    pub closed: bool,
}

impl PolyCurve {
    pub fn new(params: Vec<f64>, points: Vec<Vec2>) -> Self {
        PolyCurve { params, points, closed: false }
    }

    /// Straight segment sampled on m+1 uniform parameters.
    pub fn segment(a: Vec2, b: Vec2, m: usize) -> Self {
        let params: Vec<f64> = (0..=m).map(|i| i as f64 / m as f64).collect();
        let points = params.iter().map(|&t| a.lerp(b, t)).collect();
        PolyCurve::new(params, points)
    }

    /// Closed circle of radius r about `center`, m segments, counterclockwise.
    pub fn circle(center: Vec2, r: f64, m: usize) -> Self {
        let params: Vec<f64> = (0..=m).map(|i| i as f64 / m as f64).collect();
        let points = params
            .iter()
            .map(|&t| center + Vec2::from_angle(2.0 * std::f64::consts::PI * t) * r)
            .collect();
        PolyCurve { params, points, closed: true }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn endpoint(&self, end: CurveEnd) -> Vec2 {
        match end {
            CurveEnd::Start => self.points[0],
            CurveEnd::End => *self.points.last().unwrap(),
        }
    }

    pub fn euclidean_length(&self) -> f64 {
        polyline_length(&self.points)
    }

    /// Outward tangent at an end, i.e. pointing from the endpoint into the
    /// curve. One-sided second-order difference on the parameter grid.
    pub fn inward_tangent(&self, end: CurveEnd) -> Result<Vec2, NetError> {
        let n = self.points.len();
        if n < 3 {
            return Err(NetError::InvalidCurve {
                curve: usize::MAX,
                what: format!("need at least 3 samples for an end tangent, got {n}"),
            });
        }
        let d = match end {
            CurveEnd::Start => {
                let h0 = self.params[1] - self.params[0];
                let h1 = self.params[2] - self.params[1];
                let w = onesided_stencil(h0, h1);
                self.points[0] * w[0] + self.points[1] * w[1] + self.points[2] * w[2]
            }
            CurveEnd::End => {
                // one-sided stencil over the reversed grid already points into
                // the curve
                let h0 = self.params[n - 1] - self.params[n - 2];
                let h1 = self.params[n - 2] - self.params[n - 3];
                let w = onesided_stencil(h0, h1);
                self.points[n - 1] * w[0] + self.points[n - 2] * w[1] + self.points[n - 3] * w[2]
            }
        };
        if d.norm() == 0.0 || !d.is_finite() {
            return Err(NetError::InvalidCurve {
                curve: usize::MAX,
                what: "degenerate end tangent".into(),
            });
        }
        Ok(d)
    }

    /// Reverse orientation in place.
    pub fn reverse(&mut self) {
        self.points.reverse();
        let toflip: Vec<f64> = self.params.iter().rev().map(|p| 1.0 - p).collect();
        self.params = toflip;
    }

    pub fn validate(&self, index: usize) -> Result<(), NetError> {
        if self.params.len() != self.points.len() {
            return Err(NetError::InvalidCurve {
                curve: index,
                what: "params/points length mismatch".into(),
            });
        }
        if self.points.len() < 2 {
            return Err(NetError::InvalidCurve { curve: index, what: "fewer than 2 samples".into() });
        }
        if (self.params[0] - 0.0).abs() > 1e-12
            || (self.params.last().unwrap() - 1.0).abs() > 1e-12
        {
            return Err(NetError::InvalidCurve {
                curve: index,
                what: "parameter grid must span [0, 1]".into(),
            });
        }
        for w in self.params.windows(2) {
            if !(w[1] > w[0]) {
                return Err(NetError::InvalidCurve {
                    curve: index,
                    what: "parameters not strictly increasing".into(),
                });
            }
        }
        for (i, w) in self.points.windows(2).enumerate() {
            if !w[0].is_finite() || !w[1].is_finite() {
                return Err(NetError::InvalidCurve { curve: index, what: "non-finite sample".into() });
            }
            if w[0].dist(w[1]) == 0.0 {
                return Err(NetError::InvalidCurve {
                    curve: index,
                    what: format!("repeated consecutive points at sample {i}"),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Vertex {
    pub kind: VertexKind,
    pub position: Vec2,
    /// (curve index, which end of it lands here)
    pub incident: Vec<(usize, CurveEnd)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Network {
    pub curves: Vec<PolyCurve>,
    pub vertices: Vec<Vertex>,
}

/// A fan: interior-vertex position plus the cyclically ordered unit ray
/// directions spanned by the incident tangents.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Fan {
    pub center: Vec2,
    pub directions: Vec<Vec2>,
    /// incident (curve, end) in the same cyclic order as `directions`
    pub incident: Vec<(usize, CurveEnd)>,
}

impl Fan {
    pub fn valence(&self) -> usize {
        self.directions.len()
    }

    /// Fan with rays at the given angles about a center.
    pub fn from_angles(center: Vec2, angles: &[f64]) -> Self {
        let mut dirs: Vec<Vec2> = angles.iter().map(|&a| Vec2::from_angle(a)).collect();
        dirs.sort_by(|a, b| a.angle().partial_cmp(&b.angle()).unwrap());
        Fan { center, directions: dirs.clone(), incident: (0..dirs.len()).map(|i| (i, CurveEnd::Start)).collect() }
    }

    pub fn rotated(&self, phi: f64) -> Fan {
        let mut dirs: Vec<Vec2> = self.directions.iter().map(|d| d.rotated(phi)).collect();
        let mut inc = self.incident.clone();
        // keep CCW order starting from smallest angle
        let mut idx: Vec<usize> = (0..dirs.len()).collect();
        idx.sort_by(|&a, &b| dirs[a].angle().partial_cmp(&dirs[b].angle()).unwrap());
        dirs = idx.iter().map(|&i| dirs[i]).collect();
        inc = idx.iter().map(|&i| inc[i]).collect();
        Fan { center: self.center.rotated(phi), directions: dirs, incident: inc }
    }
}

/// Per-vertex outcome of the Herring test.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VertexRegularity {
    pub vertex: usize,
    pub valence: usize,
    pub regular: bool,
    /// |sum of unit tangents| (only meaningful for valence 3)
    pub tangent_sum_norm: f64,
    /// angles between cyclically consecutive rays, radians
    pub angles: Vec<f64>,
    /// max |angle - 2*pi/3| over consecutive rays
    pub max_angle_defect: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegularityReport {
    pub vertices: Vec<VertexRegularity>,
    pub tol: f64,
}

impl RegularityReport {
    pub fn all_regular(&self) -> bool {
        self.vertices.iter().all(|v| v.regular)
    }

    pub fn irregular_vertices(&self) -> Vec<usize> {
        self.vertices.iter().filter(|v| !v.regular).map(|v| v.vertex).collect()
    }
}

impl Network {
    /// Bounding-box diagonal; the scale used for relative tolerances.
    pub fn diameter(&self) -> f64 {
        let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for c in &self.curves {
            for p in &c.points {
                lo.x = lo.x.min(p.x);
                lo.y = lo.y.min(p.y);
                hi.x = hi.x.max(p.x);
                hi.y = hi.y.max(p.y);
            }
        }
        lo.dist(hi)
    }

    pub fn total_length(&self) -> f64 {
        self.curves.iter().map(|c| c.euclidean_length()).sum()
    }

    /// Structural validation: per-curve invariants, two-way incidence
    /// consistency, vertex coincidence, valence bounds, and nontangential
    /// tangents at interior vertices.
    pub fn validate(&self) -> Result<(), NetError> {
        for (i, c) in self.curves.iter().enumerate() {
            c.validate(i)?;
        }
        let tol = 1e-9 * self.diameter().max(1e-30);
        // every open-curve end must appear exactly once
        let mut seen = vec![[false; 2]; self.curves.len()];
        for (vi, v) in self.vertices.iter().enumerate() {
            match v.kind {
                VertexKind::Interior => {
                    if v.incident.len() < 3 {
                        return Err(NetError::InvalidVertex {
                            vertex: vi,
                            what: format!(
                                "interior vertex has {} incident ends, need >= 3",
                                v.incident.len()
                            ),
                        });
                    }
                }
                VertexKind::Exterior => {
                    if v.incident.len() != 1 {
                        return Err(NetError::InvalidVertex {
                            vertex: vi,
                            what: "exterior vertex must have exactly 1 incident end".into(),
                        });
                    }
                }
            }
            for &(ci, end) in &v.incident {
                if ci >= self.curves.len() {
                    return Err(NetError::Incidence(format!(
                        "vertex {vi} references curve {ci} out of range"
                    )));
                }
                if self.curves[ci].closed {
                    return Err(NetError::Incidence(format!(
                        "vertex {vi} references closed curve {ci}"
                    )));
                }
                let slot = &mut seen[ci][match end {
                    CurveEnd::Start => 0,
                    CurveEnd::End => 1,
                }];
                if *slot {
                    return Err(NetError::Incidence(format!(
                        "curve {ci} end referenced twice"
                    )));
                }
                *slot = true;
                let p = self.curves[ci].endpoint(end);
                if p.dist(v.position) > tol {
                    return Err(NetError::InvalidVertex {
                        vertex: vi,
                        what: format!(
                            "incident curve {ci} endpoint off vertex by {:.3e} (tol {:.3e})",
                            p.dist(v.position),
                            tol
                        ),
                    });
                }
            }
        }
        for (ci, c) in self.curves.iter().enumerate() {
            if c.closed {
                continue;
            }
            if !seen[ci][0] || !seen[ci][1] {
                return Err(NetError::Incidence(format!(
                    "curve {ci} has an end not attached to any vertex"
                )));
            }
        }
        // nontangential: pairwise distinct tangent directions at interior vertices
        for (vi, v) in self.vertices.iter().enumerate() {
            if v.kind != VertexKind::Interior {
                continue;
            }
            let dirs: Vec<Vec2> = v
                .incident
                .iter()
                .map(|&(ci, end)| self.curves[ci].inward_tangent(end).map(|t| t.normalized()))
                .collect::<Result<_, _>>()?;
            for i in 0..dirs.len() {
                for j in i + 1..dirs.len() {
                    if dirs[i].dist(dirs[j]) < 1e-7 {
                        return Err(NetError::InvalidVertex {
                            vertex: vi,
                            what: format!("incident tangents {i} and {j} coincide (tangential)"),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Optional O(n^2) embeddedness sweep over all segment pairs; skips pairs
    /// sharing a vertex within tolerance.
    pub fn check_embedded(&self) -> Result<(), NetError> {
        let tol = 1e-9 * self.diameter().max(1e-30);
        for a in 0..self.curves.len() {
            for b in a..self.curves.len() {
                let ca = &self.curves[a];
                let cb = &self.curves[b];
                for i in 0..ca.points.len() - 1 {
                    let jstart = if a == b { i + 2 } else { 0 };
                    for j in jstart..cb.points.len().saturating_sub(1) {
                        let (p1, p2) = (ca.points[i], ca.points[i + 1]);
                        let (q1, q2) = (cb.points[j], cb.points[j + 1]);
                        // skip segments that legitimately share a vertex endpoint
                        let shares = [p1, p2]
                            .iter()
                            .any(|p| [q1, q2].iter().any(|q| p.dist(*q) <= tol));
                        if shares {
                            continue;
                        }
                        if segments_cross(p1, p2, q1, q2) {
                            return Err(NetError::Embeddedness { a, b });
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Herring-condition test at every interior vertex. A vertex is regular iff
/// it is trivalent and its unit tangents sum to zero within `tol`.
pub fn check_regular(net: &Network, tol: f64) -> Result<RegularityReport, NetError> {
    net.validate()?;
    let mut out = Vec::new();
    for (vi, v) in net.vertices.iter().enumerate() {
        if v.kind != VertexKind::Interior {
            continue;
        }
        let mut dirs = Vec::new();
        for &(ci, end) in &v.incident {
            let t = net.curves[ci].inward_tangent(end).map_err(|e| match e {
                NetError::InvalidCurve { what, .. } => NetError::InvalidCurve { curve: ci, what },
                other => other,
            })?;
            dirs.push(t.normalized());
        }
        dirs.sort_by(|a, b| a.angle().partial_cmp(&b.angle()).unwrap());
        let k = dirs.len();
        let sum = dirs.iter().fold(Vec2::default(), |acc, d| acc + *d);
        let angles: Vec<f64> = (0..k)
            .map(|i| {
                let mut d = dirs[(i + 1) % k].angle() - dirs[i].angle();
                if d <= 0.0 {
                    d += 2.0 * std::f64::consts::PI;
                }
                d
            })
            .collect();
        let max_defect = angles
            .iter()
            .map(|a| (a - 2.0 * std::f64::consts::PI / 3.0).abs())
            .fold(0.0, f64::max);
        out.push(VertexRegularity {
            vertex: vi,
            valence: k,
            regular: k == 3 && sum.norm() <= tol,
            tangent_sum_norm: sum.norm(),
            angles,
            max_angle_defect: max_defect,
        });
    }
    Ok(RegularityReport { vertices: out, tol })
}

/// One fan per interior vertex: normalized inward tangents sorted
/// counterclockwise, with matching incidence order.
pub fn extract_fans(net: &Network) -> Result<Vec<Fan>, NetError> {
    net.validate()?;
    let mut fans = Vec::new();
    for v in &net.vertices {
        if v.kind != VertexKind::Interior {
            continue;
        }
        let mut rays: Vec<(Vec2, (usize, CurveEnd))> = Vec::new();
        for &(ci, end) in &v.incident {
            let t = net.curves[ci].inward_tangent(end)?;
            rays.push((t.normalized(), (ci, end)));
        }
        rays.sort_by(|a, b| a.0.angle().partial_cmp(&b.0.angle()).unwrap());
        fans.push(Fan {
            center: v.position,
            directions: rays.iter().map(|r| r.0).collect(),
            incident: rays.iter().map(|r| r.1).collect(),
        });
    }
    Ok(fans)
}

/// Default relative tolerance for vertex and tangent coincidence tests.
pub fn default_tolerance(net: &Network) -> f64 {
    1e-9 * net.diameter().max(1e-30)
}

pub mod fixtures {
    //! Canonical small networks used across tests, examples, and the CLI.

    use super::*;

    /// Symmetric triod: three straight legs from the origin at 90/210/330
    /// degrees to exterior pins at distance `r`; `m` samples per leg.
    pub fn symmetric_triod(r: f64, m: usize) -> Network {
        triod_with_angles(&[90f64, 210.0, 330.0], r, m)
    }

    /// Triod with legs at the given angles (degrees).
    pub fn triod_with_angles(deg: &[f64; 3], r: f64, m: usize) -> Network {
        let center = Vec2::default();
        let mut curves = Vec::new();
        let mut incident = Vec::new();
        let mut vertices = Vec::new();
        for (i, &a) in deg.iter().enumerate() {
            let dir = Vec2::from_angle(a.to_radians());
            curves.push(PolyCurve::segment(center, dir * r, m));
            incident.push((i, CurveEnd::Start));
            vertices.push(Vertex {
                kind: VertexKind::Exterior,
                position: dir * r,
                incident: vec![(i, CurveEnd::End)],
            });
        }
        vertices.insert(
            0,
            Vertex { kind: VertexKind::Interior, position: center, incident },
        );
        Network { curves, vertices }
    }

    /// Orthogonal cross: four straight legs from the origin at 45/135/225/315
    /// degrees (one 4-valent irregular vertex).
    pub fn orthogonal_cross(r: f64, m: usize) -> Network {
        star_with_angles(&[45.0, 135.0, 225.0, 315.0], r, m)
    }

    /// Star network: k straight legs at the given angles (degrees).
    pub fn star_with_angles(deg: &[f64], r: f64, m: usize) -> Network {
        let center = Vec2::default();
        let mut curves = Vec::new();
        let mut incident = Vec::new();
        let mut vertices = Vec::new();
        for (i, &a) in deg.iter().enumerate() {
            let dir = Vec2::from_angle(a.to_radians());
            curves.push(PolyCurve::segment(center, dir * r, m));
            incident.push((i, CurveEnd::Start));
            vertices.push(Vertex {
                kind: VertexKind::Exterior,
                position: dir * r,
                incident: vec![(i, CurveEnd::End)],
            });
        }
        vertices.insert(
            0,
            Vertex { kind: VertexKind::Interior, position: center, incident },
        );
        Network { curves, vertices }
    }

    /// Bowtie: two triple junctions at (-d, 0) and (d, 0) joined by a
    /// horizontal internal edge, with four exterior pins at (±w, ±h).
    pub fn bowtie(d: f64, w: f64, h: f64, m: usize) -> Network {
        let jl = Vec2::new(-d, 0.0);
        let jr = Vec2::new(d, 0.0);
        let pins = [
            Vec2::new(-w, h),
            Vec2::new(-w, -h),
            Vec2::new(w, h),
            Vec2::new(w, -h),
        ];
        let mut curves = vec![
            PolyCurve::segment(jl, pins[0], m),
            PolyCurve::segment(jl, pins[1], m),
            PolyCurve::segment(jr, pins[2], m),
            PolyCurve::segment(jr, pins[3], m),
            PolyCurve::segment(jl, jr, m), // internal edge
        ];
        // mild bend keeps tangents nontangential at the junctions
        let _ = &mut curves;
        let vertices = vec![
            Vertex {
                kind: VertexKind::Interior,
                position: jl,
                incident: vec![(0, CurveEnd::Start), (1, CurveEnd::Start), (4, CurveEnd::Start)],
            },
            Vertex {
                kind: VertexKind::Interior,
                position: jr,
                incident: vec![(2, CurveEnd::Start), (3, CurveEnd::Start), (4, CurveEnd::End)],
            },
            Vertex { kind: VertexKind::Exterior, position: pins[0], incident: vec![(0, CurveEnd::End)] },
            Vertex { kind: VertexKind::Exterior, position: pins[1], incident: vec![(1, CurveEnd::End)] },
            Vertex { kind: VertexKind::Exterior, position: pins[2], incident: vec![(2, CurveEnd::End)] },
            Vertex { kind: VertexKind::Exterior, position: pins[3], incident: vec![(3, CurveEnd::End)] },
        ];
        Network { curves, vertices }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn symmetric_triod_is_regular_with_zero_sum() {
        let net = fixtures::symmetric_triod(1.0, 16);
        let rep = check_regular(&net, 1e-12).unwrap();
        assert_eq!(rep.vertices.len(), 1);
        let v = &rep.vertices[0];
        assert!(v.regular);
        assert!(v.tangent_sum_norm < 1e-13, "sum {}", v.tangent_sum_norm);
    }

    #[test]
    fn orthogonal_cross_is_irregular_by_valence() {
        let net = fixtures::orthogonal_cross(1.0, 16);
        let rep = check_regular(&net, 1e-9).unwrap();
        assert_eq!(rep.vertices[0].valence, 4);
        assert!(!rep.vertices[0].regular);
    }

    #[test]
    fn unbalanced_triod_sum_is_sqrt2_minus_1() {
        // rays at bearings 0, 90, 225: consecutive angles 90, 135, 135
        let net = fixtures::triod_with_angles(&[0.0, 90.0, 225.0], 1.0, 16);
        let rep = check_regular(&net, 1e-9).unwrap();
        let v = &rep.vertices[0];
        assert!(!v.regular);
        assert!(
            (v.tangent_sum_norm - (2f64.sqrt() - 1.0)).abs() < 1e-12,
            "got {}",
            v.tangent_sum_norm
        );
        let mut angles = v.angles.clone();
        angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((angles[0] - FRAC_PI_2).abs() < 1e-12);
        assert!((angles[2] - 0.75 * PI).abs() < 1e-12);
    }

    #[test]
    fn fans_are_unit_and_ccw() {
        let net = fixtures::star_with_angles(&[10.0, 77.0, 160.0, 200.0, 300.0], 1.0, 12);
        let fans = extract_fans(&net).unwrap();
        assert_eq!(fans.len(), 1);
        let fan = &fans[0];
        assert_eq!(fan.valence(), 5);
        for d in &fan.directions {
            assert!((d.norm() - 1.0).abs() < 1e-12);
        }
        for w in fan.directions.windows(2) {
            assert!(w[0].angle() < w[1].angle());
        }
    }

    #[test]
    fn regularity_invariant_under_rigid_motion_and_reversal() {
        let mut net = fixtures::triod_with_angles(&[0.0, 100.0, 215.0], 1.0, 16);
        let rep0 = check_regular(&net, 1e-9).unwrap();
        // rotate + translate everything
        let phi = 0.83;
        let shift = Vec2::new(0.4, -2.2);
        for c in &mut net.curves {
            for p in &mut c.points {
                *p = p.rotated(phi) + shift;
            }
        }
        for v in &mut net.vertices {
            v.position = v.position.rotated(phi) + shift;
        }
        // reverse one curve, fixing the incidence bookkeeping
        net.curves[1].reverse();
        for v in &mut net.vertices {
            for inc in &mut v.incident {
                if inc.0 == 1 {
                    inc.1 = match inc.1 {
                        CurveEnd::Start => CurveEnd::End,
                        CurveEnd::End => CurveEnd::Start,
                    };
                }
            }
        }
        let rep1 = check_regular(&net, 1e-9).unwrap();
        assert!(
            (rep0.vertices[0].tangent_sum_norm - rep1.vertices[0].tangent_sum_norm).abs() < 1e-9
        );
    }

    #[test]
    fn degenerate_first_segment_is_rejected() {
        let mut net = fixtures::symmetric_triod(1.0, 8);
        net.curves[0].points[1] = net.curves[0].points[0];
        assert!(matches!(
            check_regular(&net, 1e-9),
            Err(NetError::InvalidCurve { .. })
        ));
    }

    #[test]
    fn embeddedness_sweep_catches_crossing() {
        let mut net = fixtures::symmetric_triod(1.0, 8);
        // bend leg 0 so that its far half sweeps across leg 2 (bearing 330)
        let p = Vec2::new(0.9, -0.8);
        let elbow = Vec2::new(0.2, 0.5);
        let n = net.curves[0].points.len();
        for (i, q) in net.curves[0].points.iter_mut().enumerate() {
            let t = i as f64 / (n - 1) as f64;
            *q = if t < 0.5 {
                Vec2::default().lerp(elbow, 2.0 * t)
            } else {
                elbow.lerp(p, 2.0 * t - 1.0)
            };
        }
        net.vertices
            .iter_mut()
            .find(|v| matches!(v.kind, VertexKind::Exterior) && v.incident[0].0 == 0)
            .unwrap()
            .position = p;
        assert!(net.validate().is_ok());
        assert!(matches!(net.check_embedded(), Err(NetError::Embeddedness { .. })));
    }
}
