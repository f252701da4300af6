//! Network file format: a UTF-8 JSON document with top-level keys `curves`
//! and `vertices`.
//!
//! ```json
//! {
//!   "curves": [
//!     { "params": [0.0, 0.5, 1.0],
//!       "points": [[0.0, 0.0], [0.5, 0.1], [1.0, 0.0]],
//!       "closed": false }
//!   ],
//!   "vertices": [
//!     { "kind": "interior", "position": [0.0, 0.0],
//!       "incident": [ { "curve": 0, "end": "start" } ] }
//!   ]
//! }
//! ```
//!
//! Points are `[x, y]` pairs; non-finite numbers are rejected.

use super::{CurveEnd, NetError, Network, PolyCurve, Vertex, VertexKind};
use crate::geom::Vec2;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NetIoError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("non-finite number in {0}")]
    NonFinite(String),
    #[error(transparent)]
    Net(#[from] NetError),
}

#[derive(Serialize, Deserialize)]
struct CurveDoc {
    params: Vec<f64>,
    points: Vec<[f64; 2]>,
    #[serde(default)]
    closed: bool,
}

#[derive(Serialize, Deserialize)]
struct IncidentDoc {
    curve: usize,
    end: CurveEnd,
}

#[derive(Serialize, Deserialize)]
struct VertexDoc {
    kind: VertexKind,
    position: [f64; 2],
    #[serde(default)]
    incident: Vec<IncidentDoc>,
}

#[derive(Serialize, Deserialize)]
struct NetworkDoc {
    curves: Vec<CurveDoc>,
    vertices: Vec<VertexDoc>,
}

pub fn to_json(net: &Network) -> Result<String, NetIoError> {
    let doc = NetworkDoc {
        curves: net
            .curves
            .iter()
            .map(|c| CurveDoc {
                params: c.params.clone(),
                points: c.points.iter().map(|p| [p.x, p.y]).collect(),
                closed: c.closed,
            })
            .collect(),
        vertices: net
            .vertices
            .iter()
            .map(|v| VertexDoc {
                kind: v.kind,
                position: [v.position.x, v.position.y],
                incident: v
                    .incident
                    .iter()
                    .map(|&(curve, end)| IncidentDoc { curve, end })
                    .collect(),
            })
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

pub fn from_json(text: &str) -> Result<Network, NetIoError> {
    let doc: NetworkDoc = serde_json::from_str(text)?;
    let mut curves = Vec::with_capacity(doc.curves.len());
    for (i, c) in doc.curves.iter().enumerate() {
        if c.params.iter().any(|v| !v.is_finite()) {
            return Err(NetIoError::NonFinite(format!("curve {i} params")));
        }
        if c.points.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(NetIoError::NonFinite(format!("curve {i} points")));
        }
        curves.push(PolyCurve {
            params: c.params.clone(),
            points: c.points.iter().map(|p| Vec2::new(p[0], p[1])).collect(),
            closed: c.closed,
        });
    }
    let mut vertices = Vec::with_capacity(doc.vertices.len());
    for (i, v) in doc.vertices.iter().enumerate() {
        if !v.position[0].is_finite() || !v.position[1].is_finite() {
            return Err(NetIoError::NonFinite(format!("vertex {i} position")));
        }
        vertices.push(Vertex {
            kind: v.kind,
            position: Vec2::new(v.position[0], v.position[1]),
            incident: v.incident.iter().map(|inc| (inc.curve, inc.end)).collect(),
        });
    }
    let net = Network { curves, vertices };
    net.validate()?;
    Ok(net)
}

pub fn load(path: &Path) -> Result<Network, NetIoError> {
    from_json(&std::fs::read_to_string(path)?)
}

pub fn save(net: &Network, path: &Path) -> Result<(), NetIoError> {
    std::fs::write(path, to_json(net)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::fixtures;

    #[test]
    fn round_trip_preserves_network() {
        let net = fixtures::symmetric_triod(1.0, 8);
        let text = to_json(&net).unwrap();
        let back = from_json(&text).unwrap();
        assert_eq!(back.curves.len(), net.curves.len());
        assert_eq!(back.vertices.len(), net.vertices.len());
        for (a, b) in net.curves.iter().zip(&back.curves) {
            for (p, q) in a.points.iter().zip(&b.points) {
                assert!(p.dist(*q) == 0.0);
            }
        }
    }

    #[test]
    fn non_finite_is_rejected() {
        let net = fixtures::symmetric_triod(1.0, 8);
        let text = to_json(&net).unwrap().replace("0.0", "1e999");
        assert!(from_json(&text).is_err());
    }
}

