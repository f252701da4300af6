//! Artifact emission: trajectory CSV, field CSV, coefficient CSV, SVG
//! frames, and the JSON run manifest.

use crate::flow::FlowState;
use crate::geom::Vec2;
use crate::net::Network;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;

/// Trajectory CSV rows: t, curve id, node index, x, y.
pub fn trajectory_csv(snapshots: &[FlowState]) -> String {
    let mut out = String::from("t,curve,node,x,y\n");
    for s in snapshots {
        for (ci, c) in s.net.curves.iter().enumerate() {
            for (ni, p) in c.points.iter().enumerate() {
                let _ = writeln!(out, "{},{},{},{},{}", s.time, ci, ni, p.x, p.y);
            }
        }
    }
    out
}

/// Field CSV rows: t, x, u, v, w, defect.
pub fn field_csv(rows: &[(f64, f64, f64, f64, f64, f64)]) -> String {
    let mut out = String::from("t,x,u,v,w,defect\n");
    for (t, x, u, v, w, d) in rows {
        let _ = writeln!(out, "{t},{x},{u},{v},{w},{d}");
    }
    out
}

/// One SVG frame of a network with a fixed viewBox.
pub fn svg_frame(net: &Network, viewbox: (f64, f64, f64, f64)) -> String {
    let (x0, y0, w, h) = viewbox;
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{x0} {y0} {w} {h}\">\n\
         <rect x=\"{x0}\" y=\"{y0}\" width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
    );
    let sw = 0.004 * w.max(h);
    for c in &net.curves {
        let pts: Vec<String> = c
            .points
            .iter()
            .map(|p| format!("{:.5},{:.5}", p.x, y0 + (y0 + h) - p.y)) // flip y
            .collect();
        let _ = writeln!(
            out,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"{sw}\"/>",
            pts.join(" ")
        );
    }
    for v in &net.vertices {
        let r = 1.2 * sw;
        let color = match v.kind {
            crate::net::VertexKind::Interior => "crimson",
            crate::net::VertexKind::Exterior => "steelblue",
        };
        let _ = writeln!(
            out,
            "<circle cx=\"{:.5}\" cy=\"{:.5}\" r=\"{r}\" fill=\"{color}\"/>",
            v.position.x,
            y0 + (y0 + h) - v.position.y
        );
    }
    out.push_str("</svg>\n");
    out
}

/// viewBox from the initial bounding box inflated by 10 percent.
pub fn viewbox_for(net: &Network) -> (f64, f64, f64, f64) {
    let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for c in &net.curves {
        for p in &c.points {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
    }
    let w = hi.x - lo.x;
    let h = hi.y - lo.y;
    (lo.x - 0.05 * w, lo.y - 0.05 * h, 1.1 * w, 1.1 * h)
}

/// Run manifest: version, configuration echo, invariant audit.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub version: String,
    pub subcommand: String,
    pub config: serde_json::Value,
    pub audits: Vec<AuditEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditEntry {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl RunManifest {
    pub fn new(subcommand: &str, config: serde_json::Value) -> Self {
        RunManifest {
            version: format!("netcurve {}", env!("CARGO_PKG_VERSION")),
            subcommand: subcommand.to_string(),
            config,
            audits: Vec::new(),
        }
    }

    pub fn audit(&mut self, name: &str, value: f64, bound: f64) {
        self.audits.push(AuditEntry {
            name: name.to_string(),
            value,
            bound,
            pass: value <= bound,
        });
    }

    pub fn all_pass(&self) -> bool {
        self.audits.iter().all(|a| a.pass)
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self).unwrap())
    }
}
