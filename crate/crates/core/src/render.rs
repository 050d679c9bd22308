//! SVG drawings of 2D networks and legacy-VTK polydata for any dimension.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::network::{PoreKind, PoreNetwork};
use crate::oracle::RidgeSet;
use crate::scene::{Scene, SolidPrimitive};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderOptions {
    /// Stroke width of medial polylines, in domain units.
    pub stroke_width: f64,
    pub solid_color: String,
    pub axis_color: String,
    pub pore_color: String,
    pub throat_color: String,
    pub ridge_color: String,
    /// Output pixels per domain unit.
    pub scale: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            stroke_width: 0.5,
            solid_color: "#b0b0b0".into(),
            axis_color: "#1f4e9c".into(),
            pore_color: "#d62728".into(),
            throat_color: "#2ca02c".into(),
            ridge_color: "#ff9900".into(),
            scale: 5.0,
        }
    }
}

/// Draws solids, medial polylines, pore circles, throat markers and, when
/// given, ridge cells of a grid oracle. Only 2D scenes are accepted.
///
/// The y axis points up; every element carries a `class` attribute
/// (`solid`, `ridge`, `medial`, `pore`, `throat`).
pub fn render_svg(net: &PoreNetwork, scene: &Scene, ridge: Option<&RidgeSet>, opt: &RenderOptions) -> Result<String> {
    if scene.dim() != 2 || net.dim != 2 {
        return Err(Error::InvalidConfig("SVG output is only available for 2D scenes".into()));
    }
    let (lo, hi) = (scene.lo(), scene.hi());
    let (w, h) = (hi.x() - lo.x(), hi.y() - lo.y());
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="{} {} {} {}">"#,
        w * opt.scale,
        h * opt.scale,
        lo.x(),
        lo.y(),
        w,
        h
    );
    let _ = writeln!(s, r#"<g transform="matrix(1 0 0 -1 0 {})">"#, lo.y() + hi.y());
    let _ = writeln!(s, r#"<rect x="{}" y="{}" width="{w}" height="{h}" fill="white" stroke="black" stroke-width="{}"/>"#, lo.x(), lo.y(), opt.stroke_width);
    let fill = &opt.solid_color;
    for prim in scene.primitives() {
        match *prim {
            SolidPrimitive::Ball { center, radius } => {
                let _ = writeln!(s, r#"<circle class="solid" cx="{}" cy="{}" r="{radius}" fill="{fill}"/>"#, center.x(), center.y());
            }
            SolidPrimitive::Box { lo: a, hi: b } => {
                let _ = writeln!(s, r#"<rect class="solid" x="{}" y="{}" width="{}" height="{}" fill="{fill}"/>"#, a.x(), a.y(), b.x() - a.x(), b.y() - a.y());
            }
            SolidPrimitive::Capsule { a, b, radius } => {
                let _ = writeln!(
                    s,
                    r#"<line class="solid" x1="{}" y1="{}" x2="{}" y2="{}" stroke="{fill}" stroke-width="{}" stroke-linecap="round"/>"#,
                    a.x(),
                    a.y(),
                    b.x(),
                    b.y(),
                    2.0 * radius
                );
            }
            SolidPrimitive::HalfSpace { axis, offset, solid_above } => {
                let (mut a, mut b) = (lo, hi);
                if solid_above {
                    a[axis] = offset.max(lo[axis]);
                } else {
                    b[axis] = offset.min(hi[axis]);
                }
                if a.x() < b.x() && a.y() < b.y() {
                    let _ = writeln!(s, r#"<rect class="solid" x="{}" y="{}" width="{}" height="{}" fill="{fill}"/>"#, a.x(), a.y(), b.x() - a.x(), b.y() - a.y());
                }
            }
        }
    }
    for p in scene.boundary_points() {
        let _ = writeln!(s, r#"<circle class="solid-point" cx="{}" cy="{}" r="{}" fill="{fill}"/>"#, p.x(), p.y(), opt.stroke_width);
    }
    if let Some(ridge) = ridge {
        let e = ridge.eps;
        for c in &ridge.cells {
            let _ = writeln!(
                s,
                r#"<rect class="ridge" x="{}" y="{}" width="{e}" height="{e}" fill="{}"/>"#,
                c.center.x() - 0.5 * e,
                c.center.y() - 0.5 * e,
                opt.ridge_color
            );
        }
    }
    for path in &net.paths {
        let pts: Vec<String> = path.points.iter().map(|p| format!("{},{}", p.x(), p.y())).collect();
        let _ = writeln!(
            s,
            r#"<polyline class="medial" points="{}" fill="none" stroke="{}" stroke-width="{}"/>"#,
            pts.join(" "),
            opt.axis_color,
            opt.stroke_width
        );
    }
    for p in &net.pores {
        let _ = writeln!(
            s,
            r#"<circle class="pore {}" cx="{}" cy="{}" r="{}" fill="none" stroke="{}" stroke-width="{}"/>"#,
            p.kind.as_str(),
            p.center.x(),
            p.center.y(),
            p.radius,
            opt.pore_color,
            opt.stroke_width
        );
    }
    for t in &net.throats {
        let m = 2.0 * opt.stroke_width;
        let _ = writeln!(
            s,
            r#"<rect class="throat {}" x="{}" y="{}" width="{}" height="{}" fill="{}"/>"#,
            t.kind.as_str(),
            t.center.x() - m,
            t.center.y() - m,
            2.0 * m,
            2.0 * m,
            opt.throat_color
        );
    }
    s.push_str("</g>\n</svg>\n");
    Ok(s)
}

/// Legacy-VTK ASCII polydata: one polyline per medial path plus one vertex per
/// pore and throat.
///
/// Point data: `radius` (distance value), `kind` (0 path vertex, 1 interior
/// pore, 2 dead-end pore, 3 boundary pore, 4 throat) and `interior_pore`
/// (1 for interior pores, else 0). 2D networks get z = 0.
pub fn render_vtk(net: &PoreNetwork) -> String {
    let mut points: Vec<Point> = Vec::new();
    let mut radius = Vec::new();
    let mut kind = Vec::new();
    for p in &net.pores {
        points.push(p.center);
        radius.push(p.radius);
        kind.push(match p.kind {
            PoreKind::Interior => 1,
            PoreKind::DeadEnd => 2,
            PoreKind::Boundary => 3,
        });
    }
    for t in &net.throats {
        points.push(t.center);
        radius.push(t.radius);
        kind.push(4);
    }
    let n_vertices = points.len();
    let mut lines = Vec::new();
    for path in &net.paths {
        let start = points.len();
        points.extend(&path.points);
        radius.extend(&path.values);
        kind.extend(std::iter::repeat_n(0, path.points.len()));
        lines.push(start..points.len());
    }
    let mut s = String::from("# vtk DataFile Version 3.0\npore network medial axes\nASCII\nDATASET POLYDATA\n");
    let _ = writeln!(s, "POINTS {} double", points.len());
    for p in &points {
        let _ = writeln!(s, "{} {} {}", p.x(), p.y(), if net.dim == 3 { p.z() } else { 0.0 });
    }
    let _ = writeln!(s, "VERTICES {} {}", n_vertices, 2 * n_vertices);
    for i in 0..n_vertices {
        let _ = writeln!(s, "1 {i}");
    }
    let size: usize = lines.iter().map(|r| r.len() + 1).sum();
    let _ = writeln!(s, "LINES {} {}", lines.len(), size);
    for r in &lines {
        let ids: Vec<String> = r.clone().map(|i| i.to_string()).collect();
        let _ = writeln!(s, "{} {}", r.len(), ids.join(" "));
    }
    if !points.is_empty() {
        let _ = writeln!(s, "POINT_DATA {}", points.len());
        s.push_str("SCALARS radius double 1\nLOOKUP_TABLE default\n");
        for r in &radius {
            let _ = writeln!(s, "{r}");
        }
        s.push_str("SCALARS kind int 1\nLOOKUP_TABLE default\n");
        for k in &kind {
            let _ = writeln!(s, "{k}");
        }
        s.push_str("SCALARS interior_pore int 1\nLOOKUP_TABLE default\n");
        for k in &kind {
            let _ = writeln!(s, "{}", u8::from(*k == 1));
        }
    }
    s
}
