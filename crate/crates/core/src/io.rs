//! Scene documents and network files.
//!
//! A scene document is JSON:
//!
//! ```json
//! {
//!   "dim": 2,
//!   "domain": { "lo": [0, 0], "hi": [100, 100], "faces": ["closed", "closed", "open", "open"] },
//!   "solids": [
//!     { "kind": "ball", "center": [25, 25], "radius": 20 },
//!     { "kind": "box", "lo": [40, 40], "hi": [60, 60] },
//!     { "kind": "capsule", "a": [10, 80], "b": [30, 90], "radius": 2 },
//!     { "kind": "halfspace", "axis": 1, "offset": 5, "solid_above": false }
//!   ],
//!   "points_file": "boundary.csv"
//! }
//! ```
//!
//! `points_file` is optional and resolved relative to the document; it holds
//! one boundary point per row with `dim` comma-separated coordinates.
//!
//! A network is written as `pores.csv`, `throats.csv` and `network.json`.
//! Numbers use the shortest representation that parses back to the same
//! value, so export, import and re-export produce identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::network::{Pore, PoreKind, PoreNetwork, Throat, ThroatKind};
use crate::scene::{FaceKind, Scene, SolidPrimitive};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainDoc {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// `[x-lo, x-hi, y-lo, y-hi, (z-lo, z-hi)]`.
    pub faces: Vec<FaceKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SolidDoc {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Capsule { a: Vec<f64>, b: Vec<f64>, radius: f64 },
    #[serde(rename = "halfspace")]
    HalfSpace { axis: usize, offset: f64, solid_above: bool },
}

/// Serializable form of a [`Scene`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneDoc {
    pub dim: usize,
    pub domain: DomainDoc,
    pub solids: Vec<SolidDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points_file: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSceneDoc<'a> {
    dim: usize,
    #[serde(borrow)]
    domain: &'a RawValue,
    #[serde(borrow)]
    solids: Vec<&'a RawValue>,
    #[serde(default)]
    points_file: Option<String>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset].bytes().filter(|b| *b == b'\n').count() + 1
}

// Byte offset of a borrowed sub-slice within `text`.
fn offset_in(text: &str, part: &str) -> usize {
    part.as_ptr() as usize - text.as_ptr() as usize
}

fn point_from(coords: &[f64], dim: usize, what: &str) -> std::result::Result<Point, String> {
    if coords.len() != dim {
        return Err(format!("{what} has {} coordinates, expected {dim}", coords.len()));
    }
    Point::from_slice(coords).ok_or_else(|| format!("{what} has an invalid coordinate list"))
}

fn coords_of(p: &Point, dim: usize) -> Vec<f64> {
    p.coords(dim).to_vec()
}

impl SolidDoc {
    fn to_primitive(&self, dim: usize) -> std::result::Result<SolidPrimitive, String> {
        Ok(match self {
            SolidDoc::Ball { center, radius } => {
                SolidPrimitive::Ball { center: point_from(center, dim, "ball center")?, radius: *radius }
            }
            SolidDoc::Box { lo, hi } => {
                SolidPrimitive::Box { lo: point_from(lo, dim, "box lo")?, hi: point_from(hi, dim, "box hi")? }
            }
            SolidDoc::Capsule { a, b, radius } => SolidPrimitive::Capsule {
                a: point_from(a, dim, "capsule a")?,
                b: point_from(b, dim, "capsule b")?,
                radius: *radius,
            },
            SolidDoc::HalfSpace { axis, offset, solid_above } => {
                SolidPrimitive::HalfSpace { axis: *axis, offset: *offset, solid_above: *solid_above }
            }
        })
    }

    fn from_primitive(p: &SolidPrimitive, dim: usize) -> SolidDoc {
        match p {
            SolidPrimitive::Ball { center, radius } => SolidDoc::Ball { center: coords_of(center, dim), radius: *radius },
            SolidPrimitive::Box { lo, hi } => SolidDoc::Box { lo: coords_of(lo, dim), hi: coords_of(hi, dim) },
            SolidPrimitive::Capsule { a, b, radius } => {
                SolidDoc::Capsule { a: coords_of(a, dim), b: coords_of(b, dim), radius: *radius }
            }
            SolidPrimitive::HalfSpace { axis, offset, solid_above } => {
                SolidDoc::HalfSpace { axis: *axis, offset: *offset, solid_above: *solid_above }
            }
        }
    }
}

impl SceneDoc {
    /// Parses a document; `origin` is only used in error messages.
    ///
    /// Errors name the line of the offending entry.
    pub fn parse(text: &str, origin: &Path) -> Result<SceneDoc> {
        let err = |line: usize, msg: String| Error::schema(origin, format!("line {line}: {msg}"));
        let json_err = |base: usize, e: serde_json::Error| {
            let line = base + e.line().saturating_sub(1);
            let msg = e.to_string();
            // drop serde_json's own position suffix, the line is reported up front
            let msg = msg.split(" at line ").next().unwrap_or(&msg).to_string();
            err(line, msg)
        };
        let raw: RawSceneDoc = serde_json::from_str(text).map_err(|e| json_err(1, e))?;
        let dim = raw.dim;
        if dim != 2 && dim != 3 {
            return Err(err(1, format!("dim must be 2 or 3, got {dim}")));
        }
        let domain_line = line_of(text, offset_in(text, raw.domain.get()));
        let domain: DomainDoc = serde_json::from_str(raw.domain.get()).map_err(|e| json_err(domain_line, e))?;
        point_from(&domain.lo, dim, "domain lo").map_err(|m| err(domain_line, m))?;
        point_from(&domain.hi, dim, "domain hi").map_err(|m| err(domain_line, m))?;
        if domain.faces.len() != 2 * dim {
            return Err(err(domain_line, format!("expected {} face kinds, got {}", 2 * dim, domain.faces.len())));
        }
        let mut solids = Vec::with_capacity(raw.solids.len());
        for (i, r) in raw.solids.iter().enumerate() {
            let line = line_of(text, offset_in(text, r.get()));
            let solid: SolidDoc = serde_json::from_str(r.get()).map_err(|e| json_err(line, e))?;
            let prim = solid.to_primitive(dim).map_err(|m| err(line, format!("solid {i}: {m}")))?;
            prim.validate(dim).map_err(|e| err(line, format!("solid {i}: {e}")))?;
            solids.push(solid);
        }
        Ok(SceneDoc { dim, domain, solids, points_file: raw.points_file })
    }

    /// Builds the scene; `points_file` is resolved against `base_dir`.
    pub fn to_scene(&self, base_dir: &Path) -> Result<Scene> {
        let dim = self.dim;
        let bad = |m: String| Error::InvalidScene(m);
        let lo = point_from(&self.domain.lo, dim, "domain lo").map_err(bad)?;
        let hi = point_from(&self.domain.hi, dim, "domain hi").map_err(bad)?;
        let prims = self.solids.iter().map(|s| s.to_primitive(dim).map_err(bad)).collect::<Result<Vec<_>>>()?;
        let points = match &self.points_file {
            Some(f) => read_points(&base_dir.join(f), dim)?,
            None => Vec::new(),
        };
        Scene::new(dim, lo, hi, self.domain.faces.clone(), prims, points)
    }

    /// Document describing `scene`'s domain and primitives. Boundary points
    /// are not included; set `points_file` and write them separately.
    pub fn from_scene(scene: &Scene) -> SceneDoc {
        let dim = scene.dim();
        SceneDoc {
            dim,
            domain: DomainDoc {
                lo: coords_of(&scene.lo(), dim),
                hi: coords_of(&scene.hi(), dim),
                faces: scene.faces().to_vec(),
            },
            solids: scene.primitives().iter().map(|p| SolidDoc::from_primitive(p, dim)).collect(),
            points_file: None,
        }
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scene documents always serialize");
        s.push('\n');
        s
    }
}

pub fn load_scene_doc(path: &Path) -> Result<SceneDoc> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    SceneDoc::parse(&text, path)
}

pub fn save_scene_doc(doc: &SceneDoc, path: &Path) -> Result<()> {
    fs::write(path, doc.to_json()).map_err(|e| Error::io(path, e))
}

/// Loads and validates a scene document together with its point file.
pub fn load_scene(path: &Path) -> Result<Scene> {
    let doc = load_scene_doc(path)?;
    doc.to_scene(path.parent().unwrap_or(Path::new(".")))
}

/// Reads a boundary point CSV (no header, `dim` columns per row).
pub fn read_points(path: &Path, dim: usize) -> Result<Vec<Point>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut points = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let bad = || Error::schema(path, format!("line {}: expected {dim} decimal coordinates", n + 1));
        let coords: Vec<f64> = line.split(',').map(|s| s.trim().parse()).collect::<std::result::Result<_, _>>().map_err(|_| bad())?;
        if coords.len() != dim {
            return Err(bad());
        }
        points.push(Point::from_slice(&coords).ok_or_else(bad)?);
    }
    Ok(points)
}

pub fn write_points(points: &[Point], dim: usize, path: &Path) -> Result<()> {
    let mut s = String::new();
    for p in points {
        let c: Vec<String> = p.coords(dim).iter().map(|v| v.to_string()).collect();
        s.push_str(&c.join(","));
        s.push('\n');
    }
    fs::write(path, s).map_err(|e| Error::io(path, e))
}

fn coord_header(dim: usize) -> &'static str {
    if dim == 2 { "x,y" } else { "x,y,z" }
}

fn coord_fields(p: &Point, dim: usize) -> String {
    let c: Vec<String> = p.coords(dim).iter().map(|v| v.to_string()).collect();
    c.join(",")
}

/// `pores.csv` contents.
pub fn pores_csv(net: &PoreNetwork) -> String {
    let mut s = format!("id,{},radius,kind\n", coord_header(net.dim));
    for p in &net.pores {
        let _ = writeln!(s, "{},{},{},{}", p.id, coord_fields(&p.center, net.dim), p.radius, p.kind.as_str());
    }
    s
}

/// `throats.csv` contents.
pub fn throats_csv(net: &PoreNetwork) -> String {
    let mut s = format!("id,p1,p2,{},radius,L_t,L1,L2,L_throat,kind\n", coord_header(net.dim));
    for t in &net.throats {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            t.id,
            t.pores.0,
            t.pores.1,
            coord_fields(&t.center, net.dim),
            t.radius,
            t.length_total,
            t.l1,
            t.l2,
            t.length_throat,
            t.kind.as_str()
        );
    }
    s
}

/// `network.json` contents (the full network including paths and provenance).
pub fn network_json(net: &PoreNetwork) -> String {
    let mut s = serde_json::to_string_pretty(net).expect("networks always serialize");
    s.push('\n');
    s
}

/// Validates `net` and writes `pores.csv`, `throats.csv` and `network.json`
/// into `dir` (created if missing). Returns the written paths.
pub fn export_network(net: &PoreNetwork, dir: &Path) -> Result<Vec<PathBuf>> {
    net.validate()?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = [
        ("pores.csv", pores_csv(net)),
        ("throats.csv", throats_csv(net)),
        ("network.json", network_json(net)),
    ];
    let mut written = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

/// Reads `network.json` from `dir` and validates it.
pub fn import_network(dir: &Path) -> Result<PoreNetwork> {
    let path = dir.join("network.json");
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let net: PoreNetwork =
        serde_json::from_str(&text).map_err(|e| Error::schema(&path, format!("line {}: {e}", e.line())))?;
    if net.dim != 2 && net.dim != 3 {
        return Err(Error::schema(&path, format!("dim must be 2 or 3, got {}", net.dim)));
    }
    net.validate()?;
    Ok(net)
}

fn csv_rows(path: &Path, header: &str) -> Result<Vec<Vec<String>>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    if lines.next() != Some(header) {
        return Err(Error::schema(path, format!("line 1: expected header `{header}`")));
    }
    Ok(lines.filter(|l| !l.is_empty()).map(|l| l.split(',').map(str::to_string).collect()).collect())
}

fn field<T: std::str::FromStr>(path: &Path, row: usize, s: &str) -> Result<T> {
    s.parse().map_err(|_| Error::schema(path, format!("line {}: cannot parse `{s}`", row + 2)))
}

fn pore_kind(s: &str) -> Option<PoreKind> {
    [PoreKind::Interior, PoreKind::DeadEnd, PoreKind::Boundary].into_iter().find(|k| k.as_str() == s)
}

fn throat_kind(s: &str) -> Option<ThroatKind> {
    [ThroatKind::Interior, ThroatKind::DeadEnd, ThroatKind::Boundary].into_iter().find(|k| k.as_str() == s)
}

/// Parses a `pores.csv` file.
pub fn read_pores_csv(path: &Path, dim: usize) -> Result<Vec<Pore>> {
    let header = format!("id,{},radius,kind", coord_header(dim));
    let mut out = Vec::new();
    for (i, r) in csv_rows(path, &header)?.iter().enumerate() {
        if r.len() != dim + 3 {
            return Err(Error::schema(path, format!("line {}: expected {} fields", i + 2, dim + 3)));
        }
        let coords = (1..=dim).map(|k| field(path, i, &r[k])).collect::<Result<Vec<f64>>>()?;
        out.push(Pore {
            id: field(path, i, &r[0])?,
            center: Point::from_slice(&coords).expect("dim is 2 or 3"),
            radius: field(path, i, &r[dim + 1])?,
            kind: pore_kind(&r[dim + 2])
                .ok_or_else(|| Error::schema(path, format!("line {}: unknown pore kind", i + 2)))?,
        });
    }
    Ok(out)
}

/// Parses a `throats.csv` file.
pub fn read_throats_csv(path: &Path, dim: usize) -> Result<Vec<Throat>> {
    let header = format!("id,p1,p2,{},radius,L_t,L1,L2,L_throat,kind", coord_header(dim));
    let mut out = Vec::new();
    for (i, r) in csv_rows(path, &header)?.iter().enumerate() {
        if r.len() != dim + 9 {
            return Err(Error::schema(path, format!("line {}: expected {} fields", i + 2, dim + 9)));
        }
        let coords = (3..3 + dim).map(|k| field(path, i, &r[k])).collect::<Result<Vec<f64>>>()?;
        let f = |k: usize| field::<f64>(path, i, &r[dim + k]);
        out.push(Throat {
            id: field(path, i, &r[0])?,
            pores: (field(path, i, &r[1])?, field(path, i, &r[2])?),
            center: Point::from_slice(&coords).expect("dim is 2 or 3"),
            radius: f(3)?,
            length_total: f(4)?,
            l1: f(5)?,
            l2: f(6)?,
            length_throat: f(7)?,
            kind: throat_kind(&r[dim + 8])
                .ok_or_else(|| Error::schema(path, format!("line {}: unknown throat kind", i + 2)))?,
        });
    }
    Ok(out)
}
