//! Solid phase description and continuous distance queries.
//!
//! A [`Scene`] is the union of analytic primitives, closed domain faces
//! (modelled as half-spaces) and an optional boundary point cloud. Distances
//! are signed: positive in the void, negative penetration depth inside a
//! primitive.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::index::PointIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FaceKind {
    Closed,
    Open,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolidPrimitive {
    Ball { center: Point, radius: f64 },
    Box { lo: Point, hi: Point },
    Capsule { a: Point, b: Point, radius: f64 },
    /// Solid side is `x[axis] <= offset`, or `>= offset` when `solid_above`.
    HalfSpace { axis: usize, offset: f64, solid_above: bool },
}

/// Distance to a single solid element.
#[derive(Debug, Clone, Copy)]
struct ElementDist {
    value: f64,
    witness: Point,
    gradient: Point,
}

impl SolidPrimitive {
    pub(crate) fn validate(&self, dim: usize) -> Result<()> {
        let flat = |p: &Point| dim == 3 || p.z() == 0.0;
        let finite = |p: &Point| p.is_finite();
        match self {
            SolidPrimitive::Ball { center, radius } => {
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(Error::InvalidScene(format!("ball radius must be > 0, got {radius}")));
                }
                if !flat(center) || !finite(center) {
                    return Err(Error::InvalidScene("ball center has wrong dimension".into()));
                }
            }
            SolidPrimitive::Box { lo, hi } => {
                if !flat(lo) || !flat(hi) || !finite(lo) || !finite(hi) {
                    return Err(Error::InvalidScene("box corner has wrong dimension".into()));
                }
                if (0..dim).any(|k| lo[k] >= hi[k]) {
                    return Err(Error::InvalidScene("box requires lo < hi componentwise".into()));
                }
            }
            SolidPrimitive::Capsule { a, b, radius } => {
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(Error::InvalidScene(format!("capsule radius must be > 0, got {radius}")));
                }
                if !flat(a) || !flat(b) || !finite(a) || !finite(b) {
                    return Err(Error::InvalidScene("capsule endpoint has wrong dimension".into()));
                }
            }
            SolidPrimitive::HalfSpace { axis, offset, .. } => {
                if *axis >= dim || !offset.is_finite() {
                    return Err(Error::InvalidScene(format!("half-space axis {axis} invalid for dim {dim}")));
                }
            }
        }
        Ok(())
    }

    /// Signed distance from `p` (negative inside).
    pub fn signed_distance(&self, p: &Point, dim: usize) -> f64 {
        self.distance(p, dim).value
    }

    fn distance(&self, p: &Point, dim: usize) -> ElementDist {
        match *self {
            SolidPrimitive::Ball { center, radius } => round_distance(p, center, radius),
            SolidPrimitive::Capsule { a, b, radius } => {
                let ab = b - a;
                let len_sq = ab.norm_sq();
                let t = if len_sq > 0.0 { ((*p - a).dot(&ab) / len_sq).clamp(0.0, 1.0) } else { 0.0 };
                round_distance(p, a + ab * t, radius)
            }
            SolidPrimitive::Box { lo, hi } => box_distance(p, &lo, &hi, dim),
            SolidPrimitive::HalfSpace { axis, offset, solid_above } => {
                let (value, normal) = if solid_above {
                    (offset - p[axis], -Point::axis(axis))
                } else {
                    (p[axis] - offset, Point::axis(axis))
                };
                let mut witness = *p;
                witness[axis] = offset;
                ElementDist { value: value + 0.0, witness, gradient: normal }
            }
        }
    }

    pub fn mirrored(&self, axis: usize, lo: f64, hi: f64) -> SolidPrimitive {
        let m = |p: &Point| {
            let mut q = *p;
            q[axis] = lo + hi - p[axis];
            q
        };
        match *self {
            SolidPrimitive::Ball { center, radius } => SolidPrimitive::Ball { center: m(&center), radius },
            SolidPrimitive::Capsule { a, b, radius } => SolidPrimitive::Capsule { a: m(&a), b: m(&b), radius },
            SolidPrimitive::Box { lo: blo, hi: bhi } => {
                let (mut nlo, mut nhi) = (blo, bhi);
                nlo[axis] = lo + hi - bhi[axis];
                nhi[axis] = lo + hi - blo[axis];
                SolidPrimitive::Box { lo: nlo, hi: nhi }
            }
            SolidPrimitive::HalfSpace { axis: a, offset, solid_above } => {
                if a == axis {
                    SolidPrimitive::HalfSpace { axis: a, offset: lo + hi - offset, solid_above: !solid_above }
                } else {
                    self.clone()
                }
            }
        }
    }
}

// Distance to a ball of `radius` around `core` (ball or capsule).
fn round_distance(p: &Point, core: Point, radius: f64) -> ElementDist {
    let d = *p - core;
    let n = d.norm();
    let dir = d.normalized().unwrap_or(Point::axis(0));
    ElementDist { value: (n - radius) + 0.0, witness: core + dir * radius, gradient: dir }
}

fn box_distance(p: &Point, lo: &Point, hi: &Point, dim: usize) -> ElementDist {
    let mut q = *p;
    let mut inside = true;
    for k in 0..dim {
        if p[k] < lo[k] || p[k] > hi[k] {
            inside = false;
        }
        q[k] = p[k].clamp(lo[k], hi[k]);
    }
    if !inside {
        let d = *p - q;
        return ElementDist { value: d.norm(), witness: q, gradient: d.normalized().unwrap_or(Point::axis(0)) };
    }
    let mut best = (f64::INFINITY, 0usize, false);
    for k in 0..dim {
        let to_lo = p[k] - lo[k];
        let to_hi = hi[k] - p[k];
        if to_lo < best.0 {
            best = (to_lo, k, false);
        }
        if to_hi < best.0 {
            best = (to_hi, k, true);
        }
    }
    let (depth, k, upper) = best;
    let mut witness = *p;
    witness[k] = if upper { hi[k] } else { lo[k] };
    let gradient = if upper { Point::axis(k) } else { -Point::axis(k) };
    ElementDist { value: -depth + 0.0, witness, gradient }
}

/// Result of a distance query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistProbe {
    pub value: f64,
    pub witness: Point,
    pub gradient: Point,
    pub in_void: bool,
    /// Index of the solid element that realised the minimum.
    pub element: usize,
}

/// Solid elements near a query point, as returned by [`Scene::neighbor_solids`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NeighborSet {
    pub primitives: Vec<usize>,
    pub points: Vec<usize>,
}

impl NeighborSet {
    pub fn len(&self) -> usize {
        self.primitives.len() + self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Immutable solid-phase description.
#[derive(Debug, Clone)]
pub struct Scene {
    dim: usize,
    lo: Point,
    hi: Point,
    faces: Vec<FaceKind>,
    n_user: usize,
    // user primitives followed by one half-space per closed face
    elements: Vec<SolidPrimitive>,
    cloud: Option<PointIndex>,
}

impl Scene {
    /// Validates and builds a scene. `faces` lists `[x-lo, x-hi, y-lo, y-hi, (z-lo, z-hi)]`.
    pub fn new(
        dim: usize,
        lo: Point,
        hi: Point,
        faces: Vec<FaceKind>,
        primitives: Vec<SolidPrimitive>,
        points: Vec<Point>,
    ) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidScene(format!("dim must be 2 or 3, got {dim}")));
        }
        if (0..dim).any(|k| !(lo[k] < hi[k])) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidScene("domain requires lo < hi componentwise".into()));
        }
        if dim == 2 && (lo.z() != 0.0 || hi.z() != 0.0) {
            return Err(Error::InvalidScene("2D domain corners must have z = 0".into()));
        }
        if faces.len() != 2 * dim {
            return Err(Error::InvalidScene(format!("expected {} face kinds, got {}", 2 * dim, faces.len())));
        }
        for p in &primitives {
            p.validate(dim)?;
        }
        if points.iter().any(|p| !p.is_finite() || (dim == 2 && p.z() != 0.0)) {
            return Err(Error::InvalidScene("boundary point has wrong dimension".into()));
        }
        let n_user = primitives.len();
        let mut elements = primitives;
        for (f, kind) in faces.iter().enumerate() {
            if *kind == FaceKind::Closed {
                let axis = f / 2;
                let upper = f % 2 == 1;
                let offset = if upper { hi[axis] } else { lo[axis] };
                elements.push(SolidPrimitive::HalfSpace { axis, offset, solid_above: upper });
            }
        }
        if elements.is_empty() && points.is_empty() {
            return Err(Error::InvalidScene("scene has no solid element".into()));
        }
        let cloud = (!points.is_empty()).then(|| PointIndex::new(points, dim));
        Ok(Scene { dim, lo, hi, faces, n_user, elements, cloud })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lo(&self) -> Point {
        self.lo
    }

    pub fn hi(&self) -> Point {
        self.hi
    }

    pub fn faces(&self) -> &[FaceKind] {
        &self.faces
    }

    pub fn face_kind(&self, face: usize) -> FaceKind {
        self.faces[face]
    }

    /// User-supplied primitives (closed faces excluded).
    pub fn primitives(&self) -> &[SolidPrimitive] {
        &self.elements[..self.n_user]
    }

    /// Every primitive element, including the half-spaces of closed faces.
    pub fn elements(&self) -> &[SolidPrimitive] {
        &self.elements
    }

    pub fn boundary_points(&self) -> &[Point] {
        self.cloud.as_ref().map_or(&[], |c| c.points())
    }

    pub fn point_index(&self) -> Option<&PointIndex> {
        self.cloud.as_ref()
    }

    /// Number of solid elements (primitives, closed faces, boundary points).
    pub fn element_count(&self) -> usize {
        self.elements.len() + self.boundary_points().len()
    }

    /// Characteristic length: the largest domain extent.
    pub fn length_scale(&self) -> f64 {
        (0..self.dim).map(|k| self.hi[k] - self.lo[k]).fold(0.0, f64::max)
    }

    pub fn contains(&self, p: &Point) -> bool {
        (0..self.dim).all(|k| p[k] >= self.lo[k] && p[k] <= self.hi[k])
    }

    /// First domain face (in face order) that `p` lies beyond, if any.
    pub fn exit_face(&self, p: &Point) -> Option<usize> {
        (0..self.dim).find_map(|k| {
            if p[k] < self.lo[k] {
                Some(2 * k)
            } else if p[k] > self.hi[k] {
                Some(2 * k + 1)
            } else {
                None
            }
        })
    }

    /// Signed distance from `p` to the solid phase.
    pub fn dist(&self, p: &Point) -> Result<DistProbe> {
        if !self.contains(p) {
            return Err(Error::OutsideDomain(*p));
        }
        Ok(self.dist_unchecked(p))
    }

    fn dist_unchecked(&self, p: &Point) -> DistProbe {
        let mut best: Option<(ElementDist, usize)> = None;
        for (i, e) in self.elements.iter().enumerate() {
            let d = e.distance(p, self.dim);
            if best.as_ref().is_none_or(|(b, _)| d.value < b.value) {
                best = Some((d, i));
            }
        }
        if let Some(cloud) = &self.cloud {
            if let Some((j, d)) = cloud.nearest(p) {
                if best.as_ref().is_none_or(|(b, _)| d < b.value) {
                    best = Some((self.point_element(p, cloud.point(j), d), self.elements.len() + j));
                }
            }
        }
        let (d, element) = best.expect("scene has at least one element");
        finish(d, element)
    }

    fn point_element(&self, p: &Point, q: Point, d: f64) -> ElementDist {
        ElementDist { value: d, witness: q, gradient: (*p - q).normalized().unwrap_or(Point::ZERO) }
    }

    /// Every solid element whose distance to `p` is at most `range`.
    pub fn neighbor_solids(&self, p: &Point, range: f64) -> NeighborSet {
        let primitives = (0..self.elements.len())
            .filter(|&i| self.elements[i].distance(p, self.dim).value <= range)
            .collect();
        let points = self.cloud.as_ref().map_or_else(Vec::new, |c| c.within(p, range));
        NeighborSet { primitives, points }
    }

    /// Distance restricted to the elements of `set`; `None` when the set is empty.
    ///
    /// Agrees exactly with [`Scene::dist`] whenever the true minimum is realised
    /// by an element of the set.
    pub fn dist_among(&self, p: &Point, set: &NeighborSet) -> Result<Option<DistProbe>> {
        if !self.contains(p) {
            return Err(Error::OutsideDomain(*p));
        }
        let mut best: Option<(ElementDist, usize)> = None;
        for &i in &set.primitives {
            let d = self.elements[i].distance(p, self.dim);
            if best.as_ref().is_none_or(|(b, _)| d.value < b.value) {
                best = Some((d, i));
            }
        }
        if let Some(cloud) = &self.cloud {
            for &j in &set.points {
                let q = cloud.point(j);
                let d = q.dist(p);
                if best.as_ref().is_none_or(|(b, _)| d < b.value) {
                    best = Some((self.point_element(p, q, d), self.elements.len() + j));
                }
            }
        }
        Ok(best.map(|(d, e)| finish(d, e)))
    }

    /// The scene reflected across the mid-plane perpendicular to `axis`.
    pub fn mirrored(&self, axis: usize) -> Scene {
        let (lo, hi) = (self.lo[axis], self.hi[axis]);
        let primitives = self.primitives().iter().map(|p| p.mirrored(axis, lo, hi)).collect();
        let points = self
            .boundary_points()
            .iter()
            .map(|p| {
                let mut q = *p;
                q[axis] = lo + hi - p[axis];
                q
            })
            .collect();
        let mut faces = self.faces.clone();
        faces.swap(2 * axis, 2 * axis + 1);
        Scene::new(self.dim, self.lo, self.hi, faces, primitives, points).expect("mirror of a valid scene")
    }

    /// Reflects a point across the mid-plane perpendicular to `axis`.
    pub fn mirror_point(&self, p: &Point, axis: usize) -> Point {
        let mut q = *p;
        q[axis] = self.lo[axis] + self.hi[axis] - p[axis];
        q
    }
}

fn finish(d: ElementDist, element: usize) -> DistProbe {
    let value = d.value + 0.0;
    DistProbe { value, witness: d.witness, gradient: d.gradient, in_void: value > 0.0, element }
}
