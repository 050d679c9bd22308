//! Ridge detection on circles, spheres, fans and cones.
//!
//! The distance field restricted to a small circle (2D) or sphere (3D) around
//! a medial point has a sharp local maximum wherever a medial axis crosses
//! it. This module samples such frontiers, finds those maxima, confirms them
//! as ridges (diverging witnesses or a strongly negative discrete Laplacian),
//! and sharpens each one with a local search between samples.

use std::f64::consts::{FRAC_PI_2, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{perp2, perpendicular_frame, Point};
use crate::optimize::{compass_max, golden_max, planar_directions};
use crate::probe::{EvalKind, Probe};
use crate::scene::{FaceKind, Scene};

/// Frontier resolution and ridge-confirmation thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FrontierSpec {
    /// Samples on a full circle (2D).
    pub n_ang: usize,
    /// Grid cells per cube face edge (3D); a full sphere has `6 * n_face^2` samples.
    pub n_face: usize,
    /// Minimum angle (degrees) subtended by flanking witnesses at a ridge sample.
    pub ridge_angle_min: f64,
    /// A sample also counts as a ridge when its discrete Laplacian is below
    /// `-laplace_factor * mean |Laplacian|` over the frontier.
    pub laplace_factor: f64,
}

impl Default for FrontierSpec {
    fn default() -> Self {
        FrontierSpec { n_ang: 360, n_face: 16, ridge_angle_min: 20.0, laplace_factor: 4.0 }
    }
}

impl FrontierSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_ang < 16 {
            return Err(Error::InvalidConfig(format!("n_ang must be >= 16, got {}", self.n_ang)));
        }
        if self.n_face < 4 {
            return Err(Error::InvalidConfig(format!("n_face must be >= 4, got {}", self.n_face)));
        }
        if !(self.ridge_angle_min > 0.0 && self.ridge_angle_min < 90.0) {
            return Err(Error::InvalidConfig("ridge_angle_min must lie in (0, 90) degrees".into()));
        }
        if !(self.laplace_factor > 0.0) {
            return Err(Error::InvalidConfig("laplace_factor must be positive".into()));
        }
        Ok(())
    }
}

/// Directions of the six face grids of a cube, radially projected onto the
/// unit sphere. Faces are ordered `+x, -x, +y, -y, +z, -z`.
pub fn cube_sphere_directions(n_face: usize) -> Vec<Point> {
    let mut dirs = Vec::with_capacity(6 * n_face * n_face);
    for face in 0..6 {
        let k = face / 2;
        let sign = if face % 2 == 0 { 1.0 } else { -1.0 };
        let (k1, k2) = ((k + 1) % 3, (k + 2) % 3);
        for j in 0..n_face {
            for i in 0..n_face {
                let a = -1.0 + (2 * i + 1) as f64 / n_face as f64;
                let b = -1.0 + (2 * j + 1) as f64 / n_face as f64;
                let mut p = Point::ZERO;
                p[k] = sign;
                p[k1] = a;
                p[k2] = b;
                dirs.push(p.normalized().expect("non-zero cube point"));
            }
        }
    }
    dirs
}

/// A fixed set of sample directions with a neighbourhood graph.
///
/// Closed layouts (circle, sphere) are expressed in world coordinates. Open
/// layouts (fan, cap) are expressed in a local frame whose axis is `+x` (2D)
/// or `+z` (3D) and get rotated onto the search axis at sampling time.
#[derive(Debug, Clone)]
pub struct Layout {
    dim: usize,
    dirs: Vec<Point>,
    neighbors: Vec<Vec<usize>>,
    rim: Vec<bool>,
    spacing: f64,
    half_angle: Option<f64>,
}

impl Layout {
    pub fn circle(n: usize) -> Self {
        let dirs = (0..n)
            .map(|k| {
                let t = TAU * k as f64 / n as f64;
                Point::xy(t.cos(), t.sin())
            })
            .collect();
        let neighbors = (0..n).map(|k| vec![(k + n - 1) % n, (k + 1) % n]).collect();
        Layout { dim: 2, dirs, neighbors, rim: vec![false; n], spacing: TAU / n as f64, half_angle: None }
    }

    pub fn sphere(n_face: usize) -> Self {
        let dirs = cube_sphere_directions(n_face);
        let neighbors = knn_graph(&dirs, 8);
        let n = dirs.len();
        Layout { dim: 3, dirs, neighbors, rim: vec![false; n], spacing: FRAC_PI_2 / n_face as f64, half_angle: None }
    }

    /// Fan of half-angle `half_angle_deg` sampled at the circle spacing for `n_ang`.
    pub fn fan(n_ang: usize, half_angle_deg: f64) -> Self {
        let spacing = TAU / n_ang as f64;
        let half = half_angle_deg.to_radians();
        let m = (half / spacing + 1e-9).floor() as isize;
        let dirs: Vec<Point> = (-m..=m)
            .map(|k| {
                let t = k as f64 * spacing;
                Point::xy(t.cos(), t.sin())
            })
            .collect();
        let n = dirs.len();
        let neighbors = (0..n)
            .map(|k| {
                let mut v = Vec::new();
                if k > 0 {
                    v.push(k - 1);
                }
                if k + 1 < n {
                    v.push(k + 1);
                }
                v
            })
            .collect();
        let rim = (0..n).map(|k| k == 0 || k + 1 == n).collect();
        Layout { dim: 2, dirs, neighbors, rim, spacing, half_angle: Some(half) }
    }

    /// Cone cap: one cube-face grid over `[-tan h, tan h]^2` projected onto the
    /// sphere, keeping directions within `half_angle_deg` of the axis.
    pub fn cap(n_face: usize, half_angle_deg: f64) -> Self {
        let half = half_angle_deg.to_radians();
        let extent = half.tan().min(1e6);
        let n = n_face.max(4);
        let mut slot = vec![usize::MAX; n * n];
        let mut dirs = Vec::new();
        let mut cells = Vec::new();
        for j in 0..n {
            for i in 0..n {
                let a = extent * (-1.0 + (2 * i + 1) as f64 / n as f64);
                let b = extent * (-1.0 + (2 * j + 1) as f64 / n as f64);
                let d = Point::new(a, b, 1.0).normalized().expect("non-zero");
                if d.z().clamp(-1.0, 1.0).acos() <= half + 1e-12 {
                    slot[j * n + i] = dirs.len();
                    dirs.push(d);
                    cells.push((i, j));
                }
            }
        }
        let mut neighbors = Vec::with_capacity(dirs.len());
        let mut rim = Vec::with_capacity(dirs.len());
        for &(i, j) in &cells {
            let mut nb = Vec::new();
            let mut complete = true;
            for dj in -1isize..=1 {
                for di in -1isize..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (ii, jj) = (i as isize + di, j as isize + dj);
                    if ii < 0 || jj < 0 || ii >= n as isize || jj >= n as isize {
                        complete = false;
                        continue;
                    }
                    match slot[jj as usize * n + ii as usize] {
                        usize::MAX => complete = false,
                        s => nb.push(s),
                    }
                }
            }
            neighbors.push(nb);
            rim.push(!complete);
        }
        let spacing = (2.0 * extent / n as f64).atan();
        Layout { dim: 3, dirs, neighbors, rim, spacing, half_angle: Some(half) }
    }

    /// Closed frontier for a scene dimension.
    pub fn full(dim: usize, spec: &FrontierSpec) -> Self {
        if dim == 2 { Layout::circle(spec.n_ang) } else { Layout::sphere(spec.n_face) }
    }

    /// Fan (2D) or cap (3D) frontier.
    pub fn local(dim: usize, spec: &FrontierSpec, half_angle_deg: f64) -> Self {
        if dim == 2 { Layout::fan(spec.n_ang, half_angle_deg) } else { Layout::cap(spec.n_face, half_angle_deg) }
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    /// Nominal angular spacing between neighbouring samples (radians).
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn directions(&self) -> &[Point] {
        &self.dirs
    }

    pub fn neighbors(&self, k: usize) -> &[usize] {
        &self.neighbors[k]
    }

    /// World directions, rotating open layouts onto `axis`.
    fn oriented(&self, axis: Option<&Point>) -> Vec<Point> {
        match (self.half_angle, axis) {
            (Some(_), Some(axis)) => {
                if self.dim == 2 {
                    let n = perp2(axis);
                    self.dirs.iter().map(|d| *axis * d.x() + n * d.y()).collect()
                } else {
                    let (u, v) = perpendicular_frame(axis);
                    self.dirs.iter().map(|d| u * d.x() + v * d.y() + *axis * d.z()).collect()
                }
            }
            _ => self.dirs.clone(),
        }
    }
}

fn knn_graph(dirs: &[Point], k: usize) -> Vec<Vec<usize>> {
    dirs.iter()
        .enumerate()
        .map(|(i, d)| {
            let mut cand: Vec<(f64, usize)> =
                dirs.iter().enumerate().filter(|&(j, _)| j != i).map(|(j, e)| (-d.dot(e), j)).collect();
            cand.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut nb: Vec<usize> = cand[..k].iter().map(|&(_, j)| j).collect();
            nb.sort_unstable();
            nb
        })
        .collect()
}

/// One frontier sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontierSample {
    pub dir: Point,
    pub point: Point,
    /// Distance at `point`; `None` when the point lies outside the domain.
    pub value: Option<f64>,
    pub witness: Point,
    /// Face crossed by out-of-domain samples.
    pub exit_face: Option<usize>,
}

/// Samples of the distance field on a circle, sphere, fan or cap.
#[derive(Debug, Clone)]
pub struct Frontier<'l> {
    pub center: Point,
    pub radius: f64,
    pub axis: Option<Point>,
    pub samples: Vec<FrontierSample>,
    layout: &'l Layout,
}

impl<'l> Frontier<'l> {
    /// Samples `layout` around `center`. `center_value` bounds the neighbour
    /// search; `axis` orients open layouts.
    pub fn sample(
        probe: &mut Probe<'_>,
        layout: &'l Layout,
        center: Point,
        center_value: f64,
        radius: f64,
        axis: Option<Point>,
    ) -> Result<Self> {
        let f = Self::sample_lenient(probe, layout, center, center_value, radius, axis)?;
        if f.samples.iter().all(|s| s.value.is_none()) {
            return Err(Error::FrontierEmpty { radius });
        }
        Ok(f)
    }

    // Like `sample`, but a frontier entirely outside the domain is not an error.
    fn sample_lenient(
        probe: &mut Probe<'_>,
        layout: &'l Layout,
        center: Point,
        center_value: f64,
        radius: f64,
        axis: Option<Point>,
    ) -> Result<Self> {
        let scene = probe.scene();
        probe.restrict(&center, center_value.max(0.0) + 2.0 * radius + 1e-9 * scene.length_scale());
        let mut samples = Vec::with_capacity(layout.len());
        for dir in layout.oriented(axis.as_ref()) {
            let point = center + dir * radius;
            if scene.contains(&point) {
                let d = probe.eval(&point, EvalKind::Frontier)?;
                samples.push(FrontierSample { dir, point, value: Some(d.value), witness: d.witness, exit_face: None });
            } else {
                samples.push(FrontierSample { dir, point, value: None, witness: point, exit_face: scene.exit_face(&point) });
            }
        }
        probe.unrestrict();
        Ok(Frontier { center, radius, axis, samples, layout })
    }

    pub fn layout(&self) -> &Layout {
        self.layout
    }

    /// Sample indices that are confirmed ridge crossings, ascending.
    pub fn ridge_samples(&self, spec: &FrontierSpec) -> Vec<usize> {
        let n = self.samples.len();
        let value = |k: usize| self.samples[k].value;
        let mut laps = vec![None; n];
        let mut sum = 0.0;
        let mut count = 0usize;
        for (k, lap) in laps.iter_mut().enumerate() {
            let Some(vk) = value(k) else { continue };
            let nb = self.layout.neighbors(k);
            if nb.is_empty() || self.layout.rim[k] {
                continue;
            }
            let vals: Option<Vec<f64>> = nb.iter().map(|&j| value(j)).collect();
            if let Some(vals) = vals {
                let l = vals.iter().map(|v| v - vk).sum::<f64>() * 2.0 / nb.len() as f64;
                *lap = Some(l);
                sum += l.abs();
                count += 1;
            }
        }
        let lap_threshold = if count > 0 { -spec.laplace_factor * sum / count as f64 } else { f64::NEG_INFINITY };
        let min_angle = spec.ridge_angle_min.to_radians();

        let mut out = Vec::new();
        for k in 0..n {
            if self.layout.rim[k] {
                continue;
            }
            let Some(vk) = value(k) else { continue };
            if vk <= 0.0 {
                continue;
            }
            let nb = self.layout.neighbors(k);
            // samples next to the domain edge only see one side of any ridge
            let is_max = nb.iter().all(|&j| match value(j) {
                None => false,
                Some(vj) => vk > vj || (vk == vj && k < j),
            });
            if !is_max {
                continue;
            }
            let q = self.samples[k].point;
            let mut rays: Vec<Point> = vec![self.samples[k].witness - q];
            rays.extend(nb.iter().filter(|&&j| value(j).is_some()).map(|&j| self.samples[j].witness - q));
            let mut diverge = false;
            'outer: for a in 0..rays.len() {
                for b in a + 1..rays.len() {
                    if rays[a].angle_to(&rays[b]) >= min_angle {
                        diverge = true;
                        break 'outer;
                    }
                }
            }
            let sharp = laps[k].is_some_and(|l| l < lap_threshold);
            if diverge || sharp {
                out.push(k);
            }
        }
        out
    }
}

/// Raw ridge directions of a sampled frontier, sorted by angle (2D) or
/// lexicographically (3D).
pub fn detect_ridge_directions(frontier: &Frontier<'_>, spec: &FrontierSpec) -> Vec<Point> {
    let dim = frontier.layout.dim;
    let mut dirs: Vec<Point> = frontier.ridge_samples(spec).into_iter().map(|k| frontier.samples[k].dir).collect();
    sort_directions(&mut dirs, dim);
    dirs
}

fn sort_directions(dirs: &mut [Point], dim: usize) {
    if dim == 2 {
        dirs.sort_by(|a, b| polar_angle(a).total_cmp(&polar_angle(b)));
    } else {
        dirs.sort_by(|a, b| a.x().total_cmp(&b.x()).then(a.y().total_cmp(&b.y())).then(a.z().total_cmp(&b.z())));
    }
}

fn polar_angle(d: &Point) -> f64 {
    d.y().atan2(d.x()).rem_euclid(TAU)
}

/// A refined ridge crossing on a frontier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ridge {
    pub dir: Point,
    pub point: Point,
    pub value: f64,
}

/// Sharpens each ridge sample by a local search between its neighbours and
/// merges candidates that converge onto the same crossing.
///
/// `pos_tol` is the target positional accuracy on the frontier.
pub fn refine_ridges(
    probe: &mut Probe<'_>,
    frontier: &Frontier<'_>,
    candidates: &[usize],
    pos_tol: f64,
) -> Vec<Ridge> {
    let layout = frontier.layout;
    let dim = layout.dim;
    let spacing = layout.spacing;
    let angle_tol = (pos_tol / frontier.radius).clamp(1e-12, spacing * 0.1);
    let cone = layout.half_angle.zip(frontier.axis);
    let scene = probe.scene();
    probe.restrict(&frontier.center, max_value(frontier) + 3.0 * frontier.radius);
    let mut refined: Vec<(Ridge, usize)> = Vec::with_capacity(candidates.len());
    for &k in candidates {
        let s = frontier.samples[k];
        let start = Ridge { dir: s.dir, point: s.point, value: s.value.unwrap_or(f64::NEG_INFINITY) };
        let eval_dir = |probe: &mut Probe<'_>, dir: Point| -> f64 {
            if let Some((half, axis)) = cone {
                if dir.angle_to(&axis) > half + 1e-12 {
                    return f64::NEG_INFINITY;
                }
            }
            let q = frontier.center + dir * frontier.radius;
            if !scene.contains(&q) {
                return f64::NEG_INFINITY;
            }
            probe.value(&q, EvalKind::Refine).unwrap_or(f64::NEG_INFINITY)
        };
        let best = if dim == 2 {
            let n = perp2(&s.dir);
            let dir_at = |t: f64| s.dir * t.cos() + n * t.sin();
            let (t, v) = golden_max(|t| eval_dir(probe, dir_at(t)), -spacing, spacing, angle_tol);
            (v > start.value).then(|| dir_at(t))
        } else {
            let (u, w) = perpendicular_frame(&s.dir);
            let dir_at = |p: &Point| (s.dir + u * p.x() + w * p.y()).normalized().unwrap_or(s.dir);
            let bound = 2.0 * spacing.tan();
            let steps = planar_directions(&Point::xy(1.0, 0.0), &Point::xy(0.0, 1.0), 24);
            let (p, v) = compass_max(
                |p| if p.norm() > bound { f64::NEG_INFINITY } else { eval_dir(probe, dir_at(p)) },
                Point::ZERO,
                start.value,
                &steps,
                0.5 * spacing.tan(),
                angle_tol,
                400,
            );
            (v > start.value).then(|| dir_at(&p))
        };
        let ridge = match best {
            Some(dir) => {
                let point = frontier.center + dir * frontier.radius;
                let value = probe.value(&point, EvalKind::Refine).unwrap_or(start.value);
                if value >= start.value { Ridge { dir, point, value } } else { start }
            }
            None => start,
        };
        refined.push((ridge, k));
    }
    probe.unrestrict();

    refined.sort_by(|a, b| b.0.value.total_cmp(&a.0.value).then(a.1.cmp(&b.1)));
    let mut kept: Vec<Ridge> = Vec::new();
    for (r, _) in refined {
        if kept.iter().all(|k| k.dir.angle_to(&r.dir) > spacing) {
            kept.push(r);
        }
    }
    if dim == 2 {
        kept.sort_by(|a, b| polar_angle(&a.dir).total_cmp(&polar_angle(&b.dir)));
    } else {
        kept.sort_by(|a, b| {
            a.dir.x().total_cmp(&b.dir.x()).then(a.dir.y().total_cmp(&b.dir.y())).then(a.dir.z().total_cmp(&b.dir.z()))
        });
    }
    kept
}

fn max_value(f: &Frontier<'_>) -> f64 {
    f.samples.iter().filter_map(|s| s.value).fold(0.0, f64::max)
}

/// Samples a full circle (2D) or cube-projected sphere (3D) around `center`.
pub fn sample_frontier(scene: &Scene, center: Point, radius: f64, spec: &FrontierSpec) -> Result<Vec<FrontierSample>> {
    if !(radius > 0.0) {
        return Err(Error::InvalidState(format!("frontier radius must be > 0, got {radius}")));
    }
    let layout = Layout::full(scene.dim(), spec);
    let mut probe = Probe::new(scene);
    let cv = scene.dist(&center)?.value;
    Ok(Frontier::sample(&mut probe, &layout, center, cv, radius, None)?.samples)
}

/// Refined ridge directions crossing the full frontier of `radius` around `center`.
pub fn ridge_directions(scene: &Scene, center: Point, radius: f64, spec: &FrontierSpec) -> Result<Vec<Point>> {
    let layout = Layout::full(scene.dim(), spec);
    let mut probe = Probe::new(scene);
    let cv = scene.dist(&center)?.value;
    let frontier = Frontier::sample(&mut probe, &layout, center, cv, radius, None)?;
    let cand = frontier.ridge_samples(spec);
    let tol = 1e-8 * scene.length_scale();
    Ok(refine_ridges(&mut probe, &frontier, &cand, tol).into_iter().map(|r| r.dir).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CpKind {
    Ordinary,
    PoreCandidate,
    ThroatCandidate,
    DeadEnd,
    BoundaryExit,
}

/// One traced point on a medial axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub position: Point,
    pub value: f64,
    /// Search radius used to reach this point.
    pub step_radius: f64,
    pub kind: CpKind,
}

/// Fan (2D) or cone (3D) ahead of a critical point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchRegion {
    pub apex: Point,
    pub axis: Point,
    pub radius: f64,
    /// Degrees.
    pub half_angle: f64,
}

/// Outcome of one flashlight step.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub next: CriticalPoint,
    /// Distinct ridges found inside the search region.
    pub ridge_count: usize,
}

/// Cached layouts for repeated flashlight steps with one configuration.
#[derive(Debug, Clone)]
pub struct Flashlight {
    spec: FrontierSpec,
    local: Layout,
    half_angle: f64,
    pos_tol: f64,
}

impl Flashlight {
    pub fn new(dim: usize, spec: FrontierSpec, half_angle: f64, pos_tol: f64) -> Self {
        Flashlight { spec, local: Layout::local(dim, &spec, half_angle), half_angle, pos_tol }
    }

    pub fn half_angle(&self) -> f64 {
        self.half_angle
    }

    /// Advances from `cp` to the next ridge crossing inside the region.
    pub fn step(&self, probe: &mut Probe<'_>, cp: &CriticalPoint, axis: Point, radius: f64) -> Result<Step> {
        let scene = probe.scene();
        if !(cp.value > 0.0) || !scene.contains(&cp.position) {
            return Err(Error::InvalidState("flashlight apex is not in the void".into()));
        }
        let frontier = Frontier::sample_lenient(probe, &self.local, cp.position, cp.value, radius, Some(axis))?;
        if let Some(exit) = boundary_exit(probe, cp, &axis, radius, &frontier)? {
            return Ok(Step { next: exit, ridge_count: 0 });
        }
        if frontier.samples.iter().all(|s| s.value.is_none()) {
            return Err(Error::FrontierEmpty { radius });
        }
        let cand = frontier.ridge_samples(&self.spec);
        let ridges = refine_ridges(probe, &frontier, &cand, self.pos_tol);
        let best = ridges
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.dir.angle_to(&axis).total_cmp(&b.1.dir.angle_to(&axis)).then(a.0.cmp(&b.0)))
            .map(|(_, r)| *r);
        Ok(match best {
            Some(r) => Step {
                next: CriticalPoint { position: r.point, value: r.value, step_radius: radius, kind: CpKind::Ordinary },
                ridge_count: ridges.len(),
            },
            None => Step { next: CriticalPoint { step_radius: 0.0, kind: CpKind::DeadEnd, ..*cp }, ridge_count: 0 },
        })
    }
}

// Boundary-exit point when the search region crosses an open face.
fn boundary_exit(
    probe: &mut Probe<'_>,
    cp: &CriticalPoint,
    axis: &Point,
    radius: f64,
    frontier: &Frontier<'_>,
) -> Result<Option<CriticalPoint>> {
    let scene = probe.scene();
    let mut faces: Vec<usize> = frontier
        .samples
        .iter()
        .filter_map(|s| s.exit_face)
        .filter(|&f| scene.face_kind(f) == FaceKind::Open)
        .collect();
    if faces.is_empty() {
        return Ok(None);
    }
    faces.sort_unstable();
    faces.dedup();
    let (lo, hi) = (scene.lo(), scene.hi());
    let mut best: Option<(f64, Point)> = None;
    for &f in &faces {
        let k = f / 2;
        let plane = if f % 2 == 1 { hi[k] } else { lo[k] };
        let gap = plane - cp.position[k];
        let t = if axis[k].abs() > 1e-12 && gap / axis[k] >= 0.0 { gap / axis[k] } else { f64::INFINITY };
        let mut p = if t <= 2.0 * radius { cp.position + *axis * t } else { cp.position };
        p[k] = plane;
        for j in 0..scene.dim() {
            if j != k {
                p[j] = p[j].clamp(lo[j], hi[j]);
            }
        }
        let d = p.dist(&cp.position);
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, p));
        }
    }
    let (d, p) = best.expect("at least one open face");
    let value = probe.eval(&p, EvalKind::Refine)?.value;
    Ok(Some(CriticalPoint { position: p, value, step_radius: d, kind: CpKind::BoundaryExit }))
}

/// Single flashlight step with freshly built layouts.
pub fn flashlight_step(
    scene: &Scene,
    cp: &CriticalPoint,
    region: &SearchRegion,
    spec: &FrontierSpec,
) -> Result<CriticalPoint> {
    if cp.position != region.apex {
        return Err(Error::InvalidState("search region apex must be the critical point".into()));
    }
    let tol = 1e-8 * scene.length_scale();
    let light = Flashlight::new(scene.dim(), *spec, region.half_angle, tol);
    let mut probe = Probe::new(scene);
    Ok(light.step(&mut probe, cp, region.axis, region.radius)?.next)
}

/// Classification of the centre of a window of consecutive path values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathClass {
    Ordinary,
    PoreCandidate,
    ThroatCandidate,
}

/// Classifies the centre of `values` as a strict window maximum (pore
/// candidate), strict minimum (throat candidate) or neither, each by more
/// than `tol`. Windows shorter than 3 are ordinary.
pub fn classify_along_path(values: &[f64], tol: f64) -> PathClass {
    if values.len() < 3 {
        return PathClass::Ordinary;
    }
    let c = values.len() / 2;
    let vc = values[c];
    let others = values.iter().enumerate().filter(|&(i, _)| i != c).map(|(_, v)| *v);
    if others.clone().all(|v| v < vc - tol) {
        PathClass::PoreCandidate
    } else if others.clone().all(|v| v > vc + tol) {
        PathClass::ThroatCandidate
    } else {
        PathClass::Ordinary
    }
}

/// True when `dist` drops on every probe taken perpendicular to `tangent`
/// at distance `offset` from `point` (a maximum across the axis).
pub fn confirm_saddle(probe: &mut Probe<'_>, point: &Point, tangent: &Point, value: f64, offset: f64) -> bool {
    let dim = probe.scene().dim();
    let Some(t) = tangent.normalized() else { return false };
    let dirs = if dim == 2 {
        let n = perp2(&t);
        vec![n, -n]
    } else {
        let (u, v) = perpendicular_frame(&t);
        planar_directions(&u, &v, 8)
    };
    dirs.iter().all(|d| match probe.eval(&(*point + *d * offset), EvalKind::Refine) {
        Ok(p) => p.value < value,
        Err(_) => true,
    })
}
