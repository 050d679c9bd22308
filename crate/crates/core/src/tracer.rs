//! Network extraction: seeding, axis tracing and pore bookkeeping.
//!
//! Pores are explored in waves. Every pore of a wave is expanded
//! independently against a snapshot of the shared state, and the results are
//! merged in wave order, so running the expansions on several threads gives
//! exactly the single-threaded network.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::frontier::{
    classify_along_path, confirm_saddle, cube_sphere_directions, refine_ridges, CpKind, CriticalPoint, Flashlight,
    Frontier, FrontierSpec, Layout, PathClass, Ridge,
};
use crate::geom::{perp2, perpendicular_frame, Point};
use crate::network::{throat_geometry, MedialPath, Pore, PoreKind, PoreNetwork, Provenance, ThroatKind};
use crate::optimize::{compass_max, crest_max, golden_max, planar_directions};
use crate::probe::{EvalCounters, EvalKind, Probe};
use crate::scene::Scene;

/// Directions closer than this to an already traced axis are skipped.
const VISITED_ANGLE_DEG: f64 = 30.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceConfig {
    pub frontier: FrontierSpec,
    /// Half-angle of the flashlight fan/cone, degrees.
    pub half_angle: f64,
    /// Step radius as a fraction of the distance at the current point.
    pub step_fraction: f64,
    /// Smallest step radius; defaults to `1e-3 * L`.
    pub r_min: Option<f64>,
    /// Radius of the full frontier around a pore as a fraction of its radius.
    pub pore_frontier_fraction: f64,
    /// Extremum tolerance for path classification; defaults to `1e-6 * L`.
    pub tol_extremum: Option<f64>,
    /// Fixed pore merge distance; defaults to `max(0.05 * radius, 2 * r_min)`.
    pub merge_delta: Option<f64>,
    /// Convergence threshold for ascent and pore polishing; defaults to `1e-6 * L`.
    pub ascent_tol: Option<f64>,
    /// Maximum number of pores expanded.
    pub m_max: usize,
    /// Maximum steps per axis; defaults to `ceil(10 * L / r_min)`.
    pub n_max: Option<usize>,
    /// Classification window length (odd, >= 3).
    pub window: usize,
    /// Starting point for the first ascent; `None` scans a coarse lattice.
    pub seed: Option<Point>,
    pub keep_dead_ends: bool,
}

impl Default for TraceConfig {
    fn default() -> Self {
        TraceConfig {
            frontier: FrontierSpec::default(),
            half_angle: 45.0,
            step_fraction: 0.5,
            r_min: None,
            pore_frontier_fraction: 0.6,
            tol_extremum: None,
            merge_delta: None,
            ascent_tol: None,
            m_max: 100_000,
            n_max: None,
            window: 5,
            seed: None,
            keep_dead_ends: true,
        }
    }
}

impl TraceConfig {
    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.frontier.validate()?;
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(self.half_angle > 0.0 && self.half_angle < 90.0) {
            return bad("half_angle must lie in (0, 90) degrees");
        }
        if !(self.step_fraction > 0.0 && self.step_fraction < 1.0) {
            return bad("step_fraction must lie in (0, 1)");
        }
        if !(self.pore_frontier_fraction > 0.0 && self.pore_frontier_fraction < 1.0) {
            return bad("pore_frontier_fraction must lie in (0, 1)");
        }
        for (name, v) in [
            ("r_min", self.r_min),
            ("tol_extremum", self.tol_extremum),
            ("merge_delta", self.merge_delta),
            ("ascent_tol", self.ascent_tol),
        ] {
            if v.is_some_and(|v| !(v > 0.0 && v.is_finite())) {
                return Err(Error::InvalidConfig(format!("{name} must be positive")));
            }
        }
        if self.m_max < 1 {
            return bad("m_max must be >= 1");
        }
        if self.n_max.is_some_and(|n| n < 2) {
            return bad("n_max must be >= 2");
        }
        if self.window < 3 || self.window.is_multiple_of(2) {
            return bad("window must be odd and >= 3");
        }
        Ok(())
    }

    fn resolve(&self, scene: &Scene) -> Result<Params> {
        self.validate()?;
        let l = scene.length_scale();
        let r_min = self.r_min.unwrap_or(1e-3 * l);
        let tol = self.tol_extremum.unwrap_or(1e-6 * l);
        let n_max = self.n_max.unwrap_or((10.0 * l / r_min).ceil() as usize).max(2);
        Ok(Params {
            l,
            r_min,
            tol,
            tau: self.ascent_tol.unwrap_or(1e-6 * l),
            pos_tol: 0.01 * tol,
            merge_delta: self.merge_delta,
            n_max,
            m_max: self.m_max,
            window: self.window,
            step_fraction: self.step_fraction,
            pore_fraction: self.pore_frontier_fraction,
        })
    }
}

#[derive(Debug, Clone, Copy)]
struct Params {
    l: f64,
    r_min: f64,
    tol: f64,
    tau: f64,
    pos_tol: f64,
    merge_delta: Option<f64>,
    n_max: usize,
    m_max: usize,
    window: usize,
    step_fraction: f64,
    pore_fraction: f64,
}

impl Params {
    fn delta(&self, a: f64, b: f64) -> f64 {
        self.merge_delta.unwrap_or_else(|| (0.05 * a.max(b)).max(2.0 * self.r_min))
    }
}

// Everything a worker needs, built once per extraction.
struct Kit<'s> {
    scene: &'s Scene,
    par: Params,
    spec: FrontierSpec,
    full: Layout,
    light: Flashlight,
    compass: Vec<Point>,
}

impl<'s> Kit<'s> {
    fn new(scene: &'s Scene, cfg: &TraceConfig) -> Result<Self> {
        let par = cfg.resolve(scene)?;
        let dim = scene.dim();
        let compass = if dim == 2 {
            planar_directions(&Point::axis(0), &Point::axis(1), 32)
        } else {
            cube_sphere_directions(4)
        };
        Ok(Kit {
            scene,
            par,
            spec: cfg.frontier,
            full: Layout::full(dim, &cfg.frontier),
            light: Flashlight::new(dim, cfg.frontier, cfg.half_angle, par.pos_tol),
            compass,
        })
    }

    // Local maximisation of dist by compass search.
    fn polish(&self, probe: &mut Probe<'_>, p: Point, v: f64, h0: f64) -> (Point, f64) {
        let scene = self.scene;
        crest_max(
            |q| if scene.contains(q) { probe.value(q, EvalKind::Refine).unwrap_or(f64::NEG_INFINITY) } else { f64::NEG_INFINITY },
            p,
            v,
            &self.compass,
            scene.dim(),
            h0.max(self.par.tau),
            self.par.tau,
            100_000,
        )
    }

    // Maximises dist over the open face containing `p`.
    fn polish_on_face(&self, probe: &mut Probe<'_>, p: Point, v: f64, h0: f64) -> (Point, f64) {
        let scene = self.scene;
        let dim = scene.dim();
        let Some(k) = (0..dim).find(|&k| p[k] == scene.lo()[k] || p[k] == scene.hi()[k]) else {
            return (p, v);
        };
        let others: Vec<usize> = (0..dim).filter(|&j| j != k).collect();
        let dirs = if dim == 2 {
            let e = Point::axis(others[0]);
            vec![e, -e]
        } else {
            planar_directions(&Point::axis(others[0]), &Point::axis(others[1]), 16)
        };
        compass_max(
            |q| if scene.contains(q) { probe.value(q, EvalKind::Refine).unwrap_or(f64::NEG_INFINITY) } else { f64::NEG_INFINITY },
            p,
            v,
            &dirs,
            h0.max(self.par.tau),
            self.par.tau,
            100_000,
        )
    }
}

/// Climbs from `start` by backtracking steepest ascent, then polishes the
/// result with a compass search.
fn ascend(kit: &Kit<'_>, probe: &mut Probe<'_>, start: Point) -> Result<(Point, f64)> {
    let scene = kit.scene;
    let tau = kit.par.tau;
    let h0 = kit.par.l / 16.0;
    let mut p = start;
    let mut d = probe.eval(&p, EvalKind::Ascent)?;
    if d.value <= 0.0 {
        return Err(Error::InvalidState("ascent must start in the void".into()));
    }
    let mut h = d.value.min(h0);
    let budget = 100_000;
    let mut steps = 0;
    while h >= tau {
        steps += 1;
        if steps > budget {
            return Err(Error::NonConvergence { steps, last: p, value: d.value });
        }
        let q = p + d.gradient * h;
        if scene.contains(&q) {
            let e = probe.eval(&q, EvalKind::Ascent)?;
            if e.value > d.value {
                p = q;
                d = e;
                h = d.value.min(h0);
                continue;
            }
        }
        h *= 0.5;
    }
    Ok(kit.polish(probe, p, d.value, 0.25 * d.value))
}

/// First void point of a lattice with stride `L/16`, visiting cell centers by
/// distance to the domain center (ties lexicographic).
pub fn auto_scan(scene: &Scene) -> Result<Point> {
    let dim = scene.dim();
    let (lo, hi) = (scene.lo(), scene.hi());
    let stride = scene.length_scale() / 16.0;
    let mut counts = [1usize; 3];
    for k in 0..dim {
        counts[k] = ((hi[k] - lo[k]) / stride).ceil().max(1.0) as usize;
    }
    let mid = (lo + hi) * 0.5;
    let mut cells = Vec::with_capacity(counts.iter().product());
    for i in 0..counts[0] {
        for j in 0..counts[1] {
            for m in 0..counts[2] {
                let mut p = Point::ZERO;
                for (k, idx) in [i, j, m].into_iter().enumerate().take(dim) {
                    p[k] = (lo[k] + (idx as f64 + 0.5) * stride).min(hi[k]);
                }
                cells.push(p);
            }
        }
    }
    cells.sort_by(|a, b| {
        a.dist(&mid)
            .total_cmp(&b.dist(&mid))
            .then(a.x().total_cmp(&b.x()))
            .then(a.y().total_cmp(&b.y()))
            .then(a.z().total_cmp(&b.z()))
    });
    for p in cells {
        if scene.contains(&p) && scene.dist(&p)?.value > 0.0 {
            return Ok(p);
        }
    }
    Err(Error::InvalidScene("the scene has no void space".into()))
}

fn first_pore(kit: &Kit<'_>, probe: &mut Probe<'_>, seed: Option<Point>) -> Result<Pore> {
    let start = match seed {
        Some(s) => {
            if kit.scene.dist(&s)?.value > 0.0 {
                s
            } else {
                auto_scan(kit.scene)?
            }
        }
        None => auto_scan(kit.scene)?,
    };
    let (center, radius) = ascend(kit, probe, start)?;
    Ok(Pore { id: 0, center, radius, kind: PoreKind::Interior })
}

/// Finds the first pore by steepest ascent from `seed` (or from the
/// configured seed / a lattice scan when `seed` is `None` or lies in solid).
pub fn find_first_pore(scene: &Scene, seed: Option<Point>, cfg: &TraceConfig) -> Result<Pore> {
    let kit = Kit::new(scene, cfg)?;
    let mut probe = Probe::new(scene);
    first_pore(&kit, &mut probe, seed.or(cfg.seed))
}

/// How a traced axis ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathEnd {
    Pore,
    Boundary,
    DeadEnd,
    /// Step budget exhausted; the path is incomplete.
    Budget,
}

/// A traced axis starting at a pore center.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisTrace {
    pub path: MedialPath,
    pub end: PathEnd,
}

fn trace_from(kit: &Kit<'_>, probe: &mut Probe<'_>, c0: Point, v0: f64, first: &Ridge) -> Result<AxisTrace> {
    let scene = kit.scene;
    let par = kit.par;
    let r_max = (0.5 * v0).max(par.r_min);
    let mut pts = vec![c0, first.point];
    let mut vals = vec![v0, first.value];
    let mut throat: Option<usize> = None;
    let mut axis = first.dir;
    let half = par.window / 2;

    let end = loop {
        let n = pts.len();
        if n > par.n_max {
            break PathEnd::Budget;
        }
        let cp = CriticalPoint { position: pts[n - 1], value: vals[n - 1], step_radius: 0.0, kind: CpKind::Ordinary };
        if cp.value <= par.r_min {
            break PathEnd::DeadEnd;
        }
        if let Some(a) = (pts[n - 1] - pts[n - 2]).normalized() {
            axis = a;
        }
        let mut r = (par.step_fraction * cp.value).clamp(par.r_min, r_max);
        let step = loop {
            let s = kit.light.step(probe, &cp, axis, r)?;
            let branching = s.next.kind == CpKind::Ordinary && s.ridge_count >= 2;
            if (branching || s.next.kind == CpKind::DeadEnd) && r > par.r_min {
                r = (0.5 * r).max(par.r_min);
                continue;
            }
            break s;
        };
        match step.next.kind {
            CpKind::DeadEnd => {
                // still climbing: the axis turns out of the cone at a pore just ahead
                if vals[n - 1] > vals[n - 2] + par.tol {
                    let (p, v) = kit.polish(probe, cp.position, cp.value, r);
                    if v > cp.value + par.tol {
                        pts[n - 1] = p;
                        vals[n - 1] = v;
                        break PathEnd::Pore;
                    }
                }
                break PathEnd::DeadEnd;
            }
            CpKind::BoundaryExit => {
                let (p, v) = kit.polish_on_face(probe, step.next.position, step.next.value, 0.25 * cp.value);
                pts.push(p);
                vals.push(v);
                break PathEnd::Boundary;
            }
            _ => {}
        }
        if step.ridge_count >= 2 {
            // branching cannot be resolved below r_min: a junction pore sits here
            let (p, v) = kit.polish(probe, cp.position, cp.value, r);
            pts[n - 1] = p;
            vals[n - 1] = v;
            break PathEnd::Pore;
        }
        pts.push(step.next.position);
        vals.push(step.next.value);

        let n = pts.len();
        if n >= par.window {
            let c = n - 1 - half;
            match classify_along_path(&vals[n - par.window..], par.tol) {
                PathClass::PoreCandidate => {
                    pts.truncate(c + 1);
                    vals.truncate(c + 1);
                    let h0 = pts[c].dist(&pts[c - 1]);
                    let (p, v) = kit.polish(probe, pts[c], vals[c], h0);
                    pts[c] = p;
                    vals[c] = v;
                    break PathEnd::Pore;
                }
                PathClass::ThroatCandidate => {
                    let tangent = pts[c + 1] - pts[c - 1];
                    let better = throat.is_none_or(|t| vals[c] < vals[t]);
                    if better && confirm_saddle(probe, &pts[c], &tangent, vals[c], 0.25 * vals[c]) {
                        throat = Some(c);
                    }
                }
                PathClass::Ordinary => {
                    // a peak the window misses because the path cut past a pore
                    // beside it and climbs again towards the next one
                    if vals[c] > vals[c - 1] + par.tol && vals[c] > vals[c + 1] + par.tol {
                        let h0 = pts[c].dist(&pts[c - 1]);
                        let (p, v) = kit.polish(probe, pts[c], vals[c], h0);
                        if p.dist(&pts[c]) <= h0 {
                            pts.truncate(c + 1);
                            vals.truncate(c + 1);
                            pts[c] = p;
                            vals[c] = v;
                            break PathEnd::Pore;
                        }
                    }
                }
            }
        }
    };

    let last = pts.len() - 1;
    let throat_index = match throat.filter(|&t| t >= 1 && t < last) {
        Some(t) => {
            let (p, v) = refine_throat(kit, probe, &pts, t);
            if v < vals[t] {
                pts[t] = p;
                vals[t] = v;
            }
            Some(t)
        }
        None if last >= 1 => {
            let mut best = 1;
            for i in 2..=last {
                if vals[i] < vals[best] {
                    best = i;
                }
            }
            Some(best)
        }
        None => None,
    };
    let step_radii = pts.windows(2).map(|w| w[0].dist(&w[1])).collect();
    let path = MedialPath { points: pts, values: vals, step_radii, throat_index, complete: end != PathEnd::Budget };
    let _ = scene;
    Ok(AxisTrace { path, end })
}

// Minimises the ridge-projected distance along the polyline around vertex `t`.
fn refine_throat(kit: &Kit<'_>, probe: &mut Probe<'_>, pts: &[Point], t: usize) -> (Point, f64) {
    let (a, m, b) = (pts[t - 1], pts[t], pts[t + 1]);
    let (la, lb) = (a.dist(&m), m.dist(&b));
    let seg = la.max(lb);
    if seg <= 0.0 {
        return (m, f64::INFINITY);
    }
    let mv = kit.scene.dist(&m).map(|d| d.value).unwrap_or(0.0);
    probe.restrict(&m, mv + 4.0 * seg);
    let at = |s: f64| -> (Point, Point) {
        if s < 1.0 {
            (a.lerp(&m, s), (m - a).normalized().unwrap_or(Point::axis(0)))
        } else {
            (m.lerp(&b, s - 1.0), (b - m).normalized().unwrap_or(Point::axis(0)))
        }
    };
    let tol_s = (0.1 * kit.par.tau / seg).max(1e-12);
    let (s, _) = golden_max(
        |s| {
            let (q, tan) = at(s);
            -ridge_max(kit, probe, q, tan, 0.5 * seg).1
        },
        0.0,
        2.0,
        tol_s,
    );
    let (q, tan) = at(s);
    let best = ridge_max(kit, probe, q, tan, 0.5 * seg);
    probe.unrestrict();
    best
}

// Maximum of dist across the axis: over the line (2D) or plane (3D)
// perpendicular to `tangent` through `q`, within `width`.
fn ridge_max(kit: &Kit<'_>, probe: &mut Probe<'_>, q: Point, tangent: Point, width: f64) -> (Point, f64) {
    let scene = kit.scene;
    let tau = kit.par.tau;
    let mut value = |p: &Point| {
        if scene.contains(p) {
            probe.value(p, EvalKind::Refine).unwrap_or(f64::NEG_INFINITY)
        } else {
            f64::NEG_INFINITY
        }
    };
    if scene.dim() == 2 {
        let n = perp2(&tangent);
        let (u, v) = golden_max(|u| value(&(q + n * u)), -width, width, tau);
        let v0 = value(&q);
        if v0 >= v { (q, v0) } else { (q + n * u, v) }
    } else {
        let (u, w) = perpendicular_frame(&tangent);
        let dirs = planar_directions(&u, &w, 8);
        let v0 = value(&q);
        compass_max(
            |p| if p.dist(&q) > width { f64::NEG_INFINITY } else { value(p) },
            q,
            v0,
            &dirs,
            0.25 * width,
            tau,
            10_000,
        )
    }
}

// Ridge directions of the full frontier around a pore.
fn pore_ridges(kit: &Kit<'_>, probe: &mut Probe<'_>, center: Point, value: f64) -> Result<Vec<Ridge>> {
    let r_f = kit.par.pore_fraction * value;
    let frontier = Frontier::sample(probe, &kit.full, center, value, r_f, None)?;
    let cand = frontier.ridge_samples(&kit.spec);
    Ok(refine_ridges(probe, &frontier, &cand, kit.par.pos_tol))
}

/// Traces one axis from `from` in the ridge direction closest to `direction`.
///
/// The path starts at the pore center and runs until a pore, an open face, a
/// dead end or the step budget (`complete == false`).
pub fn trace_axis(scene: &Scene, from: &Pore, direction: Point, cfg: &TraceConfig) -> Result<AxisTrace> {
    let kit = Kit::new(scene, cfg)?;
    let mut probe = Probe::new(scene);
    let ridges = pore_ridges(&kit, &mut probe, from.center, from.radius)?;
    let first = ridges
        .iter()
        .filter(|r| r.dir.angle_to(&direction) < VISITED_ANGLE_DEG.to_radians())
        .min_by(|a, b| a.dir.angle_to(&direction).total_cmp(&b.dir.angle_to(&direction)))
        .ok_or_else(|| Error::InvalidState("no ridge leaves the pore in that direction".into()))?;
    trace_from(&kit, &mut probe, from.center, from.radius, first)
}

// Expansion of one pore: every ridge direction not yet visited.
fn expand(kit: &Kit<'_>, center: Point, value: f64, visited: &[Point]) -> Result<(Vec<AxisTrace>, EvalCounters)> {
    let mut probe = Probe::new(kit.scene);
    let ridges = pore_ridges(kit, &mut probe, center, value)?;
    let limit = VISITED_ANGLE_DEG.to_radians();
    let mut traces = Vec::new();
    for r in ridges {
        if visited.iter().any(|v| v.angle_to(&r.dir) < limit) {
            continue;
        }
        traces.push(trace_from(kit, &mut probe, center, value, &r)?);
    }
    Ok((traces, probe.take_counters()))
}

#[derive(Debug, Clone)]
struct PoreRec {
    center: Point,
    radius: f64,
    kind: PoreKind,
    visited: Vec<Point>,
}

#[derive(Debug, Clone)]
struct Edge {
    a: usize,
    b: usize,
    path: MedialPath,
}

struct Builder {
    par: Params,
    pores: Vec<PoreRec>,
    edges: Vec<Edge>,
}

impl Builder {
    fn find_or_insert(&mut self, center: Point, radius: f64, kind: PoreKind) -> (usize, bool) {
        let mut best: Option<(usize, f64)> = None;
        for (i, p) in self.pores.iter().enumerate() {
            let d = p.center.dist(&center);
            if d <= self.par.delta(p.radius, radius) && best.is_none_or(|(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        match best {
            Some((i, _)) => (i, false),
            None => {
                self.pores.push(PoreRec { center, radius, kind, visited: Vec::new() });
                (self.pores.len() - 1, true)
            }
        }
    }

    // Adds a trace from pore `start`; returns a newly created interior pore to expand.
    fn merge(&mut self, start: usize, trace: AxisTrace) -> Option<usize> {
        let path = trace.path;
        let n = path.points.len();
        let end = path.points[n - 1];
        let value = path.values[n - 1];
        let kind = match trace.end {
            PathEnd::Pore => PoreKind::Interior,
            PathEnd::Boundary => PoreKind::Boundary,
            PathEnd::DeadEnd | PathEnd::Budget => PoreKind::DeadEnd,
        };
        let (id, created) = self.find_or_insert(end, value, kind);
        if id == start {
            return None;
        }
        if let Some(back) = (path.points[n - 2] - end).normalized() {
            self.pores[id].visited.push(back);
        }
        self.edges.push(Edge { a: start, b: id, path });
        (created && kind == PoreKind::Interior).then_some(id)
    }
}

fn run_wave<T: Send>(threads: usize, jobs: usize, f: impl Fn(usize) -> T + Sync + Send) -> Result<Vec<T>> {
    if threads <= 1 || jobs <= 1 {
        return Ok((0..jobs).map(f).collect());
    }
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker threads: {e}")))?;
    Ok(pool.install(|| (0..jobs).into_par_iter().map(f).collect()))
}

/// Extracts the pore network single-threaded.
pub fn extract_network(scene: &Scene, cfg: &TraceConfig) -> Result<PoreNetwork> {
    extract_network_with_threads(scene, cfg, 1)
}

/// Extracts the pore network, expanding the pores of each wave on up to
/// `threads` workers. The result does not depend on `threads`.
pub fn extract_network_with_threads(scene: &Scene, cfg: &TraceConfig, threads: usize) -> Result<PoreNetwork> {
    let kit = Kit::new(scene, cfg)?;
    let mut counters = EvalCounters::default();
    let mut probe = Probe::new(scene);
    let first = first_pore(&kit, &mut probe, cfg.seed)?;
    counters += probe.take_counters();

    let mut b = Builder {
        par: kit.par,
        pores: vec![PoreRec { center: first.center, radius: first.radius, kind: PoreKind::Interior, visited: vec![] }],
        edges: Vec::new(),
    };
    let mut wave = vec![0usize];
    let mut expanded = 0usize;
    let mut complete = true;
    while !wave.is_empty() {
        if expanded + wave.len() > kit.par.m_max {
            wave.truncate(kit.par.m_max - expanded);
            complete = false;
        }
        if wave.is_empty() {
            break;
        }
        expanded += wave.len();
        let jobs: Vec<(Point, f64, Vec<Point>)> =
            wave.iter().map(|&i| (b.pores[i].center, b.pores[i].radius, b.pores[i].visited.clone())).collect();
        let results = run_wave(threads, jobs.len(), |j| expand(&kit, jobs[j].0, jobs[j].1, &jobs[j].2))?;
        let mut next = Vec::new();
        for (&start, res) in wave.iter().zip(results) {
            let (traces, c) = res?;
            counters += c;
            for t in traces {
                complete &= t.path.complete;
                if let Some(id) = b.merge(start, t) {
                    next.push(id);
                }
            }
        }
        wave = next;
    }

    let mut net = assemble(b, cfg.keep_dead_ends, scene.dim())?;
    counters.pores = net.pores.len() as u64;
    counters.throats = net.throats.len() as u64;
    net.provenance = Provenance { config_hash: cfg.hash(), counters, complete };
    Ok(net)
}

// A path that slips past a pore without stopping crosses the same constriction
// as the shorter path into that pore. Throat (a, b) is dropped when a shorter
// throat (a, c) has its center within the merge distance and c already
// connects to b, so connectivity is unchanged.
fn drop_shadow_throats(edges: &mut Vec<((usize, usize), MedialPath)>, par: &Params) {
    let throat = |p: &MedialPath| p.throat_index.map(|i| (p.points[i], p.values[i]));
    let linked = |edges: &[((usize, usize), MedialPath)], x: usize, y: usize| {
        edges.iter().any(|((a, b), _)| (*a == x && *b == y) || (*a == y && *b == x))
    };
    let mut k = 0;
    while k < edges.len() {
        let ((a, b), ref path) = edges[k];
        let shadowed = throat(path).is_some_and(|(q, v)| {
            edges.iter().enumerate().any(|(j, ((a2, b2), other))| {
                if j == k || other.step_sum() >= path.step_sum() {
                    return false;
                }
                let Some((q2, v2)) = throat(other) else { return false };
                if q.dist(&q2) > par.delta(v, v2) {
                    return false;
                }
                [(a, b), (b, a)].iter().any(|&(s, t)| {
                    let c = if *a2 == s { *b2 } else if *b2 == s { *a2 } else { return false };
                    c != t && linked(edges, c, t)
                })
            })
        });
        if shadowed {
            edges.remove(k);
        } else {
            k += 1;
        }
    }
}

// Union-find with merge-to-largest-radius (ties: lowest id).
fn dedup_with(pores: &[Pore], ends: &mut [(usize, usize)], close: impl Fn(&Pore, &Pore) -> bool) -> Vec<Pore> {
    let n = pores.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if close(&pores[i], &pores[j]) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut rep = vec![usize::MAX; n];
    for i in 0..n {
        let root = find(&mut parent, i);
        let cur = rep[root];
        if cur == usize::MAX || pores[i].radius > pores[cur].radius {
            rep[root] = i;
        }
    }
    let mut new_id = vec![usize::MAX; n];
    let mut out = Vec::new();
    for i in 0..n {
        let r = rep[find(&mut parent, i)];
        if r == i {
            new_id[i] = out.len();
            out.push(Pore { id: out.len(), ..pores[i] });
        }
    }
    let map: Vec<usize> = (0..n).map(|i| new_id[rep[find(&mut parent, i)]]).collect();
    for e in ends.iter_mut() {
        *e = (map[e.0], map[e.1]);
    }
    out
}

/// Merges pores whose centers lie within `delta` of each other (transitively)
/// into the member with the largest radius, re-pointing `ends`. The result is
/// independent of the input order up to id numbering.
pub fn dedup_pores(pores: &[Pore], ends: &mut [(usize, usize)], delta: f64) -> Vec<Pore> {
    dedup_with(pores, ends, |a, b| a.center.dist(&b.center) <= delta)
}

fn assemble(b: Builder, keep_dead_ends: bool, dim: usize) -> Result<PoreNetwork> {
    let par = b.par;
    let raw: Vec<Pore> = b
        .pores
        .iter()
        .enumerate()
        .map(|(id, p)| Pore { id, center: p.center, radius: p.radius, kind: p.kind })
        .collect();
    let mut ends: Vec<(usize, usize)> = b.edges.iter().map(|e| (e.a, e.b)).collect();
    let mut pores = dedup_with(&raw, &mut ends, |p, q| p.center.dist(&q.center) <= par.delta(p.radius, q.radius));

    // drop self-loops and repeated pore pairs (first discovery wins)
    let mut seen = std::collections::BTreeSet::new();
    let mut edges: Vec<((usize, usize), MedialPath)> = Vec::new();
    for (e, (a, bb)) in b.edges.into_iter().zip(ends) {
        if a == bb || !seen.insert((a.min(bb), a.max(bb))) {
            continue;
        }
        edges.push(((a, bb), e.path));
    }
    drop_shadow_throats(&mut edges, &par);

    // A pore with one channel and dead-end branches is itself the dead end.
    let is_dead = |pores: &[Pore], i: usize| pores[i].kind == PoreKind::DeadEnd;
    let mut drop_pore = vec![false; pores.len()];
    let mut drop_edge = vec![false; edges.len()];
    let mut collapse = Vec::new();
    for p in 0..pores.len() {
        if pores[p].kind != PoreKind::Interior {
            continue;
        }
        let mut channels = 0;
        let mut dead = Vec::new();
        for (k, ((a, bb), _)) in edges.iter().enumerate() {
            let other = if *a == p {
                *bb
            } else if *bb == p {
                *a
            } else {
                continue;
            };
            if is_dead(&pores, other) {
                dead.push((k, other));
            } else {
                channels += 1;
            }
        }
        if channels == 1 && !dead.is_empty() {
            collapse.push(p);
            for (k, other) in dead {
                drop_edge[k] = true;
                drop_pore[other] = true;
            }
        }
    }
    for p in collapse {
        pores[p].kind = PoreKind::DeadEnd;
    }
    if !keep_dead_ends {
        for (i, p) in pores.iter().enumerate() {
            if p.kind == PoreKind::DeadEnd {
                drop_pore[i] = true;
            }
        }
        for (k, ((a, bb), _)) in edges.iter().enumerate() {
            if drop_pore[*a] || drop_pore[*bb] {
                drop_edge[k] = true;
            }
        }
    }

    let mut new_id = vec![usize::MAX; pores.len()];
    let mut kept = Vec::new();
    for (i, p) in pores.iter().enumerate() {
        if !drop_pore[i] {
            new_id[i] = kept.len();
            kept.push(Pore { id: kept.len(), ..*p });
        }
    }
    let mut throats = Vec::new();
    let mut paths = Vec::new();
    for (k, ((a, bb), path)) in edges.into_iter().enumerate() {
        if drop_edge[k] || drop_pore[a] || drop_pore[bb] {
            continue;
        }
        let (mut p1, mut p2, mut path) = (kept[new_id[a]], kept[new_id[bb]], path);
        let kind = if p1.kind == PoreKind::Boundary || p2.kind == PoreKind::Boundary {
            ThroatKind::Boundary
        } else if p1.kind == PoreKind::DeadEnd || p2.kind == PoreKind::DeadEnd {
            ThroatKind::DeadEnd
        } else {
            ThroatKind::Interior
        };
        let flip = match kind {
            ThroatKind::DeadEnd => p1.kind == PoreKind::DeadEnd && p2.kind != PoreKind::DeadEnd,
            ThroatKind::Boundary => p1.kind == PoreKind::Boundary && p2.kind != PoreKind::Boundary,
            ThroatKind::Interior => false,
        };
        if flip {
            std::mem::swap(&mut p1, &mut p2);
            path = path.reversed();
        }
        // path ends coincide with the (possibly merged) pore centers
        let n = path.points.len();
        path.points[0] = p1.center;
        path.values[0] = p1.radius;
        path.points[n - 1] = p2.center;
        path.values[n - 1] = p2.radius;
        path.step_radii = path.points.windows(2).map(|w| w[0].dist(&w[1])).collect();
        if kind != ThroatKind::DeadEnd && path.throat_index.is_none() {
            path.throat_index = Some(path.steps());
        }
        let mut t = throat_geometry(&path, &p1, &p2, kind)?;
        t.id = throats.len();
        throats.push(t);
        paths.push(path);
    }
    Ok(PoreNetwork { dim, pores: kept, throats, paths, provenance: Provenance::default() })
}
