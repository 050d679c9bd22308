//! Grid-based reference extraction.
//!
//! The scene is rasterized at cell size `eps`, an exact Euclidean distance
//! transform is computed by the separable lower-envelope method, and ridge
//! cells are picked out as axis-wise local maxima whose flanking nearest-solid
//! cells diverge. Traced networks are checked against that ridge set, and the
//! cell counts feed the cost comparison with the traced extraction.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::index::PointIndex;
use crate::network::{PoreKind, PoreNetwork, ThroatKind};
use crate::probe::EvalCounters;
use crate::scene::{FaceKind, Scene, SolidPrimitive};

/// Default cap on the number of grid cells.
pub const DEFAULT_CELL_CAP: u128 = 1 << 30;

const NO_FEATURE: u32 = u32::MAX;

/// Rasterized scene with an optional distance map.
///
/// Closed faces get a one-cell layer of solid ghost cells outside the domain;
/// open faces get none.
#[derive(Debug, Clone)]
pub struct Grid {
    dim: usize,
    eps: f64,
    lo: Point,
    extents: [usize; 3],
    pad_lo: [usize; 3],
    dims: [usize; 3],
    solid: Vec<bool>,
    dist: Option<Vec<f64>>,
    feature: Vec<u32>,
}

impl Grid {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Cells per axis covering the domain (`ceil(size / eps)`).
    pub fn extents(&self) -> [usize; 3] {
        self.extents
    }

    /// Total cells including ghost layers.
    pub fn cell_count(&self) -> usize {
        self.solid.len()
    }

    pub fn void_count(&self) -> usize {
        self.solid.iter().filter(|s| !**s).count()
    }

    pub fn is_solid(&self, cell: usize) -> bool {
        self.solid[cell]
    }

    pub fn has_distance(&self) -> bool {
        self.dist.is_some()
    }

    /// Distance at a void cell (`None` for solid cells or before the transform).
    pub fn dist_at(&self, cell: usize) -> Option<f64> {
        let d = self.dist.as_ref()?;
        (!self.solid[cell]).then(|| d[cell])
    }

    fn coords(&self, cell: usize) -> [usize; 3] {
        let (nx, ny) = (self.dims[0], self.dims[1]);
        [cell % nx, (cell / nx) % ny, cell / (nx * ny)]
    }

    fn flat(&self, c: [usize; 3]) -> usize {
        c[0] + self.dims[0] * (c[1] + self.dims[1] * c[2])
    }

    // `c + sign * d`, if it stays on the grid.
    fn offset(&self, c: [usize; 3], d: &[isize; 3], sign: isize) -> Option<[usize; 3]> {
        let mut out = [0usize; 3];
        for k in 0..3 {
            let t = c[k] as isize + sign * d[k];
            if t < 0 || t >= self.dims[k] as isize {
                return None;
            }
            out[k] = t as usize;
        }
        Some(out)
    }

    pub fn cell_center(&self, cell: usize) -> Point {
        let c = self.coords(cell);
        let mut p = Point::ZERO;
        for k in 0..self.dim {
            p[k] = self.lo[k] + (c[k] as f64 - self.pad_lo[k] as f64 + 0.5) * self.eps;
        }
        p
    }

    /// Cell containing `p`, if it lies on the grid.
    pub fn cell_of(&self, p: &Point) -> Option<usize> {
        let mut c = [0usize; 3];
        for k in 0..self.dim {
            let t = ((p[k] - self.lo[k]) / self.eps).floor() + self.pad_lo[k] as f64;
            if t < 0.0 || t >= self.dims[k] as f64 {
                return None;
            }
            c[k] = t as usize;
        }
        Some(self.flat(c))
    }

    /// Cost record for the complexity report.
    pub fn cost(&self, length_scale: f64) -> GridCost {
        GridCost { eps: self.eps, l_over_eps: length_scale / self.eps, cells: self.cell_count() as u64 }
    }
}

/// Rasterizes `scene` at cell size `eps` with the default cell cap.
pub fn rasterize(scene: &Scene, eps: f64) -> Result<Grid> {
    rasterize_with_cap(scene, eps, DEFAULT_CELL_CAP)
}

/// A cell is solid iff its center has distance <= 0; cells holding a
/// boundary point are solid as well.
pub fn rasterize_with_cap(scene: &Scene, eps: f64, cap: u128) -> Result<Grid> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidConfig(format!("cell size must be positive, got {eps}")));
    }
    let dim = scene.dim();
    let (lo, hi) = (scene.lo(), scene.hi());
    let mut extents = [1usize; 3];
    let mut pad_lo = [0usize; 3];
    let mut dims = [1usize; 3];
    let mut total: u128 = 1;
    for k in 0..dim {
        let n = ((hi[k] - lo[k]) / eps).ceil();
        if !n.is_finite() || n > 1e15 {
            return Err(Error::GridTooFine { cells: u128::MAX, cap });
        }
        extents[k] = (n as usize).max(1);
        pad_lo[k] = usize::from(scene.face_kind(2 * k) == FaceKind::Closed);
        let pad_hi = usize::from(scene.face_kind(2 * k + 1) == FaceKind::Closed);
        dims[k] = extents[k] + pad_lo[k] + pad_hi;
        total = total.saturating_mul(dims[k] as u128);
    }
    if total > cap {
        return Err(Error::GridTooFine { cells: total, cap });
    }
    let n = total as usize;
    let mut grid = Grid {
        dim,
        eps,
        lo,
        extents,
        pad_lo,
        dims,
        solid: vec![false; n],
        dist: None,
        feature: Vec::new(),
    };
    // ghost layers
    for cell in 0..n {
        let c = grid.coords(cell);
        if (0..dim).any(|k| c[k] < pad_lo[k] || c[k] >= pad_lo[k] + extents[k]) {
            grid.solid[cell] = true;
        }
    }
    for prim in scene.primitives() {
        let (blo, bhi) = primitive_bounds(prim, dim, &lo, &hi);
        let mut range = [(0usize, 0usize); 3];
        let mut empty = false;
        for k in 0..3 {
            if k >= dim {
                range[k] = (0, 0);
                continue;
            }
            // interior index i has center lo + (i + 0.5) eps
            let a = ((blo[k] - lo[k]) / eps - 0.5).ceil().max(0.0);
            let b = ((bhi[k] - lo[k]) / eps - 0.5).floor().min(extents[k] as f64 - 1.0);
            if b < a {
                empty = true;
                break;
            }
            range[k] = (a as usize + pad_lo[k], b as usize + pad_lo[k]);
        }
        if empty {
            continue;
        }
        for z in range[2].0..=range[2].1 {
            for y in range[1].0..=range[1].1 {
                for x in range[0].0..=range[0].1 {
                    let cell = grid.flat([x, y, z]);
                    if !grid.solid[cell] && prim.signed_distance(&grid.cell_center(cell), dim) <= 0.0 {
                        grid.solid[cell] = true;
                    }
                }
            }
        }
    }
    for p in scene.boundary_points() {
        if let Some(cell) = grid.cell_of(p) {
            grid.solid[cell] = true;
        }
    }
    Ok(grid)
}

fn primitive_bounds(prim: &SolidPrimitive, dim: usize, lo: &Point, hi: &Point) -> (Point, Point) {
    let mut a = *lo;
    let mut b = *hi;
    match *prim {
        SolidPrimitive::Ball { center, radius } => {
            for k in 0..dim {
                a[k] = center[k] - radius;
                b[k] = center[k] + radius;
            }
        }
        SolidPrimitive::Capsule { a: p, b: q, radius } => {
            for k in 0..dim {
                a[k] = p[k].min(q[k]) - radius;
                b[k] = p[k].max(q[k]) + radius;
            }
        }
        SolidPrimitive::Box { lo: blo, hi: bhi } => {
            a = blo;
            b = bhi;
        }
        SolidPrimitive::HalfSpace { axis, offset, solid_above } => {
            if solid_above {
                a[axis] = offset;
            } else {
                b[axis] = offset;
            }
        }
    }
    (a, b)
}

// Squared 1D distance transform of sampled function `f` (lower envelope of
// parabolas), carrying the feature of the winning parabola.
fn envelope_1d(f: &[f64], feat_in: &[u32], d: &mut [f64], feat_out: &mut [u32], v: &mut Vec<usize>, z: &mut Vec<f64>) {
    let n = f.len();
    v.clear();
    z.clear();
    for q in 0..n {
        if !f[q].is_finite() {
            continue;
        }
        let qf = q as f64;
        loop {
            match v.last() {
                None => {
                    v.push(q);
                    z.push(f64::NEG_INFINITY);
                    break;
                }
                Some(&p) => {
                    let pf = p as f64;
                    let s = ((f[q] + qf * qf) - (f[p] + pf * pf)) / (2.0 * qf - 2.0 * pf);
                    if s <= *z.last().expect("parallel to v") {
                        v.pop();
                        z.pop();
                    } else {
                        v.push(q);
                        z.push(s);
                        break;
                    }
                }
            }
        }
    }
    if v.is_empty() {
        d.fill(f64::INFINITY);
        feat_out.fill(NO_FEATURE);
        return;
    }
    let mut k = 0;
    for i in 0..n {
        let x = i as f64;
        while k + 1 < v.len() && z[k + 1] < x {
            k += 1;
        }
        let p = v[k];
        let dx = x - p as f64;
        d[i] = dx * dx + f[p];
        feat_out[i] = feat_in[p];
    }
}

/// Exact Euclidean distance transform: each void cell gets the distance from
/// its center to the nearest solid cell center.
pub fn grid_distance_transform(mut grid: Grid) -> Result<Grid> {
    let n = grid.cell_count();
    if !grid.solid.iter().any(|s| *s) {
        return Err(Error::InvalidState("distance transform needs at least one solid cell".into()));
    }
    if n >= NO_FEATURE as usize {
        return Err(Error::GridTooFine { cells: n as u128, cap: NO_FEATURE as u128 });
    }
    let mut sq: Vec<f64> = grid.solid.iter().map(|&s| if s { 0.0 } else { f64::INFINITY }).collect();
    let mut feat: Vec<u32> = (0..n as u32).map(|i| if grid.solid[i as usize] { i } else { NO_FEATURE }).collect();
    let dims = grid.dims;
    let (mut v, mut z) = (Vec::new(), Vec::new());
    for axis in 0..grid.dim {
        let len = dims[axis];
        let stride: usize = dims[..axis].iter().product();
        let mut f = vec![0.0; len];
        let mut fi = vec![0u32; len];
        let mut d = vec![0.0; len];
        let mut fo = vec![0u32; len];
        for start in 0..n {
            // visit each line once, from its first cell
            if !(start / stride).is_multiple_of(len) {
                continue;
            }
            for i in 0..len {
                f[i] = sq[start + i * stride];
                fi[i] = feat[start + i * stride];
            }
            envelope_1d(&f, &fi, &mut d, &mut fo, &mut v, &mut z);
            for i in 0..len {
                sq[start + i * stride] = d[i];
                feat[start + i * stride] = fo[i];
            }
        }
    }
    let eps = grid.eps;
    grid.dist = Some(sq.iter().zip(&grid.solid).map(|(s, solid)| if *solid { 0.0 } else { eps * s.sqrt() }).collect());
    grid.feature = feat;
    Ok(grid)
}

/// One ridge cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RidgeCell {
    pub cell: usize,
    pub center: Point,
    pub value: f64,
    /// Distance is >= every neighbouring cell (including diagonals).
    pub local_max: bool,
}

/// Ridge cells of a distance map with a nearest-cell index.
#[derive(Debug, Clone)]
pub struct RidgeSet {
    pub dim: usize,
    pub eps: f64,
    pub cells: Vec<RidgeCell>,
    index: Option<PointIndex>,
    max_index: Option<(PointIndex, Vec<usize>)>,
}

impl RidgeSet {
    pub fn new(dim: usize, eps: f64, cells: Vec<RidgeCell>) -> Self {
        let index = (!cells.is_empty()).then(|| PointIndex::new(cells.iter().map(|c| c.center).collect(), dim));
        let maxima: Vec<usize> = (0..cells.len()).filter(|&i| cells[i].local_max).collect();
        let max_index = (!maxima.is_empty())
            .then(|| (PointIndex::new(maxima.iter().map(|&i| cells[i].center).collect(), dim), maxima));
        RidgeSet { dim, eps, cells, index, max_index }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Nearest ridge cell and its distance from `p`.
    pub fn nearest(&self, p: &Point) -> Option<(&RidgeCell, f64)> {
        let (i, d) = self.index.as_ref()?.nearest(p)?;
        Some((&self.cells[i], d))
    }

    /// Nearest ridge local maximum and its distance from `p`.
    pub fn nearest_max(&self, p: &Point) -> Option<(&RidgeCell, f64)> {
        let (index, ids) = self.max_index.as_ref()?;
        let (i, d) = index.nearest(p)?;
        Some((&self.cells[ids[i]], d))
    }
}

/// Ridge cells: void cells that are >= both cells of some opposite-neighbour
/// pair (axis or diagonal) and > at least one of them, and whose two flanking
/// nearest-solid cells subtend at least `min_angle_deg` at the cell center.
///
/// Diagonal pairs catch slanted ridges across which the distance is monotone
/// along every axis. Requiring one strict inequality drops the flat plateaus
/// that run parallel to walls.
pub fn grid_ridge(grid: &Grid, min_angle_deg: f64) -> Result<RidgeSet> {
    let dist = grid.dist.as_ref().ok_or_else(|| Error::InvalidState("distance map not computed".into()))?;
    let min_angle = min_angle_deg.to_radians();
    let dims = grid.dims;
    let value = |cell: usize| if grid.solid[cell] { 0.0 } else { dist[cell] };
    // one offset per opposite-neighbour pair: axes and diagonals
    let mut pairs = Vec::new();
    for dz in -1isize..=1 {
        for dy in -1isize..=1 {
            for dx in -1isize..=1 {
                let d = [dx, dy, dz];
                let first = d.iter().find(|v| **v != 0);
                if first == Some(&1) && (grid.dim == 3 || dz == 0) {
                    pairs.push(d);
                }
            }
        }
    }
    let mut cells = Vec::new();
    for cell in 0..grid.cell_count() {
        if grid.solid[cell] {
            continue;
        }
        let c = grid.coords(cell);
        let vc = dist[cell];
        let center = grid.cell_center(cell);
        let mut ridge = false;
        for d in &pairs {
            let (Some(a), Some(b)) = (grid.offset(c, d, -1), grid.offset(c, d, 1)) else { continue };
            let (ia, ib) = (grid.flat(a), grid.flat(b));
            let (va, vb) = (value(ia), value(ib));
            if !(vc >= va && vc >= vb && vc > va.min(vb)) {
                continue;
            }
            let (fa, fb) = (grid.feature[ia], grid.feature[ib]);
            if fa == NO_FEATURE || fb == NO_FEATURE {
                continue;
            }
            let wa = grid.cell_center(fa as usize) - center;
            let wb = grid.cell_center(fb as usize) - center;
            if wa.angle_to(&wb) >= min_angle {
                ridge = true;
                break;
            }
        }
        if !ridge {
            continue;
        }
        let mut local_max = true;
        'n: for dz in -1isize..=1 {
            for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    let d = [dx, dy, dz];
                    if d == [0, 0, 0] || (grid.dim == 2 && dz != 0) {
                        continue;
                    }
                    let mut nb = [0usize; 3];
                    for k in 0..3 {
                        let t = c[k] as isize + d[k];
                        if t < 0 || t >= dims[k] as isize {
                            continue 'n;
                        }
                        nb[k] = t as usize;
                    }
                    if value(grid.flat(nb)) > vc {
                        local_max = false;
                        break 'n;
                    }
                }
            }
        }
        cells.push(RidgeCell { cell, center, value: vc, local_max });
    }
    Ok(RidgeSet::new(grid.dim, grid.eps, cells))
}

/// Agreement between a traced network and a grid ridge set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub eps: f64,
    /// Pass threshold, `2 * eps`.
    pub threshold: f64,
    pub vertices: usize,
    /// One-sided Hausdorff distance from path vertices to ridge cell centers.
    pub max_vertex_distance: f64,
    pub mean_vertex_distance: f64,
    pub pores_checked: usize,
    /// Largest distance from an interior pore to its nearest ridge local maximum.
    pub max_pore_distance: f64,
    pub throats_checked: usize,
    /// Largest |throat radius - grid distance at the nearest ridge cell|.
    pub max_throat_radius_error: f64,
    pub pass: bool,
}

/// Checks every path vertex, interior pore and interior throat of `net`
/// against `ridge`.
pub fn compare(net: &PoreNetwork, ridge: &RidgeSet, eps: f64) -> Result<CompareReport> {
    if ridge.is_empty() {
        return Err(Error::Incomparable("the ridge set is empty".into()));
    }
    if net.dim != ridge.dim {
        return Err(Error::Incomparable(format!("network is {}D but the ridge set is {}D", net.dim, ridge.dim)));
    }
    let threshold = 2.0 * eps;
    let mut r = CompareReport {
        eps,
        threshold,
        vertices: 0,
        max_vertex_distance: 0.0,
        mean_vertex_distance: 0.0,
        pores_checked: 0,
        max_pore_distance: 0.0,
        throats_checked: 0,
        max_throat_radius_error: 0.0,
        pass: true,
    };
    let mut sum = 0.0;
    for path in &net.paths {
        for p in &path.points {
            let (_, d) = ridge.nearest(p).expect("non-empty ridge");
            r.vertices += 1;
            sum += d;
            r.max_vertex_distance = r.max_vertex_distance.max(d);
        }
    }
    if r.vertices > 0 {
        r.mean_vertex_distance = sum / r.vertices as f64;
    }
    for pore in net.pores.iter().filter(|p| p.kind == PoreKind::Interior) {
        let d = ridge.nearest_max(&pore.center).map_or(f64::INFINITY, |(_, d)| d);
        r.pores_checked += 1;
        r.max_pore_distance = r.max_pore_distance.max(d);
    }
    for t in net.throats.iter().filter(|t| t.kind == ThroatKind::Interior) {
        let (cell, _) = ridge.nearest(&t.center).expect("non-empty ridge");
        r.throats_checked += 1;
        r.max_throat_radius_error = r.max_throat_radius_error.max((t.radius - cell.value).abs());
    }
    r.pass = r.max_vertex_distance <= threshold
        && r.max_pore_distance <= threshold
        && r.max_throat_radius_error <= threshold;
    Ok(r)
}

/// Cells processed by one grid extraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCost {
    pub eps: f64,
    pub l_over_eps: f64,
    pub cells: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexityRow {
    pub eps: f64,
    pub l_over_eps: f64,
    pub grid_cells: u64,
    pub traced_evaluations: u64,
    /// `grid_cells / traced_evaluations`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub dim: usize,
    pub rows: Vec<ComplexityRow>,
    /// Least-squares slope of log(grid cells) against log(L/eps).
    pub grid_exponent: f64,
    /// Same slope for the traced evaluation count (0 when it ignores eps).
    pub traced_exponent: f64,
    /// Pores plus throats found by the traced extraction.
    pub centers: u64,
    /// Per-center cost ratio `(L/eps)^d / log10(L/eps)` at `L/eps = 10`.
    pub reference_ratio: f64,
}

/// Per-center cost of a grid method over a traced one: `(L/eps)^d / log10(L/eps)`.
pub fn per_center_ratio(l_over_eps: f64, dim: usize) -> f64 {
    l_over_eps.powi(dim as i32) / l_over_eps.log10()
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return 0.0;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 { 0.0 } else { sxy / sxx }
}

/// Tabulates grid cost against the traced extraction's evaluation count.
/// `traced[i]` is the counter set of the traced run paired with `grids[i]`.
pub fn complexity_report(dim: usize, traced: &[EvalCounters], grids: &[GridCost]) -> ComplexityReport {
    let rows: Vec<ComplexityRow> = grids
        .iter()
        .zip(traced)
        .map(|(g, t)| ComplexityRow {
            eps: g.eps,
            l_over_eps: g.l_over_eps,
            grid_cells: g.cells,
            traced_evaluations: t.dist_evaluations,
            ratio: g.cells as f64 / t.dist_evaluations.max(1) as f64,
        })
        .collect();
    let xs: Vec<f64> = rows.iter().map(|r| r.l_over_eps.ln()).collect();
    let gy: Vec<f64> = rows.iter().map(|r| (r.grid_cells as f64).ln()).collect();
    let ty: Vec<f64> = rows.iter().map(|r| (r.traced_evaluations.max(1) as f64).ln()).collect();
    ComplexityReport {
        dim,
        grid_exponent: slope(&xs, &gy),
        traced_exponent: slope(&xs, &ty),
        centers: traced.first().map_or(0, |t| t.pores + t.throats),
        reference_ratio: per_center_ratio(10.0, dim),
        rows,
    }
}

/// Writes `cell,value` for every void cell.
pub fn write_dist_csv(grid: &Grid, path: &Path) -> Result<()> {
    let dist = grid.dist.as_ref().ok_or_else(|| Error::InvalidState("distance map not computed".into()))?;
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let mut body = || -> std::io::Result<()> {
        writeln!(w, "cell,value")?;
        for (cell, d) in dist.iter().enumerate() {
            if !grid.solid[cell] {
                writeln!(w, "{cell},{d}")?;
            }
        }
        w.flush()
    };
    body().map_err(|e| Error::io(path, e))
}

/// Writes `cell,x,y[,z],value,local_max` for every ridge cell.
pub fn write_ridge_csv(ridge: &RidgeSet, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let dim = ridge.dim;
    let mut body = || -> std::io::Result<()> {
        writeln!(w, "{}", if dim == 2 { "cell,x,y,value,local_max" } else { "cell,x,y,z,value,local_max" })?;
        for c in &ridge.cells {
            let coords: Vec<String> = c.center.coords(dim).iter().map(|v| v.to_string()).collect();
            writeln!(w, "{},{},{},{}", c.cell, coords.join(","), c.value, u8::from(c.local_max))?;
        }
        w.flush()
    };
    body().map_err(|e| Error::io(path, e))
}

/// Reads a ridge set written by [`write_ridge_csv`].
pub fn read_ridge_csv(path: &Path, dim: usize, eps: f64) -> Result<RidgeSet> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut cells = Vec::new();
    for (n, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        let bad = || Error::schema(path, format!("line {}: malformed ridge row", n + 1));
        if f.len() != dim + 3 {
            return Err(bad());
        }
        let cell = f[0].parse().map_err(|_| bad())?;
        let coords: Vec<f64> = f[1..=dim].iter().map(|s| s.parse()).collect::<std::result::Result<_, _>>().map_err(|_| bad())?;
        let value = f[dim + 1].parse().map_err(|_| bad())?;
        let local_max = match f[dim + 2] {
            "1" => true,
            "0" => false,
            _ => return Err(bad()),
        };
        let center = Point::from_slice(&coords).ok_or_else(bad)?;
        cells.push(RidgeCell { cell, center, value, local_max });
    }
    Ok(RidgeSet::new(dim, eps, cells))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::SolidPrimitive;
    use proptest::prelude::*;

    fn four_disks() -> Scene {
        let disks = [(25.0, 25.0), (75.0, 25.0), (25.0, 75.0), (75.0, 75.0)]
            .iter()
            .map(|&(x, y)| SolidPrimitive::Ball { center: Point::xy(x, y), radius: 20.0 })
            .collect();
        Scene::new(2, Point::ZERO, Point::xy(100.0, 100.0), vec![FaceKind::Closed; 4], disks, vec![]).unwrap()
    }

    fn walled(w: f64, h: f64) -> Scene {
        Scene::new(2, Point::ZERO, Point::xy(w, h), vec![FaceKind::Closed; 4], vec![], vec![]).unwrap()
    }

    fn brute(grid: &Grid) -> Vec<Option<f64>> {
        let solids: Vec<[usize; 3]> = (0..grid.cell_count()).filter(|&c| grid.solid[c]).map(|c| grid.coords(c)).collect();
        (0..grid.cell_count())
            .map(|c| {
                if grid.solid[c] {
                    return None;
                }
                let a = grid.coords(c);
                let best = solids
                    .iter()
                    .map(|b| (0..3).map(|k| (a[k] as f64 - b[k] as f64).powi(2)).sum::<f64>())
                    .fold(f64::INFINITY, f64::min);
                Some(grid.eps * best.sqrt())
            })
            .collect()
    }

    #[test]
    fn void_area_of_four_disks() {
        let g = rasterize(&four_disks(), 1.0).unwrap();
        let analytic = 10_000.0 * (1.0 - 4.0 * std::f64::consts::PI * 400.0 / 10_000.0);
        let void = g.void_count() as f64;
        assert!((void - analytic).abs() / analytic < 0.015, "{void} vs {analytic}");
        assert_eq!(g.extents(), [100, 100, 1]);
        assert_eq!(rasterize(&four_disks(), 0.5).unwrap().extents(), [200, 200, 1]);
    }

    #[test]
    fn all_solid_scene_has_no_void() {
        let full = SolidPrimitive::Box { lo: Point::xy(-1.0, -1.0), hi: Point::xy(11.0, 11.0) };
        let s = Scene::new(2, Point::ZERO, Point::xy(10.0, 10.0), vec![FaceKind::Closed; 4], vec![full], vec![]).unwrap();
        assert_eq!(rasterize(&s, 1.0).unwrap().void_count(), 0);
    }

    #[test]
    fn cell_cap_is_enforced() {
        assert!(matches!(rasterize_with_cap(&four_disks(), 0.01, 1000), Err(Error::GridTooFine { .. })));
    }

    #[test]
    fn adjacent_cell_is_one_eps_away() {
        let s = walled(4.0, 4.0);
        let g = grid_distance_transform(rasterize(&s, 1.0).unwrap()).unwrap();
        let c = g.cell_of(&Point::xy(0.5, 1.5)).unwrap();
        assert_eq!(g.dist_at(c), Some(1.0));
    }

    #[test]
    fn box_center_distance() {
        let g = grid_distance_transform(rasterize(&walled(100.0, 100.0), 1.0).unwrap()).unwrap();
        let c = g.cell_of(&Point::xy(50.2, 50.2)).unwrap();
        assert!((g.dist_at(c).unwrap() - 50.0).abs() <= 1.0);
    }

    #[test]
    fn four_disk_center_distance() {
        let g = grid_distance_transform(rasterize(&four_disks(), 0.25).unwrap()).unwrap();
        let c = g.cell_of(&Point::xy(50.01, 50.01)).unwrap();
        let exact = 25.0 * 2f64.sqrt() - 20.0;
        assert!((g.dist_at(c).unwrap() - exact).abs() <= 0.25);
    }

    #[test]
    fn plates_ridge_is_mid_row() {
        let s = Scene::new(2, Point::ZERO, Point::xy(40.0, 21.0), vec![FaceKind::Open, FaceKind::Open, FaceKind::Closed, FaceKind::Closed], vec![], vec![])
            .unwrap();
        let g = grid_distance_transform(rasterize(&s, 1.0).unwrap()).unwrap();
        let r = grid_ridge(&g, 20.0).unwrap();
        assert!(!r.is_empty());
        assert!(r.cells.iter().all(|c| c.center.y() == 10.5), "{:?}", r.cells.iter().map(|c| c.center).collect::<Vec<_>>());
        assert_eq!(r.len(), 40);
    }

    #[test]
    fn four_disk_ridge_covers_axes() {
        let g = grid_distance_transform(rasterize(&four_disks(), 0.25).unwrap()).unwrap();
        let r = grid_ridge(&g, 20.0).unwrap();
        for t in [30.0, 40.0, 60.0, 70.0] {
            for p in [Point::xy(50.0, t), Point::xy(t, 50.0)] {
                assert!(r.nearest(&p).unwrap().1 <= 0.25 * 2f64.sqrt(), "{p:?}");
            }
        }
    }

    #[test]
    fn single_ball_ridge_is_sparse() {
        let ball = SolidPrimitive::Ball { center: Point::xy(100.0, 100.0), radius: 10.0 };
        let s = Scene::new(2, Point::ZERO, Point::xy(200.0, 200.0), vec![FaceKind::Open; 4], vec![ball], vec![]).unwrap();
        let g = grid_distance_transform(rasterize(&s, 1.0).unwrap()).unwrap();
        let r = grid_ridge(&g, 20.0).unwrap();
        let inner = r.cells.iter().filter(|c| c.center.dist(&Point::xy(100.0, 100.0)) < 80.0).count();
        assert!(inner <= 20, "{inner} ridge cells near the ball");
    }

    #[test]
    fn per_center_ratio_reference() {
        assert!((per_center_ratio(10.0, 3) - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn grid_cost_quadruples_when_halving_eps() {
        let s = four_disks();
        let a = rasterize(&s, 1.0).unwrap().cell_count() as f64;
        let b = rasterize(&s, 0.5).unwrap().cell_count() as f64;
        assert!((b / a - 4.0).abs() < 0.8);
    }

    #[test]
    fn empty_ridge_is_incomparable() {
        let r = RidgeSet::new(2, 1.0, vec![]);
        assert!(matches!(compare(&PoreNetwork { dim: 2, ..Default::default() }, &r, 1.0), Err(Error::Incomparable(_))));
    }

    #[test]
    fn ridge_csv_round_trip() {
        let g = grid_distance_transform(rasterize(&four_disks(), 1.0).unwrap()).unwrap();
        let r = grid_ridge(&g, 20.0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("ridge.csv");
        write_ridge_csv(&r, &p).unwrap();
        let back = read_ridge_csv(&p, 2, 1.0).unwrap();
        assert_eq!(back.cells, r.cells);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn transform_matches_brute_force_2d(
            balls in prop::collection::vec((0.0f64..30.0, 0.0f64..30.0, 0.5f64..6.0), 0..5),
            eps in 0.5f64..1.0,
            open in any::<[bool; 4]>(),
        ) {
            let prims = balls.iter().map(|&(x, y, r)| SolidPrimitive::Ball { center: Point::xy(x, y), radius: r }).collect();
            let faces = open.iter().map(|&o| if o { FaceKind::Open } else { FaceKind::Closed }).collect();
            let Ok(s) = Scene::new(2, Point::ZERO, Point::xy(30.0, 30.0), faces, prims, vec![]) else { return Ok(()) };
            let g = rasterize(&s, eps).unwrap();
            prop_assume!(g.cell_count() <= 64 * 64 && g.solid.iter().any(|x| *x));
            let want = brute(&g);
            let g = grid_distance_transform(g).unwrap();
            for (c, w) in want.iter().enumerate() {
                prop_assert_eq!(g.dist_at(c), *w);
            }
        }

        #[test]
        fn transform_matches_brute_force_3d(
            balls in prop::collection::vec((0.0f64..14.0, 0.0f64..14.0, 0.0f64..14.0, 0.5f64..4.0), 1..4),
        ) {
            let prims = balls.iter().map(|&(x, y, z, r)| SolidPrimitive::Ball { center: Point::new(x, y, z), radius: r }).collect();
            let s = Scene::new(3, Point::ZERO, Point::new(14.0, 14.0, 14.0), vec![FaceKind::Open; 6], prims, vec![]).unwrap();
            let g = rasterize(&s, 1.0).unwrap();
            prop_assume!(g.solid.iter().any(|x| *x));
            let want = brute(&g);
            let g = grid_distance_transform(g).unwrap();
            for (c, w) in want.iter().enumerate() {
                prop_assert_eq!(g.dist_at(c), *w);
            }
        }
    }
}
