//! Uniform bucket grid over a boundary point cloud.
//!
//! Buckets are sized to the mean nearest-neighbour spacing of the cloud and
//! visited in a fixed order, so query results never depend on insertion
//! history.

use crate::geom::Point;

#[derive(Debug, Clone)]
pub struct PointIndex {
    points: Vec<Point>,
    dim: usize,
    origin: Point,
    cell: f64,
    dims: [usize; 3],
    // CSR layout: ids of bucket b are ids[starts[b]..starts[b + 1]]
    starts: Vec<usize>,
    ids: Vec<u32>,
    mean_spacing: f64,
}

impl PointIndex {
    pub fn new(points: Vec<Point>, dim: usize) -> Self {
        let n = points.len();
        let (lo, hi) = bounds(&points, dim);
        let mut extent = 0.0f64;
        let mut volume = 1.0;
        for k in 0..dim {
            let e = hi[k] - lo[k];
            extent = extent.max(e);
            volume *= e.max(f64::MIN_POSITIVE);
        }
        let guess = if n > 1 && volume > 0.0 {
            (volume / n as f64).powf(1.0 / dim as f64)
        } else {
            1.0
        };
        let guess = if guess.is_finite() && guess > 0.0 { guess.max(extent * 1e-6) } else { 1.0 };
        let mut index = Self::with_cell(points, dim, lo, hi, guess);
        if n > 1 {
            let mut total = 0.0;
            for i in 0..n {
                total += index.nearest_excluding(&index.points[i], Some(i)).map_or(0.0, |(_, d)| d);
            }
            let spacing = total / n as f64;
            if spacing > 0.0 && spacing.is_finite() {
                let points = std::mem::take(&mut index.points);
                index = Self::with_cell(points, dim, lo, hi, spacing.max(extent * 1e-6));
                index.mean_spacing = spacing;
            }
        }
        index
    }

    fn with_cell(points: Vec<Point>, dim: usize, lo: Point, hi: Point, cell: f64) -> Self {
        let n = points.len().max(1);
        let mut cell = cell;
        let mut dims = [1usize; 3];
        loop {
            let mut total = 1usize;
            for k in 0..dim {
                dims[k] = (((hi[k] - lo[k]) / cell).floor() as usize + 1).max(1);
                total = total.saturating_mul(dims[k]);
            }
            if total <= 8 * n + 64 {
                break;
            }
            cell *= 1.5;
        }
        let bucket_of = |p: &Point| -> usize {
            let mut b = 0;
            for k in (0..dim).rev() {
                let c = (((p[k] - lo[k]) / cell).floor().max(0.0) as usize).min(dims[k] - 1);
                b = b * dims[k] + c;
            }
            b
        };
        let nb: usize = dims.iter().product();
        let mut counts = vec![0usize; nb + 1];
        for p in &points {
            counts[bucket_of(p) + 1] += 1;
        }
        for b in 0..nb {
            counts[b + 1] += counts[b];
        }
        let starts = counts.clone();
        let mut fill = counts;
        let mut ids = vec![0u32; points.len()];
        for (i, p) in points.iter().enumerate() {
            let b = bucket_of(p);
            ids[fill[b]] = i as u32;
            fill[b] += 1;
        }
        PointIndex { points, dim, origin: lo, cell, dims, starts, ids, mean_spacing: cell }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, i: usize) -> Point {
        self.points[i]
    }

    /// Mean nearest-neighbour spacing of the cloud (the bucket size).
    pub fn mean_spacing(&self) -> f64 {
        self.mean_spacing
    }

    fn cell_of(&self, q: &Point) -> [isize; 3] {
        let mut c = [0isize; 3];
        for k in 0..self.dim {
            let v = ((q[k] - self.origin[k]) / self.cell).floor();
            c[k] = v.clamp(0.0, (self.dims[k] - 1) as f64) as isize;
        }
        c
    }

    fn bucket(&self, c: [isize; 3]) -> &[u32] {
        let mut b = 0usize;
        for k in (0..self.dim).rev() {
            b = b * self.dims[k] + c[k] as usize;
        }
        &self.ids[self.starts[b]..self.starts[b + 1]]
    }

    /// Nearest point to `q`; equal distances resolve to the lowest index.
    pub fn nearest(&self, q: &Point) -> Option<(usize, f64)> {
        self.nearest_excluding(q, None)
    }

    fn nearest_excluding(&self, q: &Point, skip: Option<usize>) -> Option<(usize, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let center = self.cell_of(q);
        let mut best: Option<(usize, f64)> = None;
        let max_ring = (0..self.dim).map(|k| self.dims[k]).max().unwrap_or(1) as isize;
        for ring in 0..=max_ring {
            self.for_each_ring_cell(center, ring, |c| {
                for &id in self.bucket(c) {
                    let id = id as usize;
                    if Some(id) == skip {
                        continue;
                    }
                    let d = self.points[id].dist(q);
                    let better = match best {
                        None => true,
                        Some((bi, bd)) => d < bd || (d == bd && id < bi),
                    };
                    if better {
                        best = Some((id, d));
                    }
                }
            });
            if let Some((_, bd)) = best {
                if bd < self.block_clearance(q, center, ring) {
                    break;
                }
            }
        }
        best
    }

    // Distance from q to the outside of the (2 ring + 1)^dim block of cells.
    fn block_clearance(&self, q: &Point, center: [isize; 3], ring: isize) -> f64 {
        let mut clear = f64::INFINITY;
        for k in 0..self.dim {
            let lo_c = center[k] - ring;
            let hi_c = center[k] + ring;
            if lo_c > 0 {
                clear = clear.min(q[k] - (self.origin[k] + lo_c as f64 * self.cell));
            }
            if hi_c < self.dims[k] as isize - 1 {
                clear = clear.min(self.origin[k] + (hi_c + 1) as f64 * self.cell - q[k]);
            }
        }
        clear
    }

    fn for_each_ring_cell(&self, center: [isize; 3], ring: isize, mut f: impl FnMut([isize; 3])) {
        let lo = |k: usize| (center[k] - ring).max(0);
        let hi = |k: usize| {
            if k < self.dim {
                (center[k] + ring).min(self.dims[k] as isize - 1)
            } else {
                0
            }
        };
        let lo_z = if self.dim == 3 { lo(2) } else { 0 };
        for z in lo_z..=hi(2) {
            for y in lo(1)..=hi(1) {
                for x in lo(0)..=hi(0) {
                    let c = [x, y, z];
                    let cheb = (0..self.dim).map(|k| (c[k] - center[k]).abs()).max().unwrap_or(0);
                    if cheb == ring {
                        f(c);
                    }
                }
            }
        }
    }

    /// Indices (ascending) of every point within `range` of `q`.
    pub fn within(&self, q: &Point, range: f64) -> Vec<usize> {
        if !range.is_finite() {
            return (0..self.points.len()).collect();
        }
        let mut lo = [0isize; 3];
        let mut hi = [0isize; 3];
        for k in 0..self.dim {
            let a = ((q[k] - range - self.origin[k]) / self.cell).floor();
            let b = ((q[k] + range - self.origin[k]) / self.cell).floor();
            let max = (self.dims[k] - 1) as f64;
            if b < 0.0 || a > max {
                return Vec::new();
            }
            lo[k] = a.clamp(0.0, max) as isize;
            hi[k] = b.clamp(0.0, max) as isize;
        }
        let mut out = Vec::new();
        for z in lo[2]..=hi[2] {
            for y in lo[1]..=hi[1] {
                for x in lo[0]..=hi[0] {
                    for &id in self.bucket([x, y, z]) {
                        if self.points[id as usize].dist(q) <= range {
                            out.push(id as usize);
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}

fn bounds(points: &[Point], dim: usize) -> (Point, Point) {
    let mut lo = Point([f64::INFINITY; 3]);
    let mut hi = Point([f64::NEG_INFINITY; 3]);
    for p in points {
        for k in 0..dim {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    for k in 0..3 {
        if k >= dim || !lo[k].is_finite() {
            lo[k] = 0.0;
            hi[k] = 0.0;
        }
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_nearest(points: &[Point], q: &Point) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, p) in points.iter().enumerate() {
            let d = p.dist(q);
            if d < best.1 {
                best = (i, d);
            }
        }
        best
    }

    #[test]
    fn ties_resolve_to_lowest_index() {
        let pts = vec![Point::xy(1.0, 0.0), Point::xy(-1.0, 0.0), Point::xy(0.0, 1.0)];
        let idx = PointIndex::new(pts, 2);
        assert_eq!(idx.nearest(&Point::xy(0.0, 0.0)).unwrap().0, 0);
    }

    #[test]
    fn infinite_range_returns_everything() {
        let pts = vec![
            Point::xy(0.0, 0.0),
            Point::xy(10.0, 0.0),
            Point::xy(0.0, 10.0),
            Point::xy(10.0, 10.0),
        ];
        let idx = PointIndex::new(pts, 2);
        assert_eq!(idx.within(&Point::xy(5.0, 5.0), f64::INFINITY), vec![0, 1, 2, 3]);
        assert_eq!(idx.within(&Point::xy(0.0, 0.0), 1.0), vec![0]);
    }

    proptest! {
        #[test]
        fn nearest_matches_brute_force(
            raw in prop::collection::vec((0.0f64..50.0, 0.0f64..50.0, 0.0f64..50.0), 1..120),
            q in (-20.0f64..70.0, -20.0f64..70.0, -20.0f64..70.0),
            dim in 2usize..=3,
        ) {
            let pts: Vec<Point> = raw.iter()
                .map(|&(x, y, z)| if dim == 2 { Point::xy(x, y) } else { Point::new(x, y, z) })
                .collect();
            let q = if dim == 2 { Point::xy(q.0, q.1) } else { Point::new(q.0, q.1, q.2) };
            let idx = PointIndex::new(pts.clone(), dim);
            let (i, d) = idx.nearest(&q).unwrap();
            let (bi, bd) = brute_nearest(&pts, &q);
            prop_assert_eq!(d, bd);
            prop_assert_eq!(i, bi);
            let r = bd * 1.5 + 1.0;
            let brute: Vec<usize> = (0..pts.len()).filter(|&j| pts[j].dist(&q) <= r).collect();
            prop_assert_eq!(idx.within(&q, r), brute);
        }
    }
}
