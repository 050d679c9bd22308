//! Derivative-free local searches used to sharpen sampled extrema.

use crate::geom::{perp2, perpendicular_frame, Point};

/// Golden-section maximisation of `f` over `[a, b]`.
///
/// Returns the best abscissa seen and its value. `f` may return
/// `f64::NEG_INFINITY` for infeasible points.
pub(crate) fn golden_max(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (b - a).abs() > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 >= f2 { (x1, f1) } else { (x2, f2) }
}

/// Compass (pattern) search maximising `f` from `start`.
///
/// Each round evaluates `x + h d` for every direction `d`, moves to the best
/// strict improvement, and halves `h` when none exists. Stops once
/// `h < h_min` or after `max_rounds` rounds.
pub(crate) fn compass_max(
    f: impl FnMut(&Point) -> f64,
    start: Point,
    f_start: f64,
    dirs: &[Point],
    h0: f64,
    h_min: f64,
    max_rounds: usize,
) -> (Point, f64) {
    pattern_search(f, start, f_start, dirs, None, h0, h_min, max_rounds)
}

/// Compass search that can also climb along sharp crests.
///
/// On a crest every fixed direction may fall off the ridge even though the
/// ridge itself still rises. Before halving `h`, the two best probes are
/// re-maximised across their step direction (within `[-h, h]` along each
/// perpendicular of the `dim`-dimensional frame) and the better one is taken
/// if it improves on `x` by a clear margin.
#[allow(clippy::too_many_arguments)]
pub(crate) fn crest_max(
    f: impl FnMut(&Point) -> f64,
    start: Point,
    f_start: f64,
    dirs: &[Point],
    dim: usize,
    h0: f64,
    h_min: f64,
    max_rounds: usize,
) -> (Point, f64) {
    pattern_search(f, start, f_start, dirs, Some(dim), h0, h_min, max_rounds)
}

/// Crest moves must rise at least this much per unit step, so flat ridges
/// (where any point is as good as another) do not drift.
const CREST_MIN_SLOPE: f64 = 1e-3;

#[allow(clippy::too_many_arguments)]
fn pattern_search(
    mut f: impl FnMut(&Point) -> f64,
    start: Point,
    f_start: f64,
    dirs: &[Point],
    crest: Option<usize>,
    h0: f64,
    h_min: f64,
    max_rounds: usize,
) -> (Point, f64) {
    let mut x = start;
    let mut fx = f_start;
    let mut h = h0;
    let mut rounds = 0;
    while h >= h_min && rounds < max_rounds {
        rounds += 1;
        let mut best: Option<(Point, f64)> = None;
        let mut probes = Vec::with_capacity(dirs.len());
        for d in dirs {
            let y = x + *d * h;
            let fy = f(&y);
            probes.push((fy, *d));
            if fy > fx && best.is_none_or(|(_, fb)| fy > fb) {
                best = Some((y, fy));
            }
        }
        if best.is_none() {
            if let Some(dim) = crest {
                probes.sort_by(|a, b| b.0.total_cmp(&a.0));
                for &(fy, d) in probes.iter().take(2).filter(|p| p.0.is_finite()) {
                    let (y, fy) = across(&mut f, x + d * h, fy, &d, dim, h, h_min);
                    if fy > fx + CREST_MIN_SLOPE * h && best.is_none_or(|(_, fb)| fy > fb) {
                        best = Some((y, fy));
                    }
                }
            }
        }
        match best {
            Some((y, fy)) => {
                x = y;
                fx = fy;
            }
            None => h *= 0.5,
        }
    }
    (x, fx)
}

// Line maxima through `y` along each direction perpendicular to `d`.
fn across(f: &mut impl FnMut(&Point) -> f64, mut y: Point, mut fy: f64, d: &Point, dim: usize, h: f64, tol: f64) -> (Point, f64) {
    let perps = if dim == 2 {
        vec![perp2(d)]
    } else {
        let (u, v) = perpendicular_frame(d);
        vec![u, v]
    };
    for e in perps {
        let base = y;
        let (t, ft) = golden_max(|t| f(&(base + e * t)), -h, h, tol);
        if ft > fy {
            y = base + e * t;
            fy = ft;
        }
    }
    (y, fy)
}

/// `n` unit directions evenly spaced in the plane spanned by `u` and `v`.
pub(crate) fn planar_directions(u: &Point, v: &Point, n: usize) -> Vec<Point> {
    (0..n)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / n as f64;
            *u * t.cos() + *v * t.sin()
        })
        .collect()
}
