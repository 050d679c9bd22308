mod common;

use poreaxis::geom::Point;
use poreaxis::network::{stats, PoreKind, ThroatKind};
use poreaxis::tracer::{extract_network, find_first_pore, trace_axis, PathEnd, TraceConfig};

use common::*;

// Fixed-step hill climb on a directly written distance function: each step
// moves `step` along the best of the 26 lattice directions.
fn brute_ascent(start: Point, balls: &[(Point, f64)], lo: Point, hi: Point, step: f64) -> Point {
    let f = |p: &Point| brute_dist(p, balls, &lo, &hi, 3);
    let mut dirs = Vec::new();
    for x in -1..=1 {
        for y in -1..=1 {
            for z in -1..=1 {
                if let Some(u) = Point::new(x as f64, y as f64, z as f64).normalized() {
                    dirs.push(u);
                }
            }
        }
    }
    let mut p = start;
    let mut fp = f(&p);
    for _ in 0..1_000_000 {
        let best = dirs.iter().map(|u| p + *u * step).map(|q| (f(&q), q)).max_by(|a, b| a.0.total_cmp(&b.0)).unwrap();
        if best.0 <= fp {
            break;
        }
        (fp, p) = best;
    }
    p
}

#[test]
fn four_disk_first_pore() {
    let cfg = TraceConfig::default();
    let pore = find_first_pore(&four_disks(), Some(Point::xy(40.0, 40.0)), &cfg).unwrap();
    assert!(pore.center.dist(&Point::xy(50.0, 50.0)) <= 1e-3, "{:?}", pore.center);
    assert!((pore.radius - (25.0 * 2f64.sqrt() - 20.0)).abs() <= 1e-3);
}

#[test]
fn packing_first_pore_matches_brute_ascent() {
    let balls: Vec<(Point, f64)> = packing_centers().into_iter().map(|c| (c, 12.5)).collect();
    let seed = Point::new(22.0, 27.0, 24.0);
    let oracle = brute_ascent(seed, &balls, Point::ZERO, Point::new(100.0, 100.0, 100.0), 1e-4);
    assert!(oracle.dist(&Point::new(25.0, 25.0, 25.0)) <= 1e-2, "{oracle:?}");
    let pore = find_first_pore(&packing(), Some(seed), &TraceConfig::default()).unwrap();
    assert!(pore.center.dist(&oracle) <= 1e-2, "{:?} vs {oracle:?}", pore.center);
    assert!((pore.radius - 12.5 * (3f64.sqrt() - 1.0)).abs() <= 1e-3);
}

#[test]
fn packing_axis_between_neighbouring_pores() {
    let scene = packing();
    let cfg = TraceConfig::default();
    let pore = find_first_pore(&scene, Some(Point::new(25.0, 25.0, 25.0)), &cfg).unwrap();
    let t = trace_axis(&scene, &pore, Point::new(1.0, 0.0, 0.0), &cfg).unwrap();
    assert_eq!(t.end, PathEnd::Pore);
    let end = *t.path.points.last().unwrap();
    assert!(end.dist(&Point::new(50.0, 25.0, 25.0)) <= 1e-2, "{end:?}");
    let throat = t.path.points[t.path.throat_index.unwrap()];
    assert!(throat.dist(&Point::new(37.5, 25.0, 25.0)) <= 0.5, "{throat:?}");
    assert!((t.path.step_sum() - 25.0).abs() <= 0.1, "{}", t.path.step_sum());
}

#[test]
fn closed_tube_axis_ends_in_dead_end() {
    let scene = tube(false);
    let cfg = TraceConfig::default();
    let pore = find_first_pore(&scene, Some(Point::xy(50.0, 8.0)), &cfg).unwrap();
    let t = trace_axis(&scene, &pore, Point::xy(1.0, 0.0), &cfg).unwrap();
    // The axis stops where the two corner branches of the end wall meet; the
    // network assembly then marks that fork as the dead end.
    assert!(matches!(t.end, PathEnd::DeadEnd | PathEnd::Pore), "{:?}", t.end);
    let end = t.path.points.last().unwrap();
    assert!(end.dist(&Point::xy(90.0, 10.0)) <= 1.0, "{end:?}");
}

#[test]
fn open_tube_axis_ends_on_the_face() {
    let scene = tube(true);
    let cfg = TraceConfig::default();
    let pore = find_first_pore(&scene, Some(Point::xy(50.0, 8.0)), &cfg).unwrap();
    let t = trace_axis(&scene, &pore, Point::xy(1.0, 0.0), &cfg).unwrap();
    assert_eq!(t.end, PathEnd::Boundary);
    let end = t.path.points.last().unwrap();
    assert!((end.x() - 100.0).abs() < 1e-9 && (end.y() - 10.0).abs() < 0.5, "{end:?}");
}

#[test]
fn walled_square_has_center_pore_and_four_corner_axes() {
    let net = extract_network(&square(), &TraceConfig::default()).unwrap();
    let interior: Vec<_> = net.pores.iter().filter(|p| p.kind == PoreKind::Interior).collect();
    assert_eq!(interior.len(), 1);
    assert!(interior[0].center.dist(&Point::xy(50.0, 50.0)) < 1e-3);
    let dead: Vec<_> = net.pores.iter().filter(|p| p.kind == PoreKind::DeadEnd).collect();
    assert_eq!(dead.len(), 4);
    for c in [(0.0, 0.0), (100.0, 0.0), (0.0, 100.0), (100.0, 100.0)] {
        assert!(dead.iter().any(|p| p.center.dist(&Point::xy(c.0, c.1)) < 1.0), "{c:?}");
    }
    assert_eq!(net.throats.iter().filter(|t| t.kind == ThroatKind::DeadEnd).count(), 4);
}

#[test]
fn four_disk_network_shape() {
    let net = extract_network(&four_disks(), &TraceConfig::default()).unwrap();
    let center: Vec<_> = net.pores.iter().filter(|p| p.center.dist(&Point::xy(50.0, 50.0)) < 0.2).collect();
    assert_eq!(center.len(), 1);
    for (x, y) in [(50.0, 25.0), (50.0, 75.0), (25.0, 50.0), (75.0, 50.0)] {
        let q = Point::xy(x, y);
        assert_eq!(net.throats.iter().filter(|t| t.center.dist(&q) < 0.5).count(), 1, "{q:?}");
    }
    let s = stats(&net);
    assert!(s.pores_by_kind.get(&PoreKind::DeadEnd).copied().unwrap_or(0) >= 4);
}

#[test]
fn tube_stats_report_two_dead_ends() {
    let net = extract_network(&tube(false), &TraceConfig::default()).unwrap();
    assert_eq!(stats(&net).pores_by_kind.get(&PoreKind::DeadEnd), Some(&2));
}

#[test]
fn dropping_dead_ends_leaves_only_interior() {
    let cfg = TraceConfig { keep_dead_ends: false, ..TraceConfig::default() };
    let net = extract_network(&four_disks(), &cfg).unwrap();
    assert!(net.pores.iter().all(|p| p.kind != PoreKind::DeadEnd));
    assert!(net.throats.iter().all(|t| t.kind != ThroatKind::DeadEnd));
    net.validate().unwrap();
}
