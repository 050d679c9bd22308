//! Acceptance checks. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use poreaxis::geom::Point;
use poreaxis::io;
use poreaxis::network::{channel_length, Pore, PoreKind, PoreNetwork, ThroatKind};
use poreaxis::oracle;
use poreaxis::scene::Scene;
use poreaxis::tracer::{extract_network, extract_network_with_threads, TraceConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

type Outcome = Result<String, String>;

macro_rules! check {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed())
}

fn extract(scene: &Scene) -> Result<PoreNetwork, String> {
    extract_network(scene, &TraceConfig::default()).map_err(|e| e.to_string())
}

fn in_box(p: &Point, lo: f64, hi: f64, dim: usize) -> bool {
    (0..dim).all(|k| p[k] >= lo && p[k] <= hi)
}

fn regular_packing() -> Outcome {
    let scene = packing();
    let (net, took) = timed(|| extract(&scene));
    let net = net?;
    check!(took < Duration::from_secs(60), "took {took:?}");
    let sub: Vec<_> = net.pores.iter().filter(|p| in_box(&p.center, 20.0, 80.0, 3)).collect();
    check!(sub.len() == 27, "{} pores in the interior sub-network", sub.len());
    let pore_r = 12.5 * (3f64.sqrt() - 1.0);
    let lattice = [25.0, 50.0, 75.0];
    for x in lattice {
        for y in lattice {
            for z in lattice {
                let q = Point::new(x, y, z);
                let Some(p) = sub.iter().find(|p| p.center.dist(&q) <= 0.5) else {
                    return Err(format!("no pore near {q:?}"));
                };
                check!((p.radius - pore_r).abs() <= 0.1, "pore at {q:?} has radius {}", p.radius);
            }
        }
    }
    let ids: Vec<usize> = sub.iter().map(|p| p.id).collect();
    let inner: Vec<_> = net.throats.iter().filter(|t| ids.contains(&t.pores.0) && ids.contains(&t.pores.1)).collect();
    check!(inner.len() == 54, "{} throats inside the sub-network", inner.len());
    // coordination counts every interior throat at the pore, including those
    // leading out of the sub-network
    let adj = net.adjacency();
    for id in &ids {
        let z = adj[*id].iter().filter(|&&t| net.throats[t].kind == ThroatKind::Interior).count();
        check!(z == 6, "pore {id} has coordination {z}");
    }
    let throat_r = 12.5 * (2f64.sqrt() - 1.0);
    for t in &inner {
        let a = net.pores[t.pores.0].center;
        let b = net.pores[t.pores.1].center;
        let mid = a.lerp(&b, 0.5);
        check!(t.center.dist(&mid) <= 0.5, "throat {} at {:?}, midpoint {mid:?}", t.id, t.center);
        check!((t.radius - throat_r).abs() <= 0.1, "throat {} radius {}", t.id, t.radius);
    }
    Ok(format!("27 pores, 54 throats, coordination 6, {took:.2?}"))
}

fn four_disk() -> Outcome {
    let scene = four_disks();
    let (net, took) = timed(|| extract(&scene));
    let net = net?;
    check!(took < Duration::from_secs(5), "took {took:?}");
    let want = 25.0 * 2f64.sqrt() - 20.0;
    let Some(c) = net.pores.iter().find(|p| p.center.dist(&Point::xy(50.0, 50.0)) <= 0.2) else {
        return Err("no pore near (50,50)".into());
    };
    check!((c.radius - want).abs() <= 0.05, "center radius {}", c.radius);
    for (x, y) in [(50.0, 25.0), (50.0, 75.0), (25.0, 50.0), (75.0, 50.0)] {
        let q = Point::xy(x, y);
        let Some(t) = net.throats.iter().find(|t| t.center.dist(&q) <= 0.5) else {
            return Err(format!("no throat near {q:?}"));
        };
        check!((t.radius - 5.0).abs() <= 0.05, "throat near {q:?} radius {}", t.radius);
    }
    Ok(format!("center radius {:.4}, 4 throats of radius 5, {took:.2?}", c.radius))
}

fn dead_ends() -> Outcome {
    let net = extract(&tube(false))?;
    let mut covered = Vec::new();
    for path in &net.paths {
        for p in &path.points {
            if (15.0..=85.0).contains(&p.x()) {
                check!((p.y() - 10.0).abs() <= 0.5, "path vertex {p:?} off the mid-line");
                covered.push(p.x());
            }
        }
    }
    covered.sort_by(f64::total_cmp);
    check!(!covered.is_empty(), "no path vertices in x in [15,85]");
    let gap = covered.windows(2).map(|w| w[1] - w[0]).fold(covered[0] - 15.0, f64::max).max(85.0 - covered[covered.len() - 1]);
    check!(gap <= 10.0, "mid-line coverage has a gap of {gap}");
    let dead: Vec<_> = net.pores.iter().filter(|p| p.kind == PoreKind::DeadEnd).collect();
    check!(dead.len() == 2, "{} dead-end pores in the tube", dead.len());
    for q in [Point::xy(10.0, 10.0), Point::xy(90.0, 10.0)] {
        check!(dead.iter().any(|p| p.center.dist(&q) <= 1.0), "no dead end near {q:?}");
    }
    let net = extract(&elbow())?;
    let dead: Vec<_> = net.pores.iter().filter(|p| p.kind == PoreKind::DeadEnd).collect();
    for q in [Point::xy(10.0, 90.0), Point::xy(90.0, 10.0), Point::xy(0.0, 0.0)] {
        check!(dead.iter().any(|p| p.center.dist(&q) <= 1.0), "elbow: no dead end near {q:?}");
    }
    check!(dead.len() == 3, "elbow: {} dead-end pores", dead.len());
    Ok("tube dead ends at both closed ends, elbow dead ends at both arms and the outer corner".into())
}

fn open_boundary() -> Outcome {
    let net = extract(&tube(true))?;
    let boundary: Vec<_> = net.pores.iter().filter(|p| p.kind == PoreKind::Boundary).collect();
    for x in [0.0, 100.0] {
        check!(boundary.iter().any(|p| p.center.x() == x), "no boundary pore on x = {x}");
    }
    let dead = net.pores.iter().filter(|p| p.kind == PoreKind::DeadEnd).count();
    check!(dead == 0, "{dead} dead-end pores");
    Ok(format!("{} boundary pores, no dead ends", boundary.len()))
}

fn oracle_consistency() -> Outcome {
    let eps = 0.25;
    let t0 = Instant::now();
    let mut worst = (0.0f64, 0.0f64);
    for seed in 0..5u64 {
        let (scene, _) = random_disks(seed);
        let net = extract(&scene)?;
        let grid = oracle::grid_distance_transform(oracle::rasterize(&scene, eps).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let ridge = oracle::grid_ridge(&grid, 20.0).map_err(|e| e.to_string())?;
        let r = oracle::compare(&net, &ridge, eps).map_err(|e| e.to_string())?;
        check!(r.max_vertex_distance <= 2.0 * eps, "scene {seed}: vertex {} from the ridge", r.max_vertex_distance);
        check!(r.max_throat_radius_error <= 2.0 * eps, "scene {seed}: throat radius off by {}", r.max_throat_radius_error);
        worst = (worst.0.max(r.max_vertex_distance), worst.1.max(r.max_throat_radius_error));
    }
    let took = t0.elapsed();
    check!(took < Duration::from_secs(120), "took {took:?}");
    Ok(format!("max vertex distance {:.4}, max throat radius error {:.2e}, {took:.2?}", worst.0, worst.1))
}

fn complexity() -> Outcome {
    let scene = four_disks();
    let mut traced = Vec::new();
    let mut grids = Vec::new();
    for eps in [1.0, 0.5, 0.25, 0.125] {
        traced.push(extract(&scene)?.provenance.counters);
        let grid = oracle::rasterize(&scene, eps).map_err(|e| e.to_string())?;
        let grid = oracle::grid_distance_transform(grid).map_err(|e| e.to_string())?;
        grids.push(grid.cost(scene.length_scale()));
    }
    let report = oracle::complexity_report(2, &traced, &grids);
    check!((report.grid_exponent - 2.0).abs() <= 0.1, "grid exponent {}", report.grid_exponent);
    let first = report.rows[0].traced_evaluations;
    check!(report.rows.iter().all(|r| r.traced_evaluations == first), "traced evaluations vary with eps");
    check!(report.traced_exponent == 0.0, "traced exponent {}", report.traced_exponent);
    let ratio = oracle::per_center_ratio(10.0, 3);
    check!((ratio - 1000.0).abs() < 1e-9, "per-center ratio {ratio}");
    Ok(format!("grid exponent {:.4}, {first} traced evaluations at every eps, ratio {ratio}", report.grid_exponent))
}

fn identities_of(net: &PoreNetwork, dir: &Path) -> Result<usize, String> {
    io::export_network(net, dir).map_err(|e| e.to_string())?;
    let pores = io::read_pores_csv(&dir.join("pores.csv"), net.dim).map_err(|e| e.to_string())?;
    let throats = io::read_throats_csv(&dir.join("throats.csv"), net.dim).map_err(|e| e.to_string())?;
    for t in &throats {
        check!((t.l1 + t.l2).to_bits() == t.length_total.to_bits(), "throat {}: L_t != L1 + L2", t.id);
        let (r1, r2) = (pores[t.pores.0].radius, pores[t.pores.1].radius);
        let lt = ((t.l1 - r1) + t.l2) - r2;
        check!(lt.to_bits() == t.length_throat.to_bits(), "throat {}: L_throat mismatch", t.id);
        check!(channel_length(t.l1, r1, t.l2, r2).to_bits() == lt.to_bits(), "throat {}: formula disagrees", t.id);
    }
    let tol = 1e-6 * 100.0;
    for (i, p) in net.paths.iter().enumerate() {
        check!((p.step_sum() - p.arc_length()).abs() <= tol, "path {i}: step sum {} vs arc {}", p.step_sum(), p.arc_length());
    }
    Ok(throats.len())
}

fn identities() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut n = 0;
    let scenes = [("packing", packing()), ("disks", four_disks()), ("tube", tube(false)), ("open", tube(true)), ("elbow", elbow())];
    for (name, scene) in scenes {
        n += identities_of(&extract(&scene)?, &dir.path().join(name))?;
    }
    for seed in 0..2 {
        n += identities_of(&extract(&random_disks(seed).0)?, &dir.path().join(format!("random{seed}")))?;
    }
    Ok(format!("{n} exported throats satisfy both length identities exactly"))
}

fn field_properties(scene: &Scene, balls: &[(Point, f64)], rng: &mut ChaCha8Rng) -> Result<(), String> {
    let (lo, hi) = (scene.lo(), scene.hi());
    let dim = scene.dim();
    let sample = |rng: &mut ChaCha8Rng| {
        let mut p = Point::ZERO;
        for k in 0..dim {
            p[k] = rng.random_range(lo[k]..hi[k]);
        }
        p
    };
    let h = 1e-6;
    let mut smooth = 0;
    let mut voids = 0;
    for _ in 0..10_000 {
        let p = sample(rng);
        let q = sample(rng);
        let a = scene.dist(&p).map_err(|e| e.to_string())?;
        let b = scene.dist(&q).map_err(|e| e.to_string())?;
        check!((a.value - b.value).abs() <= p.dist(&q) + 1e-9, "Lipschitz bound broken at {p:?}, {q:?}");
        let want = brute_dist(&p, balls, &lo, &hi, dim);
        check!((a.value - want).abs() <= 1e-9, "distance {} vs {want} at {p:?}", a.value);
        if a.value > 10.0 * h {
            voids += 1;
            check!((a.gradient.norm() - 1.0).abs() <= 1e-9, "gradient norm {} at {p:?}", a.gradient.norm());
            let mut g = 0.0;
            for k in 0..dim {
                let (mut u, mut v) = (p, p);
                u[k] += h;
                v[k] -= h;
                let d = (brute_dist(&u, balls, &lo, &hi, dim) - brute_dist(&v, balls, &lo, &hi, dim)) / (2.0 * h);
                g += d * d;
            }
            if (g.sqrt() - 1.0).abs() <= 1e-4 {
                smooth += 1;
            }
        }
    }
    check!(smooth as f64 >= 0.99 * voids as f64, "eikonal holds at only {smooth} of {voids} void probes");
    Ok(())
}

// A pore on a flat crest (the axis of a straight channel) can sit anywhere
// along it, so only isolated maxima have a well-defined mirror image.
// Boundary pores are maximised within their face and always qualify.
fn isolated(scene: &Scene, p: &Pore) -> bool {
    if p.kind == PoreKind::Boundary {
        return true;
    }
    (0..16).all(|k| {
        let t = std::f64::consts::TAU * k as f64 / 16.0;
        let q = p.center + Point::xy(t.cos(), t.sin()) * 0.5;
        !scene.contains(&q) || scene.dist(&q).is_ok_and(|d| d.value < p.radius - 1e-6)
    })
}

fn pores_match(scene: &Scene, a: &PoreNetwork, b: &PoreNetwork, map: impl Fn(&Point) -> Point, tol: f64) -> Result<(), String> {
    for p in a.pores.iter().filter(|p| p.kind != PoreKind::DeadEnd && isolated(scene, p)) {
        let q = map(&p.center);
        let found = b.pores.iter().any(|r| r.kind == p.kind && r.center.dist(&q) <= tol);
        check!(found, "no mirrored partner for {:?} pore at {:?}", p.kind, p.center);
    }
    Ok(())
}

fn properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let disks: Vec<(Point, f64)> = DISK_CENTERS.iter().map(|&(x, y)| (Point::xy(x, y), 20.0)).collect();
    field_properties(&four_disks(), &disks, &mut rng)?;
    let balls: Vec<(Point, f64)> = packing_centers().into_iter().map(|c| (c, 12.5)).collect();
    field_properties(&packing(), &balls, &mut rng)?;
    let (scene, disks) = random_disks(3);
    field_properties(&scene, &disks, &mut rng)?;

    let cfg = TraceConfig::default();
    let tol = 10.0 * 1e-6 * 100.0;
    let mut mirrored = 0;
    for scene in [four_disks(), random_disks(1).0, tube(true), elbow()] {
        let net = extract_network(&scene, &cfg).map_err(|e| e.to_string())?;
        for axis in 0..2 {
            let m = scene.mirrored(axis);
            let mnet = extract_network(&m, &cfg).map_err(|e| e.to_string())?;
            pores_match(&scene, &net, &mnet, |p| scene.mirror_point(p, axis), tol)?;
            pores_match(&m, &mnet, &net, |p| scene.mirror_point(p, axis), tol)?;
            mirrored += 1;
        }
    }

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for (name, scene) in [("disks", four_disks()), ("packing", packing())] {
        let runs = [
            extract_network(&scene, &cfg).map_err(|e| e.to_string())?,
            extract_network(&scene, &cfg).map_err(|e| e.to_string())?,
            extract_network_with_threads(&scene, &cfg, 4).map_err(|e| e.to_string())?,
        ];
        let mut outputs = Vec::new();
        for (i, net) in runs.iter().enumerate() {
            let d = dir.path().join(format!("{name}{i}"));
            io::export_network(net, &d).map_err(|e| e.to_string())?;
            let bytes: Vec<Vec<u8>> = ["pores.csv", "throats.csv", "network.json"]
                .iter()
                .map(|f| std::fs::read(d.join(f)).unwrap_or_default())
                .collect();
            outputs.push(bytes);
        }
        check!(outputs[0] == outputs[1], "{name}: two runs differ");
        check!(outputs[0] == outputs[2], "{name}: threaded run differs");
    }
    Ok(format!("3 x 10^4 field probes, {mirrored} mirrored extractions within {tol:.0e}, byte-identical reruns"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 regular packing", regular_packing),
        ("2 four-disk scene", four_disk),
        ("3 dead-end detection", dead_ends),
        ("4 open boundary", open_boundary),
        ("5 oracle consistency", oracle_consistency),
        ("6 complexity separation", complexity),
        ("7 length identities", identities),
        ("8 property suites", properties),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(msg) => println!("PASS criterion {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {name}: {msg}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
