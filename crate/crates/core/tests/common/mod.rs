//! Scenes shared by the integration tests.
#![allow(dead_code)]

use poreaxis::geom::Point;
use poreaxis::scene::{FaceKind, Scene, SolidPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DISK_CENTERS: [(f64, f64); 4] = [(25.0, 25.0), (75.0, 25.0), (25.0, 75.0), (75.0, 75.0)];

pub fn four_disks() -> Scene {
    let disks = DISK_CENTERS.iter().map(|&(x, y)| SolidPrimitive::Ball { center: Point::xy(x, y), radius: 20.0 }).collect();
    Scene::new(2, Point::ZERO, Point::xy(100.0, 100.0), vec![FaceKind::Closed; 4], disks, vec![]).unwrap()
}

pub fn packing_centers() -> Vec<Point> {
    let c = [12.5, 37.5, 62.5, 87.5];
    let mut out = Vec::new();
    for x in c {
        for y in c {
            for z in c {
                out.push(Point::new(x, y, z));
            }
        }
    }
    out
}

pub fn packing() -> Scene {
    let balls = packing_centers().into_iter().map(|center| SolidPrimitive::Ball { center, radius: 12.5 }).collect();
    Scene::new(3, Point::ZERO, Point::new(100.0, 100.0, 100.0), vec![FaceKind::Closed; 6], balls, vec![]).unwrap()
}

pub fn tube(open_ends: bool) -> Scene {
    let end = if open_ends { FaceKind::Open } else { FaceKind::Closed };
    Scene::new(2, Point::ZERO, Point::xy(100.0, 20.0), vec![end, end, FaceKind::Closed, FaceKind::Closed], vec![], vec![]).unwrap()
}

/// L-shaped corridor of width 20 along the left and bottom walls of a 100 x 100 box.
pub fn elbow() -> Scene {
    let block = SolidPrimitive::Box { lo: Point::xy(20.0, 20.0), hi: Point::xy(100.0, 100.0) };
    Scene::new(2, Point::ZERO, Point::xy(100.0, 100.0), vec![FaceKind::Closed; 4], vec![block], vec![]).unwrap()
}

pub fn square() -> Scene {
    Scene::new(2, Point::ZERO, Point::xy(100.0, 100.0), vec![FaceKind::Closed; 4], vec![], vec![]).unwrap()
}

/// Eight disks in a closed 100 x 100 box, pairwise and wall gaps of at least 2.
pub fn random_disks(seed: u64) -> (Scene, Vec<(Point, f64)>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut disks: Vec<(Point, f64)> = Vec::new();
    while disks.len() < 8 {
        let r = rng.random_range(6.0..12.0);
        let c = Point::xy(rng.random_range(r + 2.0..98.0 - r), rng.random_range(r + 2.0..98.0 - r));
        if disks.iter().all(|(d, s)| d.dist(&c) >= r + s + 2.0) {
            disks.push((c, r));
        }
    }
    let prims = disks.iter().map(|&(center, radius)| SolidPrimitive::Ball { center, radius }).collect();
    let scene = Scene::new(2, Point::ZERO, Point::xy(100.0, 100.0), vec![FaceKind::Closed; 4], prims, vec![]).unwrap();
    (scene, disks)
}

/// Distance to the nearest ball or wall, written out directly.
pub fn brute_dist(p: &Point, balls: &[(Point, f64)], lo: &Point, hi: &Point, dim: usize) -> f64 {
    let mut d = f64::INFINITY;
    for (c, r) in balls {
        d = d.min(p.dist(c) - r);
    }
    for k in 0..dim {
        d = d.min(p[k] - lo[k]).min(hi[k] - p[k]);
    }
    d
}
