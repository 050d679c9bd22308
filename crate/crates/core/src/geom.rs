//! Small fixed-size vector type shared by every module.
//!
//! Two-dimensional scenes store their points with `z = 0`; the scene's `dim`
//! decides how many components are meaningful.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point(pub [f64; 3]);

pub type Vector = Point;

impl Point {
    pub const ZERO: Point = Point([0.0; 3]);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Point([x, y, z])
    }

    pub const fn xy(x: f64, y: f64) -> Self {
        Point([x, y, 0.0])
    }

    /// Builds a point from a coordinate slice of length 2 or 3.
    pub fn from_slice(coords: &[f64]) -> Option<Self> {
        match *coords {
            [x, y] => Some(Point::xy(x, y)),
            [x, y, z] => Some(Point::new(x, y, z)),
            _ => None,
        }
    }

    pub fn axis(k: usize) -> Self {
        let mut p = Point::ZERO;
        p.0[k] = 1.0;
        p
    }

    pub fn x(&self) -> f64 {
        self.0[0]
    }

    pub fn y(&self) -> f64 {
        self.0[1]
    }

    pub fn z(&self) -> f64 {
        self.0[2]
    }

    pub fn coords(&self, dim: usize) -> &[f64] {
        &self.0[..dim]
    }

    pub fn dot(&self, o: &Point) -> f64 {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    pub fn cross(&self, o: &Point) -> Point {
        let [a, b, c] = self.0;
        let [d, e, f] = o.0;
        Point([b * f - c * e, c * d - a * f, a * e - b * d])
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist(&self, o: &Point) -> f64 {
        (*self - *o).norm()
    }

    /// Unit vector in the same direction, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<Point> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| *self * (1.0 / n))
    }

    /// Angle in radians between two non-zero vectors.
    pub fn angle_to(&self, o: &Point) -> f64 {
        let d = self.norm() * o.norm();
        if d == 0.0 {
            return 0.0;
        }
        (self.dot(o) / d).clamp(-1.0, 1.0).acos()
    }

    pub fn lerp(&self, o: &Point, t: f64) -> Point {
        *self + (*o - *self) * t
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Point {
        Point(self.0.map(f))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }
}

/// Orthonormal pair spanning the plane perpendicular to `axis` (3D).
///
/// The helper axis is the coordinate axis with the smallest component of
/// `axis` (lowest index on ties), so the frame is a deterministic function of
/// the direction.
pub fn perpendicular_frame(axis: &Point) -> (Point, Point) {
    let mut k = 0;
    for i in 1..3 {
        if axis.0[i].abs() < axis.0[k].abs() {
            k = i;
        }
    }
    let helper = Point::axis(k);
    let u = (helper - *axis * helper.dot(axis))
        .normalized()
        .unwrap_or(Point::axis((k + 1) % 3));
    let v = axis.cross(&u);
    (u, v)
}

/// In-plane unit normal of a 2D direction (rotated by +90°).
pub fn perp2(d: &Point) -> Point {
    Point::xy(-d.y(), d.x())
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl AddAssign for Point {
    fn add_assign(&mut self, o: Point) {
        *self = *self + o;
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl Index<usize> for Point {
    type Output = f64;
    fn index(&self, k: usize) -> &f64 {
        &self.0[k]
    }
}

impl IndexMut<usize> for Point {
    fn index_mut(&mut self, k: usize) -> &mut f64 {
        &mut self.0[k]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_is_orthonormal() {
        for axis in [
            Point::new(1.0, 0.0, 0.0),
            Point::new(0.0, 0.0, -1.0),
            Point::new(0.3, -0.4, 0.5).normalized().unwrap(),
        ] {
            let (u, v) = perpendicular_frame(&axis);
            assert!((u.norm() - 1.0).abs() < 1e-12);
            assert!((v.norm() - 1.0).abs() < 1e-12);
            assert!(u.dot(&axis).abs() < 1e-12);
            assert!(v.dot(&axis).abs() < 1e-12);
            assert!(u.dot(&v).abs() < 1e-12);
        }
    }

    #[test]
    fn from_slice_rejects_bad_lengths() {
        assert!(Point::from_slice(&[1.0]).is_none());
        assert!(Point::from_slice(&[1.0, 2.0, 3.0, 4.0]).is_none());
        assert_eq!(Point::from_slice(&[1.0, 2.0]), Some(Point::xy(1.0, 2.0)));
    }
}
