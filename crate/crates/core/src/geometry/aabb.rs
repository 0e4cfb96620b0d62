use serde::{Deserialize, Serialize};

use super::Vec3;
use crate::scalar::Real;

/// Axis-aligned box, `min < max` componentwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Aabb<T> {
    pub min: Vec3<T>,
    pub max: Vec3<T>,
}

impl<T: Real> Aabb<T> {
    pub fn new(min: Vec3<T>, max: Vec3<T>) -> Self {
        debug_assert!(
            min.x < max.x && min.y < max.y && min.z < max.z,
            "degenerate box"
        );
        Self { min, max }
    }

    /// The cube `[-edge/2, edge/2]^3`.
    pub fn centered_cube(edge: T) -> Self {
        let h = edge * T::lit(0.5);
        Self::new(Vec3::new(-h, -h, -h), Vec3::new(h, h, h))
    }

    pub fn extent(&self) -> Vec3<T> {
        self.max - self.min
    }

    pub fn center(&self) -> Vec3<T> {
        (self.min + self.max) * T::lit(0.5)
    }

    pub fn volume(&self) -> T {
        let e = self.extent();
        e.x * e.y * e.z
    }

    pub fn diagonal(&self) -> T {
        self.extent().norm()
    }

    /// Grows the box by `d` on every side.
    pub fn expanded(&self, d: T) -> Self {
        let v = Vec3::new(d, d, d);
        Self::new(self.min - v, self.max + v)
    }

    /// Closed-box overlap test.
    pub fn overlaps(&self, o: &Self) -> bool {
        (0..3).all(|a| self.min[a] <= o.max[a] && o.min[a] <= self.max[a])
    }

    pub fn contains_point(&self, p: Vec3<T>) -> bool {
        (0..3).all(|a| p[a] >= self.min[a] && p[a] <= self.max[a])
    }

    pub fn corners(&self) -> [Vec3<T>; 8] {
        let (a, b) = (self.min, self.max);
        [
            Vec3::new(a.x, a.y, a.z),
            Vec3::new(b.x, a.y, a.z),
            Vec3::new(b.x, b.y, a.z),
            Vec3::new(a.x, b.y, a.z),
            Vec3::new(a.x, a.y, b.z),
            Vec3::new(b.x, a.y, b.z),
            Vec3::new(b.x, b.y, b.z),
            Vec3::new(a.x, b.y, b.z),
        ]
    }

    /// Splits into the eight octants; child `c` takes the upper half along
    /// axis `a` when bit `a` of `c` is set.
    pub fn octants(&self) -> [Self; 8] {
        let m = self.center();
        std::array::from_fn(|c| {
            let mut lo = self.min;
            let mut hi = m;
            for a in 0..3 {
                if c >> a & 1 == 1 {
                    lo[a] = m[a];
                    hi[a] = self.max[a];
                }
            }
            Self::new(lo, hi)
        })
    }
}
