use serde::{Deserialize, Serialize};

use crate::geometry::{disc_to_polygon, PlanarPolygon, Vec3};
use crate::scalar::Real;

/// Planar circular fracture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Fracture<T> {
    pub id: usize,
    pub center: Vec3<T>,
    /// Unit normal.
    pub normal: Vec3<T>,
    pub radius: T,
    /// Hydraulic aperture.
    pub aperture: T,
}

impl<T: Real> Fracture<T> {
    pub fn new(id: usize, center: Vec3<T>, normal: Vec3<T>, radius: T, aperture: T) -> Self {
        Self {
            id,
            center,
            normal,
            radius,
            aperture,
        }
    }

    pub fn polygon(&self, m_vertices: usize) -> PlanarPolygon<T> {
        disc_to_polygon(self, m_vertices)
    }

    /// Bounding box of the exact disc.
    pub fn bounding_box(&self) -> crate::geometry::Aabb<T> {
        // half-extent of a disc along axis a is r * sqrt(1 - n_a^2)
        let n = self.normal;
        let h = Vec3::new(
            self.radius * (T::one() - n.x * n.x).max(T::zero()).sqrt(),
            self.radius * (T::one() - n.y * n.y).max(T::zero()).sqrt(),
            self.radius * (T::one() - n.z * n.z).max(T::zero()).sqrt(),
        );
        crate::geometry::Aabb {
            min: self.center - h,
            max: self.center + h,
        }
    }
}
