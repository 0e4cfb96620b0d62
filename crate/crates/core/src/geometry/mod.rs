//! Geometric kernels: vectors, boxes, disc polygonization, box clipping and
//! exact disc–disc intersection.

mod aabb;
mod disc;
mod polygon;
mod vec3;

pub use aabb::Aabb;
pub use disc::{chord_overlap, discs_intersect, DEFAULT_INTERSECTION_EPS};
pub use polygon::{
    area_tolerance, clip_polygon_to_box, disc_to_polygon, polygon_area, polygon_intersects_box,
    PlanarPolygon, DEFAULT_POLYGON_VERTICES,
};
pub use vec3::Vec3;
