use serde::{Deserialize, Serialize};

use super::{Aabb, Vec3};
use crate::network::Fracture;
use crate::scalar::Real;

/// Default number of vertices used to polygonize a disc.
pub const DEFAULT_POLYGON_VERTICES: usize = 32;

/// Planar polygon embedded in 3D. An empty vertex list is the empty polygon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PlanarPolygon<T> {
    pub vertices: Vec<Vec3<T>>,
    pub plane_normal: Vec3<T>,
}

impl<T: Real> PlanarPolygon<T> {
    pub fn new(vertices: Vec<Vec3<T>>, plane_normal: Vec3<T>) -> Self {
        let mut p = Self {
            vertices,
            plane_normal,
        };
        if p.vertices.len() < 3 {
            p.vertices.clear();
        }
        p
    }

    pub fn empty(plane_normal: Vec3<T>) -> Self {
        Self {
            vertices: Vec::new(),
            plane_normal,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.len() < 3
    }

    /// Single-sided area, fan-triangulated about the first vertex.
    pub fn area(&self) -> T {
        polygon_area(self)
    }

    pub fn bounding_box(&self) -> Option<Aabb<T>> {
        let first = *self.vertices.first()?;
        let (lo, hi) = self
            .vertices
            .iter()
            .fold((first, first), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        Some(Aabb { min: lo, max: hi })
    }
}

/// Regular `m`-gon inscribed in the fracture disc, wound counter-clockwise
/// about the fracture normal.
pub fn disc_to_polygon<T: Real>(f: &Fracture<T>, m_vertices: usize) -> PlanarPolygon<T> {
    assert!(m_vertices >= 3, "polygon needs at least 3 vertices");
    let (u, v) = f.normal.orthonormal_basis();
    let step = T::TAU() / T::from_usize_lossy(m_vertices);
    let vertices = (0..m_vertices)
        .map(|k| {
            let theta = step * T::from_usize_lossy(k);
            f.center + (u * theta.cos() + v * theta.sin()) * f.radius
        })
        .collect();
    PlanarPolygon::new(vertices, f.normal)
}

pub fn polygon_area<T: Real>(poly: &PlanarPolygon<T>) -> T {
    if poly.is_empty() {
        return T::zero();
    }
    let o = poly.vertices[0];
    let mut acc = Vec3::zero();
    for w in poly.vertices[1..].windows(2) {
        acc += (w[0] - o).cross(w[1] - o);
    }
    acc.norm() * T::lit(0.5)
}

/// Relative plane tolerance used when a polygon lies in a box face plane.
fn coplanar_tolerance<T: Real>(b: &Aabb<T>) -> T {
    b.diagonal() * T::epsilon() * T::lit(64.0)
}

/// Area below which a clip result counts as a point or edge contact.
pub fn area_tolerance<T: Real>(b: &Aabb<T>) -> T {
    let d = b.diagonal();
    d * d * T::epsilon() * T::lit(1.0e4)
}

/// Sutherland–Hodgman clip of `poly` against the six half-spaces of `bbox`.
///
/// A polygon lying exactly in a face plane of the box belongs to the box only
/// for the lower face of that axis, so that a fracture on a shared cell face
/// is assigned to exactly one of the two cells. Results with fewer than three
/// vertices or zero area are returned empty.
pub fn clip_polygon_to_box<T: Real>(poly: &PlanarPolygon<T>, bbox: &Aabb<T>) -> PlanarPolygon<T> {
    let normal = poly.plane_normal;
    if poly.is_empty() {
        return PlanarPolygon::empty(normal);
    }
    if let Some(pb) = poly.bounding_box() {
        if !pb.overlaps(bbox) {
            return PlanarPolygon::empty(normal);
        }
    }

    let tol = coplanar_tolerance(bbox);
    let axis = normal.dominant_axis();
    let mut skip_axis = None;
    if (T::one() - normal[axis].abs()) < T::lit(1e-12) {
        let c = poly.vertices[0][axis];
        if c < bbox.min[axis] - tol || c >= bbox.max[axis] - tol {
            return PlanarPolygon::empty(normal);
        }
        skip_axis = Some(axis);
    }

    let mut current = poly.vertices.clone();
    let mut next = Vec::with_capacity(current.len() + 6);
    for a in 0..3 {
        if skip_axis == Some(a) {
            continue;
        }
        for upper in [false, true] {
            let bound = if upper { bbox.max[a] } else { bbox.min[a] };
            let inside = |p: &Vec3<T>| {
                if upper {
                    p[a] <= bound
                } else {
                    p[a] >= bound
                }
            };
            clip_against_plane(&current, a, bound, inside, &mut next);
            std::mem::swap(&mut current, &mut next);
            if current.len() < 3 {
                return PlanarPolygon::empty(normal);
            }
        }
    }

    let out = PlanarPolygon::new(current, normal);
    if out.area() <= area_tolerance(bbox) {
        return PlanarPolygon::empty(normal);
    }
    out
}

fn clip_against_plane<T: Real>(
    input: &[Vec3<T>],
    axis: usize,
    bound: T,
    inside: impl Fn(&Vec3<T>) -> bool,
    out: &mut Vec<Vec3<T>>,
) {
    out.clear();
    let Some(&last) = input.last() else {
        return;
    };
    let mut prev = last;
    let mut prev_in = inside(&prev);
    for &cur in input {
        let cur_in = inside(&cur);
        if cur_in != prev_in {
            let t = (bound - prev[axis]) / (cur[axis] - prev[axis]);
            let mut p = prev + (cur - prev) * t;
            p[axis] = bound;
            out.push(p);
        }
        if cur_in {
            out.push(cur);
        }
        prev = cur;
        prev_in = cur_in;
    }
    out.dedup_by(|a, b| a == b);
    if out.len() > 1 && out.first() == out.last() {
        out.pop();
    }
}

/// Plane/box separation: true when every box corner lies strictly on one side
/// of the polygon's plane.
fn plane_misses_box<T: Real>(poly: &PlanarPolygon<T>, bbox: &Aabb<T>) -> bool {
    let n = poly.plane_normal;
    let d0 = n.dot(poly.vertices[0]);
    let tol = coplanar_tolerance(bbox);
    let mut above = false;
    let mut below = false;
    for c in bbox.corners() {
        let s = n.dot(c) - d0;
        if s > tol {
            above = true;
        } else if s < -tol {
            below = true;
        } else {
            return false;
        }
    }
    !(above && below)
}

/// Positive-area contact test, consistent with [`clip_polygon_to_box`].
pub fn polygon_intersects_box<T: Real>(poly: &PlanarPolygon<T>, bbox: &Aabb<T>) -> bool {
    if poly.is_empty() {
        return false;
    }
    match poly.bounding_box() {
        Some(pb) if pb.overlaps(bbox) => {}
        _ => return false,
    }
    if plane_misses_box(poly, bbox) {
        return false;
    }
    !clip_polygon_to_box(poly, bbox).is_empty()
}
