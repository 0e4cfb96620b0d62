//! Discrete fracture networks upscaled onto octree equivalent-continuum meshes.
//!
//! The numerical kernels are generic over [`scalar::Real`] (`f32` or `f64`);
//! the aliases below fix the scalar for the common double-precision case.

// `!(x > 0)` is how NaN gets rejected; index loops mirror the math.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod flow;
pub mod geometry;
pub mod mesh;
pub mod network;
pub mod pipeline;
pub mod rng;
pub mod scalar;
pub mod scenarios;
pub mod sparse;
pub mod topology;
pub mod transport;
pub mod upscale;

pub use scalar::Real;

pub type Vec3 = geometry::Vec3<f64>;
pub type Aabb = geometry::Aabb<f64>;
pub type Fracture = network::Fracture<f64>;
pub type FractureNetwork = network::FractureNetwork<f64>;
pub type GenerationParams = network::GenerationParams<f64>;
pub type MeshParams = mesh::MeshParams<f64>;
pub type OctreeMesh = mesh::OctreeMesh<f64>;
pub type FaceAdjacency = mesh::FaceAdjacency<f64>;
pub type CellProperties = upscale::CellProperties<f64>;
pub type PermTensor = upscale::PermTensor<f64>;
pub type PropertyField = upscale::PropertyField<f64>;
pub type FlowField = flow::FlowField<f64>;

/// Single-precision aliases.
pub mod f32 {
    pub type Vec3 = crate::geometry::Vec3<f32>;
    pub type Aabb = crate::geometry::Aabb<f32>;
    pub type Fracture = crate::network::Fracture<f32>;
    pub type FractureNetwork = crate::network::FractureNetwork<f32>;
    pub type GenerationParams = crate::network::GenerationParams<f32>;
    pub type MeshParams = crate::mesh::MeshParams<f32>;
    pub type OctreeMesh = crate::mesh::OctreeMesh<f32>;
    pub type CellProperties = crate::upscale::CellProperties<f32>;
    pub type PermTensor = crate::upscale::PermTensor<f32>;
}
