//! Graded octree control-volume mesh refined around fractures.

mod export;
mod faces;
mod octree;

use thiserror::Error;

pub use export::{write_cells_csv, write_faces_csv, write_vtk, CellData};
pub use faces::{build_face_adjacency, Face, FaceAdjacency, FaceNeighbor};
pub use octree::{
    balance_2to1, build_initial_grid, build_mesh, equivalent_hex_count, network_polygons, refine,
    tag_fracture_cells, BoundarySide, Cell, CellKey, MeshParams, NeighborQuery, OctreeMesh,
    MAX_LEVEL,
};

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("domain extent {extent} is not an integer multiple of cell size {cell_size}")]
    NonIntegerGrid { extent: f64, cell_size: f64 },
    #[error("mesh is not 2:1 balanced: level {fine} cell faces level {coarse} cell")]
    Unbalanced { fine: u8, coarse: u8 },
    #[error("invalid mesh parameters: {0}")]
    InvalidParams(String),
}
