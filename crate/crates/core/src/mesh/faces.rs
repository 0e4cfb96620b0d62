use serde::{Deserialize, Serialize};

use super::octree::{BoundarySide, NeighborQuery, OctreeMesh};
use super::MeshError;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FaceNeighbor {
    Cell(usize),
    Boundary(BoundarySide),
}

/// Contact between two leaves (or a leaf and the domain boundary).
///
/// The face normal points from `cell_a` toward the neighbour along `axis`,
/// in the positive direction when `upper` is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Face<T> {
    pub cell_a: usize,
    pub neighbor: FaceNeighbor,
    pub area: T,
    /// Perpendicular distance from the centre of `cell_a` to the face plane.
    pub d_a: T,
    /// Same for the neighbour; zero on the boundary.
    pub d_b: T,
    pub axis: u8,
    pub upper: bool,
}

impl<T: Real> Face<T> {
    pub fn cell_b(&self) -> Option<usize> {
        match self.neighbor {
            FaceNeighbor::Cell(b) => Some(b),
            FaceNeighbor::Boundary(_) => None,
        }
    }

    pub fn boundary(&self) -> Option<BoundarySide> {
        match self.neighbor {
            FaceNeighbor::Boundary(s) => Some(s),
            FaceNeighbor::Cell(_) => None,
        }
    }
}

/// Face list of a mesh. Every interior contact appears exactly once, emitted
/// by the finer side (or the lower-index side for equal levels).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FaceAdjacency<T> {
    pub faces: Vec<Face<T>>,
}

impl<T: Real> FaceAdjacency<T> {
    pub fn interior(&self) -> impl Iterator<Item = &Face<T>> {
        self.faces.iter().filter(|f| f.cell_b().is_some())
    }

    pub fn on_boundary(&self, side: BoundarySide) -> impl Iterator<Item = &Face<T>> {
        self.faces.iter().filter(move |f| f.boundary() == Some(side))
    }
}

/// Builds the face list. With `require_balanced`, a level jump above one across
/// any face is an error.
pub fn build_face_adjacency<T: Real>(
    mesh: &OctreeMesh<T>,
    require_balanced: bool,
) -> Result<FaceAdjacency<T>, MeshError> {
    let half = T::lit(0.5);
    let mut faces = Vec::with_capacity(mesh.len() * 3 + mesh.len() / 2);
    for (a, cell) in mesh.cells.iter().enumerate() {
        let h = cell.edge();
        let area = h * h;
        for axis in 0..3 {
            for upper in [false, true] {
                match mesh.neighbor(cell.key, axis, upper) {
                    NeighborQuery::Boundary(side) => faces.push(Face {
                        cell_a: a,
                        neighbor: FaceNeighbor::Boundary(side),
                        area,
                        d_a: h * half,
                        d_b: T::zero(),
                        axis: axis as u8,
                        upper,
                    }),
                    NeighborQuery::Leaf(b) => {
                        let other = &mesh.cells[b];
                        let same = other.key.level == cell.key.level;
                        if same && !upper {
                            continue;
                        }
                        if require_balanced && cell.key.level - other.key.level > 1 {
                            return Err(MeshError::Unbalanced {
                                fine: cell.key.level,
                                coarse: other.key.level,
                            });
                        }
                        faces.push(Face {
                            cell_a: a,
                            neighbor: FaceNeighbor::Cell(b),
                            area,
                            d_a: h * half,
                            d_b: other.edge() * half,
                            axis: axis as u8,
                            upper,
                        });
                    }
                    NeighborQuery::Finer => {}
                }
            }
        }
    }
    Ok(FaceAdjacency { faces })
}
