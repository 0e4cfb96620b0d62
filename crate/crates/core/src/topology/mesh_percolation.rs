use super::UnionFind;
use crate::mesh::{BoundarySide, FaceAdjacency, OctreeMesh};
use crate::scalar::Real;

/// Whether face-connected fracture cells join the inflow (`x = min`) and
/// outflow (`x = max`) sides of the mesh.
pub fn mesh_percolates<T: Real>(mesh: &OctreeMesh<T>, faces: &FaceAdjacency<T>, is_fracture: &[bool]) -> bool {
    assert_eq!(is_fracture.len(), mesh.len());
    let n = mesh.len();
    let (inlet, outlet) = (n, n + 1);
    let mut uf = UnionFind::new(n + 2);
    for f in &faces.faces {
        if !is_fracture[f.cell_a] {
            continue;
        }
        match (f.cell_b(), f.boundary()) {
            (Some(b), _) if is_fracture[b] => {
                uf.union(f.cell_a, b);
            }
            (None, Some(BoundarySide::XMin)) => {
                uf.union(f.cell_a, inlet);
            }
            (None, Some(BoundarySide::XMax)) => {
                uf.union(f.cell_a, outlet);
            }
            _ => {}
        }
    }
    uf.connected(inlet, outlet)
}
