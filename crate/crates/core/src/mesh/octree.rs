use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::MeshError;
use crate::geometry::{polygon_intersects_box, Aabb, PlanarPolygon, Vec3, DEFAULT_POLYGON_VERTICES};
use crate::network::FractureNetwork;
use crate::scalar::Real;

/// Deepest level addressable by [`CellKey`] coordinates.
pub const MAX_LEVEL: u8 = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MeshParams<T> {
    /// Edge of the initial (coarsest) cells.
    pub cell_size: T,
    /// Number of octree refinement levels.
    pub refinement_levels: u8,
    #[serde(default = "default_true")]
    pub balance_2to1: bool,
    #[serde(default = "default_vertices")]
    pub polygon_vertices: usize,
}

fn default_true() -> bool {
    true
}

fn default_vertices() -> usize {
    DEFAULT_POLYGON_VERTICES
}

impl<T: Real> MeshParams<T> {
    pub fn new(cell_size: T, refinement_levels: u8) -> Self {
        Self {
            cell_size,
            refinement_levels,
            balance_2to1: true,
            polygon_vertices: DEFAULT_POLYGON_VERTICES,
        }
    }

    /// Finest edge length `l / 2^orl`.
    pub fn finest_edge(&self) -> T {
        self.cell_size / T::lit(2f64.powi(self.refinement_levels as i32))
    }
}

/// Integer address of an octree node: level and cell coordinates at that level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellKey {
    pub level: u8,
    pub i: u32,
    pub j: u32,
    pub k: u32,
}

impl CellKey {
    pub fn new(level: u8, i: u32, j: u32, k: u32) -> Self {
        Self { level, i, j, k }
    }

    pub fn coord(&self, axis: usize) -> u32 {
        match axis {
            0 => self.i,
            1 => self.j,
            _ => self.k,
        }
    }

    fn with_coord(mut self, axis: usize, v: u32) -> Self {
        match axis {
            0 => self.i = v,
            1 => self.j = v,
            _ => self.k = v,
        }
        self
    }

    pub fn parent(&self) -> Option<Self> {
        (self.level > 0).then(|| Self::new(self.level - 1, self.i >> 1, self.j >> 1, self.k >> 1))
    }

    /// Ancestor at `level` (which must not exceed `self.level`).
    pub fn ancestor(&self, level: u8) -> Self {
        let s = self.level - level;
        Self::new(level, self.i >> s, self.j >> s, self.k >> s)
    }

    /// Child `c`, with bit `a` of `c` selecting the upper half along axis `a`.
    pub fn child(&self, c: usize) -> Self {
        Self::new(
            self.level + 1,
            (self.i << 1) | (c as u32 & 1),
            (self.j << 1) | (c as u32 >> 1 & 1),
            (self.k << 1) | (c as u32 >> 2 & 1),
        )
    }

    /// Min-corner coordinates at [`MAX_LEVEL`], a total order over leaves.
    pub fn fine_origin(&self) -> (u64, u64, u64) {
        let s = (MAX_LEVEL - self.level) as u64;
        ((self.k as u64) << s, (self.j as u64) << s, (self.i as u64) << s)
    }
}

/// One of the six faces of the domain box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundarySide {
    XMin,
    XMax,
    YMin,
    YMax,
    ZMin,
    ZMax,
}

impl BoundarySide {
    pub fn from_axis(axis: usize, upper: bool) -> Self {
        match (axis, upper) {
            (0, false) => Self::XMin,
            (0, true) => Self::XMax,
            (1, false) => Self::YMin,
            (1, true) => Self::YMax,
            (2, false) => Self::ZMin,
            _ => Self::ZMax,
        }
    }

    pub fn axis(&self) -> usize {
        match self {
            Self::XMin | Self::XMax => 0,
            Self::YMin | Self::YMax => 1,
            Self::ZMin | Self::ZMax => 2,
        }
    }

    pub fn is_upper(&self) -> bool {
        matches!(self, Self::XMax | Self::YMax | Self::ZMax)
    }
}

/// Leaf hexahedron of the octree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Cell<T> {
    pub key: CellKey,
    pub bbox: Aabb<T>,
    pub is_fracture: bool,
    /// Fractures with positive-area overlap, ascending.
    pub fracture_ids: Vec<usize>,
}

impl<T: Real> Cell<T> {
    pub fn level(&self) -> u8 {
        self.key.level
    }

    pub fn volume(&self) -> T {
        self.bbox.volume()
    }

    pub fn edge(&self) -> T {
        self.bbox.extent().x
    }
}

/// What lies across one face of a leaf.
#[derive(Debug, Clone, PartialEq)]
pub enum NeighborQuery {
    Boundary(BoundarySide),
    /// A leaf at the same or a coarser level.
    Leaf(usize),
    /// The neighbouring region is subdivided further than the query cell.
    Finer,
}

/// Graded hexahedral octree over an axis-aligned domain.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct OctreeMesh<T> {
    pub domain: Aabb<T>,
    pub base_cell_size: T,
    /// Number of level-0 cells along each axis.
    pub base_dims: [u32; 3],
    /// Leaves in canonical order (z-major, then y, then x of the min corner).
    pub cells: Vec<Cell<T>>,
    #[serde(skip)]
    index: HashMap<CellKey, usize>,
}

impl<T: Real> OctreeMesh<T> {
    /// Uniform grid of `extent / l` cells per axis.
    pub fn initial_grid(domain: Aabb<T>, cell_size: T) -> Result<Self, MeshError> {
        if !(cell_size > T::zero()) {
            return Err(MeshError::InvalidParams("cell size must be positive".into()));
        }
        let ext = domain.extent();
        let mut dims = [0u32; 3];
        for a in 0..3 {
            let n = ext[a] / cell_size;
            let r = n.round();
            if r < T::one() || (n - r).abs() > T::lit(1e-9) * n.max(T::one()) {
                return Err(MeshError::NonIntegerGrid {
                    extent: ext[a].to_f64_lossy(),
                    cell_size: cell_size.to_f64_lossy(),
                });
            }
            dims[a] = r.to_u32().unwrap_or(0);
        }
        let mut mesh = Self {
            domain,
            base_cell_size: cell_size,
            base_dims: dims,
            cells: Vec::new(),
            index: HashMap::new(),
        };
        let mut cells = Vec::with_capacity((dims[0] * dims[1] * dims[2]) as usize);
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    let key = CellKey::new(0, i, j, k);
                    cells.push(Cell {
                        key,
                        bbox: mesh.key_box(key),
                        is_fracture: false,
                        fracture_ids: Vec::new(),
                    });
                }
            }
        }
        mesh.set_cells(cells);
        Ok(mesh)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn fracture_cell_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_fracture).count()
    }

    pub fn max_level(&self) -> u8 {
        self.cells.iter().map(|c| c.key.level).max().unwrap_or(0)
    }

    pub fn cell_index(&self, key: &CellKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    /// Edge length of cells at `level`.
    pub fn edge_at(&self, level: u8) -> T {
        self.base_cell_size / T::lit(f64::from(1u32 << level))
    }

    pub fn key_box(&self, key: CellKey) -> Aabb<T> {
        let h = self.edge_at(key.level);
        let min = Vec3::new(
            self.domain.min.x + h * T::lit(f64::from(key.i)),
            self.domain.min.y + h * T::lit(f64::from(key.j)),
            self.domain.min.z + h * T::lit(f64::from(key.k)),
        );
        let max = Vec3::new(
            self.domain.min.x + h * T::lit(f64::from(key.i + 1)),
            self.domain.min.y + h * T::lit(f64::from(key.j + 1)),
            self.domain.min.z + h * T::lit(f64::from(key.k + 1)),
        );
        Aabb { min, max }
    }

    fn dims_at(&self, level: u8, axis: usize) -> u32 {
        self.base_dims[axis] << level
    }

    /// Replaces the leaf set, sorting into canonical order and reindexing.
    pub(crate) fn set_cells(&mut self, mut cells: Vec<Cell<T>>) {
        cells.sort_by_key(|c| c.key.fine_origin());
        self.index = cells.iter().enumerate().map(|(i, c)| (c.key, i)).collect();
        self.cells = cells;
    }

    /// Rebuilds the key index, e.g. after deserialization.
    pub fn reindex(&mut self) {
        self.index = self.cells.iter().enumerate().map(|(i, c)| (c.key, i)).collect();
    }

    /// Leaf across the face of `key` on side `upper` of `axis`.
    pub fn neighbor(&self, key: CellKey, axis: usize, upper: bool) -> NeighborQuery {
        let c = key.coord(axis);
        let n = if upper {
            if c + 1 >= self.dims_at(key.level, axis) {
                return NeighborQuery::Boundary(BoundarySide::from_axis(axis, true));
            }
            c + 1
        } else {
            if c == 0 {
                return NeighborQuery::Boundary(BoundarySide::from_axis(axis, false));
            }
            c - 1
        };
        let nk = key.with_coord(axis, n);
        for lvl in (0..=key.level).rev() {
            if let Some(&idx) = self.index.get(&nk.ancestor(lvl)) {
                return NeighborQuery::Leaf(idx);
            }
        }
        NeighborQuery::Finer
    }

    /// Leaves inside node `node` that touch its face on side `upper` of `axis`.
    pub fn leaves_on_face(&self, node: CellKey, axis: usize, upper: bool, out: &mut Vec<usize>) {
        if let Some(&idx) = self.index.get(&node) {
            out.push(idx);
            return;
        }
        if node.level >= MAX_LEVEL {
            return;
        }
        for c in 0..8 {
            if (c >> axis & 1 == 1) == upper {
                self.leaves_on_face(node.child(c), axis, upper, out);
            }
        }
    }

    /// All face-adjacent leaves of leaf `idx`, any level.
    pub fn face_neighbors(&self, idx: usize) -> Vec<usize> {
        let key = self.cells[idx].key;
        let mut out = Vec::with_capacity(6);
        for axis in 0..3 {
            for upper in [false, true] {
                match self.neighbor(key, axis, upper) {
                    NeighborQuery::Boundary(_) => {}
                    NeighborQuery::Leaf(j) => out.push(j),
                    NeighborQuery::Finer => {
                        let c = key.coord(axis);
                        let nk = key.with_coord(axis, if upper { c + 1 } else { c - 1 });
                        self.leaves_on_face(nk, axis, !upper, &mut out);
                    }
                }
            }
        }
        out
    }

    /// Largest level jump across any face.
    pub fn max_level_jump(&self) -> u8 {
        (0..self.cells.len())
            .map(|i| {
                let li = self.cells[i].key.level;
                self.face_neighbors(i)
                    .into_iter()
                    .map(|j| li.abs_diff(self.cells[j].key.level))
                    .max()
                    .unwrap_or(0)
            })
            .max()
            .unwrap_or(0)
    }

    pub fn total_volume(&self) -> T {
        self.cells.iter().map(|c| c.volume()).sum()
    }

    /// Whether leaf `idx` has a face on the given domain side.
    pub fn touches_boundary(&self, idx: usize, side: BoundarySide) -> bool {
        let key = self.cells[idx].key;
        let axis = side.axis();
        if side.is_upper() {
            key.coord(axis) + 1 == self.dims_at(key.level, axis)
        } else {
            key.coord(axis) == 0
        }
    }
}

/// Candidate lists: fractures whose bounding box overlaps each base cell.
struct FractureBins {
    dims: [u32; 3],
    bins: Vec<Vec<usize>>,
}

impl FractureBins {
    fn new<T: Real>(mesh: &OctreeMesh<T>, net: &FractureNetwork<T>) -> Self {
        let dims = mesh.base_dims;
        let mut bins = vec![Vec::new(); (dims[0] * dims[1] * dims[2]) as usize];
        let h = mesh.base_cell_size;
        for f in &net.fractures {
            let bb = f.bounding_box();
            let mut lo = [0u32; 3];
            let mut hi = [0u32; 3];
            let mut outside = false;
            for a in 0..3 {
                let l = ((bb.min[a] - mesh.domain.min[a]) / h).floor();
                let u = ((bb.max[a] - mesh.domain.min[a]) / h).floor();
                if u < T::zero() || l >= T::lit(f64::from(dims[a])) {
                    outside = true;
                    break;
                }
                lo[a] = l.max(T::zero()).to_u32().unwrap_or(0);
                hi[a] = u.min(T::lit(f64::from(dims[a] - 1))).to_u32().unwrap_or(0);
            }
            if outside {
                continue;
            }
            for k in lo[2]..=hi[2] {
                for j in lo[1]..=hi[1] {
                    for i in lo[0]..=hi[0] {
                        bins[((k * dims[1] + j) * dims[0] + i) as usize].push(f.id);
                    }
                }
            }
        }
        Self { dims, bins }
    }

    fn candidates(&self, key: CellKey) -> &[usize] {
        let b = key.ancestor(0);
        &self.bins[((b.k * self.dims[1] + b.j) * self.dims[0] + b.i) as usize]
    }
}

fn intersecting<T: Real>(bbox: &Aabb<T>, candidates: &[usize], polys: &[PlanarPolygon<T>]) -> Vec<usize> {
    candidates
        .iter()
        .copied()
        .filter(|&id| polygon_intersects_box(&polys[id], bbox))
        .collect()
}

/// Polygonized fractures of a network, indexed by fracture id.
pub fn network_polygons<T: Real>(net: &FractureNetwork<T>, m: usize) -> Vec<PlanarPolygon<T>> {
    net.fractures.par_iter().map(|f| f.polygon(m)).collect()
}

/// `(L/l)^3` level-0 cells tiling `domain`.
pub fn build_initial_grid<T: Real>(domain: Aabb<T>, cell_size: T) -> Result<OctreeMesh<T>, MeshError> {
    OctreeMesh::initial_grid(domain, cell_size)
}

/// Tags every leaf that a fracture polygon crosses with positive area.
pub fn tag_fracture_cells<T: Real>(mesh: &mut OctreeMesh<T>, net: &FractureNetwork<T>, m: usize) {
    let polys = network_polygons(net, m);
    let bins = FractureBins::new(mesh, net);
    mesh.cells.par_iter_mut().for_each(|c| {
        c.fracture_ids = intersecting(&c.bbox, bins.candidates(c.key), &polys);
        c.is_fracture = !c.fracture_ids.is_empty();
    });
}

pub(crate) fn split_leaves<T: Real>(mesh: &mut OctreeMesh<T>, split: &HashSet<usize>, polys: &[PlanarPolygon<T>]) {
    let old = std::mem::take(&mut mesh.cells);
    let mut next = Vec::with_capacity(old.len() + 7 * split.len());
    let mut parents = Vec::with_capacity(split.len());
    for (i, c) in old.into_iter().enumerate() {
        if split.contains(&i) {
            parents.push(c);
        } else {
            next.push(c);
        }
    }
    let mesh_ref = &*mesh;
    let children: Vec<Cell<T>> = parents
        .par_iter()
        .flat_map_iter(|p| {
            (0..8).map(move |c| {
                let key = p.key.child(c);
                let bbox = mesh_ref.key_box(key);
                let fracture_ids = intersecting(&bbox, &p.fracture_ids, polys);
                Cell {
                    key,
                    bbox,
                    is_fracture: !fracture_ids.is_empty(),
                    fracture_ids,
                }
            })
        })
        .collect();
    next.extend(children);
    mesh.set_cells(next);
}

/// Splits leaves until no face separates cells more than one level apart.
pub fn balance_2to1<T: Real>(mesh: &mut OctreeMesh<T>, polys: &[PlanarPolygon<T>]) {
    loop {
        let mut split = HashSet::new();
        for c in &mesh.cells {
            if c.key.level < 2 {
                continue;
            }
            for axis in 0..3 {
                for upper in [false, true] {
                    if let NeighborQuery::Leaf(j) = mesh.neighbor(c.key, axis, upper) {
                        if mesh.cells[j].key.level + 1 < c.key.level {
                            split.insert(j);
                        }
                    }
                }
            }
        }
        if split.is_empty() {
            break;
        }
        split_leaves(mesh, &split, polys);
    }
}

/// Octree refinement around fractures.
///
/// Each pass splits every fracture leaf and every face neighbour of one into
/// eight children and retags the children; neighbours are recomputed from the
/// current leaves on every pass. With `balance` set, a final sweep enforces
/// the 2:1 face rule.
pub fn refine<T: Real>(
    mesh: &mut OctreeMesh<T>,
    net: &FractureNetwork<T>,
    levels: u8,
    balance: bool,
    m: usize,
) -> Result<(), MeshError> {
    if mesh.max_level() + levels > MAX_LEVEL {
        return Err(MeshError::InvalidParams(format!(
            "refinement beyond level {MAX_LEVEL} is not supported"
        )));
    }
    let polys = network_polygons(net, m);
    for _ in 0..levels {
        let mut split = HashSet::new();
        for (idx, c) in mesh.cells.iter().enumerate() {
            if !c.is_fracture {
                continue;
            }
            split.insert(idx);
            for axis in 0..3 {
                for upper in [false, true] {
                    if let NeighborQuery::Leaf(j) = mesh.neighbor(c.key, axis, upper) {
                        split.insert(j);
                    }
                }
            }
        }
        if split.is_empty() {
            break;
        }
        split_leaves(mesh, &split, &polys);
    }
    if balance {
        balance_2to1(mesh, &polys);
    }
    Ok(())
}

/// Initial grid, tagging and refinement in one call.
pub fn build_mesh<T: Real>(net: &FractureNetwork<T>, params: &MeshParams<T>) -> Result<OctreeMesh<T>, MeshError> {
    let mut mesh = build_initial_grid(net.domain, params.cell_size)?;
    tag_fracture_cells(&mut mesh, net, params.polygon_vertices);
    refine(
        &mut mesh,
        net,
        params.refinement_levels,
        params.balance_2to1,
        params.polygon_vertices,
    )?;
    Ok(mesh)
}

/// Cells of a uniform mesh at the finest resolution, counting grid points:
/// `(L / dx + 1)^3` with `dx = l / 2^orl`.
pub fn equivalent_hex_count(domain_size: f64, cell_size: f64, levels: u32) -> u64 {
    let per_axis = (domain_size / cell_size * 2f64.powi(levels as i32)).round() as u64 + 1;
    per_axis.pow(3)
}
