//! Legacy VTK and CSV dumps of a mesh and its cell data.

use std::collections::HashMap;
use std::io::Write;

use super::faces::{FaceAdjacency, FaceNeighbor};
use super::octree::{OctreeMesh, MAX_LEVEL};
use crate::scalar::Real;

/// Named per-cell scalar series.
#[derive(Debug, Clone)]
pub enum CellData<'a> {
    Int(&'a str, Vec<i64>),
    Float(&'a str, &'a [f64]),
}

/// ASCII legacy VTK unstructured grid with hexahedral cells (type 12).
///
/// `level` and `is_fracture` are always written; `extra` adds further fields,
/// each of which must have one value per cell.
pub fn write_vtk<T: Real, W: Write>(
    mesh: &OctreeMesh<T>,
    extra: &[CellData<'_>],
    mut w: W,
) -> std::io::Result<()> {
    // corner vertex ids order per VTK_HEXAHEDRON: bottom face ccw, then top
    const CORNERS: [(u64, u64, u64); 8] = [
        (0, 0, 0),
        (1, 0, 0),
        (1, 1, 0),
        (0, 1, 0),
        (0, 0, 1),
        (1, 0, 1),
        (1, 1, 1),
        (0, 1, 1),
    ];
    let mut point_ids: HashMap<(u64, u64, u64), usize> = HashMap::new();
    let mut points: Vec<(u64, u64, u64)> = Vec::new();
    let mut conn = Vec::with_capacity(mesh.len());
    for c in &mesh.cells {
        let s = (MAX_LEVEL - c.key.level) as u64;
        let (i, j, k) = (c.key.i as u64, c.key.j as u64, c.key.k as u64);
        let ids: [usize; 8] = std::array::from_fn(|v| {
            let (dx, dy, dz) = CORNERS[v];
            let p = ((i + dx) << s, (j + dy) << s, (k + dz) << s);
            *point_ids.entry(p).or_insert_with(|| {
                points.push(p);
                points.len() - 1
            })
        });
        conn.push(ids);
    }

    let unit = mesh.base_cell_size.to_f64_lossy() / f64::from(1u32 << MAX_LEVEL);
    let o = mesh.domain.min;
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "udfm octree mesh")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {} double", points.len())?;
    for &(x, y, z) in &points {
        writeln!(
            w,
            "{} {} {}",
            o.x.to_f64_lossy() + x as f64 * unit,
            o.y.to_f64_lossy() + y as f64 * unit,
            o.z.to_f64_lossy() + z as f64 * unit
        )?;
    }
    writeln!(w, "CELLS {} {}", conn.len(), conn.len() * 9)?;
    for ids in &conn {
        write!(w, "8")?;
        for id in ids {
            write!(w, " {id}")?;
        }
        writeln!(w)?;
    }
    writeln!(w, "CELL_TYPES {}", conn.len())?;
    for _ in &conn {
        writeln!(w, "12")?;
    }

    writeln!(w, "CELL_DATA {}", mesh.len())?;
    let level: Vec<i64> = mesh.cells.iter().map(|c| i64::from(c.key.level)).collect();
    let frac: Vec<i64> = mesh.cells.iter().map(|c| i64::from(c.is_fracture)).collect();
    let mut fields = vec![CellData::Int("level", level), CellData::Int("is_fracture", frac)];
    fields.extend(extra.iter().cloned());
    for field in &fields {
        match field {
            CellData::Int(name, v) => {
                assert_eq!(v.len(), mesh.len(), "field {name} length");
                writeln!(w, "SCALARS {name} int 1")?;
                writeln!(w, "LOOKUP_TABLE default")?;
                for x in v {
                    writeln!(w, "{x}")?;
                }
            }
            CellData::Float(name, v) => {
                assert_eq!(v.len(), mesh.len(), "field {name} length");
                writeln!(w, "SCALARS {name} double 1")?;
                writeln!(w, "LOOKUP_TABLE default")?;
                for x in v.iter() {
                    writeln!(w, "{x:e}")?;
                }
            }
        }
    }
    w.flush()
}

pub fn write_cells_csv<T: Real, W: Write>(mesh: &OctreeMesh<T>, mut w: W) -> std::io::Result<()> {
    writeln!(w, "id,level,xmin,ymin,zmin,edge,is_fracture,n_fractures")?;
    for (id, c) in mesh.cells.iter().enumerate() {
        writeln!(
            w,
            "{id},{},{},{},{},{},{},{}",
            c.key.level,
            c.bbox.min.x,
            c.bbox.min.y,
            c.bbox.min.z,
            c.edge(),
            u8::from(c.is_fracture),
            c.fracture_ids.len()
        )?;
    }
    w.flush()
}

pub fn write_faces_csv<T: Real, W: Write>(faces: &FaceAdjacency<T>, mut w: W) -> std::io::Result<()> {
    writeln!(w, "cell_a,cell_b,boundary,area,d_a,d_b,axis,upper")?;
    for f in &faces.faces {
        let (b, side) = match f.neighbor {
            FaceNeighbor::Cell(b) => (b.to_string(), String::new()),
            FaceNeighbor::Boundary(s) => (String::new(), format!("{s:?}")),
        };
        writeln!(
            w,
            "{},{b},{side},{},{},{},{},{}",
            f.cell_a,
            f.area,
            f.d_a,
            f.d_b,
            f.axis,
            u8::from(f.upper)
        )?;
    }
    w.flush()
}
