//! Equivalent-continuum properties of each leaf from the fractures crossing it.

mod cell;
mod tensor;

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use cell::{
    cell_fracture_data, cell_permeability_tensor, upscale_cell, CellFractureData, CellProperties, PorosityMode,
};
pub use tensor::{
    eigenvalues_closed_form, eigenvalues_jacobi, spectral_radius, transformation_tensor, PermTensor,
};

use crate::mesh::{network_polygons, OctreeMesh};
use crate::network::FractureNetwork;
use crate::scalar::Real;

#[derive(Debug, thiserror::Error)]
pub enum UpscaleError {
    #[error("invalid matrix properties k_m={k_m}, phi_m={phi_m}")]
    InvalidMatrix { k_m: f64, phi_m: f64 },
    #[error("fracture porosity {0} is not below one")]
    FracturePorosity(f64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Matrix properties and porosity rule for a mesh-wide upscaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MatrixProperties<T> {
    pub permeability: T,
    pub porosity: T,
    #[serde(default)]
    pub porosity_mode: PorosityMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropertySummary {
    pub k_min: f64,
    pub k_max: f64,
    pub k_mean: f64,
    pub phi_min: f64,
    pub phi_max: f64,
    pub phi_mean: f64,
    /// `Σ φ_F v_c`.
    pub fracture_volume: f64,
}

/// Per-leaf properties in mesh order.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PropertyField<T> {
    pub cells: Vec<CellProperties<T>>,
    pub fracture_counts: Vec<usize>,
    pub summary: PropertySummary,
    /// `(cell, fracture)` pairs tagged by the mesh whose clip came out empty.
    pub dropped: Vec<(usize, usize)>,
}

impl<T: Real> PropertyField<T> {
    pub fn permeabilities(&self) -> Vec<T> {
        self.cells.iter().map(|c| c.permeability).collect()
    }

    pub fn porosities(&self) -> Vec<T> {
        self.cells.iter().map(|c| c.porosity).collect()
    }
}

fn summarize<T: Real>(mesh: &OctreeMesh<T>, cells: &[CellProperties<T>]) -> PropertySummary {
    let n = cells.len().max(1) as f64;
    let mut s = PropertySummary {
        k_min: f64::INFINITY,
        k_max: f64::NEG_INFINITY,
        k_mean: 0.0,
        phi_min: f64::INFINITY,
        phi_max: f64::NEG_INFINITY,
        phi_mean: 0.0,
        fracture_volume: 0.0,
    };
    for (c, leaf) in cells.iter().zip(&mesh.cells) {
        let (k, phi) = (c.permeability.to_f64_lossy(), c.porosity.to_f64_lossy());
        s.k_min = s.k_min.min(k);
        s.k_max = s.k_max.max(k);
        s.k_mean += k / n;
        s.phi_min = s.phi_min.min(phi);
        s.phi_max = s.phi_max.max(phi);
        s.phi_mean += phi / n;
        s.fracture_volume += (c.fracture_porosity * leaf.volume()).to_f64_lossy();
    }
    s
}

/// Applies [`upscale_cell`] to every leaf.
pub fn upscale_mesh<T: Real>(
    mesh: &OctreeMesh<T>,
    net: &FractureNetwork<T>,
    matrix: &MatrixProperties<T>,
    polygon_vertices: usize,
) -> Result<PropertyField<T>, UpscaleError> {
    let polys = network_polygons(net, polygon_vertices);
    let per_cell: Vec<_> = mesh
        .cells
        .par_iter()
        .map(|leaf| {
            if !leaf.is_fracture {
                return upscale_cell(&[], matrix.permeability, matrix.porosity, leaf.volume(), matrix.porosity_mode)
                    .map(|p| (p, 0, Vec::new()));
            }
            let fr: Vec<_> = leaf.fracture_ids.iter().map(|&i| &net.fractures[i]).collect();
            let pl: Vec<_> = leaf.fracture_ids.iter().map(|&i| &polys[i]).collect();
            let (data, dropped) = cell_fracture_data(&leaf.bbox, &fr, &pl);
            let mut props =
                upscale_cell(&data, matrix.permeability, matrix.porosity, leaf.volume(), matrix.porosity_mode)?;
            props.is_fracture = true;
            Ok((props, data.len(), dropped))
        })
        .collect::<Result<_, _>>()?;

    let mut cells = Vec::with_capacity(per_cell.len());
    let mut fracture_counts = Vec::with_capacity(per_cell.len());
    let mut dropped = Vec::new();
    for (idx, (p, n, d)) in per_cell.into_iter().enumerate() {
        for f in d {
            log::warn!("fracture {f} tagged in cell {idx} but its clip is empty; dropped from upscaling");
            dropped.push((idx, f));
        }
        cells.push(p);
        fracture_counts.push(n);
    }
    let summary = summarize(mesh, &cells);
    log::info!(
        "upscaled {} cells: k in [{:.3e}, {:.3e}], phi in [{:.3e}, {:.3e}]",
        cells.len(),
        summary.k_min,
        summary.k_max,
        summary.phi_min,
        summary.phi_max
    );
    Ok(PropertyField { cells, fracture_counts, summary, dropped })
}

/// CSV with columns `id,k,phi,phi_f,n_fractures`.
pub fn write_properties_csv<T: Real>(path: &Path, field: &PropertyField<T>) -> Result<(), UpscaleError> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "id,k,phi,phi_f,n_fractures")?;
    for (i, (c, n)) in field.cells.iter().zip(&field.fracture_counts).enumerate() {
        writeln!(w, "{i},{:e},{:e},{:e},{n}", c.permeability, c.porosity, c.fracture_porosity)?;
    }
    w.flush()?;
    Ok(())
}
