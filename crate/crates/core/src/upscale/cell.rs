use serde::{Deserialize, Serialize};

use super::tensor::{spectral_radius, transformation_tensor, PermTensor};
use super::UpscaleError;
use crate::geometry::{clip_polygon_to_box, Aabb, PlanarPolygon, Vec3};
use crate::network::Fracture;
use crate::scalar::Real;

/// How the total porosity of a fracture cell is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PorosityMode {
    /// `φ_F + (1 - φ_F) φ_m`.
    #[default]
    Blended,
    /// `φ_F` alone (falls back to `φ_m` if no fracture volume survives).
    FractureOnly,
}

/// One fracture's contribution to one cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CellFractureData<T> {
    pub fracture_id: usize,
    pub area: T,
    pub aperture: T,
    pub volume: T,
    pub porosity: T,
    pub normal: Vec3<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CellProperties<T> {
    pub permeability: T,
    pub porosity: T,
    pub is_fracture: bool,
    pub fracture_porosity: T,
}

impl<T: Real> CellProperties<T> {
    pub fn matrix(k_m: T, phi_m: T) -> Self {
        Self { permeability: k_m, porosity: phi_m, is_fracture: false, fracture_porosity: T::zero() }
    }
}

/// Clipped area, volume and porosity of every listed fracture inside `cell`.
///
/// `polygons[i]` must be the polygon of `fractures[i]`. Fractures whose clip is
/// empty are returned separately.
pub fn cell_fracture_data<T: Real>(
    cell: &Aabb<T>,
    fractures: &[&Fracture<T>],
    polygons: &[&PlanarPolygon<T>],
) -> (Vec<CellFractureData<T>>, Vec<usize>) {
    let v_c = cell.volume();
    let mut data = Vec::with_capacity(fractures.len());
    let mut dropped = Vec::new();
    for (f, poly) in fractures.iter().zip(polygons) {
        let area = clip_polygon_to_box(poly, cell).area();
        if !(area > T::zero()) {
            dropped.push(f.id);
            continue;
        }
        let volume = area * f.aperture;
        data.push(CellFractureData {
            fracture_id: f.id,
            area,
            aperture: f.aperture,
            volume,
            porosity: volume / v_c,
            normal: f.normal,
        });
    }
    (data, dropped)
}

/// `Σ φ_f (I - n nᵀ) b_f² / 12`.
pub fn cell_permeability_tensor<T: Real>(data: &[CellFractureData<T>]) -> PermTensor<T> {
    let twelfth = T::one() / T::lit(12.0);
    data.iter().fold(PermTensor::zero(), |acc, d| {
        acc + transformation_tensor(d.normal) * (d.porosity * d.aperture * d.aperture * twelfth)
    })
}

/// Equivalent scalar permeability and porosity of one cell.
pub fn upscale_cell<T: Real>(
    data: &[CellFractureData<T>],
    k_m: T,
    phi_m: T,
    v_c: T,
    mode: PorosityMode,
) -> Result<CellProperties<T>, UpscaleError> {
    if !(k_m > T::zero()) || !(phi_m > T::zero() && phi_m < T::one()) {
        return Err(UpscaleError::InvalidMatrix { k_m: k_m.to_f64_lossy(), phi_m: phi_m.to_f64_lossy() });
    }
    if data.is_empty() {
        return Ok(CellProperties::matrix(k_m, phi_m));
    }
    let v_f = data.iter().map(|d| d.volume).sum::<T>();
    let phi_f = v_f / v_c;
    if !(phi_f < T::one()) {
        return Err(UpscaleError::FracturePorosity(phi_f.to_f64_lossy()));
    }
    let k_f = spectral_radius(&cell_permeability_tensor(data));
    let porosity = match mode {
        PorosityMode::Blended => phi_f + (T::one() - phi_f) * phi_m,
        PorosityMode::FractureOnly if phi_f > T::zero() => phi_f,
        PorosityMode::FractureOnly => phi_m,
    };
    Ok(CellProperties {
        permeability: (T::one() - phi_f) * k_m + k_f,
        porosity,
        is_fracture: true,
        fracture_porosity: phi_f,
    })
}
