use serde::{Deserialize, Serialize};

use super::{TracerParams, TransportError};
use crate::mesh::{BoundarySide, FaceAdjacency, OctreeMesh};
use crate::scalar::Real;
use crate::sparse::{bicgstab, CsrMatrix, Ilu0};

/// Relative residual of each implicit step.
pub const STEP_TOL: f64 = 1e-13;

/// Time-independent part of the implicit transport operator.
///
/// Per unit time, the rows hold upwind advection, face-harmonic diffusion and
/// decay; the storage `R φ v` is added on the diagonal divided by `dt`.
#[derive(Debug, Clone)]
pub struct TransportOperator<T> {
    pub(crate) k: CsrMatrix<T>,
    /// `R φ v` per cell, m³.
    pub storage: Vec<T>,
    /// `φ v` per cell, m³.
    pub pore_volume: Vec<T>,
    pub decay: T,
    /// `(cell, outward flux)` of every outlet-plane face with outflow.
    outlet: Vec<(usize, T)>,
    /// Same for outflow leaving through any other Dirichlet face.
    backflow: Vec<(usize, T)>,
    inlet_cells: Vec<usize>,
}

/// Rates evaluated on one concentration field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fluxes {
    /// mol/s.
    pub outlet: f64,
    pub backflow: f64,
    pub decay: f64,
}

impl<T: Real> TransportOperator<T> {
    /// `face_flux[f]` is the volumetric flux out of `cell_a` through face `f`.
    pub fn new(
        mesh: &OctreeMesh<T>,
        faces: &FaceAdjacency<T>,
        porosity: &[T],
        face_flux: &[T],
        params: &TracerParams,
    ) -> Result<Self, TransportError> {
        params.validate().map_err(TransportError::InvalidParams)?;
        let n = mesh.len();
        if porosity.len() != n || face_flux.len() != faces.faces.len() {
            return Err(TransportError::InvalidParams("field lengths do not match the mesh".into()));
        }
        let d = T::lit(params.diffusion);
        let decay = T::lit(params.decay);
        let mut pore_volume = Vec::with_capacity(n);
        let mut storage = Vec::with_capacity(n);
        for (c, &phi) in mesh.cells.iter().zip(porosity) {
            if !(phi > T::zero()) {
                return Err(TransportError::InvalidParams("porosity must be positive".into()));
            }
            let pv = phi * c.volume();
            pore_volume.push(pv);
            storage.push(pv * T::lit(params.cell_retardation(phi.to_f64_lossy())));
        }
        let mut diag: Vec<T> = pore_volume.iter().map(|&pv| decay * pv).collect();
        let mut trip = Vec::with_capacity(n + 2 * faces.faces.len());
        let (mut outlet, mut backflow) = (Vec::new(), Vec::new());
        let mut inlet_cells = Vec::new();
        for (f, &q) in faces.faces.iter().zip(face_flux) {
            let a = f.cell_a;
            match (f.cell_b(), f.boundary()) {
                (Some(b), _) => {
                    let (up, down, q) = if q >= T::zero() { (a, b, q) } else { (b, a, -q) };
                    diag[up] += q;
                    trip.push((down, up, -q));
                    if d > T::zero() {
                        let g = f.area / (f.d_a / (porosity[a] * d) + f.d_b / (porosity[b] * d));
                        diag[a] += g;
                        diag[b] += g;
                        trip.push((a, b, -g));
                        trip.push((b, a, -g));
                    }
                }
                (None, Some(side)) => {
                    if side == BoundarySide::XMin {
                        inlet_cells.push(a);
                    }
                    if q > T::zero() {
                        diag[a] += q;
                        match side {
                            BoundarySide::XMax => outlet.push((a, q)),
                            _ => backflow.push((a, q)),
                        }
                    }
                }
                _ => unreachable!("face without neighbour"),
            }
        }
        for (i, v) in diag.into_iter().enumerate() {
            trip.push((i, i, v));
        }
        inlet_cells.sort_unstable();
        inlet_cells.dedup();
        Ok(Self {
            k: CsrMatrix::from_triplets(n, &trip),
            storage,
            pore_volume,
            decay,
            outlet,
            backflow,
            inlet_cells,
        })
    }

    pub fn len(&self) -> usize {
        self.storage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.storage.is_empty()
    }

    pub fn inlet_cells(&self) -> &[usize] {
        &self.inlet_cells
    }

    /// Total (dissolved plus sorbed) mass, mol.
    pub fn mass(&self, c: &[T]) -> f64 {
        self.storage.iter().zip(c).map(|(&s, &ci)| (s * ci).to_f64_lossy()).sum()
    }

    pub fn dissolved_mass(&self, c: &[T]) -> f64 {
        self.pore_volume.iter().zip(c).map(|(&s, &ci)| (s * ci).to_f64_lossy()).sum()
    }

    pub fn fluxes(&self, c: &[T]) -> Fluxes {
        let sum = |v: &[(usize, T)]| v.iter().fold(0.0, |s, &(i, q)| s + (q * c[i]).to_f64_lossy());
        Fluxes {
            outlet: sum(&self.outlet),
            backflow: sum(&self.backflow),
            decay: self.decay.to_f64_lossy() * self.dissolved_mass(c),
        }
    }

    /// Uniform concentration over the inlet-adjacent cells holding total mass
    /// `m0`; zero elsewhere.
    pub fn pulse(&self, m0: f64) -> Result<Vec<T>, TransportError> {
        if self.inlet_cells.is_empty() {
            return Err(TransportError::NoInletCells);
        }
        let s: f64 = self.inlet_cells.iter().map(|&i| self.storage[i].to_f64_lossy()).sum();
        let mut c = vec![T::zero(); self.len()];
        let c0 = T::lit(m0 / s);
        for &i in &self.inlet_cells {
            c[i] = c0;
        }
        Ok(c)
    }

    /// One backward-Euler step of length `dt` seconds, in place.
    pub fn step(&self, c: &mut [T], dt: f64) -> Result<usize, TransportError> {
        let inv_dt = T::lit(1.0 / dt);
        let shift: Vec<T> = self.storage.iter().map(|&s| s * inv_dt).collect();
        let a = self.k.with_added_diagonal(&shift);
        let rhs: Vec<T> = shift.iter().zip(c.iter()).map(|(&s, &ci)| s * ci).collect();
        let pre = Ilu0::new(&a)?;
        let stats = bicgstab(&a, &rhs, c, &pre, STEP_TOL, 1000 + 10 * self.len())?;
        Ok(stats.iterations)
    }
}

/// One implicit step of a field: returns the advanced concentrations.
pub fn step_transport<T: Real>(op: &TransportOperator<T>, state: &[T], dt: f64) -> Result<Vec<T>, TransportError> {
    let mut c = state.to_vec();
    op.step(&mut c, dt)?;
    Ok(c)
}
