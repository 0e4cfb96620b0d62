//! Steady incompressible Darcy flow with two-point flux finite volumes.
//!
//! Pressure is prescribed on the `x = min` (inlet) and `x = max` (outlet)
//! faces; all other boundary faces are no-flow.

use serde::{Deserialize, Serialize};

use crate::mesh::{BoundarySide, FaceAdjacency, OctreeMesh};
use crate::scalar::Real;
use crate::sparse::{pcg, CsrMatrix, Ilu0, Jacobi, SolveStats, SolverError};

/// Water viscosity at 25 °C, Pa·s.
pub const WATER_VISCOSITY: f64 = 8.9e-4;

#[derive(Debug, thiserror::Error)]
pub enum FlowError {
    #[error("invalid boundary conditions: {0}")]
    InvalidBc(String),
    #[error("cell {cell} has non-positive permeability {k}")]
    BadPermeability { cell: usize, k: f64 },
    #[error("face {0} has degenerate geometry")]
    DegenerateFace(usize),
    #[error("property field has {got} entries for {expected} cells")]
    Length { expected: usize, got: usize },
    #[error("pressure solve failed: {0}")]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowBc {
    pub p_in: f64,
    pub p_out: f64,
    pub viscosity: f64,
}

impl Default for FlowBc {
    fn default() -> Self {
        Self { p_in: 1000.0, p_out: 0.0, viscosity: WATER_VISCOSITY }
    }
}

impl FlowBc {
    pub fn delta_p(&self) -> f64 {
        self.p_in - self.p_out
    }

    pub fn validate(&self) -> Result<(), FlowError> {
        if !(self.viscosity > 0.0) {
            return Err(FlowError::InvalidBc(format!("viscosity {} must be positive", self.viscosity)));
        }
        if !(self.delta_p().abs() > 0.0) {
            return Err(FlowError::InvalidBc("inlet and outlet pressures coincide".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowPreconditioner {
    /// Diagonal scaling, retried with incomplete Cholesky on non-convergence.
    #[default]
    Jacobi,
    IncompleteCholesky,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowSolverOptions {
    pub tol: f64,
    /// Iteration cap is `cap_factor * sqrt(n)`.
    pub cap_factor: f64,
    pub preconditioner: FlowPreconditioner,
}

impl Default for FlowSolverOptions {
    fn default() -> Self {
        Self { tol: 1e-10, cap_factor: 50.0, preconditioner: FlowPreconditioner::Jacobi }
    }
}

/// Face transmissibility.
///
/// Interior faces: `A / (d_a/k_a + d_b/k_b)`. Dirichlet faces: `A k_a / d_a`.
/// No-flow faces carry zero.
pub fn face_transmissibility<T: Real>(area: T, d_a: T, k_a: T, d_b: T, k_b: Option<T>) -> T {
    match k_b {
        Some(k_b) => area / (d_a / k_a + d_b / k_b),
        None => area * k_a / d_a,
    }
}

fn is_dirichlet(side: BoundarySide) -> bool {
    matches!(side, BoundarySide::XMin | BoundarySide::XMax)
}

/// Linear system for the normalized pressure `(P - P_out) / ΔP`.
#[derive(Debug, Clone)]
pub struct TpfaSystem<T> {
    pub matrix: CsrMatrix<T>,
    pub rhs: Vec<T>,
    /// Per-face transmissibility in face-list order, m³.
    pub transmissibility: Vec<T>,
}

pub fn assemble_tpfa<T: Real>(
    mesh: &OctreeMesh<T>,
    faces: &FaceAdjacency<T>,
    permeability: &[T],
) -> Result<TpfaSystem<T>, FlowError> {
    let n = mesh.len();
    if permeability.len() != n {
        return Err(FlowError::Length { expected: n, got: permeability.len() });
    }
    if let Some((cell, &k)) = permeability.iter().enumerate().find(|(_, &k)| !(k > T::zero() && k.is_finite())) {
        return Err(FlowError::BadPermeability { cell, k: k.to_f64_lossy() });
    }
    let mut trans = Vec::with_capacity(faces.faces.len());
    let mut trip = Vec::with_capacity(n + 2 * faces.faces.len());
    let mut diag = vec![T::zero(); n];
    let mut rhs = vec![T::zero(); n];
    for (fi, f) in faces.faces.iter().enumerate() {
        if !(f.area > T::zero() && f.d_a > T::zero()) {
            return Err(FlowError::DegenerateFace(fi));
        }
        let a = f.cell_a;
        let t = match (f.cell_b(), f.boundary()) {
            (Some(b), _) => {
                if !(f.d_b > T::zero()) {
                    return Err(FlowError::DegenerateFace(fi));
                }
                let t = face_transmissibility(f.area, f.d_a, permeability[a], f.d_b, Some(permeability[b]));
                diag[a] += t;
                diag[b] += t;
                trip.push((a, b, -t));
                trip.push((b, a, -t));
                t
            }
            (None, Some(side)) if is_dirichlet(side) => {
                let t = face_transmissibility(f.area, f.d_a, permeability[a], T::zero(), None);
                diag[a] += t;
                if side == BoundarySide::XMin {
                    rhs[a] += t;
                }
                t
            }
            _ => T::zero(),
        };
        trans.push(t);
    }
    for (i, d) in diag.into_iter().enumerate() {
        trip.push((i, i, d));
    }
    Ok(TpfaSystem { matrix: CsrMatrix::from_triplets(n, &trip), rhs, transmissibility: trans })
}

/// Solves the normalized system; `u = 1` on the inlet, `0` on the outlet.
pub fn solve_pressure<T: Real>(system: &TpfaSystem<T>, opts: &FlowSolverOptions) -> Result<(Vec<T>, SolveStats), FlowError> {
    let mut u = vec![T::lit(0.5); system.rhs.len()];
    let stats = solve_pressure_from(system, &mut u, opts.tol, opts)?;
    Ok((u, stats))
}

fn solve_pressure_from<T: Real>(
    system: &TpfaSystem<T>,
    u: &mut [T],
    tol: f64,
    opts: &FlowSolverOptions,
) -> Result<SolveStats, FlowError> {
    let n = system.rhs.len();
    let cap = ((opts.cap_factor * (n as f64).sqrt()).ceil() as usize).max(10);
    let a = &system.matrix;
    if opts.preconditioner == FlowPreconditioner::Jacobi {
        let start = u.to_vec();
        match pcg(a, &system.rhs, u, &Jacobi::new(a)?, tol, cap) {
            Ok(stats) => return Ok(stats),
            Err(SolverError::NotConverged { iterations, residual }) => {
                log::info!("Jacobi-PCG stalled ({iterations} it, residual {residual:.2e}); retrying with IC(0)");
                u.copy_from_slice(&start);
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(pcg(a, &system.rhs, u, &Ilu0::new(a)?, tol, cap)?)
}

/// Relative mismatch between inlet and outlet plane fluxes tolerated before
/// the pressure solve is tightened.
pub const GLOBAL_BALANCE_TOL: f64 = 1e-8;

/// Volume-weighted harmonic and arithmetic means of the cell permeabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WienerBounds {
    pub harmonic: f64,
    pub arithmetic: f64,
}

impl WienerBounds {
    pub fn compute<T: Real>(mesh: &OctreeMesh<T>, permeability: &[T]) -> Self {
        let (mut v, mut inv, mut sum) = (0.0, 0.0, 0.0);
        for (c, &k) in mesh.cells.iter().zip(permeability) {
            let (vol, k) = (c.volume().to_f64_lossy(), k.to_f64_lossy());
            v += vol;
            inv += vol / k;
            sum += vol * k;
        }
        Self { harmonic: v / inv, arithmetic: sum / v }
    }

    pub fn contains(&self, k: f64, rel_tol: f64) -> bool {
        k >= self.harmonic * (1.0 - rel_tol) && k <= self.arithmetic * (1.0 + rel_tol)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FlowField<T> {
    /// Cell pressures, Pa.
    pub pressure: Vec<T>,
    /// Volumetric flux out of `cell_a` through each face, m³/s.
    pub face_flux: Vec<T>,
    /// Total inflow through the inlet plane, m³/s.
    pub q_in: f64,
    /// Total outflow through the outlet plane, m³/s.
    pub q_out: f64,
    pub k_eff: f64,
    pub iterations: usize,
    pub residual: f64,
    pub bounds: WienerBounds,
    pub within_bounds: bool,
    /// Largest net cell flux relative to `q_in`.
    pub max_imbalance: f64,
}

/// Normalized inlet and outlet plane fluxes.
fn plane_fluxes<T: Real>(faces: &FaceAdjacency<T>, trans: &[T], u: &[T]) -> (f64, f64) {
    let (mut qi, mut qo) = (0.0, 0.0);
    for (f, &t) in faces.faces.iter().zip(trans) {
        let (t, ua) = (t.to_f64_lossy(), u[f.cell_a].to_f64_lossy());
        match f.boundary() {
            Some(BoundarySide::XMin) => qi += t * (1.0 - ua),
            Some(BoundarySide::XMax) => qo += t * ua,
            _ => {}
        }
    }
    (qi, qo)
}

/// `μ (Q / A) L / ΔP`.
pub fn effective_permeability(q: f64, length: f64, area: f64, delta_p: f64, viscosity: f64) -> f64 {
    viscosity * (q / area) * length / delta_p
}

/// `|k - k_ref| / k_ref`.
pub fn keff_error_factor(k: f64, k_ref: f64) -> f64 {
    assert!(k_ref > 0.0, "reference permeability must be positive");
    ((k - k_ref) / k_ref).abs()
}

/// Assembles, solves and post-processes one steady flow problem.
pub fn solve_flow<T: Real>(
    mesh: &OctreeMesh<T>,
    faces: &FaceAdjacency<T>,
    permeability: &[T],
    bc: &FlowBc,
    opts: &FlowSolverOptions,
) -> Result<FlowField<T>, FlowError> {
    bc.validate()?;
    let system = assemble_tpfa(mesh, faces, permeability)?;
    let (mut u, mut stats) = solve_pressure(&system, opts)?;
    // A small residual does not bound the inlet/outlet mismatch when the
    // inflow is carried by a few cells; tighten until the planes agree.
    let mut tol = opts.tol;
    let mut iterations = stats.iterations;
    while tol > 1e-15 {
        let (qi, qo) = plane_fluxes(faces, &system.transmissibility, &u);
        if (qi - qo).abs() <= GLOBAL_BALANCE_TOL * qi.abs().max(qo.abs()) {
            break;
        }
        tol *= 1e-2;
        stats = solve_pressure_from(&system, &mut u, tol, opts)?;
        iterations += stats.iterations;
    }
    let dp = bc.delta_p();
    let mu = bc.viscosity;
    let mut face_flux = Vec::with_capacity(faces.faces.len());
    let mut net = vec![0.0f64; mesh.len()];
    let (mut q_in, mut q_out) = (0.0, 0.0);
    for (f, &t) in faces.faces.iter().zip(&system.transmissibility) {
        let ua = u[f.cell_a].to_f64_lossy();
        let t = t.to_f64_lossy();
        let flux = match (f.cell_b(), f.boundary()) {
            (Some(b), _) => {
                let q = t * (ua - u[b].to_f64_lossy()) * dp / mu;
                net[b] -= q;
                q
            }
            (None, Some(BoundarySide::XMin)) => {
                let q = t * (ua - 1.0) * dp / mu;
                q_in -= q;
                q
            }
            (None, Some(BoundarySide::XMax)) => {
                let q = t * ua * dp / mu;
                q_out += q;
                q
            }
            _ => 0.0,
        };
        net[f.cell_a] += if f.cell_b().is_some() { flux } else { 0.0 };
        face_flux.push(T::lit(flux));
    }
    // boundary fluxes enter the cell balance too
    for (f, &q) in faces.faces.iter().zip(&face_flux) {
        if f.cell_b().is_none() {
            net[f.cell_a] += q.to_f64_lossy();
        }
    }
    let scale = q_in.abs().max(f64::MIN_POSITIVE);
    let max_imbalance = net.iter().fold(0.0f64, |m, &v| m.max(v.abs())) / scale;

    let ext = mesh.domain.extent();
    let (lx, area) = (ext.x.to_f64_lossy(), (ext.y * ext.z).to_f64_lossy());
    let k_eff = effective_permeability(q_in, lx, area, dp, mu);
    let bounds = WienerBounds::compute(mesh, permeability);
    let within_bounds = bounds.contains(k_eff, 1e-6);
    if !within_bounds {
        log::warn!(
            "k_eff {k_eff:.4e} outside Wiener bounds [{:.4e}, {:.4e}]",
            bounds.harmonic,
            bounds.arithmetic
        );
    }
    let pressure = u.iter().map(|&v| T::lit(bc.p_out + dp * v.to_f64_lossy())).collect();
    Ok(FlowField {
        pressure,
        face_flux,
        q_in,
        q_out,
        k_eff,
        iterations,
        residual: stats.residual,
        bounds,
        within_bounds,
        max_imbalance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Aabb, Vec3};
    use crate::mesh::{build_face_adjacency, build_mesh, MeshParams};
    use crate::network::{generate_network, GenerationParams};
    use crate::rng::RngStream;

    fn grid(nx: u32, ny: u32, nz: u32, h: f64) -> OctreeMesh<f64> {
        let d = Aabb::new(Vec3::zero(), Vec3::new(nx as f64 * h, ny as f64 * h, nz as f64 * h));
        OctreeMesh::initial_grid(d, h).unwrap()
    }

    fn run(mesh: &OctreeMesh<f64>, k: &[f64]) -> FlowField<f64> {
        let faces = build_face_adjacency(mesh, true).unwrap();
        solve_flow(mesh, &faces, k, &FlowBc::default(), &FlowSolverOptions::default()).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn transmissibility_examples() {
        let (a, d, k) = (2.0, 0.5, 3e-13);
        assert!(rel(face_transmissibility(a, d, k, d, Some(k)), a * k / (2.0 * d)) < 1e-15);
        assert!(face_transmissibility(a, d, 1e-300, d, Some(1.0)) < 1e-298);
        assert!(rel(face_transmissibility(a, d, 1.0, d, Some(3.0)), 3.0 * a / (4.0 * d)) < 1e-15);
        assert_eq!(face_transmissibility(a, d, k, 0.0, None), a * k / d);
    }

    #[test]
    fn bc_validation() {
        assert!(FlowBc { p_in: 1.0, p_out: 1.0, viscosity: 1.0 }.validate().is_err());
        assert!(FlowBc { viscosity: 0.0, ..FlowBc::default() }.validate().is_err());
        assert!(FlowBc::default().validate().is_ok());
    }

    #[test]
    fn homogeneous_block() {
        let mesh = grid(6, 4, 3, 1.0);
        let f = run(&mesh, &vec![1e-14; mesh.len()]);
        assert!(rel(f.k_eff, 1e-14) < 1e-8);
        assert!(rel(f.q_in, f.q_out) < 1e-8);
        assert!(f.within_bounds);
        assert!(f.residual < 1e-10);
        for (c, &p) in mesh.cells.iter().zip(&f.pressure) {
            let x = c.bbox.center().x;
            assert!((p - 1000.0 * (1.0 - x / 6.0)).abs() < 1e-9 * 1000.0);
        }
    }

    #[test]
    fn single_cell() {
        let mesh = grid(1, 1, 1, 2.0);
        let f = run(&mesh, &[5e-15]);
        assert!((f.pressure[0] - 500.0).abs() < 1e-9);
        assert!(rel(f.k_eff, 5e-15) < 1e-12);
    }

    #[test]
    fn series_slabs() {
        let mesh = grid(8, 2, 2, 1.0);
        let (k1, k2) = (1e-12, 1e-15);
        let k: Vec<f64> = mesh.cells.iter().map(|c| if c.bbox.center().x < 4.0 { k1 } else { k2 }).collect();
        let f = run(&mesh, &k);
        assert!(rel(f.k_eff, 2.0 / (1.0 / k1 + 1.0 / k2)) < 1e-6);
        assert!(f.within_bounds);
    }

    #[test]
    fn parallel_slabs() {
        let mesh = grid(6, 4, 2, 1.0);
        let (k1, k2) = (1e-12, 1e-15);
        let k: Vec<f64> = mesh.cells.iter().map(|c| if c.bbox.center().y < 2.0 { k1 } else { k2 }).collect();
        let f = run(&mesh, &k);
        assert!(rel(f.k_eff, 0.5 * (k1 + k2)) < 1e-6);
        assert!(f.within_bounds);
    }

    #[test]
    fn rejects_bad_permeability() {
        let mesh = grid(2, 1, 1, 1.0);
        let faces = build_face_adjacency(&mesh, true).unwrap();
        assert!(matches!(assemble_tpfa(&mesh, &faces, &[1.0, 0.0]), Err(FlowError::BadPermeability { cell: 1, .. })));
        assert!(matches!(assemble_tpfa(&mesh, &faces, &[1.0]), Err(FlowError::Length { .. })));
    }

    #[test]
    fn assembled_system_is_symmetric_with_zero_row_sums() {
        let mesh = grid(4, 3, 2, 1.0);
        let faces = build_face_adjacency(&mesh, true).unwrap();
        let mut rng = RngStream::new(2, 0);
        let k: Vec<f64> = (0..mesh.len()).map(|_| 10f64.powf(-16.0 + 4.0 * rng.uniform())).collect();
        let sys = assemble_tpfa(&mesh, &faces, &k).unwrap();
        assert!(sys.matrix.is_symmetric(0.0));
        // interior rows without Dirichlet faces sum to zero
        for (i, c) in mesh.cells.iter().enumerate() {
            let s: f64 = sys.matrix.row(i).map(|(_, v)| v).sum();
            let x = c.bbox.center().x;
            if x > 1.0 && x < 3.0 {
                assert!(s.abs() < 1e-12 * sys.matrix.get(i, i));
            } else {
                assert!(s > 0.0);
            }
        }
    }

    #[test]
    fn random_heterogeneous_conserves_and_bounds() {
        let mesh = grid(7, 5, 4, 1.0);
        let mut rng = RngStream::new(8, 0);
        let k: Vec<f64> = (0..mesh.len()).map(|_| 10f64.powf(-18.0 + 6.0 * rng.uniform())).collect();
        let f = run(&mesh, &k);
        assert!(rel(f.q_in, f.q_out) < 1e-8);
        assert!(f.max_imbalance < 1e-7);
        assert!(f.within_bounds);
    }

    #[test]
    fn fractured_mesh_solves() {
        let mut p = GenerationParams::<f64>::desk_defaults();
        p.n_fractures = 80;
        p.seed = 5;
        let net = generate_network(&p).unwrap();
        let mesh = build_mesh(&net, &MeshParams::new(5.0, 2)).unwrap();
        let matrix = crate::upscale::MatrixProperties {
            permeability: 1e-16,
            porosity: 0.01,
            porosity_mode: Default::default(),
        };
        let props = crate::upscale::upscale_mesh(&mesh, &net, &matrix, 32).unwrap();
        let f = run(&mesh, &props.permeabilities());
        assert!(rel(f.q_in, f.q_out) < 1e-8);
        assert!(f.within_bounds);
        assert!(f.k_eff >= 1e-16);
    }

    #[test]
    fn error_factor() {
        assert_eq!(keff_error_factor(3.0, 3.0), 0.0);
        assert_eq!(keff_error_factor(2.0, 1.0), 1.0);
        assert_eq!(keff_error_factor(81.0, 1.0), 80.0);
    }
}
