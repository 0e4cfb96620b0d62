//! Tracer transport on a steady flow field: implicit upwind finite volumes,
//! outflow breakthrough curves and their normalization.

mod btc;
mod params;
mod solver;

use serde::{Deserialize, Serialize};

pub use btc::{
    find_peaks, normalize_btc, normalize_by_time, BreakthroughCurve, NormalizedCurve, Peak, DEFAULT_PEAK_PROMINENCE,
};
pub use params::{
    retardation_factor, Sorption, TracerKind, TracerParams, DEFAULT_DIFFUSION, DEFAULT_HALF_LIFE_YEARS,
    DEFAULT_RETARDATION,
};
pub use solver::{step_transport, Fluxes, TransportOperator, STEP_TOL};

use crate::mesh::{FaceAdjacency, OctreeMesh};
use crate::scalar::{Real, SECONDS_PER_YEAR};
use crate::sparse::SolverError;

#[derive(Debug, thiserror::Error)]
pub enum TransportError {
    #[error("invalid transport input: {0}")]
    InvalidParams(String),
    #[error("mesh has no cells on the inlet plane")]
    NoInletCells,
    #[error("reference curve has no positive peak")]
    FlatReference,
    #[error("step solve failed: {0}")]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Output times and step control, in years.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeSchedule {
    pub first_output_yr: f64,
    pub end_yr: f64,
    pub outputs_per_decade: usize,
    pub initial_dt_yr: f64,
    pub growth: f64,
    /// Steps never exceed this fraction of the current time.
    pub max_step_fraction: f64,
}

impl TimeSchedule {
    pub fn log_spaced(first_output_yr: f64, end_yr: f64, outputs_per_decade: usize) -> Self {
        Self {
            first_output_yr,
            end_yr,
            outputs_per_decade,
            initial_dt_yr: first_output_yr / 10.0,
            growth: 1.2,
            max_step_fraction: 0.1,
        }
    }

    pub fn output_times_yr(&self) -> Vec<f64> {
        let decades = (self.end_yr / self.first_output_yr).log10();
        let n = (decades * self.outputs_per_decade as f64).ceil().max(1.0) as usize;
        let mut t: Vec<f64> = (0..=n)
            .map(|i| self.first_output_yr * 10f64.powf(decades * i as f64 / n as f64))
            .collect();
        *t.last_mut().unwrap() = self.end_yr;
        t
    }

    fn validate(&self) -> Result<(), TransportError> {
        let ok = self.first_output_yr > 0.0
            && self.end_yr > self.first_output_yr
            && self.outputs_per_decade > 0
            && self.initial_dt_yr > 0.0
            && self.growth >= 1.0
            && self.max_step_fraction > 0.0;
        if ok {
            Ok(())
        } else {
            Err(TransportError::InvalidParams(format!("invalid schedule {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TransportResult<T> {
    pub btc: BreakthroughCurve,
    pub final_concentration: Vec<T>,
    pub steps: usize,
    pub linear_iterations: usize,
    /// Steps after which some concentration fell below `-1e-12 max(C)`.
    pub negative_steps: usize,
}

/// Integrates a pulse from `t = 0` to `schedule.end_yr`.
pub fn run_transport<T: Real>(
    mesh: &OctreeMesh<T>,
    faces: &FaceAdjacency<T>,
    porosity: &[T],
    face_flux: &[T],
    params: &TracerParams,
    schedule: &TimeSchedule,
) -> Result<TransportResult<T>, TransportError> {
    schedule.validate()?;
    let op = TransportOperator::new(mesh, faces, porosity, face_flux, params)?;
    let mut c = op.pulse(params.injected_mass)?;
    let outputs = schedule.output_times_yr();
    let m0 = params.injected_mass;
    let mut btc = BreakthroughCurve {
        kind: params.kind,
        injected_mass: m0,
        times_yr: Vec::with_capacity(outputs.len()),
        mass_rate: Vec::with_capacity(outputs.len()),
        cumulative: Vec::with_capacity(outputs.len()),
        in_domain: Vec::with_capacity(outputs.len()),
        decayed: Vec::with_capacity(outputs.len()),
        backflow: Vec::with_capacity(outputs.len()),
    };
    let (mut t, mut dt) = (0.0f64, schedule.initial_dt_yr * SECONDS_PER_YEAR);
    let (mut out, mut decayed, mut back) = (0.0, 0.0, 0.0);
    let (mut steps, mut iters, mut negative_steps) = (0, 0, 0);
    for &target_yr in &outputs {
        let target = target_yr * SECONDS_PER_YEAR;
        while t < target * (1.0 - 1e-12) {
            let cap = schedule.max_step_fraction * t.max(schedule.first_output_yr * SECONDS_PER_YEAR);
            let h = dt.min(cap).min(target - t);
            iters += op.step(&mut c, h)?;
            let fx = op.fluxes(&c);
            out += fx.outlet * h;
            back += fx.backflow * h;
            decayed += fx.decay * h;
            t += h;
            steps += 1;
            let cmax = c.iter().fold(T::zero(), |m, &v| m.max(v));
            if c.iter().any(|&v| v < -T::lit(1e-12) * cmax) {
                negative_steps += 1;
            }
            dt *= schedule.growth;
        }
        let fx = op.fluxes(&c);
        btc.times_yr.push(target_yr);
        btc.mass_rate.push(fx.outlet * SECONDS_PER_YEAR);
        btc.cumulative.push(out);
        btc.in_domain.push(op.mass(&c));
        btc.decayed.push(decayed);
        btc.backflow.push(back);
    }
    if negative_steps > 0 {
        log::warn!("{negative_steps} transport steps produced negative concentrations");
    }
    log::info!(
        "{} transport: {steps} steps, {iters} linear iterations, ledger error {:.2e}",
        params.kind.name(),
        btc.ledger_error()
    );
    Ok(TransportResult { btc, final_concentration: c, steps, linear_iterations: iters, negative_steps })
}
