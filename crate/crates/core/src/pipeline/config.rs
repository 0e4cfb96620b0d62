use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::PipelineError;
use crate::flow::{FlowBc, FlowSolverOptions};
use crate::geometry::DEFAULT_INTERSECTION_EPS;
use crate::network::GenerationParams;
use crate::transport::{TimeSchedule, TracerParams, DEFAULT_HALF_LIFE_YEARS, DEFAULT_PEAK_PROMINENCE, DEFAULT_RETARDATION};
use crate::upscale::PorosityMode;

/// Whether fractures outside the inlet-outlet cluster are kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IsolatedMode {
    Retained,
    Removed,
}

impl IsolatedMode {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Retained => "retained",
            Self::Removed => "removed",
        }
    }
}

impl std::str::FromStr for IsolatedMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "retained" => Ok(Self::Retained),
            "removed" => Ok(Self::Removed),
            _ => Err(format!("unknown isolated mode '{s}' (expected retained or removed)")),
        }
    }
}

/// Pipeline stages in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Generate,
    Mesh,
    Upscale,
    Flow,
    Transport,
}

impl Stage {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Generate => "generate",
            Self::Mesh => "mesh",
            Self::Upscale => "upscale",
            Self::Flow => "flow",
            Self::Transport => "transport",
        }
    }

    /// Process exit code used when this stage fails.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Generate => 10,
            Self::Mesh => 11,
            Self::Upscale => 12,
            Self::Flow => 13,
            Self::Transport => 14,
        }
    }
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshConfig {
    /// Base cell edge `l`, m.
    pub cell_size: f64,
    #[serde(default = "default_true")]
    pub balance_2to1: bool,
}

fn default_eps() -> f64 {
    DEFAULT_INTERSECTION_EPS
}

fn default_prominence() -> f64 {
    DEFAULT_PEAK_PROMINENCE
}

fn default_stage() -> Stage {
    Stage::Transport
}

/// Experiment grid: every combination of seed, density, isolated mode, orl
/// and matrix permeability is one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub generation: GenerationParams<f64>,
    /// Dimensionless densities; empty means use `generation.n_fractures`.
    #[serde(default)]
    pub p_primes: Vec<f64>,
    pub seeds: Vec<u64>,
    pub mesh: MeshConfig,
    pub orls: Vec<u8>,
    pub k_m: Vec<f64>,
    pub phi_m: f64,
    #[serde(default)]
    pub porosity_mode: PorosityMode,
    #[serde(default)]
    pub flow_bc: FlowBc,
    #[serde(default)]
    pub solver: FlowSolverOptions,
    #[serde(default)]
    pub tracers: Vec<TracerParams>,
    pub schedule: TimeSchedule,
    pub isolated_modes: Vec<IsolatedMode>,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub write_vtk: bool,
    #[serde(default = "default_eps")]
    pub intersection_eps: f64,
    #[serde(default = "default_prominence")]
    pub peak_prominence: f64,
    /// Last stage executed.
    #[serde(default = "default_stage")]
    pub stop_after: Stage,
}

impl RunConfig {
    /// 25 m cube, 5 m base cells, critical density, orl 1..3.
    pub fn desk() -> Self {
        Self {
            generation: GenerationParams::desk_defaults(),
            p_primes: vec![1.0],
            seeds: vec![1],
            mesh: MeshConfig { cell_size: 5.0, balance_2to1: true },
            orls: vec![1, 2, 3],
            k_m: vec![1e-16],
            phi_m: 0.01,
            porosity_mode: PorosityMode::Blended,
            flow_bc: FlowBc::default(),
            solver: FlowSolverOptions::default(),
            tracers: vec![
                TracerParams::conservative(),
                TracerParams::decaying(DEFAULT_HALF_LIFE_YEARS),
                TracerParams::sorbing(DEFAULT_RETARDATION),
            ],
            schedule: TimeSchedule::log_spaced(1e-2, 1e8, 10),
            isolated_modes: vec![IsolatedMode::Retained],
            output_dir: PathBuf::from("udfm-out"),
            write_vtk: true,
            intersection_eps: DEFAULT_INTERSECTION_EPS,
            peak_prominence: DEFAULT_PEAK_PROMINENCE,
            stop_after: Stage::Transport,
        }
    }

    /// 50 m cube with the full density and refinement sweep.
    pub fn full_scale() -> Self {
        Self {
            generation: GenerationParams::full_scale(),
            p_primes: vec![0.5, 0.75, 1.0, 1.5, 2.0],
            orls: vec![1, 2, 3, 4],
            k_m: vec![1e-12, 1e-14, 1e-16, 1e-18],
            isolated_modes: vec![IsolatedMode::Retained, IsolatedMode::Removed],
            ..Self::desk()
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        self.generation.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        if self.seeds.is_empty() || self.orls.is_empty() {
            return bad("at least one seed and one orl are required".into());
        }
        if self.k_m.is_empty() || self.isolated_modes.is_empty() {
            return bad("at least one matrix permeability and one isolated mode are required".into());
        }
        if let Some(k) = self.k_m.iter().find(|&&k| !(k > 0.0)) {
            return bad(format!("matrix permeability {k} must be positive"));
        }
        if !(self.phi_m > 0.0 && self.phi_m < 1.0) {
            return bad(format!("matrix porosity {} outside (0, 1)", self.phi_m));
        }
        if let Some(p) = self.p_primes.iter().find(|&&p| !(p >= 0.0)) {
            return bad(format!("density {p} must be non-negative"));
        }
        if !(self.mesh.cell_size > 0.0) {
            return bad("cell size must be positive".into());
        }
        self.flow_bc.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        for t in &self.tracers {
            t.validate().map_err(PipelineError::Config)?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the compact JSON form, excluding the output directory.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        hex::encode(Sha256::digest(serde_json::to_vec(&c).expect("config serializes")))
    }
}
