use serde::{Deserialize, Serialize};

use crate::scalar::SECONDS_PER_YEAR;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TracerKind {
    Conservative,
    Decaying,
    Sorbing,
}

impl TracerKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Conservative => "conservative",
            Self::Decaying => "decaying",
            Self::Sorbing => "sorbing",
        }
    }
}

/// Linear sorption expressed through a distribution coefficient, giving a
/// cell-wise retardation `1 + K_D / (φ s_l ρ_w)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sorption {
    /// kg/m³.
    pub k_d: f64,
    pub saturation: f64,
    /// kg/m³.
    pub water_density: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracerParams {
    pub kind: TracerKind,
    /// Molecular diffusion, m²/s.
    pub diffusion: f64,
    /// First-order decay constant, 1/s.
    pub decay: f64,
    /// Uniform retardation factor; ignored when `sorption` is set.
    pub retardation: f64,
    #[serde(default)]
    pub sorption: Option<Sorption>,
    /// mol.
    pub injected_mass: f64,
}

pub const DEFAULT_DIFFUSION: f64 = 1e-9;
pub const DEFAULT_HALF_LIFE_YEARS: f64 = 100.0;
pub const DEFAULT_RETARDATION: f64 = 4.0e3;

impl TracerParams {
    pub fn conservative() -> Self {
        Self {
            kind: TracerKind::Conservative,
            diffusion: DEFAULT_DIFFUSION,
            decay: 0.0,
            retardation: 1.0,
            sorption: None,
            injected_mass: 1.0,
        }
    }

    pub fn decaying(half_life_years: f64) -> Self {
        Self {
            kind: TracerKind::Decaying,
            decay: std::f64::consts::LN_2 / (half_life_years * SECONDS_PER_YEAR),
            ..Self::conservative()
        }
    }

    pub fn sorbing(retardation: f64) -> Self {
        Self { kind: TracerKind::Sorbing, retardation, ..Self::conservative() }
    }

    pub fn with_diffusion(mut self, d: f64) -> Self {
        self.diffusion = d;
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.diffusion >= 0.0) || !(self.decay >= 0.0) {
            return Err("diffusion and decay must be non-negative".into());
        }
        if !(self.retardation >= 1.0) {
            return Err(format!("retardation {} below one", self.retardation));
        }
        if !(self.injected_mass > 0.0) {
            return Err("injected mass must be positive".into());
        }
        if let Some(s) = self.sorption {
            if !(s.k_d >= 0.0 && s.saturation > 0.0 && s.water_density > 0.0) {
                return Err("invalid sorption parameters".into());
            }
        }
        Ok(())
    }

    /// Retardation of a cell with porosity `phi`.
    pub fn cell_retardation(&self, phi: f64) -> f64 {
        match self.sorption {
            Some(s) => retardation_factor(s.k_d, phi, s.saturation, s.water_density),
            None => self.retardation,
        }
    }
}

/// `1 + K_D / (φ s_l ρ_w)`.
pub fn retardation_factor(k_d: f64, porosity: f64, saturation: f64, water_density: f64) -> f64 {
    assert!(porosity > 0.0 && saturation > 0.0 && water_density > 0.0);
    1.0 + k_d / (porosity * saturation * water_density)
}
