use serde::{Deserialize, Serialize};

use super::NetworkError;
use crate::geometry::{Vec3, DEFAULT_POLYGON_VERTICES};
use crate::scalar::Real;

fn default_attempts() -> usize {
    10_000
}

fn default_vertices() -> usize {
    DEFAULT_POLYGON_VERTICES
}

/// Parameters of a single-family Poissonian disc network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct GenerationParams<T> {
    /// Power-law decay exponent of the radius distribution.
    pub alpha: T,
    /// Lower radius cutoff (m).
    pub r0: T,
    /// Upper radius cutoff (m).
    pub ru: T,
    /// von Mises–Fisher concentration.
    pub kappa: T,
    /// Mean orientation (unit vector).
    pub mean_dir: Vec3<T>,
    /// Edge of the cubic domain (m).
    pub domain_size: T,
    /// Expansion of the sampling box on every side (m).
    pub buffer: T,
    pub n_fractures: usize,
    pub seed: u64,
    /// Count every sampled fracture, including those that never touch the
    /// inner domain, instead of resampling until `n_fractures` touch it.
    #[serde(default)]
    pub count_in_expanded_domain: bool,
    /// Rejection-loop cap, per requested fracture.
    #[serde(default = "default_attempts")]
    pub max_attempts_per_fracture: usize,
    #[serde(default = "default_vertices")]
    pub polygon_vertices: usize,
    /// Fracture count pinned as the critical density for this domain size.
    #[serde(default)]
    pub critical_count_override: Option<u64>,
}

impl<T: Real> GenerationParams<T> {
    /// Crystalline-rock reference network in a 50 m cube.
    pub fn full_scale() -> Self {
        Self {
            alpha: T::lit(1.8),
            r0: T::one(),
            ru: T::lit(10.0),
            kappa: T::lit(0.1),
            mean_dir: Vec3::new(T::zero(), T::zero(), T::one()),
            domain_size: T::lit(50.0),
            buffer: T::lit(5.0),
            n_fractures: 1000,
            seed: 0,
            count_in_expanded_domain: false,
            max_attempts_per_fracture: default_attempts(),
            polygon_vertices: DEFAULT_POLYGON_VERTICES,
            critical_count_override: Some(1000),
        }
    }

    /// Laptop-scale variant: 25 m cube, critical count scaled by (25/50)^2.
    pub fn desk_defaults() -> Self {
        Self {
            domain_size: T::lit(25.0),
            n_fractures: 250,
            critical_count_override: Some(250),
            ..Self::full_scale()
        }
    }

    pub fn validate(&self) -> Result<(), NetworkError> {
        let bad = |msg: &str| Err(NetworkError::InvalidParams(msg.to_string()));
        if !(self.alpha > T::zero()) {
            return bad("alpha must be positive");
        }
        if !(self.r0 > T::zero() && self.r0 < self.ru) {
            return bad("radius cutoffs must satisfy 0 < r0 < ru");
        }
        if !(self.kappa >= T::zero()) {
            return bad("kappa must be non-negative");
        }
        if !(self.domain_size > T::zero()) {
            return bad("domain size must be positive");
        }
        if !(self.buffer >= T::zero()) {
            return bad("buffer must be non-negative");
        }
        let tol = if std::mem::size_of::<T>() == 4 {
            T::lit(1e-6)
        } else {
            T::lit(1e-12)
        };
        if (self.mean_dir.norm() - T::one()).abs() > tol {
            return bad("mean direction must be a unit vector");
        }
        if self.polygon_vertices < 8 {
            return bad("polygon_vertices must be at least 8");
        }
        Ok(())
    }
}
