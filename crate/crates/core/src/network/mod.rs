//! Stochastic disc-network generation and density/intensity metrics.

mod fracture;
mod generate;
pub mod io;
mod metrics;
mod params;
mod sampling;

use thiserror::Error;

pub use fracture::Fracture;
pub use generate::{fracture_touches_domain, generate_network, FractureNetwork};
pub use metrics::{
    clipped_areas, critical_fracture_count, fracture_intensity, mean_capped_radius,
    network_intensity, percolation_parameter, CriticalCount, IntensityOptions,
};
pub use params::GenerationParams;
pub use sampling::{
    aperture_from_radius, radius_cdf, radius_pdf, sample_orientation, sample_radius,
    vmf_cos_angle,
};

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("invalid generation parameters: {0}")]
    InvalidParams(String),
    #[error("generation gave up after {attempts} attempts with {placed} fractures placed")]
    GenerationFailed { placed: usize, attempts: usize },
    #[error("network file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
