use serde::{Deserialize, Serialize};

use super::sampling::{aperture_from_radius, sample_orientation, sample_radius};
use super::{Fracture, GenerationParams, NetworkError};
use crate::geometry::{polygon_intersects_box, Aabb, Vec3};
use crate::rng::{streams, RngStream};
use crate::scalar::Real;

/// A fracture collection together with the cubic domain it was generated for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FractureNetwork<T> {
    pub fractures: Vec<Fracture<T>>,
    pub domain: Aabb<T>,
    pub params: GenerationParams<T>,
}

impl<T: Real> FractureNetwork<T> {
    /// Wraps hand-built fractures; ids are reassigned to `0..n`.
    pub fn from_fractures(mut fractures: Vec<Fracture<T>>, params: GenerationParams<T>) -> Self {
        for (i, f) in fractures.iter_mut().enumerate() {
            f.id = i;
        }
        Self {
            domain: Aabb::centered_cube(params.domain_size),
            fractures,
            params,
        }
    }

    pub fn len(&self) -> usize {
        self.fractures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fractures.is_empty()
    }

    /// Subset of fractures, renumbered contiguously in the given order.
    pub fn subset(&self, keep: &[usize]) -> Self {
        let fractures = keep.iter().map(|&i| self.fractures[i].clone()).collect();
        let mut out = Self::from_fractures(fractures, self.params.clone());
        out.domain = self.domain;
        out
    }
}

/// True when the polygonized disc has positive-area overlap with `domain`.
pub fn fracture_touches_domain<T: Real>(f: &Fracture<T>, domain: &Aabb<T>, m: usize) -> bool {
    if !f.bounding_box().overlaps(domain) {
        return false;
    }
    polygon_intersects_box(&f.polygon(m), domain)
}

/// Samples a Poissonian disc network.
///
/// Centers are uniform in the domain grown by `buffer` on each side. Unless
/// `count_in_expanded_domain` is set, discs that miss the inner domain are
/// discarded and resampled, so exactly `n_fractures` discs touch it.
pub fn generate_network<T: Real>(params: &GenerationParams<T>) -> Result<FractureNetwork<T>, NetworkError> {
    params.validate()?;
    let domain = Aabb::centered_cube(params.domain_size);
    let sampling = domain.expanded(params.buffer);
    let mut rng = RngStream::new(params.seed, streams::NETWORK);
    let cap = params
        .max_attempts_per_fracture
        .saturating_mul(params.n_fractures.max(1));

    let mut fractures = Vec::with_capacity(params.n_fractures);
    let mut attempts = 0usize;
    while fractures.len() < params.n_fractures {
        if attempts >= cap {
            return Err(NetworkError::GenerationFailed {
                placed: fractures.len(),
                attempts,
            });
        }
        attempts += 1;

        let center = Vec3::new(
            T::lit(rng.uniform_range(sampling.min.x.to_f64_lossy(), sampling.max.x.to_f64_lossy())),
            T::lit(rng.uniform_range(sampling.min.y.to_f64_lossy(), sampling.max.y.to_f64_lossy())),
            T::lit(rng.uniform_range(sampling.min.z.to_f64_lossy(), sampling.max.z.to_f64_lossy())),
        );
        let radius = sample_radius(T::lit(rng.uniform()), params);
        let normal = sample_orientation(&mut rng, params.kappa, params.mean_dir);
        let f = Fracture::new(
            fractures.len(),
            center,
            normal,
            radius,
            aperture_from_radius(radius),
        );
        if params.count_in_expanded_domain
            || fracture_touches_domain(&f, &domain, params.polygon_vertices)
        {
            fractures.push(f);
        }
    }
    log::debug!(
        "generated {} fractures in {} attempts (seed {})",
        fractures.len(),
        attempts,
        params.seed
    );

    Ok(FractureNetwork {
        fractures,
        domain,
        params: params.clone(),
    })
}
