use serde::{Deserialize, Serialize};

use super::sampling::radius_pdf;
use super::{Fracture, FractureNetwork, GenerationParams};
use crate::geometry::{clip_polygon_to_box, Aabb, DEFAULT_POLYGON_VERTICES};
use crate::scalar::Real;

/// `∫ min(r, alpha L) p(r) dr` over `[r0, ru]`.
///
/// Closed form when `alpha L >= ru`; adaptive Simpson quadrature, split at the
/// kink `r = alpha L`, otherwise.
pub fn mean_capped_radius<T: Real>(params: &GenerationParams<T>, domain_size: T) -> T {
    let (a, r0, ru) = (params.alpha, params.r0, params.ru);
    let cap = a * domain_size;
    if cap >= ru {
        let norm = T::one() - (ru / r0).powf(-a);
        if (a - T::one()).abs() < T::lit(1e-12) {
            return a * r0 * (ru / r0).ln() / norm;
        }
        let k = a * r0.powf(a) / norm;
        return k * (ru.powf(T::one() - a) - r0.powf(T::one() - a)) / (T::one() - a);
    }
    let f = |r: T| r.min(cap) * radius_pdf(r, params);
    let tol = T::lit(1e-13);
    if cap <= r0 {
        return adaptive_simpson(&f, r0, ru, tol);
    }
    adaptive_simpson(&f, r0, cap, tol) + adaptive_simpson(&f, cap, ru, tol)
}

/// Percolation parameter `p = (N / L^2) ∫ min(r, alpha L) p(r) dr`.
pub fn percolation_parameter<T: Real>(n: usize, params: &GenerationParams<T>, domain_size: T) -> T {
    T::from_usize_lossy(n) / (domain_size * domain_size) * mean_capped_radius(params, domain_size)
}

/// Critical fracture count, both the value implied by `p = 1` and the pinned
/// override used for density normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriticalCount {
    pub derived: u64,
    pub pinned: Option<u64>,
}

impl CriticalCount {
    pub fn effective(&self) -> u64 {
        self.pinned.unwrap_or(self.derived)
    }

    /// Fracture count for dimensionless density `p_prime`.
    pub fn count_for_density(&self, p_prime: f64) -> usize {
        (p_prime * self.effective() as f64).round() as usize
    }

    /// Dimensionless density of an `n`-fracture network.
    pub fn density_of(&self, n: usize) -> f64 {
        n as f64 / self.effective() as f64
    }
}

/// Smallest `N` with `percolation_parameter(N) >= 1`, plus the configured pin.
pub fn critical_fracture_count<T: Real>(params: &GenerationParams<T>, domain_size: T) -> CriticalCount {
    let per = percolation_parameter(1, params, domain_size);
    let mut n = (T::one() / per).ceil().to_u64().unwrap_or(u64::MAX);
    while percolation_parameter(n as usize, params, domain_size) < T::one() {
        n += 1;
    }
    while n > 0 && percolation_parameter(n as usize - 1, params, domain_size) >= T::one() {
        n -= 1;
    }
    CriticalCount {
        derived: n,
        pinned: params.critical_count_override,
    }
}

/// Options for [`fracture_intensity`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntensityOptions {
    pub polygon_vertices: usize,
    /// Count both faces of every fracture.
    pub double_sided: bool,
}

impl Default for IntensityOptions {
    fn default() -> Self {
        Self {
            polygon_vertices: DEFAULT_POLYGON_VERTICES,
            double_sided: false,
        }
    }
}

/// Area of each fracture clipped to `domain`.
pub fn clipped_areas<T: Real>(fractures: &[Fracture<T>], domain: &Aabb<T>, m: usize) -> Vec<T> {
    use rayon::prelude::*;
    fractures
        .par_iter()
        .map(|f| {
            if !f.bounding_box().overlaps(domain) {
                return T::zero();
            }
            clip_polygon_to_box(&f.polygon(m), domain).area()
        })
        .collect()
}

/// Fracture intensity P32: clipped fracture area per unit domain volume (1/m).
pub fn fracture_intensity<T: Real>(
    fractures: &[Fracture<T>],
    domain: &Aabb<T>,
    opts: IntensityOptions,
) -> T {
    let total = clipped_areas(fractures, domain, opts.polygon_vertices)
        .into_iter()
        .fold(T::zero(), |a, b| a + b);
    let sides = if opts.double_sided { T::lit(2.0) } else { T::one() };
    sides * total / domain.volume()
}

/// [`fracture_intensity`] of a whole network over its own domain.
pub fn network_intensity<T: Real>(net: &FractureNetwork<T>, opts: IntensityOptions) -> T {
    fracture_intensity(&net.fractures, &net.domain, opts)
}

fn adaptive_simpson<T: Real>(f: &impl Fn(T) -> T, a: T, b: T, tol: T) -> T {
    let half = T::lit(0.5);
    let m = (a + b) * half;
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<T: Real>(
    f: &impl Fn(T) -> T,
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: T,
    depth: u32,
) -> T {
    let half = T::lit(0.5);
    let m = (a + b) * half;
    let lm = (a + m) * half;
    let rm = (m + b) * half;
    let (flm, frm) = (f(lm), f(rm));
    let six = T::lit(6.0);
    let left = (m - a) / six * (fa + T::lit(4.0) * flm + fm);
    let right = (b - m) / six * (fm + T::lit(4.0) * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= T::lit(15.0) * tol {
        return left + right + delta / T::lit(15.0);
    }
    simpson_step(f, a, m, fa, flm, fm, left, tol * half, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, tol * half, depth - 1)
}
