use crate::geometry::Vec3;
use crate::rng::RngStream;
use crate::scalar::Real;

use super::GenerationParams;

/// Inverse CDF of the truncated power law
/// `p(r) = (alpha/r0) (r/r0)^(-1-alpha) / (1 - (ru/r0)^(-alpha))` on `[r0, ru]`.
pub fn sample_radius<T: Real>(u: T, params: &GenerationParams<T>) -> T {
    let (a, r0, ru) = (params.alpha, params.r0, params.ru);
    let tail = (ru / r0).powf(-a);
    let r = r0 * (T::one() - u * (T::one() - tail)).powf(-T::one() / a);
    r.max(r0).min(ru)
}

/// Analytic CDF of the truncated power law.
pub fn radius_cdf<T: Real>(r: T, params: &GenerationParams<T>) -> T {
    let (a, r0, ru) = (params.alpha, params.r0, params.ru);
    if r <= r0 {
        return T::zero();
    }
    if r >= ru {
        return T::one();
    }
    (T::one() - (r / r0).powf(-a)) / (T::one() - (ru / r0).powf(-a))
}

/// Truncated power-law density.
pub fn radius_pdf<T: Real>(r: T, params: &GenerationParams<T>) -> T {
    let (a, r0, ru) = (params.alpha, params.r0, params.ru);
    if r < r0 || r > ru {
        return T::zero();
    }
    a / r0 * (r / r0).powf(-T::one() - a) / (T::one() - (ru / r0).powf(-a))
}

/// Cosine of the polar angle about the mean direction for a von Mises–Fisher
/// deviate on the sphere, from `u` in `(0, 1]`.
pub fn vmf_cos_angle<T: Real>(u: T, kappa: T) -> T {
    if kappa == T::zero() {
        return (T::lit(2.0) * u - T::one()).max(-T::one()).min(T::one());
    }
    // 1 + ln(u + (1-u) e^{-2k}) / k, written with ln_1p / exp_m1 so that both
    // k -> 0 and k -> inf stay accurate
    let two_k = T::lit(2.0) * kappa;
    let w = T::one() + ((T::one() - u) * (-two_k).exp_m1()).ln_1p() / kappa;
    w.max(-T::one()).min(T::one())
}

/// Unit normal drawn from the von Mises–Fisher distribution on the sphere.
///
/// `kappa = 0` gives the uniform distribution exactly.
pub fn sample_orientation<T: Real>(rng: &mut RngStream, kappa: T, mean_dir: Vec3<T>) -> Vec3<T> {
    let w = vmf_cos_angle(T::lit(rng.uniform_open_low()), kappa);
    let phi = T::TAU() * T::lit(rng.uniform());
    let s = (T::one() - w * w).max(T::zero()).sqrt();
    let (u, v) = mean_dir.orthonormal_basis();
    let n = u * (s * phi.cos()) + v * (s * phi.sin()) + mean_dir * w;
    n.normalized().unwrap_or(mean_dir)
}

/// Hydraulic aperture correlated with radius: `b = 5e-4 sqrt(r)`.
pub fn aperture_from_radius<T: Real>(r: T) -> T {
    T::lit(5.0e-4) * r.sqrt()
}
